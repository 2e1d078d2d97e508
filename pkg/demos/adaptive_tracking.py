"""Distributed adaptation against the centralized brute-force benchmark.

For each network shape: grid-search the best static (tau, p) with the chain
model, then let every SU adapt on its own from ACK feedback only - coarse
per-frame tuning (algorithm 1) and additional per-stage fine tuning
(algorithm 2).  No SU ever talks to another.  The fine-tuned variant
typically edges past the static benchmark: it can shorten later probes and
probe later stages more eagerly, degrees of freedom a single static pair
does not have.
"""

from rsop.adaptive import run_adaptive
from rsop.config import load_bundled
from rsop.optimizer import optimize_scenario

print(f"{'shape':>10} {'static r*':>10} {'(tau*, p*)':>22} "
      f"{'coarse':>8} {'fine':>8} {'interference':>12}")
for shape in ((3, 7), (5, 7), (7, 3), (7, 5)):
    sc = load_bundled(f"adapt_ns{shape[0]}_np{shape[1]}")
    opt = optimize_scenario(sc, tau_steps=48, p_steps=48)
    net_rstar = sc.config.n_su * opt.r_star
    coarse = run_adaptive(sc, algorithm=1, n_frames=700, seed=3)
    fine = run_adaptive(sc, algorithm=2, n_frames=700, seed=3)
    print(f"{str(shape):>10} {net_rstar:10.4f} "
          f"({opt.tau_star * 1e3:7.3f} ms, {opt.p_star:4.2f}) "
          f"{coarse.converged_network_throughput:8.4f} "
          f"{fine.converged_network_throughput:8.4f} "
          f"{fine.converged_interference:12.4f}")

print("\nconvergence detail on the (3, 7) shape (mean over SUs):")
sc = load_bundled("adapt_ns3_np7")
run = run_adaptive(sc, algorithm=1, n_frames=300, seed=3)
for fl in run.frames[::30]:
    print(f"  frame {fl.k:4d}: tau = {fl.tau.mean() * 1e3:6.3f} ms  "
          f"p = {fl.p.mean():5.3f}  frame throughput = {fl.network_throughput:6.3f}")
