"""Throughput against the number of licensed channels.

With more channels per user, collisions die out and each SU saturates toward
its single-user ceiling, so the network curves for 2 and 5 SUs converge to a
5/2 ratio.  The ideal bound min(N_s, expected vacant channels) sits far above
at these sizes: the users, not the spectrum, are the bottleneck.
"""

from rsop.chain import analyze_scenario
from rsop.config import load_bundled
from rsop.core import upper_bound_throughput
from rsop.simulator import simulate_scenario

curves = {}
print(f"{'N_p':>5} {'2 SUs (model/sim)':>20} {'5 SUs (model/sim)':>20} {'bound(5)':>9}")
for n_pu in (5, 10, 20, 50, 100):
    row = {}
    for n_su in (2, 5):
        sc = load_bundled(f"validation_ns{n_su}_np{n_pu}")
        ana = analyze_scenario(sc)
        sim = simulate_scenario(sc, n_slots=6000, seed=19)
        row[n_su] = (ana.network_throughput, sim.network_throughput)
    bound = upper_bound_throughput(5, load_bundled(f"validation_ns5_np{n_pu}").config.presence_prob)
    curves[n_pu] = row
    print(f"{n_pu:5d} {row[2][0]:9.4f}/{row[2][1]:-9.4f} "
          f"{row[5][0]:10.4f}/{row[5][1]:-9.4f} {bound:9.2f}")

r2 = curves[100][2][1]
r5 = curves[100][5][1]
print(f"\nat 100 channels the 5-SU network carries {r5 / r2:.2f}x the 2-SU "
      f"network (saturation ratio 5/2 = 2.5)")
