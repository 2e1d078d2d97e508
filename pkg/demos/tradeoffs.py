"""The two classic dials: sensing time and sensing probability.

Part 1 sweeps the probe duration tau on a 3-SU / 7-channel network whose
detector runs at a constant false-alarm threshold.  Short probes waste free
channels on false alarms, long probes waste the slot on sensing; throughput
peaks in between while interference only falls.

Part 2 sweeps the access probability p on a 20-SU / 5-channel network: probing
more aggressively first wins (more attempts) and then loses (collisions), in
both the model and the simulator.
"""

import numpy as np

from rsop.chain import analyze_scenario
from rsop.config import load_bundled
from rsop.detector import min_sensing_time
from rsop.simulator import simulate_scenario

# --- Part 1: throughput against sensing time -------------------------------
sc = load_bundled("tradeoff_ns3_np7")
tau_min = min_sensing_time(float(sc.config.snr_stage1[0]),
                           sc.config.sampling_freq,
                           sc.qos.p_fa_max, sc.qos.p_d_min)
taus = np.concatenate([np.linspace(tau_min, 10 * tau_min, 13),
                       np.linspace(12 * tau_min, 5e-3, 6)])
print("sensing-time sweep (3 SUs, 7 channels, CFAR threshold)")
print(f"{'tau/T':>8} {'stages':>6} {'net r':>8} {'t_I':>8}")
best = (0, None)
for tau in taus:
    res = analyze_scenario(sc, tau=float(tau))
    if res.network_throughput > best[0]:
        best = (res.network_throughput, tau)
    print(f"{tau / sc.config.slot_duration:8.4f} {res.n_stages:6d} "
          f"{res.network_throughput:8.4f} {res.interference:8.5f}")
print(f"peak {best[0]:.4f} at tau = {best[1] / sc.config.slot_duration:.4f} T "
      f"(minimum sensing time is {tau_min / sc.config.slot_duration:.4f} T)\n")

# --- Part 2: throughput against sensing probability ------------------------
sc = load_bundled("dense_ns20_np5")
print("access-probability sweep (20 SUs, 5 channels)")
print(f"{'p':>5} {'model':>8} {'simulated':>10}")
for p in np.round(np.arange(0.1, 1.01, 0.1), 10):
    ana = analyze_scenario(sc, p=float(p))
    sim = simulate_scenario(sc, n_slots=4000, seed=11, p=float(p))
    print(f"{p:5.2f} {ana.network_throughput:8.4f} {sim.network_throughput:10.4f}")
print("both columns rise and then fall: contention punishes eagerness")
