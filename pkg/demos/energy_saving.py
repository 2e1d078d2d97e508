"""Flip the coin before, not after, the probe.

The modified p-persistent rule decides whether to participate *before*
sensing; the conventional rule senses first and gates only the transmit
decision.  Both produce statistically identical transmission behaviour (at
equal seeds, bit-identical trajectories), but the modified rule skips a
fraction 1-p of all probes: the whole saving lands in sensing energy.
"""

from rsop.config import load_bundled
from rsop.simulator import simulate_scenario

print(f"{'shape':>10} {'conv r':>8} {'mod r':>8} {'diff':>7} "
      f"{'conv probes':>12} {'mod probes':>11} {'saving':>7}")
for shape in ((3, 7), (5, 7), (7, 3), (7, 5)):
    sc = load_bundled(f"adapt_ns{shape[0]}_np{shape[1]}")
    conv = simulate_scenario(sc, n_slots=60_000, seed=41, protocol="conventional")
    mod = simulate_scenario(sc, n_slots=60_000, seed=42, protocol="modified")
    diff = mod.network_throughput / conv.network_throughput - 1.0
    saving = 1.0 - mod.sensing_overhead / conv.sensing_overhead
    print(f"{str(shape):>10} {conv.network_throughput:8.4f} "
          f"{mod.network_throughput:8.4f} {diff:+7.2%} "
          f"{conv.sensing_overhead:12.4f} {mod.sensing_overhead:11.4f} "
          f"{saving:7.1%}")
print("\nper-channel sensing cost drops by about the skip rate (1 - p) while")
print("throughput moves only within Monte Carlo noise")
