"""Is the sign-feedback update really a stochastic subgradient?

At a grid of operating points, run one coarse-update cycle many times and
average the raw update vectors over users and realizations.  If the scheme
descends the true objective f = -r, that mean direction should make a
nonnegative inner product with the numerical gradient of f wherever the point
is away from the optimum.
"""

import numpy as np

from rsop.adaptive import subgradient_field
from rsop.config import load_bundled

sc = load_bundled("field_ns5_np5")
taus, ps = np.meshgrid([5.7e-3, 6.5e-3, 7.5e-3, 8.5e-3],
                       [0.25, 0.45, 0.7, 0.9])
points = subgradient_field(sc, taus.ravel(), ps.ravel(),
                           n_realizations=2000, seed=12)

print(f"{'tau (ms)':>9} {'p':>5} {'mean update (tau, p)':>26} "
      f"{'grad f (tau, p)':>22} {'aligned':>8}")
for pt in points:
    print(f"{pt.tau * 1e3:9.2f} {pt.p:5.2f} "
          f"({pt.mean_g[0]:+.2e}, {pt.mean_g[1]:+.4f}) "
          f"({pt.grad_f[0]:+8.2f}, {pt.grad_f[1]:+.3f}) "
          f"{'yes' if pt.aligned else 'NO':>8}")
aligned = sum(pt.aligned for pt in points)
print(f"\n{aligned}/{len(points)} points aligned with the analytic gradient")
