"""Brute-force benchmark: maximize throughput over (tau, p) under QoS caps.

The decision space is two-dimensional and box-bounded regardless of network
size, so an exhaustive grid evaluated through the chain analyzer is the
reference solution the distributed algorithms are judged against.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import ResolvedDetector, analyze, resolve_detector
from .config import NetworkConfig, QosConstraints, SensingParams
from .detector import min_sensing_time
from .errors import EmptyGrid, ScenarioError


@dataclass
class GridSpec:
    """Rectangular (tau, p) grid."""

    tau_lo: float
    tau_hi: float
    tau_steps: int
    p_lo: float = 0.01
    p_hi: float = 1.0
    p_steps: int = 64

    def __post_init__(self):
        if self.tau_steps < 2 or self.p_steps < 2:
            raise EmptyGrid("grid needs at least 2 steps per axis")
        if not (self.tau_lo < self.tau_hi and self.p_lo < self.p_hi):
            raise EmptyGrid("grid ranges must be nonempty")

    def tau_values(self) -> np.ndarray:
        return np.linspace(self.tau_lo, self.tau_hi, self.tau_steps)

    def p_values(self) -> np.ndarray:
        return np.linspace(self.p_lo, self.p_hi, self.p_steps)

    @classmethod
    def default_for(cls, config: NetworkConfig, qos: QosConstraints,
                    tau_steps: int = 64, p_steps: int = 64) -> "GridSpec":
        """tau from the minimum sensing time at the weakest stage-1 SNR up to
        half the slot; p over (0, 1]."""
        tau_lo = float(np.max(min_sensing_time(config.snr_stage1,
                                               config.sampling_freq,
                                               qos.p_fa_max, qos.p_d_min)))
        # keep the grid nonempty when the minimum sensing time crowds the slot
        tau_lo = min(tau_lo, 0.45 * config.slot_duration)
        return cls(tau_lo=tau_lo, tau_hi=0.5 * config.slot_duration,
                   tau_steps=tau_steps, p_steps=p_steps)


@dataclass
class PointEval:
    """One grid point: metrics plus constraint verdict."""

    tau: float
    p: float
    r: float               # per-SU throughput
    t_i: float
    p_md_max: float
    feasible: bool


@dataclass
class OptResult:
    tau_star: float
    p_star: float
    r_star: float            # per-SU throughput at the optimum
    t_i_at_star: float
    feasible: bool           # False when no grid point satisfies the caps
    table: list[PointEval] = field(repr=False, default_factory=list)


def evaluate_point(config: NetworkConfig, tau: float, p: float,
                   qos: QosConstraints, resolved: ResolvedDetector) -> PointEval:
    """Analyze one (tau, p) point and check the interference and misdetection
    caps (the box constraints hold by construction)."""
    if not 0 <= tau <= config.slot_duration or not 0 <= p <= 1:
        raise ScenarioError("evaluate_point called outside the decision box")
    result = analyze(config, SensingParams(tau=tau, p=p), resolved)
    feasible = (result.interference <= qos.t_i_max
                and result.p_md_max <= qos.p_md_max)
    return PointEval(tau=tau, p=p, r=result.throughput, t_i=result.interference,
                     p_md_max=result.p_md_max, feasible=feasible)


def brute_force_optimize(config: NetworkConfig, grid: GridSpec,
                         qos: QosConstraints, resolved: ResolvedDetector = None,
                         evaluator=None, n_jobs: int = 1) -> OptResult:
    """Exhaustive grid search.

    Returns the feasible point with maximum throughput; ties break toward
    smaller tau, then smaller p, so the result does not depend on evaluation
    order.  When nothing is feasible the best-throughput infeasible point is
    reported with ``feasible=False``.  ``evaluator`` may replace the default
    analyzer-backed :func:`evaluate_point` (e.g. a simulation-backed mode).
    """
    if evaluator is None:
        if resolved is None:
            raise ScenarioError("brute_force_optimize needs a resolved detector "
                                "or an explicit evaluator")

        def evaluator(tau, p):
            return evaluate_point(config, tau, p, qos, resolved)

    points = [(tau, p) for tau in grid.tau_values() for p in grid.p_values()]
    if not points:
        raise EmptyGrid("no grid points")
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            table = list(pool.map(lambda tp: evaluator(*tp), points))
    else:
        table = [evaluator(tau, p) for tau, p in points]

    def key(pt: PointEval):
        # feasibility first, then throughput, then small tau, then small p
        return (pt.feasible, pt.r, -pt.tau, -pt.p)

    best = max(table, key=key)
    return OptResult(tau_star=best.tau, p_star=best.p, r_star=best.r,
                     t_i_at_star=best.t_i, feasible=best.feasible, table=table)


def optimize_scenario(scenario, grid: GridSpec | None = None,
                      tau_steps: int = 64, p_steps: int = 64,
                      n_jobs: int = 1) -> OptResult:
    """Grid-optimize a scenario with its own QoS and calibrated detector."""
    resolved = resolve_detector(scenario.config, scenario.detector, scenario.qos,
                                scenario.params.tau)
    if grid is None:
        grid = GridSpec.default_for(scenario.config, scenario.qos,
                                    tau_steps=tau_steps, p_steps=p_steps)
    return brute_force_optimize(scenario.config, grid, scenario.qos,
                                resolved=resolved, n_jobs=n_jobs)
