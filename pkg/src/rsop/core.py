"""Slot timing arithmetic, sensing-order draws, and the ideal throughput bound."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidTiming, StageOutOfRange


def max_sensing_stages(slot_duration: float, tau: float, handoff_time: float,
                       n_pu: int) -> int:
    """Maximum number of channels an SU can sense in one slot.

    delta = 1 + min(floor((T - tau) / (tau + tau_h)), N_p - 1); always in
    [1, N_p].  The first probe costs tau, every further probe costs a handoff
    plus another sensing period.
    """
    if tau <= 0 or tau > slot_duration:
        raise InvalidTiming(f"tau={tau} outside (0, T={slot_duration}]")
    if handoff_time < 0:
        raise InvalidTiming(f"handoff_time={handoff_time} must be nonnegative")
    if n_pu < 1:
        raise InvalidTiming(f"n_pu={n_pu} must be at least 1")
    extra = math.floor((slot_duration - tau) / (tau + handoff_time))
    return 1 + min(extra, n_pu - 1)


def remaining_time(stage: int, slot_duration: float, tau: float,
                   handoff_time: float) -> float:
    """Transmission time left after the stage-``stage`` probe ends.

    RT_n = T - tau - (n - 1)(tau + tau_h).  Raises StageOutOfRange when the
    stage does not fit in the slot (negative remainder).
    """
    if stage < 1:
        raise StageOutOfRange(f"stage={stage} must be at least 1")
    rt = slot_duration - tau - (stage - 1) * (tau + handoff_time)
    if rt < 0:
        raise StageOutOfRange(f"stage={stage} leaves no time in the slot")
    return rt


def remaining_times(n_stages: int, slot_duration: float, tau: float,
                    handoff_time: float) -> np.ndarray:
    """RT_n for n = 1..n_stages as an array."""
    n = np.arange(1, n_stages + 1)
    return slot_duration - tau - (n - 1) * (tau + handoff_time)


def draw_sensing_order(rng: np.random.Generator, n_pu: int, delta: int) -> np.ndarray:
    """Random sensing order: ``delta`` channels drawn i.i.d. uniform, 1-based.

    Drawn with replacement; every handoff state routes to every channel with
    the same probability regardless of history.
    """
    if delta < 1:
        raise StageOutOfRange(f"delta={delta} must be at least 1")
    return rng.integers(1, n_pu + 1, size=delta)


def upper_bound_throughput(n_su: int, presence_prob) -> float:
    """Ideal network throughput bound: min(N_s, sum_m (1 - P_m1)).

    No sensing overhead, no errors, no collisions: limited only by the number
    of SUs and the mean number of vacant channels.
    """
    free = float(np.sum(1.0 - np.asarray(presence_prob, dtype=float)))
    return min(float(n_su), free)
