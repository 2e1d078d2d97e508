"""Exact Markov-chain performance model of the random sensing-order policy.

One SU per slot walks a finite chain: from handoff state HO_n it skips with
probability 1-p or probes a uniformly chosen channel; a probe ends in a
transmission state T_n (free channel, no false alarm), an interference state
I_n (busy channel sensed free), or the next handoff state.  After the last
stage the walker parks in the terminate state TE.  HO_1 is a zero-duration
formal state: every slot starts there.

The model is mean-field: channel occupancy grows stage by stage with the
average number of SUs that started transmitting earlier, and every SU sees
the same stage-dependent occupancy and error probabilities.  Throughput and
interference follow from per-state occupation probabilities plus a pruned
chain that yields the probability a competitor never transmits on a given
channel from a given stage on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DetectorSpec, NetworkConfig, QosConstraints, SensingParams
from .core import max_sensing_stages, remaining_times
from .detector import (
    detection_prob,
    false_alarm_prob,
    threshold_for_detection,
    threshold_for_false_alarm,
)
from .errors import ScenarioError

_CLAMP_TOL = 1e-9


def _clamp01(x, what: str):
    """Clamp probabilities to [0, 1]; drift beyond 1e-9 is a real bug."""
    x = np.asarray(x, dtype=float)
    worst = max(float(np.max(x, initial=0.0)) - 1.0, -float(np.min(x, initial=1.0)))
    assert worst <= _CLAMP_TOL, f"{what} left [0,1] by {worst:.3e}"
    return np.clip(x, 0.0, 1.0)


def _fa_power(p_fa: np.ndarray, exponent: float) -> np.ndarray:
    """p_fa ** exponent with the 0**0 = 1 convention (no sensors, no effect)."""
    return np.power(p_fa, exponent)  # numpy already defines 0.0**0.0 == 1.0


# ---------------------------------------------------------------------------
# Detector resolution and stage profiles
# ---------------------------------------------------------------------------

@dataclass
class ResolvedDetector:
    """Detector with the threshold pinned; shared by analyzer and simulator."""

    mode: str                                # "energy" | "explicit"
    lambda_norm: np.ndarray | None = None    # per-channel normalized threshold
    p_fa: float | None = None                # explicit mode
    p_d_stages: np.ndarray | None = None     # explicit mode, indexed by stage
    per_stage_snr: bool = False

    def explicit_p_d(self, stage: int) -> float:
        """Explicit-mode detection probability at 1-based ``stage``."""
        idx = min(stage, len(self.p_d_stages)) - 1
        return float(self.p_d_stages[idx])


def resolve_detector(config: NetworkConfig, detector: DetectorSpec,
                     qos: QosConstraints | None,
                     nominal_tau: float) -> ResolvedDetector:
    """Fix the detector threshold once for a scenario.

    Energy mode calibrates lambda/sigma_z^2 per channel at ``calibrate_tau``
    (default: the nominal tau) against the stage-1 SNR so that either the
    stage-1 detection hits ``qos.p_d_min`` or the false alarm hits
    ``qos.p_fa_max``; the threshold is then held fixed for every (tau, p)
    evaluated afterwards.
    """
    if detector.mode == "explicit":
        p_d = np.atleast_1d(np.asarray(detector.p_d, dtype=float))
        return ResolvedDetector(mode="explicit", p_fa=float(detector.p_fa),
                                p_d_stages=p_d)
    if detector.threshold is not None:
        lam = np.full(config.n_pu, float(detector.threshold))
        return ResolvedDetector(mode="energy", lambda_norm=lam,
                                per_stage_snr=detector.per_stage_snr)
    if qos is None:
        raise ScenarioError("energy-detector calibration needs QoS targets")
    cal_tau = detector.calibrate_tau if detector.calibrate_tau is not None else nominal_tau
    if detector.calibration == "pd_min":
        lam = threshold_for_detection(config.snr_stage1, cal_tau,
                                      config.sampling_freq, qos.p_d_min)
    else:
        lam = np.full(
            config.n_pu,
            float(threshold_for_false_alarm(cal_tau, config.sampling_freq,
                                            qos.p_fa_max)),
        )
    return ResolvedDetector(mode="energy", lambda_norm=np.atleast_1d(lam),
                            per_stage_snr=detector.per_stage_snr)


@dataclass
class StageProfiles:
    """Per-channel, per-stage sensing error probabilities and mean SNRs."""

    p_fa: np.ndarray       # (n_pu,) stage-constant false alarm
    p_d: np.ndarray        # (n_pu, n_stages) detection probability
    gamma: np.ndarray      # (n_pu, n_stages) mean SNR; zeros in explicit mode
    n_stages: int

    @property
    def p_md(self) -> np.ndarray:
        return 1.0 - self.p_d


@dataclass
class OccupancyTable:
    """Stage-by-stage mean-field channel state.

    occ[m, n-1]  occupancy of channel m at the start of stage n
    u[m, n-1]    P(at least one SU transmits on m at stage n | PU absent)
    l[n-1]       mean number of SUs sensing each channel at stage n
    n_ho[n-1]    mean number of SUs in handoff state n
    q[m, n-1]    probability a probe of channel m at stage n ends in handoff
    """

    occ: np.ndarray
    u: np.ndarray
    l: np.ndarray
    n_ho: np.ndarray
    q: np.ndarray


def stage_profiles(config: NetworkConfig, params: SensingParams,
                   resolved: ResolvedDetector, n_stages: int) -> StageProfiles:
    """Error probabilities for every (channel, stage) at the given (tau, p).

    Stage 1 evaluates the detector at the lone-PU SNR; stage 2 at the mean
    SNR including the expected stage-1 SU transmitters; stages >= 3 reuse the
    stage-2 value (detection saturates) unless ``per_stage_snr`` keeps
    accumulating transmitters stage by stage.
    """
    npu, ns = config.n_pu, n_stages
    if resolved.mode == "explicit":
        p_fa = np.full(npu, resolved.p_fa)
        p_d = np.empty((npu, ns))
        for n in range(1, ns + 1):
            p_d[:, n - 1] = resolved.explicit_p_d(n)
        return StageProfiles(p_fa=p_fa, p_d=p_d, gamma=np.zeros((npu, ns)),
                             n_stages=ns)

    lam = resolved.lambda_norm
    f_s = config.sampling_freq
    p_fa = _clamp01(np.broadcast_to(
        np.atleast_1d(false_alarm_prob(lam, params.tau, f_s)), (npu,)
    ).copy(), "p_fa")
    gamma = np.zeros((npu, ns))
    p_d = np.zeros((npu, ns))
    gamma[:, 0] = config.snr_stage1
    p_d[:, 0] = _clamp01(detection_prob(lam, params.tau, f_s, gamma[:, 0]), "p_d")
    if ns == 1:
        return StageProfiles(p_fa=p_fa, p_d=p_d, gamma=gamma, n_stages=ns)

    presence = config.presence_prob
    if not resolved.per_stage_snr:
        q1 = (1.0 - presence) * p_fa + presence * p_d[:, 0]
        mean_senders = config.n_su * params.p / config.n_pu
        gamma2 = (presence * config.pu_power
                  + mean_senders * (1.0 - q1) * config.su_power) / config.noise_power
        pd2 = _clamp01(detection_prob(lam, params.tau, f_s, gamma2), "p_d")
        gamma[:, 1:] = gamma2[:, None]
        p_d[:, 1:] = pd2[:, None]
        return StageProfiles(p_fa=p_fa, p_d=p_d, gamma=gamma, n_stages=ns)

    # Exact per-stage extension: interleave the handoff-population recursion
    # with the SNR accumulation so each stage sees all earlier transmitters.
    n_ho = float(config.n_su)
    occ = presence.copy()
    exponent = 0.0
    cum_tx = np.zeros(npu)
    for n in range(2, ns + 1):
        l_prev = params.p / config.n_pu * n_ho
        q_prev = (1.0 - occ) * p_fa + occ * p_d[:, n - 2]
        cum_tx += l_prev * (1.0 - q_prev)
        gamma[:, n - 1] = (presence * config.pu_power
                           + cum_tx * config.su_power) / config.noise_power
        p_d[:, n - 1] = _clamp01(
            detection_prob(lam, params.tau, f_s, gamma[:, n - 1]), "p_d")
        u_prev = 1.0 - _fa_power(p_fa, l_prev)
        occ = _clamp01(occ + (1.0 - presence) * _fa_power(p_fa, exponent) * u_prev,
                       "occupancy")
        exponent += l_prev
        n_ho *= (1.0 - params.p) + params.p / config.n_pu * float(np.sum(q_prev))
    return StageProfiles(p_fa=p_fa, p_d=p_d, gamma=gamma, n_stages=ns)


# ---------------------------------------------------------------------------
# Occupancy recursion
# ---------------------------------------------------------------------------

def occupancy_evolution(config: NetworkConfig, params: SensingParams,
                        profiles: StageProfiles) -> OccupancyTable:
    """Stage-by-stage channel occupancy under the mean-field recursion.

    occ^(1) = P_m1 and

        occ^(n) = occ^(n-1)
                  + P_m0 * Pfa^(L^(1)+...+L^(n-2)) * U^(n-1)
        U^(n)   = 1 - Pfa^(L^(n))
        L^(n)   = (p / N_p) * N_HO^(n)
        N_HO^(n)= [(1-p) + (p/N_p) sum_m q_m^(n-1)] * N_HO^(n-1)

    with q_m^(n) = P_m0^(n) Pfa + P_m1^(n) P_d^(n) evaluated at the stage-n
    occupancy and detection probability.  Mean counts enter the false-alarm
    powers as real exponents, with 0**0 = 1.
    """
    npu, ns = config.n_pu, profiles.n_stages
    presence = config.presence_prob
    p_fa = profiles.p_fa
    occ = np.zeros((npu, ns))
    u = np.zeros((npu, ns))
    q = np.zeros((npu, ns))
    l = np.zeros(ns)
    n_ho = np.zeros(ns)

    occ[:, 0] = presence
    n_ho[0] = config.n_su
    exponent = 0.0
    for n in range(1, ns + 1):
        i = n - 1
        l[i] = params.p / config.n_pu * n_ho[i]
        u[:, i] = 1.0 - _fa_power(p_fa, l[i])
        q[:, i] = _clamp01(
            (1.0 - occ[:, i]) * p_fa + occ[:, i] * profiles.p_d[:, i], "q")
        if n < ns:
            occ[:, i + 1] = _clamp01(
                occ[:, i] + (1.0 - presence) * _fa_power(p_fa, exponent) * u[:, i],
                "occupancy",
            )
            n_ho[i + 1] = ((1.0 - params.p)
                           + params.p / config.n_pu * float(np.sum(q[:, i]))) * n_ho[i]
            exponent += l[i]
    return OccupancyTable(occ=occ, u=u, l=l, n_ho=n_ho, q=q)


# ---------------------------------------------------------------------------
# State-occupation probabilities, full and pruned
# ---------------------------------------------------------------------------

@dataclass
class ChainDistribution:
    """Per-state occupation probabilities of one SU's chain walk.

    ``blocked`` is zero for the full chain.  For a pruned chain it holds the
    deleted transition mass (the walker would have transmitted on the pruned
    channel), so ``disposition_total() + blocked == 1``.
    """

    pi_ho: np.ndarray       # (n_stages,) probability of reaching HO_n
    pi_channel: np.ndarray  # (n_pu, n_stages) probability of probing m at stage n
    pi_t: np.ndarray        # (n_stages,) transmission-state entry probability
    pi_i: np.ndarray        # (n_stages,) interference-state entry probability
    pi_te: float            # probability of terminating without transmitting
    blocked: float = 0.0

    def disposition_total(self) -> float:
        return float(self.pi_te + np.sum(self.pi_t) + np.sum(self.pi_i))


def state_distribution(config: NetworkConfig, params: SensingParams,
                       profiles: StageProfiles, occupancy: OccupancyTable,
                       pruned: tuple[int, int] | None = None) -> ChainDistribution:
    """Occupation probabilities of HO_n, m^(n), T_n, I_n and TE.

    ``pruned=(m0, n0)`` (0-based channel, 1-based stage) removes the edges
    from m0's probe states to T_n and I_n for every stage >= n0.  The removed
    probability mass is deleted, not rerouted: the resulting sub-stochastic
    disposition total is exactly the probability that the walker never
    transmits on channel m0 at stages n0..delta while otherwise following the
    unmodified dynamics.
    """
    npu, ns = config.n_pu, profiles.n_stages
    pi_ho = np.zeros(ns)
    pi_ch = np.zeros((npu, ns))
    pi_t = np.zeros(ns)
    pi_i = np.zeros(ns)
    blocked = 0.0

    pi_ho[0] = 1.0
    pi_te = 0.0
    for n in range(1, ns + 1):
        i = n - 1
        pi_ch[:, i] = params.p / config.n_pu * pi_ho[i]
        t_terms = (1.0 - occupancy.occ[:, i]) * (1.0 - profiles.p_fa) * pi_ch[:, i]
        i_terms = occupancy.occ[:, i] * (1.0 - profiles.p_d[:, i]) * pi_ch[:, i]
        if pruned is not None and n >= pruned[1]:
            m0 = pruned[0]
            blocked += float(t_terms[m0] + i_terms[m0])
            t_terms = t_terms.copy()
            i_terms = i_terms.copy()
            t_terms[m0] = 0.0
            i_terms[m0] = 0.0
        pi_t[i] = float(np.sum(t_terms))
        pi_i[i] = float(np.sum(i_terms))
        cont = (1.0 - params.p) + params.p / config.n_pu * float(
            np.sum(occupancy.q[:, i]))
        if n < ns:
            pi_ho[i + 1] = cont * pi_ho[i]
        else:
            pi_te = cont * pi_ho[i]
    return ChainDistribution(pi_ho=pi_ho, pi_channel=pi_ch, pi_t=pi_t, pi_i=pi_i,
                             pi_te=pi_te, blocked=blocked)


def pruned_no_tx_prob(config: NetworkConfig, params: SensingParams,
                      profiles: StageProfiles, occupancy: OccupancyTable,
                      m: int, n: int) -> float:
    """Y_{m,n}: probability one SU never transmits on channel ``m`` (0-based)
    at stages ``n``..delta, via the pruned chain's disposition total."""
    dist = state_distribution(config, params, profiles, occupancy, pruned=(m, n))
    return dist.disposition_total()


def _no_tx_matrix(dist: ChainDistribution, profiles: StageProfiles,
                  occupancy: OccupancyTable) -> np.ndarray:
    """Y for every (channel, stage) in one pass.

    Entries of the pruned chain differ from the full chain only in which T/I
    exits are counted, so Y_{m,n} = 1 - sum_{i>=n} pi_channel[m,i] (1 - q[m,i]).
    The pruned-chain construction in :func:`pruned_no_tx_prob` is the
    reference; tests pin the equality.
    """
    exit_prob = dist.pi_channel * (1.0 - occupancy.q)
    tail = np.cumsum(exit_prob[:, ::-1], axis=1)[:, ::-1]
    return _clamp01(1.0 - tail, "no-tx probability")


def success_prob(config: NetworkConfig, profiles: StageProfiles,
                 occupancy: OccupancyTable, dist: ChainDistribution,
                 m: int, n: int, no_tx: float) -> float:
    """Q_{T_n,m}: one SU transmits on free channel ``m`` at stage ``n`` and no
    competitor transmits there at any stage >= n."""
    i = n - 1
    p_t = dist.pi_channel[m, i] * (1.0 - occupancy.occ[m, i]) * (1.0 - profiles.p_fa[m])
    return float(p_t * no_tx ** (config.n_su - 1))


# ---------------------------------------------------------------------------
# Performance metrics
# ---------------------------------------------------------------------------

@dataclass
class ChainResult:
    """Everything the analytic model says about one (tau, p) point."""

    params: SensingParams
    n_stages: int
    profiles: StageProfiles
    occupancy: OccupancyTable
    dist: ChainDistribution
    no_tx: np.ndarray          # Y_{m,n}, (n_pu, n_stages)
    success: np.ndarray        # Q_{T_n,m}, (n_pu, n_stages)
    no_interf: np.ndarray      # Z_{I_n,m}, (n_pu, n_stages)
    throughput: float          # r, per-SU, in units of C_R
    network_throughput: float  # N_s * r
    interference: float        # t_I, normalized by T * N_p
    p_md_max: float            # max over (m, n) of misdetection

    @property
    def r(self) -> float:
        return self.throughput

    @property
    def t_i(self) -> float:
        return self.interference


def avg_throughput(config: NetworkConfig, params: SensingParams,
                   profiles: StageProfiles, occupancy: OccupancyTable,
                   dist: ChainDistribution,
                   no_tx: np.ndarray | None = None) -> float:
    """Average per-SU throughput r = (1/T) sum_{m,n} Q_{T_n,m} RT_n C_R."""
    if no_tx is None:
        no_tx = _no_tx_matrix(dist, profiles, occupancy)
    p_t = (dist.pi_channel * (1.0 - occupancy.occ)
           * (1.0 - profiles.p_fa)[:, None])
    q_succ = p_t * no_tx ** (config.n_su - 1)
    rt = remaining_times(profiles.n_stages, config.slot_duration, params.tau,
                         config.handoff_time)
    return float(np.sum(q_succ * rt[None, :]) * config.tx_rate
                 / config.slot_duration)


def avg_interference(config: NetworkConfig, params: SensingParams,
                     profiles: StageProfiles, occupancy: OccupancyTable,
                     dist: ChainDistribution) -> float:
    """Normalized interference t_I = sum_{m,n} (1 - Z_{I_n,m}) RT_n / (T N_p)."""
    p_i = dist.pi_channel * occupancy.occ * (1.0 - profiles.p_d)
    z = (1.0 - p_i) ** config.n_su
    rt = remaining_times(profiles.n_stages, config.slot_duration, params.tau,
                         config.handoff_time)
    return float(np.sum((1.0 - z) * rt[None, :])
                 / (config.slot_duration * config.n_pu))


def analyze(config: NetworkConfig, params: SensingParams,
            resolved: ResolvedDetector,
            n_stages: int | None = None) -> ChainResult:
    """Full analytic evaluation of one (tau, p) point (deterministic)."""
    params.validate(config.slot_duration)
    if n_stages is None:
        n_stages = max_sensing_stages(config.slot_duration, params.tau,
                                      config.handoff_time, config.n_pu)
    profiles = stage_profiles(config, params, resolved, n_stages)
    occupancy = occupancy_evolution(config, params, profiles)
    dist = state_distribution(config, params, profiles, occupancy)
    assert abs(dist.disposition_total() - 1.0) <= 1e-9, "disposition leak"

    no_tx = _no_tx_matrix(dist, profiles, occupancy)
    p_t = (dist.pi_channel * (1.0 - occupancy.occ)
           * (1.0 - profiles.p_fa)[:, None])
    success = p_t * no_tx ** (config.n_su - 1)
    p_i = dist.pi_channel * occupancy.occ * (1.0 - profiles.p_d)
    no_interf = (1.0 - p_i) ** config.n_su

    r = avg_throughput(config, params, profiles, occupancy, dist, no_tx)
    t_i = avg_interference(config, params, profiles, occupancy, dist)
    return ChainResult(
        params=params,
        n_stages=n_stages,
        profiles=profiles,
        occupancy=occupancy,
        dist=dist,
        no_tx=no_tx,
        success=success,
        no_interf=no_interf,
        throughput=r,
        network_throughput=config.n_su * r,
        interference=t_i,
        p_md_max=float(np.max(profiles.p_md)),
    )


def analyze_scenario(scenario, tau: float | None = None,
                     p: float | None = None) -> ChainResult:
    """Analyze a scenario at its nominal point or at an override (tau, p)."""
    sc = scenario.with_params(tau=tau, p=p)
    resolved = resolve_detector(sc.config, sc.detector, sc.qos, scenario.params.tau)
    return analyze(sc.config, sc.params, resolved)
