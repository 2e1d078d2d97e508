import numpy as np
import pytest

from conftest import default_qos, explicit_detector, make_config, make_scenario
from rsop.chain import (
    _no_tx_matrix,
    analyze,
    analyze_scenario,
    occupancy_evolution,
    pruned_no_tx_prob,
    resolve_detector,
    stage_profiles,
    state_distribution,
    success_prob,
)
from rsop.config import DetectorSpec, SensingParams
from rsop.core import upper_bound_throughput

T = 10e-3


def tables(config, tau, p, p_fa, p_d, n_stages):
    params = SensingParams(tau=tau, p=p)
    resolved = resolve_detector(config, explicit_detector(p_fa, p_d), None, tau)
    profiles = stage_profiles(config, params, resolved, n_stages)
    occupancy = occupancy_evolution(config, params, profiles)
    return params, profiles, occupancy


class TestOccupancy:
    def test_idle_network_never_fills(self):
        config = make_config(n_su=4, n_pu=3, presence=[0.2, 0.5, 0.8])
        _, _, occ = tables(config, 1e-3, 0.0, 0.1, 0.9, 5)
        assert np.allclose(occ.occ, config.presence_prob[:, None])
        assert np.allclose(occ.l, 0.0)

    def test_certain_false_alarm_freezes_occupancy(self):
        config = make_config(n_su=5, n_pu=2, presence=0.4)
        _, _, occ = tables(config, 1e-3, 0.9, 1.0, 0.9, 4)
        assert np.allclose(occ.occ, 0.4)

    def test_two_su_single_channel_hand_value(self):
        # p=1, Pfa=0.5, free channel: L1=2, U1=0.75, occ2=0.75
        config = make_config(n_su=2, n_pu=1, presence=0.0)
        _, _, occ = tables(config, 4e-3, 1.0, 0.5, 0.9, 2)
        assert occ.l[0] == pytest.approx(2.0)
        assert occ.u[0, 0] == pytest.approx(0.75)
        assert occ.occ[0, 1] == pytest.approx(0.75)

    def test_monotone_in_stage(self):
        config = make_config(n_su=6, n_pu=4, presence=[0.1, 0.4, 0.6, 0.9])
        _, _, occ = tables(config, 5e-4, 0.7, 0.15, 0.85, 5)
        assert np.all(np.diff(occ.occ, axis=1) >= -1e-12)
        assert np.all(occ.occ >= 0) and np.all(occ.occ <= 1)
        assert np.all(occ.n_ho >= 0) and np.all(occ.n_ho <= 6)
        assert occ.n_ho[0] == 6

    def test_closed_form_identity(self):
        # occ^(n) = 1 - P0 * Pfa^(L1+...+L(n-1)) when detection is imperfect
        config = make_config(n_su=3, n_pu=2, presence=0.3)
        _, _, occ = tables(config, 1e-3, 0.8, 0.2, 0.9, 5)
        cum = np.concatenate([[0.0], np.cumsum(occ.l)])
        for n in range(5):
            expect = 1.0 - 0.7 * 0.2 ** cum[n]
            assert occ.occ[0, n] == pytest.approx(expect, abs=1e-12)


class TestStateDistribution:
    def test_idle_all_terminate(self):
        config = make_config(n_su=3, n_pu=2)
        params, prof, occ = tables(config, 1e-3, 0.0, 0.1, 0.9, 3)
        dist = state_distribution(config, params, prof, occ)
        assert dist.pi_te == pytest.approx(1.0)
        assert np.allclose(dist.pi_t, 0) and np.allclose(dist.pi_i, 0)

    def test_single_free_channel_perfect_sensing(self):
        config = make_config(n_su=1, n_pu=1, presence=0.0)
        for p in (0.3, 0.7, 1.0):
            params, prof, occ = tables(config, 5.2e-3, p, 0.0, 0.9, 1)
            dist = state_distribution(config, params, prof, occ)
            assert dist.pi_t[0] == pytest.approx(p)

    def test_two_channel_stage1_hand_value(self):
        config = make_config(n_su=2, n_pu=2, presence=0.5)
        params, prof, occ = tables(config, 3e-3, 1.0, 0.1, 0.9, 2)
        dist = state_distribution(config, params, prof, occ)
        assert dist.pi_t[0] == pytest.approx(0.45)
        assert dist.pi_ho[0] == 1.0

    def test_disposition_completeness(self):
        config = make_config(n_su=4, n_pu=3, presence=[0.2, 0.5, 0.9])
        params, prof, occ = tables(config, 8e-4, 0.65, 0.2, 0.8, 6)
        dist = state_distribution(config, params, prof, occ)
        assert dist.disposition_total() == pytest.approx(1.0, abs=1e-9)
        # pruned chains conserve mass only together with the blocked share
        for m in range(3):
            for n in range(1, 7):
                pr = state_distribution(config, params, prof, occ, pruned=(m, n))
                assert pr.disposition_total() + pr.blocked == pytest.approx(
                    1.0, abs=1e-9)
                assert pr.blocked > 0


class TestPrunedNoTx:
    def test_idle_walker_never_transmits(self):
        config = make_config(n_su=2, n_pu=2)
        params, prof, occ = tables(config, 1e-3, 0.0, 0.1, 0.9, 3)
        assert pruned_no_tx_prob(config, params, prof, occ, 0, 1) == pytest.approx(1.0)

    def test_two_channel_hand_enumeration(self):
        # p=1, Pfa=0, free channels: the walker avoids channel 1 from stage 1
        # iff it picks channel 2 first and transmits there
        config = make_config(n_su=2, n_pu=2, presence=0.0)
        params, prof, occ = tables(config, 3e-3, 1.0, 0.0, 0.9, 2)
        assert pruned_no_tx_prob(config, params, prof, occ, 0, 1) == pytest.approx(0.5)

    def test_always_transmitting_walker(self):
        # single channel, p=1, perfect sensing of a free channel: the walker
        # transmits at stage 1 with certainty, so it never avoids the channel
        config = make_config(n_su=2, n_pu=1, presence=0.0)
        params, prof, occ = tables(config, 4e-3, 1.0, 0.0, 0.9, 2)
        assert pruned_no_tx_prob(config, params, prof, occ, 0, 1) == pytest.approx(0.0)

    def test_matches_fast_path(self):
        config = make_config(n_su=5, n_pu=4, presence=[0.1, 0.45, 0.7, 0.95])
        params, prof, occ = tables(config, 6e-4, 0.55, 0.25, 0.85, 7)
        dist = state_distribution(config, params, prof, occ)
        fast = _no_tx_matrix(dist, prof, occ)
        for m in range(4):
            for n in range(1, 8):
                assert fast[m, n - 1] == pytest.approx(
                    pruned_no_tx_prob(config, params, prof, occ, m, n), abs=1e-12)


class TestSuccessAndMetrics:
    def test_lone_su_has_no_competition(self):
        config = make_config(n_su=1, n_pu=2, presence=0.5)
        params, prof, occ = tables(config, 3e-3, 0.8, 0.1, 0.9, 2)
        dist = state_distribution(config, params, prof, occ)
        p_t = dist.pi_channel[0, 0] * 0.5 * 0.9
        assert success_prob(config, prof, occ, dist, 0, 1, no_tx=0.123) == \
            pytest.approx(p_t)

    def test_blocked_competitors_kill_success(self):
        config = make_config(n_su=3, n_pu=2, presence=0.5)
        params, prof, occ = tables(config, 3e-3, 0.8, 0.1, 0.9, 2)
        dist = state_distribution(config, params, prof, occ)
        assert success_prob(config, prof, occ, dist, 0, 1, no_tx=0.0) == 0.0

    def test_pair_collision_hand_case(self):
        # two SUs, two free channels, one stage, perfect sensing: success iff
        # the rival picked the other channel
        config = make_config(n_su=2, n_pu=2, presence=0.0)
        params, prof, occ = tables(config, 5.2e-3, 1.0, 0.0, 0.9, 1)
        dist = state_distribution(config, params, prof, occ)
        y = pruned_no_tx_prob(config, params, prof, occ, 0, 1)
        q = success_prob(config, prof, occ, dist, 0, 1, y)
        assert y == pytest.approx(0.5)
        assert q == pytest.approx(0.25)
        res = analyze(config, params,
                      resolve_detector(config, explicit_detector(0.0, 0.9), None, 5.2e-3))
        assert res.throughput == pytest.approx(0.5 * (T - 5.2e-3) / T)

    def test_idle_network_zero_throughput(self):
        config = make_config(n_su=3, n_pu=3)
        res = analyze(config, SensingParams(1e-3, 0.0),
                      resolve_detector(config, explicit_detector(0.1, 0.9), None, 1e-3))
        assert res.throughput == 0.0
        assert res.interference == 0.0

    def test_lone_su_free_channel_full_credit(self):
        config = make_config(n_su=1, n_pu=1, presence=0.0)
        res = analyze(config, SensingParams(2e-3, 1.0),
                      resolve_detector(config, explicit_detector(0.0, 0.9), None, 2e-3))
        assert res.throughput == pytest.approx((T - 2e-3) / T)

    def test_perfect_detection_no_interference(self):
        config = make_config(n_su=4, n_pu=3, presence=0.6)
        res = analyze(config, SensingParams(1e-3, 0.9),
                      resolve_detector(config, explicit_detector(0.1, 1.0), None, 1e-3))
        assert res.interference == 0.0

    def test_lone_su_busy_channel_hand_interference(self):
        # always-busy single channel, misdetection 0.1: t_I = 0.1 (T - tau)/T
        config = make_config(n_su=1, n_pu=1, presence=1.0)
        res = analyze(config, SensingParams(5.2e-3, 1.0),
                      resolve_detector(config, explicit_detector(0.1, 0.9), None, 5.2e-3))
        assert res.interference == pytest.approx(0.1 * (T - 5.2e-3) / T)

    def test_throughput_bounds(self):
        config = make_config(n_su=6, n_pu=4, presence=0.5)
        resolved = resolve_detector(config, explicit_detector(0.1, 0.9), None, 1e-3)
        bound = upper_bound_throughput(6, config.presence_prob)
        for tau in (5e-4, 1.5e-3, 4e-3):
            for p in (0.2, 0.6, 1.0):
                res = analyze(config, SensingParams(tau, p), resolved)
                assert 0.0 <= res.throughput <= (T - tau) / T + 1e-12
                assert res.network_throughput <= bound + 1e-9
                assert 0.0 <= res.interference <= 1.0

    def test_deterministic(self):
        scenario_args = dict(n_su=5, n_pu=3, presence=[0.3, 0.5, 0.7])
        config = make_config(**scenario_args)
        resolved = resolve_detector(config, explicit_detector(0.2, 0.85), None, 1e-3)
        a = analyze(config, SensingParams(7e-4, 0.6), resolved)
        b = analyze(make_config(**scenario_args), SensingParams(7e-4, 0.6), resolved)
        assert a.throughput == b.throughput
        assert a.interference == b.interference
        assert np.array_equal(a.no_tx, b.no_tx)


class TestEnergyProfiles:
    def test_false_alarm_stage_constant_and_calibration(self):
        config = make_config(n_su=20, n_pu=10, presence=0.5, pu_power=0.1,
                             su_power=0.1)
        det = DetectorSpec(mode="energy", calibration="pd_min", calibrate_tau=1e-3)
        resolved = resolve_detector(config, det, default_qos(), 1e-3)
        prof = stage_profiles(config, SensingParams(1e-3, 0.8), resolved, 5)
        # detection pinned at the floor at stage 1, identical false alarm at
        # every stage by construction (it never enters the stage axis)
        assert np.allclose(prof.p_d[:, 0], 0.9, atol=1e-12)
        assert prof.p_fa.shape == (10,)
        # stage-2 detection beats stage 1 in a dense network and stages >= 3
        # reuse it
        assert np.all(prof.p_d[:, 1] > prof.p_d[:, 0])
        assert np.allclose(prof.p_d[:, 2:], prof.p_d[:, 1:2])

    def test_per_stage_mode_keeps_accumulating(self):
        config = make_config(n_su=20, n_pu=10, presence=0.5, pu_power=0.1,
                             su_power=0.1)
        det = DetectorSpec(mode="energy", calibration="pd_min",
                           calibrate_tau=1e-3, per_stage_snr=True)
        resolved = resolve_detector(config, det, default_qos(), 1e-3)
        prof = stage_profiles(config, SensingParams(1e-3, 0.8), resolved, 5)
        assert np.all(np.diff(prof.gamma[0, 1:]) > 0)
        assert np.all(np.diff(prof.p_d[0]) >= -1e-12)

    def test_scenario_entry_point(self):
        config = make_config(n_su=3, n_pu=7, presence=0.5, pu_power=0.1,
                             su_power=0.4)
        sc = make_scenario(config, 1.052e-4,
                           0.8, DetectorSpec(mode="energy", calibration="pd_min"))
        res = analyze_scenario(sc)
        assert res.n_stages == 7
        assert 0 < res.throughput < 1
        override = analyze_scenario(sc, p=0.0)
        assert override.throughput == 0.0
