import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rsop.config import (
    DetectorSpec,
    NetworkConfig,
    QosConstraints,
    Scenario,
    SensingParams,
)

T_SLOT = 10e-3
F_S = 6.857e6
TAU_HANDOFF = 1e-7


def make_config(n_su=2, n_pu=2, presence=0.5, pu_power=0.1, su_power=0.1,
                noise=1.0, slot=T_SLOT, handoff=TAU_HANDOFF, fs=F_S,
                tx_rate=1.0) -> NetworkConfig:
    return NetworkConfig(n_su=n_su, n_pu=n_pu, slot_duration=slot,
                         handoff_time=handoff, sampling_freq=fs,
                         tx_rate=tx_rate, presence_prob=presence,
                         pu_power=pu_power, su_power=su_power,
                         noise_power=noise)


def explicit_detector(p_fa, p_d) -> DetectorSpec:
    return DetectorSpec(mode="explicit", p_fa=p_fa, p_d=p_d)


def default_qos(**overrides) -> QosConstraints:
    values = dict(t_i_max=0.05, p_md_max=0.15, p_fa_max=0.1, p_d_min=0.9)
    values.update(overrides)
    return QosConstraints(**values)


def make_scenario(config, tau, p, detector, qos=None, name="test",
                  adaptive=None) -> Scenario:
    kwargs = {}
    if adaptive is not None:
        kwargs["adaptive"] = adaptive
    return Scenario(name=name, config=config,
                    params=SensingParams(tau=tau, p=p),
                    qos=qos or default_qos(), detector=detector, **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
