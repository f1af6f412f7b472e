import numpy as np
import pytest

from rsisac.linkbudget import SystemParams, derive


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def derived(params):
    return derive(params)


def random_params(rng: np.random.Generator) -> SystemParams:
    """Scenario with every physical knob drawn log-uniformly around the reference."""

    def lu(lo, hi):
        return float(10 ** rng.uniform(np.log10(lo), np.log10(hi)))

    return SystemParams(
        bandwidth_hz=lu(1e5, 1e8),
        carrier_freq_hz=lu(1e8, 1e11),
        effective_temp_k=lu(100, 5000),
        comm_range_m=lu(1e2, 1e5),
        comm_power_w=lu(1e-2, 1e3),
        comm_tx_gain=lu(0.1, 100),
        comm_rx_sidelobe_gain=lu(0.1, 100),
        radar_range_m=lu(1e3, 1e6),
        radar_gain=lu(10, 1e5),
        radar_power_w=lu(1e2, 1e7),
        target_rcs_m2=lu(0.01, 1000),
        target_process_std_m=lu(1, 1e4),
        time_bandwidth_product=float(rng.integers(1, 2000)),
        duty_factor=float(rng.uniform(0.001, 1.0)),
    )


@pytest.fixture
def random_param_sets():
    rng = np.random.default_rng(20240601)
    return [random_params(rng) for _ in range(100)]
