"""
Link budget for the uplink ISAC scenario.

Turns a scenario description into the physical coefficients every rate
expression consumes: thermal noise power, the two-way radar power gain,
the one-way communication power gain, pulse timing and the delay-domain
process noise of the tracked target.

All quantities are linear SI values. Decibels only appear at the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

BOLTZMANN = 1.380649e-23  # J/K, exact (SI 2019)
SPEED_OF_LIGHT = 299792458.0  # m/s, exact
GAMMA_SQ_FLAT = (2.0 * math.pi) ** 2 / 12.0


@dataclass(frozen=True)
class SystemParams:
    """
    Scenario description. Defaults reproduce the reference scenario.

    Attributes:
        bandwidth_hz: Receiver (brick-wall) bandwidth B [Hz]
        carrier_freq_hz: Carrier frequency [Hz]
        effective_temp_k: Effective noise temperature [K]
        comm_range_m: User-to-BS distance [m]
        comm_power_w: Total uplink transmit power P_c [W]
        comm_tx_gain: User antenna gain [linear]
        comm_rx_sidelobe_gain: BS sidelobe gain toward the user [linear]
        radar_range_m: BS-to-target distance [m]
        radar_gain: Radar antenna gain, used on transmit and receive [linear]
        radar_power_w: Radar transmit power P_r [W]
        target_rcs_m2: Target radar cross section [m^2]
        target_process_std_m: Std of the target range prediction error [m]
        time_bandwidth_product: Pulse TB product [-]
        duty_factor: Radar duty factor delta [-]
    """

    bandwidth_hz: float = 5e6
    carrier_freq_hz: float = 3e9
    effective_temp_k: float = 1000.0
    comm_range_m: float = 1e4
    comm_power_w: float = 100.0
    comm_tx_gain: float = 1.0
    comm_rx_sidelobe_gain: float = 10.0
    radar_range_m: float = 1e5
    radar_gain: float = 1000.0
    radar_power_w: float = 1e5
    target_rcs_m2: float = 10.0
    target_process_std_m: float = 100.0
    time_bandwidth_product: float = 100.0
    duty_factor: float = 0.01

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{f.name} must be a finite number, got {value!r}")
            if f.name in _NONNEGATIVE:
                if value < 0:
                    raise ValueError(f"{f.name} must be >= 0, got {value!r}")
            elif value <= 0:
                raise ValueError(f"{f.name} must be > 0, got {value!r}")
        if self.duty_factor > 1:
            raise ValueError(f"duty_factor must lie in (0, 1], got {self.duty_factor!r}")
        if self.time_bandwidth_product < 1:
            raise ValueError(
                f"time_bandwidth_product must be >= 1, got {self.time_bandwidth_product!r}"
            )

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz


# Gains, RCS and process noise may legitimately be zero.
_NONNEGATIVE = frozenset(
    {
        "comm_tx_gain",
        "comm_rx_sidelobe_gain",
        "radar_gain",
        "target_rcs_m2",
        "target_process_std_m",
    }
)


@dataclass(frozen=True)
class DerivedParams:
    """
    Physical coefficients consumed by the rate expressions.

    ``radar_power_gain`` and ``comm_power_gain`` may be numpy arrays when a
    caller applies per-trial fading; every other field is a scalar.
    """

    noise_power_w: float
    radar_power_gain: float
    comm_power_gain: float
    pulse_duration_s: float
    sigma_tau_proc_s: float
    gamma_sq: float
    pri_s: float
    bandwidth_hz: float
    time_bandwidth_product: float
    duty_factor: float


def noise_power(effective_temp_k: float, bandwidth_hz: float) -> float:
    """Thermal noise power k_B * T * B in watts."""
    if not (math.isfinite(effective_temp_k) and math.isfinite(bandwidth_hz)):
        raise ValueError("temperature and bandwidth must be finite")
    if effective_temp_k < 0:
        raise ValueError(f"temperature must be >= 0, got {effective_temp_k!r}")
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth_hz!r}")
    return BOLTZMANN * effective_temp_k * bandwidth_hz


def radar_power_gain(params: SystemParams) -> float:
    """
    Two-way monostatic power gain |a_r|^2 from the radar range equation.

    G^2 * lambda^2 * rcs / ((4 pi)^3 * R^4), transmit power excluded.
    """
    if params.radar_range_m <= 0:
        raise ValueError("radar_range_m must be > 0")
    lam = params.wavelength_m
    return (
        params.radar_gain**2
        * lam**2
        * params.target_rcs_m2
        / ((4.0 * math.pi) ** 3 * params.radar_range_m**4)
    )


def comm_power_gain(params: SystemParams, comm_range_m: float | None = None) -> float:
    """
    One-way free-space power gain |b_c|^2 including both antenna gains.

    ``comm_range_m`` overrides the scenario range (used by range sweeps).
    """
    r = params.comm_range_m if comm_range_m is None else comm_range_m
    if not r > 0:
        raise ValueError(f"comm range must be > 0, got {r!r}")
    lam = params.wavelength_m
    return (
        (lam / (4.0 * math.pi * r)) ** 2
        * params.comm_tx_gain
        * params.comm_rx_sidelobe_gain
    )


def derive(params: SystemParams) -> DerivedParams:
    """Compute every derived coefficient for a scenario."""
    t_pulse = params.time_bandwidth_product / params.bandwidth_hz
    return DerivedParams(
        noise_power_w=noise_power(params.effective_temp_k, params.bandwidth_hz),
        radar_power_gain=radar_power_gain(params),
        comm_power_gain=comm_power_gain(params),
        pulse_duration_s=t_pulse,
        sigma_tau_proc_s=params.target_process_std_m / SPEED_OF_LIGHT,
        gamma_sq=GAMMA_SQ_FLAT,
        pri_s=t_pulse / params.duty_factor,
        bandwidth_hz=params.bandwidth_hz,
        time_bandwidth_product=params.time_bandwidth_product,
        duty_factor=params.duty_factor,
    )


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)
