"""
Closed-form performance bounds for radar/communication coexistence.

Three access strategies share one uplink band:

* RS: the user splits its message into two streams. The BS decodes stream 1
  with the *predicted* radar echo subtracted, cancels it, estimates the
  target delay with stream 2 as interference, subtracts the *estimated*
  echo and finally decodes stream 2.
* NOMA: the user's signal is decoded first and cancelled, the delay is then
  estimated interference-free.
* OMA: disjoint sub-bands, split by ``mu``.

Rates are in bit/s. The radar estimation rate carries the duty-factor
prefactor ``delta / (2 T)``, so it is small in absolute terms.

All functions broadcast over numpy arrays (power split, knob values and the
two channel power gains), which the sweep and fading code rely on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linkbudget import DerivedParams


class Scheme(str, enum.Enum):
    RS = "rs"
    OMA = "oma"
    NOMA = "noma"


@dataclass(frozen=True)
class PowerSplit:
    """Stream powers of the rate-splitting user: P_c1 = (1-a) P_c, P_c2 = a P_c."""

    alpha: float
    p_c1_w: float
    p_c2_w: float

    @classmethod
    def from_alpha(cls, alpha, p_c_w: float) -> "PowerSplit":
        a = np.asarray(alpha, dtype=float)
        if np.any(~np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
            raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
        if not (math.isfinite(p_c_w) and p_c_w >= 0):
            raise ValueError(f"p_c_w must be finite and >= 0, got {p_c_w!r}")
        if a.ndim == 0:
            a = float(a)
        return cls(alpha=a, p_c1_w=(1.0 - a) * p_c_w, p_c2_w=a * p_c_w)


@dataclass(frozen=True)
class RatePoint:
    r_est_bps: float
    r_c_bps: float
    scheme: Scheme
    knob: float

    def __post_init__(self):
        for name in ("r_est_bps", "r_c_bps"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class StreamRates:
    r_c1_bps: float
    r_c2_bps: float

    @property
    def total_bps(self):
        return self.r_c1_bps + self.r_c2_bps


@dataclass(frozen=True)
class AlphaOpt:
    """
    Optimal RS power split.

    Attributes:
        raw: Real root of the stationarity condition (may fall outside [0, 1])
        clamped: ``raw`` clamped to [0, 1]; the recommended split
        residual: |quadratic(raw)| relative to its leading term
    """

    raw: float
    clamped: float
    residual: float


_LN2 = math.log(2.0)


def _log2_1p(x):
    """log2(1 + x) without losing precision for tiny x."""
    return np.log1p(x) / _LN2


def _reir_prefactor(d: DerivedParams) -> float:
    # one delay estimate per PRI of length T / delta, two real dims per complex sample
    return d.duty_factor / (2.0 * d.pulse_duration_s)


def _echo_leak(d: DerivedParams, p_r_w, delay_var_s2):
    """Residual echo power after subtracting an echo misplaced by a delay error."""
    return p_r_w * d.radar_power_gain * d.gamma_sq * d.bandwidth_hz**2 * delay_var_s2


def _reir(d: DerivedParams, p_r_w, interference_w, band_fraction=1.0):
    snr = (
        2.0
        * d.sigma_tau_proc_s**2
        * d.gamma_sq
        * band_fraction**2
        * d.bandwidth_hz**2
        * d.time_bandwidth_product
        * d.radar_power_gain
        * p_r_w
        / interference_w
    )
    return _reir_prefactor(d) * _log2_1p(snr)


def int_noise_stream1(d: DerivedParams, split: PowerSplit, p_r_w):
    """
    Interference-plus-noise seen by stream 1.

    Stream 2 is undecoded and the echo is cancelled at its *predicted*
    delay, leaving a residual set by the target process noise.
    """
    return (
        d.comm_power_gain * split.p_c2_w
        + _echo_leak(d, p_r_w, d.sigma_tau_proc_s**2)
        + d.noise_power_w
    )


def crlb_delay(d: DerivedParams, p_c2_w, p_r_w):
    """
    Delay CRLB [s^2] with stream 2 treated as interference.

    Uses the Cauchy-Schwarz (pessimistic) Fisher information, so the value
    is an upper bound on the exact CRLB of the rank-one interference model.
    """
    if np.any(np.asarray(p_r_w) <= 0):
        raise ValueError("radar power must be > 0 to estimate a delay")
    if np.any(np.asarray(d.radar_power_gain) <= 0):
        raise ValueError("radar power gain must be > 0 to estimate a delay")
    return (d.noise_power_w + d.comm_power_gain * p_c2_w) / (
        2.0
        * d.gamma_sq
        * d.bandwidth_hz**2
        * d.time_bandwidth_product
        * d.radar_power_gain
        * p_r_w
    )


def int_noise_stream2(d: DerivedParams, crlb_s2, p_r_w):
    """
    Interference-plus-noise seen by stream 2 after the estimated echo is removed.

    ``crlb_s2`` stands in for the actual estimation-error variance. Since the
    variance can only be larger than the CRLB, the resulting stream-2 rate is
    optimistic with respect to the delay estimator actually deployed.
    """
    if np.any(np.asarray(crlb_s2) < 0):
        raise ValueError("delay variance must be >= 0")
    return _echo_leak(d, p_r_w, crlb_s2) + d.noise_power_w


def reir_rs(d: DerivedParams, split: PowerSplit, p_r_w):
    """Radar estimation information rate of the RS scheme [bit/s]."""
    return _reir(d, p_r_w, d.noise_power_w + d.comm_power_gain * split.p_c2_w)


def reir_from_crlb(d: DerivedParams, crlb_s2):
    """Estimation rate from the information gain sigma_proc^2 / sigma_est^2."""
    return _reir_prefactor(d) * _log2_1p(d.sigma_tau_proc_s**2 / crlb_s2)


def dir_rs(d: DerivedParams, split: PowerSplit, p_r_w) -> StreamRates:
    """Per-stream data rates of the RS user [bit/s]."""
    b = d.bandwidth_hz
    r1 = b * _log2_1p(d.comm_power_gain * split.p_c1_w / int_noise_stream1(d, split, p_r_w))
    crlb = crlb_delay(d, split.p_c2_w, p_r_w)
    r2 = b * _log2_1p(d.comm_power_gain * split.p_c2_w / int_noise_stream2(d, crlb, p_r_w))
    return StreamRates(r_c1_bps=r1, r_c2_bps=r2)


def rs_rates(d: DerivedParams, alpha, p_c_w: float, p_r_w):
    """(R_est, R_c1 + R_c2) for one or many splits."""
    split = PowerSplit.from_alpha(alpha, p_c_w)
    return reir_rs(d, split, p_r_w), dir_rs(d, split, p_r_w).total_bps


def stationarity_quadratic(d: DerivedParams, alpha, p_c_w: float, p_r_w):
    """
    Terms of the quadratic whose root maximises R_c1 + R_c2.

    Returns the four summands; their sum vanishes at the optimum.
    """
    s2 = d.noise_power_w
    pbc = d.comm_power_gain * p_c_w
    return (
        pbc**3 * alpha**2,
        2.0 * pbc**2 * s2 * alpha,
        s2**2 * pbc,
        -2.0
        * s2
        * pbc
        * p_r_w
        * d.radar_power_gain
        * d.gamma_sq
        * d.bandwidth_hz**2
        * d.sigma_tau_proc_s**2
        * d.time_bandwidth_product,
    )


def alpha_opt(d: DerivedParams, p_c_w: float, p_r_w: float) -> AlphaOpt:
    """
    Closed-form power split maximising the RS data rate.

    The root is exact for the sum rate (no approximation): writing
    u = sigma_n^2 + |b_c|^2 alpha P_c, stationarity reduces to
    u^2 = 2 TB sigma_n^2 P_r |a_r|^2 gamma^2 B^2 sigma_proc^2.
    """
    pbc = d.comm_power_gain * p_c_w
    if not pbc > 0:
        raise ValueError("received user power |b_c|^2 P_c must be > 0")
    s2 = d.noise_power_w
    raw = (
        -s2
        + math.sqrt(d.radar_power_gain)
        * math.sqrt(d.gamma_sq)
        * d.bandwidth_hz
        * d.sigma_tau_proc_s
        * math.sqrt(2.0 * p_r_w * d.time_bandwidth_product * s2)
    ) / pbc
    terms = stationarity_quadratic(d, raw, p_c_w, p_r_w)
    lead = abs(terms[0])
    scale = lead if lead > 0 else max(abs(t) for t in terms)
    residual = abs(math.fsum(terms)) / scale if scale > 0 else 0.0
    return AlphaOpt(raw=raw, clamped=min(max(raw, 0.0), 1.0), residual=residual)


def oma_rates(d: DerivedParams, mu, p_c_w: float, p_r_w):
    """
    Vectorised OMA rates; ``mu`` is the communication share of the band.

    The comm rate at mu = 0 is its continuous limit, 0.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(~np.isfinite(mu)) or np.any(mu < 0) or np.any(mu > 1):
        raise ValueError(f"mu must lie in [0, 1], got {mu!r}")
    r_est = _reir(d, p_r_w, d.noise_power_w, band_fraction=1.0 - mu)
    safe_mu = np.where(mu > 0, mu, 1.0)
    r_c = np.where(
        mu > 0,
        safe_mu
        * d.bandwidth_hz
        * _log2_1p(d.comm_power_gain * p_c_w / (safe_mu * d.noise_power_w)),
        0.0,
    )
    if r_est.ndim == 0 and r_c.ndim == 0:
        return float(r_est), float(r_c)
    return r_est, r_c


def noma_rates(d: DerivedParams, p_used_w, p_c_w: float, p_r_w):
    """Vectorised NOMA rates: the user is decoded first, then cancelled."""
    p = np.asarray(p_used_w, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > p_c_w):
        raise ValueError(f"p_used_w must lie in [0, {p_c_w}], got {p_used_w!r}")
    # Same arithmetic as RS with P_c1 = p_used and P_c2 = 0.
    split = PowerSplit(alpha=0.0, p_c1_w=p, p_c2_w=0.0)
    r_est = reir_rs(d, split, p_r_w)
    r_c = d.bandwidth_hz * _log2_1p(
        d.comm_power_gain * split.p_c1_w / int_noise_stream1(d, split, p_r_w)
    )
    if np.ndim(r_est) == 0 and np.ndim(r_c) == 0:
        return float(r_est), float(r_c)
    return np.broadcast_arrays(r_est, r_c)


def oma_bounds(d: DerivedParams, mu: float, p_c_w: float, p_r_w: float) -> RatePoint:
    r_est, r_c = oma_rates(d, mu, p_c_w, p_r_w)
    return RatePoint(float(r_est), float(r_c), Scheme.OMA, float(mu))


def noma_bounds(d: DerivedParams, p_used_w: float, p_c_w: float, p_r_w: float) -> RatePoint:
    r_est, r_c = noma_rates(d, p_used_w, p_c_w, p_r_w)
    return RatePoint(float(r_est), float(r_c), Scheme.NOMA, float(p_used_w) / p_c_w if p_c_w > 0 else 0.0)


def rs_bounds(d: DerivedParams, alpha: float, p_c_w: float, p_r_w: float) -> RatePoint:
    r_est, r_c = rs_rates(d, alpha, p_c_w, p_r_w)
    return RatePoint(float(r_est), float(r_c), Scheme.RS, float(alpha))
