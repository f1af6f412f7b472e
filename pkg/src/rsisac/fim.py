"""
Sampled-pulse Fisher information for delay estimation under rank-one interference.

The observation is z = a sqrt(P_r) r(t - tau) + b sqrt(P_c2) s h + n, with the
interference amplitude s ~ CN(0, 1) constant over the pulse, so the
covariance is |b|^2 P_c2 h h^H + sigma^2 I. Three evaluations of the delay
information are provided:

* ``fim_exact``: explicit solve against the full covariance
* ``fim_sherman_morrison``: rank-one inverse in closed form
* ``fim_pessimistic``: Cauchy-Schwarz lower bound, the form behind the
  closed-form CRLB used in :mod:`rsisac.bounds`

Pulses are band-limited to B and sampled at ``oversample * B``. Noise is
white *within the band* with per-sample variance sigma^2, which carries
``B / f_s`` times the information of a white sequence at the same rate;
every inner product involving the signal derivative is scaled by that
factor. With it, a flat-spectrum pulse reproduces ||r'||^2 = gamma^2 B^2 TB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PulseSamples:
    """
    A band-limited, unit average power pulse over one period of N samples.

    ``derivative`` is d/dt of the band-limited interpolant [1/s].
    """

    samples: np.ndarray
    derivative: np.ndarray
    sample_rate_hz: float
    bandwidth_hz: float
    n: int

    @property
    def oversample(self) -> float:
        return self.sample_rate_hz / self.bandwidth_hz

    @property
    def info_scale(self) -> float:
        """Fraction B / f_s applied to signal inner products."""
        return self.bandwidth_hz / self.sample_rate_hz

    def derivative_energy(self) -> float:
        """||r'||^2 in the normalised convention [1/s^2]."""
        return float(np.vdot(self.derivative, self.derivative).real) * self.info_scale

    def in_band(self) -> np.ndarray:
        """Boolean mask of DFT bins inside [-B/2, B/2)."""
        return _band_mask(self.n, self.sample_rate_hz, self.bandwidth_hz)


@dataclass(frozen=True)
class InterferencePulse:
    h: np.ndarray
    energy: float = 1.0

    def __post_init__(self):
        e = float(np.vdot(self.h, self.h).real)
        if not np.isclose(e, self.energy, rtol=1e-9, atol=0):
            raise ValueError(f"||h||^2 = {e} does not match declared energy {self.energy}")


def _band_bins(tb: int) -> np.ndarray:
    # TB bins of spacing B / TB covering [-B/2, B/2)
    return np.arange(-(tb // 2), tb - tb // 2)


def _band_mask(n: int, fs: float, bandwidth: float) -> np.ndarray:
    f = np.fft.fftfreq(n, 1.0 / fs)
    tol = 1e-9 * bandwidth
    return (f >= -bandwidth / 2 - tol) & (f < bandwidth / 2 - tol)


def spectral_derivative(x: np.ndarray, sample_rate_hz: float) -> np.ndarray:
    f = np.fft.fftfreq(len(x), 1.0 / sample_rate_hz)
    return np.fft.ifft(2j * np.pi * f * np.fft.fft(x))


def spectral_shift(x: np.ndarray, delay_s, sample_rate_hz: float) -> np.ndarray:
    """
    Circularly delay ``x`` by ``delay_s`` (any real value) via a linear phase.

    ``delay_s`` may be an array of shape (m,), giving an (m, N) result.
    """
    f = np.fft.fftfreq(len(x), 1.0 / sample_rate_hz)
    d = np.asarray(delay_s, dtype=float)
    phase = np.exp(-2j * np.pi * np.multiply.outer(d, f))
    return np.fft.ifft(np.fft.fft(x) * phase, axis=-1)


def _flat_spectrum_pulse(tb: int, oversample: int, bandwidth_hz: float, chirp_sign: float):
    if int(tb) != tb or tb < 2:
        raise ValueError(f"tb must be an integer >= 2, got {tb!r}")
    if int(oversample) != oversample or oversample < 1:
        raise ValueError(f"oversample must be an integer >= 1, got {oversample!r}")
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth_hz must be > 0")
    tb, oversample = int(tb), int(oversample)
    n = tb * oversample
    k = _band_bins(tb)
    spectrum = np.zeros(n, dtype=complex)
    # quadratic spectral phase: a chirp with near-constant envelope
    spectrum[k % n] = np.exp(chirp_sign * 1j * np.pi * k.astype(float) ** 2 / tb)
    return np.fft.ifft(spectrum), n, oversample * bandwidth_hz


def make_flat_pulse(tb: int, oversample: int, bandwidth_hz: float = 1.0) -> PulseSamples:
    """
    Flat-spectrum chirp of TB product ``tb`` sampled at ``oversample * B``.

    The period N / f_s equals the pulse duration TB / B.
    """
    x, n, fs = _flat_spectrum_pulse(tb, oversample, bandwidth_hz, +1.0)
    x = x / np.sqrt(np.mean(np.abs(x) ** 2))
    return PulseSamples(
        samples=x,
        derivative=spectral_derivative(x, fs),
        sample_rate_hz=fs,
        bandwidth_hz=bandwidth_hz,
        n=n,
    )


def default_interference(pulse: PulseSamples) -> InterferencePulse:
    """Unit-energy flat-spectrum pulse with the opposite chirp rate."""
    tb = round(pulse.n * pulse.bandwidth_hz / pulse.sample_rate_hz)
    h, _, _ = _flat_spectrum_pulse(tb, round(pulse.oversample), pulse.bandwidth_hz, -1.0)
    h = h / np.linalg.norm(h)
    return InterferencePulse(h=h, energy=1.0)


def rms_bandwidth_sq(pulse: PulseSamples) -> float:
    """Mean-square angular frequency of the pulse spectrum [rad^2/s^2]."""
    f = np.fft.fftfreq(pulse.n, 1.0 / pulse.sample_rate_hz)
    p = np.abs(np.fft.fft(pulse.samples)) ** 2
    return float(np.sum((2 * np.pi * f) ** 2 * p) / np.sum(p))


def _check(pulse: PulseSamples, h: InterferencePulse | None, noise_power_w: float):
    if not noise_power_w > 0:
        raise ValueError("noise power must be > 0")
    if h is not None and len(h.h) != pulse.n:
        raise ValueError(f"interference length {len(h.h)} != pulse length {pulse.n}")


def fim_exact(
    pulse: PulseSamples,
    h: InterferencePulse,
    *,
    radar_gain: float,
    p_r_w: float,
    comm_gain: float,
    p_c2_w: float,
    noise_power_w: float,
) -> float:
    """Delay Fisher information [1/s^2] by solving against the full covariance."""
    _check(pulse, h, noise_power_w)
    cov = comm_gain * p_c2_w * np.outer(h.h, h.h.conj())
    cov[np.diag_indices_from(cov)] += noise_power_w
    rd = pulse.derivative
    quad = np.vdot(rd, np.linalg.solve(cov, rd)).real
    return 2.0 * radar_gain * p_r_w * quad * pulse.info_scale


def fim_sherman_morrison(
    pulse: PulseSamples,
    h: InterferencePulse,
    *,
    radar_gain: float,
    p_r_w: float,
    comm_gain: float,
    p_c2_w: float,
    noise_power_w: float,
) -> float:
    """Delay Fisher information [1/s^2] via the rank-one inverse."""
    _check(pulse, h, noise_power_w)
    rho = comm_gain * p_c2_w / noise_power_w
    rd = pulse.derivative
    rr = np.vdot(rd, rd).real
    hr = abs(np.vdot(h.h, rd)) ** 2
    hh = np.vdot(h.h, h.h).real
    quad = (rr - rho * hr / (1.0 + rho * hh)) / noise_power_w
    return 2.0 * radar_gain * p_r_w * quad * pulse.info_scale


def fim_pessimistic(
    pulse: PulseSamples,
    *,
    radar_gain: float,
    p_r_w: float,
    comm_gain: float,
    p_c2_w: float,
    noise_power_w: float,
) -> float:
    """
    Cauchy-Schwarz lower bound on the delay information [1/s^2].

    Tight when h is parallel to r' with unit energy; a lower bound for any
    unit-energy h.
    """
    _check(pulse, None, noise_power_w)
    return (
        2.0
        * radar_gain
        * p_r_w
        * pulse.derivative_energy()
        / (noise_power_w + comm_gain * p_c2_w)
    )


def crlb_from_fim(fim_value: float) -> float:
    if not fim_value > 0:
        raise ValueError(f"Fisher information must be > 0, got {fim_value!r}")
    return 1.0 / fim_value
