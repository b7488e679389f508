"""Frequency-response amplification: bandpass reservation, self-noise
subtraction, and residual suppression via the auto power spectrum.

The three stages operate on a calibrated vibration phase series sampled at
the radar's per-chirp rate. STFT conventions (Hann 256, hop 64) are shared
with the simulator's ground-truth spectrograms so masks and references line
up frame-for-frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import ParameterError

DEFAULT_WINDOW = 256
DEFAULT_HOP = 64
DEFAULT_BAND = (50.0, 1000.0)


@dataclass
class STFTMatrix:
    """Complex short-time spectrum, frames along axis 0, bins along axis 1."""

    values: np.ndarray
    window_size: int
    hop: int
    sample_rate: float
    window_type: str = "hann"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2:
            raise ParameterError("STFT values must be a 2-D (frames x bins) matrix")
        if self.values.shape[1] != self.window_size // 2 + 1:
            raise ParameterError("bin count must equal window/2 + 1")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("STFT values must be finite")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_bins(self) -> int:
        return self.values.shape[1]

    def bin_frequencies(self) -> np.ndarray:
        return np.fft.rfftfreq(self.window_size, d=1.0 / self.sample_rate)

    def frame_times(self) -> np.ndarray:
        # time of each frame center
        centers = np.arange(self.n_frames) * self.hop + self.window_size / 2.0
        return centers / self.sample_rate


@dataclass
class NoiseProfile:
    """Per-bin noise magnitude estimated from speech-free frames."""

    magnitude: np.ndarray
    frames_used: int

    def __post_init__(self):
        self.magnitude = np.asarray(self.magnitude, dtype=np.float64)
        if np.any(self.magnitude < 0):
            raise ParameterError("noise magnitudes must be nonnegative")
        if self.frames_used < 1:
            raise ParameterError("noise profile needs at least one frame")


@dataclass
class PowerSpectrogram:
    """Nonnegative time-frequency energy matrix (frames x bins)."""

    values: np.ndarray
    window_size: int
    hop: int
    sample_rate: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ParameterError("power spectrogram must be 2-D")
        if np.any(self.values < 0):
            raise ParameterError("power spectrogram entries must be >= 0")

    def bin_frequencies(self) -> np.ndarray:
        return np.fft.rfftfreq(self.window_size, d=1.0 / self.sample_rate)


def bandpass_filter(x, lo: float, hi: float, sample_rate: float) -> np.ndarray:
    """Zero-phase 4th-order Butterworth bandpass (forward-backward).

    Output has the same length as the input; the double pass squares the
    magnitude response, so the stated order refers to the single pass.
    """
    x = np.asarray(x, dtype=np.float64)
    if not (0.0 < lo < hi < sample_rate / 2.0):
        raise ParameterError(
            f"band ({lo}, {hi}) Hz invalid for sample rate {sample_rate} Hz"
        )
    if x.size < 32:
        raise ParameterError("series too short to bandpass filter")
    sos = sps.butter(4, [lo, hi], btype="bandpass", fs=sample_rate, output="sos")
    return sps.sosfiltfilt(sos, x)


def _hann(window_size: int) -> np.ndarray:
    return sps.get_window("hann", window_size, fftbins=True)


def _check_cola(window_size: int, hop: int):
    w = _hann(window_size)
    if hop <= 0 or hop > window_size:
        raise ParameterError(f"hop {hop} invalid for window {window_size}")
    if not sps.check_COLA(w, window_size, window_size - hop):
        raise ParameterError(
            f"hann window {window_size} with hop {hop} does not satisfy COLA"
        )
    return w


def stft(
    x,
    sample_rate: float,
    window_size: int = DEFAULT_WINDOW,
    hop: int = DEFAULT_HOP,
) -> STFTMatrix:
    """Hann-windowed short-time Fourier transform (one-sided bins)."""
    x = np.asarray(x, dtype=np.float64)
    w = _check_cola(window_size, hop)
    if x.size < window_size:
        raise ParameterError(
            f"signal length {x.size} shorter than window {window_size}"
        )
    frames = sliding = np.lib.stride_tricks.sliding_window_view(x, window_size)
    frames = sliding[::hop]
    spec = np.fft.rfft(frames * w, axis=1)
    return STFTMatrix(spec, window_size, hop, sample_rate)


def istft(m: STFTMatrix) -> np.ndarray:
    """Weighted overlap-add inverse; exact on interior samples for COLA setups."""
    w = _check_cola(m.window_size, m.hop)
    frames = np.fft.irfft(m.values, n=m.window_size, axis=1)
    length = (m.n_frames - 1) * m.hop + m.window_size
    num = np.zeros(length)
    den = np.zeros(length)
    wsq = w * w
    for k in range(m.n_frames):
        start = k * m.hop
        num[start : start + m.window_size] += frames[k] * w
        den[start : start + m.window_size] += wsq
    out = np.zeros(length)
    ok = den > 1e-12
    out[ok] = num[ok] / den[ok]
    return out


def noise_profile(m: STFTMatrix, n_frames: int) -> NoiseProfile:
    """Average magnitude over the first n_frames (assumed speech-free)."""
    if n_frames < 1 or n_frames > m.n_frames:
        raise ParameterError(
            f"n_frames {n_frames} out of range for {m.n_frames} STFT frames"
        )
    mag = np.abs(m.values[:n_frames]).mean(axis=0)
    return NoiseProfile(mag, n_frames)


def spectral_subtract(
    m: STFTMatrix,
    noise: NoiseProfile,
    alpha: float = 2.0,
    beta: float = 0.01,
) -> STFTMatrix:
    """Magnitude-domain over-subtraction with a spectral floor.

    |out| = max(|Y| - alpha*D, beta*|Y|); the complex output is formed as a
    real nonnegative gain times Y, so the phase of every bin is carried over
    exactly (bit-for-bit up to the multiplication itself).
    """
    if alpha < 1.0:
        raise ParameterError(f"over-subtraction factor alpha must be >= 1, got {alpha}")
    if not (0.0 < beta < 1.0):
        raise ParameterError(f"spectral floor beta must lie in (0, 1), got {beta}")
    if noise.magnitude.shape[0] != m.n_bins:
        raise ParameterError("noise profile bin count does not match STFT")
    mag = np.abs(m.values)
    safe = np.where(mag > 0.0, mag, 1.0)
    gain = np.maximum(1.0 - alpha * noise.magnitude[None, :] / safe, beta)
    out = m.values * gain
    out[mag == 0.0] = 0.0
    return STFTMatrix(out, m.window_size, m.hop, m.sample_rate, m.window_type)


def auto_power_spectrum(m: STFTMatrix) -> PowerSpectrogram:
    """P(t,f) = X(t,f) * conj(X(t,f)); zero-mean residual cross-terms average out."""
    if not np.all(np.isfinite(m.values)):
        raise ParameterError("STFT values must be finite")
    power = (m.values * np.conj(m.values)).real
    # clamp -0.0 / tiny negatives from rounding
    np.maximum(power, 0.0, out=power)
    return PowerSpectrogram(power, m.window_size, m.hop, m.sample_rate)
