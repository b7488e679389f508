"""Target object detection: range FFT, range-angle map, kurtosis ranking.

Candidate objects are high-amplitude local maxima of the range-angle map;
the M most vibration-responsive ones are kept, ranked by the kurtosis of
their per-frame (chirp-averaged, unwrapped) phase series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptySelectionError,
    ParameterError,
    UndefinedStatisticError,
)
from .synth import RadarCube, RadarConfig
from .vibext import IQSeries

DEFAULT_ANGLE_BINS = 64
NOISE_FLOOR_MAD_K = 5.0  # robust threshold over the heavy static-clutter tail
ROW_PEAK_RATIO = 0.4     # same-row peaks below this fraction of the row best
                         # are treated as array-pattern sidelobes


def periodic_hann(n: int) -> np.ndarray:
    return np.hanning(n + 1)[:-1]


@dataclass
class RangeAngleMap:
    """Averaged magnitude over (range bin, angle bin) with axis metadata."""

    magnitude: np.ndarray
    range_resolution: float
    angles_deg: np.ndarray

    def __post_init__(self):
        if np.any(self.magnitude < 0):
            raise ParameterError("range-angle magnitudes must be nonnegative")

    @property
    def n_range_bins(self) -> int:
        return self.magnitude.shape[0]

    @property
    def n_angle_bins(self) -> int:
        return self.magnitude.shape[1]


@dataclass
class TargetCandidate:
    """A selected cell with its per-frame phase series and kurtosis score."""

    range_bin: int
    angle_bin: int
    phase_series: np.ndarray
    kurtosis: float
    magnitude: float = 0.0
    range_m: float = 0.0
    azimuth_deg: float = float("nan")


def range_fft(cube: RadarCube) -> np.ndarray:
    """Hann-windowed FFT along fast time; bin k maps to range k*c/(2*bandwidth)."""
    n_fast = cube.samples.shape[-1]
    if n_fast < 8:
        raise ParameterError("fast-time length must be >= 8")
    w = periodic_hann(n_fast)
    return np.fft.fft(cube.samples * w, axis=-1)


def _angle_grid(n_angle_bins: int, rx_spacing: float) -> np.ndarray:
    k = np.arange(n_angle_bins)
    sin_theta = 2.0 * (k - n_angle_bins // 2) / (n_angle_bins * rx_spacing)
    angles = np.full(n_angle_bins, np.nan)
    ok = np.abs(sin_theta) <= 1.0
    angles[ok] = np.degrees(np.arcsin(sin_theta[ok]))
    return angles


def _angle_dft_vector(angle_bin: int, n_rx: int, n_angle_bins: int) -> np.ndarray:
    # map bin index back through the fftshift applied in range_angle_map
    k = (angle_bin + n_angle_bins // 2) % n_angle_bins
    m = np.arange(n_rx)
    return np.exp(-2j * math.pi * k * m / n_angle_bins)


def range_angle_map(
    range_spectrum: np.ndarray,
    config: RadarConfig,
    n_angle_bins: int = DEFAULT_ANGLE_BINS,
    chunk: int = 4096,
) -> RangeAngleMap:
    """Magnitude map over range and angle, averaged across frames and chirps.

    With a single antenna the angle axis degenerates to one bin.
    """
    n_frames, n_chirps, n_rx, n_range = range_spectrum.shape
    if n_rx == 1:
        mag = np.abs(range_spectrum[:, :, 0, :]).mean(axis=(0, 1))[:, None]
        return RangeAngleMap(mag, config.range_resolution, np.array([0.0]))
    # zero-padded DFT across antennas as an explicit (rx x angle) matrix;
    # columns are pre-shifted so column a is the centered angle bin a
    dft = np.stack(
        [_angle_dft_vector(a, n_rx, n_angle_bins) for a in range(n_angle_bins)],
        axis=1,
    )
    flat = range_spectrum.reshape(n_frames * n_chirps, n_rx, n_range)
    acc = np.zeros((n_range, n_angle_bins))
    for start in range(0, flat.shape[0], chunk):
        block = flat[start : start + chunk]               # (chunk, rx, range)
        spec = np.tensordot(block, dft, axes=([1], [0]))  # (chunk, range, angle)
        acc += np.abs(spec).sum(axis=0)
    mag = acc / flat.shape[0]
    return RangeAngleMap(mag, config.range_resolution,
                         _angle_grid(n_angle_bins, config.rx_spacing))


def phase_kurtosis(phase_series) -> float:
    """Pearson kurtosis (fourth standardized moment, normal = 3)."""
    x = np.asarray(phase_series, dtype=np.float64)
    if x.size < 4:
        raise ParameterError("kurtosis needs at least 4 samples")
    centered = x - x.mean()
    var = np.mean(centered ** 2)
    scale = max(1.0, float(np.max(np.abs(x))))
    if var <= (1e-12 * scale) ** 2:
        raise UndefinedStatisticError("phase series has (numerically) zero variance")
    return float(np.mean(centered ** 4) / var ** 2)


def _cell_series(range_spectrum: np.ndarray, range_bin: int, angle_bin: int,
                 n_angle_bins: int) -> np.ndarray:
    """Complex per-chirp series at a (range, angle) cell, shape (frames, chirps)."""
    n_rx = range_spectrum.shape[2]
    if n_rx == 1:
        return range_spectrum[:, :, 0, range_bin]
    vec = _angle_dft_vector(angle_bin, n_rx, n_angle_bins)
    return np.tensordot(range_spectrum[:, :, :, range_bin], vec, axes=([2], [0]))


def _frame_phase(cell: np.ndarray) -> np.ndarray:
    # average the complex phasor over chirps first to dodge wrap artifacts
    return np.unwrap(np.angle(cell.mean(axis=1)))


def _local_maxima(mag: np.ndarray) -> np.ndarray:
    from scipy import ndimage

    if mag.shape[1] == 1:
        peak = ndimage.maximum_filter(mag, size=(3, 1), mode="nearest")
    else:
        # the angle axis is circular (it is a DFT over antennas)
        peak = ndimage.maximum_filter(mag, size=(3, 3), mode=("nearest", "wrap"))
    return mag >= peak


def select_targets(
    ra_map: RangeAngleMap,
    range_spectrum: np.ndarray,
    m_targets: int,
    noise_mad_k: float = NOISE_FLOOR_MAD_K,
) -> list[TargetCandidate]:
    """Top-M candidate cells ranked by phase kurtosis.

    Candidates are local maxima above median + k*MAD of the map. Ties break
    by map magnitude, then by the lower range bin.
    """
    if m_targets < 1:
        raise ParameterError("m_targets must be >= 1")
    mag = ra_map.magnitude
    med = float(np.median(mag))
    mad = float(np.median(np.abs(mag - med)))
    floor = med + noise_mad_k * mad
    cells = np.argwhere(_local_maxima(mag) & (mag > floor))
    if cells.size == 0:
        raise EmptySelectionError("no range-angle cells above the noise floor")
    # array-pattern sidelobes of a strong reflector can form genuine local
    # maxima in its own range row; keep only peaks comparable to the row best
    row_best: dict[int, float] = {}
    for r, a in cells:
        row_best[int(r)] = max(row_best.get(int(r), 0.0), float(mag[r, a]))
    cells = [
        (int(r), int(a)) for r, a in cells
        if mag[r, a] >= ROW_PEAK_RATIO * row_best[int(r)]
    ]

    candidates = []
    for r, a in cells:
        cell = _cell_series(range_spectrum, int(r), int(a), ra_map.n_angle_bins)
        phase = _frame_phase(cell)
        try:
            kurt = phase_kurtosis(phase)
        except UndefinedStatisticError:
            kurt = -math.inf  # perfectly static cell: rank last
        candidates.append(
            TargetCandidate(
                range_bin=int(r),
                angle_bin=int(a),
                phase_series=phase,
                kurtosis=kurt,
                magnitude=float(mag[r, a]),
                range_m=float(r * ra_map.range_resolution),
                azimuth_deg=float(ra_map.angles_deg[a]),
            )
        )
    candidates.sort(key=lambda c: (-c.kurtosis, -c.magnitude, c.range_bin))
    return candidates[:m_targets]


def extract_target_iq(
    range_spectrum: np.ndarray,
    candidate: TargetCandidate,
    config: RadarConfig,
    n_angle_bins: int = DEFAULT_ANGLE_BINS,
) -> IQSeries:
    """Per-chirp complex series at a candidate's cell, at the phase sampling rate."""
    cell = _cell_series(range_spectrum, candidate.range_bin, candidate.angle_bin,
                        n_angle_bins)
    return IQSeries(cell.reshape(-1), config.frame_rate)
