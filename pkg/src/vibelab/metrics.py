"""Evaluation metrics: distinction success rate, SNR, and PSNR.

SNR aligns the clean reference to the enhanced signal (lag search plus
optimal scalar gain) before measuring, so it is invariant to positive gain
and small delays. Infinite ratios are capped at 100 dB for CSV friendliness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import MetricError

DB_CAP = 100.0
MAX_CLUSTERS = 8
ALIGN_WINDOW_S = 0.05


@dataclass
class EvaluationReport:
    success_rate: float
    snr_db: float
    psnr_db: float
    baseline_snr_db: float = float("nan")
    baseline_psnr_db: float = float("nan")
    n_speakers_true: int = 0
    n_speakers_estimated: int = 0
    assignments: list[tuple[int, int, int]] = field(default_factory=list)
    config_fingerprint: str = ""
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.success_rate <= 1.0) and not np.isnan(self.success_rate):
            raise MetricError("success_rate must lie in [0, 1]")


def success_rate(predicted, true) -> float:
    """Best accuracy over all bijections between predicted and true label sets."""
    pred = np.asarray(predicted)
    ref = np.asarray(true)
    if pred.shape != ref.shape or pred.ndim != 1:
        raise MetricError("predicted and true label lists must have equal length")
    if pred.size == 0:
        raise MetricError("empty label lists")
    pred_set = list(dict.fromkeys(pred.tolist()))
    true_set = list(dict.fromkeys(ref.tolist()))
    if len(pred_set) > MAX_CLUSTERS or len(true_set) > MAX_CLUSTERS:
        raise MetricError(f"label matching supports at most {MAX_CLUSTERS} clusters")

    best = 0.0
    if len(pred_set) <= len(true_set):
        for perm in itertools.permutations(true_set, len(pred_set)):
            mapping = dict(zip(pred_set, perm))
            acc = float(np.mean([mapping[p] == t for p, t in zip(pred.tolist(), ref.tolist())]))
            best = max(best, acc)
    else:
        for perm in itertools.permutations(pred_set, len(true_set)):
            mapping = dict(zip(perm, true_set))
            acc = float(np.mean([mapping.get(p) == t for p, t in zip(pred.tolist(), ref.tolist())]))
            best = max(best, acc)
    return best


def _capped_ratio_db(num: float, den: float) -> float:
    if den <= 0.0:
        return DB_CAP
    return float(min(10.0 * np.log10(num / den), DB_CAP))


def snr_db(enhanced, reference, sample_rate: float) -> float:
    """10 log10(||ref_aligned||^2 / ||enhanced - ref_aligned||^2).

    The reference is aligned by cross-correlation lag search within +-50 ms
    and scaled by the least-squares gain before comparison.
    """
    e = np.asarray(enhanced, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    if e.shape != r.shape or e.ndim != 1:
        raise MetricError("enhanced and reference must be equal-length 1-D series")
    if np.sum(r ** 2) <= 0.0:
        raise MetricError("reference signal has zero power")

    max_lag = int(round(ALIGN_WINDOW_S * sample_rate))
    max_lag = min(max_lag, e.size - 1)
    full = np.correlate(e, r, mode="full")
    mid = e.size - 1
    window = full[mid - max_lag : mid + max_lag + 1]
    lag = int(np.argmax(np.abs(window))) - max_lag

    if lag >= 0:
        e_part, r_part = e[lag:], r[: r.size - lag]
    else:
        e_part, r_part = e[: e.size + lag], r[-lag:]
    ref_power = float(np.sum(r_part ** 2))
    if ref_power <= 0.0:
        raise MetricError("reference has zero power in the aligned window")
    gain = float(np.dot(e_part, r_part) / ref_power)
    aligned = gain * r_part
    noise = e_part - aligned
    return _capped_ratio_db(float(np.sum(aligned ** 2)), float(np.sum(noise ** 2)))


def psnr_db(enhanced_spectrogram, clean_spectrogram) -> float:
    """Peak SNR of two spectrograms, each normalized to peak 1: 10 log10(1/MSE)."""
    e = np.asarray(enhanced_spectrogram, dtype=np.float64)
    c = np.asarray(clean_spectrogram, dtype=np.float64)
    if e.shape != c.shape:
        raise MetricError(f"spectrogram shapes differ: {e.shape} vs {c.shape}")
    e_peak = float(np.max(np.abs(e)))
    c_peak = float(np.max(np.abs(c)))
    if e_peak <= 0.0 or c_peak <= 0.0:
        raise MetricError("spectrograms must have nonzero peak")
    mse = float(np.mean((e / e_peak - c / c_peak) ** 2))
    return _capped_ratio_db(1.0, mse)
