"""Vibration extraction: speech activity detection and speech-aware
constrained circle fitting of the per-target IQ trajectory.

The IQ trajectory of a vibrating target is an arc of radius alpha around the
static-interference center. The center shifts between silence and speech, so
a single global circle fit miscenters the speech arc. The scheme here fits
the (long) silence arc unconstrained to pin down the radius, then fits each
speech segment with the radius constrained to [(1-gamma) r0, (1+gamma) r0],
recovering a per-segment center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .errors import (
    CalibrationError,
    DegenerateFitError,
    InsufficientDataError,
    ParameterError,
)

DEFAULT_GAMMA = 0.1
SAD_BAND = (50.0, 1000.0)
SAD_SMOOTH_S = 0.05
SAD_MAD_K = 3.0
SAD_MIN_DURATION_S = 0.10
SAD_MERGE_GAP_S = 0.15

LM_MAX_ITER = 200
LM_STEP_TOL = 1e-10


@dataclass
class IQSeries:
    """Complex per-chirp samples of one target at the phase sampling rate."""

    samples: np.ndarray
    frame_rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128).reshape(-1)
        if self.samples.size < 16:
            raise ParameterError("IQ series needs at least 16 samples")
        if not np.all(np.isfinite(self.samples)):
            raise ParameterError("IQ series must be finite")
        if self.frame_rate <= 0:
            raise ParameterError("frame rate must be > 0")

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class SpeechSegments:
    """Detected speech intervals in frame indices, [start, end)."""

    intervals: list[tuple[int, int]]
    threshold_used: float
    n_frames: int = 0

    def __post_init__(self):
        ivals = [(int(s), int(e)) for s, e in self.intervals]
        for s, e in ivals:
            if e <= s or s < 0:
                raise ParameterError(f"interval ({s}, {e}) invalid")
        for (s0, e0), (s1, e1) in zip(ivals, ivals[1:]):
            if s1 < e0:
                raise ParameterError("intervals must be sorted and non-overlapping")
        if self.n_frames and ivals and ivals[-1][1] > self.n_frames:
            raise ParameterError("interval extends past the series length")
        self.intervals = ivals

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        for s, e in self.intervals:
            m[s:e] = True
        return m


@dataclass
class CircleFit:
    center: complex
    radius: float
    residual: float
    iterations: int = 0

    def __post_init__(self):
        if self.radius <= 0:
            raise ParameterError("fitted radius must be > 0")
        if self.residual < 0:
            raise ParameterError("residual must be >= 0")


@dataclass
class PhaseSignal:
    """Calibrated vibration phase per chirp, zero-mean per contiguous region."""

    values: np.ndarray
    frame_rate: float
    target_id: int
    segments: SpeechSegments
    fallback_used: bool = False
    silence_fit: CircleFit | None = None
    segment_fits: list[CircleFit] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Speech activity detection
# ---------------------------------------------------------------------------


def _moving_average(x: np.ndarray, n: int) -> np.ndarray:
    if n <= 1:
        return x
    kernel = np.ones(n) / n
    return np.convolve(x, kernel, mode="same")


def _mask_to_intervals(mask: np.ndarray) -> list[tuple[int, int]]:
    idx = np.flatnonzero(np.diff(np.concatenate(([0], mask.view(np.int8), [0]))))
    return list(zip(idx[0::2], idx[1::2]))


def detect_speech_segments(
    iq: IQSeries,
    band: tuple[float, float] = SAD_BAND,
    smooth_s: float = SAD_SMOOTH_S,
    mad_k: float = SAD_MAD_K,
    min_duration_s: float = SAD_MIN_DURATION_S,
    merge_gap_s: float = SAD_MERGE_GAP_S,
) -> SpeechSegments:
    """Envelope-threshold speech detection on the band-limited raw phase.

    The raw (uncalibrated, unwrapped) phase is bandpassed to the speech band,
    the analytic-signal envelope is smoothed over smooth_s seconds and
    thresholded at median + mad_k * MAD. Intervals shorter than
    min_duration_s are discarded, then neighbors closer than merge_gap_s are
    merged.
    """
    fs = iq.frame_rate
    if fs <= 2000.0:
        raise ParameterError("speech detection needs a phase sampling rate > 2 kHz")
    n_smooth = max(1, int(round(smooth_s * fs)))
    x = iq.samples
    if x.size <= max(n_smooth, 64):
        raise InsufficientDataError("series shorter than the smoothing window")

    from .amplify import bandpass_filter

    phase = np.unwrap(np.angle(x))
    bp = bandpass_filter(phase, band[0], band[1], fs)
    envelope = _moving_average(np.abs(sps.hilbert(bp)), n_smooth)

    med = float(np.median(envelope))
    mad = float(np.median(np.abs(envelope - med)))
    threshold = med + mad_k * mad
    raw = _mask_to_intervals(envelope > threshold)

    min_len = int(round(min_duration_s * fs))
    kept = [(s, e) for s, e in raw if e - s >= min_len]

    merged: list[tuple[int, int]] = []
    gap = int(round(merge_gap_s * fs))
    for s, e in kept:
        if merged and s - merged[-1][1] <= gap:
            merged[-1] = (merged[-1][0], e)
        else:
            merged.append((s, e))
    return SpeechSegments(merged, threshold, n_frames=x.size)


# ---------------------------------------------------------------------------
# Circle fitting
# ---------------------------------------------------------------------------


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points)
    if np.iscomplexobj(pts):
        pts = np.column_stack([pts.real, pts.imag])
    pts = pts.astype(np.float64).reshape(-1, 2)
    return pts


def _check_collinear(pts: np.ndarray):
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] <= 0 or sv[1] / sv[0] < 1e-9:
        raise DegenerateFitError("points are collinear or coincident")


def _kasa_fit(pts: np.ndarray) -> tuple[np.ndarray, float]:
    # algebraic fit: 2*cx*x + 2*cy*y + (r^2 - cx^2 - cy^2) = x^2 + y^2
    a = np.column_stack([2.0 * pts[:, 0], 2.0 * pts[:, 1], np.ones(len(pts))])
    b = (pts ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy, c = sol
    r_sq = c + cx ** 2 + cy ** 2
    r = float(np.sqrt(max(r_sq, 1e-300)))
    return np.array([cx, cy]), r


def _objective(pts: np.ndarray, center: np.ndarray, radius: float) -> float:
    d = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    return float(np.sum((d - radius) ** 2))


def fit_circle(points, radius_constraint: tuple[float, float] | None = None,
               initial: tuple[complex, float] | None = None) -> CircleFit:
    """Geometric least-squares circle fit via bound-projected Levenberg-Marquardt.

    Minimizes sum(||x_n - c|| - r)^2 starting from the algebraic (Kasa) fit.
    radius_constraint = (r0, gamma) clamps the radius to
    [(1-gamma) r0, (1+gamma) r0] by projecting every trial step, so the bound
    holds exactly on output. `initial` overrides the Kasa starting point.
    """
    pts = _as_points(points)
    if len(pts) < 3:
        raise DegenerateFitError("need at least 3 points")
    _check_collinear(pts)

    if radius_constraint is not None:
        r0, gamma = radius_constraint
        if r0 <= 0 or gamma < 0:
            raise ParameterError("radius constraint needs r0 > 0 and gamma >= 0")
        r_lo, r_hi = (1.0 - gamma) * r0, (1.0 + gamma) * r0
        r_lo = max(r_lo, 1e-300)
    else:
        r_lo, r_hi = 1e-300, np.inf

    if initial is not None:
        center = np.array([initial[0].real, initial[0].imag], dtype=np.float64)
        radius = float(initial[1])
    else:
        center, radius = _kasa_fit(pts)
    radius = float(np.clip(radius, r_lo, r_hi))

    cost = _objective(pts, center, radius)
    lam = 1e-3
    iterations = 0
    for iterations in range(1, LM_MAX_ITER + 1):
        dx = pts[:, 0] - center[0]
        dy = pts[:, 1] - center[1]
        dist = np.hypot(dx, dy)
        dist = np.maximum(dist, 1e-300)
        f = dist - radius
        jac = np.column_stack([-dx / dist, -dy / dist, -np.ones(len(pts))])
        jtj = jac.T @ jac
        jtf = jac.T @ f

        stepped = False
        for _ in range(25):
            a = jtj + lam * np.diag(np.diag(jtj))
            try:
                delta = np.linalg.solve(a, -jtf)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            new_center = center + delta[:2]
            new_radius = float(np.clip(radius + delta[2], r_lo, r_hi))
            new_cost = _objective(pts, new_center, new_radius)
            if new_cost <= cost:
                step_norm = float(np.linalg.norm(
                    [new_center[0] - center[0], new_center[1] - center[1],
                     new_radius - radius]))
                center, radius, cost = new_center, new_radius, new_cost
                lam = max(lam / 3.0, 1e-12)
                stepped = True
                break
            lam *= 10.0
        if not stepped or step_norm < LM_STEP_TOL:
            break

    rms = float(np.sqrt(cost / len(pts)))
    return CircleFit(complex(center[0], center[1]), radius, rms, iterations)


# ---------------------------------------------------------------------------
# Speech-aware calibration
# ---------------------------------------------------------------------------


def _silence_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    return _mask_to_intervals(~mask)


def _region_phase(samples: np.ndarray, center: complex) -> np.ndarray:
    a = np.unwrap(np.angle(samples - center))
    return a - a.mean()


def _assemble(regions: list[tuple[int, int, np.ndarray]], n: int,
              stitch: bool) -> np.ndarray:
    """Join per-region phase pieces.

    stitch=False: each piece is written as-is (zero mean per region).
    stitch=True: pieces are offset so the series is continuous at every
    boundary, then the global mean is removed; this keeps region joins from
    injecting broadband steps into the speech band.
    """
    values = np.zeros(n)
    if not stitch:
        for s, e, piece in regions:
            values[s:e] = piece
        return values
    level = 0.0
    for s, e, piece in sorted(regions):
        values[s:e] = piece - piece[0] + level
        level = values[e - 1]
    return values - values.mean()


def speech_aware_calibrate(
    iq: IQSeries,
    segments: SpeechSegments,
    gamma: float = DEFAULT_GAMMA,
    target_id: int = 0,
    fallback: bool = False,
    stitch: bool = False,
) -> PhaseSignal:
    """Two-stage calibration: silence fit pins the radius, per-segment
    constrained fits recover each speech center.

    Phase output: angle about the segment's own center on speech frames,
    about the silence center elsewhere. With stitch=False each contiguous
    region is zero-mean; stitch=True instead keeps the assembled series
    continuous across region joins (and zero-mean globally), which avoids
    step artifacts when the phase is later band-filtered.
    If the silence samples are missing or unfittable and `fallback` is set,
    a single unconstrained fit over all samples is used instead (flagged).
    """
    if gamma < 0:
        raise ParameterError("gamma must be >= 0")
    x = iq.samples
    n = x.size
    speech_mask = segments.mask(n)
    n_speech = int(speech_mask.sum())
    n_silence = n - n_speech

    def _fallback(reason: str) -> PhaseSignal:
        if not fallback:
            raise CalibrationError(reason)
        fit = fit_circle(x)
        values = _region_phase(x, fit.center)
        return PhaseSignal(values, iq.frame_rate, target_id, segments,
                           fallback_used=True, silence_fit=fit)

    if n_speech < 16:
        return _fallback(f"only {n_speech} speech samples; need >= 16")
    if n_silence < 16:
        return _fallback(f"only {n_silence} silence samples; need >= 16")

    try:
        silence_fit = fit_circle(x[~speech_mask])
    except DegenerateFitError as exc:
        return _fallback(f"silence circle fit degenerate: {exc}")

    # the silence solution seeds every speech fit: on short arcs a cold
    # algebraic start can land the center on the convex side and flip the
    # extracted phase, while the silence center is a strong prior (the
    # speech-time shift is a small perturbation of it)
    r0 = silence_fit.radius
    regions: list[tuple[int, int, np.ndarray]] = []
    segment_fits: list[CircleFit] = []
    for s, e in segments.intervals:
        pts = x[s:e]
        fit = fit_circle(pts, radius_constraint=(r0, gamma),
                         initial=(silence_fit.center, r0))
        segment_fits.append(fit)
        regions.append((s, e, _region_phase(pts, fit.center)))
    for s, e in _silence_runs(speech_mask):
        regions.append((s, e, _region_phase(x[s:e], silence_fit.center)))

    values = _assemble(regions, n, stitch)
    return PhaseSignal(values, iq.frame_rate, target_id, segments,
                       fallback_used=False, silence_fit=silence_fit,
                       segment_fits=segment_fits)
