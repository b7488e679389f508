"""Unsupervised speaker distinction: spectral-envelope features, CH-index
model selection, and diagonal-covariance GMM clustering.

EM is implemented here rather than delegated so that the per-iteration
log-likelihood trajectory is observable (monotonicity is an asserted
invariant) and restart/seeding behavior is exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .amplify import PowerSpectrogram
from .errors import ClusterError, EmptySegmentError, FeatureError, ParameterError

DEFAULT_ENVELOPE_DIM = 64
GMM_RESTARTS = 10
GMM_MAX_ITER = 300
GMM_TOL = 1e-6
# flooring can nudge the log-likelihood down by rounding; this is the slack
MONOTONE_RTOL = 1e-9

# set True (e.g. in test builds) to assert EM monotonicity on every fit
ASSERT_MONOTONE_EM = False


@dataclass
class EnvelopeVector:
    """L2-normalized spectral envelope of one object over one segment."""

    values: np.ndarray
    object_id: int = 0
    segment_id: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if np.any(self.values < 0):
            raise ParameterError("envelope values must be nonnegative")


@dataclass
class ClusterResult:
    labels: np.ndarray
    chosen_n: int
    ch_scores: dict[int, float] | None
    means: np.ndarray
    covariances: np.ndarray        # diagonal entries, (N, D)
    weights: np.ndarray
    responsibilities: np.ndarray   # (n, N)
    log_likelihood_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if np.any(self.labels < 0) or np.any(self.labels >= self.chosen_n):
            raise ParameterError("labels out of range for chosen_n")
        if not np.isclose(self.weights.sum(), 1.0):
            raise ParameterError("mixture weights must sum to 1")


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------


def spectral_envelope(power, dim: int = DEFAULT_ENVELOPE_DIM,
                      object_id: int = 0, segment_id: int = 0) -> EnvelopeVector:
    """Per-bin maximum magnitude over the segment's frames, 3-bin smoothed,
    resampled to `dim` points, L2-normalized.

    The input is a power spectrogram; the envelope is taken on magnitudes
    (sqrt of power) so weak spectral lines keep weight after normalization.
    """
    values = power.values if isinstance(power, PowerSpectrogram) else np.asarray(power)
    if values.ndim != 2 or values.shape[0] < 1:
        raise EmptySegmentError("segment holds no spectrogram frames")
    if dim < 2:
        raise ParameterError("envelope dimension must be >= 2")
    env = np.sqrt(values.max(axis=0))
    env = np.convolve(env, np.ones(3) / 3.0, mode="same")
    n_bins = env.size
    grid = np.linspace(0.0, n_bins - 1.0, dim)
    env = np.interp(grid, np.arange(n_bins), env)
    norm = np.linalg.norm(env)
    if norm > 0:
        env = env / norm
    return EnvelopeVector(env, object_id, segment_id)


def build_feature(envelopes: list[EnvelopeVector]) -> np.ndarray:
    """Concatenate per-object envelopes (in target-selection order)."""
    if not envelopes:
        raise FeatureError("no envelopes to concatenate")
    dims = {e.values.size for e in envelopes}
    if len(dims) != 1:
        raise FeatureError(f"envelope dimensions differ across objects: {sorted(dims)}")
    return np.concatenate([e.values for e in envelopes])


def build_feature_matrix(envelopes_by_segment: list[list[EnvelopeVector]]) -> np.ndarray:
    counts = {len(seg) for seg in envelopes_by_segment}
    if len(counts) != 1:
        raise FeatureError(f"object count differs across segments: {sorted(counts)}")
    return np.vstack([build_feature(seg) for seg in envelopes_by_segment])


# ---------------------------------------------------------------------------
# Diagonal-covariance GMM via EM
# ---------------------------------------------------------------------------


def _kmeanspp_init(x: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty((n, x.shape[1]))
    centers[0] = x[rng.integers(x.shape[0])]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for k in range(1, n):
        total = d2.sum()
        if total <= 0:
            centers[k] = x[rng.integers(x.shape[0])]
            continue
        probs = d2 / total
        centers[k] = x[rng.choice(x.shape[0], p=probs)]
        d2 = np.minimum(d2, np.sum((x - centers[k]) ** 2, axis=1))
    return centers


def _log_gaussian_diag(x: np.ndarray, means: np.ndarray, variances: np.ndarray
                       ) -> np.ndarray:
    # (n, N): log N(x_i | mu_k, diag(var_k))
    n, d = x.shape
    log_det = np.sum(np.log(variances), axis=1)
    diff = x[:, None, :] - means[None, :, :]
    maha = np.sum(diff ** 2 / variances[None, :, :], axis=2)
    return -0.5 * (d * np.log(2.0 * np.pi) + log_det[None, :] + maha)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    return (m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))).squeeze(axis)


def _em_fit(x: np.ndarray, n: int, rng: np.random.Generator,
            max_iter: int, tol: float):
    n_pts, dim = x.shape
    var_floor = max(float(x.var(axis=0).mean()), 1e-30) * 1e-8 + 1e-300
    means = _kmeanspp_init(x, n, rng)
    variances = np.tile(np.maximum(x.var(axis=0), var_floor), (n, 1))
    weights = np.full(n, 1.0 / n)

    history: list[float] = []
    log_resp = None
    reseeds = 0
    it = 0
    while it < max_iter:
        it += 1
        log_pdf = _log_gaussian_diag(x, means, variances)
        weighted = log_pdf + np.log(weights)[None, :]
        log_norm = _logsumexp(weighted, axis=1)
        ll = float(np.sum(log_norm))
        log_resp = weighted - log_norm[:, None]
        resp = np.exp(log_resp)

        counts = resp.sum(axis=0)
        empty = np.flatnonzero(counts < 1e-10)
        if empty.size:
            reseeds += 1
            if reseeds > 5 * n:
                raise ClusterError("EM components stay empty after repeated reseeding")
            for k in empty:
                means[k] = x[rng.integers(n_pts)]
                variances[k] = np.maximum(x.var(axis=0), var_floor)
            weights = np.full(n, 1.0 / n)
            history = []  # fresh run from the reseeded parameters
            continue

        if history and abs(ll - history[-1]) < tol:
            history.append(ll)
            break
        history.append(ll)

        weights = counts / n_pts
        means = (resp.T @ x) / counts[:, None]
        diff_sq = (x[:, None, :] - means[None, :, :]) ** 2
        variances = np.einsum("nk,nkd->kd", resp, diff_sq) / counts[:, None]
        variances = np.maximum(variances, var_floor)

    if ASSERT_MONOTONE_EM:
        assert_monotone_history(history)
    return history[-1], means, variances, weights, np.exp(log_resp), history


def assert_monotone_history(history: list[float]):
    for prev, cur in zip(history, history[1:]):
        slack = MONOTONE_RTOL * max(1.0, abs(prev))
        if cur < prev - slack:
            raise AssertionError(
                f"EM log-likelihood decreased: {prev} -> {cur}"
            )


def gmm_cluster(features: np.ndarray, n: int, seed,
                n_restarts: int = GMM_RESTARTS,
                max_iter: int = GMM_MAX_ITER,
                tol: float = GMM_TOL) -> ClusterResult:
    """Diagonal-covariance GMM fit by EM with k-means++ starts.

    Runs `n_restarts` seeded restarts and keeps the best final
    log-likelihood; hard labels are argmax responsibilities.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError("features must be a 2-D (segments x dims) matrix")
    if n < 1:
        raise ParameterError("component count must be >= 1")
    if x.shape[0] < n:
        raise ParameterError(f"{x.shape[0]} samples cannot support {n} components")

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    best = None
    for child in ss.spawn(n_restarts):
        rng = np.random.default_rng(child)
        result = _em_fit(x, n, rng, max_iter, tol)
        if best is None or result[0] > best[0]:
            best = result
    ll, means, variances, weights, resp, history = best
    labels = np.argmax(resp, axis=1)
    return ClusterResult(
        labels=labels,
        chosen_n=n,
        ch_scores=None,
        means=means,
        covariances=variances,
        weights=weights,
        responsibilities=resp,
        log_likelihood_history=history,
    )


# ---------------------------------------------------------------------------
# Model selection
# ---------------------------------------------------------------------------


def calinski_harabasz(features: np.ndarray, labels: np.ndarray) -> float:
    """CH index: [trace(B)/(k-1)] / [trace(W)/(n-k)] over the present labels."""
    x = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    present = np.unique(labels)
    k = present.size
    n = x.shape[0]
    if k < 2 or k >= n:
        raise ParameterError("CH index needs 2 <= distinct labels < n")
    mu = x.mean(axis=0)
    trace_b = 0.0
    trace_w = 0.0
    for lab in present:
        grp = x[labels == lab]
        gm = grp.mean(axis=0)
        trace_b += grp.shape[0] * float(np.sum((gm - mu) ** 2))
        trace_w += float(np.sum((grp - gm) ** 2))
    if trace_w <= 0.0:
        return float("inf")
    return (trace_b / (k - 1)) / (trace_w / (n - k))


def estimate_num_speakers(features: np.ndarray, n_max: int, seed,
                          return_scores: bool = False):
    """Pick the candidate N in {2..n_max} that maximizes the CH index of the
    hard GMM labels; ties go to the smaller N."""
    x = np.asarray(features, dtype=np.float64)
    if n_max < 2:
        raise ParameterError("n_max must be >= 2")
    if x.shape[0] < n_max + 1:
        raise ParameterError(
            f"need at least n_max+1 = {n_max + 1} segments, got {x.shape[0]}"
        )
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(n_max - 1)
    scores: dict[int, float] = {}
    for idx, n in enumerate(range(2, n_max + 1)):
        result = gmm_cluster(x, n, children[idx])
        if np.unique(result.labels).size < 2:
            scores[n] = -np.inf
        else:
            scores[n] = calinski_harabasz(x, result.labels)
    best_n = max(scores, key=lambda n: (scores[n], -n))
    if return_scores:
        return best_n, scores
    return best_n
