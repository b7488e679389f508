"""Multi-object signal enhancement: mask estimation, median mask
combination, spatial covariances, and MVDR beamforming per frequency bin.

The trained mask networks are out of scope; the mask estimator interface is
kept with two implementations: an oracle fed by simulator ground truth and a
classical spectral gate driven by the per-object noise profiles. A
pre-beamforming denoising hook is accepted everywhere and defaults to
identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amplify import NoiseProfile, STFTMatrix
from .errors import ParameterError
from .synth import GroundTruth

HERMITIAN_TOL = 1e-10
EIGENVALUE_TOL = -1e-10
MASK_SUM_FLOOR = 1e-6
DIAGONAL_LOADING = 1e-6


@dataclass
class MaskedSTFT:
    """Per-object complex STFT stack with speech/noise masks, (obj, frame, bin)."""

    stfts: np.ndarray
    speech_mask: np.ndarray
    noise_mask: np.ndarray

    def __post_init__(self):
        self.stfts = np.asarray(self.stfts, dtype=np.complex128)
        if self.stfts.ndim != 3:
            raise ParameterError("stfts must be (objects, frames, bins)")
        for name, mask in (("speech", self.speech_mask), ("noise", self.noise_mask)):
            mask = np.asarray(mask, dtype=np.float64)
            if mask.shape != self.stfts.shape:
                raise ParameterError(f"{name} mask shape does not match the stfts")
            if np.any(mask < 0) or np.any(mask > 1):
                raise ParameterError(f"{name} mask values must lie in [0, 1]")
        self.speech_mask = np.asarray(self.speech_mask, dtype=np.float64)
        self.noise_mask = np.asarray(self.noise_mask, dtype=np.float64)

    @property
    def n_objects(self) -> int:
        return self.stfts.shape[0]


@dataclass
class SpatialCovariances:
    """Per-bin M x M Hermitian PSD matrices for speech and noise."""

    phi_speech: np.ndarray
    phi_noise: np.ndarray

    def __post_init__(self):
        for name, phi in (("speech", self.phi_speech), ("noise", self.phi_noise)):
            if phi.ndim != 3 or phi.shape[1] != phi.shape[2]:
                raise ParameterError(f"phi_{name} must be (bins, M, M)")
            herm_err = np.max(np.abs(phi - np.conj(np.swapaxes(phi, 1, 2))))
            if herm_err > HERMITIAN_TOL:
                raise ParameterError(f"phi_{name} not Hermitian (err {herm_err:.2e})")
            eig = np.linalg.eigvalsh(phi)
            if np.min(eig) < EIGENVALUE_TOL:
                raise ParameterError(f"phi_{name} has negative eigenvalues")


def estimate_masks(
    stfts: np.ndarray,
    mode: str,
    ground_truth: GroundTruth | None = None,
    noise_profiles: list[NoiseProfile] | None = None,
    object_indices: list[int] | None = None,
    over_subtraction: float = 2.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Speech/noise masks per object, (obj, frame, bin) each.

    mode='oracle' uses simulator truth: |S|^2 / (|S|^2 + |R|^2), with
    object_indices mapping stack rows to ground-truth objects.
    mode='spectral-gate' uses sigmoid((|Y| - a*D) / (0.1*D)) per object.
    """
    stfts = np.asarray(stfts, dtype=np.complex128)
    if stfts.ndim != 3:
        raise ParameterError("stfts must be (objects, frames, bins)")
    n_obj, n_frames, n_bins = stfts.shape

    if mode == "oracle":
        if ground_truth is None:
            raise ParameterError("oracle masks require simulator ground truth")
        indices = object_indices if object_indices is not None else list(range(n_obj))
        if len(indices) != n_obj:
            raise ParameterError("object_indices must match the stack size")
        speech = np.empty((n_obj, n_frames, n_bins))
        for row, gt_idx in enumerate(indices):
            mask = ground_truth.speech_mask[gt_idx]
            if mask.shape != (n_frames, n_bins):
                raise ParameterError(
                    f"ground-truth mask shape {mask.shape} does not match stfts"
                )
            speech[row] = mask
    elif mode == "spectral-gate":
        if noise_profiles is None or len(noise_profiles) != n_obj:
            raise ParameterError("spectral-gate masks need one NoiseProfile per object")
        speech = np.empty((n_obj, n_frames, n_bins))
        for row, profile in enumerate(noise_profiles):
            d = profile.magnitude[None, :]
            mag = np.abs(stfts[row])
            with np.errstate(divide="ignore", invalid="ignore"):
                z = (mag - over_subtraction * d) / (0.1 * d)
                mask = 1.0 / (1.0 + np.exp(-z))
            zero_noise = np.broadcast_to(d == 0.0, mag.shape)
            mask = np.where(zero_noise, (mag > 0.0).astype(float), mask)
            speech[row] = np.clip(np.nan_to_num(mask, nan=0.0), 0.0, 1.0)
    else:
        raise ParameterError(f"unknown mask mode {mode!r}")

    return speech, 1.0 - speech


def median_combine_masks(masks: np.ndarray) -> np.ndarray:
    """Elementwise median across the object axis (robust to outlier masks)."""
    masks = np.asarray(masks, dtype=np.float64)
    if masks.ndim != 3 or masks.shape[0] < 1:
        raise ParameterError("need a (objects, frames, bins) stack with >= 1 object")
    return np.median(masks, axis=0)


def spatial_covariance(stfts: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Mask-weighted per-bin covariance: Phi(f) = sum_t m(t,f) y y^H / sum_t m.

    Bins whose mask weight falls below a floor get the identity (keeps the
    beamformer defined on empty bins).
    """
    stfts = np.asarray(stfts, dtype=np.complex128)
    mask = np.asarray(mask, dtype=np.float64)
    if stfts.ndim != 3:
        raise ParameterError("stfts must be (objects, frames, bins)")
    if mask.shape != stfts.shape[1:]:
        raise ParameterError("mask must be (frames, bins)")
    n_obj, _, n_bins = stfts.shape
    num = np.einsum("atf,btf,tf->fab", stfts, np.conj(stfts), mask)
    denom = mask.sum(axis=0)
    phi = np.empty((n_bins, n_obj, n_obj), dtype=np.complex128)
    eye = np.eye(n_obj, dtype=np.complex128)
    for f in range(n_bins):
        if denom[f] < MASK_SUM_FLOOR:
            phi[f] = eye
        else:
            phi[f] = num[f] / denom[f]
    return 0.5 * (phi + np.conj(np.swapaxes(phi, 1, 2)))


def mvdr_weights(phi_speech: np.ndarray, phi_noise: np.ndarray,
                 reference: int = 0) -> np.ndarray:
    """Per-bin MVDR weights, (bins, M).

    Steering d(f) is the principal eigenvector of phi_speech(f), normalized
    so its reference component is 1; w = inv(phi_n + eps I) d / (d^H ...),
    with diagonal loading eps = 1e-6 * trace / M.
    """
    n_bins, n_obj, _ = phi_speech.shape
    if phi_noise.shape != phi_speech.shape:
        raise ParameterError("speech/noise covariance shapes differ")
    if not (0 <= reference < n_obj):
        raise ParameterError("reference channel out of range")
    weights = np.empty((n_bins, n_obj), dtype=np.complex128)
    eye = np.eye(n_obj)
    for f in range(n_bins):
        _, vecs = np.linalg.eigh(phi_speech[f])
        d = vecs[:, -1]
        ref = d[reference]
        if abs(ref) < 1e-12:
            # degenerate steering: pass the reference channel through
            weights[f] = 0.0
            weights[f, reference] = 1.0
            continue
        d = d / ref
        trace = float(np.trace(phi_noise[f]).real)
        eps = DIAGONAL_LOADING * max(trace / n_obj, 1e-12)
        assert eps > 0.0  # loaded matrix is always invertible
        loaded = phi_noise[f] + eps * eye
        num = np.linalg.solve(loaded, d)
        denom = np.real(np.vdot(d, num))
        weights[f] = num / denom
    return weights


def apply_beamformer(stfts: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """out(t, f) = w(f)^H y(t, f)."""
    return np.einsum("fm,mtf->tf", np.conj(weights), stfts)


def mvdr_beamform(
    stfts: np.ndarray,
    phi_speech: np.ndarray,
    phi_noise: np.ndarray,
    reference: int = 0,
    window_size: int = 256,
    hop: int = 64,
    sample_rate: float = 1.0,
    denoise_hook=None,
) -> STFTMatrix:
    """MVDR-combine per-object STFTs into one enhanced STFT.

    denoise_hook, if given, maps the (obj, frame, bin) stack to a same-shape
    stack before beamforming (identity when None).
    """
    stfts = np.asarray(stfts, dtype=np.complex128)
    if denoise_hook is not None:
        stfts = np.asarray(denoise_hook(stfts), dtype=np.complex128)
    weights = mvdr_weights(phi_speech, phi_noise, reference)
    out = apply_beamformer(stfts, weights)
    return STFTMatrix(out, window_size, hop, sample_rate)
