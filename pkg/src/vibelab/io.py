"""Artifact I/O: flat binary arrays, CSV matrices, PCM audio, PNG heatmaps.

Flat binary layout (all little-endian):
    magic   4 bytes  b"VLB1"
    kind    uint32   0 = real float64, 1 = complex (interleaved re, im)
    ndim    uint32
    dims    uint32 * ndim
    payload float64 * prod(dims) [* 2 when complex]
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ParameterError

MAGIC = b"VLB1"


def write_flat_binary(path, array) -> None:
    array = np.asarray(array)
    is_complex = np.iscomplexobj(array)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", 1 if is_complex else 0, array.ndim))
        fh.write(struct.pack(f"<{array.ndim}I", *array.shape))
        if is_complex:
            data = np.empty(array.shape + (2,), dtype="<f8")
            data[..., 0] = array.real
            data[..., 1] = array.imag
        else:
            data = array.astype("<f8")
        fh.write(data.tobytes())


def read_flat_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ParameterError(f"{path}: not a vibelab flat binary")
        kind, ndim = struct.unpack("<II", fh.read(8))
        dims = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
        count = int(np.prod(dims)) * (2 if kind == 1 else 1)
        data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    if kind == 1:
        data = data.reshape(dims + (2,))
        return (data[..., 0] + 1j * data[..., 1]).reshape(dims)
    return data.reshape(dims)


def _format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    return str(v)


def write_csv_rows(path, header: list[str], rows) -> None:
    """CSV with deterministic float formatting (repr round-trips exactly)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(v) for v in row])


def write_csv_matrix(path, matrix, header: list[str] | None = None) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ParameterError("CSV export expects a 2-D matrix")
    rows = (list(row) for row in matrix)
    write_csv_rows(path, header or [f"c{i}" for i in range(matrix.shape[1])], rows)


def write_pcm16(path, signal, sample_rate: float) -> None:
    """Mono 16-bit little-endian PCM, peak-normalized; sidecar .txt holds the rate."""
    x = np.asarray(signal, dtype=np.float64)
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    scaled = x / peak * 0.95 if peak > 0 else x
    pcm = np.round(scaled * 32767.0).astype("<i2")
    path = Path(path)
    pcm.tofile(path)
    sidecar = path.with_suffix(path.suffix + ".txt")
    sidecar.write_text(
        f"format: mono PCM s16le\nsample_rate_hz: {sample_rate!r}\n"
        f"samples: {x.size}\n"
    )


def write_heatmap_png(path, matrix, title: str = "", extent=None,
                      xlabel: str = "", ylabel: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4), dpi=110)
    data = np.asarray(matrix, dtype=np.float64)
    shown = 10.0 * np.log10(data + 1e-12) if np.all(data >= 0) else data
    im = ax.imshow(shown.T, aspect="auto", origin="lower", extent=extent,
                   cmap="inferno")
    fig.colorbar(im, ax=ax, label="dB")
    if title:
        ax.set_title(title)
    ax.set_xlabel(xlabel or "frame")
    ax.set_ylabel(ylabel or "bin")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def write_stage_panel_png(path, spectrograms: dict[str, np.ndarray]) -> None:
    """One row of magnitude panels, e.g. the amplification stages of a target."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = len(spectrograms)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.2), dpi=110)
    if n == 1:
        axes = [axes]
    for ax, (name, mat) in zip(axes, spectrograms.items()):
        mat = np.asarray(mat, dtype=np.float64)
        ax.imshow(10.0 * np.log10(np.abs(mat) ** 2 + 1e-12).T, aspect="auto",
                  origin="lower", cmap="inferno")
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("frame")
    axes[0].set_ylabel("bin")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
