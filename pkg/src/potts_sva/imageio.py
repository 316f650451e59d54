"""Image ingestion and result serialisation.

Inputs: PGM (P2/P5) and PNG, 8 or 16 bit. Colour inputs are reduced to luma with
the ITU-R BT.601 weights (0.299 R + 0.587 G + 0.114 B). Intensities are min-max
normalised to [0, 1].

Outputs of a run (see :func:`save_result`):

``labels.png``
    indexed PNG, palette index ``k - 1`` for class ``k``; palette entry ``i`` is the
    grey level ``round(255 * i / (K - 1))`` so K = 2 gives black/white.
``x.png``
    16-bit greyscale PNG of the denoised field, min-max stretched; the exact float64
    field is embedded in a zTXt chunk and recovered by :func:`load_field`.
``trace.tsv``
    versioned line-oriented text document, described in :func:`write_trace`.
"""
from __future__ import annotations

import base64
import os
import warnings
import zlib
from dataclasses import fields
from pathlib import Path

import numpy as np
from PIL import Image, PngImagePlugin, UnidentifiedImageError

from .sva import SegmentationResult, TraceRecord

TRACE_MAGIC = "potts-sva-trace"
TRACE_VERSION = 1
FIELD_KEY = "potts_sva:float64"
TRACE_COLUMNS = [f.name for f in fields(TraceRecord)]

LABELS_FILE = "labels.png"
FIELD_FILE = "x.png"
TRACE_FILE = "trace.tsv"


class ImageIOError(OSError):
    pass


class ConstantImageWarning(UserWarning):
    pass


def _open(path) -> Image.Image:
    path = Path(path)
    try:
        im = Image.open(path)
        im.load()
    except FileNotFoundError as exc:
        raise ImageIOError(f"{path}: file not found") from exc
    except UnidentifiedImageError as exc:
        raise ImageIOError(f"{path}: unrecognised image format") from exc
    except OSError as exc:
        raise ImageIOError(f"{path}: unreadable image ({exc})") from exc
    if im.format not in ("PNG", "PPM"):
        raise ImageIOError(f"{path}: unsupported format {im.format}; expected PNG or PGM")
    return im


def read_raw(path) -> np.ndarray:
    """Greyscale intensities as float64 without normalisation."""
    im = _open(path)
    if im.mode in ("I;16", "I;16B", "I;16L", "I", "F", "L"):
        return np.asarray(im, dtype=np.float64)
    if im.mode in ("1", "P", "PA", "LA", "RGB", "RGBA"):
        if im.mode in ("P", "PA"):
            im = im.convert("RGB")
        return np.asarray(im.convert("L"), dtype=np.float64)
    raise ImageIOError(f"{path}: unsupported pixel mode {im.mode}")


def normalize(a: np.ndarray) -> tuple[np.ndarray, bool]:
    """Min-max normalise to [0, 1]; a constant array maps to zeros (flag True)."""
    lo, hi = float(a.min()), float(a.max())
    if hi == lo:
        return np.zeros_like(a, dtype=np.float64), True
    return (a - lo) / (hi - lo), False


def load_image(path) -> np.ndarray:
    """Load a greyscale image normalised to [0, 1].

    Emits :class:`ConstantImageWarning` for constant images (returned as zeros).
    """
    data, constant = normalize(read_raw(path))
    if constant:
        warnings.warn(f"{path}: constant image, normalised to zeros", ConstantImageWarning, stacklevel=2)
    return data


def label_palette(K: int) -> list[int]:
    if not 2 <= K <= 256:
        raise ValueError(f"label maps support 2..256 classes, got {K}")
    pal = []
    for i in range(K):
        g = int(round(255 * i / (K - 1)))
        pal += [g, g, g]
    return pal


def save_labels(z, K: int, path) -> Path:
    z = np.asarray(z)
    if z.min() < 1 or z.max() > K:
        raise ValueError(f"labels outside 1..{K}")
    im = Image.fromarray((z - 1).astype(np.uint8), mode="P")
    im.putpalette(label_palette(K))
    path = Path(path)
    _save(im, path)
    return path


def load_labels(path) -> np.ndarray:
    """Read a label map written by :func:`save_labels` (palette index + 1)."""
    im = _open(path)
    if im.mode not in ("P", "L", "I;16", "I"):
        raise ImageIOError(f"{path}: label maps must be indexed or single-channel, got {im.mode}")
    return np.asarray(im).astype(np.int64) + 1


def save_field(x, path) -> Path:
    """16-bit greyscale PNG of ``x`` (min-max stretched) carrying the exact values."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    scaled, _ = normalize(x)
    im = Image.fromarray(np.round(scaled * 65535).astype(np.uint16))
    info = PngImagePlugin.PngInfo()
    payload = f"{x.shape[0]}x{x.shape[1]}:" + base64.b64encode(x.astype("<f8").tobytes()).decode("ascii")
    info.add_text(FIELD_KEY, payload, zip=True)
    path = Path(path)
    _save(im, path, pnginfo=info)
    return path


def load_field(path) -> np.ndarray:
    """Exact float64 field from :func:`save_field`; falls back to normalised pixels."""
    im = _open(path)
    payload = getattr(im, "text", {}).get(FIELD_KEY)
    if payload is None:
        return load_image(path)
    shape, data = payload.split(":", 1)
    h, w = (int(v) for v in shape.split("x"))
    return np.frombuffer(base64.b64decode(data), dtype="<f8").reshape(h, w).copy()


def save_gray16(a, path) -> Path:
    """Plain 16-bit greyscale PNG, min-max stretched (used for synthetic inputs)."""
    scaled, _ = normalize(np.asarray(a, dtype=np.float64))
    path = Path(path)
    _save(Image.fromarray(np.round(scaled * 65535).astype(np.uint16)), path)
    return path


def _save(im: Image.Image, path: Path, **kw):
    try:
        im.save(path, format="PNG", **kw)
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot write ({exc})") from exc


# ---------------------------------------------------------------------------
# trace document
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_trace(result: SegmentationResult, path, mode: str = "segment", config: dict | None = None) -> Path:
    """Write the run summary and per-iteration records.

    Layout (tab separated)::

        potts-sva-trace  1
        <key>  <value...>          # mode, width, height, N, K, scale, converged, ...
        config.<name>  <value>     # one line per configuration entry
        records  <count>
        kind  outer  inner  lam  tv_prev  tv  objective_prev  objective  labels_changed  prox_sweeps
        <one line per record, same column order>

    There is one record per inner MM step plus one per outer step. Floats are written
    with ``repr`` so they round-trip exactly.
    """
    h, w = result.z.shape
    lines = [
        f"{TRACE_MAGIC}\t{TRACE_VERSION}",
        f"mode\t{mode}",
        f"width\t{w}",
        f"height\t{h}",
        f"N\t{w * h}",
        f"K\t{result.num_classes}",
        f"scale\t{_fmt(result.scale)}",
        f"converged\t{_fmt(result.converged)}",
        f"outer_iterations\t{result.outer_iterations}",
        f"lambda_final\t{_fmt(result.lambda_final)}",
        "mu\t" + "\t".join(_fmt(m) for m in result.mu),
    ]
    if result.lambda_used is not None:
        lines.append(f"lambda_used\t{_fmt(result.lambda_used)}")
    for key, value in (config or {}).items():
        lines.append(f"config.{key}\t{_fmt(value)}")
    lines.append(f"records\t{len(result.trace)}")
    lines.append("\t".join(TRACE_COLUMNS))
    for rec in result.trace:
        lines.append("\t".join(_fmt(getattr(rec, c)) for c in TRACE_COLUMNS))
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot write ({exc})") from exc
    return path


def read_trace(path) -> tuple[dict, list[TraceRecord]]:
    """Parse a trace document back into ``(header, records)``."""
    text = Path(path).read_text().splitlines()
    magic, version = text[0].split("\t")
    if magic != TRACE_MAGIC or int(version) != TRACE_VERSION:
        raise ValueError(f"{path}: not a version {TRACE_VERSION} trace document")
    header: dict = {}
    i = 1
    while not text[i].startswith("records\t"):
        key, *vals = text[i].split("\t")
        header[key] = vals if key == "mu" else vals[0]
        i += 1
    n_records = int(text[i].split("\t")[1])
    columns = text[i + 1].split("\t")
    types = {f.name: f.type for f in fields(TraceRecord)}
    records = []
    for line in text[i + 2:i + 2 + n_records]:
        raw = dict(zip(columns, line.split("\t")))
        kw = {}
        for c, v in raw.items():
            t = types[c]
            kw[c] = v if t == "str" else int(v) if t == "int" else float(v)
        records.append(TraceRecord(**kw))
    if len(records) != n_records:
        raise ValueError(f"{path}: expected {n_records} records, found {len(records)}")
    return header, records


def save_result(result: SegmentationResult, out_dir, mode: str = "segment", config: dict | None = None) -> dict:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ImageIOError(f"{out_dir}: cannot create output directory ({exc})") from exc
    if not os.access(out_dir, os.W_OK):
        raise ImageIOError(f"{out_dir}: directory is not writable")
    return {
        "labels": save_labels(result.z, result.num_classes, out_dir / LABELS_FILE),
        "x": save_field(result.x, out_dir / FIELD_FILE),
        "trace": write_trace(result, out_dir / TRACE_FILE, mode, config),
    }
