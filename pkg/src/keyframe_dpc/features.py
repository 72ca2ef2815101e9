"""Per-frame feature extraction and feature-file I/O.

A video is handled as a :class:`FrameSequence` of 8-bit rasters. Each frame is
mapped to one feature vector by a pluggable extractor, giving a
:class:`FeatureMatrix` whose row order equals frame order. Features computed
elsewhere (CNN activations, optical-flow descriptors) enter through
:func:`import_features`.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, MalformedInputError

BINARY_MAGIC = b"FMTX"
_HEADER = struct.Struct("<4sII")

FRAME_SUFFIXES = (".ppm", ".png")

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class FrameSequence:
    """Ordered frames of one video, each an (height, width, channels) uint8 array."""

    frames: tuple
    source_id: str = ""

    def __post_init__(self):
        frames = tuple(_as_frame(f) for f in self.frames)
        if not frames:
            raise MalformedInputError("frame sequence is empty")
        shape = frames[0].shape
        for i, f in enumerate(frames):
            if f.shape != shape:
                raise DimensionMismatchError(
                    f"frame {i} has shape {f.shape}, expected {shape}"
                )
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return len(self.frames)

    @property
    def shape(self):
        return self.frames[0].shape


def _as_frame(frame) -> np.ndarray:
    arr = np.asarray(frame)
    if arr.dtype != np.uint8:
        raise MalformedInputError(f"frames must be 8-bit, got dtype {arr.dtype}")
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise MalformedInputError(f"frame must be 2-D or 3-D, got {arr.ndim}-D")
    h, w, c = arr.shape
    if h == 0 or w == 0:
        raise MalformedInputError("zero-area frame")
    if c not in (1, 3, 4):
        raise MalformedInputError(f"unsupported channel count {c}")
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """N finite feature vectors of dimension D, one per frame."""

    rows: np.ndarray
    extractor_tag: str = "external"

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise MalformedInputError(
                f"feature matrix must be N x D with N, D >= 1, got shape {rows.shape}"
            )
        if not np.all(np.isfinite(rows)):
            raise MalformedInputError("feature matrix contains non-finite values")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def take(self, indices: Sequence[int]) -> "FeatureMatrix":
        return FeatureMatrix(self.rows[list(indices)], self.extractor_tag)


# ---------------------------------------------------------------------------
# extractors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColorHistogram:
    """Per-channel histogram with ``bins`` uniform bins over [0, 256).

    Each channel's bins are normalized to sum to one. Grayscale frames are
    treated as three equal channels and an alpha channel is ignored.
    """

    bins: int = 8

    def __post_init__(self):
        if not 1 <= self.bins <= 256:
            raise ValueError(f"bins must be in [1, 256], got {self.bins}")

    @property
    def tag(self):
        return f"color-histogram:{self.bins}"

    def __call__(self, frame: np.ndarray) -> np.ndarray:
        rgb = _rgb(frame)
        n_pix = rgb.shape[0] * rgb.shape[1]
        out = np.empty(3 * self.bins)
        for ch in range(3):
            # exact integer binning, the top value 255 lands in the last bin
            idx = (rgb[:, :, ch].astype(np.int64).ravel() * self.bins) // 256
            counts = np.bincount(idx, minlength=self.bins)
            out[ch * self.bins:(ch + 1) * self.bins] = counts / n_pix
        return out


@dataclass(frozen=True)
class DownsampledLuminance:
    """Mean luminance over a ``width`` x ``height`` grid of blocks.

    Block edges are ``floor(k * size / cells)`` so frames need not divide
    evenly; each frame dimension must be at least the grid dimension.
    Output is row-major over the grid.
    """

    width: int = 8
    height: int = 8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")

    @property
    def tag(self):
        return f"downsampled-luminance:{self.width}x{self.height}"

    def __call__(self, frame: np.ndarray) -> np.ndarray:
        lum = luminance(frame)
        fh, fw = lum.shape
        if fh < self.height or fw < self.width:
            raise MalformedInputError(
                f"frame {fw}x{fh} is smaller than the {self.width}x{self.height} grid"
            )
        ys = [(k * fh) // self.height for k in range(self.height + 1)]
        xs = [(k * fw) // self.width for k in range(self.width + 1)]
        out = np.empty(self.width * self.height)
        for r in range(self.height):
            for c in range(self.width):
                out[r * self.width + c] = lum[ys[r]:ys[r + 1], xs[c]:xs[c + 1]].mean()
        return out


@dataclass(frozen=True)
class IdentityLuminance:
    """The full-resolution luminance image, flattened row-major."""

    @property
    def tag(self):
        return "identity-luminance"

    def __call__(self, frame: np.ndarray) -> np.ndarray:
        return luminance(frame).ravel()


def _rgb(frame: np.ndarray) -> np.ndarray:
    if frame.shape[2] == 1:
        return np.repeat(frame, 3, axis=2)
    return frame[:, :, :3]


def luminance(frame: np.ndarray) -> np.ndarray:
    """Float64 luminance of a frame; grayscale frames pass through unchanged."""
    frame = _as_frame(frame)
    if frame.shape[2] == 1:
        return frame[:, :, 0].astype(np.float64)
    rgb = frame[:, :, :3].astype(np.float64)
    return rgb[:, :, 0] * _LUMA[0] + rgb[:, :, 1] * _LUMA[1] + rgb[:, :, 2] * _LUMA[2]


def make_extractor(spec: str):
    """Build an extractor from a selector string.

    Accepted forms: ``color-histogram[:B]``, ``downsampled-luminance[:WxH]``
    and ``identity-luminance``.
    """
    name, _, arg = spec.partition(":")
    try:
        if name == "color-histogram":
            return ColorHistogram(int(arg)) if arg else ColorHistogram()
        if name == "downsampled-luminance":
            if not arg:
                return DownsampledLuminance()
            w, _, h = arg.lower().partition("x")
            return DownsampledLuminance(int(w), int(h or w))
    except ValueError as exc:
        raise ValueError(f"bad extractor argument in {spec!r}: {exc}") from None
    if name == "identity-luminance" and not arg:
        return IdentityLuminance()
    raise ValueError(f"unknown extractor {spec!r}")


def extract_features(seq: FrameSequence, extractor="color-histogram") -> FeatureMatrix:
    """Apply ``extractor`` to every frame of ``seq`` in order."""
    if isinstance(extractor, str):
        extractor = make_extractor(extractor)
    rows = np.stack([extractor(f) for f in seq.frames])
    return FeatureMatrix(rows, extractor.tag)


# ---------------------------------------------------------------------------
# frame directories
# ---------------------------------------------------------------------------


def load_frames_dir(path) -> FrameSequence:
    """Read every PPM/PNG file in ``path`` in lexicographic filename order."""
    from PIL import Image

    path = Path(path)
    if not path.is_dir():
        raise MalformedInputError(f"{path} is not a directory")
    files = sorted(p for p in path.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)
    if not files:
        raise MalformedInputError(f"no .ppm or .png frames in {path}")
    frames = []
    for p in files:
        try:
            with Image.open(p) as im:
                if im.mode not in ("L", "RGB", "RGBA"):
                    im = im.convert("RGB")
                frames.append(np.asarray(im, dtype=np.uint8))
        except OSError as exc:
            raise MalformedInputError(f"cannot read frame {p}: {exc}") from None
    return FrameSequence(tuple(frames), source_id=str(path))


# ---------------------------------------------------------------------------
# feature files
# ---------------------------------------------------------------------------


def export_features(features: FeatureMatrix, path, format: str = "csv") -> None:
    """Write ``features`` as headerless CSV or as an FMTX binary file.

    CSV uses shortest round-trip float formatting. The binary format stores
    float32, so values not representable in float32 are rounded.
    """
    path = Path(path)
    if format == "csv":
        lines = [",".join(repr(float(v)) for v in row) for row in features.rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif format == "binary":
        data = features.rows.astype("<f4")
        if not np.all(np.isfinite(data)):
            raise MalformedInputError("values overflow float32")
        path.write_bytes(_HEADER.pack(BINARY_MAGIC, *data.shape) + data.tobytes())
    else:
        raise ValueError(f"unknown feature format {format!r}")


def import_features(path, format: str | None = None) -> FeatureMatrix:
    """Read a feature file written by :func:`export_features` or any tool
    following the same layout.

    ``format`` defaults to ``binary`` for files starting with the FMTX magic
    and ``csv`` otherwise.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc}") from None
    if format is None:
        format = "binary" if raw[:4] == BINARY_MAGIC else "csv"
    if format == "binary":
        return _parse_binary(raw)
    if format == "csv":
        return _parse_csv(raw)
    raise ValueError(f"unknown feature format {format!r}")


def _parse_binary(raw: bytes) -> FeatureMatrix:
    if len(raw) < _HEADER.size:
        raise MalformedInputError("truncated binary feature file header")
    magic, n, d = _HEADER.unpack_from(raw)
    if magic != BINARY_MAGIC:
        raise MalformedInputError(f"bad magic {magic!r}, expected {BINARY_MAGIC!r}")
    expected = _HEADER.size + 4 * n * d
    if len(raw) != expected:
        kind = "truncated" if len(raw) < expected else "oversized"
        raise MalformedInputError(
            f"{kind} binary feature file: {len(raw)} bytes, header implies {expected}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    return FeatureMatrix(data.astype(np.float64), "external")


def _parse_csv(raw: bytes) -> FeatureMatrix:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedInputError("feature CSV is not UTF-8") from None
    rows = []
    for lineno, line in enumerate(io.StringIO(text), 1):
        line = line.strip()
        if not line:
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise MalformedInputError(f"line {lineno}: non-numeric value") from None
        if rows and len(row) != len(rows[0]):
            raise MalformedInputError(
                f"line {lineno}: {len(row)} columns, expected {len(rows[0])}"
            )
        rows.append(row)
    if not rows:
        raise MalformedInputError("feature CSV has no rows")
    return FeatureMatrix(np.array(rows), "external")
