"""Forward-only stacked LSTM classifier over key-frame features.

Each key frame's top-layer hidden state is projected to class logits and
passed through a softmax; the video prediction is the mean of those per-frame
distributions. There is no training code. Parameters come from a binary file
(:func:`load_params`) or from :func:`random_params` / :func:`zero_params`.

Block input mode
----------------
``"sigmoid"`` squashes the block input ``g_t`` with the logistic function,
while ``"tanh"`` uses the hyperbolic tangent found in most LSTM
implementations. The gates and the output squashing are identical in both.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, KeyframeError, MalformedInputError
from .features import FeatureMatrix

PARAMS_MAGIC = b"LSTM"
_HEADER = struct.Struct("<4s5I")
BLOCK_INPUT_MODES = ("sigmoid", "tanh")

# order of the per-layer arrays in the params file
_LAYER_FIELDS = ("W_xc", "W_hc", "b_c", "W_xi", "W_hi", "b_i",
                 "W_xf", "W_hf", "b_f", "W_xo", "W_ho", "b_o")


@dataclass(frozen=True)
class LayerWeights:
    W_xc: np.ndarray
    W_hc: np.ndarray
    b_c: np.ndarray
    W_xi: np.ndarray
    W_hi: np.ndarray
    b_i: np.ndarray
    W_xf: np.ndarray
    W_hf: np.ndarray
    b_f: np.ndarray
    W_xo: np.ndarray
    W_ho: np.ndarray
    b_o: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.W_xc.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_xc.shape[0]


def _layer_shapes(d_in: int, h: int) -> dict:
    return {"W_xc": (h, d_in), "W_hc": (h, h), "b_c": (h,),
            "W_xi": (h, d_in), "W_hi": (h, h), "b_i": (h,),
            "W_xf": (h, d_in), "W_hf": (h, h), "b_f": (h,),
            "W_xo": (h, d_in), "W_ho": (h, h), "b_o": (h,)}


@dataclass(frozen=True)
class LstmParams:
    layers: tuple[LayerWeights, ...]
    W_out: np.ndarray
    b_out: np.ndarray
    block_input: str = "sigmoid"

    def __post_init__(self):
        if self.block_input not in BLOCK_INPUT_MODES:
            raise ValueError(f"block_input must be one of {BLOCK_INPUT_MODES}")
        if not self.layers:
            raise DimensionMismatchError("at least one LSTM layer is required")
        h = self.hidden_dim
        d_in = self.input_dim
        for n, layer in enumerate(self.layers):
            for name, shape in _layer_shapes(d_in, h).items():
                arr = getattr(layer, name)
                if arr.shape != shape:
                    raise DimensionMismatchError(
                        f"layer {n} {name} has shape {arr.shape}, expected {shape}")
                if not np.all(np.isfinite(arr)):
                    raise MalformedInputError(f"layer {n} {name} has non-finite values")
            d_in = h
        if self.W_out.shape != (self.class_count, h) or self.b_out.shape != (self.class_count,):
            raise DimensionMismatchError("classifier weights do not match hidden size")
        if not (np.all(np.isfinite(self.W_out)) and np.all(np.isfinite(self.b_out))):
            raise MalformedInputError("classifier weights have non-finite values")

    @property
    def input_dim(self) -> int:
        return self.layers[0].input_dim

    @property
    def hidden_dim(self) -> int:
        return self.layers[0].hidden_dim

    @property
    def class_count(self) -> int:
        return self.b_out.shape[0]

    @property
    def num_layers(self) -> int:
        return len(self.layers)


def _build(d: int, h: int, c: int, num_layers: int, block_input: str, draw) -> LstmParams:
    layers = []
    d_in = d
    for _ in range(num_layers):
        layers.append(LayerWeights(**{k: draw(s) for k, s in _layer_shapes(d_in, h).items()}))
        d_in = h
    return LstmParams(tuple(layers), draw((c, h)), draw((c,)), block_input)


def zero_params(d: int, h: int, c: int, num_layers: int = 3,
                block_input: str = "sigmoid") -> LstmParams:
    return _build(d, h, c, num_layers, block_input, np.zeros)


def random_params(d: int, h: int, c: int, num_layers: int = 3,
                  block_input: str = "sigmoid", seed: int = 0) -> LstmParams:
    """Parameters drawn uniformly from (-0.1, 0.1) with a seeded generator."""
    rng = np.random.default_rng(seed)
    return _build(d, h, c, num_layers, block_input, lambda s: rng.uniform(-0.1, 0.1, s))


def sigmoid(x):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def lstm_step(x_t, h_prev, c_prev, params, layer: int = 0, block_input: str | None = None):
    """One LSTM time step, returning ``(h_t, c_t)``.

    ``params`` is an :class:`LstmParams` (``layer`` selects the layer) or a
    bare :class:`LayerWeights`, in which case ``block_input`` defaults to
    ``"sigmoid"``.
    """
    if isinstance(params, LstmParams):
        weights = params.layers[layer]
        block_input = block_input or params.block_input
    else:
        weights = params
        block_input = block_input or "sigmoid"
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    if x_t.shape != (weights.input_dim,):
        raise DimensionMismatchError(f"x_t has shape {x_t.shape}, expected ({weights.input_dim},)")
    if h_prev.shape != (weights.hidden_dim,) or c_prev.shape != (weights.hidden_dim,):
        raise DimensionMismatchError("state size does not match hidden size")
    if not (np.all(np.isfinite(x_t)) and np.all(np.isfinite(h_prev)) and np.all(np.isfinite(c_prev))):
        raise KeyframeError("non-finite LSTM input")

    w = weights
    pre_g = w.W_xc @ x_t + w.W_hc @ h_prev + w.b_c
    g = sigmoid(pre_g) if block_input == "sigmoid" else np.tanh(pre_g)
    i = sigmoid(w.W_xi @ x_t + w.W_hi @ h_prev + w.b_i)
    f = sigmoid(w.W_xf @ x_t + w.W_hf @ h_prev + w.b_f)
    c = i * g + f * c_prev
    o = sigmoid(w.W_xo @ x_t + w.W_ho @ h_prev + w.b_o)
    h = o * np.tanh(c)
    return h, c


def run_sequence(features, params: LstmParams, zero_state: bool = False) -> np.ndarray:
    """Top-layer hidden state for every row of ``features``, shape (T, H).

    All layers start from zero state. Layer ``l`` consumes layer ``l-1``'s
    hidden state at the same step. With ``zero_state`` every row is evaluated
    independently from zero state.
    """
    rows = features.rows if isinstance(features, FeatureMatrix) else np.asarray(features, float)
    if rows.ndim != 2 or rows.shape[1] != params.input_dim:
        raise DimensionMismatchError(
            f"features of shape {rows.shape} do not match input_dim {params.input_dim}")
    hdim = params.hidden_dim
    hs = [np.zeros(hdim) for _ in params.layers]
    cs = [np.zeros(hdim) for _ in params.layers]
    out = np.empty((rows.shape[0], hdim))
    for t, x in enumerate(rows):
        if zero_state:
            hs = [np.zeros(hdim) for _ in params.layers]
            cs = [np.zeros(hdim) for _ in params.layers]
        inp = x
        for n in range(params.num_layers):
            hs[n], cs[n] = lstm_step(inp, hs[n], cs[n], params, layer=n)
            inp = hs[n]
        out[t] = inp
    return out


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def predict_frame(h_t, params: LstmParams) -> np.ndarray:
    h_t = np.asarray(h_t, dtype=np.float64)
    if h_t.shape != (params.hidden_dim,):
        raise DimensionMismatchError(f"h_t has shape {h_t.shape}, expected ({params.hidden_dim},)")
    return softmax(params.W_out @ h_t + params.b_out)


@dataclass(frozen=True)
class PredictionMatrix:
    """Per-key-frame class distributions and their mean."""

    rows: np.ndarray
    video_prediction: np.ndarray
    indices: tuple[int, ...] = ()

    @property
    def label(self) -> int:
        # np.argmax returns the first maximum, i.e. the lowest class index on ties
        return int(np.argmax(self.video_prediction))

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "rows": [[float(v) for v in r] for r in self.rows],
            "video_prediction": [float(v) for v in self.video_prediction],
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "PredictionMatrix":
        try:
            rows = np.array(data["rows"], dtype=np.float64)
            video = np.array(data["video_prediction"], dtype=np.float64)
            indices = tuple(int(i) for i in data.get("indices", ()))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"invalid prediction JSON: {exc}") from None
        if video.ndim != 1 or video.size == 0 or not np.all(np.isfinite(video)):
            raise MalformedInputError("video_prediction must be a non-empty finite vector")
        return cls(rows, video, indices)


def classify_video(keyframes, features: FeatureMatrix, params: LstmParams,
                   zero_state: bool = False) -> PredictionMatrix:
    """Score the key frames of one video.

    ``keyframes`` is a :class:`~keyframe_dpc.tsdpc.KeyFrameSet` or a sequence
    of row indices into ``features``, visited in the given order.
    """
    indices = tuple(int(i) for i in getattr(keyframes, "indices", keyframes))
    if not indices:
        raise KeyframeError("empty key frame set")
    if any(not 0 <= i < features.n for i in indices):
        raise DimensionMismatchError("key frame index outside the feature matrix")
    hidden = run_sequence(features.rows[list(indices)], params, zero_state=zero_state)
    rows = np.stack([predict_frame(h, params) for h in hidden])
    return PredictionMatrix(rows, rows.mean(axis=0), indices)


# ---------------------------------------------------------------------------
# params file
# ---------------------------------------------------------------------------


def save_params(params: LstmParams, path) -> None:
    header = _HEADER.pack(PARAMS_MAGIC, params.num_layers, params.input_dim,
                          params.hidden_dim, params.class_count,
                          BLOCK_INPUT_MODES.index(params.block_input))
    chunks = [header]
    for layer in params.layers:
        chunks.extend(getattr(layer, name).astype("<f4").tobytes() for name in _LAYER_FIELDS)
    chunks.append(params.W_out.astype("<f4").tobytes())
    chunks.append(params.b_out.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_params(path) -> LstmParams:
    """Read a params file; every malformation raises :class:`MalformedInputError`."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc}") from None
    if len(raw) < _HEADER.size:
        raise MalformedInputError("truncated params header")
    magic, num_layers, d, h, c, mode = _HEADER.unpack_from(raw)
    if magic != PARAMS_MAGIC:
        raise MalformedInputError(f"bad magic {magic!r}, expected {PARAMS_MAGIC!r}")
    if mode >= len(BLOCK_INPUT_MODES):
        raise MalformedInputError(f"unknown block input mode {mode}")
    if min(num_layers, d, h, c) < 1:
        raise MalformedInputError("params header has a zero dimension")

    sizes = []
    d_in = d
    for _ in range(num_layers):
        sizes.extend(_layer_shapes(d_in, h).values())
        d_in = h
    sizes += [(c, h), (c,)]
    expected = _HEADER.size + 4 * sum(int(np.prod(s)) for s in sizes)
    if len(raw) != expected:
        raise MalformedInputError(f"params file is {len(raw)} bytes, header implies {expected}")

    pos = _HEADER.size
    arrays = []
    for shape in sizes:
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=pos).reshape(shape)
        arrays.append(arr.astype(np.float64))
        pos += 4 * count
    layers = tuple(
        LayerWeights(*arrays[n * 12:(n + 1) * 12]) for n in range(num_layers)
    )
    try:
        return LstmParams(layers, arrays[-2], arrays[-1], BLOCK_INPUT_MODES[mode])
    except (DimensionMismatchError, MalformedInputError) as exc:
        raise MalformedInputError(str(exc)) from None
