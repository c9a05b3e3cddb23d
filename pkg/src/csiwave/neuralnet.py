"""Minimal deterministic neural-network engine for the wavelet CNN.

Everything runs in float64 on channels x length arrays with hand-written
reverse-mode gradients, so analytic gradients can be checked against
central finite differences and training is bitwise reproducible for a
fixed seed. The wavelet model interleaves stride-2 convolution stages with
channel-concatenated (standardized) DWT approximations whose lengths match
the feature maps by construction; the plain baseline is the same engine
without concatenation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import FormatError, InvalidValue, NumericalError, ShapeError
from .wavelet import WaveletPyramid

_STD_EPS = 1e-8


def softmax(z) -> np.ndarray:
    """Stable softmax (max subtraction); output sums to 1."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ShapeError("softmax of empty input")
    e = np.exp(z - z.max())
    return e / e.sum()


def cross_entropy(probs, label: int) -> float:
    """Negative log-likelihood of ``label`` under ``probs``."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size == 0:
        raise ShapeError("cross_entropy of empty distribution")
    if not 0 <= label < probs.size:
        raise InvalidValue(f"label {label} outside [0, {probs.size})")
    with np.errstate(divide="ignore"):  # p=0 -> inf loss, caught by the trainer
        return float(-np.log(probs[label]))


def global_avg_pool(x) -> np.ndarray:
    """Mean over the length axis of a channels x length map."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise ShapeError(f"global_avg_pool needs a non-empty 2-D map, got shape {x.shape}")
    return x.mean(axis=1)


def concat_channels(a, b) -> np.ndarray:
    """Stack two channels x length maps along the channel axis (a first)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeError(
            f"cannot concatenate maps of shapes {a.shape} and {b.shape}: lengths differ"
        )
    return np.concatenate([a, b], axis=0)


def standardize_channels(x, eps: float = _STD_EPS) -> np.ndarray:
    """Zero-mean unit-variance per channel (guarded against zero variance)."""
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps)


class ConvStage:
    """1-D convolution with 3-tap kernels, zero padding 1 and stride 1 or 2.

    Output length is L for stride 1 and L/2 for even L at stride 2, which
    is what keeps feature maps aligned with the wavelet pyramid.
    """

    def __init__(self, in_channels: int, out_channels: int, stride: int, rng: np.random.Generator):
        if stride not in (1, 2):
            raise InvalidValue(f"stride must be 1 or 2, got {stride}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.stride = stride
        bound = 1.0 / np.sqrt(in_channels * 3)
        self.kernel = rng.uniform(-bound, bound, size=(out_channels, in_channels, 3))
        self.bias = rng.uniform(-bound, bound, size=out_channels)
        self.g_kernel = np.zeros_like(self.kernel)
        self.g_bias = np.zeros_like(self.bias)
        self._cols = None
        self._in_length = 0

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[0] != self.in_channels:
            raise ShapeError(
                f"conv stage expects ({self.in_channels}, L) input, got {x.shape}"
            )
        if self.stride == 2 and x.shape[1] % 2 != 0:
            raise ShapeError(f"stride-2 stage needs an even length, got {x.shape[1]}")
        padded = np.pad(x, ((0, 0), (1, 1)))
        windows = sliding_window_view(padded, 3, axis=1)[:, :: self.stride, :]
        # im2col: (in_channels * 3, T_out), tap-minor to match kernel.reshape
        cols = np.ascontiguousarray(windows.transpose(0, 2, 1)).reshape(-1, windows.shape[1])
        self._cols = cols
        self._in_length = x.shape[1]
        return self.kernel.reshape(self.out_channels, -1) @ cols + self.bias[:, None]

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        cols = self._cols
        self.g_kernel += (d_out @ cols.T).reshape(self.kernel.shape)
        self.g_bias += d_out.sum(axis=1)
        d_cols = self.kernel.reshape(self.out_channels, -1).T @ d_out
        d_windows = d_cols.reshape(self.in_channels, 3, -1)
        d_padded = np.zeros((self.in_channels, self._in_length + 2))
        t_out = d_out.shape[1]
        for tap in range(3):
            d_padded[:, tap : tap + self.stride * t_out : self.stride] += d_windows[:, tap, :]
        return d_padded[:, 1:-1]

    def output_length(self, in_length: int) -> int:
        return (in_length + 2 - 3) // self.stride + 1


class Dense:
    """Fully connected layer z = W h + b."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        bound = 1.0 / np.sqrt(in_features)
        self.weight = rng.uniform(-bound, bound, size=(out_features, in_features))
        self.bias = rng.uniform(-bound, bound, size=out_features)
        self.g_weight = np.zeros_like(self.weight)
        self.g_bias = np.zeros_like(self.bias)
        self._input = None

    def forward(self, h: np.ndarray) -> np.ndarray:
        if h.shape != (self.weight.shape[1],):
            raise ShapeError(
                f"dense layer expects ({self.weight.shape[1]},) input, got {h.shape}"
            )
        self._input = h
        return self.weight @ h + self.bias

    def backward(self, d_z: np.ndarray) -> np.ndarray:
        self.g_weight += np.outer(d_z, self._input)
        self.g_bias += d_z
        return self.weight.T @ d_z


def _relu_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = x > 0
    return x * mask, mask


class WcnnModel:
    """Wavelet CNN: conv stages channel-concatenated with pyramid levels.

    For window length L (divisible by 8) the stem keeps length L, each of
    the three stages halves it, and after every stage the matching pyramid
    approximation (standardized, 2 channels) is concatenated, giving the
    channel trace stem -> c1+2 -> c2+2 -> c3+2 -> c3 -> classes.
    """

    kind = "wcnn"

    def __init__(
        self,
        class_count: int,
        window_length: int = 256,
        channels: tuple[int, int, int, int] = (16, 32, 64, 128),
        pyramid_channels: int = 2,
        seed: int = 0,
    ):
        if class_count < 2:
            raise InvalidValue("need at least 2 classes")
        if window_length % 8 != 0 or window_length < 8:
            raise InvalidValue("window_length must be a positive multiple of 8")
        if len(channels) != 4:
            raise InvalidValue("channel schedule must have 4 entries (stem + 3 stages)")
        self.class_count = class_count
        self.window_length = window_length
        self.channels = tuple(int(c) for c in channels)
        self.pyramid_channels = pyramid_channels
        self.seed = seed
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0xC0FFEE)))
        c0, c1, c2, c3 = self.channels
        pc = pyramid_channels
        self.stem = ConvStage(pc, c0, stride=1, rng=rng)
        self.stages = [
            ConvStage(c0, c1, stride=2, rng=rng),
            ConvStage(c1 + pc, c2, stride=2, rng=rng),
            ConvStage(c2 + pc, c3, stride=2, rng=rng),
        ]
        self.post = ConvStage(c3 + pc, c3, stride=1, rng=rng)
        self.head = Dense(c3, class_count, rng=rng)
        self._cache = None

    # -- parameter plumbing ------------------------------------------------

    def parameters(self) -> list[tuple[str, np.ndarray, np.ndarray]]:
        """(name, value, gradient) triples in declaration order."""
        out = [("stem.kernel", self.stem.kernel, self.stem.g_kernel),
               ("stem.bias", self.stem.bias, self.stem.g_bias)]
        for i, stage in enumerate(self.stages, start=1):
            out.append((f"stage{i}.kernel", stage.kernel, stage.g_kernel))
            out.append((f"stage{i}.bias", stage.bias, stage.g_bias))
        out.append(("post.kernel", self.post.kernel, self.post.g_kernel))
        out.append(("post.bias", self.post.bias, self.post.g_bias))
        out.append(("head.weight", self.head.weight, self.head.g_weight))
        out.append(("head.bias", self.head.bias, self.head.g_bias))
        return out

    def zero_grad(self) -> None:
        for _, _, grad in self.parameters():
            grad[...] = 0.0

    # -- forward / backward -------------------------------------------------

    def _check_inputs(self, window: np.ndarray, pyramid: WaveletPyramid) -> None:
        if window.ndim != 2 or window.shape != (self.pyramid_channels, self.window_length):
            raise ShapeError(
                f"window must be {(self.pyramid_channels, self.window_length)}, got {window.shape}"
            )
        if pyramid.levels != len(self.stages):
            raise ShapeError(
                f"pyramid has {pyramid.levels} levels, model expects {len(self.stages)}"
            )
        if pyramid.channels != self.pyramid_channels:
            raise ShapeError(
                f"pyramid has {pyramid.channels} channels, model expects {self.pyramid_channels}"
            )
        for j in range(1, pyramid.levels + 1):
            expected = self.window_length >> j
            if pyramid.level_length(j) != expected:
                raise ShapeError(
                    f"pyramid level {j} length {pyramid.level_length(j)} does not match "
                    f"the stage output length {expected}"
                )

    def forward(self, window, pyramid: WaveletPyramid) -> np.ndarray:
        """Class probabilities for one 2 x L window with its pyramid."""
        window = np.asarray(window, dtype=np.float64)
        self._check_inputs(window, pyramid)
        masks = []
        h, mask = _relu_forward(self.stem.forward(window))
        masks.append(mask)
        concat_widths = []
        for stage, approx in zip(self.stages, pyramid.approx):
            h, mask = _relu_forward(stage.forward(h))
            masks.append(mask)
            concat_widths.append(h.shape[0])
            h = concat_channels(h, standardize_channels(approx))
        h, mask = _relu_forward(self.post.forward(h))
        masks.append(mask)
        pooled = global_avg_pool(h)
        logits = self.head.forward(pooled)
        probs = softmax(logits)
        self._cache = (masks, concat_widths, h.shape, probs)
        return probs

    def loss_grad(self, window, pyramid: WaveletPyramid, label: int) -> float:
        """Cross-entropy loss; accumulates parameter gradients."""
        probs = self.forward(window, pyramid)
        loss = cross_entropy(probs, label)
        masks, concat_widths, post_shape, probs = self._cache
        d_logits = probs.copy()
        d_logits[label] -= 1.0
        d_pooled = self.head.backward(d_logits)
        d_post = np.repeat(d_pooled[:, None], post_shape[1], axis=1) / post_shape[1]
        d_post *= masks[-1]
        d_h = self.post.backward(d_post)
        for stage, width, mask in zip(
            reversed(self.stages), reversed(concat_widths), reversed(masks[1:-1])
        ):
            d_h = d_h[:width]  # pyramid channels are inputs, their gradient is dropped
            d_h = stage.backward(d_h * mask)
        d_h *= masks[0]
        self.stem.backward(d_h)
        return loss


class BaselineCnn:
    """Plain 1-D CNN on a fixed-length flat vector (no wavelet inputs)."""

    kind = "baseline"

    def __init__(
        self,
        class_count: int,
        input_length: int = 384,
        channels: tuple[int, int] = (16, 32),
        seed: int = 0,
    ):
        if class_count < 2:
            raise InvalidValue("need at least 2 classes")
        if input_length % 4 != 0 or input_length < 4:
            raise InvalidValue("input_length must be a positive multiple of 4")
        self.class_count = class_count
        self.input_length = input_length
        self.channels = tuple(int(c) for c in channels)
        self.seed = seed
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0xBA5E)))
        c0, c1 = self.channels
        self.conv1 = ConvStage(1, c0, stride=2, rng=rng)
        self.conv2 = ConvStage(c0, c1, stride=2, rng=rng)
        self.head = Dense(c1, class_count, rng=rng)
        self._cache = None

    def parameters(self) -> list[tuple[str, np.ndarray, np.ndarray]]:
        return [
            ("conv1.kernel", self.conv1.kernel, self.conv1.g_kernel),
            ("conv1.bias", self.conv1.bias, self.conv1.g_bias),
            ("conv2.kernel", self.conv2.kernel, self.conv2.g_kernel),
            ("conv2.bias", self.conv2.bias, self.conv2.g_bias),
            ("head.weight", self.head.weight, self.head.g_weight),
            ("head.bias", self.head.bias, self.head.g_bias),
        ]

    def zero_grad(self) -> None:
        for _, _, grad in self.parameters():
            grad[...] = 0.0

    def forward(self, flat) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.input_length,):
            raise ShapeError(f"input must be ({self.input_length},), got {flat.shape}")
        masks = []
        h, mask = _relu_forward(self.conv1.forward(flat[None, :]))
        masks.append(mask)
        h, mask = _relu_forward(self.conv2.forward(h))
        masks.append(mask)
        pooled = global_avg_pool(h)
        logits = self.head.forward(pooled)
        probs = softmax(logits)
        self._cache = (masks, h.shape, probs)
        return probs

    def loss_grad(self, flat, label: int) -> float:
        probs = self.forward(flat)
        loss = cross_entropy(probs, label)
        masks, h_shape, probs = self._cache
        d_logits = probs.copy()
        d_logits[label] -= 1.0
        d_pooled = self.head.backward(d_logits)
        d_h = np.repeat(d_pooled[:, None], h_shape[1], axis=1) / h_shape[1]
        d_h = self.conv2.backward(d_h * masks[1])
        self.conv1.backward(d_h * masks[0])
        return loss


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 60
    batch_size: int = 16
    seed: int = 0
    optimizer: str = "momentum"
    momentum: float = 0.9

    def __post_init__(self):
        if self.learning_rate < 0:
            raise InvalidValue("learning_rate must be >= 0")
        if self.epochs < 1:
            raise InvalidValue("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidValue("batch_size must be >= 1")
        if self.optimizer not in ("sgd", "momentum"):
            raise InvalidValue(f"optimizer must be 'sgd' or 'momentum', got {self.optimizer!r}")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidValue("momentum must be in [0, 1)")


def train(model, examples: Sequence[tuple], cfg: TrainConfig) -> list[float]:
    """Mini-batch gradient descent over (inputs..., label) tuples.

    Shuffle order, accumulation order and updates are all derived from
    cfg.seed, so training is deterministic. Returns the per-epoch mean
    loss curve.
    """
    if not examples:
        raise InvalidValue("training set must not be empty")
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x7121)))
    params = model.parameters()
    velocity = [np.zeros_like(value) for _, value, _ in params]
    losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(examples))
        epoch_loss = 0.0
        for batch_start in range(0, len(order), cfg.batch_size):
            batch = order[batch_start : batch_start + cfg.batch_size]
            model.zero_grad()
            batch_loss = 0.0
            for idx in batch:
                *inputs, label = examples[idx]
                batch_loss += model.loss_grad(*inputs, label)
            if not np.isfinite(batch_loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, batch starting {batch_start}"
                )
            epoch_loss += batch_loss
            scale = 1.0 / len(batch)
            for (name, value, grad), vel in zip(params, velocity):
                step = grad * scale
                if cfg.optimizer == "momentum":
                    vel *= cfg.momentum
                    vel -= cfg.learning_rate * step
                    value += vel
                else:
                    value -= cfg.learning_rate * step
        losses.append(epoch_loss / len(examples))
    return losses


# -- checkpoint format ------------------------------------------------------

_CKPT_MAGIC = b"WCNN"
_CKPT_VERSION = 1
_KIND_CODES = {"wcnn": 0, "baseline": 1}


def save_model(model, path) -> None:
    """Versioned binary checkpoint: magic, kind, schedule, then f64 params."""
    if model.kind == "wcnn":
        schedule = (model.class_count, model.window_length, model.pyramid_channels,
                    model.seed & 0xFFFFFFFF, *model.channels)
    else:
        schedule = (model.class_count, model.input_length, 1,
                    model.seed & 0xFFFFFFFF, *model.channels)
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(bytes([_CKPT_VERSION, _KIND_CODES[model.kind]]))
        fh.write(struct.pack("<I", len(schedule)))
        fh.write(struct.pack(f"<{len(schedule)}I", *schedule))
        for _, value, _ in model.parameters():
            fh.write(value.astype("<f8").tobytes(order="C"))


def load_model(path):
    """Rebuild a model from a checkpoint written by save_model."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 6 or blob[:4] != _CKPT_MAGIC:
        raise FormatError(f"{path}: bad checkpoint magic")
    if blob[4] != _CKPT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {blob[4]}")
    kind_code = blob[5]
    kinds = {v: k for k, v in _KIND_CODES.items()}
    if kind_code not in kinds:
        raise FormatError(f"{path}: unknown model kind {kind_code}")
    (n_sched,) = struct.unpack_from("<I", blob, 6)
    sched = struct.unpack_from(f"<{n_sched}I", blob, 10)
    offset = 10 + 4 * n_sched
    if kinds[kind_code] == "wcnn":
        class_count, window_length, pyr_channels, seed, *channels = sched
        model = WcnnModel(class_count, window_length, tuple(channels), pyr_channels, seed)
    else:
        class_count, input_length, _, seed, *channels = sched
        model = BaselineCnn(class_count, input_length, tuple(channels), seed)
    for name, value, _ in model.parameters():
        nbytes = value.size * 8
        if offset + nbytes > len(blob):
            raise FormatError(
                f"{path}: truncated checkpoint, {name} needs {nbytes} bytes, "
                f"{len(blob) - offset} remain"
            )
        value[...] = np.frombuffer(blob[offset : offset + nbytes], dtype="<f8").reshape(value.shape)
        offset += nbytes
    if offset != len(blob):
        raise FormatError(f"{path}: {len(blob) - offset} unexpected trailing bytes")
    return model
