"""Frozen LeNet-style convolutional feature extractor (forward pass only).

A structure string such as ``in_6c_2p_12c_2p`` describes the stack: ``<k>c``
is a 5x5 valid convolution with ``k`` output maps followed by tanh, ``2p`` is
a 2x2 stride-2 pooling unit ``tanh(beta * window_sum + bias)``. Inputs are
single-channel 32x32 images with values in [0, 1].
"""

import json
import re
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError, LoadError, ParseError

FORMAT_VERSION = 1
KERNEL = 5
POOL = 2
INPUT_SHAPE = (1, 32, 32)
DEFAULT_POOL_BETA = 0.25

_CONV_TOKEN = re.compile(r"([1-9][0-9]*)c")


@dataclass(frozen=True)
class NetworkSpec:
    structure: str
    layers: tuple  # ("conv", out_channels) | ("pool", 2)
    input_shape: tuple = INPUT_SHAPE

    def shapes(self):
        """(C, H, W) after each layer, starting with the input."""
        c, h, w = self.input_shape
        out = [(c, h, w)]
        for kind, k in self.layers:
            if kind == "conv":
                c, h, w = k, h - KERNEL + 1, w - KERNEL + 1
            else:
                h, w = h // POOL, w // POOL
            out.append((c, h, w))
        return out

    @property
    def conv_channels(self):
        return [k for kind, k in self.layers if kind == "conv"]

    @property
    def feature_dim(self):
        c, h, w = self.shapes()[-1]
        return c * h * w


def parse_structure(s, input_shape=INPUT_SHAPE):
    tokens = s.strip().split("_")
    if not tokens or tokens[0] != "in":
        raise ParseError(f"structure must start with 'in', got {tokens[0]!r}")
    body = tokens[1:]
    if not body or len(body) % 2:
        raise ParseError(f"structure {s!r} must be 'in' followed by (<k>c, 2p) pairs")
    layers = []
    c, h, w = input_shape
    for j, tok in enumerate(body):
        if j % 2 == 0:
            m = _CONV_TOKEN.fullmatch(tok)
            if m is None:
                raise ParseError(f"expected a convolution token like '6c', got {tok!r}")
            k = int(m.group(1))
            c, h, w = k, h - KERNEL + 1, w - KERNEL + 1
            layers.append(("conv", k))
        else:
            if tok != f"{POOL}p":
                raise ParseError(f"expected pooling token '2p', got {tok!r}")
            if h % POOL or w % POOL:
                raise ParseError(f"token {tok!r}: cannot pool odd map {h}x{w}")
            h, w = h // POOL, w // POOL
            layers.append(("pool", POOL))
        if h < 1 or w < 1:
            raise ParseError(f"token {tok!r} shrinks the map to {h}x{w}")
    return NetworkSpec(s.strip(), tuple(layers), tuple(input_shape))


@dataclass
class WeightStore:
    conv: list  # [(kernels (out, in, 5, 5), biases (out,))]
    pool: list  # [(beta, bias)]

    def check(self, spec):
        in_c = spec.input_shape[0]
        if len(self.conv) != len(spec.conv_channels):
            raise LoadError(f"expected {len(spec.conv_channels)} conv layers, found {len(self.conv)}")
        if len(self.pool) != len(spec.conv_channels):
            raise LoadError(f"expected {len(spec.conv_channels)} pool layers, found {len(self.pool)}")
        for i, ((kern, bias), out_c) in enumerate(zip(self.conv, spec.conv_channels)):
            want = (out_c, in_c, KERNEL, KERNEL)
            if kern.shape != want or bias.shape != (out_c,):
                raise LoadError(f"conv layer {i}: expected kernels {want} and biases ({out_c},), "
                                f"found {kern.shape} and {bias.shape}")
            if not (np.all(np.isfinite(kern)) and np.all(np.isfinite(bias))):
                raise LoadError(f"conv layer {i}: non-finite weights")
            in_c = out_c
        for i, (beta, b) in enumerate(self.pool):
            if not (np.isfinite(beta) and np.isfinite(b)):
                raise LoadError(f"pool layer {i}: non-finite parameters")

    def to_dict(self, spec):
        return {
            "format_version": FORMAT_VERSION,
            "structure_string": spec.structure,
            "conv_layers": [{"kernels": k.tolist(), "biases": b.tolist()} for k, b in self.conv],
            "pool_layers": [{"beta": float(beta), "bias": float(b)} for beta, b in self.pool],
        }


def seeded_weights(spec, seed, pool_beta=DEFAULT_POOL_BETA):
    """Uniform kernels in [-s, s], s = 1/sqrt(fan_in)."""
    rng = np.random.default_rng(seed)
    conv, pool = [], []
    in_c = spec.input_shape[0]
    for out_c in spec.conv_channels:
        s = 1.0 / np.sqrt(in_c * KERNEL * KERNEL)
        conv.append((rng.uniform(-s, s, (out_c, in_c, KERNEL, KERNEL)), rng.uniform(-s, s, out_c)))
        pool.append((float(pool_beta), 0.0))
        in_c = out_c
    return WeightStore(conv, pool)


def weights_from_dict(d, spec):
    if d.get("format_version") != FORMAT_VERSION:
        raise LoadError(f"unsupported weight format_version {d.get('format_version')!r}")
    if d.get("structure_string") != spec.structure:
        raise LoadError(f"weights are for {d.get('structure_string')!r}, not {spec.structure!r}")
    try:
        conv = [(np.asarray(L["kernels"], dtype=np.float64), np.asarray(L["biases"], dtype=np.float64))
                for L in d["conv_layers"]]
        pool = [(float(L["beta"]), float(L["bias"])) for L in d["pool_layers"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"malformed weight file: {exc}") from exc
    store = WeightStore(conv, pool)
    store.check(spec)
    return store


def save_weights(path, store, spec):
    with open(path, "w") as fh:
        json.dump(store.to_dict(spec), fh)


def load_weights(path, spec):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read weight file {path}: {exc}") from exc
    return weights_from_dict(d, spec)


def frozen_weights(spec, seed=None, path=None):
    if (seed is None) == (path is None):
        raise InvalidInputError("give exactly one of seed or path")
    if path is not None:
        return load_weights(path, spec)
    return seeded_weights(spec, seed)


def conv_forward(x, kernels, biases):
    """tanh(valid cross-correlation + bias). ``x`` is (C, H, W) or (N, C, H, W)."""
    x = np.asarray(x, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    biases = np.asarray(biases, dtype=np.float64)
    batched = x.ndim == 4
    xb = x if batched else x[None]
    if xb.ndim != 4 or kernels.ndim != 4 or xb.shape[1] != kernels.shape[1]:
        raise InvalidInputError(f"input {x.shape} does not match kernels {kernels.shape}")
    kh, kw = kernels.shape[2:]
    if xb.shape[2] < kh or xb.shape[3] < kw:
        raise InvalidInputError(f"input {x.shape} smaller than kernel")
    win = sliding_window_view(xb, (kh, kw), axis=(2, 3))  # N, C, H', W', kh, kw
    out = np.tanh(np.einsum("nchwij,ocij->nohw", win, kernels, optimize=True)
                  + biases[None, :, None, None])
    return out if batched else out[0]


def avgpool_forward(x, beta, bias):
    """tanh(beta * sum over each 2x2 window + bias), stride 2."""
    x = np.asarray(x, dtype=np.float64)
    h, w = x.shape[-2:]
    if h % POOL or w % POOL:
        raise InvalidInputError(f"pooling needs even spatial dims, got {h}x{w}")
    s = x.reshape(*x.shape[:-2], h // POOL, POOL, w // POOL, POOL).sum(axis=(-3, -1))
    return np.tanh(beta * s + bias)


def forward(images, spec, weights):
    """Run the whole stack on (H, W), (C, H, W) or (N, C, H, W); returns (N, C', H', W')."""
    x = np.asarray(images, dtype=np.float64)
    if x.ndim == 2:
        x = x[None, None]
    elif x.ndim == 3:
        x = x[None]
    if x.ndim != 4 or x.shape[1:] != tuple(spec.input_shape):
        raise InvalidInputError(f"images must be {spec.input_shape}, got {x.shape[1:]}")
    ci = pi = 0
    for kind, _ in spec.layers:
        if kind == "conv":
            x = conv_forward(x, *weights.conv[ci])
            ci += 1
        else:
            x = avgpool_forward(x, *weights.pool[pi])
            pi += 1
    return x


def extract_features(image, spec, weights):
    """Channel-major flattened features of one image."""
    return forward(image, spec, weights)[0].ravel()


def extract_batch(images, spec, weights, batch_size=256):
    images = np.asarray(images, dtype=np.float64)
    if images.ndim == 3:
        images = images[:, None]
    out = np.empty((len(images), spec.feature_dim))
    for i in range(0, len(images), batch_size):
        out[i:i + batch_size] = forward(images[i:i + batch_size], spec, weights).reshape(-1, spec.feature_dim)
    return out
