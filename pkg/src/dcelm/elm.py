"""Single-hidden-layer Extreme Learning Machine with sigmoid hidden units."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, LoadError
from .linalg import as_matrix, least_squares_min_norm

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ElmConfig:
    n_inputs: int
    n_hidden: int = 120
    n_outputs: int = 2
    weight_bounds: tuple = (-1.0, 1.0)

    def __post_init__(self):
        for name in ("n_inputs", "n_hidden", "n_outputs"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be >= 1")
        lo, hi = self.weight_bounds
        if not lo < hi:
            raise InvalidInputError(f"weight_bounds must satisfy lo < hi, got {self.weight_bounds}")

    def to_dict(self):
        return {"n_inputs": self.n_inputs, "n_hidden": self.n_hidden,
                "n_outputs": self.n_outputs, "activation": "sigmoid",
                "weight_bounds": list(self.weight_bounds)}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["n_inputs"]), int(d["n_hidden"]), int(d["n_outputs"]),
                   tuple(float(v) for v in d["weight_bounds"]))


@dataclass
class ElmModel:
    W: np.ndarray  # (n_inputs, n_hidden)
    b: np.ndarray  # (n_hidden,)
    Q: np.ndarray  # (n_hidden, n_outputs)

    def to_dict(self):
        return {"format_version": FORMAT_VERSION,
                "W": self.W.tolist(), "b": self.b.tolist(), "Q": self.Q.tolist()}

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != FORMAT_VERSION:
            raise LoadError(f"unsupported ELM format_version {d.get('format_version')!r}")
        try:
            W = as_matrix(d["W"], "W")
            b = np.asarray(d["b"], dtype=np.float64)
            Q = as_matrix(d["Q"], "Q")
        except (KeyError, InvalidInputError) as exc:
            raise LoadError(f"bad ELM document: {exc}") from exc
        if b.shape != (W.shape[1],) or Q.shape[0] != W.shape[1]:
            raise LoadError(f"inconsistent ELM shapes W{W.shape} b{b.shape} Q{Q.shape}")
        return cls(W, b, Q)

    def dumps(self):
        return json.dumps(self.to_dict())


def sigmoid(u):
    # clip keeps exp finite; sigmoid is flat to double precision beyond |u| = 40
    return 1.0 / (1.0 + np.exp(-np.clip(u, -500.0, 500.0)))


def random_init(cfg, seed):
    rng = np.random.default_rng(seed)
    lo, hi = cfg.weight_bounds
    W = rng.uniform(lo, hi, size=(cfg.n_inputs, cfg.n_hidden))
    b = rng.uniform(lo, hi, size=cfg.n_hidden)
    return W, b


def hidden_matrix(X, W, b):
    X = as_matrix(X, "X")
    W = as_matrix(W, "W")
    b = np.asarray(b, dtype=np.float64).ravel()
    if X.shape[1] != W.shape[0]:
        raise InvalidInputError(f"X has {X.shape[1]} columns but W has {W.shape[0]} rows")
    if b.size != W.shape[1]:
        raise InvalidInputError(f"b has {b.size} entries, expected {W.shape[1]}")
    return sigmoid(X @ W + b)


def fit_output_weights(H, T):
    return least_squares_min_norm(H, T)


def fit(X, T, W, b):
    H = hidden_matrix(X, W, b)
    return ElmModel(np.asarray(W, dtype=np.float64), np.asarray(b, dtype=np.float64).ravel(),
                    fit_output_weights(H, T))


def predict(model, X):
    H = hidden_matrix(X, model.W, model.b)
    if H.shape[1] != model.Q.shape[0]:
        raise InvalidInputError("Q rows do not match hidden width")
    return H @ model.Q


def rmse(outputs, T):
    """Root of the mean squared error over all N x m output entries."""
    outputs = as_matrix(outputs, "outputs")
    T = as_matrix(T, "T")
    if outputs.shape != T.shape:
        raise InvalidInputError(f"outputs {outputs.shape} vs targets {T.shape}")
    n, m = T.shape
    return float(np.sqrt(np.sum((outputs - T) ** 2) / (m * n)))


def rmse_loss(model, X, T):
    return rmse(predict(model, X), T)


def one_hot(labels, n_classes=2):
    """Positive (label 1) -> (1, 0); negative (label 0) -> (0, 1)."""
    labels = np.asarray(labels).astype(int)
    if n_classes != 2:
        raise InvalidInputError("only binary targets are supported")
    if np.any((labels != 0) & (labels != 1)):
        raise InvalidInputError("labels must be 0 or 1")
    return np.stack([labels == 1, labels == 0], axis=1).astype(np.float64)
