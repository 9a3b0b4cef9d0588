"""Frozen CNN features -> ELM whose input weights and biases are searched by an optimizer.

A candidate point of the search is the flat vector
``[W[0, 0], W[0, 1], ..., W[n-1, L-1], b[0], ..., b[L-1]]``. Output weights are
not searched: each candidate is scored with its own least-squares ``Q``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import baselines, choa, elm
from .core import OptimizerConfig, RunTrace, SearchSpace
from .errors import InvalidInputError, LoadError, NumericError
from .linalg import as_matrix

FORMAT_VERSION = 1
OPTIMIZERS = ("choa", "ga", "cs", "woa", "none")
CLASS_NAMES = ("positive", "negative")


@dataclass(frozen=True)
class ChimpLayout:
    n_inputs: int
    n_hidden: int

    @property
    def total_dim(self):
        return self.n_inputs * self.n_hidden + self.n_hidden


def encode(W, b):
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).ravel()
    if W.ndim != 2 or b.size != W.shape[1]:
        raise InvalidInputError(f"W {W.shape} and b {b.shape} are inconsistent")
    return np.concatenate([W.ravel(), b])


def decode(v, layout):
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != layout.total_dim:
        raise InvalidInputError(f"vector length {v.size} != {layout.total_dim}")
    split = layout.n_inputs * layout.n_hidden
    return v[:split].reshape(layout.n_inputs, layout.n_hidden).copy(), v[split:].copy()


def fitness(v, features, targets, layout):
    W, b = decode(v, layout)
    model = elm.fit(features, targets, W, b)
    return elm.rmse_loss(model, features, targets)


def make_objective(features, targets, layout):
    features = as_matrix(features, "features")
    targets = as_matrix(targets, "targets")
    return lambda v: fitness(v, features, targets, layout)


@dataclass
class TrainedDetector:
    elm_config: elm.ElmConfig
    model: elm.ElmModel
    training: dict
    structure: str | None = None
    feature_source: dict = field(default_factory=dict)
    class_names: tuple = CLASS_NAMES
    elapsed: float = 0.0  # kept out of the JSON so that reruns are byte-identical

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "structure_string": self.structure,
            "feature_source": self.feature_source,
            "class_names": list(self.class_names),
            "elm_config": self.elm_config.to_dict(),
            "elm": self.model.to_dict(),
            "training": self.training,
        }

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != FORMAT_VERSION:
            raise LoadError(f"unsupported detector format_version {d.get('format_version')!r}")
        try:
            cfg = elm.ElmConfig.from_dict(d["elm_config"])
            model = elm.ElmModel.from_dict(d["elm"])
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"malformed detector document: {exc}") from exc
        if model.W.shape != (cfg.n_inputs, cfg.n_hidden):
            raise LoadError("ELM weights do not match elm_config")
        return cls(cfg, model, d.get("training", {}), d.get("structure_string"),
                   d.get("feature_source", {}), tuple(d.get("class_names", CLASS_NAMES)))


def run_optimizer(kind, space, objective, opt_cfg, strategy="choa2"):
    if kind == "choa":
        return choa.optimize(space, objective, opt_cfg, strategy)
    if kind in ("ga", "cs", "woa"):
        return baselines.optimize(kind, space, objective, opt_cfg)
    raise InvalidInputError(f"unknown optimizer {kind!r}; choose from {', '.join(OPTIMIZERS)}")


def train(features, targets, optimizer="choa", elm_cfg=None, opt_cfg=None,
          strategy="choa2", structure=None, feature_source=None):
    """Fit a detector on cached features; ``optimizer='none'`` is the plain random ELM."""
    features = as_matrix(features, "features")
    targets = as_matrix(targets, "targets")
    if features.shape[0] != targets.shape[0]:
        raise InvalidInputError("features and targets have different sample counts")
    elm_cfg = elm_cfg or elm.ElmConfig(n_inputs=features.shape[1])
    if elm_cfg.n_inputs != features.shape[1]:
        raise InvalidInputError(f"ELM expects {elm_cfg.n_inputs} inputs, features have {features.shape[1]}")
    opt_cfg = opt_cfg or OptimizerConfig()
    layout = ChimpLayout(elm_cfg.n_inputs, elm_cfg.n_hidden)
    objective = make_objective(features, targets, layout)

    if optimizer == "none":
        W, b = elm.random_init(elm_cfg, opt_cfg.seed)
        trace = RunTrace(best_position=encode(W, b), evaluations=1)
        trace.best_loss = objective(trace.best_position)
    else:
        lo, hi = elm_cfg.weight_bounds
        space = SearchSpace.box(layout.total_dim, lo, hi)
        trace = run_optimizer(optimizer, space, objective, opt_cfg, strategy)

    W, b = decode(trace.best_position, layout)
    model = elm.fit(features, targets, W, b)
    final = elm.rmse_loss(model, features, targets)
    training = {
        "optimizer": optimizer,
        "strategy": strategy if optimizer == "choa" else None,
        "chaos_map": opt_cfg.chaos_map.value if optimizer == "choa" else None,
        "seed": opt_cfg.seed,
        "population": opt_cfg.population if optimizer != "none" else None,
        "max_iters": opt_cfg.max_iters if optimizer != "none" else None,
        "iterations": trace.iterations,
        "evaluations": trace.evaluations,
        "final_loss": final,
        "trace": [float(v) for v in trace.best_losses],
        "n_samples": int(features.shape[0]),
    }
    return TrainedDetector(elm_cfg, model, training, structure, feature_source or {},
                           elapsed=trace.elapsed)


def predict_epg(detector, features):
    """Softmax weight of the positive output for each sample."""
    features = as_matrix(features, "features")
    if features.shape[1] != detector.elm_config.n_inputs:
        raise InvalidInputError(
            f"features have {features.shape[1]} columns, detector expects {detector.elm_config.n_inputs}")
    out = elm.predict(detector.model, features)
    epg = softmax_positive(out)
    if not np.all(np.isfinite(epg)):
        raise NumericError("detector produced non-finite outputs")
    return epg


def softmax_positive(outputs):
    outputs = np.asarray(outputs, dtype=np.float64)
    with np.errstate(invalid="ignore", over="ignore"):
        z = outputs - outputs.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e[:, 0] / e.sum(axis=1)


def classify(epgs, threshold):
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInputError(f"threshold must lie in [0, 1], got {threshold}")
    return (np.asarray(epgs, dtype=np.float64) >= threshold).astype(int)
