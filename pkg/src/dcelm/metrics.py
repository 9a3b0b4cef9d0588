"""Binary-classifier evaluation: confusion counts, rates, ROC/PR curves, AUC,
normal-approximation confidence half-widths and the Wilcoxon rank-sum test.

Rates whose denominator is zero are reported as ``None`` rather than 0 or NaN.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericError

EXACT_LIMIT = 12  # total sample size up to which the rank-sum p-value is enumerated
CURVE_TOP = 1.0 + 1e-9  # sentinel threshold above every score


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def positives(self):
        return self.tp + self.fn

    @property
    def negatives(self):
        return self.fp + self.tn

    def to_dict(self):
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


def _labels(a, name):
    a = np.asarray(a)
    if a.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D")
    if a.size and not np.all((a == 0) | (a == 1)):
        raise InvalidInputError(f"{name} must contain only 0/1")
    return a.astype(bool)


def confusion(truth, pred):
    truth = _labels(truth, "truth")
    pred = _labels(pred, "pred")
    if truth.shape != pred.shape:
        raise InvalidInputError(f"length mismatch: {truth.size} vs {pred.size}")
    return ConfusionMatrix(tp=int(np.sum(truth & pred)), fn=int(np.sum(truth & ~pred)),
                           fp=int(np.sum(~truth & pred)), tn=int(np.sum(~truth & ~pred)))


def _ratio(num, den):
    return num / den if den else None


def rates(cm):
    sens = _ratio(cm.tp, cm.tp + cm.fn)
    prec = _ratio(cm.tp, cm.tp + cm.fp)
    if sens is None or prec is None or sens + prec == 0:
        f1 = None
    else:
        f1 = 2 * prec * sens / (prec + sens)
    return {
        "sensitivity": sens,
        "specificity": _ratio(cm.tn, cm.tn + cm.fp),
        "precision": prec,
        "accuracy": _ratio(cm.tp + cm.tn, cm.tp + cm.tn + cm.fp + cm.fn),
        "f1": f1,
    }


@dataclass(frozen=True)
class CurveData:
    kind: str  # "roc": x = FPR, y = TPR; "pr": x = recall, y = precision
    thresholds: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def rows(self):
        return list(zip(self.thresholds.tolist(), self.x.tolist(), self.y.tolist()))


def _scores(truth, scores):
    truth = _labels(truth, "truth")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != truth.shape:
        raise InvalidInputError(f"length mismatch: {truth.size} labels vs {scores.size} scores")
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("scores must be finite")
    return truth, scores


def curve(truth, scores, kind="roc"):
    """Sweep the threshold over every distinct score plus the sentinels 1+eps and 0.

    A sample is called positive when its score is >= the threshold, so equal
    scores always switch together.
    """
    if kind not in ("roc", "pr"):
        raise InvalidInputError(f"kind must be 'roc' or 'pr', got {kind!r}")
    truth, scores = _scores(truth, scores)
    n_pos = int(truth.sum())
    n_neg = truth.size - n_pos
    if n_pos == 0 or (kind == "roc" and n_neg == 0):
        raise InvalidInputError(f"{kind} curve needs both classes present")
    distinct = np.unique(scores)[::-1]
    thresholds = np.concatenate([[max(CURVE_TOP, distinct[0] + 1e-9)], distinct])
    if thresholds[-1] > 0.0:
        thresholds = np.concatenate([thresholds, [0.0]])
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    t_sorted = truth[order]
    # count of samples with score >= threshold, for each threshold
    called = np.searchsorted(-s_sorted, -thresholds, side="right")
    tp = np.concatenate([[0], np.cumsum(t_sorted)])[called]
    fp = called - tp
    if kind == "roc":
        return CurveData(kind, thresholds, fp / n_neg, tp / n_pos)
    # no sample called positive: precision conventionally 1
    precision = np.where(called > 0, tp / np.maximum(called, 1), 1.0)
    return CurveData(kind, thresholds, tp / n_pos, precision)


def auc(c):
    """Trapezoidal area under a ROC curve."""
    if c.kind != "roc":
        raise InvalidInputError("auc expects a ROC curve")
    return float(np.sum(np.diff(c.x) * (c.y[1:] + c.y[:-1]) / 2.0))


def auc_rank(truth, scores):
    """AUC as the normalised Mann-Whitney U: P(score+ > score-) + P(tie) / 2."""
    truth, scores = _scores(truth, scores)
    n_pos = int(truth.sum())
    n_neg = truth.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InvalidInputError("AUC needs both classes present")
    ranks = rankdata(scores)
    u = ranks[truth].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_auc(truth, scores, tol=1e-10):
    """Trapezoid AUC, cross-checked against the rank statistic."""
    a = auc(curve(truth, scores, "roc"))
    b = auc_rank(truth, scores)
    if abs(a - b) > tol:
        raise NumericError(f"trapezoid AUC {a} disagrees with rank AUC {b}")
    return a


def confidence_interval(rate, n, p=1.96):
    """Half-width ``p * sqrt(rate (1 - rate) / n)``."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if not 0.0 <= rate <= 1.0:
        raise InvalidInputError(f"rate must lie in [0, 1], got {rate}")
    return p * math.sqrt(rate * (1.0 - rate) / n)


def rankdata(values):
    """Average (mid) ranks, 1-based."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="mergesort")
    sorted_v = values[order]
    ranks = np.empty(values.size)
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or sorted_v[i] != sorted_v[start]:
            ranks[order[start:i]] = (start + i + 1) / 2.0
            start = i
    return ranks


def wilcoxon_rank_sum(a, b):
    """Two-sided rank-sum test. Returns ``{"u_statistic", "p_value"}`` (U counted for ``a``).

    Exact permutation distribution when ``len(a) + len(b) <= 12``, otherwise the
    tie-corrected normal approximation with continuity correction.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("both samples must be non-empty")
    n1, n2 = a.size, b.size
    n = n1 + n2
    ranks = rankdata(np.concatenate([a, b]))
    offset = n1 * (n1 + 1) / 2.0
    u = float(ranks[:n1].sum() - offset)
    mean = n1 * n2 / 2.0
    dev = abs(u - mean)

    if n <= EXACT_LIMIT:
        total = hits = 0
        for idx in itertools.combinations(range(n), n1):
            total += 1
            if abs(ranks[list(idx)].sum() - offset - mean) >= dev - 1e-9:
                hits += 1
        p = hits / total
    else:
        _, counts = np.unique(ranks, return_counts=True)
        tie = float(np.sum(counts**3 - counts)) / (n * (n - 1))
        var = n1 * n2 / 12.0 * ((n + 1) - tie)
        if var <= 0:
            p = 1.0
        else:
            z = max(dev - 0.5, 0.0) / math.sqrt(var)
            p = math.erfc(z / math.sqrt(2.0))
    return {"u_statistic": u, "p_value": min(1.0, p)}
