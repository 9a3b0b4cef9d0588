"""The six chaotic maps that drive the chimp optimizer's chaotic coefficients.

A ``ChaoticStream`` is an immutable value. Its state may be a scalar or a
numpy array; arrays step element-wise, which is how whole position vectors
get a chaotic component in one call.

Two repairs keep every stream bounded and alive:

* a value that equals the previous state (a fixed point was reached), or that
  lands on one of the map's known trapping points, is stored nudged by
  ``RESCUE_EPS`` toward the middle of the range. The emitted value itself is
  not altered.
* Gauss/mouse with a zero fractional part maps to 1.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError

RESCUE_EPS = 1e-9
DEFAULT_SEED = 0.7

SINGER_MU = 1.07
SINE_A = 4.0
CIRCLE_A = 0.5
CIRCLE_B = 0.2


class ChaoticMap(enum.Enum):
    CHEBYSHEV = "chebyshev"
    GAUSS = "gauss"
    SINGER = "singer"
    BERNOULLI = "bernoulli"
    SINE = "sine"
    CIRCLE = "circle"

    @property
    def range(self):
        return (-1.0, 1.0) if self is ChaoticMap.CHEBYSHEV else (0.0, 1.0)

    @classmethod
    def from_name(cls, name):
        try:
            return cls(name.lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise InvalidInputError(f"unknown chaotic map {name!r}; choose from {names}") from None


# Points whose exact orbit is constant or a short cycle.
_TRAPS = {
    ChaoticMap.CHEBYSHEV: (-1.0, 1.0),
    ChaoticMap.GAUSS: (),
    ChaoticMap.SINGER: (0.0,),
    ChaoticMap.BERNOULLI: (0.0,),
    ChaoticMap.SINE: (0.0, 1.0),
    ChaoticMap.CIRCLE: (),
}


def _recurrence(kind, x, i):
    if kind is ChaoticMap.CHEBYSHEV:
        return np.cos(i * np.arccos(np.clip(x, -1.0, 1.0)))
    if kind is ChaoticMap.GAUSS:
        frac = np.mod(x, 1.0)
        zero = frac == 0.0
        safe = np.where(zero, 1.0, frac)
        return np.where(zero, 1.0, np.mod(1.0 / safe, 1.0))
    if kind is ChaoticMap.SINGER:
        return SINGER_MU * (7.86 * x - 23.31 * x**2 + 28.75 * x**3 - 13.302875 * x**4)
    if kind is ChaoticMap.BERNOULLI:
        return np.mod(2.0 * x, 1.0)
    if kind is ChaoticMap.SINE:
        return SINE_A / 4.0 * np.sin(np.pi * x)
    if kind is ChaoticMap.CIRCLE:
        return np.mod(x + CIRCLE_B - CIRCLE_A / (2.0 * np.pi) * np.sin(2.0 * np.pi * x), 1.0)
    raise InvalidInputError(f"unsupported map {kind}")


def _recurrence_scalar(kind, x, i):
    if kind is ChaoticMap.CHEBYSHEV:
        return math.cos(i * math.acos(min(1.0, max(-1.0, x))))
    if kind is ChaoticMap.GAUSS:
        frac = x % 1.0
        return 1.0 if frac == 0.0 else (1.0 / frac) % 1.0
    if kind is ChaoticMap.SINGER:
        return SINGER_MU * (7.86 * x - 23.31 * x**2 + 28.75 * x**3 - 13.302875 * x**4)
    if kind is ChaoticMap.BERNOULLI:
        return (2.0 * x) % 1.0
    if kind is ChaoticMap.SINE:
        return SINE_A / 4.0 * math.sin(math.pi * x)
    return (x + CIRCLE_B - CIRCLE_A / (2.0 * math.pi) * math.sin(2.0 * math.pi * x)) % 1.0


def _scalar_step(kind, x, i):
    lo, hi = kind.range
    value = min(hi, max(lo, _recurrence_scalar(kind, x, i)))
    state = value
    if value == x or value in _TRAPS[kind]:
        state = value + (RESCUE_EPS if value <= 0.5 * (lo + hi) else -RESCUE_EPS)
    return value, state


def _rescue(kind, value, previous):
    lo, hi = kind.range
    trapped = value == previous
    for p in _TRAPS[kind]:
        trapped = trapped | (value == p)
    direction = np.where(value <= 0.5 * (lo + hi), 1.0, -1.0)
    return np.where(trapped, value + RESCUE_EPS * direction, value)


@dataclass(frozen=True)
class ChaoticStream:
    kind: ChaoticMap
    state: object = DEFAULT_SEED
    index: int = 1  # Chebyshev's i; starts at 1

    @classmethod
    def start(cls, kind, seed=DEFAULT_SEED):
        if isinstance(kind, str):
            kind = ChaoticMap.from_name(kind)
        seed_arr = np.asarray(seed, dtype=np.float64)
        lo, hi = kind.range
        if not np.all(np.isfinite(seed_arr)) or np.any(seed_arr < lo) or np.any(seed_arr > hi):
            raise InvalidInputError(f"seed {seed!r} outside [{lo}, {hi}] for {kind.value}")
        state = float(seed_arr) if seed_arr.ndim == 0 else seed_arr.copy()
        return cls(kind, state, 1)


def step(stream):
    """Advance one iteration; returns ``(new_stream, value)``."""
    if isinstance(stream.state, float):
        value, state = _scalar_step(stream.kind, stream.state, stream.index)
        return ChaoticStream(stream.kind, state, stream.index + 1), value
    lo, hi = stream.kind.range
    x = np.asarray(stream.state, dtype=np.float64)
    value = np.clip(_recurrence(stream.kind, x, stream.index), lo, hi)
    state = _rescue(stream.kind, value, x)
    if value.ndim == 0:
        value, state = float(value), float(state)
    return replace(stream, state=state, index=stream.index + 1), value


def sequence(kind, seed=DEFAULT_SEED, n=1):
    """The ``n`` successive values emitted from ``seed``."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    stream = ChaoticStream.start(kind, seed)
    out = []
    for _ in range(n):
        stream, v = step(stream)
        out.append(v)
    return out


def take(stream, n):
    """``n`` successive scalar values as an array; returns ``(new_stream, values)``."""
    kind, x, i = stream.kind, float(stream.state), stream.index
    out = np.empty(n)
    for k in range(n):
        out[k], x = _scalar_step(kind, x, i)
        i += 1
    return ChaoticStream(kind, x, i), out


def to_unit(kind, values):
    """Map values from the map's range affinely onto [0, 1]."""
    lo, hi = kind.range
    return (np.asarray(values, dtype=np.float64) - lo) / (hi - lo)


def interior_seeds(kind, rng, size, margin=0.05):
    """Random seeds for a vector stream, kept away from the range edges."""
    lo, hi = kind.range
    span = hi - lo
    return rng.uniform(lo + margin * span, hi - margin * span, size=size)


def is_in_range(kind, values):
    lo, hi = kind.range
    v = np.asarray(values)
    return bool(np.all((v >= lo) & (v <= hi)))

