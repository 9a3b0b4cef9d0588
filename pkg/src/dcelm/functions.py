"""Analytic test functions for optimizer benchmarking (optimum 0 at the origin)."""

import numpy as np


def sphere(x):
    x = np.asarray(x, dtype=np.float64)
    return float(np.dot(x, x))


def rastrigin(x):
    x = np.asarray(x, dtype=np.float64)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


FUNCTIONS = {
    "sphere": (sphere, (-10.0, 10.0)),
    "rastrigin": (rastrigin, (-5.12, 5.12)),
}
