"""Estimators shared by the Monte Carlo engine and the studies.

Sample values from exploding paths can reach 1e300, so moments are taken
on values rescaled by their largest magnitude; squares never overflow.
"""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]


def mean_and_stderr(values: npt.ArrayLike) -> tuple[float, float]:
    """Sample mean and standard error (unbiased variance) of ``values``.

    Uses numpy's pairwise summation, so the result depends only on the
    order of ``values``, never on how they were produced.
    """
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n == 0:
        raise ValueError("mean_and_stderr needs at least one value")
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return 0.0, 0.0
    y = v / scale
    mean = float(np.mean(y))
    if n == 1:
        return mean * scale, 0.0
    # Constant samples give exactly zero spread.
    if np.all(y == y[0]):
        return float(v[0]), 0.0
    std = float(np.std(y, ddof=1))
    return mean * scale, std * scale / math.sqrt(n)


def binomial_stderr(p: float, n: int) -> float:
    if n <= 0:
        raise ValueError("binomial_stderr needs a positive sample size")
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)
