"""Raw-moment bookkeeping for sums and compound sums of independent rewards.

Moment vectors are arrays whose last axis holds ``E[X^0..X^n]`` (so index 0 is 1).
Leading axes broadcast, which lets the solver evaluate a whole grid at once.
"""

from math import comb

import numpy as np


def cumulants_from_moments(m: np.ndarray) -> np.ndarray:
    n = m.shape[-1] - 1
    k = np.zeros_like(m)
    for i in range(1, n + 1):
        acc = m[..., i].copy()
        for j in range(1, i):
            acc -= comb(i - 1, j - 1) * k[..., j] * m[..., i - j]
        k[..., i] = acc
    return k


def moments_from_cumulants(k: np.ndarray) -> np.ndarray:
    n = k.shape[-1] - 1
    m = np.zeros_like(k)
    m[..., 0] = 1.0
    for i in range(1, n + 1):
        acc = np.zeros_like(k[..., 0])
        for j in range(1, i + 1):
            acc = acc + comb(i - 1, j - 1) * k[..., j] * m[..., i - j]
        m[..., i] = acc
    return m


def iid_sum_moments(m: np.ndarray, count: int) -> np.ndarray:
    """Raw moments of the sum of ``count`` independent copies."""
    return moments_from_cumulants(count * cumulants_from_moments(m))


def independent_sum_moments(ma: np.ndarray, mb: np.ndarray) -> np.ndarray:
    """Raw moments of A + B for independent A and B (binomial convolution)."""
    n = ma.shape[-1] - 1
    out = np.zeros(np.broadcast_shapes(ma.shape, mb.shape))
    for i in range(n + 1):
        out[..., i] = sum(comb(i, j) * ma[..., j] * mb[..., i - j] for j in range(i + 1))
    return out


def _series_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = x.shape[-1] - 1
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
    for i in range(n + 1):
        out[..., i] = sum(x[..., j] * y[..., i - j] for j in range(i + 1))
    return out


def geometric_compound_moments(m: np.ndarray, mean_count: float) -> np.ndarray:
    """Raw moments of Y_1 + ... + Y_N with N geometric on {0, 1, ...}.

    The count has generating function 1 / (1 - q (z - 1)) with q = ``mean_count``,
    so the sum's mgf is 1 / (1 - q u(t)) where u = mgf_Y - 1 has no constant term;
    the geometric series can therefore be truncated at the moment order.
    """
    n = m.shape[-1] - 1
    fact = np.array([float(np.prod(np.arange(1, i + 1))) for i in range(n + 1)])
    u = m / fact
    u = u.copy()
    u[..., 0] = 0.0
    total = np.zeros(m.shape)
    total[..., 0] = 1.0
    power = total.copy()
    for _ in range(n):
        power = _series_mul(power, mean_count * u)
        total = total + power
    return total * fact
