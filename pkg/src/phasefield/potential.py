"""Double-well potential W(s) = s^2 (1 - s)^2 / 2 and derived quantities.

All functions are total on the reals and accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PotentialModel",
    "DOUBLE_WELL",
    "CW",
    "STABILITY_M",
    "w",
    "w_prime",
    "w_second",
    "sqrt_two_w",
    "g_antiderivative",
]


def w(s):
    return 0.5 * s * s * (1.0 - s) ** 2


def w_prime(s):
    return s * (1.0 - s) * (1.0 - 2.0 * s)


def w_second(s):
    return 6.0 * s * s - 6.0 * s + 1.0


def sqrt_two_w(s):
    """sqrt(2 W(s)) evaluated exactly as |s (1 - s)|."""
    return np.abs(s * (1.0 - s))


def _cubic(s):
    # antiderivative of s (1 - s)
    return s * s / 2.0 - s**3 / 3.0


def g_antiderivative(s):
    """G(s) = integral of sqrt(2 W) from 0 to s, piecewise closed form."""
    s = np.asarray(s, dtype=float)
    out = np.where(
        s < 0.0,
        -_cubic(s),
        np.where(s <= 1.0, _cubic(s), 1.0 / 3.0 - _cubic(s)),
    )
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class PotentialModel:
    """Scalar constants of the double well.

    ``cw`` is the surface-tension constant (integral of sqrt(2W) over
    [0, 1]); ``stability_m`` is 1 / sup_{[0,1]} W'' and bounds the time
    step through ``dt <= stability_m * eps**2``.
    """

    cw: float = 1.0 / 6.0
    stability_m: float = 1.0

    w = staticmethod(w)
    w_prime = staticmethod(w_prime)
    w_second = staticmethod(w_second)
    sqrt_two_w = staticmethod(sqrt_two_w)
    g_antiderivative = staticmethod(g_antiderivative)


DOUBLE_WELL = PotentialModel()
CW = DOUBLE_WELL.cw
STABILITY_M = DOUBLE_WELL.stability_m
