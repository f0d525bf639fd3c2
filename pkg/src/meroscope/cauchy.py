"""Analytic / anti-analytic splitting of circle data.

``f = f_plus + f_minus`` where ``f_plus`` carries the coefficients ``c_k``,
``k >= 0`` (holomorphic in the disk) and ``f_minus`` carries ``c_{-k}``,
``k >= 1`` (holomorphic outside the closed disk, zero at infinity).
Downstream code works with the coefficient form of ``f_minus``; the direct
Cauchy quadrature exists for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoundaryGrid, ComplexPoly, LaurentSeries, TaylorSeries, eval_poly
from .errors import TooCloseToCircle

DEFAULT_MARGIN = 0.05


@dataclass(frozen=True)
class SplitPair:
    """``plus`` is the Taylor series of f_plus; ``minus[k-1]`` is ``c_{-k}``."""

    plus: TaylorSeries
    minus: np.ndarray

    def minus_at(self, z):
        return eval_minus(self.minus, z)

    def minus_on_circle(self, n: int) -> np.ndarray:
        return minus_on_circle(self.minus, n)


def split(f: LaurentSeries) -> SplitPair:
    """Split a Laurent series into its analytic and anti-analytic parts."""
    minus = np.array(f.neg, dtype=complex)
    minus.setflags(write=False)
    return SplitPair(plus=TaylorSeries(f.nonneg), minus=minus)


def eval_minus(minus, z):
    """Evaluate ``sum_k c_{-k} z**(-k)`` for ``|z|`` outside the singularities."""
    minus = np.asarray(minus, dtype=complex)
    z = np.asarray(z, dtype=complex)
    w = 1 / z
    out = eval_poly(ComplexPoly(np.concatenate([[0], minus])), w)
    return out


def minus_on_circle(minus, n: int) -> np.ndarray:
    """Values of f_minus at the ``n`` grid points, via one FFT."""
    return LaurentSeries(neg=minus).on_circle(n)


def cauchy_eval(f: BoundaryGrid, z: complex, margin: float = DEFAULT_MARGIN) -> complex:
    """Trapezoidal quadrature of ``(1/2 pi i) \\oint f(t) dt / (z - t)`` for ``|z| > 1``.

    With ``dt = i t dtheta`` the rule is ``mean_j f(t_j) t_j / (z - t_j)``.
    The trapezoid error decays like ``|z|**(-N)``, so ``z`` must keep away
    from the circle.

    Raises
    ------
    TooCloseToCircle
        If ``|z| < 1 + margin``.
    """
    if abs(z) < 1 + margin:
        raise TooCloseToCircle(f"|z| = {abs(z):.6g} is inside the margin 1 + {margin}")
    t = f.points
    return complex(np.mean(f.values * t / (z - t)))


def reflect(minus, n: int) -> TaylorSeries:
    """The disk function ``f_n(z) = z**n f_minus(1/z)``.

    The coefficient of ``z**(n+k)`` is ``c_{-k}``; an index relabeling.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    minus = np.asarray(minus, dtype=complex)
    coeffs = np.concatenate([np.zeros(n + 1, dtype=complex), minus])
    return TaylorSeries(coeffs)
