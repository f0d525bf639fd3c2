"""Integer winding numbers of sampled closed curves around the origin."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .cauchy import minus_on_circle
from .core import BoundaryGrid, ComplexPoly, unit_circle
from .errors import (
    PremiseFails,
    UnderResolved,
    VanishingOnCircle,
    VanishingOnContour,
    WindingMismatch,
)

log = logging.getLogger(__name__)

DEFAULT_GUARD = 0.1
DEFAULT_ABS_TOL = 1e-8
MAX_GRID = 2**20


@dataclass(frozen=True)
class WindingReport:
    winding: int
    min_modulus: float
    max_step_angle: float
    N: int = 0

    @property
    def valid(self) -> bool:
        return self.min_modulus > 0 and self.max_step_angle < np.pi * (1 - DEFAULT_GUARD)


def winding_of_values(values, guard: float = DEFAULT_GUARD, abs_tol: float = DEFAULT_ABS_TOL) -> WindingReport:
    """Winding number of the closed polygon through ``values`` (in order).

    Each step contributes the principal argument of ``v[j+1]/v[j]``; no global
    unwrapping.  ``abs_tol`` is relative to ``max|v|``.
    """
    v = np.asarray(values, dtype=complex)
    mod = np.abs(v)
    vmax = float(mod.max())
    vmin = float(mod.min())
    if not np.isfinite(vmax) or vmin <= abs_tol * vmax or vmax == 0:
        raise VanishingOnCircle(f"min |g| = {vmin:.3g} at scale {vmax:.3g}")
    steps = np.angle(np.roll(v, -1) / v)
    max_step = float(np.max(np.abs(steps)))
    if max_step >= np.pi * (1 - guard):
        raise UnderResolved(f"step angle {max_step:.3f} with N = {v.size}; resample")
    total = float(np.sum(steps)) / (2 * np.pi)
    w = int(round(total))
    if abs(total - w) >= 0.25:
        raise UnderResolved(f"argument sum {total:.3f} is not near an integer")
    return WindingReport(winding=w, min_modulus=vmin, max_step_angle=max_step, N=v.size)


def winding(g: BoundaryGrid, guard: float = DEFAULT_GUARD, abs_tol: float = DEFAULT_ABS_TOL) -> WindingReport:
    """Winding number ``w_T(g)`` of grid samples around the origin.

    Raises
    ------
    VanishingOnCircle
        If ``min|g| <= abs_tol * max|g|``.
    UnderResolved
        If adjacent samples turn by ``pi * (1 - guard)`` or more.
    """
    return winding_of_values(g.values, guard=guard, abs_tol=abs_tol)


def adaptive_winding(
    sampler: Callable[[int], np.ndarray],
    n0: int = 256,
    n_max: int = MAX_GRID,
    guard: float = DEFAULT_GUARD,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> WindingReport:
    """Winding of ``sampler(N)`` for ``N = n0, 2*n0, ...`` until resolved."""
    n = n0
    while True:
        try:
            return winding_of_values(sampler(n), guard=guard, abs_tol=abs_tol)
        except UnderResolved:
            if 2 * n > n_max:
                raise
            n *= 2


def winding_on_circle(func: Callable, n0: int = 256, n_max: int = MAX_GRID, **kw) -> WindingReport:
    """Adaptive winding of a vectorized callable on the unit circle."""
    return adaptive_winding(lambda n: func(unit_circle(n)), n0=n0, n_max=n_max, **kw)


@dataclass(frozen=True)
class StabilityReport:
    perturbation: float  # max |h - q| on the grid
    dominance: float  # min |f + h| on the grid
    winding_f_plus_q: int
    winding_f_plus_h: int


def winding_stability(f: BoundaryGrid, h: BoundaryGrid, q: ComplexPoly) -> StabilityReport:
    """Check that replacing ``h`` by ``q`` keeps the winding of ``f + h``.

    Applies only when ``max|h - q| < min|f + h|`` on the grid.

    Raises
    ------
    PremiseFails
        If the dominance inequality does not hold.
    WindingMismatch
        If the premise holds and the windings still differ.
    """
    qv = q(f.points)
    fh = f.values + h.values
    pert = float(np.max(np.abs(h.values - qv)))
    dom = float(np.min(np.abs(fh)))
    if not pert < dom:
        raise PremiseFails(f"max|h-q| = {pert:.3g} is not below min|f+h| = {dom:.3g}")
    w_h = winding_of_values(fh).winding
    w_q = winding_of_values(f.values + qv).winding
    if w_h != w_q:
        raise WindingMismatch(f"w(f+q) = {w_q} but w(f+h) = {w_h}")
    return StabilityReport(pert, dom, w_q, w_h)


@dataclass(frozen=True)
class EpsilonRetry:
    epsilon: complex
    value: Any
    attempts: int


def epsilon_retry(
    compute: Callable[[complex], Any],
    delta: float = 1e-6,
    n_args: int = 8,
) -> EpsilonRetry:
    """Retry ``compute(eps)`` for ``eps = delta * exp(2 pi i k / n_args)``.

    Only the contour errors trigger a retry; the first ``eps`` that succeeds
    is reported with its value.
    """
    last: Exception | None = None
    for k in range(n_args):
        eps = delta * np.exp(2j * np.pi * k / n_args)
        try:
            value = compute(complex(eps))
        except (VanishingOnCircle, VanishingOnContour, UnderResolved) as exc:
            log.debug("epsilon %s failed: %s", eps, exc)
            last = exc
            continue
        log.debug("epsilon %s succeeded after %d attempts", eps, k + 1)
        return EpsilonRetry(complex(eps), value, k + 1)
    assert last is not None
    raise last


def order_at_infinity(minus, rel_tol: float = 1e-13) -> int:
    """Order of the zero of f_minus at infinity (index of first significant ``c_{-k}``)."""
    minus = np.asarray(minus, dtype=complex)
    scale = float(np.max(np.abs(minus), initial=0.0))
    if scale == 0:
        return 0
    return int(np.flatnonzero(np.abs(minus) > rel_tol * scale)[0]) + 1


def winding_via_zeros(f_minus, q: ComplexPoly, exterior_zero_count: int, n0: int = 1024) -> int:
    """Winding of ``f_minus + q`` from its exterior zero count.

    Infinity is the only possible pole of ``f_minus + q``, of order
    ``deg q``, so the winding is ``deg q`` minus the number of zeros in
    ``|z| > 1``.  When ``q`` is the zero polynomial the zero of ``f_minus`` at
    infinity is counted as well.  The result is cross-checked against the
    sampled winding.

    Raises
    ------
    VanishingOnCircle
        If ``f_minus + q`` vanishes on the circle.
    WindingMismatch
        If the two routes disagree.
    """
    if q.is_zero():
        predicted = -(exterior_zero_count + order_at_infinity(f_minus))
    else:
        predicted = q.degree - exterior_zero_count
    sampled = adaptive_winding(lambda n: minus_on_circle(f_minus, n) + q(unit_circle(n)), n0=n0).winding
    if sampled != predicted:
        raise WindingMismatch(f"sampled winding {sampled} != deg(q) - zeros = {predicted}")
    return predicted
