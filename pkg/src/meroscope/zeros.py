"""Zero counting in disks and in the exterior domain, and level-set roots.

Exterior zeros of ``f_minus + q`` are never counted near infinity: with
``p(z) = z**n q(1/z)`` the identity ``z**n (f_minus + q)(1/z) = f_n(z) + p(z)``
turns them into zeros of a disk function.
"""

from __future__ import annotations

import logging
import warnings
from typing import Callable

import numpy as np

from .cauchy import reflect
from .core import (
    DEFAULT_CLUSTER_TOL,
    ComplexPoly,
    TaylorSeries,
    eval_poly,
    flat_roots,
    poly_roots,
    unit_circle,
)
from .errors import NonConvergence, RootCountMismatch, UnderResolved, VanishingOnCircle, VanishingOnContour
from .winding import adaptive_winding, order_at_infinity

log = logging.getLogger(__name__)

RETRY_STEPS = 6
LEVEL_SET_RADIUS = 0.95
LEVEL_SET_RADII = (0.5, 0.7, 0.85, 0.93, 0.95, 0.97, 0.98)
LEVEL_SET_TAIL = 1e-12
MAX_TRUNCATION = 400


def _sampler(g, rho: float) -> Callable[[int], np.ndarray]:
    if hasattr(g, "on_circle"):
        return lambda n: g.on_circle(n, rho)
    return lambda n: np.asarray(g(rho * unit_circle(n)), dtype=complex)


def alternative_radii(rho: float) -> list[float]:
    """Retry radii ``rho * (1 -+ 2**-k)``, ``k = 1..6``, kept inside ``(0, 1]``."""
    out = []
    for k in range(1, RETRY_STEPS + 1):
        for r in (rho * (1 - 2.0**-k), rho * (1 + 2.0**-k)):
            if 0 < r <= 1:
                out.append(r)
    return out


def count_zeros_disk(g, rho: float = 1.0, n0: int = 256) -> int:
    """Number of zeros of ``g`` in ``|z| < rho`` by the argument principle.

    ``g`` is a vectorized callable or anything with ``on_circle(n, rho)``
    (e.g. :class:`TaylorSeries`).  The count is the winding of ``g`` on the
    circle of radius ``rho``.

    Raises
    ------
    VanishingOnContour
        If ``g`` vanishes on the contour; ``alternatives`` suggests radii.
    """
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    if hasattr(g, "effective_degree"):
        # a winding of d needs well over d samples or each step may wrap by 2 pi
        n0 = max(n0, 1 << int(np.ceil(np.log2(4 * (g.effective_degree(rho) + 1)))))
    sampler = _sampler(g, rho)
    try:
        rep = adaptive_winding(sampler, n0=n0)
        # confirm on a grid twice as fine; aliasing would change the count
        while (again := adaptive_winding(sampler, n0=2 * rep.N)).winding != rep.winding:
            rep = again
    except (VanishingOnCircle, UnderResolved) as exc:
        raise VanishingOnContour(
            f"function vanishes on |z| = {rho}: {exc}", rho=rho, alternatives=alternative_radii(rho)
        ) from exc
    return rep.winding


def reflected_sum(f_minus, q: ComplexPoly, n: int | None = None) -> tuple[TaylorSeries, ComplexPoly, int]:
    """Build ``f_n + p`` with ``p = z**n q(1/z)``.

    Returns the series, ``p`` and the order of the zero of ``f_n + p`` at
    the origin (which corresponds to the point at infinity).
    """
    if n is None:
        n = max(q.degree, 0)
    p = q.reversed(n) if not q.is_zero() else ComplexPoly()
    series = reflect(f_minus, n) + p
    if p.is_zero():
        origin = n + order_at_infinity(f_minus)
    else:
        origin = p.origin_multiplicity()
    return series, p, origin


def count_zeros_exterior(f_minus, q: ComplexPoly, n: int | None = None) -> int:
    """Zeros of ``f_minus + q`` in ``{|z| > 1}`` (the point at infinity excluded).

    Counts ``z(f_n + p)`` on the unit circle and subtracts the multiplicity
    ``k`` of the zero of ``p`` at the origin.  ``n`` defaults to ``deg q``,
    where ``k = 0``.
    """
    series, _, origin = reflected_sum(f_minus, q, n)
    return count_zeros_disk(series, 1.0) - origin


# ---------------------------------------------------------------------------
# Root location inside a disk
# ---------------------------------------------------------------------------


def truncation_degree(coeffs: np.ndarray, rho: float, tol: float) -> int:
    """Smallest ``K`` with ``sum_{j>K} |a_j| rho**j <= tol * max|a_j| rho**j``."""
    w = np.abs(coeffs) * rho ** np.arange(coeffs.size)
    tail = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])
    ok = np.flatnonzero(tail <= tol * max(w.max(initial=0.0), 1e-300))
    K = int(ok[0]) if ok.size else coeffs.size - 1
    if not ok.size or K > MAX_TRUNCATION:
        warnings.warn("series tail not negligible at the truncation radius", RuntimeWarning, stacklevel=3)
        K = min(K, MAX_TRUNCATION)
    return K


def _newton(coeffs: np.ndarray, dcoeffs: np.ndarray, a: complex, z: complex, iters: int = 60) -> complex:
    p, dp = ComplexPoly(coeffs), ComplexPoly(dcoeffs)
    for _ in range(iters):
        d = eval_poly(dp, z)
        if d == 0:
            break
        step = (eval_poly(p, z) - a) / d
        z = z - step
        if abs(step) <= 4e-16 * max(abs(z), 1e-300):
            break
    return z


def locate_zeros(
    g: TaylorSeries,
    a: complex = 0.0,
    radius: float = LEVEL_SET_RADIUS,
    tail_tol: float = LEVEL_SET_TAIL,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> np.ndarray:
    """Roots of ``g(z) = a`` in ``|z| < radius`` with multiplicity.

    Roots of the truncated polynomial seed Newton iterations on the full
    series.  The number found must match the argument-principle count.

    Raises
    ------
    RootCountMismatch
        If the located roots disagree with the contour count.
    VanishingOnContour
        If ``g - a`` vanishes on the circle of the given radius.
    """
    c = g.coeffs
    shifted = TaylorSeries(c) + (-a)
    K = truncation_degree(shifted.coeffs, radius, tail_tol)
    trunc = ComplexPoly(shifted.coeffs[: K + 1])
    if trunc.degree < 1:
        roots = np.zeros(0, dtype=complex)
    else:
        clusters = [rc for rc in poly_roots(trunc, cluster_tol=cluster_tol) if abs(rc.value) < 1.02 * radius]
        dc = c[1:] * np.arange(1, c.size)
        refined = []
        for rc in clusters:
            z = rc.value
            if rc.multiplicity == 1:
                z = _newton(c, dc, a, z)
            refined.extend([z] * rc.multiplicity)
        roots = np.array([z for z in refined if abs(z) < radius], dtype=complex)
    near = np.abs(np.abs(roots) - radius) < 1e-9
    if np.any(near):
        raise VanishingOnContour("a root sits on the counting circle", rho=radius, alternatives=alternative_radii(radius))
    count = count_zeros_disk(shifted, radius)
    if count != roots.size:
        raise RootCountMismatch(f"contour count {count} but {roots.size} roots located in |z| < {radius}")
    order = np.lexsort((np.angle(roots), np.round(np.abs(roots), 12)))
    return roots[order]


def solve_level_set(
    g: TaylorSeries,
    a: complex,
    m: int | None = None,
    radius: float = LEVEL_SET_RADIUS,
    residual_tol: float = 1e-10,
) -> np.ndarray:
    """The ``m`` roots of ``g(z) = a`` in the disk for ``g`` in U_m.

    ``m`` defaults to the order of ``g`` at the origin.  Every normalized
    m-valent function takes each value of modulus below ``4**-m`` exactly
    ``m`` times in the disk.

    Raises
    ------
    ValueError
        If ``g`` is not normalized or ``|a| >= 4**-m``.
    RootCountMismatch
        If the contour count disagrees with the located roots or with ``m``.
    """
    if m is None:
        m = g.order_at_origin(1e-12)
    if m < 1 or abs(g.coefficient(m) - 1) > 1e-12 or g.order_at_origin(1e-12) != m:
        raise ValueError("g must satisfy z**-m g(z) -> 1")
    if not abs(a) < 4.0**-m:
        raise ValueError(f"|a| = {abs(a):.3g} outside the disk of radius 4**-{m}")
    if a == 0:
        return np.zeros(m, dtype=complex)
    # exactly m roots lie in the disk, so the first radius holding m of them
    # holds all; small radii keep the truncated polynomial short
    last: Exception | None = None
    roots = np.zeros(0, dtype=complex)
    radii = [r for r in LEVEL_SET_RADII if r < radius] + [radius] + [r for r in LEVEL_SET_RADII if r > radius]
    for r in radii:
        try:
            roots = locate_zeros(g, a, radius=r)
        except (VanishingOnContour, RootCountMismatch) as exc:
            last = exc
            continue
        if roots.size == m:
            break
    else:
        raise RootCountMismatch(f"found {roots.size} roots of g = a up to |z| < {radius}, expected {m}; {last or ''}")
    resid = np.abs(g(roots) - a)
    if np.any(resid > residual_tol):
        raise NonConvergence(f"level-set residual {resid.max():.3g} above {residual_tol:g}")
    return roots


def count_roots_brute(poly: ComplexPoly, rho: float = 1.0) -> int:
    """Roots of a polynomial inside ``|z| < rho`` found by direct rooting."""
    if poly.degree < 1:
        return 0
    return int(np.sum(np.abs(flat_roots(poly_roots(poly))) < rho))


def nearest_root_distance(poly: ComplexPoly, rho: float = 1.0) -> float:
    """Distance from the circle ``|z| = rho`` to the closest root."""
    if poly.degree < 1:
        return np.inf
    r = flat_roots(poly_roots(poly))
    return float(np.min(np.abs(np.abs(r) - rho)))

