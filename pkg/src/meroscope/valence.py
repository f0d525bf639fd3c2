"""Normalized m-valent functions, the rational class B_m and the g -> g^a map.

A member of U_m is stored by its Taylor coefficients, ``g(z) = z**m +
(g)_1 z**(m+1) + ...``.  B_m consists of the functions ``z**m / d(z)`` with
``d`` of degree at most ``m``, ``d(0) = 1`` and no zeros in the closed disk.
Membership is decided coefficient-wise by integer polynomials
``ell_{m,k}`` in ``(g)_1..(g)_m`` built from the convolution identity
``d * (g / z**m) = 1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import ComplexPoly, TaylorSeries, flat_roots, poly_roots, series_divide
from .errors import RootCountMismatch, VanishingOnContour, ZeroCountMismatch
from .poles import random_disk
from .zeros import count_zeros_disk, locate_zeros, solve_level_set

log = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12
SLIT_MARGIN = 1e-3
PROFILE_RADIUS = 0.5


def hayman_radius(m: int) -> float:
    """Radius ``4**-m`` of the disk of values taken exactly ``m`` times."""
    return 4.0**-m


# ---------------------------------------------------------------------------
# Symmetric functions and the ell polynomials
# ---------------------------------------------------------------------------


def symmetric_functions(values: Iterable[complex]) -> np.ndarray:
    """Elementary symmetric functions ``s_1..s_N`` of ``values``.

    Built by expanding ``prod (x + b_j)`` one factor at a time; the
    coefficient of ``x**(N-k)`` is ``s_k``.

    Examples
    --------
    >>> symmetric_functions([1, 2, 3]).real
    array([ 6., 11.,  6.])
    """
    b = np.asarray(list(values), dtype=complex)
    e = np.zeros(b.size + 1, dtype=complex)
    e[0] = 1
    for j, bj in enumerate(b):
        e[1 : j + 2] = e[1 : j + 2] + bj * e[: j + 1]
    return e[1:]


Poly = dict  # exponent tuple -> int


def _padd(a: Poly, b: Poly, sign: int = 1) -> Poly:
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, 0) + sign * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            v = out.get(e, 0) + ca * cb
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _variable(i: int, m: int) -> Poly:
    e = [0] * m
    e[i] = 1
    return {tuple(e): 1}


@dataclass(frozen=True)
class EllTable:
    """Integer polynomials ``ell_{m,k}``, ``m < k <= k_max``, in ``x_1..x_m``.

    ``terms[k]`` lists ``(exponents, coefficient)`` pairs, exponents ordered
    as ``(x_1, ..., x_m)``.
    """

    m: int
    k_max: int
    terms: dict[int, tuple[tuple[tuple[int, ...], int], ...]]
    d_terms: tuple[tuple[tuple[tuple[int, ...], int], ...], ...] = ()

    def __call__(self, k: int, x: Sequence[complex]) -> complex:
        """Evaluate ``ell_{m,k}`` at ``x = ((g)_1, ..., (g)_m)``."""
        if not self.m < k <= self.k_max:
            raise KeyError(f"ell_{{{self.m},{k}}} not in table (m < k <= {self.k_max})")
        x = np.asarray(x, dtype=complex)
        total = 0j
        for exps, c in self.terms[k]:
            total += c * np.prod(x ** np.asarray(exps))
        return complex(total)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "k_max": self.k_max,
            "ell": {str(k): [[list(e), c] for e, c in t] for k, t in self.terms.items()},
        }


def ell_polynomials(m: int, k_max: int) -> EllTable:
    """Exact integer polynomials with ``(g)_k = ell_{m,k}((g)_1..(g)_m)`` on B_m.

    From ``d * (1 + (g)_1 z + ...) = 1``: ``d_1 = -x_1`` and
    ``d_k = -x_k - sum_{j<k} x_{k-j} d_j`` for ``k <= m``; then
    ``(g)_n = -sum_{j=1..m} (g)_{n-j} d_j`` for ``n > m``.

    Examples
    --------
    >>> t = ell_polynomials(2, 3)
    >>> sorted(t.terms[3])
    [((1, 1), 2), ((3, 0), -1)]
    """
    if m < 1 or k_max <= m:
        raise ValueError("need m >= 1 and k_max > m")
    x = [_variable(i, m) for i in range(m)]
    d: list[Poly] = []
    for k in range(1, m + 1):
        dk = {e: -c for e, c in x[k - 1].items()}
        for j in range(1, k):
            dk = _padd(dk, _pmul(x[k - j - 1], d[j - 1]), -1)
        d.append(dk)
    g: dict[int, Poly] = {n: x[n - 1] for n in range(1, m + 1)}
    for n in range(m + 1, k_max + 1):
        acc: Poly = {}
        for j in range(1, m + 1):
            acc = _padd(acc, _pmul(g[n - j], d[j - 1]), -1)
        g[n] = acc
    terms = {n: tuple(sorted(g[n].items())) for n in range(m + 1, k_max + 1)}
    return EllTable(m, k_max, terms, tuple(tuple(sorted(dk.items())) for dk in d))


def denominator_from_coeffs(x: Sequence[complex]) -> ComplexPoly:
    """``d`` with ``d(0) = 1`` from ``(g)_1..(g)_m`` by the triangular relations."""
    x = np.asarray(x, dtype=complex)
    m = x.size
    d = np.zeros(m + 1, dtype=complex)
    d[0] = 1
    for k in range(1, m + 1):
        d[k] = -x[k - 1] - sum(x[k - j - 1] * d[j] for j in range(1, k))
    return ComplexPoly(d)


# ---------------------------------------------------------------------------
# Function classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValentFn:
    """Member of U_m given by its Taylor series ``a_0, a_1, ...``.

    The first ``m`` coefficients vanish and ``a_m = 1``.  ``verified_radius``
    records the radius used when valence was last checked numerically
    (``None`` if never checked).
    """

    series: TaylorSeries
    m: int
    verified_radius: float | None = None
    checks: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("valence m must be at least 1")
        c = self.series.coeffs
        if c.size <= self.m:
            raise ValueError("series too short for its valence")
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.any(np.abs(c[: self.m]) > NORMALIZATION_TOL * scale) or abs(c[self.m] - 1) > NORMALIZATION_TOL:
            raise ValueError("not normalized: need a_j = 0 for j < m and a_m = 1")

    @classmethod
    def from_coeffs(cls, coeffs, m: int) -> "ValentFn":
        return cls(TaylorSeries(np.asarray(coeffs, dtype=complex)), m)

    @classmethod
    def from_rational(cls, num: ComplexPoly, den: ComplexPoly, m: int, K: int = 160) -> "ValentFn":
        """Taylor series of ``num/den`` (holomorphic at the origin) to order ``K``."""
        return cls(TaylorSeries(series_divide(num.coeffs, den.coeffs, K + 1)), m)

    @property
    def K(self) -> int:
        return self.series.K

    def coef(self, k: int) -> complex:
        """``(g)_k``, the coefficient of ``z**(m+k)``."""
        return self.series.coefficient(self.m + k)

    def coefs(self, k_max: int) -> np.ndarray:
        return np.array([self.coef(k) for k in range(1, k_max + 1)], dtype=complex)

    def __call__(self, z):
        return self.series(z)

    def verify_valence(self, seed: int = 0, samples: int = 5) -> "ValentFn":
        """Check that ``g = a`` has ``m`` roots for random ``|a| < 4**-m``."""
        rng = np.random.default_rng(seed)
        for a in random_disk(rng, 0.9 * hayman_radius(self.m), samples):
            solve_level_set(self.series, complex(a), self.m)
        return ValentFn(self.series, self.m, 0.95, self.checks)


@dataclass(frozen=True)
class BmFn:
    """``z**m / d(z)`` with ``deg d <= m``, ``d(0) = 1`` and ``d`` zero free on the closed disk."""

    d: ComplexPoly
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.d.degree > self.m:
            raise ValueError(f"deg d = {self.d.degree} exceeds m = {self.m}")
        if self.d.degree < 0 or abs(self.d.coeffs[0] - 1) > NORMALIZATION_TOL:
            raise ValueError("need d(0) = 1")
        if self.d.degree >= 1:
            r = flat_roots(poly_roots(self.d))
            if np.min(np.abs(r)) <= 1:
                raise ValueError(f"d has a root of modulus {np.min(np.abs(r)):.6g} <= 1")

    def series(self, K: int = 160) -> ValentFn:
        """Taylor data of ``z**m / d`` up to ``z**K``."""
        tail = series_divide(np.array([1.0 + 0j]), self.d.coeffs, K + 1 - self.m)
        return ValentFn(TaylorSeries(np.concatenate([np.zeros(self.m, dtype=complex), tail])), self.m)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z**self.m / self.d(z)


def bm_series(d: ComplexPoly, m: int, K: int = 160) -> ValentFn:
    return BmFn(d, m).series(K)


def is_Bm(g: ValentFn, k_max: int = 10, tol: float = 1e-10, table: EllTable | None = None) -> tuple[bool, float]:
    """Whether ``(g)_k = ell_{m,k}((g)_1..(g)_m)`` for ``m < k <= k_max``.

    Returns the verdict and the largest deviation.
    """
    m = g.m
    if k_max < m + 1:
        raise ValueError("k_max must exceed m")
    if g.K < k_max + m:
        raise ValueError(f"series truncated at {g.K}, need at least {k_max + m}")
    if table is None or table.m != m or table.k_max < k_max:
        table = ell_polynomials(m, k_max)
    x = g.coefs(m)
    dev = max(abs(g.coef(k) - table(k, x)) for k in range(m + 1, k_max + 1))
    return bool(dev <= tol), float(dev)


# ---------------------------------------------------------------------------
# The transformation g -> g^a
# ---------------------------------------------------------------------------


def deflate_root(coeffs: np.ndarray, z: complex) -> np.ndarray:
    """Coefficients of ``s(w) / (w - z)`` for a series vanishing at ``|z| < 1``.

    The backward recurrence ``h_{k-1} = b_k + z h_k`` damps errors by
    ``|z|`` per step; the forward one amplifies them by ``1/|z|``.  The last
    coefficient is dropped.
    """
    b = np.asarray(coeffs, dtype=complex)
    h = np.zeros(b.size - 1, dtype=complex)
    if h.size == 0:
        return h
    h[-1] = b[-1]
    for k in range(h.size - 1, 0, -1):
        h[k - 1] = b[k] + z * h[k]
    return h


def _normalized_product(coeffs: np.ndarray, m: int) -> ValentFn:
    """``c z**m h`` with ``c = 1/h(0)``, leading coefficient set to one exactly."""
    h = coeffs / coeffs[0]
    h[0] = 1.0
    return ValentFn(TaylorSeries(np.concatenate([np.zeros(m, dtype=complex), h])), m)


def transform(g: ValentFn, a: complex, roots: np.ndarray | None = None) -> ValentFn:
    """``g^a = c z**m (g - a) / prod (z - z_j)`` with ``g(z_j) = a``.

    ``c`` makes ``z**-m g^a -> 1``.  The output is shorter than the input
    by ``m`` coefficients (one per deflation); its high-order coefficients
    carry the truncation error, hence callers keep ``K`` generous.

    Raises
    ------
    ValueError
        If ``|a| >= 4**-m``.
    RootCountMismatch
        Propagated from the level-set solver.
    """
    a = complex(a)
    if not abs(a) < hayman_radius(g.m):
        raise ValueError(f"|a| = {abs(a):.3g} outside the disk of radius 4**-{g.m}")
    if roots is None:
        roots = solve_level_set(g.series, a, g.m)
    b = np.array(g.series.coeffs, dtype=complex)
    b[0] -= a
    for z in roots:
        b = deflate_root(b, complex(z))
    return _normalized_product(b, g.m)


def level_set_roots(g: ValentFn, a: complex) -> np.ndarray:
    return solve_level_set(g.series, complex(a), g.m)


def us2_crosscheck(g: ValentFn, a: complex) -> dict:
    """Compare the leading coefficients of ``g^a`` with the symmetric-function formulas.

    With ``zeta_j`` the roots of ``g = a`` and ``s`` the symmetric functions
    of ``-1/zeta_j``: ``(1/d)_k = -s_k - sum_{j<k} (1/d)_{k-j} s_j``, and
    ``(g^a)_j = (1/d)_j`` for ``j < m``, ``(g^a)_m = (1/d)_m - 1/a``.
    """
    a = complex(a)
    if a == 0:
        raise ValueError("the formulas need a != 0")
    m = g.m
    zeta = level_set_roots(g, a)
    s = symmetric_functions(-1 / zeta)
    inv_d = np.zeros(m + 1, dtype=complex)
    inv_d[0] = 1
    for k in range(1, m + 1):
        inv_d[k] = -s[k - 1] - sum(inv_d[k - j] * s[j - 1] for j in range(1, k))
    predicted = inv_d[1:].copy()
    predicted[m - 1] -= 1 / a
    ga = transform(g, a, roots=zeta)
    actual = ga.coefs(m)
    return {
        "a": a,
        "roots": zeta,
        "series": actual,
        "formula": predicted,
        "deviation": float(np.max(np.abs(actual - predicted))),
    }


def sup_distance(f: ValentFn, g: ValentFn, radius: float = PROFILE_RADIUS, n: int = 512) -> float:
    """``max |f - g|`` over ``|z| <= radius`` (attained on the circle)."""
    K = min(f.K, g.K)
    diff = TaylorSeries(f.series.coeffs[: K + 1] - g.series.coeffs[: K + 1])
    return float(np.max(np.abs(diff.on_circle(n, radius))))


# ---------------------------------------------------------------------------
# Modulus profiles over the Hayman disk
# ---------------------------------------------------------------------------


def _check_admissible(a: complex, m: int, slit_margin: float) -> None:
    R = hayman_radius(m)
    if not abs(a) < R:
        raise ValueError(f"a = {a} outside the disk of radius 4**-{m}")
    # distance to the segment [0, R)
    dist = abs(a.imag) if 0 <= a.real <= R else abs(a) if a.real < 0 else abs(a - R)
    if dist < slit_margin:
        raise ValueError(f"a = {a} within {slit_margin:g} of the slit [0, 4**-{m})")


def hayman_grid(m: int, n_radii: int = 4, n_angles: int = 8, slit_margin: float = SLIT_MARGIN) -> np.ndarray:
    """Polar grid in the disk ``|a| < 4**-m`` with points near the slit dropped."""
    R = hayman_radius(m)
    pts = []
    for r in R * np.arange(1, n_radii + 1) / (n_radii + 1):
        for th in 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles:
            a = complex(r * np.exp(1j * th))
            try:
                _check_admissible(a, m, slit_margin)
            except ValueError:
                continue
            pts.append(a)
    return np.array(pts, dtype=complex)


def modulus_profile(g: ValentFn, k: int, a_grid, slit_margin: float = SLIT_MARGIN) -> np.ndarray:
    """``|(g^a)_k|`` for each ``a`` of the grid."""
    out = []
    for a in np.atleast_1d(np.asarray(a_grid, dtype=complex)):
        _check_admissible(complex(a), g.m, slit_margin)
        out.append(abs(transform(g, a).coef(k)))
    return np.array(out)


@dataclass(frozen=True)
class SubMeanProbe:
    center: complex
    radius: float
    center_value: float
    circle_mean: float

    @property
    def holds(self) -> bool:
        return self.center_value <= self.circle_mean + 1e-8


def sub_mean_value_probe(g: ValentFn, k: int, center: complex, radius: float, n_points: int = 16) -> SubMeanProbe:
    """Compare ``|(g^a)_k|`` at ``center`` with its mean over a circle around it."""
    R = hayman_radius(g.m)
    if not abs(center) + radius < R:
        raise ValueError("probe circle leaves the Hayman disk")
    ring = center + radius * np.exp(2j * np.pi * np.arange(n_points) / n_points)
    vals = [abs(transform(g, a).coef(k)) for a in ring]
    c = abs(transform(g, center).coef(k))
    return SubMeanProbe(complex(center), float(radius), float(c), float(np.mean(vals)))


# ---------------------------------------------------------------------------
# The function y and transform trajectories
# ---------------------------------------------------------------------------


def build_y(
    g: TaylorSeries,
    n0: int,
    q: ComplexPoly,
    radius: float = 1.0,
    spot_checks: int = 10,
    seed: int = 0,
) -> ValentFn:
    """``y = c z**k (z**n0 g + q) / v`` with ``v`` monic over the ``k`` zeros in the disk.

    ``c`` makes ``z**-k y -> 1``.  The spot checks count ``z(z**n y + p)``
    for random ``p`` in P_n, ``n <= 3``, and are stored in ``y.checks`` as
    ``(n, count, bound)`` triples.

    Raises
    ------
    ZeroCountMismatch
        If the located zeros of ``z**n0 g + q`` disagree with the contour count.
    """
    if q.degree > n0:
        raise ValueError(f"deg q = {q.degree} exceeds n0 = {n0}")
    s = g.shift(n0) + q
    try:
        zeros = locate_zeros(s, 0.0, radius=radius)
    except RootCountMismatch as exc:
        raise ZeroCountMismatch(str(exc)) from exc
    k = zeros.size
    if k < 1:
        raise ZeroCountMismatch("no zeros in the disk; y would not be normalized")
    b = np.array(s.coeffs, dtype=complex)
    for z in zeros:
        b = deflate_root(b, complex(z))
    y = _normalized_product(b, k)
    rng = np.random.default_rng(seed)
    checks = []
    for _ in range(spot_checks):
        n = int(rng.integers(0, 4))
        p = ComplexPoly(random_disk(rng, 2.0, n + 1))
        try:
            count = count_zeros_disk(y.series.shift(n) + p, 0.95 * radius)
        except VanishingOnContour:
            continue
        checks.append((n, count, k + n))
    return ValentFn(y.series, k, None, tuple(checks))


@dataclass(frozen=True)
class StepRecord:
    step: int
    a: complex | None
    bm_deviation: float
    phi: tuple[float, ...]
    d: ComplexPoly
    d_residual: float
    coefs: tuple[complex, ...]

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "a": None if self.a is None else [self.a.real, self.a.imag],
            "bm_deviation": self.bm_deviation,
            "phi": list(self.phi),
            "d": [[float(c.real), float(c.imag)] for c in self.d.coeffs],
            "d_residual": self.d_residual,
            "coefs": [[float(c.real), float(c.imag)] for c in self.coefs],
        }


def _step_record(g: ValentFn, step: int, a, table: EllTable) -> StepRecord:
    m = g.m
    x = g.coefs(m)
    phi = tuple(float(abs(g.coef(n) - table(n, x))) for n in range(m + 1, table.k_max + 1))
    d = denominator_from_coeffs(x)
    # d need not be zero free in the disk here, so it is evaluated directly
    t = PROFILE_RADIUS * np.exp(2j * np.pi * np.arange(512) / 512)
    resid = float(np.max(np.abs(g.series.on_circle(512, PROFILE_RADIUS) - t**m / d(t))))
    return StepRecord(step, a, max(phi), phi, d, resid, tuple(complex(c) for c in g.coefs(table.k_max)))


def iterate_transform(g: ValentFn, schedule: Sequence[complex], k_max: int = 10) -> list[StepRecord]:
    """Apply ``g -> g^a`` along ``schedule`` and record the distance to B_m.

    Step 0 describes the input.  Each record holds
    ``phi_n = |(g)_n - ell_{m,n}((g)_1..(g)_m)|`` for ``m < n <= k_max``, the
    denominator ``d`` fitted from ``(g)_1..(g)_m`` and the sup residual of
    ``g - z**m/d`` on ``|z| = 0.5``.
    """
    m = g.m
    need = k_max + 2 * m + 8 + m * len(schedule)
    if g.K < need:
        raise ValueError(f"series truncated at {g.K}; this schedule needs {need}")
    table = ell_polynomials(m, k_max)
    out = [_step_record(g, 0, None, table)]
    for i, a in enumerate(schedule, 1):
        g = transform(g, complex(a))
        out.append(_step_record(g, i, complex(a), table))
    return out


# ---------------------------------------------------------------------------
# Random members
# ---------------------------------------------------------------------------


def random_bm(rng: np.random.Generator, m: int, rho_min: float = 1.2, rho_max: float = 1.5) -> BmFn:
    """``z**m / prod (1 - z/rho_j)`` with ``rho_min <= |rho_j| <= rho_max``."""
    rho = rng.uniform(rho_min, rho_max, m) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
    d = ComplexPoly([1.0])
    for r in rho:
        d = d * ComplexPoly([1.0, -1 / r])
    return BmFn(d, m)


def random_admissible(rng: np.random.Generator, m: int, size: int, fraction: float = 0.9, slit_margin: float = SLIT_MARGIN) -> np.ndarray:
    """Uniform points of ``|a| < fraction * 4**-m`` away from the slit."""
    out = []
    while len(out) < size:
        a = complex(random_disk(rng, fraction * hayman_radius(m), 1)[0])
        try:
            _check_admissible(a, m, slit_margin)
        except ValueError:
            continue
        out.append(a)
    return np.array(out, dtype=complex)
