"""Polynomials, series and circle samples.

All numbers are double-precision complex.  Objects are immutable once built:
coefficient arrays are stored read-only and every operation returns a new
object.

Conventions
-----------
* Coefficient arrays are indexed by power, constant term first.
* Samples of a function on the unit circle live on ``t_j = exp(2*pi*i*j/N)``.
* A Laurent coefficient ``c_k`` is ``(1/N) * sum_j f(t_j) * t_j**(-k)``, which is
  ``numpy.fft.fft(values)[k % N] / N``.
"""

from __future__ import annotations

import warnings
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import NonConvergence, SpecError

DEFAULT_CLUSTER_TOL = 1e-6
DEFAULT_ROOT_TOL = 1e-10


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=complex).ravel()
    arr.setflags(write=False)
    return arr


def _trim(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a)
    return a[: nz[-1] + 1] if nz.size else a[:0]


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def unit_circle(n: int) -> np.ndarray:
    """Return the ``n`` sample points ``exp(2*pi*i*j/n)``."""
    return np.exp(2j * np.pi * np.arange(n) / n)


def fold_coefficients(coeffs, n: int, start: int = 0) -> np.ndarray:
    """Alias coefficients of powers ``start, start+1, ...`` onto ``n`` FFT bins."""
    coeffs = np.asarray(coeffs, dtype=complex)
    out = np.zeros(n, dtype=complex)
    if coeffs.size:
        np.add.at(out, (start + np.arange(coeffs.size)) % n, coeffs)
    return out


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class ComplexPoly:
    """A polynomial with complex coefficients, constant term first.

    Trailing zero coefficients are dropped, so ``degree`` is the index of the
    last nonzero coefficient (``-1`` for the zero polynomial).

    >>> ComplexPoly([-0.25, 0, 1])(1.0)
    (0.75+0j)
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Sequence[complex] | np.ndarray = ()):
        self._coeffs = _readonly(_trim(np.array(coeffs, dtype=complex).ravel()))

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> "ComplexPoly":
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(lead * c)

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "ComplexPoly":
        a = np.zeros(k + 1, dtype=complex)
        a[k] = c
        return cls(a)

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        return self._coeffs.size - 1

    def is_zero(self) -> bool:
        return self._coeffs.size == 0

    def in_P(self, n: int) -> bool:
        """Membership in the space of polynomials of degree at most ``n``."""
        return self.degree <= n

    @property
    def leading(self) -> complex:
        return complex(self._coeffs[-1]) if self._coeffs.size else 0j

    def origin_multiplicity(self) -> int:
        """Order of the zero at the origin (``-1`` for the zero polynomial)."""
        nz = np.flatnonzero(self._coeffs)
        return int(nz[0]) if nz.size else -1

    def __call__(self, z):
        return eval_poly(self, z)

    def reversed(self, n: int | None = None) -> "ComplexPoly":
        """Return ``z**n * p(1/z)``; ``n`` defaults to the degree."""
        if n is None:
            n = max(self.degree, 0)
        if n < self.degree:
            raise ValueError(f"reversal order {n} below degree {self.degree}")
        a = np.zeros(n + 1, dtype=complex)
        a[n - self.degree : n + 1] = self._coeffs[::-1]
        return ComplexPoly(a)

    def derivative(self) -> "ComplexPoly":
        if self.degree < 1:
            return ComplexPoly()
        return ComplexPoly(self._coeffs[1:] * np.arange(1, self.degree + 1))

    def monic(self) -> "ComplexPoly":
        if self.is_zero():
            raise ZeroDivisionError("zero polynomial has no leading coefficient")
        return ComplexPoly(self._coeffs / self._coeffs[-1])

    def shift(self, k: int) -> "ComplexPoly":
        """Multiply by ``z**k``."""
        return ComplexPoly(np.concatenate([np.zeros(k, dtype=complex), self._coeffs]))

    def _coerce(self, other) -> "ComplexPoly":
        if isinstance(other, ComplexPoly):
            return other
        if np.isscalar(other):
            return ComplexPoly([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(self._coeffs.size, other._coeffs.size)
        a = np.zeros(n, dtype=complex)
        a[: self._coeffs.size] += self._coeffs
        a[: other._coeffs.size] += other._coeffs
        return ComplexPoly(a)

    __radd__ = __add__

    def __neg__(self):
        return ComplexPoly(-self._coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return ComplexPoly(self._coeffs * other)
        if not isinstance(other, ComplexPoly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return ComplexPoly()
        return ComplexPoly(np.convolve(self._coeffs, other._coeffs))

    __rmul__ = __mul__

    def __divmod__(self, other: "ComplexPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        num = self._coeffs.copy()
        d = other.degree
        if self.degree < d:
            return ComplexPoly(), self
        quo = np.zeros(self.degree - d + 1, dtype=complex)
        lead = other._coeffs[-1]
        for k in range(self.degree - d, -1, -1):
            quo[k] = num[k + d] / lead
            num[k : k + d + 1] -= quo[k] * other._coeffs
        return ComplexPoly(quo), ComplexPoly(num[:d])

    def __eq__(self, other):
        if not isinstance(other, ComplexPoly):
            return NotImplemented
        return np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self):
        return hash(self._coeffs.tobytes())

    def allclose(self, other: "ComplexPoly", atol: float = 1e-12) -> bool:
        n = max(self._coeffs.size, other._coeffs.size)
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[: self._coeffs.size] = self._coeffs
        b[: other._coeffs.size] = other._coeffs
        return bool(np.all(np.abs(a - b) <= atol))

    def __repr__(self):
        return f"ComplexPoly({np.array2string(self._coeffs, precision=6)})"


def eval_poly(p: ComplexPoly, z):
    """Evaluate ``p`` at ``z`` (scalar or array) by Horner's scheme."""
    c = p.coeffs
    zz = np.asarray(z, dtype=complex)
    acc = np.zeros_like(zz)
    for a in c[::-1]:
        acc = acc * zz + a
    return complex(acc) if acc.ndim == 0 else acc


class RootCluster(NamedTuple):
    value: complex
    multiplicity: int


def _cluster(roots: np.ndarray, tol: float) -> list[RootCluster]:
    n = roots.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(roots[i])
    out = [RootCluster(complex(np.mean(g)), len(g)) for g in groups.values()]
    out.sort(key=lambda rc: (round(abs(rc.value), 12), np.angle(rc.value)))
    return out


def poly_roots(
    p: ComplexPoly,
    tol: float = DEFAULT_ROOT_TOL,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> list[RootCluster]:
    """All roots of ``p`` with multiplicities.

    Roots at the origin are split off exactly; the rest are eigenvalues of the
    companion matrix.  Roots closer than ``cluster_tol`` are merged.

    Raises
    ------
    ValueError
        If ``p`` is constant.
    NonConvergence
        If the eigenvalue solver fails or a root misses the residual bound
        ``tol * (1 + |r|)**deg * max|coeff|``.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    c = p.coeffs
    k0 = p.origin_multiplicity()
    core = c[k0:]
    deg = core.size - 1
    if deg > 0:
        comp = np.zeros((deg, deg), dtype=complex)
        comp[1:, :-1] = np.eye(deg - 1)
        comp[:, -1] = -core[:-1] / core[-1]
        try:
            found = np.linalg.eigvals(comp)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(f"companion eigenvalues failed: {exc}") from exc
    else:
        found = np.zeros(0, dtype=complex)
    roots = np.concatenate([np.zeros(k0, dtype=complex), found])
    scale = np.max(np.abs(c))
    resid = np.abs(eval_poly(p, roots))
    bound = tol * (1 + np.abs(roots)) ** p.degree * scale
    if np.any(~np.isfinite(roots)) or np.any(resid > bound):
        raise NonConvergence("root residual exceeds bound")
    return _cluster(roots, cluster_tol)


def flat_roots(clusters: Sequence[RootCluster]) -> np.ndarray:
    """Expand clusters into a flat array with repeated entries."""
    vals = [rc.value for rc in clusters for _ in range(rc.multiplicity)]
    return np.array(vals, dtype=complex)


def series_divide(num, den, K: int) -> np.ndarray:
    """First ``K+1`` Taylor coefficients of ``num/den`` (``den[0] != 0``)."""
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    if den.size == 0 or den[0] == 0:
        raise ZeroDivisionError("series divisor must have nonzero constant term")
    out = np.zeros(K + 1, dtype=complex)
    n = np.zeros(K + 1, dtype=complex)
    n[: min(num.size, K + 1)] = num[: K + 1]
    d = den[: K + 1]
    for k in range(K + 1):
        i_max = min(k, d.size - 1)
        acc = n[k]
        if i_max:
            acc = acc - np.dot(d[1 : i_max + 1], out[k - i_max : k][::-1])
        out[k] = acc / d[0]
    return out


# ---------------------------------------------------------------------------
# Series and grids
# ---------------------------------------------------------------------------


class BoundaryGrid:
    """``N`` samples of a function at ``t_j = exp(2*pi*i*j/N)``."""

    __slots__ = ("_values",)

    def __init__(self, values):
        v = _readonly(values)
        if v.size < 64 or not is_power_of_two(v.size):
            raise ValueError(f"grid size must be a power of two >= 64, got {v.size}")
        self._values = v

    @classmethod
    def sample(cls, func: Callable, n: int) -> "BoundaryGrid":
        return cls(func(unit_circle(n)))

    @property
    def N(self) -> int:
        return self._values.size

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def points(self) -> np.ndarray:
        return unit_circle(self.N)

    def _combine(self, other, op):
        if isinstance(other, BoundaryGrid):
            if other.N != self.N:
                raise ValueError("grid sizes differ")
            other = other._values
        return BoundaryGrid(op(self._values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def conj(self) -> "BoundaryGrid":
        return BoundaryGrid(np.conj(self._values))

    def __repr__(self):
        return f"BoundaryGrid(N={self.N})"


class TaylorSeries:
    """Truncated power series ``sum_{k<=K} a_k z**k``."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        self._coeffs = _readonly(coeffs)

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def K(self) -> int:
        return self._coeffs.size - 1

    def coefficient(self, k: int) -> complex:
        return complex(self._coeffs[k]) if 0 <= k < self._coeffs.size else 0j

    def __call__(self, z):
        return eval_poly(ComplexPoly(self._coeffs), z)

    def on_circle(self, n: int, rho: float = 1.0) -> np.ndarray:
        """Values at ``rho * t_j`` for ``j < n`` via one inverse FFT."""
        a = self._coeffs * rho ** np.arange(self._coeffs.size)
        return np.fft.ifft(fold_coefficients(a, n)) * n

    def effective_degree(self, rho: float = 1.0, rel_tol: float = 1e-16) -> int:
        """Last index whose term ``|a_k| rho**k`` exceeds ``rel_tol`` times the term sum."""
        w = np.abs(self._coeffs) * rho ** np.arange(self._coeffs.size)
        big = np.flatnonzero(w > rel_tol * w.sum())
        return int(big[-1]) if big.size else 0

    def shift(self, n: int) -> "TaylorSeries":
        """Multiply by ``z**n``."""
        return TaylorSeries(np.concatenate([np.zeros(n, dtype=complex), self._coeffs]))

    def truncated(self, K: int) -> "TaylorSeries":
        return TaylorSeries(self._coeffs[: K + 1])

    def __add__(self, other):
        if isinstance(other, ComplexPoly):
            other = other.coeffs
        elif isinstance(other, TaylorSeries):
            other = other._coeffs
        elif np.isscalar(other):
            other = np.array([other], dtype=complex)
        else:
            return NotImplemented
        n = max(self._coeffs.size, other.size)
        a = np.zeros(n, dtype=complex)
        a[: self._coeffs.size] += self._coeffs
        a[: other.size] += other
        return TaylorSeries(a)

    __radd__ = __add__

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return TaylorSeries(self._coeffs * c)

    __rmul__ = __mul__

    def __neg__(self):
        return TaylorSeries(-self._coeffs)

    def __sub__(self, other):
        return self + (-other)

    def order_at_origin(self, tol: float = 0.0) -> int:
        """Index of the first coefficient exceeding ``tol`` in modulus (-1 if none)."""
        nz = np.flatnonzero(np.abs(self._coeffs) > tol)
        return int(nz[0]) if nz.size else -1

    def tail_bound(self, rho: float = 1.0, last: int = 8) -> float:
        """Size of the last ``last`` coefficients scaled to radius ``rho``."""
        a = self._coeffs[-last:]
        k = np.arange(self._coeffs.size - a.size, self._coeffs.size)
        return float(np.max(np.abs(a) * rho**k)) if a.size else 0.0

    def check_tail(self, threshold: float = 1e-12, rho: float = 1.0) -> bool:
        """Warn when the truncation tail is not negligible at radius ``rho``."""
        ok = self.tail_bound(rho) <= threshold * max(1.0, float(np.max(np.abs(self._coeffs), initial=0)))
        if not ok:
            warnings.warn(
                f"Taylor tail {self.tail_bound(rho):.3g} above {threshold:g}; "
                "truncation may be too short",
                RuntimeWarning,
                stacklevel=2,
            )
        return ok

    def __repr__(self):
        return f"TaylorSeries(K={self.K})"


class LaurentSeries:
    """Two-sided truncated series.

    ``neg[k-1]`` holds ``c_{-k}`` and ``nonneg[k]`` holds ``c_k``.
    """

    __slots__ = ("_neg", "_nonneg")

    def __init__(self, neg=(), nonneg=()):
        self._neg = _readonly(neg)
        self._nonneg = _readonly(nonneg)

    @property
    def neg(self) -> np.ndarray:
        return self._neg

    @property
    def nonneg(self) -> np.ndarray:
        return self._nonneg

    @property
    def K(self) -> int:
        return max(self._neg.size, self._nonneg.size - 1)

    def coefficient(self, k: int) -> complex:
        if k >= 0:
            return complex(self._nonneg[k]) if k < self._nonneg.size else 0j
        return complex(self._neg[-k - 1]) if -k - 1 < self._neg.size else 0j

    def on_circle(self, n: int) -> np.ndarray:
        bins = fold_coefficients(self._nonneg, n)
        # c_{-k} sits at power -k, i.e. bin (n - k) % n
        bins += fold_coefficients(self._neg[::-1], n, start=-self._neg.size)
        return np.fft.ifft(bins) * n

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        plus = eval_poly(ComplexPoly(self._nonneg), z)
        minus = eval_poly(ComplexPoly(np.concatenate([[0], self._neg])), 1 / z)
        return plus + minus

    def max_abs_coefficient(self) -> float:
        return float(max(np.max(np.abs(self._neg), initial=0.0), np.max(np.abs(self._nonneg), initial=0.0)))

    def __repr__(self):
        return f"LaurentSeries(K={self.K})"


def analyze_grid(f: BoundaryGrid, K: int | None = None) -> LaurentSeries:
    """Laurent coefficients ``c_k``, ``|k| <= K``, of circle samples.

    ``K`` defaults to ``N/2 - 1``.
    """
    n = f.N
    if K is None:
        K = n // 2 - 1
    if K > n // 2 - 1:
        raise ValueError("K must not exceed N/2 - 1")
    c = np.fft.fft(f.values) / n
    nonneg = c[: K + 1]
    neg = c[n - 1 : n - 1 - K : -1] if K else c[:0]
    return LaurentSeries(neg=neg, nonneg=nonneg)


def synthesize(f: LaurentSeries, n: int) -> BoundaryGrid:
    """Sample a Laurent series on the ``n``-point grid."""
    return BoundaryGrid(f.on_circle(n))


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


class RationalFn:
    """Quotient ``num/den`` of two polynomials."""

    __slots__ = ("num", "den")

    def __init__(self, num: ComplexPoly, den: ComplexPoly):
        if not isinstance(num, ComplexPoly):
            num = ComplexPoly(num)
        if not isinstance(den, ComplexPoly):
            den = ComplexPoly(den)
        if den.is_zero():
            raise ZeroDivisionError("denominator is the zero polynomial")
        self.num = num
        self.den = den

    @classmethod
    def from_poles(cls, poles, residues) -> "RationalFn":
        """Build ``sum_j r_j / (z - p_j)`` for simple poles."""
        den = ComplexPoly.from_roots(poles)
        num = ComplexPoly()
        for j, r in enumerate(residues):
            others = [p for i, p in enumerate(poles) if i != j]
            num = num + ComplexPoly.from_roots(others) * r
        return cls(num, den)

    def __call__(self, z):
        return eval_poly(self.num, z) / eval_poly(self.den, z)

    def poles(self, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> list[RootCluster]:
        return poly_roots(self.den, cluster_tol=cluster_tol) if self.den.degree >= 1 else []

    def normalized(self, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> "RationalFn":
        """Cancel common roots and make the denominator monic."""
        num, den = self.num, self.den
        if num.is_zero():
            return RationalFn(ComplexPoly(), ComplexPoly([1.0]))
        if num.degree >= 1 and den.degree >= 1:
            nr = list(flat_roots(poly_roots(num, cluster_tol=cluster_tol)))
            dr = list(flat_roots(poly_roots(den, cluster_tol=cluster_tol)))
            common = []
            for r in list(dr):
                hit = [i for i, s in enumerate(nr) if abs(s - r) <= cluster_tol]
                if hit:
                    common.append(r)
                    nr.pop(hit[0])
                    dr.remove(r)
            if common:
                num = ComplexPoly.from_roots(nr, num.leading)
                den = ComplexPoly.from_roots(dr, den.leading)
        lead = den.leading
        return RationalFn(num * (1 / lead), den * (1 / lead))

    def is_proper(self) -> bool:
        return self.num.degree < self.den.degree

    def laurent_at_infinity(self, K: int) -> np.ndarray:
        """Coefficients ``c_{-1}, ..., c_{-K}`` of the proper part at infinity.

        Only meaningful for the expansion valid outside all poles.
        """
        _, rem = divmod(self.num, self.den)
        if rem.is_zero():
            return np.zeros(K, dtype=complex)
        dq = self.den.degree
        # rem(1/w)/den(1/w) = w**(dq - dr) * rev(rem)(w) / rev(den)(w)
        shift = dq - rem.degree
        ser = series_divide(rem.reversed().coeffs, self.den.reversed().coeffs, K)
        out = np.zeros(K + 1, dtype=complex)
        out[shift:] = ser[: K + 1 - shift]
        return out[1:]

    def __repr__(self):
        return f"RationalFn(num={self.num!r}, den={self.den!r})"


# ---------------------------------------------------------------------------
# Function-spec documents
# ---------------------------------------------------------------------------


def _complex_list(doc: dict, key: str) -> np.ndarray:
    if key not in doc:
        raise SpecError(f"missing field '{key}'", field=key)
    raw = doc[key]
    if not isinstance(raw, list):
        raise SpecError(f"field '{key}' must be a list of [re, im] pairs", field=key)
    out = []
    for item in raw:
        if (
            not isinstance(item, (list, tuple))
            or len(item) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in item)
        ):
            raise SpecError(f"field '{key}' must be a list of [re, im] pairs", field=key)
        out.append(complex(item[0], item[1]))
    return np.array(out, dtype=complex)


def parse_function_spec(doc) -> RationalFn | LaurentSeries | BoundaryGrid:
    """Turn a decoded function-spec JSON document into a numerical object.

    Raises
    ------
    SpecError
        With ``field`` set to the offending key.
    """
    if not isinstance(doc, dict):
        raise SpecError("function spec must be a JSON object", field="type")
    kind = doc.get("type")
    if kind == "rational":
        num = ComplexPoly(_complex_list(doc, "num"))
        den = ComplexPoly(_complex_list(doc, "den"))
        if den.is_zero():
            raise SpecError("denominator is the zero polynomial", field="den")
        return RationalFn(num, den)
    if kind == "laurent":
        return LaurentSeries(neg=_complex_list(doc, "neg"), nonneg=_complex_list(doc, "nonneg"))
    if kind == "samples":
        n = doc.get("n")
        if not isinstance(n, int) or isinstance(n, bool):
            raise SpecError("field 'n' must be an integer", field="n")
        values = _complex_list(doc, "values")
        if values.size != n:
            raise SpecError(f"expected {n} values, got {values.size}", field="values")
        try:
            return BoundaryGrid(values)
        except ValueError as exc:
            raise SpecError(str(exc), field="n") from exc
    raise SpecError(f"unknown function type {kind!r}", field="type")


def to_grid(obj, n: int) -> BoundaryGrid:
    """Sample any parsed function-spec object on the ``n``-point grid."""
    if isinstance(obj, BoundaryGrid):
        if obj.N == n:
            return obj
        # resample through the Laurent coefficients
        return synthesize(analyze_grid(obj), n) if obj.N < n else BoundaryGrid(obj.values[:: obj.N // n])
    if isinstance(obj, LaurentSeries):
        return synthesize(obj, n)
    if isinstance(obj, RationalFn):
        return BoundaryGrid.sample(obj, n)
    raise TypeError(f"cannot sample {type(obj).__name__}")


def to_laurent(obj, n: int) -> LaurentSeries:
    if isinstance(obj, LaurentSeries):
        return obj
    return analyze_grid(to_grid(obj, n))


def complex_pairs(values) -> list[list[float]]:
    """Encode complex numbers as ``[re, im]`` pairs for JSON."""
    return [[float(np.real(v)), float(np.imag(v))] for v in np.atleast_1d(values)]
