"""Pole counts of meromorphic extensions from Fourier data.

The Hankel matrix built from the negative coefficients of ``f`` has rank
equal to the number of poles (with multiplicity) of the extension of ``f``
into the disk; the null vector of a tall Hankel block gives the
denominator.  Only this rank/pole-count fact is used here; best meromorphic
approximants are not computed.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ComplexPoly,
    LaurentSeries,
    RationalFn,
    flat_roots,
    synthesize,
    unit_circle,
)
from .cauchy import minus_on_circle
from .errors import AmbiguousRank, PoleOutsideDisk, UnderResolved, VanishingOnCircle
from .winding import adaptive_winding

log = logging.getLogger(__name__)

GAP_THRESHOLD = 1e6
REL_FLOOR = 1e-10
RESIDUAL_TOL = 1e-8


def hankel_matrix(f: LaurentSeries, M: int, rows: int | None = None) -> np.ndarray:
    """``H[j, k] = c_{-(j+k+1)}`` for ``j < rows`` (default ``M``) and ``k < M``."""
    rows = M if rows is None else rows
    need = rows + M - 1
    c = np.zeros(need, dtype=complex)
    avail = min(need, f.neg.size)
    c[:avail] = f.neg[:avail]
    j = np.arange(rows)[:, None]
    k = np.arange(M)[None, :]
    return c[j + k]


def _data_scale(f: LaurentSeries) -> float:
    return f.max_abs_coefficient()


def hankel_rank(
    f: LaurentSeries,
    M: int,
    gap_threshold: float = GAP_THRESHOLD,
    rel_floor: float = REL_FLOOR,
) -> tuple[int, np.ndarray, float]:
    """Numerical rank of the ``M x M`` Hankel matrix of ``f``.

    Singular values above ``rel_floor`` times the data scale (the larger of
    ``sigma_0`` and the largest Laurent coefficient) are counted.  The
    count is accepted when the ratio of the last counted to the first
    discarded singular value reaches ``gap_threshold``.

    Returns
    -------
    m, singular_values, gap_ratio

    Raises
    ------
    AmbiguousRank
        If the gap at the floor count is too small or the matrix is full rank.
    """
    if 2 * M - 1 > f.neg.size:
        raise ValueError(f"need {2 * M - 1} negative coefficients, have {f.neg.size}")
    s = np.linalg.svd(hankel_matrix(f, M), compute_uv=False)
    scale = max(float(s[0]), _data_scale(f))
    if scale == 0:
        return 0, s, np.inf
    m = int(np.sum(s > rel_floor * scale))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.concatenate([[scale / s[0] if s[0] else np.inf], s[:-1] / s[1:]])
    ratios = np.nan_to_num(ratios, nan=1.0, posinf=np.inf)  # 0/0: no gap
    if m == M:
        best = int(np.argmax(ratios[1:])) + 1
        raise AmbiguousRank("Hankel matrix has full numerical rank", s, best, float(ratios[best]))
    gap = float(ratios[m]) if m else (np.inf if s[0] == 0 else scale / s[0])
    if gap < gap_threshold:
        best = int(np.argmax(ratios[1:])) + 1
        raise AmbiguousRank(
            f"gap {gap:.3g} at rank {m} below threshold {gap_threshold:g}", s, best, float(ratios[best])
        )
    return m, s, gap


def reconstruct_rational(f: LaurentSeries, m: int, rows: int | None = None) -> RationalFn:
    """Proper rational ``P/Q`` with ``deg Q <= m`` matching the ``c_{-k}`` of ``f``.

    ``Q`` spans the numerical null space of the tall Hankel block with
    ``m + 1`` columns and is made monic (equivalently its reversal has
    constant term one).  ``P`` follows from ``P_j = sum_{i>j} Q_i c_{-(i-j)}``.

    Raises
    ------
    PoleOutsideDisk
        If a reconstructed pole has modulus at least one.
    """
    if m == 0:
        return RationalFn(ComplexPoly(), ComplexPoly([1.0]))
    if rows is None:
        rows = max(4 * m + 8, 16)
    rows = min(rows, f.neg.size - m)
    if rows < m:
        raise ValueError("not enough negative coefficients for this m")
    H = hankel_matrix(f, m + 1, rows=rows)
    _, _, vh = np.linalg.svd(H)
    q = vh[-1].conj()
    # drop leading coefficients that are numerically zero: fewer than m poles
    top = np.max(np.abs(q))
    while q.size > 1 and abs(q[-1]) <= 1e-13 * top:
        q = q[:-1]
    q = q / q[-1]
    d = q.size - 1
    c = lambda k: f.coefficient(-k)  # noqa: E731
    p = np.array([sum(q[i] * c(i - j) for i in range(j + 1, d + 1)) for j in range(d)], dtype=complex)
    r = RationalFn(ComplexPoly(p), ComplexPoly(q))
    if d:
        poles = flat_roots(r.poles())
        if np.any(np.abs(poles) >= 1):
            raise PoleOutsideDisk(f"reconstructed pole of modulus {np.max(np.abs(poles)):.6g}")
    return r


def reconstruction_residual(f: LaurentSeries, r: RationalFn, n: int | None = None) -> float:
    """Sup-norm of ``f_minus - r`` on the grid."""
    if n is None:
        n = max(64, 1 << int(np.ceil(np.log2(2 * f.neg.size + 2))))
    t = unit_circle(n)
    return float(np.max(np.abs(minus_on_circle(f.neg, n) - r(t))))


@dataclass
class PoleReport:
    m: int | None  # None: no pole count up to max_m passed
    singular_values: np.ndarray
    gap_ratio: float
    reconstruction: RationalFn | None = None
    residual: float = np.inf
    hankel_m: int | None = None
    diagnostics: list[str] = field(default_factory=list)

    @property
    def meromorphic(self) -> bool:
        return self.m is not None

    @property
    def poles(self) -> np.ndarray:
        if self.reconstruction is None or self.reconstruction.den.degree < 1:
            return np.zeros(0, dtype=complex)
        return flat_roots(self.reconstruction.poles())

    def to_json(self) -> dict:
        from .core import complex_pairs

        return {
            "m": self.m if self.m is not None else "not_meromorphic",
            "singular_values": [float(s) for s in self.singular_values],
            "gap_ratio": _json_float(self.gap_ratio),
            "poles": complex_pairs(self.poles),
            "residual": _json_float(self.residual),
        }


def _json_float(x: float):
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def minimal_pole_count(
    f: LaurentSeries,
    max_m: int = 8,
    M: int | None = None,
    gap_threshold: float = GAP_THRESHOLD,
    rel_floor: float = REL_FLOOR,
    residual_tol: float = RESIDUAL_TOL,
) -> PoleReport:
    """Smallest ``m <= max_m`` for which ``f`` extends with ``m`` poles.

    A candidate ``m`` is accepted when the reconstructed ``f_minus`` matches
    the data to ``residual_tol`` (relative to ``max|f|`` on the circle) and
    the Hankel singular values drop by at least ``gap_threshold`` after the
    ``m``-th.  If no candidate passes, ``m`` is ``None`` (not meromorphic
    with at most ``max_m`` poles).
    """
    if M is None:
        M = max_m + 2
    n = max(64, 1 << int(np.ceil(np.log2(2 * f.K + 2))))
    scale = float(np.max(np.abs(synthesize(f, n).values)))
    s = np.linalg.svd(hankel_matrix(f, M), compute_uv=False)
    diagnostics: list[str] = []
    hm = None
    try:
        hm, _, _ = hankel_rank(f, M, gap_threshold, rel_floor)
    except AmbiguousRank as exc:
        diagnostics.append(f"hankel: {exc} (best split {exc.best_split}, ratio {exc.best_ratio:.3g})")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.concatenate([[np.inf], s[:-1] / s[1:]])
    ratios = np.nan_to_num(ratios, nan=1.0, posinf=np.inf)
    best_resid = np.inf
    for m in range(0, max_m + 1):
        gap = float(ratios[m]) if m else np.inf
        if m and s[m - 1] <= rel_floor * max(s[0], _data_scale(f)):
            diagnostics.append(f"m={m}: singular value below floor")
            break
        try:
            r = reconstruct_rational(f, m)
        except PoleOutsideDisk as exc:
            diagnostics.append(f"m={m}: {exc}")
            continue
        resid = reconstruction_residual(f, r, n)
        best_resid = min(best_resid, resid)
        if resid > residual_tol * scale:
            diagnostics.append(f"m={m}: residual {resid:.3g}")
            continue
        if gap < gap_threshold:
            diagnostics.append(f"m={m}: residual ok but gap {gap:.3g}")
            continue
        return PoleReport(m, s, gap, r, resid, hm, diagnostics)
    return PoleReport(None, s, float(np.max(ratios[1:])) if s.size > 1 else np.inf, None, best_resid, hm, diagnostics)


# ---------------------------------------------------------------------------
# Necessity of the winding bound
# ---------------------------------------------------------------------------


@dataclass
class NecessityReport:
    m: int
    trials: int
    windings: list[int]
    histogram: dict[int, int]
    violations: int
    rejections: int
    skipped: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "trials": self.trials,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "min_winding": min(self.windings) if self.windings else None,
            "violations": self.violations,
            "rejections": self.rejections,
            "skipped": self.skipped,
        }


def random_disk(rng: np.random.Generator, radius: float, size) -> np.ndarray:
    """Uniform samples from the open disk ``|z| < radius``."""
    r = radius * np.sqrt(rng.uniform(0, 1, size))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, size))


def poles_in_disk(f: RationalFn) -> int:
    if f.den.degree < 1:
        return 0
    return int(np.sum(np.abs(flat_roots(f.poles())) < 1))


def check_necessity(
    f: RationalFn,
    trials: int = 100,
    seed: int = 0,
    h_degree: int = 8,
    coef_radius: float = 2.0,
    max_rejections: int = 100,
) -> NecessityReport:
    """Sample ``w_T(f + h) >= -m`` for random polynomial ``h``.

    ``m`` is the number of poles of ``f`` in the disk.  Each trial draws
    ``h`` with degree at most ``h_degree`` and coefficients uniform in
    ``|c| < coef_radius``; draws with ``f + h`` vanishing on the circle are
    rejected and redrawn up to ``max_rejections`` times.
    """
    f = f.normalized()
    m = poles_in_disk(f)
    windings: list[int] = []
    rejections = skipped = 0
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        for _ in range(max_rejections):
            deg = int(rng.integers(0, h_degree + 1))
            h = ComplexPoly(random_disk(rng, coef_radius, deg + 1))
            try:
                w = adaptive_winding(lambda n: f(unit_circle(n)) + h(unit_circle(n)), n0=512).winding
            except (VanishingOnCircle, UnderResolved):
                rejections += 1
                continue
            windings.append(w)
            break
        else:
            skipped += 1
            log.info("necessity trial gave up after %d rejections", max_rejections)
    violations = sum(w < -m for w in windings)
    return NecessityReport(m, trials, windings, dict(Counter(windings)), violations, rejections, skipped)

