"""Interpolation rigidity ``z(f_n + p) <= m + n`` and witnesses against it.

For rational ``f_minus`` the zero count of ``f_n + p`` is computed two ways:
by the argument principle on the reflected series, and by rooting the
numerator polynomial directly.  When ``f`` has more than ``m`` poles,
:func:`find_witness` searches for a pair ``(n, p)`` breaking the bound.
"""

from __future__ import annotations

import itertools
import logging
from math import comb
from dataclasses import dataclass, field

import numpy as np

from .cauchy import reflect
from .core import (
    ComplexPoly,
    LaurentSeries,
    RationalFn,
    flat_roots,
    poly_roots,
    unit_circle,
)
from .errors import (
    PoleOutsideDisk,
    UnderResolved,
    VanishingOnCircle,
    VanishingOnContour,
    WindingMismatch,
)
from .poles import minimal_pole_count, random_disk, reconstruct_rational
from .winding import epsilon_retry, winding_via_zeros
from .zeros import count_roots_brute, count_zeros_disk, nearest_root_distance

log = logging.getLogger(__name__)

WITNESS_EPSILONS = (1e-2, 1e-3, 1e-4)
WITNESS_DIRECTIONS = (1.0, 1j)
WITNESS_MAX_N = 3
DEFAULT_BUDGET = 64


@dataclass(frozen=True)
class RigidityTrial:
    n: int
    p: ComplexPoly
    zero_count: int
    bound: int
    epsilon: complex | None = None  # perturbation used when the sum vanished on the circle

    @property
    def satisfied(self) -> bool:
        return self.zero_count <= self.bound


def rigidity_check(f_minus, n: int, p: ComplexPoly, m: int, delta: float = 1e-6, n_args: int = 8) -> RigidityTrial:
    """Count ``z(f_n + p)`` in the disk and compare with ``m + n``.

    If ``f_n + p`` vanishes on the circle the count is taken for
    ``p + eps z**n`` (i.e. ``q + eps``) with ``|eps| = delta``; the chosen
    ``eps`` is reported.
    """
    if p.degree > n:
        raise ValueError(f"deg p = {p.degree} exceeds n = {n}")
    series = reflect(f_minus, n) + p
    try:
        count = count_zeros_disk(series, 1.0)
        eps = None
    except VanishingOnContour:
        bump = lambda e: count_zeros_disk(series + ComplexPoly.monomial(n, e), 1.0)  # noqa: E731
        res = epsilon_retry(bump, delta=delta, n_args=n_args)
        count, eps = res.value, res.epsilon
    return RigidityTrial(n=n, p=p, zero_count=count, bound=m + n, epsilon=eps)


def reflected_numerator(f_minus: RationalFn, n: int, p: ComplexPoly) -> ComplexPoly:
    """Numerator of ``f_n + p`` for proper rational ``f_minus = N/D``.

    ``f_n + p = (z**n N~ + p D~) / D~`` with ``N~ = z**deg(D) N(1/z)`` and
    ``D~ = z**deg(D) D(1/z)``; ``D~`` has no zeros in the closed disk when
    all poles of ``f_minus`` lie in the open disk.
    """
    dD = f_minus.den.degree
    num_rev = f_minus.num.reversed(dD) if not f_minus.num.is_zero() else ComplexPoly()
    den_rev = f_minus.den.reversed(dD)
    return num_rev.shift(n) + p * den_rev


def brute_zero_count(f_minus: RationalFn, n: int, p: ComplexPoly) -> int:
    """``z(f_n + p)`` by rooting the numerator polynomial."""
    return count_roots_brute(reflected_numerator(f_minus, n, p), 1.0)


def laurent_tail_length(f_minus: RationalFn, tol: float = 1e-18, cap: int = 1 << 14) -> int:
    """Number of ``c_{-k}`` needed before the tail drops below ``tol``."""
    if f_minus.den.degree < 1:
        return 64
    rho = float(np.max(np.abs(flat_roots(f_minus.poles()))))
    if rho == 0:
        return 64
    k = int(np.ceil(np.log(tol) / np.log(rho))) + 4 * f_minus.den.degree + 16
    return int(min(max(k, 64), cap))


def random_poly(rng: np.random.Generator, n: int, radius: float = 2.0, origin_shift: bool = True) -> ComplexPoly:
    """Random ``p`` in P_n; a quarter of draws get a zero of random order at the origin."""
    c = random_disk(rng, radius, n + 1)
    if origin_shift and n >= 1 and rng.uniform() < 0.25:
        k = int(rng.integers(1, n + 1))
        c[:k] = 0
    return ComplexPoly(c)


@dataclass
class EquivalenceReport:
    m: int
    trials: int
    matches: int = 0
    mismatches: int = 0
    bound_violations: int = 0
    winding_checked: int = 0
    winding_failures: int = 0
    redraws: int = 0
    records: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.mismatches == 0 and self.winding_failures == 0

    def to_json(self, with_records: bool = True) -> dict:
        out = {
            "m": self.m,
            "trials": self.trials,
            "matches": self.matches,
            "mismatches": self.mismatches,
            "bound_violations": self.bound_violations,
            "winding_checked": self.winding_checked,
            "winding_failures": self.winding_failures,
            "redraws": self.redraws,
        }
        if with_records:
            out["records"] = self.records
        return out


def _as_rational(f) -> tuple[np.ndarray, RationalFn]:
    if isinstance(f, RationalFn):
        _, rem = divmod(f.num, f.den)
        rat = RationalFn(rem, f.den).normalized()
        return rat.laurent_at_infinity(laurent_tail_length(rat)), rat
    if isinstance(f, LaurentSeries):
        rep = minimal_pole_count(f)
        if not rep.meromorphic:
            raise ValueError("equivalence suite needs rational f_minus")
        return np.array(f.neg), rep.reconstruction
    raise TypeError(f"unsupported input {type(f).__name__}")


def equivalence_suite(
    f,
    m: int,
    trials: int = 100,
    seed: int = 0,
    max_n: int = 5,
    coef_radius: float = 2.0,
    margin: float = 1e-3,
    max_redraws: int = 50,
) -> EquivalenceReport:
    """Compare reflection-based and numerator-based zero counts.

    ``f`` is either the rational ``f_minus`` itself (its polynomial part is
    dropped) or a :class:`LaurentSeries`, in which case the rational ground
    truth is reconstructed from the data.  Draws with a numerator root
    within ``margin`` of the circle are redrawn.  Each trial also checks
    ``w_T(f_minus + q) = deg q - z_{|z|>1}(f_minus + q)`` for
    ``q = z**n p(1/z)`` whenever ``f_minus + q`` does not vanish on the circle.
    """
    minus, rat = _as_rational(f)
    rep = EquivalenceReport(m=m, trials=trials)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(child)
        for _ in range(max_redraws):
            n = int(rng.integers(0, max_n + 1))
            p = random_poly(rng, n, coef_radius)
            if nearest_root_distance(reflected_numerator(rat, n, p)) >= margin:
                break
            rep.redraws += 1
        trial = rigidity_check(minus, n, p, m)
        brute = brute_zero_count(rat, n, p)
        record = {
            "trial": i,
            "n": n,
            "zero_count": trial.zero_count,
            "brute_force": brute,
            "bound": trial.bound,
            "satisfied": trial.satisfied,
        }
        if trial.zero_count == brute:
            rep.matches += 1
        else:
            rep.mismatches += 1
        rep.bound_violations += not trial.satisfied
        q = p.reversed(n)
        k = p.origin_multiplicity()
        try:
            w = winding_via_zeros(minus, q, trial.zero_count - k)
            rep.winding_checked += 1
            record["winding"] = w
        except (VanishingOnCircle, UnderResolved):
            record["winding"] = None
        except WindingMismatch as exc:
            rep.winding_failures += 1
            record["winding"] = None
            record["winding_error"] = str(exc)
        rep.records.append(record)
    return rep


# ---------------------------------------------------------------------------
# Witness search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    n: int
    p: ComplexPoly
    zero_count: int
    bound: int
    layer: str
    attempts: int


@dataclass(frozen=True)
class NoneFound:
    """No violating pair within the budget; proves nothing by itself."""

    attempts: int
    log: tuple[str, ...] = ()


def _log_taylor(poly: ComplexPoly, w: complex, order: int) -> np.ndarray:
    """Taylor coefficients of ``log poly(w + s)`` in ``s`` (principal log at ``s = 0``)."""
    b = np.zeros(order, dtype=complex)
    shifted = poly
    fact = 1.0
    for i in range(order):
        b[i] = shifted(w) / fact
        shifted = shifted.derivative()
        fact *= i + 1
    a = b / b[0]
    out = np.zeros(order, dtype=complex)
    out[0] = np.log(b[0])
    for k in range(1, order):
        out[k] = a[k] - sum(i * out[i] * a[k - i] for i in range(1, k)) / k
    return out


def _hermite_fit(nodes, mults, taylor_values) -> ComplexPoly:
    """Polynomial of degree < sum(mults) with prescribed Taylor coefficients at nodes."""
    d = int(sum(mults))
    A = np.zeros((d, d), dtype=complex)
    rhs = np.zeros(d, dtype=complex)
    row = 0
    for w, mu, vals in zip(nodes, mults, taylor_values):
        for r in range(mu):
            for i in range(r, d):
                A[row, i] = _binom(i, r) * w ** (i - r)
            rhs[row] = vals[r]
            row += 1
    return ComplexPoly(np.linalg.solve(A, rhs))


def _binom(n: int, k: int) -> float:
    return float(comb(n, k))


def _flatten_real_part(u0: ComplexPoly, D: ComplexPoly, t: np.ndarray, target: np.ndarray, extra: int, iters: int = 25):
    """Add ``D * v`` to ``u0`` so that ``Re u - target`` is as flat as possible on ``t``.

    ``v`` has degree ``extra``; least squares is refined toward the sup norm
    by reweighting.  Adding multiples of ``D`` keeps the values of ``u`` at
    the zeros of ``D``.  Returns ``(u, spread)`` with ``spread`` the peak to
    peak variation of ``Re u - target``.
    """
    Dt = D(t)
    cols = []
    for l in range(extra + 1):
        dv = Dt * t**l
        cols += [dv.real, -dv.imag]
    A = np.array(cols).T
    b = target - u0(t).real
    b = b - b.mean()
    A = A - A.mean(axis=0)
    w = np.ones(t.size)
    x = np.zeros(A.shape[1])
    for _ in range(iters):
        x, *_ = np.linalg.lstsq(A * w[:, None], b * w, rcond=None)
        r = np.abs(A @ x - b)
        w = np.sqrt(w**2 * (r / max(r.max(), 1e-300) + 1e-3))
        w /= w.max()
    v = ComplexPoly(x[0::2] + 1j * x[1::2])
    u = u0 + D * v
    return u, float(np.ptp(u(t).real - target))


def witness_spread(f: LaurentSeries, m: int, n_grid: int = 1024) -> float:
    """Smallest log dynamic range of ``|f_minus + q|`` on the circle found for a witness.

    Any ``q`` with winding ``-(m+1)`` makes ``N + D q = exp(u)`` zero free in
    the disk, so ``log|f_minus + q| = Re u - log|D|`` on the circle and its
    spread is bounded below by the best flattening.  Returns ``inf`` when
    the reconstruction at ``m + 1`` poles is unavailable.
    """
    best = next(_log_interpolants(f, m, n_grid, keep=1), None)
    return np.inf if best is None else best[0]


def _log_interpolants(f: LaurentSeries, m: int, n_grid: int, keep: int = 3):
    """Yield ``(spread, u, D, N)`` for the flattest branch choices of ``log N``."""
    try:
        rat = reconstruct_rational(f, m + 1)
    except (PoleOutsideDisk, ValueError, np.linalg.LinAlgError) as exc:
        log.info("layer ii: reconstruction at %d poles failed: %s", m + 1, exc)
        return
    D, N = rat.den, rat.num
    if D.degree != m + 1 or N.is_zero():
        return
    clusters = poly_roots(D)
    nodes = [rc.value for rc in clusters]
    mults = [rc.multiplicity for rc in clusters]
    if any(abs(N(w)) < 1e-12 * np.max(np.abs(N.coeffs)) for w in nodes):
        return
    logs = [_log_taylor(N, w, mu) for w, mu in zip(nodes, mults)]
    t = unit_circle(n_grid)
    target = np.log(np.abs(D(t)))
    extra = 2 * (m + 1) + 10
    # each node admits log N + 2 pi i k; rank branch choices by a cheap fit first
    shifts = itertools.product((0, 1, -1), repeat=len(nodes)) if len(nodes) <= 5 else [(0,) * len(nodes)]
    ranked = []
    for ks in shifts:
        vals = [np.concatenate([[lv[0] + 2j * np.pi * kk], lv[1:]]) for lv, kk in zip(logs, ks)]
        try:
            u0 = _hermite_fit(nodes, mults, vals)
        except np.linalg.LinAlgError:
            continue
        _, spread = _flatten_real_part(u0, D, t, target, extra, iters=1)
        ranked.append((spread, ks, u0))
    ranked.sort(key=lambda r: r[0])
    out = []
    for _, ks, u0 in ranked[:keep]:
        u, spread = _flatten_real_part(u0, D, t, target, extra)
        out.append((spread, ks, u))
    out.sort(key=lambda r: r[0])
    for spread, _, u in out:
        yield spread, u, D, N


def log_interpolation_candidates(f: LaurentSeries, m: int, n_fft: int = 2048, max_degree: int = 400):
    """Yield ``(n, p)`` built from the denominator reconstructed at ``m + 1`` poles.

    With ``f_minus = N/D`` and a polynomial ``u`` matching ``log N`` at the
    zeros of ``D``, ``h = (exp(u) - N)/D`` is entire and
    ``f_minus + h = exp(u)/D`` winds ``-(m+1)`` times.  A Taylor truncation
    ``q`` of ``h`` dominated by ``|exp(u)/D|`` keeps that winding, which
    gives ``z(f_n + p) = n + m + 1`` for ``p = z**n q(1/z)``.  Among the
    branches of ``log N`` the ones giving the flattest ``|exp(u)/D|`` on
    the circle come first.
    """
    t = unit_circle(n_fft)
    fine = unit_circle(4 * n_fft)
    for spread, u, D, N in _log_interpolants(f, m, n_fft):
        if spread > 30:
            log.info("layer ii: dynamic range exp(%.1f) is beyond double precision", spread)
            return
        E = np.exp(u(t))
        h = (E - N(t)) / D(t)
        coeffs = np.fft.fft(h) / n_fft
        if np.max(np.abs(coeffs[n_fft // 2 :])) > 1e-14 * np.max(np.abs(coeffs)):
            log.info("layer ii: Taylor coefficients of h not resolved on %d points", n_fft)
            continue
        Ef = np.exp(u(fine))
        hf = (Ef - N(fine)) / D(fine)
        floor = float(np.min(np.abs(Ef / D(fine))))
        partial = np.zeros(fine.size, dtype=complex)
        power = np.ones(fine.size, dtype=complex)
        for deg in range(min(max_degree, n_fft // 2)):
            partial += coeffs[deg] * power
            power *= fine
            if np.max(np.abs(hf - partial)) < 0.5 * floor:
                q = ComplexPoly(coeffs[: deg + 1])
                yield deg, (q.reversed(deg) if not q.is_zero() else ComplexPoly())
                break


def find_witness(f: LaurentSeries, m: int, budget: int = DEFAULT_BUDGET) -> Witness | NoneFound:
    """Search for ``(n, p)`` with ``z(f_n + p) > m + n``.

    Layer (i) tries constants ``p = eps * u`` for ``n = 0..3``; this exploits
    a zero of high order of ``f_n`` at the origin.  Layer (ii) builds ``p``
    from the denominator reconstructed at ``m + 1`` poles.  Every candidate
    is verified with :func:`rigidity_check` and counts against ``budget``.
    """
    minus = np.array(f.neg)
    attempts = 0
    trail: list[str] = []

    def verify(n, p, layer):
        nonlocal attempts
        attempts += 1
        try:
            trial = rigidity_check(minus, n, p, m)
        except (VanishingOnContour, VanishingOnCircle, UnderResolved) as exc:
            trail.append(f"{layer} n={n}: contour failure {exc}")
            return None
        trail.append(f"{layer} n={n} p={p.coeffs.tolist()}: z={trial.zero_count} bound={trial.bound}")
        log.debug(trail[-1])
        if not trial.satisfied:
            return Witness(n, p, trial.zero_count, trial.bound, layer, attempts)
        return None

    for n in range(WITNESS_MAX_N + 1):
        for eps in WITNESS_EPSILONS:
            for u in WITNESS_DIRECTIONS:
                if attempts >= budget:
                    return NoneFound(attempts, tuple(trail))
                hit = verify(n, ComplexPoly([eps * u]), "constant")
                if hit:
                    return hit
    for n, p in log_interpolation_candidates(f, m):
        if attempts >= budget:
            break
        hit = verify(n, p, "log-interpolation")
        if hit:
            return hit
    return NoneFound(attempts, tuple(trail))
