import math

import numpy as np
import pytest

from meroscope.core import BoundaryGrid, ComplexPoly, LaurentSeries, RationalFn, analyze_grid
from meroscope.errors import AmbiguousRank, PoleOutsideDisk
from meroscope.families import random_minus, random_rational
from meroscope.poles import (
    check_necessity,
    hankel_matrix,
    hankel_rank,
    minimal_pole_count,
    reconstruct_rational,
    reconstruction_residual,
)
from meroscope.winding import winding_on_circle


def laurent(func, n=4096):
    return analyze_grid(BoundaryGrid.sample(func, n))


def test_hankel_is_constant_on_antidiagonals():
    f = LaurentSeries(neg=np.arange(1, 20) + 0j)
    H = hankel_matrix(f, 6)
    for j in range(5):
        for k in range(5):
            assert H[j + 1, k] == H[j, k + 1] == f.coefficient(-(j + k + 2))


def test_rank_of_single_pole():
    m, s, gap = hankel_rank(laurent(lambda t: 1 / (t - 0.5)), 8)
    assert m == 1
    # H[j, k] = 0.5**(j + k) is an outer product
    assert s[1] / s[0] <= 1e-14
    assert gap >= 1e6


def test_rank_of_analytic_data():
    m, s, _ = hankel_rank(laurent(lambda t: t**2 + np.exp(t)), 8)
    assert m == 0
    assert np.all(s <= 1e-15)


def test_rank_of_two_poles():
    m, _, _ = hankel_rank(laurent(lambda t: 1 / (t - 0.5) + 1 / (t + 0.6)), 8)
    assert m == 2


def test_rank_needs_enough_coefficients():
    with pytest.raises(ValueError):
        hankel_rank(LaurentSeries(neg=[1.0, 0.5]), 8)


def test_essential_singularity_has_no_gap():
    f = LaurentSeries(neg=[1 / math.factorial(k) for k in range(1, 60)])
    with pytest.raises(AmbiguousRank):
        hankel_rank(f, 8)


def test_reconstruct_single_pole():
    f = laurent(lambda t: 1 / (t - 0.5))
    r = reconstruct_rational(f, 1)
    assert r.num.allclose(ComplexPoly([1.0]), atol=1e-12)
    assert r.den.allclose(ComplexPoly([-0.5, 1.0]), atol=1e-12)
    assert reconstruction_residual(f, r) < 1e-12


def test_reconstruct_zero_minus():
    r = reconstruct_rational(laurent(lambda t: t**3), 0)
    assert r.num.is_zero()


def test_reconstruct_double_pole():
    f = laurent(lambda t: 1 / (t - 0.5) ** 2)
    r = reconstruct_rational(f, 2)
    poles = r.poles()
    assert len(poles) == 1 and poles[0].multiplicity == 2
    assert abs(poles[0].value - 0.5) <= 1e-6
    # re-expansion at infinity: 1/(z - 0.5)**2 = sum_k (k - 1) 0.5**(k - 2) z**-k
    k = np.arange(1, 30)
    expected = np.where(k >= 2, (k - 1) * 0.5 ** (k - 2.0), 0)
    np.testing.assert_allclose(r.laurent_at_infinity(29), expected, atol=1e-6)


def test_reconstruct_rejects_pole_outside():
    f = LaurentSeries(neg=1.5 ** np.arange(40))
    with pytest.raises(PoleOutsideDisk):
        reconstruct_rational(f, 1)


def test_reconstruction_round_trip_on_random_data():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = int(rng.integers(1, 6))
        f = random_minus(rng, m)
        data = laurent(f)
        r = reconstruct_rational(data, m)
        K = 2 * m + 4
        ref = f.laurent_at_infinity(K)
        got = r.laurent_at_infinity(K)
        assert np.max(np.abs(got - ref)) <= 1e-8 * np.max(np.abs(ref))


# --- minimal pole count ---------------------------------------------------------


def test_minimal_count_with_polynomial_part():
    rep = minimal_pole_count(laurent(lambda t: t + 1 / (t - 0.3)))
    assert rep.m == 1
    assert rep.poles[0] == pytest.approx(0.3, abs=1e-10)
    assert rep.gap_ratio >= 1e6 and rep.residual <= 1e-8


def test_minimal_count_of_polynomial():
    rep = minimal_pole_count(laurent(lambda t: t**5))
    assert rep.m == 0
    assert rep.to_json()["gap_ratio"] == "inf"


def test_exponential_tail_is_not_meromorphic():
    f = LaurentSeries(neg=[1 / math.factorial(k) for k in range(1, 200)])
    rep = minimal_pole_count(f, max_m=6)
    assert not rep.meromorphic
    assert rep.to_json()["m"] == "not_meromorphic"
    assert rep.diagnostics


def test_report_json_shape():
    rep = minimal_pole_count(laurent(lambda t: 1 / (t - 0.5) + 1 / (t + 0.6)))
    doc = rep.to_json()
    assert set(doc) == {"m", "singular_values", "gap_ratio", "poles", "residual"}
    assert doc["m"] == 2
    assert sorted(p[0] for p in doc["poles"]) == pytest.approx([-0.6, 0.5], abs=1e-9)


# --- necessity -------------------------------------------------------------------


def w(func):
    return winding_on_circle(func).winding


def test_necessity_examples():
    assert w(lambda t: 1 / t) == -1
    # (2 t**2 + 1)/t has zeros +-i/sqrt(2) inside
    assert w(lambda t: 1 / t + 2 * t) == 2 - 1
    assert w(lambda t: 1 / ((t - 0.5) * (t + 0.5))) == -2


def test_check_necessity_reports():
    f = RationalFn(ComplexPoly([1.0]), ComplexPoly.from_roots([0.5, -0.5]))
    rep = check_necessity(f, trials=40, seed=3)
    assert rep.m == 2
    assert rep.violations == 0 and rep.passed
    assert sum(rep.histogram.values()) == len(rep.windings) == 40 - rep.skipped
    assert min(rep.windings) >= -2


def test_check_necessity_is_seeded():
    f = random_rational(np.random.default_rng(0), 3)
    a = check_necessity(f, trials=15, seed=99)
    b = check_necessity(f, trials=15, seed=99)
    assert a.windings == b.windings
