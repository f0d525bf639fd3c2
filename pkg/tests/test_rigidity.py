import numpy as np
import pytest

from meroscope.core import ComplexPoly, LaurentSeries, RationalFn, flat_roots, poly_roots
from meroscope.families import random_minus, witness_family
from meroscope.poles import minimal_pole_count
from meroscope.rigidity import (
    NoneFound,
    Witness,
    brute_zero_count,
    equivalence_suite,
    find_witness,
    reflected_numerator,
    rigidity_check,
    witness_spread,
)


def two_pole_minus(K=400):
    r = RationalFn(ComplexPoly([1.0]), ComplexPoly.from_roots([0.3, -0.4]))
    return r, r.laurent_at_infinity(K)


@pytest.mark.parametrize("c", [0.0, 0.5, -0.3 + 0.4j, 0.99j, 1.5, -4.0, 10.0, 7j])
def test_inverse_reflects_to_identity(c):
    # f_0(z) = f_minus(1/z) = z, so z(f_0 + c) counts the root -c
    trial = rigidity_check([1.0], 0, ComplexPoly([c]), m=1)
    assert trial.zero_count == (1 if abs(c) < 1 else 0)
    assert trial.bound == 1 and trial.satisfied


@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_zero_minus_counts_polynomial_roots(n):
    rng = np.random.default_rng(n)
    p = ComplexPoly(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
    trial = rigidity_check(np.zeros(8), n, p, m=0)
    assert trial.zero_count <= n and trial.satisfied
    if n:
        assert trial.zero_count == int(np.sum(np.abs(flat_roots(poly_roots(p))) < 1))


def test_perturbed_double_zero_violates_bound():
    _, minus = two_pole_minus()
    trial = rigidity_check(minus, 0, ComplexPoly([1e-3]), m=1)
    assert trial.zero_count == 2 and trial.bound == 1
    assert not trial.satisfied


def test_degree_of_p_is_checked():
    with pytest.raises(ValueError):
        rigidity_check([1.0], 0, ComplexPoly([0, 1]), m=1)


def test_epsilon_retry_on_contour_zero():
    # z + 1 vanishes at -1 on the circle
    trial = rigidity_check([1.0], 0, ComplexPoly([1.0]), m=1)
    assert trial.epsilon is not None and abs(trial.epsilon) == pytest.approx(1e-6)
    assert trial.zero_count in (0, 1)


def test_monotone_in_m():
    r, minus = two_pole_minus()
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(0, 4))
        p = ComplexPoly(rng.normal(size=n + 1))
        a = rigidity_check(minus, n, p, m=1)
        b = rigidity_check(minus, n, p, m=2)
        assert a.zero_count == b.zero_count
        assert (not a.satisfied) or b.satisfied


def test_reflected_numerator_matches_series():
    r, minus = two_pole_minus()
    p = ComplexPoly([0.2, -0.1j])
    num = reflected_numerator(r, 1, p)
    den_rev = r.den.reversed()
    z = 0.3 + 0.2j
    series = z * (np.sum(minus * (z ** np.arange(1, minus.size + 1)))) + p(z)
    assert num(z) / den_rev(z) == pytest.approx(series, abs=1e-12)
    assert brute_zero_count(r, 1, p) == rigidity_check(minus, 1, p, 1).zero_count


# --- two-oracle suite --------------------------------------------------------------


def test_single_pole_suite_has_no_violations():
    f = RationalFn(ComplexPoly([1.0]), ComplexPoly([-0.5, 1.0]))
    rep = equivalence_suite(f, 1, trials=100, seed=1)
    assert rep.matches == 100 and rep.mismatches == 0
    assert rep.bound_violations == 0
    assert rep.winding_failures == 0 and rep.winding_checked > 50


def test_zero_minus_suite():
    rep = equivalence_suite(RationalFn(ComplexPoly(), ComplexPoly([1.0])), 0, trials=30, seed=2)
    assert rep.mismatches == 0
    assert all(r["zero_count"] <= r["n"] for r in rep.records)


def test_laurent_input_is_reconstructed():
    r = random_minus(np.random.default_rng(4), 3)
    f = LaurentSeries(neg=r.laurent_at_infinity(2047))
    rep = equivalence_suite(f, 3, trials=30, seed=4)
    assert rep.passed and rep.matches == 30 and rep.bound_violations == 0


def test_three_poles_at_two_find_violation():
    r = random_minus(np.random.default_rng(8), 3)
    f = LaurentSeries(neg=r.laurent_at_infinity(2047))
    rep = equivalence_suite(f, 2, trials=50, seed=8)
    w = find_witness(f, 2)
    assert rep.passed
    assert rep.bound_violations > 0 or isinstance(w, Witness)


def test_suite_records_are_seeded():
    f = random_minus(np.random.default_rng(9), 2)
    assert equivalence_suite(f, 2, 20, seed=3).records == equivalence_suite(f, 2, 20, seed=3).records


# --- witness search -----------------------------------------------------------------


def test_witness_for_two_poles_at_one():
    _, minus = two_pole_minus()
    w = find_witness(LaurentSeries(neg=minus), 1)
    assert isinstance(w, Witness)
    assert (w.n, w.layer) == (0, "constant")
    assert w.p.coeffs.tolist() == [1e-2]
    assert w.zero_count > w.bound == 1
    # the smaller constant is a violation as well
    assert not rigidity_check(minus, 0, ComplexPoly([1e-3]), 1).satisfied


def test_no_witness_for_single_pole():
    minus = 0.5 ** np.arange(200)
    w = find_witness(LaurentSeries(neg=minus), 1)
    assert isinstance(w, NoneFound)
    assert w.attempts >= 24 and len(w.log) == w.attempts


def test_no_witness_for_disk_algebra_trace():
    assert isinstance(find_witness(LaurentSeries(neg=np.zeros(64)), 0), NoneFound)


def test_budget_is_respected():
    w = find_witness(LaurentSeries(neg=0.5 ** np.arange(200)), 1, budget=5)
    assert isinstance(w, NoneFound) and w.attempts == 5


def test_pole_count_consistency():
    rng = np.random.default_rng(12)
    for i in range(8):
        m = 1 + i % 3
        r = witness_family(rng, m)
        f = LaurentSeries(neg=r.laurent_at_infinity(2047))
        rep = minimal_pole_count(f)
        assert rep.m == m + 1
        assert isinstance(find_witness(f, rep.m), NoneFound)
        w = find_witness(f, rep.m - 1)
        assert isinstance(w, Witness)
        assert w.zero_count > w.bound


def test_witness_spread_is_finite_on_family():
    r = witness_family(np.random.default_rng(0), 2)
    s = witness_spread(LaurentSeries(neg=r.laurent_at_infinity(2047)), 2)
    assert 0 <= s < 20
