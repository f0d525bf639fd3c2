import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meroscope.core import (
    BoundaryGrid,
    ComplexPoly,
    LaurentSeries,
    RationalFn,
    TaylorSeries,
    analyze_grid,
    eval_poly,
    flat_roots,
    parse_function_spec,
    poly_roots,
    series_divide,
    synthesize,
    unit_circle,
)
from meroscope.errors import SpecError

finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


# --- eval_poly ---------------------------------------------------------------


def test_eval_poly_quarter():
    assert eval_poly(ComplexPoly([-0.25, 0, 1]), 1.0) == pytest.approx(0.75)


def test_eval_poly_zero_polynomial():
    assert eval_poly(ComplexPoly(), 5.0) == 0


def test_eval_poly_at_i():
    # 1 + 2i + i**3 with i**3 = -i
    expected = 1 + 2j + 1j**3
    assert eval_poly(ComplexPoly([1, 2, 0, 1]), 1j) == pytest.approx(expected)
    assert expected == 1 + 1j


def test_eval_poly_vectorized():
    p = ComplexPoly([1, -3, 2])
    z = np.array([0, 1, 2, 0.5j])
    np.testing.assert_allclose(p(z), 1 - 3 * z + 2 * z**2)


def test_degree_and_trimming():
    assert ComplexPoly([1, 2, 0, 0]).degree == 1
    assert ComplexPoly().degree == -1
    assert ComplexPoly([0, 0]).is_zero()
    assert ComplexPoly([1, 0, 3]).in_P(2) and not ComplexPoly([1, 0, 3]).in_P(1)


def test_reversed_and_origin_multiplicity():
    p = ComplexPoly([0, 0, 1, 2])
    assert p.origin_multiplicity() == 2
    assert p.reversed(5).coeffs.tolist() == [0, 0, 2, 1]
    with pytest.raises(ValueError):
        p.reversed(2)


# --- poly_roots ----------------------------------------------------------------


def test_roots_of_factored_quadratic():
    roots = sorted(rc.value.real for rc in poly_roots(ComplexPoly([-0.25, 0, 1])))
    assert roots == pytest.approx([-0.5, 0.5], abs=1e-12)


def test_roots_double_root_clusters():
    p = ComplexPoly.from_roots([0.3, 0.3, -0.5])
    clusters = poly_roots(p)
    found = {round(rc.value.real, 6): rc.multiplicity for rc in clusters}
    assert found == {0.3: 2, -0.5: 1}
    # re-expanding the clustered roots gives the original polynomial back
    assert ComplexPoly.from_roots(flat_roots(clusters)).allclose(p, atol=1e-6)


def test_roots_of_monomial():
    clusters = poly_roots(ComplexPoly.monomial(3))
    assert clusters == [(0j, 3)]


def test_roots_need_positive_degree():
    with pytest.raises(ValueError):
        poly_roots(ComplexPoly([2.0]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_roots_invert_from_roots(deg, seed):
    rng = np.random.default_rng(seed)
    # rejection sample roots with pairwise separation >= 0.1
    while True:
        r = rng.uniform(-1.5, 1.5, deg) + 1j * rng.uniform(-1.5, 1.5, deg)
        gaps = np.abs(r[:, None] - r[None, :]) + np.eye(deg) * 10
        if gaps.min() >= 0.1:
            break
    found = flat_roots(poly_roots(ComplexPoly.from_roots(r)))
    assert found.size == deg
    dist = np.abs(found[:, None] - r[None, :]).min(axis=0)
    assert dist.max() <= 1e-9


# --- analyze_grid / synthesize --------------------------------------------------


def test_analyze_monomial():
    f = analyze_grid(BoundaryGrid.sample(lambda t: t**2, 64))
    expected = np.zeros(32, complex)
    expected[2] = 1
    np.testing.assert_allclose(f.nonneg, expected, atol=1e-13)
    np.testing.assert_allclose(f.neg, 0, atol=1e-13)


def test_analyze_inverse_monomial():
    f = analyze_grid(BoundaryGrid.sample(lambda t: 3 / t, 64))
    assert f.coefficient(-1) == pytest.approx(3, abs=1e-13)
    others = np.concatenate([f.neg[1:], f.nonneg])
    np.testing.assert_allclose(others, 0, atol=1e-13)


def test_analyze_simple_pole_geometric_tail():
    f = analyze_grid(BoundaryGrid.sample(lambda t: 1 / (t - 0.5), 1024))
    k = np.arange(1, 200)
    np.testing.assert_allclose(f.neg[:199], 0.5 ** (k - 1), atol=1e-12)
    np.testing.assert_allclose(f.nonneg, 0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([64, 128, 256]))
def test_round_trip_band_limited(seed, n):
    rng = np.random.default_rng(seed)
    K = n // 2 - 1
    f = LaurentSeries(
        neg=rng.normal(size=K) + 1j * rng.normal(size=K),
        nonneg=rng.normal(size=K + 1) + 1j * rng.normal(size=K + 1),
    )
    g = synthesize(f, n)
    back = synthesize(analyze_grid(g), n)
    assert np.max(np.abs(back.values - g.values)) <= 1e-12 * np.max(np.abs(g.values))


def test_grid_size_must_be_power_of_two():
    with pytest.raises(ValueError):
        BoundaryGrid(np.ones(100))
    with pytest.raises(ValueError):
        BoundaryGrid(np.ones(32))


def test_laurent_evaluation_matches_samples():
    f = LaurentSeries(neg=[3.0, 0.5j], nonneg=[1.0, 0, 2.0])
    t = unit_circle(64)
    np.testing.assert_allclose(f(t), f.on_circle(64), atol=1e-13)


# --- TaylorSeries / RationalFn --------------------------------------------------


def test_series_divide_geometric():
    np.testing.assert_allclose(series_divide([1.0], [1.0, -0.5], 6), 0.5 ** np.arange(7))


def test_taylor_tail_warning():
    slow = TaylorSeries(0.99 ** np.arange(50))
    with pytest.warns(RuntimeWarning):
        assert not slow.check_tail()
    assert TaylorSeries(0.1 ** np.arange(40)).check_tail()


@settings(max_examples=40, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=4), st.lists(cplx, min_size=1, max_size=4), cplx)
def test_rational_eval_is_quotient(num, den, z):
    if ComplexPoly(den).is_zero():
        with pytest.raises(ZeroDivisionError):
            RationalFn(ComplexPoly(num), ComplexPoly(den))
        return
    r = RationalFn(ComplexPoly(num), ComplexPoly(den))
    d = eval_poly(r.den, z)
    if abs(d) <= 1e-6:
        return
    assert r(z) == pytest.approx(eval_poly(r.num, z) / d, rel=1e-12, abs=1e-12)


def test_rational_normalization_cancels_common_factor():
    r = RationalFn(ComplexPoly.from_roots([0.2, 0.7]), ComplexPoly.from_roots([0.2, -0.4], lead=2.0))
    n = r.normalized()
    assert n.den.degree == 1 and n.num.degree == 1
    assert n.den.leading == pytest.approx(1)
    z = 0.3 + 0.1j
    assert n(z) == pytest.approx(r(z))


def test_laurent_at_infinity_of_simple_pole():
    r = RationalFn(ComplexPoly([1.0]), ComplexPoly([-0.5, 1.0]))
    np.testing.assert_allclose(r.laurent_at_infinity(8), 0.5 ** np.arange(8))


# --- function-spec documents ----------------------------------------------------


def test_parse_rational_spec():
    r = parse_function_spec({"type": "rational", "num": [[1, 0]], "den": [[-0.5, 0], [1, 0]]})
    assert isinstance(r, RationalFn)
    assert r(2.0) == pytest.approx(1 / 1.5)


def test_parse_laurent_and_samples():
    f = parse_function_spec({"type": "laurent", "neg": [[3, 0]], "nonneg": []})
    assert f.coefficient(-1) == 3
    vals = [[1.0, 0.0]] * 64
    g = parse_function_spec({"type": "samples", "n": 64, "values": vals})
    assert g.N == 64


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"type": "rational", "num": [[1, 0]]}, "den"),
        ({"type": "rational", "num": [[1, 0]], "den": [[0, 0]]}, "den"),
        ({"type": "laurent", "neg": [1, 2], "nonneg": []}, "neg"),
        ({"type": "samples", "n": 64, "values": [[1, 0]]}, "values"),
        ({"type": "samples", "n": 48, "values": [[1, 0]] * 48}, "n"),
        ({"type": "spline"}, "type"),
    ],
)
def test_parse_errors_name_the_field(doc, field):
    with pytest.raises(SpecError) as info:
        parse_function_spec(doc)
    assert info.value.field == field
