import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from horolab.measures import (
    Convolution,
    DiracMass,
    FractalMeasure,
    LebesgueUnit,
    MeasureParseError,
    NonArithmeticDigitsError,
    PrecisionLossError,
    b_of_s,
    cvy_bound_for_measure,
    cvy_lower_bound,
    estimate_dim_l1,
    fourier_abs,
    fourier_transform,
    l1_partial_sum,
    parse_measure,
    sample,
    symbol_g,
)

CANTOR3 = FractalMeasure(3, (0, 2))
CANTOR10 = FractalMeasure(10, tuple(range(10)))
CANTOR450 = FractalMeasure(450, tuple(range(447)))


def direct_g(measure: FractalMeasure, xi: float) -> complex:
    w = measure.weight_array
    return sum(
        wi * complex(np.exp(2j * np.pi * d * xi))
        for wi, d in zip(w, measure.digits)
    )


@st.composite
def fractal_measures(draw):
    b = draw(st.integers(2, 16))
    n = draw(st.integers(1, b))
    digits = tuple(sorted(draw(st.permutations(range(b)))[:n]))
    uniform = draw(st.booleans())
    weights = None
    if not uniform and n > 1:
        raw = draw(
            st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)
        )
        total = sum(raw)
        weights = tuple(r / total for r in raw)
        weights = tuple(w + (1.0 - sum(weights)) / n for w in weights)  # renormalize
    shift = draw(st.floats(-2.0, 2.0))
    return FractalMeasure(b, digits, weights, shift)


# ---------------------------------------------------------------------------
# symbol g


def test_g_normalization_and_cancellation():
    assert symbol_g(CANTOR3, 0.0) == pytest.approx(1.0)
    # (1 + e(1/2))/2 = 0 at xi = 1/4 for digits {0, 2}
    assert abs(symbol_g(CANTOR3, 0.25)) < 1e-15


def test_g_matches_direct_sum_for_full_decimal_digits():
    xi = 0.37
    assert symbol_g(CANTOR10, xi) == pytest.approx(direct_g(CANTOR10, xi), abs=1e-13)


@settings(max_examples=40, derandomize=True)
@given(fractal_measures(), st.floats(-30, 30))
def test_g_closed_form_matches_direct_sum(m, xi):
    assert symbol_g(m, xi) == pytest.approx(direct_g(m, xi), abs=1e-10)
    assert abs(symbol_g(m, xi)) <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# Fourier transforms


def test_transform_at_zero_is_one():
    for m in (CANTOR3, LebesgueUnit(), DiracMass(0.7), Convolution(CANTOR3, LebesgueUnit())):
        assert fourier_transform(m, 0.0) == pytest.approx(1.0)


def test_refinement_identity_single_step():
    xi = 1.7
    lhs = fourier_transform(CANTOR3, 3 * xi)
    rhs = symbol_g(CANTOR3, xi) * fourier_transform(CANTOR3, xi)
    assert lhs == pytest.approx(rhs, abs=1e-11)


def test_transform_matches_monte_carlo_oracle():
    xi = 1.0
    n = 200_000
    xs = sample(CANTOR3, 40, n, seed=123)
    vals = np.exp(2j * np.pi * xi * xs)
    mc = vals.mean()
    se = math.sqrt((vals.real.var() + vals.imag.var()) / n)
    assert abs(fourier_transform(CANTOR3, xi) - mc) < 3 * se


def test_lebesgue_transform_closed_form():
    # e(xi/2) sin(pi xi)/(pi xi); exactly 0 at nonzero integers
    assert fourier_transform(LebesgueUnit(), 5.0) == 0.0
    xi = 0.3
    expect = np.exp(1j * np.pi * xi) * np.sin(np.pi * xi) / (np.pi * xi)
    assert fourier_transform(LebesgueUnit(), xi) == pytest.approx(expect)


def test_convolution_transform_is_product():
    conv = Convolution(CANTOR3, DiracMass(0.4))
    xis = np.linspace(-8, 8, 41)
    lhs = fourier_transform(conv, xis)
    rhs = fourier_transform(CANTOR3, xis) * fourier_transform(DiracMass(0.4), xis)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-15)


@settings(max_examples=40, derandomize=True)
@given(fractal_measures(), st.floats(-30, 30))
def test_transform_bounds_and_hermitian_symmetry(m, xi):
    val = fourier_transform(m, xi)
    assert abs(val) <= 1.0 + 1e-11
    assert fourier_transform(m, -xi) == pytest.approx(val.conjugate(), abs=1e-12)


@settings(max_examples=30, derandomize=True)
@given(fractal_measures(), st.floats(-20, 20))
def test_refinement_identity_property(m, xi):
    lhs = fourier_transform(m, xi) * np.exp(-2j * np.pi * xi * m.shift)
    sub = xi / m.base
    rhs = symbol_g(m, sub) * fourier_transform(m, sub) * np.exp(-2j * np.pi * sub * m.shift)
    assert lhs == pytest.approx(rhs, abs=1e-11)


@settings(max_examples=30, derandomize=True)
@given(fractal_measures(), st.floats(-20, 20))
def test_shift_leaves_modulus_invariant(m, xi):
    unshifted = FractalMeasure(m.base, m.digits, m.weights, 0.0)
    # the modulus path drops phases entirely: exact equality
    assert fourier_abs(m, np.array([xi]))[0] == fourier_abs(unshifted, np.array([xi]))[0]
    assert abs(fourier_transform(m, xi)) == pytest.approx(
        abs(fourier_transform(unshifted, xi)), abs=1e-13
    )


def test_abs_path_agrees_with_transform_path():
    xis = np.linspace(-40, 40, 201)
    for m in (CANTOR3, CANTOR450, Convolution(CANTOR3, LebesgueUnit())):
        assert np.allclose(
            fourier_abs(m, xis), np.abs(fourier_transform(m, xis)), atol=1e-12
        )


# ---------------------------------------------------------------------------
# Sampling


def test_sample_dirac_exact():
    assert np.array_equal(sample(DiracMass(0.25), 7, 3, seed=5), [0.25, 0.25, 0.25])


def test_sample_cantor_symmetry_mean():
    n = 100_000
    xs = sample(CANTOR3, 30, n, seed=42)
    # digits {0,2}: attractor symmetric about 1/2, Var(x) = 1/8
    assert abs(xs.mean() - 0.5) < 3 * math.sqrt(0.125 / n)
    assert xs.min() >= 0.0 and xs.max() <= 1.0


def test_sample_cross_oracle_large_base():
    n = 100_000
    xs = sample(CANTOR450, 8, n, seed=99)
    vals = np.exp(2j * np.pi * xs)
    se = math.sqrt((vals.real.var() + vals.imag.var()) / n)
    bias = 2 * np.pi * 450.0**-8
    assert abs(vals.mean() - fourier_transform(CANTOR450, 1.0)) < 3 * se + bias


def test_sample_convolution_adds_children():
    conv = Convolution(DiracMass(0.5), DiracMass(0.25))
    assert np.allclose(sample(conv, 5, 4, seed=0), 0.75)


def test_sample_depth_underflow_rejected():
    with pytest.raises(PrecisionLossError):
        sample(CANTOR10, 400, 10, seed=0)


def test_sample_deterministic_given_seed():
    a = sample(CANTOR3, 20, 1000, seed=7)
    b = sample(CANTOR3, 20, 1000, seed=7)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# Partial sums and dimension


def test_l1_partial_sum_dirac_and_lebesgue():
    assert l1_partial_sum(DiracMass(0.0), 5) == pytest.approx(11.0)
    assert l1_partial_sum(LebesgueUnit(), 100) == pytest.approx(1.0)


def test_l1_partial_sum_matches_termwise_transform():
    X = 1000
    m_grid = np.arange(-X, X + 1, dtype=float)
    termwise = np.abs(fourier_transform(CANTOR3, m_grid)).sum()
    assert l1_partial_sum(CANTOR3, X) == pytest.approx(termwise, rel=1e-12)


def test_l1_partial_sum_monotone_in_X():
    vals = [l1_partial_sum(CANTOR3, X) for X in (10, 50, 100, 500)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[0] >= 1.0


def test_star_sum_dominates_plain():
    for m in (CANTOR3, FractalMeasure(5, (0, 3), None, 0.3)):
        plain = l1_partial_sum(m, 50, star=False)
        star = l1_partial_sum(m, 50, star=True, theta_grid=64)
        assert star >= plain - 1e-12


def test_dimension_dirac_is_zero():
    grid = np.unique(np.geomspace(100, 10**4, 8).astype(int))
    est = estimate_dim_l1(DiracMass(0.0), grid)
    assert est.dimension == pytest.approx(0.0, abs=5e-3)


def test_dimension_lebesgue_is_one_and_degenerate_flagged():
    grid = np.unique(np.geomspace(100, 10**4, 8).astype(int))
    est = estimate_dim_l1(LebesgueUnit(), grid)
    assert est.degenerate
    assert est.dimension == pytest.approx(1.0)


def test_dimension_cantor450_beats_cvy_bound():
    grid = np.unique(np.round(np.geomspace(100, 10**6, 13)).astype(int))
    est = estimate_dim_l1(CANTOR450, grid)
    assert est.dimension >= cvy_lower_bound(450, 447) - 0.05
    assert est.stderr < 0.05


def test_dimension_grid_validation():
    with pytest.raises(ValueError):
        estimate_dim_l1(CANTOR3, [100, 200, 300])  # too few points
    with pytest.raises(ValueError):
        estimate_dim_l1(CANTOR3, [100, 200, 400, 800])  # under two decades


# ---------------------------------------------------------------------------
# Closed-form bounds


def test_cvy_bound_values():
    assert cvy_lower_bound(450, 447) > 0.609375
    assert cvy_lower_bound(3, 2) < 0.0
    b = 37
    expect = 1.0 - math.log(4 + math.log(2 * b)) / math.log(b)
    assert cvy_lower_bound(b, b) == pytest.approx(expect)


def test_cvy_refuses_non_progression_digits():
    crooked = FractalMeasure(10, (0, 1, 5))
    with pytest.raises(NonArithmeticDigitsError):
        cvy_bound_for_measure(crooked)
    assert cvy_bound_for_measure(crooked, allow_non_ap=True) == cvy_lower_bound(10, 3)


def scan_b_of_s(s: float, limit: int = 10**5) -> int:
    thresh = 39.0 / 64.0
    for b in range(3, limit):
        if s - math.log(4 + math.log(2 * b)) / math.log(b) > thresh and b - b**s >= 2:
            return b
    raise AssertionError("scan exhausted")


@pytest.mark.parametrize("s", [0.95, 0.9999, 0.9])
def test_b_of_s_matches_exhaustive_scan(s):
    b = b_of_s(s)
    assert b == scan_b_of_s(s)
    # postconditions at b, and at least one failure at b - 1
    thresh = 39.0 / 64.0
    assert s - math.log(4 + math.log(2 * b)) / math.log(b) > thresh
    assert b - b**s >= 2.0
    prev = b - 1
    assert (
        s - math.log(4 + math.log(2 * prev)) / math.log(prev) <= thresh
        or prev - prev**s < 2.0
    )


def test_b_of_s_not_monotone_near_one():
    # the b - b^s >= 2 constraint dominates as s -> 1, so b(s) turns back up
    assert b_of_s(0.9999) > b_of_s(0.95)


def test_b_of_s_domain():
    with pytest.raises(ValueError):
        b_of_s(0.5)
    with pytest.raises(ValueError):
        b_of_s(1.0)
    # s = 0.75 needs b beyond the configured ceiling: signalled, not silent
    with pytest.raises(ValueError, match="ceiling"):
        b_of_s(0.75)


# ---------------------------------------------------------------------------
# Literals


def test_parse_round_trip_variants():
    m = parse_measure("cantor:450:0..446")
    assert isinstance(m, FractalMeasure) and m.base == 450 and m.n_digits == 447
    m = parse_measure("cantor:3:0,2+0.5")
    assert m.shift == 0.5
    m = parse_measure("leb * dirac:0.3")
    assert isinstance(m, Convolution)
    m = parse_measure("leb+-0.25")
    assert isinstance(m, Convolution) and m.right.point == -0.25
    assert isinstance(parse_measure("dirac:2.5"), DiracMass)


@pytest.mark.parametrize(
    "bad, production",
    [
        ("cantor:3", "<atom>"),
        ("cantor:x:0,2", "<atom>"),
        ("cantor:3:0,copper", "<digits>"),
        ("gauss:1", "<atom>"),
        ("leb+sideways", "<shift>"),
        ("cantor:3:5..2", "<digits>"),
    ],
)
def test_parse_errors_name_the_production(bad, production):
    with pytest.raises(MeasureParseError) as err:
        parse_measure(bad)
    assert production in str(err.value)


def test_invalid_measure_construction():
    with pytest.raises(ValueError):
        FractalMeasure(3, (0, 3))  # digit out of range
    with pytest.raises(ValueError):
        FractalMeasure(3, (2, 0))  # not increasing
    with pytest.raises(ValueError):
        FractalMeasure(3, (0, 2), (0.9, 0.2))  # weights off normalization


def test_sample_weighted_digits_mean():
    # weights (1/4, 3/4) on digits {0, 2}: E[digit] = 1.5, E[x] = 0.75
    m = FractalMeasure(3, (0, 2), (0.25, 0.75))
    n = 50_000
    xs = sample(m, 30, n, seed=8)
    # Var(x) = Var(d) * sum 9^-j = (4*3/16) / 8 = 3/32
    assert abs(xs.mean() - 0.75) < 3 * math.sqrt(3 / 32 / n)


def test_weighted_transform_matches_monte_carlo():
    m = FractalMeasure(5, (0, 2, 4), (0.5, 0.25, 0.25))
    xi = 2.3
    n = 100_000
    vals = np.exp(2j * np.pi * xi * sample(m, 30, n, seed=12))
    se = math.sqrt((vals.real.var() + vals.imag.var()) / n)
    assert abs(fourier_transform(m, xi) - vals.mean()) < 3 * se


def test_star_estimate_reports_grid_error():
    grid = np.unique(np.geomspace(100, 10**4, 6).astype(int))
    est = estimate_dim_l1(CANTOR3, grid, star=True, theta_grid=16)
    assert est.mode == "star"
    assert est.theta_grid_error == pytest.approx(2 * np.pi * 10**4 / 16)
    assert (est.sums >= 1.0).all()
