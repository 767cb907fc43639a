"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines
as they complete.  Criteria 2, 7, and 9 cache their first run so criterion
10 can re-execute them with identical seeds and compare emitted CSV bytes.

Two sub-criteria are implemented faithfully but fail on true numerics
(analysis in the assertion messages): the spectral-gap window [0.40, 0.60]
(5a) and the coefficient tail bound 1e-6 at y = 0.05, sigma = 1.2 (6a).
"""

import io
import math

import numpy as np
import pytest

import horolab as hl
from horolab.automorphic import EisensteinParams, spectral_gap_fit, truncation_tail_mass
from horolab.diophantine import PowerPsi, khintchine_profile
from horolab.experiments import ExperimentConfig, run_basis_identity_check, run_equidistribution
from horolab.measures import FractalMeasure, fourier_transform, sample, symbol_g
from horolab.oscillatory import (
    PhasePolynomial,
    RaisedCosineWindow,
    exponent_fit_oscillatory,
    oscillatory_integral,
)
from horolab.testfunctions import EisensteinTest

from conftest import ACCEPTANCE_LINES

_cache: dict = {}


def record(tag: str, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


# ---------------------------------------------------------------------------
# 1. CVY threshold reproduction


def test_criterion_1_cvy_threshold():
    bound = hl.cvy_lower_bound(450, 447)
    dim_h = math.log(447) / math.log(450)
    ok = bound > 0.609375 and dim_h < 0.9992
    record("1", ok, f"cvy(450,447)={bound:.6f} > 0.609375; dim_H={dim_h:.6f} < 0.9992")
    assert bound > 0.609375
    assert dim_h < 0.9992


# ---------------------------------------------------------------------------
# 2. Fourier oracle equivalence (20 random measures, 1e6-sample Monte Carlo)


def _random_measure(rng) -> FractalMeasure:
    b = int(rng.integers(2, 200))
    n = int(rng.integers(2, min(b, 24) + 1)) if b > 2 else 2
    digits = tuple(sorted(rng.choice(b, size=n, replace=False).tolist()))
    return FractalMeasure(b, digits)


def _criterion_2_run():
    if "c2" in _cache:
        return _cache["c2"]
    rng = np.random.default_rng(31415)
    rows, worst = [], 0.0
    for idx in range(20):
        m = _random_measure(rng)
        xi = float(rng.uniform(0.0, 100.0))
        depth = hl.measures.default_sample_depth(m)
        xs = sample(m, depth, 10**6, seed=rng.integers(2**63))
        vals = np.exp(2j * np.pi * xi * xs)
        mc = complex(vals.mean())
        se = math.sqrt((vals.real.var() + vals.imag.var()) / vals.size)
        exact = fourier_transform(m, xi)
        rows.append((idx, m.base, m.n_digits, xi, exact, mc, se))
        worst = max(worst, abs(exact - mc) / (3 * se))
    buf = io.StringIO()
    buf.write("idx,base,n_digits,xi,prod_re,prod_im,mc_re,mc_im,se\r\n")
    for idx, b, n, xi, exact, mc, se in rows:
        buf.write(
            f"{idx},{b},{n},{xi!r},{exact.real!r},{exact.imag!r},"
            f"{mc.real!r},{mc.imag!r},{se!r}\r\n"
        )
    _cache["c2"] = (rows, worst, buf.getvalue())
    return _cache["c2"]


def test_criterion_2_fourier_oracle_equivalence():
    rows, worst, _ = _criterion_2_run()
    ok = worst <= 1.0
    record("2", ok, f"20 measures: max |prod - mc| = {worst:.3f} x (3 SE)")
    for idx, b, n, xi, exact, mc, se in rows:
        assert abs(exact - mc) <= 3 * se, (b, n, xi)


# ---------------------------------------------------------------------------
# 3. Refinement and shift identities across a 1e3-point sweep


def test_criterion_3_refinement_and_shift_identities():
    xi = np.linspace(0.0, 50.0, 1000)
    worst = 0.0
    for base, digits in ((3, (0, 2)), (10, tuple(range(9))), (450, tuple(range(447)))):
        m0 = FractalMeasure(base, digits)
        ms = FractalMeasure(base, digits, None, 0.37)
        lhs = fourier_transform(m0, xi)
        rhs = symbol_g(m0, xi / base) * fourier_transform(m0, xi / base)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
        worst = max(
            worst,
            float(np.abs(np.abs(fourier_transform(ms, xi)) - np.abs(lhs)).max()),
        )
    ok = worst < 1e-10
    record("3", ok, f"max identity violation {worst:.2e} < 1e-10 over 1000-point sweep")
    assert worst < 1e-10


# ---------------------------------------------------------------------------
# 4. Constant-term identity and the classical decay rate


def test_criterion_4_constant_term_identity():
    cfg = ExperimentConfig(
        measure="leb", test="eisenstein:t=1",
        y_max=0.25, y_ratio=0.5, y_count=11,
        method="cylinder", budget=10**6, seed=4, tol=1e-8,
    )
    basis = run_basis_identity_check(cfg)
    p = EisensteinParams(1.0)
    direct = max(
        abs(mu - hl.constant_term(float(y), p))
        for y, mu in zip(basis.ys, basis.measured)
    )
    decay = run_equidistribution(cfg)
    ok = direct < 1e-6 and abs(decay.exponent - 0.5) <= 0.03
    record(
        "4", ok,
        f"max |mu_y - constant term| = {direct:.2e} < 1e-6; "
        f"fitted eta = {decay.exponent:.4f} in 0.50 +- 0.03",
    )
    assert direct < 1e-6
    assert abs(decay.exponent - 0.5) <= 0.03


# ---------------------------------------------------------------------------
# 5. Spectral-gap diagnostic


def test_criterion_5a_spectral_gap_window():
    ys = 2.0 ** -np.arange(3, 13)
    report = spectral_gap_fit(EisensteinTest(1.0, component="complex"), ys)
    ok = 0.40 <= report.exponent <= 0.60
    record("5a", ok, f"sup-coefficient decay exponent {report.exponent:.4f} vs window [0.40, 0.60]")
    assert 0.40 <= report.exponent <= 0.60, (
        f"measured exponent {report.exponent:.4f} over y in 2^-3..2^-12. "
        "The supremum tracks max_m |tau_2it(m)|, which grows like X^0.22 "
        "across m <= 4096 (1.54 at X=8 up to 6.04 at X=4096); with the "
        "divisor factor frozen to 1 the same pipeline fits 0.47. The "
        "asymptotic 1/2-up-to-logs regime is out of reach on this grid, "
        "so the stated window cannot be met by a faithful implementation."
    )


def test_criterion_5b_coefficients_match_series():
    phi = EisensteinTest(1.0, component="complex")
    p = phi.params
    worst = 0.0
    for y in (0.2, 0.05):
        for m in range(1, 21):
            got = hl.horocycle_fourier_coeff(phi, m, y, 4096)
            worst = max(worst, abs(got - p.fourier_coefficient(m, y)))
    ok = worst < 1e-7
    record("5b", ok, f"numeric vs analytic coefficients: max diff {worst:.2e} < 1e-7")
    assert worst < 1e-7


# ---------------------------------------------------------------------------
# 6. Truncation tail mass


def test_criterion_6a_tail_mass_shallow():
    p = EisensteinParams(1.0)
    tail = truncation_tail_mass(p, 0.05, 1.2)
    ok = tail < 1e-6
    record("6a", ok, f"tail(y=0.05, sigma=1.2) = {tail:.3e} vs bound 1e-6")
    assert tail < 1e-6, (
        f"true tail mass is {tail:.3e}: the first omitted term sits at "
        "m = 37 where 2 pi m y = 11.6 and K_it only supplies e^-11.6 ~ 9e-6 "
        "of decay, so the whole tail is ~8e-5 under any O(1) normalization "
        "of the Whittaker profile. The 1e-6 bound needs sigma >= 1.31 at "
        "this height; at the stated sigma = 1.2 it cannot hold."
    )


def test_criterion_6b_tail_mass_deep():
    p = EisensteinParams(1.0)
    tail = truncation_tail_mass(p, 0.01, 1.5)
    ok = tail < 1e-12
    record("6b", ok, f"tail(y=0.01, sigma=1.5) = {tail:.3e} < 1e-12")
    assert tail < 1e-12


# ---------------------------------------------------------------------------
# 7. Fractal equidistribution (headline experiment)


def _criterion_7_run():
    if "c7" in _cache:
        return _cache["c7"]
    cfg = ExperimentConfig(
        measure="cantor:450:0..446", test="eisenstein:t=1",
        y_max=0.25, y_ratio=0.5, y_count=15,
        method="montecarlo", budget=10**6, seed=2024,
    )
    report = run_equidistribution(cfg)
    _cache["c7"] = (report, report.to_csv())
    return _cache["c7"]


def test_criterion_7_fractal_equidistribution():
    report, _ = _criterion_7_run()
    decreasing = float(np.max(report.errors[-3:])) < float(np.min(report.errors[:3]))
    ok = (
        report.status == "ok"
        and report.exponent > 0.05
        and report.r2 > 0.9
        and decreasing
    )
    record(
        "7", ok,
        f"eta = {report.exponent:.3f} > 0.05, R2 = {report.r2:.3f} > 0.9, "
        f"errors fall {report.errors[0]:.3f} -> {report.errors[-1]:.4f}",
    )
    assert report.status == "ok", "inconclusive fit must never fabricate an exponent"
    assert report.exponent > 0.05
    assert report.r2 > 0.9
    assert decreasing


# ---------------------------------------------------------------------------
# 8. Stationary phase


def test_criterion_8_stationary_phase():
    w = RaisedCosineWindow(0.0, 1.0)
    x2 = PhasePolynomial((0.0, 0.0, 1.0))
    x3 = PhasePolynomial((0.0, 0.0, 0.0, 1.0))
    fresnel = abs(oscillatory_integral(x2, w, 1e4, tol=1e-9)) * math.sqrt(2e4)
    grid = np.geomspace(10, 10**4, 19)
    beta2 = exponent_fit_oscillatory(x2, w, grid, tol=1e-10).exponent
    beta3 = exponent_fit_oscillatory(x3, w, grid, tol=1e-10).exponent
    ok = abs(fresnel - 1.0) < 0.02 and abs(beta2 - 0.5) <= 0.05 and abs(beta3 - 1 / 3) <= 0.05
    record(
        "8", ok,
        f"|I| sqrt(2 xi) = {fresnel:.4f} (w(0)=1 within 2%); "
        f"beta(x^2) = {beta2:.3f}, beta(x^3) = {beta3:.3f}",
    )
    assert abs(fresnel - 1.0) < 0.02
    assert abs(beta2 - 0.5) <= 0.05
    assert abs(beta3 - 1.0 / 3.0) <= 0.05


# ---------------------------------------------------------------------------
# 9. Khintchine profile


def _criterion_9_run():
    if "c9" in _cache:
        return _cache["c9"]
    leb = khintchine_profile(
        hl.parse_measure("leb"), PowerPsi(1.0), 10**4, 1000, seed=101
    )
    cantor = khintchine_profile(
        hl.parse_measure("cantor:450:0..446"), PowerPsi(1.0), 1000, 100_000,
        seed=202, rate_q_max=1000,
    )
    _cache["c9"] = (leb, cantor, leb.to_csv() + cantor.to_csv())
    return _cache["c9"]


def test_criterion_9_khintchine_profile():
    leb, cantor, _ = _criterion_9_run()
    leb_ratio = leb.mean_count / leb.comparison_sum
    dev = float(np.abs(cantor.hit_rates / cantor.two_psi - 1.0).mean())
    ok = abs(leb_ratio - 1.0) <= 0.10 and dev <= 0.15
    record(
        "9", ok,
        f"Lebesgue count ratio {leb_ratio:.4f} within 10%; "
        f"cantor mean |rate/2psi - 1| = {dev:.4f} within 15%",
    )
    assert abs(leb_ratio - 1.0) <= 0.10
    assert dev <= 0.15


# ---------------------------------------------------------------------------
# 10. Determinism: byte-identical CSV on reruns of criteria 2, 7, 9


def test_criterion_10_determinism():
    _, _, csv2 = _criterion_2_run()
    _, csv7 = _criterion_7_run()
    _, _, csv9 = _criterion_9_run()
    _cache.clear()
    _, _, csv2b = _criterion_2_run()
    _, csv7b = _criterion_7_run()
    _, _, csv9b = _criterion_9_run()
    ok = csv2 == csv2b and csv7 == csv7b and csv9 == csv9b
    record("10", ok, "criteria 2, 7, 9 reruns byte-identical: "
           f"{csv2 == csv2b}, {csv7 == csv7b}, {csv9 == csv9b}")
    assert csv2 == csv2b
    assert csv7 == csv7b
    assert csv9 == csv9b
