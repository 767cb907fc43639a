import numpy as np
import pytest

from horolab.fitting import (
    DegenerateFitError,
    fit_decay_report,
    geometric_grid,
    least_squares_loglog,
    robust_loglog,
)


def test_plain_fit_recovers_exact_power_law():
    ys = geometric_grid(0.25, 0.5, 12)
    errs = 3.0 * ys**0.7
    fit = least_squares_loglog(ys, errs)
    assert fit.slope == pytest.approx(0.7, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.stderr == pytest.approx(0.0, abs=1e-12)


def test_robust_fit_equals_plain_on_clean_data():
    ys = geometric_grid(0.5, 0.5, 10)
    errs = ys**0.5
    plain = least_squares_loglog(ys, errs)
    robust = robust_loglog(ys, errs)
    assert robust.slope == plain.slope
    assert robust.kept.all()


def test_robust_fit_rejects_oscillation_nulls():
    # power law times |cos| with one near-zero: the null corrupts the plain
    # fit but is dropped by the robust one
    ys = geometric_grid(0.25, 0.5, 12)
    osc = np.abs(np.cos(np.log(ys) * 1.7 + 0.3))
    osc[4] = 1e-6
    errs = ys**0.5 * np.maximum(osc, 1e-6)
    plain = least_squares_loglog(ys, errs)
    robust = robust_loglog(ys, errs)
    assert abs(robust.slope - 0.5) < abs(plain.slope - 0.5)
    assert not robust.kept[4]


def test_degenerate_on_single_abscissa():
    with pytest.raises(DegenerateFitError):
        least_squares_loglog([1.0, 1.0], [2.0, 3.0])


def test_report_status_for_flat_series():
    # identically zero: degenerate; flat but nonzero: no decay, inconclusive
    rep = fit_decay_report(geometric_grid(0.5, 0.5, 8), np.zeros(8))
    assert rep.status == "degenerate"
    rep = fit_decay_report(geometric_grid(0.5, 0.5, 8), np.full(8, 0.25))
    assert rep.status == "inconclusive"
    assert rep.exponent == 0.0


def test_report_status_inconclusive_when_noise_dominates():
    ys = geometric_grid(0.5, 0.5, 8)
    errs = np.full(8, 1e-4)
    errs[0] = 2e-4
    bars = np.full(8, 1e-3)  # everything below 3 error bars
    rep = fit_decay_report(ys, errs, bars)
    assert rep.status == "inconclusive"


def test_report_rows_sorted_and_csv_round_trip():
    ys = np.array([0.1, 0.4, 0.2])
    errs = np.array([0.1**0.5, 0.4**0.5, 0.2**0.5])
    rep = fit_decay_report(ys, errs)
    assert (np.diff(rep.params) < 0).all()
    csv = rep.to_csv()
    lines = csv.strip().split("\r\n")
    assert lines[0] == "y,error,error_bar,kept"
    assert len(lines) == 4
    # external least-squares on kept rows reproduces the exponent
    rows = [line.split(",") for line in lines[1:]]
    kept = [r for r in rows if r[3] == "1"]
    fit = least_squares_loglog([float(r[0]) for r in kept], [float(r[1]) for r in kept])
    assert fit.slope == pytest.approx(rep.exponent, abs=1e-9)


def test_geometric_grid_values():
    g = geometric_grid(0.25, 0.5, 3)
    assert np.allclose(g, [0.25, 0.125, 0.0625])
    with pytest.raises(ValueError):
        geometric_grid(1.0, -0.5, 3)
