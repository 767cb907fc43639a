"""Power-law decay fitting and the DecayReport container.

Decay experiments produce series (parameter, error) with error expected to
behave like C * param^eta.  Many of these series oscillate (constant-term
phases, stationary-phase interference), so a plain least-squares fit of
log(error) against log(param) is corrupted by near-zeros of the oscillating
factor.  The primary exponent reported here therefore comes from an
iterative null-rejecting fit: rows falling more than one e-fold below the
current fit line are treated as oscillation nulls and excluded, and the fit
is repeated until stable.  On non-oscillatory data no row is rejected and
the robust fit coincides with the plain one.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

# Rows more than this many log-units below the fit line count as nulls.
NULL_REJECT_LOGRATIO = 1.0
# Floor for taking logs of error values.
_LOG_FLOOR = 1e-300


class DegenerateFitError(ValueError):
    """All fitted values identical; a slope cannot be estimated."""


@dataclass
class FitResult:
    slope: float
    intercept: float
    stderr: float
    r2: float
    kept: np.ndarray  # boolean mask over the input rows


def least_squares_loglog(params, values, mask=None) -> FitResult:
    """Plain least-squares fit of log(values) against log(params)."""
    params = np.asarray(params, dtype=float)
    values = np.maximum(np.asarray(values, dtype=float), _LOG_FLOOR)
    if mask is None:
        mask = np.ones(params.shape, dtype=bool)
    L = np.log(params[mask])
    E = np.log(values[mask])
    n = L.size
    if n < 2 or np.ptp(L) == 0.0:
        raise DegenerateFitError("need at least two distinct abscissae")
    Lb, Eb = L.mean(), E.mean()
    sxx = np.sum((L - Lb) ** 2)
    slope = float(np.sum((L - Lb) * (E - Eb)) / sxx)
    intercept = float(Eb - slope * Lb)
    resid = E - (slope * L + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((E - Eb) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    stderr = 0.0 if n <= 2 else math.sqrt(ss_res / (n - 2) / sxx)
    return FitResult(slope, intercept, stderr, r2, np.array(mask, dtype=bool))


def robust_loglog(params, values, max_rounds: int = 10) -> FitResult:
    """Null-rejecting log-log fit.

    Iteratively drops rows whose residual is below -NULL_REJECT_LOGRATIO
    (a factor e below the fitted line): those are nulls of an oscillating
    prefactor, not information about the decay rate.  Keeps at least half
    of the rows; if rejection would go further, the last stable fit wins.
    """
    params = np.asarray(params, dtype=float)
    values = np.asarray(values, dtype=float)
    n = params.size
    mask = np.ones(n, dtype=bool)
    fit = least_squares_loglog(params, values, mask)
    for _ in range(max_rounds):
        resid = np.log(np.maximum(values, _LOG_FLOOR)) - (
            fit.slope * np.log(params) + fit.intercept
        )
        new_mask = resid > -NULL_REJECT_LOGRATIO
        if new_mask.sum() < max(4, n // 2):
            break
        if (new_mask == mask).all():
            break
        mask = new_mask
        fit = least_squares_loglog(params, values, mask)
    return FitResult(fit.slope, fit.intercept, fit.stderr, fit.r2, mask)


@dataclass
class DecayReport:
    """Table of (parameter, error, error bar) rows with fitted exponent.

    ``exponent`` is the null-rejecting fit (see module docstring); the rows
    it used are marked in the ``kept`` column of the CSV, so the value is
    reproducible externally by a least-squares fit on exactly those rows.
    ``exponent_plain`` is the all-rows fit.
    """

    params: np.ndarray
    errors: np.ndarray
    error_bars: np.ndarray
    exponent: float
    exponent_stderr: float
    r2: float
    exponent_plain: float
    r2_plain: float
    kept: np.ndarray
    status: str = "ok"  # ok | inconclusive | degenerate | superpolynomial
    metadata: dict = field(default_factory=dict)
    param_name: str = "y"
    value_columns: tuple[str, ...] = ("error", "error_bar")
    extra_columns: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.params, self.errors, self.error_bars))

    def to_csv(self) -> str:
        """RFC-4180-style CSV with mandatory header; floats via repr."""
        buf = io.StringIO()
        cols = [self.param_name, *self.value_columns, *self.extra_columns, "kept"]
        buf.write(",".join(cols) + "\r\n")
        values = [self.errors, self.error_bars][: len(self.value_columns)]
        for i in range(len(self.params)):
            row = [repr(float(self.params[i]))]
            row += [repr(float(v[i])) for v in values]
            row += [repr(float(c[i])) for c in self.extra_columns.values()]
            row.append(str(int(self.kept[i])))
            buf.write(",".join(row) + "\r\n")
        return buf.getvalue()


def fit_decay_report(
    params,
    errors,
    error_bars=None,
    metadata=None,
    param_name: str = "y",
) -> DecayReport:
    """Build a DecayReport for error ~ C*param^eta (eta > 0 means decay).

    Rows are sorted by decreasing parameter.  Status rules:
    degenerate when all errors coincide; inconclusive when more than half
    of the rows are below 3 error bars (noise), or the fitted exponent is
    not positive beyond twice its standard error.
    """
    params = np.asarray(params, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if error_bars is None:
        error_bars = np.zeros_like(errors)
    error_bars = np.asarray(error_bars, dtype=float)
    order = np.argsort(-params)
    params, errors, error_bars = params[order], errors[order], error_bars[order]

    if np.all(errors < 1e-14) or np.allclose(errors, errors[0], rtol=1e-12, atol=0.0):
        # an identically-zero series is degenerate (nothing to fit); a flat
        # nonzero one shows no decay at all: inconclusive, never a fake slope
        status = "degenerate" if np.all(errors < 1e-14) else "inconclusive"
        return DecayReport(
            params, errors, error_bars,
            exponent=0.0, exponent_stderr=0.0, r2=1.0,
            exponent_plain=0.0, r2_plain=1.0,
            kept=np.ones(params.size, dtype=bool),
            status=status, metadata=metadata or {}, param_name=param_name,
        )

    status = "ok"

    plain = least_squares_loglog(params, errors)
    robust = robust_loglog(params, errors)

    noisy = errors < 3.0 * error_bars
    if noisy.sum() > params.size // 2:
        status = "inconclusive"
    elif robust.slope <= 0.0 or robust.slope < 2.0 * robust.stderr:
        status = "inconclusive"

    return DecayReport(
        params, errors, error_bars,
        exponent=robust.slope, exponent_stderr=robust.stderr, r2=robust.r2,
        exponent_plain=plain.slope, r2_plain=plain.r2,
        kept=robust.kept, status=status, metadata=metadata or {},
        param_name=param_name,
    )


def geometric_grid(start: float, ratio: float, count: int) -> np.ndarray:
    """start, start*ratio, ..., length count (ratio in (0,1) for descents)."""
    if count < 1:
        raise ValueError("count must be positive")
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    return start * ratio ** np.arange(count)
