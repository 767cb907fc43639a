"""End-to-end experiment drivers: equidistribution sweeps and identity checks.

run_equidistribution pushes a fractal measure along horocycles of shrinking
height, measures the deviation of the test-function average from its
hyperbolic-measure mean, and fits the decay exponent.  When the fit signal
drowns in Monte-Carlo noise on most of the grid the report is flagged
inconclusive rather than quoting a meaningless exponent.

run_basis_identity_check verifies that the measured horocycle average of an
Eisenstein observable matches its Fourier-expansion prediction

    constant_term(y) + sum_{0 < |m| <= M(y)} a_m(y) e(m x0) mu_hat(m/q),

where the coefficient sum extends to the larger of y^-sigma and the
K-Bessel horizon (beyond which terms vanish to working precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import measures as _measures
from .automorphic import (
    EisensteinParams,
    K_NEGLIGIBLE_X,
    TWO_PI,
    bessel_K_imag,
    constant_term,
    sigma_range,
)
from .fitting import DecayReport, fit_decay_report, geometric_grid
from .modular import HorocycleConfig, mX_integral, mu_y_value
from .testfunctions import EisensteinTest, parse_test_function


@dataclass
class ExperimentConfig:
    """Configuration shared by the experiment drivers."""

    measure: str = "leb"
    test: str = "eisenstein:t=1"
    y_max: float = 0.25
    y_ratio: float = 0.5
    y_count: int = 15
    x0: float = 0.0
    q: int = 1
    method: str = "montecarlo"
    budget: int = 10**6
    seed: int = 0
    sigma: float = 1.2
    tol: float = 1e-6
    tail_tol: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.y_max <= 1.0:
            raise ValueError("y_max must lie in (0, 1]")
        if not 0.0 < self.y_ratio < 1.0:
            raise ValueError("y_ratio must lie in (0, 1) for a decreasing grid")
        if self.y_count < 1:
            raise ValueError("y_count must be positive")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        if self.q < 1:
            raise ValueError("q must be >= 1")

    @property
    def y_grid(self) -> np.ndarray:
        return geometric_grid(self.y_max, self.y_ratio, self.y_count)

    def echo(self) -> dict:
        return {k: v for k, v in sorted(asdict(self).items())}


def _sub_seed(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_equidistribution(cfg: ExperimentConfig) -> DecayReport:
    """Decay of |mu_y(phi) - m_X(phi)| over the configured y-grid.

    The reference m_X(phi) is the analytic mean when the test function
    declares one (0 for the Eisenstein observable), else a Monte-Carlo
    estimate with ten times the per-y budget; its standard error joins
    the per-row error bars.
    """
    measure = _measures.parse_measure(cfg.measure)
    phi = parse_test_function(cfg.test)

    ref_err = 0.0
    if getattr(phi, "mean", None) is not None:
        reference = phi.mean
    else:
        reference, ref_err = mX_integral(phi, 10 * cfg.budget, _sub_seed(cfg.seed, 10**6))

    ys = cfg.y_grid
    errors = np.empty(ys.size)
    bars = np.empty(ys.size)
    for k, y in enumerate(ys):
        hc = HorocycleConfig(x0=cfg.x0, q=cfg.q, y=float(y))
        value, err = mu_y_value(
            measure, phi, hc,
            method=cfg.method, budget=cfg.budget,
            seed=_sub_seed(cfg.seed, k), tol=cfg.tol,
        )
        errors[k] = abs(value - reference)
        bars[k] = err + ref_err
    from . import __version__

    report = fit_decay_report(
        ys, errors, bars,
        metadata={
            "kind": "equidistribution",
            "version": __version__,
            "measure": cfg.measure,
            "test": cfg.test,
            "reference": repr(reference),
        },
        param_name="y",
    )
    return report


@dataclass
class BasisCheckReport:
    """Per-height discrepancy between measured and series-predicted mu_y."""

    ys: np.ndarray
    measured: np.ndarray          # complex mu_y values
    predicted: np.ndarray         # complex series values
    discrepancies: np.ndarray
    quad_errors: np.ndarray
    max_discrepancy: float
    envelope_constant: float      # max discrepancy / sqrt(y)
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["y,mu_re,mu_im,series_re,series_im,discrepancy"]
        for i, y in enumerate(self.ys):
            lines.append(
                ",".join(
                    repr(float(v))
                    for v in (
                        y,
                        self.measured[i].real, self.measured[i].imag,
                        self.predicted[i].real, self.predicted[i].imag,
                        self.discrepancies[i],
                    )
                )
            )
        return "\r\n".join(lines) + "\r\n"


def eisenstein_series_prediction(
    measure,
    params: EisensteinParams,
    height: float,
    x0: float,
    q: int,
    sigma: float,
    tail_tol: float = 1e-12,
) -> complex:
    """constant_term(height) + coefficient sum against mu_hat(m/q) phases.

    `height` is the height at which the horocycle points actually sit
    (y/q when the base point carries a(1/q)).  The coefficient sum runs to
    the larger of height^-sigma and the K-Bessel horizon, so omitted terms
    are zero to working precision.
    """
    m_max = max(
        math.ceil(height ** (-sigma)),
        math.floor(K_NEGLIGIBLE_X / (TWO_PI * height)),
    )
    m = np.arange(1, m_max + 1)
    tau = sigma_range(2j * params.t, m_max)
    lam = m ** (-1j * params.t) * tau / params.zeta_1p2it
    a_m = params.whittaker_norm * lam * math.sqrt(height) * bessel_K_imag(
        params.t, TWO_PI * m * height
    )
    mu_hat = _measures.fourier_transform(measure, m / q, tail_tol)
    phases = np.exp(2j * np.pi * m * x0)
    # +-m pairs: a_m is even in m and mu_hat(-u) conjugates for real measures
    total = np.sum(a_m * 2.0 * np.real(phases * mu_hat))
    return complex(constant_term(height, params) + total)


def run_basis_identity_check(cfg: ExperimentConfig) -> BasisCheckReport:
    """Compare mu_y of the Eisenstein observable against its expansion."""
    measure = _measures.parse_measure(cfg.measure)
    phi = parse_test_function(cfg.test)
    if not isinstance(phi, EisensteinTest):
        raise ValueError("basis identity check requires an eisenstein test function")
    complex_phi = EisensteinTest(t=phi.t, component="complex")
    params = complex_phi.params

    ys = cfg.y_grid
    measured = np.empty(ys.size, dtype=complex)
    predicted = np.empty(ys.size, dtype=complex)
    quad = np.empty(ys.size)
    for k, y in enumerate(ys):
        hc = HorocycleConfig(x0=cfg.x0, q=cfg.q, y=float(y))
        value, err = mu_y_value(
            measure, complex_phi, hc,
            method=cfg.method, budget=cfg.budget,
            seed=_sub_seed(cfg.seed, k), tol=cfg.tol,
        )
        measured[k] = value
        quad[k] = err
        predicted[k] = eisenstein_series_prediction(
            measure, params, float(y) / cfg.q, cfg.x0, cfg.q, cfg.sigma, cfg.tail_tol
        )
    disc = np.abs(measured - predicted)
    return BasisCheckReport(
        ys=ys,
        measured=measured,
        predicted=predicted,
        discrepancies=disc,
        quad_errors=quad,
        max_discrepancy=float(disc.max()),
        envelope_constant=float((disc / np.sqrt(ys)).max()),
        metadata={"kind": "basis_identity", "measure": cfg.measure, "test": cfg.test},
    )
