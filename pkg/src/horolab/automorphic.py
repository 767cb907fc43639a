"""Special functions and Eisenstein-series diagnostics.

The weight-zero real-analytic Eisenstein series at spectral parameter t
(Laplace eigenvalue 1/4 + t^2) is evaluated through its classical Fourier
expansion with completed-zeta factors,

    E(x + iy) = y^(1/2+it) + c(t) y^(1/2-it)
              + (4 / xi(1+2it)) sqrt(y) * sum_{n>=1} n^(it) sigma_{-2it}(n)
                K_it(2 pi n y) cos(2 pi n x),

    xi(u) = pi^(-u/2) Gamma(u/2) zeta(u),   c(t) = xi(1-2it)/xi(1+2it),

so |c(t)| = 1 on the unitary axis and only zeta values on the 1-line are
ever needed (xi(1-2it) is the conjugate of xi(1+2it) for real t).  On
reduced points y >= sqrt(3)/2 the series truncated at M = 16 carries a
tail below 1e-14.

K_it(x) = int_0^inf exp(-x cosh u) cos(t u) du is computed by trapezoid
quadrature after the doubly exponential substitution u = sinh v; the
integrand is even in v, so the rule converges superalgebraically.

Only the continuous (Eisenstein) spectrum is implemented.  Its Hecke
eigenvalues are divisor sums, which obey the Ramanujan-type bound m^eps;
on the cuspidal spectrum the best unconditional exponent toward that
bound is the Kim-Sarnak 7/64, which is why generic spectral-gap heuristics
quote the decay exponent 1/2 - 7/64 = 25/64 rather than 1/2.  Every
diagnostic here runs on the Eisenstein side, where 7/64 plays no role
beyond this remark.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .fitting import DecayReport, fit_decay_report
from .modular import ModularPoint, reduce_many

TWO_PI = 2.0 * math.pi
SQRT3_HALF = math.sqrt(3.0) / 2.0
K_UNDERFLOW_X = 700.0           # exp(-x) underflows well before this
K_NEGLIGIBLE_X = 46.0           # K_it(x) < 4e-21 beyond; dropped in series
EISENSTEIN_TRUNCATION = 16      # series length on reduced points
MAX_BESSEL_ORDER = 30.0


class PoleProximityError(ValueError):
    """Evaluation point too close to the pole of zeta at s = 1."""


# ---------------------------------------------------------------------------
# Complex Gamma (Lanczos) and zeta on Re(s) >= 1

_LANCZOS_G = 607.0 / 128.0
_LANCZOS_COEF = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    3.3994649984811888699e-5,
    4.6523628927048575665e-5,
    -9.8374475304879564677e-5,
    1.5808870322491248884e-4,
    -2.1026444172410488319e-4,
    2.1743961811521264320e-4,
    -1.6431810653676389022e-4,
    8.4418223983852743293e-5,
    -2.6190838401581408670e-5,
    3.6899182659531622704e-6,
)


def log_gamma(z: complex) -> complex:
    """log Gamma by the 15-term Lanczos sum (g = 607/128).

    Relative error of exp(log_gamma) is ~1e-14 for |Im z| <= 60; the
    reflection formula covers Re(z) < 1/2.
    """
    z = complex(z)
    if z.real < 0.5:
        # log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
        return cmath.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - log_gamma(1.0 - z)
    z = z - 1.0
    acc = complex(_LANCZOS_COEF[0])
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return (
        0.5 * math.log(2.0 * math.pi)
        + (z + 0.5) * cmath.log(t)
        - t
        + cmath.log(acc)
    )


def gamma_complex(z: complex) -> complex:
    return cmath.exp(log_gamma(z))


_BERNOULLI_2K = (
    1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730,
    7.0 / 6, -3617.0 / 510, 43867.0 / 798, -174611.0 / 330, 854513.0 / 138,
    -236364091.0 / 2730, 8553103.0 / 6, -23749461029.0 / 870,
)


def zeta_1line(s: complex, n_terms: int = 100, n_corrections: int = 14) -> complex:
    """Riemann zeta by Euler-Maclaurin, for Re(s) >= 1, |Im(s)| <= 62.

    zeta(s) = sum_{n<=N} n^-s + N^(1-s)/(s-1) - N^-s/2
            + sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) * N^(-s-2k+1).
    """
    s = complex(s)
    if s.real < 1.0 - 1e-12:
        raise ValueError("zeta_1line requires Re(s) >= 1")
    if abs(s - 1.0) < 1e-6:
        raise PoleProximityError("s within 1e-6 of the pole at 1")
    if abs(s.imag) > 62.0:
        raise ValueError("zeta_1line validated only for |Im(s)| <= 62")
    N = n_terms
    n = np.arange(1, N + 1, dtype=float)
    total = complex(np.sum(n ** (-s)))
    total += N ** (1.0 - s) / (s - 1.0)
    total -= 0.5 * N ** (-s)
    rising = s  # s(s+1)...(s+2k-2), updated per correction term
    fact = 1.0
    for k in range(1, n_corrections + 1):
        fact *= (2 * k - 1) * (2 * k)
        total += _BERNOULLI_2K[k - 1] / fact * rising * N ** (-s - 2 * k + 1)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return total


def completed_xi_1line(u: complex) -> complex:
    """xi(u) = pi^(-u/2) Gamma(u/2) zeta(u) for Re(u) >= 1."""
    return cmath.exp(-u / 2.0 * math.log(math.pi)) * gamma_complex(u / 2.0) * zeta_1line(u)


# ---------------------------------------------------------------------------
# Divisor sums


def divisor_tau(m: int, z) -> complex | int:
    """tau_z(m) = sum over divisors d of m of d^z (exact finite sum)."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    divisors = []
    d = 1
    while d * d <= m:
        if m % d == 0:
            divisors.append(d)
            if d != m // d:
                divisors.append(m // d)
        d += 1
    if isinstance(z, int) and z >= 0:
        return sum(d**z for d in divisors)
    return sum(d ** complex(z) for d in divisors)


def sigma_range(z: complex, m_max: int) -> np.ndarray:
    """tau_z(m) for m = 1..m_max via a divisor sieve (index m-1)."""
    out = np.zeros(m_max, dtype=complex)
    for d in range(1, m_max + 1):
        out[d - 1 :: d] += d ** complex(z)
    return out


# ---------------------------------------------------------------------------
# K-Bessel with imaginary order


def _de_weights(t: float, x_min: float, step: float):
    umax = math.acosh(max(math.log(1e18) / x_min, 2.0))
    vmax = math.asinh(umax) + step
    v = np.arange(0.0, vmax, step)
    u = np.sinh(v)
    w = np.cos(t * u) * np.cosh(v) * step
    w[0] *= 0.5
    return np.cosh(u), w


def bessel_K_imag(t: float, x, base_step: float = 1.0 / 64, return_underflow: bool = False):
    """K_it(x) for x > 0 (scalar or array), by doubly exponential quadrature.

    The v-grid step shrinks as 1/max(1, t/8) so the cos(t sinh v) factor
    stays resolved up to t = 30; absolute error is below 1e-12 for
    x >= 1e-3 in that range.  x > 700 underflows: the value is exactly 0
    and, with return_underflow=True, flagged.
    """
    if t < 0 or t > MAX_BESSEL_ORDER:
        raise ValueError(f"supported order range is 0 <= t <= {MAX_BESSEL_ORDER}")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if np.any(x_arr <= 0.0):
        raise ValueError("require x > 0")
    out = np.zeros_like(x_arr)
    under = x_arr > K_UNDERFLOW_X
    live = ~under
    if live.any():
        step = base_step / max(1.0, t / 8.0)
        ch, w = _de_weights(t, float(x_arr[live].min()), step)
        xs = x_arr[live]
        vals = np.empty(xs.size)
        chunk = max(1, 4_000_000 // ch.size)
        for lo in range(0, xs.size, chunk):
            hi = min(lo + chunk, xs.size)
            # explicit sum keeps the reduction order fixed
            vals[lo:hi] = (np.exp(-np.outer(xs[lo:hi], ch)) * w).sum(axis=1)
        out[live] = vals
    if scalar:
        if return_underflow:
            return float(out[0]), bool(under[0])
        return float(out[0])
    if return_underflow:
        return out, under
    return out


# ---------------------------------------------------------------------------
# Eisenstein parameters and evaluation


@dataclass
class EisensteinParams:
    """Precomputed data for E(z, 1/2 + it): zeta/xi factors and K-spline.

    The scattering coefficient c(t) has |c| = 1 on the unitary axis; this
    is asserted at construction within 1e-9.
    """

    t: float
    truncation: int = EISENSTEIN_TRUNCATION
    nu: float = field(init=False)
    zeta_1p2it: complex = field(init=False)
    c: complex = field(init=False)

    def __post_init__(self):
        if self.t == 0.0:
            raise ValueError("spectral parameter t must be nonzero")
        if self.truncation < 8:
            raise ValueError("series truncation must be >= 8")
        t = self.t
        self.nu = 0.25 + t * t
        self.zeta_1p2it = zeta_1line(1.0 + 2j * t)
        self._xi1 = completed_xi_1line(1.0 + 2j * t)
        self.c = self._xi1.conjugate() / self._xi1
        if abs(abs(self.c) - 1.0) > 1e-9:
            raise AssertionError("scattering coefficient lost unimodularity")
        n = np.arange(1, self.truncation + 1)
        lam = np.array([hecke_eis(int(m), self) for m in n])
        # coefficient of e(m x): a_m(y) = coef[|m|-1] * sqrt(y) * K_it(2 pi |m| y)
        self._coef = self.whittaker_norm * lam
        self._kspline = None

    @property
    def whittaker_norm(self) -> complex:
        """2 zeta(1+2it)/xi(1+2it): scales sqrt(u) K_it(2 pi u) to the
        expansion coefficients."""
        return 2.0 * self.zeta_1p2it / self._xi1

    def k_fast(self, w: np.ndarray) -> np.ndarray:
        """Spline-accelerated K_it on [sqrt(3) pi, 46]; 0 beyond, where the
        dropped mass is below 4e-21."""
        if self._kspline is None:
            grid = np.linspace(5.0, K_NEGLIGIBLE_X, 8500)
            self._kspline = CubicSpline(grid, bessel_K_imag(self.t, grid))
        out = np.zeros_like(w)
        live = w < K_NEGLIGIBLE_X
        out[live] = self._kspline(w[live])
        return out

    def fourier_coefficient(self, m: int, y) -> complex | np.ndarray:
        """a_m(y), the coefficient of e(m x) at height y (m != 0)."""
        if m == 0:
            raise ValueError("use constant_term for m = 0")
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        lam = hecke_eis(abs(m), self)
        vals = (
            self.whittaker_norm
            * lam
            * np.sqrt(y_arr)
            * bessel_K_imag(self.t, TWO_PI * abs(m) * y_arr)
        )
        return complex(vals[0]) if np.isscalar(y) or np.asarray(y).ndim == 0 else vals


def constant_term(y, p: EisensteinParams):
    """y^(1/2+it) + c(t) y^(1/2-it); modulus at most 2 sqrt(y)."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr <= 0):
        raise ValueError("require y > 0")
    ly = np.log(y_arr)
    out = np.sqrt(y_arr) * (
        np.exp(1j * p.t * ly) + p.c * np.exp(-1j * p.t * ly)
    )
    return complex(out[0]) if np.asarray(y).ndim == 0 else out


def hecke_eis(m: int, p: EisensteinParams) -> complex:
    """lambda(m) = m^(-it) tau_(2it)(m) / zeta(1+2it) on the Eisenstein line."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    return m ** (-1j * p.t) * complex(divisor_tau(m, 2j * p.t)) / p.zeta_1p2it


def eisenstein_values(x, y, p: EisensteinParams) -> np.ndarray:
    """E(x + iy, 1/2 + it) on arrays of reduced coordinates (y >= sqrt3/2)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    val = constant_term(y, p)
    sq = np.sqrt(y)
    for idx, n in enumerate(range(1, p.truncation + 1)):
        w = TWO_PI * n * y
        if np.all(w >= K_NEGLIGIBLE_X):
            break
        # the +-m pair of e(m x) coefficients combines to 2 a_n cos(2 pi n x)
        val = val + 2.0 * p._coef[idx] * sq * p.k_fast(w) * np.cos(TWO_PI * n * x)
    return val


def eisenstein_value(z: ModularPoint, p: EisensteinParams) -> complex:
    """E(z, 1/2 + it) at a reduced point; truncation tail below 1e-14."""
    if isinstance(z, ModularPoint):
        if not z.reduced and z.y < SQRT3_HALF - 1e-9:
            raise ValueError("eisenstein_value requires a reduced point")
        x, y = z.x, z.y
    else:
        x, y = z
        if y < SQRT3_HALF - 1e-9:
            raise ValueError("eisenstein_value requires a reduced point")
    return complex(eisenstein_values(np.array([x]), np.array([y]), p)[0])


# ---------------------------------------------------------------------------
# Horocycle Fourier coefficients and the spectral-gap diagnostic


def horocycle_fourier_coeff(phi, m: int, y: float, n_quad: int) -> complex:
    """(1/N) sum_j phi(reduce(x_j + iy)) e(-m x_j) on x_j = j/N.

    Equispaced quadrature of a smooth periodic integrand: spectrally
    accurate.  n_quad must be a power of two with n_quad >= 4|m|.
    """
    if n_quad < 4 or n_quad & (n_quad - 1):
        raise ValueError("n_quad must be a power of two >= 4")
    if n_quad < 4 * abs(m):
        raise ValueError("n_quad must be at least 4|m|")
    xs = np.arange(n_quad) / n_quad
    xr, yr = reduce_many(xs, np.full(n_quad, y))
    vals = np.asarray(phi(xr, yr), dtype=complex)
    phase = np.exp(-2j * np.pi * m * xs)
    return complex(np.mean(vals * phase))


def _all_fourier_coeffs(phi, y: float, m_max: int) -> np.ndarray:
    """|phi_hat_y(m)| for m = 1..m_max via one FFT (n = next pow2 of 4 m_max)."""
    n_quad = 1 << max(8, math.ceil(math.log2(4 * m_max)))
    xs = np.arange(n_quad) / n_quad
    xr, yr = reduce_many(xs, np.full(n_quad, y))
    vals = np.asarray(phi(xr, yr), dtype=complex)
    spec = np.fft.fft(vals) / n_quad  # index m holds the e(m x) coefficient
    pos = np.abs(spec[1 : m_max + 1])
    neg = np.abs(spec[-m_max:][::-1])
    return np.maximum(pos, neg)


def spectral_gap_fit(phi, y_grid) -> DecayReport:
    """sup over 1 <= |m| <= ceil(1/y) of |phi_hat_y(m)|, fitted in y.

    The report's exponent estimates the decay rate of the supremum; a
    constant test function yields an all-zero series flagged degenerate.
    """
    y_grid = np.asarray(sorted(y_grid, reverse=True), dtype=float)
    if y_grid.size < 4:
        raise ValueError("y_grid needs at least 4 points")
    if math.log2(y_grid[0] / y_grid[-1]) < 3.0 - 1e-9:
        raise ValueError("y_grid must span at least 3 dyadic decades")
    sups = np.array(
        [_all_fourier_coeffs(phi, y, math.ceil(1.0 / y)).max() for y in y_grid]
    )
    return fit_decay_report(
        y_grid, sups, metadata={"kind": "spectral_gap"}, param_name="y"
    )


def truncation_tail_mass(p: EisensteinParams, y: float, sigma: float) -> float:
    """Absolute coefficient mass beyond |m| > y^-sigma at height y.

    2 * sum_{m > y^-sigma} |whittaker_norm * lambda(m)| sqrt(y) |K_it(2 pi m y)|,
    cut at the K-Bessel underflow horizon (terms are exactly 0 beyond).
    """
    if sigma <= 1.0:
        raise ValueError("require sigma > 1")
    if not 0.0 < y < 0.5:
        raise ValueError("require 0 < y < 1/2")
    m_start = math.floor(y ** (-sigma)) + 1
    m_end = math.floor(K_UNDERFLOW_X / (TWO_PI * y))
    if m_end < m_start:
        return 0.0
    m = np.arange(m_start, m_end + 1)
    lam = np.abs(sigma_range(2j * p.t, m_end)[m_start - 1 :]) / abs(p.zeta_1p2it)
    kv = bessel_K_imag(p.t, TWO_PI * m * y)
    return float(
        2.0 * abs(p.whittaker_norm) * math.sqrt(y) * np.sum(lam * np.abs(kv))
    )


# ---------------------------------------------------------------------------
# Twisted Hecke sums


@dataclass(frozen=True)
class TwistedSumSpec:
    """Additively twisted coefficient sum parameters.

    regime selects the exponent on |m|: 'half_plus_delta' uses 1/2 + delta,
    'one_plus_delta' uses 1 + delta.
    """

    t: float
    delta: float
    alpha: float
    regime: str = "one_plus_delta"

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if self.regime not in ("half_plus_delta", "one_plus_delta"):
            raise ValueError("regime must be half_plus_delta or one_plus_delta")

    @property
    def exponent(self) -> float:
        return (0.5 if self.regime == "half_plus_delta" else 1.0) + self.delta


def twisted_hecke_sum(spec: TwistedSumSpec, y: float, _sigma_cache=None) -> complex:
    """sum over m != 0 of lambda(|m|) |m|^-e W(|m| y) e(m alpha).

    W(u) = sqrt(u) K_it(2 pi u); the +-m pair combines into
    2 cos(2 pi m alpha).  Terms beyond the K underflow horizon vanish
    exactly, so the sum is finite and deterministic.
    """
    if not 0.0 < y < 0.5:
        raise ValueError("require 0 < y < 1/2")
    p = EisensteinParams(spec.t)
    m_end = math.floor(K_UNDERFLOW_X / (TWO_PI * y))
    m = np.arange(1, m_end + 1)
    if _sigma_cache is not None and _sigma_cache.size >= m_end:
        tau = _sigma_cache[:m_end]
    else:
        tau = sigma_range(2j * spec.t, m_end)
    lam = m ** (-1j * spec.t) * tau / p.zeta_1p2it
    u = m * y
    w_vals = np.sqrt(u) * bessel_K_imag(spec.t, TWO_PI * u)
    total = np.sum(
        lam * m ** (-spec.exponent) * w_vals * 2.0 * np.cos(TWO_PI * m * spec.alpha)
    )
    return complex(total)


def twisted_sum_series(spec: TwistedSumSpec, y_grid) -> DecayReport:
    """|twisted_hecke_sum| over a descending y-grid with a decay fit."""
    y_grid = np.asarray(sorted(y_grid, reverse=True), dtype=float)
    m_end = math.floor(K_UNDERFLOW_X / (TWO_PI * float(y_grid.min())))
    cache = sigma_range(2j * spec.t, m_end)
    values = np.array(
        [twisted_hecke_sum(spec, float(y), _sigma_cache=cache) for y in y_grid]
    )
    report = fit_decay_report(
        y_grid, np.abs(values), metadata={"kind": "twisted_sum"}, param_name="y"
    )
    report.extra_columns = {
        "re": values.real,
        "im": values.imag,
    }
    return report


def spectral_gap_csv(report: DecayReport) -> str:
    """`y,sup_abs_coeff` rows for a spectral-gap sweep."""
    lines = ["y,sup_abs_coeff"]
    for y, sup in zip(report.params, report.errors):
        lines.append(f"{float(y)!r},{float(sup)!r}")
    return "\r\n".join(lines) + "\r\n"


def twisted_csv(report: DecayReport) -> str:
    """`y,re,im,abs` rows for a twisted-sum sweep."""
    lines = ["y,re,im,abs"]
    re = report.extra_columns["re"]
    im = report.extra_columns["im"]
    for i, y in enumerate(report.params):
        lines.append(
            f"{float(y)!r},{float(re[i])!r},{float(im[i])!r},{float(report.errors[i])!r}"
        )
    return "\r\n".join(lines) + "\r\n"
