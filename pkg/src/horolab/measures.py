"""Fractal probability measures on the line and their Fourier analysis.

A FractalMeasure is the self-similar measure of the homogeneous IFS

    f_i(x) = (x + d_i)/b + x0*(1 - 1/b),        d_i in D,

with digit set D inside {0, ..., b-1} and a probability weight per digit.
Its Fourier transform (in the e(xi*x) = exp(2*pi*i*xi*x) convention) has
the exact infinite-product form

    mu_hat(xi) = e(xi*x0) * prod_{j>=1} g(xi / b^j),
    g(u) = sum_i lambda_i e(d_i u),

which this module evaluates with a certified truncation.  Convolutions,
unit-interval Lebesgue, and point masses combine freely in measure
expressions; transforms multiply across convolution, samples add.

The partial sums S(X) = sum_{|m|<=X} |mu_hat(m)| and their sup-over-shift
variant drive the Fourier l^1-dimension estimate 1 - slope(log S / log X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from .fitting import least_squares_loglog

TWO_PI = 2.0 * math.pi
DEFAULT_TAIL_TOL = 1e-12
B_OF_S_CEILING = 10**9
FOURIER_L1_THRESHOLD = 39.0 / 64.0  # spectral-gap barrier for the headline regime


class PrecisionLossError(ValueError):
    """Requested digit depth underflows double precision."""


class NonArithmeticDigitsError(ValueError):
    """Digit set is not an arithmetic progression; bound not certified."""


@dataclass(frozen=True)
class FractalMeasure:
    """Self-similar measure with base b, digits D, weights, and shift x0."""

    base: int
    digits: tuple[int, ...]
    weights: tuple[float, ...] | None = None  # None means uniform
    shift: float = 0.0

    def __post_init__(self):
        b, D = self.base, self.digits
        if b < 2:
            raise ValueError("base must be >= 2")
        if len(D) < 1:
            raise ValueError("need at least one digit")
        if any(d < 0 or d >= b for d in D):
            raise ValueError("digits must lie in [0, base)")
        if any(D[i] >= D[i + 1] for i in range(len(D) - 1)):
            raise ValueError("digits must be strictly increasing")
        if self.weights is not None:
            w = self.weights
            if len(w) != len(D):
                raise ValueError("one weight per digit required")
            if any(x <= 0 for x in w):
                raise ValueError("weights must be positive")
            if abs(sum(w) - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1 within 1e-12")

    @property
    def n_digits(self) -> int:
        return len(self.digits)

    @property
    def weight_array(self) -> np.ndarray:
        if self.weights is None:
            return np.full(len(self.digits), 1.0 / len(self.digits))
        return np.asarray(self.weights, dtype=float)

    @property
    def is_uniform(self) -> bool:
        return self.weights is None

    @property
    def digit_progression(self) -> tuple[int, int] | None:
        """(first, step) when the digits form an arithmetic progression."""
        D = self.digits
        if len(D) == 1:
            return (D[0], 1)
        step = D[1] - D[0]
        if all(D[i + 1] - D[i] == step for i in range(len(D) - 1)):
            return (D[0], step)
        return None

    def hausdorff_dimension(self) -> float:
        """log(#D)/log(b), the dimension of the attractor."""
        return math.log(len(self.digits)) / math.log(self.base)


@dataclass(frozen=True)
class LebesgueUnit:
    """Lebesgue measure restricted to [0, 1]."""


@dataclass(frozen=True)
class DiracMass:
    point: float


@dataclass(frozen=True)
class Convolution:
    left: "MeasureExpr"
    right: "MeasureExpr"


MeasureExpr = FractalMeasure | LebesgueUnit | DiracMass | Convolution


# ---------------------------------------------------------------------------
# The digit symbol g and the product-formula transform


def _dirichlet_ratio(v: np.ndarray, l: int) -> np.ndarray:
    """sin(pi*l*v) / (l*sin(pi*v)), computed exactly at integers.

    Decomposing v = n + delta with |delta| <= 1/2 keeps both sines away
    from catastrophic argument reduction and gives the exact limit
    (-1)^(n*(l-1)) at integer v.
    """
    n = np.round(v)
    delta = v - n
    sign = np.where((n.astype(np.int64) * (l - 1)) % 2 == 0, 1.0, -1.0)
    num = np.sin(np.pi * l * delta)
    den = l * np.sin(np.pi * delta)
    ratio = np.ones_like(delta)
    # below 1e-100 the ratio is 1 to within (pi l delta)^2/6, and subnormal
    # arithmetic would corrupt the quotient
    nz = np.abs(delta) > 1e-100
    ratio[nz] = num[nz] / den[nz]
    return sign * ratio


def symbol_g(measure: FractalMeasure, xi) -> complex | np.ndarray:
    """g(xi) = sum_i lambda_i e(d_i xi); |g| <= 1.

    Uniform weights over an arithmetic progression collapse to a Dirichlet
    kernel, evaluated in closed form; anything else sums over digits.
    """
    xi_arr = np.asarray(xi, dtype=float)
    scalar = xi_arr.ndim == 0
    xi_arr = np.atleast_1d(xi_arr)
    prog = measure.digit_progression
    if measure.is_uniform and prog is not None:
        a, step = prog
        l = measure.n_digits
        center = a + step * (l - 1) / 2.0
        out = np.exp(2j * np.pi * center * xi_arr) * _dirichlet_ratio(step * xi_arr, l)
    else:
        digits = np.asarray(measure.digits, dtype=float)
        w = measure.weight_array
        # summed explicitly to keep the reduction order fixed
        out = (np.exp(2j * np.pi * np.outer(xi_arr, digits)) * w).sum(axis=1)
    return complex(out[0]) if scalar else out


def _symbol_abs(measure: FractalMeasure, xi_arr: np.ndarray) -> np.ndarray:
    prog = measure.digit_progression
    if measure.is_uniform and prog is not None:
        _, step = prog
        return np.abs(_dirichlet_ratio(step * xi_arr, measure.n_digits))
    return np.abs(symbol_g(measure, xi_arr))


def product_depth(measure: FractalMeasure, xi_max: float, tail_tol: float) -> int:
    """Truncation depth J for the infinite product at |xi| <= xi_max.

    Beyond J the factors satisfy |g(xi/b^j) - 1| <= 2*pi*max(D)*|xi|/b^j,
    so the omitted tail's relative error telescopes below tail_tol.
    """
    b = measure.base
    arg = TWO_PI * b * max(abs(xi_max), 1.0) / tail_tol
    return max(1, math.ceil(math.log(arg) / math.log(b)) + 1)


@singledispatch
def fourier_transform(measure, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    """mu_hat(xi) = integral of e(xi*x) d mu(x); accepts scalar or array xi."""
    raise TypeError(f"not a measure expression: {measure!r}")


def _as_xi(xi):
    xi_arr = np.asarray(xi, dtype=float)
    return np.atleast_1d(xi_arr), xi_arr.ndim == 0


def _ret(values: np.ndarray, scalar: bool):
    return complex(values[0]) if scalar else values


@fourier_transform.register
def _(measure: FractalMeasure, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    xi_arr, scalar = _as_xi(xi)
    J = product_depth(measure, float(np.max(np.abs(xi_arr), initial=0.0)), tail_tol)
    acc = np.exp(2j * np.pi * measure.shift * xi_arr)
    u = xi_arr.copy()
    for _ in range(J):
        u = u / measure.base
        acc = acc * symbol_g(measure, u)
    return _ret(acc, scalar)


@fourier_transform.register
def _(measure: LebesgueUnit, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    xi_arr, scalar = _as_xi(xi)
    out = np.exp(1j * np.pi * xi_arr).astype(complex)
    n = np.round(xi_arr)
    delta = xi_arr - n
    sgn = np.where(n.astype(np.int64) % 2 == 0, 1.0, -1.0)
    nz = np.abs(xi_arr) > 1e-100  # sinc -> 1 below; avoids subnormal quotients
    out[nz] *= sgn[nz] * np.sin(np.pi * delta[nz]) / (np.pi * xi_arr[nz])
    out[~nz] = 1.0
    return _ret(out, scalar)


@fourier_transform.register
def _(measure: DiracMass, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    xi_arr, scalar = _as_xi(xi)
    return _ret(np.exp(2j * np.pi * measure.point * xi_arr), scalar)


@fourier_transform.register
def _(measure: Convolution, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    xi_arr, scalar = _as_xi(xi)
    out = fourier_transform(measure.left, xi_arr, tail_tol) * fourier_transform(
        measure.right, xi_arr, tail_tol
    )
    return _ret(out, scalar)


@singledispatch
def fourier_abs(measure, xi, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """|mu_hat(xi)| without phase factors; shift-invariant by construction."""
    raise TypeError(f"not a measure expression: {measure!r}")


@fourier_abs.register
def _(measure: FractalMeasure, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    J = product_depth(measure, float(np.max(np.abs(xi_arr), initial=0.0)), tail_tol)
    acc = np.ones_like(xi_arr)
    u = xi_arr.copy()
    for _ in range(J):
        u = u / measure.base
        acc = acc * _symbol_abs(measure, u)
    return acc


@fourier_abs.register
def _(measure: LebesgueUnit, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.abs(fourier_transform(measure, xi_arr))


@fourier_abs.register
def _(measure: DiracMass, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    return np.ones_like(np.atleast_1d(np.asarray(xi, dtype=float)))


@fourier_abs.register
def _(measure: Convolution, xi, tail_tol: float = DEFAULT_TAIL_TOL):
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    return fourier_abs(measure.left, xi_arr, tail_tol) * fourier_abs(
        measure.right, xi_arr, tail_tol
    )


# ---------------------------------------------------------------------------
# Sampling


def _check_depth(base: int, depth: int):
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if float(base) ** (-depth) == 0.0:
        raise PrecisionLossError(
            f"base^-depth underflows for base={base}, depth={depth}"
        )


@singledispatch
def sample(measure, depth: int, count: int, seed) -> np.ndarray:
    """count i.i.d. draws truncated at `depth` base-b digits.

    Deterministic given seed; seed may be an int or a numpy Generator
    (internal nodes share one stream in tree order).
    """
    raise TypeError(f"not a measure expression: {measure!r}")


def _rng_of(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@sample.register
def _(measure: FractalMeasure, depth: int, count: int, seed) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    _check_depth(measure.base, depth)
    rng = _rng_of(seed)
    digits = np.asarray(measure.digits)
    out = np.zeros(count)
    chunk = max(1, min(count, 10**6 * 8 // max(depth, 1)))
    inv_b = 1.0 / measure.base
    for lo in range(0, count, chunk):
        hi = min(lo + chunk, count)
        if measure.is_uniform:
            idx = rng.integers(0, measure.n_digits, size=(hi - lo, depth))
        else:
            idx = rng.choice(measure.n_digits, size=(hi - lo, depth), p=measure.weight_array)
        vals = digits[idx].astype(float)
        x = np.zeros(hi - lo)
        for j in range(depth - 1, -1, -1):  # Horner: deterministic order
            x = (x + vals[:, j]) * inv_b
        out[lo:hi] = x + measure.shift
    return out


@sample.register
def _(measure: LebesgueUnit, depth: int, count: int, seed) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    return _rng_of(seed).random(count)


@sample.register
def _(measure: DiracMass, depth: int, count: int, seed) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    return np.full(count, measure.point)


@sample.register
def _(measure: Convolution, depth: int, count: int, seed) -> np.ndarray:
    rng = _rng_of(seed)
    return sample(measure.left, depth, count, rng) + sample(
        measure.right, depth, count, rng
    )


def default_sample_depth(measure: MeasureExpr, bits: float = 60.0) -> int:
    """Digit depth saturating double precision (largest base in the tree)."""
    if isinstance(measure, Convolution):
        return max(
            default_sample_depth(measure.left, bits),
            default_sample_depth(measure.right, bits),
        )
    if isinstance(measure, FractalMeasure):
        return max(1, math.ceil(bits * math.log(2) / math.log(measure.base)) + 1)
    return 1


# ---------------------------------------------------------------------------
# Fourier l^1 partial sums and dimension estimation


def l1_partial_sum(
    measure: MeasureExpr,
    X: int,
    star: bool = False,
    theta_grid: int = 64,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> float:
    """S(X) = sum_{|m|<=X} |mu_hat(m)|; star mode maximizes over shifts.

    Star mode evaluates the sum at m + theta over a uniform theta-grid on
    [0, 1) and returns the maximum; the grid contains theta = 0, so the
    star sum dominates the plain one.
    """
    if X < 1:
        raise ValueError("X must be >= 1")
    m = np.arange(-X, X + 1, dtype=float)
    if not star:
        return float(np.sum(fourier_abs(measure, m, tail_tol)))
    if theta_grid < 1:
        raise ValueError("theta_grid must be >= 1")
    best = -np.inf
    for k in range(theta_grid):
        theta = k / theta_grid
        best = max(best, float(np.sum(fourier_abs(measure, m + theta, tail_tol))))
    return best


@dataclass
class DimensionEstimate:
    """Fitted growth of S(X) and the induced Fourier l^1-dimension.

    ``slope`` is fitted on the upper half of the grid (closest to the
    asymptotic regime); ``slope_full`` uses every point.  The dimension is
    1 - slope.  Finite-X estimates carry uncontrolled bias: the standard
    error quantifies fit scatter only, never convergence.
    """

    X_grid: np.ndarray
    sums: np.ndarray
    slope: float
    slope_full: float
    dimension: float
    stderr: float
    mode: str  # "plain" | "star"
    degenerate: bool = False
    theta_grid_error: float | None = None


def estimate_dim_l1(
    measure: MeasureExpr,
    X_grid,
    star: bool = False,
    theta_grid: int = 64,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> DimensionEstimate:
    """Least-squares slope of log S(X) on log X; dimension = 1 - slope."""
    X_grid = np.asarray(sorted(int(x) for x in X_grid))
    if X_grid.size < 4:
        raise ValueError("X_grid needs at least 4 points")
    if math.log10(X_grid[-1] / X_grid[0]) < 2.0 - 1e-9:
        raise ValueError("X_grid must span at least two decades")

    X_max = int(X_grid[-1])
    m = np.arange(1, X_max + 1, dtype=float)
    shift_x0 = _tree_shift(measure)

    def sums_for(theta: float) -> np.ndarray:
        a_pos = fourier_abs(measure, m + theta, tail_tol)
        a_neg = fourier_abs(measure, -m + theta, tail_tol)
        center = fourier_abs(measure, np.array([theta]), tail_tol)[0]
        csum = np.cumsum(a_pos + a_neg)
        return center + csum[X_grid - 1]

    if star:
        S = sums_for(0.0)
        for k in range(1, theta_grid):
            S = np.maximum(S, sums_for(k / theta_grid))
        theta_err = TWO_PI * (1.0 + abs(shift_x0)) * X_max / theta_grid
    else:
        S = sums_for(0.0)
        theta_err = None

    degenerate = bool(np.allclose(S, S[0], rtol=1e-12, atol=0.0))
    if degenerate:
        slope = slope_full = 0.0
        stderr = 0.0
    else:
        half = X_grid.size // 2
        tail_fit = least_squares_loglog(X_grid[half:], S[half:])
        full_fit = least_squares_loglog(X_grid, S)
        slope, slope_full, stderr = tail_fit.slope, full_fit.slope, tail_fit.stderr
    return DimensionEstimate(
        X_grid=X_grid, sums=S, slope=slope, slope_full=slope_full,
        dimension=1.0 - slope, stderr=stderr,
        mode="star" if star else "plain",
        degenerate=degenerate, theta_grid_error=theta_err,
    )


def _tree_shift(measure: MeasureExpr) -> float:
    if isinstance(measure, FractalMeasure):
        return measure.shift
    if isinstance(measure, DiracMass):
        return measure.point
    if isinstance(measure, Convolution):
        return _tree_shift(measure.left) + _tree_shift(measure.right)
    return 0.0


# ---------------------------------------------------------------------------
# Closed-form dimension bounds


def cvy_lower_bound(b: int, l: int) -> float:
    """log l/log b - log(4 + log(2l))/log b, for digits in progression.

    A lower bound on the Fourier l^1-dimension of the uniform measure on
    a missing-digit set whose l digits form an arithmetic progression.
    """
    if not 2 <= l <= b:
        raise ValueError("need 2 <= l <= b")
    return (math.log(l) - math.log(4.0 + math.log(2.0 * l))) / math.log(b)


def cvy_bound_for_measure(measure: FractalMeasure, allow_non_ap: bool = False) -> float:
    """cvy_lower_bound for a concrete measure; refuses non-progression digits.

    The bound is only certified for digits in arithmetic progression; pass
    allow_non_ap=True to evaluate the formula anyway.
    """
    if measure.digit_progression is None and not allow_non_ap:
        raise NonArithmeticDigitsError(
            "digit set is not an arithmetic progression; "
            "pass allow_non_ap=True to evaluate the formula regardless"
        )
    return cvy_lower_bound(measure.base, measure.n_digits)


def b_of_s(s: float, ceiling: int = B_OF_S_CEILING) -> int:
    """Smallest b >= 3 with s - log(4+log(2b))/log b > 39/64 and b - b^s >= 2.

    Both constraints are monotone in b (the log-ratio term is strictly
    decreasing, b - b^s strictly increasing), so an upward scan finds the
    threshold and every larger b satisfies both.
    """
    if not FOURIER_L1_THRESHOLD < s < 1.0:
        raise ValueError("s must lie in (39/64, 1)")

    def ok(b: int) -> bool:
        lhs = s - math.log(4.0 + math.log(2.0 * b)) / math.log(b)
        return lhs > FOURIER_L1_THRESHOLD and b - b**s >= 2.0

    lo, b = 3, 3
    if not ok(lo):
        # exponential bracket then bisect; predicate is monotone in b
        hi = 6
        while not ok(hi):
            lo = hi
            hi *= 2
            if hi > ceiling:
                raise ValueError(f"no admissible b below ceiling {ceiling}")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        b = hi
    assert ok(b) and (b == 3 or not ok(b - 1))
    return b


# ---------------------------------------------------------------------------
# Measure literals

_MEASURE_GRAMMAR = (
    "<measure> := <term> ('*' <term>)* ; <term> := <atom> ['+' <shift>] ; "
    "<atom> := 'cantor:<b>:<digits>' | 'leb' | 'dirac:<x>' ; "
    "<digits> := d1,d2,... | lo..hi"
)


class MeasureParseError(ValueError):
    def __init__(self, production: str, detail: str):
        self.production = production
        super().__init__(f"measure literal, production {production}: {detail}")


def parse_measure(text: str) -> MeasureExpr:
    """Parse `cantor:<b>:<digits>`, `leb`, `dirac:<x>`, `*`, `+<x0>`."""
    parts = [p.strip() for p in text.strip().split("*")]
    if any(not p for p in parts):
        raise MeasureParseError("<measure>", f"empty convolution factor in {text!r}")
    expr = _parse_term(parts[0])
    for p in parts[1:]:
        expr = Convolution(expr, _parse_term(p))
    return expr


def _parse_term(text: str) -> MeasureExpr:
    shift = 0.0
    if "+" in text:
        base_text, shift_text = text.split("+", 1)
        try:
            shift = float(shift_text)
        except ValueError:
            raise MeasureParseError("<shift>", f"bad shift {shift_text!r}") from None
    else:
        base_text = text
    atom = _parse_atom(base_text.strip())
    if shift == 0.0:
        return atom
    if isinstance(atom, FractalMeasure):
        return FractalMeasure(atom.base, atom.digits, atom.weights, atom.shift + shift)
    if isinstance(atom, DiracMass):
        return DiracMass(atom.point + shift)
    return Convolution(atom, DiracMass(shift))


def _parse_atom(text: str) -> MeasureExpr:
    if text == "leb":
        return LebesgueUnit()
    if text.startswith("dirac:"):
        try:
            return DiracMass(float(text[len("dirac:"):]))
        except ValueError:
            raise MeasureParseError("<atom>", f"bad dirac point in {text!r}") from None
    if text.startswith("cantor:"):
        fields = text.split(":")
        if len(fields) != 3:
            raise MeasureParseError("<atom>", f"expected cantor:<b>:<digits>, got {text!r}")
        try:
            b = int(fields[1])
        except ValueError:
            raise MeasureParseError("<atom>", f"bad base in {text!r}") from None
        digits = _parse_digits(fields[2])
        try:
            return FractalMeasure(b, digits)
        except ValueError as exc:
            raise MeasureParseError("<atom>", str(exc)) from None
    raise MeasureParseError("<atom>", f"unknown measure atom {text!r}")


def _parse_digits(text: str) -> tuple[int, ...]:
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        return tuple(int(d) for d in text.split(","))
    except ValueError:
        raise MeasureParseError("<digits>", f"bad digit list {text!r}") from None
