"""Geometry of the modular surface: reduction, horocycles, integration.

Points x + iy of the upper half-plane reduce to the standard fundamental
domain {|x| <= 1/2, x^2 + y^2 >= 1} by alternating integer translations
and inversions z -> -1/z; the applied generator word is recorded so a
reduction can be replayed as an exact Mobius map.

The normalized hyperbolic probability measure on the fundamental domain is
(3/pi) y^-2 dx dy.  Its x-marginal is (3/pi)(1-x^2)^(-1/2), so the exact
sampler draws x = sin(pi(2u-1)/6) and then y = sqrt(1-x^2)/(1-v) for
independent uniforms u, v; this makes the constant function integrate to
exactly 1 for every sample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BOUNDARY_BAND = 1e-12
MAX_REDUCE_STEPS = 10_000


class ReductionDivergedError(RuntimeError):
    """Reduction failed to terminate; numerically degenerate input."""


class CylinderBudgetError(ValueError):
    """Cylinder enumeration exceeds the budget; use method='montecarlo'."""


@dataclass(frozen=True)
class ModularPoint:
    x: float
    y: float
    word: tuple | None = None  # generators applied: ('T', n) and ('S',)
    reduced: bool = False

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("require y > 0")
        if self.reduced and (
            abs(self.x) > 0.5 + BOUNDARY_BAND
            or self.x * self.x + self.y * self.y < 1.0 - BOUNDARY_BAND
        ):
            raise ValueError("point flagged reduced lies outside the fundamental domain")

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class HorocycleConfig:
    """Base point n(x0) a(1/q) and horocycle height y."""

    x0: float = 0.0
    q: int = 1
    y: float = 0.25

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("require q >= 1")
        if not 0.0 < self.y <= 1.0:
            raise ValueError("require 0 < y <= 1")


def word_to_matrix(word: tuple) -> tuple[int, int, int, int]:
    """Compose a generator word into an integer matrix (a, b, c, d)."""
    a, b, c, d = 1, 0, 0, 1
    for step in word:
        if step[0] == "T":
            n = step[1]
            # T^n * M
            a, b, c, d = a + n * c, b + n * d, c, d
        else:
            # S * M with S = [[0, -1], [1, 0]]
            a, b, c, d = -c, -d, a, b
    return a, b, c, d


def mobius_apply(matrix, x: float, y: float) -> tuple[float, float]:
    """Apply an integer matrix to x + iy by fractional linear action."""
    a, b, c, d = matrix
    z = complex(x, y)
    w = (a * z + b) / (c * z + d)
    return w.real, w.imag


def reduce_point(z: ModularPoint | complex | tuple) -> ModularPoint:
    """Translate/invert into the closed fundamental domain; records the word.

    Ties within the boundary band resolve to the canonical representative:
    x >= 0 on the vertical lines |x| = 1/2, x <= 0 on the interior of the
    unit-circle arc.  Idempotent on already-reduced points.
    """
    if isinstance(z, ModularPoint):
        x, y = z.x, z.y
    elif isinstance(z, complex):
        x, y = z.real, z.imag
    else:
        x, y = z
    if not y > 0:
        raise ValueError("require y > 0")

    word = []
    for _ in range(MAX_REDUCE_STEPS):
        n = round(x)
        if n != 0:
            x -= n
            word.append(("T", -n))
        r2 = x * x + y * y
        if r2 >= 1.0 - BOUNDARY_BAND:
            break
        x, y = -x / r2, y / r2
        word.append(("S",))
    else:
        raise ReductionDivergedError(f"no convergence after {MAX_REDUCE_STEPS} steps")

    # canonical ties: arc rule first (strictly interior), then the line rule
    r2 = x * x + y * y
    if abs(r2 - 1.0) <= BOUNDARY_BAND and BOUNDARY_BAND < x < 0.5 - BOUNDARY_BAND:
        x, y = -x / r2, y / r2
        word.append(("S",))
    if x <= -0.5 + BOUNDARY_BAND:
        x += 1.0
        word.append(("T", 1))
    return ModularPoint(x, y, word=tuple(word), reduced=True)


def reduce_many(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized reduction of many points (no word recording)."""
    x = np.array(x, dtype=float, copy=True)
    y = np.broadcast_to(np.asarray(y, dtype=float), x.shape).copy()
    active = np.arange(x.size)
    xf, yf = x.ravel(), y.ravel()
    for _ in range(MAX_REDUCE_STEPS):
        xs, ys = xf[active], yf[active]
        xs -= np.round(xs)
        r2 = xs * xs + ys * ys
        inside = r2 < 1.0 - BOUNDARY_BAND
        xs[inside] = -xs[inside] / r2[inside]
        ys[inside] = ys[inside] / r2[inside]
        xf[active], yf[active] = xs, ys
        active = active[inside]
        if active.size == 0:
            break
    else:
        raise ReductionDivergedError(f"no convergence after {MAX_REDUCE_STEPS} steps")
    return x, y


def horocycle_point(x: float, cfg: HorocycleConfig) -> ModularPoint:
    """n(x0) a(1/q) n(x) a(y) sits over x0 + x/q at height y/q (unreduced)."""
    return ModularPoint(cfg.x0 + x / cfg.q, cfg.y / cfg.q)


def sample_fundamental_domain(n: int, rng: np.random.Generator):
    """Exact draws from (3/pi) y^-2 dx dy on the fundamental domain."""
    u = rng.random(n)
    v = rng.random(n)
    x = np.sin(np.pi * (2.0 * u - 1.0) / 6.0)
    ymin = np.sqrt(1.0 - x * x)
    y = ymin / (1.0 - v)
    return x, y


def _mean_stderr(values: np.ndarray) -> tuple[float | complex, float]:
    n = values.size
    mean = values.mean()
    if np.iscomplexobj(values):
        var = values.real.var(ddof=1) + values.imag.var(ddof=1)
        return complex(mean), math.sqrt(var / n)
    return float(mean), float(values.std(ddof=1) / math.sqrt(n))


def mX_integral(phi, n_samples: int, seed) -> tuple[float | complex, float]:
    """Monte-Carlo mean of phi against the hyperbolic probability measure.

    phi is called with arrays (x, y) of reduced coordinates.  Returns
    (estimate, standard error); a constant integrand returns its value
    exactly with zero standard error.
    """
    if n_samples < 1000:
        raise ValueError("require at least 10^3 samples")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    x, y = sample_fundamental_domain(n_samples, rng)
    return _mean_stderr(np.asarray(phi(x, y)))


# ---------------------------------------------------------------------------
# mu_y against a fractal measure

from . import measures as _measures  # noqa: E402  (leaf import, no cycle)


def _cylinder_nodes(measure, cfg: HorocycleConfig, budget: int, tol: float, lip: float):
    """Depth, node positions (pre-horocycle), and weights for cylinder sums."""
    m, extra = measure, 0.0
    while isinstance(m, _measures.Convolution):
        # fold point masses into a plain shift; anything else has no
        # cylinder structure worth enumerating
        if isinstance(m.left, _measures.DiracMass):
            extra, m = extra + m.left.point, m.right
        elif isinstance(m.right, _measures.DiracMass):
            extra, m = extra + m.right.point, m.left
        else:
            raise CylinderBudgetError(
                "cylinder method does not enumerate general convolutions; "
                "use method='montecarlo'"
            )
    if isinstance(m, _measures.FractalMeasure) and extra:
        m = _measures.FractalMeasure(m.base, m.digits, m.weights, m.shift + extra)

    if isinstance(m, _measures.DiracMass):
        return np.array([m.point + extra]), np.array([1.0]), 0.0

    if isinstance(m, _measures.LebesgueUnit):
        n = 1 << max(8, math.ceil(math.log2(8.0 / cfg.y)))
        n = min(n, 1 << math.floor(math.log2(max(budget, 256))))
        xs = (np.arange(n) + 0.5) / n + extra
        return xs, np.full(n, 1.0 / n), None  # error estimated by refinement

    if isinstance(m, _measures.FractalMeasure):
        if lip is None:
            raise ValueError("cylinder method needs a test function with a "
                             "declared Lipschitz constant")
        b, l = m.base, m.n_digits
        depth = max(1, math.ceil(math.log(lip * cfg.q / (cfg.y * tol)) / math.log(b)))
        if l**depth > budget:
            raise CylinderBudgetError(
                f"cylinder enumeration needs {l}^{depth} nodes > budget {budget}; "
                "use method='montecarlo'"
            )
        count = l**depth
        digits = np.asarray(m.digits, dtype=float)
        w = m.weight_array
        xs = np.zeros(count)
        ws = np.ones(count)
        scale = 1.0
        for j in range(depth):
            scale /= b
            reps = l ** (depth - 1 - j)
            idx = (np.arange(count) // reps) % l
            xs += digits[idx] * scale
            if not m.is_uniform:
                ws *= w[idx]
        if m.is_uniform:
            ws = np.full(count, 1.0 / count)
        else:
            ws /= ws.sum()
        xs += m.shift + 0.5 * scale  # cylinder midpoints
        err = lip * scale / (2.0 * cfg.y)
        return xs, ws, err

    raise CylinderBudgetError("cylinder method unavailable for this expression")


def mu_y_value(
    measure,
    phi,
    cfg: HorocycleConfig,
    method: str = "montecarlo",
    budget: int = 10**5,
    seed=0,
    tol: float = 1e-6,
    depth: int | None = None,
) -> tuple[float | complex, float]:
    """integral of phi(n(x0 + x/q) a(y/q)) d mu(x) with an error estimate.

    cylinder: weighted sum over depth-L digit cylinders at their midpoints
    (midpoint rule for the Lebesgue leaf), error bounded via the declared
    Lipschitz constant (resp. a half-resolution comparison).
    montecarlo: seeded sample mean with its standard error.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    lip = getattr(phi, "lipschitz", None)

    def evaluate(xs_line: np.ndarray):
        xr, yr = reduce_many(cfg.x0 + xs_line / cfg.q, cfg.y / cfg.q)
        return np.asarray(phi(xr, yr))

    if method == "cylinder":
        xs, ws, err = _cylinder_nodes(measure, cfg, budget, tol, lip)
        vals = evaluate(xs)
        total = np.sum(vals * ws)
        if err is None:  # Lebesgue leaf: compare against half resolution
            half = evaluate(xs[::2])
            err = float(abs(total - half.mean()))
        out = complex(total) if np.iscomplexobj(vals) else float(total)
        return out, float(err)

    if method == "montecarlo":
        if depth is None:
            depth = _measures.default_sample_depth(measure)
        xs = _measures.sample(measure, depth, budget, seed)
        return _mean_stderr(evaluate(xs))

    raise ValueError(f"unknown method {method!r}")
