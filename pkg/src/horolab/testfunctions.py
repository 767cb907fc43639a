"""Observables on the modular surface for equidistribution experiments.

All test functions are K-invariant: they depend only on the reduced point
(x, y) and are called with coordinate arrays.  Each carries
  - mean: its integral against the hyperbolic probability measure when
    known in closed form (None means: estimate by Monte Carlo),
  - lipschitz: a hyperbolic-gradient bound sup y * |grad phi| used to pick
    cylinder depths (None disables the cylinder method).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .automorphic import EisensteinParams, eisenstein_values


class TestFunctionParseError(ValueError):
    def __init__(self, production: str, detail: str):
        self.production = production
        super().__init__(f"test-function literal, production {production}: {detail}")


class EisensteinTest:
    """Re E(z, 1/2 + it) (or the complex value with component='complex').

    Mean zero against the hyperbolic measure: the canonical mean-zero
    observable.  The Lipschitz constant is calibrated empirically by
    finite differences over a fundamental-domain grid; the series grows
    like sqrt(y) in the cusp, so the calibration window is capped and the
    constant is an estimate, not a certificate.
    """

    def __init__(self, t: float = 1.0, component: str = "re"):
        if component not in ("re", "im", "complex"):
            raise ValueError("component must be re, im, or complex")
        self.t = t
        self.component = component
        self.params = EisensteinParams(t)
        self.mean = 0.0 if component != "complex" else 0.0 + 0.0j
        self._lipschitz = None

    @property
    def label(self) -> str:
        return f"eisenstein:t={self.t:g}"

    @property
    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = self._calibrate()
        return self._lipschitz

    def _calibrate(self, y_cap: float = 8.0) -> float:
        xs = np.linspace(-0.5, 0.5, 41)
        ys = np.geomspace(math.sqrt(3) / 2, y_cap, 41)
        X, Y = np.meshgrid(xs, ys)
        h = 1e-5
        fx = (self._raw(X + h, Y) - self._raw(X - h, Y)) / (2 * h)
        fy = (self._raw(X, Y + h) - self._raw(X, Y - h)) / (2 * h)
        grad = Y * np.hypot(np.abs(fx), np.abs(fy))
        return 2.0 * float(grad.max())

    def _raw(self, x, y):
        return eisenstein_values(np.ravel(x), np.ravel(y), self.params).reshape(
            np.shape(x)
        )

    def __call__(self, x, y):
        vals = eisenstein_values(x, y, self.params)
        if self.component == "re":
            return vals.real
        if self.component == "im":
            return vals.imag
        return vals


@dataclass
class BumpTest:
    """Smooth bump in the height coordinate, supported on [y0, y1]."""

    y0: float
    y1: float
    mean: float | None = field(default=None, init=False)

    def __post_init__(self):
        if not 0 < self.y0 < self.y1:
            raise ValueError("require 0 < y0 < y1")

    @property
    def label(self) -> str:
        return f"bump:y0={self.y0:g},y1={self.y1:g}"

    @property
    def lipschitz(self) -> float:
        # sup of y |w'(y)|: |w'| <= 2*exp(1)*sup|u'|... calibrated on a grid
        ys = np.linspace(self.y0 + 1e-9, self.y1 - 1e-9, 4001)
        h = (self.y1 - self.y0) * 1e-6
        grad = np.abs(self(np.zeros_like(ys), ys + h) - self(np.zeros_like(ys), ys - h)) / (2 * h)
        return 1.1 * float((ys * grad).max())

    def __call__(self, x, y):
        y = np.asarray(y, dtype=float)
        u = (2.0 * y - self.y0 - self.y1) / (self.y1 - self.y0)
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out


@dataclass
class IndicatorTest:
    """Indicator of {y > c}; mean 3/(pi c) in closed form for c >= 1."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("require c > 0")

    @property
    def label(self) -> str:
        return f"indicator:ygt={self.c:g}"

    @property
    def mean(self) -> float | None:
        return 3.0 / (math.pi * self.c) if self.c >= 1.0 else None

    lipschitz = None  # not Lipschitz: cylinder method refuses

    def __call__(self, x, y):
        return (np.asarray(y, dtype=float) > self.c).astype(float)


@dataclass
class ConstantTest:
    value: float = 1.0

    @property
    def label(self) -> str:
        return f"const:{self.value:g}"

    @property
    def mean(self) -> float:
        return self.value

    lipschitz = 0.0

    def __call__(self, x, y):
        return np.full(np.shape(y), self.value)


def parse_test_function(text: str):
    """Parse `eisenstein:t=<t>`, `bump:y0=<a>,y1=<b>`, `indicator:ygt=<c>`."""
    text = text.strip()
    if text.startswith("eisenstein:"):
        body = text[len("eisenstein:"):]
        kv = _keyvals(body, "<test:eisenstein>")
        if set(kv) != {"t"}:
            raise TestFunctionParseError("<test:eisenstein>", f"expected t=<real>, got {body!r}")
        return EisensteinTest(t=kv["t"])
    if text.startswith("bump:"):
        kv = _keyvals(text[len("bump:"):], "<test:bump>")
        if set(kv) != {"y0", "y1"}:
            raise TestFunctionParseError("<test:bump>", "expected y0=<a>,y1=<b>")
        return BumpTest(kv["y0"], kv["y1"])
    if text.startswith("indicator:"):
        kv = _keyvals(text[len("indicator:"):], "<test:indicator>")
        if set(kv) != {"ygt"}:
            raise TestFunctionParseError("<test:indicator>", "expected ygt=<c>")
        return IndicatorTest(kv["ygt"])
    if text.startswith("const:"):
        try:
            return ConstantTest(float(text[len("const:"):]))
        except ValueError:
            raise TestFunctionParseError("<test:const>", f"bad value in {text!r}") from None
    raise TestFunctionParseError("<test>", f"unknown test function {text!r}")


def _keyvals(body: str, production: str) -> dict:
    out = {}
    for item in body.split(","):
        if "=" not in item:
            raise TestFunctionParseError(production, f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise TestFunctionParseError(production, f"bad number {val!r}") from None
    return out
