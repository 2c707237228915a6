"""Fixed library of functional relationships on ``[0, 1]`` and laws for X.

Every function is defined on the whole real line (natural extension of its
formula; the piecewise-linear function continues its end segments) so that
x-noise may push arguments outside ``[0, 1]``.

Two laws for X are supported: ``"uniform"`` on ``[0, 1]`` and
``"graph"``, whose density is proportional to ``sqrt(1 + f'(x)**2)`` so
that points are uniform along the graph of ``f``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

LIBRARY_VERSION = 1
LIBRARY_NAMES = ("linear", "quadratic", "cubic", "exponential", "sinusoidal", "piecewise-linear")
LAWS = ("uniform", "graph")
MAX_FREQUENCY = 6.0

_EXP_RATE = 3.0
_PL_KNOTS = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
_PL_VALUES = np.array([0.0, 1.0, 0.25, 0.75, 0.0])
_PL_SLOPES = np.diff(_PL_VALUES) / np.diff(_PL_KNOTS)

# composite Gauss-Legendre rule on [0, 1]; panel edges include every kink of
# the library functions (multiples of 1/4)
_PANELS = 64
_ORDER = 8


def _composite_rule(panels: int, order: int, lo: float = 0.0, hi: float = 1.0):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class FunctionSpec:
    """A library function ``f: [0, 1] -> R``.

    Parameters
    ----------
    name : str
        One of ``LIBRARY_NAMES``.
    frequency : float, optional
        Number of periods on ``[0, 1]``; sinusoidal only, defaults to 1 and
        is capped at 6.
    """

    name: str
    frequency: float | None = None

    def __post_init__(self):
        if self.name not in LIBRARY_NAMES:
            raise ValueError(f"unknown function {self.name!r}; choose from {LIBRARY_NAMES}")
        if self.name == "sinusoidal":
            q = 1.0 if self.frequency is None else float(self.frequency)
            if not 0 < q <= MAX_FREQUENCY:
                raise ValueError(f"frequency must lie in (0, {MAX_FREQUENCY}], got {q}")
            object.__setattr__(self, "frequency", q)
        elif self.frequency is not None:
            raise ValueError(f"{self.name} takes no frequency")

    @property
    def label(self) -> str:
        if self.name == "sinusoidal":
            return f"sinusoidal[{self.frequency:g}]"
        return self.name

    @classmethod
    def parse(cls, text: str) -> "FunctionSpec":
        """Inverse of :attr:`label`, e.g. ``"sinusoidal[4]"``."""
        text = text.strip()
        if text.endswith("]") and "[" in text:
            name, freq = text[:-1].split("[", 1)
            return cls(name, float(freq))
        return cls(text)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.name == "linear":
            return x.copy()
        if self.name == "quadratic":
            return 4.0 * (x - 0.5) ** 2
        if self.name == "cubic":
            u = 2.0 * x - 1.0
            return 4.0 * u**3 - 3.0 * u
        if self.name == "exponential":
            return np.expm1(_EXP_RATE * x) / math.expm1(_EXP_RATE)
        if self.name == "sinusoidal":
            return np.sin(2.0 * math.pi * self.frequency * x)
        seg = np.clip(np.searchsorted(_PL_KNOTS, x, side="right") - 1, 0, _PL_SLOPES.size - 1)
        return _PL_VALUES[seg] + _PL_SLOPES[seg] * (x - _PL_KNOTS[seg])

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.name == "linear":
            return np.ones_like(x)
        if self.name == "quadratic":
            return 8.0 * (x - 0.5)
        if self.name == "cubic":
            u = 2.0 * x - 1.0
            return 2.0 * (12.0 * u**2 - 3.0)
        if self.name == "exponential":
            return _EXP_RATE * np.exp(_EXP_RATE * x) / math.expm1(_EXP_RATE)
        if self.name == "sinusoidal":
            w = 2.0 * math.pi * self.frequency
            return w * np.cos(w * x)
        seg = np.clip(np.searchsorted(_PL_KNOTS, x, side="right") - 1, 0, _PL_SLOPES.size - 1)
        return _PL_SLOPES[seg]

    def bounds(self) -> tuple[float, float]:
        """Minimum and maximum of ``f`` on ``[0, 1]``."""
        candidates = [0.0, 1.0]
        if self.name == "quadratic":
            candidates.append(0.5)
        elif self.name == "cubic":
            candidates += [0.25, 0.75]
        elif self.name == "sinusoidal":
            q = self.frequency
            candidates += [x for x in (np.arange(math.ceil(2 * q) + 1) + 0.5) / (2 * q) if x <= 1.0]
        elif self.name == "piecewise-linear":
            candidates += list(_PL_KNOTS)
        values = self(np.array(candidates))
        return float(values.min()), float(values.max())

    def analytic_variance(self) -> float | None:
        """``Var f(X)`` for uniform X in closed form, if known."""
        if self.name == "linear":
            return 1.0 / 12.0
        if self.name == "quadratic":
            return 4.0 / 45.0
        if self.name == "cubic":
            return 17.0 / 35.0
        if self.name == "exponential":
            c = math.expm1(_EXP_RATE)
            first = c / _EXP_RATE
            second = math.expm1(2 * _EXP_RATE) / (2 * _EXP_RATE)
            return (second - first**2) / c**2
        if self.name == "sinusoidal":
            w = 2.0 * math.pi * self.frequency
            mean = (1.0 - math.cos(w)) / w
            square = 0.5 - math.sin(2.0 * w) / (4.0 * w)
            return square - mean**2
        return None

    def variance(self, law: str = "uniform") -> float:
        """``Var f(X)`` under ``law``; closed form when available."""
        if law == "uniform":
            exact = self.analytic_variance()
            if exact is not None:
                return exact
        nodes, weights = law_rule(self, law)
        fx = self(nodes)
        mean = weights @ fx
        return float(weights @ (fx - mean) ** 2)


def library(sinusoid_frequency: float = 1.0) -> tuple[FunctionSpec, ...]:
    """One instance of every library function."""
    return tuple(
        FunctionSpec(name, sinusoid_frequency if name == "sinusoidal" else None) for name in LIBRARY_NAMES
    )


def graph_density(function: FunctionSpec, x) -> np.ndarray:
    """Density of the graph-uniform law of X at ``x`` (zero outside ``[0, 1]``)."""
    x = np.asarray(x, dtype=float)
    inside = (x >= 0) & (x <= 1)
    out = np.zeros_like(x)
    out[inside] = np.sqrt(1.0 + function.derivative(x[inside]) ** 2) / _arc_table(function)[2]
    return out


@functools.lru_cache(maxsize=64)
def _arc_table(function: FunctionSpec, cells: int = 4096):
    """Normalized arc-length CDF at ``i / cells`` and the total length."""
    t, w = np.polynomial.legendre.leggauss(6)
    edges = np.linspace(0.0, 1.0, cells + 1)
    half = 0.5 / cells
    nodes = (edges[:-1, None] + half) + half * t[None, :]
    speed = np.sqrt(1.0 + function.derivative(nodes) ** 2)
    pieces = (speed * w[None, :]).sum(axis=1) * half
    cdf = np.concatenate([[0.0], np.cumsum(pieces)])
    length = float(cdf[-1])
    cdf /= length
    cdf.setflags(write=False)
    edges.setflags(write=False)
    return edges, cdf, length


def law_rule(function: FunctionSpec, law: str):
    """Quadrature nodes and weights for expectations over X on ``[0, 1]``."""
    if law not in LAWS:
        raise ValueError(f"unknown law {law!r}; choose from {LAWS}")
    if law == "uniform":
        return _composite_rule(_PANELS, _ORDER)
    # the arc-length weight of a sinusoid sharpens with frequency
    panels = _PANELS * math.ceil(function.frequency) if function.name == "sinusoidal" else _PANELS
    nodes, weights = _composite_rule(panels, _ORDER)
    weights = weights * graph_density(function, nodes)
    return nodes, weights / weights.sum()


def sample_x(function: FunctionSpec, law: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` values of X; graph-uniform draws use the tabulated inverse CDF."""
    u = rng.random(n)
    if law == "uniform":
        return u
    if law != "graph":
        raise ValueError(f"unknown law {law!r}; choose from {LAWS}")
    edges, cdf, _ = _arc_table(function)
    return np.interp(u, cdf, edges)
