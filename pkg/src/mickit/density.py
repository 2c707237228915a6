"""MIC* of a known density via its boundary, and the histogram estimator MICd.

A :class:`DensitySpec` is a mixture of components supported in ``[0, 1]^2``.
It is discretized onto a master grid whose rows and columns are marginal
equipartitions; boundary entries are exact one-axis optimizations on that
grid with the other axis kept at full resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from mickit.estimators import SampleData
from mickit.functions import LAWS, FunctionSpec, _arc_table, graph_density, sample_x
from mickit.info import MASS_TOL, DiscreteJoint, binary_entropy
from mickit.partition import MasterJoint, optimize_partition_dp, partition_profile

SCHEMA_VERSION = 1
KINDS = ("uniform-box", "function-band", "grid-histogram")
BISECTION_TOL = 1e-10
UNIT_BOX = (0.0, 1.0, 0.0, 1.0)

# kinks of the library functions, where the graph law may jump
_FUNCTION_KINKS = (0.25, 0.5, 0.75)
# midpoint panels used for the y-marginal of a band
_MARGINAL_PANELS = 1 << 14


def _check_box(box) -> tuple[float, float, float, float]:
    box = tuple(float(v) for v in box)
    if len(box) != 4:
        raise ValueError(f"box needs [x0, x1, y0, y1], got {box}")
    x0, x1, y0, y1 = box
    if not (0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0):
        raise ValueError(f"box {box} must satisfy 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1")
    return box


def _overlap(edges: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Length of ``[edges[i], edges[i+1]] & [lo, hi]`` for each i."""
    return np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0.0, None)


@dataclass(frozen=True)
class UniformBox:
    """Uniform density on ``[x0, x1] x [y0, y1]``."""

    box: tuple = UNIT_BOX

    def __post_init__(self):
        object.__setattr__(self, "box", _check_box(self.box))

    kind = "uniform-box"

    def to_params(self) -> dict:
        x0, x1, y0, y1 = self.box
        return {"x": [x0, x1], "y": [y0, y1]}

    def marginal_cdf(self, axis: str, t):
        x0, x1, y0, y1 = self.box
        lo, hi = (x0, x1) if axis == "x" else (y0, y1)
        return np.clip((np.asarray(t, dtype=float) - lo) / (hi - lo), 0.0, 1.0)

    def cell_masses(self, x_edges, y_edges):
        x0, x1, y0, y1 = self.box
        fx = _overlap(x_edges, x0, x1) / (x1 - x0)
        fy = _overlap(y_edges, y0, y1) / (y1 - y0)
        return np.outer(fy, fx), None

    def pdf(self, x, y):
        x0, x1, y0, y1 = self.box
        inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        return inside / ((x1 - x0) * (y1 - y0))

    def sample(self, n: int, rng: np.random.Generator):
        x0, x1, y0, y1 = self.box
        return x0 + (x1 - x0) * rng.random(n), y0 + (y1 - y0) * rng.random(n)


@dataclass(frozen=True)
class GridHistogram:
    """Piecewise-constant density on an equal-width grid over ``[0, 1]^2``.

    ``mass[i, j]`` is the probability of y-bin ``i`` and x-bin ``j``.
    """

    mass: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mass", DiscreteJoint(self.mass).mass)

    kind = "grid-histogram"

    def to_params(self) -> dict:
        return {"mass": self.mass.tolist()}

    def _edges(self, axis: str) -> np.ndarray:
        bins = self.mass.shape[1] if axis == "x" else self.mass.shape[0]
        return np.linspace(0.0, 1.0, bins + 1)

    def marginal_cdf(self, axis: str, t):
        marg = self.mass.sum(axis=0) if axis == "x" else self.mass.sum(axis=1)
        cdf = np.concatenate([[0.0], np.cumsum(marg)])
        return np.interp(np.asarray(t, dtype=float), self._edges(axis), cdf)

    def _fractions(self, edges: np.ndarray, axis: str) -> np.ndarray:
        own = self._edges(axis)
        width = own[1] - own[0]
        lo = np.maximum(edges[:-1, None], own[None, :-1])
        hi = np.minimum(edges[1:, None], own[None, 1:])
        return np.clip(hi - lo, 0.0, None) / width

    def cell_masses(self, x_edges, y_edges):
        return self._fractions(y_edges, "y") @ self.mass @ self._fractions(x_edges, "x").T, None

    def pdf(self, x, y):
        rows, cols = self.mass.shape
        inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
        j = np.clip((np.asarray(x) * cols).astype(int), 0, cols - 1)
        i = np.clip((np.asarray(y) * rows).astype(int), 0, rows - 1)
        return inside * self.mass[i, j] * rows * cols

    def sample(self, n: int, rng: np.random.Generator):
        rows, cols = self.mass.shape
        cell = rng.choice(rows * cols, size=n, p=self.mass.ravel())
        i, j = np.divmod(cell, cols)
        return (j + rng.random(n)) / cols, (i + rng.random(n)) / rows


@dataclass(frozen=True)
class FunctionBand:
    """Law of ``(X + e_a, f(X) + e_b)`` with uniform noises, placed in a box.

    The latent support ``[-a, 1 + a] x [min f - b, max f + b]`` is mapped
    affinely onto ``box``. ``b`` must be positive so the law has a density.

    Parameters
    ----------
    function : FunctionSpec
    law : str
        ``"uniform"`` or ``"graph"`` law for X.
    b, a : float
        Half-widths of the y-noise and x-noise.
    box : tuple
        Placement ``(x0, x1, y0, y1)``.
    panels : int
        Midpoint panels per smooth piece for cell masses; the error estimate
        compares against twice as many.
    """

    function: FunctionSpec
    law: str = "uniform"
    b: float = 0.1
    a: float = 0.0
    box: tuple = UNIT_BOX
    panels: int = 64

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown law {self.law!r}; choose from {LAWS}")
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"band half-width b must be positive, got {self.b}")
        if not (math.isfinite(self.a) and self.a >= 0):
            raise ValueError(f"x-noise half-width a must be non-negative, got {self.a}")
        if self.panels < 1:
            raise ValueError("panels must be positive")
        object.__setattr__(self, "box", _check_box(self.box))

    kind = "function-band"

    def to_params(self) -> dict:
        out = {"function": self.function.name, "law": self.law, "b": self.b, "a": self.a, "box": list(self.box)}
        if self.function.frequency is not None:
            out["frequency"] = self.function.frequency
        return out

    # latent <-> placed coordinates
    def _spans(self):
        lo, hi = self.function.bounds()
        return (-self.a, 1.0 + self.a), (lo - self.b, hi + self.b)

    def _to_latent(self, axis: str, t):
        (lx, hx), (ly, hy) = self._spans()
        x0, x1, y0, y1 = self.box
        t = np.asarray(t, dtype=float)
        if axis == "x":
            return lx + (t - x0) / (x1 - x0) * (hx - lx)
        return ly + (t - y0) / (y1 - y0) * (hy - ly)

    def _from_latent(self, axis: str, t):
        (lx, hx), (ly, hy) = self._spans()
        x0, x1, y0, y1 = self.box
        if axis == "x":
            return x0 + (t - lx) / (hx - lx) * (x1 - x0)
        return y0 + (t - ly) / (hy - ly) * (y1 - y0)

    def _x_cdf(self, t):
        if self.law == "uniform":
            return np.clip(t, 0.0, 1.0)
        edges, cdf, _ = _arc_table(self.function)
        return np.interp(t, edges, cdf)

    def _x_first_moment(self, t):
        """``E[X; X <= t]``."""
        if self.law == "uniform":
            c = np.clip(t, 0.0, 1.0)
            return c * c / 2
        edges, cdf, _ = _arc_table(self.function)
        mids = (edges[:-1] + edges[1:]) / 2
        moment = np.concatenate([[0.0], np.cumsum(mids * np.diff(cdf))])
        return np.interp(t, edges, moment)

    def _noise_cdf(self, t, half):
        if half == 0:
            return (np.asarray(t) >= 0).astype(float)
        return np.clip((np.asarray(t) + half) / (2 * half), 0.0, 1.0)

    def marginal_cdf(self, axis: str, t):
        t = self._to_latent(axis, t)
        if axis == "x":
            if self.a == 0:
                return self._x_cdf(t)
            # integral of p(x) * (t + a - x) / 2a over the ramp, closed form
            lo = np.clip(t - self.a, 0.0, 1.0)
            hi = np.clip(t + self.a, 0.0, 1.0)
            ramp = (t + self.a) * (self._x_cdf(hi) - self._x_cdf(lo)) - (
                self._x_first_moment(hi) - self._x_first_moment(lo)
            )
            return self._x_cdf(lo) + ramp / (2 * self.a)
        nodes = (np.arange(_MARGINAL_PANELS) + 0.5) / _MARGINAL_PANELS
        weights = self._density_x(nodes) / _MARGINAL_PANELS
        fx = self.function(nodes)
        t = np.atleast_1d(t)
        out = np.array([weights @ self._noise_cdf(v - fx, self.b) for v in t.ravel()])
        return out.reshape(t.shape)

    def _density_x(self, x):
        if self.law == "uniform":
            return ((x >= 0) & (x <= 1)).astype(float)
        return graph_density(self.function, x)

    def _midpoints(self, breaks: np.ndarray, panels: int):
        lo, hi = breaks[:-1], breaks[1:]
        frac = (np.arange(panels) + 0.5) / panels
        nodes = (lo[:, None] + (hi - lo)[:, None] * frac[None, :]).ravel()
        weights = np.repeat((hi - lo) / panels, panels)
        return nodes, weights

    def _masses(self, ux: np.ndarray, vy: np.ndarray, panels: int) -> np.ndarray:
        breaks = np.concatenate([[0.0, 1.0], ux - self.a, ux + self.a, _FUNCTION_KINKS])
        breaks = np.unique(np.clip(breaks, 0.0, 1.0))
        nodes, weights = self._midpoints(breaks, panels)
        weights = weights * self._density_x(nodes)
        col = np.diff(self._noise_cdf(ux[None, :] - nodes[:, None], self.a), axis=1)
        fx = self.function(nodes)
        row = np.diff(self._noise_cdf(vy[None, :] - fx[:, None], self.b), axis=1)
        return (row * weights[:, None]).T @ col

    def cell_masses(self, x_edges, y_edges):
        ux = self._to_latent("x", x_edges)
        vy = self._to_latent("y", y_edges)
        coarse = self._masses(ux, vy, self.panels)
        fine = self._masses(ux, vy, 2 * self.panels)
        return fine, coarse

    def pdf(self, x, y, nodes: int = 512):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        (lx, hx), (ly, hy) = self._spans()
        x0, x1, y0, y1 = self.box
        jac = (hx - lx) / (x1 - x0) * (hy - ly) / (y1 - y0)
        inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        u = self._to_latent("x", x)
        v = self._to_latent("y", y)
        if self.a == 0:
            band = np.abs(v - self.function(u)) <= self.b
            return inside * jac * self._density_x(u) * band / (2 * self.b)
        frac = (np.arange(nodes) + 0.5) / nodes
        lo = np.clip(u - self.a, 0.0, 1.0)
        hi = np.clip(u + self.a, 0.0, 1.0)
        pts = lo[..., None] + (hi - lo)[..., None] * frac
        band = np.abs(v[..., None] - self.function(pts)) <= self.b
        integral = (self._density_x(pts) * band).sum(axis=-1) * (hi - lo) / nodes
        return inside * jac * integral / (4 * self.a * self.b)

    def sample(self, n: int, rng: np.random.Generator):
        x = sample_x(self.function, self.law, n, rng)
        u = x + self.a * rng.uniform(-1.0, 1.0, n)
        v = self.function(x) + self.b * rng.uniform(-1.0, 1.0, n)
        return self._from_latent("x", u), self._from_latent("y", v)


_COMPONENT_TYPES = {cls.kind: cls for cls in (UniformBox, FunctionBand, GridHistogram)}


def _component_from_dict(kind: str, params: dict):
    if kind == "uniform-box":
        return UniformBox(tuple(params.get("x", (0, 1))) + tuple(params.get("y", (0, 1))))
    if kind == "grid-histogram":
        return GridHistogram(np.asarray(params["mass"], dtype=float))
    if kind == "function-band":
        function = FunctionSpec(params["function"], params.get("frequency"))
        return FunctionBand(
            function,
            law=params.get("law", "uniform"),
            b=float(params["b"]),
            a=float(params.get("a", 0.0)),
            box=tuple(params.get("box", UNIT_BOX)),
        )
    raise ValueError(f"unknown component kind {kind!r}; choose from {KINDS}")


@dataclass(frozen=True)
class DensitySpec:
    """Mixture of density components on ``[0, 1]^2``.

    Parameters
    ----------
    components : sequence of (weight, component)
        Weights are non-negative and sum to one.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), c) for w, c in self.components)
        if not comps:
            raise ValueError("a density needs at least one component")
        for w, c in comps:
            if not (math.isfinite(w) and w >= 0):
                raise ValueError(f"component weights must be non-negative, got {w}")
            if not isinstance(c, tuple(_COMPONENT_TYPES.values())):
                raise TypeError(f"unsupported component {c!r}")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"component weights sum to {total!r}, expected 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, component) -> "DensitySpec":
        return cls(((1.0, component),))

    @classmethod
    def from_dict(cls, data: dict) -> "DensitySpec":
        if not isinstance(data, dict):
            raise ValueError("density spec must be a JSON object")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
        items = data.get("components")
        if not isinstance(items, list):
            raise ValueError("density spec needs a 'components' list")
        comps = []
        for i, item in enumerate(items):
            try:
                comps.append((float(item["weight"]), _component_from_dict(item["kind"], item.get("params", {}))))
            except (KeyError, TypeError) as exc:
                raise ValueError(f"component {i} is malformed: {exc!r}") from exc
        return cls(tuple(comps))

    @classmethod
    def from_json(cls, text: str) -> "DensitySpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"density spec is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "components": [{"kind": c.kind, "weight": w, "params": c.to_params()} for w, c in self.components],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def marginal_cdf(self, axis: str, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return sum(w * c.marginal_cdf(axis, t) for w, c in self.components if w > 0)

    def pdf(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return sum(w * c.pdf(x, y) for w, c in self.components if w > 0)

    def sample(self, n: int, rng: np.random.Generator) -> SampleData:
        """``n`` independent draws; component counts are multinomial."""
        weights = np.array([w for w, _ in self.components])
        counts = rng.multinomial(n, weights / weights.sum())
        xs, ys = [], []
        for (_, comp), m in zip(self.components, counts):
            if m:
                x, y = comp.sample(int(m), rng)
                xs.append(x)
                ys.append(y)
        x = np.concatenate(xs)
        y = np.concatenate(ys)
        order = rng.permutation(n)
        return SampleData(x[order], y[order])


def uniform_density() -> DensitySpec:
    return DensitySpec.single(UniformBox())


def two_block_density() -> DensitySpec:
    """Half the mass uniform on ``[0, 1/2]^2``, half on ``[1/2, 1]^2``."""
    return DensitySpec(((0.5, UniformBox((0, 0.5, 0, 0.5))), (0.5, UniformBox((0.5, 1, 0.5, 1)))))


@dataclass(frozen=True)
class PrecisionParams:
    """Accuracy controls for MIC*.

    Parameters
    ----------
    epsilon : float
        Master grid has ``ceil(1 / epsilon)`` rows and columns; ``0 < epsilon <= 1/8``.
    s_max : int
        Largest boundary index examined.
    stop_tol : float
        Stop growing ``s`` once the running maximum rises by less than this.
    """

    epsilon: float = 1.0 / 64
    s_max: int = 32
    stop_tol: float = 1e-3

    def __post_init__(self):
        if not 0 < self.epsilon <= 1.0 / 8:
            raise ValueError(f"epsilon must lie in (0, 1/8], got {self.epsilon}")
        if self.s_max < 2:
            raise ValueError(f"s_max must be at least 2, got {self.s_max}")
        if not self.stop_tol >= 0:
            raise ValueError("stop_tol must be non-negative")

    @property
    def resolution(self) -> int:
        return math.ceil(1.0 / self.epsilon - 1e-9)


@dataclass(frozen=True)
class MassGrid:
    """A density discretized onto marginal equipartitions.

    ``error`` is the quadrature estimate ``sum |refined - coarse|`` over
    cells (zero when every component integrates exactly).
    """

    joint: DiscreteJoint
    x_edges: np.ndarray
    y_edges: np.ndarray
    error: float = 0.0

    @property
    def rows(self) -> int:
        return self.joint.shape[0]

    @property
    def cols(self) -> int:
        return self.joint.shape[1]


def marginal_quantiles(density: DensitySpec, axis: str, parts: int) -> np.ndarray:
    """Edges ``0 = e_0 < ... < e_parts = 1`` splitting the marginal into equal masses.

    Inner edges are found by simultaneous bisection to ``BISECTION_TOL``.
    """
    targets = np.arange(1, parts) / parts
    lo = np.zeros(parts - 1)
    hi = np.ones(parts - 1)
    while np.max(hi - lo) > BISECTION_TOL:
        mid = (lo + hi) / 2
        below = density.marginal_cdf(axis, mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.concatenate([[0.0], hi, [1.0]])


def discretize(density: DensitySpec, params: PrecisionParams | None = None, *, resolution: int | None = None) -> MassGrid:
    """Cell masses of ``density`` on the master grid of ``params``.

    Rows and columns are marginal equipartitions. Boxes and histograms are
    integrated exactly; bands by a composite midpoint rule split at every
    kink of the noise ramps, refined once to estimate the error.
    ``resolution`` overrides the number of rows and columns, for grids
    coarser than ``PrecisionParams`` admits.
    """
    params = params or PrecisionParams()
    res = params.resolution if resolution is None else int(resolution)
    if res < 1:
        raise ValueError(f"resolution must be positive, got {res}")
    x_edges = marginal_quantiles(density, "x", res)
    y_edges = marginal_quantiles(density, "y", res)
    mass = np.zeros((res, res))
    error = 0.0
    for w, comp in density.components:
        if w == 0:
            continue
        fine, coarse = comp.cell_masses(x_edges, y_edges)
        mass += w * fine
        if coarse is not None:
            error += w * float(np.abs(fine - coarse).sum())
    mass = np.clip(mass, 0.0, None)
    return MassGrid(DiscreteJoint(mass / mass.sum()), x_edges, y_edges, error)


def _axis_master(grid: MassGrid, axis: str) -> MasterJoint:
    if axis not in ("rows", "cols"):
        raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")
    return MasterJoint(grid.joint, axis)


def boundary_entry(grid: MassGrid, k: int, axis: str) -> float:
    """Normalized boundary entry with ``k`` parts on ``axis``, the other at full resolution.

    ``axis="rows"`` cuts the y-axis into at most ``k`` rows; ``"cols"`` the x-axis.
    """
    master = _axis_master(grid, axis)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if k > master.size:
        raise ValueError(f"k={k} exceeds the {master.size} master cells on {axis}")
    _, nats = optimize_partition_dp(master, k)
    return min(nats / math.log(k), 1.0)


def discretization_error(epsilon: float, k: int) -> float:
    """Normalized master-grid error term for boundary index ``k``.

    ``(2 (H_b((k-1) eps) + (k-1) eps) + k H_b(eps)) / ln k``; the binary
    entropy argument is capped at 1/2, which only enlarges the term.
    """
    spread = (k - 1) * epsilon
    nats = 2 * (binary_entropy(min(spread, 0.5)) + spread) + k * binary_entropy(min(epsilon, 0.5))
    return nats / math.log(k)


def quadrature_error(l1_error: float, k: int) -> float:
    """Normalized effect of an L1 mass error on mutual information at index ``k``.

    Moving ``delta = l1_error / 2`` of mass changes mutual information on a
    grid with ``min`` side ``k`` by at most ``4 H_b(2 delta) + 7 delta ln k``.
    """
    delta = l1_error / 2
    if delta > 0.25:
        return 1.0
    return (4 * binary_entropy(2 * delta) + 7 * delta * math.log(k)) / math.log(k)


@dataclass(frozen=True)
class MicStarResult:
    """MIC* estimate with its error accounting.

    Unpacks as ``(score, error_bound)``. ``score`` is a lower bound on the
    boundary supremum up to the discretization error: indices beyond
    ``s_reached`` were not examined.
    """

    score: float
    error_bound: float
    s_reached: int
    quadrature_error: float
    argmax: tuple = field(default=(2, "rows"))
    caveat: str = "lower bound modulo discretization; boundary truncated at s_reached"

    def __iter__(self):
        return iter((self.score, self.error_bound))


def _mic_star_grid(grid: MassGrid, params: PrecisionParams) -> MicStarResult:
    kmax = min(params.s_max, grid.rows, grid.cols)
    if kmax < 2:
        raise ValueError("master grid too coarse for a 2-part boundary entry")
    profiles = {axis: partition_profile(_axis_master(grid, axis), kmax) for axis in ("rows", "cols")}

    def entry(k: int) -> tuple[float, str]:
        scores = [(min(profiles[axis][k] / math.log(k), 1.0), axis) for axis in ("rows", "cols")]
        return max(scores, key=lambda s: s[0])

    best, axis = entry(2)
    argmax = (2, axis)
    s_reached = 2
    for s in range(3, kmax + 1):
        s_reached = s
        value, axis = entry(s)
        if value > best:
            gain = value - best
            best, argmax = value, (s, axis)
            if gain >= params.stop_tol:
                continue
        break
    disc = max(discretization_error(1.0 / grid.rows, k) for k in range(2, s_reached + 1))
    quad = max(quadrature_error(grid.error, k) for k in range(2, s_reached + 1))
    bound = min(disc + quad, 1.0)
    return MicStarResult(float(best), float(bound), s_reached, grid.error, argmax)


def mic_star(density: DensitySpec, params: PrecisionParams | None = None) -> MicStarResult:
    """MIC* of ``density`` as the maximum of its boundary entries.

    Entries with ``k = 2, 3, ...`` parts on either axis are scanned until the
    running maximum gains less than ``stop_tol`` or ``k`` reaches ``s_max``.

    Returns
    -------
    MicStarResult
        ``score``, ``error_bound`` (discretization plus quadrature terms,
        capped at 1), ``s_reached`` and the raw quadrature estimate.
    """
    params = params or PrecisionParams()
    return _mic_star_grid(discretize(density, params), params)


def square_grid_mi(grid: MassGrid, k: int, sweeps: int = 20) -> float:
    """Mutual information (nats) of a good ``k``-by-``k`` coarsening of the master grid.

    Alternates exact one-axis optimizations starting from an even split of
    the columns; the result is a lower bound on the best ``k``-by-``k`` grid.
    """
    mass = grid.joint.mass
    cols = np.linspace(0, grid.cols, k + 1).round().astype(int)
    best = -1.0
    for _ in range(sweeps):
        merged = np.add.reduceat(mass, cols[:-1], axis=1)
        rows_part, _ = optimize_partition_dp(MasterJoint(DiscreteJoint(merged / merged.sum()), "rows"), k)
        rows = np.array((0,) + rows_part.cuts, dtype=int)
        merged = np.add.reduceat(mass, rows, axis=0)
        cols_part, value = optimize_partition_dp(MasterJoint(DiscreteJoint(merged / merged.sum()), "cols"), k)
        cols = np.array((0,) + cols_part.cuts + (grid.cols,), dtype=int)
        if value <= best + 1e-15:
            break
        best = value
    return max(best, 0.0)


def unnormalized_surrogate(grid: MassGrid, s: int) -> float:
    """Largest unnormalized square-grid mutual information over ``2 <= k <= s``."""
    return max(square_grid_mi(grid, k) for k in range(2, min(s, grid.rows, grid.cols) + 1))


def histogram_density(sample: SampleData, bins_per_axis: int) -> DensitySpec:
    """Equal-width histogram of ``sample`` as a grid-histogram density.

    Samples inside ``[0, 1]^2`` are binned there; otherwise each axis is
    rescaled to ``[0, 1]`` by its range first (a constant axis maps to 1/2).
    """
    if bins_per_axis < 1:
        raise ValueError("bins_per_axis must be positive")
    if sample.n < bins_per_axis**2:
        raise ValueError(f"need at least {bins_per_axis ** 2} points for {bins_per_axis} bins, got {sample.n}")
    x, y = sample.x, sample.y
    if not (x.min() >= 0 and x.max() <= 1 and y.min() >= 0 and y.max() <= 1):
        x, y = _rescale(x), _rescale(y)
    j = np.minimum((x * bins_per_axis).astype(int), bins_per_axis - 1)
    i = np.minimum((y * bins_per_axis).astype(int), bins_per_axis - 1)
    counts = np.bincount(i * bins_per_axis + j, minlength=bins_per_axis**2).reshape(bins_per_axis, bins_per_axis)
    return DensitySpec.single(GridHistogram(counts / sample.n))


def _rescale(v: np.ndarray) -> np.ndarray:
    span = v.max() - v.min()
    if span == 0:
        return np.full_like(v, 0.5)
    return (v - v.min()) / span


def mic_d_bins(n: int) -> int:
    """Smallest ``b`` with ``b**3 >= n``."""
    b = max(1, round(n ** (1.0 / 3.0)))
    while b**3 < n:
        b += 1
    while b > 1 and (b - 1) ** 3 >= n:
        b -= 1
    return b


def mic_d(sample: SampleData, params: PrecisionParams | None = None) -> float:
    """MICd: MIC* of the histogram with ``ceil(n ** (1/3))`` bins per axis."""
    if sample.n < 16:
        raise ValueError(f"MICd needs at least 16 points, got {sample.n}")
    return mic_star(histogram_density(sample, mic_d_bins(sample.n)), params).score
