"""Equitability harness: noisy functional relationships, R^2, and interval estimates.

Relationships follow ``(X + e_a, f(X) + e_b)`` with ``e_a ~ U[-a, a]`` and
``e_b ~ U[-b, b]`` independent of X. Model tags name which coordinates are
noisy (``Y`` or ``XY``) and the law of X (``U`` uniform, ``G`` uniform along
the graph of ``f``). The property of interest is R^2 between ``f(X)`` and
the observed y.

An instance at R^2 = 0 is the independence limit ``b = inf`` (and ``a = inf``
for XY models): the noisy coordinates are drawn independently of X.
"""

from __future__ import annotations

import functools
import math
import os
import warnings
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mickit.estimators import BPolicy, SampleData, mic_approx, mic_e
from mickit.functions import FunctionSpec, _composite_rule, law_rule, sample_x

MODELS = ("Y,U", "XY,U", "Y,G", "XY,G")
CONTAINMENT_TOL = 1e-9
R2_TOL = 0.005
CSV_HEADER = ("kind", "x0", "x", "y", "lo", "hi", "width", "power", "critical")


def _law(model: str) -> str:
    return "uniform" if model.endswith("U") else "graph"


def _check_model(model: str) -> str:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    return model


@dataclass(frozen=True)
class ModelInstance:
    """One noisy relationship: function, model tag and noise half-widths.

    ``b = inf`` (with ``a = inf`` for XY models) is the independence limit.
    """

    function: FunctionSpec
    model: str
    b: float = 0.0
    a: float = 0.0

    def __post_init__(self):
        _check_model(self.model)
        if not (self.b >= 0 and self.a >= 0):
            raise ValueError("noise half-widths must be non-negative")
        if self.model.startswith("Y,") and self.a != 0:
            raise ValueError("Y-noise models take no x-noise (a must be 0)")

    @property
    def law(self) -> str:
        return _law(self.model)


def sample_instance(instance: ModelInstance, n: int, seed) -> SampleData:
    """``n`` i.i.d. draws of ``instance``; ``seed`` is anything ``default_rng`` accepts."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    x = sample_x(instance.function, instance.law, n, rng)
    fx = instance.function(x)
    if math.isinf(instance.a):
        xs = rng.uniform(-1.0, 1.0, n)
    else:
        xs = x + instance.a * rng.uniform(-1.0, 1.0, n)
    if math.isinf(instance.b):
        ys = rng.uniform(-1.0, 1.0, n)
    else:
        ys = fx + instance.b * rng.uniform(-1.0, 1.0, n)
    return SampleData(xs, ys)


def r_squared(instance: ModelInstance) -> float:
    """Squared Pearson correlation between ``f`` of the observed x and the observed y.

    Y-noise models use ``Var f / (Var f + b^2 / 3)``. XY models integrate
    over X and the x-noise with a tensor Gauss-Legendre rule.
    """
    f = instance.function
    var = f.variance(instance.law)
    if var <= 0:
        warnings.warn("f(X) is constant; R^2 taken as 0", stacklevel=2)
        return 0.0
    if math.isinf(instance.b) or math.isinf(instance.a):
        return 0.0
    noise_var = instance.b**2 / 3
    if instance.a == 0:
        return var / (var + noise_var)
    x, wx = law_rule(f, instance.law)
    e, we = _composite_rule(32, 8, -instance.a, instance.a)
    we = we / (2 * instance.a)
    shifted = f(x[:, None] + e[None, :])
    fx = f(x)
    m_shift = wx @ shifted @ we
    m_f = wx @ fx
    cov = wx @ (shifted * fx[:, None]) @ we - m_shift * m_f
    var_shift = wx @ shifted**2 @ we - m_shift**2
    if var_shift <= 0:
        return 0.0
    return float(min(max(cov**2 / (var_shift * (var + noise_var)), 0.0), 1.0))


@functools.lru_cache(maxsize=4096)
def noise_for_r2(function: FunctionSpec, model: str, target: float) -> float:
    """Noise half-width giving R^2 = ``target``.

    Y models invert ``Var f / (Var f + b^2/3)`` exactly. XY models set
    ``a = b`` and bisect on ``b`` inside the first bracket where R^2 drops
    below ``target``.
    """
    _check_model(model)
    if not 0 < target <= 1:
        raise ValueError(f"target R^2 must lie in (0, 1], got {target}")
    if target == 1:
        return 0.0
    if model.startswith("Y,"):
        var = function.variance(_law(model))
        return math.sqrt(3 * var * (1 - target) / target)

    def r2(b):
        return r_squared(ModelInstance(function, model, b, b))

    scan = np.concatenate([np.linspace(0, 1, 201)[1:], 1.05 ** np.arange(1, 200)])
    lo = 0.0
    for hi in scan:
        if r2(hi) < target:
            break
        lo = hi
    else:
        raise ArithmeticError(f"R^2 never falls below {target} for {function.label} under {model}")
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = (lo + hi) / 2
        if r2(mid) >= target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def instance_at(function: FunctionSpec, model: str, x: float) -> ModelInstance:
    """Instance with R^2 = ``x``; ``x = 0`` gives the independence limit."""
    if x == 0:
        return ModelInstance(function, model, math.inf, math.inf if model.startswith("XY") else 0.0)
    b = noise_for_r2(function, model, float(x))
    return ModelInstance(function, model, b, b if model.startswith("XY") else 0.0)


# statistics


@dataclass(frozen=True)
class Statistic:
    """A named statistic. If ``uses_instance``, it is called as ``func(sample, instance)``."""

    name: str
    func: object
    uses_instance: bool = False

    def __call__(self, sample: SampleData, instance: ModelInstance | None = None) -> float:
        if self.uses_instance:
            return float(self.func(sample, instance))
        return float(self.func(sample))


STATISTICS = ("mic_e", "mic_approx", "mic_d", "r2-oracle", "constant")


def resolve_statistic(name: str, policy: BPolicy | None = None, precision=None) -> Statistic:
    """Statistic by name; ``r2-oracle`` returns the generating instance's R^2."""
    if name == "mic_e":
        return Statistic(name, lambda s: mic_e(s, policy))
    if name == "mic_approx":
        return Statistic(name, lambda s: mic_approx(s, policy))
    if name == "mic_d":
        from mickit.density import mic_d

        return Statistic(name, lambda s: mic_d(s, precision))
    if name == "r2-oracle":
        return Statistic(name, lambda s, inst: r_squared(inst), uses_instance=True)
    if name == "constant":
        return Statistic(name, lambda s: 0.5)
    raise ValueError(f"unknown statistic {name!r}; choose from {STATISTICS}")


# configuration and Monte-Carlo cache


@dataclass(frozen=True)
class BenchConfig:
    """Monte-Carlo settings shared by every interval and power estimate.

    ``grid_step`` is the spacing of the R^2 grid ``{0, h, ..., 1}`` and of
    the y-grid of the equitability report.
    """

    functions: tuple = (FunctionSpec("linear"), FunctionSpec("quadratic"))
    models: tuple = ("Y,U",)
    n: int = 500
    trials: int = 500
    seed: int = 0
    alpha: float = 0.05
    grid_step: float = 0.05

    def __post_init__(self):
        funcs = tuple(f if isinstance(f, FunctionSpec) else FunctionSpec.parse(f) for f in self.functions)
        if not funcs:
            raise ValueError("function set is empty")
        models = tuple(_check_model(m) for m in self.models)
        if not models:
            raise ValueError("model set is empty")
        if self.n < 2 or self.trials < 1:
            raise ValueError("need n >= 2 and trials >= 1")
        _check_alpha(self.alpha)
        if not 0 < self.grid_step <= 0.05:
            raise ValueError(f"grid_step must lie in (0, 0.05], got {self.grid_step}")
        steps = 1.0 / self.grid_step
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("grid_step must divide 1")
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "models", models)

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, round(1.0 / self.grid_step) + 1)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MICKIT_THREADS", "1")))
    except ValueError:
        return 1


class StatCache:
    """Sampling distributions of one statistic, keyed by instance.

    Trial ``t`` of the instance for ``(function, model, x)`` uses the seed
    ``(seed, crc32(function label), model index, round(x * 1e6), t)``, so
    values do not depend on evaluation order or on which grids request them.
    """

    def __init__(self, stat: Statistic, cfg: BenchConfig):
        self.stat = stat
        self.cfg = cfg
        self._values: dict = {}

    def values(self, function: FunctionSpec, model: str, x: float) -> np.ndarray:
        key = (function.label, model, round(x * 1e6))
        if key not in self._values:
            self._values[key] = self._simulate(function, model, x, key)
        return self._values[key]

    def _simulate(self, function, model, x, key) -> np.ndarray:
        instance = instance_at(function, model, x)
        words = [self.cfg.seed, zlib.crc32(key[0].encode()), MODELS.index(model), key[2]]

        def trial(t):
            sample = sample_instance(instance, self.cfg.n, np.random.SeedSequence(words + [t]))
            return self.stat(sample, instance)

        threads = _threads()
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                out = list(pool.map(trial, range(self.cfg.trials)))
        else:
            out = [trial(t) for t in range(self.cfg.trials)]
        arr = np.array(out, dtype=float)
        arr.setflags(write=False)
        return arr

    def instances(self):
        for f in self.cfg.functions:
            for m in self.cfg.models:
                yield f, m


def _cache_for(stat, cfg, cache):
    if cache is not None:
        if cache.cfg != cfg or cache.stat is not stat:
            raise ValueError("cache was built for a different statistic or config")
        return cache
    return StatCache(stat, cfg)


# interval estimates


@dataclass(frozen=True)
class IntervalEstimate:
    """Closed interval ``[lo, hi]``; ``empty`` marks that nothing qualified."""

    lo: float
    hi: float
    alpha: float
    n: int
    trials: int
    seed: int
    empty: bool = False
    resolution: float | None = None

    def __post_init__(self):
        if not self.empty and not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return math.nan if self.empty else self.hi - self.lo

    def contains(self, value: float, tol: float = CONTAINMENT_TOL) -> bool:
        return not self.empty and self.lo - tol <= value <= self.hi + tol


def reliable_interval(
    stat: Statistic, x: float, alpha: float, cfg: BenchConfig, cache: StatCache | None = None
) -> IntervalEstimate:
    """Smallest interval covering the ``[alpha, 1 - alpha]`` quantile range of every instance at R^2 = ``x``.

    Quantiles are type 7 (linear interpolation).
    """
    _check_alpha(alpha)
    cache = _cache_for(stat, cfg, cache)
    lows, highs = [], []
    for f, m in cache.instances():
        vals = cache.values(f, m, x)
        lo, hi = np.quantile(vals, [alpha, 1 - alpha])
        lows.append(lo)
        highs.append(hi)
    return IntervalEstimate(float(min(lows)), float(max(highs)), alpha, cfg.n, cfg.trials, cfg.seed)


def _reliable_grid(stat, alpha, cfg, cache) -> list[tuple[float, IntervalEstimate]]:
    return [(float(x), reliable_interval(stat, float(x), alpha, cfg, cache)) for x in cfg.grid()]


def _interpretable_from(grid_intervals, y, alpha, cfg) -> IntervalEstimate:
    hits = [x for x, iv in grid_intervals if iv.contains(y)]
    if not hits:
        return IntervalEstimate(math.nan, math.nan, alpha, cfg.n, cfg.trials, cfg.seed, True, cfg.grid_step)
    return IntervalEstimate(min(hits), max(hits), alpha, cfg.n, cfg.trials, cfg.seed, False, cfg.grid_step)


def interpretable_interval(
    stat: Statistic, y: float, alpha: float, cfg: BenchConfig, cache: StatCache | None = None
) -> IntervalEstimate:
    """Smallest interval of R^2 values ``x`` on the grid whose reliable interval contains ``y``.

    Returns an interval with ``empty=True`` when no grid point qualifies.
    """
    cache = _cache_for(stat, cfg, cache)
    return _interpretable_from(_reliable_grid(stat, alpha, cfg, cache), y, alpha, cfg)


# power


@dataclass(frozen=True)
class PowerCurve:
    """Power of the right-tailed test of R^2 = ``x0`` against each ``x`` in ``xs``."""

    x0: float
    alpha: float
    xs: tuple
    power: tuple
    critical: float
    mc_error: tuple = field(default=())


def power_function(
    stat: Statistic, x0: float, xs, alpha: float, cfg: BenchConfig, cache: StatCache | None = None
) -> PowerCurve:
    """Worst-case power curve.

    The critical value is the largest ``1 - alpha`` quantile over null
    instances; the power at ``x`` is the smallest rejection rate over the
    instances with R^2 = ``x``.
    """
    _check_alpha(alpha)
    cache = _cache_for(stat, cfg, cache)
    critical = max(float(np.quantile(cache.values(f, m, x0), 1 - alpha)) for f, m in cache.instances())
    powers, errors = [], []
    for x in xs:
        rates = [float(np.mean(cache.values(f, m, float(x)) >= critical)) for f, m in cache.instances()]
        p = min(rates)
        powers.append(p)
        errors.append(math.sqrt(p * (1 - p) / cfg.trials))
    return PowerCurve(float(x0), alpha, tuple(float(x) for x in xs), tuple(powers), critical, tuple(errors))


@dataclass(frozen=True)
class UncertainSet:
    """Grid points ``x >= x0`` where power stays below ``1 - alpha``."""

    diameter: float
    lo: float | None
    hi: float | None


def uncertain_set(curve: PowerCurve) -> UncertainSet:
    """Diameter and end points of ``{x >= x0 : power(x) < 1 - alpha}`` on the curve's grid."""
    members = [x for x, p in zip(curve.xs, curve.power) if x >= curve.x0 - CONTAINMENT_TOL and p < 1 - curve.alpha]
    if not members:
        return UncertainSet(0.0, None, None)
    return UncertainSet(max(members) - min(members), min(members), max(members))


# equitability report


@dataclass(frozen=True)
class EquitabilityReport:
    """Interpretable intervals over a y-grid.

    ``worst_width`` is the largest width; ``average_reciprocal`` averages
    ``1 / max(width, grid_step)`` over y-values with a non-empty interval.
    """

    statistic: str
    rows: tuple
    worst_width: float
    average_reciprocal: float
    grid_step: float


def equitability_report(stat: Statistic, cfg: BenchConfig, cache: StatCache | None = None) -> EquitabilityReport:
    """Rows ``(y, lo, hi, width)`` for ``y`` on the grid ``{0, h, ..., 1}``."""
    cache = _cache_for(stat, cfg, cache)
    grid_intervals = _reliable_grid(stat, cfg.alpha, cfg, cache)
    rows = []
    for y in cfg.grid():
        iv = _interpretable_from(grid_intervals, float(y), cfg.alpha, cfg)
        rows.append((float(y), iv.lo, iv.hi, iv.width))
    widths = [r[3] for r in rows if not math.isnan(r[3])]
    worst = max(widths) if widths else math.nan
    average = float(np.mean([1.0 / max(w, cfg.grid_step) for w in widths])) if widths else math.nan
    return EquitabilityReport(stat.name, tuple(rows), worst, average, cfg.grid_step)
