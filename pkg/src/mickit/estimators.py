"""Sample characteristic matrices and the MIC family of statistics.

Entry ``(k, l)`` of a characteristic matrix refers to grids with ``k`` rows
(y-parts) and ``l`` columns (x-parts), normalized by ``log min(k, l)``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from mickit._kernels import xlogx_table
from mickit.partition import best_costs_counts, equipartition_splits, sorted_cell_ids

ROUND_TOL = 1e-12


@dataclass(frozen=True)
class SampleData:
    """A paired sample ``(x_i, y_i)``.

    Parameters
    ----------
    x, y : array_like
        Equal-length finite coordinate vectors. Statistics need at least two
        points; a single point is accepted so that generators can emit it.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError(f"x and y differ in length: {x.size} vs {y.size}")
        if x.size < 1:
            raise ValueError("a sample needs at least one point")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("sample contains NaN or infinite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, points) -> "SampleData":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        return cls(pts[:, 0], pts[:, 1])

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def transpose(self) -> "SampleData":
        return SampleData(self.y, self.x)


@dataclass(frozen=True)
class BPolicy:
    """Grid budget ``B(n) = max(floor, ceil(n ** alpha))``.

    Grids are further limited to ``k * l <= n``.
    """

    alpha: float = 0.6
    floor: int = 4

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.floor < 4:
            raise ValueError("floor must be at least 4 so that 2x2 grids are allowed")

    def __call__(self, n: int) -> int:
        return max(self.floor, math.ceil(n**self.alpha - 1e-9))

    def effective(self, n: int) -> int:
        """Budget after the ``k * l <= n`` guard."""
        return min(self(n), n)


def budget_keys(budget: int) -> list[tuple[int, int]]:
    """All ``(k, l)`` with ``k, l >= 2`` and ``k * l <= budget``, sorted."""
    return [(k, l) for k in range(2, budget // 2 + 1) for l in range(2, budget // k + 1)]


@dataclass(frozen=True)
class CharMatrix:
    """Normalized scores keyed by ``(k, l)``.

    ``variant`` is ``"sample-equi"`` (one axis equipartitioned, as in MICe),
    ``"sample-approx"`` (the heuristic scheme) or ``"sample-full"``
    (exhaustive grid search).
    """

    entries: dict
    variant: str
    budget: int
    n: int = 0

    def argmax(self) -> tuple[int, int]:
        """Key of the maximum; ties go to the smallest ``k * l``, then smallest ``k``."""
        top = max(self.entries.values())
        keys = [key for key, v in self.entries.items() if v == top]
        return min(keys, key=lambda kl: (kl[0] * kl[1], kl[0]))

    def max(self) -> float:
        return float(max(self.entries.values()))

    def to_array(self) -> np.ndarray:
        """Dense array indexed ``[k, l]``, NaN outside the budget."""
        size = self.budget // 2 + 1
        out = np.full((size, size), np.nan)
        for (k, l), v in self.entries.items():
            out[k, l] = v
        return out


def _normalize(nats: float, k: int, l: int) -> float:
    v = nats / math.log(min(k, l))
    if v < ROUND_TOL:
        return 0.0
    if v > 1.0 - ROUND_TOL:
        return 1.0
    return v


class _AxisCache:
    """Per-sample sort orders and tie structure shared across grid sizes."""

    def __init__(self, sample: SampleData):
        self.n = sample.n
        self.table = xlogx_table(self.n)
        self.values = {"x": sample.x, "y": sample.y}
        self.sorted = {}
        self.cells = {}
        for axis, v in self.values.items():
            order, cell_id = sorted_cell_ids(v)
            self.sorted[axis] = order
            self.cells[axis] = cell_id

    def constant(self, axis: str) -> bool:
        return self.cells[axis][-1] == 0

    def equi_labels(self, axis: str, parts: int) -> tuple[np.ndarray, int]:
        """Equipartition label of every point (original order) and the parts achieved."""
        order = self.sorted[axis]
        splits, _ = equipartition_splits(self.values[axis][order], parts)
        labels = np.empty(self.n, dtype=np.int64)
        labels[order] = np.searchsorted(splits, np.arange(self.n), side="right")
        return labels, splits.size + 1

    def optimize(self, equi_axis: str, parts: int, kmax: int) -> np.ndarray:
        """Best mutual information (nats) with ``equi_axis`` equipartitioned.

        Returns ``I[j]`` for ``j = 0..kmax``: the free axis cut into at most
        ``j`` parts.
        """
        free = "y" if equi_axis == "x" else "x"
        labels, got = self.equi_labels(equi_axis, parts)
        counts = np.bincount(labels, minlength=got)
        h_equi = (self.table[self.n] - self.table[counts].sum()) / self.n
        order = self.sorted[free]
        costs = best_costs_counts(self.cells[free], labels[order], got, kmax, self.table)
        values = h_equi - costs / self.n
        values[0] = 0.0
        return np.maximum(values, 0.0)


def _check_sample(sample: SampleData, minimum: int = 4) -> None:
    if sample.n < minimum:
        raise ValueError(f"need at least {minimum} points, got {sample.n}")


def _warn_degenerate(cache: _AxisCache) -> bool:
    flat = [a for a in ("x", "y") if cache.constant(a)]
    if flat:
        warnings.warn(f"axis {', '.join(flat)} is constant; scores are 0", stacklevel=3)
    return bool(flat)


def i_star_equi(sample: SampleData, k: int, l: int) -> float:
    """Best mutual information on ``k``-by-``l`` grids with the larger side equipartitioned.

    If ``k < l`` the x-axis is equipartitioned into ``l`` columns and the
    y-axis is cut optimally into at most ``k`` rows; if ``k > l`` the roles
    swap. For square grids the better of the two orientations is returned, so
    the value does not depend on which coordinate is called x.

    Returns
    -------
    float
        Nats.
    """
    if k < 2 or l < 2:
        raise ValueError("k and l must be at least 2")
    if k * l > sample.n:
        raise ValueError(f"grid {k}x{l} has more cells than the {sample.n} points")
    cache = _AxisCache(sample)
    _warn_degenerate(cache)
    best = 0.0
    if k <= l:
        best = max(best, cache.optimize("x", l, k)[k])
    if l <= k:
        best = max(best, cache.optimize("y", k, l)[l])
    return float(best)


def _char_matrix(sample: SampleData, policy: BPolicy, scheme: str) -> CharMatrix:
    _check_sample(sample)
    budget = policy.effective(sample.n)
    cache = _AxisCache(sample)
    degenerate = _warn_degenerate(cache)
    entries = {key: 0.0 for key in budget_keys(budget)}
    variant = "sample-equi" if scheme == "equi" else "sample-approx"
    if degenerate:
        return CharMatrix(entries, variant, budget, sample.n)
    for parts in range(2, budget // 2 + 1):
        if scheme == "equi":
            lo, hi = 2, min(parts, budget // parts)
        else:
            lo, hi = parts, budget // parts
        if hi < lo:
            continue
        for equi_axis in ("x", "y"):
            values = cache.optimize(equi_axis, parts, hi)
            for j in range(lo, hi + 1):
                key = (j, parts) if equi_axis == "x" else (parts, j)
                score = _normalize(values[j], *key)
                if score > entries[key]:
                    entries[key] = score
    return CharMatrix(entries, variant, budget, sample.n)


def char_matrix_e(sample: SampleData, policy: BPolicy | None = None) -> CharMatrix:
    """Equipartition characteristic matrix underlying MICe.

    Entry ``(k, l)`` is ``i_star_equi(sample, k, l) / log min(k, l)`` for
    every ``k * l`` within the budget. Each equipartition size is handled by
    one dynamic program that yields all smaller part counts at once.
    """
    return _char_matrix(sample, policy or BPolicy(), "equi")


def char_matrix_approx(sample: SampleData, policy: BPolicy | None = None) -> CharMatrix:
    """Characteristic matrix of the heuristic scheme: the axis with fewer parts is equipartitioned."""
    return _char_matrix(sample, policy or BPolicy(), "approx")


def mic_e(sample: SampleData, policy: BPolicy | None = None, *, return_argmax: bool = False):
    """MICe: maximum of the equipartition characteristic matrix.

    Parameters
    ----------
    sample : SampleData
        At least 4 points.
    policy : BPolicy, optional
        Grid budget; defaults to ``alpha=0.6``.
    return_argmax : bool
        Also return the maximizing ``(k, l)``.

    Returns
    -------
    float or (float, (int, int))
    """
    cm = char_matrix_e(sample, policy)
    if return_argmax:
        return float(cm.max()), cm.argmax()
    return float(cm.max())


def mic_approx(sample: SampleData, policy: BPolicy | None = None, *, return_argmax: bool = False):
    """Heuristic MIC: the smaller side is equipartitioned, the larger optimized."""
    cm = char_matrix_approx(sample, policy)
    if return_argmax:
        return float(cm.max()), cm.argmax()
    return float(cm.max())


def _axis_partitions(values: np.ndarray, max_parts: int) -> list[np.ndarray]:
    """Label vectors of every rank partition with at most ``max_parts`` parts."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    gaps = np.flatnonzero(v[1:] != v[:-1]) + 1
    out = []
    for r in range(0, min(max_parts - 1, gaps.size) + 1):
        for cuts in itertools.combinations(gaps, r):
            lab = np.empty(values.size, dtype=np.int64)
            lab[order] = np.searchsorted(np.array(cuts, dtype=np.int64), np.arange(values.size), side="right")
            out.append(lab)
    return out


def char_matrix_brute(sample: SampleData, policy: BPolicy | None = None) -> CharMatrix:
    """Exhaustive characteristic matrix over all rank grids (``n <= 12``)."""
    policy = policy or BPolicy()
    _check_sample(sample)
    if sample.n > 12:
        raise ValueError(f"exhaustive search limited to n <= 12, got {sample.n}")
    n = sample.n
    budget = policy.effective(n)
    top = budget // 2
    xs = _axis_partitions(sample.x, top)
    ys = _axis_partitions(sample.y, top)
    best = np.zeros((top + 1, top + 1))
    for cx in xs:
        c = int(cx.max()) + 1
        col_h = -sum(p * math.log(p) for p in np.bincount(cx) / n if p > 0)
        for ry in ys:
            r = int(ry.max()) + 1
            if r * c > budget:
                continue
            joint = np.bincount(ry * c + cx, minlength=r * c) / n
            rows = np.bincount(ry) / n
            h_joint = -sum(p * math.log(p) for p in joint if p > 0)
            h_rows = -sum(p * math.log(p) for p in rows if p > 0)
            mi = h_rows + col_h - h_joint
            if mi > best[r, c]:
                best[r, c] = mi
    # grids with at most r rows and c columns
    cum = np.maximum.accumulate(np.maximum.accumulate(best, axis=0), axis=1)
    entries = {(k, l): _normalize(cum[k, l], k, l) for k, l in budget_keys(budget)}
    return CharMatrix(entries, "sample-full", budget, n)


def mic_brute(sample: SampleData, policy: BPolicy | None = None) -> float:
    """Exact maximum over all rank grids within the budget (``n <= 12``)."""
    return char_matrix_brute(sample, policy).max()
