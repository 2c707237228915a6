"""Partitions, grids, equipartitions and the exact one-axis partition optimizer.

Convention: a k-by-l grid has k rows (parts of the y-axis) and l columns
(parts of the x-axis). ``DiscreteJoint.mass[i, j]`` is the cell in row ``i``
and column ``j``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from mickit._kernels import segment_dp_counts
from mickit.info import DiscreteJoint, _xlogx, mutual_information

TIE_TOL = 1e-12
# label count from which unmerged single-point cells are faster than clumps
WIDE_LABELS = 16


@dataclass(frozen=True)
class Partition:
    """Sorted cut points splitting an axis into ``len(cuts) + 1`` parts.

    A value ``v`` falls in part ``#{c in cuts : c <= v}``. ``lower`` and
    ``upper`` bound the axis; every cut must lie strictly between them. For
    partitions of a master grid the cuts are cell indices and the range is
    ``(0, m)``. ``truncated`` marks an equipartition that could not reach the
    requested number of parts.
    """

    cuts: tuple = ()
    lower: float = -math.inf
    upper: float = math.inf
    truncated: bool = False

    def __post_init__(self):
        cuts = tuple(self.cuts)
        for a, b in zip(cuts, cuts[1:]):
            if not a < b:
                raise ValueError(f"cuts must be strictly increasing, got {cuts}")
        for c in cuts:
            if not (self.lower < c < self.upper):
                raise ValueError(f"cut {c} outside ({self.lower}, {self.upper})")
        object.__setattr__(self, "cuts", cuts)

    @property
    def parts(self) -> int:
        return len(self.cuts) + 1

    def assign(self, values) -> np.ndarray:
        """Part index of each value."""
        return np.searchsorted(np.asarray(self.cuts, dtype=float), np.asarray(values, dtype=float), side="right")


@dataclass(frozen=True)
class Grid:
    """One partition per axis; rows follow ``y_partition``, columns ``x_partition``."""

    x_partition: Partition
    y_partition: Partition

    @property
    def shape(self) -> tuple[int, int]:
        return self.y_partition.parts, self.x_partition.parts


@dataclass(frozen=True)
class MasterJoint:
    """A fine joint distribution plus the axis whose cells may be merged.

    ``free_axis`` is ``"rows"`` or ``"cols"``.
    """

    joint: DiscreteJoint
    free_axis: str = "cols"

    def __post_init__(self):
        if self.free_axis not in ("rows", "cols"):
            raise ValueError(f"free_axis must be 'rows' or 'cols', got {self.free_axis!r}")

    def cells(self) -> np.ndarray:
        """Mass matrix with the free axis first."""
        mass = self.joint.mass
        return mass if self.free_axis == "rows" else mass.T

    @property
    def size(self) -> int:
        return self.cells().shape[0]


def equipartition_splits(sorted_values: np.ndarray, m: int) -> tuple[np.ndarray, bool]:
    """Split positions (points to the left of each cut) of the count equipartition.

    Cuts sit only between distinct consecutive values. Each boundary goes to
    the feasible gap nearest its ideal position ``i * n / m``, leftmost on
    ties, while leaving room for the boundaries still to place. Returns the
    positions and whether fewer than ``m`` parts were feasible.
    """
    v = np.asarray(sorted_values)
    n = v.shape[0]
    if m < 1 or n < 1:
        raise ValueError("need n >= 1 and m >= 1")
    gaps = np.flatnonzero(v[1:] != v[:-1]) + 1
    if gaps.size <= m - 1:
        return gaps.astype(np.int64), gaps.size < m - 1
    chosen = np.empty(m - 1, dtype=np.int64)
    lo = 0
    count = gaps.size
    for i in range(1, m):
        hi = count - (m - 1 - i)
        window = gaps[lo:hi]
        # |g - i n / m| compared exactly as |g m - i n|
        dist = np.abs(window * m - i * n)
        pick = lo + int(np.argmin(dist))
        chosen[i - 1] = gaps[pick]
        lo = pick + 1
    return chosen, False


def equipartition_counts(values, m: int) -> Partition:
    """Partition a sample axis into ``m`` parts with counts as equal as ties allow.

    Parameters
    ----------
    values : array_like
        Axis sample (sorted internally).
    m : int
        Requested number of parts.

    Returns
    -------
    Partition
        Real-valued cuts at midpoints between distinct neighbours. If fewer
        than ``m`` parts are feasible the finest partition is returned with
        ``truncated=True`` and a warning is issued.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if not 1 <= m <= v.size:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={v.size}")
    splits, truncated = equipartition_splits(v, m)
    if truncated:
        warnings.warn(f"only {splits.size + 1} parts feasible, {m} requested", stacklevel=2)
    cuts = tuple(float(0.5 * (v[s - 1] + v[s])) for s in splits)
    return Partition(cuts, truncated=truncated)


def apply_grid(points, grid: Grid) -> DiscreteJoint:
    """Fraction of points in each grid cell.

    Parameters
    ----------
    points : array_like, shape (n, 2)
        ``(x, y)`` pairs.
    grid : Grid
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, 2) array")
    cols = grid.x_partition.assign(pts[:, 0])
    rows = grid.y_partition.assign(pts[:, 1])
    k, l = grid.shape
    counts = np.bincount(rows * l + cols, minlength=k * l).reshape(k, l)
    return DiscreteJoint.from_counts(counts)


def _segment_costs(cells: np.ndarray) -> np.ndarray:
    """``cost[s, t]`` = mass-weighted conditional entropy of merging cells ``s..t-1``."""
    m = cells.shape[0]
    prefix = np.vstack([np.zeros(cells.shape[1]), np.cumsum(cells, axis=0)])
    cost = np.full((m + 1, m + 1), np.inf)
    for s in range(m):
        seg = np.clip(prefix[s + 1 :] - prefix[s], 0.0, None)
        cost[s, s + 1 :] = _xlogx(seg.sum(axis=1)) - _xlogx(seg).sum(axis=1)
    return cost


def optimize_partition_dp(master: MasterJoint, k: int) -> tuple[Partition, float]:
    """Exact maximum of mutual information over coarsenings of the free axis.

    Merges consecutive cells of the free axis into at most ``k`` parts while
    the other axis stays at master resolution. Runs in ``O(m^2 k)``.

    Parameters
    ----------
    master : MasterJoint
    k : int
        Maximum number of parts, at least 2.

    Returns
    -------
    (Partition, float)
        Cuts as master-cell indices in ``(0, m)`` and the mutual information
        in nats. Ties go to fewer parts, then to the leftmost final cut.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    cells = master.cells()
    m = cells.shape[0]
    fixed_entropy = float(-_xlogx(cells.sum(axis=0)).sum())
    cost = _segment_costs(cells)
    kk = min(k, m)
    best = np.full((kk + 1, m + 1), np.inf)
    back = np.zeros((kk + 1, m + 1), dtype=np.int64)
    best[1, 1:] = cost[0, 1:]
    for j in range(2, kk + 1):
        for t in range(j, m + 1):
            cand = best[j - 1, j - 1 : t] + cost[j - 1 : t, t]
            low = cand.min()
            pick = int(np.flatnonzero(cand <= low + TIE_TOL)[0])
            best[j, t] = cand[pick]
            back[j, t] = j - 1 + pick
    finals = best[1:, m]
    low = finals.min()
    parts = int(np.flatnonzero(finals <= low + TIE_TOL)[0]) + 1
    cuts = []
    t = m
    for j in range(parts, 1, -1):
        t = int(back[j, t])
        cuts.append(t)
    value = max(fixed_entropy - float(best[parts, m]), 0.0)
    return Partition(tuple(reversed(cuts)), lower=0, upper=m), value


def partition_profile(master: MasterJoint, kmax: int) -> np.ndarray:
    """Best mutual information for every part budget at once.

    Returns ``values`` with ``values[j]`` the maximum mutual information (nats)
    over coarsenings of the free axis into at most ``j`` parts, for
    ``j = 0..kmax``; ``values[0] = 0``. Budgets beyond the number of master
    cells repeat the unrestricted optimum.
    """
    cells = master.cells()
    m = cells.shape[0]
    fixed_entropy = float(-_xlogx(cells.sum(axis=0)).sum())
    cost = _segment_costs(cells)
    out = np.zeros(kmax + 1)
    layer = cost[0].copy()  # exactly one part covering cells 0..t-1
    best = layer[m]
    for j in range(1, kmax + 1):
        if j > 1 and j <= m:
            layer = np.min(layer[:, None] + cost, axis=0)
            best = min(best, layer[m])
        out[j] = max(fixed_entropy - best, 0.0)
    return out


def _coarsen(cells: np.ndarray, cuts: tuple) -> np.ndarray:
    starts = np.array((0,) + tuple(cuts), dtype=np.intp)
    return np.add.reduceat(cells, starts, axis=0)


def brute_force_partition(master: MasterJoint, k: int) -> tuple[Partition, float]:
    """Exhaustive maximum over all subsets of at most ``k - 1`` interior cuts.

    Same tie rule as :func:`optimize_partition_dp`. Limited to ``m <= 20``.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    cells = master.cells()
    m = cells.shape[0]
    if m > 20:
        raise ValueError(f"brute force limited to 20 cells, got {m}")
    results = []
    for r in range(0, min(k - 1, m - 1) + 1):
        for cuts in itertools.combinations(range(1, m), r):
            merged = _coarsen(cells, cuts)
            results.append((mutual_information(DiscreteJoint(merged / merged.sum())), cuts))
    top = max(v for v, _ in results)
    ties = [c for v, c in results if v >= top - TIE_TOL]
    cuts = min(ties, key=lambda c: (len(c), tuple(reversed(c))))
    value = next(v for v, c in results if c == cuts)
    return Partition(cuts, lower=0, upper=m), value


def sorted_cell_ids(free_values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stable sort order of an axis and the tie-group id of each sorted point."""
    order = np.argsort(free_values, kind="stable")
    v = free_values[order]
    new_cell = np.empty(v.size, dtype=bool)
    new_cell[0] = True
    new_cell[1:] = v[1:] != v[:-1]
    return order, np.cumsum(new_cell) - 1


def cells_from_sorted(cell_id: np.ndarray, sorted_labels: np.ndarray, n_labels: int):
    """Compressed per-cell label counts along the free axis of a sample.

    ``cell_id`` and ``sorted_labels`` are given in free-axis order; points
    with equal ids form one master cell. Consecutive cells whose points all
    carry the same label are merged into a clump; an optimal cut never falls
    inside such a run because the segment cost is concave along it.

    Returns
    -------
    ptr, cell_labels, cell_counts : ndarray
        CSR layout: cell ``c`` owns entries ``ptr[c]:ptr[c + 1]``.
    """
    lab = sorted_labels.astype(np.int64)
    key, cnt = np.unique(cell_id * n_labels + lab, return_counts=True)
    cid = key // n_labels
    clab = key % n_labels
    per_cell = np.bincount(cid)
    first = np.concatenate(([0], np.cumsum(per_cell)[:-1]))
    pure = per_cell == 1
    cell_label = np.where(pure, clab[first], -1)
    joins = pure[1:] & pure[:-1] & (cell_label[1:] == cell_label[:-1])
    clump = np.concatenate(([0], np.cumsum(~joins)))
    key2, pos = np.unique(clump[cid] * n_labels + clab, return_inverse=True)
    cnt2 = np.bincount(pos, weights=cnt).astype(np.int64)
    cl = key2 // n_labels
    ptr = np.concatenate(([0], np.cumsum(np.bincount(cl)))).astype(np.int64)
    return ptr, (key2 % n_labels).astype(np.int64), cnt2


def best_costs_counts(cell_id, sorted_labels, n_labels: int, kmax: int, table) -> np.ndarray:
    """Minimum count-weighted conditional entropy for at most ``j`` parts, ``j = 0..kmax``.

    Entry ``j`` is the minimum over partitions of the free axis into at most
    ``j`` parts of ``sum_seg (N ln N - sum_q n_q ln n_q)``; entry 0 is unused.
    ``table[i]`` must hold ``i ln i``.
    """
    n = cell_id.size
    if n_labels >= WIDE_LABELS and cell_id[-1] == n - 1:
        # With many labels, clumps are short and merging saves little; one
        # point per cell lets the compiled sweep avoid indexed loads.
        ptr = np.arange(n + 1, dtype=np.int64)
        lab = np.ascontiguousarray(sorted_labels, dtype=np.int64)
        cnt = np.ones(n, dtype=np.int64)
    else:
        ptr, lab, cnt = cells_from_sorted(cell_id, sorted_labels, n_labels)
    exact = segment_dp_counts(ptr, lab, cnt, n_labels, kmax, table)
    return np.minimum.accumulate(exact)
