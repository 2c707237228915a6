"""Discrete entropy and mutual information primitives.

All quantities are in nats and use the convention ``0 * log(0) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MASS_TOL = 1e-12


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


@dataclass(frozen=True)
class DiscreteJoint:
    """Probability mass over the cells of a grid.

    Row ``i`` and column ``j`` of ``mass`` hold the probability of the cell in
    the i-th y-part and the j-th x-part. Rows or columns may carry zero mass.

    Parameters
    ----------
    mass : array_like, shape (k, l)
        Non-negative cell probabilities summing to one within ``1e-12``.
    """

    mass: np.ndarray
    row_marginals: np.ndarray = field(init=False, repr=False, compare=False)
    col_marginals: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mass = np.array(self.mass, dtype=float)
        if mass.ndim != 2 or mass.shape[0] < 1 or mass.shape[1] < 1:
            raise ValueError(f"mass must be a non-empty 2-d matrix, got shape {mass.shape}")
        if not np.all(np.isfinite(mass)):
            raise ValueError("mass contains non-finite entries")
        if np.any(mass < 0):
            raise ValueError("mass contains negative entries")
        total = mass.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass is {total!r}, expected 1 within {MASS_TOL}")
        mass.setflags(write=False)
        rows = mass.sum(axis=1)
        cols = mass.sum(axis=0)
        rows.setflags(write=False)
        cols.setflags(write=False)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "row_marginals", rows)
        object.__setattr__(self, "col_marginals", cols)

    @classmethod
    def from_counts(cls, counts) -> "DiscreteJoint":
        """Build a joint from a matrix of non-negative cell counts."""
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        if total <= 0:
            raise ValueError("counts must have a positive total")
        return cls(counts / total)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mass.shape

    def transpose(self) -> "DiscreteJoint":
        return DiscreteJoint(self.mass.T)

    def __eq__(self, other):
        if not isinstance(other, DiscreteJoint):
            return NotImplemented
        return self.mass.shape == other.mass.shape and bool(np.array_equal(self.mass, other.mass))

    __hash__ = None


def binary_entropy(p):
    """Entropy of a Bernoulli(p) variable in nats.

    Accepts a scalar or an array. Raises ``ValueError`` outside ``[0, 1]``.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValueError(f"binary entropy is defined on [0, 1], got {p!r}")
    out = -_xlogx(arr) - _xlogx(1.0 - arr)
    if out.ndim == 0:
        return float(out)
    return out


def entropy(dist) -> float:
    """Shannon entropy of a probability vector in nats.

    Parameters
    ----------
    dist : array_like
        Non-negative entries summing to one within ``1e-12``.

    Returns
    -------
    float
    """
    p = np.asarray(dist, dtype=float).ravel()
    if p.size == 0 or not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("distribution must be non-empty, finite and non-negative")
    if abs(p.sum() - 1.0) > MASS_TOL:
        raise ValueError(f"distribution sums to {p.sum()!r}, expected 1")
    return float(-_xlogx(p).sum())


def _entropy_unchecked(p: np.ndarray) -> float:
    return float(-_xlogx(p).sum())


def mutual_information(joint: DiscreteJoint) -> float:
    """Mutual information between the row and column variables, in nats.

    Computed as ``H(rows) + H(cols) - H(joint)`` and clipped at zero to
    absorb rounding.
    """
    value = (
        _entropy_unchecked(joint.row_marginals)
        + _entropy_unchecked(joint.col_marginals)
        - _entropy_unchecked(joint.mass)
    )
    return max(value, 0.0)


def normalized_mi(joint: DiscreteJoint) -> float:
    """Mutual information divided by ``log min(k, l)``; lies in ``[0, 1]``."""
    k, l = joint.shape
    if k < 2 or l < 2:
        raise ValueError(f"normalization needs at least 2 rows and 2 columns, got {k}x{l}")
    return min(max(mutual_information(joint) / np.log(min(k, l)), 0.0), 1.0)


def linfoot(joint: DiscreteJoint) -> float:
    """Linfoot's informational coefficient of correlation ``1 - 2**(-2 I_bits)``."""
    bits = mutual_information(joint) / np.log(2.0)
    return float(1.0 - 2.0 ** (-2.0 * bits))


@dataclass(frozen=True)
class PerturbationSpec:
    """Signed per-cell mass changes.

    ``total_moved`` is half the L1 size of the change, which equals the mass
    moved when the deltas sum to zero.
    """

    deltas: np.ndarray

    def __post_init__(self):
        d = np.array(self.deltas, dtype=float)
        if not np.all(np.isfinite(d)):
            raise ValueError("deltas must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "deltas", d)

    @property
    def total_moved(self) -> float:
        return 0.5 * float(np.abs(self.deltas).sum())

    @classmethod
    def move(cls, shape, source, target, amount: float) -> "PerturbationSpec":
        """Move ``amount`` of mass from cell ``source`` to cell ``target`` (0-based)."""
        d = np.zeros(shape)
        d[tuple(source)] -= amount
        d[tuple(target)] += amount
        return cls(d)


def perturb(joint: DiscreteJoint, spec: PerturbationSpec) -> DiscreteJoint:
    """Apply ``spec`` to ``joint`` and renormalize.

    Raises ``ValueError`` if a cell would become negative beyond rounding.
    """
    if spec.deltas.shape != joint.shape:
        raise ValueError(f"delta shape {spec.deltas.shape} does not match joint {joint.shape}")
    new = joint.mass + spec.deltas
    if np.any(new < -MASS_TOL):
        raise ValueError("perturbation makes a cell negative")
    new = np.clip(new, 0.0, None)
    total = new.sum()
    if total <= 0:
        raise ValueError("perturbation removes all mass")
    return DiscreteJoint(new / total)


def random_mass_move(mass, delta: float, rng: np.random.Generator, *, sparsity: float = 0.0) -> np.ndarray:
    """Signed deltas moving roughly ``delta`` of mass between random cells.

    Removal never exceeds a cell's mass, so ``mass + deltas`` stays
    non-negative. Cells that both lose and gain cancel, so the realized half-L1
    change can be below ``delta``; callers should measure it.
    """
    p = np.asarray(mass, dtype=float)
    flat = p.ravel()
    delta = min(float(delta), float(flat.sum()))
    weights = rng.exponential(size=flat.size)
    if sparsity > 0:
        weights *= rng.random(flat.size) >= sparsity
        if not weights.any():
            weights[rng.integers(flat.size)] = 1.0
    removed = np.zeros_like(flat)
    for _ in range(64):
        remaining = delta - removed.sum()
        if remaining <= 1e-15:
            break
        cap = flat - removed
        score = cap * weights
        if score.sum() <= 0:
            score = cap
        alloc = np.minimum(remaining * score / score.sum(), cap)
        removed += alloc
    gain_w = rng.exponential(size=flat.size)
    if sparsity > 0:
        gain_w *= rng.random(flat.size) >= sparsity
        if not gain_w.any():
            gain_w[rng.integers(flat.size)] = 1.0
    added = removed.sum() * gain_w / gain_w.sum()
    return (added - removed).reshape(p.shape)
