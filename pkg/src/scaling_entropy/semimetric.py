"""Finite semimetric triples and their epsilon-entropy.

A triple is ``m`` weighted points with a distance matrix.  The epsilon-entropy
is ``log2 k`` for the least ``k`` such that the points split into a residual
set of weight ``< eps`` and ``k`` parts of diameter ``< eps``.  Both strict
comparisons are evaluated as ``value < eps - slack`` so exact ties go to the
parts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "EmpiricalTriple",
    "EntropyEstimate",
    "ValidationReport",
    "InstanceTooLarge",
    "validate_semimetric",
    "check_partition",
    "epsilon_entropy_exact",
    "epsilon_entropy_greedy",
    "epsilon_entropy_lower",
    "epsilon_entropy_bounds",
    "DEFAULT_EXACT_LIMIT",
    "DEFAULT_SLACK",
]

DEFAULT_EXACT_LIMIT = 14
DEFAULT_SLACK = 1e-12
EXHAUSTIVE_LIMIT = 8


class InstanceTooLarge(ValueError):
    """The exact solver was asked for more points than ``exact_limit``."""


@dataclass(frozen=True, eq=False)
class EmpiricalTriple:
    weights: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        d = np.asarray(self.distances, dtype=float)
        if w.ndim != 1 or len(w) < 1:
            raise ValueError("weights must be a non-empty vector")
        if d.shape != (len(w), len(w)):
            raise ValueError(f"distance matrix shape {d.shape} does not match {len(w)} weights")
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "distances", d)

    @classmethod
    def uniform(cls, distances) -> "EmpiricalTriple":
        d = np.asarray(distances, dtype=float)
        return cls(np.full(len(d), 1.0 / len(d)), d)

    @property
    def m(self) -> int:
        return len(self.weights)

    def permuted(self, perm) -> "EmpiricalTriple":
        perm = np.asarray(perm)
        return EmpiricalTriple(self.weights[perm], self.distances[np.ix_(perm, perm)])


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    axiom: Optional[str] = None
    indices: tuple[int, ...] = ()

    def __str__(self):
        if self.ok:
            return "pass"
        return f"fail: {self.axiom} at ({','.join(map(str, self.indices))})"


def validate_semimetric(triple: EmpiricalTriple, tol: float = 1e-9) -> ValidationReport:
    """Check negativity, diagonal, symmetry and triangle inequality, in that order.

    A triangle failure ``(i, k, j)`` means ``d[i,k] > d[i,j] + d[j,k] + tol``.
    """
    d = triple.distances
    bad = np.argwhere(d < 0)
    if len(bad):
        return ValidationReport(False, "negative", tuple(int(x) for x in bad[0]))
    bad = np.flatnonzero(np.diag(d) != 0)
    if len(bad):
        return ValidationReport(False, "diagonal", (int(bad[0]), int(bad[0])))
    bad = np.argwhere(np.triu(d != d.T))
    if len(bad):
        return ValidationReport(False, "asymmetry", tuple(int(x) for x in bad[0]))
    best = None
    for j in range(triple.m):
        viol = d > d[:, j][:, None] + d[j, :][None, :] + tol
        if viol.any():
            i, k = (int(x) for x in np.argwhere(viol)[0])
            if best is None or (i, k, j) < best:
                best = (i, k, j)
    if best is not None:
        return ValidationReport(False, "triangle", best)
    return ValidationReport(True)


@dataclass(frozen=True)
class EntropyEstimate:
    """Bounds on the minimal part count.  ``partition[i]`` is 0 for the residual set."""

    epsilon: float
    k_lower: int
    k_upper: int
    exact: bool
    partition: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if not 1 <= self.k_lower <= self.k_upper:
            raise ValueError(f"invalid bounds {self.k_lower}..{self.k_upper}")
        if self.exact and self.k_lower != self.k_upper:
            raise ValueError("exact estimate needs equal bounds")

    @property
    def h_lower_bits(self) -> float:
        return math.log2(self.k_lower)

    @property
    def h_upper_bits(self) -> float:
        return math.log2(self.k_upper)


def _check_eps(epsilon: float) -> None:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")


def _close(triple: EmpiricalTriple, bound: float) -> np.ndarray:
    return triple.distances < bound


def check_partition(triple: EmpiricalTriple, epsilon: float, partition, slack: float = DEFAULT_SLACK) -> bool:
    """True if ``partition`` meets the residual-weight and diameter conditions."""
    labels = np.asarray(partition)
    if labels.shape != (triple.m,) or (labels < 0).any():
        return False
    if not triple.weights[labels == 0].sum() < epsilon - slack:
        return False
    for j in np.unique(labels[labels > 0]):
        idx = np.flatnonzero(labels == j)
        if not (triple.distances[np.ix_(idx, idx)] < epsilon - slack).all():
            return False
    return True


def _relabel(labels: list[int]) -> tuple[int, ...]:
    """Renumber parts 1..k in order of first appearance by point index."""
    mapping: dict[int, int] = {}
    out = []
    for lab in labels:
        if lab == 0:
            out.append(0)
        else:
            out.append(mapping.setdefault(lab, len(mapping) + 1))
    return tuple(out)


def _exhaustive(w: np.ndarray, close: np.ndarray, budget: float) -> tuple[int, list[int]]:
    """Enumerate every assignment (residual or part), canonical part numbering."""
    m = len(w)
    best_k = m + 1
    best: list[int] = []
    labels = [0] * m
    members: list[list[int]] = []

    def rec(i: int, resid: float):
        nonlocal best_k, best
        k = len(members)
        if k >= best_k:
            return
        if i == m:
            best_k, best = max(k, 1), labels.copy()
            return
        if resid + w[i] < budget:
            labels[i] = 0
            rec(i + 1, resid + w[i])
        for j, part in enumerate(members):
            if all(close[i, p] for p in part):
                part.append(i)
                labels[i] = j + 1
                rec(i + 1, resid)
                part.pop()
        members.append([i])
        labels[i] = k + 1
        rec(i + 1, resid)
        members.pop()

    rec(0, 0.0)
    return best_k, best


def _branch_and_bound(w: np.ndarray, close: np.ndarray, budget: float, k_start: int) -> tuple[int, list[int]]:
    """Smallest feasible part count, trying k upward from a packing bound.

    Points are placed heaviest first.  Once ``k`` parts are open, every point
    compatible with no open part is forced into the residual set; their total
    weight must fit the remaining budget.
    """
    m = len(w)
    order = sorted(range(m), key=lambda i: (-w[i], i))

    def feasible(k: int):
        labels = [0] * m
        members: list[list[int]] = []

        def forced_ok(pos: int, resid: float) -> bool:
            if len(members) < k:
                return True
            extra = 0.0
            for t in range(pos, m):
                i = order[t]
                if not any(all(close[i, p] for p in part) for part in members):
                    extra += w[i]
                    if not resid + extra < budget:
                        return False
            return True

        def rec(pos: int, resid: float) -> bool:
            if pos == m:
                return True
            if not forced_ok(pos, resid):
                return False
            i = order[pos]
            for j, part in enumerate(members):
                if all(close[i, p] for p in part):
                    part.append(i)
                    labels[i] = j + 1
                    if rec(pos + 1, resid):
                        return True
                    part.pop()
            if len(members) < k:
                members.append([i])
                labels[i] = len(members)
                if rec(pos + 1, resid):
                    return True
                members.pop()
            if resid + w[i] < budget:
                labels[i] = 0
                if rec(pos + 1, resid + w[i]):
                    return True
            return False

        return labels if rec(0, 0.0) else None

    for k in range(max(1, k_start), m + 1):
        labels = feasible(k)
        if labels is not None:
            return k, labels
    raise AssertionError("singleton partition is always feasible")


def epsilon_entropy_exact(
    triple: EmpiricalTriple,
    epsilon: float,
    exact_limit: int = DEFAULT_EXACT_LIMIT,
    slack: float = DEFAULT_SLACK,
) -> EntropyEstimate:
    _check_eps(epsilon)
    if triple.m > exact_limit:
        raise InstanceTooLarge(
            f"{triple.m} points exceed exact_limit={exact_limit}; use epsilon_entropy_bounds"
        )
    budget = epsilon - slack
    w = triple.weights
    close = _close(triple, budget)
    if triple.m <= EXHAUSTIVE_LIMIT:
        k, labels = _exhaustive(w, close, budget)
    else:
        k_start = epsilon_entropy_lower(triple, epsilon, slack=slack).k_lower
        k, labels = _branch_and_bound(w, close, budget, k_start)
    return EntropyEstimate(epsilon, k, k, True, _relabel(labels))


def epsilon_entropy_greedy(triple: EmpiricalTriple, epsilon: float, slack: float = DEFAULT_SLACK) -> EntropyEstimate:
    """Upper bound from a greedy cover by balls of strict radius ``eps/2``.

    Centres are remaining points; each step takes the ball holding the most
    remaining weight (lowest index on ties) until the uncovered weight drops
    below ``eps``.
    """
    _check_eps(epsilon)
    m = triple.m
    w = triple.weights
    ball = _close(triple, epsilon / 2 - slack)
    uniform = bool(np.all(w == w[0]))
    # Uniform weights: count points exactly so ties break by index reliably.
    unit = np.ones(m) if uniform else w
    ball_w = ball.astype(float) @ unit
    remaining = np.ones(m, dtype=bool)
    labels = np.zeros(m, dtype=np.int64)
    k = 0
    budget = epsilon - slack
    while not w[remaining].sum() < budget:
        cand = np.where(remaining, ball_w, -np.inf)
        top = cand.max()
        c = int(np.flatnonzero(cand >= top - (0.0 if uniform else 1e-12))[0])
        covered = ball[c] & remaining
        k += 1
        labels[covered] = k
        remaining &= ~covered
        ball_w -= ball[:, covered].astype(float) @ unit[covered]
    return EntropyEstimate(epsilon, 1, max(k, 1), False, tuple(int(x) for x in labels))


def epsilon_entropy_lower(triple: EmpiricalTriple, epsilon: float, slack: float = DEFAULT_SLACK) -> EntropyEstimate:
    """Packing lower bound from an index-order maximal eps-separated subset."""
    _check_eps(epsilon)
    budget = epsilon - slack
    close = _close(triple, budget)
    blocked = np.zeros(triple.m, dtype=bool)
    kept = []
    for i in range(triple.m):
        if not blocked[i]:
            kept.append(i)
            blocked |= close[i]
    light = np.sort(triple.weights[kept])
    r = int(np.count_nonzero(np.cumsum(light) < budget))
    k_lower = max(1, len(kept) - r)
    return EntropyEstimate(epsilon, k_lower, max(k_lower, triple.m), False)


def epsilon_entropy_bounds(triple: EmpiricalTriple, epsilon: float, slack: float = DEFAULT_SLACK) -> EntropyEstimate:
    """Certified interval: packing lower bound and greedy upper bound."""
    lo = epsilon_entropy_lower(triple, epsilon, slack)
    hi = epsilon_entropy_greedy(triple, epsilon, slack)
    return EntropyEstimate(epsilon, lo.k_lower, hi.k_upper, False, hi.partition)
