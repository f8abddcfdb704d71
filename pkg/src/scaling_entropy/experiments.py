"""Entropy curves over (n, eps) grids, growth classification, invariance and A-entropy."""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .semimetric import (
    DEFAULT_EXACT_LIMIT,
    InstanceTooLarge,
    epsilon_entropy_bounds,
    epsilon_entropy_exact,
)
from .systems import (
    BernoulliContinuous,
    BernoulliFinite,
    DiscreteCoordinate,
    IrrationalRotation,
    SubstitutionSystem,
    SystemSpec,
    averaged_distance_matrices,
    sample_orbits,
)

__all__ = [
    "ExperimentConfig",
    "CurveRow",
    "EntropyCurve",
    "GrowthClassification",
    "ClassificationSettings",
    "InvarianceReport",
    "ZeroCurveError",
    "run_experiment",
    "classify_growth",
    "classify_curve",
    "invariance_test",
    "sequential_entropy_estimate",
    "fingerprint",
]

ESTIMATORS = ("exact-if-small", "bounds-only", "exact")


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSpec
    base: object
    m: int
    n_grid: tuple[int, ...]
    epsilon_grid: tuple[float, ...] = (0.4, 0.3, 0.2, 0.1)
    seed: int = 0
    estimator: str = "exact-if-small"
    exact_limit: int = DEFAULT_EXACT_LIMIT

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        if self.m < 1:
            raise ValueError("m must be positive")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])) or self.n_grid[0] < 1:
            raise ValueError(f"n_grid must be ascending positive integers: {self.n_grid}")
        if not self.epsilon_grid or any(not 0 < e <= 1 for e in self.epsilon_grid):
            raise ValueError(f"epsilon values must lie in (0, 1]: {self.epsilon_grid}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_max(self) -> int:
        return self.n_grid[-1] + self.base.depth - 1


def _describe(obj):
    if isinstance(obj, SubstitutionSystem):
        return {"kind": "SubstitutionSystem", "rules": [list(r) for r in obj.substitution.rules],
                "seed_letter": obj.substitution.seed_letter}
    if hasattr(obj, "__dataclass_fields__"):
        d = {k: _describe(v) for k, v in asdict(obj).items()} if not isinstance(obj, SystemSpec) else {
            "kind": _describe(obj.kind), "known_kolmogorov_entropy": obj.known_kolmogorov_entropy}
        d.setdefault("type", type(obj).__name__)
        return d
    if isinstance(obj, tuple):
        return [_describe(v) for v in obj]
    return obj


def fingerprint(config: ExperimentConfig) -> str:
    blob = json.dumps({
        "system": _describe(config.system),
        "base": _describe(config.base),
        "m": config.m,
        "n_grid": list(config.n_grid),
        "epsilon_grid": [repr(e) for e in config.epsilon_grid],
        "seed": config.seed,
        "estimator": config.estimator,
        "exact_limit": config.exact_limit,
    }, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CurveRow:
    n: int
    epsilon: float
    k_lower: int
    k_upper: int

    @property
    def h_lower_bits(self) -> float:
        return math.log2(self.k_lower)

    @property
    def h_upper_bits(self) -> float:
        return math.log2(self.k_upper)


@dataclass
class EntropyCurve:
    rows: list[CurveRow]
    fingerprint: str = ""
    estimator: str = ""
    seed: int = 0

    def at_epsilon(self, epsilon: float) -> list[CurveRow]:
        return [r for r in self.rows if math.isclose(r.epsilon, epsilon, rel_tol=0, abs_tol=1e-12)]

    @property
    def epsilons(self) -> list[float]:
        seen: list[float] = []
        for r in self.rows:
            if not any(math.isclose(r.epsilon, e, abs_tol=1e-12) for e in seen):
                seen.append(r.epsilon)
        return seen

    def series(self, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
        rows = sorted(self.at_epsilon(epsilon), key=lambda r: r.n)
        return np.array([r.n for r in rows], float), np.array([r.h_upper_bits for r in rows])


def _estimates_for(triple, eps_grid, config: ExperimentConfig):
    """Per-eps (k_lower, k_upper), tightened across eps.

    A partition valid at eps is valid at every larger eps, so upper bounds
    carry upward in eps and lower bounds carry downward.
    """
    use_exact = config.estimator == "exact" or (
        config.estimator == "exact-if-small" and triple.m <= config.exact_limit
    )
    if config.estimator == "exact" and triple.m > config.exact_limit:
        raise InstanceTooLarge(f"m={triple.m} exceeds exact_limit={config.exact_limit}")
    raw = {}
    for eps in eps_grid:
        est = (epsilon_entropy_exact(triple, eps, config.exact_limit) if use_exact
               else epsilon_entropy_bounds(triple, eps))
        raw[eps] = (est.k_lower, est.k_upper)
    asc = sorted(eps_grid)
    upper, lower = {}, {}
    best = None
    for eps in asc:
        best = raw[eps][1] if best is None else min(best, raw[eps][1])
        upper[eps] = best
    best = None
    for eps in reversed(asc):
        best = raw[eps][0] if best is None else max(best, raw[eps][0])
        lower[eps] = best
    return {eps: (lower[eps], upper[eps]) for eps in eps_grid}


def run_experiment(config: ExperimentConfig) -> EntropyCurve:
    sample = sample_orbits(config.system, config.m, config.n_max, config.seed)
    rows = []
    for n, triple in averaged_distance_matrices(sample, config.base, config.n_grid):
        bounds = _estimates_for(triple, config.epsilon_grid, config)
        for eps in config.epsilon_grid:
            lo, hi = bounds[eps]
            rows.append(CurveRow(n, eps, lo, hi))
    return EntropyCurve(rows, fingerprint(config), config.estimator, config.seed)


@dataclass(frozen=True)
class ClassificationSettings:
    margin: float = 0.10
    min_log_slope: float = 0.2
    min_points: int = 5


@dataclass(frozen=True)
class GrowthClassification:
    growth: str  # Bounded | Logarithmic | Linear | Indeterminate
    epsilon: float
    slope: Optional[float] = None  # bits per log2 n, log model
    rate: Optional[float] = None  # bits per unit n, linear model
    residuals: dict = field(default_factory=dict)
    coefficients: dict = field(default_factory=dict)

    @property
    def log_slope(self) -> float:
        return self.coefficients["logarithmic"][1]

    def summary(self) -> str:
        if self.growth == "Logarithmic":
            return f"Logarithmic(slope={self.slope:.6g})"
        if self.growth == "Linear":
            return f"Linear(rate={self.rate:.6g})"
        return self.growth


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ coef
    return coef, float(resid @ resid)


def classify_growth(curve: EntropyCurve, epsilon: float,
                    settings: ClassificationSettings = ClassificationSettings()) -> GrowthClassification:
    """Fit constant, ``a + b log2 n`` and ``a + b n`` to the upper-bound bits.

    A growth model is a candidate only if its slope is positive and the rise it
    predicts over the grid is at least ``min_log_slope`` bits per doubling.
    The candidate with the least residual wins if it beats every other
    candidate by the margin; otherwise the verdict is Indeterminate.
    """
    n, y = curve.series(epsilon)
    if len(n) < settings.min_points:
        raise ValueError(f"need at least {settings.min_points} grid points at eps={epsilon}, got {len(n)}")
    ones = np.ones_like(n)
    c_coef, c_rss = _fit(ones[:, None], y)
    l_coef, l_rss = _fit(np.column_stack([ones, np.log2(n)]), y)
    r_coef, r_rss = _fit(np.column_stack([ones, n]), y)
    residuals = {"bounded": c_rss, "logarithmic": l_rss, "linear": r_rss}
    coefficients = {"bounded": [float(c_coef[0])], "logarithmic": [float(v) for v in l_coef],
                    "linear": [float(v) for v in r_coef]}
    doublings = math.log2(n[-1] / n[0])
    needed = settings.min_log_slope * doublings
    candidates = ["bounded"]
    if l_coef[1] >= settings.min_log_slope:
        candidates.append("logarithmic")
    if r_coef[1] > 0 and r_coef[1] * (n[-1] - n[0]) >= needed:
        candidates.append("linear")
    scale = max(float(y @ y), 1.0)
    atol = 1e-18 * scale
    best = min(candidates, key=lambda k: residuals[k])
    dominant = all(
        other == best or (residuals[other] > atol and residuals[best] <= (1 - settings.margin) * residuals[other])
        for other in candidates
    )
    names = {"bounded": "Bounded", "logarithmic": "Logarithmic", "linear": "Linear"}
    growth = names[best] if dominant else "Indeterminate"
    return GrowthClassification(
        growth=growth,
        epsilon=epsilon,
        slope=float(l_coef[1]) if growth == "Logarithmic" else None,
        rate=float(r_coef[1]) if growth == "Linear" else None,
        residuals=residuals,
        coefficients=coefficients,
    )


def classify_curve(curve: EntropyCurve, settings: ClassificationSettings = ClassificationSettings()):
    """Per-eps classifications and a verdict requiring agreement at the two smallest eps."""
    per_eps = {}
    for eps in curve.epsilons:
        if len(curve.at_epsilon(eps)) >= settings.min_points:
            per_eps[eps] = classify_growth(curve, eps, settings)
    if not per_eps:
        raise ValueError("no epsilon has enough grid points")
    smallest = sorted(per_eps)[:2]
    classes = {per_eps[e].growth for e in smallest}
    verdict = classes.pop() if len(classes) == 1 else "Indeterminate"
    return per_eps, verdict


class ZeroCurveError(ValueError):
    """A compared curve has no positive entropy rows."""


@dataclass(frozen=True)
class InvarianceReport:
    n_values: tuple[int, ...]
    ratios: tuple[float, ...]
    bound: float
    dropped: tuple[int, ...]

    @property
    def min_ratio(self) -> float:
        return min(self.ratios)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    @property
    def passed(self) -> bool:
        return 1.0 / self.bound <= self.min_ratio and self.max_ratio <= self.bound

    def lines(self) -> list[str]:
        out = [f"n={n} ratio={r:.17g}" for n, r in zip(self.n_values, self.ratios)]
        out += [
            f"dropped_zero_rows: {list(self.dropped)}",
            f"min_ratio: {self.min_ratio:.17g}",
            f"max_ratio: {self.max_ratio:.17g}",
            f"bound: {self.bound:g}",
            f"result: {'pass' if self.passed else 'fail'}",
        ]
        return out


def invariance_test(system: SystemSpec, base1, base2, m: int, n_grid: Sequence[int],
                    eps1: float, eps2: float, seed: int, bound: float = 4.0,
                    estimator: str = "bounds-only") -> InvarianceReport:
    """Pointwise ratio of upper-bound entropy curves for two base semimetrics."""
    c1 = run_experiment(ExperimentConfig(system, base1, m, tuple(n_grid), (eps1,), seed, estimator))
    c2 = run_experiment(ExperimentConfig(system, base2, m, tuple(n_grid), (eps2,), seed, estimator))
    h1 = dict(zip(*c1.series(eps1)))
    h2 = dict(zip(*c2.series(eps2)))
    kept, ratios, dropped = [], [], []
    for n in sorted(h1):
        if h1[n] == 0 or h2[n] == 0:
            if not kept:
                dropped.append(int(n))
                continue
            raise ZeroCurveError(f"zero entropy at n={int(n)} after positive rows; ratio undefined")
        kept.append(int(n))
        ratios.append(h1[n] / h2[n])
    if not kept:
        raise ZeroCurveError("curve is zero on the whole grid; comparison undefined")
    return InvarianceReport(tuple(kept), tuple(ratios), bound, tuple(dropped))


def sequential_entropy_estimate(sample, depth: int, offsets: Sequence[int], terms: int) -> float:
    """Plug-in Shannon entropy of depth-``depth`` blocks at the first ``terms`` offsets, per term."""
    if sample.alphabet_size is None:
        raise ValueError("sequential entropy needs a symbolic sample")
    if depth < 1 or terms < 1 or terms > len(offsets):
        raise ValueError("need depth >= 1 and 1 <= terms <= len(offsets)")
    a = [int(x) for x in offsets[:terms]]
    if any(y <= x for x, y in zip(a, a[1:])) or a[0] < 0:
        raise ValueError("offsets must be ascending and nonnegative")
    if a[-1] + depth > sample.n_max:
        raise ValueError(f"offset {a[-1]} + depth {depth} exceeds window length {sample.n_max}")
    cols = [sample.windows[:, k + j] for k in a for j in range(depth)]
    tuples = np.column_stack(cols)
    _, counts = np.unique(tuples, axis=0, return_counts=True)
    if len(counts) > sample.m / 10:
        warnings.warn(
            f"{len(counts)} distinct tuples from {sample.m} samples; plug-in estimate is biased",
            stacklevel=2,
        )
    p = counts / counts.sum()
    return float(max(0.0, -(p * np.log2(p)).sum()) / terms)
