"""Sampleable systems, base semimetrics, and averaged distance matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from .semimetric import EmpiricalTriple
from .substitution import ConstantLengthSubstitution, _cached_prefix, is_primitive

__all__ = [
    "GOLDEN",
    "BernoulliFinite",
    "BernoulliContinuous",
    "IrrationalRotation",
    "SubstitutionSystem",
    "SystemSpec",
    "DiscreteCoordinate",
    "AbsCoordinate",
    "ArcCoordinate",
    "OrbitSample",
    "sample_orbits",
    "averaged_distance_matrices",
    "substitution_prefix_length",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_PREFIX = 1 << 25
_CHUNK = 512


@dataclass(frozen=True)
class BernoulliFinite:
    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if not p or any(x <= 0 for x in p) or abs(sum(p) - 1.0) > 1e-12:
            raise ValueError(f"probability vector must be positive and sum to 1: {p}")
        object.__setattr__(self, "p", p)

    @property
    def alphabet_size(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class BernoulliContinuous:
    """I.i.d. uniform coordinates on [0, 1]."""

    alphabet_size = None


@dataclass(frozen=True)
class IrrationalRotation:
    """``x -> x + alpha mod 1`` coded by the arc ``[0, beta)`` (0) versus ``[beta, 1)`` (1).

    ``beta`` defaults to ``1 - alpha``, the Sturmian coding.
    """

    alpha: float = GOLDEN
    beta: Optional[float] = None
    alpha_tag: str = "golden"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta is None:
            object.__setattr__(self, "beta", 1.0 - self.alpha)
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")

    alphabet_size = 2


@dataclass(frozen=True)
class SubstitutionSystem:
    substitution: ConstantLengthSubstitution

    @property
    def alphabet_size(self) -> int:
        return self.substitution.alphabet_size


Kind = Union[BernoulliFinite, BernoulliContinuous, IrrationalRotation, SubstitutionSystem]


@dataclass(frozen=True)
class SystemSpec:
    kind: Kind
    # metadata only; "infinite" allowed
    known_kolmogorov_entropy: Union[float, str, None] = None

    @property
    def real_valued(self) -> bool:
        return isinstance(self.kind, BernoulliContinuous)


@dataclass(frozen=True)
class DiscreteCoordinate:
    """1 if the first ``depth`` coordinates differ anywhere, else 0."""

    depth: int = 1
    generating: bool = True

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")


@dataclass(frozen=True)
class AbsCoordinate:
    """``|x_0 - y_0|`` for real-valued systems."""

    generating: bool = True
    depth = 1


@dataclass(frozen=True)
class ArcCoordinate:
    """Circle distance between first coordinates, for windows of points on R/Z."""

    generating: bool = True
    depth = 1


@dataclass
class OrbitSample:
    windows: np.ndarray
    seed: int
    alphabet_size: Optional[int] = None
    starts: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.windows.shape[0]

    @property
    def n_max(self) -> int:
        return self.windows.shape[1]


def substitution_prefix_length(n_max: int) -> int:
    return max(10 ** 6, 64 * n_max)


def _window_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, i]))


def sample_orbits(spec: SystemSpec, m: int, n_max: int, seed: int) -> OrbitSample:
    """Draw ``m`` windows of length ``n_max``; window ``i`` uses its own stream from ``(seed, i)``."""
    if m < 1 or n_max < 1:
        raise ValueError("m and n_max must be positive")
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    kind = spec.kind
    starts = None
    if isinstance(kind, BernoulliFinite):
        p = np.asarray(kind.p)
        windows = np.stack([_window_rng(seed, i).choice(len(p), size=n_max, p=p) for i in range(m)])
    elif isinstance(kind, BernoulliContinuous):
        windows = np.stack([_window_rng(seed, i).random(n_max) for i in range(m)])
    elif isinstance(kind, IrrationalRotation):
        x = np.array([_window_rng(seed, i).random() for i in range(m)])
        pos = np.mod(x[:, None] + np.arange(n_max)[None, :] * kind.alpha, 1.0)
        windows = (pos >= kind.beta).astype(np.int64)
    elif isinstance(kind, SubstitutionSystem):
        sub = kind.substitution
        if not is_primitive(sub):
            raise ValueError("substitution system needs a primitive substitution")
        length = substitution_prefix_length(n_max)
        if length > MAX_PREFIX:
            raise ValueError(f"n_max={n_max} needs a fixed-point prefix longer than {MAX_PREFIX}")
        u = _cached_prefix(sub, length)
        starts = np.array([_window_rng(seed, i).integers(0, length - n_max) for i in range(m)])
        windows = u[starts[:, None] + np.arange(n_max)[None, :]]
    else:
        raise TypeError(f"unknown system kind {kind!r}")
    windows.setflags(write=False)
    return OrbitSample(windows, seed, kind.alphabet_size, starts)


def _block_codes(windows: np.ndarray, depth: int, base: int) -> np.ndarray:
    width = windows.shape[1] - depth + 1
    codes = np.zeros((windows.shape[0], width), dtype=np.int64)
    for j in range(depth):
        codes = codes * base + windows[:, j : j + width]
    return codes


def _discrete_counts(codes: np.ndarray) -> np.ndarray:
    """Pairwise number of offsets where the codes differ."""
    m, length = codes.shape
    values = np.unique(codes)
    if len(values) > 64:
        out = np.zeros((m, m), dtype=np.int64)
        for k in range(length):
            col = codes[:, k]
            out += col[:, None] != col[None, :]
        return out
    agree = np.zeros((m, m), dtype=np.float64)
    for v in values:
        x = (codes == v).astype(np.float32)
        agree += x @ x.T
    return length - np.rint(agree).astype(np.int64)


def _segment_sums(sample: OrbitSample, base, lo: int, hi: int) -> np.ndarray:
    w = sample.windows
    if isinstance(base, DiscreteCoordinate):
        d = base.depth
        seg = w[:, lo : hi + d - 1]
        if sample.alphabet_size is None:
            # real-valued windows: compare blocks by exact equality
            _, inv = np.unique(seg, return_inverse=True)
            seg = inv.reshape(seg.shape)
            radix = int(seg.max()) + 1
        else:
            radix = sample.alphabet_size
        if radix ** d < 2 ** 62:
            codes = _block_codes(seg, d, radix)
        else:
            blocks = np.stack([seg[:, j : j + hi - lo] for j in range(d)], axis=-1)
            _, inv = np.unique(blocks.reshape(-1, d), axis=0, return_inverse=True)
            codes = inv.reshape(w.shape[0], hi - lo)
        return _discrete_counts(codes).astype(np.float64)
    if isinstance(base, AbsCoordinate):
        if sample.alphabet_size is not None:
            raise ValueError("AbsCoordinate needs real-valued windows")
        return cdist(w[:, lo:hi], w[:, lo:hi], "cityblock")
    if isinstance(base, ArcCoordinate):
        out = np.zeros((sample.m, sample.m))
        for k in range(lo, hi):
            diff = np.abs(w[:, k][:, None] - w[:, k][None, :]) % 1.0
            out += np.minimum(diff, 1.0 - diff)
        return out
    raise TypeError(f"unknown base semimetric {base!r}")


def averaged_distance_matrices(
    sample: OrbitSample, base, n_grid: Sequence[int]
) -> list[tuple[int, EmpiricalTriple]]:
    """Averaged semimetric ``(1/n) sum_{k<n} rho(shift^k x, shift^k y)`` at each grid value.

    Running sums carry over between consecutive grid values, so the whole
    grid costs one pass over the windows.
    """
    grid = [int(n) for n in n_grid]
    depth = base.depth
    limit = sample.n_max - (depth - 1)
    if not grid or any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"n_grid must be ascending positive integers: {grid}")
    if grid[-1] > limit:
        raise ValueError(f"n={grid[-1]} exceeds window length {sample.n_max} at depth {depth}")
    m = sample.m
    weights = np.full(m, 1.0 / m)
    total = np.zeros((m, m))
    out = []
    prev = 0
    for n in grid:
        for lo in range(prev, n, _CHUNK):
            total += _segment_sums(sample, base, lo, min(lo + _CHUNK, n))
        prev = n
        dist = total / n
        np.fill_diagonal(dist, 0.0)
        out.append((n, EmpiricalTriple(weights, dist)))
    return out
