"""Constant-length substitutions: validation, fixed points, height, column number.

Symbols are the integers ``0..s-1``; JSON files with character alphabets are
mapped to indices in alphabet order by :func:`from_json_dict`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "SubstitutionError",
    "ConstantLengthSubstitution",
    "ColumnMap",
    "SubstitutionReport",
    "validate_substitution",
    "from_json_dict",
    "incidence_and_primitivity",
    "fixed_point_prefix",
    "column_maps",
    "column_number",
    "height",
    "height_details",
    "classify_spectrum",
    "predicted_scaling_sequence",
    "predicted_scaling_text",
    "analyze",
    "THUE_MORSE",
    "PERIOD_DOUBLING",
    "CYCLIC3",
]


class SubstitutionError(ValueError):
    """Raised for a candidate that is not a valid substitution.

    ``reason`` is one of ``alphabet-too-small``, ``length-mismatch``,
    ``length-too-short``, ``non-injective``, ``no-seed-letter``, ``malformed``
    or ``not-primitive``.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


@dataclass(frozen=True)
class ConstantLengthSubstitution:
    rules: tuple[tuple[int, ...], ...]
    seed_letter: int
    letters: tuple[str, ...] | None = field(default=None, compare=False)

    @property
    def alphabet_size(self) -> int:
        return len(self.rules)

    @property
    def length(self) -> int:
        return len(self.rules[0])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rules, dtype=np.int64)

    def image(self, word: Sequence[int]) -> list[int]:
        out: list[int] = []
        for a in word:
            out.extend(self.rules[a])
        return out

    def relabel(self, perm: Sequence[int]) -> "ConstantLengthSubstitution":
        """Conjugate by the permutation ``a -> perm[a]``."""
        inv = [0] * len(perm)
        for a, b in enumerate(perm):
            inv[b] = a
        rules = tuple(tuple(perm[x] for x in self.rules[inv[b]]) for b in range(len(perm)))
        return ConstantLengthSubstitution(rules, perm[self.seed_letter])


@dataclass(frozen=True)
class ColumnMap:
    """A total map on the alphabet, stored as its value table."""

    table: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(set(self.table))

    def then(self, other: "ColumnMap") -> "ColumnMap":
        """``a -> other(self(a))``."""
        return ColumnMap(tuple(other.table[x] for x in self.table))


@dataclass(frozen=True)
class SubstitutionReport:
    primitive: bool
    incidence: tuple[tuple[int, ...], ...]
    height: int
    column_number: int
    spectrum: str
    predicted_scaling: str
    height_prefix_length: int
    seed_letter: int

    def lines(self, letters: Sequence[str] | None = None) -> list[str]:
        seed = letters[self.seed_letter] if letters else str(self.seed_letter)
        rows = ["[" + ",".join(str(x) for x in r) + "]" for r in self.incidence]
        return [
            "valid: yes",
            f"seed_letter: {seed}",
            f"primitive: {'yes' if self.primitive else 'no'}",
            f"incidence: [{','.join(rows)}]",
            f"height: {self.height}",
            f"height_prefix_length: {self.height_prefix_length}",
            f"column_number: {self.column_number}",
            f"spectrum: {self.spectrum}",
            f"predicted_scaling: {self.predicted_scaling}",
        ]


def validate_substitution(rules: Sequence[Sequence[int]], seed_letter: int | None = None):
    """Check the hypotheses on a rule table and return a ConstantLengthSubstitution.

    Primitivity is not checked here; see :func:`incidence_and_primitivity`.
    """
    s = len(rules)
    if s < 2:
        raise SubstitutionError("alphabet-too-small", f"alphabet has {s} letter(s)")
    words = [tuple(int(x) for x in w) for w in rules]
    for w in words:
        if any(x < 0 or x >= s for x in w):
            raise SubstitutionError("malformed", f"symbol outside 0..{s - 1} in {w}")
    lengths = {len(w) for w in words}
    if len(lengths) != 1:
        raise SubstitutionError("length-mismatch", f"rule lengths {sorted(lengths)}")
    q = lengths.pop()
    if q < 2:
        raise SubstitutionError("length-too-short", f"length {q} < 2")
    if len(set(words)) != s:
        raise SubstitutionError("non-injective", "two letters share an image")
    seeds = [a for a in range(s) if words[a][0] == a]
    if seed_letter is None:
        if not seeds:
            raise SubstitutionError("no-seed-letter", "no rule starts with its own letter")
        seed_letter = seeds[0]
    elif seed_letter not in seeds:
        raise SubstitutionError("no-seed-letter", f"rule for {seed_letter} does not start with it")
    return ConstantLengthSubstitution(tuple(words), seed_letter)


def from_json_dict(obj) -> ConstantLengthSubstitution:
    """Build from ``{"alphabet": [...], "rules": {...}, "seed_letter": ...}``."""
    try:
        alphabet = list(obj["alphabet"])
        rules = dict(obj["rules"])
    except (KeyError, TypeError) as exc:
        raise SubstitutionError("malformed", f"missing field {exc}") from None
    if any(not isinstance(a, str) or len(a) != 1 for a in alphabet):
        raise SubstitutionError("malformed", "letters must be single characters")
    if len(set(alphabet)) != len(alphabet):
        raise SubstitutionError("malformed", "duplicate letters in alphabet")
    index = {a: i for i, a in enumerate(alphabet)}
    if set(rules) != set(alphabet):
        raise SubstitutionError("malformed", "rules must map every letter of the alphabet")
    table = []
    for a in alphabet:
        word = rules[a]
        if not isinstance(word, str) or any(ch not in index for ch in word):
            raise SubstitutionError("malformed", f"rule for {a!r} uses unknown letters")
        table.append([index[ch] for ch in word])
    seed = obj.get("seed_letter")
    if seed is not None:
        if seed not in index:
            raise SubstitutionError("no-seed-letter", f"{seed!r} is not in the alphabet")
        seed = index[seed]
    sub = validate_substitution(table, seed)
    return ConstantLengthSubstitution(sub.rules, sub.seed_letter, tuple(alphabet))


def incidence_and_primitivity(sub: ConstantLengthSubstitution) -> tuple[np.ndarray, bool]:
    s = sub.alphabet_size
    m = np.zeros((s, s), dtype=np.int64)
    for a, w in enumerate(sub.rules):
        for b in w:
            m[a, b] += 1
    # Wielandt: a primitive s x s matrix has M^t > 0 for t = (s-1)^2 + 1.
    pattern = (m > 0).astype(np.int64)
    power = pattern.copy()
    for _ in range((s - 1) ** 2 + 1):
        if power.all():
            return m, True
        power = ((power @ pattern) > 0).astype(np.int64)
    return m, bool(power.all())


def is_primitive(sub: ConstantLengthSubstitution) -> bool:
    return incidence_and_primitivity(sub)[1]


def _require_primitive(sub: ConstantLengthSubstitution) -> None:
    if not is_primitive(sub):
        raise SubstitutionError("not-primitive", "incidence matrix has no positive power")


def fixed_point_prefix(sub: ConstantLengthSubstitution, length: int) -> np.ndarray:
    """Prefix of the fixed point starting with the seed letter, of length >= ``length``."""
    table = sub.as_array()
    u = np.array([sub.seed_letter], dtype=np.int64)
    while len(u) < length:
        u = table[u].ravel()
    return u


@lru_cache(maxsize=8)
def _cached_prefix(sub: ConstantLengthSubstitution, length: int) -> np.ndarray:
    u = fixed_point_prefix(sub, length)
    u.setflags(write=False)
    return u


def column_maps(sub: ConstantLengthSubstitution) -> list[ColumnMap]:
    """The one-step column maps ``a -> rules[a][j]`` for ``j < q``."""
    return [ColumnMap(tuple(w[j] for w in sub.rules)) for j in range(sub.length)]


def column_semigroup(sub: ConstantLengthSubstitution) -> set[ColumnMap]:
    gens = column_maps(sub)
    seen = set(gens)
    frontier = list(gens)
    while frontier:
        nxt = []
        for f in frontier:
            for g in gens:
                h = f.then(g)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return seen


def column_number(sub: ConstantLengthSubstitution) -> int:
    """Minimal image size over all column maps of all powers of the substitution.

    The column map of position ``j*q**n + r`` in ``xi**(n+1)`` is the column
    map ``r`` of ``xi**n`` applied after the one-step map ``j``, so every
    column map is a composition of one-step maps and the minimum is attained
    in the finite semigroup they generate.
    """
    _require_primitive(sub)
    return min(f.rank for f in column_semigroup(sub))


def _strip_common_primes(g: int, q: int) -> int:
    """Largest divisor of ``g`` coprime to ``q``."""
    while True:
        d = math.gcd(g, q)
        if d == 1:
            return g
        while g % d == 0:
            g //= d


def height_details(sub: ConstantLengthSubstitution, max_length: int = 1 << 24) -> tuple[int, int]:
    """Return ``(height, prefix length inspected)``.

    The gcd of the return times of the first letter is tracked over prefixes
    of doubling length until it is unchanged for two doublings and the prefix
    is at least ``q**4 * s`` long.
    """
    _require_primitive(sub)
    q, s = sub.length, sub.alphabet_size
    floor = q ** 4 * s
    length = q ** 4
    history: list[int] = []
    while True:
        u = _cached_prefix(sub, length)[:length]
        pos = np.flatnonzero(u[1:] == u[0]) + 1
        g = int(np.gcd.reduce(pos)) if len(pos) else 0
        history.append(g)
        stable = len(history) >= 3 and history[-1] == history[-2] == history[-3] and g > 0
        if stable and length >= floor:
            h = _strip_common_primes(g, q)
            if h <= s:
                return h, length
        if length >= max_length:
            if g == 0:
                raise RuntimeError("first letter never recurs; substitution cannot be primitive")
            raise RuntimeError(f"height did not settle within a prefix of {length}")
        length *= 2


def height(sub: ConstantLengthSubstitution) -> int:
    return height_details(sub)[0]


def classify_spectrum(sub: ConstantLengthSubstitution) -> str:
    return "PurePoint" if column_number(sub) == height(sub) else "NotPurePoint"


def predicted_scaling_sequence(sub: ConstantLengthSubstitution, n_values: Sequence[int]) -> list[float]:
    """``1 + (c - h) * log2(n)`` for each ``n``."""
    diff = column_number(sub) - height(sub)
    for n in n_values:
        if n < 1:
            raise ValueError("n must be >= 1")
    return [1.0 + diff * math.log2(n) for n in n_values]


def predicted_scaling_text(c: int, h: int) -> str:
    diff = c - h
    return "h_n = 1" if diff == 0 else f"h_n = 1 + {diff}·log n"


def analyze(sub: ConstantLengthSubstitution) -> SubstitutionReport:
    m, prim = incidence_and_primitivity(sub)
    if not prim:
        raise SubstitutionError("not-primitive", "incidence matrix has no positive power")
    h, used = height_details(sub)
    c = column_number(sub)
    return SubstitutionReport(
        primitive=prim,
        incidence=tuple(tuple(int(x) for x in row) for row in m),
        height=h,
        column_number=c,
        spectrum="PurePoint" if c == h else "NotPurePoint",
        predicted_scaling=predicted_scaling_text(c, h),
        height_prefix_length=used,
        seed_letter=sub.seed_letter,
    )


THUE_MORSE = validate_substitution([[0, 1], [1, 0]])
PERIOD_DOUBLING = validate_substitution([[0, 1], [0, 0]])
CYCLIC3 = validate_substitution([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
