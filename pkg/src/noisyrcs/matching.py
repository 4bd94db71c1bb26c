"""Randomized bipartite matching algorithms.

* ``lovasz_matching_test``: substitute random field elements for the
  symbolic entries of the bipartite adjacency matrix and test the
  determinant over GF(q).  A nonzero determinant proves a perfect
  matching exists; repeated zeros make absence likely.
* ``sample_semi_matching``: pick a uniformly random neighbour for every
  A-vertex.  The resulting multiset C of B-vertices has probability
  n(A, C) / prod |B_a|, i.e. it is drawn proportionally to its number of
  semi-matchings, even though counting them is #P-complete.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import rng as _rng
from .errors import BoundsError, DomainError, ParseError, ResourceError

MERSENNE31 = 2**31 - 1
COUNT_MAX_A = 12


@dataclass(frozen=True)
class BipartiteGraph:
    """``neighbors[a]`` lists the B-vertices adjacent to A-vertex ``a``."""

    na: int
    nb: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.neighbors) != self.na:
            raise DomainError(f"need {self.na} neighbour lists, got {len(self.neighbors)}")
        cleaned = []
        for a, nbrs in enumerate(self.neighbors):
            nbrs = tuple(int(b) for b in nbrs)
            if len(set(nbrs)) != len(nbrs):
                raise DomainError(f"duplicate edge at A-vertex {a}")
            if any(not 0 <= b < self.nb for b in nbrs):
                raise DomainError(f"neighbour of A-vertex {a} outside [0, {self.nb})")
            cleaned.append(tuple(sorted(nbrs)))
        object.__setattr__(self, "neighbors", tuple(cleaned))

    @classmethod
    def complete(cls, na: int, nb: int) -> "BipartiteGraph":
        return cls(na, nb, tuple(tuple(range(nb)) for _ in range(na)))

    @classmethod
    def random(cls, na: int, nb: int, p: float, gen: np.random.Generator) -> "BipartiteGraph":
        adj = gen.random((na, nb)) < p
        return cls(na, nb, tuple(tuple(np.flatnonzero(row).tolist()) for row in adj))

    def edges(self):
        for a, nbrs in enumerate(self.neighbors):
            for b in nbrs:
                yield a, b

    def to_text(self) -> str:
        lines = [f"na={self.na} nb={self.nb}"]
        lines += [" ".join(map(str, nbrs)) for nbrs in self.neighbors]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BipartiteGraph":
        lines = text.splitlines()
        if not lines:
            raise ParseError("empty graph file", line=1)
        header = {}
        for tok in lines[0].split():
            key, sep, value = tok.partition("=")
            if not sep or key not in ("na", "nb"):
                raise ParseError(f"bad header token {tok!r}", line=1)
            try:
                header[key] = int(value)
            except ValueError:
                raise ParseError(f"bad integer {value!r}", line=1, field=key) from None
        if set(header) != {"na", "nb"}:
            raise ParseError("header needs na=<int> nb=<int>", line=1)
        body = lines[1:]
        while body and not body[-1].strip() and len(body) > header["na"]:
            body.pop()
        if len(body) != header["na"]:
            raise ParseError(f"expected {header['na']} neighbour lines, got {len(body)}", line=len(lines))
        nbrs = []
        for i, line in enumerate(body, start=2):
            try:
                nbrs.append(tuple(int(x) for x in line.split()))
            except ValueError:
                raise ParseError("neighbour indices must be integers", line=i) from None
        try:
            return cls(header["na"], header["nb"], tuple(nbrs))
        except DomainError as exc:
            raise ParseError(str(exc)) from None


@dataclass(frozen=True)
class MultiSubset:
    """Multiplicity of each B-vertex; multiplicities sum to ``|A|``."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise DomainError("multiplicities must be nonnegative")

    @property
    def size(self) -> int:
        return sum(self.counts)

    @classmethod
    def from_elements(cls, nb: int, elements) -> "MultiSubset":
        counts = [0] * nb
        for b in elements:
            counts[b] += 1
        return cls(tuple(counts))

    def elements(self) -> list[int]:
        return [b for b, c in enumerate(self.counts) for _ in range(c)]


def sample_semi_matching(g: BipartiteGraph, seed: int) -> MultiSubset:
    for a, nbrs in enumerate(g.neighbors):
        if not nbrs:
            raise DomainError(f"A-vertex {a} has no neighbours")
    gen = _rng.stream(seed, _rng.MATCHING)
    choice = [nbrs[gen.integers(len(nbrs))] for nbrs in g.neighbors]
    return MultiSubset.from_elements(g.nb, choice)


def sample_semi_matchings(g: BipartiteGraph, k: int, seed: int) -> np.ndarray:
    """``k`` independent draws as a ``(k, nb)`` multiplicity matrix."""
    for a, nbrs in enumerate(g.neighbors):
        if not nbrs:
            raise DomainError(f"A-vertex {a} has no neighbours")
    gen = _rng.stream(seed, _rng.MATCHING, k)
    out = np.zeros((k, g.nb), dtype=np.int64)
    rows = np.arange(k)
    for nbrs in g.neighbors:
        picks = np.asarray(nbrs)[gen.integers(len(nbrs), size=k)]
        np.add.at(out, (rows, picks), 1)
    return out


def count_semi_matchings(g: BipartiteGraph, C: MultiSubset) -> int:
    """Number of maps A -> B with every image a neighbour and image multiset C.

    Exponential-time dynamic programme over remaining multiplicities.
    """
    if g.na > COUNT_MAX_A:
        raise ResourceError(f"counting is capped at |A| <= {COUNT_MAX_A}, got {g.na}")
    if len(C.counts) != g.nb:
        raise DomainError(f"multiset has {len(C.counts)} entries, graph has nb={g.nb}")
    if C.size != g.na:
        return 0

    @lru_cache(maxsize=None)
    def ways(a: int, remaining: tuple[int, ...]) -> int:
        if a == g.na:
            return 1
        total = 0
        for b in g.neighbors[a]:
            if remaining[b]:
                nxt = remaining[:b] + (remaining[b] - 1,) + remaining[b + 1 :]
                total += ways(a + 1, nxt)
        return total

    return ways(0, tuple(C.counts))


def semi_matching_distribution(g: BipartiteGraph) -> dict[MultiSubset, Fraction]:
    """Exact law of :func:`sample_semi_matching` by enumerating all choice tuples."""
    total = 1
    for nbrs in g.neighbors:
        total *= len(nbrs)
    if total == 0:
        raise DomainError("some A-vertex has no neighbours")
    hits = Counter(MultiSubset.from_elements(g.nb, choice) for choice in itertools.product(*g.neighbors))
    return {c: Fraction(v, total) for c, v in hits.items()}


# -- Lovasz determinant test ------------------------------------------------------


def det_mod(matrix, q: int) -> int:
    """Determinant over GF(q) by Gaussian elimination with row swaps."""
    a = [[int(x) % q for x in row] for row in matrix]
    n = len(a)
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det = det * a[col][col] % q
        inv = pow(a[col][col], -1, q)
        for r in range(col + 1, n):
            f = a[r][col] * inv % q
            if f:
                row_r, row_c = a[r], a[col]
                for j in range(col, n):
                    row_r[j] = (row_r[j] - f * row_c[j]) % q
    return det % q


def is_prime(q: int) -> bool:
    from sympy import isprime

    return bool(isprime(q))


@dataclass(frozen=True)
class MatchingVerdict:
    perfect_matching: bool
    certain: bool
    trials: int
    error_bound: float

    @property
    def label(self) -> str:
        return "yes" if self.perfect_matching else "probably-no"


def lovasz_matching_test(g: BipartiteGraph, q: int = MERSENNE31, k: int = 10, seed: int = 0) -> MatchingVerdict:
    """Randomized perfect-matching test with one-sided error.

    Edge entries are drawn uniformly from GF(q) minus zero.  Any nonzero
    determinant gives a certain "yes"; ``k`` zeros give "probably-no",
    wrong with probability at most ``(n / q)^k``.
    """
    n = g.na
    if g.nb != n:
        raise DomainError(f"need a balanced graph, got na={g.na} nb={g.nb}")
    if k < 1:
        raise BoundsError("need at least one trial")
    if q <= n * n:
        raise BoundsError(f"field size q={q} must exceed n^2={n * n}")
    if not is_prime(q):
        raise BoundsError(f"field size q={q} is not prime")
    bound = float(n / q) ** k
    for trial in range(k):
        gen = _rng.stream(seed, _rng.LOVASZ, trial)
        m = [[0] * n for _ in range(n)]
        for a, b in g.edges():
            m[a][b] = int(gen.integers(1, q))
        if det_mod(m, q):
            return MatchingVerdict(True, True, trial + 1, 0.0)
    return MatchingVerdict(False, False, k, bound)


def maximum_matching_size(g: BipartiteGraph) -> int:
    """Deterministic augmenting-path maximum matching (Kuhn's algorithm)."""
    match_b = [-1] * g.nb

    def augment(a: int, seen: list[bool]) -> bool:
        for b in g.neighbors[a]:
            if seen[b]:
                continue
            seen[b] = True
            if match_b[b] < 0 or augment(match_b[b], seen):
                match_b[b] = a
                return True
        return False

    return sum(augment(a, [False] * g.nb) for a in range(g.na))


def has_perfect_matching(g: BipartiteGraph) -> bool:
    return g.na == g.nb and maximum_matching_size(g) == g.na
