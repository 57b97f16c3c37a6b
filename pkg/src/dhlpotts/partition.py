"""Exact Potts partition functions of diamond hierarchical graphs.

D_m is built by two-terminal composition: each level replaces every edge by
two parallel two-edge paths.  A :class:`TwoTerminalWeights` pair holds the
partition sums with the two terminal spins held equal (``same``) or
distinct (``diff``); closing the terminals over all colorings gives Z.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .numeric import DivisibilityError, DomainError, ResourceError
from .poly import BivarPoly, UnivarPoly

__all__ = [
    "TwoTerminalWeights",
    "GraphStats",
    "MAX_LEVEL",
    "MAX_BRUTE_FORCE_EDGES",
    "edge_weights",
    "series",
    "parallel",
    "closure",
    "dhl_weights",
    "dhl_partition",
    "dhl_edges",
    "brute_force_partition",
    "chromatic",
    "reduced",
    "tutte_from_potts",
    "potts_from_tutte",
    "circuit_partition",
    "circuit_q_crossings",
    "graph_stats",
    "w_per_site",
]

MAX_LEVEL = 4
MAX_BRUTE_FORCE_EDGES = 24

_Q = BivarPoly.var(0)
_V = BivarPoly.var(1)
_ONE = BivarPoly.const(1)


@dataclass(frozen=True)
class TwoTerminalWeights:
    same: BivarPoly
    diff: BivarPoly


@dataclass(frozen=True)
class GraphStats:
    n: int
    e: int
    delta_eff: Fraction
    hausdorff_dim: float


def edge_weights() -> TwoTerminalWeights:
    """A single bond: Boltzmann weight 1+v if the spins agree, else 1."""
    return TwoTerminalWeights(_ONE + _V, _ONE)


def series(a: TwoTerminalWeights, b: TwoTerminalWeights) -> TwoTerminalWeights:
    """Join ``a`` and ``b`` at a new middle vertex and sum over its q colors."""
    dd = a.diff * b.diff
    same = a.same * b.same + (_Q - 1) * dd
    diff = a.same * b.diff + a.diff * b.same + (_Q - 2) * dd
    return TwoTerminalWeights(same, diff)


def parallel(a: TwoTerminalWeights, b: TwoTerminalWeights) -> TwoTerminalWeights:
    return TwoTerminalWeights(a.same * b.same, a.diff * b.diff)


def closure(w: TwoTerminalWeights) -> BivarPoly:
    """Sum over terminal colorings: q ways to agree, q(q-1) to differ."""
    return _Q * w.same + _Q * (_Q - 1) * w.diff


def _check_level(m: int, allow_large: bool) -> None:
    if m < 0:
        raise DomainError(f"level must be non-negative, got {m}")
    if m > MAX_LEVEL:
        if not (allow_large and m == MAX_LEVEL + 1):
            raise ResourceError(f"level {m} exceeds the cap of {MAX_LEVEL}")
        warnings.warn(
            f"D_{m} has {4 ** m} edges; exact expansion needs several GB of memory",
            ResourceWarning,
            stacklevel=3,
        )


@lru_cache(maxsize=None)
def _weights(m: int) -> TwoTerminalWeights:
    if m == 0:
        return edge_weights()
    w = _weights(m - 1)
    s = series(w, w)
    return parallel(s, s)


def dhl_weights(m: int, allow_large: bool = False) -> TwoTerminalWeights:
    _check_level(m, allow_large)
    return _weights(m)


@lru_cache(maxsize=None)
def _partition(m: int) -> BivarPoly:
    return closure(_weights(m))


def dhl_partition(m: int, allow_large: bool = False) -> BivarPoly:
    """Z(D_m, q, v) as an exact polynomial.

    Levels above 4 raise ResourceError unless ``allow_large`` is set, which
    admits m = 5 with a warning.
    """
    _check_level(m, allow_large)
    return _partition(m)


def dhl_edges(m: int) -> tuple[list[tuple[int, int]], int]:
    """Edge list and vertex count of D_m; terminals are vertices 0 and 1."""
    if m < 0:
        raise DomainError(f"level must be non-negative, got {m}")
    edges = [(0, 1)]
    n = 2
    for _ in range(m):
        nxt = []
        for a, b in edges:
            c, d = n, n + 1
            n += 2
            nxt += [(a, c), (c, b), (a, d), (d, b)]
        edges = nxt
    return edges, n


def brute_force_partition(edges, n_vertices: int) -> BivarPoly:
    """Sum q^k(G') v^e(G') over all spanning subgraphs G'.

    Subsets are enumerated depth first over the edge list with a rollback
    union-find, so each subset costs O(log n) rather than a full rebuild.
    """
    edges = [(int(a), int(b)) for a, b in edges]
    if len(edges) > MAX_BRUTE_FORCE_EDGES:
        raise ResourceError(f"{len(edges)} edges exceed the brute-force cap of {MAX_BRUTE_FORCE_EDGES}")
    for a, b in edges:
        if not (0 <= a < n_vertices and 0 <= b < n_vertices):
            raise DomainError(f"edge ({a}, {b}) has a vertex outside 0..{n_vertices - 1}")

    parent = list(range(n_vertices))
    size = [1] * n_vertices
    counts: dict[tuple[int, int], int] = {}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    def walk(idx, comps, used):
        if idx == len(edges):
            key = (comps, used)
            counts[key] = counts.get(key, 0) + 1
            return
        walk(idx + 1, comps, used)
        a, b = edges[idx]
        ra, rb = find(a), find(b)
        if ra == rb:
            walk(idx + 1, comps, used + 1)
            return
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        walk(idx + 1, comps - 1, used + 1)
        size[ra] -= size[rb]
        parent[rb] = rb

    walk(0, n_vertices, 0)
    return BivarPoly(counts)


def chromatic(m: int) -> UnivarPoly:
    """P(D_m, q) = Z(D_m, q, -1)."""
    return dhl_partition(m).specialize(1, -1)


def reduced(p):
    """Divide a polynomial exactly by q."""
    if isinstance(p, BivarPoly):
        return p.shift_q(1)
    if isinstance(p, UnivarPoly):
        return p.shift_var(1)
    raise TypeError(f"expected BivarPoly or UnivarPoly, got {type(p).__name__}")


def _shift_binomial(coeffs: dict[int, int]) -> dict[int, int]:
    # sum_s c_s (u-1)^s  ->  sum_t d_t u^t
    out: dict[int, int] = {}
    for s, c in coeffs.items():
        for t in range(s + 1):
            term = c * math.comb(s, t) * (-1 if (s - t) & 1 else 1)
            if term:
                out[t] = out.get(t, 0) + term
    return {t: c for t, c in out.items() if c}


def tutte_from_potts(z: BivarPoly, n: int, k: int = 1) -> BivarPoly:
    """Tutte polynomial T(G, x, y) from Z(G, q, v).

    Uses Z = (x-1)^k (y-1)^n T with q = (x-1)(y-1) and v = y-1.  Writing
    a = x-1, b = y-1, each term q^i v^j becomes a^i b^(i+j); dividing by
    a^k b^n must leave non-negative exponents.
    """
    ab: dict[int, dict[int, Fraction]] = {}
    for (i, j), c in z.items():
        ea, eb = i - k, i + j - n
        if ea < 0 or eb < 0:
            raise DivisibilityError("Potts polynomial is not divisible by (x-1)^k (y-1)^n")
        ab.setdefault(ea, {})[eb] = c
    # shift b -> y, then a -> x
    by_x: dict[int, dict[int, Fraction]] = {}
    for ea, row in ab.items():
        for ty, c in _shift_binomial(row).items():
            by_x.setdefault(ty, {})[ea] = c
    out = {}
    for ty, col in by_x.items():
        for tx, c in _shift_binomial(col).items():
            out[(tx, ty)] = c
    return BivarPoly(out, ("x", "y"))


def potts_from_tutte(t: BivarPoly, n: int, k: int = 1) -> BivarPoly:
    """Inverse of :func:`tutte_from_potts`."""
    # (x-1)^k (y-1)^n x^i y^j = q^k (q+v)^i (1+v)^j v^(n-k-i); single terms
    # may carry negative powers of v, so scale by v^s and divide at the end
    s = max([0] + [k + i - n for (i, _) in t.terms])
    acc = BivarPoly({})
    for (i, j), c in t.items():
        acc = acc + (_Q**k) * ((_Q + _V) ** i) * ((_ONE + _V) ** j) * (_V ** (n - k - i + s)) * c
    out = {}
    for (i, j), c in acc.items():
        if j < s:
            raise DivisibilityError("Tutte polynomial does not map to a Potts polynomial")
        out[(i, j - s)] = c
    return BivarPoly(out)


def circuit_partition(n: int) -> BivarPoly:
    """Z(C_n, q, v) = (q+v)^n + (q-1) v^n, expanded."""
    if n < 3:
        raise DomainError(f"a circuit needs at least 3 vertices, got {n}")
    terms = {(i, n - i): math.comb(n, i) for i in range(n + 1)}
    terms[(1, n)] = terms.get((1, n), 0) + 1
    terms[(0, n)] = terms.get((0, n), 0) - 1
    return BivarPoly(terms)


def circuit_q_crossings(v0) -> tuple:
    """Real-q crossings (0, -2 v0) of the circuit zero locus at fixed v0."""
    if v0 == 0:
        raise DomainError("v0 = 0 has no circuit zero locus")
    return (0 * v0, -2 * v0)


def graph_stats(m: int) -> GraphStats:
    if m < 0:
        raise DomainError(f"level must be non-negative, got {m}")
    n = 2 * (4**m + 2) // 3
    e = 4**m
    return GraphStats(n=n, e=e, delta_eff=Fraction(2 * e, n), hausdorff_dim=math.log(4) / math.log(2))


def w_per_site(m: int, q) -> float:
    """|P(D_m, q)|^(1/n) evaluated in exact arithmetic before the root."""
    p = chromatic(m).evaluate(Fraction(q))
    if p == 0:
        return 0.0
    n = graph_stats(m).n
    mag = abs(p)
    # exp(log|P|/n) without overflowing a float on huge integers
    log_mag = math.log(mag.numerator) - math.log(mag.denominator)
    return math.exp(log_mag / n)
