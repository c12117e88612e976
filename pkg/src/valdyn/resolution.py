"""Weighted dual graphs of good resolutions and their intersection theory.

A graph stores exceptional primes (genus, self-intersection, generic
multiplicity b) and an edge multiset; parallel edges are allowed, self
loops are not.  Everything downstream (dual bases, discrepancies,
classification) is computed in exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .linalg import Matrix, Vector


class GraphValidationError(ValueError):
    """A dual-graph invariant failed; carries a machine-readable kind."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class UnrecognizedShapeError(ValueError):
    """The graph matches no known log-canonical shape."""


@dataclass(frozen=True)
class Prime:
    id: str
    genus: int = 0
    self_int: int = -1
    b: int = 1

    def __post_init__(self) -> None:
        if self.genus < 0:
            raise GraphValidationError("bad_genus", f"{self.id}: genus < 0")
        if self.self_int >= 0:
            raise GraphValidationError(
                "bad_self_intersection", f"{self.id}: self-intersection must be < 0"
            )
        if self.b < 1:
            raise GraphValidationError("bad_multiplicity", f"{self.id}: b must be >= 1")


@dataclass(frozen=True)
class DualGraph:
    primes: tuple[Prime, ...]
    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        ids = [p.id for p in self.primes]
        if len(set(ids)) != len(ids):
            raise GraphValidationError("duplicate_prime", "duplicate prime ids")
        known = set(ids)
        for a, b in self.edges:
            if a == b:
                raise GraphValidationError("self_loop", f"self-loop at {a}")
            if a not in known or b not in known:
                raise GraphValidationError("unknown_edge_end", f"edge ({a},{b})")
        if not self.primes:
            raise GraphValidationError("empty_graph", "graph has no primes")
        if not self._connected():
            raise GraphValidationError("not_connected", "dual graph must be connected")
        m = intersection_matrix(self)
        if not check_negative_definite(m):
            raise GraphValidationError(
                "not_negative_definite", "intersection matrix is not negative definite"
            )
        bs = [p.b for p in self.primes]
        for i, p in enumerate(self.primes):
            row = sum(bs[j] * m[i][j] for j in range(len(bs)))
            if row > 0:
                raise GraphValidationError(
                    "not_nef",
                    f"-sum(b_E E) fails nefness against {p.id}"
                    f" (sum b_j (E_j.E_i) = {row} > 0)",
                )

    def _connected(self) -> bool:
        if len(self.primes) == 1:
            return True
        adj: dict[str, set[str]] = {p.id: set() for p in self.primes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {self.primes[0].id}
        stack = [self.primes[0].id]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.primes)

    # -- lookups ---------------------------------------------------------------

    def index(self, prime_id: str) -> int:
        for i, p in enumerate(self.primes):
            if p.id == prime_id:
                return i
        raise KeyError(prime_id)

    def prime(self, prime_id: str) -> Prime:
        return self.primes[self.index(prime_id)]

    def n(self) -> int:
        return len(self.primes)

    def degree(self, prime_id: str) -> int:
        return sum(1 for a, b in self.edges if prime_id in (a, b))

    def edge_occurrences(self, a: str, b: str) -> list[int]:
        """Indices into self.edges of the parallel edges joining a and b."""
        pair = frozenset((a, b))
        return [i for i, e in enumerate(self.edges) if frozenset(e) == pair]

    def edge_handle(self, a: str, b: str, occurrence: int = 0) -> int:
        occ = self.edge_occurrences(a, b)
        if occurrence >= len(occ):
            raise KeyError(f"edge ({a},{b})#{occurrence} does not exist")
        return occ[occurrence]

    def handle_of_index(self, edge_index: int) -> tuple[str, str, int]:
        """Return (end0, end1, occurrence) naming edges[edge_index]."""
        a, b = self.edges[edge_index]
        occ = self.edge_occurrences(a, b).index(edge_index)
        return a, b, occ


def intersection_matrix(g: DualGraph) -> Matrix:
    """M_ii = E_i^2, M_ij = number of intersection points of E_i and E_j."""
    n = len(g.primes)
    idx = {p.id: i for i, p in enumerate(g.primes)}
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i, p in enumerate(g.primes):
        rows[i][i] = Fraction(p.self_int)
    for a, b in g.edges:
        i, j = idx[a], idx[b]
        rows[i][j] += 1
        rows[j][i] += 1
    return tuple(tuple(r) for r in rows)


def check_negative_definite(m: Matrix) -> bool:
    """Exact test: k-th leading principal minor has sign (-1)^k."""
    for k, minor in enumerate(linalg.leading_principal_minors(m), start=1):
        if (minor > 0) != (k % 2 == 0) or minor == 0:
            return False
    return True


@lru_cache(maxsize=None)
def dual_basis(g: DualGraph) -> Matrix:
    """Inverse intersection matrix; column i holds the E-coordinates of the
    divisor dual to E_i (all entries strictly negative on a connected graph)."""
    m = intersection_matrix(g)
    try:
        return linalg.inverse(m)
    except ValueError as exc:
        raise GraphValidationError("singular_matrix", str(exc)) from exc


def dual_divisor(g: DualGraph, prime_id: str) -> Vector:
    """E-coordinates of the dual divisor of one prime."""
    inv = dual_basis(g)
    j = g.index(prime_id)
    return tuple(inv[i][j] for i in range(len(inv)))


@dataclass(frozen=True)
class DiscrepancyTable:
    """Per-prime canonical coefficients and log discrepancies.

    k_E solves M k = (2g - 2 - E^2); A_div = 1 + k_E is the divisorial log
    discrepancy, A_norm = A_div / b_E its value at the normalized valuation.
    """

    graph: DualGraph
    k: tuple[Fraction, ...]

    def a_div(self, prime_id: str) -> Fraction:
        return 1 + self.k[self.graph.index(prime_id)]

    def a_norm(self, prime_id: str) -> Fraction:
        p = self.graph.prime(prime_id)
        return self.a_div(prime_id) / p.b

    def min_a_norm(self) -> Fraction:
        return min(self.a_norm(p.id) for p in self.graph.primes)


def canonical_coeffs(g: DualGraph) -> DiscrepancyTable:
    m = intersection_matrix(g)
    rhs = tuple(
        Fraction(2 * p.genus - 2 - p.self_int) for p in g.primes
    )
    k = linalg.solve(m, rhs)
    return DiscrepancyTable(g, k)


@dataclass(frozen=True)
class Subgraph:
    """Prime subset of a dual graph with its induced edges."""

    prime_ids: frozenset[str]
    edges: tuple[tuple[str, str], ...]

    def is_empty(self) -> bool:
        return not self.prime_ids


def _on_some_cycle(g: DualGraph) -> set[str]:
    """Vertices lying on a cycle = survivors of plain iterated leaf deletion."""
    alive = {p.id for p in g.primes}
    edges = list(g.edges)
    while True:
        deg: dict[str, int] = {v: 0 for v in alive}
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        drop = {v for v in alive if deg[v] <= 1}
        if not drop:
            return alive
        alive -= drop
        edges = [e for e in edges if e[0] in alive and e[1] in alive]


def essential_skeleton(g: DualGraph) -> Subgraph:
    """Smallest connected subgraph containing all cycles, all forks (original
    degree >= 3) and all positive-genus vertices; empty exactly when the graph
    is a chain of rational curves."""
    protected = {p.id for p in g.primes if p.genus > 0}
    protected |= {p.id for p in g.primes if g.degree(p.id) >= 3}
    protected |= _on_some_cycle(g)

    alive = {p.id for p in g.primes}
    edges = list(g.edges)
    while True:
        deg: dict[str, int] = {v: 0 for v in alive}
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        drop = {v for v in alive if deg[v] <= 1 and v not in protected}
        if not drop:
            break
        alive -= drop
        edges = [e for e in edges if e[0] in alive and e[1] in alive]
    if not protected:
        # a protected-vertex-free graph prunes to nothing
        return Subgraph(frozenset(), ())
    return Subgraph(frozenset(alive), tuple(edges))


@dataclass(frozen=True)
class Classification:
    level: str  # "log-terminal" | "lc-not-lt" | "not-lc"
    subtype: str | None
    min_a_norm: Fraction


def classify_singularity(
    g: DualGraph, table: DiscrepancyTable | None = None
) -> Classification:
    """Decide log terminal / log canonical / worse, plus the shape subtype.

    The minimum of A over the graph is attained at a vertex because A is
    affine in the normalized edge weights, so no edge sampling is needed.
    """
    if table is None:
        table = canonical_coeffs(g)
    m = table.min_a_norm()
    if m < 0:
        return Classification("not-lc", None, m)

    skel = essential_skeleton(g)
    all_rational = all(p.genus == 0 for p in g.primes)

    if m > 0:
        subtype = "cyclic-quotient" if skel.is_empty() and all_rational else "other-quotient"
        return Classification("log-terminal", subtype, m)

    # log canonical, not log terminal: match the skeleton shape
    if not skel.is_empty():
        sk_ids = skel.prime_ids
        sk_deg: dict[str, int] = {v: 0 for v in sk_ids}
        for a, b in skel.edges:
            sk_deg[a] += 1
            sk_deg[b] += 1
        has_cycle = len(skel.edges) >= len(sk_ids)  # connected subgraph
        genus_of = {p.id: p.genus for p in g.primes}

        if len(sk_ids) == 1 and not skel.edges:
            v = next(iter(sk_ids))
            if genus_of[v] == 1:
                return Classification("lc-not-lt", "simple-elliptic", m)
            if genus_of[v] == 0 and g.degree(v) in (3, 4):
                return Classification("lc-not-lt", "elliptic-quotient", m)
        elif has_cycle:
            if all(genus_of[v] == 0 for v in sk_ids) and all(
                sk_deg[v] == 2 for v in sk_ids
            ):
                return Classification("lc-not-lt", "cusp", m)
        else:
            forks = [v for v in sk_ids if g.degree(v) >= 3]
            if (
                all(genus_of[v] == 0 for v in sk_ids)
                and len(forks) == 2
                and all(g.degree(v) == 3 for v in forks)
            ):
                return Classification("lc-not-lt", "quotient-cusp", m)
    raise UnrecognizedShapeError("unrecognized lc shape")


def _fresh_id(g: DualGraph, stem: str = "F") -> str:
    used = {p.id for p in g.primes}
    i = 1
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


def blowup_free(g: DualGraph, prime_id: str, new_id: str | None = None) -> DualGraph:
    """Blow up a free point of E: new rational (-1)-curve F with b_F = b_E,
    E^2 drops by one, and a single new edge E-F appears.

    The multiplicity rule b_F = b_E holds when the maximal-ideal system is
    base-point free at the blown-up point; when modelling a base point the
    new multiplicity jumps and must be overridden in the resulting graph.
    """
    e = g.prime(prime_id)
    new_id = new_id or _fresh_id(g)
    primes = tuple(
        Prime(p.id, p.genus, p.self_int - 1, p.b) if p.id == prime_id else p
        for p in g.primes
    ) + (Prime(new_id, 0, -1, e.b),)
    return DualGraph(primes, g.edges + ((prime_id, new_id),))


def blowup_satellite(
    g: DualGraph, edge_index: int, new_id: str | None = None
) -> DualGraph:
    """Blow up the intersection point edges[edge_index] = (E, F): new rational
    (-1)-curve G with b_G = b_E + b_F replaces the edge by E-G, G-F.

    As with free points, b_G = b_E + b_F assumes the maximal-ideal system is
    base-point free there; override b on the result otherwise.
    """
    a, b = g.edges[edge_index]
    pa, pb = g.prime(a), g.prime(b)
    new_id = new_id or _fresh_id(g, "G")
    primes = tuple(
        Prime(p.id, p.genus, p.self_int - 1, p.b) if p.id in (a, b) else p
        for p in g.primes
    ) + (Prime(new_id, 0, -1, pa.b + pb.b),)
    edges = (
        g.edges[:edge_index]
        + g.edges[edge_index + 1 :]
        + ((a, new_id), (new_id, b))
    )
    return DualGraph(primes, edges)
