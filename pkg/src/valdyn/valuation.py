"""Quasimonomial valuations as points of the embedded dual graph.

A point is either a vertex (one prime) or a point of an edge carrying
homogeneous weights (r, s) on the edge's two primes.  Normalization means
r*b_E + s*b_F = 1, i.e. value 1 on the maximal ideal.  Skewness, relative
skewness and the multiplicative form of the angular distance are all exact
rationals; logs appear only for display.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from heapq import heappop, heappush

from . import linalg
from .resolution import (
    DiscrepancyTable,
    DualGraph,
    blowup_satellite,
    dual_basis,
    intersection_matrix,
)


@dataclass(frozen=True)
class QMValuation:
    """Vertex (edge_index None, weight r on the prime) or edge point.

    Edge weights are homogeneous and attach to the stored end order of
    edges[edge_index]; construction canonicalizes boundary points (s = 0)
    to vertices.
    """

    vertex: str | None
    edge_index: int | None = None
    r: Fraction = Fraction(1)
    s: Fraction = Fraction(0)

    @staticmethod
    def at_vertex(prime_id: str, weight: Fraction | int = 1) -> "QMValuation":
        return QMValuation(prime_id, None, Fraction(weight), Fraction(0))

    @staticmethod
    def on_edge(g: DualGraph, edge_index: int, r, s) -> "QMValuation":
        r, s = Fraction(r), Fraction(s)
        if r < 0 or s < 0 or (r == 0 and s == 0):
            raise ValueError("edge weights must be >= 0 and not both zero")
        a, b = g.edges[edge_index]
        if s == 0:
            return QMValuation.at_vertex(a, r)
        if r == 0:
            return QMValuation.at_vertex(b, s)
        return QMValuation(None, edge_index, r, s)

    def is_vertex(self) -> bool:
        return self.vertex is not None

    def supporting_primes(self, g: DualGraph) -> tuple[str, ...]:
        if self.vertex is not None:
            return (self.vertex,)
        return g.edges[self.edge_index]

    def weights_on(self, g: DualGraph, edge_index: int) -> tuple[Fraction, Fraction] | None:
        """Express this point in the weight coordinates of one edge, if it
        lies on that edge's closure; vertices sit at (w, 0) or (0, w)."""
        a, b = g.edges[edge_index]
        if self.vertex is not None:
            if self.vertex == a:
                return (self.r, Fraction(0))
            if self.vertex == b:
                return (Fraction(0), self.r)
            return None
        if self.edge_index == edge_index:
            return (self.r, self.s)
        return None

    def mass(self, g: DualGraph) -> Fraction:
        """Value on the maximal ideal: r*b_E + s*b_F."""
        if self.vertex is not None:
            return self.r * g.prime(self.vertex).b
        a, b = g.edges[self.edge_index]
        return self.r * g.prime(a).b + self.s * g.prime(b).b

    def normalized(self, g: DualGraph) -> "QMValuation":
        m = self.mass(g)
        if self.vertex is not None:
            return QMValuation(self.vertex, None, self.r / m, Fraction(0))
        return QMValuation(None, self.edge_index, self.r / m, self.s / m)

    def scaled(self, factor: Fraction) -> "QMValuation":
        return QMValuation(self.vertex, self.edge_index, self.r * factor, self.s * factor)


_VAL_RE = re.compile(
    r"^edge:\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)#(\d+)\s+r=([^\s]+)\s+s=([^\s]+)$"
)


def parse_valuation(text: str, g: DualGraph) -> QMValuation:
    """Fixture syntax: ``vertex:E1`` or ``edge:(E1,E2)#0 r=1/3 s=2/3``."""
    text = text.strip()
    if text.startswith("vertex:"):
        pid = text[len("vertex:") :].strip()
        g.index(pid)
        return QMValuation.at_vertex(pid, Fraction(1, g.prime(pid).b))
    m = _VAL_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse valuation literal {text!r}")
    a, b, occ, r, s = m.groups()
    idx = g.edge_handle(a, b, int(occ))
    ea, _eb = g.edges[idx]
    r, s = Fraction(r), Fraction(s)
    if ea != a:  # literal written against the opposite orientation
        r, s = s, r
    return QMValuation.on_edge(g, idx, r, s)


def format_valuation(nu: QMValuation, g: DualGraph) -> str:
    if nu.vertex is not None:
        return f"vertex:{nu.vertex}"
    a, b, occ = g.handle_of_index(nu.edge_index)
    return f"edge:({a},{b})#{occ} r={nu.r} s={nu.s}"


def divisor_of(nu: QMValuation, g: DualGraph) -> linalg.Vector:
    """E-coordinates of Z(nu) = r*dual(E) + s*dual(F)."""
    inv = dual_basis(g)
    n = g.n()
    if nu.vertex is not None:
        j = g.index(nu.vertex)
        return tuple(nu.r * inv[i][j] for i in range(n))
    a, b = g.edges[nu.edge_index]
    ja, jb = g.index(a), g.index(b)
    return tuple(nu.r * inv[i][ja] + nu.s * inv[i][jb] for i in range(n))


def _shared_edge_correction(nu1: QMValuation, nu2: QMValuation, g: DualGraph) -> Fraction:
    """min(r1*s2, r2*s1) over a shared edge, or 0 when the two points do not
    share an intersection point (distinct centers need no correction)."""
    candidates: list[int] = []
    for nu in (nu1, nu2):
        if nu.edge_index is not None:
            candidates.append(nu.edge_index)
    for idx in candidates:
        w1 = nu1.weights_on(g, idx)
        w2 = nu2.weights_on(g, idx)
        if w1 is not None and w2 is not None:
            return min(w1[0] * w2[1], w2[0] * w1[1])
    return Fraction(0)


def b_intersection(nu1: QMValuation, nu2: QMValuation, g: DualGraph) -> Fraction:
    """Intersection of the associated nef b-divisors.

    On a shared edge this is the model intersection minus min(r1 s2, r2 s1);
    with distinct centers the model intersection is already stable.
    """
    z1 = divisor_of(nu1, g)
    z2 = divisor_of(nu2, g)
    plain = linalg.bilinear(z1, intersection_matrix(g), z2)
    return plain - _shared_edge_correction(nu1, nu2, g)


def skewness(nu: QMValuation, g: DualGraph) -> Fraction:
    """alpha(nu) = -Z(nu)^2 + r*s (finite on all quasimonomial points)."""
    return -b_intersection(nu, nu, g)


def rel_skewness(nu: QMValuation, mu: QMValuation, g: DualGraph) -> Fraction:
    """beta(nu | mu) = alpha(nu) / (-Z(nu).Z(mu)); >= 1 on normalized pairs."""
    return skewness(nu, g) / (-b_intersection(nu, mu, g))


@dataclass(frozen=True)
class AngularDistance:
    exact_exp: Fraction  # exp(rho) as an exact rational
    log_value: float

    def is_zero(self) -> bool:
        return self.exact_exp == 1


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def angular_distance(nu: QMValuation, mu: QMValuation, g: DualGraph) -> AngularDistance:
    """rho(nu, mu) carried multiplicatively: exp(rho) = beta(nu|mu) beta(mu|nu)."""
    e = rel_skewness(nu, mu, g) * rel_skewness(mu, nu, g)
    return AngularDistance(e, _log_fraction(e))


def leq(mu: QMValuation, nu: QMValuation, g: DualGraph) -> bool:
    """mu <= nu in the valuation order, i.e. beta(mu | nu) = 1 exactly."""
    return rel_skewness(mu, nu, g) == 1


def log_discrepancy(nu: QMValuation, g: DualGraph, table: DiscrepancyTable) -> Fraction:
    """A(nu) = r A(E) + s A(F) with the divisorial log discrepancies A_div."""
    if nu.vertex is not None:
        return nu.r * table.a_div(nu.vertex)
    a, b = g.edges[nu.edge_index]
    return nu.r * table.a_div(a) + nu.s * table.a_div(b)


def _edge_length(g: DualGraph, edge_index: int) -> Fraction:
    a, b = g.edges[edge_index]
    return Fraction(1, g.prime(a).b * g.prime(b).b)


def _edge_parameter(nu: QMValuation, g: DualGraph, edge_index: int) -> Fraction | None:
    """Position t in [0,1] along the edge (0 at end0), for points on it."""
    w = nu.weights_on(g, edge_index)
    if w is None:
        return None
    r, s = w
    a, b = g.edges[edge_index]
    m = r * g.prime(a).b + s * g.prime(b).b
    return s * g.prime(b).b / m


def edge_metric(nu: QMValuation, mu: QMValuation, g: DualGraph) -> Fraction:
    """Shortest-path distance in the skeleton metric, where a full edge (E,F)
    has length 1/(b_E b_F) and interior points split it proportionally."""
    # 1-skeleton Dijkstra over vertices, with the two query points attached.
    INF = None
    dist: dict[str, Fraction | None] = {p.id: INF for p in g.primes}

    def seeds(v: QMValuation) -> list[tuple[str, Fraction]]:
        if v.vertex is not None:
            return [(v.vertex, Fraction(0))]
        t = _edge_parameter(v, g, v.edge_index)
        ln = _edge_length(g, v.edge_index)
        a, b = g.edges[v.edge_index]
        return [(a, t * ln), (b, (1 - t) * ln)]

    # direct segment along any common edge
    best_direct: Fraction | None = None
    for idx in range(len(g.edges)):
        t1 = _edge_parameter(nu, g, idx)
        t2 = _edge_parameter(mu, g, idx)
        if t1 is not None and t2 is not None:
            d = abs(t1 - t2) * _edge_length(g, idx)
            if best_direct is None or d < best_direct:
                best_direct = d

    counter = 0
    heap: list[tuple[Fraction, int, str]] = []
    for vid, d0 in seeds(nu):
        if dist[vid] is None or d0 < dist[vid]:
            dist[vid] = d0
            heappush(heap, (d0, counter, vid))
            counter += 1
    while heap:
        d, _, vid = heappop(heap)
        if dist[vid] is not None and d > dist[vid]:
            continue
        for i, (a, b) in enumerate(g.edges):
            if vid not in (a, b):
                continue
            other = b if vid == a else a
            nd = d + _edge_length(g, i)
            if dist[other] is None or nd < dist[other]:
                dist[other] = nd
                heappush(heap, (nd, counter, other))
                counter += 1
    best: Fraction | None = best_direct
    for vid, d0 in seeds(mu):
        if dist[vid] is None:
            continue
        cand = dist[vid] + d0
        if best is None or cand < best:
            best = cand
    assert best is not None  # graph is connected
    return best


def monotone_edge_test(g: DualGraph, edge_index: int) -> bool:
    """True when the edge length equals the skewness difference of its ends,
    i.e. the monomial parameterization is monotone for the valuation order."""
    a, b = g.edges[edge_index]
    na = QMValuation.at_vertex(a, Fraction(1, g.prime(a).b))
    nb = QMValuation.at_vertex(b, Fraction(1, g.prime(b).b))
    alpha_a = skewness(na, g)
    alpha_b = skewness(nb, g)
    return abs(alpha_b - alpha_a) == _edge_length(g, edge_index)


# -- reference implementation by explicit blow-up refinement -------------------


class OracleDepthExceeded(RuntimeError):
    pass


def b_intersection_by_blowup(
    nu1: QMValuation,
    nu2: QMValuation,
    g: DualGraph,
    max_depth: int = 10,
) -> Fraction:
    """Compute the b-divisor intersection by refining with satellite blow-ups
    until the two points have distinct centers, then taking the plain model
    intersection.  Reference oracle for b_intersection; rational weights only.
    """
    from .resolution import intersection_matrix

    cur = g
    v1, v2 = nu1, nu2
    for _ in range(max_depth + 1):
        correction_edge = None
        for idx in {v.edge_index for v in (v1, v2) if v.edge_index is not None}:
            w1 = v1.weights_on(cur, idx)
            w2 = v2.weights_on(cur, idx)
            if (
                w1 is not None
                and w2 is not None
                and min(w1[0] * w2[1], w2[0] * w1[1]) > 0
            ):
                correction_edge = idx
                break
        if correction_edge is None:
            z1 = divisor_of(v1, cur)
            z2 = divisor_of(v2, cur)
            return linalg.bilinear(z1, intersection_matrix(cur), z2)

        a, b = cur.edges[correction_edge]
        new = blowup_satellite(cur, correction_edge)
        new_id = new.primes[-1].id
        e_ag = new.edge_handle(a, new_id, len(new.edge_occurrences(a, new_id)) - 1)
        e_gb = new.edge_handle(new_id, b, len(new.edge_occurrences(new_id, b)) - 1)

        def transform(v: QMValuation) -> QMValuation:
            w = v.weights_on(cur, correction_edge)
            if w is None:
                return v  # untouched elsewhere on the graph
            r, s = w
            if r > s:
                return QMValuation.on_edge(new, e_ag, r - s, s)
            if s > r:
                return QMValuation.on_edge(new, e_gb, r, s - r)
            return QMValuation.at_vertex(new_id, r)

        v1, v2, cur = transform(v1), transform(v2), new
    raise OracleDepthExceeded(f"centers did not separate within {max_depth} blow-ups")
