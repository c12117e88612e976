"""Push-forward and pull-back of dual divisors along a germ described by a
resolution table, plus attraction rates and the Jacobian-formula check.

The table is fixture data: which source prime maps to which target prime
(with pull-back multiplicity k and restriction degree e), and which curves
are contracted (with their attachment to the source primes, multiplicity,
image prime and multiplicity k along the image).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .resolution import DualGraph, DiscrepancyTable, dual_basis, dual_divisor, intersection_matrix
from .valuation import QMValuation, log_discrepancy


class TableValidationError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class PrimeMap:
    src: str
    dst: str
    k: int  # multiplicity of src in the pull-back of dst
    e: int  # topological degree of the restriction src -> dst

    def __post_init__(self) -> None:
        if self.k < 1 or self.e < 1:
            raise TableValidationError("bad_multiplicity", f"{self.src}: k, e must be >= 1")


@dataclass(frozen=True)
class ContractedCurve:
    curve: str
    m: int  # multiplicity of the curve
    dst: str  # prime the curve is sent to
    k: int  # multiplicity along the image prime
    attach: tuple[tuple[str, int], ...]  # (source prime, intersection count)

    def __post_init__(self) -> None:
        if self.m < 1 or self.k < 1:
            raise TableValidationError("bad_multiplicity", f"{self.curve}: m, k must be >= 1")
        if not any(c > 0 for _, c in self.attach):
            raise TableValidationError(
                "empty_attachment", f"{self.curve}: attachment vector is zero"
            )
        if any(c < 0 for _, c in self.attach):
            raise TableValidationError(
                "bad_attachment", f"{self.curve}: attachment counts must be >= 0"
            )


@dataclass(frozen=True)
class RfFunctional:
    """nu(R_f) as affine data: a coefficient per prime, linear in the
    homogeneous edge weights (value r*coeff(E) + s*coeff(F) on an edge)."""

    coeffs: tuple[tuple[str, Fraction], ...]

    def coeff(self, prime_id: str) -> Fraction:
        for pid, c in self.coeffs:
            if pid == prime_id:
                return c
        raise KeyError(f"no R_f coefficient for {prime_id}")

    def value(self, nu: QMValuation, g: DualGraph) -> Fraction:
        if nu.vertex is not None:
            return nu.r * self.coeff(nu.vertex)
        a, b = g.edges[nu.edge_index]
        return nu.r * self.coeff(a) + nu.s * self.coeff(b)


@dataclass(frozen=True)
class GermResolutionTable:
    source: DualGraph
    target: DualGraph
    prime_maps: tuple[PrimeMap, ...]
    contracted: tuple[ContractedCurve, ...] = ()
    r_f: RfFunctional | None = None

    def __post_init__(self) -> None:
        srcs = [pm.src for pm in self.prime_maps]
        if sorted(srcs) != sorted(p.id for p in self.source.primes):
            raise TableValidationError(
                "incomplete_prime_map", "every source prime must appear exactly once"
            )
        for pm in self.prime_maps:
            self.target.index(pm.dst)
        for c in self.contracted:
            self.target.index(c.dst)
            for pid, _ in c.attach:
                self.source.index(pid)

    def prime_map(self, src_id: str) -> PrimeMap:
        for pm in self.prime_maps:
            if pm.src == src_id:
                return pm
        raise KeyError(src_id)

    def curve(self, curve_id: str) -> ContractedCurve:
        for c in self.contracted:
            if c.curve == curve_id:
                return c
        raise KeyError(curve_id)


def _attach_vector(tbl: GermResolutionTable, c: ContractedCurve) -> linalg.Vector:
    counts = dict(c.attach)
    return tuple(Fraction(counts.get(p.id, 0)) for p in tbl.source.primes)


def curve_attachment_dot_dual(tbl: GermResolutionTable, c: ContractedCurve, prime_id: str) -> Fraction:
    """C . dual(E) over the source graph, computed from the attachment vector
    (strictly negative for a nonzero attachment on a connected graph)."""
    dual = dual_divisor(tbl.source, prime_id)
    att = _attach_vector(tbl, c)
    return linalg.dot(att, dual)


@dataclass(frozen=True)
class CurveHat:
    """The divisor orthogonal to all exceptional primes: -C + (exceptional part).

    The strict transform carries coefficient -1; only the exceptional part is
    stored numerically.
    """

    curve: str
    exceptional: linalg.Vector  # E-coordinates over the source graph


def curve_hat_divisor(tbl: GermResolutionTable, curve_id: str) -> CurveHat:
    c = tbl.curve(curve_id)
    att = _attach_vector(tbl, c)
    m = intersection_matrix(tbl.source)
    # hat(C) = -C + W with (-C + W).E_j = 0, i.e. M w = attach
    w = linalg.solve(m, att)
    check = linalg.mat_vec(m, w)
    assert all(check[i] == att[i] for i in range(len(att)))
    return CurveHat(curve_id, w)


def pushforward_dual(prime_id: str, tbl: GermResolutionTable) -> linalg.Vector:
    """Push-forward of the dual divisor of a source prime, in E-coordinates
    over the target graph:

        k_E dual(E') - sum_C (-C . dual(E)) k_C dual(G_C).
    """
    pm = tbl.prime_map(prime_id)
    out = [pm.k * x for x in dual_divisor(tbl.target, pm.dst)]
    for c in tbl.contracted:
        coef = -curve_attachment_dot_dual(tbl, c, prime_id) * c.k
        g_dual = dual_divisor(tbl.target, c.dst)
        out = [o - coef * gd for o, gd in zip(out, g_dual)]
    return tuple(out)


@dataclass(frozen=True)
class PullbackDivisor:
    """Exceptional part (E-coordinates over the source) plus curve-hat terms."""

    exceptional: linalg.Vector
    curve_parts: tuple[tuple[str, Fraction], ...] = ()  # (curve id, coefficient of hat)

    def full_exceptional(self, tbl: GermResolutionTable) -> linalg.Vector:
        """E-coordinates including each curve hat's exceptional part."""
        out = list(self.exceptional)
        for cid, coef in self.curve_parts:
            hat = curve_hat_divisor(tbl, cid)
            out = [o + coef * h for o, h in zip(out, hat.exceptional)]
        return tuple(out)


def pullback_dual(target_prime_id: str, tbl: GermResolutionTable) -> PullbackDivisor:
    """Pull-back of the dual divisor of a target prime:

        sum_{E -> E'} e_E dual(E) + sum_C (-dual(G_C) . dual(E')) k_C hat(C).
    """
    tbl.target.index(target_prime_id)
    n = tbl.source.n()
    exc = [Fraction(0)] * n
    for pm in tbl.prime_maps:
        if pm.dst == target_prime_id:
            d = dual_divisor(tbl.source, pm.src)
            exc = [o + pm.e * x for o, x in zip(exc, d)]
    inv_t = dual_basis(tbl.target)
    jt = tbl.target.index(target_prime_id)
    parts = []
    for c in tbl.contracted:
        jg = tbl.target.index(c.dst)
        coef = -inv_t[jg][jt] * c.k  # -dual(G).dual(E') > 0
        parts.append((c.curve, coef))
    return PullbackDivisor(tuple(exc), tuple(parts))


def attraction_rate_from_table(prime_id: str, tbl: GermResolutionTable) -> Fraction:
    """c(f, nu_E) = (b_{E'} / b_E) k_E for the normalized divisorial valuation."""
    pm = tbl.prime_map(prime_id)
    return Fraction(tbl.target.prime(pm.dst).b, tbl.source.prime(pm.src).b) * pm.k


class MissingRfError(ValueError):
    pass


def jacobian_check(
    nu: QMValuation,
    image: QMValuation,
    rate: Fraction,
    src_graph: DualGraph,
    src_table: DiscrepancyTable,
    r_f: RfFunctional | None,
    dst_graph: DualGraph | None = None,
    dst_table: DiscrepancyTable | None = None,
) -> bool:
    """Exact test of  c(f, nu) A(f nu) = A(nu) + nu(R_f)  at a normalized nu."""
    if r_f is None:
        raise MissingRfError("no R_f functional supplied")
    dst_graph = dst_graph or src_graph
    dst_table = dst_table or src_table
    lhs = rate * log_discrepancy(image, dst_graph, dst_table)
    rhs = log_discrepancy(nu, src_graph, src_table) + r_f.value(nu, src_graph)
    return lhs == rhs


def projection_formula_holds(tbl: GermResolutionTable) -> bool:
    """f_* dual(E) . dual(F') == dual(E) . f^* dual(F') for all prime pairs.

    Only meaningful without contracted curves (the finite case); curve terms
    would intersect against non-exceptional supports.
    """
    mt = intersection_matrix(tbl.target)
    ms = intersection_matrix(tbl.source)
    for e in tbl.source.primes:
        push = pushforward_dual(e.id, tbl)
        for f in tbl.target.primes:
            lhs = linalg.bilinear(push, mt, dual_divisor(tbl.target, f.id))
            pull = pullback_dual(f.id, tbl).full_exceptional(tbl)
            rhs = linalg.bilinear(dual_divisor(tbl.source, e.id), ms, pull)
            if lhs != rhs:
                return False
    return True
