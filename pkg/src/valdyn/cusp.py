"""Cusp singularities from periodic modified continued fractions.

A cycle [k_0, ..., k_{r-1}] of integers >= 2 (not all 2) determines a
quadratic irrational w = k_0 - 1/(k_1 - 1/...), the lattice N = Z + wZ,
the fan vertices e_n (e_0 = 1, e_1 = w, e_{n-1} + e_{n+1} = c_n e_n with
c_n the cycle read in reverse) and the fundamental totally positive unit
eps_w = e_r preserving N.  Multiplication by a totally positive alpha
with alpha N within N induces a finite endomorphism of the cusp; its
action on the cycle of the dual graph is emitted as a piecewise-linear
skeleton map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import (
    QuadElem,
    fundamental_totally_positive_unit,
    quad_from_root,
    unit_log_index,
)
from .dynamics import Sector, SkeletonMap
from .resolution import DualGraph, Prime


class CuspError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def cf_to_quadratic(cycle: list[int]) -> QuadElem:
    """Value w of the periodic modified continued fraction [[k_0, ..., k_{r-1}]],
    the root of the cycle's Moebius fixed-point equation with w > 1 > w' > 0."""
    if not cycle or any(k < 2 for k in cycle):
        raise CuspError("bad_cycle", "cycle entries must be integers >= 2")
    if all(k == 2 for k in cycle):
        raise CuspError("bad_cycle", "cycle entries must not all equal 2")
    # t -> k - 1/t is the matrix [[k, -1], [1, 0]] acting projectively;
    # the fixed-point equation composes k_0 outermost
    a, b, c, d = 1, 0, 0, 1
    for k in reversed(cycle):
        a, b, c, d = k * a - c, k * b - d, a, b
    # w = (a w + b) / (c w + d)
    disc = (d - a) ** 2 + 4 * c * b
    if c == 0 or disc <= 0:
        raise CuspError("bad_cycle", "cycle does not define a quadratic irrational")
    w = quad_from_root(disc, Fraction(a - d, 2 * c), Fraction(1, 2 * c))
    if not (w > 1 and 0 < w.conj() < 1):
        w = w.conj()
    if not (w > 1 and 0 < w.conj() < 1):
        raise CuspError("bad_cycle", f"no root with w > 1 > w' > 0 for {cycle}")
    return w


@dataclass(frozen=True)
class CuspData:
    """Cycle weights, unit exponent s (the deck transformation is eps_w**s),
    and the derived arithmetic."""

    cycle: tuple[int, ...]
    s: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if self.s < 1:
            raise CuspError("bad_exponent", "s must be >= 1")
        cf_to_quadratic(list(self.cycle))  # validates the cycle

    @property
    def r(self) -> int:
        return len(self.cycle)

    @property
    def omega(self) -> QuadElem:
        return cf_to_quadratic(list(self.cycle))

    @property
    def d(self) -> int:
        return self.omega.d

    def k(self, n: int) -> int:
        return self.cycle[n % self.r]

    def c(self, n: int) -> int:
        """Hull recurrence coefficient at e_n: the cycle read in reverse."""
        return self.cycle[(-n) % self.r]

    def lattice_coords(self, x: QuadElem) -> tuple[Fraction, Fraction]:
        """Coordinates (u, v) with x = u + v*omega."""
        w = self.omega
        v = x.b / w.b
        u = x.a - v * w.a
        return u, v

    def in_lattice(self, x: QuadElem) -> bool:
        u, v = self.lattice_coords(x)
        return u.denominator == 1 and v.denominator == 1

    def epsilon(self) -> QuadElem:
        """The chosen deck transformation eps = eps_w**s."""
        return fundamental_unit(self) ** self.s


@lru_cache(maxsize=None)
def _vertex_sequence_cached(cusp: CuspData, n: int) -> QuadElem:
    w = cusp.omega
    one = QuadElem(w.d, Fraction(1), Fraction(0))
    if n == 0:
        return one
    if n == 1:
        return w
    if n > 1:
        return (
            cusp.c(n - 1) * _vertex_sequence_cached(cusp, n - 1)
            - _vertex_sequence_cached(cusp, n - 2)
        )
    return (
        cusp.c(n + 1) * _vertex_sequence_cached(cusp, n + 1)
        - _vertex_sequence_cached(cusp, n + 2)
    )


def vertex_sequence(cusp: CuspData, n: int) -> QuadElem:
    """Boundary lattice point e_n of the positive cone's convex hull:
    e_0 = 1, e_1 = omega, e_{n-1} + e_{n+1} = c_n e_n with c_n = k_{-n mod r}
    (the continued-fraction cycle is consumed downward: e_{-1} = k_0 - omega,
    e_{-2}/e_{-1} involves k_1, and so on).  Every e_n is totally positive.
    """
    import sys

    if abs(n) > sys.getrecursionlimit() - 100:
        # walk iteratively to fill the cache for very deep indices
        step = 1 if n > 0 else -1
        for m in range(0, n, step * 500):
            _vertex_sequence_cached(cusp, m)
    return _vertex_sequence_cached(cusp, n)


def fundamental_unit(cusp: CuspData) -> QuadElem:
    """eps_w = e_r: the fundamental totally positive unit preserving the
    lattice; validated on construction."""
    eps = vertex_sequence(cusp, cusp.r)
    if not (eps.is_unit() and eps.is_totally_positive() and eps > 1):
        raise CuspError("bad_unit", f"e_r = {eps} is not a totally positive unit > 1")
    if not (cusp.in_lattice(eps) and cusp.in_lattice(eps * cusp.omega)):
        raise CuspError("bad_unit", f"{eps} does not preserve the lattice")
    return eps


@dataclass(frozen=True)
class AlphaValidation:
    ok: bool
    degree: int | None
    reason: str | None = None


def validate_alpha(alpha: QuadElem, cusp: CuspData) -> AlphaValidation:
    """An endomorphism datum: alpha totally positive with alpha * N inside N;
    its topological degree is the field norm."""
    if alpha.d != cusp.d:
        return AlphaValidation(False, None, "wrong quadratic field")
    if not alpha.is_totally_positive():
        return AlphaValidation(False, None, "not totally positive")
    if not (cusp.in_lattice(alpha) and cusp.in_lattice(alpha * cusp.omega)):
        return AlphaValidation(False, None, "does not map the lattice into itself")
    q = alpha.norm()
    if q.denominator != 1 or q <= 0:
        return AlphaValidation(False, None, f"norm {q} is not a positive integer")
    return AlphaValidation(True, int(q))


@dataclass(frozen=True)
class RotationNumber:
    beta_float: float
    rational: Fraction | None  # None = irrational

    @property
    def is_rational(self) -> bool:
        return self.rational is not None


def rotation_number(alpha: QuadElem, cusp: CuspData) -> RotationNumber:
    """Rotation number beta = (log(alpha) - log(alpha')) / (2 log(eps)).

    Rationality is decided exactly by a unit criterion: beta = p/q means
    (alpha/alpha')^q = eps^(2p), so alpha/alpha' satisfies a monic integral
    equation and, being invertible (its norm is alpha'alpha/(alpha alpha') = 1),
    is a totally positive unit; conversely the totally positive units form a
    rank-one group generated by the fundamental one, so alpha/alpha' and eps
    are both exact powers of a common base and the log ratio is rational.
    The exponents are found by bounded power search, giving p/q exactly.
    """
    check = validate_alpha(alpha, cusp)
    if not check.ok:
        raise CuspError("invalid_alpha", check.reason or "invalid alpha")
    eps = cusp.epsilon()
    ratio = alpha / alpha.conj()
    beta_float = (math.log(float(alpha)) - math.log(float(alpha.conj()))) / (
        2 * math.log(float(eps))
    )
    if not ratio.is_unit():
        return RotationNumber(beta_float, None)
    base = fundamental_totally_positive_unit(cusp.d)
    p = unit_log_index(ratio, base)
    q = unit_log_index(eps, base)
    if p is None or q is None:
        raise CuspError("unit_search_failed", "bounded power search failed")
    return RotationNumber(beta_float, Fraction(p, 2 * q))


def irrational_example(cusp: CuspData, bound: int = 10000) -> QuadElem:
    """Smallest p above the rational part a of eps with p - a integral such
    that alpha = p + b*sqrt(d) is a valid endomorphism datum with irrational
    rotation number (b the irrational part of eps).

    alpha = (p - a) + eps always maps the lattice into itself; only the
    rotation test filters.  The shift p - a must be an integer so this holds
    for half-integer units as well.
    """
    eps = cusp.epsilon()
    for j in range(1, bound + 1):
        alpha = QuadElem(cusp.d, eps.a + j, eps.b)
        if not validate_alpha(alpha, cusp).ok:
            continue
        if rotation_number(alpha, cusp).rational is None:
            return alpha
    raise CuspError("search_exhausted", f"no irrational alpha within {bound} steps")


def cusp_dual_graph(cusp: CuspData) -> DualGraph:
    """Cycle of r*s rational curves carrying the cycle weights as
    self-intersections, generic multiplicity 1; requires r*s >= 2 (refine
    the cycle by a blow-up otherwise).

    Prime E_n corresponds to the hull vertex e_n, so its self-intersection
    is -c_n (the reversed reading of the cycle); as an unoriented cycle this
    is the same weighted graph as the forward reading.
    """
    n = cusp.r * cusp.s
    if n < 2:
        raise CuspError(
            "cycle_too_short",
            "the cycle graph needs r*s >= 2 components; refine by a blow-up first",
        )
    primes = tuple(Prime(f"E{i}", 0, -cusp.c(i), 1) for i in range(n))
    edges = tuple((f"E{i}", f"E{(i + 1) % n}") for i in range(n))
    return DualGraph(primes, edges)


def _face_hint(cusp: CuspData, x: QuadElem) -> int:
    """Float estimate of the face index of a totally positive x: the fan
    position scales like (log x - log x') / (2 log eps_omega) per period."""
    eps = fundamental_unit(cusp)
    phi = (math.log(float(x)) - math.log(float(x.conj()))) / 2
    return round(cusp.r * phi / math.log(float(eps)))


def _coords_on_face(cusp: CuspData, x: QuadElem, m: int):
    em = vertex_sequence(cusp, m)
    em1 = vertex_sequence(cusp, m + 1)
    det = em.a * em1.b - em1.a * em.b
    u = (x.a * em1.b - em1.a * x.b) / det
    v = (em.a * x.b - x.a * em.b) / det
    return u, v


def _faces_coords(cusp: CuspData, x: QuadElem, hint: int, window: int = 16):
    """Face m with integers (u, v) >= 0 and x = u e_m + v e_{m+1}, searched
    outward from the hint; prefers the face on which x is interior or sits
    at the lower boundary."""
    for dist in range(window + 1):
        for m in ({hint + dist, hint - dist}):
            u, v = _coords_on_face(cusp, x, m)
            if u >= 0 and v >= 0:
                if v == 0:  # boundary ray e_m: canonical face is (e_m, e_m+1)
                    pass
                elif u == 0:  # x on the ray e_{m+1}: use the next face
                    m, u, v = m + 1, v, Fraction(0)
                if u.denominator != 1 or v.denominator != 1:
                    raise CuspError("bad_lattice", f"{x} is not integral on face {m}")
                return m, int(u), int(v)
    raise CuspError("face_not_found", f"no face near {hint} contains {x}")


def induced_skeleton_map(alpha: QuadElem, cusp: CuspData) -> SkeletonMap:
    """Skeleton map of the finite endomorphism attached to alpha.

    For each fundamental-domain face (e_n, e_{n+1}), locate the faces hit by
    alpha e_n and alpha e_{n+1}, subdivide the source cone at the preimages
    of the crossed face boundaries, and solve alpha * (generators) in the
    target face basis; every sector matrix has determinant equal to the
    topological degree.
    """
    check = validate_alpha(alpha, cusp)
    if not check.ok:
        raise CuspError("invalid_alpha", check.reason or "invalid alpha")
    graph = cusp_dual_graph(cusp)
    n_faces = cusp.r * cusp.s
    deg = check.degree

    sectors: list[Sector] = []
    for n in range(n_faces):
        en = vertex_sequence(cusp, n)
        en1 = vertex_sequence(cusp, n + 1)
        m0, *_ = _faces_coords(cusp, alpha * en, _face_hint(cusp, alpha * en))
        m1, *_ = _faces_coords(cusp, alpha * en1, _face_hint(cusp, alpha * en1))
        if m1 < m0:
            raise CuspError("face_not_found", "image faces are out of order")

        # subdivision slopes: preimages of the boundary rays e_j, m0 < j <= m1
        cuts: list[tuple[Fraction, Fraction]] = [(Fraction(1), Fraction(0))]
        for j in range(m0 + 1, m1 + 1):
            ej = vertex_sequence(cusp, j)
            pre = ej * alpha.conj()  # alpha^(-1) e_j up to the positive factor norm
            det = en.a * en1.b - en1.a * en.b
            u = (pre.a * en1.b - en1.a * pre.b) / det
            v = (en.a * pre.b - pre.a * en.b) / det
            if u < 0 or v < 0:
                raise CuspError("face_not_found", "boundary preimage left the cone")
            cuts.append((u, v))
        cuts.append((Fraction(0), Fraction(1)))

        for i in range(len(cuts) - 1):
            if _slope_of_pair(cuts[i]) == _slope_of_pair(cuts[i + 1]):
                continue  # boundary ray mapped onto a face boundary
            j = m0 + i
            ej = vertex_sequence(cusp, j)
            ej1 = vertex_sequence(cusp, j + 1)
            det = ej.a * ej1.b - ej1.a * ej.b

            def coords(x: QuadElem) -> tuple[int, int]:
                u = (x.a * ej1.b - ej1.a * x.b) / det
                v = (ej.a * x.b - x.a * ej.b) / det
                if u.denominator != 1 or v.denominator != 1:
                    raise CuspError("bad_lattice", "non-integral sector matrix")
                return int(u), int(v)

            a_en = coords(alpha * en)
            a_en1 = coords(alpha * en1)
            matrix = ((a_en[0], a_en1[0]), (a_en[1], a_en1[1]))
            if matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0] != deg:
                raise CuspError(
                    "bad_determinant", "sector determinant differs from the degree"
                )
            lo = _slope_of_pair(cuts[i])
            hi = _slope_of_pair(cuts[i + 1])
            sectors.append(
                Sector(("edge", n), lo, hi, matrix, ("edge", j % n_faces))
            )
    return SkeletonMap(
        graph, tuple(sectors), rays=(), finite=True, cusp_provenance=(cusp, alpha)
    )


def _slope_of_pair(uv: tuple[Fraction, Fraction]) -> Fraction | None:
    u, v = uv
    if u == 0:
        return None
    return v / u
