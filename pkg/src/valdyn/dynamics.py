"""A germ's action on the skeleton as a piecewise integer-linear cone map.

The map is given by sectors: a source edge (or ray) carries a slope
subinterval, an integer 2x2 matrix, and a target edge or ray.  All orbit,
fixed-point, recursion and distance computations below stay in exact
arithmetic (Fractions, and quadratic field elements at irrational fixed
points); floats only decorate reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .arith import QuadElem, quad_from_root, isqrt_exact
from .resolution import DualGraph
from .valuation import QMValuation

Slope = Optional[Fraction]  # None encodes +infinity
Loc = tuple[str, object]  # ("edge", index) | ("ray", ray_id)


class SkeletonMapError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class OutsideDomainError(SkeletonMapError):
    def __init__(self, message: str):
        super().__init__("outside_domain", message)


class InconclusiveError(RuntimeError):
    """Classification could not be completed within the exact budget."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class Ray:
    """Half-infinite edge from a vertex toward a named end (a curve or an
    infinitely singular direction).  Points carry homogeneous weights (a, b):
    a on the base prime, b toward the end."""

    base: str
    label: str

    @property
    def id(self) -> str:
        return f"{self.base}->{self.label}"


@dataclass(frozen=True)
class RayPoint:
    ray_id: str
    a: object  # Fraction (or quadratic element in exact fixed-point work)
    b: object

    def is_base_vertex(self) -> bool:
        return self.b == 0


Point = Union[QMValuation, RayPoint]


@dataclass(frozen=True)
class Sector:
    src: Loc
    lo: Slope
    hi: Slope  # None = +infinity
    matrix: tuple[tuple[int, int], tuple[int, int]]
    dst: Loc

    def contains_slope(self, sigma: Slope) -> bool:
        if sigma is None:
            return self.hi is None
        if self.lo is not None and sigma < self.lo:
            return False
        return self.hi is None or sigma <= self.hi

    def image_weights(self, r, s):
        (m00, m01), (m10, m11) = self.matrix
        return (m00 * r + m01 * s, m10 * r + m11 * s)


@dataclass(frozen=True)
class SkeletonMap:
    graph: DualGraph
    sectors: tuple[Sector, ...]
    rays: tuple[Ray, ...] = ()
    finite: bool | None = None
    cusp_provenance: object = None  # set when built from cusp arithmetic

    def __post_init__(self) -> None:
        self._validate()

    # -- structure helpers -----------------------------------------------------

    def ray(self, ray_id: str) -> Ray:
        for r in self.rays:
            if r.id == ray_id:
                return r
        raise KeyError(ray_id)

    def locs(self) -> list[Loc]:
        return [("edge", i) for i in range(len(self.graph.edges))] + [
            ("ray", r.id) for r in self.rays
        ]

    def sectors_at(self, loc: Loc) -> list[Sector]:
        ss = [s for s in self.sectors if s.src == loc]
        return sorted(ss, key=lambda s: (s.lo is None, s.lo or Fraction(0)))

    def _loc_ends(self, loc: Loc) -> tuple[str, str | None]:
        kind, key = loc
        if kind == "edge":
            a, b = self.graph.edges[key]
            return a, b
        ray = self.ray(key)
        return ray.base, None

    def norm_covector(self, loc: Loc) -> tuple[int, int]:
        """Coefficients of the maximal-ideal value in the loc's weights."""
        a, b = self._loc_ends(loc)
        ba = self.graph.prime(a).b
        bb = self.graph.prime(b).b if b is not None else 0
        return ba, bb

    # -- validation --------------------------------------------------------------

    def _validate(self) -> None:
        for s in self.sectors:
            (m00, m01), (m10, m11) = s.matrix
            for x in (m00, m01, m10, m11):
                if not isinstance(x, int):
                    raise SkeletonMapError("bad_matrix", "matrix entries must be integers")
            if m00 * m11 - m01 * m10 == 0:
                raise SkeletonMapError("degenerate_matrix", f"det = 0 in sector {s}")
            for gen in _cone_generators(s.lo, s.hi):
                w = s.image_weights(*gen)
                if w[0] < 0 or w[1] < 0 or (w[0] == 0 and w[1] == 0):
                    raise SkeletonMapError(
                        "cone_violation",
                        f"sector {s} maps generator {gen} outside the target cone",
                    )
            self._check_loc(s.src)
            self._check_loc(s.dst)

        for loc in self.locs():
            ss = self.sectors_at(loc)
            if not ss:
                raise SkeletonMapError("uncovered", f"no sectors cover {loc}")
            if ss[0].lo != 0:
                raise SkeletonMapError("uncovered", f"{loc}: cones must start at slope 0")
            for s1, s2 in zip(ss, ss[1:]):
                if s1.hi is None or s1.hi != s2.lo:
                    raise SkeletonMapError(
                        "uncovered", f"{loc}: cones must tile [0, oo] without gaps"
                    )
                w1 = s1.image_weights(*_slope_vector(s1.hi))
                w2 = s2.image_weights(*_slope_vector(s2.lo))
                if not self._same_image(s1.dst, w1, s2.dst, w2):
                    raise SkeletonMapError(
                        "discontinuous",
                        f"{loc}: adjacent sectors disagree at slope {s1.hi}",
                    )
            if ss[-1].hi is not None:
                raise SkeletonMapError("uncovered", f"{loc}: cones must reach slope oo")
        self._check_vertex_consistency()

    def _check_loc(self, loc: Loc) -> None:
        kind, key = loc
        if kind == "edge":
            if not isinstance(key, int) or not (0 <= key < len(self.graph.edges)):
                raise SkeletonMapError("bad_loc", f"no edge with index {key}")
        elif kind == "ray":
            self.ray(key)  # raises KeyError if absent
        else:
            raise SkeletonMapError("bad_loc", f"unknown location kind {kind}")

    def _same_image(self, d1: Loc, w1, d2: Loc, w2) -> bool:
        """Same image valuation: same projective point and same mass."""
        n1 = self.norm_covector(d1)
        n2 = self.norm_covector(d2)
        if n1[0] * w1[0] + n1[1] * w1[1] != n2[0] * w2[0] + n2[1] * w2[1]:
            return False
        return _points_equal(self._place(d1, *w1), self._place(d2, *w2))

    def _check_vertex_consistency(self) -> None:
        for p in self.graph.primes:
            images: list[tuple[Loc, tuple]] = []
            for loc in self.locs():
                a, b = self._loc_ends(loc)
                if a == p.id:
                    w = (Fraction(1, p.b), Fraction(0))
                elif b == p.id:
                    w = (Fraction(0), Fraction(1, p.b))
                else:
                    continue
                sec = self._sector_for(loc, _slope_of(*w))
                images.append((sec.dst, sec.image_weights(*w)))
            for dst, w in images[1:]:
                if not self._same_image(images[0][0], images[0][1], dst, w):
                    raise SkeletonMapError(
                        "discontinuous", f"inconsistent image for vertex {p.id}"
                    )

    # -- evaluation ---------------------------------------------------------------

    def _sector_for(self, loc: Loc, sigma: Slope) -> Sector:
        for s in self.sectors_at(loc):
            if s.contains_slope(sigma):
                return s
        raise OutsideDomainError(f"slope {sigma} on {loc} is not covered")

    def _place(self, loc: Loc, r, s) -> Point:
        kind, key = loc
        if kind == "edge":
            a, b = self.graph.edges[key]
            if s == 0:
                return QMValuation(a, None, r, Fraction(0))
            if r == 0:
                return QMValuation(b, None, s, Fraction(0))
            return QMValuation(None, key, r, s)
        if s == 0:
            return QMValuation(self.ray(key).base, None, r, Fraction(0))
        return RayPoint(key, r, s)

    def locate(self, p: Point) -> tuple[Loc, tuple]:
        """Express a point as (location, homogeneous weights)."""
        if isinstance(p, RayPoint):
            try:
                self.ray(p.ray_id)
            except KeyError:
                raise OutsideDomainError(f"ray {p.ray_id} is not declared") from None
            return ("ray", p.ray_id), (p.a, p.b)
        if p.vertex is None:
            return ("edge", p.edge_index), (p.r, p.s)
        for loc in self.locs():
            a, b = self._loc_ends(loc)
            if a == p.vertex:
                w = (p.r, Fraction(0) * p.r)
            elif b == p.vertex:
                w = (Fraction(0) * p.r, p.r)
            else:
                continue
            try:
                self._sector_for(loc, _slope_of(*w))
                return loc, w
            except OutsideDomainError:
                continue
        raise OutsideDomainError(f"vertex {p.vertex} is not in the covered domain")

    def mass(self, p: Point) -> object:
        loc, (r, s) = self.locate(p)
        na, nb = self.norm_covector(loc)
        return na * r + nb * s


@dataclass(frozen=True)
class ApplyResult:
    image: Point
    rate: Fraction


def apply(nu: Point, fmap: SkeletonMap) -> ApplyResult:
    """Evaluate the map at a normalized point; the attraction rate is the
    maximal-ideal value of the (un-normalized) image."""
    m = fmap.mass(nu)
    if m != 1:
        nu = _scale_point(nu, 1 / m)
    loc, (r, s) = fmap.locate(nu)
    sec = fmap._sector_for(loc, _slope_of(r, s))
    r2, s2 = sec.image_weights(r, s)
    na, nb = fmap.norm_covector(sec.dst)
    rate = na * r2 + nb * s2
    image = fmap._place(sec.dst, r2 / rate, s2 / rate)
    return ApplyResult(image, rate)


def orbit(nu: Point, fmap: SkeletonMap, n: int) -> list[tuple[Point, Fraction]]:
    """Orbit with cumulative attraction rates [(nu, 1), (f nu, c_1), ...]."""
    out: list[tuple[Point, Fraction]] = [(nu, Fraction(1))]
    cur, total = nu, Fraction(1)
    for _ in range(n):
        res = apply(cur, fmap)
        total *= res.rate
        cur = res.image
        out.append((cur, total))
    return out


# -- helpers --------------------------------------------------------------------


def _slope_of(r, s) -> Slope:
    if r == 0:
        return None
    return Fraction(s, r) if isinstance(s, int) and isinstance(r, int) else s / r


def _slope_vector(sigma: Slope) -> tuple[Fraction, Fraction]:
    if sigma is None:
        return (Fraction(0), Fraction(1))
    return (Fraction(1), Fraction(sigma))


def _cone_generators(lo: Slope, hi: Slope):
    return (_slope_vector(lo), _slope_vector(hi))


def _points_equal(p1: Point, p2: Point) -> bool:
    if isinstance(p1, RayPoint) != isinstance(p2, RayPoint):
        return False
    if isinstance(p1, RayPoint):
        return p1.ray_id == p2.ray_id and p1.a * p2.b == p2.a * p1.b
    if p1.vertex is not None or p2.vertex is not None:
        return p1.vertex == p2.vertex
    return p1.edge_index == p2.edge_index and p1.r * p2.s == p2.r * p1.s


def _scale_point(p: Point, factor) -> Point:
    if isinstance(p, RayPoint):
        return RayPoint(p.ray_id, p.a * factor, p.b * factor)
    return QMValuation(p.vertex, p.edge_index, p.r * factor, p.s * factor)


# -- integral linear recursions ---------------------------------------------------


class InsufficientTermsError(ValueError):
    pass


@dataclass(frozen=True)
class Recursion:
    m: int
    a: int
    b: int
    n0: int


def detect_recursion(
    seq: list[Fraction], m_max: int = 6, n_max: int = 8
) -> Recursion | None:
    """Smallest (m, N0) with integers a, b such that
    seq[n + 2m] = a seq[n + m] + b seq[n] for all n >= N0; None if no pair
    within the bounds verifies on every available term."""
    if len(seq) < 2 * m_max + n_max + 2:
        raise InsufficientTermsError(
            f"need at least {2 * m_max + n_max + 2} terms, got {len(seq)}"
        )
    seq = [Fraction(x) for x in seq]
    for m in range(1, m_max + 1):
        for n0 in range(0, n_max + 1):
            cand = _solve_window(seq, m, n0)
            if cand is None:
                continue
            a, b = cand
            if _verify_recursion(seq, m, n0, a, b):
                return Recursion(m, a, b, n0)
    return None


def _solve_window(seq, m, n0):
    if n0 + 2 * m + 1 >= len(seq):
        return None
    x0, y0, z0 = seq[n0 + m], seq[n0], seq[n0 + 2 * m]
    x1, y1, z1 = seq[n0 + 1 + m], seq[n0 + 1], seq[n0 + 1 + 2 * m]
    det = x0 * y1 - x1 * y0
    if det != 0:
        a = (z0 * y1 - z1 * y0) / det
        b = (x0 * z1 - x1 * z0) / det
    else:
        # proportional rows: the geometric case, prefer b = 0
        if x0 == 0:
            return None
        a = z0 / x0
        b = Fraction(0)
    if a.denominator != 1 or b.denominator != 1:
        return None
    return int(a), int(b)


def _verify_recursion(seq, m, n0, a, b) -> bool:
    for n in range(n0, len(seq) - 2 * m):
        if seq[n + 2 * m] != a * seq[n + m] + b * seq[n]:
            return False
    return True


# -- quadratic integers ------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticInteger:
    """Root of a monic integer polynomial of degree <= 2, tagged as the larger
    real root; carries a float approximation for display."""

    minpoly: tuple[int, ...]  # (1, -n) or (1, c1, c0), leading first
    approx: float

    @staticmethod
    def integer(n: int) -> "QuadraticInteger":
        return QuadraticInteger((1, -n), float(n))

    @staticmethod
    def quadratic(trace: int, norm: int) -> "QuadraticInteger":
        """Larger root of x^2 - trace*x + norm; collapses to linear when the
        discriminant is a perfect square."""
        disc = trace * trace - 4 * norm
        if disc < 0:
            raise ValueError("complex roots are not attraction rates")
        r = isqrt_exact(disc)
        if r is not None:
            if (trace + r) % 2:
                raise ValueError("rational root of a monic polynomial must be integral")
            return QuadraticInteger.integer((trace + r) // 2)
        approx = (trace + math.sqrt(disc)) / 2
        return QuadraticInteger((1, -trace, norm), approx)

    @staticmethod
    def sqrt_of(n: int) -> "QuadraticInteger":
        r = isqrt_exact(n)
        if r is not None:
            return QuadraticInteger.integer(r)
        return QuadraticInteger((1, 0, -n), math.sqrt(n))

    def __post_init__(self) -> None:
        if self.approx < 1:
            raise ValueError("attraction rates are >= 1")

    def exact_root(self) -> QuadElem | Fraction:
        if len(self.minpoly) == 2:
            return Fraction(-self.minpoly[1])
        _, c1, c0 = self.minpoly
        disc = c1 * c1 - 4 * c0
        return quad_from_root(disc, Fraction(-c1, 2), Fraction(1, 2))


# -- fixed sets ---------------------------------------------------------------------


@dataclass(frozen=True)
class FixedSetReport:
    kind: str  # divisorial-point | irrational-point | end | segment | circle-rotation
    loc: Loc | None = None
    weights: tuple | None = None  # homogeneous, exact (Fraction or QuadElem)
    vertex: str | None = None
    ray_label: str | None = None
    sector: Sector | None = None
    parameter_minpoly: tuple[int, ...] | None = None
    rotation: str | None = None  # "rational" | "irrational"
    angle: Fraction | None = None
    angle_witness: dict | None = None
    period: int = 1
    segment: tuple | None = None
    diagnostics: dict = field(default_factory=dict)

    def point(self, fmap: SkeletonMap) -> Point | None:
        if self.vertex is not None:
            return QMValuation.at_vertex(
                self.vertex, Fraction(1, fmap.graph.prime(self.vertex).b)
            )
        if self.loc is not None and self.weights is not None:
            r, s = self.weights
            na, nb = fmap.norm_covector(self.loc)
            m = na * r + nb * s
            return fmap._place(self.loc, r / m, s / m)
        return None


def _sector_eigen_slopes(sec: Sector) -> list[Fraction | QuadElem]:
    """Slopes sigma >= 0 in the sector cone fixed by the matrix: roots of
    m01 s^2 + (m00 - m11) s - m10 = 0."""
    (m00, m01), (m10, m11) = sec.matrix
    out: list[Fraction | QuadElem] = []

    def in_cone(sigma) -> bool:
        if sigma < 0:
            return False
        if sec.lo is not None and sigma < sec.lo:
            return False
        return sec.hi is None or sigma <= sec.hi

    if m01 == 0:
        if m00 == m11:
            return []  # handled separately (identity-like)
        sigma = Fraction(m10, m00 - m11)
        return [sigma] if in_cone(sigma) else []
    disc = (m00 - m11) ** 2 + 4 * m01 * m10
    if disc < 0:
        return []
    r = isqrt_exact(disc)
    if r is not None:
        for sgn in (1, -1):
            sigma = Fraction(-(m00 - m11) + sgn * r, 2 * m01)
            if in_cone(sigma) and sigma not in out:
                out.append(sigma)
    else:
        for sgn in (1, -1):
            sigma = quad_from_root(
                disc, Fraction(-(m00 - m11), 2 * m01), Fraction(sgn, 2 * m01)
            )
            if in_cone(sigma):
                out.append(sigma)
    return out


def _is_identity_like(sec: Sector) -> bool:
    (m00, m01), (m10, m11) = sec.matrix
    return sec.src == sec.dst and m01 == 0 and m10 == 0 and m00 == m11


def _end_tail_sector(fmap: SkeletonMap, ray_id: str) -> Sector | None:
    ss = fmap.sectors_at(("ray", ray_id))
    tail = ss[-1]
    if tail.dst != ("ray", ray_id):
        return None
    if tail.matrix[0][1] != 0:
        return None  # end not fixed
    return tail


def _end_is_attracting(tail: Sector) -> bool:
    (m00, _), (m10, m11) = tail.matrix
    # tau' = (m10 + m11 tau) / m00: expanding toward the end
    return m11 > m00 or (m11 == m00 and m10 > 0)


def _graph_is_cycle(g: DualGraph) -> bool:
    return len(g.edges) == len(g.primes) >= 2 and all(
        g.degree(p.id) == 2 for p in g.primes
    )


def _subdivide_against(fmap: SkeletonMap, sec: Sector) -> list[Sector]:
    """Split a sector at the preimages of the breakpoints of the target
    location, so that each piece composes with a single follow-up sector."""
    (m00, m01), (m10, m11) = sec.matrix
    breaks: list[Fraction] = []
    for s2 in fmap.sectors_at(sec.dst):
        for beta in (s2.lo, s2.hi):
            if beta is None or beta == 0:
                continue
            den = m11 - beta * m01
            if den == 0:
                continue
            sigma = (beta * m00 - m10) / den
            lo_ok = sec.lo is None or sigma > sec.lo
            hi_ok = sec.hi is None or sigma < sec.hi
            if sigma >= 0 and lo_ok and hi_ok and sigma not in breaks:
                # only keep genuine preimages (image slope equals beta)
                r, s = _slope_vector(sigma)
                w = sec.image_weights(r, s)
                if w[0] != 0 and w[1] / w[0] == beta:
                    breaks.append(sigma)
    breaks.sort()
    bounds = [sec.lo, *breaks, sec.hi]
    return [
        Sector(sec.src, bounds[i], bounds[i + 1], sec.matrix, sec.dst)
        for i in range(len(bounds) - 1)
    ]


def compose_self(fmap: SkeletonMap) -> list[Sector]:
    """Sector data of the second iterate (not re-validated as a SkeletonMap)."""
    out: list[Sector] = []
    for sec in fmap.sectors:
        for piece in _subdivide_against(fmap, sec):
            gens = _cone_generators(piece.lo, piece.hi)
            mids = []
            for gen in gens:
                w = piece.image_weights(*gen)
                mids.append(w)
            probe = (mids[0][0] + mids[1][0], mids[0][1] + mids[1][1])
            follow = fmap._sector_for(piece.dst, _slope_of(*probe))
            (a00, a01), (a10, a11) = follow.matrix
            (b00, b01), (b10, b11) = piece.matrix
            mat = (
                (a00 * b00 + a01 * b10, a00 * b01 + a01 * b11),
                (a10 * b00 + a11 * b10, a10 * b01 + a11 * b11),
            )
            out.append(Sector(piece.src, piece.lo, piece.hi, mat, follow.dst))
    return out


def _loc_label(fmap: SkeletonMap, loc: Loc, weights) -> dict:
    kind, key = loc
    if kind == "edge":
        a, b, occ = fmap.graph.handle_of_index(key)
        return {"edge": f"({a},{b})#{occ}", "weights": [str(weights[0]), str(weights[1])]}
    return {"ray": key, "weights": [str(weights[0]), str(weights[1])]}


def find_fixed_set(fmap: SkeletonMap, budget: int = 256) -> FixedSetReport:
    """Classify the attractor: an exact per-sector eigen analysis plus vertex
    and ray-end checks, a rotation analysis on cycles, and an exact
    non-expansion certificate along vertex orbits."""
    report = _find_fixed_set_core(fmap)
    _certify(fmap, report, budget)
    return report


def _sector_det(sec: Sector) -> int:
    (m00, m01), (m10, m11) = sec.matrix
    return m00 * m11 - m01 * m10


def _vertex_direction_multipliers(fmap: SkeletonMap, prime_id: str):
    """Exact first-order expansion factors of the slope coordinate at a fixed
    vertex, one per incident handle."""
    out = []
    for loc in fmap.locs():
        a, b = fmap._loc_ends(loc)
        if prime_id not in (a, b):
            continue
        at_zero = a == prime_id
        sec = fmap._sector_for(loc, Fraction(0) if at_zero else None)
        (m00, m01), (m10, m11) = sec.matrix
        if at_zero:
            # image must sit at a boundary of the target handle
            if m10 == 0:
                out.append(Fraction(m11, m00))
            elif m00 == 0:
                out.append(Fraction(m01, m10))
            else:  # vertex not actually fixed along this handle
                return None
        else:
            if m01 == 0:
                out.append(Fraction(m00, m11))
            elif m11 == 0:
                out.append(Fraction(m10, m01))
            else:
                return None
    return out


def _find_fixed_set_core(fmap: SkeletonMap) -> FixedSetReport:
    g = fmap.graph

    # pointwise-fixed cones (lambda * identity)
    ident = [sec for sec in fmap.sectors if _is_identity_like(sec)]
    if ident:
        if (
            _graph_is_cycle(g)
            and not fmap.rays
            and len(ident) == len(fmap.sectors)
        ):
            # the whole cycle is fixed: a rotation by zero
            return FixedSetReport(
                kind="circle-rotation", rotation="rational",
                angle=Fraction(0), period=1,
            )
        sec = ident[0]
        return FixedSetReport(
            kind="segment", loc=sec.src, sector=sec,
            segment=(sec.lo, sec.hi), period=1,
        )

    fixed: list[FixedSetReport] = []
    for sec in fmap.sectors:
        if sec.src != sec.dst:
            continue
        for sigma in _sector_eigen_slopes(sec):
            (m00, m01), _ = sec.matrix
            lam = m00 + m01 * sigma
            # transversal attraction: the fixed ray carries the spectrally
            # dominant eigenvalue (|other| = |det|/lam < lam)
            if lam * lam <= abs(_sector_det(sec)):
                continue
            if isinstance(sigma, Fraction):
                r = Fraction(sigma.denominator)
                s = Fraction(sigma.numerator)
                pt = fmap._place(sec.src, r, s)
                if isinstance(pt, QMValuation) and pt.vertex is not None:
                    fixed.append(FixedSetReport(kind="divisorial-point",
                                                vertex=pt.vertex, sector=sec))
                else:
                    fixed.append(FixedSetReport(kind="divisorial-point", loc=sec.src,
                                                weights=(r, s), sector=sec))
            else:
                one = QuadElem(sigma.d, Fraction(1), Fraction(0))
                fixed.append(
                    FixedSetReport(
                        kind="irrational-point", loc=sec.src,
                        weights=(one, sigma), sector=sec,
                        parameter_minpoly=_fixed_point_parameter_minpoly(
                            fmap, sec, sigma
                        ),
                    )
                )

    # fixed non-repelling vertices
    for p in g.primes:
        nu = QMValuation.at_vertex(p.id, Fraction(1, p.b))
        try:
            res = apply(nu, fmap)
        except OutsideDomainError:
            continue
        if _points_equal(res.image, nu):
            if any(f.vertex == p.id for f in fixed):
                continue
            mults = _vertex_direction_multipliers(fmap, p.id)
            if mults is not None and all(c <= 1 for c in mults):
                fixed.append(FixedSetReport(kind="divisorial-point", vertex=p.id))

    # attracting ends
    for ray in fmap.rays:
        tail = _end_tail_sector(fmap, ray.id)
        if tail is not None and _end_is_attracting(tail):
            fixed.append(
                FixedSetReport(kind="end", loc=("ray", ray.id),
                               ray_label=ray.label, sector=tail)
            )

    uniq: list[FixedSetReport] = []
    for f in fixed:
        if not any(_reports_same_point(fmap, f, u) for u in uniq):
            uniq.append(f)

    if len(uniq) == 1:
        return uniq[0]
    if len(uniq) > 1:
        raise InconclusiveError(
            "multiple isolated fixed points",
            {"count": len(uniq), "kinds": [f.kind for f in uniq]},
        )

    # no fixed point for f itself: rotation or a period-2 segment
    if _graph_is_cycle(g) and not fmap.rays:
        return _classify_rotation(fmap)

    for sec2 in compose_self(fmap):
        if _is_identity_like(sec2):
            return FixedSetReport(
                kind="segment", loc=sec2.src, sector=sec2,
                segment=(sec2.lo, sec2.hi), period=2,
            )
    raise InconclusiveError("no fixed point or rotation found", {})


def _reports_same_point(fmap: SkeletonMap, f1: FixedSetReport, f2: FixedSetReport) -> bool:
    p1, p2 = f1.point(fmap), f2.point(fmap)
    if p1 is None or p2 is None:
        return f1 == f2
    return _points_equal(p1, p2)


def _fixed_point_parameter_minpoly(
    fmap: SkeletonMap, sec: Sector, sigma: QuadElem
) -> tuple[int, ...]:
    """Minimal polynomial of the skewness of the fixed point (its intrinsic
    position parameter along the invariant edge)."""
    from .valuation import skewness

    one = QuadElem(sigma.d, Fraction(1), Fraction(0))
    kind, key = sec.src
    if kind != "edge":
        raise InconclusiveError("irrational fixed point on a ray", {})
    na, nb = fmap.norm_covector(sec.src)
    mass = na * one + nb * sigma
    nu = QMValuation(None, key, one / mass, sigma / mass)
    alpha = skewness(nu, fmap.graph)
    if isinstance(alpha, QuadElem):
        return alpha.minimal_polynomial()
    return (alpha.denominator, -alpha.numerator)


def _cycle_positions(fmap: SkeletonMap) -> tuple[list[str], list[int], Fraction]:
    """Vertices in cyclic order, the edge indices joining them, total length."""
    g = fmap.graph
    start = g.primes[0].id
    order = [start]
    used: set[int] = set()
    edge_seq: list[int] = []
    cur = start
    while True:
        nxt = None
        for i, (a, b) in enumerate(g.edges):
            if i in used or cur not in (a, b):
                continue
            nxt = b if cur == a else a
            used.add(i)
            edge_seq.append(i)
            break
        if nxt is None:
            raise InconclusiveError("cycle traversal failed", {})
        if nxt == start and len(edge_seq) == len(g.edges):
            break
        order.append(nxt)
        cur = nxt
    total = Fraction(0)
    for i in edge_seq:
        a, b = g.edges[i]
        total += Fraction(1, g.prime(a).b * g.prime(b).b)
    return order, edge_seq, total


def _cycle_position_of(fmap: SkeletonMap, p: Point, order, edge_seq) -> Fraction:
    g = fmap.graph
    pos = Fraction(0)
    for vid, eidx in zip(order, edge_seq):
        a, b = g.edges[eidx]
        ln = Fraction(1, g.prime(a).b * g.prime(b).b)
        if isinstance(p, QMValuation) and p.vertex == vid:
            return pos
        if isinstance(p, QMValuation) and p.edge_index == eidx:
            t = p.s * g.prime(b).b / (p.r * g.prime(a).b + p.s * g.prime(b).b)
            forward = vid == a
            return pos + (t if forward else 1 - t) * ln
        pos += ln
    if isinstance(p, QMValuation) and p.vertex == order[0]:
        return Fraction(0)
    raise InconclusiveError("point not on the cycle", {})


def _classify_rotation(fmap: SkeletonMap) -> FixedSetReport:
    order, edge_seq, total = _cycle_positions(fmap)
    nu0 = QMValuation.at_vertex(
        order[0], Fraction(1, fmap.graph.prime(order[0]).b)
    )
    # exact orbit-return search
    cur = nu0
    displacement = Fraction(0)
    max_period = 256
    for k in range(1, max_period + 1):
        prev_pos = _cycle_position_of(fmap, cur, order, edge_seq)
        cur = apply(cur, fmap).image
        new_pos = _cycle_position_of(fmap, cur, order, edge_seq)
        step = (new_pos - prev_pos) % total
        displacement += step
        if _points_equal(cur, nu0):
            wind = displacement / total
            if wind.denominator != 1:
                raise InconclusiveError(
                    "non-integral winding on orbit return", {"winding": str(wind)}
                )
            angle = Fraction(int(wind) % k, k)
            return FixedSetReport(
                kind="circle-rotation", rotation="rational", angle=angle, period=k
            )
    if fmap.cusp_provenance is not None:
        from .cusp import rotation_number

        cd, alpha = fmap.cusp_provenance
        rot = rotation_number(alpha, cd)
        if rot.rational is not None:
            q = rot.rational.denominator
            return FixedSetReport(
                kind="circle-rotation", rotation="rational",
                angle=Fraction(rot.rational.numerator % q, q), period=q,
            )
        return FixedSetReport(
            kind="circle-rotation", rotation="irrational",
            angle_witness={"alpha": str(alpha), "beta_float": rot.beta_float},
        )
    raise InconclusiveError(
        "rotation without exact return and without cusp provenance",
        {"iterations": max_period},
    )


def _certify(fmap: SkeletonMap, report: FixedSetReport, budget: int) -> None:
    """Exact non-expansion certificate: from every vertex, exp(rho) to the
    fixed point never increases along the orbit and ends within 2^-20 of 1."""
    if report.kind in ("circle-rotation", "segment", "end"):
        return
    target = report.point(fmap)
    if not isinstance(target, QMValuation):
        return
    tol = 1 + Fraction(1, 2**20)
    for p in fmap.graph.primes:
        nu: Point = QMValuation.at_vertex(p.id, Fraction(1, p.b))
        prev = None
        ok = False
        for _ in range(budget):
            if isinstance(nu, RayPoint):
                break  # orbit left the graph skeleton; certificate not applicable
            if _points_equal(nu, target):
                ok = True
                break
            d = angular_exp(nu, target, fmap.graph)
            if prev is not None and d > prev:
                raise InconclusiveError(
                    "orbit distance to the fixed point increased",
                    {"vertex": p.id},
                )
            prev = d
            if d < tol:
                ok = True
                break
            nu = apply(nu, fmap).image
        if not ok and prev is not None and prev >= tol:
            raise InconclusiveError(
                "orbit did not certify convergence within budget",
                {"vertex": p.id, "final": float(prev)},
            )


def angular_exp(nu: QMValuation, mu: QMValuation, g: DualGraph):
    """exp(rho) as an exact quantity (rational, or quadratic when one point
    has quadratic weights)."""
    from .valuation import b_intersection, skewness

    if _points_equal(nu, mu):
        return Fraction(1)
    cross = b_intersection(nu, mu, g)
    return skewness(nu, g) * skewness(mu, g) / (cross * cross)


def dynamical_degree(fmap: SkeletonMap, report: FixedSetReport | None = None) -> QuadraticInteger:
    """First dynamical degree as a quadratic integer."""
    if report is None:
        report = find_fixed_set(fmap)
    if report.kind == "divisorial-point":
        pt = report.point(fmap)
        rate = apply(pt, fmap).rate
        if rate.denominator != 1:
            raise SkeletonMapError("bad_rate", f"non-integral rate {rate} at fixed point")
        return QuadraticInteger.integer(int(rate))
    if report.kind == "irrational-point":
        (m00, m01), (m10, m11) = report.sector.matrix
        return QuadraticInteger.quadratic(m00 + m11, m00 * m11 - m01 * m10)
    if report.kind == "end":
        rate = report.sector.matrix[0][0]
        return QuadraticInteger.integer(rate)
    if report.kind == "segment":
        lam = report.sector.matrix[0][0]
        if report.period == 1:
            return QuadraticInteger.integer(lam)
        return QuadraticInteger.sqrt_of(lam)
    if report.kind == "circle-rotation":
        dets = {
            s.matrix[0][0] * s.matrix[1][1] - s.matrix[0][1] * s.matrix[1][0]
            for s in fmap.sectors
        }
        if len(dets) != 1:
            raise SkeletonMapError(
                "inconsistent_determinants",
                f"rotation sectors carry distinct determinants {sorted(dets)}",
            )
        det = dets.pop()
        if det <= 0:
            raise SkeletonMapError("inconsistent_determinants", "rotation needs det > 0")
        return QuadraticInteger.sqrt_of(det)
    raise InconclusiveError(f"no dynamical degree for kind {report.kind}", {})


@dataclass(frozen=True)
class NonExpansionReport:
    results: tuple[tuple[Fraction, Fraction], ...]  # (before, after) as exp(rho)
    all_nonexpanding: bool
    all_strict: bool
    all_equal: bool


def check_nonexpansion(
    fmap: SkeletonMap, samples: list[tuple[QMValuation, QMValuation]]
) -> NonExpansionReport:
    """Exact exp(rho) comparison before/after one application, per sample pair."""
    rows = []
    nonexp = strict = equal = True
    for nu, mu in samples:
        before = angular_exp(nu, mu, fmap.graph)
        inu = apply(nu, fmap).image
        imu = apply(mu, fmap).image
        if isinstance(inu, RayPoint) or isinstance(imu, RayPoint):
            raise SkeletonMapError(
                "off_graph_image", "sample image left the graph skeleton"
            )
        after = angular_exp(inu, imu, fmap.graph)
        rows.append((before, after))
        if after > before:
            nonexp = False
        if after >= before:
            strict = False
        if after != before:
            equal = False
    return NonExpansionReport(tuple(rows), nonexp, strict, equal)


def stability_report(fmap: SkeletonMap, report: FixedSetReport | None = None) -> dict:
    """Describe how to reach a geometrically stable model, per attractor kind."""
    if report is None:
        report = find_fixed_set(fmap)
    if report.kind == "circle-rotation":
        if report.rotation == "irrational":
            return {
                "kind": "circle-rotation",
                "rotation": "irrational",
                "verdict": "no geometrically stable model exists",
            }
        return {
            "kind": "circle-rotation",
            "rotation": "rational",
            "angle": str(report.angle),
            "instruction": f"the cycle model is stable for the {report.period}-th iterate",
        }
    if report.kind == "end":
        return {
            "kind": "end",
            "ray": report.loc[1],
            "witness": report.ray_label,
            "instruction": "blow up toward the end until a free fixed point is realized",
        }
    if report.kind == "segment":
        lo, hi = report.segment
        return {
            "kind": "segment",
            "period": report.period,
            "interval": [str(lo), "inf" if hi is None else str(hi)],
            "instruction": "realize endpoints, contract interior chain",
            "cyclic_quotient": True,
        }
    if report.vertex is not None:
        return {
            "kind": report.kind,
            "vertex": report.vertex,
            "interval": [f"vertex:{report.vertex}", f"vertex:{report.vertex}"],
            "instruction": f"realize {report.vertex}; the model acts regularly there",
            "cyclic_quotient": False,
        }
    lo, hi = _invariant_interval(fmap, report)
    return {
        "kind": report.kind,
        **_loc_label(fmap, report.loc, report.weights),
        "interval": [str(lo), str(hi)],
        "instruction": "realize endpoints, contract interior chain",
        "cyclic_quotient": True,
    }


def _invariant_interval(fmap: SkeletonMap, report: FixedSetReport):
    """Rational slopes t0 < sigma < t1 inside the fixed sector with
    h([t0, t1]) inside [t0, t1], h the Moebius action on slopes."""
    sec = report.sector
    (m00, m01), (m10, m11) = sec.matrix
    r, s = report.weights
    sigma = s / r

    def h(t: Fraction) -> Fraction:
        return (m10 + m11 * t) / (m00 + m01 * t)

    def inside_sector(t: Fraction) -> bool:
        if sec.lo is not None and t < sec.lo:
            return False
        return sec.hi is None or t <= sec.hi

    q = 2
    while q <= 1 << 20:
        for d in (0, -1):
            lo = Fraction(math.floor(float(sigma) * q) + d, q)
            hi = lo + Fraction(2, q)
            if not (lo < sigma < hi):
                continue
            if lo < 0 or not inside_sector(lo) or not inside_sector(hi):
                continue
            hlo, hhi = h(lo), h(hi)
            if lo <= hlo <= hi and lo <= hhi <= hi:
                return lo, hi
        q *= 2
    raise InconclusiveError("no invariant rational interval found", {})
