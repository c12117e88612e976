import random
from fractions import Fraction
from pathlib import Path

import pytest

from valdyn.cusp import CuspData, cusp_dual_graph
from valdyn.fixtures import load_fixture
from valdyn.resolution import DualGraph, Prime
from valdyn.transport import GermResolutionTable, PrimeMap

FIXDIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixdir() -> Path:
    return FIXDIR


@pytest.fixture(scope="session")
def cusp322() -> DualGraph:
    return load_fixture(FIXDIR / "ex_cycle_nonfinite.toml").graph()


@pytest.fixture(scope="session")
def fx_smooth_finite():
    return load_fixture(FIXDIR / "ex_smooth_finite.toml")


@pytest.fixture(scope="session")
def fx_smooth_nonfinite():
    return load_fixture(FIXDIR / "ex_smooth_nonfinite.toml")


@pytest.fixture(scope="session")
def fx_quotient():
    return load_fixture(FIXDIR / "ex_quotient.toml")


@pytest.fixture(scope="session")
def fx_cycle_nonfinite():
    return load_fixture(FIXDIR / "ex_cycle_nonfinite.toml")


@pytest.fixture(scope="session")
def fx_cusp42():
    return load_fixture(FIXDIR / "cusp_42.toml")


# -- random dual graphs ---------------------------------------------------------


def random_connected_graph(rng: random.Random, max_primes: int = 8) -> DualGraph:
    """Random connected multigraph made negative definite by diagonal
    dominance; b = 1 keeps the maximal-ideal cycle nef."""
    n = rng.randint(1, max_primes)
    ids = [f"P{i}" for i in range(n)]
    edges: list[tuple[str, str]] = []
    for i in range(1, n):
        j = rng.randrange(i)
        edges.append((ids[j], ids[i]))
    for _ in range(rng.randint(0, n)):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j:
            edges.append((ids[min(i, j)], ids[max(i, j)]))
    deg = {v: 0 for v in ids}
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    extra = [rng.randint(0, 3) for _ in range(n)]
    if not any(extra):
        extra[rng.randrange(n)] = 1
    primes = tuple(
        Prime(v, 0, -(deg[v] + extra[i]) if deg[v] + extra[i] > 0 else -1, 1)
        for i, v in enumerate(ids)
    )
    return DualGraph(primes, tuple(edges))


# -- toric chains over a smooth point --------------------------------------------


def _slope_key(v):
    a, b = v
    return Fraction(b, a) if a else Fraction(10**9)


def random_smooth_fan(rng: random.Random, inserts: int = 4) -> list[tuple[int, int]]:
    """Interior rays of a smooth subdivision of the quadrant containing (1,1),
    grown by inserting sums of adjacent rays."""
    rays = [(1, 0), (1, 1), (0, 1)]
    for _ in range(inserts):
        i = rng.randrange(len(rays) - 1)
        u, w = rays[i], rays[i + 1]
        rays.insert(i + 1, (u[0] + w[0], u[1] + w[1]))
    return rays[1:-1]


def fan_to_chain_graph(interior: list[tuple[int, int]]) -> DualGraph:
    """Chain dual graph of the toric resolution with the given interior rays.

    Self-intersections come from u + w = c v over consecutive triples; the
    generic multiplicity of a ray (p, q) for the maximal ideal is min(p, q).
    """
    rays = [(1, 0), *sorted(interior, key=_slope_key), (0, 1)]
    for u, w in zip(rays, rays[1:]):
        assert u[0] * w[1] - u[1] * w[0] == 1, "fan must be smooth"
    primes = []
    for i in range(1, len(rays) - 1):
        u, v, w = rays[i - 1], rays[i], rays[i + 1]
        s = u[0] + w[0]
        c = s // v[0] if v[0] else (u[1] + w[1]) // v[1]
        assert c * v[0] == u[0] + w[0] and c * v[1] == u[1] + w[1]
        primes.append(Prime(f"R{v[0]}_{v[1]}", 0, -c, min(v)))
    edges = tuple(
        (primes[i].id, primes[i + 1].id) for i in range(len(primes) - 1)
    )
    return DualGraph(tuple(primes), edges)


def _ray_id(v) -> str:
    return f"R{v[0]}_{v[1]}"


def table_multiplication(g: DualGraph, c: int) -> GermResolutionTable:
    """Every prime fixed with pull-back multiplicity and restriction degree c
    (the germ scaling all monomial weights by c)."""
    return GermResolutionTable(
        g, g, tuple(PrimeMap(p.id, p.id, c, c) for p in g.primes)
    )


def symmetric_fan(rng: random.Random, inserts: int = 3) -> list[tuple[int, int]]:
    rays = [(1, 0), (1, 1)]
    for _ in range(inserts):
        i = rng.randrange(len(rays) - 1)
        u, w = rays[i], rays[i + 1]
        rays.insert(i + 1, (u[0] + w[0], u[1] + w[1]))
    below = rays[1:]  # includes the diagonal
    mirrored = [(b, a) for a, b in below if (a, b) != (1, 1)]
    return below + mirrored


def table_swap(fan: list[tuple[int, int]], c: int) -> GermResolutionTable:
    """Coordinate swap composed with scaling by c on a mirror-symmetric fan."""
    g = fan_to_chain_graph(fan)
    maps = tuple(
        PrimeMap(_ray_id(v), _ray_id((v[1], v[0])), c, c)
        for v in sorted(fan, key=_slope_key)
    )
    return GermResolutionTable(g, g, maps)


def table_diag12(n: int, c: int, mirrored: bool = False) -> GermResolutionTable:
    """Monomial germ (x, y) -> (x^c, y^(2c)) between the compatible chain
    models: source rays (2, 2j+1), (1, j+1); target rays (1, j)."""

    def m(v):
        return (v[1], v[0]) if mirrored else v

    src_rays = []
    for j in range(n):
        src_rays.append(m((2, 2 * j + 1)))
        src_rays.append(m((1, j + 1)))
    tgt_rays = [m((1, j)) for j in range(1, 2 * n + 1)]
    gs = fan_to_chain_graph(src_rays)
    gt = fan_to_chain_graph(tgt_rays)
    maps = []
    for j in range(n):
        maps.append(
            PrimeMap(_ray_id(m((2, 2 * j + 1))), _ray_id(m((1, 2 * j + 1))), 2 * c, c)
        )
        maps.append(
            PrimeMap(_ray_id(m((1, j + 1))), _ray_id(m((1, 2 * j + 2))), c, 2 * c)
        )
    return GermResolutionTable(gs, gt, tuple(maps))


def table_cusp_rotation(rng: random.Random) -> GermResolutionTable:
    """Deck rotation of a cusp cycle composed with scaling by c."""
    while True:
        r = rng.randint(1, 3)
        cycle = tuple(rng.randint(2, 5) for _ in range(r))
        if any(k > 2 for k in cycle):
            break
    s = rng.randint(1, 2)
    if r * s < 2:
        s = 2
    cd = CuspData(cycle, s)
    g = cusp_dual_graph(cd)
    n = r * s
    j = rng.randint(0, s)  # rotate by j copies of the period
    c = rng.randint(1, 3)
    if j == 0 and c == 1:
        c = 2
    maps = tuple(
        PrimeMap(f"E{i}", f"E{(i + j * r) % n}", c, c) for i in range(n)
    )
    return GermResolutionTable(g, g, maps)


def random_finite_table(rng: random.Random) -> GermResolutionTable:
    kind = rng.randrange(5)
    if kind == 0:
        g = random_connected_graph(rng, 6)
        return table_multiplication(g, rng.randint(2, 4))
    if kind == 1:
        return table_swap(symmetric_fan(rng, rng.randint(1, 4)), rng.randint(1, 3))
    if kind == 2:
        return table_diag12(rng.randint(1, 4), rng.randint(1, 2), mirrored=False)
    if kind == 3:
        return table_diag12(rng.randint(1, 4), rng.randint(1, 2), mirrored=True)
    return table_cusp_rotation(rng)


def realize_edge_points(g: DualGraph, edge_index: int, weights: list[tuple[int, int]]):
    """Blow up until each rational point (r, s) of the chosen edge is a
    vertex; returns the refined graph and the ids of the realized primes."""
    from valdyn.resolution import blowup_satellite
    from valdyn.valuation import QMValuation

    points = [QMValuation.on_edge(g, edge_index, r, s) for r, s in weights]
    realized: dict[int, str] = {}
    cur = g
    while len(realized) < len(points):
        target = next(
            (i for i, p in enumerate(points) if i not in realized and not p.is_vertex()),
            None,
        )
        if target is None:
            for i, p in enumerate(points):
                realized.setdefault(i, p.vertex)
            break
        idx = points[target].edge_index
        a, b = cur.edges[idx]
        new = blowup_satellite(cur, idx)
        new_id = new.primes[-1].id
        e_ag = new.edge_handle(a, new_id)
        e_gb = new.edge_handle(new_id, b)

        def move(p):
            if p.is_vertex():
                return p
            if p.edge_index != idx:
                # the removed edge shifts later indices down by one
                shift = p.edge_index - 1 if p.edge_index > idx else p.edge_index
                return QMValuation.on_edge(new, shift, p.r, p.s)
            r, s = p.r, p.s
            if r > s:
                return QMValuation.on_edge(new, e_ag, r - s, s)
            if s > r:
                return QMValuation.on_edge(new, e_gb, r, s - r)
            return QMValuation.at_vertex(new_id, r)

        points = [move(p) for p in points]
        cur = new
        for i, p in enumerate(points):
            if i not in realized and p.is_vertex():
                realized[i] = p.vertex
    return cur, [realized[i] for i in range(len(points))]
