"""Fixture loading (TOML) and canonical JSON emission.

File formats:

graph:      [[prime]] id, genus, self_int, b; [[edge]] ends = [a, b]
germ:       finite = bool; [[ray]] from, label, affine?, rate?;
            [[sector]] src, cone = [lo, hi], matrix = [[..],[..]], dst;
            [[r_f]] prime, coeff
transport:  source, target (graph file paths); [[prime_map]] src, dst, k, e;
            [[contracted]] curve, m, dst, k, attach = {id = count};
            [[r_f]] prime, coeff
fixture:    graph = path; germ = path?; transport = path?;
            [cusp] cycle, s, alpha?; [options] ...

Location literals: ``edge:(E1,E2)#0`` (ends in stored order) or
``ray:E2->y``; valuations: ``vertex:E1`` or ``edge:(E1,E2)#0 r=1/3 s=2/3``.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .arith import QuadElem, parse_quad
from .cusp import CuspData, cusp_dual_graph, induced_skeleton_map
from .dynamics import Loc, Ray, Sector, SkeletonMap
from .resolution import DualGraph, Prime
from .transport import (
    ContractedCurve,
    GermResolutionTable,
    PrimeMap,
    RfFunctional,
)
from .valuation import QMValuation, parse_valuation


class FixtureError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _read_toml(path: Path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_graph(path: Path) -> DualGraph:
    data = _read_toml(path)
    primes = tuple(
        Prime(
            p["id"],
            int(p.get("genus", 0)),
            int(p["self_int"]),
            int(p.get("b", 1)),
        )
        for p in data.get("prime", [])
    )
    edges = tuple((e["ends"][0], e["ends"][1]) for e in data.get("edge", []))
    return DualGraph(primes, edges)


_EDGE_LOC_RE = re.compile(r"^edge:\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)#(\d+)$")
_RAY_LOC_RE = re.compile(r"^ray:([^\s-]+)->(\S+)$")


def parse_loc(text: str, g: DualGraph, rays: tuple[Ray, ...]) -> Loc:
    text = text.strip()
    m = _EDGE_LOC_RE.match(text)
    if m:
        a, b, occ = m.group(1), m.group(2), int(m.group(3))
        idx = g.edge_handle(a, b, occ)
        if g.edges[idx] != (a, b):
            raise FixtureError(
                "bad_orientation",
                f"{text}: write edge ends in the stored order {g.edges[idx]}",
            )
        return ("edge", idx)
    m = _RAY_LOC_RE.match(text)
    if m:
        rid = f"{m.group(1)}->{m.group(2)}"
        if not any(r.id == rid for r in rays):
            raise FixtureError("unknown_ray", f"ray {rid} is not declared")
        return ("ray", rid)
    raise FixtureError("bad_location", f"cannot parse location {text!r}")


def _parse_slope(text: str) -> Fraction | None:
    return None if text.strip() in ("inf", "oo") else Fraction(text)


def load_germ(path: Path, g: DualGraph) -> tuple[SkeletonMap, RfFunctional | None]:
    data = _read_toml(path)
    rays = tuple(Ray(r["from"], r["label"]) for r in data.get("ray", []))
    sectors = []
    for s in data.get("sector", []):
        lo, hi = (_parse_slope(str(x)) for x in s["cone"])
        mat = tuple(tuple(int(x) for x in row) for row in s["matrix"])
        sectors.append(
            Sector(parse_loc(s["src"], g, rays), lo, hi, mat, parse_loc(s["dst"], g, rays))
        )
    # affine tail sugar on rays: tau -> A tau + B at constant rate c0
    for r in data.get("ray", []):
        if "affine" not in r:
            continue
        rid = f"{r['from']}->{r['label']}"
        a_coef, b_coef = (Fraction(str(x)) for x in r["affine"])
        c0 = int(r["rate"])
        m11, m10 = c0 * a_coef, c0 * b_coef
        if m11.denominator != 1 or m10.denominator != 1:
            raise FixtureError("bad_affine", f"{rid}: c0*affine must be integral")
        tail_lo = Fraction(0)
        for s in sectors:
            if s.src == ("ray", rid) and s.hi is not None and s.hi > tail_lo:
                tail_lo = s.hi
        sectors.append(
            Sector(
                ("ray", rid), tail_lo, None,
                ((c0, 0), (int(m10), int(m11))), ("ray", rid),
            )
        )
    fmap = SkeletonMap(g, tuple(sectors), rays, finite=data.get("finite"))
    r_f = _load_rf(data)
    return fmap, r_f


def _load_rf(data: dict) -> RfFunctional | None:
    rows = data.get("r_f", [])
    if not rows:
        return None
    return RfFunctional(tuple((row["prime"], Fraction(str(row["coeff"]))) for row in rows))


def load_transport(path: Path) -> GermResolutionTable:
    data = _read_toml(path)
    base = path.parent
    source = load_graph(base / data["source"])
    target = load_graph(base / data["target"])
    prime_maps = tuple(
        PrimeMap(pm["src"], pm["dst"], int(pm["k"]), int(pm["e"]))
        for pm in data.get("prime_map", [])
    )
    contracted = tuple(
        ContractedCurve(
            c["curve"],
            int(c["m"]),
            c["dst"],
            int(c["k"]),
            tuple((pid, int(cnt)) for pid, cnt in c["attach"].items()),
        )
        for c in data.get("contracted", [])
    )
    return GermResolutionTable(source, target, prime_maps, contracted, _load_rf(data))


@dataclass
class Fixture:
    path: Path
    graph_path: Path | None = None
    germ_path: Path | None = None
    transport_path: Path | None = None
    cusp: CuspData | None = None
    alpha: QuadElem | None = None
    options: dict = field(default_factory=dict)

    _graph: DualGraph | None = None
    _germ: SkeletonMap | None = None
    _r_f: RfFunctional | None = None

    def graph(self) -> DualGraph:
        if self._graph is None:
            if self.graph_path is not None:
                self._graph = load_graph(self.graph_path)
            elif self.cusp is not None:
                self._graph = cusp_dual_graph(self.cusp)
            else:
                raise FixtureError("no_graph", "fixture declares no graph")
        return self._graph

    def germ(self) -> SkeletonMap:
        if self._germ is None:
            if self.germ_path is not None:
                self._germ, self._r_f = load_germ(self.germ_path, self.graph())
            elif self.cusp is not None and self.alpha is not None:
                self._germ = induced_skeleton_map(self.alpha, self.cusp)
                self._graph = self._germ.graph
            else:
                raise FixtureError("no_germ", "fixture declares no germ source")
        return self._germ

    def r_f(self) -> RfFunctional | None:
        if self._germ is None and self.germ_path is not None:
            self.germ()
        return self._r_f

    def transport(self) -> GermResolutionTable:
        if self.transport_path is None:
            raise FixtureError("no_transport", "fixture declares no transport table")
        return load_transport(self.transport_path)

    def valuation(self, literal: str) -> QMValuation:
        return parse_valuation(literal, self.graph())


def load_fixture(path: str | Path) -> Fixture:
    path = Path(path)
    data = _read_toml(path)
    base = path.parent
    fx = Fixture(path)
    if "graph" in data:
        fx.graph_path = base / data["graph"]
    if "germ" in data:
        fx.germ_path = base / data["germ"]
    if "transport" in data:
        fx.transport_path = base / data["transport"]
    if "cusp" in data:
        c = data["cusp"]
        fx.cusp = CuspData(tuple(int(k) for k in c["cycle"]), int(c.get("s", 1)))
        if "alpha" in c:
            fx.alpha = parse_quad(c["alpha"], d=fx.cusp.d)
    if fx.germ_path is not None and fx.alpha is not None:
        raise FixtureError(
            "ambiguous_germ", "explicit sectors and a cusp-induced germ both given"
        )
    fx.options = data.get("options", {})
    return fx


# -- canonical JSON -------------------------------------------------------------


def _write_json(obj, out: list[str]) -> None:
    if isinstance(obj, Fraction):
        text = (
            str(obj.numerator)
            if obj.denominator == 1
            else f"{obj.numerator}/{obj.denominator}"
        )
        out.append(json.dumps(text))
    elif isinstance(obj, QuadElem):
        out.append(json.dumps(str(obj)))
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, float):
        out.append(format(obj, ".12g"))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif obj is None:
        out.append("null")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _write_json(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, x in enumerate(obj):
            if i:
                out.append(",")
            _write_json(x, out)
        out.append("]")
    else:
        out.append(json.dumps(str(obj)))


def emit_json(obj) -> str:
    """Deterministic rendering: sorted keys, rationals as "p/q" strings,
    floats at 12 significant digits; byte-identical for identical inputs."""
    out: list[str] = []
    _write_json(obj, out)
    return "".join(out)


# -- sampling helpers (property harnesses) ----------------------------------------


def sample_edge_points(
    g: DualGraph, rng: random.Random, max_num: int = 12
) -> QMValuation:
    idx = rng.randrange(len(g.edges))
    r = Fraction(rng.randint(1, max_num), rng.randint(1, max_num))
    s = Fraction(rng.randint(1, max_num), rng.randint(1, max_num))
    return QMValuation.on_edge(g, idx, r, s).normalized(g)


def sample_edge_pairs(
    g: DualGraph, n: int, seed: int, max_num: int = 12
) -> list[tuple[QMValuation, QMValuation]]:
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        nu = sample_edge_points(g, rng, max_num)
        mu = sample_edge_points(g, rng, max_num)
        if nu != mu:
            out.append((nu, mu))
    return out
