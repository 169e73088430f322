"""Gadget reduction from 3-colouring 4-regular graphs.

Each vertex of the 4-regular input H0 becomes a copy of the vertex gadget
and each edge a copy of the edge gadget (terminals glued).  A colouring
selects, per vertex gadget, which dashed edge to drop (colour 1 keeps both);
all dashed edges of edge gadgets are dropped.  The resulting certificate G
has maximum degree 3, and the fixed relation psi0 recovers H from G exactly
when the colouring is proper.

psi0 is evaluated procedurally by :class:`Psi0Evaluator`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from itertools import product

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from .errors import BudgetExceededError, ContractError, InconsistencyError
from .structure import LabeledStructure, parse_structure

D_MARKER = 9
NBHD_RADIUS = 5
COLOURS = (1, 2, 3)
DEFAULT_BUDGET = 3**10


_CLASS_LABELS = ("terminal", "marker")


def _load(name: str) -> LabeledStructure:
    return parse_structure(resources.files("neartwin.data").joinpath(name).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class GadgetTemplate:
    graph: LabeledStructure
    roles: dict  # role name -> local id
    dashed: tuple  # dashed pairs, sorted

    @classmethod
    def load(cls, name: str) -> GadgetTemplate:
        g = _load(name)
        roles = {k: min(vs) for k, vs in g.labels.items() if k not in _CLASS_LABELS}
        return cls(g.plain(), roles, tuple(sorted(g.relations["dashed"])))


VERTEX_GADGET = GadgetTemplate.load("vertex_gadget.g")
EDGE_GADGET = GadgetTemplate.load("edge_gadget.g")
VERTEX_TERMINALS = ("v1", "v2", "v3", "v4")


def reduced_vertex_gadget(colour: int) -> LabeledStructure:
    """T^1 keeps both dashed edges; T^2 and T^3 drop the first/second."""
    if colour not in COLOURS:
        raise ContractError(f"colour must be one of {COLOURS}")
    g = VERTEX_GADGET.graph
    if colour == 1:
        return g
    return g.with_edges(g.edges - {VERTEX_GADGET.dashed[colour - 2]})


@dataclass(frozen=True)
class GadgetInstance:
    h0: LabeledStructure
    H: LabeledStructure
    vertex_gadgets: dict  # H0 vertex -> {role: id}
    edge_gadgets: dict  # H0 edge (u, v), u < v -> {role: id}
    d_marker: int = D_MARKER
    nbhd_radius: int = NBHD_RADIUS
    vertex_gadget_size: int = VERTEX_GADGET.graph.n
    edge_gadget_size: int = EDGE_GADGET.graph.n

    def vertex_dashed(self, v: int) -> list[tuple[int, int]]:
        roles = self.vertex_gadgets[v]
        return [_map_pair(roles, VERTEX_GADGET, pair) for pair in VERTEX_GADGET.dashed]

    def edge_dashed(self, e) -> list[tuple[int, int]]:
        roles = self.edge_gadgets[e]
        return [_map_pair(roles, EDGE_GADGET, pair) for pair in EDGE_GADGET.dashed]

    def v_marker(self, v: int) -> int:
        return self.vertex_gadgets[v]["t4"]

    def e_marker(self, e) -> int:
        return self.edge_gadgets[e]["c1"]


def _map_pair(roles: dict, template: GadgetTemplate, pair) -> tuple[int, int]:
    local = {i: name for name, i in template.roles.items()}
    a, b = roles[local[pair[0]]], roles[local[pair[1]]]
    return (a, b) if a < b else (b, a)


def check_four_regular(h0: LabeledStructure) -> None:
    if h0.n == 0 or any(h0.degree(v) != 4 for v in h0.vertices()):
        raise ContractError("input must be a nonempty 4-regular simple graph")


def build_hardness_instance(h0: LabeledStructure) -> GadgetInstance:
    check_four_regular(h0)
    n = h0.n
    vsize = VERTEX_GADGET.graph.n
    vroles = VERTEX_GADGET.roles
    vertex_gadgets = {v: {role: v * vsize + i for role, i in vroles.items()} for v in range(n)}

    incident = {v: sorted(e for e in h0.edges if v in e) for v in range(n)}
    internal = [r for r in sorted(EDGE_GADGET.roles, key=EDGE_GADGET.roles.get) if r not in ("e1", "e2")]
    offset = n * vsize
    edge_gadgets = {}
    for idx, (u, v) in enumerate(sorted(h0.edges)):
        roles = {r: offset + idx * len(internal) + j for j, r in enumerate(internal)}
        roles["e1"] = vertex_gadgets[u][VERTEX_TERMINALS[incident[u].index((u, v))]]
        roles["e2"] = vertex_gadgets[v][VERTEX_TERMINALS[incident[v].index((u, v))]]
        edge_gadgets[(u, v)] = roles

    edges = set()
    for roles in vertex_gadgets.values():
        edges |= _place(VERTEX_GADGET, roles, VERTEX_GADGET.graph.edges)
    for roles in edge_gadgets.values():
        edges |= _place(EDGE_GADGET, roles, EDGE_GADGET.graph.edges)
    total = offset + len(edge_gadgets) * len(internal)
    inst = GadgetInstance(h0, LabeledStructure(total, frozenset(edges)), vertex_gadgets, edge_gadgets)
    _calibrate(inst)
    return inst


def _place(template: GadgetTemplate, roles: dict, local_edges) -> set:
    local = {i: name for name, i in template.roles.items()}
    out = set()
    for a, b in local_edges:
        x, y = roles[local[a]], roles[local[b]]
        out.add((x, y) if x < y else (y, x))
    return out


def _calibrate(inst: GadgetInstance) -> None:
    """Measure the e-marker to v-marker distance on certificates and check
    it against the stored constant, for every reduced vertex gadget.
    Also checks that the marker criteria pick out exactly t4 and c1 in H."""
    v_found, e_found = marker_roles_in(inst.H)
    if sorted(v_found) != sorted(inst.v_marker(v) for v in inst.h0.vertices()) or sorted(e_found) != sorted(
        inst.e_marker(e) for e in inst.edge_gadgets
    ):
        raise InconsistencyError("marker criteria select vertices other than the designated markers")
    for colour in COLOURS:
        g = build_certificate(inst, {v: colour for v in inst.h0.vertices()})
        measured = marker_distances(inst, g)
        if set(measured.values()) != {inst.d_marker}:
            raise InconsistencyError(
                f"gadget transcription gives marker distances {sorted(set(measured.values()))}, "
                f"expected the constant {inst.d_marker}"
            )


def build_certificate(inst: GadgetInstance, colouring) -> LabeledStructure:
    colouring = dict(colouring) if not isinstance(colouring, dict) else colouring
    missing = [v for v in inst.h0.vertices() if v not in colouring]
    if missing:
        raise ContractError(f"colouring is missing vertices {missing}")
    drop = set()
    for v in inst.h0.vertices():
        c = colouring[v]
        if c not in COLOURS:
            raise ContractError(f"vertex {v} has colour {c}, expected one of {COLOURS}")
        if c != 1:
            drop.add(inst.vertex_dashed(v)[c - 2])
    for e in inst.edge_gadgets:
        drop.update(inst.edge_dashed(e))
    return inst.H.with_edges(inst.H.edges - drop)


def bfs_distances(g: LabeledStructure, source: int, limit: int | None = None) -> dict[int, int]:
    adj = g.adjacency
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        if limit is not None and dist[x] >= limit:
            continue
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def marker_distances(inst: GadgetInstance, g: LabeledStructure) -> dict:
    """Distance in ``g`` from each e-marker to each of its two v-markers."""
    out = {}
    for (u, v), roles in inst.edge_gadgets.items():
        dist = bfs_distances(g, roles["c1"])
        for end in (u, v):
            out[((u, v), end)] = dist.get(inst.v_marker(end), -1)
    return out


# -- psi0 -------------------------------------------------------------------


def _to_nx(g: LabeledStructure, root: int) -> nx.Graph:
    x = nx.Graph()
    x.add_nodes_from((v, {"root": v == root}) for v in range(g.n))
    x.add_edges_from(g.edges)
    return x


def _templates():
    marker = VERTEX_GADGET.roles["t4"]
    return [(c, _to_nx(reduced_vertex_gadget(c), marker)) for c in COLOURS]


_TEMPLATES = _templates()
_MATCH_CACHE: dict = {}


def _match_ball(ball_vertices: list[int], ball_edges: list[tuple[int, int]], root: int):
    """Which reduced vertex gadget the rooted ball is isomorphic to.

    Returns ``(colour, dashed pairs in ball ids)`` or ``None``.  Results are
    cached on the ball's shape after relabelling vertices by rank.
    """
    rank = {v: i for i, v in enumerate(ball_vertices)}
    key = (len(ball_vertices), rank[root], tuple(sorted((rank[a], rank[b]) for a, b in ball_edges)))
    if key not in _MATCH_CACHE:
        _MATCH_CACHE[key] = _match_shape(*key)
    found = _MATCH_CACHE[key]
    if found is None:
        return None
    colour, pairs = found
    return colour, {tuple(sorted((ball_vertices[a], ball_vertices[b]))) for a, b in pairs}


def _match_shape(size: int, root: int, edges: tuple):
    ball = nx.Graph()
    ball.add_nodes_from((v, {"root": v == root}) for v in range(size))
    ball.add_edges_from(edges)
    for colour, template in _TEMPLATES:
        if template.number_of_nodes() != size or template.number_of_edges() != len(edges):
            continue
        gm = GraphMatcher(template, ball, node_match=lambda a, b: a["root"] == b["root"])
        pairs = set()
        for iso in gm.isomorphisms_iter():
            for a, b in VERTEX_GADGET.dashed:
                pairs.add(tuple(sorted((iso[a], iso[b]))))
        if pairs:
            return colour, frozenset(pairs)
    return None


class Psi0Evaluator:
    """Procedural psi0 on a fixed graph G.

    psi0(x, y) holds if x, y are adjacent in G, or

    * (nu) some z in the closed neighbourhood of x or y is a v-marker whose radius-5 ball is
      isomorphic to a reduced vertex gadget (rooted at its marker) and
      {x, y} are the ends of one of that gadget's dashed edges, or
    * (eta) one of them is an e-marker, the other is at distance two from
      it, and the v-markers at distance ``d_marker`` from the e-marker with
      valid balls show at least two different gadget variants.
    """

    def __init__(self, g: LabeledStructure, d_marker: int = D_MARKER, radius: int = NBHD_RADIUS, trace: bool = False):
        self.g = g
        self.d_marker = d_marker
        self.radius = radius
        self.trace = [] if trace else None
        adj = g.adjacency
        leaves = [sum(1 for y in adj[x] if len(adj[y]) == 1) for x in range(g.n)]
        self.v_markers = [x for x in range(g.n) if leaves[x] == 1]
        self.e_markers = [x for x in range(g.n) if leaves[x] == 2]
        self.variant = {}
        self.dashed = {}
        for z in self.v_markers:
            dist = bfs_distances(g, z, radius)
            ball = sorted(dist)
            inside = set(ball)
            edges = [(a, b) for a in ball for b in adj[a] if a < b and b in inside]
            found = _match_ball(ball, edges, z)
            if found is not None:
                self.variant[z], self.dashed[z] = found
        self.eta_ok = {}
        self.at_two = {}
        for x in self.e_markers:
            dist = bfs_distances(g, x, max(d_marker, 2))
            variants = {self.variant[z] for z, d in dist.items() if d == d_marker and z in self.variant}
            self.eta_ok[x] = len(variants) >= 2
            self.at_two[x] = {y for y, d in dist.items() if d == 2}

    def _nu(self, x, y) -> bool:
        adj = self.g.adjacency
        pair = (x, y) if x < y else (y, x)
        return any(z in self.dashed and pair in self.dashed[z] for z in adj[x] | adj[y] | {x, y})

    def _eta(self, x, y) -> bool:
        return any(self.eta_ok.get(a, False) and b in self.at_two[a] for a, b in ((x, y), (y, x)))

    def holds(self, x: int, y: int) -> bool:
        if not (0 <= x < self.g.n and 0 <= y < self.g.n):
            raise ContractError("vertex out of range")
        if x == y:
            return False
        if self.g.has_edge(x, y):
            why = "edge"
        elif self._nu(x, y):
            why = "nu"
        elif self._eta(x, y):
            why = "eta"
        else:
            why = None
        if self.trace is not None:
            self.trace.append((x, y, why))
        return why is not None

    def edge_set(self) -> frozenset:
        """All pairs satisfying psi0, enumerated from the three cases."""
        out = set(self.g.edges)
        adj = self.g.adjacency
        for z, pairs in self.dashed.items():
            for a, b in pairs:
                if z in (a, b) or z in adj[a] or z in adj[b]:
                    out.add((a, b))
        for x, ok in self.eta_ok.items():
            if ok:
                out.update((min(x, y), max(x, y)) for y in self.at_two[x])
        return frozenset(out)


def evaluate_psi0(inst: GadgetInstance, g: LabeledStructure, u: int, v: int) -> bool:
    if g.n != inst.H.n:
        raise ContractError("certificate must live on the vertex set of H")
    return Psi0Evaluator(g, inst.d_marker, inst.nbhd_radius).holds(u, v)


def interpret_psi0(inst: GadgetInstance, g: LabeledStructure) -> LabeledStructure:
    if g.n != inst.H.n:
        raise ContractError("certificate must live on the vertex set of H")
    return LabeledStructure(g.n, Psi0Evaluator(g, inst.d_marker, inst.nbhd_radius).edge_set())


def is_proper(h0: LabeledStructure, colouring) -> bool:
    return all(colouring[u] != colouring[v] for u, v in h0.edges)


def is_three_colourable(h0: LabeledStructure) -> bool:
    """Brute force over all 3^n colourings."""
    return any(is_proper(h0, c) for c in product(COLOURS, repeat=h0.n))


@dataclass(frozen=True)
class ColouringCheck:
    colouring: tuple
    accepted: bool
    proper: bool
    max_degree: int
    marker_distance_uniform: bool


@dataclass
class ReductionReport:
    checks: list = field(default_factory=list)

    @property
    def accepted(self) -> list[tuple]:
        return [c.colouring for c in self.checks if c.accepted]

    @property
    def proper(self) -> list[tuple]:
        return [c.colouring for c in self.checks if c.proper]

    @property
    def three_colourable(self) -> bool:
        return bool(self.accepted)

    @property
    def consistent(self) -> bool:
        return all(c.accepted == c.proper for c in self.checks)

    @property
    def certificates_bounded(self) -> bool:
        return all(c.max_degree <= 3 for c in self.checks)

    @property
    def distances_uniform(self) -> bool:
        return all(c.marker_distance_uniform for c in self.checks)


def verify_reduction(inst: GadgetInstance, budget: int = DEFAULT_BUDGET) -> ReductionReport:
    """Check every colouring: the certificate reproduces H iff it is proper."""
    n = inst.h0.n
    if 3**n > budget:
        raise BudgetExceededError(f"3^{n} colourings exceed the budget {budget}")
    report = ReductionReport()
    for colours in product(COLOURS, repeat=n):
        colouring = dict(enumerate(colours))
        g = build_certificate(inst, colouring)
        accepted = interpret_psi0(inst, g).edges == inst.H.edges
        uniform = set(marker_distances(inst, g).values()) == {inst.d_marker}
        report.checks.append(ColouringCheck(colours, accepted, is_proper(inst.h0, colouring), g.max_degree(), uniform))
    return report


def marker_roles_in(h: LabeledStructure) -> tuple[list[int], list[int]]:
    """(v-markers, e-markers) of ``h`` by the degree-1 adjacency criterion."""
    adj = h.adjacency
    leaves = [sum(1 for y in adj[x] if len(adj[y]) == 1) for x in range(h.n)]
    return [x for x in range(h.n) if leaves[x] == 1], [x for x in range(h.n) if leaves[x] == 2]
