"""Labelled graphs, the line-oriented text format, and example families.

A :class:`LabeledStructure` is a simple undirected graph on the vertices
``0..n-1`` together with unary labels and optional named binary relations.
Structures are immutable; every transformation returns a new one.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import ContractError, GraphFormatError

SUCC = "succ"


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=True)
class LabeledStructure:
    n: int
    edges: frozenset = frozenset()
    labels: Mapping[str, frozenset] = field(default_factory=dict)
    relations: Mapping[str, frozenset] = field(default_factory=dict)

    __hash__ = None  # mappings are not hashable

    def __post_init__(self):
        n = self.n
        if n < 0:
            raise ContractError("vertex count must be non-negative")
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise ContractError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ContractError(f"edge {{{u},{v}}} out of range for n={n}")
            norm.add(_edge(u, v))
        object.__setattr__(self, "edges", frozenset(norm))
        labels = {}
        for name, vs in self.labels.items():
            vs = frozenset(vs)
            if any(not 0 <= v < n for v in vs):
                raise ContractError(f"label {name!r} mentions a vertex out of range")
            labels[name] = vs
        object.__setattr__(self, "labels", labels)
        rels = {}
        for name, pairs in self.relations.items():
            pairs = frozenset((int(a), int(b)) for a, b in pairs)
            if any(not (0 <= a < n and 0 <= b < n) for a, b in pairs):
                raise ContractError(f"relation {name!r} mentions a vertex out of range")
            rels[name] = pairs
        object.__setattr__(self, "relations", rels)
        if SUCC in rels:
            check_successor(n, rels[SUCC])

    # -- adjacency ----------------------------------------------------------

    @cached_property
    def adjacency(self) -> tuple[frozenset, ...]:
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        if self.edges:
            idx = np.array(sorted(self.edges))
            a[idx[:, 0], idx[:, 1]] = 1
            a[idx[:, 1], idx[:, 0]] = 1
        return a

    def neighbours(self, v: int) -> frozenset:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def label(self, name: str) -> frozenset:
        return self.labels.get(name, frozenset())

    def vertices(self) -> range:
        return range(self.n)

    # -- derived structures -------------------------------------------------

    def with_labels(self, extra: Mapping[str, Iterable[int]]) -> LabeledStructure:
        labels = dict(self.labels)
        for name, vs in extra.items():
            labels[name] = frozenset(vs)
        return LabeledStructure(self.n, self.edges, labels, self.relations)

    def with_relation(self, name: str, pairs: Iterable[tuple[int, int]]) -> LabeledStructure:
        rels = dict(self.relations)
        rels[name] = frozenset(pairs)
        return LabeledStructure(self.n, self.edges, self.labels, rels)

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> LabeledStructure:
        return LabeledStructure(self.n, frozenset(edges), self.labels, self.relations)

    def plain(self) -> LabeledStructure:
        """The bare graph, without labels or relations."""
        return LabeledStructure(self.n, self.edges)

    def induced(self, vertices: Iterable[int]) -> LabeledStructure:
        """Induced substructure, renumbered in ascending vertex order."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        labels = {k: [index[v] for v in vs if v in index] for k, vs in self.labels.items()}
        rels = {
            k: [(index[a], index[b]) for a, b in ps if a in index and b in index]
            for k, ps in self.relations.items()
            if k != SUCC
        }
        return LabeledStructure(len(keep), frozenset(edges), labels, rels)

    def complement(self) -> LabeledStructure:
        edges = {e for e in combinations(range(self.n), 2) if e not in self.edges}
        return LabeledStructure(self.n, frozenset(edges), self.labels, self.relations)

    def __repr__(self):
        return (
            f"LabeledStructure(n={self.n}, |E|={len(self.edges)}, "
            f"labels={sorted(self.labels)}, relations={sorted(self.relations)})"
        )


def check_successor(n: int, pairs: frozenset) -> None:
    """Raise unless ``pairs`` is a directed Hamiltonian path on ``0..n-1``."""
    if n == 0:
        if pairs:
            raise ContractError("succ on an empty domain must be empty")
        return
    if len(pairs) != n - 1:
        raise ContractError(f"succ must have exactly n-1={n - 1} arcs, got {len(pairs)}")
    out = {}
    indeg = [0] * n
    for a, b in pairs:
        if a in out:
            raise ContractError(f"succ: vertex {a} has out-degree > 1")
        out[a] = b
        indeg[b] += 1
        if indeg[b] > 1:
            raise ContractError(f"succ: vertex {b} has in-degree > 1")
    sources = [v for v in range(n) if indeg[v] == 0]
    if len(sources) != 1:
        raise ContractError("succ must have exactly one source")
    seen = {sources[0]}
    v = sources[0]
    while v in out:
        v = out[v]
        if v in seen:
            raise ContractError("succ contains a cycle")
        seen.add(v)
    if len(seen) != n:
        raise ContractError("succ is not connected as a single path")


def successor_from_order(order: Iterable[int]) -> frozenset:
    order = list(order)
    return frozenset(zip(order, order[1:]))


# -- text format ------------------------------------------------------------

_INT = re.compile(r"^\d+$")


def parse_structure(text: str) -> LabeledStructure:
    """Parse the line format ``n``/``e``/``l``/``r`` (``#`` starts a comment).

    ``l <label>`` and ``r <relname>`` without vertices declare an empty
    label or relation.
    """
    n = None
    edges = set()
    labels: dict[str, set] = {}
    rels: dict[str, set] = {}

    def vid(tok, lineno):
        if not _INT.match(tok):
            raise GraphFormatError(f"expected a decimal vertex id, got {tok!r}", lineno)
        v = int(tok)
        if not v < n:
            raise GraphFormatError(f"vertex id {v} out of range for n={n}", lineno)
        return v

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head, args = toks[0], toks[1:]
        if n is None:
            if head != "n":
                raise GraphFormatError("the first directive must be 'n <count>'", lineno)
            if len(args) != 1 or not _INT.match(args[0]):
                raise GraphFormatError("'n' takes exactly one non-negative integer", lineno)
            n = int(args[0])
            continue
        if head == "n":
            raise GraphFormatError("duplicate 'n' directive", lineno)
        if head == "e":
            if len(args) != 2:
                raise GraphFormatError("'e' takes exactly two vertex ids", lineno)
            u, v = vid(args[0], lineno), vid(args[1], lineno)
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}", lineno)
            edges.add(_edge(u, v))
        elif head == "l":
            if not args:
                raise GraphFormatError("'l' needs a label name", lineno)
            name, ids = args[0], [vid(t, lineno) for t in args[1:]]
            if len(set(ids)) != len(ids):
                raise GraphFormatError(f"duplicate vertex id in label {name!r}", lineno)
            labels.setdefault(name, set()).update(ids)
        elif head == "r":
            if len(args) not in (1, 3):
                raise GraphFormatError("'r' takes a relation name and two vertex ids", lineno)
            pairs = rels.setdefault(args[0], set())
            if len(args) == 3:
                pairs.add((vid(args[1], lineno), vid(args[2], lineno)))
        else:
            raise GraphFormatError(f"unknown directive {head!r}", lineno)
    if n is None:
        raise GraphFormatError("missing 'n <count>' directive", 1)
    try:
        return LabeledStructure(n, frozenset(edges), labels, rels)
    except ContractError as exc:
        raise GraphFormatError(str(exc)) from exc


def render_structure(s: LabeledStructure) -> str:
    lines = [f"n {s.n}"]
    lines += [f"e {u} {v}" for u, v in sorted(s.edges)]
    for name in sorted(s.labels):
        ids = " ".join(str(v) for v in sorted(s.labels[name]))
        lines.append(f"l {name} {ids}".rstrip())
    for name in sorted(s.relations):
        pairs = sorted(s.relations[name])
        if not pairs:
            lines.append(f"r {name}")
        lines += [f"r {name} {a} {b}" for a, b in pairs]
    return "\n".join(lines) + "\n"


def read_structure(path) -> LabeledStructure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


# -- families ---------------------------------------------------------------

FAMILY_KINDS = ("path", "bounded_degree", "complement_of", "bipartite_minus", "complete", "named_fixed")
NAMED = ("K5", "K44")


@dataclass(frozen=True)
class FamilySpec:
    """A deterministic recipe for a graph; ``args`` depend on ``kind``.

    ``complement_of`` wraps another spec in ``inner``.
    """

    kind: str
    args: tuple = ()
    seed: int = 0
    inner: FamilySpec | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ContractError(f"unknown family {self.kind!r}")
        if self.kind == "complement_of":
            if self.inner is None:
                raise ContractError("complement_of needs an inner spec")
        elif self.kind == "named_fixed":
            if self.args not in ((n,) for n in NAMED):
                raise ContractError(f"named_fixed takes one of {NAMED}")
        else:
            if any(not isinstance(a, int) or a < 0 for a in self.args):
                raise ContractError("family arguments must be non-negative integers")
            arity = {"path": 1, "complete": 1, "bounded_degree": 2, "bipartite_minus": 3}[self.kind]
            if len(self.args) != arity:
                raise ContractError(f"{self.kind} takes {arity} arguments")
        if self.seed < 0:
            raise ContractError("seed must be unsigned")

    def __str__(self):
        if self.kind == "complement_of":
            return f"complement_of({self.inner})"
        return f"{self.kind}({','.join(str(a) for a in self.args)})"


def path(n: int) -> FamilySpec:
    return FamilySpec("path", (n,))


def complete(n: int) -> FamilySpec:
    return FamilySpec("complete", (n,))


def bounded_degree(n: int, d: int, seed: int = 0) -> FamilySpec:
    return FamilySpec("bounded_degree", (n, d), seed)


def bipartite_minus(a: int, b: int, d: int, seed: int = 0) -> FamilySpec:
    return FamilySpec("bipartite_minus", (a, b, d), seed)


def complement_of(spec: FamilySpec) -> FamilySpec:
    return FamilySpec("complement_of", (), spec.seed, spec)


def named_fixed(name: str) -> FamilySpec:
    return FamilySpec("named_fixed", (name,))


_FAMILY_RE = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


def parse_family(text: str, seed: int = 0) -> FamilySpec:
    """Parse e.g. ``"complement_of(bounded_degree(20,3))"``."""
    m = _FAMILY_RE.match(text)
    if not m:
        raise ContractError(f"cannot parse family spec {text!r}")
    kind, inner = m.group(1), m.group(2).strip()
    if kind == "complement_of":
        return complement_of(parse_family(inner, seed))
    if kind == "named_fixed":
        return FamilySpec(kind, (inner,), seed)
    try:
        args = tuple(int(a) for a in inner.split(",")) if inner else ()
    except ValueError:
        raise ContractError(f"non-integer argument in {text!r}") from None
    return FamilySpec(kind, args, seed)


def _sample_bounded(pairs: list, degree_cap: int, n: int, rng: random.Random) -> set:
    """Rejection-sample edges from ``pairs`` keeping degrees < cap.

    Stops after ``n * degree_cap`` consecutive rejections.
    """
    deg = [0] * n
    chosen: set = set()
    if degree_cap == 0 or not pairs:
        return chosen
    limit = n * degree_cap
    rejected = 0
    while rejected < limit:
        u, v = pairs[rng.randrange(len(pairs))]
        if (u, v) in chosen or deg[u] >= degree_cap or deg[v] >= degree_cap:
            rejected += 1
            continue
        chosen.add((u, v))
        deg[u] += 1
        deg[v] += 1
        rejected = 0
    return chosen


def generate(spec: FamilySpec) -> LabeledStructure:
    kind, args = spec.kind, spec.args
    if kind == "path":
        (n,) = args
        return LabeledStructure(n, frozenset((i, i + 1) for i in range(n - 1)))
    if kind == "complete":
        (n,) = args
        return LabeledStructure(n, frozenset(combinations(range(n), 2)))
    if kind == "bounded_degree":
        n, d = args
        rng = random.Random(spec.seed)
        return LabeledStructure(n, frozenset(_sample_bounded(list(combinations(range(n), 2)), d, n, rng)))
    if kind == "bipartite_minus":
        a, b, d = args
        rng = random.Random(spec.seed)
        cross = [(u, a + v) for u in range(a) for v in range(b)]
        removed = _sample_bounded(cross, d, a + b, rng)
        return LabeledStructure(a + b, frozenset(e for e in cross if e not in removed))
    if kind == "complement_of":
        return generate(spec.inner).complement()
    if kind == "named_fixed":
        (name,) = args
        if name == "K5":
            return generate(complete(5))
        return LabeledStructure(8, frozenset((u, 4 + v) for u in range(4) for v in range(4)))
    raise ContractError(f"unknown family {kind!r}")  # pragma: no cover


def edgeless(n: int) -> LabeledStructure:
    return LabeledStructure(n)


def disjoint_union(*parts: LabeledStructure) -> LabeledStructure:
    """Disjoint union of plain graphs; labels and relations are dropped."""
    edges = []
    offset = 0
    for g in parts:
        edges += [(u + offset, v + offset) for u, v in g.edges]
        offset += g.n
    return LabeledStructure(offset, frozenset(edges))
