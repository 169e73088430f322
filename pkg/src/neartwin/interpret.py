"""Interpretations H = I_psi(G) and FO transductions of graphs.

A transduction first expands G by parameter labels ``P1..Pp``, then takes
``m`` disjoint copies (copy ``i`` labelled ``Qi``, clones related by the
relation ``~``), and finally applies a basic interpretation: a guard
sentence, a domain formula and an edge formula.

Copy vertex ``(v, i)`` (``i`` counted from 0) always has id ``i * n + v``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import ContractError
from .logic import (
    And,
    Edge,
    Exists,
    Forall,
    Formula,
    Implies,
    Label,
    NameSupply,
    Not,
    Or,
    Rel,
    TRUE,
    all_variables,
    check_binary,
    compile_formula,
    conj,
    evaluate,
    free_variables,
    parse_formula,
    substitute,
    symmetrize,
)
from .structure import LabeledStructure

COPY_RELATION = "~"
STAR_LABEL = "R"
MAX_COPIES = 16
MAX_PARAMETERS = 16


def copy_label(i: int) -> str:
    return f"Q{i}"


def parameter_label(i: int) -> str:
    return f"P{i}"


def interpret(g: LabeledStructure, psi: Formula, x: str = "x", y: str = "y", inherit: bool = False) -> LabeledStructure:
    """The graph on V(G) whose edges are the pairs {u, v} with G |= psi(u, v).

    ``psi`` must define a symmetric irreflexive relation (see
    :func:`neartwin.logic.symmetrize`); only ``u < v`` is evaluated.
    """
    check_binary(psi, x, y)
    c = compile_formula(psi, g)
    edges = []
    env: dict = {}
    for u in range(g.n):
        env[x] = u
        for v in range(u + 1, g.n):
            env[y] = v
            if c(env):
                edges.append((u, v))
    if inherit:
        return LabeledStructure(g.n, frozenset(edges), g.labels, g.relations)
    return LabeledStructure(g.n, frozenset(edges))


@dataclass(frozen=True)
class Transduction:
    """Guard (closed), domain (free ``x``), edge (free ``x``, ``y``)."""

    guard: Formula = TRUE
    domain: Formula = TRUE
    edge: Formula = Edge("x", "y")
    copies: int = 1
    parameter_count: int = 0

    def __post_init__(self):
        if free_variables(self.guard):
            raise ContractError("transduction guard must be a sentence")
        if not free_variables(self.domain) <= {"x"}:
            raise ContractError("domain formula may only have x free")
        check_binary(self.edge, "x", "y")
        if not 1 <= self.copies <= MAX_COPIES:
            raise ContractError(f"copies must be in 1..{MAX_COPIES}")
        if not 0 <= self.parameter_count <= MAX_PARAMETERS:
            raise ContractError(f"parameter count must be in 0..{MAX_PARAMETERS}")

    @classmethod
    def from_strings(cls, guard="true", domain="true", edge="E(x,y)", copies=1, parameters=0, symmetrize_edge=True):
        mu = parse_formula(edge)
        if symmetrize_edge:
            mu = symmetrize(mu)
        return cls(parse_formula(guard), parse_formula(domain), mu, int(copies), int(parameters))

    def to_config(self) -> dict:
        return {
            "guard": str(self.guard),
            "domain": str(self.domain),
            "edge": str(self.edge),
            "copies": self.copies,
            "parameters": self.parameter_count,
        }


def load_transduction(text: str):
    """Read a JSON transduction document.

    Keys: ``guard``, ``domain``, ``edge`` (formula strings; the edge formula
    is symmetrized unless ``"symmetrize": false``), ``copies``,
    ``parameters`` and optionally ``params`` (list of vertex-id lists).
    Returns ``(transduction, params or None)``.
    """
    doc = json.loads(text)
    unknown = set(doc) - {"guard", "domain", "edge", "copies", "parameters", "params", "symmetrize"}
    if unknown:
        raise ContractError(f"unknown transduction keys: {sorted(unknown)}")
    tau = Transduction.from_strings(
        doc.get("guard", "true"),
        doc.get("domain", "true"),
        doc.get("edge", "E(x,y)"),
        doc.get("copies", 1),
        doc.get("parameters", 0),
        doc.get("symmetrize", True),
    )
    params = doc.get("params")
    return tau, ([set(p) for p in params] if params is not None else None)


def expand(g: LabeledStructure, params: Sequence) -> LabeledStructure:
    for i, ps in enumerate(params, start=1):
        if any(not 0 <= v < g.n for v in ps):
            raise ContractError(f"parameter {i} mentions a vertex out of range")
    return g.with_labels({parameter_label(i): ps for i, ps in enumerate(params, start=1)})


def copy_structure(g: LabeledStructure, m: int) -> LabeledStructure:
    """The m-copy G^m with labels ``Q1..Qm`` and relation ``~``."""
    n = g.n
    edges = [(i * n + u, i * n + v) for i in range(m) for u, v in g.edges]
    labels = {name: [i * n + v for i in range(m) for v in vs] for name, vs in g.labels.items()}
    for i in range(m):
        labels[copy_label(i + 1)] = range(i * n, (i + 1) * n)
    rels = {
        name: [(i * n + a, i * n + b) for i in range(m) for a, b in ps]
        for name, ps in g.relations.items()
        if name != "succ"
    }
    rels[COPY_RELATION] = [(i * n + v, j * n + v) for v in range(n) for i in range(m) for j in range(m)]
    return LabeledStructure(n * m, frozenset(edges), labels, rels)


def _check_params(g: LabeledStructure, tau: Transduction, params) -> list:
    params = list(params or [])
    if len(params) != tau.parameter_count:
        raise ContractError(f"expected {tau.parameter_count} parameter sets, got {len(params)}")
    return params


def transduction_domain(g: LabeledStructure, tau: Transduction, params=()):
    """``(G^m, domain vertex ids)``, or ``None`` when the guard fails."""
    params = _check_params(g, tau, params)
    gm = copy_structure(expand(g, params), tau.copies)
    if not evaluate(gm, tau.guard):
        return None
    nu = compile_formula(tau.domain, gm)
    return gm, [v for v in range(gm.n) if nu({"x": v})]


def apply_transduction(g: LabeledStructure, tau: Transduction, params=()) -> LabeledStructure | None:
    found = transduction_domain(g, tau, params)
    if found is None:
        return None
    gm, dom = found
    mu = compile_formula(tau.edge, gm)
    index = {v: i for i, v in enumerate(dom)}
    edges = []
    env: dict = {}
    for u in dom:
        env["x"] = u
        for v in dom:
            if v <= u:
                continue
            env["y"] = v
            if mu(env):
                edges.append((index[u], index[v]))
    return LabeledStructure(len(dom), frozenset(edges))


def relativize(f: Formula, supply: NameSupply, star: str = STAR_LABEL) -> Formula:
    """Restrict quantifiers to non-``star`` vertices; encode ``~`` by stars."""

    def go(f):
        if isinstance(f, Exists):
            return Exists(f.var, And(Not(Label(star, f.var)), go(f.body)))
        if isinstance(f, Forall):
            return Forall(f.var, Implies(Not(Label(star, f.var)), go(f.body)))
        if isinstance(f, Not):
            return Not(go(f.body))
        if isinstance(f, (And, Or, Implies)):
            return type(f)(go(f.left), go(f.right))
        if isinstance(f, Rel) and f.name == COPY_RELATION:
            t = supply.fresh("t")
            return Exists(t, conj([Label(star, t), Edge(f.a, t), Edge(f.b, t)]))
        return f

    supply.reserve(all_variables(f))
    return go(f)


class StarEncoding(NamedTuple):
    structure: LabeledStructure
    psi: Formula


def transduction_to_interpretation(tau: Transduction, g: LabeledStructure, params=()) -> StarEncoding:
    """Replace the copy relation by star centres so that a plain
    interpretation reproduces the transduction.

    The result has ``(m + 1) * n`` vertices: the copies keep their ids and
    the ``R``-labelled centre of vertex ``v`` is ``m * n + v``.
    ``interpret(structure, psi)`` equals ``apply_transduction(g, tau,
    params)`` on the domain vertices and is edgeless elsewhere.
    """
    params = _check_params(g, tau, params)
    if STAR_LABEL in g.labels:
        raise ContractError(f"input already carries the reserved label {STAR_LABEL!r}")
    gm = copy_structure(expand(g, params), tau.copies)
    if not evaluate(gm, tau.guard):
        raise ContractError("transduction guard fails on this input")
    n, m = g.n, tau.copies
    base = m * n
    star_edges = [(base + v, i * n + v) for v in range(n) for i in range(m)]
    labels = dict(gm.labels)
    labels[STAR_LABEL] = range(base, base + n)
    rels = {k: v for k, v in gm.relations.items() if k != COPY_RELATION}
    g3 = LabeledStructure(base + n, gm.edges | frozenset(star_edges), labels, rels)

    supply = NameSupply(all_variables(tau.domain) | all_variables(tau.edge) | {"x", "y"})
    nu_x = relativize(tau.domain, supply)
    nu_y = substitute(nu_x, {"x": "y"}, supply)
    mu = relativize(tau.edge, supply)
    psi = conj([Not(Label(STAR_LABEL, "x")), nu_x, Not(Label(STAR_LABEL, "y")), nu_y, mu])
    return StarEncoding(g3, psi)


def star_degree_bound(g: LabeledStructure, m: int) -> int:
    """Maximum degree guaranteed for the star encoding of a plain graph."""
    return max(g.max_degree() + 1, m)
