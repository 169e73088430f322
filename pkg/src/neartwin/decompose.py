"""Bounded-degree preimages of near-uniform graphs, and model checking on them.

Given H whose near-k-twin relation is an equivalence with at most ``p``
classes (for some ``k <= k0``), :func:`decompose` builds a labelled graph
G_H of maximum degree at most ``2*k0*p`` on the same vertices such that
``interpret(G_H, universal_formula(k0, p)) == H``.  The formula depends on
``(k0, p)`` only.

Large classes (more than ``5k`` vertices) carry a class label, and each pair
of large classes a pair label recording whether the prevailing adjacency is
"almost none" or "almost all"; G_H stores the exceptions.  Every vertex of a
small class gets its own label ``sig_j`` and marks its H-neighbours with
``sigN_j``.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from itertools import combinations

from .errors import ContractError, InconsistencyError, NotNearUniformError
from .interpret import interpret
from .logic import (
    Edge,
    Formula,
    Label,
    Not,
    conj,
    disj,
    evaluate,
    free_variables,
    relation_names,
    rewrite_edges,
    symmetrize,
)
from .structure import SUCC, LabeledStructure, successor_from_order
from .twins import Partition, find_uniform_parameters


def lam(i):
    return f"lam_{i}"


def lamp(i):
    return f"lamp_{i}"


def mu(i, j):
    return f"mu_{i}_{j}"


def nu(i, j):
    return f"nu_{i}_{j}"


def mup(i, j):
    return f"mup_{i}_{j}"


def nup(i, j):
    return f"nup_{i}_{j}"


def sig(j):
    return f"sig_{j}"


def sigN(j):
    return f"sigN_{j}"


def label_alphabet(k0: int, p: int) -> list[str]:
    """The fixed label set used by :func:`decompose` for parameters (k0, p)."""
    out = [lam(i) for i in range(1, p + 1)] + [lamp(i) for i in range(1, p + 1)]
    for i, j in combinations(range(1, p + 1), 2):
        out += [mu(i, j), nu(i, j), mup(i, j), nup(i, j)]
    for j in range(1, 5 * k0 * p + 1):
        out += [sig(j), sigN(j)]
    return out


def universal_formula_core(k0: int, p: int, x: str = "x", y: str = "y") -> Formula:
    """The unsymmetrized five-family disjunction."""
    e = Edge(x, y)
    both = lambda a, b: [Label(a, x), Label(b, y)]  # noqa: E731
    parts = [conj(both(lam(i), lam(i)) + [e]) for i in range(1, p + 1)]
    parts += [conj(both(lamp(i), lamp(i)) + [Not(e)]) for i in range(1, p + 1)]
    pairs = list(combinations(range(1, p + 1), 2))
    parts += [conj(both(mu(i, j), nu(i, j)) + [e]) for i, j in pairs]
    parts += [conj(both(mup(i, j), nup(i, j)) + [Not(e)]) for i, j in pairs]
    parts += [conj(both(sig(j), sigN(j))) for j in range(1, 5 * k0 * p + 1)]
    return disj(parts)


def universal_formula(k0: int, p: int) -> Formula:
    if k0 < 0 or p < 1:
        raise ContractError("need k0 >= 0 and p >= 1")
    return symmetrize(universal_formula_core(k0, p))


@dataclass(frozen=True)
class Decomposition:
    k0: int
    p: int
    k: int
    partition: Partition
    large_classes: tuple[int, ...]
    F1: frozenset
    F2: frozenset
    small_order: tuple[int, ...]
    G_H: LabeledStructure
    psi: Formula = field(repr=False)

    @property
    def r(self) -> int:
        return len(self.small_order)

    @property
    def m(self) -> int:
        return len(self.large_classes)

    def large_blocks(self) -> list[frozenset]:
        """V_1..V_m (index ``i`` in F1/F2 refers to entry ``i - 1``)."""
        return [self.partition.blocks[b] for b in self.large_classes]


def _classify(adj, a: frozenset, b: frozenset, k: int, what: str) -> bool:
    """True if ``a``-vertices see all but <= 2k of ``b``, False if they see
    at most 2k of ``b``.  One vertex decides, the rest are checked."""
    bound = 2 * k
    first = min(a)
    dense = len(b - adj[first]) <= bound
    for v in a:
        ok = len(b - adj[v]) <= bound if dense else len(adj[v] & b) <= bound
        if not ok:
            raise InconsistencyError(f"{what}: vertex {v} breaks the uniform adjacency of vertex {first}")
    return dense


def decompose(h: LabeledStructure, k0: int, p: int, verify: bool = True) -> Decomposition:
    if k0 < 0 or p < 1:
        raise ContractError("need k0 >= 0 and p >= 1")
    found = find_uniform_parameters(h, k0, p)
    if found is None:
        raise NotNearUniformError(k0, p)
    k, partition = found
    adj = h.adjacency

    large = tuple(i for i, b in enumerate(partition.blocks) if len(b) > 5 * k)
    classes = [partition.blocks[i] for i in large]
    m = len(classes)
    index = {v: i for i, c in enumerate(classes, start=1) for v in c}

    F1 = frozenset(i for i, c in enumerate(classes, start=1) if _classify(adj, c, c, k, f"class {i}"))
    F2 = set()
    for i, j in combinations(range(1, m + 1), 2):
        a, b = classes[i - 1], classes[j - 1]
        d1 = _classify(adj, a, b, k, f"classes {i},{j}")
        d2 = _classify(adj, b, a, k, f"classes {j},{i}")
        if d1 != d2:
            raise InconsistencyError(f"classes {i},{j}: adjacency is dense one way and sparse the other")
        if d1:
            F2.add((i, j))
    F2 = frozenset(F2)

    # G_H keeps, for vertices of large classes, exactly the pairs on which H
    # disagrees with the prevailing adjacency.
    g_edges = set()
    for u, v in combinations(sorted(index), 2):
        iu, iv = index[u], index[v]
        if iu == iv:
            prevailing = iu in F1
        else:
            prevailing = (min(iu, iv), max(iu, iv)) in F2
        if prevailing != (v in adj[u]):
            g_edges.add((u, v))

    labels: dict[str, set] = {}
    for i, c in enumerate(classes, start=1):
        labels.setdefault(lamp(i) if i in F1 else lam(i), set()).update(c)
    for i, j in combinations(range(1, m + 1), 2):
        dense = (i, j) in F2
        labels.setdefault(mup(i, j) if dense else mu(i, j), set()).update(classes[i - 1])
        labels.setdefault(nup(i, j) if dense else nu(i, j), set()).update(classes[j - 1])
    small = tuple(sorted(set(range(h.n)) - set(index)))
    if len(small) > 5 * k0 * p:
        raise InconsistencyError(f"{len(small)} small vertices exceed the bound 5*k0*p = {5 * k0 * p}")
    for j, w in enumerate(small, start=1):
        labels[sig(j)] = {w}
        labels[sigN(j)] = set(adj[w])

    clash = set(labels) & set(h.labels)
    if clash:
        raise ContractError(f"input labels collide with decomposition labels: {sorted(clash)}")
    all_labels = {**{name: vs for name, vs in h.labels.items()}, **labels}
    g_h = LabeledStructure(h.n, frozenset(g_edges), all_labels)
    if g_h.max_degree() > 2 * k0 * p:
        raise InconsistencyError(f"G_H has degree {g_h.max_degree()} > 2*k0*p = {2 * k0 * p}")

    psi = universal_formula(k0, p)
    dec = Decomposition(k0, p, k, partition, large, F1, F2, small, g_h, psi)
    if verify and interpret(g_h, psi).edges != h.edges:
        raise InconsistencyError("interpreting G_H does not reproduce H")
    return dec


def recover(dec: Decomposition) -> LabeledStructure:
    """``I_psi(G_H)``: the graph the decomposition encodes."""
    return interpret(dec.G_H, dec.psi)


# -- model checking ---------------------------------------------------------


@dataclass
class Verdict:
    value: bool
    decomposition: Decomposition
    rewritten: Formula = field(repr=False)
    timings: dict = field(default_factory=dict)


def _require_sentence(phi: Formula) -> None:
    fv = free_variables(phi)
    if fv:
        raise ContractError(f"expected a sentence, but {sorted(fv)} occur free")


def model_check(h: LabeledStructure, phi: Formula, k0: int, p: int) -> Verdict:
    """Decide ``h |= phi`` by evaluating the rewritten sentence on G_H."""
    _require_sentence(phi)
    t0 = time.perf_counter()
    dec = decompose(h, k0, p, verify=False)
    t1 = time.perf_counter()
    rewritten = rewrite_edges(phi, dec.psi)
    t2 = time.perf_counter()
    value = evaluate(dec.G_H, rewritten)
    t3 = time.perf_counter()
    timings = {"decompose": t1 - t0, "rewrite": t2 - t1, "evaluate": t3 - t2}
    return Verdict(value, dec, rewritten, timings)


@dataclass
class SuccessorReport:
    invariant: bool
    verdict: bool | None
    orders: list[tuple[int, ...]]
    values: list[bool]
    decomposition: Decomposition = field(repr=False)


def successor_invariant_check(h: LabeledStructure, phi: Formula, k0: int, p: int, trials: int = 10, seed: int = 0) -> SuccessorReport:
    """Evaluate ``phi`` (which may use ``R.succ``) under random successor
    orders of the common vertex set of H and G_H."""
    _require_sentence(phi)
    if trials < 2:
        raise ContractError("need at least two trials")
    dec = decompose(h, k0, p, verify=False)
    rewritten = rewrite_edges(phi, dec.psi)
    rng = random.Random(seed)
    orders, values = [], []
    for _ in range(trials):
        order = list(range(h.n))
        rng.shuffle(order)
        g = dec.G_H.with_relation(SUCC, successor_from_order(order))
        orders.append(tuple(order))
        values.append(evaluate(g, rewritten))
    invariant = len(set(values)) <= 1
    verdict = values[0] if invariant else None
    return SuccessorReport(invariant, verdict, orders, values, dec)


def evaluate_with_order(h: LabeledStructure, phi: Formula, order) -> bool:
    """``h`` equipped with the successor relation of ``order``, then ``h |= phi``."""
    return evaluate(h.with_relation(SUCC, successor_from_order(order)), phi)


def uses_successor(phi: Formula) -> bool:
    return SUCC in relation_names(phi)
