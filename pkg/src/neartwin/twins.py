"""Near-k-twin relations and what can be read off them.

Two vertices are near-k-twins when their open neighbourhoods differ in at
most ``k`` vertices.  The relation is reflexive and symmetric but need not
be transitive; when it is, its classes drive the decomposition in
:mod:`neartwin.decompose`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

from .errors import BudgetExceededError, ContractError, InconsistencyError
from .structure import LabeledStructure

DEFAULT_BUDGET = 10**7


def symmetric_difference_matrix(g: LabeledStructure) -> np.ndarray:
    """``D[u, v] = |N(u) △ N(v)|`` for all vertex pairs."""
    a = g.adjacency_matrix
    deg = a.sum(axis=1)
    return deg[:, None] + deg[None, :] - 2 * (a @ a)


@dataclass(frozen=True)
class TwinRelation:
    """The auxiliary graph G_k: vertices joined when they are near-k-twins."""

    k: int
    base_n: int
    pairs: frozenset
    source: LabeledStructure | None = field(default=None, compare=False, repr=False)

    @cached_property
    def adjacency(self) -> tuple[frozenset, ...]:
        adj = [set() for _ in range(self.base_n)]
        for u, v in self.pairs:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    def related(self, u: int, v: int) -> bool:
        return u == v or v in self.adjacency[u]

    def as_structure(self) -> LabeledStructure:
        return LabeledStructure(self.base_n, self.pairs)


@dataclass(frozen=True)
class Partition:
    blocks: tuple[frozenset, ...]

    def __post_init__(self):
        blocks = [frozenset(b) for b in self.blocks]
        if any(not b for b in blocks):
            raise ContractError("partition blocks must be nonempty")
        blocks = tuple(sorted(blocks, key=lambda b: (min(b), len(b))))
        object.__setattr__(self, "blocks", blocks)

    @property
    def index(self) -> int:
        return len(self.blocks)

    def block_of(self) -> dict[int, int]:
        return {v: i for i, b in enumerate(self.blocks) for v in b}

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.blocks]


@dataclass(frozen=True)
class EquivalenceOutcome:
    """Either a partition, or a triple (u, v, w) with uv, vw related, uw not."""

    partition: Partition | None = None
    counterexample: tuple[int, int, int] | None = None

    def __post_init__(self):
        if (self.partition is None) == (self.counterexample is None):
            raise ContractError("exactly one of partition/counterexample must be set")

    @property
    def is_equivalence(self) -> bool:
        return self.partition is not None


def near_twin_graph(g: LabeledStructure, k: int) -> TwinRelation:
    if k < 0:
        raise ContractError("k must be non-negative")
    n = g.n
    if n < 2:
        return TwinRelation(k, n, frozenset(), g)
    d = symmetric_difference_matrix(g)
    us, vs = np.nonzero(np.triu(d <= k, 1))
    return TwinRelation(k, n, frozenset(zip(us.tolist(), vs.tolist())), g)


def _components(n: int, adj) -> list[list[int]]:
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [s], deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    queue.append(y)
        comps.append(sorted(comp))
    return comps


def equivalence_check(rel: TwinRelation) -> EquivalenceOutcome:
    """Partition into the components of G_k if each is a clique.

    Otherwise report a violating triple.  Among all violations the one whose
    endpoints are furthest apart (largest neighbourhood difference in the
    source graph, when known) is returned, ties broken lexicographically.
    """
    adj = rel.adjacency
    comps = _components(rel.base_n, adj)
    if all(len(adj[v]) == len(c) - 1 for c in comps for v in c):
        return EquivalenceOutcome(partition=Partition(tuple(frozenset(c) for c in comps)))
    diff = symmetric_difference_matrix(rel.source) if rel.source is not None else None
    best, best_key = None, None
    for v in range(rel.base_n):
        for u, w in combinations(sorted(adj[v]), 2):
            if w in adj[u]:
                continue
            key = (-(int(diff[u, w]) if diff is not None else 0), u, v, w)
            if best_key is None or key < best_key:
                best, best_key = (u, v, w), key
    return EquivalenceOutcome(counterexample=best)


def is_transitive_bruteforce(rel: TwinRelation) -> bool:
    """Direct triple scan; the oracle for :func:`equivalence_check`."""
    n = rel.base_n
    for u in range(n):
        for v in range(n):
            if not rel.related(u, v):
                continue
            for w in range(n):
                if rel.related(v, w) and not rel.related(u, w):
                    return False
    return True


def find_uniform_parameters(g: LabeledStructure, k0: int, p: int):
    """Smallest ``k <= k0`` whose relation is an equivalence of index ``<= p``.

    Returns ``(k, partition)`` or ``None``.
    """
    if k0 < 0 or p < 0:
        raise ContractError("k0 and p must be non-negative")
    for k in range(k0 + 1):
        out = equivalence_check(near_twin_graph(g, k))
        if out.is_equivalence and out.partition.index <= p:
            return k, out.partition
    return None


# -- near-coveredness -------------------------------------------------------


def _closed_masks(rel: TwinRelation) -> list[int]:
    masks = []
    for v in range(rel.base_n):
        m = 1 << v
        for u in rel.adjacency[v]:
            m |= 1 << u
        masks.append(m)
    return masks


def _greedy_dominating(n: int, masks: list[int]) -> list[int]:
    full = (1 << n) - 1
    covered, chosen = 0, []
    while covered != full:
        v = max(range(n), key=lambda x: ((masks[x] & ~covered).bit_count(), -x))
        chosen.append(v)
        covered |= masks[v]
    return chosen


def _exact_dominating(n: int, masks: list[int], size: int, budget: list[int]):
    """Dominating set of at most ``size`` vertices, or None.

    Branches on the lowest undominated vertex: one of its closed neighbours
    must be chosen.
    """
    full = (1 << n) - 1

    def rec(covered: int, left: int, chosen: list[int]):
        if covered == full:
            return list(chosen)
        if left == 0:
            return None
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetExceededError("dominating-set search exceeded its work budget")
        low = (~covered & full) & -(~covered & full)
        x = low.bit_length() - 1
        cands = [y for y in range(n) if masks[x] >> y & 1]
        cands.sort(key=lambda y: -(masks[y] & ~covered).bit_count())
        for y in cands:
            chosen.append(y)
            found = rec(covered | masks[y], left - 1, chosen)
            chosen.pop()
            if found is not None:
                return found
        return None

    return rec(0, size, [])


def minimum_dominating_set(rel: TwinRelation, limit: int, budget: int = DEFAULT_BUDGET):
    """A minimum closed dominating set of G_k if one of size <= limit exists."""
    n = rel.base_n
    if n == 0:
        return frozenset()
    masks = _closed_masks(rel)
    work = [budget]
    for size in range(1, limit + 1):
        found = _exact_dominating(n, masks, size, work)
        if found is not None:
            return frozenset(found)
    return None


def near_covered_check(g: LabeledStructure, ell: int, q: int, budget: int = DEFAULT_BUDGET):
    """A set of at most ``q`` vertices such that every vertex is a
    near-``ell``-twin of one of them, or ``None`` if no such set exists."""
    if q < 1:
        raise ContractError("q must be at least 1")
    rel = near_twin_graph(g, ell)
    n = g.n
    if n == 0:
        return frozenset()
    masks = _closed_masks(rel)
    greedy = _greedy_dominating(n, masks)
    if len(greedy) <= q:
        return frozenset(greedy)
    work = comb(n, min(q, n))
    if work > budget:
        raise BudgetExceededError(f"C({n},{q}) = {work} candidate sets exceeds budget {budget}")
    found = _exact_dominating(n, masks, q, [budget])
    return frozenset(found) if found is not None else None


def is_dominating(rel: TwinRelation, s) -> bool:
    s = frozenset(s)
    return all(v in s or rel.adjacency[v] & s for v in range(rel.base_n))


def _component_radii(rel: TwinRelation) -> list[int]:
    adj = rel.adjacency
    radii = []
    for comp in _components(rel.base_n, adj):
        best = None
        for s in comp:
            dist = {s: 0}
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        queue.append(y)
            ecc = max(dist.values())
            best = ecc if best is None else min(best, ecc)
        radii.append(best)
    return radii


@dataclass(frozen=True)
class ConversionStep:
    ell: int
    q: int
    case: str  # "base", "smaller", "I", "IIa", "IIb"


@dataclass(frozen=True)
class UniformParameters:
    k: int
    p: int
    partition: Partition
    trace: tuple[ConversionStep, ...] = field(default=())


def covered_to_uniform(g: LabeledStructure, ell: int, q: int, budget: int = DEFAULT_BUDGET) -> UniformParameters:
    """Turn an (ell, q)-near-covering into a near-k-twin equivalence.

    Follows the induction on ``q``: a single dominating vertex gives k = 2ell;
    otherwise either G_{2ell} is a disjoint union of q cliques, or one
    representative can be dropped at the price of 8ell.  The resulting
    partition is recomputed directly at the final k.
    """
    if near_covered_check(g, ell, q, budget) is None:
        raise ContractError(f"graph is not ({ell},{q})-near-covered")
    trace = []
    while True:
        if g.n == 0:
            return UniformParameters(0, 0, Partition(()), tuple(trace))
        rel = near_twin_graph(g, ell)
        dom = minimum_dominating_set(rel, q, budget)
        if dom is None:  # pragma: no cover - guarded by the initial check
            raise InconsistencyError("near-covering lost during conversion")
        if q == 1:
            trace.append(ConversionStep(ell, q, "base"))
            k, p = 2 * ell, 1
            break
        if len(dom) < q:
            trace.append(ConversionStep(ell, q, "smaller"))
            q -= 1
            continue
        if max(_component_radii(rel)) >= 2:
            trace.append(ConversionStep(ell, q, "I"))
            ell, q = 8 * ell, q - 1
            continue
        wide = near_twin_graph(g, 2 * ell)
        comp_of = {}
        for i, comp in enumerate(_components(rel.base_n, rel.adjacency)):
            for v in comp:
                comp_of[v] = i
        if all(comp_of[u] == comp_of[v] for u, v in wide.pairs):
            trace.append(ConversionStep(ell, q, "IIa"))
            k, p = 2 * ell, q
            break
        trace.append(ConversionStep(ell, q, "IIb"))
        ell, q = 8 * ell, q - 1
    out = equivalence_check(near_twin_graph(g, k))
    if not out.is_equivalence or out.partition.index > p:
        raise InconsistencyError(f"conversion produced k={k}, p={p} but the relation does not verify")
    return UniformParameters(k, p, out.partition, tuple(trace))


# -- class-pair dichotomy ---------------------------------------------------


@dataclass(frozen=True)
class PairProfile:
    """Adjacency pattern between blocks ``source`` (U) and ``target`` (V).

    ``exceptions[v]`` for ``v`` in V is min(|N(v) ∩ U|, |U \\ N(v)|).
    """

    source: int
    target: int
    qualifying: bool
    case: str  # "sparse", "dense" or "exempt"
    max_exception: int
    exceptions: dict = field(compare=False, repr=False)


@dataclass(frozen=True)
class DichotomyReport:
    k: int
    threshold: int
    pairs: tuple[PairProfile, ...]

    def get(self, source: int, target: int) -> PairProfile:
        for pp in self.pairs:
            if pp.source == source and pp.target == target:
                return pp
        raise KeyError((source, target))


def _pair_case(g: LabeledStructure, u_block: frozenset, v_block: frozenset, k: int) -> str | None:
    adj = g.adjacency
    bound = 2 * k

    def all_sparse(a, b):
        return all(len(adj[x] & b) <= bound for x in a)

    def all_dense(a, b):
        return all(len(b - adj[x]) <= bound for x in a)

    sparse = all_sparse(u_block, v_block) and all_sparse(v_block, u_block)
    dense = all_dense(u_block, v_block) and all_dense(v_block, u_block)
    if sparse and not dense:
        return "sparse"
    if dense and not sparse:
        return "dense"
    return None


def class_pair_profile(g: LabeledStructure, partition: Partition, k: int, verify: bool = False) -> DichotomyReport:
    """Classify every ordered block pair as sparse or dense.

    Pairs where both blocks have at least 5k+1 vertices must fall in exactly
    one case; an :class:`InconsistencyError` is raised otherwise.  Smaller
    blocks are reported with ``qualifying=False``; their case is filled in
    when it happens to hold and is ``"exempt"`` otherwise.
    """
    if verify:
        out = equivalence_check(near_twin_graph(g, k))
        if not out.is_equivalence or set(out.partition.blocks) != set(partition.blocks):
            raise ContractError(f"partition is not the near-{k}-twin equivalence")
    adj = g.adjacency
    threshold = 5 * k + 1
    pairs = []
    blocks = partition.blocks
    for i, u_block in enumerate(blocks):
        for j, v_block in enumerate(blocks):
            exc = {v: min(len(adj[v] & u_block), len(u_block - adj[v])) for v in sorted(v_block)}
            qualifying = len(u_block) >= threshold and len(v_block) >= threshold
            case = _pair_case(g, u_block, v_block, k)
            if case is None:
                if qualifying:
                    raise InconsistencyError(
                        f"blocks {i},{j} are neither sparse nor dense at k={k}; "
                        "the partition is not a near-k-twin equivalence"
                    )
                case = "exempt"
            pairs.append(PairProfile(i, j, qualifying, case, max(exc.values()), exc))
    return DichotomyReport(k, threshold, tuple(pairs))
