import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    min_covering_bruteforce,
    neighbourhood_difference,
    random_graph,
    twin_classes_bruteforce,
)

from neartwin.errors import BudgetExceededError, ContractError, InconsistencyError
from neartwin.structure import (
    LabeledStructure,
    bipartite_minus,
    bounded_degree,
    complement_of,
    complete,
    disjoint_union,
    edgeless,
    generate,
    path,
)
from neartwin.twins import (
    Partition,
    class_pair_profile,
    covered_to_uniform,
    equivalence_check,
    find_uniform_parameters,
    is_dominating,
    is_transitive_bruteforce,
    minimum_dominating_set,
    near_covered_check,
    near_twin_graph,
    symmetric_difference_matrix,
)

P7 = generate(path(7))


def perfect_matching_removed(a: int) -> LabeledStructure:
    return LabeledStructure(2 * a, frozenset((u, a + v) for u in range(a) for v in range(a) if u != v))


def test_difference_matrix_matches_sets():
    g = generate(bounded_degree(15, 4, 2))
    d = symmetric_difference_matrix(g)
    for u, v in combinations(range(15), 2):
        assert d[u, v] == neighbourhood_difference(g, u, v)


def test_path_rho1_pairs():
    assert near_twin_graph(P7, 1).pairs == {(0, 2), (4, 6)}


def test_path_rho2_pairs():
    rel = near_twin_graph(P7, 2)
    assert (1, 3) in rel.pairs and (3, 5) in rel.pairs
    assert (1, 5) not in rel.pairs


def test_path_rho1_classes():
    out = equivalence_check(near_twin_graph(P7, 1))
    assert out.is_equivalence
    assert out.partition.as_lists() == [[0, 2], [1], [3], [4, 6], [5]]
    assert out.partition.index == 5


def test_path_rho2_counterexample():
    out = equivalence_check(near_twin_graph(P7, 2))
    assert not out.is_equivalence
    assert out.counterexample == (1, 3, 5)


def test_complete_relation_single_block():
    g = generate(bounded_degree(12, 3, 1))
    rel = near_twin_graph(g, 2 * g.max_degree())
    assert len(rel.pairs) == 12 * 11 // 2
    assert equivalence_check(rel).partition.index == 1


def test_find_uniform_parameters_examples():
    k, part = find_uniform_parameters(P7, 2, 5)
    assert k == 1 and part.index == 5
    k, part = find_uniform_parameters(generate(complete(8)), 2, 1)
    assert k == 2 and part.index == 1
    k, part = find_uniform_parameters(edgeless(6), 0, 1)
    assert k == 0 and part.index == 1
    assert find_uniform_parameters(P7, 2, 4) is None


def test_smallest_k_wins():
    # rho_0 on K_{3,3} already has two classes
    g = LabeledStructure(6, frozenset((u, v) for u in range(3) for v in range(3, 6)))
    assert find_uniform_parameters(g, 5, 2)[0] == 0


def test_monotone_in_k():
    rng = random.Random(3)
    for _ in range(30):
        g = random_graph(rng, 8)
        prev = frozenset()
        for k in range(6):
            cur = near_twin_graph(g, k).pairs
            assert prev <= cur
            prev = cur


def test_equivalence_not_monotone_on_path():
    ks = [equivalence_check(near_twin_graph(P7, k)).is_equivalence for k in range(4)]
    assert ks[1] and not ks[2]


@given(st.integers(0, 7), st.integers(0, 4), st.integers(0, 10**6), st.floats(0.1, 0.9))
@settings(max_examples=300, deadline=None)
def test_equivalence_check_agrees_with_triple_scan(n, k, seed, density):
    g = random_graph(random.Random(seed), n, density)
    rel = near_twin_graph(g, k)
    out = equivalence_check(rel)
    assert out.is_equivalence == is_transitive_bruteforce(rel)
    if out.is_equivalence:
        assert set(out.partition.blocks) == twin_classes_bruteforce(g, k)
    else:
        u, v, w = out.counterexample
        assert rel.related(u, v) and rel.related(v, w) and not rel.related(u, w)


def test_partition_requires_nonempty_blocks():
    with pytest.raises(ContractError):
        Partition((frozenset(),))


# -- near-covered ---------------------------------------------------------------


def test_near_covered_examples():
    g = generate(bounded_degree(10, 3, 5))
    assert len(near_covered_check(g, 2 * g.max_degree(), 1)) == 1
    cover = near_covered_check(P7, 1, 5)
    assert len(cover) <= 5 and is_dominating(near_twin_graph(P7, 1), cover)
    assert near_covered_check(P7, 0, 2) is None


@given(st.integers(1, 8), st.integers(0, 3), st.integers(1, 4), st.integers(0, 10**6))
@settings(max_examples=200, deadline=None)
def test_near_covered_matches_bruteforce(n, ell, q, seed):
    g = random_graph(random.Random(seed), n)
    got = near_covered_check(g, ell, q)
    want = min_covering_bruteforce(g, ell, q)
    assert (got is None) == (want is None)
    if got is not None:
        assert len(got) <= q and is_dominating(near_twin_graph(g, ell), got)


def test_minimum_dominating_set_is_minimum():
    rng = random.Random(11)
    for _ in range(40):
        g = random_graph(rng, 8, 0.4)
        rel = near_twin_graph(g, 1)
        best = min_covering_bruteforce(g, 1, 8)
        assert len(minimum_dominating_set(rel, 8)) == len(best)


def test_near_covered_budget_guard():
    g = generate(path(40))
    with pytest.raises(BudgetExceededError):
        near_covered_check(g, 0, 6, budget=1000)
    with pytest.raises(ContractError):
        near_covered_check(g, 0, 0)


# -- conversion ---------------------------------------------------------------


def test_conversion_base_case():
    g = generate(complete(6))
    res = covered_to_uniform(g, 2, 3)
    assert (res.k, res.p) == (4, 1)


def test_conversion_disjoint_cliques():
    # three cliques: G_2 and G_4 are both the disjoint union of the three
    g = disjoint_union(generate(complete(6)), generate(complete(7)), generate(complete(8)))
    res = covered_to_uniform(g, 2, 3)
    assert (res.k, res.p) == (4, 3)
    assert res.trace[-1].case == "IIa"
    assert res.partition.index == 3


def test_conversion_path_trace():
    res = covered_to_uniform(P7, 2, 3)
    assert [s.case for s in res.trace] == ["I", "smaller", "base"]
    assert (res.k, res.p) == (32, 1)


def test_conversion_requires_covering():
    with pytest.raises(ContractError):
        covered_to_uniform(P7, 0, 2)


def test_conversion_random_twenty_vertex():
    rng = random.Random(2024)
    done = 0
    while done < 10:
        g = random_graph(rng, 20, rng.choice((0.1, 0.5, 0.9)))
        if near_covered_check(g, 1, 3) is None:
            g = generate(complement_of(bounded_degree(20, 1, rng.randrange(1000))))
            if near_covered_check(g, 1, 3) is None:
                continue
        res = covered_to_uniform(g, 1, 3)
        out = equivalence_check(near_twin_graph(g, res.k))
        assert out.is_equivalence and out.partition.index <= res.p <= 3
        done += 1


# -- dichotomy ---------------------------------------------------------------


def test_dichotomy_k66_minus_matching():
    g = perfect_matching_removed(6)
    k, part = find_uniform_parameters(g, 2, 2)
    assert k == 2 and part.as_lists() == [list(range(6)), list(range(6, 12))]
    rep = class_pair_profile(g, part, k)
    ab = rep.get(0, 1)
    assert ab.case == "dense" and ab.max_exception == 1 and not ab.qualifying
    assert rep.get(0, 0).case == "sparse" and rep.get(0, 0).max_exception == 0
    assert rep.get(1, 1).case == "sparse"


def test_dichotomy_large_bipartite_minus_matching_qualifies():
    g = perfect_matching_removed(11)
    k, part = find_uniform_parameters(g, 2, 2)
    rep = class_pair_profile(g, part, k, verify=True)
    assert all(pp.qualifying for pp in rep.pairs)
    assert rep.get(0, 1).case == "dense" and rep.get(0, 1).max_exception == 1
    assert rep.get(1, 1).case == "sparse"


def test_dichotomy_k8():
    g = generate(complete(8))
    rep = class_pair_profile(g, Partition((frozenset(range(8)),)), 2)
    pp = rep.get(0, 0)
    assert pp.case == "dense" and pp.max_exception == 1
    assert not pp.qualifying  # 8 < 5k + 1


def test_dichotomy_k12_qualifies():
    g = generate(complete(12))
    pp = class_pair_profile(g, Partition((frozenset(range(12)),)), 2).get(0, 0)
    assert pp.qualifying and pp.case == "dense" and pp.max_exception == 1


def test_dichotomy_edgeless():
    pp = class_pair_profile(edgeless(5), Partition((frozenset(range(5)),)), 0).get(0, 0)
    assert pp.case == "sparse" and pp.max_exception == 0 and pp.qualifying


def test_dichotomy_rejects_bad_partition():
    # half the vertices of a large block adjacent to the other: neither case
    g = LabeledStructure(24, frozenset((u, v) for u in range(12) for v in range(12, 24) if (u + v) % 2))
    part = Partition((frozenset(range(12)), frozenset(range(12, 24))))
    with pytest.raises(InconsistencyError):
        class_pair_profile(g, part, 1)
    with pytest.raises(ContractError):
        class_pair_profile(g, part, 1, verify=True)


@pytest.mark.parametrize("seed", range(15))
def test_exception_bound_on_generated_families(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 3)
    for g, k0, p in (
        (generate(complement_of(bounded_degree(rng.randint(30, 60), d, seed))), 2 * d + 2, 1),
        (generate(bipartite_minus(rng.randint(15, 30), rng.randint(15, 30), 1, seed)), 2, 2),
    ):
        found = find_uniform_parameters(g, k0, p)
        assert found is not None
        k, part = found
        adj = g.adjacency
        for a in part.blocks:
            for b in part.blocks:
                if k >= 1 and len(a) >= 4 * k + 2 and len(b) >= 4 * k + 2:
                    for v in b:
                        assert min(len(adj[v] & a), len(a - adj[v])) <= 2 * k
        class_pair_profile(g, part, k, verify=True)


def test_complement_of_bounded_degree_needs_two_d_plus_two():
    # two non-adjacent degree-d vertices in the complement can differ in 2d+2
    g = LabeledStructure(8, frozenset({(0, 2), (0, 3), (1, 4), (1, 5)})).complement()
    assert neighbourhood_difference(g, 0, 1) == 6
    assert find_uniform_parameters(g, 4, 1) is None
    assert find_uniform_parameters(g, 6, 1) is not None
