import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import all_graphs, naive_eval, naive_interpret, random_formula, random_graph, random_sentence

from neartwin.errors import ContractError, FormulaSyntaxError
from neartwin.interpret import interpret
from neartwin.logic import (
    And,
    Edge,
    Eq,
    Exists,
    Forall,
    Implies,
    Label,
    NameSupply,
    Not,
    Or,
    Rel,
    TRUE,
    alpha_equivalent,
    binary_relation,
    evaluate,
    formula_size,
    free_variables,
    parse_formula,
    quantifier_rank,
    render_formula,
    rewrite_edges,
    substitute,
    symmetrize,
)
from neartwin.structure import LabeledStructure, complete, generate, path, successor_from_order


def bound_twice(f, bound=frozenset()) -> bool:
    if isinstance(f, (Exists, Forall)):
        return f.var in bound or bound_twice(f.body, bound | {f.var})
    if isinstance(f, Not):
        return bound_twice(f.body, bound)
    if isinstance(f, (And, Or, Implies)):
        return bound_twice(f.left, bound) or bound_twice(f.right, bound)
    return False


# -- parsing ------------------------------------------------------------------


def test_parse_edge_atom():
    f = parse_formula("E(x,y)")
    assert f == Edge("x", "y") and free_variables(f) == {"x", "y"}


def test_parse_common_red_neighbour():
    f = parse_formula("ex z. (E(x,z) & E(y,z) & L.red(z))")
    assert isinstance(f, Exists) and f.var == "z"
    assert free_variables(f) == {"x", "y"}
    assert quantifier_rank(f) == 1


def test_parse_unclosed_paren():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("all x. ex y. E(x,y")
    assert info.value.position is not None


@pytest.mark.parametrize("text", ["", "E(x)", "ex . E(x,x)", "x ==y", "L.(x)", "E(x,y) &", "(E(x,y)))", "ex true. x=x", "x @ y"])
def test_parse_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


def test_precedence():
    f = parse_formula("!a = b & c = d | e = f -> g = h -> i = i")
    assert isinstance(f, Implies) and isinstance(f.right, Implies)
    assert isinstance(f.left, Or) and isinstance(f.left.left, And)
    assert isinstance(f.left.left.left, Not)


def test_quantifier_scope_extends_right():
    f = parse_formula("ex x. E(x,y) | E(y,x)")
    assert isinstance(f, Exists) and isinstance(f.body, Or)


def test_neq_and_relations():
    f = parse_formula("x != y & R.~(x,y) & R.succ(y,x)")
    assert f.left.left == Not(Eq("x", "y"))
    assert f.left.right == Rel("~", "x", "y")
    assert f.right == Rel("succ", "y", "x")


def test_parse_freshens_shadowed_binders():
    f = parse_formula("ex x. (E(x,y) & ex x. E(x,y))")
    assert not bound_twice(f)
    f = parse_formula("ex y. E(x,y) & y = y")  # the quantifier swallows the trailing y = y
    assert free_variables(f) == {"x"}
    g = parse_formula("E(x,y) & ex x. E(x,x)")
    assert free_variables(g) == {"x", "y"}
    assert not bound_twice(g, free_variables(g))


@given(st.integers(0, 10**6), st.integers(0, 3))
@settings(max_examples=200)
def test_render_parse_round_trip(seed, rank):
    f = random_formula(random.Random(seed), rank, ("x", "y"), ("red", "blue"))
    assert alpha_equivalent(parse_formula(render_formula(f)), f)


def test_alpha_equivalence():
    assert alpha_equivalent(parse_formula("ex a. E(a,x)"), parse_formula("ex b. E(b,x)"))
    assert not alpha_equivalent(parse_formula("ex a. E(a,x)"), parse_formula("ex b. E(b,y)"))
    assert not alpha_equivalent(parse_formula("ex a. ex b. E(a,b)"), parse_formula("ex a. ex b. E(b,a)"))
    assert not alpha_equivalent(parse_formula("ex a. L.red(a)"), parse_formula("ex a. L.blue(a)"))


# -- evaluation ---------------------------------------------------------------


def test_k8_clique_sentence():
    assert evaluate(generate(complete(8)), parse_formula("all x. all y. (x=y | E(x,y))"))


def test_path_has_no_isolated_vertex():
    assert not evaluate(generate(path(7)), parse_formula("ex x. all y. !E(x,y)"))


@pytest.mark.parametrize("n", range(1, 5))
def test_successor_arc_exists_iff_two_vertices(n):
    s = LabeledStructure(n, relations={"succ": successor_from_order(range(n))})
    assert evaluate(s, parse_formula("ex x. ex y. R.succ(x,y)")) == (n >= 2)


def test_missing_relation_is_an_error():
    with pytest.raises(ContractError):
        evaluate(generate(path(3)), parse_formula("ex x. ex y. R.succ(x,y)"))


def test_missing_label_is_empty():
    assert not evaluate(generate(path(3)), parse_formula("ex x. L.nobody(x)"))


def test_unassigned_free_variable():
    with pytest.raises(ContractError):
        evaluate(generate(path(3)), parse_formula("E(x,y)"), {"x": 0})
    assert evaluate(generate(path(3)), parse_formula("E(x,y)"), {"x": 0, "y": 1})


def test_empty_structure_semantics():
    s = LabeledStructure(0)
    assert evaluate(s, parse_formula("all x. false"))
    assert not evaluate(s, parse_formula("ex x. true"))


@given(st.integers(0, 10**6), st.integers(0, 6))
@settings(max_examples=300, deadline=None)
def test_evaluator_matches_naive(seed, n):
    rng = random.Random(seed)
    g = random_graph(rng, n).with_labels({"red": [v for v in range(n) if rng.random() < 0.5]})
    f = random_sentence(rng, 3, ("red",))
    assert evaluate(g, f) == naive_eval(g, f)


def test_large_formula_memo_path_matches_naive():
    # deep formulas with few free variables exercise the memoised closures
    rng = random.Random(5)
    for _ in range(60):
        g = random_graph(rng, 6)
        f = And(random_sentence(rng, 3), Or(random_sentence(rng, 3), random_sentence(rng, 2)))
        f = Exists("q", And(Eq("q", "q"), f))
        if formula_size(f) >= 12:
            assert evaluate(g, f) == naive_eval(g, f)


# -- substitution and symmetrization ---------------------------------------------


def test_substitute_avoids_capture():
    f = parse_formula("ex y. E(x,y)")
    g = substitute(f, {"x": "y"})
    assert free_variables(g) == {"y"}
    s = generate(path(3))
    for v in range(3):
        assert evaluate(s, g, {"y": v}) == evaluate(s, f, {"x": v})


def test_simultaneous_swap():
    f = parse_formula("E(x,y) & L.red(x)")
    assert substitute(f, {"x": "y", "y": "x"}) == parse_formula("E(y,x) & L.red(y)")


def test_name_supply_is_deterministic():
    a, b = NameSupply({"z", "z_1"}), NameSupply({"z", "z_1"})
    assert [a.fresh("z") for _ in range(3)] == [b.fresh("z") for _ in range(3)] == ["z_2", "z_3", "z_4"]


def test_symmetrize_edge_is_edge():
    psi = symmetrize(Edge("x", "y"))
    for g in all_graphs(4):
        assert naive_interpret(g, psi) == g.edges


def test_symmetrize_asymmetric_formula():
    psi = symmetrize(parse_formula("ex z. E(x,z)"))
    for n in range(1, 6):
        for g in all_graphs(n):
            rel = binary_relation(g, psi)
            assert all((v, u) in rel for u, v in rel)
            assert all(u != v for u, v in rel)


def test_symmetrize_equality_is_empty():
    psi = symmetrize(parse_formula("x = y"))
    for g in all_graphs(3):
        assert not binary_relation(g, psi)


def test_symmetrize_arity():
    with pytest.raises(ContractError):
        symmetrize(parse_formula("E(x,z)"))


def test_symmetrize_swap_is_capture_free():
    psi = symmetrize(parse_formula("ex y_1. E(x,y_1) & !E(y,y_1)"))
    g = generate(path(4))
    rel = binary_relation(g, psi)
    assert (0, 2) in rel and (2, 0) in rel


# -- rewriting ------------------------------------------------------------------


def test_rewrite_identity():
    phi = parse_formula("ex x. ex y. E(x,y)")
    out = rewrite_edges(phi, symmetrize(Edge("x", "y")))
    for g in all_graphs(3):
        assert evaluate(g, out) == evaluate(g, phi)


def test_rewrite_without_edges_unchanged():
    phi = parse_formula("ex a. all b. (a = b | L.red(b))")
    assert alpha_equivalent(rewrite_edges(phi, symmetrize(parse_formula("ex z. E(x,z) & E(z,y)"))), phi)


def test_rewrite_freshens_each_occurrence():
    psi = symmetrize(parse_formula("ex z. E(x,z) & E(z,y)"))
    phi = parse_formula("ex z. ex w. E(z,w) & E(w,z)")
    out = rewrite_edges(phi, psi)
    assert not bound_twice(out)
    assert quantifier_rank(out) <= quantifier_rank(phi) + quantifier_rank(psi)


def test_rewrite_arity():
    with pytest.raises(ContractError):
        rewrite_edges(TRUE, parse_formula("E(x,w)"))


PSIS = [
    symmetrize(parse_formula("ex z. E(x,z) & E(z,y)")),
    symmetrize(parse_formula("!E(x,y)")),
    symmetrize(parse_formula("E(x,y) | ex z. (E(x,z) & L.red(z) & E(z,y))")),
]


@given(st.integers(0, 10**6), st.integers(0, 12), st.sampled_from(PSIS))
@settings(max_examples=150, deadline=None)
def test_rewrite_soundness_random(seed, n, psi):
    rng = random.Random(seed)
    g = random_graph(rng, n, rng.random()).with_labels({"red": [v for v in range(n) if rng.random() < 0.3]})
    phi = random_sentence(rng, 2)
    assert evaluate(g, rewrite_edges(phi, psi)) == evaluate(interpret(g, psi), phi)


def test_rewrite_soundness_twenty_vertices():
    rng = random.Random(77)
    for _ in range(20):
        g = random_graph(rng, 20, rng.random())
        psi = rng.choice(PSIS[:2])
        phi = random_sentence(rng, 2)
        assert evaluate(g, rewrite_edges(phi, psi)) == evaluate(interpret(g, psi), phi)


def test_binary_relation_matches_naive():
    psi = PSIS[0]
    for g in all_graphs(4):
        pairs = binary_relation(g, psi)
        want = {(u, v) for u, v in product(range(4), repeat=2) if naive_eval(g, psi, {"x": u, "y": v})}
        assert pairs == want
