import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_eval, random_graph

from neartwin.errors import ContractError
from neartwin.interpret import (
    COPY_RELATION,
    STAR_LABEL,
    Transduction,
    apply_transduction,
    copy_structure,
    interpret,
    load_transduction,
    star_degree_bound,
    transduction_domain,
    transduction_to_interpretation,
)
from neartwin.logic import Edge, parse_formula, symmetrize
from neartwin.structure import LabeledStructure, bounded_degree, complete, generate, path


def embed_and_check(g, tau, params):
    """The star encoding reproduces the transduction on its domain vertices
    and leaves every other vertex isolated."""
    found = transduction_domain(g, tau, params)
    assert found is not None
    _, dom = found
    direct = apply_transduction(g, tau, params)
    enc = transduction_to_interpretation(tau, g, params)
    via = interpret(enc.structure, enc.psi)
    index = {v: i for i, v in enumerate(dom)}
    mapped = {(index[u], index[v]) for u, v in via.edges if u in index and v in index}
    stray = {(u, v) for u, v in via.edges if u not in index or v not in index}
    assert mapped == direct.edges and not stray
    return enc


def test_identity_interpretation():
    g = generate(bounded_degree(10, 3, 1))
    assert interpret(g, symmetrize(Edge("x", "y"))).edges == g.edges


def test_complement_of_complete_is_edgeless():
    h = interpret(generate(complete(4)), symmetrize(parse_formula("!E(x,y)")))
    assert h.n == 4 and not h.edges


def test_square_of_path():
    psi = symmetrize(parse_formula("E(x,y) | (x != y & ex z. (E(x,z) & E(z,y)))"))
    h = interpret(generate(path(5)), psi)
    assert len(h.edges) == 7
    assert h.edges == {(u, v) for u in range(5) for v in range(u + 1, 5) if v - u <= 2}


def test_interpret_labels_dropped_or_inherited():
    g = generate(path(3)).with_labels({"red": [1]})
    psi = symmetrize(Edge("x", "y"))
    assert interpret(g, psi).labels == {}
    assert interpret(g, psi, inherit=True).label("red") == {1}


def test_interpret_arity_error():
    with pytest.raises(ContractError):
        interpret(generate(path(3)), parse_formula("E(x,z)"))


def test_copy_structure_layout():
    g = generate(path(3))
    gm = copy_structure(g, 2)
    assert gm.n == 6
    assert gm.label("Q1") == {0, 1, 2} and gm.label("Q2") == {3, 4, 5}
    assert (1, 4) in gm.relations[COPY_RELATION] and (4, 4) in gm.relations[COPY_RELATION]
    assert gm.edges == {(0, 1), (1, 2), (3, 4), (4, 5)}


def test_identity_transduction():
    g = generate(bounded_degree(9, 2, 4))
    assert apply_transduction(g, Transduction()).edges == g.edges


def test_matching_transduction():
    g = generate(bounded_degree(6, 3, 2))
    tau = Transduction.from_strings(edge="R.~(x,y)", copies=2)
    h = apply_transduction(g, tau)
    assert h.n == 12 and h.edges == {(v, 6 + v) for v in range(6)}


def test_false_guard_is_undefined():
    tau = Transduction.from_strings(guard="false")
    assert apply_transduction(generate(path(4)), tau) is None
    with pytest.raises(ContractError):
        transduction_to_interpretation(tau, generate(path(4)))


def test_parameter_checks():
    tau = Transduction.from_strings(domain="L.P1(x)", parameters=1)
    with pytest.raises(ContractError):
        apply_transduction(generate(path(4)), tau, [])
    with pytest.raises(ContractError):
        apply_transduction(generate(path(4)), tau, [{7}])


def test_transduction_field_validation():
    with pytest.raises(ContractError):
        Transduction(guard=parse_formula("E(x,y)"))
    with pytest.raises(ContractError):
        Transduction(domain=parse_formula("E(x,y)"))
    with pytest.raises(ContractError):
        Transduction(copies=0)


def test_identity_star_encoding_on_path():
    g = generate(path(3))
    enc = embed_and_check(g, Transduction(), [])
    assert enc.structure.n == 6
    assert enc.structure.label(STAR_LABEL) == {3, 4, 5}
    assert interpret(enc.structure, enc.psi).edges == {(0, 1), (1, 2)}


def test_matching_star_encoding():
    g = generate(bounded_degree(5, 2, 9))
    tau = Transduction.from_strings(edge="R.~(x,y)", copies=2)
    enc = embed_and_check(g, tau, [])
    assert COPY_RELATION not in enc.structure.relations
    via = interpret(enc.structure, enc.psi)
    assert via.edges == {(v, 5 + v) for v in range(5)}


def test_parameter_restricted_domain():
    g = generate(complete(4))
    tau = Transduction.from_strings(domain="L.P1(x)", parameters=1)
    assert apply_transduction(g, tau, [{0, 1}]).edges == {(0, 1)}
    via = interpret(*transduction_to_interpretation(tau, g, [{0, 1}]))
    assert via.edges == {(0, 1)}


def test_star_encoding_degree_bound():
    for seed in range(10):
        g = generate(bounded_degree(12, 3, seed))
        for m in (1, 2, 4):
            enc = transduction_to_interpretation(Transduction(copies=m), g)
            assert enc.structure.max_degree() <= star_degree_bound(g, m)


def test_reserved_star_label():
    with pytest.raises(ContractError):
        transduction_to_interpretation(Transduction(), generate(path(2)).with_labels({"R": [0]}))


def test_load_transduction_document():
    doc = {"guard": "ex x. true", "domain": "L.P1(x) | L.Q2(x)", "edge": "E(x,y) | R.~(x,y)", "copies": 2, "parameters": 1, "params": [[0, 2]]}
    tau, params = load_transduction(json.dumps(doc))
    assert tau.copies == 2 and params == [{0, 2}]
    tau2, _ = load_transduction(json.dumps(tau.to_config() | {"symmetrize": False}))
    assert tau2 == tau
    with pytest.raises(ContractError):
        load_transduction('{"bogus": 1}')


TAUS = [
    Transduction(),
    Transduction.from_strings(edge="R.~(x,y)", copies=2),
    Transduction.from_strings(domain="L.P1(x)", edge="E(x,y)", parameters=1),
    Transduction.from_strings(domain="!L.P1(x) | L.Q2(x)", edge="E(x,y) | (R.~(x,y) & L.P1(x))", copies=2, parameters=1),
    Transduction.from_strings(edge="ex z. (E(x,z) & E(z,y) & !R.~(x,y))", copies=1),
    Transduction.from_strings(guard="ex x. L.P1(x)", domain="ex z. R.~(x,z) & L.P2(z)", edge="!E(x,y)", copies=3, parameters=2),
]


@given(st.integers(0, 10**6), st.integers(1, 8), st.sampled_from(range(len(TAUS))))
@settings(max_examples=80, deadline=None)
def test_star_round_trip(seed, n, which):
    rng = random.Random(seed)
    tau = TAUS[which]
    g = generate(bounded_degree(n, 3, seed))
    params = [{v for v in range(n) if rng.random() < 0.5} for _ in range(tau.parameter_count)]
    if apply_transduction(g, tau, params) is None:
        return
    embed_and_check(g, tau, params)


def test_apply_transduction_matches_naive():
    rng = random.Random(1)
    for _ in range(30):
        g = random_graph(rng, 5)
        tau = rng.choice(TAUS)
        params = [{v for v in range(5) if rng.random() < 0.5} for _ in range(tau.parameter_count)]
        found = transduction_domain(g, tau, params)
        if found is None:
            continue
        gm, dom = found
        assert dom == [v for v in range(gm.n) if naive_eval(gm, tau.domain, {"x": v})]
        h = apply_transduction(g, tau, params)
        want = {
            (i, j)
            for i, u in enumerate(dom)
            for j, v in enumerate(dom)
            if i < j and naive_eval(gm, tau.edge, {"x": u, "y": v})
        }
        assert h.edges == want


def test_interpret_is_simple():
    rng = random.Random(4)
    for _ in range(20):
        g = random_graph(rng, 7)
        h = interpret(g, symmetrize(parse_formula("ex z. E(x,z) & !E(y,z)")))
        assert isinstance(h, LabeledStructure) and all(u < v for u, v in h.edges)
