"""
Sentences with a successor relation
====================================

A sentence may mention R.succ, a Hamiltonian successor path over the
vertices. Its answer is meaningful only when it does not depend on the
chosen order.
"""

from itertools import permutations

from neartwin.decompose import evaluate_with_order, successor_invariant_check
from neartwin.logic import parse_formula
from neartwin.structure import LabeledStructure, complete, generate

h = generate(complete(12))
phi = parse_formula("ex x. ex y. R.succ(x,y)")
rep = successor_invariant_check(h, phi, 2, 1, trials=8, seed=1)
print("has a successor arc:", rep.verdict, "| invariant over", len(rep.orders), "orders:", rep.invariant)

# one edge among four vertices: whether it lies on the path depends on the order
small = LabeledStructure(4, frozenset({(0, 1)}))
sensitive = parse_formula("ex x. ex y. (R.succ(x,y) & E(x,y))")
values = [evaluate_with_order(small, sensitive, order) for order in permutations(range(4))]
print(f"edge on the path in {sum(values)} of {len(values)} orders")
print("sampled check:", successor_invariant_check(small, sensitive, 2, 3, trials=20).invariant)
