"""
Transductions and their star encoding
======================================

A transduction expands a graph with parameter labels, makes m copies and
interprets a new graph on a definable domain. The star encoding replays
the same result as a single interpretation on a bounded-degree graph.
"""

from neartwin.interpret import Transduction, apply_transduction, interpret, transduction_to_interpretation
from neartwin.structure import generate, path

g = generate(path(5))

# two copies joined by a perfect matching between copies of the same vertex
tau = Transduction.from_strings(edge="R.~(x,y)", copies=2)
h = apply_transduction(g, tau)
print("matching:", sorted(h.edges))

# the square of the path, restricted to a parameter set
square = Transduction.from_strings(domain="L.P1(x)", edge="E(x,y) | ex z. (E(x,z) & E(z,y))", parameters=1)
params = [{0, 1, 2, 3}]
print("square on P1:", sorted(apply_transduction(g, square, params).edges))

enc = transduction_to_interpretation(square, g, params)
via = interpret(enc.structure, enc.psi)
print("encoded structure:", enc.structure.n, "vertices, max degree", enc.structure.max_degree())
print("same edges through the encoding:", sorted(via.edges))
