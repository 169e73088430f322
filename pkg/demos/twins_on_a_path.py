"""
Near-twin classes on a seven-vertex path
=========================================

Two vertices are near-k-twins when their neighbourhoods differ in at most
k vertices. On a path a-b-c-d-e-f-g this is an equivalence for k = 1 and
breaks for k = 2.
"""

from neartwin.structure import generate, path
from neartwin.twins import equivalence_check, find_uniform_parameters, near_twin_graph

names = "abcdefg"
g = generate(path(7))

# k = 1: the two ends pair up with their second neighbours
one = equivalence_check(near_twin_graph(g, 1))
print("k=1 equivalence:", one.is_equivalence)
print("classes:", [[names[v] for v in block] for block in one.partition.as_lists()])

# k = 2: b~d and d~f hold but b~f does not
two = equivalence_check(near_twin_graph(g, 2))
print("k=2 equivalence:", two.is_equivalence)
print("violating triple:", tuple(names[v] for v in two.counterexample))

# the search for the smallest working k under a class budget
k, part = find_uniform_parameters(g, 2, 5)
print(f"(2,5)-near-uniform with k={k} and {part.index} classes")
