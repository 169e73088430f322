"""
Gadgets from 3-colourings
==========================

Each vertex and edge of a 4-regular graph becomes a small gadget. A
colouring picks which dashed edges survive in a degree-3 certificate, and
one fixed formula recovers the full gadget graph from the certificate
exactly when the colouring is proper.
"""

from neartwin.gadgets import build_certificate, build_hardness_instance, interpret_psi0, verify_reduction
from neartwin.structure import LabeledStructure, complete, generate

k44 = LabeledStructure(8, frozenset((u, v) for u in range(4) for v in range(4, 8)))
inst = build_hardness_instance(k44)
print("gadget graph:", inst.H.n, "vertices, max degree", inst.H.max_degree())

good = dict(enumerate((1, 1, 1, 1, 2, 2, 2, 2)))
cert = build_certificate(inst, good)
print("certificate max degree:", cert.max_degree())
print("proper colouring recovered:", interpret_psi0(inst, cert).edges == inst.H.edges)

bad = dict(enumerate((1, 1, 1, 1, 1, 2, 2, 2)))
print("improper colouring recovered:", interpret_psi0(inst, build_certificate(inst, bad)).edges == inst.H.edges)

# exhaustive check over every colouring of K5
rep = verify_reduction(build_hardness_instance(generate(complete(5))))
print("K5:", len(rep.checks), "colourings,", len(rep.accepted), "accepted, consistent:", rep.consistent)
