"""
Graph connectivity metrics
==========================

Positions become a weighted graph through a distance function. The Fiedler
value (second Laplacian eigenvalue) says how well connected the graph is,
and the simple-path count says how many relay routes exist.
"""

from jcmp import StepWeightParams, algebraic_connectivity, build_graph, num_simple_paths, step_weight

nodes = [(100, 40), (50, 20), (0, 0)]   # sensing robot, router, base
for x_th in (50.0, 60.0, 120.0):
    g = build_graph(nodes, lambda d: step_weight(d, StepWeightParams(x_th)))
    print(f"x_th = {x_th:5.1f} m:  lambda2 = {algebraic_connectivity(g):.3f}, "
          f"paths sensing->base = {num_simple_paths(g, 0, 2)}")
    print(g)

# a smooth weight keeps the metric informative as robots drift apart
for router in ((50, 20), (70, 30), (90, 36)):
    g = build_graph([nodes[0], router, nodes[2]], lambda d: 1.0 / (1.0 + (d / 40.0) ** 2))
    print(f"router at {router}: lambda2 = {algebraic_connectivity(g):.4f}")
