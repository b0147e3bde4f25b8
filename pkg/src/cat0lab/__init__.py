"""cat0lab: exact geometry and boundary-convergence experiments on CAT(0)
model spaces (weighted Cayley trees, tree x line products, free-product
gluing complexes) carrying geometric group actions."""

__version__ = "0.1.0"
