"""Exact-arithmetic computations with limit linear series on nodal curves.

Modules
-------
exactlinalg
    Rational matrices, canonical subspaces, flags, polynomials.
degree_graph
    Dual graphs, multidegree graphs, twist combinatorics, path algebra.
curve_model
    Trees of rational components with split bundles and node gluings;
    global sections of every twist; twist maps.
series
    Linked linear series and per-component limit series with all their
    predicates and conversion algorithms.
prelinked
    Tuples of subspaces indexed by a directed graph, compatible under edge
    maps; simple points and tangent spaces.
detloci
    Vanishing loci of matrices over Q[t]; degeneration loci of section
    kernels in one-parameter families.
cli
    Batch JSON interface.
"""

__version__ = "0.1.0"
