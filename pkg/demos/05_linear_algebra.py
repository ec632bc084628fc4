"""
Linear algebra over prime fields
================================

Echelon forms, ranks, nullspaces and subspace intersections over F_q, the
building blocks of every capacity computation.
"""

import numpy as np

from linska import gf
from linska.gf import GfMatrix

a = GfMatrix([[1, 2, 0], [2, 1, 1], [0, 0, 1]], 3)
r, pivots = gf.rref(a)
print("rref over F_3:\n", r.data, "pivots", pivots)
print("rank", gf.rank(a), "right nullspace", gf.right_nullspace(a).tolist())

# intersection of two column spaces in F_2^4
u = GfMatrix([[1, 0], [0, 1], [1, 0], [0, 0]], 2)
v = GfMatrix([[1, 0], [1, 1], [1, 0], [0, 1]], 2)
print("intersection basis", gf.column_space_intersection(u, v).tolist())

# subspaces of F_2^d: 1, 2, 5, 16, 67
print([sum(1 for _ in gf.enumerate_subspaces(GfMatrix.identity(d, 2))) for d in range(5)])

# completing a discussion matrix to a key matrix: [T | N] has full rank
t = GfMatrix(np.array([[1, 0], [1, 1], [0, 1], [0, 0]]), 2)
n = gf.complete_to_full_column_rank(t)
print("N =", n.tolist(), "rank [T|N] =", gf.rank(gf.hstack([t, n])))
