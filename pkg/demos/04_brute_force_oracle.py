"""
Ground truth by exhaustive search
=================================

For tiny sources the longest key reachable with at most r symbols of
discussion can be found by trying every discussion subspace.  This gives
the whole curve c_S(r), of which the library computes only the endpoints.
"""

from importlib.resources import files

from linska import capacity, oracle
from linska.gf import GfMatrix
from linska.source import FiniteLinearSource, load_source

s = load_source(files("linska") / "fixtures" / "running_example.json")
print("common functions:", oracle.brute_force_gk(s))
print("c_S(r), r = 0..4:", [oracle.brute_force_cs_of_r(s, r) for r in range(5)])
print("rate (0,0,0,0):", oracle.check_rate_vector(s, (0, 0, 0, 0)))
print("rate (1,1,1,0):", oracle.check_rate_vector(s, (1, 1, 1, 0)))

# Over F_2 the partition formula can promise more than one-shot linear
# schemes deliver.  Three users holding y1, y2, y1+y2 and a fourth holding
# both: the formula says one key symbol, but no single binary broadcast
# completes all three singletons.  Over F_3, y1 + 2*y2 does.
for q in (2, 3):
    cols = [[[1, 0]], [[0, 1]], [[1, 1]], [[1, 0], [0, 1]]]
    t = FiniteLinearSource(q, 2, [(str(i + 1), GfMatrix.from_columns(c, 2, q)) for i, c in enumerate(cols)])
    print(f"q={q}: formula cs = {capacity.cs_unconstrained(t)[0]}, "
          f"brute force c_S(r) for r = 0..2: {[oracle.brute_force_cs_of_r(t, r) for r in range(3)]}")
