"""
Reducing a source to the part a scheme actually uses
====================================================

A scheme whose discussion leaves some user short of omniscience can be run
on a smaller source, obtained by per-user linear processing, on which it
does achieve omniscience.  Each step lowers H(z_V) by at least one.
"""

from importlib.resources import files

from linska import capacity, oracle, protocol
from linska.source import load_source, random_source

import numpy as np

fixtures = files("linska") / "fixtures"
s = load_source(fixtures / "running_example.json")
scheme = protocol.load_scheme(fixtures / "running_example_2bit_scheme.json", s)

print("users lacking omniscience:", [s.names[i] for i in protocol.missing_users(s, scheme)])
steps = protocol.reduce_until_omniscient(s, scheme)
for k, step in enumerate(steps, start=1):
    r = step.source
    print(f"step {k}: witness user {s.names[step.witness_user]}, H = {r.entropy(r.full_mask)}, "
          f"r_co = {capacity.r_co(r)}, still certified = {oracle.verify_scheme(r, step.scheme).certified}")
    for name, m in r.users():
        print(f"  user {name}: {m.column_vectors()}")

# chains on random sources: H strictly decreases, at most base_len steps
rng = np.random.default_rng(1)
for _ in range(5):
    src = random_source(rng, 2, 5, 4)
    sch = protocol.synthesize_optimal_ska(src)
    hs = [src.entropy(src.full_mask)] + [st.source.entropy(st.source.full_mask)
                                          for st in protocol.reduce_until_omniscient(src, sch)]
    print("H per step:", hs)
