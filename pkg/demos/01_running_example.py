"""
A four-user source and its key capacities
=========================================

Four users observe linear functions of a uniform 4-bit base x over F_2.
With no discussion they share nothing; with unlimited discussion they can
agree on one secret bit, and two bits of public discussion suffice.
"""

from importlib.resources import files

from linska import capacity
from linska.source import load_source

s = load_source(files("linska") / "fixtures" / "running_example.json")
for name, m in s.users():
    print(f"user {name} observes x @ {m.tolist()}")

# entropies are ranks of stacked observation matrices
print("H(z_V) =", s.entropy(s.full_mask))
print("H(z_i) =", [s.entropy([i]) for i in range(s.m)])

report = capacity.analyze(s)
print("cs_zero =", report.cs_zero)
print("cs      =", report.cs, "(partition minimum", report.lp_value, ")")
print("r_co    =", report.r_co)
print("r_s     =", report.r_s)
print("optimal partition:", report.optimal_partition)
print("all minimizing partitions:", ", ".join(str(p) for p in report.argmin_partitions))
print("rate vector for omniscience:", report.rate_vector)

# the reduction that attains r_s keeps users 1, 2, 4 intact and lets user 3
# keep only the sum of its two symbols
for name, c in zip(s.names, report.reducing_processors):
    print(f"user {name} processor {c.tolist()}")
