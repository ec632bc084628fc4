"""
Synthesizing and verifying key agreement schemes
================================================

Build an omniscience discussion, extract a key from it, then build the
optimal scheme that uses less discussion.  Every scheme is checked by
enumerating all base realizations.
"""

from importlib.resources import files

from linska import oracle, protocol
from linska.source import load_source

fixtures = files("linska") / "fixtures"
s = load_source(fixtures / "running_example.json")

# omniscience at the rate vector (1, 1, 1, 0) leaves one key symbol
d = protocol.synthesize_omniscience(s, (1, 1, 1, 0))
scheme = protocol.extract_key(s, d)
rep = oracle.verify_scheme(s, scheme)
print("omniscience scheme: discussion", scheme.discussion_length, "key", scheme.key_length,
      "certified", rep.certified)

# the optimal scheme reaches the same key with two symbols
best = protocol.synthesize_optimal_ska(s)
rep = oracle.verify_scheme(s, best)
print("optimal scheme: discussion", best.discussion_length, "key", best.key_length,
      "mode", best.mode, "certified", rep.certified)
print("omniscient users:", [n for n, ok in zip(s.names, rep.omniscient) if ok])

# the hand-written 2-bit scheme: key x1, user 1 sends x2+x3, user 2 sends x2+x4
hand = protocol.load_scheme(fixtures / "running_example_2bit_scheme.json", s)
for x in ([0, 0, 0, 0], [1, 0, 1, 1], [1, 1, 1, 0]):
    t = protocol.execute(s, hand, x)
    print("x =", x, "discussion", [f.tolist() for f in t.discussion], "key", t.key.tolist())

# a tampered key matrix is caught with a counterexample realization
from linska.gf import GfMatrix

bad = protocol.SkaScheme(hand.discussion, GfMatrix.unit(4, 1, 2))
rep = oracle.verify_scheme(s, bad)
print("tampered key certified:", rep.certified, rep.counterexamples)
