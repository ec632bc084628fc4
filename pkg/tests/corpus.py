"""Seeded random source corpora shared by the test modules."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from linska.source import load_source, random_source

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "linska" / "fixtures"
SOURCE_FIXTURES = ["running_example.json", "identical_observations.json", "independent_pair.json"]


def fixture(name: str):
    return load_source(FIXTURES / name)


def duality_corpus(n: int = 200, seed: int = 4):
    """Sources over F_2 and F_3 with base length <= 5 and 2 to 4 users."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        q = (2, 3)[k % 2]
        out.append(random_source(rng, q, int(rng.integers(1, 6)), int(rng.integers(2, 5))))
    return out


def tiny_corpus(n: int = 50, seed: int = 5):
    """Binary sources inside the oracle envelope: base length <= 4, at most 7 observation symbols."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        s = random_source(rng, 2, int(rng.integers(1, 5)), int(rng.integers(2, 5)))
        if sum(s.t) <= 7:
            out.append(s)
    return out


def fuzz_corpus(n: int = 100, seed: int = 6):
    """Binary sources with base length <= 5 and 2 to 4 users."""
    rng = np.random.default_rng(seed)
    return [random_source(rng, 2, int(rng.integers(1, 6)), int(rng.integers(2, 5))) for _ in range(n)]
