"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line; the lines are printed in the
pytest terminal summary, or directly when this file is run as a script::

    python tests/test_acceptance.py
"""

from __future__ import annotations

import itertools
import json
import math
import time

import numpy as np
from click.testing import CliRunner

from linska import capacity, cli, gf, oracle, protocol
from linska.gf import GfMatrix
from linska.source import random_source

from corpus import FIXTURES, SOURCE_FIXTURES, duality_corpus, fixture, fuzz_corpus, tiny_corpus

# runtime limits in seconds
LIMIT_REPRODUCTION = 5.0
LIMIT_SYNTHESIS = 1.0
LIMIT_DUALITY = 60.0
LIMIT_ORACLE = 600.0

RESULTS: dict[int, str] = {}

RUNNING = str(FIXTURES / "running_example.json")
TWO_BIT = str(FIXTURES / "running_example_2bit_scheme.json")


def record(n: int, ok: bool, detail: str):
    RESULTS[n] = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    assert ok, RESULTS[n]


def invoke(*args):
    result = CliRunner().invoke(cli.main, [str(a) for a in args])
    return result.exit_code, result.output


def test_criterion_1_running_example_reproduction():
    start = time.perf_counter()
    code, out = invoke("analyze", RUNNING, "--format", "machine")
    elapsed = time.perf_counter() - start
    res = json.loads(out)["result"]
    values = (res["cs_zero"], res["cs"], res["r_co"], res["r_s"])
    ok = (
        code == 0
        and values == (0, 1, 3, 2)
        and [["1", "2", "3"], ["4"]] in res["argmin_partitions"]
        and elapsed < LIMIT_REPRODUCTION
    )
    record(1, ok, f"(cs_zero, cs, r_co, r_s) = {values}, {{{{1,2,3}},{{4}}}} among argmins, {elapsed:.2f}s")


def test_criterion_2_end_to_end_synthesis(tmp_path):
    start = time.perf_counter()
    out = tmp_path / "scheme.json"
    code, text = invoke("synthesize", RUNNING, "--out", out, "--format", "machine")
    res = json.loads(text)["result"]
    verify_code, _ = invoke("verify", RUNNING, out)
    hand_code, hand_text = invoke("verify", RUNNING, TWO_BIT, "--format", "machine")
    elapsed = time.perf_counter() - start
    hand = json.loads(hand_text)["result"]
    lacking = sorted(name for name, flag in hand["omniscient"].items() if not flag)
    ok = (
        code == 0
        and res["verification"]["certified"]
        and (res["discussion_length"], res["key_length"]) == (2, 1)
        and verify_code == 0
        and hand_code == 0
        and hand["certified"]
        and lacking == ["1", "2", "4"]
        and elapsed < LIMIT_SYNTHESIS
    )
    record(
        2, ok,
        f"synthesized (r, k) = ({res['discussion_length']}, {res['key_length']}), verify exit {verify_code}; "
        f"2-bit scheme exit {hand_code}, non-omniscient users {lacking}, {elapsed:.2f}s",
    )


def test_criterion_3_reduction_reproduction():
    code, text = invoke("reduce", RUNNING, TWO_BIT, "--format", "machine")
    res = json.loads(text)["result"]
    s = fixture("running_example.json")
    scheme = protocol.load_scheme(TWO_BIT, s)
    steps = protocol.reduce_until_omniscient(s, scheme)
    still = bool(steps) and oracle.verify_scheme(steps[-1].source, steps[-1].scheme).certified
    ok = code == 0 and res["steps"] == 1 and res["final_h"] == 3 and res["final_r_co"] == 2 and still
    record(3, ok, f"steps={res['steps']}, H(z'_V)={res['final_h']}, r_co(z')={res['final_r_co']}, scheme certifies: {still}")


def test_criterion_4_duality_identity():
    start = time.perf_counter()
    bad = []
    corpus = duality_corpus(200)
    for k, s in enumerate(corpus):
        h = s.entropy(s.full_mask)
        cs, lp, _ = capacity.cs_unconstrained(s)
        dual = capacity.dual_lp_value(s)
        if capacity.r_co(s) != h - cs or h - math.floor(lp) != math.ceil(dual):
            bad.append(k)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < LIMIT_DUALITY
    record(4, ok, f"{len(corpus) - len(bad)}/{len(corpus)} sources satisfy both identities, {elapsed:.2f}s")


def test_criterion_5_oracle_agreement():
    start = time.perf_counter()
    bad, rs_checked = [], 0
    corpus = tiny_corpus(50)
    for k, s in enumerate(corpus):
        report = capacity.analyze(s)
        ok = report.cs_zero == oracle.brute_force_gk(s)
        ok &= report.cs == oracle.brute_force_cs_of_r(s, report.r_co)
        if report.r_s is not None:
            rs_checked += 1
            ok &= oracle.brute_force_cs_of_r(s, report.r_s) == report.cs
            if report.r_s > 0:
                ok &= oracle.brute_force_cs_of_r(s, report.r_s - 1) < report.cs
        if not ok:
            bad.append(k)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < LIMIT_ORACLE
    record(
        5, ok,
        f"{len(corpus) - len(bad)}/{len(corpus)} sources agree with brute force "
        f"(r_s checked on {rs_checked}), failing indices {bad}, {elapsed:.2f}s",
    )


def test_criterion_6_certification_fuzz():
    certified, failures = 0, []
    corpus = fuzz_corpus(100)
    for k, s in enumerate(corpus):
        try:
            scheme = protocol.synthesize_optimal_ska(s)
        except Exception as exc:  # recorded, not hidden
            failures.append(f"{k}:{type(exc).__name__}")
            continue
        rep = oracle.verify_scheme(s, scheme)
        if rep.certified:
            certified += 1
        else:
            failures.append(f"{k}:uncertified")
    record(6, certified == len(corpus), f"{certified}/{len(corpus)} certified, failures {failures}")


def _span(m: GfMatrix) -> frozenset:
    out = set()
    for coeffs in itertools.product(range(m.q), repeat=m.cols):
        out.add(tuple(int(v) for v in (m.data @ np.array(coeffs, dtype=np.int64)) % m.q) if m.cols else (0,) * m.rows)
    return frozenset(out)


def test_criterion_7_linear_algebra_properties():
    checks = {}
    # rref idempotence: every 2x3 binary and 2x2 ternary matrix, plus seeded larger ones
    mats = [GfMatrix(np.array(v).reshape(2, 3), 2) for v in itertools.product(range(2), repeat=6)]
    mats += [GfMatrix(np.array(v).reshape(2, 2), 3) for v in itertools.product(range(3), repeat=4)]
    rng = np.random.default_rng(7)
    mats += [GfMatrix(rng.integers(0, q, size=(4, 5)), q) for q in (2, 3) for _ in range(300)]
    checks["rref idempotence"] = all(gf.rref(gf.rref(m)[0])[0] == gf.rref(m)[0] for m in mats)
    # Zassenhaus: intersection equals the brute-force set intersection, dimensions add up
    zass = True
    for q in (2, 3):
        for ell in range(1, 5):
            for _ in range(60):
                a = GfMatrix(rng.integers(0, q, size=(ell, int(rng.integers(0, 4)))), q)
                b = GfMatrix(rng.integers(0, q, size=(ell, int(rng.integers(0, 4)))), q)
                inter = gf.column_space_intersection(a, b)
                zass &= _span(inter) == _span(a) & _span(b)
                zass &= gf.rank(a) + gf.rank(b) == gf.rank(gf.hstack([a, b], rows=ell, q=q)) + gf.rank(inter)
    checks["Zassenhaus law"] = bool(zass)
    counts = [len(list(gf.enumerate_subspaces(GfMatrix.identity(d, 2), max_dim=6))) for d in range(5)]
    checks["G_2(d) counts"] = counts == [1, 2, 5, 16, 67]
    sub = True
    for _ in range(200):
        q = int(rng.choice([2, 3]))
        s = random_source(rng, q, int(rng.integers(1, 6)), int(rng.integers(2, 5)))
        h = s.entropy_table()
        full = s.full_mask
        sub &= all(h[a] + h[b] >= h[a | b] + h[a & b] for a in range(full + 1) for b in range(full + 1))
    checks["rank submodularity"] = bool(sub)
    failed = [k for k, v in checks.items() if not v]
    record(7, not failed, f"{len(checks) - len(failed)}/{len(checks)} property groups hold, failing {failed}")


def test_criterion_8_determinism():
    differing = []
    for name in SOURCE_FIXTURES:
        path = FIXTURES / name
        one = invoke("analyze", path, "--format", "machine", "--workers", "1")
        eight = invoke("analyze", path, "--format", "machine", "--workers", "8")
        if one != eight or one[0] != 0:
            differing.append(name)
    record(8, not differing, f"{len(SOURCE_FIXTURES) - len(differing)}/{len(SOURCE_FIXTURES)} fixtures byte-identical across 1 and 8 workers")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for fn in tests:
        try:
            if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            pass
    for n in sorted(RESULTS):
        print(RESULTS[n])
