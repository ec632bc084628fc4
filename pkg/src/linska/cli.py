"""Command-line front end.

Every command reads a source file (and, where needed, a scheme file), runs
one library routine and prints either a human-readable summary or, with
``--format machine``, a single JSON document that records the tool version,
the result-relevant configuration and the source digest.

Exit codes
----------
0  success
1  certification failure (scheme does not verify, rate vector infeasible)
2  parse, validation or dimension error in an input file
3  budget or enumeration cap exceeded (partial report flagged ``incomplete``)
4  internal inconsistency, including a synthesized scheme that fails to verify

Every option can also be set through an environment variable named
``LINSKA_`` plus the option name in upper case with dashes as underscores,
e.g. ``LINSKA_WORKERS=8`` or ``LINSKA_FORMAT=machine``.
"""

from __future__ import annotations

import functools
import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import __version__, capacity, oracle, protocol
from .config import RunConfig
from .errors import (
    DimensionMismatch,
    EnumerationCapExceeded,
    InternalInconsistency,
    NotOmniscient,
    NoWitness,
    ParseError,
    RateVectorInfeasible,
    SearchBudgetExceeded,
    ValidationError,
)
from .gf import GfMatrix
from .source import FiniteLinearSource, load_source, source_digest, source_to_dict

EXIT_OK = 0
EXIT_UNCERTIFIED = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4

ENV_PREFIX = "LINSKA"


class CommandFailed(Exception):
    """Carries an exit code and an already-built report out of a command body."""

    def __init__(self, code: int, payload: dict | None = None):
        super().__init__(code)
        self.code = code
        self.payload = payload


def _env(name: str) -> str:
    return f"{ENV_PREFIX}_{name.upper().replace('-', '_')}"


def _run_options(fn):
    """Options shared by every command."""
    defaults = RunConfig()
    options = [
        click.option("--seed", type=int, default=defaults.seed, show_default=True, envvar=_env("seed"),
                      help="Seed for randomized synthesis."),
        click.option("--workers", type=click.IntRange(min=1), default=defaults.worker_count, show_default=True,
                     envvar=_env("workers"), help="Worker processes for the search."),
        click.option("--format", "output_format", type=click.Choice(["human", "machine"]),
                     default=defaults.output_format, show_default=True, envvar=_env("format")),
        click.option("--out", type=click.Path(dir_okay=True, path_type=Path), default=None, envvar=_env("out"),
                     help="Write the main artifact (report, scheme, reduced sources) here."),
        click.option("--partition-cap", type=click.IntRange(min=1), default=defaults.partition_cap,
                     show_default=True, envvar=_env("partition-cap"), help="Largest user count for partition scans."),
        click.option("--subspace-cap", type=click.IntRange(min=1), default=defaults.subspace_dim_cap,
                     show_default=True, envvar=_env("subspace-cap"),
                     help="Largest observation dimension for subspace enumeration."),
        click.option("--enum-cap", type=click.IntRange(min=1), default=defaults.enumeration_cap,
                     show_default=True, envvar=_env("enum-cap"), help="Largest q^l for exhaustive verification."),
        click.option("--oracle-cap", type=click.IntRange(min=1), default=defaults.oracle_cap,
                     show_default=True, envvar=_env("oracle-cap"), help="Candidate-evaluation cap for cs-of-r."),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


def _config(kw: dict) -> RunConfig:
    return RunConfig(
        seed=kw.pop("seed"),
        partition_cap=kw.pop("partition_cap"),
        subspace_dim_cap=kw.pop("subspace_cap"),
        enumeration_cap=kw.pop("enum_cap"),
        oracle_cap=kw.pop("oracle_cap"),
        worker_count=kw.pop("workers"),
        output_format=kw.pop("output_format"),
    )


# ---------------------------------------------------------------------------
# rendering

def _frac(x: Fraction | None) -> str | None:
    return None if x is None else str(x)


def _matrix(m: GfMatrix | None):
    return None if m is None else m.tolist()


def _envelope(command: str, config: RunConfig, s: FiniteLinearSource | None, result: dict) -> dict:
    return {
        "tool": "linska",
        "version": __version__,
        "command": command,
        "config": config.recorded(),
        "source_digest": None if s is None else source_digest(s),
        "result": result,
    }


def _human(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, v in value.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_human(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{key}:")
            for item in v:
                lines.extend(_human(item, indent + 1))
                lines.append("")
        else:
            lines.append(f"{pad}{key}: {json.dumps(v) if isinstance(v, (list, bool)) or v is None else v}")
    return lines


def _emit(config: RunConfig, document: dict):
    if config.output_format == "machine":
        click.echo(json.dumps(document, sort_keys=True, separators=(",", ":")))
    else:
        click.echo(f"linska {document['version']}  {document['command']}")
        if document["source_digest"]:
            click.echo(f"source sha256: {document['source_digest']}")
        click.echo("\n".join(_human(document["result"])).rstrip())


def _command(name: str):
    """Wrap a command body: map library errors to exit codes and emit the report."""

    def wrap(body):
        @functools.wraps(body)
        def run(**kw):
            config = _config(kw)
            s = None
            try:
                s = load_source(kw.pop("source_path"))
                result = body(s, config, **kw)
                code = result.pop("_exit", EXIT_OK)
            except CommandFailed as exc:
                result, code = exc.payload or {}, exc.code
            except (ParseError, ValidationError, DimensionMismatch, RateVectorInfeasible, NotOmniscient, NoWitness) as exc:
                result, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_INPUT
            except (SearchBudgetExceeded, EnumerationCapExceeded) as exc:
                result, code = {"error": type(exc).__name__, "message": str(exc), "incomplete": True}, EXIT_BUDGET
            except InternalInconsistency as exc:
                result, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_INTERNAL
            except OSError as exc:
                result, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_INPUT
            _emit(config, _envelope(name, config, s, result))
            sys.exit(code)

        return run

    return wrap


# ---------------------------------------------------------------------------
# commands

@click.group()
@click.version_option(__version__, prog_name="linska")
def main():
    """Secret key capacities, communication complexity and verified schemes for finite linear sources."""


def _analysis(s: FiniteLinearSource, report: capacity.CapacityReport) -> dict:
    return {
        "users": list(s.names),
        "h": report.h,
        "cs_zero": report.cs_zero,
        "common_basis": _matrix(report.common_basis),
        "cs": report.cs,
        "lp_value": _frac(report.lp_value),
        "dual_lp_value": _frac(report.dual_lp_value),
        "r_co": report.r_co,
        "optimal_partition": None if report.optimal_partition is None else report.optimal_partition.describe(s.names),
        "argmin_partitions": [p.describe(s.names) for p in report.argmin_partitions],
        "rate_vector": None if report.rate_vector is None else list(report.rate_vector),
        "r_s": report.r_s,
        "r_s_bound": report.r_s_bound,
        "reducing_processors": None if report.reducing_processors is None
        else {n: c.tolist() for n, c in zip(s.names, report.reducing_processors)},
        "incomplete": report.incomplete,
        "notes": report.notes,
    }


@main.command()
@click.argument("source_path", type=click.Path(path_type=Path))
@click.option("--skip-rs", is_flag=True, envvar=_env("skip-rs"), help="Skip the communication complexity search.")
@_run_options
@_command("analyze")
def analyze(s, config, skip_rs, out):
    """Capacities cs_zero, cs, r_co and (unless --skip-rs) r_s of SOURCE_PATH."""
    report = capacity.analyze(s, config, skip_rs=skip_rs)
    result = _analysis(s, report)
    if out is not None:
        out.write_text(json.dumps(result, sort_keys=True, indent=2) + "\n")
    if report.incomplete:
        result["_exit"] = EXIT_BUDGET
    return result


def _verification(s: FiniteLinearSource, rep: oracle.VerificationReport) -> dict:
    return {
        "certified": rep.certified,
        "key_length": rep.key_length_logq,
        "recoverable": dict(zip(s.names, rep.recoverable)),
        "omniscient": dict(zip(s.names, rep.omniscient)),
        "key_uniform": rep.key_uniform,
        "key_independent": rep.key_independent,
        "realizations_checked": rep.realizations_checked,
        "counterexamples": rep.counterexamples,
    }


@main.command()
@click.argument("source_path", type=click.Path(path_type=Path))
@_run_options
@_command("synthesize")
def synthesize(s, config, out):
    """Build a scheme with key length cs and discussion length r_s, verify it, and write it."""
    scheme = protocol.synthesize_optimal_ska(s, config)
    rep = oracle.verify_scheme(s, scheme, config.enumeration_cap)
    result = {
        "discussion_length": scheme.discussion_length,
        "key_length": scheme.key_length,
        "rates": dict(zip(s.names, scheme.discussion.rates)),
        "mode": scheme.mode,
        "verification": _verification(s, rep),
    }
    if not rep.certified:
        result["error"] = "InternalInconsistency"
        result["message"] = "synthesized scheme failed verification; nothing written"
        raise CommandFailed(EXIT_INTERNAL, result)
    document = protocol.scheme_to_dict(s, scheme)
    if out is not None:
        out.write_text(protocol.dump_scheme(s, scheme) + "\n")
        result["written"] = str(out)
    else:
        result["scheme"] = document
    return result


@main.command()
@click.argument("source_path", type=click.Path(path_type=Path))
@click.argument("scheme_path", type=click.Path(path_type=Path))
@_run_options
@_command("verify")
def verify(s, config, scheme_path, out):
    """Exhaustively check SCHEME_PATH on SOURCE_PATH; exit 0 iff certified."""
    scheme = protocol.load_scheme(scheme_path, s)
    rep = oracle.verify_scheme(s, scheme, config.enumeration_cap)
    result = _verification(s, rep)
    if out is not None:
        out.write_text(json.dumps(result, sort_keys=True, indent=2) + "\n")
    if not rep.certified:
        result["_exit"] = EXIT_UNCERTIFIED
    return result


@main.command("reduce")
@click.argument("source_path", type=click.Path(path_type=Path))
@click.argument("scheme_path", type=click.Path(path_type=Path))
@_run_options
@_command("reduce")
def reduce_cmd(s, config, scheme_path, out):
    """Shrink SOURCE_PATH step by step until SCHEME_PATH gives every user omniscience.

    With --out DIR each intermediate source is written as DIR/step_<k>.json.
    """
    scheme = protocol.load_scheme(scheme_path, s)
    rep = oracle.verify_scheme(s, scheme, config.enumeration_cap)
    if not rep.certified:
        raise CommandFailed(EXIT_UNCERTIFIED, {"error": "scheme failed verification", "verification": _verification(s, rep)})
    steps = protocol.reduce_until_omniscient(s, scheme)
    table = [{"step": 0, "h": s.entropy(s.full_mask), "witness": None, "certified": True}]
    sources = []
    for k, step in enumerate(steps, start=1):
        check = oracle.verify_scheme(step.source, step.scheme, config.enumeration_cap)
        if not check.certified:
            raise InternalInconsistency(f"scheme stopped certifying after reduction step {k}")
        table.append({
            "step": k,
            "h": step.source.entropy(step.source.full_mask),
            "witness": step.source.names[step.witness_user],
            "certified": True,
        })
        sources.append(source_to_dict(step.source))
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"step_{k}.json").write_text(json.dumps(sources[-1], sort_keys=True) + "\n")
    final = steps[-1].source if steps else s
    return {
        "steps": len(steps),
        "table": table,
        "final_h": final.entropy(final.full_mask),
        "final_r_co": capacity.r_co(final, config.partition_cap),
        "sources": sources,
    }


@main.group("oracle")
def oracle_group():
    """Brute-force ground truth for tiny sources."""


@oracle_group.command("gk")
@click.argument("source_path", type=click.Path(path_type=Path))
@_run_options
@_command("oracle gk")
def oracle_gk(s, config, out):
    """Dimension of the common function space, by counting vectors."""
    return {"gk": oracle.brute_force_gk(s, config.enumeration_cap)}


@oracle_group.command("cs-of-r")
@click.argument("source_path", type=click.Path(path_type=Path))
@click.option("--r", "r_total", type=click.IntRange(min=0), required=True, help="Total discussion budget.")
@_run_options
@_command("oracle cs-of-r")
def oracle_cs_of_r(s, config, r_total, out):
    """Longest key with at most R symbols of linear discussion, by exhaustive search."""
    return {"r": r_total, "cs_of_r": oracle.brute_force_cs_of_r(s, r_total, config.oracle_cap)}


def _parse_vector(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise ParseError(f"rate vector {text!r} must be comma-separated integers") from exc


@oracle_group.command("check-rate")
@click.argument("source_path", type=click.Path(path_type=Path))
@click.option("--vector", required=True, help="Comma-separated per-user rates, e.g. 1,1,1,0.")
@_run_options
@_command("oracle check-rate")
def oracle_check_rate(s, config, vector, out):
    """Whether a rate vector lies in the omniscience rate region; exit 1 with a witness if not."""
    r = _parse_vector(vector)
    if len(r) != s.m:
        raise RateVectorInfeasible(f"rate vector has {len(r)} entries, source has {s.m} users")
    ok, witness = oracle.check_rate_vector(s, r, config.enumeration_cap)
    result = {
        "vector": r,
        "feasible": ok,
        "witness": None if witness is None else [s.names[i] for i in range(s.m) if witness >> i & 1],
    }
    if not ok:
        result["_exit"] = EXIT_UNCERTIFIED
    return result


if __name__ == "__main__":
    main()
