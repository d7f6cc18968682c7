"""``cpbt`` command-line interface.

Commands::

    cpbt check     --d 4 --a 13,5,2,1,1
    cpbt decompose --input fixture.json --format json
    cpbt nearest   --a 1,2,1,2,1,2,1,2,1
    cpbt gen harmonic --d 6 | cpbt decompose --input -

Coordinates written as integers or ``p/q`` are exact and switch on exact
arithmetic (unless ``--float``); decimals are read as floats.

Exit codes:

    0   CP (check, decompose) / success (nearest, gen)
    1   not CP
    2   zero tensor
    3   nearest-CP solver failure
    4   internal inconsistency (tolerances contradict each other)
    64  malformed input or unknown generator family

With several inputs the largest code is returned.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .engine import Tolerances, Verdict, analyze
from .errors import CpbtError, SolverError
from .nearest import nearest_cp
from .report import analysis_report, nearest_report, render_text
from .tensor import AVector, CpDecomposition, reconstruct

__all__ = ["main", "parse_coordinate", "generate", "UsageError"]

EXIT_CP, EXIT_NOT_CP, EXIT_ZERO = 0, 1, 2
EXIT_SOLVER, EXIT_INTERNAL, EXIT_USAGE = 3, 4, 64

ENV_TOLERANCES = {"psd_tol": "CPBT_TOL_PSD", "rank_tol": "CPBT_TOL_RANK", "opt_tol": "CPBT_TOL_OPT"}
DEFAULT_OPT_TOL = 1e-8

_INT = re.compile(r"^[-+]?\d+$")
_RATIO = re.compile(r"^[-+]?\d+\s*/\s*\d+$")


class UsageError(Exception):
    """Bad input; mapped to exit code 64."""


def parse_coordinate(token):
    """Integer and ``p/q`` tokens become exact, decimals become floats."""
    if isinstance(token, bool):
        raise UsageError(f"invalid coordinate {token!r}")
    if isinstance(token, (int, float)):
        if isinstance(token, float) and not math.isfinite(token):
            raise UsageError(f"non-finite coordinate {token!r}")
        return token
    if not isinstance(token, str):
        raise UsageError(f"invalid coordinate {token!r}")
    text = token.strip()
    if _INT.match(text):
        return int(text)
    if _RATIO.match(text):
        num, den = text.split("/")
        if int(den) == 0:
            raise UsageError(f"zero denominator in {token!r}")
        return Fraction(int(num), int(den))
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"invalid coordinate {token!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"non-finite coordinate {token!r}")
    return value


def _format_exact(v) -> int | str:
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


# -- generators ---------------------------------------------------------------


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def generate(family: str, d: int) -> list:
    """Exact coordinates of a named test family."""
    if d < 1:
        raise UsageError("--d must be >= 1")
    if family == "harmonic":
        return [Fraction(1, k + 1) for k in range(d + 1)]
    if family == "exponential":
        return [math.factorial(k) for k in range(d + 1)]
    if family == "gaussian":
        return [0 if k % 2 else _double_factorial(k - 1) for k in range(d + 1)]
    if family.startswith("atoms:"):
        atoms = []
        for item in family[len("atoms:"):].split(","):
            parts = item.split(":")
            if len(parts) != 2:
                raise UsageError(f"atom {item!r} is not of the form a:b")
            pair = tuple(parse_coordinate(p) for p in parts)
            atoms.append(pair)
        try:
            dec = CpDecomposition(d, tuple(atoms))
        except ValueError as err:
            raise UsageError(str(err)) from None
        return list(reconstruct(dec).values)
    raise UsageError(f"unknown family {family!r} (harmonic, exponential, gaussian, atoms:a:b,...)")


# -- inputs -------------------------------------------------------------------


@dataclass
class Job:
    source: str
    a: AVector
    tol: Tolerances
    opt_tol: float


def _env_options() -> dict:
    out = {}
    for key, var in ENV_TOLERANCES.items():
        if os.environ.get(var):
            try:
                out[key] = float(os.environ[var])
            except ValueError:
                raise UsageError(f"{var} is not a number: {os.environ[var]!r}") from None
    return out


def _parse_document(text: str, source: str) -> tuple[int | None, list, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"{source}: invalid JSON: {err}") from None
    if not isinstance(doc, dict) or "a" not in doc or not isinstance(doc["a"], list):
        raise UsageError(f"{source}: expected an object with an array field 'a'")
    d = doc.get("d")
    if d is not None and (not isinstance(d, int) or isinstance(d, bool)):
        raise UsageError(f"{source}: 'd' must be an integer")
    options = doc.get("options", {}) or {}
    if not isinstance(options, dict):
        raise UsageError(f"{source}: 'options' must be an object")
    return d, doc["a"], options


def _build_job(source, d, raw, options, args) -> Job:
    coords = [parse_coordinate(t) for t in raw]
    if len(coords) < 2:
        raise UsageError(f"{source}: need at least two coordinates")
    if d is not None and len(coords) != d + 1:
        raise UsageError(f"{source}: d={d} needs {d + 1} coordinates, got {len(coords)}")
    merged = _env_options()
    for key in ("psd_tol", "rank_tol", "opt_tol", "float"):
        if key in options:
            merged[key] = options[key]
    for key in ("psd_tol", "rank_tol", "opt_tol"):
        if getattr(args, key) is not None:
            merged[key] = getattr(args, key)
    if args.float:
        merged["float"] = True
    for key in ("psd_tol", "rank_tol", "opt_tol"):
        val = merged.get(key)
        if val is not None and (not isinstance(val, (int, float)) or isinstance(val, bool) or val < 0):
            raise UsageError(f"{source}: {key} must be a nonnegative number")
    try:
        a = AVector(coords, exact=False if merged.get("float") else None)
    except (ValueError, TypeError) as err:
        raise UsageError(f"{source}: {err}") from None
    tol = Tolerances().with_overrides(psd=merged.get("psd_tol"), rank=merged.get("rank_tol"))
    return Job(source, a, tol, float(merged.get("opt_tol", DEFAULT_OPT_TOL)))


def collect_jobs(args, stdin=None) -> list[Job]:
    stdin = stdin if stdin is not None else sys.stdin
    jobs = []
    if args.a is not None:
        raw = [t for t in args.a.split(",") if t.strip()]
        jobs.append(_build_job("--a", args.d, raw, {}, args))
    for path in args.input or []:
        if path == "-":
            text = stdin.read()
        else:
            try:
                with open(path, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as err:
                raise UsageError(f"{path}: {err.strerror}") from None
        d, raw, options = _parse_document(text, path)
        if args.d is not None and d is not None and args.d != d:
            raise UsageError(f"{path}: --d {args.d} disagrees with d={d} in the file")
        jobs.append(_build_job(path, d if d is not None else args.d, raw, options, args))
    if not jobs:
        raise UsageError("no input: pass --a or --input")
    return jobs


# -- commands -----------------------------------------------------------------

_VERDICT_EXIT = {Verdict.CP: EXIT_CP, Verdict.NOT_CP: EXIT_NOT_CP, Verdict.ZERO: EXIT_ZERO}


def run_job(command: str, job: Job) -> tuple[int, dict | None, str | None]:
    """Run one input; returns ``(exit code, report or None, error message)``."""
    try:
        if command == "nearest":
            res = nearest_cp(job.a, opt_tol=job.opt_tol, tol=job.tol)
            return EXIT_CP, nearest_report(job.a, res, job.tol, job.opt_tol), None
        res = analyze(job.a, job.tol)
        return _VERDICT_EXIT[res.verdict], analysis_report(res, command, job.tol), None
    except SolverError as err:
        return EXIT_SOLVER, None, f"{job.source}: solver failure: {err} {err.residuals}"
    except CpbtError as err:
        return EXIT_INTERNAL, None, f"{job.source}: {err}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpbt",
        description="Complete positivity of symmetric binary tensors.",
        epilog="Exit codes: 0 CP/success, 1 not CP, 2 zero tensor, 3 solver failure, "
        "4 internal inconsistency, 64 malformed input. Distances use the weighted "
        "norm, which equals the entrywise Frobenius norm of the full 2^d tensor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, help="tensor order (inferred from --a if omitted)")
    common.add_argument("--a", help="comma-separated coordinates a_0..a_d (integers, p/q or decimals)")
    common.add_argument("--input", action="append", metavar="FILE",
                        help="JSON input document {d, a, options}; '-' reads stdin; repeatable")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--digits", type=int, default=4, help="decimals in text output (default 4)")
    common.add_argument("--psd-tol", type=float, dest="psd_tol")
    common.add_argument("--rank-tol", type=float, dest="rank_tol")
    common.add_argument("--opt-tol", type=float, dest="opt_tol")
    common.add_argument("--float", action="store_true", help="force floating point for exact inputs")
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="worker threads for several inputs")

    sub.add_parser("check", parents=[common], help="decide complete positivity")
    sub.add_parser("decompose", parents=[common], help="cp-rank, decomposition and uniqueness")
    sub.add_parser("nearest", parents=[common], help="nearest CP tensor for a non-CP input")
    gen = sub.add_parser("gen", help="emit an input document for a test family")
    gen.add_argument("family", help="harmonic | exponential | gaussian | atoms:a:b,a:b,...")
    gen.add_argument("--d", type=int, required=True)
    return parser


def main(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0

    try:
        if args.command == "gen":
            coords = generate(args.family, args.d)
            print(json.dumps({"d": args.d, "a": [_format_exact(v) for v in coords]}), file=stdout)
            return 0
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if args.digits < 0:
            raise UsageError("--digits must be >= 0")
        jobs = collect_jobs(args, stdin)
    except UsageError as err:
        print(f"cpbt: error: {err}", file=stderr)
        return EXIT_USAGE

    if args.jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(lambda j: run_job(args.command, j), jobs))
    else:
        results = [run_job(args.command, j) for j in jobs]

    codes = []
    for job, (code, report, error) in zip(jobs, results):
        codes.append(code)
        if error is not None:
            print(f"cpbt: error: {error}", file=stderr)
            continue
        if len(jobs) > 1:
            report["source"] = job.source
        if args.format == "json":
            print(json.dumps(report, indent=None if len(jobs) > 1 else 2), file=stdout)
        else:
            print(render_text(report, args.digits), file=stdout)
            if len(jobs) > 1:
                print(file=stdout)
    return max(codes)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
