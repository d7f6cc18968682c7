"""Machine-readable reports and their text rendering.

Every number in a report is an object ``{"decimal": "...", "exact": "p/q"}``.
``decimal`` is the shortest string that round-trips the float; ``exact`` is
present only when the value is known exactly. Text output is rendered from the
same report, so both formats carry the same numbers.
"""

from __future__ import annotations

from fractions import Fraction

from .engine import CpAnalysis, Tolerances, Verdict
from .nearest import NearestCpResult
from .tensor import AVector, CpDecomposition

__all__ = [
    "REPORT_SCHEMA",
    "number",
    "parse_number",
    "analysis_report",
    "nearest_report",
    "render_text",
]

_NUMBER = {
    "type": "object",
    "properties": {
        "decimal": {"type": "string", "pattern": r"^-?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?$|^-?(inf|nan)$"},
        "exact": {"type": "string", "pattern": r"^-?\d+(/\d+)?$"},
    },
    "required": ["decimal"],
    "additionalProperties": False,
}
_NUM_OR_NULL = {"anyOf": [{"$ref": "#/$defs/number"}, {"type": "null"}]}
_VECTOR = {"type": "array", "items": {"$ref": "#/$defs/number"}}

REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cpbt report",
    "type": "object",
    "$defs": {
        "number": _NUMBER,
        "atom": {
            "type": "object",
            "properties": {
                "a": {"$ref": "#/$defs/number"},
                "b": {"$ref": "#/$defs/number"},
                "lambda": {"$ref": "#/$defs/number"},
                "x": {"$ref": "#/$defs/number"},
            },
            "required": ["a", "b", "lambda", "x"],
            "additionalProperties": False,
        },
        "check": {
            "type": "object",
            "properties": {
                "matrix": {"enum": ["H1", "H2", "H3", "H4"]},
                "is_psd": {"type": "boolean"},
                "min_eigenvalue": {"$ref": "#/$defs/number"},
                "certificate_vector": {"anyOf": [_VECTOR, {"type": "null"}]},
                "certificate_value": _NUM_OR_NULL,
            },
            "required": ["matrix", "is_psd", "min_eigenvalue"],
            "additionalProperties": False,
        },
    },
    "properties": {
        "command": {"enum": ["check", "decompose", "nearest"]},
        "source": {"type": "string"},
        "input": {
            "type": "object",
            "properties": {
                "d": {"type": "integer", "minimum": 1},
                "a": _VECTOR,
                "exact": {"type": "boolean"},
            },
            "required": ["d", "a", "exact"],
            "additionalProperties": False,
        },
        "verdict": {"enum": [v.value for v in Verdict]},
        "checks": {"type": "array", "items": {"$ref": "#/$defs/check"}},
        "failing": {"anyOf": [{"enum": ["H1", "H2", "H3", "H4"]}, {"type": "null"}]},
        "rank": {"anyOf": [{"type": "integer", "minimum": 0}, {"type": "null"}]},
        "uniqueness": {"enum": ["unique", "not_unique", None]},
        "l": _NUM_OR_NULL,
        "u": _NUM_OR_NULL,
        "atoms": {"type": "array", "items": {"$ref": "#/$defs/atom"}},
        "x_star": _VECTOR,
        "distance": {"$ref": "#/$defs/number"},
        "diagnostics": {"type": "object"},
    },
    "required": ["command", "input", "verdict", "diagnostics"],
    "additionalProperties": False,
}


def number(value) -> dict | None:
    """Serialize a float or Fraction without losing information."""
    if value is None:
        return None
    if isinstance(value, Fraction) or isinstance(value, int) and not isinstance(value, bool):
        q = Fraction(value)
        exact = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return {"decimal": repr(float(q)), "exact": exact}
    return {"decimal": repr(float(value))}


def parse_number(obj: dict) -> Fraction | float:
    """Inverse of :func:`number`: the exact value when present, else the float."""
    return Fraction(obj["exact"]) if "exact" in obj else float(obj["decimal"])


def _vector(values, exact: bool) -> list:
    return [number(v if exact else float(v)) for v in values]


def _atoms(dec: CpDecomposition | None) -> list:
    if dec is None:
        return []
    return [
        {"a": number(a), "b": number(b), "lambda": number(lam), "x": number(x)}
        for (a, b), lam, x in zip(dec.atoms, dec.weights, dec.points)
    ]


def _tolerances(tol: Tolerances, opt_tol: float | None = None) -> dict:
    out = {"psd": tol.psd, "rank": tol.rank, "residual": tol.residual, "uniqueness": tol.uniqueness}
    if opt_tol is not None:
        out["opt"] = opt_tol
    return out


def _checks(res: CpAnalysis) -> list:
    out = []
    for kind, v in res.checks.items():
        cert = None if v.is_psd else _vector(v.certificate_vector, v.exact)
        out.append(
            {
                "matrix": kind.value,
                "is_psd": v.is_psd,
                "min_eigenvalue": number(v.min_eigenvalue),
                "certificate_vector": cert,
                "certificate_value": None if v.is_psd else number(v.certificate_value),
            }
        )
    return out


def _scalar(v, exact: bool):
    if v is None:
        return None
    return number(v if exact and isinstance(v, Fraction) else float(v))


def analysis_report(res: CpAnalysis, command: str, tol: Tolerances) -> dict:
    """Report for ``check`` and ``decompose``."""
    report = {
        "command": command,
        "input": {"d": res.a.d, "a": _vector(res.a.values, res.a.exact), "exact": res.exact},
        "verdict": res.verdict.value,
        "checks": _checks(res),
        "failing": res.failing.value if res.failing else None,
        "diagnostics": {
            "tolerances": _tolerances(tol),
            "exact": res.exact,
            "borderline_rank": res.borderline_rank,
        },
    }
    if command == "decompose" and res.verdict is not Verdict.NOT_CP:
        report["rank"] = res.rank if res.verdict is Verdict.CP else 0
        report["uniqueness"] = res.uniqueness.value if res.uniqueness else None
        report["l"] = _scalar(res.l, res.exact)
        report["u"] = _scalar(res.u, res.exact)
        report["atoms"] = _atoms(res.decomposition)
        report["diagnostics"]["h1_rank"] = res.h1_rank
        report["diagnostics"]["residual"] = res.residual
    return report


def nearest_report(a: AVector, res: NearestCpResult, tol: Tolerances, opt_tol: float) -> dict:
    """Report for ``nearest``. ``verdict`` is the verdict on the input."""
    report = {
        "command": "nearest",
        "input": {"d": a.d, "a": _vector(a.values, a.exact), "exact": a.exact},
        "verdict": res.analysis.verdict.value if res.already_cp else Verdict.NOT_CP.value,
        "x_star": _vector(res.x_star.values, res.already_cp and res.x_star.exact),
        "distance": number(res.distance),
        "rank": res.decomposition.rank if res.decomposition is not None else None,
        "atoms": _atoms(res.decomposition),
        "diagnostics": {
            "tolerances": _tolerances(tol, opt_tol),
            "norm": "weighted (entrywise Frobenius norm of the full tensor)",
            "method": res.method,
            "iterations": res.iterations,
            "gap": res.gap,
            "primal_infeasibility": res.primal_infeasibility,
            "dual_infeasibility": res.dual_infeasibility,
            "borderline_rank": bool(res.analysis.borderline_rank) if res.analysis else None,
            **{k: v for k, v in res.diagnostics.items() if k != "stalled"},
        },
    }
    if "stalled" in res.diagnostics:
        report["diagnostics"]["stalled"] = res.diagnostics["stalled"]
    return report


# -- text -------------------------------------------------------------------


def _fmt(obj: dict | None, digits: int) -> str:
    if obj is None:
        return "-"
    text = f"{float(obj['decimal']):.{digits}f}"
    if "exact" in obj and "/" in obj["exact"]:
        text += f" ({obj['exact']})"
    return text


def _fmt_vec(vec: list, digits: int) -> str:
    return "[" + ", ".join(f"{float(v['decimal']):.{digits}f}" for v in vec) + "]"


def render_text(report: dict, digits: int = 4) -> str:
    """Human-readable form of a report, numbers rounded to ``digits`` places."""
    lines = []
    if "source" in report:
        lines.append(f"== {report['source']} ==")
    inp = report["input"]
    mode = "exact" if inp["exact"] else "float"
    lines.append(f"input: d={inp['d']} a={_fmt_vec(inp['a'], digits)} ({mode})")
    verdict = report["verdict"]
    label = {"cp": "CP", "not_cp": "not CP", "zero": "zero tensor"}[verdict]
    if report["command"] == "nearest":
        lines.append(f"input verdict: {label}")
    else:
        lines.append(f"verdict: {label}")
    for c in report.get("checks", []):
        state = "PSD" if c["is_psd"] else "not PSD"
        lines.append(f"  {c['matrix']}: {state}, min eigenvalue {float(c['min_eigenvalue']['decimal']):.{digits}e}")
        if c["certificate_vector"] is not None:
            lines.append(
                f"    certificate v = {_fmt_vec(c['certificate_vector'], digits)}, "
                f"v^T {c['matrix']} v = {float(c['certificate_value']['decimal']):.{digits}e}"
            )
    if report["command"] == "nearest":
        lines.append(f"distance: {_fmt(report['distance'], digits)} (weighted norm)")
        lines.append(f"x_star: {_fmt_vec(report['x_star'], digits)}")
    if "rank" in report:
        lines.append(f"rank: {report['rank']}")
    if report.get("uniqueness"):
        lines.append(f"uniqueness: {report['uniqueness'].replace('_', ' ')}")
    if report.get("l") is not None:
        lines.append(f"l = {_fmt(report['l'], digits)}")
        lines.append(f"u = {_fmt(report['u'], digits)}")
    if report.get("atoms"):
        lines.append("atoms (a_i, b_i)  lambda_i  x_i:")
        for at in report["atoms"]:
            lines.append(
                f"  ({_fmt(at['a'], digits)}, {_fmt(at['b'], digits)})  "
                f"{_fmt(at['lambda'], digits)}  {_fmt(at['x'], digits)}"
            )
    diag = report["diagnostics"]
    if diag.get("borderline_rank"):
        lines.append("warning: borderline rank decision")
    if report["command"] == "nearest" and diag.get("method") != "none":
        lines.append(f"solver: {diag['method']}, {diag['iterations']} iterations, gap {diag['gap']:.2e}")
    return "\n".join(lines)
