"""Batch front-end: ``lipdouble run <taskfile>`` and ``lipdouble verify-certificate <report.json>``.

Exit codes of ``run``: 0 completed (any verdict), 2 input error, 3 internal
invariant violation.  ``verify-certificate`` exits 0 when every Holds/Fails
certificate re-verifies, 1 when one does not, 2 on unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Mapping

import jsonschema

from .closure.arcs import Parametrization
from .closure.certificates import CertificateError, point_json, ring_json, verify_certificate
from .closure.verdict import (
    FAILS,
    HOLDS,
    IDEAL_STRATEGIES,
    MODULE_STRATEGIES,
    Bounds,
    CertificateInvariantError,
    StrictClosureUnsupported,
    closure_membership_ideal,
    closure_membership_module,
)
from .curvefam import CurveFamilyParam, NormalFormError, bilip_verdict, normal_form
from .doubling import double_module
from .equising import (
    FastPathInapplicable,
    IdentityFailure,
    WeightError,
    WeightVector,
    check_ila,
    check_ilmy,
    check_w,
    grassmann_identities,
    grassmann_ila_criterion,
    grassmann_modification,
    wh_euler_fastpath,
)
from .exactalg.poly import ParseError, PolyRing, to_q
from .modulealg import (
    ModulePresentation,
    PointError,
    RingContext,
    VarietyFamily,
    cosupport_ideal,
    generic_rank,
    rank_at_point,
    rho_ideal,
)

SCHEMA_ID = "lipdouble.report/1"

TASKS = (
    "double",
    "rank",
    "cosupport",
    "rho",
    "closure-test",
    "check-w",
    "check-ila",
    "check-ilmy",
    "wh-fastpath",
    "grassmann",
    "curve-normal-form",
    "curve-bilip",
)

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3

_NUM = {"type": ["integer", "string"]}
_POINT = {"type": "object", "additionalProperties": _NUM}
_STRS = {"type": "array", "items": {"type": "string"}}

TASK_SCHEMA: dict = {
    "type": "object",
    "required": ["task"],
    "additionalProperties": False,
    "properties": {
        "task": {"type": "string"},
        "description": {"type": "string"},
        "ring": {
            "type": "object",
            "required": ["z"],
            "additionalProperties": False,
            "properties": {"z": _STRS, "y": _STRS, "aux": _STRS, "relations": _STRS, "irreducible": {"type": "boolean"}},
        },
        "family": {
            "type": "object",
            "required": ["F"],
            "additionalProperties": False,
            "properties": {"F": {**_STRS, "minItems": 1}},
        },
        "module": {
            "type": "object",
            "required": ["columns"],
            "additionalProperties": False,
            "properties": {
                "columns": {"type": "array", "items": _STRS},
                "p": {"type": "integer", "minimum": 1},
            },
        },
        "ideal": _STRS,
        "element": {"oneOf": [{"type": "string"}, _STRS]},
        "weights": {
            "type": "object",
            "required": ["z", "y", "degrees"],
            "additionalProperties": False,
            "properties": {
                "z": _POINT,
                "y": _POINT,
                "degrees": {"type": "array", "items": _NUM},
            },
        },
        "polynomials": {**_STRS, "minItems": 1},
        "curve": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "components": _STRS,
                "terms": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "prefixItems": [_NUM, {"type": "integer"}, {"type": "integer"}],
                            "minItems": 3,
                            "maxItems": 3,
                        },
                    },
                },
                "names": _STRS,
            },
        },
        "parametrization": {
            "type": "object",
            "required": ["params", "images"],
            "additionalProperties": False,
            "properties": {
                "params": _STRS,
                "images": {"type": "object", "additionalProperties": {"type": "string"}},
                "center": _POINT,
            },
        },
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "truncation": {"type": "integer", "minimum": 1},
                "max_m": {"type": "integer", "minimum": 1},
                "max_deg": {"type": ["integer", "null"], "minimum": 0},
                "arc_count": {"type": "integer", "minimum": 0},
                "degree_budget": {"type": "integer", "minimum": 1},
                "unit_degree": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer"},
                "chart": {"type": "integer", "minimum": 1},
                "point": {"oneOf": [_POINT, {"type": "array", "items": _POINT, "minItems": 2, "maxItems": 2}]},
                "variant": {"enum": ["z-only", "full"]},
                "basis": {"enum": ["B", "B'", "B''"]},
                "mode": {"enum": ["absolute", "relative"]},
                "strategy": {"type": "string"},
                "double": {"type": "boolean"},
                "criterion": {"type": "boolean"},
                "fast": {"type": "boolean"},
            },
        },
    },
}

# sections each task needs besides the always-optional ones
REQUIRED = {
    "double": ("ring", "module"),
    "rank": ("ring", "module"),
    "cosupport": ("ring", "module"),
    "rho": ("ring", "module"),
    "closure-test": ("ring", "element"),
    "check-w": ("ring", "family"),
    "check-ila": ("ring", "family"),
    "check-ilmy": ("ring", "family"),
    "wh-fastpath": ("ring", "family", "weights"),
    "grassmann": ("ring", "polynomials"),
    "curve-normal-form": ("curve",),
    "curve-bilip": ("curve",),
}


class TaskError(ValueError):
    """Schema or reference error in a task file."""


class Rejected(Exception):
    """Precondition refused by an engine after the task parsed; carries report details."""

    def __init__(self, message: str, details: dict):
        super().__init__(message)
        self.details = details


# -- loading -------------------------------------------------------------------------


def load_task(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise TaskError(f"cannot read task file: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise TaskError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    validate_task(data)
    return data


def validate_task(data: Any):
    try:
        jsonschema.validate(data, TASK_SCHEMA, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise TaskError(f"schema violation at {where}: {e.message}") from e
    task = data["task"]
    if task not in TASKS:
        raise TaskError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    missing = [k for k in REQUIRED[task] if k not in data]
    if missing:
        raise TaskError(f"task {task!r} requires section(s): {', '.join(missing)}")


def _context(data: Mapping) -> RingContext:
    r = data["ring"]
    z, y, aux = r["z"], r.get("y", []), r.get("aux", [])
    names = list(z) + list(y) + list(aux)
    if len(set(names)) != len(names):
        raise TaskError("ring variable names must be distinct")
    try:
        PolyRing(names)
    except ValueError as e:
        raise TaskError(str(e)) from e
    base = RingContext(tuple(z), tuple(y), tuple(aux))
    rels = tuple(_parse(base, s, "ring.relations") for s in r.get("relations", []))
    return RingContext(base.z, base.y, base.aux, rels, r.get("irreducible", True))


def _rank_notes(ctx: RingContext) -> list[str]:
    if not ctx.irreducible:
        return ["X declared reducible: ranks are maxima over its components; per-component ranks are not computed"]
    if ctx.relations:
        return ["generic rank assumes X irreducible; irreducibility is not checked"]
    return []


def _parse(ctx: RingContext, text: str, where: str):
    try:
        return ctx.parse(text)
    except ParseError as e:
        raise ParseError(f"{where}: {e.reason}", e.text, e.pos) from e


def _family(data: Mapping, ctx: RingContext) -> VarietyFamily:
    F = [_parse(ctx, s, "family.F") for s in data["family"]["F"]]
    if len(F) > len(ctx.z):
        raise TaskError("more equations than fiber variables")
    return VarietyFamily.from_polys(ctx.z, ctx.y, F, ctx.aux, ctx.relations)


def _module(data: Mapping, ctx: RingContext) -> ModulePresentation:
    mod = data["module"]
    cols = mod["columns"]
    p = mod.get("p")
    if not cols and p is None:
        raise TaskError("module.p is required for an empty generator list")
    p = p if p is not None else len(cols[0])
    for j, c in enumerate(cols):
        if len(c) != p:
            raise TaskError(f"module column {j} has length {len(c)}, expected {p}")
    parsed = [[_parse(ctx, s, f"module.columns[{j}]") for s in c] for j, c in enumerate(cols)]
    return ModulePresentation.from_columns(ctx, parsed, p)


def _bounds(opts: Mapping) -> Bounds:
    b = Bounds()
    for key in ("max_m", "max_deg", "arc_count", "degree_budget", "truncation", "seed", "unit_degree"):
        if key in opts:
            setattr(b, key, opts[key])
    return b


def _point(ctx: RingContext, raw) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, Mapping):
        raise TaskError("a single point is expected for this task")
    for v in raw:
        if v not in ctx.ring.index:
            raise TaskError(f"point names unknown coordinate {v!r}")
    return {v: to_q(x) for v, x in raw.items()}


def _pair(ctx: RingContext, raw):
    if raw is None:
        return None
    if isinstance(raw, Mapping):
        p = _point(ctx, raw)
        return (p, p)
    return tuple(_point(ctx, r) for r in raw)


def _param(data: Mapping, ctx: RingContext) -> Parametrization | None:
    par = data.get("parametrization")
    if par is None:
        return None
    return Parametrization.parse(ctx, par["params"], par["images"], par.get("center"))


def _curve(data: Mapping, N: int) -> CurveFamilyParam:
    c = data["curve"]
    names = c.get("names", ())
    if ("components" in c) == ("terms" in c):
        raise TaskError("curve needs exactly one of 'components' or 'terms'")
    if "components" in c:
        for j, s in enumerate(c["components"]):
            try:
                PolyRing(["t", "s"]).parse(s)
            except ParseError as e:
                raise ParseError(f"curve.components[{j}]: {e.reason}", e.text, e.pos) from e
        return CurveFamilyParam.from_polys(c["components"], N, names)
    return CurveFamilyParam.from_terms(c["terms"], N, names)


def _strs(v) -> list[str]:
    return [str(x) for x in v]


# -- tasks -----------------------------------------------------------------------------


def _t_double(data, opts, bounds) -> dict:
    ctx = _context(data)
    M = _module(data, ctx)
    D = double_module(M, opts.get("mode", "relative"), opts.get("basis", "B"))
    return {
        "mode": D.product.mode,
        "basis": D.basis,
        "product_ring": ring_json(D.product.context),
        "generators": [{"label": lab, "vector": _strs(col)} for lab, col in zip(D.labels, D.columns())],
    }


def _t_rank(data, opts, bounds) -> dict:
    ctx = _context(data)
    M = _module(data, ctx)
    out: dict = {"generic_rank": generic_rank(M), "notes": _rank_notes(ctx)}
    if opts.get("double", True):
        D = double_module(M, opts.get("mode", "relative"), opts.get("basis", "B"))
        out["double_generic_rank"] = generic_rank(D.module)
    if "point" in opts:
        pt = _point(ctx, opts["point"])
        out["point"] = point_json({v: pt.get(v, 0) for v in ctx.ring.names})
        out["rank_at_point"] = rank_at_point(M, pt)
    return out


def _t_cosupport(data, opts, bounds) -> dict:
    ctx = _context(data)
    M = _module(data, ctx)
    k = generic_rank(M)
    out: dict = {"generic_rank": k, "ideal": _strs(cosupport_ideal(M).gens), "notes": _rank_notes(ctx)}
    if opts.get("double", False):
        D = double_module(M, opts.get("mode", "relative"), opts.get("basis", "B"))
        kd = generic_rank(D.module)
        out["double"] = {
            "product_ring": ring_json(D.product.context),
            "generic_rank": kd,
            "ideal": _strs(cosupport_ideal(D.module).gens),
        }
    return out


def _t_rho(data, opts, bounds) -> dict:
    ctx = _context(data)
    M = _module(data, ctx)
    chart = opts.get("chart", 1)
    I = rho_ideal(M, chart)
    return {"chart": chart, "ring": ring_json(I.context), "ideal": _strs(I.gens)}


def _t_closure(data, opts, bounds) -> dict:
    ctx = _context(data)
    pt = _point(ctx, opts.get("point"))
    par = _param(data, ctx)
    el = data["element"]
    strategy = opts.get("strategy", "auto")
    if "ideal" in data and "module" in data:
        raise TaskError("closure-test takes either 'ideal' or 'module', not both")
    if "ideal" in data:
        if strategy not in IDEAL_STRATEGIES:
            raise TaskError(f"unknown ideal strategy {strategy!r}")
        if not isinstance(el, str):
            raise TaskError("an ideal closure test needs a single polynomial element")
        f = _parse(ctx, el, "element")
        gens = [_parse(ctx, s, "ideal") for s in data["ideal"]]
        v = closure_membership_ideal(f, gens, ctx, pt, strategy, bounds, param=par)
        kind = "ideal"
    elif "module" in data:
        if strategy not in MODULE_STRATEGIES:
            raise TaskError(f"unknown module strategy {strategy!r}")
        M = _module(data, ctx)
        vec = [el] if isinstance(el, str) else el
        if len(vec) != M.p:
            raise TaskError(f"element has {len(vec)} components, module rank is {M.p}")
        h = [_parse(ctx, s, "element") for s in vec]
        v = closure_membership_module(h, M, ctx, pt, strategy, bounds, param=par)
        kind = "module"
    else:
        raise TaskError("closure-test requires an 'ideal' or a 'module' section")
    return {"kind": kind, "strategy": strategy, **v.to_json()}


def _t_check(name: str) -> Callable:
    def run(data, opts, bounds) -> dict:
        ctx = _context(data)
        fam = _family(data, ctx)
        par = _param(data, ctx)
        if name == "check-w":
            return check_w(fam, _point(ctx, opts.get("point")), bounds, param=par).to_json()
        at = _pair(ctx, opts.get("point"))
        fast = opts.get("fast", True)
        if name == "check-ila":
            return check_ila(fam, at, bounds, param=par, fast=fast).to_json()
        return check_ilmy(fam, at, opts.get("variant", "z-only"), bounds, param=par, fast=fast).to_json()

    return run


def _t_wh(data, opts, bounds) -> dict:
    ctx = _context(data)
    fam = _family(data, ctx)
    w = data["weights"]
    wv = WeightVector({k: to_q(v) for k, v in w["z"].items()}, {k: to_q(v) for k, v in w["y"].items()}, [to_q(d) for d in w["degrees"]])
    try:
        return wh_euler_fastpath(fam, wv, _point(ctx, opts.get("point")), bounds).to_json()
    except FastPathInapplicable as e:
        raise Rejected(str(e), {"system": e.system, "consistent": e.consistent}) from e
    except WeightError as e:
        raise Rejected(str(e), {}) from e


def _t_grassmann(data, opts, bounds) -> dict:
    ctx = _context(data)
    if ctx.y or ctx.aux or ctx.relations:
        raise TaskError("grassmann takes a plain ring of fiber variables")
    f = [_parse(ctx, s, "polynomials") for s in data["polynomials"]]
    fam = grassmann_modification(f, opts.get("chart"))
    out: dict = {"family": ring_json(fam.context), "identities": grassmann_identities(f, fam)}
    if opts.get("criterion", True) and all(g.is_constant() for g in f):
        out["criterion_skipped"] = "constant input: the modification has no points to test"
    elif opts.get("criterion", True):
        pt = opts.get("point")
        if pt is not None:
            pt = _point(fam.context, pt)
        out["criterion"] = grassmann_ila_criterion(f, pt, bounds).to_json()
    return out


def _t_normal_form(data, opts, bounds) -> dict:
    param = _curve(data, bounds.truncation)
    return {"input": param.to_json(), "normal_form": normal_form(param).to_json()}


def _t_bilip(data, opts, bounds) -> dict:
    param = _curve(data, bounds.truncation)
    return {"input": param.to_json(), **bilip_verdict(param, bounds).to_json()}


HANDLERS: dict[str, Callable] = {
    "double": _t_double,
    "rank": _t_rank,
    "cosupport": _t_cosupport,
    "rho": _t_rho,
    "closure-test": _t_closure,
    "check-w": _t_check("check-w"),
    "check-ila": _t_check("check-ila"),
    "check-ilmy": _t_check("check-ilmy"),
    "wh-fastpath": _t_wh,
    "grassmann": _t_grassmann,
    "curve-normal-form": _t_normal_form,
    "curve-bilip": _t_bilip,
}


# -- reports ----------------------------------------------------------------------------


def execute(data: dict, seed: int | None = None, truncation: int | None = None) -> dict:
    """Run a validated task and return the report dict (raises on input errors)."""
    opts = dict(data.get("options", {}))
    if seed is not None:
        opts["seed"] = seed
    if truncation is not None:
        opts["truncation"] = truncation
    bounds = _bounds(opts)
    report = {"schema": SCHEMA_ID, "task": data["task"], "input": data, "options": opts, "bounds": bounds.to_json()}
    try:
        report["result"] = HANDLERS[data["task"]](data, opts, bounds)
        report["status"] = "completed"
    except Rejected as e:
        report["status"] = "rejected"
        report["error"] = {"message": str(e), **e.details}
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def verdict_nodes(obj, path: str = "$"):
    """Yield (path, node) for every dict carrying a Holds/Fails verdict and a certificate slot."""
    if isinstance(obj, dict):
        status = obj.get("verdict", obj.get("status"))
        if "certificate" in obj and status in (HOLDS, FAILS):
            yield path, obj
        for k in sorted(obj):
            if k != "certificate":
                yield from verdict_nodes(obj[k], f"{path}.{k}")
    elif isinstance(obj, list):
        for i, x in enumerate(obj):
            yield from verdict_nodes(x, f"{path}[{i}]")


def verify_report(report: Mapping) -> list[tuple[str, bool, str]]:
    out = []
    for path, node in verdict_nodes(report):
        cert = node.get("certificate")
        if not isinstance(cert, dict):
            out.append((path, False, "verdict without certificate"))
            continue
        ok, msg = verify_certificate(cert)
        out.append((path, ok, msg))
    return out


def render_text(report: Mapping) -> str:
    lines = [f"task: {report['task']}", f"status: {report['status']}"]
    if report["status"] != "completed":
        err = report.get("error", {})
        lines.append(f"rejected: {err.get('message', '')}")
        for eq in err.get("system", []):
            lines.append(f"  {eq}")
        if err.get("consistent") is not None:
            lines.append(f"  consistent: {err['consistent']}")
        return "\n".join(lines) + "\n"
    res = report["result"]
    _render(res, lines)
    n = sum(1 for _ in verdict_nodes(res))
    lines.append(f"certified verdicts: {n}")
    return "\n".join(lines) + "\n"


def _render(res: Mapping, lines: list[str], indent: str = ""):
    if "condition" in res:
        lines.append(f"{indent}condition {res['condition']}: {res['aggregate']}")
        for g in res["generators"]:
            why = f" ({g['reason']})" if g["reason"] and g["verdict"] != HOLDS else ""
            lines.append(f"{indent}  {g['name']}: {g['verdict']} [{g['engine']}]{why}")
        if "alternate" in res:
            _render(res["alternate"], lines, indent + "  ")
        if "criterion" in res:
            _render(res["criterion"], lines, indent)
        return
    if "generators" in res:
        lines.append(f"{indent}double ({res['mode']}, basis {res['basis']}) over {', '.join(res['product_ring']['z'] + res['product_ring']['y'])}")
        for g in res["generators"]:
            lines.append(f"{indent}  {g['label']}: ({', '.join(g['vector'])})")
        return
    if "status" in res and "engine" in res:
        lines.append(f"{indent}{res['kind']} closure ({res['strategy']}): {res['status']} [{res['engine']}]")
        if res["reason"]:
            lines.append(f"{indent}  {res['reason']}")
        return
    if "identities" in res:
        ids = res["identities"]
        lines.append(f"{indent}F = {', '.join(ids['F'])}")
        lines.append(f"{indent}chain-rule identities: {len(ids['identities'])} checked, all equal: {ids['all_equal']}")
        if "criterion" in res:
            _render(res["criterion"], lines, indent)
        return
    if "normal_form" in res:
        nf = res["normal_form"]
        lines.append(f"{indent}permutation: {nf['permutation']}")
        comps = nf["transformed"]["components"]
        lines.append(f"{indent}normal form: {len(comps)} coordinates at truncation {nf['transformed']['N']}")
        for k, v in sorted(nf["audit"].items()):
            lines.append(f"{indent}  {k}: {v}")
        return
    for k in sorted(res):
        lines.append(f"{indent}{k}: {json.dumps(res[k], sort_keys=True)}")


# -- entry point ---------------------------------------------------------------------------


def _err(msg: str):
    print(f"lipdouble: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        data = load_task(args.taskfile)
        report = execute(data, args.seed, args.truncation)
    except ParseError as e:
        _err(f"parse error: {e}")
        return EXIT_INPUT
    except (TaskError, PointError, StrictClosureUnsupported, NormalFormError, CertificateError) as e:
        _err(f"input error: {e}")
        return EXIT_INPUT
    except (CertificateInvariantError, IdentityFailure, AssertionError) as e:
        _err(f"invariant violation: {e}")
        return EXIT_INVARIANT
    except ValueError as e:
        _err(f"input error: {e}")
        return EXIT_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(report), encoding="utf-8")
    (out / "report.txt").write_text(render_text(report), encoding="utf-8")
    if report["status"] == "rejected":
        _err(f"rejected: {report['error']['message']}")
        return EXIT_INPUT
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        _err(f"cannot read report: {e}")
        return EXIT_INPUT
    results = verify_report(report)
    bad = 0
    for path, ok, msg in results:
        print(f"{'ok  ' if ok else 'FAIL'} {path}: {msg}")
        bad += not ok
    print(f"{len(results) - bad}/{len(results)} certificates verified")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lipdouble", description="Doubles of modules, integral closure and Lipschitz equisingularity checks.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a task file and write report.json and report.txt")
    run.add_argument("taskfile")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--truncation", type=int, default=None)
    run.add_argument("--out", default=".")
    run.set_defaults(func=cmd_run)
    ver = sub.add_parser("verify-certificate", help="re-verify every Holds/Fails certificate in a report")
    ver.add_argument("report")
    ver.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    if getattr(args, "truncation", None) is not None and args.truncation < 1:
        _err("--truncation must be positive")
        return EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
