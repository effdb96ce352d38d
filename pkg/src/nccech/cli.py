"""``nccech <command> --input FILE [key=value ...]``: deterministic JSON reports.

Exit status 0 whenever a verdict was computed (including negative ones such as
"obstructed" or "not pretilting"); 2 on malformed input or unknown names.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .cech import ModuleComplex, ext
from .coeff import Window, format_weight
from .deform import obstruction, run_tower, solve_extension, torsor_structure
from .qcoh import ModuleError, structure_module, transport, validate_module
from .rewrite import RewriteError
from .scheme import DeformationTower, PosetError, validate_scheme, validate_tower
from .tilt import end_algebra, flatness_check, generation_check, phi_image, pretilting_check
from .workspace import Workspace, WorkspaceError, module_to_text

SCHEMA = "nccech-report/1"
ASSUMPTIONS = [
    "flatness of the gluing homomorphisms is assumed, not verified",
    "birationality of the gluing homomorphisms is assumed, not verified",
    "all dimensions and verdicts are relative to the weight window and the word-length cap",
]
COMMANDS = ("validate-scheme", "validate-tower", "cohomology", "ext", "hom", "obstruct", "extend",
            "tower", "endalg", "tilt-check", "generate-check", "phi")


class InputError(ValueError):
    pass


def _need(args: dict, *keys):
    for k in keys:
        if k not in args:
            raise InputError("missing argument %s=..." % k)
    return [args[k] for k in keys]


def _ext_json(rep) -> dict:
    return rep.to_json(with_reps=True)


def _tower_module(ws: Workspace, T: DeformationTower, name: str):
    F = ws.module(name)
    if F.ring.order != 1:
        raise InputError("module %s must be declared at level 1 to run a tower" % name)
    if [A.alphabet for A in F.scheme.algebras.values()] != [A.alphabet for A in T.level(1).algebras.values()]:
        raise InputError("module %s does not live on the tower's scheme" % name)
    return transport(F, T.level(1))


def _sub_tower(T: DeformationTower, top: int) -> DeformationTower:
    if not 1 <= top <= T.top:
        raise InputError("level %d is outside the tower (1..%d)" % (top, T.top))
    return DeformationTower(T.name, T.levels[:top])


def cmd_validate_scheme(ws, args, W):
    S = ws.scheme(args.get("scheme") or next(iter(ws.specs)), int(args.get("level", 1)))
    rep = validate_scheme(S, W)
    out = {"scheme": S.name, "level": S.ring.order, "report": rep.to_json()}
    mods = {}
    for name, d in ws.modules.items():
        try:
            M = ws.module(name)
        except WorkspaceError:
            continue
        if M.scheme is S:
            mods[name] = validate_module(M, W).to_json()
    out["modules"] = mods
    return out


def cmd_validate_tower(ws, args, W):
    T = ws.tower(_need(args, "name")[0])
    return {"tower": T.name, "levels": T.top, "report": validate_tower(T, W).to_json()}


def cmd_cohomology(ws, args, W):
    M = ws.module(args.get("M") or _need(args, "N")[0])
    rep = ext(structure_module(M.scheme), M, W, pmax=ws.pmax)
    return {"module": M.name, "cohomology": _ext_json(rep)}


def cmd_ext(ws, args, W):
    F, N = _need(args, "F", "N")
    Fm = ws.module(F)
    rep = ext(Fm, ws.module(N), W, pmax=int(args.get("pmax", ws.pmax)))
    return {"F": F, "N": N, "ext": _ext_json(rep)}


def cmd_hom(ws, args, W):
    from .qcoh import graded_hom

    F, N = _need(args, "F", "N")
    return {"F": F, "N": N, "hom": graded_hom(ws.module(F), ws.module(N), W).to_json()}


def _obstruction_at(ws, args, W):
    T = ws.tower(_need(args, "tower")[0])
    F0 = _tower_module(ws, T, _need(args, "F")[0])
    level = int(args.get("level", 1))
    if level >= T.top:
        raise InputError("level must be below the top of the tower (%d)" % T.top)
    run = run_tower(_sub_tower(T, level), F0, flatness=False)
    if not run.success:
        return None, run, None, None, None
    res, lift, cx = obstruction(run.module, T.level(level + 1), F0)
    return res, run, lift, cx, F0


def cmd_obstruct(ws, args, W):
    res, run, lift, cx, F0 = _obstruction_at(ws, args, W)
    if res is None:
        return {"reached": False, "obstructed_level": run.obstructed_level}
    res, _ = solve_extension(res, cx, lift)
    return {"reached": True, "dd_zero": not cx.dd_failures(res.weight), "obstruction": res.to_json(cx)}


def cmd_extend(ws, args, W):
    res, run, lift, cx, F0 = _obstruction_at(ws, args, W)
    if res is None:
        return {"reached": False, "obstructed_level": run.obstructed_level}
    res, cert = solve_extension(res, cx, lift)
    out = {"reached": True, "obstruction": res.to_json(cx)}
    if cert is not None:
        cert.verify(run.module)
        out["certificate"] = cert.to_json()
        out["certificate_text"] = module_to_text(cert.module, ws.towers[args["tower"]].scheme)
        out["torsor"] = torsor_structure(res, cx).to_json()
    return out


def _choices(text: str | None) -> dict | None:
    """``"1:1,0;2:1"`` -> ``{1: [1, 0], 2: [1]}`` (coefficients on the H^1 basis per level)."""
    if not text:
        return None
    out = {}
    for part in text.split(";"):
        level, sep, coeffs = part.partition(":")
        try:
            out[int(level)] = [int(c) for c in coeffs.split(",")] if sep else []
        except ValueError:
            raise InputError("bad choices %r (use level:c1,c2;level:...)" % text) from None
    return out


def cmd_tower(ws, args, W):
    T = ws.tower(_need(args, "name")[0])
    F0 = _tower_module(ws, T, _need(args, "F")[0])
    run = run_tower(T, F0, W, choices=_choices(args.get("choices")))
    out = {"tower": T.name, "run": run.to_json()}
    if run.success:
        wt = T.level(1).ring.t_weight
        Wx = W.extend(wt, T.top - 1) if any(wt) else W
        E = end_algebra(run.module, Wx)
        E0 = end_algebra(F0, Wx)
        out["flatness"] = flatness_check(E, E0, W).to_json()
        out["pretilting_top"] = pretilting_check(run.module, ws.pmax, W).to_json()
    return out


def cmd_endalg(ws, args, W):
    F = ws.module(_need(args, "F")[0])
    return {"F": F.name, "end": end_algebra(F, W).to_json()}


def _tests(args) -> list:
    raw = args.get("tests") or args.get("x")
    return [t for t in raw.split(";") if t.strip()] if raw else []


def cmd_tilt_check(ws, args, W):
    F = ws.module(_need(args, "F")[0])
    pre = pretilting_check(F, ws.pmax, W)
    E = end_algebra(F, W)
    out = {"F": F.name, "pretilting": pre.to_json(), "end": {"dim": E.dim,
           "dims_by_weight": {format_weight(w): d for w, d in sorted(E.dims().items())},
           "associative": not E.associativity_failures(), "unit_laws": not E.unit_failures()}}
    tests = _tests(args)
    out["generation"] = [generation_check(F, ws.object(t), W).to_json() for t in tests]
    out["claim"] = ("tilting in-window relative to the listed test objects" if pre.pretilting and tests
                    and all(g["verdict"] == "witness" for g in out["generation"]) else
                    "pretilting in-window" if pre.pretilting else "not pretilting")
    return out


def cmd_generate_check(ws, args, W):
    F = ws.module(_need(args, "F")[0])
    return {"F": F.name, "results": [generation_check(F, ws.object(t), W).to_json() for t in _tests(args)]}


def cmd_phi(ws, args, W):
    F = ws.module(_need(args, "F")[0])
    E = end_algebra(F, W)
    return {"F": F.name, "E_dim": E.dim,
            "images": [phi_image(F, ws.object(t), W, E).to_json() for t in _tests(args)]}


HANDLERS = {c: globals()["cmd_" + c.replace("-", "_")] for c in COMMANDS}


def _collect_warnings(ws) -> list:
    out = []
    for (name, level), S in sorted(ws._schemes.items()):
        for chart, ws_ in sorted(S.cap_hits().items()):
            out.append("word-length cap %d reached in scheme %s level %d chart %s at weights %s; "
                       "dimensions there may be incomplete"
                       % (S.algebras[chart].length_cap, name, level, chart,
                          " ".join(format_weight(w) for w in ws_)))
    return out


def run(command: str, ws: Workspace, args: dict, window: Window | None = None) -> dict:
    if command not in HANDLERS:
        raise InputError("unknown command %r (choose from %s)" % (command, ", ".join(COMMANDS)))
    W = window or ws.require_window()
    if W.rank != len(ws.t_weight):
        raise InputError("window has %d components but weights have %d" % (W.rank, len(ws.t_weight)))
    results = HANDLERS[command](ws, args, W)
    return {
        "schema": SCHEMA, "tool_version": __version__, "input_digest": ws.digest,
        "command": command, "args": dict(sorted(args.items())), "window": str(W),
        "length_cap": ws.length_cap, "pmax": ws.pmax,
        "results": results, "warnings": _collect_warnings(ws), "assumptions": ASSUMPTIONS,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False, default=str) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nccech", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("params", nargs="*", help="key=value arguments (e.g. F=T N=O)")
    ap.add_argument("--input", required=True, help="workspace file")
    ap.add_argument("--window", help="weight box, e.g. -6:6 or -3:3,0:2")
    ap.add_argument("--length-cap", type=int, help="word-length cap for normal words")
    ap.add_argument("--pmax", type=int, help="largest Ext degree")
    ap.add_argument("--json", help="also write the report to this file")
    ns = ap.parse_args(argv)
    try:
        args = {}
        for p in ns.params:
            k, sep, v = p.partition("=")
            if not sep:
                raise InputError("argument %r is not key=value" % p)
            args[k] = v
        ws = Workspace.load(ns.input)
        if ns.length_cap is not None:
            ws.length_cap = ns.length_cap
            for spec in ws.specs.values():
                spec.length_cap = ns.length_cap
            ws._schemes.clear()
        if ns.pmax is not None:
            ws.pmax = ns.pmax
        W = Window.parse(ns.window) if ns.window else None
        report = run(ns.command, ws, args, W)
    except WorkspaceError as e:
        for line, msg in e.errors:
            where = "%s:%d" % (ns.input, line) if line else ns.input
            print("%s: error: %s" % (where, msg), file=sys.stderr)
        return 2
    except (InputError, ModuleError, PosetError, RewriteError, OSError, ValueError) as e:
        print("nccech: error: %s" % e, file=sys.stderr)
        return 2
    text = dumps(report)
    if ns.json:
        with open(ns.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
