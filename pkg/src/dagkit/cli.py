"""``dagkit`` command-line front end.

Every command prints one report (JSON by default).  Exit status is 0 when a
result or verdict was computed, 2 when the verdict is inconclusive and 1 on
error.
"""

import argparse
import hashlib
import json
import os
import random
import sys
import time

from . import derham, derived_ops, simplicial, sschemes
from .dsl import parse
from .errors import DegreeError, NotSquareZeroError, PrecisionError, UndecidableError
from .expr import DslError

SCHEMA = 1
PRECISION_ENV = "DAGKIT_PRECISION"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1; status 2 means inconclusive."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        sys.exit(1)


class Inconclusive(Exception):
    """Raised to turn a partial result into exit status 2."""

    def __init__(self, result):
        super().__init__("inconclusive")
        self.result = result


# ------------------------------------------------------------ helpers

def _window(text):
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be 'lo,hi'")
    if a > b:
        raise argparse.ArgumentTypeError("window must have lo <= hi")
    return (a, b)


def _kan(text):
    try:
        a, n = text.split(",")
        return a.strip(), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("expected e.g. 'Ga,2'")


def _load(args):
    if not args.file:
        raise CliError("this command needs an input file")
    with open(args.file, "rb") as fh:
        data = fh.read()
    args._inputs[args.file] = hashlib.sha256(data).hexdigest()
    return parse(data.decode("utf-8"))


def _pick(ws, names, i, kinds, what):
    if len(names) <= i:
        cands = ws.names()
        cands = [n for n in cands if ws.decls[n].kind in kinds]
        if len(cands) == 1 and i == 0:
            return ws.get(cands[0])
        raise CliError("missing %s argument" % what)
    try:
        return ws.get(names[i], kinds)
    except KeyError as e:
        raise CliError(e.args[0])


def _precision(args):
    if args.precision is not None:
        return args.precision
    env = os.environ.get(PRECISION_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError("%s must be an integer" % PRECISION_ENV)
    return None


def _cdga_summary(A):
    return sschemes.factor_to_dict(A)


def _builtin_scheme(args):
    """Simplicial scheme from the built-in target flags, or None."""
    N = args.levels
    if getattr(args, "bg", None):
        G = sschemes.group(args.bg)
        return sschemes.classifying_nerve(G, N=N or 3)
    if getattr(args, "kan", None):
        a, n = args.kan
        return sschemes.K_An(a, n, N=N or n + 1)
    if getattr(args, "p1", False) or getattr(args, "p1_twist", None) is not None:
        return sschemes.projective_line().nerve(N or 3)
    return None


def _scheme_from_file(args, ws, names):
    d = ws.decls.get(names[0]) if names else None
    if d is None:
        cands = [n for n in ws.names() if ws.decls[n].kind in ("simplicial", "cover", "action")]
        if len(cands) != 1:
            raise CliError("name a simplicial, cover or action declaration")
        d = ws.decls[cands[0]]
    N = args.levels
    if d.kind == "simplicial":
        return d.value
    if d.kind == "cover":
        return sschemes.cech_nerve(d.value["base"], d.value["elements"], N=N or 2, name=d.name)
    if d.kind == "action":
        v = d.value
        return sschemes.classifying_nerve(v["group"], v["space"], v["coaction"], N=N or 3, name=d.name)
    raise CliError("%r is a %s, not a simplicial object" % (d.name, d.kind))


def _scheme(args):
    X = _builtin_scheme(args)
    if X is not None:
        return X
    ws = _load(args)
    return _scheme_from_file(args, ws, args.names)


# ------------------------------------------------------------ commands

def cmd_validate(args):
    ws = _load(args)
    out = {}
    for n in ws.order:
        d = ws.decls[n]
        entry = {"kind": d.kind, "ok": True}
        if d.kind == "simplicial":
            v = d.value.validate()
            entry["ok"] = bool(v.ok)
            if not v.ok:
                entry["reason"] = "%s %s" % (v.item, v.message)
        out[n] = entry
    ok = all(e["ok"] for e in out.values())
    if not ok:
        raise CliError("validation failed: %s" % json.dumps(out, sort_keys=True))
    return {"ok": True, "declarations": out}


def cmd_homology(args):
    ws = _load(args)
    A = _pick(ws, args.names, 0, ("cdga", "ring"), "cdga")
    return A.homology_report(args.max_degree)


def _euler(A, max_degree):
    e = derived_ops.euler_data(A, max_degree)
    return {"dims": e["dims"], "euler_characteristic": e["euler_characteristic"],
            "vdim": e["vdim"], "complete": e["complete"]}


def cmd_dtensor(args):
    ws = _load(args)
    names = list(args.names)
    R = None
    if "over" in names:
        k = names.index("over")
        if k + 1 >= len(names):
            raise CliError("'over' needs a base name")
        R = ws.get(names[k + 1], ("ring", "cdga"))
        names = names[:k]
    if len(names) != 2:
        raise CliError("usage: dtensor FILE A B [over R]")
    A = ws.get(names[0], ("ring", "cdga"))
    B = ws.get(names[1], ("ring", "cdga"))
    T = derived_ops.derived_tensor(A, B, R, name="%s_x_%s" % (names[0], names[1]))
    return {"model": _cdga_summary(T), "odd_generators": sum(1 for g in T.gens if g.degree % 2),
            "homology": T.homology_report(args.max_degree), "euler": _euler(T, args.max_degree)}


def cmd_loop(args):
    ws = _load(args)
    A = _pick(ws, args.names, 0, ("ring", "cdga"), "cdga")
    L = derived_ops.derived_loop_space(A, name="L" + (A.name or "A"))
    return {"model": _cdga_summary(L), "homology": L.homology_report(args.max_degree)}


def cmd_crit(args):
    ws = _load(args)
    if args.names:
        name = args.names[0]
        d = ws.decls.get(name)
        if d is None:
            raise CliError("no declaration named %r" % name)
        if d.kind == "def":
            from .dsl import Decl, _build_crit

            tmp = Decl("cdga", "crit_" + name, d.span, {"crit": name, "crit_span": d.span})
            A = _build_crit(ws, tmp)
        elif d.kind == "cdga" and "crit" in d.syntax:
            A = d.value
        else:
            raise CliError("%r is not a function or critical locus" % name)
    else:
        raise CliError("usage: crit FILE F")
    return {"model": _cdga_summary(A), "homology": A.homology_report(args.max_degree),
            "euler": _euler(A, args.max_degree)}


def _cotangent(args, ws):
    A = _pick(ws, args.names, 0, ("ring", "cdga"), "cdga")
    base = [v for v in (args.base or "").split(",") if v.strip()]
    base = [v.strip() for v in base]
    if A.is_discrete() and A.base_ideal:
        model = derived_ops.cofibrant_model(A)
    else:
        model = A
    if A.is_discrete() and not A.base_ideal:
        return derived_ops.cotangent_complex("smooth", base, ring_vars=list(A.ring.names))
    return derived_ops.cotangent_complex("semifree", base, model=model)


def cmd_cotangent(args):
    ws = _load(args)
    L = _cotangent(args, ws)
    dims = {}
    for i in L.degrees():
        H = L.homology(i)
        dims[str(i)] = H.q_dimension() if H.rank else 0
    return {"presentation": L.to_dict(), "homology_q_dimensions": dims, "acyclic": L.is_acyclic()}


def _point(text):
    out = {}
    for part in (text or "").split(","):
        if not part.strip():
            continue
        k, _, v = part.partition("=")
        out[k.strip()] = v.strip()
    return out


def cmd_aq(args):
    ws = _load(args)
    L = _cotangent(args, ws)
    D = derived_ops.andre_quillen(L, "point", _point(args.point))
    return {"point": dict(sorted(_point(args.point).items())), "dimensions": {str(k): v for k, v in sorted(D.items())}}


def cmd_derham(args):
    ws = _load(args)
    A = _pick(ws, args.names, 0, ("ring", "cdga"), "cdga")
    N = _precision(args) or 3
    window = args.window or (0, 2)
    rep = derham.derived_de_rham(A, N=N, window=window, p=args.hodge)
    out = rep.to_dict()
    if not rep.stabilized:
        raise Inconclusive(out)
    return out


def cmd_symplectic(args):
    ws = _load(args)
    A = _pick(ws, args.names, 0, ("cdga",), "cdga")
    datum = derham.canonical_form(A)
    pc = derham.presymplectic_check(datum)
    pc = pc.to_dict() if hasattr(pc, "to_dict") else pc
    nd = derham.nondegeneracy_certificate(datum)
    out = {"presymplectic": pc, "nondegeneracy": nd}
    if nd["verdict"] == "inconclusive":
        raise Inconclusive(out)
    return out


def cmd_simp_check(args):
    X = _scheme(args)
    v = X.validate()
    out = {"ok": bool(v.ok), "sizes": X.sizes(), "discrete": X.is_discrete()}
    if not v.ok:
        out["reason"] = "%s %s" % (v.item, v.message)
    return out


def cmd_nerve(args):
    if args.cyclic is not None:
        G = simplicial.cyclic_group_groupoid(args.cyclic)
    else:
        G = simplicial.random_groupoid(random.Random(args.seed))
    X = simplicial.nerve(G, max_level=args.levels or 3)
    return {"sizes": X.sizes(), "hypergroupoid_0": simplicial.hypergroupoid_check(X, 0),
            "hypergroupoid_1": simplicial.hypergroupoid_check(X, 1)}


def cmd_doldkan(args):
    top = args.levels or 6
    K = simplicial.eilenberg_maclane(args.n, top)
    return {"n": args.n, "level_dimensions": [K.dims[m] for m in range(top + 1)],
            "roundtrip": simplicial.roundtrip_normalize_denormalize(simplicial.shifted_line(args.n), top)}


def cmd_ez(args):
    rng = random.Random(args.seed)
    results = []
    for _ in range(args.count):
        B, (C1, C2) = simplicial.random_product_bisimplicial(rng)
        top = C1.top() + C2.top()
        results.append({"dims": [C1.dims, C2.dims], "aw_after_ez_is_identity": simplicial.aw_after_ez_is_identity(B, top)})
    return {"seed": args.seed, "instances": results, "all_identity": all(r["aw_after_ez_is_identity"] for r in results)}


def cmd_cech(args):
    ws = _load(args)
    d = None
    for n in ([args.names[0]] if args.names else ws.names("cover")):
        d = ws.decls.get(n)
        break
    if d is None or d.kind != "cover":
        raise CliError("name a cover declaration")
    X = sschemes.cech_nerve(d.value["base"], d.value["elements"], N=args.levels or 2, name=d.name)
    v = X.validate()
    return {"sizes": X.sizes(), "valid": bool(v.ok), "scheme": X.to_dict()}


def _verdict(res):
    res = dict(res)
    if res.get("verdict") == "inconclusive":
        raise Inconclusive(res)
    return res


def cmd_hypergroupoid(args):
    X = _scheme(args)
    return _verdict(sschemes.artin_dm_hypergroupoid_check(X, args.n, kind=args.kind, max_level=args.max_level))


def cmd_derived_hypergroupoid(args):
    X = _scheme(args)
    return _verdict(sschemes.homotopy_derived_hypergroupoid_check(X, args.n, kind=args.kind, max_level=args.max_level))


def _p1_bundle(args):
    if args.p1_twist is None:
        raise CliError("global-sections and cocycle need --p1-twist D")
    X = sschemes.projective_line().nerve(args.levels or 3)
    return X, sschemes.p1_twist(args.p1_twist)


def cmd_global_sections(args):
    X, omega = _p1_bundle(args)
    F = sschemes.line_bundle(X, omega)
    window = args.window or (0, 1)
    rep = sschemes.derived_global_sections(X, F, window=window, degree_bound=_precision(args))
    return rep.to_dict()


def cmd_cocycle(args):
    X, omega = _p1_bundle(args)
    res = sschemes.cocycle_check(X, omega)
    return {"twist": args.p1_twist, **res}


COMMANDS = {
    "validate": (cmd_validate, "parse a file and check every declaration"),
    "homology": (cmd_homology, "homology presentations of a cdga"),
    "dtensor": (cmd_dtensor, "derived tensor product: dtensor FILE A B [over R]"),
    "loop": (cmd_loop, "derived loop space"),
    "crit": (cmd_crit, "derived critical locus of a declared function"),
    "cotangent": (cmd_cotangent, "cotangent complex"),
    "aq": (cmd_aq, "Andre-Quillen cohomology at a point"),
    "derham": (cmd_derham, "derived de Rham cohomology of the product total complex"),
    "symplectic": (cmd_symplectic, "canonical shifted symplectic form checks"),
    "simp-check": (cmd_simp_check, "cosimplicial identities of a simplicial scheme"),
    "nerve": (cmd_nerve, "nerve of a finite groupoid"),
    "doldkan": (cmd_doldkan, "Dold-Kan denormalization of Q[n]"),
    "ez": (cmd_ez, "Eilenberg-Zilber and Alexander-Whitney on random bisimplicial spaces"),
    "cech": (cmd_cech, "Cech nerve of a cover"),
    "hypergroupoid": (cmd_hypergroupoid, "Artin or DM n-hypergroupoid check"),
    "derived-hypergroupoid": (cmd_derived_hypergroupoid, "homotopy derived hypergroupoid check"),
    "global-sections": (cmd_global_sections, "Cech cohomology of a line bundle on P^1"),
    "cocycle": (cmd_cocycle, "cocycle condition of a transition datum"),
}


def build_parser():
    p = _Parser(prog="dagkit", description="Computations with cdgas and simplicial schemes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("file", nargs="?")
        s.add_argument("names", nargs="*")
        s.add_argument("--max-degree", type=int, default=None)
        s.add_argument("--precision", type=int, default=None)
        s.add_argument("--window", type=_window, default=None)
        s.add_argument("--format", choices=("json", "text"), default="json")
        s.add_argument("--timing", action="store_true")
        s.add_argument("--levels", type=int, default=None, help="top stored simplicial level")
        s.add_argument("--max-level", type=int, default=None)
        s.add_argument("--n", type=int, default=1)
        s.add_argument("--kind", choices=("artin", "dm"), default="artin")
        s.add_argument("--p1", action="store_true")
        s.add_argument("--p1-twist", type=int, default=None)
        s.add_argument("--bg", default=None)
        s.add_argument("--kan", type=_kan, default=None)
        s.add_argument("--base", default=None, help="comma-separated base variables")
        s.add_argument("--point", default=None, help="e.g. x=0,y=1")
        s.add_argument("--hodge", type=int, default=0)
        s.add_argument("--cyclic", type=int, default=None)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--count", type=int, default=10)
    return p


def _needs_no_file(args):
    return args.command in ("nerve", "doldkan", "ez", "global-sections", "cocycle") or bool(
        args.bg or args.kan or args.p1 or args.p1_twist is not None)


def _text(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj, key=str):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                lines.append("%s%s:" % (pad, k))
                lines.extend(_text(v, indent + 1))
            else:
                lines.append("%s%s: %s" % (pad, k, json.dumps(v, sort_keys=True)))
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and v:
                lines.append("%s-" % pad)
                lines.extend(_text(v, indent + 1))
            else:
                lines.append("%s- %s" % (pad, json.dumps(v, sort_keys=True)))
    else:
        lines.append(pad + json.dumps(obj, sort_keys=True))
    return lines


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


def run(argv):
    """Run one command; returns (exit status, report dict, output format)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    args._inputs = {}
    if args.file and _needs_no_file(args) and not os.path.exists(args.file):
        args.names.insert(0, args.file)
        args.file = None
    report = {"schema": SCHEMA, "command": {"name": args.command, "argv": list(argv)},
              "precision": {"max_degree": args.max_degree, "precision": args.precision,
                            "window": list(args.window) if args.window else None,
                            "env": os.environ.get(PRECISION_ENV)}}
    t0 = time.perf_counter()
    status = 0
    try:
        report["result"] = COMMANDS[args.command][0](args)
        report["status"] = "ok"
    except Inconclusive as e:
        report["result"] = e.result
        report["status"] = "inconclusive"
        status = 2
    except DslError as e:
        report["status"] = "error"
        report["error"] = {"type": "dsl", "kind": e.kind, "message": str(e),
                           "span": repr(e.span) if e.span else None}
        status = 1
    except (CliError, DegreeError, NotSquareZeroError, PrecisionError, UndecidableError,
            ValueError, KeyError) as e:
        report["status"] = "error"
        report["error"] = {"type": type(e).__name__, "message": str(e.args[0]) if e.args else str(e)}
        status = 1
    except OSError as e:
        report["status"] = "error"
        report["error"] = {"type": type(e).__name__, "message": "%s: %s" % (e.strerror, e.filename)}
        status = 1
    report["inputs"] = dict(sorted(args._inputs.items()))
    if args.timing:
        report["timing"] = {"seconds": round(time.perf_counter() - t0, 6)}
    report = _jsonable(report)
    return status, report, args.format


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    status, report, fmt = run(argv)
    if fmt == "text":
        sys.stdout.write("\n".join(_text(report)) + "\n")
    else:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
