"""Command-line front end.  Every subcommand prints one JSON report.

Exit status: 0 when the verdict is holds/valid/found, 1 when it is
fails/refuted/not-found/inconclusive, 2 on any error (with a JSON
``{"error", "detail"}`` object on stderr).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, amenability, dsl, groups, io, matching, unitary
from .errors import BudgetExhaustedError, DisagreementError, GroupAxiomError, MetlogicError, MetricAxiomError
from .logic import Modulus, evaluate
from .logic.formula import Const
from .parallel import worker_count
from .rationals import number_json, rational_str, to_rational

# flags that may change how a report is computed but never what it says
_NOT_CONFIG = {"func", "workers", "output"}


class CLIError(MetlogicError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message, {"usage": self.format_usage().strip()})


# ------------------------------------------------------------ helpers


def _rat(text):
    try:
        return to_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _rat_list(text):
    try:
        return [to_rational(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a list of rationals: {text!r}") from exc


def _jsonable(value):
    if isinstance(value, Fraction):
        return rational_str(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def _config(args) -> dict:
    cfg = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}
    if "open" in cfg:
        cfg["closure"] = "open" if cfg.pop("open") else "closed"
        cfg.pop("closed")
    return cfg


def ast_json(node):
    """Generic JSON form of a formula node."""
    if isinstance(node, dsl.Condition):
        return {"node": "Condition", "expr": ast_json(node.expr), "bound": rational_str(node.bound)}
    if isinstance(node, Const):
        return {"node": "Const", "value": rational_str(node.value)}
    if isinstance(node, Modulus):
        return node.to_json()
    if dataclasses.is_dataclass(node):
        out = {"node": type(node).__name__}
        for f in dataclasses.fields(node):
            out[f.name] = ast_json(getattr(node, f.name))
        return out
    if isinstance(node, (list, tuple)):
        return [ast_json(x) for x in node]
    return _jsonable(node)


def _read_text(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read {source}: {exc.strerror}", {"path": source}) from None


def _closed(args) -> bool:
    return not args.open


def _add_closure(p):
    m = p.add_mutually_exclusive_group()
    m.add_argument("--closed", action="store_true", help="closed ball B_q (default)")
    m.add_argument("--open", action="store_true", help="open ball B_<q")


def _labels(g, xs):
    return [g.label(x) for x in xs]


# ------------------------------------------------------------ subcommands


def cmd_parse(args):
    items = dsl.parse_file(_read_text(args.file))
    return 0, {"items": [{"name": n, "ast": ast_json(f)} for n, f in items]}


def cmd_fmt(args):
    text = dsl.print_file(dsl.parse_file(_read_text(args.file)))
    return 0, {"text": text}


def _structure_and_parser(path):
    data = io.read_json(path)
    if "group" in data:
        gpath = Path(data["group"])
        if not gpath.is_absolute():
            gpath = Path(path).parent / gpath
        g = io.load_group(gpath)
        return groups.group_structure(g, data.get("sort", "G")), g.parse, g.label
    return io.structure_from_dict(data, Path(path).parent), str, str


def _pairs(items, what):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise CLIError(f"{what} must look like name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_eval(args):
    s, parse_el, label = _structure_and_parser(args.structure)
    text = args.formula if args.formula is not None else _read_text(args.file)
    items = dsl.parse_file(text, s.signature())
    env = {k: parse_el(v) for k, v in _pairs(args.assign, "--assign").items()}
    sorts = _pairs(args.sort, "--sort")
    rows, all_hold = [], True
    for name, item in items:
        f = item.expr if isinstance(item, dsl.Condition) else item
        value = evaluate(f, s, env, sorts)
        row = {"name": name, "formula": dsl.print_formula(f), "value": number_json(value)}
        if isinstance(item, dsl.Condition):
            row["bound"] = rational_str(item.bound)
            row["holds"] = bool(value <= item.bound)
            all_hold &= row["holds"]
        rows.append(row)
    return (0 if all_hold else 1), {
        "assignment": {k: label(v) for k, v in sorted(env.items())},
        "items": rows,
    }


def cmd_mu(args):
    g = io.load_group(args.group)
    F1, F2 = g.parse_list(args.F1), g.parse_list(args.F2)
    U = groups.BallSpec(args.q, _closed(args))
    b = matching.build_RU(g, F1, F2, U)
    res = matching.mu(b, args.method)
    out = res.to_json()
    out["witness_S"] = [g.label(F1[i]) for i in res.witness_S]
    out["matching"] = [[g.label(F1[i]), g.label(F2[j])] for i, j in res.matching]
    out["U"] = U.to_json()
    out["deficiency"] = len(F1) - res.mu
    return 0, out


def cmd_phi(args):
    spec = amenability.PhiSpec(args.k, args.q, args.theta, "positive" if args.variant == "pos" else "negative")
    atoms = amenability.ast_size_estimate(spec)
    out = {"variant": spec.variant, "k": spec.k, "q": rational_str(spec.q), "theta": rational_str(spec.theta),
           "atoms": atoms}
    if args.emit_dsl or args.group is None:
        if atoms > args.budget:
            raise BudgetExhaustedError(
                f"formula has {atoms} distance atoms, above the budget {args.budget}",
                {"atoms": atoms, "budget": args.budget},
            )
        out["dsl"] = dsl.print_formula(amenability.build_phi(spec))
    if args.group is None:
        return 0, out
    if args.F is None or args.y is None:
        raise CLIError("evaluating phi needs --F and --y along with --group")
    g = io.load_group(args.group)
    F, y = g.parse_list(args.F), g.parse(args.y)
    if len(set(F)) != len(F) and not args.multiset:
        raise CLIError("F repeats an element; pass --multiset for the index-level reading")
    if atoms <= args.budget:
        rep = amenability.lemma_equivalence_check(g, F, y, spec, args.budget, multiset=args.multiset)
        if not rep.agree:
            raise DisagreementError("formula and matching criterion disagree", rep.to_json())
        out.update(rep.to_json())
        value = rep.ast_value
    else:
        value = amenability.phi_value_fast(g, F, y, spec)
        out["closed_form_value"] = rational_str(value)
        out["matching_criterion_holds"] = amenability.phi_holds_fast(g, F, y, spec)
    out["F"], out["y"] = _labels(g, F), g.label(y)
    out["holds"] = value <= 0
    return (0 if value <= 0 else 1), out


def cmd_folner(args):
    g = io.load_group(args.group)
    E = g.parse_list(args.E)
    ground = g.parse_list(args.ground) if args.ground else None
    res = amenability.folner_search(
        g, E, args.theta, args.q, _closed(args), args.strategy, args.budget, ground, args.workers,
        compact_shortcut=not args.no_compact,
    )
    out = {"strategy": res.strategy, "evaluated": res.evaluated, "found": res.found}
    if res.found:
        check = amenability.verify_certificate(g, res.certificate)
        out["certificate"] = res.certificate.to_json(g)
        out["verification"] = check.verdict
        return (0 if check.verdict == "valid" else 1), out
    out["not_found"] = res.not_found.to_json(g)
    return 1, out


def _y_tuples(g, args):
    if args.y:
        return [g.parse_list(t) for t in args.y.split(";") if t.strip()]
    pool = g.parse_list(args.pool) if args.pool else None
    return amenability.sample_tuples(g, args.l, pool, args.samples, args.seed)


def cmd_schema(args):
    g = io.load_group(args.group)
    ground = g.parse_list(args.ground) if args.ground else None
    rep = amenability.schema_value(
        g, args.theta, args.q, args.l, args.k_max, _y_tuples(g, args), args.budget, args.variant, ground,
        args.workers,
    )
    ok = all(v == "certified-for-samples" for v in rep.verdicts.values())
    return (0 if ok else 1), rep.to_json(g)


def cmd_group_validate(args):
    try:
        g = io.load_group(args.file)
    except (GroupAxiomError, MetricAxiomError) as exc:
        return 1, {"valid": False, "reason": str(exc), "witness": _jsonable(exc.detail)}
    out = {"valid": True, "kind": g.kind, "order": g.order, "discrete": g.is_discrete,
           "bound": rational_str(g.bound), "bi_invariant": g.bi_invariant}
    if not g.bi_invariant:
        w = groups.bi_invariance_witness(g)
        out["bi_invariance_witness"] = _jsonable(w) if w is not None else None
    if g.metadata:
        out["metadata"] = g.metadata
    return 0, out


def cmd_group_dstar(args):
    g = io.load_group(args.file)
    h = groups.biinvariantize(g)
    return 0, {"group": h.spec(), "bi_invariant": h.bi_invariant}


def cmd_group_ball(args):
    g = io.load_group(args.file)
    U = groups.BallSpec(args.q, _closed(args))
    return 0, {"U": U.to_json(), "elements": _labels(g, groups.ball(g, U))}


def cmd_rep_check(args):
    r = io.load_rep(args.file)
    chk = unitary.check_rep(r)
    cont = unitary.check_F_continuity(r, samples=args.samples, seed=args.seed)
    out = {"dim": r.dim, "rep": chk.to_json(), "continuity": cont.to_json()}
    if r.group.kind == "table":
        fdim = unitary.fixed_space(r).shape[1]
        out["fixed_space_dim"] = fdim
        if fdim == 0:
            out["kazhdan_pair"] = unitary.kazhdan_pair_check(r, args.samples, args.seed).to_json()
    ok = chk.passed and cont.passed and out.get("kazhdan_pair", {}).get("passed", True)
    return (0 if ok else 1), out


def cmd_rep_radius(args):
    r = io.load_rep(args.file)
    rad = unitary.epsilon_invariant_radius(r, r.group.parse_list(args.Q))
    return 0, rad.to_json(r.group)


def cmd_rep_niv(args):
    r = io.load_rep(args.file)
    return 0, unitary.niv_value(r, args.samples, args.seed).to_json()


def cmd_rep_kdelta(args):
    r = io.load_rep(args.file)
    g = r.group
    if args.tuples:
        tuples = [g.parse_list(t) for t in args.tuples.split(";") if t.strip()]
    elif args.pool:
        import itertools

        tuples = list(itertools.product(g.parse_list(args.pool), repeat=args.k))
    else:
        tuples = None
    if tuples is not None and any(len(t) != args.k for t in tuples):
        raise CLIError(f"every tuple must have k = {args.k} elements")
    rep = unitary.kdelta_axiom_check(r, args.delta, args.k, args.m, args.n, tuples)
    out = rep.to_json(g)
    out.update(delta=rational_str(args.delta), k=args.k, m=args.m, n=args.n)
    return (0 if rep.holds else 1), out


def cmd_rep_refute(args):
    family = sorted(Path(args.family).glob("*.json"))
    if not family:
        raise CLIError(f"no representation files in {args.family}", {"family": args.family})
    checked = []
    for path in family:
        r = io.load_rep(path)
        Q = r.group.parse_list(args.Q)
        hit = unitary.refute_kazhdan_set(Q, float(args.eps), [r])
        rad = unitary.epsilon_invariant_radius(r, Q)
        checked.append({"file": path.name, "radius_interval": [rad.lo, rad.hi]})
        if hit is not None:
            _, _, rad = hit
            return 0, {"refuted": True, "witness_rep": path.name, "radius": rad.to_json(r.group),
                       "checked": checked}
    return 1, {"refuted": False, "checked": checked}


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed recorded in the report")
    common.add_argument("--workers", type=int, default=None, help="process count (capped by ML_WORKERS)")
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")

    p = _Parser(prog="metlogic", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"metlogic {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common], help="parse a .cl file and print its AST")
    s.add_argument("file")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("fmt", parents=[common], help="print a .cl file in canonical form")
    s.add_argument("file")
    s.add_argument("--json", action="store_true", help="wrap the text in a JSON report")
    s.set_defaults(func=cmd_fmt)

    s = sub.add_parser("eval", parents=[common], help="evaluate formulas in a structure")
    s.add_argument("--structure", required=True)
    s.add_argument("--formula", help="formula text (otherwise read FILE)")
    s.add_argument("file", nargs="?")
    s.add_argument("--assign", action="append", metavar="VAR=ELEMENT")
    s.add_argument("--sort", action="append", metavar="VAR=SORT")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("mu", parents=[common], help="matching number mu(F1, F2, U)")
    s.add_argument("--group", required=True)
    s.add_argument("--F1", required=True)
    s.add_argument("--F2", required=True)
    s.add_argument("--q", type=_rat, required=True)
    _add_closure(s)
    s.add_argument("--method", choices=matching.METHODS, default="both")
    s.set_defaults(func=cmd_mu)

    s = sub.add_parser("phi", parents=[common], help="build (and optionally evaluate) phi_{k,q,theta}")
    s.add_argument("--variant", choices=("pos", "neg"), default="pos")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--q", type=_rat, required=True)
    s.add_argument("--theta", type=_rat, required=True)
    s.add_argument("--emit-dsl", action="store_true")
    s.add_argument("--group")
    s.add_argument("--F")
    s.add_argument("--y")
    s.add_argument("--multiset", action="store_true", help="allow repeated elements in F")
    s.add_argument("--budget", type=int, default=2_000_000, help="distance-atom budget for the formula")
    s.set_defaults(func=cmd_phi)

    s = sub.add_parser("folner-search", parents=[common], help="search for a matching certificate F")
    s.add_argument("--group", required=True)
    s.add_argument("--E", required=True)
    s.add_argument("--theta", type=_rat, required=True)
    s.add_argument("--q", type=_rat, required=True)
    _add_closure(s)
    s.add_argument("--strategy", choices=("exhaustive", "ball-growing", "greedy-local"), default="exhaustive")
    s.add_argument("--budget", type=int, default=1 << 20)
    s.add_argument("--ground", help="restrict F to these elements")
    s.add_argument("--no-compact", action="store_true", help="skip the F = G shortcut for finite groups")
    s.set_defaults(func=cmd_folner)

    s = sub.add_parser("schema", parents=[common], help="truncated evaluation of the axiom schemata")
    s.add_argument("--variant", choices=("amen", "nonamen"), default="amen")
    s.add_argument("--group", required=True)
    s.add_argument("--theta", type=_rat, required=True)
    s.add_argument("--q", type=_rat_list, required=True, help="one q, or a comma list (a grid)")
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--k-max", type=int, required=True)
    s.add_argument("--y", help="explicit y-tuples, e.g. '1,-1;2,3'")
    s.add_argument("--pool", help="draw y entries from these elements")
    s.add_argument("--samples", type=int, default=None, help="seeded random tuples instead of all of them")
    s.add_argument("--ground")
    s.add_argument("--budget", type=int, default=1 << 20)
    s.set_defaults(func=cmd_schema)

    s = sub.add_parser("group", help="group files")
    gsub = s.add_subparsers(dest="action", required=True)
    t = gsub.add_parser("validate", parents=[common])
    t.add_argument("file")
    t.set_defaults(func=cmd_group_validate)
    t = gsub.add_parser("dstar", parents=[common], help="bi-invariant metric d*")
    t.add_argument("file")
    t.set_defaults(func=cmd_group_dstar)
    t = gsub.add_parser("ball", parents=[common])
    t.add_argument("file")
    t.add_argument("--q", type=_rat, required=True)
    _add_closure(t)
    t.set_defaults(func=cmd_group_ball)

    s = sub.add_parser("rep", help="unitary representation files")
    rsub = s.add_subparsers(dest="action", required=True)
    t = rsub.add_parser("check", parents=[common])
    t.add_argument("file")
    t.add_argument("--samples", type=int, default=200)
    t.set_defaults(func=cmd_rep_check)
    t = rsub.add_parser("radius", parents=[common])
    t.add_argument("file")
    t.add_argument("--Q", required=True)
    t.set_defaults(func=cmd_rep_radius)
    t = rsub.add_parser("niv", parents=[common])
    t.add_argument("file")
    t.add_argument("--samples", type=int, default=1000)
    t.set_defaults(func=cmd_rep_niv)
    t = rsub.add_parser("kdelta", parents=[common])
    t.add_argument("file")
    t.add_argument("--delta", type=_rat, required=True)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--m", type=int, required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--tuples", help="explicit tuples, e.g. '0,1;2,-3'")
    t.add_argument("--pool", help="all k-tuples from these elements")
    t.set_defaults(func=cmd_rep_kdelta)
    t = rsub.add_parser("refute", parents=[common])
    t.add_argument("--Q", required=True)
    t.add_argument("--eps", type=_rat, required=True)
    t.add_argument("--family", required=True, help="directory of rep files, scanned in name order")
    t.set_defaults(func=cmd_rep_refute)
    return p


def _emit_error(exc: Exception) -> int:
    detail = exc.detail if isinstance(exc, MetlogicError) else {}
    payload = {"error": type(exc).__name__, "detail": {"message": str(exc), **_jsonable(detail)}}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CLIError as exc:
        return _emit_error(exc)
    except SystemExit as exc:  # --help, --version
        return int(exc.code or 0)
    if getattr(args, "workers", None) is not None:
        args.workers = worker_count(args.workers)
    try:
        code, result = args.func(args)
    except (MetlogicError, ValueError, ZeroDivisionError) as exc:
        return _emit_error(exc)
    if args.func is cmd_fmt and not args.json:
        text = result["text"]
    elif args.func is cmd_phi and args.emit_dsl and args.group is None:
        text = result["dsl"] + "\n"
    else:
        report = {
            "command": " ".join(x for x in (args.command, getattr(args, "action", None)) if x),
            "version": __version__,
            "seed": args.seed,
            "config": _config(args),
            "result": result,
        }
        text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    try:
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OSError as exc:
        return _emit_error(CLIError(f"cannot write report: {exc.strerror}"))
    return code


if __name__ == "__main__":
    sys.exit(main())
