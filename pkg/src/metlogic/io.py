"""JSON loaders for groups, structures and representations."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import groups, unitary
from .errors import MetlogicError
from .logic.modulus import Modulus
from .logic.structure import FunctionSymbol, PredicateSymbol, Sort, Structure
from .rationals import to_rational


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise MetlogicError(f"cannot read {path}: {exc.strerror}", {"path": str(path)}) from None
    except json.JSONDecodeError as exc:
        raise MetlogicError(f"malformed JSON in {path}: {exc.msg}", {"line": exc.lineno}) from None


_BUILTINS = {
    "cyclic": lambda a: groups.cyclic(int(a[0])),
    "dihedral": lambda a: groups.dihedral(int(a[0])),
    "symmetric": lambda a: groups.symmetric(int(a[0])),
    "quaternion": lambda a: groups.quaternion(),
}


def group_from_dict(data: dict) -> groups.MetricGroup:
    if not isinstance(data, dict):
        raise MetlogicError("group description must be a JSON object")
    kind = data.get("kind")
    metric = data.get("metric", "discrete")
    try:
        if kind == "table":
            g = groups.make_finite(
                data["table"],
                inverse=data.get("inverse"),
                identity=data.get("identity"),
                metric=metric,
                elements=data.get("elements"),
                bound=data.get("bound", 1),
                name=data.get("name", ""),
                metadata=data.get("metadata"),
            )
        elif kind == "enumerated":
            g = groups.enumerate_ball(
                data,
                int(data["radius"]),
                cap=int(data.get("cap", groups.DEFAULT_CAP)),
                metric=metric,
                bound=data.get("bound", 1),
            )
            g.metadata = dict(data.get("metadata") or {})
            if data.get("name"):
                g.name = data["name"]
        elif kind == "builtin":
            name, *args = str(data["name"]).split(":")
            if name not in _BUILTINS:
                raise MetlogicError(f"unknown built-in group {name!r}")
            g = _BUILTINS[name](args)
            if metric != "discrete":
                g = g.with_metric(groups._metric_table(metric, g))
            g.metadata = dict(data.get("metadata") or {})
        else:
            raise MetlogicError(f"unknown group kind {kind!r}")
    except KeyError as exc:
        raise MetlogicError(f"group description lacks field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise MetlogicError(f"bad group description: {exc}") from None
    return g


def load_group(path) -> groups.MetricGroup:
    return group_from_dict(read_json(path))


def _modulus(data):
    if data is None:
        return None
    return Modulus.from_json(data)


def _table_lookup(table, arity):
    def impl(*args):
        key = ",".join(str(a) for a in args)
        if key not in table:
            raise MetlogicError(f"symbol table has no entry for ({key})")
        return table[key]

    return impl


def structure_from_dict(data: dict, base: Path | None = None) -> Structure:
    """A structure file, or ``{"group": path}`` for a group's own structure."""
    if "group" in data:
        path = Path(data["group"])
        if base is not None and not path.is_absolute():
            path = base / path
        return groups.group_structure(load_group(path), data.get("sort", "G"))
    try:
        bound = to_rational(data.get("bound", 1))
        sorts = {}
        for name, s in data["sorts"].items():
            els = tuple(str(e) for e in s["elements"])
            metric = s.get("metric", "discrete")
            if metric == "discrete":
                def d(a, b):
                    return to_rational(0 if a == b else 1)
            else:
                pos = {e: i for i, e in enumerate(els)}
                rows = [[to_rational(x) for x in row] for row in metric]

                def d(a, b, rows=rows, pos=pos):
                    return rows[pos[a]][pos[b]]
            sorts[name] = Sort(name, els, d, to_rational(s.get("bound", bound)))
        funcs = {}
        for name, f in data.get("functions", {}).items():
            table = {str(k): str(v) for k, v in f["table"].items()}
            funcs[name] = FunctionSymbol(
                name, tuple(f["args"]), f["result"], _table_lookup(table, len(f["args"])), _modulus(f.get("modulus"))
            )
        preds = {}
        for name, p in data.get("predicates", {}).items():
            table = {str(k): to_rational(v) for k, v in p["table"].items()}
            preds[name] = PredicateSymbol(
                name,
                tuple(p["args"]),
                _table_lookup(table, len(p["args"])),
                _modulus(p.get("modulus")),
                to_rational(p.get("lo", 0)),
                to_rational(p["hi"]) if "hi" in p else None,
            )
    except KeyError as exc:
        raise MetlogicError(f"structure description lacks field {exc}") from None
    s = Structure(sorts, funcs, preds, bound)
    s.validate()
    return s


def load_structure(path) -> Structure:
    return structure_from_dict(read_json(path), Path(path).parent)


def _matrix(rows) -> np.ndarray:
    return np.array([[complex(z[0], z[1]) if isinstance(z, list) else complex(z) for z in row] for row in rows])


def rep_from_dict(data: dict, base: Path | None = None, group=None) -> unitary.UnitaryRep:
    """Rep file: explicit matrices, generator matrices, or a named construction."""
    if group is None:
        gdata = data.get("group")
        if isinstance(gdata, dict):
            group = group_from_dict(gdata)
        elif gdata is not None:
            path = Path(gdata)
            if base is not None and not path.is_absolute():
                path = base / path
            group = load_group(path)
        else:
            raise MetlogicError("rep file must name its group")
    mod = _modulus(data.get("modulus")) or Modulus.identity()
    name = data.get("name", "")
    if "builtin" in data:
        kind = data["builtin"]
        if kind == "trivial":
            r = unitary.trivial(group, int(data.get("dim", 1)))
        elif kind == "regular":
            r = unitary.regular(group)
        elif kind == "regular-complement":
            r = unitary.regular_complement(group)
        elif kind == "sign":
            r = unitary.sign(group)
        elif kind == "z-characters":
            r = unitary.z_characters(group, [float(t) for t in data["thetas"]])
        else:
            raise MetlogicError(f"unknown built-in representation {kind!r}")
        r.modulus, r.name = mod, name or r.name
        return r
    if "generators" in data:
        gens = {group.parse(k): _matrix(v) for k, v in data["generators"].items()}
        return unitary.from_generators(group, gens, mod, name)
    if "matrices" not in data:
        raise MetlogicError("rep file needs 'matrices', 'generators' or 'builtin'")
    mats = {group.parse(k): _matrix(v) for k, v in data["matrices"].items()}
    dims = {m.shape for m in mats.values()}
    dim = int(data.get("dim", next(iter(dims))[0]))
    if dims != {(dim, dim)}:
        raise MetlogicError(f"matrices must all be {dim} x {dim}")
    return unitary.UnitaryRep(group, dim, mats, mod, name)


def load_rep(path, group=None) -> unitary.UnitaryRep:
    return rep_from_dict(read_json(path), Path(path).parent, group)
