"""Batch interface: JSON descriptions in, verdict reports out.

Every command reads one JSON document (stdin, or ``--input``), writes
one report (stdout, or ``--output``), and exits 0 on success, 1 when a
checked verdict is false, 2 when the input does not parse or a
precondition fails.  Reports are canonical: sorted keys, two-space
indent, rationals as exact ``p/q`` strings, timing omitted unless
requested -- so identical inputs and options give byte-identical bytes.

Schema sketch (all rationals are ints or ``"p/q"`` strings, all
polynomials low-degree-first coefficient arrays):

    graph    {"vertices": [{"id", "genus"}], "edges": [{"id", "tail", "head"}]}
    config   {"r", "d", "k", "b", "dv": {vertexId: int}}
    bundle   {"splits": {vertexId: [int]},
              "nodes": {edgeId: {"tailCoord", "headCoord"}},
              "gluings": {edgeId: [[rat]]}}
    spaces   {vertexId: [[rat]]}           (component basis rows)
    series   {"w1,w2,...": [[rat]]}        (ambient basis rows per multidegree)
    prelinked {"dim", "vertices": [id], "edges": [{"id", "tail", "head",
              "matrix": [[rat]]}], "spaces": {vertexId: [[rat]]}}
"""

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

from .curve_model import CurveBundle, condition_I_holds
from .degree_graph import (
    DegreeConfig,
    DualGraph,
    enumerate_GI,
    enumerate_bar_GII,
    rho,
)
from .detloci import (
    SAMPLE_POINTS,
    GluingFamily,
    PolyMatrix,
    family_map,
    rational_roots,
    vanishing_locus,
)
from .exactlinalg import MatQ, Poly
from .prelinked import (
    PrelinkedData,
    PrelinkedPoint,
    check_condition_I,
    is_linked_point,
    is_simple_point,
    tangent_dimension,
)
from .series import (
    EHTSeries,
    LinkedSeries,
    chain_adaptable,
    chain_global_bases,
    check_EHT_direct,
    check_EHT_kernel,
    check_constrained,
    check_linked,
    check_refined,
    check_simple,
    eht_to_linked,
    forgetful_to_EHT,
    kernel_dimension_table,
)

FIXTURE_DIR_VAR = "LIMITSERIES_FIXTURES"


class SchemaError(ValueError):
    """Input does not match the documented JSON layout."""


# ---------------------------------------------------------------- codecs

def parse_rational(x, where="value"):
    if isinstance(x, bool) or isinstance(x, float):
        raise SchemaError("%s must be an exact integer or 'p/q' string" % where)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise SchemaError("%s is not a rational: %r" % (where, x))
    raise SchemaError("%s has unsupported type %s" % (where, type(x).__name__))


def format_rational(x):
    return str(Fraction(x))


def _row(values, where):
    if not isinstance(values, (list, tuple)):
        raise SchemaError("%s must be an array" % where)
    return [parse_rational(x, where) for x in values]


def parse_poly(arr, where="polynomial"):
    if isinstance(arr, (int, str)):
        return Poly([parse_rational(arr, where)])
    return Poly(_row(arr, where))


def format_poly(p):
    return [format_rational(c) for c in p.coeffs]


def parse_poly_matrix(rows, where="matrix"):
    if not isinstance(rows, list) or not rows:
        raise SchemaError("%s must be a non-empty array of rows" % where)
    out = []
    for row in rows:
        if not isinstance(row, list):
            raise SchemaError("%s rows must be arrays" % where)
        out.append([parse_poly(x, where) for x in row])
    return PolyMatrix(out)


def format_poly_matrix(m):
    return [[format_poly(q) for q in row] for row in m.data]


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError("missing field %r in %s" % (key, where))
    return obj[key]


def parse_graph(obj):
    verts = [
        (str(_field(v, "id", "vertex")), int(_field(v, "genus", "vertex")))
        for v in _field(obj, "vertices", "graph")
    ]
    edges = [
        (
            str(_field(e, "id", "edge")),
            str(_field(e, "tail", "edge")),
            str(_field(e, "head", "edge")),
        )
        for e in _field(obj, "edges", "graph")
    ]
    return DualGraph(verts, edges)


def format_graph(g):
    return {
        "vertices": [
            {"id": v, "genus": g.genus[v]} for v in g.vertex_ids
        ],
        "edges": [
            {"id": e.id, "tail": e.tail, "head": e.head} for e in g.edges
        ],
    }


def parse_config(obj, graph):
    dv = {
        str(k): int(v) for k, v in _field(obj, "dv", "config").items()
    }
    return DegreeConfig(
        graph,
        r=int(_field(obj, "r", "config")),
        d=int(_field(obj, "d", "config")),
        k=int(_field(obj, "k", "config")),
        b=int(_field(obj, "b", "config")),
        dv=dv,
    )


def format_config(cfg):
    return {
        "r": cfg.r, "d": cfg.d, "k": cfg.k, "b": cfg.b,
        "dv": {v: cfg.dv[v] for v in cfg.graph.vertex_ids},
    }


def _bundle_parts(obj, cfg):
    splits = {
        str(v): tuple(int(c) for c in parts)
        for v, parts in _field(obj, "splits", "bundle").items()
    }
    raw_nodes = _field(obj, "nodes", "bundle")
    nodes = {}
    for e in cfg.graph.edges:
        ent = _field(raw_nodes, e.id, "nodes")
        nodes[(e.id, e.tail)] = parse_rational(
            _field(ent, "tailCoord", "node"), "tailCoord"
        )
        nodes[(e.id, e.head)] = parse_rational(
            _field(ent, "headCoord", "node"), "headCoord"
        )
    return splits, nodes, _field(obj, "gluings", "bundle")


def parse_bundle(obj, cfg):
    splits, nodes, raw_glue = _bundle_parts(obj, cfg)
    gluings = {
        str(eid): MatQ.from_rows([_row(r, "gluing") for r in rows])
        for eid, rows in raw_glue.items()
    }
    return CurveBundle(cfg, splits, nodes, gluings)


def format_bundle(bundle):
    g = bundle.graph
    return {
        "splits": {v: list(bundle.splits[v]) for v in g.vertex_ids},
        "nodes": {
            e.id: {
                "tailCoord": format_rational(bundle.node(e.id, e.tail)),
                "headCoord": format_rational(bundle.node(e.id, e.head)),
            }
            for e in g.edges
        },
        "gluings": {
            e.id: [
                [format_rational(x) for x in row]
                for row in bundle.gluing(e.id).data
            ]
            for e in g.edges
        },
    }


def parse_family(obj, cfg):
    splits, nodes, raw_glue = _bundle_parts(obj, cfg)
    gluings = {
        str(eid): parse_poly_matrix(rows, "gluing")
        for eid, rows in raw_glue.items()
    }
    return GluingFamily(cfg, splits, nodes, gluings)


def parse_component_spaces(obj):
    return {
        str(v): [_row(r, "space row") for r in rows]
        for v, rows in obj.items()
    }


def format_component_spaces(s):
    return {
        v: [[format_rational(x) for x in bv] for bv in s.spaces[v].basis]
        for v in s.bundle.graph.vertex_ids
    }


def md_key(w):
    return ",".join(str(int(c)) for c in w)


def parse_md(raw, where="multidegree"):
    if isinstance(raw, str):
        parts = raw.split(",")
    elif isinstance(raw, (list, tuple)):
        parts = raw
    else:
        raise SchemaError("%s must be a list or 'a,b,...' string" % where)
    try:
        return tuple(int(p) for p in parts)
    except (TypeError, ValueError):
        raise SchemaError("%s entries must be integers" % where)


def parse_series_spaces(obj):
    return {
        parse_md(key): [_row(r, "series row") for r in rows]
        for key, rows in obj.items()
    }


def format_linked_series(ls):
    return {
        md_key(w): [
            [format_rational(x) for x in bv] for bv in ls.space(w).basis
        ]
        for w in ls.multidegrees
    }


def parse_prelinked(obj):
    dim = int(_field(obj, "dim", "prelinked"))
    vertices = [str(v) for v in _field(obj, "vertices", "prelinked")]
    edges = []
    for e in _field(obj, "edges", "prelinked"):
        rows = [
            _row(r, "edge matrix") for r in _field(e, "matrix", "edge")
        ]
        edges.append(
            (
                str(_field(e, "id", "edge")),
                str(_field(e, "tail", "edge")),
                str(_field(e, "head", "edge")),
                rows,
            )
        )
    data = PrelinkedData(dim, vertices, edges)
    spaces = _field(obj, "spaces", "prelinked")
    point = PrelinkedPoint(
        data, {str(v): [_row(r, "space row") for r in rows]
               for v, rows in spaces.items()}
    )
    return data, point


def format_prelinked(data, point):
    return {
        "dim": data.dim,
        "vertices": list(data.vertex_ids),
        "edges": [
            {
                "id": e.id, "tail": e.tail, "head": e.head,
                "matrix": [
                    [format_rational(x) for x in row]
                    for row in e.matrix.data
                ],
            }
            for e in data.edges
        ],
        "spaces": {
            v: [
                [format_rational(x) for x in bv]
                for bv in point.space(v).basis
            ]
            for v in data.vertex_ids
        },
    }


def canonical_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------- shared setup

def _series_from(payload):
    graph = parse_graph(_field(payload, "graph", "input"))
    cfg = parse_config(_field(payload, "config", "input"), graph)
    bundle = parse_bundle(_field(payload, "bundle", "input"), cfg)
    spaces = parse_component_spaces(_field(payload, "spaces", "input"))
    return EHTSeries(bundle, spaces, require_condition_I=False)


def _linked_from(payload):
    graph = parse_graph(_field(payload, "graph", "input"))
    cfg = parse_config(_field(payload, "config", "input"), graph)
    bundle = parse_bundle(_field(payload, "bundle", "input"), cfg)
    if "series" in payload:
        spaces = parse_series_spaces(payload["series"])
        return LinkedSeries(
            bundle, spaces, variant=str(payload.get("variant", "II"))
        )
    s = EHTSeries(
        bundle,
        parse_component_spaces(_field(payload, "spaces", "input")),
        require_condition_I=False,
    )
    return eht_to_linked(s, require_condition_I=False)


def _sample_list(arg, generator):
    if arg:
        taus = [parse_rational(p, "sample") for p in arg.split(",")]
    else:
        taus = set(Fraction(x) for x in SAMPLE_POINTS)
        if not generator.is_zero():
            taus.update(rational_roots(generator))
    return sorted(set(taus))


def _locus_report(f, k, loc, samples_arg):
    verdicts = {
        "k": k,
        "is_whole": loc.is_whole,
        "is_empty": loc.is_empty,
    }
    rows = []
    for tau in _sample_list(samples_arg, loc.generator):
        rows.append(
            {
                "t": format_rational(tau),
                "kernel_dimension": f.evaluate(tau).kernel().dim,
                "in_locus": loc.contains_point(tau),
            }
        )
    witnesses = {
        "generator": format_poly(loc.generator),
        "samples": rows,
    }
    return verdicts, witnesses


def _witness_out(witness):
    if witness is None:
        return None
    return {
        "multidegrees": [md_key(w) for w in witness["multidegrees"]],
        "vectors": [
            [format_rational(x) for x in vec]
            for vec in witness["vectors"]
        ],
    }


# -------------------------------------------------------------- commands

def cmd_check_linked(args, payload):
    ls = _linked_from(payload)
    ok = check_linked(ls)
    return {"linked": ok, "variant": ls.variant}, {}, ok


def cmd_check_eht(args, payload):
    s = _series_from(payload)
    direct = check_EHT_direct(s, require_condition_I=False)
    kernel = check_EHT_kernel(s, require_condition_I=False)
    verdicts = {
        "eht": direct,
        "kernel_criterion": kernel,
        "criteria_agree": direct == kernel,
        "condition_I": condition_I_holds(s.bundle),
    }
    return verdicts, {}, direct


def cmd_check_refined(args, payload):
    s = _series_from(payload)
    ok = check_refined(s, require_condition_I=False)
    verdicts = {
        "refined": ok,
        "condition_I": condition_I_holds(s.bundle),
    }
    return verdicts, {}, ok


def cmd_check_simple(args, payload):
    ls = _linked_from(payload)
    res = check_simple(ls, budget=args.budget)
    verdicts = {"simple": bool(res), "verdict": res.verdict}
    witnesses = {}
    if res.witness is not None:
        witnesses["simple"] = _witness_out(res.witness)
    return verdicts, witnesses, bool(res)


def cmd_check_constrained(args, payload):
    s = _series_from(payload)
    res = check_constrained(
        s, budget=args.budget, require_condition_I=False
    )
    verdicts = {"constrained": bool(res), "verdict": res.verdict}
    witnesses = {}
    if res.witness is not None:
        witnesses["constrained"] = _witness_out(res.witness)
    return verdicts, witnesses, bool(res)


def cmd_check_adaptable(args, payload):
    s = _series_from(payload)
    ok = chain_adaptable(s, require_condition_I=False)
    return {"adaptable": ok}, {}, ok


def cmd_kernel_table(args, payload):
    s = _series_from(payload)
    table = kernel_dimension_table(s)
    gi = set(enumerate_GI(s.cfg))
    rows = [
        {
            "multidegree": md_key(w),
            "dimension": table[w],
            "type_I_vertex": w in gi,
        }
        for w in sorted(table)
    ]
    verdicts = {
        "k": s.k,
        "exact_on_type_I": all(table[w] == s.k for w in gi),
        "condition_I": condition_I_holds(s.bundle),
    }
    return verdicts, {"table": rows}, None


def cmd_eht_to_linked(args, payload):
    s = _series_from(payload)
    ls = eht_to_linked(s, require_condition_I=False)
    verdicts = {
        "linked": check_linked(ls),
        "multidegrees": len(ls.multidegrees),
    }
    return verdicts, {"series": format_linked_series(ls)}, None


def cmd_linked_to_eht(args, payload):
    ls = _linked_from(payload)
    s = forgetful_to_EHT(ls)
    return (
        {"k": s.k},
        {"spaces": format_component_spaces(s)},
        None,
    )


def cmd_chain_bases(args, payload):
    s = _series_from(payload)
    bases, sigmas = chain_global_bases(s, require_condition_I=False)
    out_bases = [
        [[format_poly(q) for q in elt] for elt in comp]
        for comp in bases
    ]
    out_sigmas = [list(sig) for sig in sigmas]
    verdicts = {
        "components": len(bases),
        "nontrivial_matchings": sum(
            1 for sig in out_sigmas if any(i != j for i, j in enumerate(sig))
        ),
    }
    return verdicts, {"bases": out_bases, "sigmas": out_sigmas}, None


def cmd_grassmannian_check(args, payload):
    data, point = parse_prelinked(_field(payload, "prelinked", "input"))
    cond = check_condition_I(data, max_path_len=args.path_bound)
    linked = is_linked_point(data, point)
    verdicts = {"condition_I": cond, "linked": linked}
    witnesses = {}
    gate = False
    if linked:
        res = is_simple_point(data, point, budget=args.budget)
        verdicts["simple"] = bool(res)
        verdicts["simple_verdict"] = res.verdict
        if res.witness is not None:
            witnesses["simple"] = {
                "vertices": list(res.witness["vertices"]),
                "vectors": [
                    [format_rational(x) for x in vec]
                    for vec in res.witness["vectors"]
                ],
            }
        gate = cond and bool(res)
    else:
        verdicts["simple"] = None
        verdicts["simple_verdict"] = "not-checked"
    return verdicts, witnesses, gate


def cmd_tangent_dim(args, payload):
    data, point = parse_prelinked(_field(payload, "prelinked", "input"))
    dim = tangent_dimension(data, point)
    expected = point.rank * (data.dim - point.rank)
    verdicts = {
        "tangent_dimension": dim,
        "smooth_expected": expected,
        "matches_expected": dim == expected,
    }
    return verdicts, {}, None


def cmd_vanishing_locus(args, payload):
    f = parse_poly_matrix(_field(payload, "matrix", "input"))
    k = int(_field(payload, "k", "input"))
    loc = vanishing_locus(f, k)
    verdicts, witnesses = _locus_report(f, k, loc, args.samples)
    return verdicts, witnesses, None


def cmd_family_locus(args, payload):
    graph = parse_graph(_field(payload, "graph", "input"))
    cfg = parse_config(_field(payload, "config", "input"), graph)
    fam = parse_family(_field(payload, "family", "input"), cfg)
    spaces = {
        str(v): [
            [parse_poly(x, "space entry") for x in row] for row in rows
        ]
        for v, rows in _field(payload, "spaces", "input").items()
    }
    w = parse_md(_field(payload, "w", "input"))
    k = int(_field(payload, "k", "input"))
    m, _ = family_map(fam, spaces, w)
    loc = vanishing_locus(m, k)
    verdicts, witnesses = _locus_report(m, k, loc, args.samples)
    verdicts["w"] = md_key(w)
    return verdicts, witnesses, None


def cmd_rho(args, payload):
    val = rho(args.g, args.r, args.d, args.k)
    return {"rho": val}, {}, None


COMMANDS = {
    "check-linked": (cmd_check_linked, True),
    "check-eht": (cmd_check_eht, True),
    "check-refined": (cmd_check_refined, True),
    "check-simple": (cmd_check_simple, True),
    "check-constrained": (cmd_check_constrained, True),
    "check-adaptable": (cmd_check_adaptable, True),
    "kernel-table": (cmd_kernel_table, True),
    "eht-to-linked": (cmd_eht_to_linked, True),
    "linked-to-eht": (cmd_linked_to_eht, True),
    "chain-bases": (cmd_chain_bases, True),
    "grassmannian-check": (cmd_grassmannian_check, True),
    "tangent-dim": (cmd_tangent_dim, True),
    "vanishing-locus": (cmd_vanishing_locus, True),
    "family-locus": (cmd_family_locus, True),
    "rho": (cmd_rho, False),
}


# -------------------------------------------------------------- plumbing

def fixture_dir():
    override = os.environ.get(FIXTURE_DIR_VAR)
    if override:
        return override
    return os.path.join(os.path.dirname(__file__), "fixtures")


def _available_fixtures():
    d = fixture_dir()
    try:
        names = os.listdir(d)
    except OSError:
        return []
    return sorted(
        os.path.splitext(n)[0] for n in names if n.endswith(".json")
    )


def load_fixture(name):
    path = os.path.join(fixture_dir(), name + ".json")
    if not os.path.exists(path):
        raise SchemaError(
            "unknown fixture %r; available: %s"
            % (name, ", ".join(_available_fixtures()) or "none")
        )
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_out(args, text):
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _options_echo(args):
    opts = {}
    for key in ("seed", "budget", "path_bound", "samples",
                "g", "r", "d", "k", "name"):
        if hasattr(args, key):
            opts[key] = getattr(args, key)
    return opts


def _parser():
    top = argparse.ArgumentParser(
        prog="limitseries",
        description="Exact checks for limit linear series data.",
    )
    sub = top.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input JSON path (default stdin)")
    common.add_argument("--output", help="report path (default stdout)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed echoed into the report")
    common.add_argument("--budget", type=int, default=None,
                        help="witness-search budget")
    common.add_argument("--path-bound", type=int, default=None,
                        dest="path_bound",
                        help="walk-length bound for compatibility checks")
    common.add_argument("--samples", default=None,
                        help="comma-separated rational sample points")
    common.add_argument("--timing", action="store_true",
                        help="include elapsed milliseconds in the report")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "rho":
            p.add_argument("--g", type=int, required=True)
            p.add_argument("--r", type=int, required=True)
            p.add_argument("--d", type=int, required=True)
            p.add_argument("--k", type=int, required=True)
    fx = sub.add_parser("fixtures", parents=[common])
    fx.add_argument("--name", required=True,
                    help="fixture name (see error message for the list)")
    return top


def _fail(message):
    sys.stderr.write(canonical_json({"error": message}))
    return 2


def run(args):
    if args.command == "fixtures":
        _write_out(args, canonical_json(load_fixture(args.name)))
        return 0
    handler, needs_input = COMMANDS[args.command]
    raw = b""
    payload = None
    if needs_input:
        if args.input:
            with open(args.input, "rb") as fh:
                raw = fh.read()
        else:
            raw = sys.stdin.buffer.read()
        payload = json.loads(raw.decode("utf-8"))
    start = time.monotonic()
    verdicts, witnesses, gate = handler(args, payload)
    elapsed = int((time.monotonic() - start) * 1000)
    report = {
        "command": args.command,
        "input_digest": "sha256:%s" % hashlib.sha256(raw).hexdigest(),
        "options": _options_echo(args),
        "timing_ms": elapsed if args.timing else None,
        "verdicts": verdicts,
        "witnesses": witnesses,
    }
    _write_out(args, canonical_json(report))
    if gate is None:
        return 0
    return 0 if gate else 1


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return run(args)
    except json.JSONDecodeError as exc:
        return _fail(
            "malformed JSON at line %d column %d: %s"
            % (exc.lineno, exc.colno, exc.msg)
        )
    except SchemaError as exc:
        return _fail(str(exc))
    except KeyError as exc:
        return _fail("missing field: %s" % exc)
    except (ValueError, TypeError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
