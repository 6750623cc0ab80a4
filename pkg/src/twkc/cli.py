"""Command-line entry point: ``python -m twkc <command> ...``.

Exit codes: 0 success, 1 parse or usage error, 2 invalid tree
decomposition, 3 input is not a d-SDNNF, 4 size limit exceeded, 5 a
theorem floor or lemma bound was violated, 6 compiled output is not
equivalent to its source.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import circuit as circ
from .bounds import bounds_report
from .compile import compile as compile_nice, prepare
from .decomp import format_pace_td, minfill, parse_pace_td, validate
from .errors import (DecompositionError, NotDSDNNFError, ParseError, SizeLimitError,
                     TwkcError)
from .nnf import (check_d_sdnnf, enumerate_models, format_nnf, format_vtree, model_count,
                  nnf_truth_table, parse_nnf, parse_vtree, probability, require_d_dnnf)
from .obdd import best_order, build, dualize, format_obdd

EXIT_OK, EXIT_PARSE, EXIT_DECOMP, EXIT_NOT_DSDNNF, EXIT_SIZE, EXIT_THEOREM, EXIT_NOT_EQUIV = range(7)


class _Exit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Exit(EXIT_PARSE, f"cannot read {path}: {exc.strerror}") from None


def _load_function(path):
    text = _read(path)
    first = next((ln.split() for ln in text.splitlines()
                  if ln.split() and ln.split()[0] != "c" and not ln.lstrip().startswith("#")),
                 [""])
    if first[0] == "circuit":
        return circ.parse_circuit(text)
    return circ.parse_dimacs(text)


def _write(out_dir, name, text):
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --- commands ---------------------------------------------------------------

def cmd_compile(args):
    c = circ.parse_circuit(_read(args.circuit))
    if args.td and args.minfill:
        raise _Exit(EXIT_PARSE, "give either a decomposition file or --minfill, not both")
    td = parse_pace_td(_read(args.td)) if args.td else minfill(c)
    report = validate(td, c)
    if not report:
        raise _Exit(EXIT_DECOMP, f"invalid decomposition: {report.message}")
    nice = prepare(c, td)
    result = compile_nice(c, nice, gc=not args.no_gc)
    stats = dict(result.stats)
    stats["input_width"] = td.width
    stats["var_gates"] = list(result.var_gates)
    n_vars = len(result.var_gates)
    if n_vars <= args.max_exhaustive_vars:
        check = check_d_sdnnf(result.nnf, result.vtree, args.max_exhaustive_vars)
        if not check:
            raise _Exit(EXIT_NOT_DSDNNF, f"compiled output fails a check: {check.reason}")
        equal = nnf_truth_table(result.nnf) == circ.circuit_truth_table(c)
        if not equal:
            raise _Exit(EXIT_NOT_EQUIV, "compiled output is not equivalent to the circuit")
        stats["equiv_checked"] = True
    else:
        stats["equiv_checked"] = False
    if args.timing:
        stats["wall_time"] = result.wall_time
    stem = Path(args.circuit).stem
    out = args.out or "."
    _write(out, f"{stem}.nnf", format_nnf(result.nnf))
    _write(out, f"{stem}.vtree", format_vtree(result.vtree) + "\n")
    _write(out, f"{stem}.stats.json", _dump_json(stats))
    if args.save_td:
        _write(out, f"{stem}.td", format_pace_td(td, c.n_gates))
    print(_dump_json(stats), end="")


def _load_checked_nnf(args):
    nnf = parse_nnf(_read(args.nnf))
    vtree = parse_vtree(_read(args.vtree)) if getattr(args, "vtree", None) else None
    try:
        require_d_dnnf(nnf, vtree, args.max_exhaustive_vars)
    except NotDSDNNFError as exc:
        raise _Exit(EXIT_NOT_DSDNNF, f"not a d-DNNF: {exc} (witness {exc.witness})") from None
    return nnf


def _read_probabilities(path, n_vars, default):
    probs = {v: default for v in range(1, n_vars + 1)}
    if path is None:
        return probs
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if len(line) != 2:
            raise ParseError("expected '<variable> <probability>'", lineno)
        try:
            probs[int(line[0])] = float(line[1])
        except ValueError:
            raise ParseError(f"malformed probability line {raw!r}", lineno) from None
    return probs


def cmd_prob(args):
    nnf = _load_checked_nnf(args)
    pi = _read_probabilities(args.probs, nnf.n_vars, args.p)
    print(repr(float(probability(nnf, pi))))


def cmd_count(args):
    nnf = _load_checked_nnf(args)
    print(model_count(nnf))


def cmd_enum(args):
    nnf = _load_checked_nnf(args)
    if args.compact:
        for model in enumerate_models(nnf):
            print(model.format())
        return
    lines = sorted((sorted(s) for m in enumerate_models(nnf) for s in m.expand()),
                   key=lambda s: (len(s), s))
    for s in lines:
        print(" ".join(map(str, s)))


def cmd_obdd(args):
    f = _load_function(args.formula)
    if args.order:
        order = tuple(int(x) for x in args.order.replace(",", " ").split())
    elif args.exhaustive:
        order, _ = best_order(f, "exhaustive")
    else:
        order, _ = best_order(f, "greedy")
    ob = build(f, order)
    if args.dualize:
        ob = dualize(ob)
    if args.out:
        _write(args.out, Path(args.formula).stem + ".obdd", format_obdd(ob))
    else:
        print(format_obdd(ob), end="")
    print(_dump_json({"order": list(ob.order), "width": ob.width,
                      "width_with_leaves": ob.width_with_leaves, "size": ob.size,
                      "profile": list(ob.profile), "constants": list(ob.constants)}), end="")


def cmd_bounds(args):
    phi = circ.parse_dimacs(_read(args.formula))
    rep = bounds_report(phi, max_exhaustive_vars=min(args.max_exhaustive_vars, 10))
    text = _dump_json(rep)
    if args.out:
        _write(args.out, Path(args.formula).stem + ".bounds.json", text)
    print(text, end="")
    if rep["violations"]:
        raise _Exit(EXIT_THEOREM, "bound violated: " + "; ".join(rep["violations"]))


def cmd_gen(args):
    rng = np.random.default_rng(args.seed)
    kind = args.family
    p = args.params
    if kind == "sint":
        text = circ.format_dimacs(circ.gen_sint(int(p[0])))
    elif kind == "sdisj":
        text = circ.format_dimacs(circ.gen_sdisj(int(p[0])))
    elif kind == "grid":
        text = circ.format_dimacs(circ.gen_grid_cnf(int(p[0]), int(p[1])))
    elif kind == "qp":
        edges = [tuple(e.split("-")) for e in p]
        if any(len(e) != 2 for e in edges):
            raise _Exit(EXIT_PARSE, "qp edges are written like a-b")
        text = circ.format_dimacs(circ.gen_lineage_qp(edges))
    elif kind == "circuit":
        n_vars, n_gates = int(p[0]), int(p[1])
        text = circ.format_circuit(circ.random_circuit(rng, n_vars, n_gates))
    elif kind in ("dnf", "cnf"):
        n_vars, n_clauses = int(p[0]), int(p[1])
        text = circ.format_dimacs(circ.random_monotone_formula(rng, kind, n_vars, n_clauses))
    elif kind == "formula-circuit":
        phi = circ.parse_dimacs(_read(p[0]))
        text = circ.format_circuit(circ.formula_to_circuit(phi)[0])
    else:
        raise _Exit(EXIT_PARSE, f"unknown family {kind!r}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        print(text, end="")


def cmd_verify(args):
    nnf = parse_nnf(_read(args.nnf))
    vtree = parse_vtree(_read(args.vtree)) if args.vtree else None
    res = check_d_sdnnf(nnf, vtree, args.max_exhaustive_vars)
    if not res:
        raise _Exit(EXIT_NOT_DSDNNF, f"{res.reason} (witness {res.witness})")
    if args.circuit:
        c = circ.parse_circuit(_read(args.circuit))
        if len(c.variables) != nnf.n_vars:
            raise _Exit(EXIT_NOT_EQUIV, "variable counts differ")
        if nnf_truth_table(nnf) != circ.circuit_truth_table(c):
            raise _Exit(EXIT_NOT_EQUIV, "NNF and circuit are not equivalent")
    print("ok")


# --- parser ---------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with parse errors; argparse would use 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Exit(EXIT_PARSE, message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for generated data")
    common.add_argument("--max-exhaustive-vars", type=int, default=16,
                        help="variable cap for exhaustive checks (default 16)")
    common.add_argument("--out", help="output directory (file for gen)")

    parser = _Parser(prog="twkc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", parents=[common], help="compile a circuit to a d-SDNNF")
    p.add_argument("circuit")
    p.add_argument("td", nargs="?", help="PACE .td decomposition over gate ids + 1")
    p.add_argument("--minfill", action="store_true", help="build the decomposition by min-fill")
    p.add_argument("--no-gc", action="store_true", help="keep unreachable gates")
    p.add_argument("--timing", action="store_true", help="add wall time to the stats")
    p.add_argument("--save-td", action="store_true", help="also write the decomposition used")
    p.set_defaults(func=cmd_compile)

    for name, func, doc in (("prob", cmd_prob, "probability of a d-DNNF"),
                            ("count", cmd_count, "model count of a d-DNNF"),
                            ("enum", cmd_enum, "list the models of a d-DNNF")):
        p = sub.add_parser(name, parents=[common], help=doc)
        p.add_argument("nnf")
        p.add_argument("--vtree", help="also check structuredness against this v-tree")
        if name == "prob":
            p.add_argument("probs", nargs="?", help="file of '<variable> <probability>' lines")
            p.add_argument("--p", type=float, default=0.5, help="default probability")
        if name == "enum":
            p.add_argument("--compact", action="store_true", help="print don't-cares as *v")
        p.set_defaults(func=func)

    p = sub.add_parser("obdd", parents=[common], help="build an OBDD and report its width")
    p.add_argument("formula", help="DIMACS formula or circuit file")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--order", help="comma-separated variable order")
    group.add_argument("--exhaustive", action="store_true", help="search for a minimum-width order")
    group.add_argument("--greedy", action="store_true", help="split-guided greedy order (default)")
    p.add_argument("--dualize", action="store_true", help="output the OBDD of the dual formula")
    p.set_defaults(func=cmd_obdd)

    p = sub.add_parser("bounds", parents=[common], help="width measures and theorem floors")
    p.add_argument("formula")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gen", parents=[common], help="generate a formula or circuit")
    p.add_argument("family", choices=["sint", "sdisj", "grid", "qp", "circuit", "dnf", "cnf",
                                      "formula-circuit"])
    p.add_argument("params", nargs="*")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", parents=[common], help="check that an NNF is a d-SDNNF")
    p.add_argument("nnf")
    p.add_argument("--vtree")
    p.add_argument("--circuit", help="also check equivalence with this circuit")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DecompositionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DECOMP
    except NotDSDNNFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_DSDNNF
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (TwkcError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
