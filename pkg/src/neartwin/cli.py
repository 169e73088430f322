"""Command-line front end.

Every subcommand prints one report.  ``--format structured`` emits a JSON
document with sorted keys and a ``kind`` field; ``verify`` reads such a
document back and re-checks it using only cheap stages.

Exit status: 0 on success, 1 on domain errors (not near-uniform, guard
failed, a report that does not verify), 2 on usage errors (bad flags,
unreadable files, malformed input).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .decompose import decompose, evaluate_with_order, model_check, successor_invariant_check, universal_formula
from .errors import (
    BudgetExceededError,
    ContractError,
    FormulaSyntaxError,
    GraphFormatError,
    InconsistencyError,
    NotNearUniformError,
)
from .gadgets import build_certificate, build_hardness_instance, interpret_psi0, verify_reduction
from .interpret import Transduction, apply_transduction, interpret, load_transduction, transduction_to_interpretation
from .logic import alpha_equivalent, evaluate, parse_formula, symmetrize
from .structure import LabeledStructure, generate, parse_family, parse_structure, read_structure, render_structure
from .twins import (
    DEFAULT_BUDGET,
    class_pair_profile,
    covered_to_uniform,
    equivalence_check,
    find_uniform_parameters,
    is_dominating,
    near_covered_check,
    near_twin_graph,
)

SUBCOMMANDS = ("analyze", "decompose", "modelcheck", "succheck", "interpret", "transduce", "gadget", "generate", "verify")


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    """A well-formed request whose answer is a domain-level failure."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


# -- serialization helpers ---------------------------------------------------


def _graph_doc(g: LabeledStructure) -> dict:
    return {
        "n": g.n,
        "edges": [list(e) for e in sorted(g.edges)],
        "labels": {k: sorted(v) for k, v in sorted(g.labels.items())},
        "relations": {k: [list(p) for p in sorted(v)] for k, v in sorted(g.relations.items())},
    }


def _graph_from_doc(doc: dict) -> LabeledStructure:
    return LabeledStructure(
        doc["n"],
        frozenset(tuple(e) for e in doc["edges"]),
        doc.get("labels", {}),
        {k: [tuple(p) for p in v] for k, v in doc.get("relations", {}).items()},
    )


def _classes(partition) -> list[list[int]]:
    return partition.as_lists()


# -- subcommands -------------------------------------------------------------


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _load_graph(path: str) -> LabeledStructure:
    try:
        return read_structure(path)
    except OSError as e:
        raise UsageError(f"cannot read graph file {path!r}: {e.strerror}") from None


def _formula(text: str):
    return parse_formula(text)


def cmd_analyze(args) -> dict:
    _need(args, "graph")
    g = _load_graph(args.graph)
    report: dict = {"kind": "analyze", "graph": _graph_doc(g)}
    if args.k is not None:
        out = equivalence_check(near_twin_graph(g, args.k))
        report["k"] = args.k
        report["equivalence"] = out.is_equivalence
        report["classes"] = _classes(out.partition) if out.is_equivalence else None
        report["index"] = out.partition.index if out.is_equivalence else None
        report["counterexample"] = list(out.counterexample) if out.counterexample else None
    if args.k0 is not None or args.p is not None:
        _need(args, "k0", "p")
        found = find_uniform_parameters(g, args.k0, args.p)
        if found is None:
            raise DomainFailure(str(NotNearUniformError(args.k0, args.p)), report)
        k, part = found
        dich = class_pair_profile(g, part, k)
        report.update(
            k0=args.k0,
            p=args.p,
            k=k,
            equivalence=True,
            index=part.index,
            classes=_classes(part),
            counterexample=None,
            dichotomy=[
                {"source": pp.source, "target": pp.target, "qualifying": pp.qualifying, "case": pp.case, "max_exception": pp.max_exception}
                for pp in dich.pairs
            ],
        )
    if args.l is not None or args.q is not None:
        _need(args, "l", "q")
        dom = near_covered_check(g, args.l, args.q, args.budget)
        report["ell"], report["q"] = args.l, args.q
        report["covering"] = sorted(dom) if dom is not None else None
        if dom is None:
            raise DomainFailure(f"not ({args.l},{args.q})-near-covered", report)
        conv = covered_to_uniform(g, args.l, args.q, args.budget)
        report["conversion"] = {
            "k": conv.k,
            "p": conv.p,
            "classes": _classes(conv.partition),
            "trace": [[s.ell, s.q, s.case] for s in conv.trace],
        }
    if len(report) == 2:
        raise UsageError("analyze needs --k, --k0/--p or --l/--q")
    return report


def _decomposition_doc(dec) -> dict:
    return {
        "k0": dec.k0,
        "p": dec.p,
        "k": dec.k,
        "classes": _classes(dec.partition),
        "large_classes": list(dec.large_classes),
        "F1": sorted(dec.F1),
        "F2": [list(x) for x in sorted(dec.F2)],
        "small_order": list(dec.small_order),
        "r": dec.r,
        "max_degree": dec.G_H.max_degree(),
        "G_H": _graph_doc(dec.G_H),
        "psi": str(dec.psi),
    }


def cmd_decompose(args) -> dict:
    _need(args, "graph", "k0", "p")
    h = _load_graph(args.graph)
    try:
        dec = decompose(h, args.k0, args.p)
    except NotNearUniformError as e:
        raise DomainFailure(str(e)) from None
    return {"kind": "decompose", "graph": _graph_doc(h), **_decomposition_doc(dec)}


def cmd_modelcheck(args) -> dict:
    _need(args, "graph", "formula", "k0", "p")
    h = _load_graph(args.graph)
    phi = _formula(args.formula)
    try:
        v = model_check(h, phi, args.k0, args.p)
    except NotNearUniformError as e:
        raise DomainFailure(str(e)) from None
    return {
        "kind": "modelcheck",
        "graph": _graph_doc(h),
        "formula": str(phi),
        "verdict": v.value,
        "rewritten": str(v.rewritten),
        "decomposition": _decomposition_doc(v.decomposition),
    }


def cmd_succheck(args) -> dict:
    _need(args, "graph", "formula", "k0", "p")
    h = _load_graph(args.graph)
    phi = _formula(args.formula)
    try:
        rep = successor_invariant_check(h, phi, args.k0, args.p, args.trials, args.seed)
    except NotNearUniformError as e:
        raise DomainFailure(str(e)) from None
    return {
        "kind": "succheck",
        "graph": _graph_doc(h),
        "formula": str(phi),
        "seed": args.seed,
        "trials": args.trials,
        "invariant": rep.invariant,
        "verdict": rep.verdict,
        "orders": [list(o) for o in rep.orders],
        "values": rep.values,
    }


def cmd_interpret(args) -> dict:
    _need(args, "graph", "formula")
    g = _load_graph(args.graph)
    psi = _formula(args.formula)
    if not args.raw:
        psi = symmetrize(psi)
    h = interpret(g, psi)
    return {"kind": "interpret", "graph": _graph_doc(g), "psi": str(psi), "result": _graph_doc(h)}


def cmd_transduce(args) -> dict:
    _need(args, "graph", "config")
    g = _load_graph(args.graph)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read transduction file {args.config!r}: {e.strerror}") from None
    try:
        tau, params = load_transduction(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"transduction file is not valid JSON: {e}") from None
    params = params or []
    result = apply_transduction(g, tau, params)
    report = {"kind": "transduce", "graph": _graph_doc(g), "transduction": tau.to_config(), "params": [sorted(p) for p in params]}
    if result is None:
        report["result"] = None
        raise DomainFailure("transduction guard fails on this input", report)
    report["result"] = _graph_doc(result)
    if args.star:
        enc = transduction_to_interpretation(tau, g, params)
        report["star"] = {"structure": _graph_doc(enc.structure), "psi": str(enc.psi)}
    return report


def _parse_colouring(text: str, n: int) -> dict:
    try:
        colours = [int(c) for c in text.split(",")]
    except ValueError:
        raise UsageError("--colouring takes comma-separated colours 1..3") from None
    if len(colours) != n:
        raise UsageError(f"--colouring needs {n} colours, got {len(colours)}")
    return dict(enumerate(colours))


def cmd_gadget(args) -> dict:
    _need(args, "graph")
    h0 = _load_graph(args.graph)
    inst = build_hardness_instance(h0)
    report: dict = {
        "kind": "gadget",
        "h0": _graph_doc(h0),
        "H": _graph_doc(inst.H),
        "d_marker": inst.d_marker,
        "nbhd_radius": inst.nbhd_radius,
    }
    if args.colouring is not None:
        colouring = _parse_colouring(args.colouring, h0.n)
        g = build_certificate(inst, colouring)
        report["colouring"] = [colouring[v] for v in range(h0.n)]
        report["certificate"] = _graph_doc(g)
        report["certificate_accepted"] = interpret_psi0(inst, g).edges == inst.H.edges
    if args.check:
        rep = verify_reduction(inst, args.budget)
        report["verification"] = {
            "accepted": [list(c) for c in rep.accepted],
            "proper": [list(c) for c in rep.proper],
            "three_colourable": rep.three_colourable,
            "consistent": rep.consistent,
            "certificates_bounded": rep.certificates_bounded,
            "distances_uniform": rep.distances_uniform,
        }
    return report


def cmd_generate(args) -> dict:
    _need(args, "family")
    spec = parse_family(args.family, args.seed)
    g = generate(spec)
    return {"kind": "generate", "family": str(spec), "seed": spec.seed, "graph": _graph_doc(g)}


# -- verify -------------------------------------------------------------------


def _check(cond: bool, what: str, failures: list) -> None:
    if not cond:
        failures.append(what)


def verify_report(doc: dict) -> list[str]:
    """Re-check a structured report; returns the list of failed checks."""
    kind = doc.get("kind")
    failures: list[str] = []
    if kind == "analyze":
        g = _graph_from_doc(doc["graph"])
        if doc.get("classes") is not None:
            out = equivalence_check(near_twin_graph(g, doc["k"]))
            _check(out.is_equivalence and out.partition.as_lists() == doc["classes"], "classes", failures)
        if doc.get("counterexample") is not None:
            a, b, c = doc["counterexample"]
            rel = near_twin_graph(g, doc["k"])
            _check(rel.related(a, b) and rel.related(b, c) and not rel.related(a, c), "counterexample", failures)
        if doc.get("covering") is not None:
            cover = doc["covering"]
            _check(len(cover) <= doc["q"] and is_dominating(near_twin_graph(g, doc["ell"]), cover), "covering", failures)
        if "conversion" in doc:
            conv = doc["conversion"]
            out = equivalence_check(near_twin_graph(g, conv["k"]))
            _check(out.is_equivalence and out.partition.index <= conv["p"] <= doc["q"], "conversion", failures)
    elif kind in ("decompose", "modelcheck"):
        d = doc if kind == "decompose" else doc["decomposition"]
        h = _graph_from_doc(doc["graph"])
        g_h = _graph_from_doc(d["G_H"])
        psi = parse_formula(d["psi"])
        _check(alpha_equivalent(psi, universal_formula(d["k0"], d["p"])), "psi", failures)
        _check(interpret(g_h, psi).edges == h.edges, "round trip", failures)
        _check(g_h.max_degree() <= 2 * d["k0"] * d["p"], "degree bound", failures)
        _check(d["r"] <= 5 * d["k0"] * d["p"], "small-vertex bound", failures)
        if kind == "modelcheck":
            _check(evaluate(g_h, parse_formula(doc["rewritten"])) == doc["verdict"], "verdict", failures)
    elif kind == "succheck":
        h = _graph_from_doc(doc["graph"])
        phi = parse_formula(doc["formula"])
        _check(doc["invariant"] == (len(set(doc["values"])) <= 1), "invariant flag", failures)
        # one order suffices to cross-check the value without redoing every trial
        if doc["orders"]:
            _check(evaluate_with_order(h, phi, doc["orders"][0]) == doc["values"][0], "first trial", failures)
    elif kind == "interpret":
        g = _graph_from_doc(doc["graph"])
        _check(interpret(g, parse_formula(doc["psi"])).edges == _graph_from_doc(doc["result"]).edges, "result", failures)
    elif kind == "transduce":
        cfg = doc["transduction"]
        tau = Transduction.from_strings(cfg["guard"], cfg["domain"], cfg["edge"], cfg["copies"], cfg["parameters"], symmetrize_edge=False)
        got = apply_transduction(_graph_from_doc(doc["graph"]), tau, [set(p) for p in doc["params"]])
        want = doc["result"]
        _check((got is None and want is None) or (got is not None and want is not None and got.edges == _graph_from_doc(want).edges and got.n == want["n"]), "result", failures)
    elif kind == "gadget":
        h0 = _graph_from_doc(doc["h0"])
        inst = build_hardness_instance(h0)
        _check(inst.H.edges == _graph_from_doc(doc["H"]).edges, "H", failures)
        if "certificate" in doc:
            g = _graph_from_doc(doc["certificate"])
            _check(g.max_degree() <= 3, "certificate degree", failures)
            _check((interpret_psi0(inst, g).edges == inst.H.edges) == doc["certificate_accepted"], "certificate verdict", failures)
        if "verification" in doc:
            ver = doc["verification"]
            _check(ver["accepted"] == ver["proper"], "accept set", failures)
            _check(ver["three_colourable"] == bool(ver["accepted"]), "verdict", failures)
    elif kind == "generate":
        spec = parse_family(doc["family"], doc["seed"])
        _check(generate(spec).edges == _graph_from_doc(doc["graph"]).edges, "graph", failures)
    else:
        raise UsageError(f"unknown report kind {kind!r}")
    return failures


def cmd_verify(args) -> dict:
    _need(args, "report")
    try:
        with open(args.report, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read report {args.report!r}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"report is not valid JSON: {e}") from None
    failures = verify_report(doc)
    report = {"kind": "verify", "report_kind": doc.get("kind"), "ok": not failures, "failures": failures}
    if failures:
        raise DomainFailure("report does not verify: " + ", ".join(failures), report)
    return report


COMMANDS = {
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "modelcheck": cmd_modelcheck,
    "succheck": cmd_succheck,
    "interpret": cmd_interpret,
    "transduce": cmd_transduce,
    "gadget": cmd_gadget,
    "generate": cmd_generate,
    "verify": cmd_verify,
}


# -- argument parsing & output -------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("NEARTWIN_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"NEARTWIN_SEED must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="neartwin", description="Near-twin structure, decompositions and FO model checking.")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--graph", help="input graph in the n/e/l/r line format")
    parser.add_argument("--k", type=int, help="analyze: test the near-k-twin relation at this k")
    parser.add_argument("--k0", type=int, help="largest admissible k")
    parser.add_argument("--p", type=int, help="largest admissible number of classes")
    parser.add_argument("--l", type=int, help="near-covering radius ell")
    parser.add_argument("--q", type=int, help="number of covering centres")
    parser.add_argument("--formula", help="first-order formula text")
    parser.add_argument("--raw", action="store_true", help="interpret: do not symmetrize the formula")
    parser.add_argument("--config", help="transduce: JSON transduction document")
    parser.add_argument("--star", action="store_true", help="transduce: also emit the star encoding")
    parser.add_argument("--colouring", help="gadget: comma-separated colours, one per vertex")
    parser.add_argument("--check", action="store_true", help="gadget: enumerate all colourings")
    parser.add_argument("--family", help="generate: family spec such as path(7)")
    parser.add_argument("--report", help="verify: structured report to re-check")
    parser.add_argument("--seed", type=int, help="random seed (default: $NEARTWIN_SEED or 0)")
    parser.add_argument("--trials", type=int, default=10, help="succheck: number of random orders")
    parser.add_argument("--budget", type=int, help="cap on exhaustive search work")
    parser.add_argument("--format", choices=("text", "structured"), default="text")
    return parser


def _text(report: dict) -> str:
    lines = []
    for key in sorted(report):
        value = report[key]
        if isinstance(value, dict) and {"n", "edges"} <= set(value):
            g = _graph_from_doc(value)
            body = render_structure(g).rstrip("\n")
            lines.append(f"{key}:")
            lines.extend("  " + ln for ln in body.splitlines())
        else:
            lines.append(f"{key}: {json.dumps(value, sort_keys=True)}")
    return "\n".join(lines)


def _emit(report: dict, fmt: str, out) -> None:
    if fmt == "structured":
        out.write(json.dumps(report, sort_keys=True, indent=1) + "\n")
    else:
        out.write(_text(report) + "\n")


def run_command(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    fmt = "text"
    try:
        args = build_parser().parse_args(list(argv))
        fmt = args.format
        if args.seed is None:
            args.seed = _default_seed()
        if args.budget is None:
            args.budget = DEFAULT_BUDGET if args.command != "gadget" else 3**10
        report = COMMANDS[args.command](args)
    except UsageError as e:
        err.write(f"usage error: {e}\n")
        return 2
    except (GraphFormatError, FormulaSyntaxError, ContractError) as e:
        err.write(f"input error: {e}\n")
        return 2
    except DomainFailure as e:
        if fmt == "structured":
            _emit({**(e.report or {"kind": args.command}), "error": str(e)}, fmt, out)
        err.write(f"{e}\n")
        return 1
    except (NotNearUniformError, BudgetExceededError, InconsistencyError) as e:
        err.write(f"{e}\n")
        return 1
    _emit(report, fmt, out)
    return 0


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
