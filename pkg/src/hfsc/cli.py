"""Command-line driver: synthesize, run, verify, compile, decode, export."""

from __future__ import annotations

import argparse
import json
import sys
import time
from itertools import product
from pathlib import Path
from typing import Sequence

from . import fsc
from .compilation import CompiledProblem, SynthesisParams, compile_flat, compile_hier, inject_priors
from .decode import DecodeError, DecodingKey, decode, decode_trace
from .domains import DOMAINS, DomainSpec, generate, tree_dfs_controller, visitall_hierarchy, visitall_priors
from .model import GeneralizedProblem, Problem
from .pddl import PDDLError, emit, ground, ground_generalized, parse_domain, parse_plan, parse_problem
from .planner import Status, synthesis_search

REPORT_FORMAT = "hfsc-report-v1"

FIXTURES = {
    "tree-dfs": tree_dfs_controller,
    "visitall-priors": visitall_priors,
    "two-subcontrollers": visitall_priors,
    "visitall": visitall_hierarchy,
}

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


# -- inputs -----------------------------------------------------------------

def _sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _param_lists(text: str | None, m: int) -> tuple[tuple[str, ...], ...] | None:
    """``"n;;a,b"`` -> ``(("n",), (), ("a", "b"))``."""
    if text is None:
        return None
    parts = text.split(";")
    if len(parts) != m:
        raise CliError(f"--params lists {len(parts)} controllers but --m is {m}")
    return tuple(tuple(x for x in p.split(",") if x) for p in parts)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None


def _load_problems(args) -> tuple[GeneralizedProblem, list[Problem], str]:
    """Shared table for synthesis, plus each instance grounded on its own."""
    if args.domain_file:
        if not args.problem:
            raise CliError("--domain-file needs at least one --problem")
        dom = parse_domain(_read(args.domain_file))
        asts = [parse_problem(_read(p), dom) for p in args.problem]
        label = dom.name
    else:
        spec = DomainSpec(args.domain, args.sizes, args.seed, shuffle_names=args.shuffle_names,
                          previsited=args.previsited)
        gen = generate(spec)
        dom, asts, label = gen.domain, gen.problems, spec.name
    return ground_generalized(dom, asts), [ground(dom, a) for a in asts], label


def _load_hierarchy(path_or_fixture: str) -> fsc.Hierarchy:
    if path_or_fixture in FIXTURES:
        return FIXTURES[path_or_fixture]()
    return fsc.load(_read(path_or_fixture))


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    p.write_text(text)
    return p


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# -- synthesis ---------------------------------------------------------------

def _compile(gp: GeneralizedProblem, n: int, m: int, ell: int, params, priors, hierarchical: bool,
             dynamic: bool = False) -> CompiledProblem:
    if hierarchical:
        return compile_hier(gp, SynthesisParams(n, m, ell, params, priors, dynamic_conditions=dynamic))
    cp = compile_flat(gp, n, dynamic_conditions=dynamic)
    return inject_priors(cp, priors) if priors is not None else cp


def _bounds(args) -> list[tuple[int, int, int]]:
    if not args.iterate_bounds:
        return [(args.n, args.m, args.stack)]
    # smallest bounds first, n varying slowest
    return list(product(range(1, args.n + 1), range(1, args.m + 1), range(0, args.stack + 1)))


def _fill_bounds(args, priors: fsc.Hierarchy | None) -> None:
    """Unset bounds default to what the priors imply, else n=2, m=1, stack 0."""
    if priors is not None:
        args.n = priors.num_states - 1 if args.n is None else args.n
        args.m = len(priors.controllers) if args.m is None else args.m
        if args.stack is None and args.m > 1:
            args.stack = 1
    args.n = 2 if args.n is None else args.n
    args.m = 1 if args.m is None else args.m
    args.stack = 0 if args.stack is None else args.stack


def cmd_synth(args) -> int:
    gp, problems, label = _load_problems(args)
    priors = _load_hierarchy(args.priors) if args.priors else None
    _fill_bounds(args, priors)
    hierarchical = args.m > 1 or args.stack > 0 or args.params is not None or args.hierarchical
    out = Path(args.out)
    report = {"format": REPORT_FORMAT, "command": "synth", "domain": label, "instances": len(problems),
              "seed": args.seed, "attempts": []}
    hierarchy = None
    for n, m, ell in _bounds(args):
        if priors is not None and (priors.num_states != n + 1 or len(priors.controllers) > m):
            continue
        params = _param_lists(args.params, m) if args.params is not None else None
        cp = _compile(gp, n, m, ell, params, priors, hierarchical, args.dynamic_conditions)
        attempt = {"n": n, "m": m, "stack": ell, "fluents": len(cp.problem.fluents),
                   "actions": len(cp.problem.actions)}
        report["attempts"].append(attempt)
        if args.emit_pddl:
            d_text, p_text = emit(cp.problem, f"{label}-compiled")
            _write(Path(args.emit_pddl), "domain.pddl", d_text)
            _write(Path(args.emit_pddl), "problem.pddl", p_text)
            _write(Path(args.emit_pddl), "key.json", cp.key.dumps())
        if args.plan:
            names = parse_plan(_read(args.plan))
            attempt["search"] = {"status": "external-plan", "length": len(names)}
        else:
            t0 = time.monotonic()
            res = synthesis_search(cp.problem, args.budget_expansions, args.budget_seconds)
            attempt["search"] = {"status": res.status.value, "expansions": res.expansions,
                                 "seconds": round(time.monotonic() - t0, 3)}
            if res.status is not Status.SOLVED:
                continue
            names = cp.plan_names(res.plan)
            attempt["search"]["length"] = len(names)
            _write(out, "plan.txt", "".join(f"({x})\n" for x in names))
        hierarchy = decode(names, cp.key)
        decode_trace(names, cp.key)
        report["bounds"] = {"n": n, "m": m, "stack": ell}
        break
    if hierarchy is None:
        report["verdicts"] = []
        report["solved"] = False
        _write(out, "report.json", _dump(report))
        print(f"synth: no controller found within the bounds; report in {out / 'report.json'}", file=sys.stderr)
        return EXIT_FAIL
    limits = fsc.Limits(max_stack=report["bounds"]["stack"])
    verdicts = [fsc.execute(hierarchy, p, limits).outcome.value for p in problems]
    report["verdicts"] = verdicts
    report["solved"] = all(v == fsc.Outcome.SOLVED.value for v in verdicts)
    report["controller_states"] = fsc.controller_sizes(hierarchy)
    report["recursive"] = hierarchy.is_recursive()
    _write(out, "hierarchy.json", fsc.save(hierarchy))
    _write(out, "hierarchy.dot", fsc.to_dot(hierarchy))
    _write(out, "report.json", _dump(report))
    print(f"synth: states per controller {report['controller_states']}, verdicts {verdicts}")
    return EXIT_OK if report["solved"] else EXIT_FAIL


# -- execution ---------------------------------------------------------------

def _execute_all(args, command: str) -> int:
    h = _load_hierarchy(args.hierarchy)
    _, problems, label = _load_problems(args)
    limits = fsc.Limits(max_stack=args.stack, step_budget=args.step_budget)
    traces = [fsc.execute(h, p, limits) for p in problems]
    verdicts = [t.outcome.value for t in traces]
    report = {"format": REPORT_FORMAT, "command": command, "domain": label, "seed": args.seed,
              "verdicts": verdicts, "solved": all(t.solved for t in traces),
              "steps": [len(t.events) for t in traces]}
    for i, t in enumerate(traces):
        line = f"instance {i + 1}: {t.outcome.value} after {len(t.events)} steps"
        print(line + (f" ({t.detail})" if t.detail else ""))
        if command == "run" and args.trace:
            for ev in t.events:
                ins = f" {ev.instruction}" if ev.instruction is not None else ""
                print(f"  L{ev.level} C{ev.controller + 1} q{ev.q} b={ev.branch} {ev.kind}{ins}")
    if args.out:
        _write(Path(args.out), f"{command}-report.json", _dump(report))
    return EXIT_OK if report["solved"] else EXIT_FAIL


def cmd_run(args) -> int:
    return _execute_all(args, "run")


def cmd_verify(args) -> int:
    return _execute_all(args, "verify")


def cmd_compile(args) -> int:
    gp, _, label = _load_problems(args)
    priors = _load_hierarchy(args.priors) if args.priors else None
    _fill_bounds(args, priors)
    hierarchical = args.m > 1 or args.stack > 0 or args.params is not None or args.hierarchical
    params = _param_lists(args.params, args.m)
    cp = _compile(gp, args.n, args.m, args.stack, params, priors, hierarchical, args.dynamic_conditions)
    d_text, p_text = emit(cp.problem, f"{label}-compiled")
    out = Path(args.out)
    _write(out, "domain.pddl", d_text)
    _write(out, "problem.pddl", p_text)
    _write(out, "key.json", cp.key.dumps())
    print(f"compile: {len(cp.problem.fluents)} fluents, {len(cp.problem.actions)} actions -> {out}")
    return EXIT_OK


def cmd_decode(args) -> int:
    key = DecodingKey.loads(_read(args.key))
    names = parse_plan(_read(args.plan))
    h = decode(names, key)
    decode_trace(names, key)
    text = fsc.save(h)
    if args.out:
        _write(Path(args.out).parent, Path(args.out).name, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    text = fsc.to_dot(_load_hierarchy(args.hierarchy))
    if args.out:
        _write(Path(args.out).parent, Path(args.out).name, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_fixture(args) -> int:
    text = fsc.save(FIXTURES[args.name]())
    if args.out:
        _write(Path(args.out).parent, Path(args.out).name, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _problem_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problems (built-in generator or PDDL files)")
    g.add_argument("--domain", choices=DOMAINS, help="built-in domain")
    g.add_argument("--sizes", type=_sizes, default=(3,), help="instance sizes, e.g. 2,3,4")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--shuffle-names", action="store_true", help="permute object names per instance")
    g.add_argument("--previsited", type=int, help="visitall: cells visited at the start (default random)")
    g.add_argument("--domain-file")
    g.add_argument("--problem", action="append", default=[], help="problem file (repeatable)")


def _bound_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="controller states q0..qn, qn terminal (default 2)")
    p.add_argument("--m", type=int, help="number of controllers (default 1)")
    p.add_argument("--stack", type=int, help="maximum stack level (default 0)")
    p.add_argument("--params", help="parameter lists per controller, e.g. 'n;;a,b'")
    p.add_argument("--hierarchical", action="store_true", help="use the hierarchical encoding even for m=1, stack 0")
    p.add_argument("--priors", help="hierarchy file or fixture name with fixed table entries")
    p.add_argument("--dynamic-conditions", action="store_true",
                   help="branch only on fluents that some action changes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hfsc", description="Synthesize and run hierarchical finite state controllers.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="compile, search, decode and check a controller")
    _problem_args(s)
    _bound_args(s)
    s.add_argument("--budget-expansions", type=int, default=2_000_000)
    s.add_argument("--budget-seconds", type=float, default=None)
    s.add_argument("--emit-pddl", metavar="DIR", help="also write the compiled problem and its key")
    s.add_argument("--plan", help="decode this external plan instead of searching")
    s.add_argument("--iterate-bounds", action="store_true", help="try all bounds up to --n/--m/--stack, smallest first")
    s.add_argument("--out", default="hfsc-out")
    s.set_defaults(func=cmd_synth)

    for name, func, helptext in (("run", cmd_run, "execute a hierarchy and print traces"),
                                 ("verify", cmd_verify, "execute a hierarchy on (held-out) instances")):
        r = sub.add_parser(name, help=helptext)
        _problem_args(r)
        r.add_argument("--hierarchy", required=True, help="hierarchy file or fixture name")
        r.add_argument("--stack", type=int, default=64)
        r.add_argument("--step-budget", type=int, default=1_000_000)
        r.add_argument("--out")
        if name == "run":
            r.add_argument("--trace", action="store_true")
        r.set_defaults(func=func)

    c = sub.add_parser("compile", help="write the compiled problem as PDDL with its decoding key")
    _problem_args(c)
    _bound_args(c)
    c.add_argument("--out", default="hfsc-compiled")
    c.set_defaults(func=cmd_compile)

    d = sub.add_parser("decode", help="read a hierarchy out of a plan for a compiled problem")
    d.add_argument("--key", required=True)
    d.add_argument("--plan", required=True)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decode)

    e = sub.add_parser("export-dot", help="Graphviz rendering of a hierarchy")
    e.add_argument("--hierarchy", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_export_dot)

    f = sub.add_parser("fixture", help="write a built-in hand-written hierarchy")
    f.add_argument("name", choices=sorted(FIXTURES))
    f.add_argument("--out")
    f.set_defaults(func=cmd_fixture)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if hasattr(args, "domain_file") and not args.domain_file and not args.domain:
        ap.error("either --domain or --domain-file is required")
    try:
        return args.func(args)
    except (CliError, PDDLError, DecodeError, fsc.FormatError, fsc.HierarchyError, ValueError) as e:
        print(f"hfsc {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
