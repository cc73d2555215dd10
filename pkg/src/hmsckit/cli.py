"""Command-line interface.

Exit codes: 0 for success (including negative answers to plain queries),
1 for violation/unknown/unsafe verdicts, 2 for usage, syntax, or
validation errors.
"""

from __future__ import annotations

import argparse
import sys

from . import cfm as cfm_mod
from . import dot, hmsc, logic, textio
from .closures import ClosureContext
from .cmsc import InvalidCMsc, canonicalize, communication_graph, connected, weakly_connected
from .compose import concat_pair
from .reductions import cm2_to_hmsc, pcp_to_hmsc, tm_to_hmsc

VERDICT_EXIT = 1
ERROR_EXIT = 2


def _load(path: str) -> textio.Document:
    return textio.parse_file(path)


def _get(table: dict, name: str, kind: str):
    if name not in table:
        raise SystemExit2(f"no {kind} named {name!r} in the document")
    return table[name]


class SystemExit2(Exception):
    pass


def cmd_validate(args) -> int:
    try:
        doc = _load(args.file)
    except InvalidCMsc as exc:
        print(f"invalid: {exc}")
        return VERDICT_EXIT
    except textio.ParseError as exc:
        if isinstance(exc.__cause__, InvalidCMsc):
            print(f"invalid: {exc}")
            return VERDICT_EXIT
        raise
    print(f"ok: {len(doc.order)} blocks")
    for kind, name in doc.order:
        print(f"  {kind} {name}")
    return 0


def cmd_concat(args) -> int:
    doc = _load(args.file)
    m1 = _get(doc.cmscs, args.left, "cmsc")
    m2 = _get(doc.cmscs, args.right, "cmsc")
    out = sorted(concat_pair(m1, m2), key=lambda m: m.sort_key)
    print(f"# {len(out)} results")
    for i, m in enumerate(out):
        sys.stdout.write(textio.emit_cmsc(f"{args.left}_{args.right}_{i}", m))
    return 0


def cmd_connected(args) -> int:
    doc = _load(args.file)
    m = _get(doc.cmscs, args.name, "cmsc")
    print("connected" if connected(m) else "disconnected")
    print("weakly-connected" if weakly_connected(m) else "weakly-disconnected")
    return 0


def cmd_commgraph(args) -> int:
    doc = _load(args.file)
    m = _get(doc.cmscs, args.name, "cmsc")
    nodes, edges = communication_graph(m)
    print("processes " + " ".join(nodes))
    for e in sorted(tuple(sorted(x)) for x in edges):
        print(f"edge {e[0]} {e[1]}")
    return 0


def cmd_loopcheck(args) -> int:
    doc = _load(args.file)
    h = _get(doc.hmscs, args.name, "hmsc")
    verdict = hmsc.loop_connected_bounded(h, args.bound)
    if verdict.ok:
        print(f"PASS up to cycle length {args.bound}")
        return 0
    print(f"VIOLATION cycle={list(verdict.witness)} {verdict.detail}")
    return VERDICT_EXIT


def cmd_wlc(args) -> int:
    doc = _load(args.file)
    h = _get(doc.hmscs, args.name, "hmsc")
    verdict = hmsc.weakly_loop_connected_exact(h)
    if verdict.ok:
        print("PASS")
        return 0
    print(f"VIOLATION cycle={list(verdict.witness)} {verdict.detail}")
    return VERDICT_EXIT


def cmd_safe(args) -> int:
    doc = _load(args.file)
    h = _get(doc.hmscs, args.name, "hmsc")
    verdict = hmsc.safe_bounded(h, args.bound)
    if verdict.ok:
        print(f"SAFE up to path length {args.bound}")
        return 0
    print(f"UNSAFE witness={list(verdict.witness)}")
    return VERDICT_EXIT


def cmd_to_emso(args) -> int:
    doc = _load(args.file)
    h = _get(doc.hmscs, args.name, "hmsc")
    phi = hmsc.hmsc_to_emso(h, guard_cycle_bound=args.guard_bound)
    print(textio.emit_formula(phi))
    return 0


def cmd_eval(args) -> int:
    doc = _load(args.file)
    phi = _get(doc.formulas, args.formula, "formula")
    m = _get(doc.cmscs, args.name, "cmsc")
    budget = logic.EvalBudget(max_events=args.max_events, max_set_vars=args.max_set_vars)
    print("true" if logic.evaluate(phi, m, budget) else "false")
    return 0


def cmd_lang(args) -> int:
    doc = _load(args.file)
    h = _get(doc.hmscs, args.name, "hmsc")
    out = sorted(
        hmsc.bounded_language(h, args.max_path, args.max_events), key=lambda m: m.sort_key
    )
    print(f"# {len(out)} complete MSCs")
    for i, m in enumerate(out):
        sys.stdout.write(textio.emit_cmsc(f"{args.name}_lang_{i}", m))
    return 0


def cmd_sat(args) -> int:
    doc = _load(args.file)
    h = _get(doc.hmscs, args.name, "hmsc")
    result = hmsc.sat_search(h, args.max_steps, args.max_queue)
    if result.is_sat:
        labels = [f"{h.transitions[t][0]}->{h.transitions[t][2]}" for t in result.witness]
        print("SAT witness=" + " ".join(labels))
        return 0
    print(f"UNKNOWN at steps={args.max_steps} queue={args.max_queue}")
    return VERDICT_EXIT


def cmd_cfm_accepts(args) -> int:
    doc = _load(args.file)
    a = _get(doc.cfms, args.cfm, "cfm")
    m = _get(doc.cmscs, args.name, "cmsc")
    print("accepted" if cfm_mod.accepts_msc(a, m) else "rejected")
    return 0


def cmd_cfm_lang(args) -> int:
    doc = _load(args.file)
    a = _get(doc.cfms, args.cfm, "cfm")
    out = sorted(cfm_mod.bounded_language_cfm(a, args.max_events), key=lambda m: m.sort_key)
    print(f"# {len(out)} complete MSCs")
    for i, m in enumerate(out):
        sys.stdout.write(textio.emit_cmsc(f"{args.cfm}_lang_{i}", m))
    return 0


def cmd_reduce(args) -> int:
    doc = _load(args.file)
    if args.kind == "pcp":
        h = pcp_to_hmsc(_get(doc.pcps, args.name, "pcp"))
    elif args.kind == "tm":
        h = tm_to_hmsc(_get(doc.tms, args.name, "tm"))
    else:
        h = cm2_to_hmsc(_get(doc.cms, args.name, "cm"))
    out = textio.Document()
    labels: dict = {}
    for _src, label, _dst in h.transitions:
        if label.key() not in labels:
            labels[label.key()] = f"{args.name}_m{len(labels)}"
            out.add("cmsc", labels[label.key()], label)
    out.add("hmsc", f"{args.name}_hmsc", h)
    sys.stdout.write(textio.emit(out))
    return 0


def cmd_render(args) -> int:
    doc = _load(args.file)
    if args.format != "dot":
        raise SystemExit2(f"unsupported format {args.format!r}")
    for kind in ("cmscs", "hmscs", "cfms"):
        table = getattr(doc, kind)
        if args.name in table:
            obj = table[args.name]
            names = doc.hmsc_label_names(args.name) if kind == "hmscs" else None
            sys.stdout.write(dot.render_dot(obj, names))
            return 0
    raise SystemExit2(f"no renderable block named {args.name!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hmsckit",
        description="Compositional MSCs, HMSCs, EMSO formulas, and CFMs",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, *spec, **kw):
        p = sub.add_parser(name, **kw)
        for flags, opts in spec:
            p.add_argument(*flags, **opts)
        p.set_defaults(fn=fn)
        return p

    f = (["file"], {"help": "input document"})
    add("validate", cmd_validate, f, help="parse and validate every block")
    add(
        "concat",
        cmd_concat,
        f,
        (["left"], {}),
        (["right"], {}),
        help="set-valued concatenation of two cMSCs",
    )
    add("connected", cmd_connected, f, (["name"], {}), help="event-graph and communication-graph connectivity")
    add("commgraph", cmd_commgraph, f, (["name"], {}), help="communication graph of a cMSC")
    add(
        "loopcheck",
        cmd_loopcheck,
        f,
        (["name"], {}),
        (["--bound"], {"type": int, "default": 4}),
        help="bounded loop-connectedness check",
    )
    add("wlc-check", cmd_wlc, f, (["name"], {}), help="exact weak loop-connectedness check")
    add(
        "safe-check",
        cmd_safe,
        f,
        (["name"], {}),
        (["--bound"], {"type": int, "default": 6}),
        help="bounded safety check",
    )
    add(
        "to-emso",
        cmd_to_emso,
        f,
        (["name"], {}),
        (["--guard-bound"], {"type": int, "default": 3}),
        help="translate a loop-connected HMSC to a formula",
    )
    add(
        "eval",
        cmd_eval,
        f,
        (["formula"], {}),
        (["name"], {}),
        (["--max-events"], {"type": int, "default": 10}),
        (["--max-set-vars"], {"type": int, "default": 8}),
        help="evaluate a formula on a cMSC",
    )
    add(
        "lang",
        cmd_lang,
        f,
        (["name"], {}),
        (["--max-path"], {"type": int, "default": 6}),
        (["--max-events"], {"type": int, "default": 6}),
        help="bounded language of an HMSC",
    )
    add(
        "sat",
        cmd_sat,
        f,
        (["name"], {}),
        (["--max-steps"], {"type": int, "default": 20}),
        (["--max-queue"], {"type": int, "default": 20}),
        help="bounded satisfiability search",
    )
    add("cfm-accepts", cmd_cfm_accepts, f, (["cfm"], {}), (["name"], {}), help="CFM acceptance of an MSC")
    add(
        "cfm-lang",
        cmd_cfm_lang,
        f,
        (["cfm"], {}),
        (["--max-events"], {"type": int, "default": 6}),
        help="bounded language of a CFM",
    )
    add(
        "reduce",
        cmd_reduce,
        (["kind"], {"choices": ["pcp", "tm", "cm2"]}),
        f,
        (["name"], {}),
        help="emit the HMSC of an undecidability reduction",
    )
    add(
        "render",
        cmd_render,
        f,
        (["name"], {}),
        (["--format"], {"default": "dot"}),
        help="render a block as a graph description",
    )
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (textio.ParseError, InvalidCMsc, SystemExit2, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR_EXIT


if __name__ == "__main__":
    sys.exit(main())
