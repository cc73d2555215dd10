"""Line-oriented text formats for charts, machines, formulas, and reduction
instances, plus the parser and canonical emitter.

A document is a sequence of named blocks.  ``#`` starts a comment; a
``use "file"`` line splices another document in.  Emission is canonical
and byte-stable: ``emit(parse(text))`` normalizes and ``parse(emit(doc))``
reproduces the document.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from . import logic
from .cfm import Cfm, ProcessMachine
from .cmsc import Action, CMsc, Event, InvalidCMsc, validate
from .hmsc import Hmsc
from .logic import (
    ActIs,
    And,
    EmsoFormula,
    Eq,
    Exists,
    FoAst,
    Forall,
    In,
    Lbl,
    Le,
    LeProc,
    LtProc,
    Msg,
    Next,
    Not,
    OnProc,
    Or,
)
from .reductions import CounterMachine, PcpInstance, TmSpec


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, block: str | None = None):
        where = f" (line {line})" if line is not None else ""
        who = f" in block {block!r}" if block else ""
        super().__init__(f"{message}{who}{where}")
        self.line = line
        self.block = block


BLOCK_KINDS = ("cmsc", "hmsc", "cfm", "formula", "pcp", "tm", "cm")


@dataclass
class Document:
    """Named blocks in declaration order."""

    order: list[tuple[str, str]] = field(default_factory=list)  # (kind, name)
    cmscs: dict[str, CMsc] = field(default_factory=dict)
    hmscs: dict[str, Hmsc] = field(default_factory=dict)
    cfms: dict[str, Cfm] = field(default_factory=dict)
    formulas: dict[str, EmsoFormula] = field(default_factory=dict)
    pcps: dict[str, PcpInstance] = field(default_factory=dict)
    tms: dict[str, TmSpec] = field(default_factory=dict)
    cms: dict[str, CounterMachine] = field(default_factory=dict)

    def table(self, kind: str) -> dict:
        return getattr(self, kind + "s")

    def add(self, kind: str, name: str, value) -> None:
        table = self.table(kind)
        if name in table:
            raise ParseError(f"duplicate {kind} block {name!r}")
        table[name] = value
        self.order.append((kind, name))

    def hmsc_label_names(self, name: str) -> dict:
        """Canonical-key -> block name map for rendering the HMSC's labels."""
        return {m.key(): n for n, m in self.cmscs.items()}


def _lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def parse_file(path: str) -> Document:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read(), path=path)


def parse(text: str, path: str | None = None, _doc: Document | None = None) -> Document:
    doc = _doc if _doc is not None else Document()
    rows = list(_lines(text))
    i = 0
    while i < len(rows):
        lineno, line = rows[i]
        tokens = line.split()
        head = tokens[0]
        if head == "use":
            m = re.fullmatch(r'use\s+"([^"]+)"', line)
            if not m:
                raise ParseError('use expects a quoted path: use "file"', lineno)
            if path is None:
                raise ParseError("use directive needs a base path", lineno)
            target = os.path.join(os.path.dirname(os.path.abspath(path)), m.group(1))
            with open(target, "r", encoding="utf-8") as fh:
                parse(fh.read(), path=target, _doc=doc)
            i += 1
            continue
        if head not in BLOCK_KINDS:
            raise ParseError(f"unknown directive {head!r}", lineno)
        if len(tokens) != 2:
            raise ParseError(f"{head} header expects exactly a name", lineno)
        name = tokens[1]
        body: list[tuple[int, str]] = []
        i += 1
        while i < len(rows) and rows[i][1].split()[0] not in BLOCK_KINDS + ("use",):
            body.append(rows[i])
            i += 1
        parser = _BLOCK_PARSERS[head]
        try:
            doc.add(head, name, parser(body, doc))
        except (InvalidCMsc, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise ParseError(str(exc), block=name) from exc
            raise ParseError(str(exc), lineno, block=name) from exc
    return doc


def _parse_cmsc(body, doc: Document) -> CMsc:
    processes: list[str] = []
    messages: list[str] = []
    events: list[Event] = []
    matches: list[tuple[str, str]] = []
    for lineno, line in body:
        tokens = line.split()
        if tokens[0] == "processes":
            processes += tokens[1:]
        elif tokens[0] == "messages":
            messages += tokens[1:]
        elif tokens[0] == "event":
            if len(tokens) not in (3, 4):
                raise ParseError("event expects: event <id> <action> [msg=<m>]", lineno)
            msg = None
            if len(tokens) == 4:
                if not tokens[3].startswith("msg="):
                    raise ParseError("event label must be msg=<m>", lineno)
                msg = tokens[3][4:]
            events.append(Event(tokens[1], Action.parse(tokens[2]), msg))
        elif tokens[0] == "match":
            if len(tokens) != 3:
                raise ParseError("match expects: match <sendId> <recvId>", lineno)
            matches.append((tokens[1], tokens[2]))
        else:
            raise ParseError(f"unknown cmsc line {tokens[0]!r}", lineno)
    return validate(processes, messages, events, matches)


def _parse_hmsc(body, doc: Document) -> Hmsc:
    states: list[str] = []
    initial: str | None = None
    messages: list[str] = []
    accepting: set[str] = set()
    omega: set[str] = set()
    transitions: list[tuple[str, CMsc, str]] = []
    for lineno, line in body:
        tokens = line.split()
        if tokens[0] == "messages":
            messages += tokens[1:]
        elif tokens[0] == "state":
            states.append(tokens[1])
            for flag in tokens[2:]:
                if flag == "initial":
                    initial = tokens[1]
                elif flag == "final":
                    accepting.add(tokens[1])
                elif flag == "omega":
                    omega.add(tokens[1])
                else:
                    raise ParseError(f"unknown state flag {flag!r}", lineno)
        elif tokens[0] == "trans":
            if len(tokens) != 4 or not tokens[3].startswith("@"):
                raise ParseError("trans expects: trans <s> <s'> @<cmscName>", lineno)
            ref = tokens[3][1:]
            if ref not in doc.cmscs:
                raise ParseError(f"unresolved cmsc reference {ref!r}", lineno)
            transitions.append((tokens[1], doc.cmscs[ref], tokens[2]))
        else:
            raise ParseError(f"unknown hmsc line {tokens[0]!r}", lineno)
    if initial is None:
        raise ParseError("hmsc needs a state marked initial")
    return Hmsc(
        states=tuple(states),
        initial=initial,
        messages=tuple(sorted(set(messages))),
        transitions=tuple(transitions),
        accepting=frozenset(accepting),
        omega_accepting=frozenset(omega),
    )


def _parse_cfm(body, doc: Document) -> Cfm:
    machines: list[ProcessMachine] = []
    messages: list[str] = []
    accepting: list[tuple[str, ...]] = []
    omega: list[tuple[str, ...]] = []
    current: dict | None = None

    def close():
        nonlocal current
        if current is not None:
            machines.append(
                ProcessMachine(
                    process=current["proc"],
                    states=tuple(current["states"]),
                    initial=current["initial"],
                    transitions=tuple(current["trans"]),
                )
            )
            current = None

    for lineno, line in body:
        tokens = line.split()
        if tokens[0] == "messages":
            messages += tokens[1:]
        elif tokens[0] == "machine":
            close()
            current = {"proc": tokens[1], "states": [], "initial": None, "trans": []}
        elif tokens[0] == "state":
            if current is None:
                raise ParseError("state outside a machine block", lineno)
            current["states"].append(tokens[1])
            if len(tokens) > 2:
                if tokens[2] != "initial":
                    raise ParseError(f"unknown state flag {tokens[2]!r}", lineno)
                current["initial"] = tokens[1]
        elif tokens[0] == "trans":
            if current is None:
                raise ParseError("trans outside a machine block", lineno)
            if len(tokens) != 5:
                raise ParseError("trans expects: trans <s> <s'> <action> <msg>", lineno)
            current["trans"].append((tokens[1], tokens[3], tokens[4], tokens[2]))
        elif tokens[0] in ("accept", "accept-omega"):
            (omega if tokens[0] == "accept-omega" else accepting).append(tuple(tokens[1:]))
        else:
            raise ParseError(f"unknown cfm line {tokens[0]!r}", lineno)
    close()
    msgs = sorted(set(messages) | {m for pm in machines for _s, _a, m, _d in pm.transitions})
    return Cfm(
        machines=tuple(machines),
        messages=tuple(msgs),
        accepting=tuple(accepting),
        omega_accepting=tuple(omega),
    )


def _parse_pcp(body, doc: Document) -> PcpInstance:
    f: dict[str, tuple[str, ...]] = {}
    g: dict[str, tuple[str, ...]] = {}
    for lineno, line in body:
        tokens = line.split()
        if tokens[0] in ("f", "g") and len(tokens) >= 4 and tokens[2] == "->":
            table = f if tokens[0] == "f" else g
            if tokens[1] in table:
                raise ParseError(f"duplicate image for {tokens[1]!r}", lineno)
            table[tokens[1]] = tuple(tokens[3:])
        else:
            raise ParseError("pcp lines look like: f <letter> -> <letters...>", lineno)
    return PcpInstance(f=f, g=g)


def _parse_tm(body, doc: Document) -> TmSpec:
    fields: dict = {"rules": []}
    for lineno, line in body:
        tokens = line.split()
        key = tokens[0]
        if key == "states":
            fields["states"] = tuple(tokens[1:])
        elif key == "tape":
            fields["tape"] = tuple(tokens[1:])
        elif key in ("initial", "halting", "lend", "blank"):
            if len(tokens) != 2:
                raise ParseError(f"{key} expects one symbol", lineno)
            fields[key] = tokens[1]
        elif key == "rule":
            if len(tokens) != 8 or tokens[4] != "->":
                raise ParseError("rule expects: rule a s b -> x y z", lineno)
            fields["rules"].append(((tokens[1], tokens[2], tokens[3]), (tokens[5], tokens[6], tokens[7])))
        else:
            raise ParseError(f"unknown tm line {key!r}", lineno)
    try:
        return TmSpec(
            states=fields["states"],
            initial=fields["initial"],
            halting=fields["halting"],
            tape=fields["tape"],
            left_end=fields["lend"],
            blank=fields["blank"],
            rules=tuple(fields["rules"]),
        )
    except KeyError as missing:
        raise ParseError(f"tm block is missing {missing.args[0]!r}")


def _parse_cm(body, doc: Document) -> CounterMachine:
    states: tuple[str, ...] = ()
    initial: str | None = None
    finals: set[str] = set()
    transitions: list[tuple[str, str, int, str]] = []
    for lineno, line in body:
        tokens = line.split()
        if tokens[0] == "states":
            states = tuple(tokens[1:])
        elif tokens[0] == "initial":
            initial = tokens[1]
        elif tokens[0] == "final":
            finals.update(tokens[1:])
        elif tokens[0] == "trans":
            if len(tokens) != 5 or tokens[4] not in ("c1", "c2"):
                raise ParseError("trans expects: trans <s> <s'> <inc|dec|zero> <c1|c2>", lineno)
            transitions.append((tokens[1], tokens[3], int(tokens[4][1]), tokens[2]))
        else:
            raise ParseError(f"unknown cm line {tokens[0]!r}", lineno)
    if initial is None:
        raise ParseError("cm needs an initial state")
    return CounterMachine(
        states=states,
        initial=initial,
        finals=frozenset(finals),
        transitions=tuple((s, op, c, d) for s, op, c, d in transitions),
    )


# --------------------------------------------------------------------------
# Formula syntax
# --------------------------------------------------------------------------


def _parse_formula(body, doc: Document) -> EmsoFormula:
    text = " ".join(line for _n, line in body)
    return parse_formula(text)


def parse_formula(text: str) -> EmsoFormula:
    tokens = re.findall(r"[()]|[^\s()]+", text)
    pos = 0

    def sexp():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of formula")
        tok = tokens[pos]
        pos += 1
        if tok != "(":
            return tok
        out = []
        while pos < len(tokens) and tokens[pos] != ")":
            out.append(sexp())
        if pos >= len(tokens):
            raise ParseError("missing ) in formula")
        pos += 1
        return out

    tree = sexp()
    if pos != len(tokens):
        raise ParseError("trailing tokens after formula")
    prefix: list[str] = []
    while isinstance(tree, list) and tree and tree[0] == "exists-set":
        if len(tree) != 3:
            raise ParseError("exists-set expects a variable and a body")
        prefix.append(tree[1])
        tree = tree[2]
    return EmsoFormula(tuple(prefix), _ast(tree))


def _ast(tree) -> FoAst:
    if not isinstance(tree, list):
        raise ParseError(f"expected a formula, got {tree!r}")
    if not tree:
        raise ParseError("empty s-expression")
    head, *args = tree
    binary = {"le": Le, "leproc": LeProc, "ltproc": LtProc, "next": Next, "msg": Msg, "eq": Eq}
    if head in binary:
        if len(args) != 2:
            raise ParseError(f"{head} expects two variables")
        return binary[head](args[0], args[1])
    if head == "act":
        return ActIs(args[0], Action.parse(args[1]))
    if head == "on":
        return OnProc(args[0], args[1])
    if head == "lbl":
        return Lbl(args[0], args[1])
    if head == "in":
        return In(args[0], args[1])
    if head == "not":
        if len(args) != 1:
            raise ParseError("not expects one formula")
        return Not(_ast(args[0]))
    if head == "and":
        return And(tuple(_ast(a) for a in args))
    if head == "or":
        return Or(tuple(_ast(a) for a in args))
    if head in ("exists", "forall"):
        if len(args) != 2:
            raise ParseError(f"{head} expects a variable and a body")
        cls = Exists if head == "exists" else Forall
        return cls(args[0], _ast(args[1]))
    raise ParseError(f"unknown formula keyword {head!r}")


def emit_formula(phi: EmsoFormula) -> str:
    text = _emit_ast(phi.body)
    for var in reversed(phi.prefix):
        text = f"(exists-set {var} {text})"
    return text


def _emit_ast(node: FoAst) -> str:
    kind = type(node)
    if kind is Le:
        return f"(le {node.x} {node.y})"
    if kind is LeProc:
        return f"(leproc {node.x} {node.y})"
    if kind is LtProc:
        return f"(ltproc {node.x} {node.y})"
    if kind is Next:
        return f"(next {node.x} {node.y})"
    if kind is Msg:
        return f"(msg {node.x} {node.y})"
    if kind is Eq:
        return f"(eq {node.x} {node.y})"
    if kind is ActIs:
        return f"(act {node.x} {node.action})"
    if kind is OnProc:
        return f"(on {node.x} {node.process})"
    if kind is Lbl:
        return f"(lbl {node.x} {node.message})"
    if kind is In:
        return f"(in {node.x} {node.setvar})"
    if kind is Not:
        return f"(not {_emit_ast(node.sub)})"
    if kind is And:
        return "(and" + "".join(" " + _emit_ast(p) for p in node.parts) + ")"
    if kind is Or:
        return "(or" + "".join(" " + _emit_ast(p) for p in node.parts) + ")"
    if kind is Exists:
        return f"(exists {node.var} {_emit_ast(node.sub)})"
    return f"(forall {node.var} {_emit_ast(node.sub)})"


# --------------------------------------------------------------------------
# Emission
# --------------------------------------------------------------------------


def emit(doc: Document) -> str:
    chunks = []
    for kind, name in doc.order:
        chunks.append(_BLOCK_EMITTERS[kind](name, doc.table(kind)[name], doc))
    return "\n".join(chunks)


def emit_cmsc(name: str, m: CMsc, doc: Document | None = None) -> str:
    lines = [f"cmsc {name}"]
    lines.append("processes " + " ".join(m.processes))
    if m.messages:
        lines.append("messages " + " ".join(m.messages))
    for p in m.active_processes:
        for i in m.chains[p]:
            suffix = f" msg={m.msgs[i]}" if m.msgs[i] is not None else ""
            lines.append(f"event {m.eids[i]} {m.actions[i]}{suffix}")
    for s, r in m.matches:
        lines.append(f"match {m.eids[s]} {m.eids[r]}")
    return "\n".join(lines) + "\n"


def emit_hmsc(name: str, h: Hmsc, doc: Document | None = None) -> str:
    names = doc.hmsc_label_names(name) if doc else {}
    lines = [f"hmsc {name}"]
    if h.messages:
        lines.append("messages " + " ".join(h.messages))
    for s in h.states:
        flags = ""
        if s == h.initial:
            flags += " initial"
        if s in h.accepting:
            flags += " final"
        if s in h.omega_accepting:
            flags += " omega"
        lines.append(f"state {s}{flags}")
    for src, label, dst in h.transitions:
        ref = names.get(label.key())
        if ref is None:
            raise ValueError(f"transition label of {name!r} has no cmsc block to reference")
        lines.append(f"trans {src} {dst} @{ref}")
    return "\n".join(lines) + "\n"


def emit_cfm(name: str, a: Cfm, doc: Document | None = None) -> str:
    lines = [f"cfm {name}"]
    if a.messages:
        lines.append("messages " + " ".join(a.messages))
    for pm in a.machines:
        lines.append(f"machine {pm.process}")
        for s in pm.states:
            lines.append(f"state {s}" + (" initial" if s == pm.initial else ""))
        for src, action, msg, dst in pm.transitions:
            lines.append(f"trans {src} {dst} {action} {msg}")
    for tup in a.accepting:
        lines.append("accept " + " ".join(tup))
    for tup in a.omega_accepting:
        lines.append("accept-omega " + " ".join(tup))
    return "\n".join(lines) + "\n"


def emit_formula_block(name: str, phi: EmsoFormula, doc: Document | None = None) -> str:
    return f"formula {name}\n{emit_formula(phi)}\n"


def emit_pcp(name: str, inst: PcpInstance, doc: Document | None = None) -> str:
    lines = [f"pcp {name}"]
    for letter in inst.letters:
        lines.append(f"f {letter} -> " + " ".join(inst.f[letter]))
    for letter in inst.letters:
        lines.append(f"g {letter} -> " + " ".join(inst.g[letter]))
    return "\n".join(lines) + "\n"


def emit_tm(name: str, spec: TmSpec, doc: Document | None = None) -> str:
    lines = [
        f"tm {name}",
        "states " + " ".join(spec.states),
        f"initial {spec.initial}",
        f"halting {spec.halting}",
        "tape " + " ".join(spec.tape),
        f"lend {spec.left_end}",
        f"blank {spec.blank}",
    ]
    for (a, s, b), (x, y, z) in spec.rules:
        lines.append(f"rule {a} {s} {b} -> {x} {y} {z}")
    return "\n".join(lines) + "\n"


def emit_cm(name: str, cm: CounterMachine, doc: Document | None = None) -> str:
    lines = [
        f"cm {name}",
        "states " + " ".join(cm.states),
        f"initial {cm.initial}",
    ]
    if cm.finals:
        lines.append("final " + " ".join(sorted(cm.finals)))
    for src, op, counter, dst in cm.transitions:
        lines.append(f"trans {src} {dst} {op} c{counter}")
    return "\n".join(lines) + "\n"


_BLOCK_PARSERS = {
    "cmsc": _parse_cmsc,
    "hmsc": _parse_hmsc,
    "cfm": _parse_cfm,
    "formula": _parse_formula,
    "pcp": _parse_pcp,
    "tm": _parse_tm,
    "cm": _parse_cm,
}

_BLOCK_EMITTERS = {
    "cmsc": emit_cmsc,
    "hmsc": emit_hmsc,
    "cfm": emit_cfm,
    "formula": emit_formula_block,
    "pcp": emit_pcp,
    "tm": emit_tm,
    "cm": emit_cm,
}
