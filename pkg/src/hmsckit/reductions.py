"""Generators reducing classic undecidable problems to HMSC satisfiability.

Each generator emits an ordinary HMSC whose language is nonempty exactly
when the source instance has a solution: a word correspondence between two
morphisms, a halting computation of a tape-rewriting machine on the empty
word, or a two-counter machine run reaching a final state with both
counters zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .cmsc import CMsc, Event, recv, send, validate
from .hmsc import Hmsc


@dataclass(frozen=True)
class PcpInstance:
    """Two morphisms f, g from letters of A to nonempty words over B."""

    f: Mapping[str, tuple[str, ...]]
    g: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        if set(self.f) != set(self.g) or not self.f:
            raise ValueError("f and g must share a nonempty domain alphabet")
        images: set[str] = set()
        for morphism in (self.f, self.g):
            for letter, word in morphism.items():
                if not word:
                    raise ValueError(f"image of {letter!r} must be nonempty")
                images.update(word)
        if images & set(self.f):
            raise ValueError("domain and image alphabets must be disjoint")

    @property
    def letters(self) -> tuple[str, ...]:
        return tuple(sorted(self.f))

    @property
    def image_letters(self) -> tuple[str, ...]:
        out: set[str] = set()
        for morphism in (self.f, self.g):
            for word in morphism.values():
                out.update(word)
        return tuple(sorted(out))


def pcp_to_hmsc(inst: PcpInstance) -> Hmsc:
    """Flat HMSC over processes p, q, r that is satisfiable iff the
    correspondence instance has a solution.

    Process p emits each guessed letter to both q and r; q answers with the
    f-image, r with the g-image; p finally consumes one interleaved answer
    word, which forces the two images to be equal.
    """
    procs = ("p", "q", "r")
    msgs = tuple(sorted(set(inst.letters) | set(inst.image_letters)))

    def guess(letter: str) -> CMsc:
        events = [
            Event(f"s1", send("p", "q"), letter),
            Event(f"s2", send("p", "r"), letter),
        ]
        return validate(procs, msgs, events)

    def answer(proc: str, letter: str, word: Sequence[str]) -> CMsc:
        events = [Event("r0", recv(proc, "p"), letter)]
        events += [
            Event(f"w{i}", send(proc, "p"), b) for i, b in enumerate(word)
        ]
        return validate(procs, msgs, events)

    def consume(b: str) -> CMsc:
        events = [
            Event("c1", recv("p", "q"), b),
            Event("c2", recv("p", "r"), b),
        ]
        return validate(procs, msgs, events)

    transitions = []
    for a in inst.letters:
        label = guess(a)
        transitions += [("1", label, "1"), ("1", label, "2")]
    for a in inst.letters:
        label = answer("q", a, inst.f[a])
        transitions += [("2", label, "2"), ("2", label, "3")]
    for a in inst.letters:
        label = answer("r", a, inst.g[a])
        transitions += [("3", label, "3"), ("3", label, "4")]
    for b in inst.image_letters:
        label = consume(b)
        transitions += [("4", label, "4"), ("4", label, "5")]
    return Hmsc(
        states=("1", "2", "3", "4", "5"),
        initial="1",
        messages=msgs,
        transitions=tuple(transitions),
        accepting=frozenset({"5"}),
    )


def pcp_path_bound(inst: PcpInstance, max_word_len: int) -> int:
    """Path length sufficient for witnessing solutions up to the word length."""
    longest = max(
        max(len(w) for w in inst.f.values()),
        max(len(w) for w in inst.g.values()),
    )
    return max_word_len * (3 + longest)


def extract_pcp_solution(h: Hmsc, witness: Sequence[int]) -> tuple[str, ...]:
    """Read the guessed word off a satisfiability witness path."""
    word = []
    for t in witness:
        label = h.transitions[t][1]
        if label.actions[0] == send("p", "q"):
            word.append(label.msgs[0])
    return tuple(word)


MARKER = "#"


@dataclass(frozen=True)
class TmSpec:
    """Nondeterministic tape machine given by three-cell window rewrites.

    A rule ((a, s, b), (x, y, z)) rewrites the window ``a s b`` (state in
    the middle) to ``x y z`` containing exactly one state symbol.  The tape
    starts as the left end marker followed by blanks.
    """

    states: tuple[str, ...]
    initial: str
    halting: str
    tape: tuple[str, ...]
    left_end: str
    blank: str
    rules: tuple[tuple[tuple[str, str, str], tuple[str, str, str]], ...]

    def __post_init__(self) -> None:
        if set(self.states) & set(self.tape):
            raise ValueError("state and tape alphabets must be disjoint")
        for sym, pool, what in (
            (self.initial, self.states, "initial state"),
            (self.halting, self.states, "halting state"),
            (self.left_end, self.tape, "left end marker"),
            (self.blank, self.tape, "blank"),
        ):
            if sym not in pool:
                raise ValueError(f"{what} {sym!r} not declared")
        if MARKER in set(self.states) | set(self.tape):
            raise ValueError(f"symbol {MARKER!r} is reserved")
        for (a, s, b), image in self.rules:
            if s not in self.states or a not in self.tape or b not in self.tape:
                raise ValueError(f"bad rule window ({a},{s},{b})")
            states_in_image = [x for x in image if x in self.states]
            if len(states_in_image) != 1 or any(
                x not in self.states and x not in self.tape for x in image
            ):
                raise ValueError(f"rule image {image} needs exactly one state symbol")


def tm_to_hmsc(spec: TmSpec) -> Hmsc:
    """Loop-connected two-process HMSC that is satisfiable iff the machine
    reaches its halting state from the all-blank initial tape.

    Process p streams configurations to q, q streams back the successor
    (rewriting one window), p copies it around again; acceptance drains a
    configuration containing the halting state.
    """
    procs = ("p", "q")
    symbols = tuple(sorted(set(spec.states) | set(spec.tape)))
    msgs = symbols + (MARKER,)

    def emit_p(m: str) -> CMsc:  # unmatched send p -> q
        return validate(procs, msgs, [Event("e", send("p", "q"), m)])

    def copy_p(m: str) -> CMsc:  # p moves m from the q->p back to the p->q stream
        return validate(
            procs, msgs, [Event("r", recv("p", "q"), m), Event("s", send("p", "q"), m)]
        )

    def drain_p(m: str) -> CMsc:  # p consumes m from the q->p stream
        return validate(procs, msgs, [Event("r", recv("p", "q"), m)])

    def copy_q(m: str) -> CMsc:  # q echoes m from the p->q to the q->p stream
        return validate(
            procs, msgs, [Event("r", recv("q", "p"), m), Event("s", send("q", "p"), m)]
        )

    def rewrite_q(rule) -> CMsc:
        (a, s, b), (x, y, z) = rule
        events = []
        for i, (inp, out) in enumerate(zip((a, s, b), (x, y, z))):
            events.append(Event(f"r{i}", recv("q", "p"), inp))
            events.append(Event(f"s{i}", send("q", "p"), out))
        return validate(procs, msgs, events)

    def sync_marker() -> CMsc:  # q consumes #, handshakes, p emits the next #
        return validate(
            procs,
            msgs,
            [
                Event("r", recv("q", "p"), MARKER),
                Event("h1", send("q", "p")),
                Event("h2", recv("p", "q")),
                Event("s", send("p", "q"), MARKER),
            ],
            [("h1", "h2")],
        )

    def final_marker() -> CMsc:  # q consumes the last #, handshake only
        return validate(
            procs,
            msgs,
            [
                Event("r", recv("q", "p"), MARKER),
                Event("h1", send("q", "p")),
                Event("h2", recv("p", "q")),
            ],
            [("h1", "h2")],
        )

    # States: i0-i4 build the initial configuration; sA/sB surround the
    # window rewrite inside one successor step; c is the copy phase on p;
    # h1-h3 drain the halting configuration.
    transitions = [
        ("i0", emit_p(MARKER), "i1"),
        ("i1", emit_p(spec.left_end), "i2"),
        ("i2", emit_p(spec.initial), "i3"),
        ("i3", emit_p(spec.blank), "i4"),
        ("i4", emit_p(spec.blank), "i4"),
        ("i4", sync_marker(), "sA"),
    ]
    for g in spec.tape:
        transitions.append(("sA", copy_q(g), "sA"))
        transitions.append(("sB", copy_q(g), "sB"))
    for rule in spec.rules:
        transitions.append(("sA", rewrite_q(rule), "sB"))
    # copy phase between successor steps, then the next marker handshake
    for g in sorted(set(spec.states) | set(spec.tape)):
        transitions.append(("sB", copy_p(g), "c"))
        transitions.append(("c", copy_p(g), "c"))
    transitions.append(("c", sync_marker(), "sA"))
    # halting: drain >=1 tape symbols, the halting state, more symbols, then #
    for g in spec.tape:
        transitions.append(("sB", drain_p(g), "h1"))
        transitions.append(("h1", drain_p(g), "h1"))
        transitions.append(("h2", drain_p(g), "h2"))
    transitions.append(("h1", drain_p(spec.halting), "h2"))
    transitions.append(("h2", final_marker(), "h3"))
    states = ("i0", "i1", "i2", "i3", "i4", "sA", "sB", "c", "h1", "h2", "h3")
    return Hmsc(
        states=states,
        initial="i0",
        messages=msgs,
        transitions=tuple(transitions),
        accepting=frozenset({"h3"}),
    )


@dataclass(frozen=True)
class CounterMachine:
    """Two-counter machine: increments, guarded decrements, and zero tests."""

    states: tuple[str, ...]
    initial: str
    finals: frozenset[str]
    transitions: tuple[tuple[str, str, int, str], ...]  # (src, op, counter, dst)

    def __post_init__(self) -> None:
        if self.initial not in self.states or not self.finals <= set(self.states):
            raise ValueError("initial/final states must be declared")
        for src, op, counter, dst in self.transitions:
            if op not in ("inc", "dec", "zero"):
                raise ValueError(f"unknown counter operation {op!r}")
            if counter not in (1, 2):
                raise ValueError(f"counter index {counter} out of range")
            if src not in self.states or dst not in self.states:
                raise ValueError(f"transition {src}->{dst} uses undeclared states")


def cm2_to_hmsc(cm: CounterMachine) -> Hmsc:
    """HMSC over four processes and a single message simulating the machine.

    Channel occupancy of (p_i, p_i') mirrors counter i; a zero test is a
    complete message on that channel, which composes into a run exactly
    when nothing is pending there.
    """
    procs = ("p1", "p1x", "p2", "p2x")
    msgs = ("a",)

    def label(op: str, counter: int) -> CMsc:
        src = f"p{counter}"
        dst = f"p{counter}x"
        if op == "inc":
            return validate(procs, msgs, [Event("e", send(src, dst), "a")])
        if op == "dec":
            return validate(procs, msgs, [Event("e", recv(dst, src), "a")])
        return validate(
            procs,
            msgs,
            [Event("s", send(src, dst)), Event("r", recv(dst, src))],
            [("s", "r")],
        )

    return Hmsc(
        states=cm.states,
        initial=cm.initial,
        messages=msgs,
        transitions=tuple(
            (src, label(op, counter), dst) for src, op, counter, dst in cm.transitions
        ),
        accepting=frozenset(cm.finals),
    )
