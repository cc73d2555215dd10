"""High-level MSCs: graph semantics, class checks, bounded satisfiability,
state elimination, and translation to EMSO sentences.

An HMSC is a finite transition graph labeled with finite cMSCs; a path
denotes the set-valued concatenation of its labels and the language keeps
the complete MSCs of accepting paths.  State elimination rewrites the graph
into regular-expression-like terms whose iterations, under the
loop-connectedness hypothesis, stay within connected languages and can
therefore be translated formula by formula.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from . import closures
from .closures import ClosureContext
from .cmsc import (
    CMsc,
    RECV,
    SEND,
    communication_graph_of_actions,
    connected,
    graph_is_connected,
    is_msc,
)
from .compose import concat_pair, concat_sets
from .logic import FALSE, EmsoFormula, Forall, Lbl, Not, And, conj, disj


@dataclass(frozen=True)
class Hmsc:
    """Transition graph over finite cMSC labels with finite and omega
    acceptance sets (the latter carried symbolically, never evaluated)."""

    states: tuple[str, ...]
    initial: str
    messages: tuple[str, ...]
    transitions: tuple[tuple[str, CMsc, str], ...]
    accepting: frozenset[str]
    omega_accepting: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        declared = set(self.states)
        if self.initial not in declared:
            raise ValueError(f"initial state {self.initial!r} not declared")
        if not self.accepting <= declared or not self.omega_accepting <= declared:
            raise ValueError("acceptance sets must be declared states")
        for src, _label, dst in self.transitions:
            if src not in declared or dst not in declared:
                raise ValueError(f"transition {src!r}->{dst!r} uses undeclared states")

    @cached_property
    def outgoing(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {s: [] for s in self.states}
        for i, (src, _label, _dst) in enumerate(self.transitions):
            out[src].append(i)
        return {s: tuple(v) for s, v in out.items()}

    @cached_property
    def processes(self) -> tuple[str, ...]:
        procs: set[str] = set()
        for _s, label, _d in self.transitions:
            procs.update(label.processes)
        return tuple(sorted(procs))


Path = tuple[int, ...]  # indices into Hmsc.transitions


def path_states(h: Hmsc, path: Path) -> tuple[str, ...]:
    if not path:
        raise ValueError("a path needs at least one transition")
    states = [h.transitions[path[0]][0]]
    for t in path:
        src, _label, dst = h.transitions[t]
        if src != states[-1]:
            raise ValueError(f"transition {t} does not continue the path")
        states.append(dst)
    return tuple(states)


def path_labels(h: Hmsc, path: Path) -> tuple[CMsc, ...]:
    path_states(h, path)
    return tuple(h.transitions[t][1] for t in path)


def cmscs_of_path(h: Hmsc, path: Path) -> frozenset[CMsc]:
    """Set-valued concatenation of the labels along a path."""
    labels = path_labels(h, path)
    acc = frozenset({labels[0]})
    for label in labels[1:]:
        acc = concat_sets(acc, frozenset({label}))
    return acc


def bounded_language(h: Hmsc, max_path_len: int, max_events: int) -> frozenset[CMsc]:
    """Complete MSCs of accepting paths up to the given length and size."""
    out: set[CMsc] = set()
    best: dict[tuple[str, frozenset[CMsc]], int] = {}

    def explore(state: str, live: frozenset[CMsc], depth: int) -> None:
        if depth >= 1 and state in h.accepting:
            out.update(m for m in live if is_msc(m))
        if depth == max_path_len:
            return
        key = (state, live)
        if best.get(key, max_path_len + 1) <= depth:
            return
        best[key] = depth
        for t in h.outgoing[state]:
            _src, label, dst = h.transitions[t]
            if depth == 0:
                nxt = frozenset({label}) if label.n_events <= max_events else frozenset()
            else:
                nxt = frozenset(
                    m
                    for m in concat_sets(live, frozenset({label}))
                    if m.n_events <= max_events
                )
            if nxt:
                explore(dst, nxt, depth + 1)

    explore(h.initial, frozenset(), 0)
    return frozenset(out)


# --------------------------------------------------------------------------
# Queue semantics
# --------------------------------------------------------------------------

Queues = tuple  # sorted tuple of (channel, tuple of messages)


def _queues_get(queues: Queues, channel) -> tuple:
    for c, q in queues:
        if c == channel:
            return q
    return ()


def _queues_set(queues: Queues, channel, content: tuple) -> Queues:
    rest = tuple((c, q) for c, q in queues if c != channel)
    if content:
        rest += ((channel, content),)
    return tuple(sorted(rest))


def apply_label(queues: Queues, label: CMsc) -> Queues | None:
    """Advance per-channel FIFO queues over one path label, or None if the
    label cannot extend any complete MSC.

    Pending receives must consume their channel head with an equal message;
    a label with an internal match on a channel needs that channel empty
    after consumption, since a pending older send could then never be
    matched in FIFO order.
    """
    for channel, (recvs, internal, sends) in sorted(label.channel_profile.items()):
        q = _queues_get(queues, channel)
        for msg in recvs:
            if not q or q[0] != msg:
                return None
            q = q[1:]
        if internal and q:
            return None
        q = q + sends
        queues = _queues_set(queues, channel, q)
    return queues


def queue_size(queues: Queues) -> int:
    return sum(len(q) for _c, q in queues)


@dataclass(frozen=True)
class SatResult:
    verdict: str  # "SAT" | "UNKNOWN"
    witness: Path | None = None

    @property
    def is_sat(self) -> bool:
        return self.verdict == "SAT"


def sat_search(h: Hmsc, max_steps: int, max_queue: int) -> SatResult:
    """Bounded emptiness check by forward FIFO-queue simulation.

    Returns SAT with the least witness in (length, transition ids) order,
    or UNKNOWN at the bound; the problem itself is undecidable, so UNKNOWN
    carries no claim.  A SAT witness is re-validated through the
    composition oracle before it is returned.
    """
    start = (h.initial, ())
    parents: dict[tuple, tuple | None] = {start: None}
    frontier = deque([start])
    depth = {start: 0}
    while frontier:
        node = frontier.popleft()
        state, queues = node
        d = depth[node]
        if d >= 1 and state in h.accepting and not queues:
            path = _reconstruct(parents, node)
            assert path_contains_msc(h, path), "queue semantics disagree with composition"
            return SatResult("SAT", path)
        if d == max_steps:
            continue
        for t in h.outgoing[state]:
            _src, label, dst = h.transitions[t]
            nq = apply_label(queues, label)
            if nq is None or queue_size(nq) > max_queue:
                continue
            nxt = (dst, nq)
            if nxt not in parents:
                parents[nxt] = (node, t)
                depth[nxt] = d + 1
                frontier.append(nxt)
    return SatResult("UNKNOWN", None)


def _reconstruct(parents: dict, node) -> Path:
    path: list[int] = []
    while parents[node] is not None:
        node, t = parents[node]
        path.append(t)
    return tuple(reversed(path))


def path_contains_msc(h: Hmsc, path: Path) -> bool:
    """Does the concatenation set of the path contain a complete MSC?

    Uses the matching-enumeration oracle, discarding intermediates with
    unmatched receives: stacking only ever matches receives of the later
    part, so such elements can never complete.
    """
    live: frozenset[CMsc] | None = None
    for label in path_labels(h, path):
        live = frozenset({label}) if live is None else concat_sets(live, frozenset({label}))
        live = frozenset(
            m
            for m in live
            if not any(
                m.actions[u].kind == RECV for u in m.unmatched
            )
        )
        if not live:
            return False
    return any(is_msc(m) for m in live)


# --------------------------------------------------------------------------
# Class checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    ok: bool
    kind: str  # "PASS" | "VIOLATION" | "SAFE" | "UNSAFE"
    witness: Path | None = None
    detail: str = ""


def loop_connected_bounded(h: Hmsc, max_cycle_len: int) -> Verdict:
    """Check every cycle up to the length bound generates only connected
    cMSCs.  PASS is relative to the bound; VIOLATION is definitive."""

    def explore(start: str, state: str, path: list[int], live: frozenset[CMsc]) -> Verdict | None:
        if path and state == start:
            for m in sorted(live, key=lambda m: m.sort_key):
                if not connected(m):
                    return Verdict(False, "VIOLATION", tuple(path), f"disconnected {m!r}")
        if len(path) == max_cycle_len:
            return None
        for t in h.outgoing[state]:
            _src, label, dst = h.transitions[t]
            nxt = concat_sets(live, frozenset({label})) if path else frozenset({label})
            if not nxt:
                continue
            path.append(t)
            bad = explore(start, dst, path, nxt)
            path.pop()
            if bad:
                return bad
        return None

    for s in h.states:
        bad = explore(s, s, [], frozenset())
        if bad:
            return bad
    return Verdict(True, "PASS")


def weakly_loop_connected_exact(h: Hmsc) -> Verdict:
    """Exact check of weak loop-connectedness.

    A closed walk exists over exactly the strongly connected transition
    subsets, and every cMSC generated by a walk has the communication graph
    of the union of its labels' actions, so it suffices to check those
    unions for connectivity.
    """
    sccs = _sccs(h)
    for comp in sccs:
        edges = [
            i
            for i, (src, _l, dst) in enumerate(h.transitions)
            if src in comp and dst in comp
        ]
        for size in range(1, len(edges) + 1):
            for subset in itertools.combinations(edges, size):
                if not _strongly_connected_subset(h, subset):
                    continue
                actions = set()
                for t in subset:
                    actions.update(h.transitions[t][1].actions)
                nodes, comm_edges = communication_graph_of_actions(actions)
                if not graph_is_connected(nodes, comm_edges):
                    walk = _closed_walk(h, subset)
                    return Verdict(
                        False,
                        "VIOLATION",
                        walk,
                        f"communication graph over {nodes} is disconnected",
                    )
    return Verdict(True, "PASS")


def _sccs(h: Hmsc) -> list[set[str]]:
    index = {s: i for i, s in enumerate(h.states)}
    adj = [[] for _ in h.states]
    for src, _l, dst in h.transitions:
        adj[index[src]].append(index[dst])
    n = len(h.states)
    order: list[int] = []
    seen = [False] * n

    def dfs1(v: int) -> None:
        stack = [(v, iter(adj[v]))]
        seen[v] = True
        while stack:
            u, it = stack[-1]
            for w in it:
                if not seen[w]:
                    seen[w] = True
                    stack.append((w, iter(adj[w])))
                    break
            else:
                order.append(u)
                stack.pop()

    for v in range(n):
        if not seen[v]:
            dfs1(v)
    radj = [[] for _ in range(n)]
    for v in range(n):
        for w in adj[v]:
            radj[w].append(v)
    comp = [-1] * n
    c = 0
    for v in reversed(order):
        if comp[v] != -1:
            continue
        stack = [v]
        comp[v] = c
        while stack:
            u = stack.pop()
            for w in radj[u]:
                if comp[w] == -1:
                    comp[w] = c
                    stack.append(w)
        c += 1
    out: list[set[str]] = [set() for _ in range(c)]
    for s, i in index.items():
        out[comp[i]].add(s)
    return out


def _strongly_connected_subset(h: Hmsc, edges: Sequence[int]) -> bool:
    nodes = set()
    for t in edges:
        src, _l, dst = h.transitions[t]
        nodes.update((src, dst))
    for direction in (False, True):
        adj: dict[str, list[str]] = {v: [] for v in nodes}
        for t in edges:
            src, _l, dst = h.transitions[t]
            if direction:
                src, dst = dst, src
            adj[src].append(dst)
        root = next(iter(sorted(nodes)))
        seen = {root}
        stack = [root]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != nodes:
            return False
    return True


def _closed_walk(h: Hmsc, edges: Sequence[int]) -> Path:
    """A closed walk through every edge of a strongly connected subset."""
    remaining = list(edges)
    src0 = h.transitions[remaining[0]][0]
    walk: list[int] = []
    here = src0
    while remaining:
        t = next(
            (t for t in remaining if h.transitions[t][0] == here),
            None,
        )
        if t is None:
            hop = _shortest_hop(h, edges, here, {h.transitions[t][0] for t in remaining})
            walk.extend(hop)
            here = h.transitions[hop[-1]][2]
            continue
        remaining.remove(t)
        walk.append(t)
        here = h.transitions[t][2]
    if here != src0:
        walk.extend(_shortest_hop(h, edges, here, {src0}))
    return tuple(walk)


def _shortest_hop(h: Hmsc, edges: Sequence[int], start: str, goals: set[str]) -> list[int]:
    frontier = deque([(start, [])])
    seen = {start}
    while frontier:
        state, acc = frontier.popleft()
        for t in edges:
            src, _l, dst = h.transitions[t]
            if src != state or dst in seen:
                continue
            if dst in goals:
                return acc + [t]
            seen.add(dst)
            frontier.append((dst, acc + [t]))
    raise AssertionError("unreachable within a strongly connected subset")


def safe_bounded(h: Hmsc, max_path_len: int) -> Verdict:
    """Search accepting paths whose concatenation set has no complete MSC."""
    if h.omega_accepting:
        raise ValueError("safety is defined for HMSCs without omega acceptance")
    frontier: deque[tuple[str, Path]] = deque([(h.initial, ())])
    while frontier:
        state, path = frontier.popleft()
        if path and state in h.accepting and not path_contains_msc(h, path):
            return Verdict(False, "UNSAFE", path, "accepting path without a complete MSC")
        if len(path) == max_path_len:
            continue
        for t in h.outgoing[state]:
            frontier.append((h.transitions[t][2], path + (t,)))
    return Verdict(True, "SAFE")


# --------------------------------------------------------------------------
# Generalized HMSCs, terms, and state elimination
# --------------------------------------------------------------------------


class LanguageTerm:
    """Regular-expression-like term denoting a language of cMSCs."""

    __slots__ = ()


@dataclass(frozen=True)
class Empty(LanguageTerm):
    __slots__ = ()


@dataclass(frozen=True)
class Atom(LanguageTerm):
    cmsc: CMsc


@dataclass(frozen=True)
class Union(LanguageTerm):
    left: LanguageTerm
    right: LanguageTerm


@dataclass(frozen=True)
class Concat(LanguageTerm):
    left: LanguageTerm
    right: LanguageTerm


@dataclass(frozen=True)
class Plus(LanguageTerm):
    sub: LanguageTerm


@dataclass(frozen=True)
class Omega(LanguageTerm):
    sub: LanguageTerm


EMPTY = Empty()


def union_term(a: LanguageTerm, b: LanguageTerm) -> LanguageTerm:
    if isinstance(a, Empty):
        return b
    if isinstance(b, Empty):
        return a
    return Union(a, b)


def concat_term(a: LanguageTerm, b: LanguageTerm) -> LanguageTerm:
    if isinstance(a, Empty) or isinstance(b, Empty):
        return EMPTY
    return Concat(a, b)


def plus_term(a: LanguageTerm) -> LanguageTerm:
    return EMPTY if isinstance(a, Empty) else Plus(a)


def omega_term(a: LanguageTerm) -> LanguageTerm:
    return EMPTY if isinstance(a, Empty) else Omega(a)


@dataclass(frozen=True)
class GeneralizedHmsc:
    """HMSC whose transitions carry language terms; the initial state has no
    incoming transition and acceptance is a singleton (one machine per
    accepting state of the source HMSC)."""

    states: tuple[str, ...]
    initial: str
    messages: tuple[str, ...]
    trans: tuple[tuple[str, str, LanguageTerm], ...]
    accepting: frozenset[str]
    omega_accepting: frozenset[str] = frozenset()

    def term(self, src: str, dst: str) -> LanguageTerm:
        for s, d, t in self.trans:
            if s == src and d == dst:
                return t
        return EMPTY


def to_generalized(h: Hmsc) -> tuple[GeneralizedHmsc, ...]:
    """One generalized machine per accepting state, languages jointly equal.

    Each machine gets a fresh initial state without incoming transitions
    and keeps exactly one accepting state of the original HMSC.
    """
    fresh = "_i"
    while fresh in h.states:
        fresh += "_"
    terms: dict[tuple[str, str], LanguageTerm] = {}
    for src, label, dst in h.transitions:
        key = (src, dst)
        terms[key] = union_term(terms.get(key, EMPTY), Atom(label))
    for (src, dst), t in sorted(terms.items()):
        if src == h.initial:
            terms[(fresh, dst)] = union_term(terms.get((fresh, dst), EMPTY), t)

    machines = []
    for mode, acc_states in (("fin", sorted(h.accepting)), ("omega", sorted(h.omega_accepting))):
        for s in acc_states:
            machines.append(
                GeneralizedHmsc(
                    states=(fresh,) + tuple(h.states),
                    initial=fresh,
                    messages=h.messages,
                    trans=tuple((a, b, t) for (a, b), t in sorted(terms.items())),
                    accepting=frozenset({s}) if mode == "fin" else frozenset(),
                    omega_accepting=frozenset({s}) if mode == "omega" else frozenset(),
                )
            )
    return tuple(machines)


def eliminate_state(g: GeneralizedHmsc, s: str) -> GeneralizedHmsc:
    """Remove a non-initial, non-accepting state, rerouting its traffic
    through union/concat/plus terms; the denoted language is unchanged."""
    if s == g.initial or s in g.accepting or s in g.omega_accepting:
        raise ValueError(f"cannot eliminate initial or accepting state {s!r}")
    if s not in g.states:
        raise ValueError(f"unknown state {s!r}")
    keep = tuple(x for x in g.states if x != s)
    loop = g.term(s, s)
    new_trans = []
    for s1 in keep:
        into = g.term(s1, s)
        for s2 in keep:
            out = g.term(s, s2)
            term = union_term(
                g.term(s1, s2),
                union_term(
                    concat_term(into, out),
                    concat_term(into, concat_term(plus_term(loop), out)),
                ),
            )
            if not isinstance(term, Empty):
                new_trans.append((s1, s2, term))
    return GeneralizedHmsc(
        states=keep,
        initial=g.initial,
        messages=g.messages,
        trans=tuple(new_trans),
        accepting=g.accepting,
        omega_accepting=g.omega_accepting,
    )


def term_language_bounded(
    t: LanguageTerm, max_events: int | None, max_unroll: int
) -> frozenset[CMsc]:
    """Finite-semantics language of a term: Plus unrolled to a depth, Omega
    contributing nothing, results capped by event count."""

    def cap(s: Iterable[CMsc]) -> frozenset[CMsc]:
        if max_events is None:
            return frozenset(s)
        return frozenset(m for m in s if m.n_events <= max_events)

    if isinstance(t, Empty) or isinstance(t, Omega):
        return frozenset()
    if isinstance(t, Atom):
        return cap({t.cmsc})
    if isinstance(t, Union):
        return term_language_bounded(t.left, max_events, max_unroll) | term_language_bounded(
            t.right, max_events, max_unroll
        )
    if isinstance(t, Concat):
        return cap(
            concat_sets(
                term_language_bounded(t.left, max_events, max_unroll),
                term_language_bounded(t.right, max_events, max_unroll),
            )
        )
    if isinstance(t, Plus):
        base = term_language_bounded(t.sub, max_events, max_unroll)
        acc = set(base)
        cur = base
        for _ in range(max_unroll - 1):
            cur = cap(concat_sets(cur, base))
            if not cur - acc:
                break
            acc |= cur
        return frozenset(acc)
    raise TypeError(f"not a language term: {t!r}")


def generalized_bounded_language(
    g: GeneralizedHmsc, max_path_len: int, max_events: int, max_unroll: int
) -> frozenset[CMsc]:
    """Complete MSCs of accepting paths of a generalized HMSC, with Plus
    subterms unrolled boundedly (oracle for elimination soundness)."""
    out: set[CMsc] = set()

    def explore(state: str, live: frozenset[CMsc], depth: int) -> None:
        if depth >= 1 and state in g.accepting:
            out.update(m for m in live if is_msc(m))
        if depth == max_path_len:
            return
        for (s1, s2, term) in g.trans:
            if s1 != state:
                continue
            lang = term_language_bounded(term, max_events, max_unroll)
            if not lang:
                continue
            if depth == 0:
                nxt = lang
            else:
                nxt = frozenset(
                    m for m in concat_sets(live, lang) if m.n_events <= max_events
                )
            if nxt:
                explore(s2, nxt, depth + 1)

    explore(g.initial, frozenset(), 0)
    return frozenset(out)


def simplify_term(t: LanguageTerm, _passes: int = 40) -> LanguageTerm:
    """Language-preserving normalization of a term.

    Rules: unit laws for Empty, idempotent union, factoring concatenation
    out of unions, and collapsing ``b + b.b^+`` (either association) into
    ``b^+``.  State elimination produces heavily redundant terms; without
    this pass the translated formulas grow far beyond what bounded model
    checks can handle.
    """
    for _ in range(_passes):
        new = _simplify_once(t)
        if new == t:
            return new
        t = new
    return t


def _simplify_once(t: LanguageTerm) -> LanguageTerm:
    if isinstance(t, (Empty, Atom)):
        return t
    if isinstance(t, Plus):
        return plus_term(_simplify_once(t.sub))
    if isinstance(t, Omega):
        return omega_term(_simplify_once(t.sub))
    if isinstance(t, Concat):
        return concat_term(_simplify_once(t.left), _simplify_once(t.right))
    left = _simplify_once(t.left)
    right = _simplify_once(t.right)
    if left == right:
        return left
    if isinstance(left, Empty):
        return right
    if isinstance(right, Empty):
        return left
    for a, b in ((left, right), (right, left)):
        # b + b.b+  ==  b+  ==  b + b+.b
        if isinstance(b, Concat):
            if b.left == a and b.right == Plus(a):
                return Plus(a)
            if b.right == a and b.left == Plus(a):
                return Plus(a)
        # a+ + a.a+ == a+ + a+.a == a+ and a + a+ == a+
        if b == Plus(a):
            return b
        if isinstance(a, Plus) and isinstance(b, Concat):
            if (b.left == a.sub and b.right == a) or (b.right == a.sub and b.left == a):
                return a
    if isinstance(left, Concat) and isinstance(right, Concat):
        if left.left == right.left:
            return concat_term(left.left, _simplify_once(Union(left.right, right.right)))
        if left.right == right.right:
            return concat_term(_simplify_once(Union(left.left, right.left)), left.right)
    return Union(left, right)


class DisconnectedIteration(ValueError):
    """A Plus/Omega subterm iterates a language with a disconnected cMSC."""


def term_to_formula(
    t: LanguageTerm, ctx: ClosureContext, _memo: dict | None = None
) -> EmsoFormula:
    """Structural translation of a term into an EMSO sentence.

    Before translating an iteration, the operand language (every Plus in it
    unrolled once) is checked to contain only connected cMSCs; call sites
    ensure this globally via loop-connectedness.  Repeated subterms reuse
    one formula (and its set variables): the construction only constrains a
    variable within the region its occurrence describes, so sharing is
    harmless, exactly as for the shared padded prefixes.
    """
    memo = _memo if _memo is not None else {}
    got = memo.get(t)
    if got is not None:
        return got
    if isinstance(t, Empty):
        out = EmsoFormula((), FALSE)
    elif isinstance(t, Atom):
        out = closures.formula_for_cmsc(t.cmsc)
    elif isinstance(t, (Union, Concat)):
        f1 = term_to_formula(t.left, ctx, memo)
        f2 = term_to_formula(t.right, ctx, memo)
        f1, f2 = closures.pad_prefixes(f1, f2)
        if isinstance(t, Union):
            out = closures.union_formula(f1, f2)
        else:
            out = closures.concat_formula(f1, f2, ctx)
    elif isinstance(t, (Plus, Omega)):
        for m in term_language_bounded(t.sub, None, 1):
            if not connected(m):
                raise DisconnectedIteration(
                    f"iterated language contains a disconnected cMSC {m!r} in {t!r}"
                )
        forms = closures.iterate_formula(term_to_formula(t.sub, ctx, memo), ctx)
        out = forms.plus if isinstance(t, Plus) else forms.omega
    else:
        raise TypeError(f"not a language term: {t!r}")
    memo[t] = out
    return out


def final_term(g: GeneralizedHmsc) -> LanguageTerm:
    """Eliminate every intermediate state and read off the two-state term."""
    acc = next(iter(g.accepting | g.omega_accepting))
    work = g
    for s in sorted(set(g.states) - {g.initial, acc}):
        work = eliminate_state(work, s)
    head = work.term(work.initial, acc)
    loop = work.term(acc, acc)
    if g.accepting:
        return union_term(head, concat_term(head, plus_term(loop)))
    return concat_term(head, omega_term(loop))


def hmsc_to_emso(
    h: Hmsc,
    ctx: ClosureContext | None = None,
    guard_cycle_bound: int = 3,
) -> EmsoFormula:
    """Translate a loop-connected HMSC into an EMSO sentence for its language.

    Loop-connectedness is the caller's obligation; a bounded cycle check
    guards against blatant violations.  The result is the union over the
    per-accepting-state machines, restricted to complete MSCs.
    """
    if guard_cycle_bound:
        verdict = loop_connected_bounded(h, guard_cycle_bound)
        if not verdict.ok:
            raise DisconnectedIteration(
                f"HMSC is not loop-connected: cycle {verdict.witness} ({verdict.detail})"
            )
    if ctx is None:
        ctx = ClosureContext(h.processes or ("p",), h.messages)
    formula: EmsoFormula | None = None
    memo: dict = {}
    for g in to_generalized(h):
        f = term_to_formula(simplify_term(final_term(g)), ctx, memo)
        if formula is None:
            formula = f
        else:
            formula = closures.union_formula(*closures.pad_prefixes(formula, f))
    if formula is None:
        formula = EmsoFormula((), FALSE)
    x = ctx.fresh("m")
    complete = Forall(x, Not(disj([Lbl(x, m) for m in ctx.messages])))
    return EmsoFormula(formula.prefix, And((formula.body, complete)))
