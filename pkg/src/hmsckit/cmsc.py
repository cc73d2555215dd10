"""Compositional message sequence charts: data model, validator, analyses.

A cMSC is a set of send/receive events on per-process timelines.  Events on
one process are totally ordered, matched send/receive pairs obey a FIFO
policy per channel, and unmatched events carry a synchronization message
used when fragments are stacked later.  Validated values are immutable and
canonically indexed, so structural equality coincides with isomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

SEND = "send"
RECV = "recv"


class InvalidCMsc(ValueError):
    """A candidate structure violates one of the cMSC well-formedness rules.

    ``condition`` identifies the violated rule; ``events`` names offenders.
    """

    def __init__(self, condition: str, message: str, events: tuple[str, ...] = ()):
        super().__init__(f"[{condition}] {message}")
        self.condition = condition
        self.events = events


class CapExceeded(RuntimeError):
    """An enumeration produced more results than the caller's cap allows."""


@dataclass(frozen=True)
class Action:
    """A send or receive action type: ``p!q`` or ``p?q``.

    ``sender``/``receiver`` name the channel endpoints, so ``p?q`` (p receives
    from q) has sender ``q`` and receiver ``p``.  Self-loops are excluded.
    """

    kind: str
    sender: str
    receiver: str

    def __post_init__(self) -> None:
        if self.kind not in (SEND, RECV):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.sender == self.receiver:
            raise ValueError(f"channel endpoints must differ: {self.sender!r}")

    @property
    def proc(self) -> str:
        """The process executing this action."""
        return self.sender if self.kind == SEND else self.receiver

    @property
    def channel(self) -> tuple[str, str]:
        return (self.sender, self.receiver)

    @property
    def is_send(self) -> bool:
        return self.kind == SEND

    def __str__(self) -> str:
        if self.kind == SEND:
            return f"{self.sender}!{self.receiver}"
        return f"{self.receiver}?{self.sender}"

    @staticmethod
    def parse(text: str) -> "Action":
        if "!" in text:
            lhs, _, rhs = text.partition("!")
            return send(lhs, rhs)
        if "?" in text:
            lhs, _, rhs = text.partition("?")
            return recv(lhs, rhs)
        raise ValueError(f"cannot parse action {text!r}")


def send(p: str, q: str) -> Action:
    """Action ``p!q``: process p sends to q."""
    return Action(SEND, p, q)


def recv(p: str, q: str) -> Action:
    """Action ``p?q``: process p receives from q."""
    return Action(RECV, q, p)


@dataclass(frozen=True)
class Event:
    """A raw event: identifier, action, and message label if unmatched."""

    eid: str
    action: Action
    message: str | None = None


@dataclass(frozen=True, eq=False)
class CMsc:
    """A validated finite cMSC in canonical form.

    Events are indexed process-major (processes sorted by name, then chain
    order), so two cMSCs are isomorphic exactly when their ``key()`` values
    are equal.  ``eids`` preserves user-facing identifiers as metadata only.
    Instances are immutable; construct them through :func:`validate`.
    """

    processes: tuple[str, ...]
    messages: tuple[str, ...]
    actions: tuple[Action, ...]
    msgs: tuple[str | None, ...]
    matches: tuple[tuple[int, int], ...]
    eids: tuple[str, ...] = field(repr=False)

    def key(self):
        """Canonical encoding; equal keys iff isomorphic cMSCs."""
        return (self.actions, self.msgs, self.matches)

    @cached_property
    def sort_key(self) -> tuple:
        """Deterministic, totally ordered stand-in for the canonical key."""
        return (
            self.n_events,
            tuple((str(a), m or "") for a, m in zip(self.actions, self.msgs)),
            self.matches,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, CMsc) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    # -- basic views ---------------------------------------------------

    @property
    def n_events(self) -> int:
        return len(self.actions)

    @cached_property
    def proc_of(self) -> tuple[str, ...]:
        return tuple(a.proc for a in self.actions)

    @cached_property
    def chains(self) -> dict[str, tuple[int, ...]]:
        """Event indices per process, in chain order."""
        out: dict[str, list[int]] = {}
        for i, a in enumerate(self.actions):
            out.setdefault(a.proc, []).append(i)
        return {p: tuple(ix) for p, ix in out.items()}

    @cached_property
    def pos_of(self) -> tuple[int, ...]:
        """Position of each event within its process chain."""
        pos = [0] * self.n_events
        for chain in self.chains.values():
            for k, i in enumerate(chain):
                pos[i] = k
        return tuple(pos)

    @cached_property
    def active_processes(self) -> tuple[str, ...]:
        return tuple(sorted(self.chains))

    @cached_property
    def match_of(self) -> dict[int, int]:
        """Partner lookup in both directions."""
        out: dict[int, int] = {}
        for s, r in self.matches:
            out[s] = r
            out[r] = s
        return out

    @cached_property
    def unmatched(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_events) if i not in self.match_of)

    def index_of(self, eid: str) -> int:
        return self.eids.index(eid)

    # -- derived order -------------------------------------------------

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        """Direct edges of the event graph: process successor and match."""
        succ: list[list[int]] = [[] for _ in range(self.n_events)]
        for chain in self.chains.values():
            for a, b in zip(chain, chain[1:]):
                succ[a].append(b)
        for s, r in self.matches:
            succ[s].append(r)
        return tuple(tuple(v) for v in succ)

    @cached_property
    def le_masks(self) -> tuple[int, ...]:
        """Bitmask per event i of all j with i <= j (reflexive closure)."""
        order = _topo_order(self.n_events, self.successors)
        if order is None:
            raise InvalidCMsc("cyclic", "event graph is cyclic")
        masks = [0] * self.n_events
        for i in reversed(order):
            m = 1 << i
            for j in self.successors[i]:
                m |= masks[j]
            masks[i] = m
        return tuple(masks)

    def le(self, i: int, j: int) -> bool:
        """The derived partial order <=."""
        return bool(self.le_masks[i] >> j & 1)

    def le_proc(self, i: int, j: int) -> bool:
        """<= restricted to events on the same process."""
        return self.proc_of[i] == self.proc_of[j] and self.pos_of[i] <= self.pos_of[j]

    def next_of(self, i: int, j: int) -> bool:
        """Direct process-successor relation."""
        return self.proc_of[i] == self.proc_of[j] and self.pos_of[j] == self.pos_of[i] + 1

    # -- channel views (used by composition and queue semantics) --------

    def channel_events(self, channel: tuple[str, str], kind: str) -> tuple[int, ...]:
        """Events of the given kind on a channel, in chain order."""
        p = channel[0] if kind == SEND else channel[1]
        return tuple(
            i
            for i in self.chains.get(p, ())
            if self.actions[i].kind == kind and self.actions[i].channel == channel
        )

    @cached_property
    def channels(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted({a.channel for a in self.actions}))

    @cached_property
    def channel_profile(self) -> dict[tuple[str, str], tuple[tuple[str, ...], bool, tuple[str, ...]]]:
        """Per channel: unmatched receive labels, has-internal-match, unmatched send labels."""
        out = {}
        for c in self.channels:
            recvs = tuple(
                self.msgs[i] for i in self.channel_events(c, RECV) if i not in self.match_of
            )
            sends = tuple(
                self.msgs[i] for i in self.channel_events(c, SEND) if i not in self.match_of
            )
            internal = any(s in self.match_of for s in self.channel_events(c, SEND))
            out[c] = (recvs, internal, sends)
        return out

    def __repr__(self) -> str:
        parts = []
        for p in self.active_processes:
            evs = " ".join(
                str(self.actions[i]) + (f"({self.msgs[i]})" if self.msgs[i] else "")
                for i in self.chains[p]
            )
            parts.append(f"{p}: {evs}")
        m = ",".join(f"{s}<{r}" for s, r in self.matches)
        return f"<CMsc {'; '.join(parts)}{' | ' + m if m else ''}>"


def _topo_order(n: int, succ: Sequence[Sequence[int]]) -> list[int] | None:
    indeg = [0] * n
    for i in range(n):
        for j in succ[i]:
            indeg[j] += 1
    stack = [i for i in range(n) if indeg[i] == 0]
    order = []
    while stack:
        i = stack.pop()
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                stack.append(j)
    return order if len(order) == n else None


def validate(
    processes: Iterable[str],
    messages: Iterable[str],
    events: Sequence[Event],
    matches: Iterable[tuple[str, str]] = (),
) -> CMsc:
    """Check a raw cMSC structure and return its canonical immutable form.

    ``events`` are given in document order; their order within each process
    defines that process's chain.  Raises :class:`InvalidCMsc` with the
    violated condition and the offending event names.
    """
    procs = tuple(sorted(set(processes)))
    msgset = tuple(sorted(set(messages)))
    if not events:
        raise InvalidCMsc("empty", "a cMSC needs at least one event")

    seen: dict[str, Event] = {}
    for ev in events:
        if ev.eid in seen:
            raise InvalidCMsc("event-id", f"duplicate event id {ev.eid!r}", (ev.eid,))
        seen[ev.eid] = ev
        for endpoint in (ev.action.sender, ev.action.receiver):
            if endpoint not in procs:
                raise InvalidCMsc(
                    "process",
                    f"event {ev.eid!r} uses undeclared process {endpoint!r}",
                    (ev.eid,),
                )
        if ev.message is not None and ev.message not in msgset:
            raise InvalidCMsc(
                "message",
                f"event {ev.eid!r} carries undeclared message {ev.message!r}",
                (ev.eid,),
            )

    # Canonical indexing: processes sorted, chains in document order.
    by_proc: dict[str, list[Event]] = {p: [] for p in procs}
    for ev in events:
        by_proc[ev.action.proc].append(ev)
    ordered: list[Event] = []
    for p in procs:
        ordered.extend(by_proc[p])
    index = {ev.eid: i for i, ev in enumerate(ordered)}

    match_pairs: list[tuple[int, int]] = []
    matched: dict[int, str] = {}
    for se, re_ in matches:
        for eid in (se, re_):
            if eid not in index:
                raise InvalidCMsc("event-id", f"match names unknown event {eid!r}", (eid,))
        s, r = index[se], index[re_]
        sa, ra = ordered[s].action, ordered[r].action
        # Def. 1 condition (i): a match joins p!q to q?p on one channel.
        if not (sa.kind == SEND and ra.kind == RECV and sa.channel == ra.channel):
            raise InvalidCMsc(
                "match-actions",
                f"match ({se!r},{re_!r}) must join a send p!q to a receive q?p "
                f"on the same channel, got {sa} and {ra}",
                (se, re_),
            )
        for e in (s, r):
            if e in matched:
                raise InvalidCMsc(
                    "fifo",
                    f"event {ordered[e].eid!r} occurs in two matches",
                    (ordered[e].eid,),
                )
            matched[e] = ordered[e].eid
        match_pairs.append((s, r))

    cm = CMsc(
        processes=procs,
        messages=msgset,
        actions=tuple(ev.action for ev in ordered),
        msgs=tuple(ev.message for ev in ordered),
        matches=tuple(sorted(match_pairs)),
        eids=tuple(ev.eid for ev in ordered),
    )

    # Def. 1 condition (ii): on each channel the k-th matched send pairs
    # with the k-th matched receive.
    for channel in cm.channels:
        pairs = [(s, r) for s, r in cm.matches if cm.actions[s].channel == channel]
        pairs.sort(key=lambda sr: cm.pos_of[sr[0]])
        recv_positions = [cm.pos_of[r] for _, r in pairs]
        if any(b <= a for a, b in zip(recv_positions, recv_positions[1:])):
            bad = tuple(cm.eids[r] for _, r in pairs)
            raise InvalidCMsc(
                "fifo",
                f"matched pairs on channel {channel} violate the FIFO policy",
                bad,
            )

    # <= must be a partial order, i.e. the event graph is acyclic.
    if _topo_order(cm.n_events, cm.successors) is None:
        raise InvalidCMsc("cyclic", "process successor and match edges form a cycle")
    cm.le_masks  # materialize the closure

    # dom(mu) must be exactly the unmatched events.
    for i in range(cm.n_events):
        if i in cm.match_of and cm.msgs[i] is not None:
            raise InvalidCMsc(
                "mu-domain",
                f"matched event {cm.eids[i]!r} carries a message label",
                (cm.eids[i],),
            )
        if i not in cm.match_of and cm.msgs[i] is None:
            raise InvalidCMsc(
                "mu-domain",
                f"unmatched event {cm.eids[i]!r} lacks a message label (dom(mu) != unm)",
                (cm.eids[i],),
            )

    # Tail condition: matched sends precede unmatched sends with the same
    # action, and unmatched receives precede matched receives.
    for i in cm.unmatched:
        act = cm.actions[i]
        for s, r in cm.matches:
            other = s if act.is_send else r
            if cm.actions[other] != act:
                continue
            before, after = (other, i) if act.is_send else (i, other)
            if not cm.pos_of[before] < cm.pos_of[after]:
                raise InvalidCMsc(
                    "tail",
                    f"unmatched event {cm.eids[i]!r} can never be matched: it is "
                    f"on the wrong side of matched event {cm.eids[other]!r}",
                    (cm.eids[i], cm.eids[other]),
                )
    return cm


def make_cmsc(
    processes: str | Iterable[str],
    messages: str | Iterable[str],
    events: Sequence[tuple],
    matches: Iterable[tuple[str, str]] = (),
) -> CMsc:
    """Terse builder: events as ``(eid, "p!q")`` or ``(eid, "p?q", msg)``."""
    if isinstance(processes, str):
        processes = processes.split()
    if isinstance(messages, str):
        messages = messages.split()
    evs = [
        Event(e[0], Action.parse(e[1]), e[2] if len(e) > 2 else None) for e in events
    ]
    return validate(processes, messages, evs, matches)


def is_msc(m: CMsc) -> bool:
    """True iff the cMSC is complete: no unmatched events."""
    return not m.unmatched


def connected(m: CMsc) -> bool:
    """Event-graph connectivity: events with undirected successor/match edges."""
    n = m.n_events
    adj: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in m.successors[i]:
            adj[i].append(j)
            adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


def communication_graph(m: CMsc) -> tuple[tuple[str, ...], frozenset[frozenset[str]]]:
    """Nodes are active processes; p--q present iff both a send p!q and a
    receive q?p occur (matched or not), in either direction."""
    return communication_graph_of_actions(set(m.actions))


def communication_graph_of_actions(
    actions: Iterable[Action],
) -> tuple[tuple[str, ...], frozenset[frozenset[str]]]:
    acts = set(actions)
    nodes = tuple(sorted({a.proc for a in acts}))
    edges = set()
    for a in acts:
        if a.is_send and Action(RECV, a.sender, a.receiver) in acts:
            edges.add(frozenset((a.sender, a.receiver)))
    return nodes, frozenset(edges)


def graph_is_connected(nodes: Sequence[str], edges: Iterable[frozenset[str]]) -> bool:
    if len(nodes) <= 1:
        return True
    adj: dict[str, set[str]] = {v: set() for v in nodes}
    for e in edges:
        a, b = sorted(e)
        adj[a].add(b)
        adj[b].add(a)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def weakly_connected(m: CMsc) -> bool:
    """Connectivity of the communication graph over active processes."""
    nodes, edges = communication_graph(m)
    return graph_is_connected(nodes, edges)


def canonicalize(m: CMsc):
    """Total encoding; two cMSCs are isomorphic iff their encodings are equal."""
    return m.key()


def from_canonical(key, processes: Iterable[str] = (), messages: Iterable[str] = ()) -> CMsc:
    """Rebuild and re-validate a cMSC from its canonical encoding."""
    actions, msgs, matches = key
    procs = set(processes)
    for a in actions:
        procs.update((a.sender, a.receiver))
    msgset = set(messages) | {x for x in msgs if x is not None}
    events = [Event(f"e{i}", a, msgs[i]) for i, a in enumerate(actions)]
    return validate(procs, msgset, events, [(f"e{s}", f"e{r}") for s, r in matches])


def linearizations(m: CMsc, cap: int = 10000) -> list[tuple[str, ...]]:
    """All total orders extending <=, as event-id sequences.

    Raises :class:`CapExceeded` when more than ``cap`` linearizations exist;
    exhausting the enumeration within the cap is the normal return.
    """
    n = m.n_events
    preds: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j in m.successors[i]:
            preds[j].add(i)
    out: list[tuple[str, ...]] = []
    acc: list[int] = []
    placed = [False] * n

    def rec() -> None:
        if len(acc) == n:
            if len(out) >= cap:
                raise CapExceeded(f"more than {cap} linearizations")
            out.append(tuple(m.eids[i] for i in acc))
            return
        for i in range(n):
            if not placed[i] and all(placed[j] for j in preds[i]):
                placed[i] = True
                acc.append(i)
                rec()
                acc.pop()
                placed[i] = False

    rec()
    return out


def stack(m1: CMsc, m2: CMsc, new_matches: Iterable[tuple[int, int]]) -> CMsc:
    """Stack m2 below m1 with the given cross matches and validate the result.

    ``new_matches`` pairs index into m1 and m2 respectively.  Raises
    :class:`InvalidCMsc` when the stacking violates the cMSC conditions.
    """
    procs = sorted(set(m1.processes) | set(m2.processes))
    msgs = sorted(set(m1.messages) | set(m2.messages))
    cross = list(new_matches)
    crossed1 = {s for s, _ in cross}
    crossed2 = {r for _, r in cross}

    events: list[Event] = []
    for part, m, crossed in ((1, m1, crossed1), (2, m2, crossed2)):
        for p in m.active_processes:
            for i in m.chains[p]:
                label = None if i in crossed else m.msgs[i]
                events.append(Event(f"{part}.{m.eids[i]}", m.actions[i], label))
    pairs = [(f"1.{m1.eids[s]}", f"1.{m1.eids[r]}") for s, r in m1.matches]
    pairs += [(f"2.{m2.eids[s]}", f"2.{m2.eids[r]}") for s, r in m2.matches]
    pairs += [(f"1.{m1.eids[s]}", f"2.{m2.eids[r]}") for s, r in cross]
    return validate(procs, msgs, events, pairs)


def all_cross_candidates(m1: CMsc, m2: CMsc) -> list[tuple[int, int]]:
    """All (send of m1, receive of m2) pairs matchable by concatenation."""
    out = []
    for c in sorted(set(m1.channels) | set(m2.channels)):
        sends = [i for i in m1.channel_events(c, SEND) if i not in m1.match_of]
        recvs = [j for j in m2.channel_events(c, RECV) if j not in m2.match_of]
        for i, j in itertools.product(sends, recvs):
            if m1.msgs[i] == m2.msgs[j]:
                out.append((i, j))
    return out
