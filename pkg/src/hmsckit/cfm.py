"""Communicating finite-state machines over unbounded FIFO channels.

One automaton per process, transitions labeled with an action of that
process and a message.  A finite run is accepting when the global state
tuple is accepting and every channel is empty, so the accepted behaviors
are exactly complete MSCs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from .cmsc import Action, CMsc, Event, InvalidCMsc, is_msc, validate
from .logic import CostCapExceeded


@dataclass(frozen=True)
class ProcessMachine:
    """Finite-state machine of one process.

    Transitions are (state, action, message, state); the action string must
    be executed by ``process``.
    """

    process: str
    states: tuple[str, ...]
    initial: str
    transitions: tuple[tuple[str, str, str, str], ...]

    def __post_init__(self) -> None:
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial!r} not declared")
        for src, action, _msg, dst in self.transitions:
            act = Action.parse(action)
            if act.proc != self.process:
                raise ValueError(
                    f"transition action {action} does not belong to process {self.process!r}"
                )
            if src not in self.states or dst not in self.states:
                raise ValueError(f"transition {src}->{dst} uses undeclared states")

    @cached_property
    def steps(self) -> dict[str, list[tuple[Action, str, str]]]:
        """state -> [(action, message, next state)] in declaration order."""
        out: dict[str, list[tuple[Action, str, str]]] = {s: [] for s in self.states}
        for src, action, msg, dst in self.transitions:
            out[src].append((Action.parse(action), msg, dst))
        return out


@dataclass(frozen=True)
class Cfm:
    """A machine per process plus global acceptance.

    ``accepting`` lists global state tuples in machine declaration order.
    ``omega_accepting`` is carried for round-trips but never evaluated.
    """

    machines: tuple[ProcessMachine, ...]
    messages: tuple[str, ...]
    accepting: tuple[tuple[str, ...], ...]
    omega_accepting: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self) -> None:
        for tup in self.accepting + self.omega_accepting:
            if len(tup) != len(self.machines):
                raise ValueError(f"acceptance tuple {tup} has wrong arity")
        for machine in self.machines:
            for _src, _a, msg, _dst in machine.transitions:
                if msg not in self.messages:
                    raise ValueError(f"transition uses undeclared message {msg!r}")

    @property
    def processes(self) -> tuple[str, ...]:
        return tuple(m.process for m in self.machines)

    def machine(self, proc: str) -> ProcessMachine:
        for m in self.machines:
            if m.process == proc:
                return m
        raise KeyError(proc)


def accepts_msc(a: Cfm, m: CMsc, cap: int = 1_000_000) -> bool:
    """Does some run of the CFM produce exactly this complete MSC?

    Searches transition assignments along one linearization with memoized
    failure states; acceptance is independent of the linearization choice
    because runs are constrained per process and per matched pair only.
    """
    if not is_msc(m):
        raise ValueError("accepts_msc expects a complete MSC")
    order = _one_linearization(m)
    machines = {p: a.machine(p) for p in a.processes}
    for p in m.active_processes:
        if p not in machines:
            return False
    accepting = {tuple(t) for t in a.accepting}
    idx = {p: i for i, p in enumerate(a.processes)}

    nodes = 0
    failed: set = set()

    def rec(k: int, states: tuple[str, ...], queues: tuple) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > cap:
            raise CostCapExceeded(f"CFM search exceeded {cap} nodes")
        if k == len(order):
            return states in accepting and all(not q for _, q in queues)
        key = (k, states, queues)
        if key in failed:
            return False
        e = order[k]
        act = m.actions[e]
        proc = act.proc
        machine = machines[proc]
        qd = dict(queues)
        for action, msg, dst in machine.steps[states[idx[proc]]]:
            if action != act:
                continue
            if act.is_send:
                q = qd.get(act.channel, ())
                new_queues = _set_q(queues, act.channel, q + (msg,))
            else:
                q = qd.get(act.channel, ())
                if not q or q[0] != msg:
                    continue
                new_queues = _set_q(queues, act.channel, q[1:])
            new_states = states[: idx[proc]] + (dst,) + states[idx[proc] + 1 :]
            if rec(k + 1, new_states, new_queues):
                return True
        failed.add(key)
        return False

    start = tuple(machines[p].initial for p in a.processes)
    return rec(0, start, ())


def _set_q(queues: tuple, channel, content: tuple) -> tuple:
    rest = tuple((c, q) for c, q in queues if c != channel)
    if content:
        rest += ((channel, content),)
    return tuple(sorted(rest))


def _one_linearization(m: CMsc) -> list[int]:
    preds: list[set[int]] = [set() for _ in range(m.n_events)]
    for i in range(m.n_events):
        for j in m.successors[i]:
            preds[j].add(i)
    placed: list[int] = []
    done = [False] * m.n_events
    while len(placed) < m.n_events:
        for i in range(m.n_events):
            if not done[i] and all(done[j] for j in preds[i]):
                done[i] = True
                placed.append(i)
                break
    return placed


def bounded_language_cfm(a: Cfm, max_events: int) -> frozenset[CMsc]:
    """All complete MSCs of at most ``max_events`` events accepted by the CFM.

    Exhaustive run enumeration with channel occupancy bounded by
    ``max_events``; interleavings collapsing to the same partial MSC are
    explored once.
    """
    idx = {p: i for i, p in enumerate(a.processes)}
    accepting = {tuple(t) for t in a.accepting}
    start = (
        tuple(m.initial for m in a.machines),
        (),  # queues: sorted tuple of (channel, tuple of (send id, msg))
        tuple(() for _ in a.processes),  # chains: per process tuple of (eid, action)
        (),  # matches
    )
    seen = {start}
    stack = [start]
    out: set[CMsc] = set()
    while stack:
        states, queues, chains, matches = stack.pop()
        total = sum(len(c) for c in chains)
        if total and states in accepting and not queues:
            events = [
                Event(eid, act, None)
                for chain in chains
                for eid, act in chain
            ]
            out.add(validate(a.processes, a.messages, events, matches))
        if total >= max_events:
            continue
        for machine in a.machines:
            i = idx[machine.process]
            for action, msg, dst in machine.steps[states[i]]:
                qd = dict(queues)
                eid = f"{machine.process}{len(chains[i])}"
                if action.is_send:
                    q = qd.get(action.channel, ())
                    if len(q) >= max_events:
                        continue
                    new_queues = _set_q(queues, action.channel, q + ((eid, msg),))
                    new_matches = matches
                else:
                    q = qd.get(action.channel, ())
                    if not q or q[0][1] != msg:
                        continue
                    new_queues = _set_q(queues, action.channel, q[1:])
                    new_matches = matches + ((q[0][0], eid),)
                new_states = states[:i] + (dst,) + states[i + 1 :]
                new_chains = chains[:i] + (chains[i] + ((eid, action),),) + chains[i + 1 :]
                node = (new_states, new_queues, new_chains, new_matches)
                if node not in seen:
                    seen.add(node)
                    stack.append(node)
    return frozenset(out)
