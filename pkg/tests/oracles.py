"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written the slow, obvious way: exhaustive
set-valuation enumeration for formulas, direct machine simulation for the
reduction sources, and straightforward recursion elsewhere.
"""

from __future__ import annotations

import itertools
from collections import deque
from random import Random

from hmsckit.cmsc import CMsc, Event, InvalidCMsc, recv, send, validate
from hmsckit.compose import concat_sets
from hmsckit.logic import (
    ActIs,
    And,
    EmsoFormula,
    Eq,
    Exists,
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
    fo_free,
    set_free,
)
from hmsckit.reductions import CounterMachine, PcpInstance, TmSpec


# --------------------------------------------------------------------------
# Naive EMSO evaluation: full enumeration of set valuations, plain recursion
# --------------------------------------------------------------------------


def naive_eval_body(psi, m: CMsc, env: dict, sets: dict) -> bool:
    kind = type(psi)
    if kind is Le:
        return m.le(env[psi.x], env[psi.y])
    if kind is LeProc:
        return m.le_proc(env[psi.x], env[psi.y])
    if kind is LtProc:
        i, j = env[psi.x], env[psi.y]
        return m.le_proc(i, j) and i != j
    if kind is Next:
        return m.next_of(env[psi.x], env[psi.y])
    if kind is Msg:
        return (env[psi.x], env[psi.y]) in set(m.matches)
    if kind is Eq:
        return env[psi.x] == env[psi.y]
    if kind is ActIs:
        return m.actions[env[psi.x]] == psi.action
    if kind is OnProc:
        return m.proc_of[env[psi.x]] == psi.process
    if kind is Lbl:
        return m.msgs[env[psi.x]] == psi.message
    if kind is In:
        return env[psi.x] in sets[psi.setvar]
    if kind is Not:
        return not naive_eval_body(psi.sub, m, env, sets)
    if kind is And:
        return all(naive_eval_body(p, m, env, sets) for p in psi.parts)
    if kind is Or:
        return any(naive_eval_body(p, m, env, sets) for p in psi.parts)
    if kind is Exists:
        return any(
            naive_eval_body(psi.sub, m, {**env, psi.var: e}, sets)
            for e in range(m.n_events)
        )
    if kind is Forall:
        return all(
            naive_eval_body(psi.sub, m, {**env, psi.var: e}, sets)
            for e in range(m.n_events)
        )
    raise TypeError(psi)


def naive_evaluate(phi: EmsoFormula, m: CMsc) -> bool:
    """Try every subset assignment for the prefix variables."""
    events = list(range(m.n_events))
    subsets = []
    for size in range(len(events) + 1):
        subsets.extend(set(c) for c in itertools.combinations(events, size))
    for choice in itertools.product(subsets, repeat=len(phi.prefix)):
        sets = dict(zip(phi.prefix, choice))
        if naive_eval_body(phi.body, m, {}, sets):
            return True
    return False


# --------------------------------------------------------------------------
# Random structures
# --------------------------------------------------------------------------


def random_cmsc(
    rng: Random,
    processes=("p", "q"),
    messages=("a",),
    max_events: int = 4,
    require_connected: bool = False,
    tries: int = 200,
) -> CMsc:
    """Rejection-sample a valid random cMSC within the given size."""
    for _ in range(tries):
        candidate = _random_candidate(rng, processes, messages, max_events)
        try:
            m = validate(*candidate)
        except InvalidCMsc:
            continue
        if require_connected:
            from hmsckit.cmsc import connected

            if not connected(m):
                continue
        return m
    raise AssertionError("could not sample a cMSC; widen the bounds")


def _random_candidate(rng: Random, processes, messages, max_events):
    n = rng.randint(1, max_events)
    events = []
    for i in range(n):
        p = rng.choice(processes)
        others = [q for q in processes if q != p]
        q = rng.choice(others)
        action = send(p, q) if rng.random() < 0.5 else recv(p, q)
        events.append(Event(f"e{i}", action, None))
    # FIFO-style matching per channel: first k sends against last k receives
    matches = []
    channels = {ev.action.channel for ev in events}
    for c in channels:
        sends = [ev.eid for ev in events if ev.action.is_send and ev.action.channel == c]
        recvs = [ev.eid for ev in events if not ev.action.is_send and ev.action.channel == c]
        k = rng.randint(0, min(len(sends), len(recvs)))
        matches.extend(zip(sends[:k], recvs[len(recvs) - k :]))
    matched = {e for pair in matches for e in pair}
    events = [
        Event(ev.eid, ev.action, rng.choice(messages) if ev.eid not in matched else None)
        for ev in events
    ]
    return processes, messages, events, matches


def corrupt_candidate(rng: Random, processes, messages, candidate):
    """Break a random well-formedness rule of a raw candidate structure."""
    procs, msgs, events, matches = candidate
    events = list(events)
    matches = list(matches)
    mode = rng.choice(["drop-label", "extra-label", "bad-match", "double-match", "shuffle"])
    if mode == "drop-label" and any(ev.message for ev in events):
        i = rng.choice([k for k, ev in enumerate(events) if ev.message])
        events[i] = Event(events[i].eid, events[i].action, None)
    elif mode == "extra-label" and matches:
        se, _re = rng.choice(matches)
        i = next(k for k, ev in enumerate(events) if ev.eid == se)
        events[i] = Event(se, events[i].action, rng.choice(messages))
    elif mode == "bad-match" and len(events) >= 2:
        a, b = rng.sample([ev.eid for ev in events], 2)
        matches.append((a, b))
    elif mode == "double-match" and matches:
        se, _re = rng.choice(matches)
        others = [ev.eid for ev in events if ev.eid != se]
        if others:
            matches.append((se, rng.choice(others)))
    else:
        rng.shuffle(events)
    return procs, msgs, events, matches


# --------------------------------------------------------------------------
# Direct checks of the library's invariants on a validated cMSC
# --------------------------------------------------------------------------


def check_cmsc_conditions(m: CMsc) -> None:
    """Re-check every well-formedness condition from first principles."""
    matches = set(m.matches)
    # (i) matches join sends to receives on one channel
    for s, r in matches:
        assert m.actions[s].is_send and not m.actions[r].is_send
        assert m.actions[s].channel == m.actions[r].channel
    # matching is injective
    ends = [e for pair in matches for e in pair]
    assert len(ends) == len(set(ends))
    # (ii) FIFO per channel
    for s1, r1 in matches:
        for s2, r2 in matches:
            if m.actions[s1].channel != m.actions[s2].channel:
                continue
            assert (m.pos_of[s1] <= m.pos_of[s2]) == (m.pos_of[r1] <= m.pos_of[r2])
    # acyclicity: le() is a partial order refining the edges
    for i in range(m.n_events):
        for j in range(m.n_events):
            if m.le(i, j) and m.le(j, i):
                assert i == j
    for s, r in matches:
        assert m.le(s, r)
    # dom(mu) = unmatched
    for i in range(m.n_events):
        assert (m.msgs[i] is not None) == (i not in m.match_of)
    # tail condition
    for s, r in matches:
        for g in m.unmatched:
            if m.actions[g] == m.actions[s]:
                assert m.le(s, g) and s != g
            if m.actions[g] == m.actions[r]:
                assert m.le(g, r) and g != r


# --------------------------------------------------------------------------
# Iterated concatenation and the canonical iteration witness
# --------------------------------------------------------------------------


def iterated_concat(base: frozenset[CMsc], unrolls: int, max_events: int) -> frozenset[CMsc]:
    acc = set(m for m in base if m.n_events <= max_events)
    cur = frozenset(acc)
    for _ in range(unrolls - 1):
        cur = frozenset(m for m in concat_sets(cur, base) if m.n_events <= max_events)
        if cur <= acc:
            break
        acc |= cur
    return frozenset(acc)


def iteration_witness(factor: CMsc, k: int, m: CMsc):
    """The canonical W/Y assignment for m as a k-fold stacking of ``factor``.

    Returns (w_eids, y_eids_per_message) or None when m's per-process
    chains and internal matches are inconsistent with such a stacking.
    """
    chains = {p: list(factor.chains.get(p, ())) for p in factor.processes}
    per_proc_counts = {p: len(c) for p, c in chains.items()}
    for p in m.processes:
        have = len(m.chains.get(p, ()))
        want = per_proc_counts.get(p, 0) * k
        if have != want:
            return None
    # factor index of each event
    factor_of = {}
    slot_of = {}
    for p, chain in m.chains.items():
        width = per_proc_counts[p]
        for pos, e in enumerate(chain):
            factor_of[e] = pos // width
            slot_of[e] = chains[p][pos % width]
    # internal matches must replicate the factor's, cross matches go forward
    internal = set()
    for s, r in m.matches:
        if factor_of[s] == factor_of[r]:
            if (slot_of[s], slot_of[r]) not in set(factor.matches):
                return None
            internal.add((s, r))
        elif factor_of[s] > factor_of[r]:
            return None
    for i in range(k):
        replicated = {
            (s, r) for s, r in internal if factor_of[s] == i
        }
        if len(replicated) != len(factor.matches):
            return None
    # W alternates per process per factor occupancy
    w = []
    for p, chain in m.chains.items():
        width = per_proc_counts[p]
        if width == 0:
            continue
        for pos, e in enumerate(chain):
            if (pos // width) % 2 == 0:
                w.append(m.eids[e])
    # Y_m collects cross-matched events under their factor labels
    y: dict[str, list[str]] = {}
    for s, r in m.matches:
        if (s, r) in internal:
            continue
        label = factor.msgs[slot_of[s]]
        if label is None or factor.msgs[slot_of[r]] != label:
            return None
        y.setdefault(label, []).extend((m.eids[s], m.eids[r]))
    return w, y


# --------------------------------------------------------------------------
# Source-problem simulators for the reductions
# --------------------------------------------------------------------------


def solve_pcp(inst: PcpInstance, max_len: int) -> tuple[str, ...] | None:
    """Brute-force search for a correspondence word up to the length."""
    letters = inst.letters
    for n in range(1, max_len + 1):
        for word in itertools.product(letters, repeat=n):
            f = tuple(b for a in word for b in inst.f[a])
            g = tuple(b for a in word for b in inst.g[a])
            if f == g:
                return word
    return None


def cm2_reachable(cm: CounterMachine, max_steps: int) -> bool:
    """Can a final state be reached with both counters zero?"""
    start = (cm.initial, 0, 0)
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        (state, c1, c2), depth = frontier.popleft()
        if state in cm.finals and c1 == 0 and c2 == 0 and depth >= 1:
            return True
        if depth == max_steps:
            continue
        for src, op, counter, dst in cm.transitions:
            if src != state:
                continue
            vals = [c1, c2]
            if op == "inc":
                vals[counter - 1] += 1
            elif op == "dec":
                if vals[counter - 1] == 0:
                    continue
                vals[counter - 1] -= 1
            else:
                if vals[counter - 1] != 0:
                    continue
            node = (dst, vals[0], vals[1])
            if node not in seen:
                seen.add(node)
                frontier.append((node, depth + 1))
    return False


def run_tm(spec: TmSpec, max_steps: int, max_cells: int) -> int | None:
    """Steps until the machine halts on the empty word, or None.

    Configurations are words over the tape alphabet with one state symbol;
    the initial tape is the end marker, the initial state, and blanks.
    """
    for cells in range(1, max_cells + 1):
        start = (spec.left_end, spec.initial) + (spec.blank,) * cells
        seen = {start}
        frontier = deque([(start, 0)])
        while frontier:
            config, depth = frontier.popleft()
            if spec.halting in config:
                return depth
            if depth == max_steps:
                continue
            for i in range(len(config) - 2):
                window = config[i : i + 3]
                for lhs, rhs in spec.rules:
                    if window == lhs:
                        nxt = config[:i] + rhs + config[i + 3 :]
                        if nxt not in seen:
                            seen.add(nxt)
                            frontier.append((nxt, depth + 1))
    return None
