"""Exhaustive enumeration of small cMSCs, used as a bounded model universe."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .cmsc import CMsc, Event, InvalidCMsc, RECV, SEND, recv, send, validate


@dataclass(frozen=True)
class CMscBounds:
    """Finite universe description for bounded model enumeration."""

    processes: tuple[str, ...]
    messages: tuple[str, ...]
    max_events_per_process: int
    max_total_events: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "processes", tuple(sorted(self.processes)))
        object.__setattr__(self, "messages", tuple(sorted(self.messages)))


_CACHE: dict[CMscBounds, tuple[CMsc, ...]] = {}
_ENUMERATION_CAP = 2_000_000


def enumerate_cmscs(bounds: CMscBounds) -> tuple[CMsc, ...]:
    """Every validated cMSC within the bounds, in a deterministic order.

    Candidates are built per the structure forced by the cMSC conditions
    (matched sends form a channel prefix, matched receives a suffix, paired
    in order); the validator is still run on each as the final authority.
    """
    cached = _CACHE.get(bounds)
    if cached is None:
        cached = tuple(_enumerate(bounds))
        _CACHE[bounds] = cached
    return cached


def _actions_for(proc: str, processes: tuple[str, ...]):
    acts = []
    for other in processes:
        if other != proc:
            acts.append(send(proc, other))
            acts.append(recv(proc, other))
    return acts


def _proc_sequences(proc: str, bounds: CMscBounds):
    acts = _actions_for(proc, bounds.processes)
    for length in range(bounds.max_events_per_process + 1):
        yield from itertools.product(acts, repeat=length)


def _enumerate(bounds: CMscBounds):
    total_cap = bounds.max_total_events
    count = 0
    seqs_per_proc = [list(_proc_sequences(p, bounds)) for p in bounds.processes]
    for skeleton in itertools.product(*seqs_per_proc):
        total = sum(len(s) for s in skeleton)
        if total == 0 or (total_cap is not None and total > total_cap):
            continue
        events = []
        for proc, seq in zip(bounds.processes, skeleton):
            for k, action in enumerate(seq):
                events.append(Event(f"{proc}{k}", action))
        by_id = {ev.eid: ev for ev in events}

        channels = sorted({ev.action.channel for ev in events})
        options_per_channel = []
        for c in channels:
            sends = [e.eid for e in events if e.action.kind == SEND and e.action.channel == c]
            recvs = [e.eid for e in events if e.action.kind == RECV and e.action.channel == c]
            options = []
            for k in range(min(len(sends), len(recvs)) + 1):
                options.append(list(zip(sends[:k], recvs[len(recvs) - k :])))
            options_per_channel.append(options)

        for combo in itertools.product(*options_per_channel):
            matches = [pair for pairs in combo for pair in pairs]
            matched = {eid for pair in matches for eid in pair}
            free = [ev.eid for ev in events if ev.eid not in matched]
            if free and not bounds.messages:
                continue
            for labels in itertools.product(bounds.messages, repeat=len(free)):
                labeled = [
                    Event(ev.eid, ev.action, dict(zip(free, labels)).get(ev.eid))
                    for ev in events
                ]
                try:
                    m = validate(bounds.processes, bounds.messages, labeled, matches)
                except InvalidCMsc:
                    continue
                count += 1
                if count > _ENUMERATION_CAP:
                    raise RuntimeError(
                        f"cMSC enumeration exceeded {_ENUMERATION_CAP} elements"
                    )
                yield m
        del by_id
