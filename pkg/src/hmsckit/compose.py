"""Set-valued concatenation of cMSCs and of finite cMSC languages.

Concatenation stacks the second chart below the first and optionally
matches unmatched sends of the first with unmatched receives of the second
that carry the same message.  The result is the set of all stackings that
form valid cMSCs, deduplicated up to isomorphism.
"""

from __future__ import annotations

import itertools

from .cmsc import (
    CMsc,
    InvalidCMsc,
    RECV,
    SEND,
    all_cross_candidates,
    stack,
)

# A cMSC language is a frozenset of CMsc values; CMsc equality is canonical,
# so no two elements are isomorphic.
CMscSet = frozenset


def concat_pair(m1: CMsc, m2: CMsc) -> frozenset[CMsc]:
    """All valid vertical stackings of m2 below m1.

    The tail condition forces newly matched sends to be a prefix of m1's
    pending sends per channel and newly matched receives a suffix of m2's
    pending receives, so only contiguous alignments are tried (the full
    subset enumeration in :func:`concat_pair_naive` cross-checks this).
    """
    per_channel: list[list[list[tuple[int, int]]]] = []
    channels = sorted(set(m1.channels) | set(m2.channels))
    for c in channels:
        sends = [i for i in m1.channel_events(c, SEND) if i not in m1.match_of]
        recvs = [j for j in m2.channel_events(c, RECV) if j not in m2.match_of]
        options: list[list[tuple[int, int]]] = []
        for k in range(min(len(sends), len(recvs)) + 1):
            chosen_recvs = recvs[len(recvs) - k :]
            pairs = list(zip(sends[:k], chosen_recvs))
            if all(m1.msgs[s] == m2.msgs[r] for s, r in pairs):
                options.append(pairs)
        per_channel.append(options)

    out = set()
    for combo in itertools.product(*per_channel):
        cross = [p for pairs in combo for p in pairs]
        try:
            out.add(stack(m1, m2, cross))
        except InvalidCMsc:
            continue
    return frozenset(out)


def concat_pair_naive(m1: CMsc, m2: CMsc) -> frozenset[CMsc]:
    """Reference oracle: try every injective subset of matchable pairs."""
    candidates = all_cross_candidates(m1, m2)
    out = set()
    for size in range(len(candidates) + 1):
        for subset in itertools.combinations(candidates, size):
            if len({s for s, _ in subset}) != size:
                continue
            if len({r for _, r in subset}) != size:
                continue
            try:
                out.add(stack(m1, m2, subset))
            except InvalidCMsc:
                continue
    return frozenset(out)


def concat_sets(l1: frozenset[CMsc], l2: frozenset[CMsc]) -> frozenset[CMsc]:
    """Elementwise concatenation of two finite cMSC languages."""
    out: set[CMsc] = set()
    for m1 in l1:
        for m2 in l2:
            out |= concat_pair(m1, m2)
    return frozenset(out)
