"""EMSO formulas over cMSCs: syntax tree and satisfaction.

A formula is a block of existentially quantified set variables followed by
a first-order body over the event vocabulary: ordering atoms, action and
message tests, and set membership.  Satisfaction of the set prefix is
decided by backtracking over per-event membership choices, with a
three-valued evaluation of the body pruning partial valuations early.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .cmsc import Action, CMsc

# --------------------------------------------------------------------------
# Syntax
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Le:
    """x <= y in the event partial order."""

    x: str
    y: str


@dataclass(frozen=True)
class LeProc:
    """x <= y and both events on the same process."""

    x: str
    y: str


@dataclass(frozen=True)
class LtProc:
    x: str
    y: str


@dataclass(frozen=True)
class Next:
    """y is the direct successor of x on its process."""

    x: str
    y: str


@dataclass(frozen=True)
class Msg:
    """x is a send matched by the receive y."""

    x: str
    y: str


@dataclass(frozen=True)
class Eq:
    x: str
    y: str


@dataclass(frozen=True)
class ActIs:
    x: str
    action: Action


@dataclass(frozen=True)
class OnProc:
    x: str
    process: str


@dataclass(frozen=True)
class Lbl:
    """x is unmatched and carries the given message."""

    x: str
    message: str


@dataclass(frozen=True)
class In:
    x: str
    setvar: str


@dataclass(frozen=True)
class Not:
    sub: "FoAst"


@dataclass(frozen=True)
class And:
    parts: tuple["FoAst", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["FoAst", ...]


@dataclass(frozen=True)
class Exists:
    var: str
    sub: "FoAst"


@dataclass(frozen=True)
class Forall:
    var: str
    sub: "FoAst"


FoAst = (
    Le | LeProc | LtProc | Next | Msg | Eq | ActIs | OnProc | Lbl | In | Not | And | Or | Exists | Forall
)

TRUE = And(())
FALSE = Or(())


def conj(parts: Iterable[FoAst]) -> FoAst:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[FoAst]) -> FoAst:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


def implies(a: FoAst, b: FoAst) -> FoAst:
    return Or((Not(a), b))


def iff(a: FoAst, b: FoAst) -> FoAst:
    return And((implies(a, b), implies(b, a)))


def exists_many(variables: Iterable[str], body: FoAst) -> FoAst:
    for v in reversed(tuple(variables)):
        body = Exists(v, body)
    return body


def forall_many(variables: Iterable[str], body: FoAst) -> FoAst:
    for v in reversed(tuple(variables)):
        body = Forall(v, body)
    return body


@dataclass(frozen=True)
class EmsoFormula:
    """An existential set-quantifier prefix over a first-order body."""

    prefix: tuple[str, ...]
    body: FoAst

    def __post_init__(self) -> None:
        if len(set(self.prefix)) != len(self.prefix):
            raise ValueError(f"duplicate set variable in prefix {self.prefix}")


_ATOM_VARS = {
    Le: lambda n: (n.x, n.y),
    LeProc: lambda n: (n.x, n.y),
    LtProc: lambda n: (n.x, n.y),
    Next: lambda n: (n.x, n.y),
    Msg: lambda n: (n.x, n.y),
    Eq: lambda n: (n.x, n.y),
    ActIs: lambda n: (n.x,),
    OnProc: lambda n: (n.x,),
    Lbl: lambda n: (n.x,),
    In: lambda n: (n.x,),
}


def fo_free(node: FoAst, _memo: dict | None = None) -> frozenset[str]:
    """Free first-order variables of a body."""
    memo = _memo if _memo is not None else {}
    got = memo.get(id(node))
    if got is not None:
        return got
    kind = type(node)
    if kind in _ATOM_VARS:
        out = frozenset(_ATOM_VARS[kind](node))
    elif kind is Not:
        out = fo_free(node.sub, memo)
    elif kind in (And, Or):
        out = frozenset().union(*(fo_free(p, memo) for p in node.parts))
    else:
        out = fo_free(node.sub, memo) - {node.var}
    memo[id(node)] = out
    return out


def set_free(node: FoAst, _memo: dict | None = None) -> frozenset[str]:
    """Set variables used in a body (all are free; bodies have no set binders)."""
    memo = _memo if _memo is not None else {}
    got = memo.get(id(node))
    if got is not None:
        return got
    kind = type(node)
    if kind is In:
        out = frozenset((node.setvar,))
    elif kind in _ATOM_VARS:
        out = frozenset()
    elif kind is Not:
        out = set_free(node.sub, memo)
    elif kind in (And, Or):
        out = frozenset().union(*(set_free(p, memo) for p in node.parts))
    else:
        out = set_free(node.sub, memo)
    memo[id(node)] = out
    return out


def is_sentence(phi: EmsoFormula) -> bool:
    return not fo_free(phi.body) and set_free(phi.body) <= set(phi.prefix)


def rename_set_vars(node: FoAst, mapping: Mapping[str, str], _memo: dict | None = None) -> FoAst:
    """Rename set variables, preserving shared subterm structure."""
    memo = _memo if _memo is not None else {}
    got = memo.get(id(node))
    if got is not None:
        return got
    kind = type(node)
    if kind is In:
        out = In(node.x, mapping.get(node.setvar, node.setvar))
    elif kind in _ATOM_VARS:
        out = node
    elif kind is Not:
        out = Not(rename_set_vars(node.sub, mapping, memo))
    elif kind in (And, Or):
        out = kind(tuple(rename_set_vars(p, mapping, memo) for p in node.parts))
    else:
        out = kind(node.var, rename_set_vars(node.sub, mapping, memo))
    memo[id(node)] = out
    return out


def node_count(phi: EmsoFormula | FoAst) -> int:
    """Number of distinct syntax nodes (shared subterms counted once)."""
    root = phi.body if isinstance(phi, EmsoFormula) else phi
    seen: set[int] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        kind = type(node)
        if kind is Not:
            stack.append(node.sub)
        elif kind in (And, Or):
            stack.extend(node.parts)
        elif kind in (Exists, Forall):
            stack.append(node.sub)
    return len(seen)


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalBudget:
    """Cost caps for satisfaction checks; exceeding one raises, it never
    silently returns false."""

    max_events: int = 10
    max_set_vars: int = 8
    max_nodes: int = 10_000_000


class CostCapExceeded(RuntimeError):
    pass


class UnboundVariable(ValueError):
    pass


_MISS = object()

# compiled node opcodes
_OP_LE, _OP_LEPROC, _OP_LTPROC, _OP_NEXT, _OP_MSG, _OP_EQ = range(6)
_OP_ACT, _OP_ONPROC, _OP_LBL, _OP_IN, _OP_NOT, _OP_AND, _OP_OR, _OP_EX, _OP_ALL = range(6, 15)

_BINARY_OPS = {
    Le: _OP_LE,
    LeProc: _OP_LEPROC,
    LtProc: _OP_LTPROC,
    Next: _OP_NEXT,
    Msg: _OP_MSG,
    Eq: _OP_EQ,
}


class _Compiled:
    """Indexed form of a body: opcode, payload, children, free variables."""

    def __init__(self, root: FoAst):
        self.ops: list[int] = []
        self.data: list = []
        self.kids: list[tuple[int, ...]] = []
        self.free: list[tuple[str, ...]] = []
        self._nodes: list[FoAst] = []
        self._ids: dict[int, int] = {}
        fmemo: dict = {}
        smemo: dict = {}
        self.root = self._add(root, fmemo)
        # mutable evaluation order per connective, adapted by move-to-front
        # on short-circuit; sound because the connectives are commutative
        self.kid_order = [list(k) for k in self.kids]
        del smemo
        # Set-variable dependencies per node, split into memberships of
        # events bound by the node's own free variables (tracked per event)
        # and memberships under inner quantifiers (tracked per variable).
        self.afree: list[tuple[tuple[str, str], ...]] = []
        self.qvars: list[tuple[str, ...]] = []
        for nid, op in enumerate(self.ops):
            if op == _OP_IN:
                self.afree.append(((self.data[nid][0], self.data[nid][1]),))
                self.qvars.append(())
            elif op < _OP_IN:
                self.afree.append(())
                self.qvars.append(())
            elif op in (_OP_EX, _OP_ALL):
                var = self.data[nid]
                sub = self.kids[nid][0]
                self.afree.append(
                    tuple(p for p in self.afree[sub] if p[0] != var)
                )
                self.qvars.append(
                    tuple(
                        sorted(
                            set(self.qvars[sub])
                            | {v for x, v in self.afree[sub] if x == var}
                        )
                    )
                )
            else:
                av: set = set()
                qv: set = set()
                for kid in self.kids[nid]:
                    av.update(self.afree[kid])
                    qv.update(self.qvars[kid])
                self.afree.append(tuple(sorted(av)))
                self.qvars.append(tuple(sorted(qv)))

    def _add(self, node: FoAst, fmemo: dict) -> int:
        nid = self._ids.get(id(node))
        if nid is not None:
            return nid
        kind = type(node)
        if kind in _BINARY_OPS:
            op, data, kids = _BINARY_OPS[kind], (node.x, node.y), ()
        elif kind is ActIs:
            op, data, kids = _OP_ACT, (node.x, node.action), ()
        elif kind is OnProc:
            op, data, kids = _OP_ONPROC, (node.x, node.process), ()
        elif kind is Lbl:
            op, data, kids = _OP_LBL, (node.x, node.message), ()
        elif kind is In:
            op, data, kids = _OP_IN, (node.x, node.setvar), ()
        elif kind is Not:
            op, data, kids = _OP_NOT, None, (self._add(node.sub, fmemo),)
        elif kind in (And, Or):
            op = _OP_AND if kind is And else _OP_OR
            data, kids = None, tuple(self._add(p, fmemo) for p in node.parts)
        elif kind in (Exists, Forall):
            op = _OP_EX if kind is Exists else _OP_ALL
            data, kids = node.var, (self._add(node.sub, fmemo),)
        else:
            raise TypeError(f"not a formula node: {node!r}")
        nid = len(self.ops)
        self._ids[id(node)] = nid
        self.ops.append(op)
        self.data.append(data)
        self.kids.append(kids)
        self.free.append(tuple(sorted(fo_free(node, fmemo))))
        self._nodes.append(node)
        return nid


class _Search:
    """Backtracking check of an existential set prefix over one model.

    Set valuations are built one membership bit at a time: a three-valued
    fold of the body either decides the formula or reports the first
    membership atom it got stuck on, which becomes the next branch point.
    Memo entries carry a snapshot of the membership masks their subtree
    depends on; decided entries stay valid under mask growth (the fold is
    monotone), undecided ones until a relevant mask changes.
    """

    def __init__(self, comp: _Compiled, m: CMsc, open_vars: Iterable[str],
                 fixed: Mapping[str, int], budget: EvalBudget):
        self.comp = comp
        self.n = m.n_events
        self.budget = budget
        self.nodes = 0
        self.le_masks = m.le_masks
        self.proc = m.proc_of
        self.pos = m.pos_of
        self.acts = m.actions
        self.msgs = m.msgs
        self.matchset = frozenset(m.matches)
        # per open var: [in_mask, out_mask, stamp]; the stamp increases on
        # every change (including backtracking), so equal stamp sums over a
        # node's variables certify an unchanged relevant valuation
        self.open: dict[str, list[int]] = {v: [0, 0, 0] for v in open_vars}
        self.fixed = dict(fixed)
        # per-node watch tuples are built on first visit: most evaluations
        # touch a small corner of a large formula
        self._wq: dict[int, tuple[list[int], ...]] = {}
        self._wa: dict[int, tuple[tuple[str, list[int]], ...]] = {}
        self.memo: dict = {}
        self.assignments: list[tuple[str, int, int]] = []
        # unique id per live search level: decided memo entries are valid
        # below the level they were computed at, on the same branch
        self.levels: list[int] = [0]
        self._next_level = 1

    def _push(self, var: str, event: int, member: bool) -> None:
        masks = self.open[var]
        self.assignments.append((var, masks[0], masks[1]))
        masks[0 if member else 1] |= 1 << event
        masks[2] += 1
        self.levels.append(self._next_level)
        self._next_level += 1

    def _pop(self) -> None:
        var, in_mask, out_mask = self.assignments.pop()
        cell = self.open[var]
        cell[0] = in_mask
        cell[1] = out_mask
        cell[2] += 1
        self.levels.pop()

    # -- three-valued fold --------------------------------------------------

    def fold(self, nid: int, env: dict[str, int]):
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise CostCapExceeded(
                f"evaluation exceeded {self.budget.max_nodes} nodes"
            )
        comp = self.comp
        op = comp.ops[nid]
        data = comp.data[nid]

        if op < _OP_IN:  # concrete atoms never produce unknowns
            if op == _OP_ACT:
                return self.acts[env[data[0]]] == data[1], None
            if op == _OP_ONPROC:
                return self.proc[env[data[0]]] == data[1], None
            if op == _OP_LBL:
                return self.msgs[env[data[0]]] == data[1], None
            i = env[data[0]]
            j = env[data[1]]
            if op == _OP_LE:
                return bool(self.le_masks[i] >> j & 1), None
            if op == _OP_LEPROC:
                return self.proc[i] == self.proc[j] and self.pos[i] <= self.pos[j], None
            if op == _OP_LTPROC:
                return self.proc[i] == self.proc[j] and self.pos[i] < self.pos[j], None
            if op == _OP_NEXT:
                return (
                    self.proc[i] == self.proc[j] and self.pos[j] == self.pos[i] + 1,
                    None,
                )
            if op == _OP_MSG:
                return (i, j) in self.matchset, None
            return i == j, None  # _OP_EQ
        if op == _OP_IN:
            e = env[data[0]]
            masks = self.open.get(data[1])
            if masks is None:
                return bool(self.fixed[data[1]] >> e & 1), None
            if masks[0] >> e & 1:
                return True, None
            if masks[1] >> e & 1:
                return False, None
            return None, (data[1], e, True)  # an unknown positive literal

        free = comp.free[nid]
        if not free:
            key = nid
        elif len(free) == 1:
            key = (nid, env[free[0]])
        else:
            key = (nid,) + tuple(map(env.__getitem__, free))
        wq = self._wq.get(nid)
        if wq is None:
            wq = tuple(self.open[v] for v in comp.qvars[nid] if v in self.open)
            self._wq[nid] = wq
            self._wa[nid] = tuple(
                (x, self.open[v]) for x, v in comp.afree[nid] if v in self.open
            )
        stamp = 0
        for cell in wq:
            stamp += cell[2]
        wa = self._wa[nid]
        if wa:
            trits = 0
            for x, cell in wa:
                e = env[x]
                trits = trits * 3 + (1 if cell[0] >> e & 1 else 2 if cell[1] >> e & 1 else 0)
            stamp = (stamp, trits)
        got = self.memo.get(key)
        if got is not None:
            if got[4] == stamp:
                return got[0], got[1]
            if got[0] is not None:
                d = got[2]
                levels = self.levels
                if d < len(levels) and levels[d] == got[3]:
                    return got[0], got[1]

        fold = self.fold
        if op == _OP_NOT:
            val, lit = fold(comp.kids[nid][0], env)
            if val is None:
                # negation of an unknown pure literal is a pure literal
                lit = (lit[0], lit[1], not lit[2] if lit[2] is not None else None)
            else:
                val = not val
        elif op == _OP_AND or op == _OP_OR:
            kill = op == _OP_OR  # value that short-circuits
            val, lit = (not kill), None
            seen_literals: dict | None = None
            order = comp.kid_order[nid]
            for k, kid in enumerate(order):
                v, l = fold(kid, env)
                if v == kill:
                    val, lit = kill, None
                    if k:
                        order.insert(0, order.pop(k))
                    break
                if v is None:
                    if l[2] is not None:
                        # complementary unknown literals decide the connective
                        # (x in X or x not in X holds under every valuation)
                        if seen_literals is None:
                            seen_literals = {}
                        prev = seen_literals.get(l[:2])
                        if prev is not None and prev != l[2]:
                            val, lit = kill, None
                            break
                        seen_literals[l[:2]] = l[2]
                    if val is not None:
                        val, lit = None, (l[0], l[1], None)
        else:  # quantifiers
            var = data
            kid = comp.kids[nid][0]
            kill = op == _OP_EX
            shadow = env.get(var, _MISS)
            val, lit = (not kill), None
            for e in range(self.n):
                env[var] = e
                v, l = fold(kid, env)
                if v == kill:
                    val, lit = kill, None
                    break
                if v is None and val is not None:
                    val, lit = None, (l[0], l[1], None)
            if shadow is _MISS:
                del env[var]
            else:
                env[var] = shadow

        self.memo[key] = (val, lit, len(self.levels) - 1, self.levels[-1], stamp)
        return val, lit

    # -- search -------------------------------------------------------------

    def satisfiable(self) -> bool:
        val, lit = self.fold(self.comp.root, {})
        if val is not None:
            return val
        var, event = lit[0], lit[1]
        for choice in (True, False):
            self._push(var, event, choice)
            try:
                if self.satisfiable():
                    return True
            finally:
                self._pop()
        return False


class PreparedSentence:
    """A compiled sentence, reusable across many models."""

    def __init__(self, phi: EmsoFormula):
        if not is_sentence(phi):
            raise UnboundVariable(
                f"evaluate needs a sentence; free variables: "
                f"fo={sorted(fo_free(phi.body))} "
                f"set={sorted(set_free(phi.body) - set(phi.prefix))}"
            )
        self.phi = phi
        self.comp = _Compiled(phi.body)
        used = set_free(phi.body)
        self.open_vars = tuple(v for v in phi.prefix if v in used)

    def evaluate(self, m: CMsc, budget: EvalBudget | None = None) -> bool:
        budget = budget or EvalBudget()
        if m.n_events > budget.max_events:
            raise CostCapExceeded(
                f"model has {m.n_events} events, budget allows {budget.max_events}"
            )
        if len(self.phi.prefix) > budget.max_set_vars:
            raise CostCapExceeded(
                f"prefix has {len(self.phi.prefix)} set variables, "
                f"budget allows {budget.max_set_vars}"
            )
        return _Search(self.comp, m, self.open_vars, {}, budget).satisfiable()


def prepare(phi: EmsoFormula) -> PreparedSentence:
    return PreparedSentence(phi)


def evaluate(phi: EmsoFormula, m: CMsc, budget: EvalBudget | None = None) -> bool:
    """Does the finite cMSC satisfy the EMSO sentence?

    Raises :class:`CostCapExceeded` (never returns a guess) when the model
    or search exceeds the budget.
    """
    return prepare(phi).evaluate(m, budget)


def evaluate_with(
    psi: FoAst,
    m: CMsc,
    assignment: Mapping[str, object],
    budget: EvalBudget | None = None,
) -> bool:
    """Tarskian satisfaction of a first-order body under an assignment.

    First-order variables map to event ids, set variables to iterables of
    event ids.  Every free variable must be bound.
    """
    budget = budget or EvalBudget()
    env: dict[str, int] = {}
    fixed: dict[str, int] = {}
    for v in fo_free(psi):
        if v not in assignment:
            raise UnboundVariable(f"first-order variable {v!r} is unbound")
        env[v] = m.index_of(assignment[v])  # type: ignore[arg-type]
    for v in set_free(psi):
        if v not in assignment:
            raise UnboundVariable(f"set variable {v!r} is unbound")
        mask = 0
        for eid in assignment[v]:  # type: ignore[union-attr]
            mask |= 1 << m.index_of(eid)
        fixed[v] = mask
    comp = _Compiled(psi)
    search = _Search(comp, m, (), fixed, budget)
    val, _ = search.fold(comp.root, env)
    assert val is not None
    return val


def bounded_models(
    phi: EmsoFormula,
    bounds,
    budget: EvalBudget | None = None,
) -> frozenset[CMsc]:
    """All cMSCs within the generator bounds that satisfy the sentence."""
    from .generate import enumerate_cmscs

    prepared = prepare(phi)
    return frozenset(m for m in enumerate_cmscs(bounds) if prepared.evaluate(m, budget))
