"""Formula builders that close EMSO-definable cMSC languages under the
regular operations.

Union is a disjunction of bodies over a shared prefix.  Concatenation
guesses a finite downward-closed prefix W of events plus, per message m, a
set Y_m of events whose matches were added when stacking, and checks the
two halves against relativized operand formulas.  Iteration replaces the
single split by an equivalence ("same factor") definable from W and the
Y_m sets when every factor is connected; factors are then checked
individually and their arrangement is forced to be acyclic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .cmsc import CMsc
from .logic import (
    FALSE,
    TRUE,
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
    Or,
    conj,
    disj,
    exists_many,
    iff,
    implies,
    rename_set_vars,
)


@dataclass
class ClosureContext:
    """Fixed process/message universe plus a fresh-name supply.

    Generated set and first-order variables carry a ``__k`` suffix from a
    single counter, which keeps every construction level capture-free.
    """

    processes: tuple[str, ...]
    messages: tuple[str, ...]
    _counter: itertools.count = field(default_factory=lambda: itertools.count(), repr=False)

    def __post_init__(self) -> None:
        self.processes = tuple(sorted(set(self.processes)))
        self.messages = tuple(sorted(set(self.messages)))
        if not self.processes:
            raise ValueError("need at least one process")

    @property
    def n(self) -> int:
        return len(self.processes)

    def fresh(self, base: str) -> str:
        return f"{base}__{next(self._counter)}"

    def fresh_yvars(self) -> dict[str, str]:
        return {m: self.fresh(f"Y{m}" if m.isalnum() else "Y") for m in self.messages}


def formula_for_cmsc(m: CMsc) -> EmsoFormula:
    """First-order sentence whose finite models are the isomorphic copies of m.

    Existential witnesses carry the full atomic diagram; conjuncts are
    scoped at the innermost quantifier that binds their variables so that
    model checking prunes early.
    """
    k = m.n_events
    xs = [f"e{i}" for i in range(k)]
    next_facts = {}
    for chain in m.chains.values():
        for a, b in zip(chain, chain[1:]):
            next_facts[b] = a

    per_level: list[list[FoAst]] = [[] for _ in range(k)]
    for i in range(k):
        level = per_level[i]
        level.append(ActIs(xs[i], m.actions[i]))
        if i in next_facts:
            level.append(Next(xs[next_facts[i]], xs[i]))
        for j in range(i):
            level.append(Not(Eq(xs[j], xs[i])))
    for s, r in m.matches:
        per_level[max(s, r)].append(Msg(xs[s], xs[r]))
    for u in m.unmatched:
        per_level[u].append(Lbl(xs[u], m.msgs[u]))
        per_level[u].append(
            Forall("d", And((Not(Msg(xs[u], "d")), Not(Msg("d", xs[u])))))
        )

    body: FoAst = Forall("d", disj([Eq("d", x) for x in xs]))
    for i in reversed(range(k)):
        body = Exists(xs[i], conj(per_level[i] + [body]))
    return EmsoFormula((), body)


def pad_prefixes(f1: EmsoFormula, f2: EmsoFormula) -> tuple[EmsoFormula, EmsoFormula]:
    """Extend both prefixes to a common variable list (languages unchanged)."""
    prefix = f1.prefix + tuple(v for v in f2.prefix if v not in f1.prefix)
    return EmsoFormula(prefix, f1.body), EmsoFormula(prefix, f2.body)


def rename_apart(
    f1: EmsoFormula, f2: EmsoFormula, ctx: ClosureContext
) -> tuple[EmsoFormula, EmsoFormula]:
    """Give both operands disjoint fresh prefix variables."""
    out = []
    for f in (f1, f2):
        mapping = {v: ctx.fresh("X") for v in f.prefix}
        out.append(
            EmsoFormula(tuple(mapping[v] for v in f.prefix), rename_set_vars(f.body, mapping))
        )
    return out[0], out[1]


def union_formula(f1: EmsoFormula, f2: EmsoFormula) -> EmsoFormula:
    """Language union; operands must already share a padded prefix."""
    if f1.prefix != f2.prefix:
        raise ValueError("union_formula expects padded (identical) prefixes")
    return EmsoFormula(f1.prefix, Or((f1.body, f2.body)))


def relativize_w(
    psi: FoAst,
    wvar: str,
    yvars: dict[str, str],
    inside: bool = True,
    _memo: dict | None = None,
) -> FoAst:
    """Relativize a first-order body to W (or its complement).

    Quantifiers are bounded to the chosen side and a message test also
    accepts membership in that message's Y-set, so matches added across the
    W boundary look unmatched-with-label to the operand formulas.
    """
    memo = _memo if _memo is not None else {}
    got = memo.get(id(psi))
    if got is not None:
        return got
    kind = type(psi)
    if kind is Lbl:
        out: FoAst = Or((psi, In(psi.x, yvars[psi.message])))
    elif kind is Exists:
        bound = In(psi.var, wvar) if inside else Not(In(psi.var, wvar))
        out = Exists(psi.var, And((bound, relativize_w(psi.sub, wvar, yvars, inside, memo))))
    elif kind is Forall:
        bound = In(psi.var, wvar) if inside else Not(In(psi.var, wvar))
        out = Forall(psi.var, implies(bound, relativize_w(psi.sub, wvar, yvars, inside, memo)))
    elif kind is Not:
        out = Not(relativize_w(psi.sub, wvar, yvars, inside, memo))
    elif kind in (And, Or):
        out = kind(tuple(relativize_w(p, wvar, yvars, inside, memo) for p in psi.parts))
    else:
        out = psi
    memo[id(psi)] = out
    return out


def concat_formula(f1: EmsoFormula, f2: EmsoFormula, ctx: ClosureContext) -> EmsoFormula:
    """Language concatenation; operands must share a padded prefix and the
    first language may contain only finite cMSCs (callers guarantee it)."""
    if f1.prefix != f2.prefix:
        raise ValueError("concat_formula expects padded (identical) prefixes")
    w = ctx.fresh("W")
    yvars = ctx.fresh_yvars()

    # W is a finite nonempty downward-closed prefix of the composition.
    us = [ctx.fresh("u") for _ in range(ctx.n)]
    v = ctx.fresh("v")
    psi1 = exists_many(
        us, Forall(v, iff(In(v, w), disj([Le(v, u) for u in us])))
    )

    # Matches stay on one side of W unless both endpoints lie in one Y_m;
    # Y_m elements are exactly endpoints of matches crossing out of W.
    x, y = ctx.fresh("x"), ctx.fresh("y")
    same_side = [
        And((In(x, w), In(y, w))),
        And((Not(In(x, w)), Not(In(y, w)))),
    ]
    crossing = [And((In(x, yv), In(y, yv))) for yv in yvars.values()]
    psi2_parts = [
        Forall(x, Forall(y, implies(Msg(x, y), disj(same_side + crossing))))
    ]
    for m, yv in yvars.items():
        others = [Not(In(x, y2)) for m2, y2 in yvars.items() if m2 != m]
        witness = Exists(
            y,
            Or(
                (
                    And((Msg(x, y), In(x, w), Not(In(y, w)))),
                    And((Msg(y, x), In(y, w), Not(In(x, w)))),
                )
            ),
        )
        psi2_parts.append(Forall(x, implies(In(x, yv), conj(others + [witness]))))
    psi2 = conj(psi2_parts)

    psi3 = relativize_w(f1.body, w, yvars, inside=True)
    psi4 = relativize_w(f2.body, w, yvars, inside=False)
    prefix = (w, *yvars.values(), *f1.prefix)
    return EmsoFormula(prefix, And((psi1, psi2, psi3, psi4)))


class SimFormulas:
    """Builders for the same-factor relation of iterated compositions.

    Two events are similar when they are connected by a short path of
    same-process same-W-block steps and matched-inside-a-factor message
    steps; ``border`` relates distinct similarity classes that are forced
    into order by a process or message edge.  Instantiations are cached per
    variable pair so shared subterms stay shared.
    """

    def __init__(self, ctx: ClosureContext, wvar: str, yvars: dict[str, str]):
        self.ctx = ctx
        self.wvar = wvar
        self.yvars = yvars
        self.n = ctx.n
        self._z = ctx.fresh("z")
        self._path = [ctx.fresh("s") for _ in range(2 * ctx.n - 2)]
        self._w1 = ctx.fresh("w")
        self._w2 = ctx.fresh("w")
        self._sim_cache: dict[tuple[str, str], FoAst] = {}
        self._edge_cache: dict[tuple[str, str], FoAst] = {}
        self._border_cache: dict[tuple[str, str], FoAst] = {}

    def weq(self, x: str, y: str) -> FoAst:
        return iff(In(x, self.wvar), In(y, self.wvar))

    def sim_proc(self, x: str, y: str) -> FoAst:
        z = self._z
        assert z not in (x, y)
        between = Or((And((LeProc(x, z), LeProc(z, y))), And((LeProc(y, z), LeProc(z, x)))))
        return And(
            (
                Or((LeProc(x, y), LeProc(y, x))),
                Forall(z, implies(between, self.weq(z, x))),
            )
        )

    def sim_msg(self, x: str, y: str) -> FoAst:
        unlabeled = [Not(Or((In(x, yv), In(y, yv)))) for yv in self.yvars.values()]
        return And((Or((Msg(x, y), Msg(y, x))), *unlabeled))

    def edge(self, x: str, y: str) -> FoAst:
        got = self._edge_cache.get((x, y))
        if got is None:
            got = Or((self.sim_proc(x, y), self.sim_msg(x, y)))
            self._edge_cache[(x, y)] = got
        return got

    def sim(self, x: str, y: str) -> FoAst:
        """A witness path of exactly 2n nodes from x to y (stuttering allowed)."""
        got = self._sim_cache.get((x, y))
        if got is not None:
            return got
        vs = self._path
        assert x not in vs and y not in vs
        if not vs:  # n == 1: the path is a single edge
            out = self.edge(x, y)
        else:
            out = self.edge(vs[-1], y)
            for i in range(len(vs) - 1, 0, -1):
                out = Exists(vs[i], And((self.edge(vs[i - 1], vs[i]), out)))
            out = Exists(vs[0], And((self.edge(x, vs[0]), out)))
        self._sim_cache[(x, y)] = out
        return out

    def border(self, x: str, y: str) -> FoAst:
        got = self._border_cache.get((x, y))
        if got is not None:
            return got
        a, b = self._w1, self._w2
        assert x not in (a, b) and y not in (a, b)
        step = Or((Msg(a, b), LtProc(a, b)))
        out = And(
            (
                Not(self.sim(x, y)),
                Exists(a, And((self.sim(x, a), Exists(b, And((self.sim(y, b), step)))))),
            )
        )
        self._border_cache[(x, y)] = out
        return out


def sim_formulas(
    ctx: ClosureContext, wvar: str | None = None, yvars: dict[str, str] | None = None
) -> SimFormulas:
    """Same-factor relation builders over the given (or fresh) W/Y variables."""
    if wvar is None:
        wvar = ctx.fresh("W")
    if yvars is None:
        yvars = ctx.fresh_yvars()
    return SimFormulas(ctx, wvar, yvars)


def relativize_sim(
    psi: FoAst,
    var: str,
    sim: SimFormulas,
    _memo: dict | None = None,
) -> FoAst:
    """Relativize a first-order body to the similarity class of ``var``."""
    memo = _memo if _memo is not None else {}
    got = memo.get(id(psi))
    if got is not None:
        return got
    kind = type(psi)
    if kind is Lbl:
        out: FoAst = Or((psi, In(psi.x, sim.yvars[psi.message])))
    elif kind is Exists:
        out = Exists(psi.var, And((sim.sim(psi.var, var), relativize_sim(psi.sub, var, sim, memo))))
    elif kind is Forall:
        out = Forall(psi.var, implies(sim.sim(psi.var, var), relativize_sim(psi.sub, var, sim, memo)))
    elif kind is Not:
        out = Not(relativize_sim(psi.sub, var, sim, memo))
    elif kind in (And, Or):
        out = kind(tuple(relativize_sim(p, var, sim, memo) for p in psi.parts))
    else:
        out = psi
    memo[id(psi)] = out
    return out


@dataclass(frozen=True)
class IterationFormulas:
    psi: EmsoFormula
    plus: EmsoFormula
    omega: EmsoFormula


def iterate_formula(phi: EmsoFormula, ctx: ClosureContext) -> IterationFormulas:
    """Iteration of a connected language of finite cMSCs.

    ``psi`` defines the union of finite and infinite iterations, ``plus``
    and ``omega`` intersect it with finiteness or its negation.  Callers
    must guarantee that every cMSC in the operand language is connected;
    that hypothesis is what makes the similarity relation transitive.
    """
    w = ctx.fresh("W")
    yvars = ctx.fresh_yvars()
    sf = SimFormulas(ctx, w, yvars)
    x, y, z = ctx.fresh("x"), ctx.fresh("y"), ctx.fresh("z")

    # Y-coherence: Y_m holds matched pairs only, with a unique message.
    psi1_parts = []
    for m, yv in yvars.items():
        partner = Exists(y, And((Or((Msg(x, y), Msg(y, x))), In(y, yv))))
        others = [Not(In(x, y2)) for m2, y2 in yvars.items() if m2 != m]
        psi1_parts.append(Forall(x, implies(In(x, yv), conj([partner] + others))))
    psi1 = conj(psi1_parts) if psi1_parts else TRUE

    # Similar events on one process enclose a single W-block.
    between = And((LeProc(x, z), LeProc(z, y)))
    psi2 = Forall(
        x,
        Forall(
            y,
            implies(
                And((sf.sim(x, y), LeProc(x, y))),
                Forall(z, implies(between, sf.weq(z, x))),
            ),
        ),
    )

    # Matches cross similarity classes exactly when both ends share a Y_m.
    crossing = disj([And((In(x, yv), In(y, yv))) for yv in yvars.values()]) if yvars else FALSE
    psi2p = Forall(x, Forall(y, implies(Msg(x, y), iff(Not(sf.sim(x, y)), crossing))))

    # The border relation between classes is acyclic; cycles longer than 2n
    # can always be shortened, so bounded cycle exclusion suffices.
    cycles = []
    for r in range(1, 2 * ctx.n + 1):
        cs = [ctx.fresh("c") for _ in range(r)]
        inner: FoAst = sf.border(cs[r - 1], cs[0])
        for i in range(r - 1, 0, -1):
            inner = Exists(cs[i], And((sf.border(cs[i - 1], cs[i]), inner)))
        cycles.append(Not(Exists(cs[0], inner)))
    psi3 = conj(cycles)

    # Every similarity class, relabeled through the Y_m sets, satisfies phi.
    it = ctx.fresh("x")
    psi4 = Forall(it, relativize_sim(phi.body, it, sf))

    prefix = (w, *yvars.values(), *phi.prefix)
    core = (psi1, psi2, psi2p, psi3, psi4)
    fin = finite_sentence(ctx).body
    return IterationFormulas(
        psi=EmsoFormula(prefix, And(core)),
        plus=EmsoFormula(prefix, And(core + (fin,))),
        omega=EmsoFormula(prefix, And(core + (Not(fin),))),
    )


def finite_sentence(ctx: ClosureContext) -> EmsoFormula:
    """Finite nonempty cMSCs: one dominating event per process."""
    xs = [ctx.fresh("f") for _ in range(ctx.n)]
    y = ctx.fresh("g")
    return EmsoFormula((), exists_many(xs, Forall(y, disj([Le(y, x) for x in xs]))))
