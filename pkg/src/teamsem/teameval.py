"""The lax team-semantics evaluator.

Satisfaction rules, on a structure M and a team X:

  * literal:   every row satisfies it Tarski-style
  * p & q:     both hold on X
  * p | q:     some cover X = X1 u X2 (rows may go to both sides) with
               X1 |= p and X2 |= q
  * p <|> q:   p or q holds on the whole team
  * g ->> p:   p holds on the subteam of rows satisfying the guard g
  * exists v:  some team Y agreeing with X off v, obtained by giving every
               off-v projection a nonempty set of witness values, satisfies
               the body
  * forall v:  the full extension X[M/v] satisfies the body
  * dependency atoms: set algebra on projections, or membership of
               (M, X(v)) in a registered dependency class

Three interchangeable strategies compute the same boolean wherever they
terminate within budget:

  * naive:     literal rule-by-rule search, covers and witness-set products
               in full; the reference implementation
  * memoized:  adds a cache keyed on (subformula, canonical team) and
               restricts disjunction covers to partitions when both sides
               are syntactically downward closed
  * optimized: adds flat-formula fast paths, joint handling of consecutive
               existentials, equality-guard symmetry reduction for witness
               values, and search pruning through downward-closed conjuncts

Evaluation of independent branch obligations is sequential here; verdicts
are deterministic because every enumeration runs in canonical order.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .dependencies import Dependency, Registry, dep_holds
from .errors import BudgetExceededError, DependencyLookupError, DomainError
from .structures import Structure, Team, extend_universal, team_projection
from .syntax import (AnonAtom, And, ConstAtom, ConstSym, DepAtom, Eq, Exists,
                     Forall, Formula, GlobalOr, Hook, IncAtom, IndAtom,
                     NamedDep, NeAtom, Or, RelAtom, Var, conjuncts,
                     free_vars, validate_team_formula)
from .tarski import tarski_eval

STRATEGIES = ("naive", "memoized", "optimized")

DEFAULT_BUDGET = 50_000_000

_LITERALS = (RelAtom, Eq)
_BUILTIN_ATOMS = (DepAtom, ConstAtom, IncAtom, IndAtom, AnonAtom, NeAtom)


def _nonempty_subsets(items: Sequence) -> Iterable[tuple]:
    """All nonempty subsets, smallest first, in a fixed order."""
    for k in range(1, len(items) + 1):
        yield from itertools.combinations(items, k)


class Evaluator:
    """Evaluation context: one structure, one registry, shared caches.

    A fresh context per call gives the per-call cache the memoized strategy
    documents; reusing one context across calls on the same structure
    legitimately shares the cache (results are identical, evaluation is
    deterministic and side-effect free).
    """

    def __init__(self, structure: Structure, registry: Registry | None = None,
                 strategy: str = "memoized", budget: int | None = DEFAULT_BUDGET,
                 symmetry_reduction: bool | None = None):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; pick from {STRATEGIES}")
        self.structure = structure
        self.registry = registry
        self.strategy = strategy
        self.budget = budget
        if symmetry_reduction is None:
            symmetry_reduction = strategy == "optimized"
        self.symmetry = symmetry_reduction
        self.nodes = 0
        self._memo: dict = {}
        self._flat: dict[int, bool] = {}
        self._dc: dict[int, bool] = {}
        self._rowcache: dict = {}
        self._validated: set[int] = set()
        self._pins: list[Formula] = []  # keep node ids stable across calls

    # -- public entry --

    def eval(self, team: Team, phi: Formula) -> bool:
        if id(phi) not in self._validated:
            validate_team_formula(phi)
            self._pins.append(phi)
            self._validated.add(id(phi))
        loose = free_vars(phi) - set(team.vars)
        if loose:
            raise DomainError(f"free variables {sorted(loose)} outside the "
                              f"team domain {team.vars}")
        return self._eval(team, phi)

    # -- plumbing --

    def _tick(self):
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceededError(
                f"node budget of {self.budget} exhausted")

    def _team(self, svars: tuple[str, ...], rows: Iterable[tuple]) -> Team:
        t = Team(svars)
        object.__setattr__(t, "rows", frozenset(rows))
        return t

    # -- closure analysis --

    def is_flat(self, phi: Formula) -> bool:
        """Dependency-atom-free and built from flat-preserving connectives;
        such formulas hold on a team exactly when they hold on each row."""
        got = self._flat.get(id(phi))
        if got is None:
            got = self._flat_walk(phi)
            self._flat[id(phi)] = got
        return got

    def _flat_walk(self, phi: Formula) -> bool:
        if isinstance(phi, _LITERALS):
            return True
        if isinstance(phi, (And, Or)):
            return self.is_flat(phi.left) and self.is_flat(phi.right)
        if isinstance(phi, (Exists, Forall)):
            return self.is_flat(phi.body)
        if isinstance(phi, Hook):
            return self.is_flat(phi.guard) and self.is_flat(phi.body)
        return False

    def is_downward_closed(self, phi: Formula) -> bool:
        """Syntactic certificate that satisfaction passes to subteams."""
        got = self._dc.get(id(phi))
        if got is None:
            got = self._dc_walk(phi)
            self._dc[id(phi)] = got
        return got

    def _dc_walk(self, phi: Formula) -> bool:
        if isinstance(phi, _LITERALS + (DepAtom, ConstAtom)):
            return True
        if isinstance(phi, NamedDep):
            if self.registry is None or phi.dep_name not in self.registry:
                return False
            return self.registry.get(phi.dep_name).downward_closed
        if isinstance(phi, (And, Or, GlobalOr)):
            return self.is_downward_closed(phi.left) and self.is_downward_closed(phi.right)
        if isinstance(phi, (Exists, Forall)):
            return self.is_downward_closed(phi.body)
        if isinstance(phi, Hook):
            # Rows dropped from the team only shrink the guarded subteam.
            return self.is_downward_closed(phi.body)
        return False

    # -- dispatch --

    def _eval(self, team: Team, phi: Formula) -> bool:
        self._tick()
        use_memo = self.strategy != "naive"
        if use_memo:
            key = (id(phi), team.canonical_key)
            got = self._memo.get(key)
            if got is not None:
                return got
        result = self._eval_inner(team, phi)
        if use_memo:
            self._memo[key] = result
        return result

    def _eval_inner(self, team: Team, phi: Formula) -> bool:
        if self.strategy == "optimized" and self.is_flat(phi):
            return all(self._singleton(team.vars, row, phi)
                       for row in sorted(team.rows))
        if isinstance(phi, _LITERALS):
            m = self.structure
            return all(tarski_eval(m, dict(zip(team.vars, row)), phi)
                       for row in team.rows)
        if isinstance(phi, And):
            return self._eval(team, phi.left) and self._eval(team, phi.right)
        if isinstance(phi, Or):
            return self._eval_or(team, phi)
        if isinstance(phi, GlobalOr):
            return self._eval(team, phi.left) or self._eval(team, phi.right)
        if isinstance(phi, Hook):
            return self._eval(self._restrict(team, phi.guard), phi.body)
        if isinstance(phi, Forall):
            return self._eval(extend_universal(team, phi.var, self.structure),
                              phi.body)
        if isinstance(phi, Exists):
            return self._eval_exists(team, phi)
        if isinstance(phi, _BUILTIN_ATOMS):
            return eval_builtin_atom(self.structure, team, phi)
        if isinstance(phi, NamedDep):
            if self.registry is None:
                raise DependencyLookupError(
                    f"no registry supplied for dependency {phi.dep_name!r}")
            dep = self.registry.get(phi.dep_name)
            return eval_dep_atom(self.structure, team, dep, phi.vars)
        raise TypeError(f"not a team formula: {phi!r}")

    def _restrict(self, team: Team, guard: Formula) -> Team:
        m = self.structure
        keep = [row for row in team.rows
                if tarski_eval(m, dict(zip(team.vars, row)), guard)]
        return team.with_rows(keep)

    # -- single-row evaluation of flat formulas --
    #
    # On a one-row team the lax rules specialize to a Tarskian recursion:
    # a cover of {r} can park the row on either side because flat formulas
    # hold on the empty team, and a downward-closed existential body never
    # needs a witness set larger than a singleton.

    def _singleton(self, svars: tuple[str, ...], row: tuple, phi: Formula) -> bool:
        key = (id(phi), svars, row)
        got = self._rowcache.get(key)
        if got is not None:
            return got
        self._tick()
        result = self._singleton_inner(svars, row, phi)
        self._rowcache[key] = result
        return result

    def _singleton_inner(self, svars, row, phi) -> bool:
        if isinstance(phi, _LITERALS):
            return tarski_eval(self.structure, dict(zip(svars, row)), phi)
        if isinstance(phi, And):
            return (self._singleton(svars, row, phi.left)
                    and self._singleton(svars, row, phi.right))
        if isinstance(phi, Or):
            return (self._singleton(svars, row, phi.left)
                    or self._singleton(svars, row, phi.right))
        if isinstance(phi, Hook):
            if not tarski_eval(self.structure, dict(zip(svars, row)), phi.guard):
                return True
            return self._singleton(svars, row, phi.body)
        if isinstance(phi, (Exists, Forall)):
            nvars, at = _insert_var(svars, phi.var)
            if len(nvars) == len(svars):
                rows = [row[:at] + (m,) + row[at + 1:] for m in self.structure.domain]
            else:
                rows = [row[:at] + (m,) + row[at:] for m in self.structure.domain]
            if isinstance(phi, Exists):
                return any(self._singleton(nvars, r, phi.body) for r in rows)
            return all(self._singleton(nvars, r, phi.body) for r in rows)
        raise TypeError(f"not a flat formula: {phi!r}")

    # -- lax disjunction --

    def _eval_or(self, team: Team, phi: Or) -> bool:
        left, right = phi.left, phi.right
        rows = sorted(team.rows)
        if self.strategy == "optimized":
            lflat, rflat = self.is_flat(left), self.is_flat(right)
            if lflat or rflat:
                flat_side, other = (left, right) if lflat else (right, left)
                sat = [r for r in rows
                       if self._singleton(team.vars, r, flat_side)]
                core = [r for r in rows
                        if not self._singleton(team.vars, r, flat_side)]
                # Valid covers pin the non-flat side to a superset of the
                # rows the flat side cannot absorb.
                if self.is_downward_closed(other):
                    extras: Iterable[tuple] = ((),)
                else:
                    extras = itertools.chain(((),), _nonempty_subsets(sat))
                for extra in extras:
                    self._tick()
                    if self._eval(self._team(team.vars, set(core) | set(extra)),
                                  other):
                        return True
                return False
        if (self.strategy in ("memoized", "optimized")
                and self.is_downward_closed(left)
                and self.is_downward_closed(right)):
            # A working cover yields a working partition by shrinking one side.
            for mask in range(1 << len(rows)):
                self._tick()
                left_rows = {rows[i] for i in range(len(rows)) if mask >> i & 1}
                if not self._eval(self._team(team.vars, left_rows), left):
                    continue
                if self._eval(self._team(team.vars, team.rows - left_rows), right):
                    return True
            return False
        # General covers: each row goes left, right, or to both sides.
        for assignment in itertools.product((0, 1, 2), repeat=len(rows)):
            self._tick()
            left_rows = {r for r, a in zip(rows, assignment) if a != 1}
            right_rows = {r for r, a in zip(rows, assignment) if a != 0}
            if (self._eval(self._team(team.vars, left_rows), left)
                    and self._eval(self._team(team.vars, right_rows), right)):
                return True
        return False

    # -- lax existential --

    def _eval_exists(self, team: Team, phi: Exists) -> bool:
        block = [phi.var]
        body = phi.body
        use_blocks = self.strategy == "optimized" or (
            self.strategy == "naive" and self.symmetry)
        if use_blocks:
            while isinstance(body, Exists):
                block.append(body.var)
                body = body.body
        if len(block) == 1 and not use_blocks:
            return self._exists_single(team, block[0], body)
        return self._exists_block(team, tuple(block), body)

    def _witness_pool(self, block: Sequence[str],
                      body: Formula) -> tuple[dict[str, list], frozenset[str]]:
        """Per-variable candidate values, symmetry-reduced when sound.

        A block variable whose every occurrence sits in an (in)equality
        against a constant symbol or another such variable never interacts
        with relations, dependency atoms, or outside variables, so its
        value matters only through its equality pattern against the
        structure's constants and its fellow reduced variables.  Witness
        values for those variables can be drawn from the constant elements
        plus one fresh representative per reduced variable; every witness
        family collapses onto that pool without changing any such pattern.
        """
        domain = list(self.structure.domain)
        pools = {v: domain for v in block}
        if not self.symmetry:
            return pools, frozenset()
        reduced = _equality_guarded_vars(block, body)
        if reduced:
            consts = sorted(set(self.structure.constants.values()))
            fresh = [e for e in domain if e not in set(consts)][:len(reduced)]
            pool = consts + fresh
            for v in reduced:
                pools[v] = pool
        return pools, reduced

    def _exists_single(self, team: Team, var: str, body: Formula) -> bool:
        # Teams agreeing with X off v are exactly those assigning every
        # off-v projection of X a nonempty set of witness values: both have
        # the same off-v projection, and the rows of such a Y are
        # determined by the value sets it realizes on each projection row.
        # Assignments differing only on v merge before re-extension.
        keep = tuple(v for v in team.vars if v != var)
        keep_idx = [team.vars.index(v) for v in keep]
        keys = sorted({tuple(row[i] for i in keep_idx) for row in team.rows})
        nvars, at = _insert_var(keep, var)
        if not keys:
            return self._eval(self._team(nvars, ()), body)
        choices = list(_nonempty_subsets(self.structure.domain))
        for family in itertools.product(choices, repeat=len(keys)):
            self._tick()
            rows = {key[:at] + (m,) + key[at:]
                    for key, chosen in zip(keys, family) for m in chosen}
            if self._eval(self._team(nvars, rows), body):
                return True
        return False

    def _exists_block(self, team: Team, block: tuple[str, ...], body: Formula) -> bool:
        keep = tuple(v for v in team.vars if v not in set(block))
        keep_idx = [team.vars.index(v) for v in keep]
        keys = sorted({tuple(row[i] for i in keep_idx) for row in team.rows})
        nvars = tuple(sorted(set(keep) | set(block)))
        build = _row_builder(keep, block, nvars)
        pools, reduced = self._witness_pool(block, body)
        tuples = _candidate_tuples(block, pools, reduced,
                                   set(self.structure.constants.values()))
        if not keys:
            return self._eval(self._team(nvars, ()), body)
        parts = conjuncts(body) if self.strategy == "optimized" else [body]
        flat_parts = [p for p in parts if self.is_flat(p)]
        rest = [p for p in parts if not self.is_flat(p)]
        if self.strategy == "optimized" and flat_parts:
            allowed = []
            for key in keys:
                ok = [t for t in tuples
                      if all(self._singleton(nvars, build(key, t), p)
                             for p in flat_parts)]
                if not ok:
                    return False
                allowed.append(ok)
        else:
            allowed = [list(tuples) for _ in keys]
            rest = parts
        if not rest:
            return True  # pick any witness tuple per projection row
        prunable = [p for p in rest if self.is_downward_closed(p)] \
            if self.strategy == "optimized" else []
        # Most-constrained projection rows first; pruning bites earlier.
        order = sorted(range(len(keys)), key=lambda i: (len(allowed[i]), keys[i]))
        chosen_rows: list[set] = [set() for _ in keys]

        def search(depth: int) -> bool:
            if depth == len(keys):
                final = self._team(nvars, set().union(*chosen_rows) if keys else set())
                return all(self._eval(final, p) for p in rest)
            i = order[depth]
            for subset in _nonempty_subsets(allowed[i]):
                self._tick()
                chosen_rows[i] = {build(keys[i], t) for t in subset}
                if prunable:
                    partial = self._team(
                        nvars, set().union(*(chosen_rows[order[d]]
                                             for d in range(depth + 1))))
                    if not all(self._eval(partial, p) for p in prunable):
                        continue
                if search(depth + 1):
                    return True
            chosen_rows[i] = set()
            return False

        return search(0)


def _insert_var(svars: tuple[str, ...], var: str) -> tuple[tuple[str, ...], int]:
    """Sorted var tuple with var added (or found), and its index."""
    if var in svars:
        return svars, svars.index(var)
    out = tuple(sorted(svars + (var,)))
    return out, out.index(var)


def _row_builder(keep: tuple[str, ...], block: tuple[str, ...],
                 nvars: tuple[str, ...]):
    source = {}
    for i, v in enumerate(keep):
        source[v] = ("k", i)
    for i, v in enumerate(block):
        source[v] = ("b", i)  # later binding wins for repeated names
    plan = [source[v] for v in nvars]

    def build(key: tuple, values: tuple) -> tuple:
        return tuple(key[i] if kind == "k" else values[i] for kind, i in plan)

    return build


def _equality_guarded_vars(block: Sequence[str], body: Formula) -> frozenset[str]:
    """Block variables whose free occurrences all sit in (in)equalities
    against constant symbols or other such variables."""
    good = set(block)

    def offending(phi: Formula, shadowed: frozenset) -> set[str]:
        bad: set[str] = set()
        if isinstance(phi, Eq):
            sides = (phi.left, phi.right)
            names = [t.name for t in sides
                     if isinstance(t, Var) and t.name not in shadowed]
            mine = [n for n in names if n in good]
            if mine:
                for t in sides:
                    if isinstance(t, ConstSym):
                        continue
                    name = t.name
                    if name in shadowed or name not in good:
                        bad.update(mine)  # ties a reduced var to an outsider
            return bad
        if isinstance(phi, RelAtom):
            return {t.name for t in phi.terms
                    if isinstance(t, Var) and t.name not in shadowed and t.name in good}
        if isinstance(phi, (DepAtom, ConstAtom, IncAtom, IndAtom, AnonAtom,
                            NeAtom, NamedDep)):
            return {v for v in free_vars(phi) if v not in shadowed and v in good}
        if isinstance(phi, (And, Or, GlobalOr)):
            return offending(phi.left, shadowed) | offending(phi.right, shadowed)
        if isinstance(phi, Hook):
            return offending(phi.guard, shadowed) | offending(phi.body, shadowed)
        if isinstance(phi, (Exists, Forall)):
            return offending(phi.body, shadowed | {phi.var})
        return set()

    while True:
        bad = offending(body, frozenset())
        if not bad:
            return frozenset(good)
        good -= bad
        if not good:
            return frozenset()


def _candidate_tuples(block: tuple[str, ...], pools: dict[str, list],
                      reduced: frozenset[str], const_elems: set) -> list[tuple]:
    """Value tuples for a quantifier block.

    Fresh representative values of reduced variables must make their first
    appearance in pool order within each tuple: two tuples realizing the
    same equality pattern over the reduced positions are interchangeable,
    so only the pattern-canonical one is kept.  Values of non-reduced
    positions are meaningful and never canonicalized.
    """
    fresh_order: list = []
    for v in block:
        if v in reduced:
            fresh_order = [x for x in pools[v] if x not in const_elems]
            break
    out = []
    for t in itertools.product(*(pools[v] for v in block)):
        firsts: list = []
        for v, value in zip(block, t):
            if v in reduced and value not in const_elems and value not in firsts:
                firsts.append(value)
        if firsts == fresh_order[:len(firsts)]:
            out.append(t)
    return out


# --- Builtin atom semantics (exact set algebra on projections) ---

def eval_builtin_atom(structure: Structure, team: Team, atom: Formula) -> bool:
    if isinstance(atom, DepAtom):
        det = [team.index_of(v) for v in atom.determinants]
        dep = [team.index_of(v) for v in atom.dependents]
        seen: dict[tuple, tuple] = {}
        for row in team.rows:
            key = tuple(row[i] for i in det)
            val = tuple(row[i] for i in dep)
            if seen.setdefault(key, val) != val:
                return False
        return True
    if isinstance(atom, ConstAtom):
        return len(team_projection(team, atom.vars)) <= 1
    if isinstance(atom, IncAtom):
        return team_projection(team, atom.left) <= team_projection(team, atom.right)
    if isinstance(atom, IndAtom):
        left = team_projection(team, atom.left)
        right = team_projection(team, atom.right)
        return team_projection(team, atom.left + atom.right) == \
            {a + b for a in left for b in right}
    if isinstance(atom, AnonAtom):
        groups: dict[tuple, set] = {}
        li = [team.index_of(v) for v in atom.left]
        ri = [team.index_of(v) for v in atom.right]
        for row in team.rows:
            groups.setdefault(tuple(row[i] for i in li), set()).add(
                tuple(row[i] for i in ri))
        return all(len(vals) >= 2 for vals in groups.values())
    if isinstance(atom, NeAtom):
        return len(team_projection(team, atom.vars)) > 0
    raise TypeError(f"not a builtin atom: {atom!r}")


def eval_dep_atom(structure: Structure, team: Team, dep: Dependency,
                  variables: Sequence[str]) -> bool:
    """Membership of (M, X(v)) in the dependency's class."""
    if len(variables) != dep.arity:
        raise DomainError(f"dependency {dep.name} has arity {dep.arity}, "
                          f"applied to {len(variables)} variables")
    return dep_holds(dep, structure.domain, team_projection(team, variables))


# --- Public entry points ---

def team_eval(structure: Structure, team: Team, phi: Formula,
              strategy: str = "memoized", registry: Registry | None = None,
              budget: int | None = DEFAULT_BUDGET,
              symmetry_reduction: bool | None = None) -> bool:
    """Evaluate with a fresh per-call context."""
    ev = Evaluator(structure, registry, strategy, budget, symmetry_reduction)
    return ev.eval(team, phi)


def eval_sentence(structure: Structure, phi: Formula,
                  strategy: str = "memoized", registry: Registry | None = None,
                  budget: int | None = DEFAULT_BUDGET,
                  symmetry_reduction: bool | None = None) -> bool:
    """Sentence satisfaction: evaluation on the one-empty-assignment team."""
    start = Team((), [()])
    return team_eval(structure, start, phi, strategy, registry, budget,
                     symmetry_reduction)
