"""Candidate enumeration: a declarative bias induces a finite rule space,
and programs are yielded in strata of exactly the requested total size.

A stratum of size S contains every canonical program whose rule sizes sum
to S: single rules first, then multisets of 2..max_rules distinct rules
(partitions in increasing order of their smallest part).  Within a rule
pool the order puts rules that use every head variable, more distinct
variables, and more distinct predicates first; the order is deterministic
for a fixed bias.

Constraint filtering happens at yield time.  A candidate is skipped when

* the whole program violates a stored constraint (sound for any program),
* some member rule's singleton is pruned by a generalisation-kind
  constraint (sound for any assembly), or
* the assembly is separable and some member rule's singleton is pruned by
  a specialisation-kind constraint (sound only there: separable coverage
  is the union of member coverages).

Recursive assemblies deliberately skip the last rule: a base case adds
proofs that no constituent has alone, so a specialisation-pruned singleton
can still belong to an optimal recursive program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

from .constrain import ConstraintStore
from .logic import (
    Hypothesis,
    Literal,
    Rule,
    Var,
    canonicalize,
    prog_size,
    rule_variables,
)
from .parsing import ParseError, parse_directives

__all__ = ["Bias", "BiasError", "GeneratorState", "enumerate_rules", "violates"]


class BiasError(ValueError):
    pass


@dataclass
class Bias:
    targets: list
    body_preds: list
    max_vars: int = 5
    max_body: int = 5
    max_rules: int = 2
    allow_recursion: bool = False
    constants: dict = field(default_factory=dict)  # type label -> list of values
    arg_types: dict = field(default_factory=dict)  # (name, arity) -> tuple of labels

    def __post_init__(self):
        if not self.targets:
            raise BiasError("bias declares no head predicate")
        if self.max_body < 1 or self.max_rules < 1:
            raise BiasError("max_body and max_rules must be at least 1")
        if self.max_vars < max(a for _, a in self.targets):
            raise BiasError("max_vars is smaller than the target arity")

    @property
    def max_rule_size(self) -> int:
        return 1 + self.max_body

    @property
    def max_program_size(self) -> int:
        return self.max_rules * self.max_rule_size

    @classmethod
    def from_directives(cls, directives) -> "Bias":
        targets, body_preds = [], []
        kwargs: dict = {}
        constants: dict = {}
        arg_types: dict = {}
        for name, args in directives:
            if name == "head_pred":
                targets.append((args[0], int(args[1])))
            elif name == "body_pred":
                body_preds.append((args[0], int(args[1])))
            elif name == "type":
                pred, types = args
                if isinstance(types, str):
                    types = (types,)
                arg_types[(pred, len(types))] = tuple(types)
            elif name == "constant":
                constants.setdefault(args[0], []).append(args[1])
            elif name in ("max_vars", "max_body", "max_rules"):
                kwargs[name] = int(args[0])
            elif name == "enable_recursion":
                kwargs["allow_recursion"] = True
            else:
                raise BiasError(f"unknown bias directive {name!r}")
        return cls(targets, body_preds, constants=constants,
                   arg_types=arg_types, **kwargs)

    @classmethod
    def from_source(cls, text: str) -> "Bias":
        try:
            return cls.from_directives(parse_directives(text))
        except ParseError as e:
            raise BiasError(str(e)) from e

    def to_source(self) -> str:
        lines = [f"head_pred({n},{a})." for n, a in self.targets]
        lines += [f"body_pred({n},{a})." for n, a in self.body_preds]
        for (n, _a), types in sorted(self.arg_types.items()):
            lines.append(f"type({n},({','.join(types)})).")
        for ty, vals in sorted(self.constants.items()):
            lines += [f"constant({ty},{v})." for v in vals]
        lines.append(f"max_vars({self.max_vars}).")
        lines.append(f"max_body({self.max_body}).")
        lines.append(f"max_rules({self.max_rules}).")
        if self.allow_recursion:
            lines.append("enable_recursion.")
        return "\n".join(lines) + "\n"


def violates(h: Hypothesis, store: ConstraintStore) -> bool:
    """True iff some stored constraint prunes ``h``."""
    return store.violates(h, prog_size(h))


# ---------------------------------------------------------------------------
# Rule enumeration
# ---------------------------------------------------------------------------

def literal_templates(bias: Bias) -> list:
    """Body literal candidates over variables 0..max_vars-1; constants
    appear only at positions whose declared type has declared constants."""
    vars_ = [Var(i) for i in range(bias.max_vars)]
    preds = list(bias.body_preds)
    if bias.allow_recursion:
        preds += [t for t in bias.targets if t not in preds]
    out = []
    for name, arity in preds:
        types = bias.arg_types.get((name, arity), (None,) * arity)
        per_pos = []
        for ty in types:
            cands: list = list(vars_)
            if ty is not None:
                cands += list(bias.constants.get(ty, ()))
            per_pos.append(cands)
        for args in product(*per_pos):
            if not any(isinstance(a, Var) for a in args):
                continue
            out.append(Literal(name, tuple(args)))
    return out


def _head_connected(head: Literal, body) -> bool:
    reached = {a for a in head.args if isinstance(a, Var)}
    pending = list(body)
    while pending:
        progressed = False
        rest = []
        for lit in pending:
            vs = {a for a in lit.args if isinstance(a, Var)}
            if vs & reached:
                reached |= vs
                progressed = True
            else:
                rest.append(lit)
        if not progressed:
            return False
        pending = rest
    return True


def _types_consistent(bias: Bias, head: Literal, body) -> bool:
    seen: dict = {}
    for lit in (head, *body):
        types = bias.arg_types.get((lit.pred, len(lit.args)))
        if types is None:
            continue
        for a, ty in zip(lit.args, types):
            if not isinstance(a, Var):
                continue
            prev = seen.setdefault(a, ty)
            if prev != ty:
                return False
    return True


def _pool_order_key(bias: Bias, rule: Rule):
    # likely-useful rules first: no variable occurring just once, every head
    # variable used in the body, many distinct predicates; purely an
    # iteration order, the stratum content is unaffected
    from .logic import format_rule

    occur: dict = {}
    for lit in (rule.head, *rule.body):
        for a in lit.args:
            if isinstance(a, Var):
                occur[a] = occur.get(a, 0) + 1
    singletons = sum(1 for n in occur.values() if n == 1)
    head_vars = {a for a in rule.head.args if isinstance(a, Var)}
    body_vars = {a for b in rule.body for a in b.args if isinstance(a, Var)}
    preds = {b.pred for b in rule.body}
    return (
        singletons,
        0 if head_vars <= body_vars else 1,
        -len(preds),
        format_rule(rule),
    )


def enumerate_rules(bias: Bias, rule_size: int) -> list:
    """Every canonical rule of exactly ``rule_size`` literals admitted by the
    bias: target head with distinct fresh variables, head-connected body
    without duplicate literals, at most max_vars variables, type-consistent,
    and no body literal equal to the head.  Deterministically ordered."""
    k = rule_size - 1
    if k < 1 or k > bias.max_body:
        return []
    templates = literal_templates(bias)
    out = []
    seen = set()
    for name, arity in bias.targets:
        if arity > bias.max_vars:
            raise BiasError(f"target {name}/{arity} exceeds max_vars")
        head = Literal(name, tuple(Var(i) for i in range(arity)))
        for combo in combinations(templates, k):
            if head in combo:
                continue
            if not _head_connected(head, combo):
                continue
            if not _types_consistent(bias, head, combo):
                continue
            rule = canonicalize(Rule(head, frozenset(combo)))
            if len(rule.body) != k or rule in seen:
                continue
            seen.add(rule)
            out.append(rule)
    out.sort(key=lambda r: _pool_order_key(bias, r))
    return out


def _index_combos(n: int, m: int, s: int, start: int = 0):
    """Strictly increasing m-tuples from range(start, n) with index sum s."""
    if m == 0:
        if s == 0:
            yield ()
        return
    lo = m * start + m * (m - 1) // 2
    if s < lo:
        return
    for i in range(start, n - m + 1):
        rest_lo = (m - 1) * (i + 1) + (m - 1) * (m - 2) // 2
        if s - i < rest_lo:
            break
        for rest in _index_combos(n, m - 1, s - i, i + 1):
            yield (i, *rest)


def _diagonal_picks(groups):
    """Index selections across pools in increasing order of total index sum,
    so well-ranked rules pair up early.  ``groups`` is a list of (pool
    length, multiplicity); each selection is one strictly-increasing index
    tuple per group.  Exhaustive: every selection appears exactly once."""
    lo = sum(m * (m - 1) // 2 for _, m in groups)
    hi = sum(m * (2 * n - m - 1) // 2 for n, m in groups)

    def rec(gi: int, s: int):
        if gi == len(groups):
            if s == 0:
                yield ()
            return
        n, m = groups[gi]
        g_lo = m * (m - 1) // 2
        g_hi = m * (2 * n - m - 1) // 2
        for sg in range(g_lo, min(s, g_hi) + 1):
            tail_lo = sum(mm * (mm - 1) // 2 for _, mm in groups[gi + 1:])
            tail_hi = sum(mm * (2 * nn - mm - 1) // 2
                          for nn, mm in groups[gi + 1:])
            if not tail_lo <= s - sg <= tail_hi:
                continue
            for combo in _index_combos(n, m, sg):
                for rest in rec(gi + 1, s - sg):
                    yield (combo, *rest)

    for s in range(lo, hi + 1):
        yield from rec(0, s)


def _partitions(total: int, max_rules: int, min_size: int, max_size: int):
    """Rule-size partitions of ``total`` as non-decreasing tuples, singles
    first, then multi-rule partitions by first part ascending."""
    res = []

    def rec(remaining, parts, lo):
        if remaining == 0:
            if parts:
                res.append(tuple(parts))
            return
        if len(parts) == max_rules:
            return
        for s in range(lo, min(remaining, max_size) + 1):
            if remaining - s != 0 and remaining - s < s:
                continue
            parts.append(s)
            rec(remaining - s, parts, s)
            parts.pop()

    rec(total, [], min_size)
    res.sort(key=lambda p: (len(p), p))
    return res


class GeneratorState:
    """Iterates the program space stratum by stratum, skipping hypotheses
    pruned by the constraint store at yield time.  The store may grow
    between yields; pruned-singleton flags are sticky and re-checked
    incrementally as constraints arrive."""

    def __init__(self, bias: Bias, store: ConstraintStore,
                 deadline_check=None, prune_hook=None):
        self.bias = bias
        self.store = store
        self.deadline_check = deadline_check
        self.prune_hook = prune_hook
        self._pools: dict = {}
        self._flags: dict = {}  # Rule -> [spec, gen, watermark]
        self._iter = None
        self._iter_size = None
        self.candidates_seen = 0
        self.candidates_pruned = 0

    def pool(self, rule_sz: int):
        pool = self._pools.get(rule_sz)
        if pool is None:
            pool = enumerate_rules(self.bias, rule_sz)
            self._pools[rule_sz] = pool
        return pool

    def _rule_flags(self, rule: Rule):
        entry = self._flags.get(rule)
        store_len = len(self.store._records)
        if entry is None:
            entry = [False, False, -1]
            self._flags[rule] = entry
        if (not entry[0] or not entry[1]) and entry[2] != store_len:
            spec, gen = self.store.singleton_pruned(rule)
            entry[0] = entry[0] or spec
            entry[1] = entry[1] or gen
            entry[2] = store_len
        return entry

    def next_program(self, size: int):
        """Next unseen consistent hypothesis of total size exactly ``size``,
        or None when the stratum is exhausted."""
        if self._iter_size != size:
            self._iter = self._stratum(size)
            self._iter_size = size
        return next(self._iter, None)

    def _stratum(self, size: int):
        bias = self.bias
        targets = set(bias.targets)
        for parts in _partitions(size, bias.max_rules, 2, bias.max_rule_size):
            groups: list = []
            ok = True
            last = None
            for s in parts:
                if last is not None and s == last[0]:
                    last[1] += 1
                else:
                    last = [s, 1]
                    groups.append(last)
            pools = []
            for s, mult in groups:
                p = self.pool(s)
                if len(p) < mult:
                    ok = False
                    break
                pools.append((p, mult))
            if not ok:
                continue
            for pick in _diagonal_picks([(len(p), m) for p, m in pools]):
                self.candidates_seen += 1
                if self.deadline_check is not None and \
                        self.candidates_seen % 1024 == 0:
                    self.deadline_check()
                rules = tuple(
                    pools[g][0][i]
                    for g, idxs in enumerate(pick)
                    for i in idxs
                )
                h = self._filter(rules, size, targets)
                if h is not None:
                    yield h

    def _filter(self, rules, size, targets):
        recursive = any(
            (b.pred, b.arity) in targets for r in rules for b in r.body
        )
        if len(rules) == 1:
            flags = self._rule_flags(rules[0])
            if flags[0] or flags[1]:
                self._note_pruned(rules)
                return None
            return frozenset(rules)
        separable = not recursive
        for r in rules:
            flags = self._rule_flags(r)
            if flags[1] or (separable and flags[0]):
                self._note_pruned(rules)
                return None
        if self.store.violates(rules, size):
            self._note_pruned(rules)
            return None
        return frozenset(rules)

    def _note_pruned(self, rules):
        self.candidates_pruned += 1
        if self.prune_hook is not None:
            self.prune_hook(frozenset(rules))
