"""Entailment testing: does background knowledge plus a hypothesis derive an
example?

The decision procedure is top-down SLD-style resolution with:

* destructive variable bindings undone through a trail,
* memoization of ground calls (successes globally, failures per remaining
  depth),
* an iterative-deepening depth bound and a per-example inference-step budget
  (exhaustion counts as non-coverage and is tallied, never raised to the
  caller),
* built-in list/arithmetic predicates registered by name and arity.  A
  built-in invoked with insufficiently instantiated arguments is deferred
  until other goals have bound more variables; if no goal can run, the
  branch fails.

Separable multi-rule programs are evaluated one rule at a time and their
coverages OR-ed, which is exact because no rule can feed another (no head
predicate occurs in any body, and background clauses never call hypothesis
heads).  Coverage of a non-separable program is seeded with the union of its
members' cached solo coverages, which is a sound lower bound; only the
remaining examples are evaluated against the full program.
"""

from __future__ import annotations

from dataclasses import dataclass

from .logic import Hypothesis, Literal, Rule, Var, is_recursive, prog_size

__all__ = [
    "EngineError",
    "EvalBudget",
    "ExampleSet",
    "Coverage",
    "BackgroundKnowledge",
    "Evaluator",
    "mdl_cost",
    "DEFAULT_BUILTINS",
]


class EngineError(ValueError):
    """A malformed query: unknown predicate or wrong arity."""


@dataclass(frozen=True)
class EvalBudget:
    max_depth: int = 30
    max_steps: int = 1_000_000

    def depth_schedule(self):
        if self.max_depth > 8:
            return (8, self.max_depth)
        return (self.max_depth,)


@dataclass(frozen=True)
class ExampleSet:
    pos: tuple
    neg: tuple

    def __post_init__(self):
        overlap = set(self.pos) & set(self.neg)
        if overlap:
            raise ValueError(f"examples appear with both labels: {sorted(map(repr, overlap))[:3]}")

    @property
    def num_pos(self) -> int:
        return len(self.pos)

    @property
    def num_neg(self) -> int:
        return len(self.neg)

    def __len__(self) -> int:
        return len(self.pos) + len(self.neg)


@dataclass(frozen=True)
class Coverage:
    """Bitsets over example ids; bit i set means example i is entailed."""

    pos_mask: int
    neg_mask: int
    num_pos: int
    num_neg: int

    @property
    def tp(self) -> int:
        return self.pos_mask.bit_count()

    @property
    def fn(self) -> int:
        return self.num_pos - self.tp

    @property
    def fp(self) -> int:
        return self.neg_mask.bit_count()

    @property
    def tn(self) -> int:
        return self.num_neg - self.fp


def mdl_cost(h: Hypothesis, cov: Coverage) -> int:
    """size(h) + fn + fp: the description length of h plus its exceptions."""
    return prog_size(h) + cov.fn + cov.fp


# ---------------------------------------------------------------------------
# Built-ins
# ---------------------------------------------------------------------------
# A built-in takes the walked argument tuple and returns None when the
# arguments are insufficiently instantiated (the goal is deferred), or a list
# of ground solution tuples to unify against the call (empty list = failure).


class _FVar:
    __slots__ = ("ref",)

    def __init__(self):
        self.ref = None

    def __repr__(self):  # pragma: no cover - debug aid
        return f"_{id(self) & 0xFFFF:x}"


def _bi_head(args):
    l, _x = args
    if isinstance(l, _FVar):
        return None
    if isinstance(l, tuple) and l:
        return [(l, l[0])]
    return []


def _bi_tail(args):
    l, _x = args
    if isinstance(l, _FVar):
        return None
    if isinstance(l, tuple) and l:
        return [(l, l[1:])]
    return []


def _bi_empty(args):
    (l,) = args
    if isinstance(l, _FVar):
        return [((),)]
    return [((),)] if l == () else []


def _bi_even(args):
    (x,) = args
    if isinstance(x, _FVar):
        return None
    return [(x,)] if isinstance(x, int) and x % 2 == 0 else []


def _bi_odd(args):
    (x,) = args
    if isinstance(x, _FVar):
        return None
    return [(x,)] if isinstance(x, int) and x % 2 == 1 else []


def _bi_one(args):
    (x,) = args
    if isinstance(x, _FVar):
        return [(1,)]
    return [(1,)] if x == 1 else []


def _bi_zero(args):
    (x,) = args
    if isinstance(x, _FVar):
        return [(0,)]
    return [(0,)] if x == 0 else []


def _bi_decrement(args):
    a, b = args
    if isinstance(a, int):
        return [(a, a - 1)]
    if isinstance(b, int):
        return [(b + 1, b)]
    return None


def _bi_succ(args):
    a, b = args
    if isinstance(a, int):
        return [(a, a + 1)]
    if isinstance(b, int):
        return [(b - 1, b)]
    return None


def _bi_geq(args):
    a, b = args
    if isinstance(a, _FVar) or isinstance(b, _FVar):
        return None
    if isinstance(a, int) and isinstance(b, int):
        return [(a, b)] if a >= b else []
    return []


def _bi_append(args):
    # append(Front, Elem, Out): Out is Front with Elem appended.
    front, elem, out = args
    if isinstance(front, tuple) and not isinstance(elem, _FVar):
        return [(front, elem, front + (elem,))]
    if isinstance(out, tuple):
        if not out:
            return []
        return [(out[:-1], out[-1], out)]
    return None


DEFAULT_BUILTINS = {
    ("head", 2): _bi_head,
    ("tail", 2): _bi_tail,
    ("empty", 1): _bi_empty,
    ("empty_out", 1): _bi_empty,
    ("even", 1): _bi_even,
    ("odd", 1): _bi_odd,
    ("one", 1): _bi_one,
    ("zero", 1): _bi_zero,
    ("decrement", 2): _bi_decrement,
    ("succ", 2): _bi_succ,
    ("geq", 2): _bi_geq,
    ("append", 3): _bi_append,
}


# ---------------------------------------------------------------------------
# Background knowledge
# ---------------------------------------------------------------------------

class BackgroundKnowledge:
    """Ground facts, definite rules, and registered built-ins.

    A predicate defined by facts or rules shadows a built-in of the same
    name and arity."""

    def __init__(self, facts=(), rules=(), builtins=None):
        self.facts = list(facts)
        self.rules = list(rules)
        self.builtins = dict(DEFAULT_BUILTINS if builtins is None else builtins)
        self._facts_by_pred: dict = {}
        self._facts_by_first: dict = {}
        self._fact_sets: dict = {}
        self._rules_by_pred: dict = {}
        for f in self.facts:
            key = (f.pred, len(f.args))
            self._facts_by_pred.setdefault(key, []).append(f.args)
            self._fact_sets.setdefault(key, set()).add(f.args)
            if f.args:
                self._facts_by_first.setdefault((key, f.args[0]), []).append(f.args)
        for r in self.rules:
            key = (r.head.pred, len(r.head.args))
            self._rules_by_pred.setdefault(key, []).append(r)

    @classmethod
    def from_source(cls, text: str, builtins=None) -> "BackgroundKnowledge":
        from .parsing import parse_clauses

        facts, rules = [], []
        for head, body in parse_clauses(text):
            if body:
                rules.append(Rule(head, frozenset(body)))
            elif any(isinstance(a, Var) for a in head.args):
                rules.append(Rule(head, frozenset()))
            else:
                facts.append(head)
        return cls(facts, rules, builtins)

    def register_builtin(self, name: str, arity: int, fn) -> None:
        self.builtins[(name, arity)] = fn

    def defines(self, key) -> bool:
        return key in self._facts_by_pred or key in self._rules_by_pred

    def known_predicates(self) -> set:
        return set(self._facts_by_pred) | set(self._rules_by_pred) | set(self.builtins)


class _Budget(Exception):
    pass


def _walk(t):
    while type(t) is _FVar:
        r = t.ref
        if r is None:
            return t
        t = r
    return t


class Evaluator:
    """Tests hypotheses against a fixed example set under a fixed budget.

    Per-rule coverages are cached, so re-testing shared rules across
    candidate programs is free.  Deterministic: identical hypotheses yield
    identical coverages."""

    def __init__(self, bk: BackgroundKnowledge, examples: ExampleSet,
                 budget: EvalBudget | None = None):
        self.bk = bk
        self.examples = examples
        self.budget = budget or EvalBudget()
        self.budget_exhausted = 0
        self._rule_cov: dict = {}
        self._known = bk.known_predicates()
        self._user_keys = set(bk._facts_by_pred) | set(bk._rules_by_pred)
        self._builtins = bk.builtins

    # ---- public API ------------------------------------------------------

    def covers(self, h: Hypothesis, example: Literal) -> bool:
        """B union h |= example, within budget.  Raises EngineError when the
        example's predicate/arity is unknown."""
        self._check_example(example, h)
        prog = self._compile(h)
        return self._prove(prog, example, (set(), {}))

    def test(self, h: Hypothesis) -> Coverage:
        """Coverage bitsets of ``h`` over the example set."""
        ex = self.examples
        if len(h) == 1:
            (rule,) = h
            pos, neg = self._rule_coverage(rule)
            return Coverage(pos, neg, ex.num_pos, ex.num_neg)
        if len(h) == 0:
            return Coverage(0, 0, ex.num_pos, ex.num_neg)
        if not is_recursive(h):
            pos = neg = 0
            for rule in h:
                p, n = self._rule_coverage(rule)
                pos |= p
                neg |= n
            return Coverage(pos, neg, ex.num_pos, ex.num_neg)
        # Non-separable: seed with the union of solo coverages (a sound lower
        # bound) and evaluate only the remaining examples.
        pos = neg = 0
        for rule in h:
            p, n = self._rule_coverage(rule)
            pos |= p
            neg |= n
        prog = self._compile(h)
        memo = (set(), {})
        for i, e in enumerate(ex.pos):
            if not (pos >> i) & 1 and self._prove(prog, e, memo):
                pos |= 1 << i
        for i, e in enumerate(ex.neg):
            if not (neg >> i) & 1 and self._prove(prog, e, memo):
                neg |= 1 << i
        return Coverage(pos, neg, ex.num_pos, ex.num_neg)

    # ---- internals -------------------------------------------------------

    def _check_example(self, example: Literal, h: Hypothesis) -> None:
        key = (example.pred, len(example.args))
        if key not in self._known and all(
            (r.head.pred, len(r.head.args)) != key for r in h
        ):
            raise EngineError(f"unknown example predicate {key[0]}/{key[1]}")

    def _rule_coverage(self, rule: Rule):
        cov = self._rule_cov.get(rule)
        if cov is not None:
            return cov
        prog = self._compile(frozenset((rule,)))
        ex = self.examples
        memo = (set(), {})
        pos = neg = 0
        for i, e in enumerate(ex.pos):
            if self._prove(prog, e, memo):
                pos |= 1 << i
        for i, e in enumerate(ex.neg):
            if self._prove(prog, e, memo):
                neg |= 1 << i
        self._rule_cov[rule] = (pos, neg)
        return pos, neg

    def _compile(self, h: Hypothesis):
        """Compiled program: pred key -> list of (head codes, ordered body
        codes, nvars).  Hypothesis rules come before background rules of the
        same predicate; bodies are ordered by bound-variable flood-fill from
        the head, built-ins and non-recursive literals first."""
        rules_by_pred: dict = {}
        for rule in sorted(h, key=lambda r: (r.head.pred, len(r.head.args),
                                             len(r.body), repr(r))):
            key = (rule.head.pred, len(rule.head.args))
            rules_by_pred.setdefault(key, []).append(self._compile_rule(rule))
        for key, rules in self.bk._rules_by_pred.items():
            for rule in rules:
                rules_by_pred.setdefault(key, []).append(self._compile_rule(rule))
        return rules_by_pred

    def _compile_rule(self, rule: Rule):
        varids: dict = {}

        def code(term):
            if isinstance(term, Var):
                if term not in varids:
                    varids[term] = len(varids)
                return ("v", varids[term])
            return ("c", term)

        head_codes = tuple(code(a) for a in rule.head.args)
        head_pred = (rule.head.pred, len(rule.head.args))
        # order body: repeatedly pick the literal most connected to bound
        # vars, preferring built-ins, then non-recursive calls
        bound = set(a for a in rule.head.args if isinstance(a, Var))
        remaining = list(rule.body)
        remaining.sort(key=repr)
        ordered = []
        while remaining:
            def score(lit):
                key = (lit.pred, len(lit.args))
                vs = [a for a in lit.args if isinstance(a, Var)]
                shared = sum(1 for v in vs if v in bound)
                is_builtin = key in self.bk.builtins and not self.bk.defines(key)
                is_rec = key == head_pred
                return (-shared, is_rec, not is_builtin)

            best = min(remaining, key=lambda l: (score(l), repr(l)))
            remaining.remove(best)
            ordered.append(best)
            bound.update(a for a in best.args if isinstance(a, Var))
        body_codes = tuple(
            ((lit.pred, len(lit.args)), tuple(code(a) for a in lit.args))
            for lit in ordered
        )
        return head_codes, body_codes, len(varids)

    def _prove(self, prog, example: Literal, memo) -> bool:
        # memo = (success set, failure dict keyed by remaining depth); tables
        # are per compiled program and shared across its examples
        succ, fail = memo
        goal = ((example.pred, len(example.args)), example.args)
        for depth in self.budget.depth_schedule():
            steps = [self.budget.max_steps]
            try:
                if self._solve(prog, (goal,), depth, [], succ, fail, steps):
                    return True
            except _Budget:
                self.budget_exhausted += 1
                return False
        return False

    def _solve(self, prog, goals, depth, trail, succ, fail, steps) -> bool:
        if not goals:
            return True
        steps[0] -= 1
        if steps[0] <= 0:
            raise _Budget
        user_keys = self._user_keys
        builtins = self._builtins
        # select the first ready goal: user predicates are always ready, a
        # built-in is ready when its probe returns solutions
        chosen = -1
        sols = None
        walked = None
        for i, (key, args) in enumerate(goals):
            if key in user_keys or key in prog:
                chosen = i
                break
            fn = builtins.get(key)
            if fn is None:
                chosen = i  # unknown predicate: fails below
                break
            w = []
            for a in args:
                while type(a) is _FVar:
                    r = a.ref
                    if r is None:
                        break
                    a = r
                w.append(a)
            w = tuple(w)
            s = fn(w)
            if s is None:
                continue  # insufficiently instantiated, defer
            chosen, sols, walked = i, s, w
            break
        if chosen < 0:
            return False  # only deferred built-ins remain
        key, args = goals[chosen]
        rest = goals[1:] if chosen == 0 else goals[:chosen] + goals[chosen + 1:]

        if sols is not None:
            for sol in sols:
                mark = len(trail)
                if self._unify_tuple(walked, sol, trail):
                    if self._solve(prog, rest, depth, trail, succ, fail, steps):
                        return True
                self._undo(trail, mark)
            return False

        ground = True
        w = []
        for a in args:
            while type(a) is _FVar:
                r = a.ref
                if r is None:
                    ground = False
                    break
                a = r
            w.append(a)
        walked = tuple(w)
        if ground:
            # a ground goal is proven in isolation: no bindings escape, so
            # success/failure can be memoized independently of the
            # continuation
            gkey = (key, walked)
            if gkey in succ:
                return self._solve(prog, rest, depth, trail, succ, fail, steps)
            if fail.get(gkey, -1) >= depth:
                return False
            if self._prove_ground(prog, key, walked, depth, trail, succ, fail, steps):
                succ.add(gkey)
                return self._solve(prog, rest, depth, trail, succ, fail, steps)
            if fail.get(gkey, -1) < depth:
                fail[gkey] = depth
            return False

        for fact_args in self._fact_candidates(key, walked):
            mark = len(trail)
            if self._unify_tuple(walked, fact_args, trail):
                if self._solve(prog, rest, depth, trail, succ, fail, steps):
                    return True
            self._undo(trail, mark)
        clauses = prog.get(key, ())
        if clauses and depth > 0:
            mat = self._mat
            for head_codes, body_codes, nvars in clauses:
                mark = len(trail)
                env = [None] * nvars
                if self._head_unify(head_codes, walked, env, trail):
                    body = tuple(
                        (bkey, tuple([mat(c, env) for c in codes]))
                        for bkey, codes in body_codes
                    )
                    if self._solve(prog, body + rest, depth - 1, trail, succ, fail, steps):
                        return True
                self._undo(trail, mark)
        return False

    def _prove_ground(self, prog, key, walked, depth, trail, succ, fail, steps) -> bool:
        facts = self.bk._fact_sets.get(key)
        if facts is not None and walked in facts:
            return True
        clauses = prog.get(key, ())
        if not clauses or depth <= 0:
            return False
        mat = self._mat
        for head_codes, body_codes, nvars in clauses:
            mark = len(trail)
            env = [None] * nvars
            if self._head_unify(head_codes, walked, env, trail):
                body = tuple(
                    (bkey, tuple([mat(c, env) for c in codes]))
                    for bkey, codes in body_codes
                )
                if self._solve(prog, body, depth - 1, trail, succ, fail, steps):
                    self._undo(trail, mark)
                    return True
            self._undo(trail, mark)
        return False

    def _fact_candidates(self, key, walked):
        bk = self.bk
        if key not in bk._facts_by_pred:
            return ()
        if walked and not isinstance(walked[0], _FVar):
            return bk._facts_by_first.get((key, walked[0]), ())
        return bk._facts_by_pred[key]

    def _mat(self, code, env):
        if code[0] == "v":
            v = env[code[1]]
            if v is None:
                v = env[code[1]] = _FVar()
            return v
        return code[1]

    def _head_unify(self, codes, walked, env, trail) -> bool:
        for code, a in zip(codes, walked):
            if code[0] == "v":
                i = code[1]
                cur = env[i]
                if cur is None:
                    env[i] = a
                elif not self._unify(cur, a, trail):
                    return False
            elif not self._unify(code[1], a, trail):
                return False
        return True

    @staticmethod
    def _unify(a, b, trail) -> bool:
        a = _walk(a)
        b = _walk(b)
        if a is b:
            return True
        if type(a) is _FVar:
            a.ref = b
            trail.append(a)
            return True
        if type(b) is _FVar:
            b.ref = a
            trail.append(b)
            return True
        return a == b

    def _unify_tuple(self, args, sol, trail) -> bool:
        for a, s in zip(args, sol):
            if not self._unify(a, s, trail):
                return False
        return True

    @staticmethod
    def _undo(trail, mark) -> None:
        while len(trail) > mark:
            trail.pop().ref = None
