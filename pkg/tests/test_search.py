import random

import pytest

from mdlsynth.evaluate import BackgroundKnowledge, EvalBudget, Evaluator, ExampleSet, mdl_cost
from mdlsynth.generate import Bias
from mdlsynth.logic import Literal, prog_size
from mdlsynth.parsing import parse_ground_atom, parse_rules
from mdlsynth.search import SearchConfig, SearchState, learn, loop_invariant_check

from .helpers import tiny_task
from .oracles import exhaustive_min_cost


def prog(text):
    return frozenset(parse_rules(text))


def atom(text):
    return parse_ground_atom(text)


class TestLearnBasics:
    def test_empty_hypothesis_optimal(self):
        # two positives that no single bias rule can cover: any rule costs
        # at least its size and covers nothing, so the empty hypothesis
        # (cost 2) wins
        bk = BackgroundKnowledge(facts=[Literal("p", ("a",))], builtins={})
        bias = Bias(targets=[("f", 1)], body_preds=[("p", 1)],
                    max_vars=2, max_body=2, max_rules=1)
        ex = ExampleSet((atom("f(b)"), atom("f(c)")), ())
        h, stats = learn(bk, ex, bias, SearchConfig(timeout=10))
        assert h == frozenset()
        assert stats.best_cost == 2
        assert stats.completed

    def test_single_rule_solution(self):
        bk = BackgroundKnowledge(
            facts=[Literal("p", (c,)) for c in "abd"], builtins={})
        bias = Bias(targets=[("f", 1)], body_preds=[("p", 1)],
                    max_vars=2, max_body=2, max_rules=1)
        ex = ExampleSet((atom("f(a)"), atom("f(b)"), atom("f(d)")),
                        (atom("f(c)"),))
        h, stats = learn(bk, ex, bias, SearchConfig(timeout=10))
        assert h == prog("f(A):- p(A).")
        assert stats.best_cost == 2

    def test_equal_cost_tie_keeps_first_found(self):
        # with two positives, a perfect size-2 rule only ties the empty
        # hypothesis (cost 2), and the first-found solution is kept
        bk = BackgroundKnowledge(
            facts=[Literal("p", ("a",)), Literal("p", ("b",))], builtins={})
        bias = Bias(targets=[("f", 1)], body_preds=[("p", 1)],
                    max_vars=2, max_body=2, max_rules=1)
        ex = ExampleSet((atom("f(a)"), atom("f(b)")), (atom("f(c)"),))
        h, stats = learn(bk, ex, bias, SearchConfig(timeout=10))
        assert h == frozenset()
        assert stats.best_cost == 2

    def test_recursive_solution_found_by_generate_stage(self):
        # the three-example task: the best compression uses recursion
        bk = BackgroundKnowledge()
        bias = Bias.from_source("""
            head_pred(f,1).
            body_pred(head,2). body_pred(tail,2).
            type(f,(list,)). type(head,(list,int)). type(tail,(list,list)).
            constant(int,0). constant(int,1).
            max_vars(2). max_body(2). max_rules(2). enable_recursion.
        """)
        pos = tuple(atom(s) for s in (
            "f([0])", "f([1,0])", "f([2,0])", "f([1,1,0])", "f([2,2,0])",
            "f([1,2,0])", "f([9,8,0])", "f([4,0])"))
        neg = tuple(atom(s) for s in (
            "f([1])", "f([2,1])", "f([1,2])", "f([2])", "f([9,8])", "f([])"))
        ex = ExampleSet(pos, neg)
        h, stats = learn(bk, ex, bias, SearchConfig(timeout=60))
        # ground truth: f(A):- head(A,0) ; f(A):- tail(A,B),f(B)
        gt = prog("f(A):- head(A,0).  f(A):- tail(A,B),f(B).")
        ev = Evaluator(bk, ex)
        assert stats.best_cost == mdl_cost(gt, ev.test(gt)) == 5
        cov = ev.test(h)
        assert mdl_cost(h, cov) == 5

    def test_anytime_trajectory_monotone(self):
        rng = random.Random(73)
        checks = 0
        for _ in range(40):
            bk, ex, bias, _ = tiny_task(rng)
            h, stats = learn(bk, ex, bias, SearchConfig(timeout=10))
            costs = [c for _, c in stats.trajectory]
            assert costs == sorted(costs, reverse=True)
            assert all(b < a for a, b in zip(costs, costs[1:]))
            checks += len(costs)
        assert checks >= 40

    def test_determinism(self):
        rng = random.Random(79)
        for _ in range(10):
            bk, ex, bias, _ = tiny_task(rng)
            h1, s1 = learn(bk, ex, bias, SearchConfig(timeout=10, seed=1))
            h2, s2 = learn(bk, ex, bias, SearchConfig(timeout=10, seed=1))
            assert h1 == h2
            assert [c for _, c in s1.trajectory] == [c for _, c in s2.trajectory]
            assert s1.programs_tested == s2.programs_tested

    def test_validation_rejects_mismatched_examples(self):
        bk = BackgroundKnowledge(builtins={})
        bias = Bias(targets=[("f", 1)], body_preds=[("p", 1)])
        ex = ExampleSet((atom("g(a)"),), ())
        with pytest.raises(ValueError):
            learn(bk, ex, bias)

    def test_validation_rejects_bk_calling_target(self):
        bk = BackgroundKnowledge.from_source("p(A):- f(A).", builtins={})
        bias = Bias(targets=[("f", 1)], body_preds=[("p", 1)])
        ex = ExampleSet((atom("f(a)"),), ())
        with pytest.raises(ValueError):
            learn(bk, ex, bias)


class TestOracleEquality:
    def test_learn_matches_exhaustive_minimum(self):
        rng = random.Random(83)
        for trial in range(25):
            bk, ex, bias, consts = tiny_task(rng)
            h, stats = learn(bk, ex, bias, SearchConfig(timeout=30))
            assert stats.completed, "tiny task should terminate"
            want = exhaustive_min_cost(bias, bk.facts, bk.rules, ex, consts)
            assert stats.best_cost == want, (trial, h)
            # and the returned hypothesis really has that cost
            ev = Evaluator(bk, ex)
            assert mdl_cost(h, ev.test(h)) == stats.best_cost

    def test_constraints_do_not_change_the_result(self):
        rng = random.Random(89)
        for trial in range(15):
            bk, ex, bias, consts = tiny_task(rng)
            h_on, s_on = learn(bk, ex, bias,
                               SearchConfig(timeout=30))
            h_off, s_off = learn(bk, ex, bias,
                                 SearchConfig(timeout=30,
                                              enable_noisy_constraints=False))
            assert s_on.best_cost == s_off.best_cost, trial
            assert s_on.programs_tested <= s_off.programs_tested


class TestInvariantCheck:
    def test_initial_state_passes(self):
        bk = BackgroundKnowledge(builtins={})
        ex = ExampleSet((atom("f(a)"), atom("f(b)")), ())
        ev = Evaluator(bk, ex)
        state = SearchState(size=2, max_mdl=2, best=frozenset(),
                            best_cost=2, num_pos=2, evaluator=ev)
        assert loop_invariant_check(state)

    def test_post_update_relation_enforced(self):
        bk = BackgroundKnowledge(
            facts=[Literal("p", ("a",)), Literal("p", ("b",))], builtins={})
        ex = ExampleSet((atom("f(a)"), atom("f(b)")), ())
        ev = Evaluator(bk, ex)
        best = prog("f(A):- p(A).")
        good = SearchState(size=2, max_mdl=1, best=best, best_cost=2,
                           num_pos=2, evaluator=ev)
        assert loop_invariant_check(good)
        bad = SearchState(size=2, max_mdl=2, best=best, best_cost=2,
                          num_pos=2, evaluator=ev)
        with pytest.raises(AssertionError):
            loop_invariant_check(bad)

    def test_recorded_cost_must_match_retest(self):
        bk = BackgroundKnowledge(
            facts=[Literal("p", ("a",)), Literal("p", ("b",))], builtins={})
        ex = ExampleSet((atom("f(a)"), atom("f(b)")), ())
        ev = Evaluator(bk, ex)
        best = prog("f(A):- p(A).")
        bad = SearchState(size=2, max_mdl=4, best=best, best_cost=5,
                          num_pos=2, evaluator=ev)
        with pytest.raises(AssertionError):
            loop_invariant_check(bad)

    def test_debug_mode_runs_check_in_loop(self):
        bk = BackgroundKnowledge(
            facts=[Literal("p", ("a",)), Literal("p", ("b",))], builtins={})
        bias = Bias(targets=[("f", 1)], body_preds=[("p", 1)],
                    max_vars=2, max_body=2, max_rules=1)
        ex = ExampleSet((atom("f(a)"), atom("f(b)")), ())
        learn(bk, ex, bias, SearchConfig(timeout=10, debug=True))


class TestTimeout:
    def test_timeout_returns_best_so_far(self):
        rng = random.Random(97)
        bk, ex, bias, _ = tiny_task(rng)
        h, stats = learn(bk, ex, bias, SearchConfig(timeout=1e-6))
        assert stats.timed_out
        assert stats.best_cost <= ex.num_pos
