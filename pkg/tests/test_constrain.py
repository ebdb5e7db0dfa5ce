import random

import pytest

from mdlsynth.constrain import (
    ConstraintStore,
    Kind,
    NoisyConstraint,
    SearchBounds,
    derive,
    generalisation_fp_threshold,
)
from mdlsynth.evaluate import Coverage
from mdlsynth.logic import prog_size
from mdlsynth.parsing import parse_rules


def prog(text):
    return frozenset(parse_rules(text))


H = prog("f(A):- head(A,1).")
BIG = 1000  # a max size that keeps every derived bound non-vacuous


def cov(tp, fn, fp, tn):
    return Coverage((1 << tp) - 1, (1 << fp) - 1, tp + fn, fp + tn)


def bounds_of(cons):
    return {c.kind: c.bound for c in cons}


class TestDerive:
    def test_worked_example(self):
        # tp=3 fp=0 size=2 |E+|=10 fn=7 best cost so far 10
        c = cov(tp=3, fn=7, fp=0, tn=5)
        got = bounds_of(derive(H, c, SearchBounds(max_mdl=10, pos_count=10), BIG))
        assert got[Kind.SPECIALISATION] == min(3, 2 + 0) == 2
        assert got[Kind.GENERALISATION] == min(10 - 0, 7 + 2, 10 - 9 + 10 + 2) == 9

    def test_totally_incomplete_prunes_all_specialisations(self):
        c = cov(tp=0, fn=10, fp=0, tn=5)
        got = bounds_of(derive(H, c, SearchBounds(10, 10), BIG))
        # bound clamps to 1; no program of size 1 exists, so this prunes
        # every proper specialisation
        assert got[Kind.SPECIALISATION] == 1

    def test_consistent_complete_generalisation_bound_is_size(self):
        c = cov(tp=10, fn=0, fp=0, tn=5)
        got = bounds_of(derive(H, c, SearchBounds(10, 10), BIG))
        assert got[Kind.GENERALISATION] == prog_size(H) == 2

    def test_vacuous_bounds_dropped(self):
        c = cov(tp=9, fn=1, fp=3, tn=2)
        # spec bound = min(9, 2+3) = 5; with max size 5 it prunes nothing
        cons = derive(H, c, SearchBounds(10, 10), max_size=5)
        assert Kind.SPECIALISATION not in bounds_of(cons)

    def test_strictness_policy_instance(self):
        # |E+|=10, fp=4: prune generalisations of size >= 7, i.e. > 6
        assert generalisation_fp_threshold(10, 4) == 6

    def test_strictness_policy_all_fp(self):
        assert generalisation_fp_threshold(10, 10) == 0

    def test_monotonicity_in_tp_and_fp(self):
        rng = random.Random(51)
        for _ in range(300):
            npos, nneg = rng.randint(2, 20), rng.randint(2, 20)
            tp1 = rng.randint(0, npos)
            tp2 = rng.randint(tp1, npos)
            fp = rng.randint(0, nneg)
            c1 = cov(tp1, npos - tp1, fp, nneg - fp)
            c2 = cov(tp2, npos - tp2, fp, nneg - fp)
            b = SearchBounds(npos, npos)
            d1 = bounds_of(derive(H, c1, b, BIG))
            d2 = bounds_of(derive(H, c2, b, BIG))
            # specialisation bound is non-decreasing in tp
            assert d1[Kind.SPECIALISATION] <= d2[Kind.SPECIALISATION]
            fp1 = rng.randint(0, nneg)
            fp2 = rng.randint(fp1, nneg)
            tp = rng.randint(0, npos)
            c3 = cov(tp, npos - tp, fp1, nneg - fp1)
            c4 = cov(tp, npos - tp, fp2, nneg - fp2)
            d3 = bounds_of(derive(H, c3, b, BIG))
            d4 = bounds_of(derive(H, c4, b, BIG))
            # the fp-family generalisation bound is non-increasing in fp
            assert d4[Kind.GENERALISATION] <= d3[Kind.GENERALISATION]

    def test_bound_invariant(self):
        rng = random.Random(53)
        for _ in range(200):
            npos, nneg = rng.randint(1, 15), rng.randint(0, 15)
            tp = rng.randint(0, npos)
            fp = rng.randint(0, nneg)
            c = cov(tp, npos - tp, fp, nneg - fp)
            best = rng.randint(1, npos)
            for con in derive(H, c, SearchBounds(best, npos), rng.randint(3, 30)):
                assert con.bound >= 1


class TestNoisyConstraint:
    def test_bound_must_be_positive(self):
        with pytest.raises(ValueError):
            NoisyConstraint(Kind.SPECIALISATION, H, 0)


class TestStore:
    def test_duplicate_keeps_strongest(self):
        store = ConstraintStore()
        assert store.add(NoisyConstraint(Kind.SPECIALISATION, H, 5))
        assert not store.add(NoisyConstraint(Kind.SPECIALISATION, H, 7))
        assert store.add(NoisyConstraint(Kind.SPECIALISATION, H, 3))
        spec = prog("f(A):- head(A,1),tail(A,B),tail(B,C).")  # size 4
        assert store.violates(spec, prog_size(spec))

    def test_dump_format(self):
        store = ConstraintStore()
        store.add(NoisyConstraint(Kind.SPECIALISATION, H, 5))
        store.add(NoisyConstraint(Kind.GENERALISATION, H, 4))
        lines = store.dump().splitlines()
        assert lines[0].startswith("spec 5 ")
        assert lines[1].startswith("gen 4 ")
        assert "f(A):- head(A,1)." in lines[0]

    def test_program_at_bound_never_pruned(self):
        store = ConstraintStore()
        store.add(NoisyConstraint(Kind.SPECIALISATION, H, prog_size(H)))
        assert not store.violates(H, prog_size(H))
