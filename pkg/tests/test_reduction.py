"""Minimal shifts, the position-normalizing transform, canonicalization."""

import math

import pytest

from automatch import (
    ALGORITHMS,
    IidModel,
    Machine,
    PreconditionError,
    asymptotic_speed,
    build_classic,
    build_naive,
    build_quicksearch,
    canonical_relabel,
    canonicalize,
    check_validity_standard,
    compute_mnshft,
    equalize_irrelevant,
    is_standard,
    memory_of_standard,
    positify,
    redirect,
    relevant_states,
    run_generic,
    standardize,
)
from automatch.expansion import _find_reduction
from conftest import random_texts, texts_upto

UNIFORM = IidModel.uniform("ab")
SKEWED = IidModel({"a": 0.25, "b": 0.75})


class TestMnshft:
    def test_prematch_states_have_zero(self):
        std = standardize(build_naive("aa", alphabet="ab"))
        profile = compute_mnshft(std)
        for q in std.reachable_states():
            if q != std.sink and std.prematch[q]:
                assert profile.of(q) == 0

    def test_two_state_example_all_relevant(self):
        std = standardize(build_naive("aa", alphabet="ab"))
        nonsink = set(std.reachable_states()) - {std.sink}
        assert relevant_states(std) == nonsink

    def test_shift_accumulates_along_cheapest_path(self):
        # A (never reports) must shift 2 on 'a' or 3 on 'b' to reach the
        # reporting state B, so its minimal shift is 2
        m = Machine.create(
            "ab", "ab",
            next_of=[0, 0], prematch=[False, True],
            delta=[[1, 1], [0, 0]], sigma=[[2, 3], [1, 1]],
            initial=0,
        )
        profile = compute_mnshft(m)
        assert profile.of(1) == 0
        assert profile.of(0) == 2

    def test_unreachable_report_gives_infinity(self):
        m = Machine.create(
            "ab", "a",
            next_of=[0], prematch=[False],
            delta=[[0, 0]], sigma=[[1, 1]],
            initial=0,
        )
        assert math.isinf(compute_mnshft(m).of(0))

    def test_lookahead_state_of_quicksearch_has_positive_mnshft(self):
        std = standardize(build_quicksearch("a", alphabet="ab"))
        profile = compute_mnshft(std)
        values = {profile.of(q) for q in std.reachable_states() if q != std.sink}
        assert 1 in values  # the lookahead readers must move before reporting


class TestPositify:
    def test_identity_when_all_states_relevant(self):
        std = standardize(build_naive("aa", alphabet="ab"))
        assert positify(std).signature() == std.signature()

    def test_preserves_absolute_access_positions(self):
        # the lookahead states of quicksearch("a") read offset 1 with minimal
        # shift 1: the transform re-anchors them without moving any read
        std = standardize(build_quicksearch("a", alphabet="ab"))
        pos = positify(std)
        assert pos.signature() != std.signature()
        for t in texts_upto("ab", 7):
            a, b = run_generic(std, t), run_generic(pos, t)
            assert a.accessed_indices == b.accessed_indices, t
            assert a.occurrences == b.occurrences, t
        for t in random_texts("ab", 40, 60, seed=9):
            a, b = run_generic(std, t), run_generic(pos, t)
            assert a.accessed_indices == b.accessed_indices
            assert a.occurrences == b.occurrences

    def test_all_states_relevant_afterwards(self):
        std = standardize(build_quicksearch("a", alphabet="ab"))
        pos = positify(std)
        nonsink = set(pos.reachable_states()) - {pos.sink}
        assert relevant_states(pos) == nonsink

    def test_rejects_reads_below_the_minimal_shift(self):
        # quicksearch("abab") standardizes with a state whose read offset
        # sits below its minimal shift; the transform cannot re-anchor it
        std = standardize(build_quicksearch("abab", alphabet="ab"))
        with pytest.raises(PreconditionError):
            positify(std)


class TestEqualize:
    def test_identity_when_no_irrelevant_reads(self):
        std = standardize(build_naive("aa", alphabet="ab"))
        out = equalize_irrelevant(std, UNIFORM)
        assert out.signature() == std.signature()

    def test_redundant_machine_is_a_precondition_error(self):
        std = standardize(build_quicksearch("a", alphabet="ab"))
        with pytest.raises(PreconditionError):
            equalize_irrelevant(std, UNIFORM)


class TestCanonicalize:
    PATTERNS = ["a", "aa", "ab", "aab", "abb", "abab", "aabb"]

    @pytest.mark.parametrize("alg", sorted(ALGORITHMS))
    @pytest.mark.parametrize("model", [UNIFORM, SKEWED], ids=["uniform", "p25"])
    def test_normal_form_invariants(self, alg, model):
        for w in self.PATTERNS:
            m = build_classic(alg, w, alphabet="ab")
            c = canonicalize(m, model)
            assert is_standard(c), (alg, w)
            assert check_validity_standard(c), (alg, w)
            assert _find_reduction(c) is None, (alg, w)
            mems = memory_of_standard(c)
            assert len(set(mems.values())) == len(mems), (alg, w)
            nonsink = set(c.reachable_states()) - {c.sink}
            assert relevant_states(c) == nonsink, (alg, w)

    @pytest.mark.parametrize("alg", sorted(ALGORITHMS))
    def test_speed_never_decreases(self, alg):
        for w in self.PATTERNS:
            m = build_classic(alg, w, alphabet="ab")
            for model in (UNIFORM, SKEWED):
                before = float(asymptotic_speed(m, model))
                after = float(asymptotic_speed(canonicalize(m, model), model))
                assert after >= before - 1e-9, (alg, w, before, after)

    @pytest.mark.parametrize("alg", sorted(ALGORITHMS))
    def test_behavior_preserved(self, alg):
        for w in ("aa", "aab", "abab"):
            m = build_classic(alg, w, alphabet="ab")
            c = canonicalize(m, UNIFORM)
            for t in texts_upto("ab", 6):
                assert run_generic(c, t).occurrences == run_generic(m, t).occurrences

    def test_idempotent(self):
        for alg in ("naive", "quicksearch", "horspool"):
            m = build_classic(alg, "aab", alphabet="ab")
            c = canonicalize(m, SKEWED)
            again = canonicalize(c, SKEWED)
            assert canonical_relabel(again).signature() == canonical_relabel(c).signature()

    def test_canonical_naive_aa_has_speed_one_exactly(self):
        from fractions import Fraction

        c = canonicalize(build_naive("aa", alphabet="ab"), UNIFORM)
        for p in (Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            model = IidModel({"a": p, "b": 1 - p})
            assert asymptotic_speed(c, model, exact=True) == 1

    def test_quicksearch_aab_collapses_to_three_states(self):
        c = canonicalize(build_quicksearch("aab", alphabet="ab"), UNIFORM)
        assert len(set(c.reachable_states()) - {c.sink}) == 3
        assert float(asymptotic_speed(c, UNIFORM)) == pytest.approx(1.0, abs=1e-9)


class TestDuplicateRedirect:
    def test_one_redirect_matches_or_beats_the_duplicated_machine(self):
        # two copies of the reporting state share one memory; the better of
        # the two merges is at least as fast as the duplicated machine
        m = Machine.create(
            "ab", "aa",
            next_of=[0, 1, 1], prematch=[False, True, True],
            delta=[[1, 0], [2, 0], [1, 0]], sigma=[[0, 1], [1, 2], [1, 2]],
            initial=0,
        )
        mems = memory_of_standard(m)
        assert mems[1] == mems[2]
        speed = float(asymptotic_speed(m, UNIFORM))
        merged = [redirect(m, 1, 2), redirect(m, 2, 1)]
        best = max(float(asymptotic_speed(r, UNIFORM)) for r in merged)
        assert speed <= best + 1e-9
