"""Asymptotic speed: state chains, decomposition, exact values, estimation."""

from fractions import Fraction as F

import pytest

from automatch import (
    Hmm,
    IidModel,
    MarkovTextModel,
    StateChain,
    asymptotic_speed,
    asymptotic_speed_hmm,
    asymptotic_speed_iid,
    as_hmm,
    build_classic,
    build_naive,
    canonicalize,
    decompose,
    empirical_speed,
    run_generic,
    standardize,
    state_chain_iid,
    trace_bounds,
)
from conftest import random_texts

UNIFORM = IidModel.uniform("ab")
SKEWED = IidModel({"a": F(1, 4), "b": F(3, 4)})
MARKOV = MarkovTextModel(
    order=1,
    initial={"a": F(1, 2), "b": F(1, 2)},
    trans={
        "a": {"a": F(3, 4), "b": F(1, 4)},
        "b": {"a": F(1, 4), "b": F(3, 4)},
    },
)
ALTERNATING = Hmm(
    states=("x", "y"),
    initial=(F(1, 2), F(1, 2)),
    transition=((0, 1), (1, 0)),
    emission=({"a": 1}, {"b": 1}),
)


class TestStateChain:
    def test_raw_naive_aa_is_outside_the_chain_theorem(self):
        # its expansion re-reads a known position, so the state process of
        # the raw machine is analyzed through the expansion instead
        from automatch import PreconditionError, expand

        raw = build_naive("aa", alphabet="ab")
        with pytest.raises(PreconditionError):
            state_chain_iid(raw, UNIFORM, exact=True)
        chain = state_chain_iid(expand(raw).machine, UNIFORM, exact=True)
        assert len(chain.nodes) >= 2
        assert asymptotic_speed(raw, UNIFORM, exact=True) == F(2, 3)

    def test_canonical_aa_chain(self):
        m = canonicalize(build_naive("aa", alphabet="ab"), UNIFORM)
        chain = state_chain_iid(m, UNIFORM, exact=True)
        assert chain.transition == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))
        assert sorted(chain.expected_shift) == [F(1, 2), F(3, 2)]

    def test_rows_are_checked(self):
        from automatch import MachineError

        with pytest.raises(MachineError, match="sums to"):
            StateChain(
                nodes=(0, 1),
                initial=(1, 0),
                transition=((0.5, 0.4), (0.5, 0.5)),
                expected_shift=(1, 1),
            )


class TestDecompose:
    def test_transient_state_splits_mass_between_classes(self):
        chain = StateChain(
            nodes=("start", "left", "right"),
            initial=(1, 0, 0),
            transition=(
                (0, F(3, 5), F(2, 5)),
                (0, 1, 0),
                (0, 0, 1),
            ),
            expected_shift=(1, 2, 3),
        )
        d = decompose(chain)
        assert d.transient == (0,)
        assert d.recurrent_classes == ((1,), (2,))
        assert d.absorption == (F(3, 5), F(2, 5))

    def test_irreducible_chain_is_one_class(self):
        chain = StateChain(
            nodes=(0, 1),
            initial=(F(1, 2), F(1, 2)),
            transition=((0, 1), (1, 0)),
            expected_shift=(1, 1),
        )
        d = decompose(chain)
        assert d.transient == ()
        assert d.recurrent_classes == ((0, 1),)
        assert d.absorption == (1,)


class TestExactSpeeds:
    def test_naive_aa_uniform(self):
        speed = asymptotic_speed(build_naive("aa", alphabet="ab"), UNIFORM, exact=True)
        assert speed == F(2, 3)
        assert isinstance(speed, F)

    def test_naive_aa_skewed(self):
        speed = asymptotic_speed(build_naive("aa", alphabet="ab"), SKEWED, exact=True)
        assert speed == F(4, 5)

    def test_float_mode_agrees(self):
        speed = asymptotic_speed(build_naive("aa", alphabet="ab"), UNIFORM)
        assert isinstance(speed, float)
        assert speed == pytest.approx(2 / 3, abs=1e-12)

    def test_canonical_aa_speed_is_one_for_every_bias(self):
        m = canonicalize(build_naive("aa", alphabet="ab"), UNIFORM)
        for pa in (F(1, 10), F(1, 4), F(1, 2), F(9, 10)):
            model = IidModel({"a": pa, "b": 1 - pa})
            assert asymptotic_speed(m, model, exact=True) == 1

    def test_speed_is_scan_invariant_not_pattern_invariant(self):
        fast = standardize(build_classic("horspool", "bbb", alphabet="ab"))
        slow = build_naive("bbb", alphabet="ab")
        assert asymptotic_speed(fast, SKEWED) != pytest.approx(
            float(asymptotic_speed(slow, SKEWED))
        )


class TestHmmPath:
    @pytest.mark.parametrize("model", [UNIFORM, SKEWED], ids=["uniform", "p25"])
    @pytest.mark.parametrize(
        "alg,w", [("naive", "aa"), ("morris_pratt", "aab"), ("horspool", "aab")]
    )
    def test_iid_embedded_as_hmm_gives_same_speed(self, alg, w, model):
        m = standardize(build_classic(alg, w, alphabet="ab"))
        direct = float(asymptotic_speed_iid(m, model))
        via_hmm = asymptotic_speed_hmm(m, as_hmm(model))
        assert via_hmm == pytest.approx(direct, abs=1e-9)

    def test_alternating_text_canonical_aa(self):
        # "abab..." never contains "aa": scan reads two symbols then jumps 2
        m = canonicalize(build_naive("aa", alphabet="ab"), UNIFORM)
        assert asymptotic_speed(m, ALTERNATING) == pytest.approx(1.0, abs=1e-12)

    def test_alternating_text_naive_ab(self):
        # matches at every other position: 3 accesses per 2 positions
        m = build_naive("ab", alphabet="ab")
        assert asymptotic_speed(m, ALTERNATING) == pytest.approx(2 / 3, abs=1e-12)

    def test_markov_speed_matches_simulation(self):
        m = standardize(build_classic("horspool", "aab", alphabet="ab"))
        analytic = asymptotic_speed(m, MARKOV)
        est = empirical_speed(m, MARKOV, text_len=120_000, reps=4, seed=3)
        assert est.mean == pytest.approx(analytic, abs=max(3 * est.std_error, 0.01))


class TestEmpirical:
    def test_fixed_text_gives_exact_ratio(self):
        m = canonicalize(build_naive("aa", alphabet="ab"), UNIFORM)
        est = empirical_speed(m, text="ab" * 500)
        assert est.mean == 1.0
        assert est.std_error == 0.0
        assert est.values == (1.0,)

    def test_sampled_estimate_brackets_exact_value(self):
        m = build_naive("aa", alphabet="ab")
        est = empirical_speed(m, UNIFORM, text_len=80_000, reps=4, seed=1)
        assert est.mean == pytest.approx(2 / 3, abs=max(3 * est.std_error, 0.01))

    def test_deterministic_in_seed(self):
        m = build_naive("aa", alphabet="ab")
        a = empirical_speed(m, UNIFORM, text_len=5_000, reps=3, seed=9)
        b = empirical_speed(m, UNIFORM, text_len=5_000, reps=3, seed=9)
        assert a.values == b.values


class TestTraceBounds:
    @pytest.mark.parametrize("alg", ["naive", "morris_pratt", "knuth_morris_pratt"])
    def test_every_window_scan_lands_in_bounds(self, alg):
        # these machines only read inside the window, so no scan ends early
        m = standardize(build_classic(alg, "aab", alphabet="ab"))
        lower, upper = trace_bounds(m, 60)
        for t in random_texts("ab", 30, 60, seed=4):
            trace = run_generic(m, t)
            assert not trace.truncated and not trace.out_of_bounds
            assert lower <= trace.tac <= upper, t

    def test_bounds_scale_with_text_length(self):
        m = standardize(build_naive("aa", alphabet="ab"))
        l1, u1 = trace_bounds(m, 100)
        l2, u2 = trace_bounds(m, 200)
        assert l2 > l1 and u2 > u1
