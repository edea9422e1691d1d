"""Optimal-machine search: candidate space, assembly, exhaustive and local."""

from fractions import Fraction as F

import pytest

from automatch import (
    AssemblyRejected,
    CapExceeded,
    IidModel,
    MachineError,
    MemoryState,
    SearchConfig,
    assemble_machine,
    asymptotic_speed,
    build_naive,
    candidate_states,
    canonical_relabel,
    canonicalize,
    check_validity_standard,
    is_standard,
    memory_of_standard,
    optimize_exhaustive,
    optimize_hill_climb,
    relevant_states,
    run_generic,
    validate_bruteforce,
)
from automatch.expansion import _find_reduction
from conftest import texts_upto

UNIFORM = IidModel.uniform("ab")
SKEWED = IidModel({"a": F(1, 4), "b": F(3, 4)})


def mem(*entries):
    return MemoryState(tuple(entries))


class TestCandidateSpace:
    def test_counts(self):
        # "aa", k=1: both offsets pattern-pinned -> 2*2 known/unknown maps
        assert len(candidate_states("aa", 1)) == 4
        # "ab", k=2: offsets 0,1 pinned, offset 2 free over {a,b,unknown}
        assert len(candidate_states("ab", 2)) == 12
        assert len(candidate_states("a", 0)) == 2

    def test_memories_agree_with_pattern(self):
        for c in candidate_states("ab", 2):
            for i, y in c.memory.entries:
                if i < 2:
                    assert y == "ab"[i]

    def test_order_must_host_the_pattern(self):
        with pytest.raises(MachineError, match="order 1 cannot host"):
            candidate_states("aab", 1)


class TestAssemble:
    def test_reading_in_window_order_rebuilds_the_canonical_scanner(self):
        choice = {mem(): 0, mem((0, "a")): 1}
        m = assemble_machine("aa", 1, choice, UNIFORM)
        target = canonicalize(build_naive("aa", alphabet="ab"), UNIFORM)
        assert canonical_relabel(m).signature() == canonical_relabel(target).signature()

    def test_lookahead_first_is_the_faster_plan(self):
        choice = {
            mem(): 1,
            mem((1, "a")): 0,
            mem((0, "a")): 1,
            mem((1, "b")): 0,  # filler; may be unreachable
        }
        m = assemble_machine("aa", 1, choice, UNIFORM)
        assert float(asymptotic_speed(m, UNIFORM)) == pytest.approx(1.2)

    def test_re_reading_a_known_offset_rejected(self):
        with pytest.raises(AssemblyRejected, match="re-reads known offset"):
            assemble_machine("aa", 1, {mem(): 0, mem((0, "a")): 0}, UNIFORM)

    def test_missing_choice_rejected(self):
        with pytest.raises(AssemblyRejected, match="no read offset chosen"):
            assemble_machine("aa", 1, {mem(): 0}, UNIFORM)

    def test_unreportable_occurrence_rejected(self):
        # for w="a" with k=1, reading offset 1 first can complete a window at
        # offset 0 that was never reported when read
        with pytest.raises(AssemblyRejected, match="unreportable|no usable"):
            assemble_machine("a", 1, {mem(): 1, mem((1, "a")): 0, mem((1, "b")): 0}, UNIFORM)


class TestExhaustive:
    def test_single_symbol_pattern(self):
        r = optimize_exhaustive("a", 0, UNIFORM)
        assert r.speed == 1.0
        assert r.provenance["assemblies_examined"] == 1
        machine, speed = r  # SearchResult unpacks
        assert speed == 1.0
        assert machine.order == 0

    @pytest.mark.parametrize(
        "w,k,expected,examined",
        [
            ("aa", 1, 1.2, 2),
            ("ab", 1, 1.2, 2),
            ("aa", 2, 1.2, 2),
            ("ab", 2, 1.2, 3),
        ],
    )
    def test_uniform_optima(self, w, k, expected, examined):
        r = optimize_exhaustive(w, k, UNIFORM)
        assert r.speed == pytest.approx(expected)
        assert r.provenance["assemblies_examined"] == examined

    @pytest.mark.parametrize(
        "w,expected", [("aa", 1.4736842105263157), ("ab", 1.12)]
    )
    def test_skewed_optima(self, w, expected):
        r = optimize_exhaustive(w, 1, SKEWED)
        assert r.speed == pytest.approx(expected)

    def test_wider_window_never_hurts(self):
        speeds = [optimize_exhaustive("ab", k, SKEWED).speed for k in (1, 2)]
        assert speeds[1] >= speeds[0] - 1e-12

    def test_winner_is_in_normal_form(self):
        for w, k, model in [("aa", 1, UNIFORM), ("ab", 2, SKEWED), ("aab", 2, UNIFORM)]:
            m = optimize_exhaustive(w, k, model).machine
            assert is_standard(m)
            assert check_validity_standard(m)
            assert _find_reduction(m) is None
            mems = memory_of_standard(m)
            assert len(set(mems.values())) == len(mems)
            nonsink = set(m.reachable_states()) - {m.sink}
            assert relevant_states(m) == nonsink

    def test_winner_actually_matches(self):
        m = optimize_exhaustive("aab", 2, UNIFORM).machine
        from oracles import occurrences

        for t in texts_upto("ab", 7):
            assert list(run_generic(m, t).occurrences) == occurrences("aab", t)
        assert validate_bruteforce(m).ok

    def test_winner_beats_every_classic(self):
        from automatch import ALGORITHMS, build_classic, standardize

        best = optimize_exhaustive("aab", 2, UNIFORM).speed
        for alg in ALGORITHMS:
            classic = standardize(build_classic(alg, "aab", alphabet="ab"))
            if classic.order > 2:
                continue
            assert best >= float(asymptotic_speed(classic, UNIFORM)) - 1e-9

    def test_assembly_cap_enforced(self):
        cfg = SearchConfig(strategy="exhaustive", assembly_cap=1)
        with pytest.raises(CapExceeded, match="hill_climb"):
            optimize_exhaustive("aa", 1, UNIFORM, cfg)

    def test_provenance_record(self):
        r = optimize_exhaustive("aa", 1, SKEWED)
        p = r.provenance
        assert p["w"] == "aa" and p["k"] == 1
        assert p["strategy"] == "exhaustive" and p["seed"] is None
        assert p["model"] == {"a": 0.25, "b": 0.75}
        assert p["speed"] == r.speed


class TestHillClimb:
    CASES = [
        ("aa", 1, UNIFORM),
        ("ab", 1, UNIFORM),
        ("aa", 2, UNIFORM),
        ("aa", 1, SKEWED),
        ("ab", 1, SKEWED),
        ("aab", 2, UNIFORM),
    ]

    @pytest.mark.parametrize("w,k,model", CASES)
    def test_matches_exhaustive_on_small_instances(self, w, k, model):
        exact = optimize_exhaustive(w, k, model).speed
        climbed = optimize_hill_climb(w, k, model, SearchConfig(strategy="hill_climb", restarts=8, seed=0))
        assert climbed.speed == pytest.approx(exact, abs=1e-9)

    def test_deterministic_in_seed(self):
        cfg = SearchConfig(strategy="hill_climb", restarts=4, seed=5)
        a = optimize_hill_climb("aab", 2, UNIFORM, cfg)
        b = optimize_hill_climb("aab", 2, UNIFORM, cfg)
        assert a.machine.signature() == b.machine.signature()
        assert a.speed == b.speed

    def test_provenance_reports_strategy_and_seed(self):
        cfg = SearchConfig(strategy="hill_climb", restarts=2, seed=7)
        p = optimize_hill_climb("aa", 1, UNIFORM, cfg).provenance
        assert p["strategy"] == "hill_climb" and p["seed"] == 7
        assert p["assemblies_examined"] > 0


class TestConfig:
    def test_unknown_strategy_rejected(self):
        with pytest.raises(MachineError):
            SearchConfig(strategy="simulated_annealing")

    def test_caps_must_be_positive(self):
        with pytest.raises(MachineError):
            SearchConfig(restarts=0)
