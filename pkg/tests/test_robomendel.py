import json

import pytest

from infoplan.estimators import ObservationSample
from infoplan.genetics import WorldConfig, run_design
from infoplan.robomendel import (LFLS, MORE_TRAITS, ONE_PARENT, PU_UNDILUTABLE, SAME_SPECIES,
                                 SPECIES_HYBRID, TRANSMISSION, WH_HERITABLE, BeliefState,
                                 InconsistentResultError, MaxCyclesExceeded, PlannerOptions,
                                 Transcript, alternative_path, choose, evaluate_cycle, ingest,
                                 initial_belief, repetition_ceiling, run_sequence, standard_set)


def scores(b, opts=PlannerOptions()):
    return {s.experiment: s.bits for s in evaluate_cycle(b, opts)}


def test_initial_belief_defaults():
    b = initial_belief()
    assert b.probabilities == {LFLS: 0.999, WH_HERITABLE: 0.5, SAME_SPECIES: 0.5}
    assert b.tau == {"Wh": 0.5}
    assert len(standard_set(b)) == 6
    with pytest.raises(ValueError):
        BeliefState({"bogus": 0.5})
    with pytest.raises(ValueError):
        BeliefState({LFLS: 1.5})


def test_belief_json_roundtrip():
    b = initial_belief()
    assert BeliefState.from_json(json.loads(json.dumps(b.to_json()))) == b
    with pytest.raises(ValueError):
        BeliefState.from_json({"probabilities": {}, "extra": 1})


def test_ingest_wh_x_wh_clamps():
    w = WorldConfig()
    b = ingest(initial_belief(), "wh-x-wh", run_design("wh-x-wh", w), world=w)
    assert b.p(WH_HERITABLE) == 0.999
    assert b.resolved[WH_HERITABLE] is True
    assert b.tau["Wh"] == 1.0


def test_unclamped_updates_keep_exact_posterior():
    w = WorldConfig()
    opts = PlannerOptions(clamp=False)
    b = ingest(initial_belief(), "wh-x-wh", run_design("wh-x-wh", w), opts, world=w)
    assert b.p(WH_HERITABLE) == 1.0


def test_bad_weather_is_uninformative():
    w = WorldConfig(p_bad_weather=1.0)
    events = []
    b0 = initial_belief()
    b = ingest(b0, "wh-x-wh", run_design("wh-x-wh", w), world=w, events=events)
    assert b == b0 and "uninformative" in events[0]


def test_no_progeny_partially_lowers_same_species():
    b = ingest(initial_belief(), "wh-x-pu", ObservationSample(("no-progeny",), ("a:-",)))
    q = PlannerOptions().wh_x_pu_failure
    assert b.p(SAME_SPECIES) == pytest.approx(0.5 * q / (0.5 * q + 0.5))
    assert SAME_SPECIES not in b.resolved


def test_inconsistent_result():
    bad = ObservationSample(("Pu", "Wh"), ("a:0", "a:1"))
    with pytest.raises(InconsistentResultError):
        ingest(initial_belief(), "wh-x-wh", bad)


def test_repetition_decay():
    w = WorldConfig()
    b = ingest(initial_belief(), "wh-x-wh", run_design("wh-x-wh", w), world=w)
    assert scores(b)["wh-x-wh"] <= repetition_ceiling()
    loose = PlannerOptions(retire_resolved=False)
    assert 0 < scores(b, loose)["wh-x-wh"] <= repetition_ceiling() + 1e-12


def test_doubling_after_heritability_confirmed():
    w = WorldConfig()
    s1 = scores(initial_belief())["wh-x-pu"]
    b = ingest(initial_belief(), "wh-x-wh", run_design("wh-x-wh", w), world=w)
    assert scores(b)["wh-x-pu"] == pytest.approx(2 * s1, rel=1e-12)


def test_joint_choice_window():
    from infoplan.robomendel import Score
    s = [Score("a", 1.0, 1), Score("b", 0.97, 1), Score("c", 0.96, 1)]
    assert choose(s) == ["a", "b"]
    assert choose(s, PlannerOptions(joint_window=0.0)) == ["a"]
    assert choose([Score("z", 0.0, 1)]) == ["z"]


def test_canonical_events_and_models():
    t = run_sequence()
    b = t.final_belief
    assert b.resolved[ONE_PARENT] is False and ONE_PARENT not in b.proposed_models
    assert b.resolved[TRANSMISSION] is True
    assert b.resolved[MORE_TRAITS] is True
    assert "novel-trait" in b.flags
    assert "Hy" in b.stocks


def test_transcript_roundtrip_bytes():
    t = run_sequence(WorldConfig(rng_seed=5))
    text = t.dumps()
    assert Transcript.from_json(json.loads(text)).dumps() == text
    assert "cycle 5" in t.log()


def test_max_cycles():
    with pytest.raises(MaxCyclesExceeded):
        run_sequence(max_cycles=2)


def test_pu_undilutable_path():
    t = alternative_path(PU_UNDILUTABLE)
    third = t.cycles[2]
    assert third.chosen[0] == "hy-x-wh"
    assert dict((s.experiment, s.bits) for s in third.scores)["hy-x-wh"] == pytest.approx(1.0, abs=1e-6)
    assert t.final_belief.p(PU_UNDILUTABLE) == pytest.approx(0.001)
    assert "hidden-variable" in t.final_belief.flags
    assert TRANSMISSION in t.final_belief.proposed_models


def test_species_hybrid_path():
    t = alternative_path("species-hybrid")
    third = t.cycles[2]
    assert third.chosen[0] == "hy-x-hy"
    assert dict((s.experiment, s.bits) for s in third.scores)["hy-x-hy"] == pytest.approx(1.0)
    assert t.final_belief.resolved[SPECIES_HYBRID] is False
    assert TRANSMISSION in t.final_belief.proposed_models


def test_alternative_path_rejects_unknown():
    with pytest.raises(ValueError):
        alternative_path("canonical")


@pytest.mark.parametrize("seed", range(8))
def test_sequence_is_seed_robust(seed):
    t = run_sequence(WorldConfig(rng_seed=seed))
    assert [c.chosen[0] for c in t.cycles] == ["wh-x-wh", "wh-x-pu", "wh-x-pu-swap",
                                               "hy-x-wh", "pu-x-pu-self"]
