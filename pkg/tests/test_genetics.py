import math

import pytest

from infoplan.genetics import (LFLS, NO_PROGENY, ONE_PARENT, STANDARD_CROSSES, TRANSMISSION,
                               Locus, UnknownDesignError, UnknownPhenotypeError, WorldConfig,
                               cross, dilution_factor, dilution_series, run_design,
                               sample_traits, split_by_orientation, stock, world_from_dict,
                               world_to_dict)


def test_world_validation():
    with pytest.raises(ValueError):
        WorldConfig(inheritance_model="blend")
    with pytest.raises(ValueError):
        WorldConfig(p_bad_weather=1.5)
    with pytest.raises(ValueError):
        WorldConfig(seeds_per_cross=0)


def test_locus_dominance():
    l = Locus.dominant_recessive("f", "P", "p", "Pu", "Wh", 0)
    assert l.phenotype(("P", "p")) == "Pu"
    assert l.phenotype(("p", "p")) == "Wh"
    with pytest.raises(ValueError):
        Locus("x", ("A", "a"), {frozenset(("A",)): "big"})


def test_unknown_phenotype():
    w = WorldConfig(trait_models={"Pu": (0.0, 1.0)})
    with pytest.raises(UnknownPhenotypeError):
        sample_traits({"flower": "Wh"}, w, w.rng("t"))


def test_transmission_testcross_and_f1():
    w = WorldConfig(seeds_per_cross=2000, rng_seed=1)
    rng = w.rng("x")
    f1 = cross(stock("Wh", w, rng), stock("Pu", w, rng), w, rng)
    assert {k.phenotype() for k in f1} == {"Pu"}
    back = cross(stock("Wh", w, rng), stock("Hy", w, rng), w, rng)
    frac = sum(k.phenotype() == "Wh" for k in back) / len(back)
    assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / 2000)


def test_one_parent_copies_father():
    w = WorldConfig(inheritance_model=ONE_PARENT, seeds_per_cross=20)
    rng = w.rng("y")
    kids = cross(stock("Pu", w, rng), stock("Wh", w, rng), w, rng)
    assert {k.phenotype() for k in kids} == {"Wh"}


def test_lfls_copies_a_parent():
    w = WorldConfig(inheritance_model=LFLS, seeds_per_cross=200)
    rng = w.rng("z")
    kids = cross(stock("Hy", w, rng), stock("Wh", w, rng), w, rng)
    assert {tuple(k.genotype["flower"]) for k in kids} == {("pu", "wh"), ("wh", "wh")}


def test_species_barrier_in_every_model():
    for model in (LFLS, ONE_PARENT, TRANSMISSION):
        w = WorldConfig(inheritance_model=model)
        rng = w.rng("b")
        assert cross(stock("Mouse", w, rng), stock("Lion", w, rng), w, rng) == []


def test_bad_weather_kills_cross():
    w = WorldConfig(p_bad_weather=1.0)
    rng = w.rng("w")
    assert cross(stock("Wh", w, rng), stock("Wh", w, rng), w, rng) == []
    s = run_design("wh-x-wh", w)
    assert s.observations == (NO_PROGENY,)


def test_env_factor_whitens_and_control_shares_plots():
    w = WorldConfig(p_env_factor=1.0)
    s = run_design("wh-x-pu", w, controls=("pu-x-pu",))
    groups = split_by_orientation(s)
    assert set(groups["a"]) == {"Wh"} and set(groups["ctl"]) == {"Wh"}


def test_standard_designs():
    w = WorldConfig(rng_seed=4)
    assert set(run_design("wh-x-wh", w).observations) == {"Wh"}
    assert set(run_design("wh-x-pu", w).observations) == {"Pu"}
    assert run_design("mouse-x-lion", w).observations == (NO_PROGENY,)
    swap = split_by_orientation(run_design("wh-x-pu-swap", w))
    assert set(swap) == {"a", "b"} and len(swap["a"]) == 30
    self_cross = run_design("pu-x-pu-self", w)
    assert any(abs(t[1]) > 5 for t in self_cross.traits)
    with pytest.raises(UnknownDesignError):
        run_design("nope", w)
    assert set(STANDARD_CROSSES) >= {"hy-x-hy", "hy-x-wh", "hy-x-pu"}


def test_determinism_and_roundtrip():
    w = WorldConfig(rng_seed=9)
    assert run_design("hy-x-hy", w) == run_design("hy-x-hy", w)
    assert run_design("hy-x-hy", w) != run_design("hy-x-hy", WorldConfig(rng_seed=10))
    assert world_from_dict(world_to_dict(w)) == w


def test_dilution():
    assert dilution_factor(30, 10) == pytest.approx(30.0 ** 10)
    fr = dilution_series(WorldConfig(rng_seed=2), generations=4)
    assert len(fr) == 4 and all(0.2 < f < 0.8 for f in fr)
