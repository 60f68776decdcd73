import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infoplan.estimators import (DegenerateSampleError, ObservationSample, ZeroLikelihoodError,
                                 empirical_entropy, empirical_information,
                                 empirical_log_likelihood, format_observations, localize,
                                 parse_observations, potential_information)
from infoplan.infocore import DiscreteDistribution, GaussianTraitModel, OutcomeSpace


def test_empirical_log_likelihood_discrete():
    s = ObservationSample(("a", "a", "b", "b"))
    assert empirical_log_likelihood(s, {"a": 0.5, "b": 0.5}) == pytest.approx(-1.0)
    d = DiscreteDistribution(OutcomeSpace("ab"), [0.5, 0.5])
    assert empirical_log_likelihood(s, d) == pytest.approx(-1.0)


def test_zero_likelihood_reports_index():
    with pytest.raises(ZeroLikelihoodError) as e:
        empirical_log_likelihood(ObservationSample(("a", "c")), {"a": 1.0})
    assert e.value.index == 1


def test_empirical_entropy():
    assert empirical_entropy(ObservationSample(("a", "b") * 5)) == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    s = ObservationSample(tuple(rng.normal(0, 2, 5000)))
    assert empirical_entropy(s) == pytest.approx(0.5 * math.log2(2 * math.pi * math.e * 4), abs=0.02)
    with pytest.raises(DegenerateSampleError):
        empirical_entropy(ObservationSample((1.0,)))
    with pytest.raises(DegenerateSampleError):
        empirical_entropy(ObservationSample((1.0, 1.0)))


def test_empirical_information_is_log_ratio():
    s = ObservationSample(("a",) * 9 + ("b",))
    ie = empirical_information(s, {"a": 0.9, "b": 0.1}, {"a": 0.5, "b": 0.5})
    oracle = 0.9 * math.log2(0.9 / 0.5) + 0.1 * math.log2(0.1 / 0.5)
    assert ie == pytest.approx(oracle)


def test_potential_information_matched_model_is_near_zero():
    rng = np.random.default_rng(1)
    s = ObservationSample(tuple(rng.normal(0, 1, 2000)))
    est = potential_information(s, GaussianTraitModel())
    assert abs(est.mean) < 0.05
    assert est.lower_bound < est.mean
    assert est.lower_bound < 0.05


def test_potential_information_per_observation_average():
    s = ObservationSample(("a", "a", "b"))
    est = potential_information(s, {"a": 0.5, "b": 0.5})
    assert np.mean(est.per_observation) == pytest.approx(est.mean)
    assert est.total == pytest.approx(3 * est.mean)
    # plug-in: log2(2) - H(2/3) = D(empirical || uniform)
    assert est.mean == pytest.approx(1 - (-(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3)))


@given(st.floats(0.5, 0.999))
@settings(max_examples=30)
def test_lower_bound_tightens_with_confidence(c):
    s = ObservationSample(("a", "a", "b", "a", "b", "b", "a"))
    lo = potential_information(s, {"a": 0.3, "b": 0.7}, confidence=c)
    assert lo.lower_bound <= lo.mean
    hi = potential_information(s, {"a": 0.3, "b": 0.7}, confidence=min(c + 0.0005, 0.9999))
    assert hi.lower_bound <= lo.lower_bound + 1e-12


def test_localize_orders_by_contribution():
    s = ObservationSample((0.1, -0.2, 9.5, 0.3))
    est = potential_information(s, GaussianTraitModel())
    assert localize(est, 1) == [2]
    assert localize(est, 0) == []
    with pytest.raises(ValueError):
        localize(est, 5)


def test_parse_and_format_roundtrip():
    text = "# header\n0.5\tp1\n\n-1.25\tp2\n"
    s = parse_observations(text.splitlines())
    assert s.is_continuous and s.observations == (0.5, -1.25) and s.tags == ("p1", "p2")
    assert parse_observations(format_observations(s).splitlines()) == s
    labels = parse_observations(["Pu", "Wh", "2"])
    assert labels.observations == ("Pu", "Wh", "2")
    with pytest.raises(ValueError):
        parse_observations(["# only comments", ""])


def test_sample_rejects_mixed_kinds():
    with pytest.raises(ValueError):
        ObservationSample(("a", 1.0))
