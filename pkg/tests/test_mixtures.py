import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infoplan.mixtures import (HypothesisMixture, ImpossibleOutcomeError, ObservationHistory,
                               UnattributableRecordError, bayes_update, bayes_update_all,
                               empirical_posterior, empirical_posterior_from_counts,
                               posterior_likelihood, proposal_mixture, uninformative_mixture)

COIN = {"fair": {"H": 0.5, "T": 0.5}, "biased": {"H": 0.9, "T": 0.1}}


def test_validation():
    with pytest.raises(ValueError):
        HypothesisMixture(("a", "a"), [0.5, 0.5])
    with pytest.raises(ValueError):
        HypothesisMixture(("a", "b"), [0.7, 0.7])
    with pytest.raises(ValueError):
        uninformative_mixture(["only"])


def test_posterior_likelihood_and_update():
    m = uninformative_mixture(["fair", "biased"], COIN)
    assert posterior_likelihood(m, "H") == pytest.approx(0.7)
    post = bayes_update(m, "H")
    assert post.weight("biased") == pytest.approx(0.45 / 0.7)
    seq = bayes_update_all(m, ["H", "T", "H"])
    expected = 0.9 * 0.1 * 0.9 / (0.9 * 0.1 * 0.9 + 0.125)
    assert seq.weight("biased") == pytest.approx(expected)


def test_impossible_outcome():
    m = proposal_mixture({"x": 0.3, "y": 0.7}, {"x": {"a": 1.0}, "y": {"a": 1.0}})
    with pytest.raises(ImpossibleOutcomeError):
        bayes_update(m, "b")


def test_update_without_likelihoods():
    with pytest.raises(ValueError):
        bayes_update(HypothesisMixture(("a", "b"), [0.5, 0.5]), "x")


@given(st.lists(st.sampled_from("HT"), max_size=30))
@settings(max_examples=50)
def test_update_order_invariance(seq):
    m = uninformative_mixture(["fair", "biased"], COIN)
    a = bayes_update_all(m, seq).weight("biased")
    b = bayes_update_all(m, list(reversed(seq))).weight("biased")
    assert a == pytest.approx(b, abs=1e-9)


def test_empirical_posterior_laplace():
    h = ObservationHistory()
    assert empirical_posterior(["a", "b"], h).as_dict() == {"a": 0.5, "b": 0.5}
    h.extend(["a", "a", "b"], "exp1")
    assert empirical_posterior(["a", "b", "c"], h).as_dict() == pytest.approx(
        {"a": 3 / 6, "b": 2 / 6, "c": 1 / 6})
    h.append("zzz", "exp2")
    with pytest.raises(UnattributableRecordError):
        empirical_posterior(["a", "b"], h)
    assert empirical_posterior_from_counts({"x": 8, "y": 0}).weight("x") == pytest.approx(0.9)
    assert h.counts() == {"a": 2, "b": 1, "zzz": 1}
