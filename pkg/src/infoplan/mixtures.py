"""De Finetti hypothesis mixtures: posterior likelihood and weight updating."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

Likelihood = Callable[[Any], float]


class ImpossibleOutcomeError(ValueError):
    """Every component assigns zero probability to the observed outcome."""


class UnattributableRecordError(ValueError):
    pass


def _likelihood_fn(obj) -> Likelihood | None:
    if obj is None or callable(obj):
        return obj
    if isinstance(obj, Mapping):
        return lambda x, _m=obj: float(_m.get(x, 0.0))
    raise TypeError(f"cannot use {type(obj).__name__} as a likelihood")


@dataclass(frozen=True, eq=False)
class HypothesisMixture:
    """Named component models with mixture weights.

    ``likelihoods`` may be omitted when the mixture is only used as a weight
    vector (for example when scored against an ExperimentDesign).
    """

    model_ids: tuple[str, ...]
    weights: np.ndarray
    likelihoods: tuple[Likelihood | None, ...] | None = None

    def __post_init__(self):
        ids = tuple(self.model_ids)
        if not ids:
            raise ValueError("a mixture needs at least one component")
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate model ids in {ids}")
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(ids),):
            raise ValueError("weights must align with model ids")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must be a probability vector, got {w}")
        w.setflags(write=False)
        object.__setattr__(self, "model_ids", ids)
        object.__setattr__(self, "weights", w)
        if self.likelihoods is not None:
            liks = tuple(_likelihood_fn(f) for f in self.likelihoods)
            if len(liks) != len(ids):
                raise ValueError("likelihoods must align with model ids")
            object.__setattr__(self, "likelihoods", liks)

    @classmethod
    def from_dict(cls, weights: Mapping[str, float],
                  likelihoods: Mapping[str, Any] | None = None) -> "HypothesisMixture":
        ids = tuple(weights)
        liks = None if likelihoods is None else tuple(likelihoods[k] for k in ids)
        return cls(ids, [weights[k] for k in ids], liks)

    def weight(self, model_id: str) -> float:
        return float(self.weights[self.model_ids.index(model_id)])

    def as_dict(self) -> dict[str, float]:
        return {k: float(w) for k, w in zip(self.model_ids, self.weights)}

    def with_likelihoods(self, likelihoods: Mapping[str, Any]) -> "HypothesisMixture":
        return HypothesisMixture(self.model_ids, self.weights,
                                 tuple(likelihoods[k] for k in self.model_ids))

    def _component_likelihoods(self, outcome) -> np.ndarray:
        if self.likelihoods is None or any(f is None for f in self.likelihoods):
            raise ValueError("mixture has no likelihood functions attached")
        vals = np.array([float(f(outcome)) for f in self.likelihoods])
        if np.any(vals < 0):
            raise ValueError(f"negative likelihood for outcome {outcome!r}")
        return vals

    def __repr__(self) -> str:
        return f"HypothesisMixture({self.as_dict()!r})"


def posterior_likelihood(m: HypothesisMixture, outcome) -> float:
    """psi_PL(outcome) = sum_i w_i * likelihood_i(outcome)."""
    return float(np.dot(m.weights, m._component_likelihoods(outcome)))


def bayes_update(m: HypothesisMixture, outcome) -> HypothesisMixture:
    lik = m._component_likelihoods(outcome)
    joint = m.weights * lik
    total = joint.sum()
    if not total > 0:
        raise ImpossibleOutcomeError(
            f"outcome {outcome!r} has zero likelihood under every component "
            f"of {m.model_ids}")
    return HypothesisMixture(m.model_ids, joint / total, m.likelihoods)


def bayes_update_all(m: HypothesisMixture, outcomes: Iterable) -> HypothesisMixture:
    for x in outcomes:
        m = bayes_update(m, x)
    return m


def uninformative_mixture(model_ids: Sequence[str],
                          likelihoods: Mapping[str, Any] | None = None) -> HypothesisMixture:
    ids = tuple(model_ids)
    if len(ids) < 2:
        raise ValueError("an uninformative prior needs at least two models")
    k = len(ids)
    liks = None if likelihoods is None else tuple(likelihoods[i] for i in ids)
    return HypothesisMixture(ids, np.full(k, 1.0 / k), liks)


def proposal_mixture(prior: Mapping[str, float],
                     likelihoods: Mapping[str, Any] | None = None) -> HypothesisMixture:
    """Mixture with an explicit caller-supplied prior (an arbitrary proposal).

    No complexity penalty is applied; the caller owns the prior.
    """
    return HypothesisMixture.from_dict(prior, likelihoods)


@dataclass
class ObservationHistory:
    """Append-only record of (outcome, experiment_id) pairs."""

    records: list[tuple[Hashable, str]] = field(default_factory=list)

    def append(self, outcome: Hashable, experiment_id: str) -> None:
        self.records.append((outcome, experiment_id))

    def extend(self, outcomes: Iterable[Hashable], experiment_id: str) -> None:
        for x in outcomes:
            self.append(x, experiment_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(tuple(self.records))

    def counts(self, attribute: Callable[[tuple], Hashable] | None = None) -> dict:
        attribute = attribute or (lambda rec: rec[0])
        out: dict = {}
        for rec in self.records:
            key = attribute(rec)
            out[key] = out.get(key, 0) + 1
        return out


def empirical_posterior(model_ids: Sequence[str], history: ObservationHistory,
                        attribute: Callable[[tuple], str] | None = None) -> HypothesisMixture:
    """Laplace-smoothed frequencies (count + 1) / (n + k).

    ``attribute`` maps a record to the model id it supports; by default the
    record's outcome is taken to be that id.
    """
    ids = tuple(model_ids)
    attribute = attribute or (lambda rec: rec[0])
    counts = dict.fromkeys(ids, 0)
    for rec in history:
        key = attribute(rec)
        if key not in counts:
            raise UnattributableRecordError(
                f"record {rec!r} is not attributable to any of {ids}")
        counts[key] += 1
    n, k = sum(counts.values()), len(ids)
    return HypothesisMixture(ids, [(counts[i] + 1) / (n + k) for i in ids])


def empirical_posterior_from_counts(counts: Mapping[str, int]) -> HypothesisMixture:
    history = ObservationHistory()
    for model_id, c in counts.items():
        history.extend([model_id] * int(c), "historical")
    return empirical_posterior(tuple(counts), history)
