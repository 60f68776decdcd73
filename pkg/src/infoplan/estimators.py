"""Sample-based estimators: empirical log-likelihood, entropy, information,
and potential information with a one-sided lower confidence bound.

A *model* is anything that maps an observation to a probability (discrete
samples) or a density (continuous samples): a mapping, a
``DiscreteDistribution`` or any callable.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.stats import norm

from .infocore import GaussianTraitModel, entropy, gaussian_entropy


class ZeroLikelihoodError(ValueError):
    def __init__(self, index: int, observation: Any):
        super().__init__(
            f"model assigns zero likelihood to observation {index} ({observation!r})")
        self.index = index
        self.observation = observation


class DegenerateSampleError(ValueError):
    pass


@dataclass(frozen=True)
class ObservationSample:
    observations: tuple
    tags: tuple | None = None
    traits: tuple | None = None  # optional per-observation trait vectors

    def __post_init__(self):
        obs = tuple(self.observations)
        object.__setattr__(self, "observations", obs)
        if self.tags is not None:
            tags = tuple(self.tags)
            if len(tags) != len(obs):
                raise ValueError("tags must align with observations")
            object.__setattr__(self, "tags", tags)
        if self.traits is not None:
            traits = tuple(tuple(float(v) for v in t) for t in self.traits)
            if len(traits) != len(obs):
                raise ValueError("traits must align with observations")
            object.__setattr__(self, "traits", traits)
        kinds = {_kind(x) for x in obs}
        if len(kinds) > 1:
            raise ValueError("observations mix discrete labels and real values")

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def is_continuous(self) -> bool:
        return bool(self.observations) and _kind(self.observations[0]) == "real"

    def values(self) -> np.ndarray:
        return np.asarray(self.observations, dtype=float)

    def counts(self) -> Counter:
        return Counter(self.observations)


def _kind(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "label"
    return "real" if isinstance(x, (int, float, np.integer, np.floating)) else "label"


@dataclass(frozen=True)
class IpEstimate:
    mean: float
    lower_bound: float
    per_observation: tuple[float, ...]
    confidence: float = 0.95

    @property
    def n(self) -> int:
        return len(self.per_observation)

    @property
    def total(self) -> float:
        return self.mean * self.n

    @property
    def total_lower_bound(self) -> float:
        return self.lower_bound * self.n


def _likelihoods(sample: ObservationSample, model) -> np.ndarray:
    if len(sample) == 0:
        raise ValueError("cannot score an empty sample")
    fn: Callable = model.get if isinstance(model, Mapping) else model
    out = np.empty(len(sample))
    for i, x in enumerate(sample.observations):
        v = fn(x)
        v = 0.0 if v is None else float(v)
        if not v > 0:
            raise ZeroLikelihoodError(i, x)
        out[i] = v
    return out


def log_likelihoods(sample: ObservationSample, model) -> np.ndarray:
    """Per-observation log2 likelihoods."""
    return np.log2(_likelihoods(sample, model))


def empirical_log_likelihood(sample: ObservationSample, model) -> float:
    return float(log_likelihoods(sample, model).mean())


def empirical_entropy(sample: ObservationSample) -> float:
    """Plug-in entropy for labels; Gaussian-fit entropy for real values."""
    n = len(sample)
    if n == 0:
        raise ValueError("cannot estimate entropy of an empty sample")
    if not sample.is_continuous:
        freqs = np.array(list(sample.counts().values()), dtype=float) / n
        return entropy(freqs)
    if n < 2:
        raise DegenerateSampleError("continuous entropy needs at least 2 observations")
    sd = float(np.std(sample.values(), ddof=1))
    if not sd > 0:
        raise DegenerateSampleError("continuous sample has zero variance")
    return gaussian_entropy(GaussianTraitModel(0.0, sd))


def empirical_information(sample: ObservationSample, model, baseline) -> float:
    """Gain in mean log-likelihood of ``model`` over ``baseline``.

    Only meaningful on data held out from fitting ``model``.
    """
    return float((log_likelihoods(sample, model) - log_likelihoods(sample, baseline)).mean())


def potential_information(sample: ObservationSample, model,
                          confidence: float = 0.95) -> IpEstimate:
    """Mean and lower-bound potential information of ``model`` on ``sample``.

    per_observation[i] = -log2 model(x_i) - He, so the entries average to the
    mean estimate and rank observations by how surprising they are.  The
    lower bound is mean - z * SE with the sample standard error of those
    entries (one-sided normal approximation).
    """
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    he = empirical_entropy(sample)
    per = -log_likelihoods(sample, model) - he
    mean = float(per.mean())
    n = per.size
    se = float(np.std(per, ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    lower = mean - float(norm.ppf(confidence)) * se
    lower = min(lower, mean)
    return IpEstimate(mean=mean, lower_bound=lower,
                      per_observation=tuple(float(v) for v in per),
                      confidence=confidence)


def localize(est: IpEstimate, k: int) -> list[int]:
    """Indices of the k largest per-observation contributions; ties by index."""
    if not 0 <= k <= est.n:
        raise ValueError(f"k={k} outside 0..{est.n}")
    order = sorted(range(est.n), key=lambda i: (-est.per_observation[i], i))
    return order[:k]


def parse_observations(lines: Sequence[str]) -> ObservationSample:
    """Parse the line-oriented observation format.

    One observation per line, optionally followed by a tab and a tag.  Blank
    lines and ``#`` comments are skipped.  If every value parses as a float
    the sample is continuous, otherwise all values are labels.
    """
    values, tags = [], []
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        value, _, tag = line.partition("\t")
        value = value.strip()
        if not value:
            raise ValueError(f"line {lineno}: empty observation")
        values.append(value)
        tags.append(tag.strip() or None)
    if not values:
        raise ValueError("no observations found")
    try:
        obs = tuple(float(v) for v in values)
    except ValueError:
        obs = tuple(values)
    has_tags = any(t is not None for t in tags)
    return ObservationSample(obs, tuple(tags) if has_tags else None)


def format_observations(sample: ObservationSample) -> str:
    rows = []
    for i, x in enumerate(sample.observations):
        text = repr(float(x)) if sample.is_continuous else str(x)
        tag = sample.tags[i] if sample.tags else None
        rows.append(f"{text}\t{tag}" if tag is not None else text)
    return "\n".join(rows) + "\n"
