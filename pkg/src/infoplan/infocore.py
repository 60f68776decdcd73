"""Exact information-theoretic primitives on finite distributions.

Every public value is in bits.  ``0 * log 0`` is taken as 0; a reference
distribution that assigns zero probability where the other one has mass is
an error, never infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

SUM_TOL = 1e-12


class AbsoluteContinuityError(ValueError):
    """Raised when p puts mass on an outcome that q declares impossible."""


@dataclass(frozen=True)
class OutcomeSpace:
    labels: tuple[str, ...]

    def __init__(self, labels: Iterable[str]):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise ValueError("outcome space must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels in {labels!r}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"{label!r} is not in outcome space {self.labels!r}") from None


def _as_probs(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    space: OutcomeSpace
    probs: np.ndarray

    def __post_init__(self):
        probs = _as_probs(self.probs)
        if probs.ndim != 1 or probs.shape[0] != len(self.space):
            raise ValueError(
                f"expected {len(self.space)} probabilities, got shape {probs.shape}")
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError(f"probabilities must lie in [0, 1]: {probs}")
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float],
                     space: OutcomeSpace | None = None) -> "DiscreteDistribution":
        if space is None:
            space = OutcomeSpace(mapping.keys())
        unknown = set(mapping) - set(space.labels)
        if unknown:
            raise KeyError(f"labels {sorted(unknown)} not in {space.labels}")
        return cls(space, [float(mapping.get(k, 0.0)) for k in space.labels])

    @classmethod
    def point(cls, space: OutcomeSpace, label: str) -> "DiscreteDistribution":
        probs = np.zeros(len(space))
        probs[space.index(label)] = 1.0
        return cls(space, probs)

    def prob(self, label: str) -> float:
        return float(self.probs[self.space.index(label)])

    __call__ = prob

    def as_dict(self) -> dict[str, float]:
        return {k: float(p) for k, p in zip(self.space.labels, self.probs)}

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash((self.space, self.probs.tobytes()))

    def __repr__(self) -> str:
        return f"DiscreteDistribution({self.as_dict()!r})"


@dataclass(frozen=True)
class GaussianTraitModel:
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError(f"trait sd must be positive, got {self.sd}")

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * np.sqrt(2 * np.pi))

    def log2_pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return (-0.5 * z * z) / np.log(2) - np.log2(self.sd * np.sqrt(2 * np.pi))

    __call__ = pdf


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint probabilities of hidden states (rows) and observables (columns)."""

    row_space: OutcomeSpace
    col_space: OutcomeSpace
    probs: np.ndarray

    def __post_init__(self):
        probs = _as_probs(self.probs)
        if probs.shape != (len(self.row_space), len(self.col_space)):
            raise ValueError(
                f"joint shape {probs.shape} does not match "
                f"{len(self.row_space)}x{len(self.col_space)}")
        if np.any(probs < 0):
            raise ValueError("joint probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"joint probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_array(cls, probs, rows: Sequence[str] | None = None,
                   cols: Sequence[str] | None = None) -> "JointDistribution":
        probs = np.asarray(probs, dtype=float)
        rows = rows or [f"h{i}" for i in range(probs.shape[0])]
        cols = cols or [f"x{j}" for j in range(probs.shape[1])]
        return cls(OutcomeSpace(rows), OutcomeSpace(cols), probs)

    def row_marginal(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.row_space, _renorm(self.probs.sum(axis=1)))

    def col_marginal(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.col_space, _renorm(self.probs.sum(axis=0)))

    def row_conditional(self, i: int) -> DiscreteDistribution:
        row = self.probs[i]
        return DiscreteDistribution(self.col_space, _renorm(row / row.sum()))


def _renorm(p: np.ndarray) -> np.ndarray:
    # absorb accumulated rounding so the result passes the 1e-12 sum check
    return p / p.sum()


def _plogp_sum(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy(d: DiscreteDistribution | Sequence[float] | np.ndarray) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    probs = d.probs if isinstance(d, DiscreteDistribution) else np.asarray(d, dtype=float)
    return max(_plogp_sum(probs), 0.0)


def relative_entropy(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """D(p || q) in bits.

    Raises AbsoluteContinuityError if p(x) > 0 somewhere q(x) == 0.
    """
    if p.space != q.space:
        raise ValueError("relative entropy needs distributions over the same space")
    return _kl_bits(p.probs, q.probs, p.space.labels)


def _kl_bits(p: np.ndarray, q: np.ndarray, labels: Sequence[str] | None = None) -> float:
    support = p > 0
    bad = support & (q <= 0)
    if np.any(bad):
        where = [labels[i] for i in np.flatnonzero(bad)] if labels else np.flatnonzero(bad)
        raise AbsoluteContinuityError(
            f"reference distribution is zero on outcomes {list(where)} that have mass")
    ps, qs = p[support], q[support]
    return max(float((ps * (np.log2(ps) - np.log2(qs))).sum()), 0.0)


def mutual_information(j: JointDistribution) -> float:
    """I(rows; cols) in bits."""
    p = j.probs
    pr = p.sum(axis=1, keepdims=True)
    pc = p.sum(axis=0, keepdims=True)
    mask = p > 0
    rows, cols = np.nonzero(mask)
    # sum of logs: the product pr*pc can underflow for tiny marginals
    log_outer = np.log2(pr[rows, 0]) + np.log2(pc[0, cols])
    val = float((p[mask] * (np.log2(p[mask]) - log_outer)).sum())
    return max(val, 0.0)


def gaussian_entropy(g: GaussianTraitModel | float) -> float:
    """Differential entropy 1/2 log2(2 pi e sd^2) of a Gaussian trait model."""
    sd = g.sd if isinstance(g, GaussianTraitModel) else float(g)
    if not sd > 0:
        raise ValueError(f"trait sd must be positive, got {sd}")
    return 0.5 * np.log2(2 * np.pi * np.e) + float(np.log2(sd))


def binary_entropy(p: float) -> float:
    return entropy(np.array([p, 1.0 - p]))
