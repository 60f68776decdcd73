"""Expectation potential information and the analyses built on it.

E(Ip) of a design under a hypothesis mixture is

    sum_i w_i * D(omega_i(X^n) || psi_PL(X^n)),   psi_PL = sum_i w_i * omega_i

where omega_i is hypothesis i's distribution of the n-replicate outcome
(or of its counts sufficient statistic).
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .infocore import (DiscreteDistribution, GaussianTraitModel, JointDistribution,
                       OutcomeSpace, binary_entropy, entropy, gaussian_entropy,
                       mutual_information)
from .mixtures import HypothesisMixture

COUNTS = "counts"
SEQUENCE = "full-sequence"
MAX_SEQUENCE_STATES = 10 ** 6


class IntractableError(ValueError):
    pass


class ZeroCostError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentDesign:
    id: str
    hypothesis_outcomes: Mapping[str, DiscreteDistribution]
    replicates: int = 1
    sufficient_statistic: str = COUNTS
    controls: frozenset = frozenset()
    setup_cost: float = 1.0
    replicate_cost: float = 0.0

    def __post_init__(self):
        outcomes = dict(self.hypothesis_outcomes)
        if not outcomes:
            raise ValueError(f"design {self.id!r} has no hypotheses")
        spaces = {d.space for d in outcomes.values()}
        if len(spaces) != 1:
            raise ValueError(f"design {self.id!r}: hypotheses disagree on the outcome space")
        if self.replicates < 1:
            raise ValueError(f"design {self.id!r}: replicates must be >= 1")
        if self.sufficient_statistic not in (COUNTS, SEQUENCE):
            raise ValueError(f"unknown sufficient statistic {self.sufficient_statistic!r}")
        if self.setup_cost < 0 or self.replicate_cost < 0:
            raise ValueError("costs must be non-negative")
        object.__setattr__(self, "hypothesis_outcomes", outcomes)
        object.__setattr__(self, "controls", frozenset(self.controls))

    @property
    def space(self) -> OutcomeSpace:
        return next(iter(self.hypothesis_outcomes.values())).space

    @property
    def total_cost(self) -> float:
        return self.setup_cost + self.replicates * self.replicate_cost

    def with_replicates(self, n: int) -> "ExperimentDesign":
        return replace(self, replicates=n)


# ---------------------------------------------------------------- replicates

@lru_cache(maxsize=256)
def compositions(n: int, k: int) -> np.ndarray:
    """All k-tuples of non-negative integers summing to n, as an array."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    rows = []
    for first in range(n, -1, -1):
        rest = compositions(n - first, k - 1)
        rows.append(np.column_stack([np.full(len(rest), first), rest]))
    out = np.vstack(rows)
    out.setflags(write=False)
    return out


def multinomial_pmf(probs: np.ndarray, n: int) -> np.ndarray:
    """Probability of every count vector in ``compositions(n, len(probs))``."""
    probs = np.asarray(probs, dtype=float)
    counts = compositions(n, probs.size)
    logp = np.full(len(counts), gammaln(n + 1)) - gammaln(counts + 1).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.log(probs)
        # 0 * log 0 = 0; positive counts on an impossible category -> probability 0
        terms = np.where(counts > 0, counts * logq, 0.0)
    return np.exp(logp + terms.sum(axis=1))


def sequence_pmf(probs: np.ndarray, n: int) -> np.ndarray:
    """Probability of every length-n outcome sequence (lexicographic order)."""
    probs = np.asarray(probs, dtype=float)
    if probs.size ** n > MAX_SEQUENCE_STATES:
        raise IntractableError(
            f"{probs.size}^{n} outcome sequences exceed {MAX_SEQUENCE_STATES}")
    out = probs
    for _ in range(n - 1):
        out = np.outer(out, probs).ravel()
    return out


def replicate_probs(dist: DiscreteDistribution, n: int,
                    statistic: str = COUNTS) -> np.ndarray:
    if statistic == COUNTS:
        return multinomial_pmf(dist.probs, n)
    return sequence_pmf(dist.probs, n)


def replicate_distribution(dist: DiscreteDistribution, n: int,
                           statistic: str = COUNTS) -> DiscreteDistribution:
    """The n-replicate outcome distribution as a labelled distribution."""
    probs = replicate_probs(dist, n, statistic)
    labels = dist.space.labels
    if statistic == COUNTS:
        names = [",".join(f"{l}={c}" for l, c in zip(labels, row))
                 for row in compositions(n, len(labels))]
    else:
        names = ["|".join(seq) for seq in itertools.product(labels, repeat=n)]
    return DiscreteDistribution(OutcomeSpace(names), probs / probs.sum())


# ---------------------------------------------------------------- E(Ip)

def _aligned_weights(design: ExperimentDesign, m: HypothesisMixture) -> dict[str, float]:
    weights = m.as_dict()
    missing = set(weights) - set(design.hypothesis_outcomes)
    if missing:
        raise KeyError(f"design {design.id!r} has no outcome model for {sorted(missing)}")
    return weights


def _grouped(design: ExperimentDesign, weights: Mapping[str, float]):
    """Active hypotheses grouped by identical per-replicate predictions."""
    groups: list[tuple[DiscreteDistribution, float, list[str]]] = []
    for mid, w in weights.items():
        if w <= 0:
            continue
        dist = design.hypothesis_outcomes[mid]
        for i, (d, gw, ids) in enumerate(groups):
            if d == dist:
                groups[i] = (d, gw + w, ids + [mid])
                break
        else:
            groups.append((dist, w, [mid]))
    return groups


def component_divergences(design: ExperimentDesign,
                          m: HypothesisMixture) -> dict[str, float]:
    """D(omega_i(X^n) || psi_PL(X^n)) for every hypothesis with positive weight.

    Outcomes that every active hypothesis declares impossible are dropped
    from the support; hypotheses with identical predictions diverge by
    exactly 0.
    """
    weights = _aligned_weights(design, m)
    groups = _grouped(design, weights)
    out = {mid: 0.0 for mid, w in weights.items() if w > 0}
    if len(groups) <= 1:
        return out
    total = sum(gw for _, gw, _ in groups)
    mats = np.array([replicate_probs(d, design.replicates, design.sufficient_statistic)
                     for d, _, _ in groups])
    gw = np.array([w for _, w, _ in groups]) / total
    psi = gw @ mats
    keep = psi > 0
    mats, psi = mats[:, keep], psi[keep]
    for (d, _, ids), row in zip(groups, mats):
        nz = row > 0
        val = float((row[nz] * (np.log2(row[nz]) - np.log2(psi[nz]))).sum())
        for mid in ids:
            out[mid] = max(val, 0.0)
    return out


def expectation_ip(design: ExperimentDesign, m: HypothesisMixture) -> float:
    """Expected potential information of ``design`` under mixture ``m`` (bits)."""
    divs = component_divergences(design, m)
    weights = m.as_dict()
    return float(sum(weights[k] * v for k, v in divs.items()))


def targeted_ip(e_ip: float, tau: float) -> float:
    """Down-weight an E(Ip) by the probability tau that the observable is on target."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    return tau * e_ip


def component_targeted_ip(design: ExperimentDesign, m: HypothesisMixture,
                          tau: Mapping[str, float]) -> float:
    """sum_i w_i * tau_i * D(omega_i || psi_PL).

    Per-hypothesis targeting: tau_i is the probability that the observable is
    on target when hypothesis i is true.  With a constant tau this equals
    ``targeted_ip(expectation_ip(design, m), tau)``.
    """
    divs = component_divergences(design, m)
    weights = m.as_dict()
    total = 0.0
    for k, v in divs.items():
        t = float(tau.get(k, 0.0))
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"tau for {k!r} must lie in [0, 1], got {t}")
        total += weights[k] * t * v
    return total


def disambiguation_value(m: HypothesisMixture) -> float:
    """Entropy of the mixture weights.

    This is the E(Ip) of any design whose hypotheses have pairwise disjoint
    outcome supports, and an upper bound on every design's E(Ip).
    """
    return entropy(m.weights)


def brute_force_mutual_information(design: ExperimentDesign, m: HypothesisMixture) -> float:
    """I(X^n; Omega) from the explicit joint over full outcome sequences."""
    weights = _aligned_weights(design, m)
    ids = [k for k, w in weights.items() if w > 0]
    rows = np.array([weights[k] * sequence_pmf(design.hypothesis_outcomes[k].probs,
                                               design.replicates) for k in ids])
    rows = rows / rows.sum()
    return mutual_information(JointDistribution.from_array(rows, rows=ids))


# ---------------------------------------------------------------- yield curves

@dataclass(frozen=True)
class YieldCurve:
    points: tuple[tuple[int, float], ...]
    rates: tuple[float, ...]
    capacity: float
    bound: float = field(default=float("nan"))

    @property
    def ns(self) -> list[int]:
        return [n for n, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    def value_at(self, n: int) -> float:
        return dict(self.points)[n]

    @classmethod
    def from_values(cls, ns: Sequence[int], values: Sequence[float],
                    bound: float = float("nan")) -> "YieldCurve":
        ns = [int(n) for n in ns]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("yield-curve n values must be strictly increasing")
        values = [float(v) for v in values]
        rates, prev_n, prev_v = [], 0, 0.0
        for n, v in zip(ns, values):
            rates.append((v - prev_v) / (n - prev_n))
            prev_n, prev_v = n, v
        return cls(tuple(zip(ns, values)), tuple(rates), values[-1], bound)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "e_ip_bits", "rate_bits_per_replicate"])
        for (n, v), r in zip(self.points, self.rates):
            w.writerow([n, repr(v), repr(r)])
        return buf.getvalue()


def yield_curve(design: ExperimentDesign, m: HypothesisMixture, n_max: int,
                tau: float | Mapping[str, float] | None = None) -> YieldCurve:
    """E(Ip) at n = 1..n_max replicates, optionally targeted."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if design.sufficient_statistic == SEQUENCE:
        if n_max > 20:
            raise IntractableError("full-sequence statistic is limited to n_max <= 20")
        if len(design.space) ** n_max > MAX_SEQUENCE_STATES:
            raise IntractableError(
                f"{len(design.space)}^{n_max} sequences exceed {MAX_SEQUENCE_STATES}")
    values = []
    for n in range(1, n_max + 1):
        d = design.with_replicates(n)
        if tau is None:
            values.append(expectation_ip(d, m))
        elif isinstance(tau, Mapping):
            values.append(component_targeted_ip(d, m, tau))
        else:
            values.append(targeted_ip(expectation_ip(d, m), tau))
    return YieldCurve.from_values(range(1, n_max + 1), values,
                                  bound=disambiguation_value(m))


def efficiency(e_ip: float, design: ExperimentDesign) -> float:
    """Bits per unit cost, cost = c_s + n * c_r."""
    cost = design.total_cost
    if not cost > 0:
        raise ZeroCostError(f"design {design.id!r} has zero total cost")
    return e_ip / cost


# ---------------------------------------------------------------- worked designs

def _binary_mixture(p: float, yes: str, no: str) -> HypothesisMixture:
    return HypothesisMixture((yes, no), [p, 1.0 - p])


def bad_weather_design(p_bad: float, with_control: bool = False,
                       n: int = 1) -> ExperimentDesign:
    """Wh x Pu fertility test where bad weather blocks every seed.

    Without a control each replicate shows only whether seeds grew.  A
    Pu x Pu control seed shares the weather draw and grows unless the
    weather was bad, which exposes the weather outcome.
    """
    _check_prob(p_bad, "p_bad")
    if with_control:
        space = OutcomeSpace(["grow|ctl-grow", "none|ctl-grow", "none|ctl-none"])
        same = [1 - p_bad, 0.0, p_bad]
        diff = [0.0, 1 - p_bad, p_bad]
        controls = {"pu-x-pu"}
    else:
        space = OutcomeSpace(["grow", "none"])
        same = [1 - p_bad, p_bad]
        diff = [0.0, 1.0]
        controls = set()
    return ExperimentDesign(
        id="wh-x-pu" + ("+control" if with_control else ""),
        hypothesis_outcomes={"same-species": DiscreteDistribution(space, same),
                             "different-species": DiscreteDistribution(space, diff)},
        replicates=n, controls=frozenset(controls),
        setup_cost=1.0, replicate_cost=2.0 if with_control else 1.0)


def bad_weather_curve(p_bad: float, prior: float, with_control: bool,
                      n_max: int) -> YieldCurve:
    design = bad_weather_design(p_bad, with_control)
    return yield_curve(design, _binary_mixture(prior, "same-species", "different-species"),
                       n_max)


def env_factor_design(p_env: float, with_control: bool = False,
                      n: int = 1) -> ExperimentDesign:
    """Wh x Wh heritability test confounded by a soil factor that turns plants Wh."""
    _check_prob(p_env, "p_env")
    if with_control:
        space = OutcomeSpace(["Wh|ctl-Pu", "Wh|ctl-Wh", "Pu|ctl-Pu"])
        heritable = [1.0, 0.0, 0.0]
        env = [0.0, p_env, 1 - p_env]
    else:
        space = OutcomeSpace(["Wh", "Pu"])
        heritable = [1.0, 0.0]
        env = [p_env, 1 - p_env]
    return ExperimentDesign(
        id="wh-x-wh" + ("+control" if with_control else ""),
        hypothesis_outcomes={"Wh-heritable": DiscreteDistribution(space, heritable),
                             "Wh-env": DiscreteDistribution(space, env)},
        replicates=n, controls=frozenset({"pu-x-pu"} if with_control else ()),
        setup_cost=1.0, replicate_cost=2.0 if with_control else 1.0)


def env_factor_curve(p_env: float, p_heritable: float, with_control: bool,
                     n_max: int) -> YieldCurve:
    """Heritability-targeted yield curve of the Wh x Wh test.

    Only the Wh-heritable hypothesis is on target, so the yield is
    p_heritable * D(omega_heritable || psi_PL).
    """
    _check_prob(p_heritable, "p_heritable")
    m = _binary_mixture(p_heritable, "Wh-heritable", "Wh-env")
    tau = {"Wh-heritable": 1.0, "Wh-env": 0.0}
    return yield_curve(env_factor_design(p_env, with_control), m, n_max, tau=tau)


def technical_failure_joint(alpha: float, f: float,
                            with_control: bool) -> JointDistribution:
    _check_prob(alpha, "alpha")
    _check_prob(f, "f")
    if with_control:
        cols = ["x+c+", "x-c-", "x-c+"]
        probs = [[alpha * (1 - f), alpha * f, 0.0],
                 [0.0, (1 - alpha) * f, (1 - alpha) * (1 - f)]]
    else:
        cols = ["x+", "x-"]
        probs = [[alpha * (1 - f), alpha * f],
                 [0.0, 1 - alpha]]
    return JointDistribution.from_array(probs, rows=["psi+", "psi-"], cols=cols)


def technical_failure_mi(alpha: float, f: float, with_control: bool) -> float:
    """Total E(Ip) of a design whose every replicate fails with probability f."""
    return mutual_information(technical_failure_joint(alpha, f, with_control))


def control_information(alpha: float, f: float) -> float:
    """E(Ip) rescued by adding a positive control to the failure-prone design."""
    return max(technical_failure_mi(alpha, f, True) - technical_failure_mi(alpha, f, False),
               0.0)


def novel_trait_divergence(divergence_sd: float = 10.0, sd: float = 1.0,
                           p_novel: float = 0.5, width: float = 20.0) -> float:
    """D(novel || psi) for a trait lying inside the flat part of psi.

    psi reserves p_novel of its mass for a flat density p_novel / width
    (covering deviations up to ``width / 2`` either side of the reference
    peak) and the rest for the reference Gaussian peak.  For a novel trait
    ``divergence_sd`` standard deviations away, the reference peak is
    negligible and the divergence is -log2(p_novel / width) - h(novel).
    """
    _check_prob(p_novel, "p_novel")
    if not p_novel > 0:
        raise ValueError("p_novel must be positive")
    flat = p_novel / width
    ref = GaussianTraitModel(0.0, sd)
    novel_log_psi = np.log2(flat + (1 - p_novel) * float(ref.pdf(divergence_sd * sd)))
    return float(-novel_log_psi - gaussian_entropy(sd))


def discovery_ip(p_novel: float, divergence: float) -> float:
    """Yield of a discovery experiment: only the novel-trait outcome is on target."""
    _check_prob(p_novel, "p_novel")
    return p_novel * divergence


# ---------------------------------------------------------------- ranking

def rank_key(score: float, cost: float, design_id: str):
    """Sort key: higher score first, then lower cost, then id."""
    return (-score, cost, design_id)


def _check_prob(p: float, name: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


__all__ = [
    "COUNTS", "SEQUENCE", "ExperimentDesign", "IntractableError", "YieldCurve",
    "ZeroCostError", "bad_weather_curve", "bad_weather_design",
    "brute_force_mutual_information", "component_divergences",
    "component_targeted_ip", "compositions", "control_information",
    "disambiguation_value", "discovery_ip", "efficiency", "env_factor_curve",
    "env_factor_design", "expectation_ip", "multinomial_pmf",
    "novel_trait_divergence", "rank_key", "replicate_distribution",
    "sequence_pmf", "targeted_ip", "technical_failure_joint",
    "technical_failure_mi", "yield_curve", "binary_entropy",
]
