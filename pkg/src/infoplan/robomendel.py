"""The RoboMendel planning loop.

Each cycle scores the standard cross set against the models currently in
play, runs the best design (or the best pair, when their scores are nearly
tied) in the simulated world, and folds the result back into the belief
state.  Model proposals are triggered by fixed rules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .estimators import ObservationSample
from .genetics import NO_PROGENY, WorldConfig, run_design, world_from_dict, world_to_dict
from .infocore import DiscreteDistribution, OutcomeSpace, binary_entropy
from .mixtures import HypothesisMixture
from .planner import (ExperimentDesign, component_targeted_ip, discovery_ip,
                      novel_trait_divergence, rank_key)

LFLS = "LFLS"
WH_HERITABLE = "Wh-heritable"
SAME_SPECIES = "same-species"
ONE_PARENT = "one-parent"
TRANSMISSION = "transmission"
MORE_TRAITS = "more-traits"
PU_UNDILUTABLE = "Pu-undilutable"
SPECIES_HYBRID = "species-hybrid"
BELIEF_NAMES = (LFLS, WH_HERITABLE, SAME_SPECIES, ONE_PARENT, TRANSMISSION,
                MORE_TRAITS, PU_UNDILUTABLE, SPECIES_HYBRID)

CANONICAL = "canonical"
PATHS = (CANONICAL, "pu-undilutable", "species-hybrid")
_PATH_PROPOSAL = {CANONICAL: ONE_PARENT, "pu-undilutable": PU_UNDILUTABLE,
                  "species-hybrid": SPECIES_HYBRID}

HIDDEN_VARIABLE = "hidden-variable"
NOVEL_TRAIT = "novel-trait"

DESIGN_ORDER = ("mouse-x-lion", "wh-x-wh", "wh-x-pu", "wh-x-pu-swap", "pu-x-pu-swap",
                "pu-x-pu-self", "hy-x-hy", "hy-x-wh", "hy-x-pu")
_CROSSES = {"wh-x-pu-swap": 2, "pu-x-pu-swap": 2}


class MaxCyclesExceeded(RuntimeError):
    pass


class InconsistentResultError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlannerOptions:
    progeny_per_design: int = 20
    clamp: bool = True
    clamp_low: float = 0.001
    clamp_high: float = 0.999
    retire_resolved: bool = True
    joint_window: float = 0.05
    max_joint: int = 2
    stop_threshold: float = 0.012
    # probability that a same-species Wh x Pu cross still yields no usable progeny
    wh_x_pu_failure: float = 2.0 / 3.0
    # belief that an environmental factor whitens a plant (Wh x Wh confound)
    p_env_belief: float = 0.0
    wh_x_wh_control: bool = False
    novelty_z: float = 5.0
    novel_divergence_sd: float = 10.0
    novel_width: float = 20.0

    def __post_init__(self):
        if self.progeny_per_design < 1:
            raise ValueError("progeny_per_design must be >= 1")
        if not 0.0 < self.clamp_low < 0.5 < self.clamp_high < 1.0:
            raise ValueError("clamp bounds must satisfy 0 < low < 0.5 < high < 1")
        for name in ("wh_x_pu_failure", "p_env_belief"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.joint_window < 0 or self.stop_threshold < 0:
            raise ValueError("joint_window and stop_threshold must be non-negative")
        if self.max_joint < 1:
            raise ValueError("max_joint must be >= 1")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# ---------------------------------------------------------------- belief

@dataclass(frozen=True)
class BeliefState:
    """Named model probabilities plus bookkeeping.

    ``resolved`` records questions settled by a decisive result (True for
    confirmed, False for rejected).  ``tau`` holds targeting weights per
    observable; only ``Wh`` is tracked, every other observable uses 1.
    """

    probabilities: Mapping[str, float]
    resolved: Mapping[str, bool] = field(default_factory=dict)
    proposed_models: frozenset = frozenset()
    stocks: tuple = ("Pu", "Wh", "Mouse", "Lion")
    flags: tuple = ()
    tau: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        probs = {k: float(v) for k, v in dict(self.probabilities).items()}
        for k, v in probs.items():
            if k not in BELIEF_NAMES:
                raise ValueError(f"unknown belief {k!r}")
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"p({k}) must lie in [0, 1], got {v}")
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "resolved", dict(self.resolved))
        object.__setattr__(self, "proposed_models",
                           frozenset(self.proposed_models) or frozenset(probs))
        object.__setattr__(self, "stocks", tuple(self.stocks))
        object.__setattr__(self, "flags", tuple(self.flags))
        object.__setattr__(self, "tau", {"Wh": _tau_wh(probs, self.resolved)})

    def p(self, name: str) -> float:
        return self.probabilities[name]

    def to_json(self) -> dict:
        return {"probabilities": dict(sorted(self.probabilities.items())),
                "resolved": dict(sorted(self.resolved.items())),
                "proposed_models": sorted(self.proposed_models),
                "stocks": list(self.stocks),
                "flags": list(self.flags),
                "tau": dict(sorted(self.tau.items()))}

    @classmethod
    def from_json(cls, data: Mapping) -> "BeliefState":
        known = {"probabilities", "resolved", "proposed_models", "stocks", "flags", "tau"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown belief-state keys {sorted(unknown)}")
        if "probabilities" not in data:
            raise ValueError("belief state needs 'probabilities'")
        return cls(data["probabilities"], data.get("resolved", {}),
                   frozenset(data.get("proposed_models", ())),
                   tuple(data.get("stocks", ("Pu", "Wh", "Mouse", "Lion"))),
                   tuple(data.get("flags", ())))


def _tau_wh(probs: Mapping[str, float], resolved: Mapping[str, bool]) -> float:
    if WH_HERITABLE not in probs:
        return 1.0
    state = resolved.get(WH_HERITABLE)
    if state is True:
        return 1.0
    if state is False:
        return 0.0
    return probs[WH_HERITABLE]


def initial_belief(p_lfls: float = 0.999, p_wh_heritable: float = 0.5,
                   p_same_species: float = 0.5) -> BeliefState:
    return BeliefState({LFLS: p_lfls, WH_HERITABLE: p_wh_heritable,
                        SAME_SPECIES: p_same_species})


def _in_play(b: BeliefState, name: str, opts: PlannerOptions) -> float | None:
    """Weight of ``name`` for scoring, or None when the model was never proposed."""
    if name not in b.probabilities:
        return None
    if opts.retire_resolved and name in b.resolved:
        return 1.0 if b.resolved[name] else 0.0
    return b.probabilities[name]


# ---------------------------------------------------------------- designs

BIN = OutcomeSpace(("progeny", NO_PROGENY))
COLOUR = OutcomeSpace(("Wh", "Pu"))
HY = OutcomeSpace(("Wh", "Pu", "none"))
PAIR = OutcomeSpace(("Pu|Pu", "Pu|Wh", "Wh|Pu", "Wh|Wh"))
NOVEL = OutcomeSpace(("novel", "none"))


def _white(space: OutcomeSpace, p: float) -> DiscreteDistribution:
    return DiscreteDistribution.from_mapping({"Wh": p, "Pu": 1.0 - p}, space)


def _predict(design_id: str, a: Mapping[str, bool], opts: PlannerOptions,
             n: int) -> DiscreteDistribution:
    """Per-replicate outcome distribution of a design under a joint assignment."""
    yes = lambda q: a.get(q, False)  # noqa: E731
    if design_id == "mouse-x-lion":
        return DiscreteDistribution.point(BIN, NO_PROGENY if yes(LFLS) else "progeny")
    if design_id == "wh-x-wh":
        return _white(COLOUR, 1.0 if yes(WH_HERITABLE) else opts.p_env_belief)
    if design_id == "wh-x-pu":
        if yes(SAME_SPECIES):
            q = opts.wh_x_pu_failure
            return DiscreteDistribution(BIN, [1.0 - q, q])
        return DiscreteDistribution.point(BIN, NO_PROGENY)
    if design_id == "wh-x-pu-swap":
        # father-only inheritance makes the Pu-mother orientation white
        return DiscreteDistribution.point(PAIR, "Pu|Wh" if yes(ONE_PARENT) else "Pu|Pu")
    if design_id == "pu-x-pu-swap":
        return DiscreteDistribution.point(PAIR, "Pu|Pu")
    if design_id == "pu-x-pu-self":
        if yes(MORE_TRAITS):
            p = 1.0 - 0.75 ** n
            return DiscreteDistribution(NOVEL, [p, 1.0 - p])
        return DiscreteDistribution.point(NOVEL, "none")
    if design_id in ("hy-x-hy", "hy-x-wh", "hy-x-pu"):
        if yes(SPECIES_HYBRID):
            return DiscreteDistribution.point(HY, "none")
        if yes(TRANSMISSION):
            w = {"hy-x-hy": 0.25, "hy-x-wh": 0.5, "hy-x-pu": 0.0}[design_id]
        elif PU_UNDILUTABLE in a and not a[PU_UNDILUTABLE]:
            # blending counter-model: white with the child's Wh ancestry fraction
            w = {"hy-x-hy": 0.5, "hy-x-wh": 0.75, "hy-x-pu": 0.25}[design_id]
        else:
            w = 0.0
        return DiscreteDistribution.from_mapping({"Wh": w, "Pu": 1.0 - w, "none": 0.0}, HY)
    raise KeyError(design_id)


_QUESTIONS = {
    "mouse-x-lion": (LFLS,),
    "wh-x-wh": (WH_HERITABLE,),
    "wh-x-pu": (SAME_SPECIES,),
    "wh-x-pu-swap": (ONE_PARENT,),
    "pu-x-pu-swap": (ONE_PARENT,),
    "pu-x-pu-self": (MORE_TRAITS,),
    "hy-x-hy": (SPECIES_HYBRID, TRANSMISSION, PU_UNDILUTABLE),
    "hy-x-wh": (SPECIES_HYBRID, TRANSMISSION, PU_UNDILUTABLE, ONE_PARENT),
    "hy-x-pu": (SPECIES_HYBRID, TRANSMISSION, PU_UNDILUTABLE),
}

_REPLICATED = {"wh-x-wh", "wh-x-pu-swap", "pu-x-pu-swap", "hy-x-hy", "hy-x-wh", "hy-x-pu"}


@dataclass(frozen=True)
class Candidate:
    design: ExperimentDesign
    mixture: HypothesisMixture
    assignments: Mapping[str, Mapping[str, bool]]
    tau: Mapping[str, float]
    discovery: bool = False


def _label(assign: Mapping[str, bool]) -> str:
    if not assign:
        return "prior"
    return ",".join(f"{'' if v else '~'}{k}" for k, v in sorted(assign.items()))


def candidates(b: BeliefState, opts: PlannerOptions = PlannerOptions()) -> list[Candidate]:
    n = opts.progeny_per_design
    out = []
    for did in DESIGN_ORDER:
        if did.startswith("hy-") and "Hy" not in b.stocks:
            continue
        qs = [(q, _in_play(b, q, opts)) for q in _QUESTIONS[did]]
        qs = [(q, p) for q, p in qs if p is not None]
        outcomes, weights, assigns = {}, {}, {}
        for values in product((True, False), repeat=len(qs)):
            assign = {q: v for (q, _), v in zip(qs, values)}
            w = math.prod(p if v else 1.0 - p for (_, p), v in zip(qs, values))
            key = _label(assign)
            outcomes[key] = _predict(did, assign, opts, n)
            weights[key] = w
            assigns[key] = assign
        total = sum(weights.values())
        weights = {k: v / total for k, v in weights.items()}
        crosses = _CROSSES.get(did, 1)
        design = ExperimentDesign(did, outcomes,
                                  replicates=n if did in _REPLICATED else 1,
                                  controls=("pu-x-pu",) if did == "wh-x-wh" and opts.wh_x_wh_control else (),
                                  setup_cost=float(crosses), replicate_cost=0.01 * crosses)
        tau = 1.0 if did == "mouse-x-lion" else b.tau["Wh"]
        out.append(Candidate(design, HypothesisMixture.from_dict(weights),
                             assigns, {k: tau for k in outcomes},
                             discovery=did == "pu-x-pu-self"))
    return out


def standard_set(b: BeliefState, opts: PlannerOptions = PlannerOptions()) -> list[ExperimentDesign]:
    return [c.design for c in candidates(b, opts)]


@dataclass(frozen=True)
class Score:
    experiment: str
    bits: float
    cost: float

    def to_json(self) -> dict:
        return {"experiment": self.experiment, "e_ip_bits": self.bits, "cost": self.cost}


def score_candidate(c: Candidate, opts: PlannerOptions = PlannerOptions()) -> float:
    if c.discovery:
        p = c.mixture.as_dict()
        p_more = sum(w for k, w in p.items() if c.assignments[k].get(MORE_TRAITS))
        if p_more in (0.0, 1.0):
            return 0.0
        return discovery_ip(p_more, novel_trait_divergence(opts.novel_divergence_sd,
                                                           1.0, 0.5, opts.novel_width))
    return component_targeted_ip(c.design, c.mixture, c.tau)


def evaluate_cycle(b: BeliefState, opts: PlannerOptions = PlannerOptions()) -> list[Score]:
    """Targeted E(Ip) of every standard design, best first."""
    scores = [Score(c.design.id, score_candidate(c, opts), c.design.total_cost)
              for c in candidates(b, opts)]
    return sorted(scores, key=lambda s: rank_key(s.bits, s.cost, s.experiment))


def choose(scores: Sequence[Score], opts: PlannerOptions = PlannerOptions()) -> list[str]:
    if not scores:
        return []
    top = scores[0].bits
    picked = [s.experiment for s in scores
              if s.bits > 0 and top - s.bits <= opts.joint_window]
    return picked[:opts.max_joint] or [scores[0].experiment]


# ---------------------------------------------------------------- ingestion

def _test_observations(sample: ObservationSample) -> list[tuple[str, str, tuple | None]]:
    """(orientation, observation, traits) for test plants, dropping plots whose
    control plant shows the environmental factor."""
    tags = sample.tags or tuple(f"a:{i}" for i in range(len(sample)))
    traits = sample.traits or (None,) * len(sample)
    affected = {t.split(":", 1)[1] for t, x in zip(tags, sample.observations)
                if t.startswith("ctl:") and x == "Wh"}
    out = []
    for t, x, tr in zip(tags, sample.observations, traits):
        orient, _, idx = t.partition(":")
        if orient == "ctl" or idx in affected:
            continue
        out.append((orient, x, tr))
    return out


def _novel_seen(rows, opts: PlannerOptions, w: WorldConfig) -> bool:
    ref = w.trait_models.get("Pu")
    mean, sd = (ref.mean, ref.sd) if ref is not None else (0.0, 1.0)
    for _, _, tr in rows:
        if tr is None:
            continue
        z = np.abs((np.asarray(tr) - mean) / sd)
        if np.any(z[1:] > opts.novelty_z):
            return True
    return False


def observed_labels(design_id: str, sample: ObservationSample, opts: PlannerOptions,
                    w: WorldConfig) -> list[str] | None:
    """Map a simulated result onto the design's outcome space.

    Returns None for an uninformative result (a colour design whose cross
    failed, e.g. through bad weather).
    """
    rows = _test_observations(sample)
    empty = all(x == NO_PROGENY for _, x, _ in rows)
    if design_id in ("mouse-x-lion", "wh-x-pu"):
        return [NO_PROGENY if empty else "progeny"]
    if design_id == "pu-x-pu-self":
        return None if empty else ["novel" if _novel_seen(rows, opts, w) else "none"]
    if design_id in ("wh-x-pu-swap", "pu-x-pu-swap"):
        a = [x for o, x, _ in rows if o == "a" and x != NO_PROGENY]
        bb = [x for o, x, _ in rows if o == "b" and x != NO_PROGENY]
        if not a or not bb:
            return None
        return [f"{x}|{y}" for x, y in zip(a, bb)]
    if design_id.startswith("hy-"):
        return ["none"] if empty else [x for _, x, _ in rows]
    return None if empty else [x for _, x, _ in rows]


def _coarsen(question: str, label: str) -> str:
    if question == SPECIES_HYBRID:
        return "none" if label == "none" else "progeny"
    return label


def _question_posterior(c: Candidate, question: str, labels: Sequence[str]) -> float | None:
    weights = c.mixture.as_dict()
    prior_yes = sum(v for k, v in weights.items() if c.assignments[k].get(question))
    if prior_yes in (0.0, 1.0):
        return None
    logs = {}
    for k, dist in c.design.hypothesis_outcomes.items():
        probs = {}
        for lab, p in dist.as_dict().items():
            key = _coarsen(question, lab)
            probs[key] = probs.get(key, 0.0) + p
        total = 0.0
        for lab in labels:
            p = probs.get(_coarsen(question, lab), 0.0)
            if p <= 0:
                total = -math.inf
                break
            total += math.log(p)
        logs[k] = total
    finite = [v for v in logs.values() if v > -math.inf]
    if not finite:
        raise InconsistentResultError(
            f"{c.design.id}: result impossible under every active model for {question}")
    top = max(finite)
    post = {k: weights[k] * (math.exp(v - top) if v > -math.inf else 0.0)
            for k, v in logs.items()}
    z = sum(post.values())
    if z <= 0:
        raise InconsistentResultError(
            f"{c.design.id}: result impossible under every weighted model for {question}")
    return sum(v for k, v in post.items() if c.assignments[k].get(question)) / z


def _set_belief(b: BeliefState, name: str, p: float, opts: PlannerOptions) -> BeliefState:
    probs = dict(b.probabilities)
    resolved = dict(b.resolved)
    if p >= opts.clamp_high:
        resolved[name] = True
        p = opts.clamp_high if opts.clamp else p
    elif p <= opts.clamp_low:
        resolved[name] = False
        p = opts.clamp_low if opts.clamp else p
    probs[name] = p
    return replace(b, probabilities=probs, resolved=resolved)


def _propose(b: BeliefState, name: str, events: list, p: float = 0.5) -> BeliefState:
    if name in b.probabilities:
        return b
    events.append(f"proposed {name}")
    probs = dict(b.probabilities)
    probs[name] = p
    return replace(b, probabilities=probs, proposed_models=b.proposed_models | {name})


def _flag(b: BeliefState, flag: str, events: list) -> BeliefState:
    if flag in b.flags:
        return b
    events.append(f"flag {flag}")
    return replace(b, flags=b.flags + (flag,))


def _retire_rejected(b: BeliefState) -> BeliefState:
    rejected = {k for k, v in b.resolved.items() if v is False}
    return replace(b, proposed_models=b.proposed_models - rejected)


def ingest(b: BeliefState, design_id: str, sample: ObservationSample,
           opts: PlannerOptions = PlannerOptions(), world: WorldConfig | None = None,
           path: str = CANONICAL, events: list | None = None) -> BeliefState:
    """Fold one design's result into the belief state."""
    events = [] if events is None else events
    world = world or WorldConfig()
    cand = {c.design.id: c for c in candidates(b, opts)}.get(design_id)
    if cand is None:
        raise KeyError(f"design {design_id!r} is not available in this belief state")
    labels = observed_labels(design_id, sample, opts, world)
    if labels is None:
        events.append(f"{design_id}: uninformative result")
        return b
    for q in _QUESTIONS[design_id]:
        if q not in b.probabilities or (opts.retire_resolved and q in b.resolved):
            continue
        post = _question_posterior(cand, q, labels)
        if post is None:
            continue
        b = _set_belief(b, q, post, opts)
        if q in b.resolved:
            events.append(f"{'confirmed' if b.resolved[q] else 'rejected'} {q}")

    colours = [x for _, x, _ in _test_observations(sample) if x in ("Wh", "Pu")]
    if design_id == "wh-x-pu" and labels == ["progeny"]:
        if "Hy" not in b.stocks:
            b = replace(b, stocks=b.stocks + ("Hy",))
            events.append("stock Hy available")
        if colours and len(set(colours)) == 1:
            b = _propose(b, _PATH_PROPOSAL[path], events)
    if design_id == "wh-x-pu-swap" and b.resolved.get(ONE_PARENT) is False:
        b = _propose(b, TRANSMISSION, events)
    if design_id.startswith("hy-") and "Wh" in colours:
        # purple plants that look alike breed differently
        if TRANSMISSION not in b.probabilities:
            b = _flag(b, HIDDEN_VARIABLE, events)
        b = _propose(b, TRANSMISSION, events)
    if b.resolved.get(TRANSMISSION) is True:
        b = _propose(b, MORE_TRAITS, events)
    if design_id == "pu-x-pu-self" and labels == ["novel"]:
        b = _flag(b, NOVEL_TRAIT, events)
    return _retire_rejected(b)


# ---------------------------------------------------------------- transcripts

@dataclass(frozen=True)
class PlanningCycle:
    index: int
    scores: tuple[Score, ...]
    chosen: tuple[str, ...]
    observed: Mapping[str, dict]
    belief_before: BeliefState
    belief_after: BeliefState
    events: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"index": self.index,
                "scores": [s.to_json() for s in self.scores],
                "chosen": list(self.chosen),
                "observed": {k: self.observed[k] for k in sorted(self.observed)},
                "belief_before": self.belief_before.to_json(),
                "belief_after": self.belief_after.to_json(),
                "events": list(self.events)}

    @classmethod
    def from_json(cls, d: Mapping) -> "PlanningCycle":
        return cls(d["index"],
                   tuple(Score(s["experiment"], s["e_ip_bits"], s["cost"]) for s in d["scores"]),
                   tuple(d["chosen"]), dict(d["observed"]),
                   BeliefState.from_json(d["belief_before"]),
                   BeliefState.from_json(d["belief_after"]), tuple(d["events"]))


@dataclass(frozen=True)
class Transcript:
    path: str
    world: WorldConfig
    options: PlannerOptions
    cycles: tuple[PlanningCycle, ...]
    final_scores: tuple[Score, ...]
    final_belief: BeliefState

    @property
    def chosen(self) -> list[tuple[str, ...]]:
        return [c.chosen for c in self.cycles]

    def to_json(self) -> dict:
        return {"path": self.path,
                "world": world_to_dict(self.world),
                "options": self.options.to_dict(),
                "cycles": [c.to_json() for c in self.cycles],
                "final_scores": [s.to_json() for s in self.final_scores],
                "final_belief": self.final_belief.to_json()}

    def dumps(self) -> str:
        return dumps(self.to_json())

    @classmethod
    def from_json(cls, d: Mapping) -> "Transcript":
        return cls(d["path"], world_from_dict(d["world"]), PlannerOptions(**d["options"]),
                   tuple(PlanningCycle.from_json(c) for c in d["cycles"]),
                   tuple(Score(s["experiment"], s["e_ip_bits"], s["cost"])
                         for s in d["final_scores"]),
                   BeliefState.from_json(d["final_belief"]))

    def log(self) -> str:
        lines = [f"path: {self.path}  seed: {self.world.rng_seed}"]
        for c in self.cycles:
            lines.append(f"cycle {c.index}")
            lines.extend(f"  {s.experiment:<14} {s.bits:.4f}" for s in c.scores)
            lines.append(f"  chosen: {', '.join(c.chosen)}")
            lines.extend(f"  {e}" for e in c.events)
        lines.append("final")
        lines.extend(f"  {s.experiment:<14} {s.bits:.4f}" for s in self.final_scores)
        return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _summary(sample: ObservationSample) -> dict:
    by: dict[str, dict[str, int]] = {}
    for t, x in zip(sample.tags or (), sample.observations):
        o = t.split(":", 1)[0]
        by.setdefault(o, {})
        by[o][x] = by[o].get(x, 0) + 1
    return {"n": len(sample), "counts": {o: dict(sorted(c.items())) for o, c in sorted(by.items())}}


def _cycle(b: BeliefState, index: int, world: WorldConfig, opts: PlannerOptions,
           path: str) -> PlanningCycle:
    scores = evaluate_cycle(b, opts)
    chosen = choose(scores, opts)
    after, observed, events = b, {}, []
    for did in chosen:
        sample = run_design(did, world, world.rng("cycle", index, did),
                            controls=("pu-x-pu",) if did == "wh-x-wh" and opts.wh_x_wh_control else ())
        observed[did] = _summary(sample)
        after = ingest(after, did, sample, opts, world, path, events)
    return PlanningCycle(index, tuple(scores), tuple(chosen), observed, b, after, tuple(events))


def _loop(world: WorldConfig, max_cycles: int, opts: PlannerOptions, path: str,
          belief: BeliefState | None, done: Callable[[BeliefState], bool]) -> Transcript:
    b = belief or initial_belief()
    cycles = []
    for i in range(1, max_cycles + 1):
        if done(b):
            break
        cyc = _cycle(b, i, world, opts, path)
        cycles.append(cyc)
        b = cyc.belief_after
    final = evaluate_cycle(b, opts)
    if not done(b):
        raise MaxCyclesExceeded(f"not finished after {max_cycles} cycles")
    return Transcript(path, world, opts, tuple(cycles), tuple(final), b)


def run_sequence(world: WorldConfig = WorldConfig(), max_cycles: int = 10,
                 opts: PlannerOptions = PlannerOptions(),
                 belief: BeliefState | None = None) -> Transcript:
    """Plan and run cycles until no design scores above the stop threshold."""
    def done(b):
        return evaluate_cycle(b, opts)[0].bits <= opts.stop_threshold
    return _loop(world, max_cycles, opts, CANONICAL, belief, done)


def alternative_path(proposal: str, world: WorldConfig = WorldConfig(), max_cycles: int = 10,
                     opts: PlannerOptions = PlannerOptions()) -> Transcript:
    """Replay the run with a different model proposed after the Wh x Pu result.

    The run ends once the transmission model has been proposed.
    """
    path = {PU_UNDILUTABLE: "pu-undilutable", SPECIES_HYBRID: "species-hybrid"}.get(proposal, proposal)
    if path not in PATHS or path == CANONICAL:
        raise ValueError(f"unknown alternative path {proposal!r}")
    return _loop(world, max_cycles, opts, path, None,
                 lambda b: TRANSMISSION in b.proposed_models)


def run_path(path: str, world: WorldConfig = WorldConfig(), max_cycles: int = 10,
             opts: PlannerOptions = PlannerOptions()) -> Transcript:
    if path == CANONICAL:
        return run_sequence(world, max_cycles, opts)
    return alternative_path(path, world, max_cycles, opts)


def repetition_ceiling(opts: PlannerOptions = PlannerOptions()) -> float:
    return binary_entropy(opts.clamp_high)
