"""Ground-truth simulator of the pea world.

Organisms carry a genotype (two alleles per locus) and a trait vector.
Crosses follow one of three inheritance models:

* ``LFLS``: a child copies one parent wholesale ("like father, like son");
* ``one-parent``: every child copies the father (the second parent);
* ``transmission``: each parent passes one uniformly chosen allele per locus.

In every model members of different species never produce offspring.  Bad
weather is drawn once per cross and kills every seed; the environmental
factor is drawn per plot and turns the flower of any plant in it white.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .estimators import ObservationSample
from .infocore import GaussianTraitModel

LFLS = "LFLS"
ONE_PARENT = "one-parent"
TRANSMISSION = "transmission"
INHERITANCE_MODELS = (LFLS, ONE_PARENT, TRANSMISSION)

FLOWER = "flower"
NO_PROGENY = "no-progeny"


class UnknownPhenotypeError(KeyError):
    pass


class UnknownDesignError(KeyError):
    pass


@dataclass(frozen=True)
class Locus:
    id: str
    alleles: tuple[str, str]
    dominance: Mapping[frozenset, str]
    axis: int = 0

    def __post_init__(self):
        a, b = self.alleles
        needed = {frozenset((a,)), frozenset((b,)), frozenset((a, b))}
        dom = {frozenset(k): v for k, v in dict(self.dominance).items()}
        if set(dom) != needed:
            raise ValueError(f"locus {self.id!r}: dominance must cover {needed}")
        object.__setattr__(self, "dominance", dom)

    def phenotype(self, pair: tuple[str, str]) -> str:
        return self.dominance[frozenset(pair)]

    @classmethod
    def dominant_recessive(cls, id: str, dominant: str, recessive: str,
                           dom_label: str, rec_label: str, axis: int) -> "Locus":
        return cls(id, (dominant, recessive),
                   {frozenset((dominant,)): dom_label,
                    frozenset((dominant, recessive)): dom_label,
                    frozenset((recessive,)): rec_label}, axis)


FLOWER_LOCUS = Locus.dominant_recessive(FLOWER, "pu", "wh", "Pu", "Wh", axis=0)
SEED_LOCUS = Locus.dominant_recessive("seed", "R", "r", "Round", "Wrinkled", axis=1)
DEFAULT_LOCI = (FLOWER_LOCUS, SEED_LOCUS)

DEFAULT_TRAIT_MODELS = {
    "Pu": GaussianTraitModel(0.0, 1.0),
    "Wh": GaussianTraitModel(10.0, 1.0),
    "Round": GaussianTraitModel(0.0, 1.0),
    "Wrinkled": GaussianTraitModel(10.0, 1.0),
}


@dataclass(frozen=True)
class Organism:
    species_id: str
    genotype: Mapping[str, tuple[str, str]]
    traits: tuple[float, ...] = ()
    phenotypes: Mapping[str, str] = field(default_factory=dict)
    plot: int | None = None

    def phenotype(self, locus_id: str = FLOWER) -> str:
        return self.phenotypes[locus_id]

    def to_json(self) -> dict:
        return {"species": self.species_id,
                "genotype": {k: list(v) for k, v in sorted(self.genotype.items())},
                "phenotypes": dict(sorted(self.phenotypes.items())),
                "traits": list(self.traits),
                "plot": self.plot}


@dataclass(frozen=True)
class WorldConfig:
    inheritance_model: str = TRANSMISSION
    p_bad_weather: float = 0.0
    p_env_factor: float = 0.0
    seeds_per_cross: int = 30
    trait_models: Mapping[str, GaussianTraitModel] = field(
        default_factory=lambda: dict(DEFAULT_TRAIT_MODELS))
    rng_seed: int = 0
    n_trait_dims: int = 4
    loci: tuple[Locus, ...] = DEFAULT_LOCI

    def __post_init__(self):
        if self.inheritance_model not in INHERITANCE_MODELS:
            raise ValueError(f"unknown inheritance model {self.inheritance_model!r}")
        for name in ("p_bad_weather", "p_env_factor"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.seeds_per_cross < 1:
            raise ValueError("seeds_per_cross must be >= 1")
        if self.n_trait_dims < max(l.axis for l in self.loci) + 1:
            raise ValueError("n_trait_dims is smaller than the loci's trait axes")
        models = {}
        for k, g in dict(self.trait_models).items():
            models[k] = g if isinstance(g, GaussianTraitModel) else GaussianTraitModel(*g)
        object.__setattr__(self, "trait_models", models)

    def locus(self, locus_id: str) -> Locus:
        for l in self.loci:
            if l.id == locus_id:
                return l
        raise KeyError(locus_id)

    def rng(self, *keys: str | int) -> np.random.Generator:
        """Generator seeded from the world seed and a stable key path."""
        words = [int(self.rng_seed)]
        for k in keys:
            words.append(zlib.crc32(k.encode()) if isinstance(k, str) else int(k))
        return np.random.default_rng(np.random.SeedSequence(words))


# ---------------------------------------------------------------- organisms

def phenotypes_of(genotype: Mapping[str, tuple[str, str]], w: WorldConfig) -> dict[str, str]:
    return {l.id: l.phenotype(genotype[l.id]) for l in w.loci if l.id in genotype}


def sample_traits(phenotype_labels: Mapping[str, str], w: WorldConfig,
                  rng: np.random.Generator) -> tuple[float, ...]:
    """One Gaussian draw per trait axis.

    Axes owned by a locus use the model of that locus's phenotype; the
    remaining axes share the reference (Pu) model.
    """
    reference = w.trait_models.get("Pu", GaussianTraitModel())
    means = [reference.mean] * w.n_trait_dims
    sds = [reference.sd] * w.n_trait_dims
    for l in w.loci:
        if l.id not in phenotype_labels:
            continue
        label = phenotype_labels[l.id]
        try:
            g = w.trait_models[label]
        except KeyError:
            raise UnknownPhenotypeError(f"no trait model for phenotype {label!r}") from None
        means[l.axis], sds[l.axis] = g.mean, g.sd
    return tuple(float(x) for x in rng.normal(means, sds))


def make_organism(species_id: str, genotype: Mapping[str, tuple[str, str]],
                  w: WorldConfig, rng: np.random.Generator, env_flag: bool = False,
                  plot: int | None = None) -> Organism:
    genotype = {k: tuple(v) for k, v in genotype.items()}
    phen = phenotypes_of(genotype, w)
    if env_flag and FLOWER in phen:
        phen[FLOWER] = "Wh"
    return Organism(species_id, genotype, sample_traits(phen, w, rng), phen, plot)


def stock(name: str, w: WorldConfig, rng: np.random.Generator | None = None) -> Organism:
    """The founder individuals of the RoboMendel world.

    The Pu founder carries a hidden recessive at the seed locus, which only
    a self-cross (or a cross with another carrier) reveals.
    """
    rng = rng if rng is not None else w.rng("stock", name)
    genotypes = {
        "Pu": {FLOWER: ("pu", "pu"), "seed": ("R", "r")},
        "Wh": {FLOWER: ("wh", "wh"), "seed": ("R", "R")},
        "Hy": {FLOWER: ("pu", "wh"), "seed": ("R", "R")},
        "Mouse": {},
        "Lion": {},
    }
    species = {"Mouse": "mouse", "Lion": "lion"}.get(name, "pea")
    if name not in genotypes:
        raise KeyError(f"unknown stock {name!r}")
    return make_organism(species, genotypes[name], w, rng)


# ---------------------------------------------------------------- crosses

def _child_genotype(a: Organism, b: Organism, w: WorldConfig,
                    rng: np.random.Generator) -> dict[str, tuple[str, str]]:
    if w.inheritance_model == TRANSMISSION:
        return {lid: (a.genotype[lid][rng.integers(2)], b.genotype[lid][rng.integers(2)])
                for lid in sorted(a.genotype)}
    if w.inheritance_model == ONE_PARENT:
        return dict(b.genotype)
    return dict(a.genotype if rng.integers(2) == 0 else b.genotype)


def cross(a: Organism, b: Organism, w: WorldConfig, rng: np.random.Generator,
          plots: Sequence[bool] | None = None, n: int | None = None) -> list[Organism]:
    """Offspring of mother ``a`` and father ``b``; possibly empty.

    ``plots`` gives the environmental-factor flag of the plot each seed is
    planted in (drawn here when omitted), so a control planted next to each
    seed can share it.
    """
    n = w.seeds_per_cross if n is None else n
    if a.species_id != b.species_id:
        return []
    if rng.random() < w.p_bad_weather:
        return []
    if plots is None:
        plots = draw_plots(n, w, rng)
    children = []
    for i in range(n):
        g = _child_genotype(a, b, w, rng)
        children.append(make_organism(a.species_id, g, w, rng, env_flag=bool(plots[i]),
                                      plot=i))
    return children


def draw_plots(n: int, w: WorldConfig, rng: np.random.Generator) -> list[bool]:
    return [bool(x) for x in rng.random(n) < w.p_env_factor]


def self_cross(a: Organism, w: WorldConfig, rng: np.random.Generator,
               n: int | None = None) -> list[Organism]:
    return cross(a, a, w, rng, n=n)


def dilution_factor(seeds_per_cross: int, generations: int) -> float:
    return float(seeds_per_cross) ** generations


def dilution_series(w: WorldConfig, generations: int = 10,
                    rng: np.random.Generator | None = None) -> list[float]:
    """White fraction per generation of a Pu lineage serially crossed to Wh.

    Generation 1 crosses Hy (the Wh x Pu hybrid) with Wh; each later
    generation crosses a purple child of the previous one with Wh again.
    """
    rng = rng if rng is not None else w.rng("dilution")
    wh = stock("Wh", w, rng)
    parent = cross(stock("Wh", w, rng), stock("Pu", w, rng), w, rng)
    parent = [c for c in parent if c.phenotype() == "Pu"]
    fractions = []
    for _ in range(generations):
        if not parent:
            break
        kids = cross(parent[0], wh, w, rng)
        if not kids:
            fractions.append(float("nan"))
            continue
        fractions.append(sum(k.phenotype() == "Wh" for k in kids) / len(kids))
        parent = [k for k in kids if k.phenotype() == "Pu"]
    return fractions


# ---------------------------------------------------------------- designs

# design id -> list of (orientation tag, mother stock, father stock)
STANDARD_CROSSES = {
    "mouse-x-lion": [("a", "Mouse", "Lion")],
    "wh-x-wh": [("a", "Wh", "Wh")],
    "wh-x-pu": [("a", "Wh", "Pu")],
    "wh-x-pu-swap": [("a", "Wh", "Pu"), ("b", "Pu", "Wh")],
    "pu-x-pu-swap": [("a", "Pu", "Pu"), ("b", "Pu", "Pu")],
    "pu-x-pu-self": [("a", "Pu", "self")],
    "hy-x-hy": [("a", "Hy", "Hy")],
    "hy-x-wh": [("a", "Wh", "Hy")],
    "hy-x-pu": [("a", "Pu", "Hy")],
}


def run_design(design_id: str, w: WorldConfig, rng: np.random.Generator | None = None,
               controls: Sequence[str] = ()) -> ObservationSample:
    """Simulate one standard design.

    Observations are flower-colour phenotypes of the offspring (or a single
    ``no-progeny`` record per empty cross); tags read ``<orientation>:<i>``
    and traits carry each child's full trait vector.  With the ``pu-x-pu``
    control a Pu x Pu seed is planted beside every test seed; control
    plants are tagged ``ctl:<i>``.
    """
    try:
        crosses = STANDARD_CROSSES[design_id]
    except KeyError:
        raise UnknownDesignError(f"unknown design {design_id!r}") from None
    rng = rng if rng is not None else w.rng("design", design_id)
    obs, tags, traits = [], [], []
    for tag, mother, father in crosses:
        a = stock(mother, w, rng)
        b = a if father == "self" else stock(father, w, rng)
        plots = draw_plots(w.seeds_per_cross, w, rng)
        kids = cross(a, b, w, rng, plots=plots)
        if not kids:
            obs.append(NO_PROGENY)
            tags.append(f"{tag}:-")
            traits.append((float("nan"),) * w.n_trait_dims)
            continue
        for i, k in enumerate(kids):
            obs.append(k.phenotype(FLOWER) if FLOWER in k.phenotypes else "progeny")
            tags.append(f"{tag}:{i}")
            traits.append(k.traits)
        if "pu-x-pu" in controls:
            pu = stock("Pu", w, rng)
            # shares the weather of the test cross: draw only the seeds
            ctl = [make_organism(pu.species_id, _child_genotype(pu, pu, w, rng), w, rng,
                                 env_flag=plots[i], plot=i) for i in range(len(kids))]
            for i, k in enumerate(ctl):
                obs.append(k.phenotype(FLOWER))
                tags.append(f"ctl:{i}")
                traits.append(k.traits)
    return ObservationSample(tuple(obs), tuple(tags), tuple(traits))


def split_by_orientation(sample: ObservationSample) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for x, tag in zip(sample.observations, sample.tags or ()):
        key = tag.split(":", 1)[0]
        out.setdefault(key, []).append(x)
    return out


def world_from_dict(data: Mapping) -> WorldConfig:
    data = dict(data)
    if "trait_models" in data:
        data["trait_models"] = {k: GaussianTraitModel(float(v["mean"]), float(v["sd"]))
                                for k, v in data["trait_models"].items()}
    return WorldConfig(**data)


def world_to_dict(w: WorldConfig) -> dict:
    return {"inheritance_model": w.inheritance_model,
            "p_bad_weather": w.p_bad_weather,
            "p_env_factor": w.p_env_factor,
            "seeds_per_cross": w.seeds_per_cross,
            "trait_models": {k: {"mean": g.mean, "sd": g.sd}
                             for k, g in sorted(w.trait_models.items())},
            "rng_seed": w.rng_seed,
            "n_trait_dims": w.n_trait_dims}


def with_seed(w: WorldConfig, seed: int) -> WorldConfig:
    return replace(w, rng_seed=int(seed))
