"""Command-line entry point: ``infoplan {eval,curve,run,ip}``.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime
inconsistency during a simulated run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import planner
from .estimators import (DegenerateSampleError, ZeroLikelihoodError, localize,
                         parse_observations, potential_information)
from .genetics import WorldConfig, world_from_dict, world_to_dict
from .infocore import GaussianTraitModel
from .robomendel import (BELIEF_NAMES, PATHS, BeliefState, InconsistentResultError,
                         MaxCyclesExceeded, PlannerOptions, dumps, evaluate_cycle,
                         initial_belief, run_path)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

WORLD_KEYS = {"inheritance_model", "p_bad_weather", "p_env_factor", "seeds_per_cross",
              "trait_models", "rng_seed", "n_trait_dims"}
TOP_KEYS = {"world", "initial_beliefs", "planner", "output_dir", "seed", "path",
            "max_cycles", "models"}

BUILTIN_MODELS = {
    "pure-Pu": {"type": "gaussian", "mean": 0.0, "sd": 1.0},
    "pure-Wh": {"type": "gaussian", "mean": 10.0, "sd": 1.0},
}


@dataclass
class ScenarioConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    initial_beliefs: dict = field(default_factory=dict)
    planner: PlannerOptions = field(default_factory=PlannerOptions)
    output_dir: str | None = None
    path: str = "canonical"
    max_cycles: int = 10
    models: dict = field(default_factory=lambda: dict(BUILTIN_MODELS))

    def belief(self) -> BeliefState:
        b = initial_belief()
        if not self.initial_beliefs:
            return b
        probs = dict(b.probabilities)
        probs.update(self.initial_beliefs)
        return BeliefState(probs)


def _key_line(text: str, key: str) -> int:
    needle = json.dumps(key)
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return 1


def _check_keys(text: str, obj: Any, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"line 1: {where} must be a JSON object")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"line {_key_line(text, k)}: unknown key {k!r} in {where}")


def _prob(text: str, key: str, v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
        raise ConfigError(f"line {_key_line(text, key)}: {key!r} must be a number in [0, 1]")
    return float(v)


def load_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a JSON scenario configuration."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}: {e.msg}") from None
    _check_keys(text, data, TOP_KEYS, "config")
    cfg = ScenarioConfig()
    world = dict(data.get("world", {}))
    _check_keys(text, world, WORLD_KEYS, "world")
    if "seed" in data:
        world["rng_seed"] = data["seed"]
    try:
        if "trait_models" in world:
            for name, tm in world["trait_models"].items():
                _check_keys(text, tm, {"mean", "sd"}, f"trait model {name!r}")
        cfg.world = world_from_dict(world)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError, AttributeError) as e:
        raise ConfigError(f"line {_key_line(text, 'world')}: invalid world: {e}") from None
    beliefs = data.get("initial_beliefs", {})
    _check_keys(text, beliefs, set(BELIEF_NAMES), "initial_beliefs")
    cfg.initial_beliefs = {k: _prob(text, k, v) for k, v in beliefs.items()}
    opts = data.get("planner", {})
    _check_keys(text, opts, set(PlannerOptions.__dataclass_fields__), "planner")
    try:
        cfg.planner = PlannerOptions(**opts)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"line {_key_line(text, 'planner')}: invalid planner options: {e}") from None
    if "path" in data:
        if data["path"] not in PATHS:
            raise ConfigError(f"line {_key_line(text, 'path')}: path must be one of {PATHS}")
        cfg.path = data["path"]
    if "max_cycles" in data:
        mc = data["max_cycles"]
        if isinstance(mc, bool) or not isinstance(mc, int) or mc < 1:
            raise ConfigError(f"line {_key_line(text, 'max_cycles')}: max_cycles must be a positive integer")
        cfg.max_cycles = mc
    if "output_dir" in data:
        cfg.output_dir = str(data["output_dir"])
    for name, spec in data.get("models", {}).items():
        try:
            build_model(spec)
        except (TypeError, ValueError, KeyError) as e:
            raise ConfigError(f"line {_key_line(text, name)}: invalid model {name!r}: {e}") from None
        cfg.models[name] = spec
    return cfg


def build_model(spec: Mapping):
    """Turn a model spec into a likelihood callable or mapping.

    Supported types: ``gaussian`` (mean, sd), ``gaussian-mixture``
    (components: [[weight, mean, sd], ...]) and ``discrete`` (probs: label -> p).
    """
    kind = spec["type"]
    if kind == "gaussian":
        _check_spec(spec, {"type", "mean", "sd"})
        return GaussianTraitModel(float(spec.get("mean", 0.0)), float(spec.get("sd", 1.0)))
    if kind == "gaussian-mixture":
        _check_spec(spec, {"type", "components"})
        comps = [(float(w), GaussianTraitModel(float(m), float(s)))
                 for w, m, s in spec["components"]]
        if abs(sum(w for w, _ in comps) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        return lambda x: float(sum(w * g.pdf(x) for w, g in comps))
    if kind == "discrete":
        _check_spec(spec, {"type", "probs"})
        probs = {str(k): float(v) for k, v in spec["probs"].items()}
        if abs(sum(probs.values()) - 1.0) > 1e-9 or min(probs.values()) < 0:
            raise ValueError("discrete probabilities must be non-negative and sum to 1")
        return probs
    raise ValueError(f"unknown model type {kind!r}")


def _check_spec(spec: Mapping, allowed: set) -> None:
    extra = set(spec) - allowed
    if extra:
        raise ValueError(f"unknown model keys {sorted(extra)}")


def _read_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    try:
        return load_config(text)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


# ---------------------------------------------------------------- commands

def _score_table(scores) -> str:
    rows = [f"{'experiment':<14} {'E(Ip) bits':>10}"]
    rows += [f"{s.experiment:<14} {s.bits:>10.4f}" for s in scores]
    return "\n".join(rows) + "\n"


def _load_state(path: str) -> BeliefState:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}: {e.msg}") from None
    if isinstance(data, dict) and "final_belief" in data:
        data = data["final_belief"]
    elif isinstance(data, dict) and "belief_after" in data:
        data = data["belief_after"]
    try:
        return BeliefState.from_json(data)
    except (TypeError, ValueError, AttributeError) as e:
        raise ConfigError(f"{path}: invalid belief state: {e}") from None


def cmd_eval(args, out) -> int:
    cfg = _read_config(args.config)
    b = _load_state(args.state) if args.state else cfg.belief()
    scores = evaluate_cycle(b, cfg.planner)
    if args.format == "json":
        out.write(dumps({"belief": b.to_json(), "scores": [s.to_json() for s in scores]}))
    else:
        out.write(_score_table(scores))
    return EXIT_OK


def curve_csv(kind: str, p: float, prior: float, alpha: float, n_max: int,
              steps: int = 20) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if kind == "tech-failure":
        w.writerow(["f", "no_control_bits", "control_bits", "control_information_bits"])
        for i in range(steps + 1):
            f = i / steps
            w.writerow([repr(f), repr(planner.technical_failure_mi(alpha, f, False)),
                        repr(planner.technical_failure_mi(alpha, f, True)),
                        repr(planner.control_information(alpha, f))])
        return buf.getvalue()
    if kind == "bad-weather":
        curves = [planner.bad_weather_curve(p, prior, c, n_max) for c in (False, True)]
    elif kind == "env-factor":
        curves = [planner.env_factor_curve(p, prior, c, n_max) for c in (False, True)]
    else:
        raise ConfigError(f"unknown curve kind {kind!r}")
    w.writerow(["n", "no_control_bits", "control_bits"])
    for n, a, c in zip(curves[0].ns, curves[0].values, curves[1].values):
        w.writerow([n, repr(a), repr(c)])
    return buf.getvalue()


def cmd_curve(args, out) -> int:
    for name in ("p", "prior", "alpha"):
        v = getattr(args, name)
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"--{name} must lie in [0, 1], got {v}")
    if args.n_max < 1 or args.steps < 1:
        raise ConfigError("--n-max and --steps must be >= 1")
    text = curve_csv(args.kind, args.p, args.prior, args.alpha, args.n_max, args.steps)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / f"{args.kind}.csv").write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_run(args, out) -> int:
    cfg = _read_config(args.config)
    world = cfg.world
    if args.seed is not None:
        world = world_from_dict({**world_to_dict(world), "rng_seed": args.seed})
    path = args.path or cfg.path
    t = run_path(path, world, cfg.max_cycles, cfg.planner)
    text, log = t.dumps(), t.log()
    out_dir = args.out or cfg.output_dir
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "transcript.json").write_text(text, encoding="utf-8")
        (d / "run.log").write_text(log, encoding="utf-8")
    out.write(text if args.format == "json" else log)
    return EXIT_OK


def cmd_ip(args, out) -> int:
    cfg = _read_config(args.config)
    try:
        text = Path(args.observations).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{args.observations}: {e.strerror}") from None
    try:
        sample = parse_observations(text.splitlines())
    except ValueError as e:
        raise ConfigError(f"{args.observations}: {e}") from None
    if args.model not in cfg.models:
        raise ConfigError(f"unknown model {args.model!r}; known: {sorted(cfg.models)}")
    spec = cfg.models[args.model]
    model = build_model(spec)
    if sample.is_continuous != (spec["type"] != "discrete"):
        raise ConfigError(f"model {args.model!r} does not match the observation kind")
    try:
        est = potential_information(sample, model, args.confidence)
    except (ZeroLikelihoodError, DegenerateSampleError) as e:
        raise ConfigError(str(e)) from None
    k = min(args.top_k, est.n)
    top = [{"rank": r + 1, "index": i, "observation": _plain(sample.observations[i]),
            "tag": sample.tags[i] if sample.tags else None,
            "ip_bits": est.per_observation[i]}
           for r, i in enumerate(localize(est, k))]
    report = {"model": args.model, "n": est.n, "mean_bits": est.mean,
              "lower_bound_bits": est.lower_bound, "confidence": est.confidence,
              "top": top}
    if args.format == "json":
        out.write(dumps(report))
    else:
        lines = [f"model: {args.model}", f"n: {est.n}",
                 f"mean Ip: {est.mean:.4f} bits",
                 f"lower bound ({est.confidence:g}): {est.lower_bound:.4f} bits"]
        lines += [f"  #{t['rank']} obs {t['index']} ({t['observation']}"
                  f"{', ' + t['tag'] if t['tag'] else ''}): {t['ip_bits']:.4f} bits" for t in top]
        out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _plain(x):
    return float(x) if isinstance(x, (float, int, np.floating)) else str(x)


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="infoplan", description="Information-driven experiment planning.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="score the standard experiment set")
    e.add_argument("--config")
    e.add_argument("--state", help="belief-state, cycle or transcript JSON")
    e.add_argument("--format", choices=("text", "json"), default="text")

    c = sub.add_parser("curve", help="emit a yield curve as CSV")
    c.add_argument("kind", choices=("bad-weather", "tech-failure", "env-factor"))
    c.add_argument("--p", type=float, default=0.3, help="bad-weather or env-factor probability")
    c.add_argument("--prior", type=float, default=0.5)
    c.add_argument("--alpha", type=float, default=0.5)
    c.add_argument("--n-max", type=int, default=20)
    c.add_argument("--steps", type=int, default=20, help="grid steps for tech-failure")
    c.add_argument("--out")
    c.add_argument("--format", choices=("csv",), default="csv")

    r = sub.add_parser("run", help="run the planning loop in the simulated world")
    r.add_argument("--config")
    r.add_argument("--seed", type=int)
    r.add_argument("--path", choices=PATHS)
    r.add_argument("--out")
    r.add_argument("--format", choices=("text", "json"), default="json")

    i = sub.add_parser("ip", help="potential information of a model on observations")
    i.add_argument("observations")
    i.add_argument("--model", default="pure-Pu")
    i.add_argument("--config")
    i.add_argument("--confidence", type=float, default=0.95)
    i.add_argument("--top-k", type=int, default=5)
    i.add_argument("--format", choices=("text", "json"), default="text")
    return p


COMMANDS = {"eval": cmd_eval, "curve": cmd_curve, "run": cmd_run, "ip": cmd_ip}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    buf = io.StringIO()
    try:
        args = build_parser().parse_args(argv)
        code = COMMANDS[args.verb](args, buf)
    except ConfigError as e:
        err.write(f"error: {e}\n")
        return EXIT_CONFIG
    except (InconsistentResultError, MaxCyclesExceeded) as e:
        err.write(f"error: {e}\n")
        return EXIT_RUNTIME
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    raise SystemExit(main())
