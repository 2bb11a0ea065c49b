"""Loading and validating JSON scenario documents."""

from __future__ import annotations

import copy
import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import BrmGameError, SchemaError
from .mechanisms import DecentBrm
from .model import GameConfig, make_strategy, parse_alpha
from .switching import SwitchCostFn

SCHEMA_VERSION = 1
EXPERIMENT_IDS = ("E1", "E2", "E3", "E4", "E5", "E6", "E7")

_DEFAULTS = {
    "switch_cost": {"kind": "balanced", "kappa": 1.0},
    "battery": {},
    "experiments": list(EXPERIMENT_IDS),
    "simulation": {"rounds": 1_000_000, "seed": 0, "replicas": 4, "z_limit": 5.0},
    "decentbrm": {"warmup_rounds": 1000},
    "E2": {"c_over_cbar": [0.0, 0.5, 1.0, 2.0, 10.0], "expect": "centralized", "curve_points": 21},
    "E4": {"rho": [2, 3, 4, 5, 6], "t_ratio": [10, 100, 1000], "partial_share": 0.5},
    "E6": {"joiners": 10},
    "output_dir": "reports",
}


def load_schema() -> dict:
    text = resources.files("brmgame").joinpath("scenarios/schema.json").read_text("utf-8")
    return json.loads(text)


def default_scenario_path():
    return resources.files("brmgame").joinpath("scenarios/default.json")


@dataclass
class Scenario:
    game: GameConfig
    cost: SwitchCostFn
    experiments: list[str]
    battery_rho: list[int]
    battery_f: list[tuple[float, ...]]
    battery_m_ratio: list[float]
    simulation: dict
    decentbrm: DecentBrm
    sections: dict = field(default_factory=dict)
    output_dir: str = "reports"
    document: dict = field(default_factory=dict, repr=False)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def battery(self):
        """Yield ``(label, cfg)`` over rho x f x (m1/m2)."""
        for rho, f, x in itertools.product(self.battery_rho, self.battery_f, self.battery_m_ratio):
            cfg = self.game.evolve(rho=rho, f=make_strategy(f), m2=self.game.m1 / x)
            yield {"rho": rho, "f": str(cfg.f), "m_ratio": x}, cfg

    def with_alpha(self, alpha) -> "Scenario":
        out = copy.copy(self)
        out.game = self.game.evolve(alpha=parse_alpha(alpha))
        return out

    def with_seed(self, seed: int) -> "Scenario":
        out = copy.copy(self)
        out.simulation = dict(self.simulation, seed=int(seed))
        return out


def parse_scenario(doc: dict) -> Scenario:
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"scenario invalid at {where}: {exc.message}") from exc
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in _DEFAULTS.items()}
    for key, val in doc.items():
        if isinstance(val, dict) and isinstance(merged.get(key), dict):
            merged[key].update(val)
        else:
            merged[key] = val
    try:
        game = GameConfig.from_dict(doc["game"])
        cost = SwitchCostFn(merged["switch_cost"].get("kind", "balanced"),
                            float(merged["switch_cost"].get("kappa", 1.0)))
        battery = merged["battery"]
        rhos = [int(r) for r in battery.get("rho", [game.rho])]
        fs = [make_strategy(f).weights for f in battery.get("f", [game.f.weights])]
        ratios = [float(x) for x in battery.get("m_ratio", [game.ratio])]
        if any(len(f) != game.p + 1 for f in fs):
            raise SchemaError("every battery f must have the same length as game.system.f")
        decent = DecentBrm(int(merged["decentbrm"]["warmup_rounds"]))
    except SchemaError:
        raise
    except (BrmGameError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"scenario rejected: {exc}") from exc
    sections = {k: merged[k] for k in ("E2", "E4", "E6")}
    return Scenario(game=game, cost=cost, experiments=list(merged["experiments"]),
                    battery_rho=rhos, battery_f=fs, battery_m_ratio=ratios,
                    simulation=merged["simulation"], decentbrm=decent, sections=sections,
                    output_dir=merged["output_dir"], document=doc)


def load_scenario(path=None) -> Scenario:
    source = default_scenario_path() if path is None else Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario is not valid JSON: {exc}") from exc
    return parse_scenario(doc)
