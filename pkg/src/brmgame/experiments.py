"""Named experiments E1-E7 and parameter sweeps.

Each experiment returns an ``ExperimentReport`` whose verdict is a pure
function of its tables: every clause is recomputed from table columns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .errors import UnknownParam
from .mechanisms import DecentBrm, Fruitchain, Memoryless, brm_from_name
from .model import GameConfig, MinerType, parity_complete, parse_alpha
from .scenario import Scenario
from .simulation import (
    RNG_ALGORITHM,
    SimConfig,
    compare_with_analytic,
    exact_config,
    risk_ratio_closed_form,
    simulate,
    simulate_risk_ratio,
)
from .solver import (
    all_in_largest,
    best_response,
    centralization_threshold,
    concentration,
    decentbrm_slack,
    decentralization_verdict,
    fruitchain_pool_margin,
    fruitchain_pool_margin_unit_factor,
    is_dominated,
    memoryless_pool_margin,
    sequential_joins,
    solo,
)
from .switching import compute_d_min
from .utility import grid_utilities, round_utility

MARGIN_RTOL = 1e-6
RATIO_TOL = 1e-9


@dataclass
class ExperimentReport:
    experiment: str
    title: str
    clauses: dict[str, bool]
    tables: dict[str, list[dict]]
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "title": self.title, "passed": self.passed,
                "clauses": self.clauses, "tables": self.tables, "provenance": self.provenance}

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.experiment}.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written = [path]
        for name, rows in self.tables.items():
            csv_path = out / f"{self.experiment}_{name}.csv"
            csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
            written.append(csv_path)
        return written


def rows_to_csv(rows: list[dict], header: list[str] | None = None) -> str:
    header = header or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(row.get(k)) for k in header])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def provenance(sc: Scenario) -> dict:
    return {"seed": sc.simulation["seed"], "alpha": str(sc.game.alpha), "version": __version__,
            "rng": RNG_ALGORITHM}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b else abs(a)


def _d_min(sc: Scenario, cfg: GameConfig) -> float:
    return compute_d_min(sc.cost, cfg.grid()).value


# -- E1: with no switching cost the best response copies the system ----------

def e1_copy_system(sc: Scenario) -> ExperimentReport:
    rows = []
    for label, cfg in sc.battery():
        cfg = cfg.evolve(c=0.0)
        grid = cfg.grid()
        on_grid = cfg.f in grid
        for mode in ("assumption1", "exact"):
            mcfg = cfg.evolve(approximation_mode=mode)
            best = best_response(mcfg, Memoryless(), sc.cost, grid)
            verdict = decentralization_verdict(mcfg, Memoryless(), sc.cost, grid, best)
            rows.append({**label, "mode": mode, "f_on_grid": on_grid,
                         "best_response": str(best.strategy),
                         "equals_f": best.strategy.weights == cfg.f.weights,
                         "utility": best.utility.utility, "runner_up_gap": best.runner_up_gap,
                         "pre_max_share": verdict.pre_max_share,
                         "post_max_share": verdict.post_max_share,
                         "decentralized": verdict.is_rho_decentralized})
    asm = [r for r in rows if r["mode"] == "assumption1"]
    clauses = {
        "best_response_equals_f_when_f_on_grid": all(r["equals_f"] for r in asm if r["f_on_grid"]),
        "decentralized_for_every_scenario": all(r["decentralized"] for r in asm),
    }
    return ExperimentReport("E1", "zero switching cost: best response vs system split",
                            clauses, {"best_responses": rows}, provenance(sc))


# -- E2: switching-cost threshold ---------------------------------------------

def e2_threshold(sc: Scenario) -> ExperimentReport:
    sec = sc.section("E2")
    expect = sec.get("expect", "centralized")
    multiples = [float(v) for v in sec.get("c_over_cbar", [0, 0.5, 1, 2, 10])]
    n_curve = int(sec.get("curve_points", 21))
    rows, curve = [], []
    for label, cfg in sc.battery():
        d_min = _d_min(sc, cfg)
        c_bar = centralization_threshold(cfg, d_min)
        lm = all_in_largest(cfg)
        for k in multiples:
            ccfg = cfg.evolve(c=k * c_bar)
            best = best_response(ccfg, Memoryless(), sc.cost)
            verdict = decentralization_verdict(ccfg, Memoryless(), sc.cost, best=best)
            rows.append({**label, "d_min": d_min, "c_bar": c_bar, "c_over_cbar": k, "c": k * c_bar,
                         "best_response": str(best.strategy),
                         "all_in_largest": best.strategy.weights == lm.weights,
                         "unique": best.unique, "concentration": concentration(best.strategy),
                         "post_max_share": verdict.post_max_share,
                         "decentralized": verdict.is_rho_decentralized})
        for k in np.linspace(0.0, 2.0, n_curve):
            best = best_response(cfg.evolve(c=float(k) * c_bar), Memoryless(), sc.cost)
            curve.append({**label, "c_over_cbar": float(k), "c": float(k) * c_bar,
                          "concentration": concentration(best.strategy)})
    above = [r for r in rows if r["c_over_cbar"] >= 1.0]
    if expect == "centralized":
        regime_ok = all(r["all_in_largest"] and r["unique"] and not r["decentralized"] for r in above)
    else:
        regime_ok = all(r["decentralized"] for r in above)
    monotone = True
    for key in {(r["rho"], r["f"], r["m_ratio"]) for r in curve}:
        seq = [r["concentration"] for r in curve if (r["rho"], r["f"], r["m_ratio"]) == key]
        monotone &= all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))
    clauses = {f"at_or_above_cbar_{expect}": regime_ok, "concentration_nondecreasing_in_c": monotone}
    return ExperimentReport("E2", "switching-cost threshold and concentration curve",
                            clauses, {"threshold": rows, "concentration_curve": curve}, provenance(sc))


# -- E3: solo mining is dominated under a memoryless mechanism ----------------

def e3_solo_dominated(sc: Scenario) -> ExperimentReport:
    rows = []
    for label, cfg in sc.battery():
        c_bar = centralization_threshold(cfg, _d_min(sc, cfg))
        sm, lm = solo(cfg), all_in_largest(cfg)
        free = is_dominated(cfg.evolve(c=0.0), Memoryless(), sc.cost, sm)
        ccfg = cfg.evolve(c=2 * c_bar)
        costly = is_dominated(ccfg, Memoryless(), sc.cost, sm)
        margin = (round_utility(ccfg, lm, Memoryless(), sc.cost).utility
                  - round_utility(ccfg, sm, Memoryless(), sc.cost).utility)
        closed = memoryless_pool_margin(ccfg)
        rows.append({**label, "dominated_at_c0": free is not None,
                     "witness_at_c0": str(free.witness) if free else "",
                     "dominated_at_2cbar": costly is not None,
                     "witness_at_2cbar": str(costly.witness) if costly else "",
                     "witness_is_largest": bool(costly) and costly.witness.weights == lm.weights,
                     "witness_margin": costly.margin if costly else 0.0,
                     "largest_vs_solo_margin": margin, "closed_form_margin": closed,
                     "rel_error": _rel(costly.margin if costly else 0.0, closed)})
    clauses = {
        "solo_dominated_everywhere": all(r["dominated_at_c0"] and r["dominated_at_2cbar"] for r in rows),
        "witness_is_all_in_largest": all(r["witness_is_largest"] for r in rows),
        "margin_matches_closed_form": all(r["rel_error"] <= MARGIN_RTOL for r in rows),
    }
    return ExperimentReport("E3", "solo vertex dominated under a memoryless mechanism",
                            clauses, {"dominance": rows}, provenance(sc))


# -- E4: fruitchain lowers risk relative to a fixed block reward --------------

def _fruitchain_for(cfg: GameConfig, t_ratio: int, partial_share: float) -> GameConfig:
    t_full = cfg.mining.t_full
    r_partial = partial_share * cfg.r_block / t_ratio
    z = cfg.fruitchain.z if cfg.fruitchain else 1
    return cfg.evolve(fruitchain=parity_complete(cfg.r_block, t_full, t_full * t_ratio, r_partial, z))


def e4_risk_ratio(sc: Scenario) -> ExperimentReport:
    sec = sc.section("E4")
    share = float(sec.get("partial_share", 0.5))
    sim = sc.simulation
    z_limit = float(sim.get("z_limit", 5.0))
    base = sc.game.evolve(approximation_mode="assumption1")
    rows = []
    for t in sec.get("t_ratio", [10, 100, 1000]):
        cfg = _fruitchain_for(base, int(t), share)
        g = solo(cfg)
        rhos = [int(r) for r in sec.get("rho", [2, 3, 4, 5, 6])]
        estimates = simulate_risk_ratio(cfg, g, int(sim["rounds"]), (int(sim["seed"]) + int(t)) % 2**64, rhos)
        for est in estimates:
            rcfg = cfg.evolve(rho=est.rho)
            fr = round_utility(rcfg, g, Fruitchain(), sc.cost).risk
            mr = round_utility(rcfg, g, Memoryless(), sc.cost).risk
            analytic = fr / mr
            closed = risk_ratio_closed_form(cfg, est.rho)
            rows.append({"t_ratio": int(t), "rho": est.rho, "analytic_ratio": analytic,
                         "closed_form_ratio": closed, "abs_error": abs(analytic - closed),
                         "mc_ratio": est.ratio, "mc_se": est.se,
                         "mc_passed": abs(est.ratio - closed) <= z_limit * est.se + 1e-12 * closed})
    clauses = {
        "ratio_below_one": all(r["analytic_ratio"] < 1 for r in rows),
        "ratio_matches_closed_form": all(r["abs_error"] <= RATIO_TOL for r in rows),
        "monte_carlo_agrees": all(r["mc_passed"] for r in rows),
    }
    return ExperimentReport("E4", "fruitchain / memoryless risk ratio", clauses,
                            {"risk_ratio": rows}, provenance(sc))


# -- E5: pooling still beats solo under fruitchain ----------------------------

def e5_fruitchain_margin(sc: Scenario) -> ExperimentReport:
    rows = []
    for label, cfg in sc.battery():
        sm, lm = solo(cfg), all_in_largest(cfg)
        margin = (round_utility(cfg, lm, Fruitchain(), sc.cost).utility
                  - round_utility(cfg, sm, Fruitchain(), sc.cost).utility)
        closed = fruitchain_pool_margin(cfg)
        unit = fruitchain_pool_margin_unit_factor(cfg)
        dom = is_dominated(cfg, Fruitchain(), sc.cost, sm)
        rows.append({**label, "margin": margin, "closed_form_margin": closed,
                     "rel_error": _rel(margin, closed), "unit_factor_margin": unit,
                     "unit_factor_rel_error": _rel(margin, unit),
                     "solo_dominated": dom is not None})
    clauses = {
        "margin_positive": all(r["margin"] > 0 for r in rows),
        "margin_matches_closed_form": all(r["rel_error"] <= MARGIN_RTOL for r in rows),
        "solo_dominated": all(r["solo_dominated"] for r in rows),
    }
    return ExperimentReport("E5", "fruitchain pool-vs-solo margin", clauses,
                            {"margins": rows}, provenance(sc))


# -- E6: decentBRM keeps solo mining an equilibrium ---------------------------

def e6_decentbrm(sc: Scenario) -> ExperimentReport:
    brm = sc.decentbrm
    n_joiners = int(sc.section("E6").get("joiners", 10))
    rows, joins = [], []
    for label, cfg in sc.battery():
        _, _, _, util, _ = grid_utilities(cfg, brm, sc.cost, cfg.grid().weights_array())
        u_solo = round_utility(cfg, solo(cfg), brm, sc.cost).utility
        eps = decentbrm_slack(cfg)
        verdict = decentralization_verdict(cfg, brm, sc.cost)
        rows.append({**label, "solo_utility": u_solo, "best_grid_utility": float(np.max(util)),
                     "max_advantage_over_solo": float(np.max(util)) - u_solo, "epsilon": eps,
                     "best_response": str(verdict.best.strategy),
                     "decentralized": verdict.is_rho_decentralized})
        series = sequential_joins(cfg, [MinerType(cfg.m1, cfg.rho)] * n_joiners, brm, sc.cost)
        for step, share in enumerate(series):
            joins.append({**label, "joiners": step, "max_pool_share": share})
    nonincreasing = True
    for key in {(r["rho"], r["f"], r["m_ratio"]) for r in joins}:
        seq = [r["max_pool_share"] for r in joins if (r["rho"], r["f"], r["m_ratio"]) == key]
        nonincreasing &= all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))
    clauses = {
        "solo_within_epsilon_of_best": all(r["max_advantage_over_solo"] <= r["epsilon"] for r in rows),
        "decentralized_for_every_scenario": all(r["decentralized"] for r in rows),
        "sequential_joins_nonincreasing": nonincreasing,
    }
    return ExperimentReport("E6", "decentBRM equilibrium and sequential joins", clauses,
                            {"equilibrium": rows, "sequential_joins": joins}, provenance(sc))


# -- E7: Monte Carlo against exact-mode analytic moments ----------------------

def e7_monte_carlo(sc: Scenario) -> ExperimentReport:
    sim = sc.simulation
    z_limit = float(sim.get("z_limit", 5.0))
    cfg = exact_config(sc.game.evolve(
        rho=2, f=sc.battery_f[0], m2=sc.game.m1 / sc.battery_m_ratio[0]))
    rows, extra = [], []
    for brm in (Memoryless(), Fruitchain(), sc.decentbrm):
        for name, g in (("solo", solo(cfg)), ("system", cfg.f), ("largest", all_in_largest(cfg))):
            res = simulate(SimConfig(cfg, brm, int(sim["rounds"]), int(sim["seed"]),
                                     rhos=(2,), replicas=int(sim.get("replicas", 4))), g)
            analytic = round_utility(cfg, g, brm, sc.cost)
            report = compare_with_analytic(res, analytic, z_limit)
            for check in report.checks:
                rows.append({"brm": brm.name, "strategy": name, **check})
            if isinstance(brm, Fruitchain) and name == "solo":
                ratio = cfg.fruitchain.ratio(cfg.mining.t_full)
                se = res.extras["partial_per_full_se"]
                extra.append({"brm": brm.name, "quantity": "partial_per_full",
                              "empirical": res.extras["partial_per_full"], "analytic": ratio,
                              "se": se,
                              "passed": abs(res.extras["partial_per_full"] - ratio) <= z_limit * se})
            if isinstance(brm, DecentBrm):
                closed = round_utility(cfg.evolve(approximation_mode="assumption1"), g, brm, sc.cost)
                extra.append({"brm": brm.name, "strategy": name, "quantity": "closed_form_comparison",
                              "empirical_mean": res.empirical_mean,
                              "closed_form_mean": closed.expected_reward,
                              "empirical_risk": res.risk(2), "closed_form_risk": closed.risk})
    clauses = {
        "moments_within_z_limit": all(r["passed"] for r in rows),
        "partial_block_rate": all(r["passed"] for r in extra if "passed" in r),
    }
    return ExperimentReport("E7", "Monte Carlo cross-validation", clauses,
                            {"moments": rows, "extras": extra}, provenance(sc))


EXPERIMENTS: dict[str, Callable[[Scenario], ExperimentReport]] = {
    "E1": e1_copy_system,
    "E2": e2_threshold,
    "E3": e3_solo_dominated,
    "E4": e4_risk_ratio,
    "E5": e5_fruitchain_margin,
    "E6": e6_decentbrm,
    "E7": e7_monte_carlo,
}


def run_experiments(sc: Scenario, only: list[str] | None = None) -> list[ExperimentReport]:
    ids = only or sc.experiments
    unknown = [i for i in ids if i not in EXPERIMENTS]
    if unknown:
        raise UnknownParam(f"unknown experiments {unknown}")
    return [EXPERIMENTS[i](sc) for i in ids]


# -- sweeps -------------------------------------------------------------------

SWEEP_PARAMS = ("c", "rho", "m2_ratio", "alpha", "t_ratio", "kappa")
SWEEP_HEADER = ["param", "value", "brm", "best_response", "concentration", "max_share",
                "utility", "risk", "d_min", "c_bar"]


def _apply(sc: Scenario, param: str, value):
    cfg, cost = sc.game, sc.cost
    if param == "c":
        cfg = cfg.evolve(c=float(value))
    elif param == "rho":
        cfg = cfg.evolve(rho=int(value))
    elif param == "m2_ratio":
        cfg = cfg.evolve(m2=cfg.m1 * float(value))
    elif param == "alpha":
        cfg = cfg.evolve(alpha=parse_alpha(value))
    elif param == "t_ratio":
        share = float(sc.section("E4").get("partial_share", 0.5))
        cfg = _fruitchain_for(cfg, int(value), share)
    elif param == "kappa":
        cost = type(cost)("balanced", float(value))
    return cfg, cost


def sweep(sc: Scenario, param: str, values, brm_name: str = "memoryless") -> list[dict]:
    if param not in SWEEP_PARAMS:
        raise UnknownParam(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")
    brm = sc.decentbrm if brm_name == "decentbrm" else brm_from_name(brm_name)
    rows = []
    for value in values:
        cfg, cost = _apply(sc, param, value)
        d_min = compute_d_min(cost, cfg.grid()).value
        best = best_response(cfg, brm, cost)
        verdict = decentralization_verdict(cfg, brm, cost, best=best)
        rows.append({"param": param, "value": value, "brm": brm.name,
                     "best_response": str(best.strategy),
                     "concentration": concentration(best.strategy),
                     "max_share": verdict.post_max_share, "utility": best.utility.utility,
                     "risk": best.utility.risk, "d_min": d_min,
                     "c_bar": centralization_threshold(cfg, d_min) if d_min > 0 else math.inf})
    return rows
