"""Exhaustive best response over the alpha-grid and the dominance analyses built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidConfig, ZeroDMin
from .mechanisms import (
    BrmKind,
    Fruitchain,
    Memoryless,
    Payout,
    largest_pool,
)
from .model import AlphaGrid, GameConfig, MinerType, StrategyVector, make_strategy, vertex
from .sharing import scaled_payout
from .utility import UtilityBreakdown, grid_utilities, round_utility

TIE_TOL = 1e-10


@dataclass
class BestResponse:
    strategy: StrategyVector
    utility: UtilityBreakdown
    runner_up_gap: float
    n_ties: int = 1
    witness_table: list[dict] | None = field(default=None, repr=False)

    @property
    def unique(self) -> bool:
        return self.n_ties == 1


def _scan(cfg, brm, d_fn, grid: AlphaGrid, payout):
    points = list(grid)
    G = np.array([g.weights for g in points], dtype=float)
    mean, risk, cost, util, ok = grid_utilities(cfg, brm, d_fn, G, payout)
    return points, mean, risk, cost, util, ok


def best_response(cfg: GameConfig, brm: BrmKind, d_fn, grid: AlphaGrid | None = None,
                  payout: Payout | None = None, keep_table: bool = False,
                  tie_tol: float = TIE_TOL) -> BestResponse:
    """Argmax of the round utility over every grid point.

    Points within ``tie_tol`` of the maximum tie; the earliest one in grid
    order (solo vertex first, descending lexicographic) is returned.
    """
    grid = cfg.grid() if grid is None else grid
    if grid.p != cfg.p:
        raise InvalidConfig(f"grid has p={grid.p}, system has p={cfg.p}")
    points, mean, risk, cost, util, ok = _scan(cfg, brm, d_fn, grid, payout)
    if not np.any(ok):
        raise InvalidConfig("no admissible grid strategy")
    top = float(np.max(util))
    tied = np.nonzero(util >= top - tie_tol)[0]
    k = int(tied[0])
    others = np.delete(util, k)
    gap = float(util[k] - np.max(others)) if others.size else math.inf
    bd = UtilityBreakdown(float(mean[k]), float(risk[k]), float(cost[k]), float(util[k]), cfg.rho)
    table = None
    if keep_table:
        table = [
            {"strategy": list(points[i].weights), "expected_reward": float(mean[i]),
             "risk": float(risk[i]), "switch_cost": float(cost[i]), "utility": float(util[i])}
            for i in range(len(points)) if ok[i]
        ]
    return BestResponse(points[k], bd, max(gap, 0.0), int(tied.size), table)


def centralization_threshold(cfg: GameConfig, d_min: float) -> float:
    """Switching-cost weight beyond which all-in on the largest pool is the best response."""
    if not d_min > 0:
        raise ZeroDMin("D_min must be positive")
    return cfg.b * cfg.r_block * cfg.m1 * cfg.p / (cfg.m2 * d_min)


@dataclass(frozen=True)
class Dominance:
    witness: StrategyVector
    margin: float


def is_dominated(cfg: GameConfig, brm: BrmKind, d_fn, candidate, grid: AlphaGrid | None = None,
                 tol: float = 0.0, payout: Payout | None = None) -> Dominance | None:
    """Best grid point beating ``candidate`` by more than ``tol``, or None."""
    grid = cfg.grid() if grid is None else grid
    candidate = make_strategy(candidate)
    if candidate not in grid:
        raise InvalidConfig(f"{candidate} is not on the grid")
    base = round_utility(cfg, candidate, brm, d_fn, payout).utility
    points, _, _, _, util, _ = _scan(cfg, brm, d_fn, grid, payout)
    k = int(np.argmax(util))
    margin = float(util[k] - base)
    if margin > tol:
        return Dominance(points[k], margin)
    return None


@dataclass
class DecentralizationVerdict:
    pre_max_share: float
    post_max_share: float
    is_rho_decentralized: bool
    best: BestResponse | None = None


SHARE_TOL = 1e-12


def post_join_system(f, g, m1: float, m2: float) -> StrategyVector:
    """System split after a miner of power m1 playing g joins a system of power m2 playing f."""
    total = m1 + m2
    w = [(fi * m2 + gi * m1) / total for fi, gi in zip(f, g)]
    s = math.fsum(w)
    return make_strategy([x / s for x in w])


def max_pool_share(f) -> float:
    f = list(f)
    return max(f[1:]) if len(f) > 1 else 0.0


def decentralization_verdict(cfg: GameConfig, brm: BrmKind, d_fn, grid: AlphaGrid | None = None,
                             best: BestResponse | None = None) -> DecentralizationVerdict:
    best = best_response(cfg, brm, d_fn, grid) if best is None else best
    pre = max_pool_share(cfg.f)
    post = max_pool_share(post_join_system(cfg.f, best.strategy, cfg.m1, cfg.m2))
    return DecentralizationVerdict(pre, post, pre >= post - SHARE_TOL, best)


def sequential_joins(cfg: GameConfig, joiners: Sequence[MinerType], brm: BrmKind, d_fn,
                     grid: AlphaGrid | None = None) -> list[float]:
    """Largest-pool share before the first joiner and after each one."""
    series = [max_pool_share(cfg.f)]
    current = cfg
    for joiner in joiners:
        current = current.evolve(m1=joiner.m1, rho=joiner.rho)
        current.system.check_small(joiner.m1, current.assumption_ratio)
        best = best_response(current, brm, d_fn, grid)
        f = post_join_system(current.f, best.strategy, current.m1, current.m2)
        current = current.evolve(m2=current.m1 + current.m2, f=f)
        series.append(max_pool_share(f))
    return series


def all_in_largest(cfg: GameConfig) -> StrategyVector:
    return vertex(cfg.p, largest_pool(cfg.f))


def solo(cfg: GameConfig) -> StrategyVector:
    return vertex(cfg.p, 0)


def concentration(g) -> float:
    """Largest single-pool allocation of a strategy."""
    return max_pool_share(g)


# -- closed forms for vertex comparisons (small-miner regime) -----------------

def _pool_factor(cfg: GameConfig, pool: int | None) -> float:
    pool = largest_pool(cfg.f) if pool is None else pool
    fi = cfg.f[pool]
    return fi ** (-(cfg.rho - 1) / cfg.rho)


def memoryless_pool_margin(cfg: GameConfig, pool: int | None = None) -> float:
    """U(all-in on ``pool``) - U(solo) for the memoryless mechanism."""
    x = cfg.ratio
    return cfg.b * cfg.r_block * (x ** (1.0 / cfg.rho) - x * _pool_factor(cfg, pool))


def fruitchain_risk_scale(cfg: GameConfig, rho: int | None = None) -> float:
    """(R_full^rho + ratio * R_partial^rho)^(1/rho): risk per unit of share moment."""
    rho = cfg.rho if rho is None else rho
    fc = cfg.fruitchain
    if fc is None:
        raise InvalidConfig("the config has no fruitchain parameters")
    ratio = fc.ratio(cfg.mining.t_full)
    return (fc.r_full**rho + ratio * fc.r_partial**rho) ** (1.0 / rho)


def fruitchain_pool_margin(cfg: GameConfig, pool: int | None = None) -> float:
    """U(all-in on ``pool``) - U(solo) under fruitchain."""
    x = cfg.ratio
    return cfg.b * fruitchain_risk_scale(cfg) * (x ** (1.0 / cfg.rho) - x * _pool_factor(cfg, pool))


def fruitchain_pool_margin_unit_factor(cfg: GameConfig) -> float:
    """The same margin with the pool-size factor replaced by 1.

    Agrees with ``fruitchain_pool_margin`` only when the chosen pool holds the
    whole system; kept so reports can show the size of the difference.
    """
    x = cfg.ratio
    return cfg.b * fruitchain_risk_scale(cfg) * (x ** (1.0 / cfg.rho) - x)


def decentbrm_slack(cfg: GameConfig) -> float:
    """How much better than solo any grid strategy may be under decentBRM."""
    x = cfg.ratio
    return cfg.b * cfg.r_block * x ** (1.0 + 1.0 / cfg.rho)


def underpaying_pool_response(cfg: GameConfig, brm: BrmKind, d_fn, pool: int, factor: float,
                              grid: AlphaGrid | None = None) -> BestResponse:
    """Best response when ``pool`` pays ``factor`` times the fair share."""
    return best_response(cfg, brm, d_fn, grid, payout=scaled_payout(pool, factor))


def margin_closed_form(cfg: GameConfig, brm: BrmKind) -> float:
    if isinstance(brm, Memoryless):
        return memoryless_pool_margin(cfg)
    if isinstance(brm, Fruitchain):
        return fruitchain_pool_margin(cfg)
    raise InvalidConfig(f"unsupported BRM {brm!r}")
