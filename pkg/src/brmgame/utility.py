"""Single-round and discounted utility of the joining miner."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DivergentSum, InvalidConfig
from .mechanisms import BrmKind, DecentBrm, Payout, RewardDistribution, grid_moments, round_moments
from .model import GameConfig, make_strategy

# terms of a discounted sum below this relative weight are dropped
_TAIL = 1e-17


@dataclass(frozen=True)
class UtilityBreakdown:
    expected_reward: float
    risk: float
    switch_cost: float
    utility: float
    rho: int

    def to_dict(self) -> dict:
        return asdict(self)


def moment(dist: RewardDistribution, rho: int) -> float:
    if rho < 1:
        raise InvalidConfig("rho must be >= 1")
    return dist.moment(rho)


def risk_of(dist: RewardDistribution, rho: int) -> float:
    return moment(dist, rho) ** (1.0 / rho)


def assemble(cfg: GameConfig, mean: float, risk: float, cost: float) -> UtilityBreakdown:
    return UtilityBreakdown(
        expected_reward=mean,
        risk=risk,
        switch_cost=cost,
        utility=cfg.a * mean - cfg.b * risk - cfg.c * cost,
        rho=cfg.rho,
    )


def round_utility(cfg: GameConfig, g, brm: BrmKind, d_fn, payout: Payout | None = None) -> UtilityBreakdown:
    g = make_strategy(g)
    mean, raw = round_moments(cfg, brm, g, cfg.rho, payout)
    return assemble(cfg, mean, max(raw, 0.0) ** (1.0 / cfg.rho), d_fn(g))


def grid_utilities(cfg: GameConfig, brm: BrmKind, d_fn, G, payout: Payout | None = None):
    """Vectorised ``round_utility`` over strategy rows.

    Returns ``(mean, risk, cost, utility, admissible)``; inadmissible rows get
    utility ``-inf``.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    mean, risk, ok = grid_moments(cfg, brm, G, cfg.rho, payout)
    cost = d_fn.evaluate_many(G)
    util = cfg.a * mean - cfg.b * risk - cfg.c * cost
    util = np.where(ok, util, -np.inf)
    return mean, risk, cost, util, ok


def discount_factor_sum(delta: float, horizon: int | None) -> float:
    """sum_{r=0}^{H-1} delta^r, or the infinite series when ``horizon`` is None."""
    if horizon is not None and horizon < 0:
        raise InvalidConfig("horizon must be non-negative")
    if horizon is None:
        if delta >= 1:
            raise DivergentSum("the undiscounted infinite sum diverges")
        return 1.0 / (1.0 - delta)
    if delta == 1:
        return float(horizon)
    return (1.0 - delta**horizon) / (1.0 - delta)


def _decent_round(cfg: GameConfig, g, brm: DecentBrm, d_fn, r: int) -> float:
    if not cfg.exact:
        return round_utility(cfg, g, brm, d_fn).utility
    return round_utility(cfg, g, DecentBrm(brm.warmup_rounds + r), d_fn).utility


def discounted_utility(cfg: GameConfig, g, brm: BrmKind, d_fn, horizon: int | None = None,
                       payout: Payout | None = None) -> float:
    """Discounted sum of per-round utilities starting at the current round.

    Stationary mechanisms use the geometric closed form.  decentBRM is summed
    round by round, since in exact mode its reward depends on the round index.
    """
    if isinstance(brm, DecentBrm):
        delta = cfg.delta
        if horizon is None:
            if delta >= 1:
                u0 = _decent_round(cfg, g, brm, d_fn, 0)
                if u0 != 0:
                    raise DivergentSum("the undiscounted infinite sum diverges")
                return 0.0
            horizon = 1 if delta == 0 else math.ceil(math.log(_TAIL) / math.log(delta))
        terms = [delta**r * _decent_round(cfg, g, brm, d_fn, r) for r in range(horizon)]
        return math.fsum(terms)
    u = round_utility(cfg, g, brm, d_fn, payout).utility
    if horizon is None and cfg.delta >= 1:
        if u == 0:
            return 0.0
        raise DivergentSum("the undiscounted infinite sum diverges")
    return u * discount_factor_sum(cfg.delta, horizon)
