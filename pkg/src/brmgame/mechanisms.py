"""Block reward mechanisms and the per-round reward of the joining miner.

Every mechanism is described by the channels through which the joining miner
can earn: solo mining (index 0), each pool (1..p), and a residual channel in
which the block goes to somebody else.  A channel has a win probability and
the fraction of the channel's reward that reaches the joining miner.

Two routes compute the same quantities: finite ``RewardDistribution`` atoms
built channel by channel, and the vectorised ``grid_moments`` used by the
solver.  Tests keep them in agreement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import _series
from .errors import CountExceedsRounds, EmptyPool, InvalidConfig, MissingFruitchainParams
from .model import GameConfig, StrategyVector, make_strategy

Payout = Callable[[int, float], float]
"""Maps (pool index, fair share) to the share the pool actually pays."""


@dataclass(frozen=True)
class RewardDistribution:
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        total = math.fsum(p for _, p in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise InvalidConfig(f"probabilities sum to {total!r}")
        for r, p in self.atoms:
            if p < 0 or r < 0:
                raise InvalidConfig(f"invalid atom ({r}, {p})")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "RewardDistribution":
        merged: dict[float, list[float]] = {}
        for r, p in pairs:
            if p > 0:
                merged.setdefault(float(r), []).append(float(p))
        atoms = tuple(sorted((r, math.fsum(ps)) for r, ps in merged.items()))
        return cls(atoms)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([r for r, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    def moment(self, rho: int) -> float:
        return math.fsum(p * r**rho for r, p in self.atoms)

    def mean(self) -> float:
        return self.moment(1)


@dataclass(frozen=True)
class Memoryless:
    name = "memoryless"


@dataclass(frozen=True)
class Fruitchain:
    name = "fruitchain"


@dataclass(frozen=True)
class DecentBrm:
    warmup_rounds: int = 1000

    name = "decentbrm"

    def __post_init__(self):
        if self.warmup_rounds < 1:
            raise InvalidConfig("warmup_rounds must be >= 1")


BrmKind = Memoryless | Fruitchain | DecentBrm

BRM_NAMES = ("memoryless", "fruitchain", "decentbrm")


def brm_from_name(name: str, warmup_rounds: int = 1000) -> BrmKind:
    key = name.lower().replace("-", "").replace("_", "")
    if key == "memoryless":
        return Memoryless()
    if key == "fruitchain":
        return Fruitchain()
    if key == "decentbrm":
        return DecentBrm(warmup_rounds)
    raise InvalidConfig(f"unknown BRM {name!r}; expected one of {BRM_NAMES}")


def largest_pool(f) -> int:
    """Index (1-based) of the pool with the most hash rate; lowest index wins ties."""
    f = np.asarray(list(f), dtype=float)
    return int(np.argmax(f[1:])) + 1


# -- per-round reward rules --------------------------------------------------

def memoryless_reward(winner_is_p1: bool, r_block: float = 1.0, history=None) -> float:
    # ``history`` is accepted and ignored: the reward cannot depend on it
    return r_block if winner_is_p1 else 0.0


def decentbrm_reward(k: int, blocks_mined_by_p1: int, r_block: float = 1.0) -> float:
    if k < 1:
        raise InvalidConfig("round index k must be >= 1")
    if not 0 <= blocks_mined_by_p1 <= k:
        raise CountExceedsRounds(f"{blocks_mined_by_p1} blocks credited in {k} rounds")
    return blocks_mined_by_p1 * r_block / k


# -- channels ----------------------------------------------------------------

def channels(cfg: GameConfig, g, payout: Payout | None = None):
    """Win probabilities and joining-miner shares for solo, pools 1..p and the rest.

    Returns ``(probs, shares)`` of length p+2; the last entry is the residual
    channel with share 0.
    """
    g = make_strategy(g)
    f = cfg.f
    if len(g) != len(f):
        raise InvalidConfig(f"strategy has {len(g)} coordinates, system has {len(f)}")
    m1, m2 = cfg.m1, cfg.m2
    probs, shares = [], []
    if cfg.exact:
        total = m1 + m2
        probs.append(g[0] * m1 / total)
    else:
        probs.append(g[0] * m1 / m2)
    shares.append(1.0)
    scale = 1.0 - probs[0]
    for i in range(1, len(g)):
        gi, fi = g[i], f[i]
        if fi == 0 and gi > 0:
            raise EmptyPool(f"pool {i} has no system hash rate but g_{i}={gi}")
        if cfg.exact:
            probs.append((gi * m1 + fi * m2) / total)
            share = gi * m1 / (gi * m1 + fi * m2) if gi > 0 else 0.0
        else:
            probs.append(scale * fi)
            share = gi * m1 / (fi * m2) if gi > 0 else 0.0
        if payout is not None and gi > 0:
            share = payout(i, share)
        shares.append(share)
    probs.append(max(0.0, 1.0 - math.fsum(probs)))
    shares.append(0.0)
    return probs, shares


def memoryless_distribution(cfg: GameConfig, g, payout: Payout | None = None) -> RewardDistribution:
    probs, shares = channels(cfg, g, payout)
    return RewardDistribution.from_pairs(
        (cfg.r_block * s, p) for p, s in zip(probs, shares))


def _require_fruitchain(cfg: GameConfig):
    if cfg.fruitchain is None:
        raise MissingFruitchainParams("the config has no fruitchain parameters")
    return cfg.fruitchain


def fruitchain_gammas(cfg: GameConfig) -> tuple[float, float]:
    fc = _require_fruitchain(cfg)
    scale = 2.0**cfg.mining.lambda_bits
    return cfg.mining.t_full / scale, fc.t_partial / scale


def fruitchain_distribution(cfg: GameConfig, g, payout: Payout | None = None) -> RewardDistribution:
    """Reward of a single network query.

    The query belongs to a channel with that channel's win probability and
    solves a full block with probability gamma_1 or a partial block with
    probability gamma_2.  A round holds 1/gamma_1 queries on average.
    """
    fc = _require_fruitchain(cfg)
    gamma1, gamma2 = fruitchain_gammas(cfg)
    probs, shares = channels(cfg, g, payout)
    pairs = []
    for p, s in zip(probs[:-1], shares[:-1]):
        pairs.append((fc.r_full * s, gamma1 * p))
        pairs.append((fc.r_partial * s, gamma2 * p))
    paid = math.fsum(w for _, w in pairs)
    pairs.append((0.0, max(0.0, 1.0 - paid)))
    return RewardDistribution.from_pairs(pairs)


# -- vectorised moments over many strategies ---------------------------------

def _share_moments(cfg: GameConfig, G: np.ndarray, order: int, payout: Payout | None = None):
    """Moments E[Y^j], j = 0..order, of the joining miner's share of one block.

    Also returns a mask of strategies that are admissible (no empty pools).
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    f = np.asarray(cfg.f.weights, dtype=float)
    m1, m2 = cfg.m1, cfg.m2
    pools = G[:, 1:]
    fp = f[1:]
    ok = ~np.any((fp == 0) & (pools > 0), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        if cfg.exact:
            total = m1 + m2
            p0 = G[:, 0] * m1 / total
            pp = (pools * m1 + fp * m2) / total
            s = np.where(pools > 0, pools * m1 / (pools * m1 + fp * m2), 0.0)
        else:
            p0 = G[:, 0] * m1 / m2
            pp = (1.0 - p0)[:, None] * fp
            s = np.where(pools > 0, pools * m1 / (fp * m2), 0.0)
    s = np.where(ok[:, None], s, 0.0)
    if payout is not None:
        for i in range(s.shape[1]):
            s[:, i] = np.array([payout(i + 1, v) if v > 0 else 0.0 for v in s[:, i]])
    mu = np.empty((G.shape[0], order + 1))
    mu[:, 0] = 1.0
    for j in range(1, order + 1):
        mu[:, j] = p0 + np.sum(pp * s**j, axis=1)
    return mu, ok


def moment_vector(cfg: GameConfig, brm: BrmKind, G, order: int,
                  payout: Payout | None = None):
    """Per-round raw reward moments E[R^j], j = 0..order, for every row of ``G``."""
    mu, ok = _share_moments(cfg, G, order, payout)
    j = np.arange(order + 1)
    if isinstance(brm, Memoryless):
        return cfg.r_block**j * mu, ok
    if isinstance(brm, Fruitchain):
        fc = _require_fruitchain(cfg)
        ratio = fc.ratio(cfg.mining.t_full)
        if not cfg.exact:
            # rare-event accounting: per-query moments times queries per round
            per = fc.r_full**j + ratio * fc.r_partial**j
            per[0] = 1.0
            return per * mu, ok
        full = fc.r_full**j * mu
        partial = fc.r_partial**j * _series.geometric_compound_moments(mu, ratio)
        return _series.independent_sum_moments(full, partial), ok
    if isinstance(brm, DecentBrm):
        if not cfg.exact:
            raise InvalidConfig("closed-form decentBRM moments only exist for a single order; "
                                "use decentbrm_moments")
        k = brm.warmup_rounds
        history = _series.iid_sum_moments(mu, k)
        return (cfg.r_block / k)**j * history, ok
    raise InvalidConfig(f"unsupported BRM {brm!r}")


def _decent_closed_form(cfg: GameConfig, G: np.ndarray, rho: int):
    G = np.atleast_2d(np.asarray(G, dtype=float))
    f = np.asarray(cfg.f.weights, dtype=float)
    x = cfg.ratio
    ok = ~np.any((f[1:] == 0) & (G[:, 1:] > 0), axis=1)
    mean = cfg.r_block * x * G.sum(axis=1)
    inner = G[:, 0]**rho * x + np.sum(f[1:] * G[:, 1:]**rho, axis=1)
    risk = cfg.r_block * x * inner**(1.0 / rho)
    return mean, risk, ok


def grid_moments(cfg: GameConfig, brm: BrmKind, G, rho: int | None = None,
                 payout: Payout | None = None):
    """Return ``(mean, risk, admissible)`` arrays for every strategy row of ``G``."""
    rho = cfg.rho if rho is None else rho
    if isinstance(brm, DecentBrm) and not cfg.exact:
        if payout is not None:
            raise InvalidConfig("custom payouts are not modelled for decentBRM closed forms")
        return _decent_closed_form(cfg, G, rho)
    m, ok = moment_vector(cfg, brm, G, rho, payout)
    return m[:, 1], np.maximum(m[:, rho], 0.0)**(1.0 / rho), ok


def decentbrm_moments(cfg: GameConfig, g, rho: int | None = None) -> tuple[float, float]:
    """Expected reward and risk of decentBRM under the small-miner closed forms."""
    g = make_strategy(g)
    rho = cfg.rho if rho is None else rho
    f = cfg.f
    for i in range(1, len(g)):
        if f[i] == 0 and g[i] > 0:
            raise EmptyPool(f"pool {i} has no system hash rate but g_{i}={g[i]}")
    x = cfg.ratio
    r = cfg.r_block
    solo_mean = r * g[0] * x
    pooled_mean = r * x * math.fsum(g[1:])
    solo_risk = solo_mean * x**(1.0 / rho)
    pooled_risk = r * x * math.fsum(f[j] * g[j]**rho for j in range(1, len(g)))**(1.0 / rho)
    # the channels are disjoint events, so their rho-th moments add
    risk = (solo_risk**rho + pooled_risk**rho)**(1.0 / rho)
    return solo_mean + pooled_mean, risk


def round_moments(cfg: GameConfig, brm: BrmKind, g, rho: int | None = None,
                  payout: Payout | None = None) -> tuple[float, float]:
    """Per-round ``(E[R], E[R^rho])`` for one strategy."""
    rho = cfg.rho if rho is None else rho
    g = make_strategy(g)
    if isinstance(brm, Memoryless):
        dist = memoryless_distribution(cfg, g, payout)
        return dist.mean(), dist.moment(rho)
    if isinstance(brm, Fruitchain) and not cfg.exact:
        per_query = fruitchain_distribution(cfg, g, payout)
        q = cfg.mining.queries_per_round
        return q * per_query.mean(), q * per_query.moment(rho)
    if isinstance(brm, DecentBrm) and not cfg.exact:
        if payout is not None:
            raise InvalidConfig("custom payouts are not modelled for decentBRM closed forms")
        mean, risk = decentbrm_moments(cfg, g, rho)
        return mean, risk**rho
    m, ok = moment_vector(cfg, brm, g.as_array()[None, :], rho, payout)
    if not ok[0]:
        raise EmptyPool(f"{g} allocates to a pool without system hash rate")
    return float(m[0, 1]), float(m[0, rho])
