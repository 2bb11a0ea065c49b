"""Seeded round-level mining simulator used as an independent check on the analytic moments.

The simulator always draws block winners with the exact win probabilities
(joining miner's power over total power), whatever approximation mode the
config carries.  Replicas get sub-seeds from one ``SeedSequence`` and their
sums are merged in replica order with compensated summation.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidConfig, MismatchedConfig
from .mechanisms import (
    BrmKind,
    DecentBrm,
    Fruitchain,
    Memoryless,
    channels,
    fruitchain_gammas,
)
from .model import GameConfig, make_strategy
from .utility import UtilityBreakdown

RNG_ALGORITHM = "PCG64"
GRANULARITIES = ("aggregate", "per-round")


@dataclass(frozen=True)
class SimConfig:
    cfg: GameConfig
    brm: BrmKind
    rounds: int
    seed: int = 0
    record_granularity: str = "aggregate"
    rhos: tuple[int, ...] = (2,)
    replicas: int = 4

    def __post_init__(self):
        if self.rounds < 1:
            raise InvalidConfig("rounds must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        if self.record_granularity not in GRANULARITIES:
            raise InvalidConfig(f"record_granularity must be one of {GRANULARITIES}")
        if self.replicas < 1:
            raise InvalidConfig("replicas must be >= 1")
        if any(int(r) != r or r < 1 for r in self.rhos):
            raise InvalidConfig("every rho must be an integer >= 1")


@dataclass
class SimResult:
    empirical_mean: float
    empirical_rho_moment: dict[int, float]
    confidence: float
    moment_se: dict[int, float]
    rounds: int
    metadata: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    reward_trace: np.ndarray | None = field(default=None, repr=False)

    def risk(self, rho: int) -> float:
        return self.empirical_rho_moment[rho] ** (1.0 / rho)

    def to_dict(self) -> dict:
        return {
            "empirical_mean": self.empirical_mean,
            "empirical_rho_moment": {str(k): v for k, v in self.empirical_rho_moment.items()},
            "confidence": self.confidence,
            "moment_se": {str(k): v for k, v in self.moment_se.items()},
            "rounds": self.rounds,
            "metadata": self.metadata,
            "extras": self.extras,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    def write_trace_csv(self, path) -> None:
        if self.reward_trace is None:
            raise InvalidConfig("no reward trace was recorded")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "reward"])
            for k, r in enumerate(self.reward_trace, start=1):
                w.writerow([k, repr(float(r))])


def exact_config(cfg: GameConfig) -> GameConfig:
    return cfg if cfg.exact else cfg.evolve(approximation_mode="exact")


def _exact_channels(cfg: GameConfig, g):
    probs, shares = channels(exact_config(cfg), g)
    probs = np.asarray(probs, dtype=float)
    return probs / probs.sum(), np.asarray(shares, dtype=float)


def _chunks(total: int, parts: int) -> list[int]:
    parts = min(parts, total)
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _sample(cfg: GameConfig, brm: BrmKind, probs, shares, n: int, rng: np.random.Generator):
    """Per-round rewards of the joining miner for ``n`` rounds, plus event counters."""
    r = cfg.r_block
    if isinstance(brm, Memoryless):
        idx = rng.choice(probs.size, size=n, p=probs)
        return r * shares[idx], {}
    if isinstance(brm, Fruitchain):
        fc = cfg.fruitchain
        if fc is None:
            raise InvalidConfig("the config has no fruitchain parameters")
        ratio = fc.ratio(cfg.mining.t_full)
        z = fc.z
        total = n + z
        idx = rng.choice(probs.size, size=total, p=probs)
        full = fc.r_full * shares[idx]
        # partial blocks found before the round's full block: geometric count
        n_partial = rng.geometric(1.0 / (1.0 + ratio), size=total) - 1
        counts = rng.multinomial(n_partial, probs)
        partial = fc.r_partial * (counts @ shares)
        # partials mined in round k are credited in round k + z
        reward = full[z:] + partial[:n]
        return reward, {"partial_blocks": int(n_partial[:n].sum()),
                        "partial_sq": int(np.sum(n_partial[:n].astype(np.int64) ** 2)),
                        "full_blocks": n}
    if isinstance(brm, DecentBrm):
        k = brm.warmup_rounds
        counts = rng.multinomial(k, probs, size=n)
        return (r / k) * (counts @ shares), {}
    raise InvalidConfig(f"unsupported BRM {brm!r}")


def _literal_decent_trace(cfg, probs, shares, rounds, rng) -> np.ndarray:
    idx = rng.choice(probs.size, size=rounds, p=probs)
    credited = np.cumsum(shares[idx])
    return cfg.r_block * credited / np.arange(1, rounds + 1)


def simulate(sim: SimConfig, g) -> SimResult:
    """Run ``sim.rounds`` independent rounds and estimate reward moments.

    decentBRM rounds are sampled at round index ``warmup_rounds`` with an
    independent history each, so the standard errors stay valid; a
    ``per-round`` trace follows one literal history from genesis instead.
    """
    g = make_strategy(g)
    cfg, brm = sim.cfg, sim.brm
    probs, shares = _exact_channels(cfg, g)
    rhos = tuple(sorted(set(int(r) for r in sim.rhos)))
    seeds = np.random.SeedSequence(sim.seed).spawn(min(sim.replicas, sim.rounds) + 1)
    powers = sorted({1, 2} | set(rhos) | {2 * r for r in rhos})
    partial_sums: dict[int, list[float]] = {p: [] for p in powers}
    counters: dict[str, list[int]] = {}
    traces = []
    for size, ss in zip(_chunks(sim.rounds, sim.replicas), seeds):
        rng = np.random.Generator(np.random.PCG64(ss))
        rewards, extra = _sample(cfg, brm, probs, shares, size, rng)
        for p in powers:
            partial_sums[p].append(math.fsum(rewards**p))
        for key, val in extra.items():
            counters.setdefault(key, []).append(val)
        if sim.record_granularity == "per-round" and not isinstance(brm, DecentBrm):
            traces.append(rewards)
    n = sim.rounds
    raw = {p: math.fsum(v) / n for p, v in partial_sums.items()}

    def se(p: int) -> float:
        var = max(raw[2 * p] - raw[p] ** 2, 0.0)
        return math.sqrt(var / n) if n > 1 else 0.0

    trace = None
    if sim.record_granularity == "per-round":
        if isinstance(brm, DecentBrm):
            rng = np.random.Generator(np.random.PCG64(seeds[-1]))
            trace = _literal_decent_trace(cfg, probs, shares, n, rng)
        else:
            trace = np.concatenate(traces)
    extras: dict = {}
    if "partial_blocks" in counters:
        partial = sum(counters["partial_blocks"])
        sq = sum(counters["partial_sq"])
        mean_n = partial / n
        var_n = max(sq / n - mean_n**2, 0.0)
        extras["partial_per_full"] = mean_n
        extras["partial_per_full_se"] = math.sqrt(var_n / n) if n > 1 else 0.0
    if isinstance(brm, DecentBrm) and trace is not None:
        extras["literal_trace_final"] = float(trace[-1])
    return SimResult(
        empirical_mean=raw[1],
        empirical_rho_moment={r: raw[r] for r in rhos},
        confidence=se(1),
        moment_se={r: se(r) for r in rhos},
        rounds=n,
        metadata={"rng": RNG_ALGORITHM, "seed": sim.seed, "replicas": min(sim.replicas, n),
                  "brm": brm.name, "rounds": n, "strategy": list(g.weights)},
        extras=extras,
        reward_trace=trace,
    )


@dataclass
class ComparisonReport:
    passed: bool
    checks: list[dict]


DETERMINISTIC_FLOOR = 1e-12


def compare_with_analytic(result: SimResult, analytic: UtilityBreakdown,
                          z_score_limit: float = 5.0) -> ComparisonReport:
    """Flag moments whose empirical value sits more than ``z_score_limit`` SEs away.

    A relative floor of 1e-12 keeps deterministic rewards (zero SE) from
    failing on rounding alone.
    """
    if result.rounds < 1:
        raise MismatchedConfig("the simulation ran zero rounds")
    rho = analytic.rho
    if rho not in result.empirical_rho_moment:
        raise MismatchedConfig(f"the simulation did not record rho={rho}")
    pairs = [
        ("mean", result.empirical_mean, analytic.expected_reward, result.confidence),
        (f"moment_{rho}", result.empirical_rho_moment[rho], analytic.risk**rho,
         result.moment_se[rho]),
    ]
    checks = []
    for name, emp, ana, se in pairs:
        gap = abs(emp - ana)
        allowed = z_score_limit * se + DETERMINISTIC_FLOOR * abs(ana)
        z = gap / se if se > 0 else (0.0 if gap <= allowed else math.inf)
        checks.append({"quantity": name, "empirical": emp, "analytic": ana, "se": se,
                       "z": z, "passed": gap <= allowed})
    return ComparisonReport(all(c["passed"] for c in checks), checks)


# -- per-query sampler for the fruitchain / memoryless risk ratio -------------

@dataclass
class RiskRatioEstimate:
    rho: int
    ratio: float
    se: float
    closed_form: float
    queries: int

    @property
    def z(self) -> float:
        return abs(self.ratio - self.closed_form) / self.se if self.se > 0 else 0.0


def risk_ratio_closed_form(cfg: GameConfig, rho: int) -> float:
    fc = cfg.fruitchain
    if fc is None:
        raise InvalidConfig("the config has no fruitchain parameters")
    g1, g2 = fruitchain_gammas(cfg)
    return ((g1 * fc.r_full**rho + g2 * fc.r_partial**rho) / (g1 * cfg.r_block**rho)) ** (1.0 / rho)


def simulate_risk_ratio(cfg: GameConfig, g, rounds: int, seed: int, rhos=(2,)) -> list[RiskRatioEstimate]:
    """Estimate Risk_fruitchain / Risk_memoryless from one shared stream of queries.

    Every query lands in a channel and is a full block (prob gamma_1), a
    partial block (prob gamma_2) or nothing.  Both mechanisms are scored on
    the same queries; the ratio's standard error uses the delta method with
    the estimated covariance.  ``rounds`` rounds means ``rounds / gamma_1``
    queries.
    """
    fc = cfg.fruitchain
    if fc is None:
        raise InvalidConfig("the config has no fruitchain parameters")
    g = make_strategy(g)
    g1, g2 = fruitchain_gammas(cfg)
    probs, shares = _exact_channels(cfg, g)
    cell_p = np.concatenate([g1 * probs, g2 * probs, [max(0.0, 1.0 - (g1 + g2))]])
    cell_p = cell_p / cell_p.sum()
    zero = np.zeros_like(shares)
    mem = np.concatenate([cfg.r_block * shares, zero, [0.0]])
    fru = np.concatenate([fc.r_full * shares, fc.r_partial * shares, [0.0]])
    queries = int(round(rounds / g1))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    counts = rng.multinomial(queries, cell_p)
    w = counts / queries
    out = []
    for rho in rhos:
        m_r, f_r = mem**rho, fru**rho
        M, F = float(w @ m_r), float(w @ f_r)
        ratio = (F / M) ** (1.0 / rho)
        # influence of each cell on log F - log M; centred, so no cancellation
        d = f_r / F - m_r / M
        se = ratio * math.sqrt(float(w @ d**2) / queries) / rho
        out.append(RiskRatioEstimate(rho, ratio, se, risk_ratio_closed_form(cfg, rho), queries))
    return out
