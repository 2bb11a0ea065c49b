"""Value types of the mining game: strategies, grids, player types and the game config."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AlphaNotUnitFraction,
    AssumptionViolated,
    InvalidConfig,
    NegativeWeight,
    PartialRewardTooLarge,
    SumNotOne,
)

SUM_TOL = 1e-12
PARITY_TOL = 1e-9
MODES = ("exact", "assumption1")


@dataclass(frozen=True)
class StrategyVector:
    """Hash-rate split over the solo channel (index 0) and pools 1..p.

    Grid points also carry their integer numerators ``counts`` over ``denom``
    so that comparisons between grid strategies stay exact.
    """

    weights: tuple[float, ...]
    counts: tuple[int, ...] | None = field(default=None, compare=False)
    denom: int | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    @property
    def p(self) -> int:
        return len(self.weights) - 1

    @property
    def n_active(self) -> int:
        return sum(1 for w in self.weights if w != 0)

    @property
    def is_vertex(self) -> bool:
        return self.n_active == 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def __str__(self) -> str:
        return "(" + ", ".join(f"{w:g}" for w in self.weights) + ")"


def make_strategy(weights: Sequence[float] | StrategyVector) -> StrategyVector:
    if isinstance(weights, StrategyVector):
        return weights
    ws = tuple(float(w) for w in weights)
    if len(ws) < 1:
        raise InvalidConfig("a strategy needs at least one coordinate")
    for i, w in enumerate(ws):
        if not math.isfinite(w):
            raise InvalidConfig(f"weight {i} is not finite: {w}")
        if w < 0:
            raise NegativeWeight(f"weight {i} is negative: {w}")
    total = math.fsum(ws)
    if abs(total - 1.0) > SUM_TOL:
        raise SumNotOne(f"weights sum to {total!r}, not 1")
    return StrategyVector(ws)


def vertex(p: int, i: int) -> StrategyVector:
    """All hash rate on coordinate ``i`` (0 = solo)."""
    counts = tuple(1 if j == i else 0 for j in range(p + 1))
    return StrategyVector(tuple(float(c) for c in counts), counts, 1)


def parse_alpha(alpha) -> Fraction:
    if isinstance(alpha, str):
        frac = Fraction(alpha)
    elif isinstance(alpha, float):
        frac = Fraction(alpha).limit_denominator(10**9)
    else:
        frac = Fraction(alpha)
    if frac <= 0 or frac > 1:
        raise AlphaNotUnitFraction(f"alpha must lie in (0, 1], got {alpha!r}")
    if frac.numerator != 1:
        raise AlphaNotUnitFraction(f"1/alpha must be a positive integer, got alpha={alpha!r}")
    return frac


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    # descending lexicographic order
    if parts == 1:
        yield (n,)
        return
    for head in range(n, -1, -1):
        for tail in _compositions(n - head, parts - 1):
            yield (head,) + tail


def enumerate_grid(p: int, alpha) -> Iterator[StrategyVector]:
    """Yield every alpha-grid point of the (p+1)-simplex once, solo vertex first."""
    if p < 0:
        raise InvalidConfig("pool count must be non-negative")
    n = parse_alpha(alpha).denominator
    for counts in _compositions(n, p + 1):
        yield StrategyVector(tuple(c / n for c in counts), counts, n)


@dataclass(frozen=True)
class AlphaGrid:
    alpha: Fraction
    p: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        if self.p < 0:
            raise InvalidConfig("pool count must be non-negative")

    @property
    def n(self) -> int:
        return self.alpha.denominator

    def __len__(self) -> int:
        return math.comb(self.n + self.p, self.p)

    def __iter__(self) -> Iterator[StrategyVector]:
        return enumerate_grid(self.p, self.alpha)

    def __contains__(self, g) -> bool:
        g = make_strategy(g)
        if len(g) != self.p + 1:
            return False
        return all(abs(w * self.n - round(w * self.n)) <= 1e-9 for w in g)

    def counts_array(self) -> np.ndarray:
        return np.array([g.counts for g in self], dtype=np.int64)

    def weights_array(self) -> np.ndarray:
        return self.counts_array() / self.n

    def snap(self, g) -> StrategyVector:
        """Return the grid point equal to ``g`` (with exact counts)."""
        g = make_strategy(g)
        if g not in self:
            raise InvalidConfig(f"{g} is not on the alpha={self.alpha} grid")
        counts = tuple(int(round(w * self.n)) for w in g)
        return StrategyVector(tuple(c / self.n for c in counts), counts, self.n)


@dataclass(frozen=True)
class MinerType:
    m1: float
    rho: int = 2

    def __post_init__(self):
        if not self.m1 > 0:
            raise InvalidConfig(f"m1 must be positive, got {self.m1}")
        if int(self.rho) != self.rho or self.rho < 1:
            raise InvalidConfig(f"rho must be an integer >= 1, got {self.rho}")
        object.__setattr__(self, "rho", int(self.rho))


@dataclass(frozen=True)
class SystemType:
    m2: float
    f: StrategyVector

    def __post_init__(self):
        if not self.m2 > 0:
            raise InvalidConfig(f"m2 must be positive, got {self.m2}")
        object.__setattr__(self, "f", make_strategy(self.f))

    def check_small(self, m1: float, ratio: float = 1e-3) -> None:
        # relative slack so that m2 = m1 / ratio itself passes
        if m1 / self.m2 > ratio * (1 + 1e-12):
            raise AssumptionViolated(f"m1/m2 = {m1 / self.m2:g} exceeds {ratio:g}")


@dataclass(frozen=True)
class MiningParams:
    lambda_bits: int = 32
    t_full: int = 2**22

    def __post_init__(self):
        if not 0 < self.t_full < 2**self.lambda_bits:
            raise InvalidConfig("t_full must satisfy 0 < t_full < 2**lambda_bits")

    @property
    def gamma_full(self) -> float:
        return self.t_full / 2**self.lambda_bits

    @property
    def queries_per_round(self) -> float:
        return 1.0 / self.gamma_full


@dataclass(frozen=True)
class FruitchainParams:
    t_partial: int
    r_full: float
    r_partial: float
    z: int = 1

    def __post_init__(self):
        if self.r_full < 0 or self.r_partial < 0:
            raise InvalidConfig("fruitchain rewards must be non-negative")
        if self.z < 1:
            raise InvalidConfig("confirmation window z must be >= 1")

    def ratio(self, t_full: int) -> float:
        return self.t_partial / t_full


def parity_complete(r_block: float, t_full: int, t_partial: int, r_partial: float,
                    z: int = 1) -> FruitchainParams:
    """Derive the full-block reward that keeps per-round issuance equal to ``r_block``."""
    if min(r_block, t_full, t_partial) <= 0 or r_partial < 0:
        raise InvalidConfig("parity inputs must be positive")
    if t_partial <= t_full:
        raise InvalidConfig("t_partial must exceed t_full")
    r_full = r_block - (t_partial / t_full) * r_partial
    if r_full <= 0:
        raise PartialRewardTooLarge(
            f"r_partial={r_partial} leaves r_full={r_full:g} <= 0")
    return FruitchainParams(t_partial=t_partial, r_full=r_full, r_partial=r_partial, z=z)


@dataclass(frozen=True)
class GameConfig:
    a: float
    b: float
    c: float
    miner: MinerType
    system: SystemType
    delta: float = 0.99
    r_block: float = 1.0
    alpha: Fraction = Fraction(1, 10)
    mining: MiningParams = MiningParams()
    fruitchain: FruitchainParams | None = None
    approximation_mode: str = "assumption1"
    assumption_ratio: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        if min(self.a, self.b, self.c) < 0:
            raise InvalidConfig("a, b, c must be non-negative")
        if not 0 <= self.delta <= 1:
            raise InvalidConfig("delta must lie in [0, 1]")
        if not self.r_block > 0:
            raise InvalidConfig("r_block must be positive")
        if self.approximation_mode not in MODES:
            raise InvalidConfig(f"approximation_mode must be one of {MODES}")
        fc = self.fruitchain
        if fc is not None:
            if fc.t_partial <= self.mining.t_full:
                raise InvalidConfig("t_partial must exceed t_full")
            if self.mining.t_full + fc.t_partial >= 2**self.mining.lambda_bits:
                raise InvalidConfig("t_full + t_partial must stay below 2**lambda_bits")
            lhs = fc.r_full + fc.ratio(self.mining.t_full) * fc.r_partial
            if abs(lhs - self.r_block) > PARITY_TOL:
                raise InvalidConfig(
                    f"fruitchain rewards violate parity: {lhs!r} != r_block {self.r_block!r}")

    @property
    def p(self) -> int:
        return self.system.f.p

    @property
    def m1(self) -> float:
        return self.miner.m1

    @property
    def m2(self) -> float:
        return self.system.m2

    @property
    def rho(self) -> int:
        return self.miner.rho

    @property
    def f(self) -> StrategyVector:
        return self.system.f

    @property
    def ratio(self) -> float:
        return self.miner.m1 / self.system.m2

    @property
    def exact(self) -> bool:
        return self.approximation_mode == "exact"

    def grid(self, alpha=None) -> AlphaGrid:
        return AlphaGrid(self.alpha if alpha is None else alpha, self.p)

    def evolve(self, **changes) -> "GameConfig":
        """``dataclasses.replace`` that also reaches into the nested types.

        Accepts ``m1``, ``rho``, ``m2`` and ``f`` alongside the top-level fields.
        """
        miner = self.miner
        system = self.system
        if "m1" in changes or "rho" in changes:
            miner = MinerType(changes.pop("m1", miner.m1), changes.pop("rho", miner.rho))
        if "m2" in changes or "f" in changes:
            system = SystemType(changes.pop("m2", system.m2), changes.pop("f", system.f))
        return dataclasses.replace(self, miner=miner, system=system, **changes)

    # -- JSON document --------------------------------------------------

    def to_dict(self) -> dict:
        fc = self.fruitchain
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "delta": self.delta,
            "r_block": self.r_block,
            "alpha": str(self.alpha),
            "miner": {"m1": self.miner.m1, "rho": self.miner.rho},
            "system": {"m2": self.system.m2, "f": list(self.system.f.weights)},
            "mining": {"lambda_bits": self.mining.lambda_bits, "t_full": self.mining.t_full},
            "fruitchain": None if fc is None else {
                "t_partial": fc.t_partial, "r_full": fc.r_full,
                "r_partial": fc.r_partial, "z": fc.z},
            "approximation_mode": self.approximation_mode,
            "assumption_ratio": self.assumption_ratio,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GameConfig":
        mining = MiningParams(**doc.get("mining", {}))
        r_block = float(doc.get("r_block", 1.0))
        fc_doc = doc.get("fruitchain")
        fruitchain = None
        if fc_doc is not None:
            if fc_doc.get("r_full") is None:
                fruitchain = parity_complete(r_block, mining.t_full, int(fc_doc["t_partial"]),
                                             float(fc_doc["r_partial"]), int(fc_doc.get("z", 1)))
            else:
                fruitchain = FruitchainParams(int(fc_doc["t_partial"]), float(fc_doc["r_full"]),
                                              float(fc_doc["r_partial"]), int(fc_doc.get("z", 1)))
        return cls(
            a=float(doc["a"]),
            b=float(doc["b"]),
            c=float(doc["c"]),
            delta=float(doc.get("delta", 0.99)),
            r_block=r_block,
            alpha=doc.get("alpha", "1/10"),
            miner=MinerType(float(doc["miner"]["m1"]), int(doc["miner"].get("rho", 2))),
            system=SystemType(float(doc["system"]["m2"]), make_strategy(doc["system"]["f"])),
            mining=mining,
            fruitchain=fruitchain,
            approximation_mode=doc.get("approximation_mode", "assumption1"),
            assumption_ratio=float(doc.get("assumption_ratio", 1e-3)),
        )
