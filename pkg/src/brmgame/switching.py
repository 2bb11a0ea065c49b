"""Switching-cost functions, property checks, and the marginal switching cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .errors import AllCostsEqual, InvalidConfig
from .model import AlphaGrid, StrategyVector, make_strategy

COST_TOL = 1e-12


@dataclass(frozen=True)
class SwitchCostFn:
    """``count``: n_active - 1.  ``balanced``: n_active - 1 + kappa * sum_{i<j} g_i g_j."""

    kind: str = "balanced"
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind not in ("count", "balanced"):
            raise InvalidConfig(f"unknown switching cost {self.kind!r}")
        if self.kind == "balanced" and not self.kappa > 0:
            raise InvalidConfig("kappa must be positive")

    def __call__(self, g) -> float:
        return float(self.evaluate_many(make_strategy(g).as_array()[None, :])[0])

    def evaluate_many(self, G: np.ndarray) -> np.ndarray:
        G = np.atleast_2d(np.asarray(G, dtype=float))
        cost = np.count_nonzero(G, axis=1) - 1.0
        if self.kind == "balanced":
            s = G.sum(axis=1)
            cost = cost + self.kappa * 0.5 * (s * s - np.sum(G * G, axis=1))
        return cost

    def exact(self, counts: Iterable[int], denom: int) -> Fraction:
        counts = list(counts)
        cost = Fraction(sum(1 for c in counts if c) - 1)
        if self.kind == "balanced":
            pair = Fraction(denom * denom - sum(c * c for c in counts), 2 * denom * denom)
            cost += Fraction(self.kappa).limit_denominator(10**12) * pair
        return cost

    def to_dict(self) -> dict:
        return {"kind": self.kind, "kappa": self.kappa}


@dataclass(frozen=True)
class CustomCost:
    """Wraps an arbitrary cost callable; used to probe the property checkers."""

    func: Callable[[StrategyVector], float]
    kind: str = "custom"

    def __call__(self, g) -> float:
        return float(self.func(make_strategy(g)))

    def evaluate_many(self, G: np.ndarray) -> np.ndarray:
        return np.array([self(row) for row in np.atleast_2d(G)])


def eval_cost(fn, g) -> float:
    return fn(g)


def _as_matrix(samples) -> np.ndarray:
    return np.array([make_strategy(g).weights for g in samples], dtype=float)


@dataclass
class P1Report:
    checked_pairs: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_p1(fn, samples) -> P1Report:
    """Flag pairs where more active coordinates come with a strictly lower cost."""
    samples = list(samples)
    if not samples:
        raise InvalidConfig("need at least one sample")
    G = _as_matrix(samples)
    d = fn.evaluate_many(G)
    n = np.count_nonzero(G, axis=1)
    more = n[:, None] > n[None, :]
    bad = more & (d[:, None] < d[None, :] - COST_TOL)
    rows, cols = np.nonzero(bad)
    violations = [(samples[i], samples[j]) for i, j in zip(rows, cols)]
    return P1Report(int(more.sum()), violations)


@dataclass
class P2Report:
    qualifying_pairs: int
    literal_holds: int
    prose_holds: int
    literal_violations: list = field(default_factory=list)
    prose_violations: list = field(default_factory=list)

    @property
    def literal_fraction(self) -> float:
        return self.literal_holds / self.qualifying_pairs if self.qualifying_pairs else 1.0

    @property
    def prose_fraction(self) -> float:
        return self.prose_holds / self.qualifying_pairs if self.qualifying_pairs else 1.0


def check_p2(fn, samples) -> P2Report:
    """Scan ordered pairs (g1, g2) that differ only on two coordinates i, j with
    g1_i * g1_j > g2_i * g2_j.

    The literal reading requires D(g1) <= D(g2); the prose reading (more even
    split, higher cost) requires D(g1) >= D(g2).  Both tallies are returned.
    """
    samples = list(samples)
    if not samples:
        raise InvalidConfig("need at least one sample")
    G = _as_matrix(samples)
    d = fn.evaluate_many(G)
    differs = np.abs(G[:, None, :] - G[None, :, :]) > COST_TOL
    two = differs.sum(axis=2) == 2
    report = P2Report(0, 0, 0)
    for a, b in zip(*np.nonzero(two)):
        i, j = np.nonzero(differs[a, b])[0]
        if G[a, i] * G[a, j] <= G[b, i] * G[b, j] + COST_TOL:
            continue
        report.qualifying_pairs += 1
        if d[a] <= d[b] + COST_TOL:
            report.literal_holds += 1
        else:
            report.literal_violations.append((samples[a], samples[b]))
        if d[a] >= d[b] - COST_TOL:
            report.prose_holds += 1
        else:
            report.prose_violations.append((samples[a], samples[b]))
    return report


@dataclass(frozen=True)
class DMin:
    value: float
    witness: tuple[StrategyVector, StrategyVector]
    exact_value: Fraction | None = None


def compute_d_min(fn, grid: AlphaGrid) -> DMin:
    """Smallest positive cost gap between two grid strategies, with a witness pair."""
    points = list(grid)
    if len(points) < 2:
        raise InvalidConfig("the grid needs at least two points")
    if hasattr(fn, "exact"):
        costs = [fn.exact(g.counts, g.denom) for g in points]
        distinct = sorted(set(costs))
        if len(distinct) < 2:
            raise AllCostsEqual("every grid strategy has the same switching cost")
        gaps = [(hi - lo, lo, hi) for lo, hi in zip(distinct, distinct[1:])]
        gap, lo, hi = min(gaps)
        witness = (points[costs.index(lo)], points[costs.index(hi)])
        return DMin(float(gap), witness, gap)
    costs = fn.evaluate_many(np.array([g.weights for g in points]))
    order = np.argsort(costs, kind="stable")
    best = None
    for a, b in zip(order, order[1:]):
        gap = costs[b] - costs[a]
        if gap > COST_TOL and (best is None or gap < best[0]):
            best = (gap, a, b)
    if best is None:
        raise AllCostsEqual("every grid strategy has the same switching cost")
    gap, a, b = best
    return DMin(float(gap), (points[a], points[b]))
