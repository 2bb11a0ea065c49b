"""Reward sharing inside a pool and the fairness predicate."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ZeroPoolPower

MAX_ENUMERATED_MESSAGES = 20


def fair_share(g_i: float, f_i: float, m1: float, m2: float) -> float:
    power = g_i * m1 + f_i * m2
    if power <= 0:
        raise ZeroPoolPower("the pool has no hash rate at all")
    return g_i * m1 / power


@dataclass(frozen=True)
class ShareFunction:
    """A pool's sharing rule evaluated on one round of messages.

    ``psi`` receives a tuple of booleans, ``True`` for each message submitted
    by the joining miner, and returns the joining miner's fraction.
    """

    kind: str
    psi: Callable[[tuple[bool, ...]], float]

    def __call__(self, messages: tuple[bool, ...]) -> float:
        return self.psi(messages)


def _proportional(messages):
    return sum(messages) / len(messages)


PROPORTIONAL_FAIR = ShareFunction("proportional", _proportional)


def constant_share(value: float) -> ShareFunction:
    return ShareFunction(f"constant({value:g})", lambda messages: value)


def scaled_share(factor: float) -> ShareFunction:
    return ShareFunction(f"scaled({factor:g})", lambda messages: factor * _proportional(messages))


def expected_share(share_fn: ShareFunction, g_i: float, f_i: float, m1: float, m2: float,
                   n_messages: int = 10) -> float:
    """Average ``share_fn`` over every message sequence a round can produce.

    Each message independently comes from the joining miner with probability
    equal to its fraction of the pool's hash rate.
    """
    pi = fair_share(g_i, f_i, m1, m2)
    if n_messages < 1:
        raise ValueError("need at least one message per round")
    if n_messages > MAX_ENUMERATED_MESSAGES:
        if share_fn.kind == "proportional":
            return pi
        raise ValueError(f"exhaustive enumeration is capped at {MAX_ENUMERATED_MESSAGES} messages")
    terms = []
    for seq in itertools.product((True, False), repeat=n_messages):
        mine = sum(seq)
        weight = pi**mine * (1.0 - pi)**(n_messages - mine)
        if weight:
            terms.append(weight * share_fn(seq))
    return math.fsum(terms)


def is_fair(share_fn: ShareFunction, g_i: float, f_i: float, m1: float, m2: float,
            tol: float = 1e-12, n_messages: int = 10) -> bool:
    target = fair_share(g_i, f_i, m1, m2)
    return abs(expected_share(share_fn, g_i, f_i, m1, m2, n_messages) - target) <= tol


def scaled_payout(pool: int, factor: float):
    """Solver payout hook: pool ``pool`` pays ``factor`` times the fair share."""
    def payout(i: int, share: float) -> float:
        return factor * share if i == pool else share
    return payout


def aggregate_share(rule: Callable[[float, float], float], members: Sequence[float]) -> float:
    """Total fraction paid out when every member receives ``rule(own, others)``."""
    total = math.fsum(members)
    return math.fsum(rule(h, total - h) for h in members)
