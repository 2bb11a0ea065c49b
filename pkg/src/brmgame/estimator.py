"""Estimator-style wrapper around the best-response solver.

Hyperparameters are flat constructor arguments, so ``get_params``,
``set_params`` and ``clone`` work and sweeps are just ``set_params`` calls.
``fit`` takes the system's current split ``f`` and stores the best response.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .mechanisms import brm_from_name
from .model import (
    SUM_TOL,
    GameConfig,
    MinerType,
    MiningParams,
    SystemType,
    make_strategy,
    parity_complete,
)
from .solver import best_response, decentralization_verdict
from .switching import SwitchCostFn


def check_strategies(X) -> np.ndarray:
    """2-D float array whose rows are valid strategies."""
    X = check_array(X, ensure_2d=False, dtype=float)
    X = np.atleast_2d(X)
    if np.any(X < 0):
        raise ValueError("strategies must be non-negative")
    if np.any(np.abs(X.sum(axis=1) - 1.0) > SUM_TOL):
        raise ValueError("every strategy must sum to 1")
    return X


class BestResponseSolver(BaseEstimator):
    def __init__(self, brm="memoryless", a=1.0, b=1.0, c=0.0, rho=2, m1=100.0, m2=1e5,
                 r_block=1.0, alpha="1/10", mode="assumption1", switch_cost="balanced",
                 kappa=1.0, delta=0.99, warmup_rounds=1000, lambda_bits=32, t_full=2**22,
                 t_partial=None, r_partial=None, z=1):
        self.brm = brm
        self.a = a
        self.b = b
        self.c = c
        self.rho = rho
        self.m1 = m1
        self.m2 = m2
        self.r_block = r_block
        self.alpha = alpha
        self.mode = mode
        self.switch_cost = switch_cost
        self.kappa = kappa
        self.delta = delta
        self.warmup_rounds = warmup_rounds
        self.lambda_bits = lambda_bits
        self.t_full = t_full
        self.t_partial = t_partial
        self.r_partial = r_partial
        self.z = z

    def make_config(self, f) -> GameConfig:
        fruitchain = None
        if self.t_partial is not None:
            fruitchain = parity_complete(self.r_block, self.t_full, self.t_partial,
                                         self.r_partial or 0.0, self.z)
        return GameConfig(
            a=self.a, b=self.b, c=self.c,
            miner=MinerType(self.m1, self.rho),
            system=SystemType(self.m2, make_strategy(f)),
            delta=self.delta, r_block=self.r_block, alpha=self.alpha,
            mining=MiningParams(self.lambda_bits, self.t_full),
            fruitchain=fruitchain, approximation_mode=self.mode,
        )

    def make_cost(self) -> SwitchCostFn:
        return SwitchCostFn(self.switch_cost, self.kappa)

    def fit(self, X, y=None):
        f = check_strategies(X)
        if f.shape[0] != 1:
            raise ValueError("fit expects a single system strategy")
        self.config_ = self.make_config(f[0])
        self.brm_ = brm_from_name(self.brm, self.warmup_rounds)
        self.cost_ = self.make_cost()
        self.best_response_ = best_response(self.config_, self.brm_, self.cost_)
        self.strategy_ = np.asarray(self.best_response_.strategy.weights)
        self.utility_ = self.best_response_.utility.utility
        self.verdict_ = decentralization_verdict(self.config_, self.brm_, self.cost_,
                                                 best=self.best_response_)
        return self

    def predict(self, X) -> np.ndarray:
        """Best response for every system strategy row of ``X``."""
        check_is_fitted(self, "best_response_")
        F = check_strategies(X)
        out = np.empty_like(F)
        for i, f in enumerate(F):
            cfg = self.make_config(f)
            out[i] = best_response(cfg, self.brm_, self.cost_).strategy.weights
        return out
