"""Acceptance suite: one test per criterion, each recording a pass/fail line.

The lines are printed in the terminal summary (see conftest) and also
directly, so ``pytest -s`` shows them inline.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brmgame.mechanisms import DecentBrm, Fruitchain, Memoryless, RewardDistribution
from brmgame.model import AlphaGrid, MinerType, enumerate_grid
from brmgame.simulation import (
    SimConfig,
    compare_with_analytic,
    risk_ratio_closed_form,
    simulate,
    simulate_risk_ratio,
)
from brmgame.solver import (
    all_in_largest,
    best_response,
    centralization_threshold,
    concentration,
    decentbrm_slack,
    decentralization_verdict,
    fruitchain_risk_scale,
    is_dominated,
    memoryless_pool_margin,
    sequential_joins,
    solo,
)
from brmgame.switching import SwitchCostFn, check_p1, compute_d_min
from brmgame.utility import grid_utilities, risk_of, round_utility

from conftest import F_VECTORS, RHOS, battery, make_cfg, record_acceptance

D = SwitchCostFn("balanced", 1.0)


def report(n, ok, detail):
    record_acceptance(n, ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_zero_cost_best_response_equals_system():
    misses, slowest = [], 0.0
    for rho in RHOS:
        for f in F_VECTORS:
            cfg = make_cfg(f=f, rho=rho)
            t0 = time.perf_counter()
            best = best_response(cfg, Memoryless(), D, AlphaGrid("1/10", 3))
            slowest = max(slowest, time.perf_counter() - t0)
            if best.strategy.weights != cfg.f.weights:
                misses.append(f"rho={rho} f={cfg.f} -> {best.strategy}")
    ok = not misses and slowest < 1.0
    report(1, ok, f"{9 - len(misses)}/9 scenarios return g*=f, slowest scan {slowest:.3f}s"
           + (f"; misses: {'; '.join(misses)}" if misses else ""))


def test_off_grid_system_split_recovered_on_a_finer_grid():
    # f=(0,0.41,0.33,0.26) needs a grid step of 1/100 to be representable
    cfg = make_cfg(f=F_VECTORS[1], rho=2)
    best = best_response(cfg, Memoryless(), D, AlphaGrid("1/100", 3))
    assert best.strategy.weights == pytest.approx(cfg.f.weights, abs=1e-12)


def test_criterion_2_threshold_centralises():
    failures = []
    nonmonotone = []
    for cfg in battery():
        d_min = compute_d_min(D, cfg.grid()).value
        c_bar = centralization_threshold(cfg, d_min)
        lm = all_in_largest(cfg)
        for k in (1, 2, 10):
            best = best_response(cfg.evolve(c=k * c_bar), Memoryless(), D)
            if best.strategy.weights != lm.weights or not best.unique:
                failures.append(f"rho={cfg.rho} f={cfg.f} x={cfg.ratio:g} c={k}cbar -> {best.strategy}")
        curve = [concentration(best_response(cfg.evolve(c=k * c_bar), Memoryless(), D).strategy)
                 for k in np.linspace(0, 2, 21)]
        if any(b < a for a, b in zip(curve, curve[1:])):
            nonmonotone.append(str(cfg.f))
    ok = not failures and not nonmonotone
    report(2, ok, f"18 scenarios x 3 multiples of cbar: {len(failures)} failures, "
           f"{len(nonmonotone)} non-monotone concentration curves")


def test_criterion_3_solo_dominated_under_memoryless():
    worst, problems = 0.0, []
    for cfg in battery():
        if is_dominated(cfg, Memoryless(), D, solo(cfg)) is None:
            problems.append(f"not dominated at c=0: {cfg.f} rho={cfg.rho}")
        c_bar = centralization_threshold(cfg, compute_d_min(D, cfg.grid()).value)
        ccfg = cfg.evolve(c=2 * c_bar)
        dom = is_dominated(ccfg, Memoryless(), D, solo(ccfg))
        if dom is None or dom.witness.weights != all_in_largest(ccfg).weights:
            problems.append(f"witness is not all-in-largest: {cfg.f} rho={cfg.rho}")
            continue
        closed = memoryless_pool_margin(ccfg)
        worst = max(worst, abs(dom.margin - closed) / closed)
    ok = not problems and worst <= 1e-6
    report(3, ok, f"solo dominated in 18/18 scenarios, worst relative margin error {worst:.2e}"
           + (f"; {problems}" if problems else ""))


def test_criterion_4_fruitchain_risk_ratio():
    worst_closed, worst_z, above_one = 0.0, 0.0, []
    mc_failures = []
    for t in (10, 100, 1000):
        cfg = make_cfg(t_ratio=t)
        g = solo(cfg)
        estimates = simulate_risk_ratio(cfg, g, 1_000_000, seed=1000 + t, rhos=range(2, 7))
        for est in estimates:
            rcfg = cfg.evolve(rho=est.rho)
            ratio = (round_utility(rcfg, g, Fruitchain(), D).risk
                     / round_utility(rcfg, g, Memoryless(), D).risk)
            closed = risk_ratio_closed_form(cfg, est.rho)
            worst_closed = max(worst_closed, abs(ratio - closed))
            if not ratio < 1:
                above_one.append((t, est.rho))
            gap = abs(est.ratio - closed)
            if gap > 5 * est.se + 1e-12 * closed:
                mc_failures.append((t, est.rho, gap / est.se if est.se else math.inf))
            if est.se > 0:
                worst_z = max(worst_z, gap / est.se)
    ok = not above_one and worst_closed <= 1e-9 and not mc_failures
    report(4, ok, f"15 (rho, t_ratio) cells: ratio<1 everywhere={not above_one}, "
           f"max |analytic-closed|={worst_closed:.1e}, max MC z={worst_z:.2f}")


def test_criterion_5_fruitchain_pool_margin():
    worst, nonpositive = 0.0, 0
    for cfg in battery():
        margin = (round_utility(cfg, all_in_largest(cfg), Fruitchain(), D).utility
                  - round_utility(cfg, solo(cfg), Fruitchain(), D).utility)
        x = cfg.ratio
        stated = cfg.b * fruitchain_risk_scale(cfg) * (x ** (1 / cfg.rho) - x)
        worst = max(worst, abs(margin - stated) / stated)
        nonpositive += margin <= 0
    ok = worst <= 1e-6 and nonpositive == 0
    report(5, ok, f"margin positive in {18 - nonpositive}/18 scenarios; worst relative gap to "
           f"b*Gamma*(x^(1/rho) - x) is {worst:.2e} (tolerance 1e-6)")


def test_criterion_6_decentbrm_equilibrium():
    brm = DecentBrm()
    worst_excess, not_decentral, rising = -math.inf, 0, 0
    for cfg in battery():
        _, _, _, util, _ = grid_utilities(cfg, brm, D, cfg.grid().weights_array())
        u_solo = round_utility(cfg, solo(cfg), brm, D).utility
        worst_excess = max(worst_excess, float(np.max(util)) - u_solo - decentbrm_slack(cfg))
        not_decentral += not decentralization_verdict(cfg, brm, D).is_rho_decentralized
        series = sequential_joins(cfg, [MinerType(cfg.m1, cfg.rho)] * 10, brm, D)
        rising += any(b > a for a, b in zip(series, series[1:]))
    ok = worst_excess <= 0 and not_decentral == 0 and rising == 0
    report(6, ok, f"max (U(g) - U(solo) - eps) = {worst_excess:.2e}; {18 - not_decentral}/18 "
           f"decentralized; {18 - rising}/18 join series nonincreasing")


def test_criterion_7_monte_carlo_agreement():
    cfg = make_cfg(mode="exact")
    failures, slowest, worst_z = [], 0.0, 0.0
    for brm in (Memoryless(), Fruitchain(), DecentBrm()):
        for name, g in (("solo", solo(cfg)), ("system", cfg.f), ("largest", all_in_largest(cfg))):
            t0 = time.perf_counter()
            res = simulate(SimConfig(cfg, brm, 1_000_000, seed=2026, rhos=(2,)), g)
            slowest = max(slowest, time.perf_counter() - t0)
            rep = compare_with_analytic(res, round_utility(cfg, g, brm, D), 5.0)
            worst_z = max([worst_z] + [c["z"] for c in rep.checks if math.isfinite(c["z"])])
            if not rep.passed:
                failures.append(f"{brm.name}/{name}")
    ok = not failures and slowest < 10
    report(7, ok, f"9 runs at 1e6 rounds: max z={worst_z:.2f}, slowest {slowest:.2f}s"
           + (f"; failed {failures}" if failures else ""))


@given(st.integers(0, 3), st.integers(1, 10))
@settings(max_examples=25, deadline=None)
def _grid_invariant(p, n):
    pts = list(enumerate_grid(p, Fraction(1, n)))
    assert len(pts) == math.comb(n + p, p)
    assert all(abs(math.fsum(g.weights) - 1) <= 1e-12 and min(g.weights) >= 0 for g in pts)


# rewards below 1e-6 would underflow at rho=6 and say nothing about the inequality
@given(st.lists(st.tuples(st.just(0.0) | st.floats(1e-6, 5), st.floats(0.01, 1)), min_size=1, max_size=5))
@settings(max_examples=50, deadline=None)
def _power_mean(pairs):
    total = math.fsum(p for _, p in pairs)
    d = RewardDistribution.from_pairs((r, p / total) for r, p in pairs)
    risks = [risk_of(d, rho) for rho in range(1, 7)]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(risks, risks[1:]))


def test_criterion_8_property_suites():
    results = {}

    def run(name, fn):
        try:
            fn()
            results[name] = True
        except AssertionError:
            results[name] = False

    run("grid invariants", _grid_invariant)
    run("power-mean monotonicity", _power_mean)

    def p1():
        for p in (1, 2, 3):
            assert check_p1(D, list(AlphaGrid("1/10", p))).ok
    run("P1 exhaustive", p1)

    def dmin():
        for p in (1, 2, 3):
            d = compute_d_min(D, AlphaGrid("1/10", p))
            lo, hi = d.witness
            assert d.value > 0 and abs(abs(D(hi) - D(lo)) - d.value) <= 1e-12
    run("D_min positive with witness", dmin)

    def seeds():
        cfg = make_cfg(mode="exact")
        for brm in (Memoryless(), Fruitchain(), DecentBrm(200)):
            sim = SimConfig(cfg, brm, 5000, seed=99)
            assert simulate(sim, cfg.f).to_dict() == simulate(sim, cfg.f).to_dict()
    run("simulator seed determinism", seeds)
    ok = all(results.values())
    report(8, ok, ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in results.items()))
