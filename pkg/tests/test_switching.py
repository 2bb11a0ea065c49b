from fractions import Fraction

import pytest

from brmgame.errors import AllCostsEqual, InvalidConfig
from brmgame.model import AlphaGrid, vertex
from brmgame.switching import CustomCost, SwitchCostFn, check_p1, check_p2, compute_d_min

BALANCED = SwitchCostFn("balanced", 1.0)
COUNT = SwitchCostFn("count")


def test_cost_values():
    for fn in (BALANCED, COUNT):
        for i in range(4):
            assert fn(vertex(3, i)) == 0
    assert BALANCED((0, 0.5, 0.5, 0)) == pytest.approx(1.25)
    assert BALANCED((0, 0.9, 0.1, 0)) == pytest.approx(1.09)
    assert COUNT((0, 0.9, 0.1, 0)) == 1


def test_exact_matches_float():
    for g in AlphaGrid("1/10", 3):
        assert float(BALANCED.exact(g.counts, g.denom)) == pytest.approx(BALANCED(g), abs=1e-15)


def test_invalid_cost_fn():
    with pytest.raises(InvalidConfig):
        SwitchCostFn("latency")
    with pytest.raises(InvalidConfig):
        SwitchCostFn("balanced", 0.0)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 4.0])
def test_p1_holds_for_balanced(kappa):
    report = check_p1(SwitchCostFn("balanced", kappa), list(AlphaGrid("1/10", 3)))
    assert report.ok and report.checked_pairs > 0


def test_p1_count_only_and_adversarial():
    points = list(AlphaGrid("1/10", 3))
    assert check_p1(COUNT, points).ok
    bad = check_p1(CustomCost(lambda g: -g.n_active), points)
    assert not bad.ok


def test_p2_directions():
    points = list(AlphaGrid("1/4", 2))
    report = check_p2(BALANCED, points)
    assert report.qualifying_pairs > 0
    assert report.prose_fraction == 1.0
    assert report.literal_fraction < 1.0
    assert report.literal_violations


def test_p2_count_only_same_support_equal():
    # pairs with one weight moved between two active pools keep the support
    points = [g for g in AlphaGrid("1/5", 2) if g.n_active == 3]
    report = check_p2(COUNT, points)
    assert report.qualifying_pairs > 0
    assert report.literal_holds == report.prose_holds == report.qualifying_pairs


def test_p2_flags_split_vs_concentrated_pair():
    report = check_p2(BALANCED, [(0, 0.5, 0.5, 0), (0, 1, 0, 0)])
    assert report.qualifying_pairs == 1
    assert report.literal_holds == 0 and report.prose_holds == 1


def test_d_min_values():
    assert compute_d_min(COUNT, AlphaGrid("1/10", 3)).value == 1
    d = compute_d_min(BALANCED, AlphaGrid("1/2", 2))
    assert d.exact_value == Fraction(5, 4)
    d3 = compute_d_min(BALANCED, AlphaGrid("1/10", 3))
    assert d3.exact_value == Fraction(1, 100)
    lo, hi = d3.witness
    assert BALANCED.exact(hi.counts, hi.denom) - BALANCED.exact(lo.counts, lo.denom) == d3.exact_value


def test_d_min_float_path_and_degenerate():
    d = compute_d_min(CustomCost(lambda g: float(g.n_active) ** 2), AlphaGrid("1/4", 2))
    assert d.value == pytest.approx(3.0)
    with pytest.raises(AllCostsEqual):
        compute_d_min(CustomCost(lambda g: 1.0), AlphaGrid("1/4", 2))
    with pytest.raises(InvalidConfig):
        compute_d_min(COUNT, AlphaGrid("1/4", 0))
