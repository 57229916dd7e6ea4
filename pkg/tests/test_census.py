"""Sampling-plan determinism and the two census kinds."""

import math

import numpy as np
import pytest

from quadprice.census import (SamplingPlan, StudyReport,
                              run_problematic_census, run_switch_census)
from quadprice.testcases import TC_QUOTE


def small_sigma_plan(n=500, seed=0):
    return SamplingPlan(n=n, sigma_range=(1e-6, 1e-5), epsilon=1e-6, seed=seed)


# --------------------------------------------------------------------- plan

def test_plan_validation():
    with pytest.raises(ValueError, match="sample count"):
        SamplingPlan(n=-1, sigma_range=(1e-6, 1e-5))
    with pytest.raises(ValueError, match="sigma_range"):
        SamplingPlan(n=1, sigma_range=(0.0, 1e-5))
    with pytest.raises(ValueError, match="sigma_range"):
        SamplingPlan(n=1, sigma_range=(1e-4, 1e-5))
    with pytest.raises(ValueError, match="quote_source"):
        SamplingPlan(n=1, sigma_range=(1e-6, 1e-5), quote_source="market")
    with pytest.raises(ValueError, match="seed"):
        SamplingPlan(n=1, sigma_range=(1e-6, 1e-5), seed=-3)
    with pytest.raises(ValueError, match="epsilon"):
        SamplingPlan(n=1, sigma_range=(1e-6, 1e-5), epsilon=0.0)


def test_draws_are_keyed_by_index():
    plan = small_sigma_plan(n=10)
    p5, q5 = plan.draw(5)
    # drawing other indices first must not disturb draw 5
    plan.draw(9)
    plan.draw(0)
    p5b, q5b = plan.draw(5)
    assert p5 == p5b and q5 == q5b
    # different indices give different parameters
    assert plan.draw(6)[0] != p5
    # a different seed changes the draw
    assert SamplingPlan(n=10, sigma_range=(1e-6, 1e-5), seed=1).draw(5)[0] != p5


def test_draw_respects_plan_ranges():
    plan = SamplingPlan(n=40, sigma_range=(1e-3, 2e-3), epsilon=1e-5,
                        log_sigma=True)
    for i in range(40):
        params, quote = plan.draw(i)
        assert 1e-3 <= params.sigma <= 2e-3
        assert params.epsilon == 1e-5
        assert 0.5 <= params.hurst <= 1.0
        assert quote.tau > 0 and quote.spot > 0 and quote.strike > 0


def test_fixed_quote_source():
    plan = SamplingPlan(n=4, sigma_range=(1e-6, 1e-5), quote_source="fixed")
    assert plan.draw(0)[1] == TC_QUOTE
    other = TC_QUOTE
    plan2 = SamplingPlan(n=4, sigma_range=(1e-6, 1e-5), quote_source="fixed",
                         fixed_quote=other)
    assert plan2.draw(3)[1] == other


# ------------------------------------------------------------ switch census

def test_empty_census_is_all_zero():
    rep = run_switch_census(SamplingPlan(n=0, sigma_range=(1e-6, 1e-5)))
    assert rep.total == 0 and rep.switch_on == 0 and rep.f0_gate_failed == 0
    assert rep.bin_counts == {} and rep.switch_fraction == 0.0


def test_census_is_deterministic_and_thread_invariant():
    plan = small_sigma_plan(n=200)
    a = run_switch_census(plan, threads=1)
    b = run_switch_census(plan, threads=1)
    c = run_switch_census(plan, threads=4)
    assert a == b == c


def test_histogram_conserves_draws():
    rep = run_switch_census(small_sigma_plan(n=300))
    assert sum(rep.bin_counts.values()) == rep.total == 300
    # a switched draw has o > 22, so it lives in a bin at 22 or above
    high = sum(cnt for label, cnt in rep.bin_counts.items()
               if label == "+inf" or (label not in ("+inf", "-inf")
                                      and int(label) >= 22))
    assert rep.switch_on <= high


def test_small_sigma_switch_fraction():
    rep = run_switch_census(small_sigma_plan(n=500))
    assert 0.05 <= rep.switch_fraction <= 0.2


def test_large_sigma_rarely_switches():
    rep = run_switch_census(SamplingPlan(n=500, sigma_range=(1e-2, 1e-1),
                                         epsilon=1e-6))
    assert rep.switch_fraction <= 0.01


def test_report_round_trip():
    rep = run_switch_census(small_sigma_plan(n=50))
    assert StudyReport.from_dict(rep.as_dict()) == rep


# ------------------------------------------------------- problematic census

def test_empty_problematic_census():
    rep = run_problematic_census(SamplingPlan(n=0, sigma_range=(1e-5, 1e-4)))
    assert rep.total == 0
    assert rep.problematic == {"err_gt_1e-8": 0, "fevals_gt_1e4": 0, "either": 0}
    assert rep.crosstab == {} and rep.findings == ()


def test_problematic_census_classification():
    plan = SamplingPlan(n=12, sigma_range=(1e-5, 1e-4), epsilon=1e-6, seed=7)
    rep = run_problematic_census(plan)
    assert rep.total == 12
    assert set(rep.crosstab) == {"par&problematic", "par&clean",
                                 "nopar&problematic", "nopar&clean"}
    assert sum(rep.crosstab.values()) == 12
    prob = rep.problematic
    assert set(prob) == {"err_gt_1e-8", "fevals_gt_1e4", "either"}
    assert max(prob["err_gt_1e-8"], prob["fevals_gt_1e4"]) <= prob["either"]
    assert prob["either"] <= prob["err_gt_1e-8"] + prob["fevals_gt_1e4"]
    assert prob["either"] >= 1          # this range does contain hard draws
    # missed problematic draws surface as findings, one per draw, not raises
    assert len(rep.findings) == rep.crosstab["nopar&problematic"]
    assert all("draw" in f for f in rep.findings)
    # round trip with the optional sections populated
    assert StudyReport.from_dict(rep.as_dict()) == rep


def test_problematic_census_thread_invariant():
    plan = SamplingPlan(n=8, sigma_range=(1e-5, 1e-4), epsilon=1e-6, seed=7)
    assert run_problematic_census(plan) == run_problematic_census(plan, threads=4)


def test_moderate_sigma_is_never_problematic():
    plan = SamplingPlan(n=6, sigma_range=(0.09, 0.11), epsilon=1e-6, seed=3)
    rep = run_problematic_census(plan)
    assert rep.problematic["either"] == 0
    assert rep.crosstab["par&problematic"] == 0
    assert rep.crosstab["nopar&problematic"] == 0
    assert rep.findings == ()
