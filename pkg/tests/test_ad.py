import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from keyrate.ad import (
    ad_report,
    bob_error,
    condition_rhs,
    eve_error_lower_bound_activated,
    eve_error_lower_bound_werner,
    simulate_ad,
    six_class_rates,
    threshold,
)
from keyrate.errors import BracketError, DomainError, InvalidArgumentError, StructureError
from keyrate.paper_dists import (
    DerivedConstants,
    activate,
    binaryze_werner,
    symmetric_distribution,
    werner_distribution,
)
from keyrate.probdist import TripartiteDistribution


def activated(p, q=0.2):
    return activate(werner_distribution(p), symmetric_distribution(q))


# -------------------------------------------------------------------- bob error


def test_bob_error_values():
    assert bob_error(1 / 3, 2) == pytest.approx(0.2, abs=1e-15)
    assert bob_error(0.0, 7) == 0.0
    assert bob_error(0.5, 9) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(DomainError):
        bob_error(1.0, 4)
    with pytest.raises(InvalidArgumentError):
        bob_error(0.3, 0)


def test_bob_error_monotone_and_bounded_by_ratio_power():
    beta = 0.31
    ratio = beta / (1 - beta)
    values = [bob_error(beta, n) for n in range(1, 25)]
    assert all(a > b for a, b in zip(values, values[1:]))
    for n, v in enumerate(values, start=1):
        assert v <= ratio**n + 1e-15
    # the upper bound tightens: the ratio of the two approaches 1
    assert values[23] / ratio**24 > 0.999


# ------------------------------------------------------------------- eve bounds


def test_eve_bound_werner_values():
    assert eve_error_lower_bound_werner(0.5, 2) == pytest.approx(0.25, abs=1e-15)
    assert eve_error_lower_bound_werner(0.0, 6) == 0.0
    with pytest.raises(InvalidArgumentError):
        eve_error_lower_bound_werner(0.3, 5)


def test_eve_bound_werner_asymptotic_rate():
    dz = DerivedConstants.evaluate(p=0.6).delta_z
    rate = 2 * math.sqrt(dz * (1 - dz))
    # consecutive ratio tends to rate^2
    b40 = eve_error_lower_bound_werner(dz, 40)
    b42 = eve_error_lower_bound_werner(dz, 42)
    assert math.sqrt(b42 / b40) == pytest.approx(rate, rel=2e-2)


def test_eve_bound_activated_exact_sum_properties():
    rates = six_class_rates(activated(0.55))
    rhs = condition_rhs("activated", rates)
    values = {n: eve_error_lower_bound_activated(rates, n) for n in range(2, 14, 2)}
    assert all(v <= 0.5 + 1e-12 for v in values.values())
    # the exact sum is bounded by the compact form and approaches it from below
    for n, v in values.items():
        assert v <= 0.5 * rhs**n + 1e-15
    c = values[12] / rhs**12
    for n, v in values.items():
        assert v >= c * rhs**n - 1e-15


# ---------------------------------------------------------------------- the rhs


def test_condition_rhs_werner_threshold_point():
    c = DerivedConstants.evaluate(p=0.6)
    assert condition_rhs("werner", c) == pytest.approx(0.5, abs=1e-12)
    rep = ad_report("werner", p=0.6)
    assert rep.bob_ratio == pytest.approx(0.5, abs=1e-12)


def test_condition_rhs_symmetric_matches_alpha_gamma_form():
    # the compact (alpha+gamma)^2/3 form holds where gamma <= alpha <= 2 gamma,
    # i.e. 1/17 <= q <= 1/5; outside, the defining sum of square roots differs
    for q in (0.06, 0.12, 0.2):
        c = DerivedConstants.evaluate(q=q)
        assert condition_rhs("symmetric", c) == pytest.approx(
            (c.alpha + c.gamma) ** 2 / 3, abs=1e-12
        )
    c = DerivedConstants.evaluate(q=0.2)
    assert condition_rhs("symmetric", c) == pytest.approx(0.5, abs=1e-12)
    assert ad_report("symmetric", q=0.2).bob_ratio == pytest.approx(0.5, abs=1e-12)


def test_condition_rhs_activated_near_crossing():
    rep = ad_report("activated", p=0.513, q=0.2)
    assert rep.condition_ratio == pytest.approx(1.0, abs=2e-3)


# ------------------------------------------------------------------- six classes


def test_six_class_rates_frozen_values():
    rates = six_class_rates(activated(0.6))
    expected_delta, expected_eta, expected_d6 = oracles.six_class_rates_by_table5(0.6, 0.2)
    assert rates.delta == pytest.approx(expected_delta, abs=1e-12)
    assert rates.eta == pytest.approx(expected_eta, abs=1e-12)
    assert rates.delta6 == pytest.approx(expected_d6, abs=1e-12)
    # frozen literals (q = 0.2, p = 0.6); class 1 values are exactly 2/63 and 1/126
    assert rates.delta[0] == pytest.approx(2 / 63, abs=1e-12)
    assert rates.eta[0] == pytest.approx(1 / 126, abs=1e-12)
    assert rates.delta6 == pytest.approx(11 / 42, abs=1e-12)


def test_six_class_symmetry_relations():
    """The 00-cell and 11-cell conditional probabilities agree class by class."""
    act = activated(0.57)
    cells = {"0": {}, "1": {}}
    mass = {"0": 0.0, "1": 0.0}
    for x, y, z, p in act.support():
        if x == y:
            cells[x][z] = p
            mass[x] += p
    for i in range(3):
        a = cells["0"][f"z_{i}{i}|zt_{i}{i}00"] / mass["0"]
        b = cells["1"][f"z_{i}{i}|zt_{i}{i}11"] / mass["1"]
        assert a == pytest.approx(b, abs=1e-12)
        a = cells["0"][f"z_{i}{i}|zt_{i}{i}11"] / mass["0"]
        b = cells["1"][f"z_{i}{i}|zt_{i}{i}00"] / mass["1"]
        assert a == pytest.approx(b, abs=1e-12)
    a = cells["0"]["z_10|zt_0100"] / mass["0"]
    b = cells["1"]["z_10|zt_0111"] / mass["1"]
    assert a == pytest.approx(b, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_six_class_completeness(p, q):
    rates = six_class_rates(activate(werner_distribution(p), symmetric_distribution(q)))
    assert rates.completeness() == pytest.approx(1.0, abs=1e-12)
    assert all(v >= 0 for v in rates.delta + rates.eta + (rates.delta6,))


def test_six_class_rejects_foreign_table():
    bad = TripartiteDistribution.from_weights(
        ("0", "1"), ("0", "1"), ("weird",), np.ones((2, 2, 1))
    )
    with pytest.raises(StructureError):
        six_class_rates(bad)


# -------------------------------------------------------------------- thresholds


def test_threshold_werner():
    assert threshold("werner") == pytest.approx(0.6, abs=1e-6)


def test_threshold_symmetric():
    assert threshold("symmetric") == pytest.approx(0.2, abs=1e-6)


def test_threshold_activated():
    root = threshold("activated", fixed=0.2)
    assert root == pytest.approx(0.513, abs=1e-3)
    assert root == pytest.approx(0.5136312007904054, abs=2e-4)  # regression


def test_threshold_bracket_invariance():
    a = threshold("werner", lo=0.45, hi=0.99)
    b = threshold("werner", lo=0.55, hi=0.8)
    assert a == pytest.approx(b, abs=2e-6)


def test_threshold_no_bracket():
    with pytest.raises(BracketError):
        threshold("werner", lo=0.7, hi=0.9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_ad_report_verdict_consistency(p, q):
    rep = ad_report("werner", p=p) if q > 0.5 else ad_report("symmetric", q=q)
    assert rep.distillable == (rep.condition_ratio < 1.0)
    assert 0.0 <= rep.beta < 1.0


# -------------------------------------------------------------------- simulation


def test_simulate_deterministic_per_seed():
    t3 = binaryze_werner(werner_distribution(0.6))
    a = simulate_ad(t3, block_size=4, trials=2000, seed=9)
    b = simulate_ad(t3, block_size=4, trials=2000, seed=9)
    assert a == b
    c = simulate_ad(t3, block_size=4, trials=2000, seed=10)
    assert c != a


def test_simulate_bob_error_matches_closed_form():
    t3 = binaryze_werner(werner_distribution(0.6))
    out = simulate_ad(t3, block_size=4, trials=40000, seed=0)
    predicted = bob_error(1 / 3, 4)
    assert abs(out.bob_error_rate - predicted) <= 4 * out.bob_error_se
    assert out.accepted == 40000
    assert out.bob_errors <= out.accepted <= out.trials


def test_simulate_eve_never_far_below_bound():
    t3 = binaryze_werner(werner_distribution(0.6))
    dz = DerivedConstants.evaluate(p=0.6).delta_z
    for n in (2, 4):
        out = simulate_ad(t3, block_size=n, trials=30000, seed=1)
        bound = eve_error_lower_bound_werner(dz, n)
        assert out.eve_error_rate_given_correct >= bound - 3 * out.eve_error_se_given_correct


def test_simulate_deterministic_eve_never_errs():
    # p = 1/3: delta_z = 0, Eve's symbol pins the honest pair exactly
    t3 = binaryze_werner(werner_distribution(1 / 3))
    out = simulate_ad(t3, block_size=3, trials=5000, seed=2)
    assert out.eve_errors == 0
    assert out.eve_error_rate == 0.0


def test_simulate_input_validation():
    with pytest.raises(InvalidArgumentError):
        simulate_ad(werner_distribution(0.6), block_size=2, trials=10)
    t3 = binaryze_werner(werner_distribution(0.6))
    with pytest.raises(InvalidArgumentError):
        simulate_ad(t3, block_size=0, trials=10)


def test_simulate_raw_cap():
    t3 = binaryze_werner(werner_distribution(0.6))
    with pytest.raises(InvalidArgumentError):
        simulate_ad(t3, block_size=14, trials=10**6, seed=0, raw_cap=2000)


def test_activated_condition_ratio_monotone_near_crossing():
    grid = np.linspace(0.50, 0.53, 7)
    ratios = [ad_report("activated", p=p, q=0.2).condition_ratio for p in grid]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    signs = [r - 1.0 for r in ratios]
    assert signs[0] > 0 > signs[-1]
