"""Runnable pass/fail experiments."""
import csv
import io
import json
import math

import pytest

from oracles import mp_counterexample_heat, mp_counterexample_tau

from asymlab.limits import measurability_report
from asymlab.numerics import LogScalar
from asymlab.profiles import (
    heat_integral,
    power_integral,
    SignedProfilePair,
    make_canonical,
    make_counterexample,
    make_root,
    make_spike,
    pth_power,
)
from asymlab.scenarios import (
    EQ,
    GE,
    LE,
    Row,
    ScenarioError,
    counterexample_heat,
    counterexample_partial_deviation,
    run_counterexample,
    run_gamma_factor,
    run_p_case,
    run_signed,
)


def row(result, prefix):
    matches = [r for r in result.rows if r.label.startswith(prefix)]
    assert len(matches) == 1, [r.label for r in result.rows]
    return matches[0]


# -- rows ----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "relation, computed, passed",
    [(EQ, 1.05, True), (EQ, 1.2, False), (GE, 0.95, True), (GE, 0.8, False), (LE, 1.05, True), (LE, 1.2, False)],
)
def test_row_relations(relation, computed, passed):
    assert Row("r", 1.0, computed, 0.1, relation).passed is passed


def test_row_nan_fails():
    assert not Row("r", 1.0, math.nan, 1.0).passed
    assert Row("r", 1.0, math.inf, 0.0, GE).passed
    assert not Row("r", 1.0, math.inf, 0.0, LE).passed


# -- counterexample --------------------------------------------------------------------


@pytest.fixture(scope="module")
def counterexample_result():
    return run_counterexample(30)


def test_counterexample_passes(counterexample_result):
    assert counterexample_result.passed, counterexample_result.failures()


def test_counterexample_heat_row_n10(counterexample_result):
    r = row(counterexample_result, "(b) n=10 ")
    assert r.expected == pytest.approx(0.367834, abs=1e-6)
    assert r.computed >= 0.367834


def test_counterexample_average_row(counterexample_result):
    r = row(counterexample_result, "(c)")
    assert r.computed <= 0.01
    # numerator 7 + ln 7! over denominator e^8, up to the bounded deviation
    assert r.computed == pytest.approx((7 + math.lgamma(8)) / math.exp(8), abs=2.0 / math.exp(8))


def test_counterexample_partial_band_n5():
    assert 5 + math.lgamma(6) == pytest.approx(9.7875, abs=1e-4)
    assert abs(counterexample_partial_deviation(5)) <= 2.0


def test_counterexample_heat_lower_bound_direct():
    for n in (1, 5, 20, 30):
        assert counterexample_heat(n) >= math.exp(-1) - math.exp(-n) - 1e-10


@pytest.mark.parametrize("n", [1, 2, 5, 10, 20, 30, 60])
def test_counterexample_heat_matches_series_oracle(n):
    assert counterexample_heat(n) == pytest.approx(mp_counterexample_heat(n), rel=1e-13)


@pytest.mark.parametrize("n", [2, 5, 10, 20])
def test_generic_heat_integral_at_tower_scale(n):
    # a log-magnitude of size e^n carries absolute rounding e^n * eps
    lam = LogScalar.from_log(math.exp(n))
    got = math.exp(heat_integral(make_counterexample(), lam, 1.0).value.log - lam.log)
    assert got == pytest.approx(mp_counterexample_heat(n), rel=max(1e-13, 8.0 * math.exp(n) * 2.0**-52))


def test_counterexample_heat_frozen():
    # 40-digit series sums
    assert counterexample_heat(1) == pytest.approx(0.36787944117144233, rel=1e-14)
    assert counterexample_heat(5) == pytest.approx(0.7290209353437992, rel=1e-14)
    assert counterexample_heat(30) == pytest.approx(0.7357588823427911, rel=1e-14)


@pytest.mark.parametrize("s", [1e-1, 1e-2, 1e-3])
def test_counterexample_tau_matches_series_oracle(s):
    got = float(power_integral(make_counterexample(), 1.0 + s))
    assert got == pytest.approx(mp_counterexample_tau(1.0 + s), rel=1e-12)


def test_counterexample_zeta_rows(counterexample_result):
    assert row(counterexample_result, "(e) s*tau").computed <= 0.05
    assert row(counterexample_result, "raw heat limsup").computed >= math.exp(-1) - 1e-6


@pytest.mark.parametrize("n_max", [2, 61])
def test_counterexample_range(n_max):
    with pytest.raises(ValueError):
        run_counterexample(n_max)


def test_counterexample_is_deterministic():
    a, b = run_counterexample(5), run_counterexample(5)
    assert a.to_dict() == b.to_dict()
    assert a.to_csv(["x"]) == b.to_csv(["x"])


# -- Gamma factor ----------------------------------------------------------------------------


def test_gamma_factor_canonical():
    res = run_gamma_factor(make_canonical())
    assert res.passed, res.failures()
    got = [r.computed for r in res.rows]
    want = [2.0, 1.0, math.sqrt(math.pi) / 2.0, math.gamma(4.0 / 3.0)]
    assert got == pytest.approx(want, abs=1e-3)
    assert want[3] == pytest.approx(0.892980, abs=1e-6)


def test_gamma_factor_q1_matches_report():
    p = make_canonical(2.0)
    res = run_gamma_factor(p, (1.0,))
    rep = measurability_report(p)
    assert res.rows[0].computed == pytest.approx(rep.mheat_limit.value / rep.zeta_limit.value, abs=1e-12)


def test_gamma_factor_rejects_non_measurable():
    with pytest.raises(ScenarioError) as info:
        run_gamma_factor(make_spike(), (1.0,))
    assert info.value.report is not None
    assert not info.value.report.agree


# -- p case ------------------------------------------------------------------------------------


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_p_case_roots(p):
    res = run_p_case(make_root(p), p)
    assert res.passed, res.failures()
    for label in ("(a) lim Dixmier", "(a) lim M", "(a) (1/p)"):
        assert row(res, label).computed == pytest.approx(1.0, abs=1e-3)


def test_p_case_parallel_value():
    res = run_p_case(make_root(2.0), 2.0)
    r = row(res, "(b)")
    assert r.expected == pytest.approx(1.0, abs=1e-3)
    assert r.computed == pytest.approx(1.0, abs=1e-3)
    # for p = 3 the parallel limit is 1/2 Gamma(3/2) * 3
    r3 = row(run_p_case(make_root(3.0), 3.0), "(b)")
    assert r3.expected == pytest.approx(0.75 * math.sqrt(math.pi), abs=1e-3)


def test_p_case_change_of_variable_exact():
    assert row(run_p_case(make_root(2.0), 2.0), "(c)").computed < 1e-12


def test_p_case_degenerate_delegates():
    p = make_canonical(2.0)
    res = run_p_case(p, 1.0)
    rep = measurability_report(p)
    assert [r.computed for r in res.rows[:3]] == [
        rep.avg_limit.value, rep.mheat_limit.value, rep.zeta_limit.value
    ]
    assert res.passed


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_p_case_round_trip(p):
    x = make_canonical(1.5)
    res = run_p_case(pth_power(x, 1.0 / p), p)
    rep = measurability_report(x)
    assert row(res, "(a) lim Dixmier").computed == pytest.approx(rep.avg_limit.value, abs=1e-12)
    assert row(res, "(a) lim M").computed == pytest.approx(rep.mheat_limit.value, abs=1e-6)
    assert row(res, "(a) (1/p)").computed == pytest.approx(rep.zeta_limit.value, abs=1e-6)


def test_p_case_rejects_small_p():
    with pytest.raises(ValueError):
        run_p_case(make_root(2.0), 0.5)


# -- signed ------------------------------------------------------------------------------------


def test_signed_identical_parts():
    res = run_signed(SignedProfilePair(make_canonical(), make_canonical()))
    assert res.passed
    assert all(abs(r.computed) < 1e-12 for r in res.rows)


def test_signed_half():
    res = run_signed(SignedProfilePair(make_canonical(), make_canonical(0.5)))
    assert res.passed, res.failures()
    assert row(res, "raw signed").computed == pytest.approx(0.5, abs=1e-3)
    assert row(res, "raw signed").expected == pytest.approx(0.5, abs=1e-3)
    assert res.meta["weak_l1"] and res.meta["little_o"]


def test_signed_counterexample_cancels():
    ce = make_counterexample()
    res = run_signed(SignedProfilePair(ce, ce.scaled(1.0)))
    assert res.passed
    assert all(abs(r.computed) < 1e-12 for r in res.rows)
    # each part alone has an oscillating raw heat function
    assert measurability_report(ce).raw_heat_limit.classification == "oscillating"


# -- output ------------------------------------------------------------------------------------


def test_csv_and_json_output():
    res = run_p_case(make_root(2.0), 2.0)
    text = res.to_csv(["tool asymlab", "grid 1:0:300:16"])
    lines = text.splitlines()
    assert lines[:2] == ["# tool asymlab", "# grid 1:0:300:16"]
    table = list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))
    assert [t["label"] for t in table] == [r.label for r in res.rows]
    assert all(t["pass"] == "true" for t in table)
    assert float(table[0]["computed"]) == res.rows[0].computed
    data = json.loads(json.dumps(res.to_dict()))
    assert data["pass"] is True and len(data["rows"]) == len(res.rows)
