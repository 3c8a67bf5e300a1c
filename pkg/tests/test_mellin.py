"""Heat-trace models, the Mellin bridge and the gasket Cesaro mean."""
import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asymlab.mellin import (
    GASKET_BETA,
    GASKET_FREQ,
    GASKET_OMEGA,
    GasketParams,
    HeatTraceModel,
    ModelError,
    gasket_cesaro,
    heat_to_residue,
    load_model,
    mellin_integral,
    mellin_zeta,
    model_from_dict,
    profile_zeta,
    zeta_bound_check,
)
from asymlab.profiles import make_canonical, make_counterexample, make_root, power_integral

mp.mp.dps = 30


def mp_mellin_gasket(a, b, c, beta, s):
    """int_0^inf t^(s/2-1) h(t) dt with v = log t; the oscillation is integrated period by period."""
    sig = mp.mpf(s) / 2 - beta
    near_fn = lambda v: mp.exp(sig * v) * (a + b * mp.sin(GASKET_FREQ * (v - c)))
    period = 2 * mp.pi / GASKET_FREQ
    # exp(sig v) falls below 1e-25 of its peak by this depth
    depth = mp.ceil(60 / sig / period) * period
    nodes = mp.linspace(-depth, 0, int(depth / period) * 2 + 1)
    near = mp.quad(near_fn, nodes)
    g1 = a + b * mp.sin(GASKET_FREQ * (0 - c))
    far = g1 * mp.e * mp.gammainc(mp.mpf(s) / 2, 1)
    return near + far


def mp_mellin_power_cutoff(a, p, s):
    return a * (2 / (mp.mpf(s) - p) + mp.e * mp.gammainc(mp.mpf(s) / 2, 1))


# -- models -------------------------------------------------------------------------------


def test_beta_and_frequencies():
    assert GASKET_BETA == pytest.approx(0.682606, abs=1e-6)
    assert GASKET_OMEGA == pytest.approx(7.807, abs=1e-3)
    assert GASKET_OMEGA == pytest.approx(4 * math.pi / math.log(5), rel=1e-15)


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (1.0, -1.5), (0.0, 0.0)])
def test_gasket_positivity_enforced(a, b):
    with pytest.raises(ModelError):
        GasketParams(a, b)


def test_gasket_beta_range():
    with pytest.raises(ModelError):
        GasketParams(1.0, 0.0, 0.0, 1.2)


def test_model_round_trip(tmp_path):
    models = [
        HeatTraceModel.power_cutoff(2.0, 3.0),
        HeatTraceModel.from_gasket(GasketParams(1.0, 0.2, 0.3)),
        HeatTraceModel.from_profile(make_canonical(), 2.0),
        HeatTraceModel.mixture([(0.5, HeatTraceModel.power_cutoff(1.0, 2.0)),
                                (2.0, HeatTraceModel.from_gasket(GasketParams(1.0, 0.1)))]),
    ]
    for m in models:
        path = tmp_path / "m.json"
        path.write_text(json.dumps(m.to_dict()))
        back = load_model(path)
        assert back.to_dict() == m.to_dict()
        t = np.array([1e-3, 0.5, 2.0])
        assert np.allclose(back(t), m(t), rtol=1e-14)


@pytest.mark.parametrize(
    "data, needle",
    [
        ({"kind": "other"}, "unknown kind"),
        ({"a": 1}, "kind"),
        ({"kind": "power_cutoff", "a": 1.0}, "'p'"),
        ({"kind": "power_cutoff", "a": 1.0, "p": 2.0, "x": 1}, "unknown fields"),
        ({"kind": "gasket", "a": 1.0, "b": 2.0}, "|b| < a"),
        ({"kind": "power_cutoff", "a": -1.0, "p": 2.0}, "a >= 0"),
    ],
)
def test_model_errors(data, needle):
    with pytest.raises(ModelError) as info:
        model_from_dict(data)
    assert needle in str(info.value)


def test_model_file_syntax_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "gasket",\n  "a": }')
    with pytest.raises(ModelError, match="line 2"):
        load_model(path)


def test_from_profile_needs_power_tail():
    with pytest.raises(ModelError):
        HeatTraceModel.from_profile(make_counterexample())


# -- Mellin integral ---------------------------------------------------------------------------


def test_zero_model():
    h = HeatTraceModel.power_cutoff(0.0, 2.0)
    assert mellin_zeta(h, 2.5) == 0.0


@pytest.mark.parametrize("a, p, s", [(1.0, 2.0, 2.001), (1.0, 2.0, 2.1), (2.0, 2.0, 3.0), (0.7, 1.3, 1.5)])
def test_power_cutoff_vs_mpmath(a, p, s):
    h = HeatTraceModel.power_cutoff(a, p)
    ref = float(mp_mellin_power_cutoff(a, p, s))
    assert mellin_integral(h, s).total == pytest.approx(ref, rel=1e-10)
    assert mellin_zeta(h, s) == pytest.approx(ref / math.gamma(s / 2), rel=1e-10)


@pytest.mark.parametrize("a, b, c, s", [(1.0, 0.0, 0.0, 1.5), (1.0, 0.1, 0.0, 1.5), (2.0, -0.5, 0.7, 2.2)])
def test_gasket_vs_mpmath(a, b, c, s):
    h = HeatTraceModel.from_gasket(GasketParams(a, b, c))
    ref = float(mp_mellin_gasket(a, b, c, GASKET_BETA, s))
    assert mellin_integral(h, s).total == pytest.approx(ref, rel=1e-9)


def test_divergence_signal():
    h = HeatTraceModel.power_cutoff(1.0, 2.0)
    assert mellin_zeta(h, 2.0) == math.inf
    assert mellin_integral(h, 1.0).divergent


def test_power_cutoff_residue_limit():
    h = HeatTraceModel.power_cutoff(1.0, 2.0)
    for eps in (1e-4, 1e-6):
        assert eps * mellin_zeta(h, 2.0 + eps) == pytest.approx(2.0, abs=5 * eps)


def test_gasket_b0_residue_limit():
    h = HeatTraceModel.from_gasket(GasketParams(1.0, 0.0))
    p = 2 * GASKET_BETA
    eps = 1e-6
    assert eps * mellin_zeta(h, p + eps) == pytest.approx(2.0 / math.gamma(GASKET_BETA), abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(
    w1=st.floats(min_value=0.0, max_value=3.0),
    w2=st.floats(min_value=0.0, max_value=3.0),
    b=st.floats(min_value=-0.9, max_value=0.9),
    ds=st.floats(min_value=0.01, max_value=2.0),
)
def test_linearity_via_mixture(w1, w2, b, ds):
    h1 = HeatTraceModel.power_cutoff(1.0, 1.0)
    h2 = HeatTraceModel.from_gasket(GasketParams(1.0, b))
    mix = HeatTraceModel.mixture([(w1, h1), (w2, h2)])
    s = mix.p + ds
    want = w1 * mellin_zeta(h1, s) + w2 * mellin_zeta(h2, s)
    assert mellin_zeta(mix, s) == pytest.approx(want, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize(
    "profile, q",
    [(make_canonical(), 1.0), (make_canonical(2.0), 2.0), (make_root(2.0), 1.0), (make_root(3.0), 0.5)],
    ids=["canonical-q1", "canonical2-q2", "root2-q1", "root3-q05"],
)
@pytest.mark.parametrize("ds", [0.01, 0.1, 0.5])
def test_from_profile_matches_power_integral(profile, q, ds):
    h = HeatTraceModel.from_profile(profile, q)
    s = h.p + ds
    direct = profile_zeta(h, s)
    assert direct == pytest.approx(float(power_integral(profile, q * s / 2)), rel=1e-15)
    assert mellin_zeta(h, s) == pytest.approx(direct, rel=1e-6)


@pytest.mark.parametrize(
    "h",
    [
        HeatTraceModel.power_cutoff(1.0, 2.0),
        HeatTraceModel.from_gasket(GasketParams(1.0, 0.1)),
        HeatTraceModel.from_profile(make_canonical(), 1.0),
    ],
    ids=["power_cutoff", "gasket", "profile"],
)
@pytest.mark.parametrize("ds", [1e-3, 1e-2, 1e-1])
def test_split_independence(h, ds):
    s = h.p + ds
    base = mellin_integral(h, s, 1.0)
    for split in (0.5, 2.0, 0.1, 5.0):
        other = mellin_integral(h, s, split)
        assert other.total == pytest.approx(base.total, rel=1e-8)
    assert base.truncation_bound < 1e-20 * base.total


def test_split_must_be_positive():
    with pytest.raises(ValueError):
        mellin_integral(HeatTraceModel.power_cutoff(1.0, 2.0), 3.0, 0.0)


# -- bound check -----------------------------------------------------------------------------------


def test_bound_check_hypothesis_failure_skips_bounds():
    h = HeatTraceModel.power_cutoff(3.0, 2.0)
    res = zeta_bound_check(h, 2.0, 2.0, [2.01])
    assert not res.passed
    assert len(res.rows) == 2
    assert "skipped" in res.notes[0]


def test_bound_check_near_p_holds():
    # closest to p the far part (s - p) e Gamma(s/2, 1) is negligible
    h = HeatTraceModel.power_cutoff(2.0, 2.0)
    res = zeta_bound_check(h, 2.0, 2.0, [2.001, 2.0001])
    assert res.passed, res.failures()


def test_bound_check_gasket_envelope():
    h = HeatTraceModel.from_gasket(GasketParams(1.0, 0.1))
    p = 2 * GASKET_BETA
    # gamma in [0.9, 1.1], so C = 1.1 / 0.9 covers both sides
    res = zeta_bound_check(h, p, 1.1 / 0.9, [p + 1e-3, p + 1e-2])
    assert res.passed, res.failures()


def test_bound_check_reports_the_far_part():
    # (s - p) int = 2a + (s - p) a e Gamma(s/2, 1) exceeds 2C + 0.05 at s - p = 0.1 when C = a = 1
    h = HeatTraceModel.power_cutoff(1.0, 2.0)
    res = zeta_bound_check(h, 2.0, 1.0, [2.1])
    upper = [r for r in res.rows if r.label.endswith("upper")][0]
    assert upper.computed == pytest.approx(0.1 * float(mp_mellin_power_cutoff(1.0, 2.0, 2.1)), rel=1e-10)
    assert not upper.passed


# -- gasket Cesaro mean -------------------------------------------------------------------------------


def test_gasket_b0_is_exact():
    res = gasket_cesaro(GasketParams(1.0, 0.0))
    assert np.max(np.abs(res.function.values - 1.0)) <= 1e-12
    assert res.limit.converged and res.limit.value == pytest.approx(1.0, abs=1e-12)


def test_gasket_envelope_holds():
    params = GasketParams(1.0, 0.1)
    res = gasket_cesaro(params)
    assert res.bound_holds and res.max_excess <= 1e-6
    y = res.function.log_arguments
    at20 = res.function.values[np.argmin(np.abs(y - 20.0))]
    assert abs(at20 - 1.0) <= 2 * 0.1 / (GASKET_OMEGA * 20.0) + 1e-6
    assert 2 * 0.1 / (GASKET_OMEGA * 20.0) == pytest.approx(0.00128, abs=1e-5)


@pytest.mark.parametrize("b, c", [(0.1, 0.0), (-0.3, 0.4), (0.9, 1.7)])
def test_gasket_cesaro_closed_form(b, c):
    res = gasket_cesaro(GasketParams(1.0, b, c), math.exp(20.0), 256, 10.0)
    y = res.function.log_arguments
    w = GASKET_FREQ
    exact = 1.0 + b * (np.cos(w * (2 * y + c)) - math.cos(w * c)) / (2 * w * y)
    assert np.max(np.abs(res.function.values - exact)) < 1e-9


def test_gasket_range_checked():
    with pytest.raises(ValueError):
        gasket_cesaro(GasketParams(1.0, 0.1), math.exp(5.0))


# -- heat side residue --------------------------------------------------------------------------------


def test_heat_to_residue_power_cutoff():
    res = heat_to_residue(HeatTraceModel.power_cutoff(1.0, 2.0), 2.0)
    assert res.residue == pytest.approx(2.0, abs=1e-6)
    assert res.cesaro_limit.value == pytest.approx(1.0, abs=1e-6)
    assert res.consistent


def test_heat_to_residue_gasket_b0():
    res = heat_to_residue(HeatTraceModel.from_gasket(GasketParams(1.0, 0.0)), 2 * GASKET_BETA)
    assert res.residue == pytest.approx(2.0 / math.gamma(GASKET_BETA), abs=1e-6)
    assert res.predicted_cesaro == pytest.approx(1.0, abs=1e-6)
    assert res.consistent


def test_heat_to_residue_zero():
    res = heat_to_residue(HeatTraceModel.power_cutoff(0.0, 2.0), 2.0)
    assert res.residue == 0.0 and res.cesaro_limit.value == 0.0 and res.consistent
    assert set(json.loads(json.dumps(res.to_dict()))) == {"residue", "predicted_cesaro", "cesaro_limit", "consistent"}
