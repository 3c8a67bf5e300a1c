import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymlab import LogScalar, GridSpec
from asymlab.profiles import (
    CONSTANT,
    Coded,
    INFINITY,
    MembershipError,
    PiecewiseProfile,
    ProfileError,
    Segment,
    ZERO_POINT,
    classify_membership,
    constant,
    distribution,
    evaluate,
    evaluate_log,
    heat_integral,
    loads_profile,
    dumps_profile,
    load_profile,
    make_canonical,
    make_counterexample,
    make_root,
    make_spike,
    partial_integral,
    power,
    power_integral,
    profile_from_dict,
    profile_to_dict,
    pth_power,
    save_profile,
)

from oracles import quad_heat, quad_partial, quad_power, random_profile

P1 = make_canonical(1.0)
CE = make_counterexample()


def L(v: float) -> LogScalar:
    return LogScalar.from_log(v)


# -- evaluate / distribution ------------------------------------------------------


def test_evaluate_canonical():
    assert float(evaluate(P1, 4.0)) == pytest.approx(0.25, rel=1e-15)
    assert float(evaluate(make_canonical(2.0), 4.0)) == pytest.approx(0.5, rel=1e-15)


def test_evaluate_counterexample_examples():
    assert float(evaluate(CE, 0.5 * math.exp(math.e))) == pytest.approx(math.exp(-math.e), rel=1e-14)
    assert float(evaluate(CE, 2000.0)) == pytest.approx(1 / 2000.0, rel=1e-14)


def test_evaluate_rejects_nonpositive():
    with pytest.raises(ValueError):
        evaluate(P1, 0.0)
    with pytest.raises(ValueError):
        evaluate(P1, -1.0)


def test_junction_takes_left_value():
    p = PiecewiseProfile("step", (constant(2.0, ZERO_POINT, Coded(0, 1.0)), power(1.0, 1.0, Coded(0, 1.0), INFINITY)))
    assert float(evaluate(p, 1.0)) == 2.0


def test_counterexample_segment_layout():
    segs = CE.first_segments(7)
    assert segs[0].kind == CONSTANT and segs[0].log_c == pytest.approx(-math.e)
    assert segs[0].hi == pytest.approx(math.e)
    # n = 1 reciprocal segment is empty, so the next piece is the n = 1 constant
    assert segs[1].kind == CONSTANT and segs[1].log_c == pytest.approx(-math.e**2)
    assert segs[2].kind == "power" and segs[2].lo == pytest.approx(math.e**2)
    assert segs[2].hi == pytest.approx(math.log(2) + math.e**2)


@pytest.mark.parametrize("n", range(2, 31))
def test_counterexample_junction_monotone(n):
    # left value 1/(n e^(e^n)) >= right value e^(-e^(n+1)) at s = n e^(e^n)
    ls = math.log(n) + math.exp(n)
    left = float(evaluate_log(CE, [ls])[0])
    right = float(evaluate_log(CE, [ls + 1e-9 * ls])[0])
    assert left == pytest.approx(-ls, rel=1e-12)
    assert right == pytest.approx(-math.exp(n + 1), rel=1e-12)
    assert left >= right


def test_distribution_canonical():
    assert float(distribution(P1, 0.5)) == pytest.approx(2.0, rel=1e-15)
    assert float(distribution(P1, 2.0)) == 0.0


def _bisect_distribution(p, ls, lo=-50.0, hi=1e4):
    # largest log t with log mu(t) > ls, by bisection on evaluate
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if evaluate(p, L(mid)).log_magnitude > ls:
            lo = mid
        else:
            hi = mid
    return lo


@pytest.mark.parametrize("ls", [-math.e, -math.e - 0.5, -8.0, -7.39, -20.0, -25.0, -56.0])
def test_distribution_matches_bisection(ls):
    d = distribution(CE, L(ls))
    ref = _bisect_distribution(CE, ls)
    if d.sign == 0:
        assert ref == -50.0
    else:
        assert d.log_magnitude == pytest.approx(ref, abs=1e-9)
        assert evaluate(CE, L(d.log_magnitude + 1e-9)).log_magnitude <= ls


@given(st.floats(-5, 3))
def test_distribution_generalised_inverse(ls):
    d = distribution(P1, L(ls))
    if d.sign != 0:
        assert evaluate(P1, L(d.log_magnitude + 1e-12)).log_magnitude <= ls + 1e-9


# -- integrals ----------------------------------------------------------------------


def test_partial_canonical():
    assert float(partial_integral(P1, math.exp(2))) == pytest.approx(3.0, rel=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 10, 20, 30])
def test_counterexample_partial_log_factorial(n):
    value = float(partial_integral(CE, L(math.exp(n + 1))))
    assert abs(value - (n + math.lgamma(n + 1))) <= 2.0


def test_power_integral_canonical():
    s = 0.01
    res = power_integral(P1, 1 + s)
    assert float(res) == pytest.approx(101.0, rel=1e-13)
    assert s * float(res) == pytest.approx(1.01, rel=1e-13)
    assert float(power_integral(make_canonical(3.0), 2.0, upper=1.0)) == pytest.approx(9.0, rel=1e-15)


def test_power_integral_divergence_is_data():
    assert power_integral(P1, 1.0).divergent
    assert power_integral(CE, 1.0).divergent
    # frozen mpmath segment sums (40 digits) of the counterexample tau(A^(1+s))
    for s, ref in ((0.1, 1.8385571115625611479), (0.01, 6.261204550933628446), (0.001, 12.236022215120471213)):
        res = power_integral(CE, 1 + s)
        assert not res.divergent and res.tail_bound < 1e-10
        assert float(res) == pytest.approx(ref, rel=1e-12)


def test_heat_canonical_closed_forms():
    lam = 100.0
    assert float(heat_integral(P1, lam, 1.0)) / lam == pytest.approx(math.exp(-1 / lam) * (1 + 1 / lam), rel=1e-13)
    big = 1e8
    assert float(heat_integral(P1, big, 2.0)) / big == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-7)


@pytest.mark.parametrize("n", range(1, 31))
def test_counterexample_heat_lower_bound(n):
    res = heat_integral(CE, L(math.exp(n)), 1.0)
    value = math.exp(res.value.log_magnitude - math.exp(n))
    assert value >= math.exp(-1) - math.exp(-n) - 1e-10


def test_heat_rejects_nondecaying_profile():
    flat = PiecewiseProfile("flat", (Segment(CONSTANT, Coded(0, 1.0), ZERO_POINT, INFINITY),))
    with pytest.raises(MembershipError):
        heat_integral(flat, 2.0, 1.0)


def test_random_profiles_match_quadrature():
    rng = np.random.default_rng(2024)
    for k in range(25):
        p = random_profile(rng, 3, f"r{k}")
        for t in (0.3, 40.0, 5e4):
            assert float(partial_integral(p, t)) == pytest.approx(quad_partial(p, t), rel=1e-8)
        assert float(power_integral(p, 1.7)) == pytest.approx(quad_power(p, 1.7), rel=1e-8)
        assert float(heat_integral(p, 3.0, 1.0)) == pytest.approx(quad_heat(p, 3.0, 1.0), rel=1e-8)


profile_seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(profile_seeds, st.floats(-4, 10), st.floats(-4, 10))
def test_monotone_and_additive(seed, a, b):
    p = random_profile(np.random.default_rng(seed))
    lo, hi = sorted((a, b))
    assert evaluate(p, L(lo)).log_magnitude >= evaluate(p, L(hi)).log_magnitude - 1e-12
    i_lo, i_hi = float(partial_integral(p, L(lo))), float(partial_integral(p, L(hi)))
    assert i_hi >= i_lo * (1 - 1e-14)
    if hi > lo:
        piece = quad_partial(p, math.exp(hi)) - quad_partial(p, math.exp(lo))
        assert i_hi - i_lo == pytest.approx(piece, rel=1e-9, abs=1e-12 * i_hi)


@settings(max_examples=40, deadline=None)
@given(profile_seeds, st.floats(0.1, 10), st.floats(-3, 8), st.floats(1.1, 3))
def test_scaling_homogeneity(seed, c, llam, q):
    p = random_profile(np.random.default_rng(seed))
    cp = p.scaled(c)
    t = L(2.5)
    assert float(partial_integral(cp, t)) == pytest.approx(c * float(partial_integral(p, t)), rel=1e-12)
    lam = math.exp(llam)
    lhs = float(heat_integral(cp, lam, 1.0)) / lam
    rhs = c * float(heat_integral(p, c * lam, 1.0)) / (c * lam)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert float(power_integral(cp, q)) == pytest.approx(c**q * float(power_integral(p, q)), rel=1e-12)


# -- pth power -------------------------------------------------------------------------


def test_pth_power_examples():
    sq = pth_power(P1, 2.0)
    assert sq.segments[1].alpha == 2.0 and sq.segments[0].c.value == 1.0
    assert float(evaluate(pth_power(P1, 3.0), 2.0)) == pytest.approx(0.125, rel=1e-15)
    back = pth_power(pth_power(P1, 2.0), 0.5)
    assert back.segments == P1.segments


@settings(max_examples=40, deadline=None)
@given(profile_seeds, st.floats(0.2, 4), st.floats(0.2, 4))
def test_pth_power_composition(seed, a, b):
    p = random_profile(np.random.default_rng(seed))
    one, two = pth_power(pth_power(p, a), b), pth_power(p, a * b)
    for s1, s2 in zip(one.segments, two.segments):
        assert (s1.kind, s1.start, s1.end) == (s2.kind, s2.start, s2.end)
        assert s1.alpha == pytest.approx(s2.alpha, rel=1e-15)
        assert s1.log_c == pytest.approx(s2.log_c, rel=1e-14, abs=1e-14)


def test_root_profile():
    root = make_root(2.0)
    assert float(evaluate(root, 4.0)) == pytest.approx(0.5, rel=1e-15)
    assert pth_power(root, 2.0).segments == P1.segments


def test_pth_power_of_generated_profile():
    sq = pth_power(CE, 2.0)
    ls = math.log(2000.0)
    assert float(evaluate_log(sq, [ls])[0]) == pytest.approx(-2 * ls, rel=1e-14)
    assert power_integral(sq, 0.5).divergent
    assert not power_integral(sq, 0.6).divergent


# -- membership ----------------------------------------------------------------------


def test_membership_canonical():
    m = classify_membership(P1, GridSpec(1, 0.0, 60.0, 4))
    assert m.in_weak_l1 and m.weak_l1_sup == pytest.approx(1.0)
    assert m.in_m1inf and m.little_o


def test_membership_counterexample():
    m = classify_membership(CE, GridSpec(2, 0.0, 8.0, 8))
    assert m.in_weak_l1 and m.weak_l1_sup == pytest.approx(1.0, rel=1e-12)
    assert m.in_m1inf


def test_membership_spike():
    m = classify_membership(make_spike(), GridSpec(2, 0.0, 8.0, 8))
    assert m.in_m1inf and not m.in_weak_l1


def test_membership_outside_m1inf():
    slow = make_root(2.0)
    m = classify_membership(slow, GridSpec(1, 0.0, 60.0, 4))
    assert not m.in_m1inf and not m.in_weak_l1


# -- validation and file format -------------------------------------------------------


def test_validate_reports_increasing_junction():
    bad = PiecewiseProfile("bad", (constant(1.0, ZERO_POINT, Coded(0, 1.0)), power(5.0, 1.0, Coded(0, 1.0), INFINITY)))
    with pytest.raises(ProfileError, match="junction 0->1"):
        bad.validate()


def test_validate_requires_constant_start_and_tail():
    with pytest.raises(ProfileError, match="segment 0 must be constant"):
        PiecewiseProfile("p", (power(1.0, 1.0, ZERO_POINT, INFINITY),)).validate()
    with pytest.raises(ProfileError, match="extend to infinity"):
        PiecewiseProfile("p", (constant(1.0, ZERO_POINT, Coded(0, 2.0)),)).validate()
    with pytest.raises(ProfileError, match="not contiguous"):
        PiecewiseProfile("p", (constant(1.0, ZERO_POINT, Coded(0, 1.0)), power(1.0, 1.0, Coded(0, 2.0), INFINITY))).validate()


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["segments"][1].pop("alpha"), r"segments\[1\]\.alpha"),
        (lambda d: d["segments"][0].update(kind="log"), r"segments\[0\]\.kind"),
        (lambda d: d["segments"][1].update(to={"level": 3, "value": 1}), r"segments\[1\]\.to\.level"),
        (lambda d: d["segments"][0].update(c=0), r"segments\[0\]\.c"),
        (lambda d: d.update(extra=1), "unknown fields"),
        (lambda d: d.update(generator="tower"), "generator"),
    ],
)
def test_file_errors_name_the_field(mutate, message):
    data = profile_to_dict(P1)
    mutate(data)
    with pytest.raises(ProfileError, match=message):
        profile_from_dict(data)


def test_malformed_json_reports_position():
    with pytest.raises(ProfileError, match="line 1"):
        loads_profile("{")


def test_file_format_fields():
    data = json.loads(dumps_profile(P1))
    assert set(data) == {"name", "segments", "generator"}
    assert data["generator"] == "none"
    assert data["segments"][1] == {"kind": "power", "c": 1.0, "alpha": 1.0,
                                   "from": {"level": 0, "value": 1.0}, "to": "inf"}
    assert profile_to_dict(CE)["generator"] == "counterexample"


def test_tower_endpoints_load():
    text = json.dumps({
        "name": "tower",
        "segments": [
            {"kind": "constant", "c": 1.0, "from": {"level": 0, "value": 0}, "to": {"level": 2, "value": 1.0}},
            {"kind": "power", "c": {"level": 1, "value": math.e}, "alpha": 1.0,
             "from": {"level": 2, "value": 1.0}, "to": "inf"},
        ],
        "generator": "none",
    })
    p = loads_profile(text)
    assert p.segments[1].lo == pytest.approx(math.e)
    assert float(evaluate(p, L(5.0))) == pytest.approx(math.exp(math.e - 5.0), rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(profile_seeds)
def test_round_trip_bit_exact(seed):
    p = random_profile(np.random.default_rng(seed))
    assert loads_profile(dumps_profile(p)) == p


@pytest.mark.parametrize("p", [P1, CE, make_spike(), pth_power(CE, 2.0), CE.scaled(3.0)])
def test_round_trip_constructed(p, tmp_path):
    path = tmp_path / "p.json"
    save_profile(p, path)
    back = load_profile(path)
    assert back == p
    for seg_a, seg_b in zip(back.first_segments(8), p.first_segments(8)):
        assert seg_a == seg_b
