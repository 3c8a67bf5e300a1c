"""Tail classification, Tauberian implication checks and measurability reports."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .functionals import (
    SampledFunction,
    cesaro,
    cesaro_full,
    cesaro_heat,
    default_s_grid,
    dixmier_average,
    heat_function,
    zeta_residue_function,
)
from .numerics import GridSpec
from .profiles import MembershipError, PiecewiseProfile, classify_membership

CONVERGED = "converged"
OSCILLATING = "oscillating"
UNBOUNDED = "unbounded"
INCONCLUSIVE = "inconclusive"

MIN_WINDOW = 16
_UNBOUNDED_FACTOR = 10.0
_DEEPENING_FACTOR = 1.5
# the remainder must leave room for oscillation (2R) and least-squares drift (3R) below 2 * tolerance
_CERTIFIED_FRACTION = 0.6
MAX_GENERATED_SEGMENTS = 400
_TOWER_MIN, _TOWER_MAX = 8, 20


@dataclass(frozen=True)
class LimitEstimate:
    classification: str
    value: Optional[float]
    liminf_est: float
    limsup_est: float
    tail_oscillation: float
    window: str
    trend: float = math.nan
    model: str = "plain"

    @property
    def converged(self) -> bool:
        return self.classification == CONVERGED

    def scaled(self, c: float) -> "LimitEstimate":
        lo, hi = sorted((self.liminf_est * c, self.limsup_est * c))
        return LimitEstimate(
            self.classification, None if self.value is None else self.value * c, lo, hi,
            self.tail_oscillation * abs(c), self.window, self.trend * abs(c), self.model,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def _inconclusive(reason: str, lo=math.nan, hi=math.nan) -> LimitEstimate:
    return LimitEstimate(INCONCLUSIVE, None, lo, hi, math.nan, reason)


def _model_variable(f: SampledFunction) -> np.ndarray:
    # the asymptotic variable the slow 1/x correction is expressed in
    return f.x if f.level == 0 else f.log_arguments


def estimate_limit(
    f: SampledFunction,
    tolerance: float = 1e-3,
    window_fraction: float = 0.25,
    model: str = "plain",
) -> LimitEstimate:
    """Classify the tail of a sampled function.

    The trailing ``window_fraction`` of the points is examined. With
    ``model="plain"`` the statistics are the raw values; with
    ``model="inverse"`` a fitted ``a + b/x`` term (x the log-argument, or the
    coordinate on level-0 grids) is removed first and ``a`` is the limit.
    Converged needs oscillation and least-squares drift both strictly below
    ``tolerance``; a tie is inconclusive.
    """
    if model not in ("plain", "inverse"):
        raise ValueError(f"unknown limit model {model!r}")
    n = len(f.values)
    k = int(math.ceil(n * window_fraction))
    if k < MIN_WINDOW or n < MIN_WINDOW:
        return _inconclusive(f"window of {k} points is below the minimum of {MIN_WINDOW}")
    xs = f.x[-k:]
    ys = f.values[-k:]
    window = f"x in [{xs[0]:.6g}, {xs[-1]:.6g}] ({k} points, level {f.level})"
    if not np.all(np.isfinite(f.values)):
        return LimitEstimate(UNBOUNDED, None, math.nan, math.inf, math.inf, window, model=model)
    mags = np.abs(f.values)
    reference = max(float(np.median(mags)), float(np.max(mags[: max(1, n // 2)])))
    if float(np.max(np.abs(ys))) > _UNBOUNDED_FACTOR * reference and reference > 0:
        return LimitEstimate(UNBOUNDED, None, float(ys.min()), float(ys.max()),
                             float(ys.max() - ys.min()), window, model=model)

    span = float(xs[-1] - xs[0])
    if model == "inverse":
        v = _model_variable(f)[-k:]
        if np.any(v <= 0):
            return _inconclusive("inverse model needs a positive asymptotic variable")
        design = np.column_stack([np.ones_like(v), 1.0 / v])
        (a, b), *_ = np.linalg.lstsq(design, ys, rcond=None)
        resid = ys - (a + b / v)
        centre = float(a)
        lo, hi = centre + float(resid.min()), centre + float(resid.max())
        stat = resid
    else:
        centre = float(np.mean(ys))
        lo, hi = float(ys.min()), float(ys.max())
        stat = ys
    osc = float(stat.max() - stat.min())
    slope = float(np.polyfit(xs, stat, 1)[0]) if span > 0 else 0.0
    drift = abs(slope) * span
    if osc < tolerance and drift < tolerance:
        return LimitEstimate(CONVERGED, centre, min(lo, centre), max(hi, centre), osc, window, drift, model)
    if osc > tolerance:
        return LimitEstimate(OSCILLATING, None, lo, hi, osc, window, drift, model)
    return LimitEstimate(INCONCLUSIVE, None, lo, hi, osc, window, drift, model)


# -- Tauberian implications -------------------------------------------------------


@dataclass(frozen=True)
class TauberianResult:
    mode: str
    hypotheses_hold: bool
    premise_holds: bool
    conclusion_holds: bool
    implication_holds: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def tauberian_remainder(eps: float, slope_bound: float, delta: float) -> float:
    """Bound on |w(U) - C| from |Mw - C| <= eps on [(1-delta)U, (1+delta)U] and u w'(u) >= -slope_bound.

    Averages of w over [U, (1+delta)U] and [(1-delta)U, U] are fixed by Mw to
    within (2 +- delta) eps / delta; the slope bound moves w by at most
    slope_bound * log(1 +- delta) across either interval.
    """
    upper = (2.0 + delta) * eps / delta + slope_bound * math.log1p(delta)
    lower = (2.0 - delta) * eps / delta - slope_bound * math.log1p(-delta)
    return max(upper, lower)


def _certify(premise_fn: SampledFunction, premise: LimitEstimate, slope_bound: float,
             target: SampledFunction, tolerance: float, window_fraction: float) -> dict:
    """Best delta for the finite-range Tauberian bound and the interior it covers."""
    k = int(math.ceil(len(premise_fn) * window_fraction))
    u_win = premise_fn.log_arguments[-k:]
    eps = float(np.max(np.abs(premise_fn.values[-k:] - premise.value)))
    u_lo, u_hi = float(u_win[0]), float(u_win[-1])
    u_target = target.log_arguments
    best = {"epsilon": eps, "slope_bound": slope_bound, "delta": math.nan, "remainder": math.inf,
            "interior": [math.nan, math.nan]}
    if not (u_lo > 0 and math.isfinite(slope_bound)):
        return best
    for delta in np.geomspace(1e-9, 0.5, 400):
        lo, hi = u_lo / (1.0 - delta), u_hi / (1.0 + delta)
        if np.count_nonzero((u_target >= lo) & (u_target <= hi)) < MIN_WINDOW:
            break
        r = tauberian_remainder(eps, slope_bound, float(delta))
        if r < best["remainder"]:
            best.update(delta=float(delta), remainder=r, interior=[float(lo), float(hi)])
    best["certified"] = best["remainder"] <= _CERTIFIED_FRACTION * tolerance
    return best


def tauberian_check(z: SampledFunction, mode: str = "cesaro_M", tolerance: float = 1e-3) -> TauberianResult:
    """Numerical check of a Tauberian implication for a positive sampled z.

    ``cesaro_M``: Mz bounded and M^2 z -> C should give Mz -> C.
    ``derivative``: u dz/du bounded below (u = log t) and Mz -> C should give z -> C.

    Both lemmas run in u = log t, where M is the arithmetic mean. On a finite
    range a premise flat to ``eps`` only pins the conclusion to within the
    remainder of :func:`tauberian_remainder`, roughly 2 sqrt(2 eps K) for a
    slope bound K. The premise therefore holds when its function converges
    at ``tolerance`` and that remainder is at most 0.6 * ``tolerance``; the
    conclusion is then judged at twice the tolerance on the interior of the
    trailing window where the bound applies.
    """
    window_fraction = 0.25
    positive = bool(np.all(z.values > 0))
    mz_full = cesaro_full(z)
    mz = mz_full.restrict(mz_full.log_arguments > 1.0)
    details: dict = {"positive": positive}
    if mode == "cesaro_M":
        m2z = cesaro(mz_full)
        target = mz.restrict(np.isin(mz.x, m2z.x))
        bounded = bool(np.all(np.isfinite(mz.values))) and estimate_limit(mz, tolerance).classification != UNBOUNDED
        hypotheses = positive and bounded
        premise_fn, premise_key, target_key = m2z, "M2z", "Mz"
        # u (Mz)' = z - Mz >= -Mz on the window
        slope_bound = float(np.max(target.values[-int(math.ceil(len(target) * window_fraction)):]))
        details.update(Mz_bounded=bounded)
    elif mode == "derivative":
        u = z.log_arguments
        slopes = 0.5 * (u[1:] + u[:-1]) * np.diff(z.values) / np.diff(u)
        half = len(slopes) // 2
        early = float(np.min(slopes[: max(1, half)]))
        late = float(np.min(slopes[half:])) if half < len(slopes) else early
        lower_bound = min(early, late)
        # a lower bound that keeps deepening across the range is not a constant
        stable = late >= _DEEPENING_FACTOR * min(early, 0.0) - tolerance
        hypotheses = positive and stable
        target = z.restrict(np.isin(z.x, mz.x))
        premise_fn, premise_key, target_key = mz, "Mz", "z"
        slope_bound = max(0.0, -lower_bound)
        details.update(u_dz_du_lower_bound=lower_bound)
    else:
        raise ValueError(f"mode must be 'cesaro_M' or 'derivative', got {mode!r}")

    premise = estimate_limit(premise_fn, tolerance, window_fraction)
    cert = {"certified": False}
    conclusion = estimate_limit(target, 2 * tolerance, window_fraction)
    if premise.converged:
        cert = _certify(premise_fn, premise, slope_bound, target, tolerance, window_fraction)
        if cert["certified"]:
            lo, hi = cert["interior"]
            u_t = target.log_arguments
            conclusion = estimate_limit(target.restrict((u_t >= lo) & (u_t <= hi)), 2 * tolerance, 1.0)
    premise_ok = premise.converged and cert["certified"]
    conclusion_ok = (
        conclusion.converged and premise_ok and abs(conclusion.value - premise.value) <= 2 * tolerance
    )
    details.update({premise_key: premise.to_dict(), target_key: conclusion.to_dict(), "certificate": cert})
    implication = not (hypotheses and premise_ok) or conclusion_ok
    return TauberianResult(mode, hypotheses, premise_ok, conclusion_ok, implication, details)


# -- measurability ------------------------------------------------------------------


@dataclass(frozen=True)
class MeasurabilityGrids:
    average: GridSpec = GridSpec(1, 0.0, 300.0, 8)
    heat: GridSpec = GridSpec(1, 0.0, 300.0, 16)
    s_values: tuple = tuple(default_s_grid(1e-4, 1e-1))
    raw_heat: GridSpec = GridSpec(2, 0.0, 20.0, 4)

    def to_dict(self) -> dict:
        return {
            "average": self.average.to_dict(),
            "heat": self.heat.to_dict(),
            "s_min": min(self.s_values),
            "s_max": max(self.s_values),
            "s_count": len(self.s_values),
            "raw_heat": self.raw_heat.to_dict(),
        }


def default_grids(p: PiecewiseProfile) -> MeasurabilityGrids:
    """Grids reaching t = e^300 for finite profiles and up to t = e^(e^20) for generated ones.

    Generated profiles stop at the largest integer x <= 20 whose range
    e^(e^x) holds at most ``MAX_GENERATED_SEGMENTS`` segments (never below 8),
    and the zeta sweep stops at s = max(1e-6, e^-x).
    """
    if p.generated:
        top = _TOWER_MIN
        for x in range(_TOWER_MIN + 1, _TOWER_MAX + 1):
            if len(p.segments_through(math.exp(x))) > MAX_GENERATED_SEGMENTS:
                break
            top = x
        tower = GridSpec(2, 0.0, float(top), 8)
        # s tau(A^(1+s)) sees t up to about e^(1/s); match that to the grid range
        s_min = max(1e-6, math.exp(-top))
        return MeasurabilityGrids(tower, tower, tuple(default_s_grid(s_min, 1e-1)), GridSpec(2, 0.0, float(top), 4))
    return MeasurabilityGrids()


@dataclass(frozen=True)
class MeasurabilityReport:
    avg_limit: LimitEstimate
    mheat_limit: LimitEstimate
    zeta_limit: LimitEstimate
    q_used: float
    agree: bool
    common_value: Optional[float]
    dixmier_interval: tuple
    raw_heat_limit: LimitEstimate
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "avg_limit": self.avg_limit.to_dict(),
            "mheat_limit": self.mheat_limit.to_dict(),
            "zeta_limit": self.zeta_limit.to_dict(),
            "q_used": self.q_used,
            "agree": self.agree,
            "common_value": self.common_value,
            "dixmier_interval": list(self.dixmier_interval),
            "raw_heat_limit": self.raw_heat_limit.to_dict(),
            "notes": list(self.notes),
        }


def limits_agree(estimates, tolerance: float):
    """All converged and pairwise within ``tolerance``; returns (agree, mean value)."""
    if not all(e.converged for e in estimates):
        return False, None
    vals = [e.value for e in estimates]
    if max(vals) - min(vals) > tolerance:
        return False, None
    return True, float(np.mean(vals))


def measurability_report(
    p: PiecewiseProfile,
    q: float = 1.0,
    tolerance: float = 1e-3,
    grids: Optional[MeasurabilityGrids] = None,
) -> MeasurabilityReport:
    """The three limits (Dixmier average, Cesaro heat, zeta residue) and their agreement.

    The Cesaro heat limit for exponent ``q`` is divided by Gamma(1 + 1/q)
    before comparison. All three use the ``a + b/x`` tail model because each
    functional approaches its limit at rate 1/log of the argument.
    ``dixmier_interval`` spans the trailing ranges of both the Dixmier average
    and its Cesaro mean; it is a diagnostic, not a characterisation.
    """
    grids = grids or default_grids(p)
    member = classify_membership(p, grids.average)
    if not member.in_m1inf:
        raise MembershipError(f"profile {p.name!r} is not in M_1,inf")
    avg = dixmier_average(p, grids.average, check=False)
    avg_lim = estimate_limit(avg, tolerance, model="inverse")
    mheat = cesaro_heat(p, q, 1.0, grids.heat)
    factor = math.gamma(1.0 + 1.0 / q)
    mheat_lim = estimate_limit(mheat, tolerance * factor, model="inverse")
    zeta = zeta_residue_function(p, 1.0, grids.s_values)
    zeta_lim = estimate_limit(zeta, tolerance, model="inverse")
    raw = heat_function(p, q, 1.0, grids.raw_heat)
    raw_lim = estimate_limit(raw, tolerance)
    normalized = mheat_lim.scaled(1.0 / factor)
    agree, common = limits_agree((avg_lim, normalized, zeta_lim), tolerance)
    m_avg = estimate_limit(cesaro(avg), tolerance, model="inverse")
    notes = [
        "Agreement over all dilation-invariant Dixmier traces is inferred from the "
        "proved equivalence with convergence of the Dixmier average.",
        f"Cesaro heat limit divided by Gamma(1+1/q) = {factor!r}.",
    ]
    if zeta.meta["divergent"]:
        notes.append(f"tau(A^(1+s)) diverged at {len(zeta.meta['divergent'])} s values.")
    return MeasurabilityReport(
        avg_lim, mheat_lim, zeta_lim, q, agree, common,
        (min(m_avg.liminf_est, avg_lim.liminf_est), max(m_avg.limsup_est, avg_lim.limsup_est)),
        raw_lim, tuple(notes),
    )
