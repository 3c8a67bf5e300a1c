"""Runnable pass/fail experiments with tabular output."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .functionals import (
    cesaro_heat,
    default_s_grid,
    dixmier_average,
    heat_function,
    signed_diff,
    zeta_residue_function,
)
from .limits import (
    MIN_WINDOW,
    MeasurabilityGrids,
    MeasurabilityReport,
    default_grids,
    estimate_limit,
    measurability_report,
)
from .numerics import GridSpec, LogScalar, grid_coordinates
from .profiles import (
    PiecewiseProfile,
    SignedProfilePair,
    classify_membership,
    heat_integral_log,
    make_counterexample,
    partial_integral,
    power_integral,
    pth_power,
)

EQ, GE, LE = "eq", "ge", "le"


@dataclass(frozen=True)
class Row:
    """``computed`` compared with ``expected``: |c - e| <= tol, c >= e - tol or c <= e + tol."""

    label: str
    expected: float
    computed: float
    tolerance: float
    relation: str = EQ

    @property
    def passed(self) -> bool:
        c, e, tol = self.computed, self.expected, self.tolerance
        if not (math.isfinite(c) or (c == math.inf and self.relation == GE)):
            return False
        if self.relation == EQ:
            return abs(c - e) <= tol
        if self.relation == GE:
            return c >= e - tol
        if self.relation == LE:
            return c <= e + tol
        raise ValueError(f"unknown relation {self.relation!r}")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "expected": self.expected,
            "computed": self.computed,
            "tolerance": self.tolerance,
            "relation": self.relation,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    rows: tuple
    notes: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[Row]:
        return [r for r in self.rows if not r.passed]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "rows": [r.to_dict() for r in self.rows],
            "notes": list(self.notes),
            "meta": self.meta,
        }

    def to_csv(self, header: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["label", "expected", "computed", "tolerance", "relation", "pass"])
        for r in self.rows:
            out.writerow([r.label, f"{r.expected:.17g}", f"{r.computed:.17g}", f"{r.tolerance:.17g}",
                          r.relation, str(r.passed).lower()])
        return buf.getvalue()


class ScenarioError(ValueError):
    """A scenario's precondition failed; ``report`` holds the evidence."""

    def __init__(self, message: str, report: Optional[MeasurabilityReport] = None):
        super().__init__(message)
        self.report = report


def _value(est) -> float:
    return est.value if est.converged else math.nan


# -- tower counterexample --------------------------------------------------------------


def counterexample_partial_deviation(n: int) -> float:
    """int_0^t mu - (n + log n!) at t = e^(e^(n+1)) for the tower counterexample."""
    return float(partial_integral(make_counterexample(), LogScalar.from_log(math.exp(n + 1)))) - (
        n + math.lgamma(n + 1)
    )


# log of a double exponent beyond which exp(-e^d) underflows
_LOG_NEGLIGIBLE = 50.0


def counterexample_heat(n: int) -> float:
    """(1/lambda) tau(exp(-(lambda A)^-1)) at lambda = e^(e^n) for the tower counterexample.

    Summed segment by segment with every logarithm taken relative to
    log(lambda) = e^n, so no log-magnitude of size e^n is ever rounded.
    Segments beyond k = n + 2 contribute below exp(-e^50).
    """
    en = math.exp(n)

    def rel(k: float) -> float:
        # e^k - e^n without cancellation
        return en * math.expm1(k - n)

    def constant_term(log_width: float, d: float) -> float:
        # (width / lambda) exp(-1 / (lambda c)) with log(1 / (lambda c)) = d
        return 0.0 if d > _LOG_NEGLIGIBLE else math.exp(log_width - math.exp(d))

    # (0, e^e] at height e^-e
    total = constant_term(rel(1.0), rel(1.0))
    for k in range(1, n + 3):
        d_k, d_next = rel(k), rel(k + 1)
        if k >= 2 and d_k <= _LOG_NEGLIGIBLE:
            # int exp(-s / lambda) ds / lambda over (e^(e^k), k e^(e^k)]
            xa = math.exp(d_k)
            total += math.exp(-xa) * -math.expm1(-(k - 1) * xa)
        width = d_next + math.log1p(-k * math.exp(-math.exp(k) * math.expm1(1.0)))
        total += constant_term(width, d_next)
    return total


def run_counterexample(n_max: int = 30, grid_level2_max: float = 8.0, s_small: float = 1e-3) -> ScenarioResult:
    """Rows (a)-(e): bounded partial-integral deviation, raw heat lower bound,
    vanishing Dixmier average and Cesaro heat, and the small-s zeta behaviour."""
    if not 3 <= n_max <= 60:
        raise ValueError("n_max must lie in [3, 60]")
    p = make_counterexample()
    rows = []
    for n in range(1, n_max + 1):
        rows.append(Row(f"(a) n={n} int_0^t mu - (n+log n!)", 0.0, counterexample_partial_deviation(n), 2.0))
    for n in range(1, n_max + 1):
        rows.append(Row(f"(b) n={n} heat at e^e^n", math.exp(-1) - math.exp(-n), counterexample_heat(n), 1e-10, GE))

    m = float(grid_level2_max)
    avg_grid = GridSpec(2, 0.0, m, 8)
    avg = dixmier_average(p, avg_grid, check=False)
    rows.append(Row(f"(c) Dixmier average at e^e^{m:g}", 0.01, float(avg.values[-1]), 0.0, LE))
    heat_grid = GridSpec(2, 0.0, m, 8)
    mheat = cesaro_heat(p, 1.0, 1.0, heat_grid)
    rows.append(Row(f"(d) Cesaro heat at e^e^{m:g}", 0.05, float(mheat.values[-1]), 0.0, LE))

    s_values = [1e-1, 1e-2, s_small]
    taus = [float(power_integral(p, 1.0 + s)) for s in s_values]
    rows.append(Row(f"(e) s*tau(A^(1+s)) at s={s_small:g}", 0.05, s_small * taus[-1], 0.0, LE))
    rows.append(Row("(e) tau growth from s=1e-1 to 1e-2", 0.0, taus[1] - taus[0], 0.0, GE))
    rows.append(Row(f"(e) tau growth from s=1e-2 to {s_small:g}", 0.0, taus[2] - taus[1], 0.0, GE))

    # at least MIN_WINDOW points in the trailing quarter, whatever n_max
    raw_ppu = max(4, math.ceil(4 * MIN_WINDOW / n_max))
    raw = heat_function(p, 1.0, 1.0, GridSpec(2, 0.0, float(n_max), raw_ppu))
    raw_lim = estimate_limit(raw)
    rows.append(Row("raw heat limsup", math.exp(-1) - 1e-6, raw_lim.limsup_est, 0.0, GE))
    notes = (
        f"tau(A^(1+s)) = {taus[0]:.6g}, {taus[1]:.6g}, {taus[2]:.6g} at s = "
        f"{s_values[0]:g}, {s_values[1]:g}, {s_values[2]:g}; growth is logarithmic in 1/s.",
        f"raw heat classified {raw_lim.classification} on {raw.grid.describe()}.",
        f"Cesaro quadrature error estimate {mheat.meta['quadrature_error']:.3g}.",
    )
    return ScenarioResult(
        "counterexample", tuple(rows), notes,
        {"n_max": n_max, "grid_level2_max": m, "grids": [avg_grid.describe(), heat_grid.describe()]},
    )


# -- Gamma factor ----------------------------------------------------------------------


def run_gamma_factor(
    p: PiecewiseProfile,
    q_list: Sequence[float] = (0.5, 1.0, 2.0, 3.0),
    tolerance: float = 1e-3,
    grids: Optional[MeasurabilityGrids] = None,
) -> ScenarioResult:
    """lim M(heat_q) / lim s tau(A^(1+s)) against Gamma(1 + 1/q) for each q."""
    grids = grids or default_grids(p)
    report = measurability_report(p, 1.0, tolerance, grids)
    if not report.agree:
        raise ScenarioError(f"profile {p.name!r} is not measurable on the test grids", report)
    zeta = report.zeta_limit.value
    rows = []
    for q in q_list:
        factor = math.gamma(1.0 + 1.0 / q)
        if q == 1.0:
            lhs = report.mheat_limit
        else:
            lhs = estimate_limit(cesaro_heat(p, q, 1.0, grids.heat), tolerance * factor, model="inverse")
        rows.append(Row(f"q={q:g} lim M(heat_q) / lim s tau", factor, _value(lhs) / zeta, tolerance))
    return ScenarioResult(
        "gamma-factor", tuple(rows),
        (f"lim s tau(A^(1+s)) = {zeta!r}",), {"profile": p.name, "grids": grids.to_dict()},
    )


# -- p-convexified case ------------------------------------------------------------------


def _coincidence_rows(labels, estimates, scales, tolerance: float) -> list:
    """Each limit against the mean of all three, plus their pairwise spread."""
    vals = [k * _value(e) for e, k in zip(estimates, scales)]
    common = float(np.mean(vals))
    rows = [Row(label, common, v, tolerance) for label, v in zip(labels, vals)]
    rows.append(Row("(a) pairwise spread of the three limits", 0.0, max(vals) - min(vals), tolerance, LE))
    return rows


def run_p_case(
    root: PiecewiseProfile,
    p: float,
    tolerance: float = 1e-3,
    grids: Optional[MeasurabilityGrids] = None,
) -> ScenarioResult:
    """Three p-limits of A^p, the Gamma(p/2) relation and the change-of-variable identity."""
    if p < 1:
        raise ValueError("p must be at least 1")
    grids = grids or default_grids(root)
    if p == 1.0:
        report = measurability_report(root, 1.0, tolerance, grids)
        rows = _coincidence_rows(
            ("(a) Dixmier average", "(a) Cesaro heat", "(a) zeta residue"),
            (report.avg_limit, report.mheat_limit, report.zeta_limit),
            (1.0, 1.0, 1.0), tolerance,
        )
        return ScenarioResult("p-case", tuple(rows), ("p = 1 reduces to the measurability report",),
                              {"p": p, "grids": grids.to_dict()})

    ap = pth_power(root, p)
    if not classify_membership(ap, grids.average).in_m1inf:
        raise ScenarioError(f"{ap.name!r} is not in M_1,inf")
    avg = estimate_limit(dixmier_average(ap, grids.average, check=False), tolerance, model="inverse")
    mheat = estimate_limit(cesaro_heat(root, p, p, grids.heat), tolerance, model="inverse")
    zeta_raw = estimate_limit(
        zeta_residue_function(root, p, grids.s_values), tolerance * p, model="inverse"
    )
    zeta = _value(zeta_raw)
    factor = 0.5 * math.gamma(p / 2.0)
    parallel = estimate_limit(cesaro_heat(root, 2.0, p, grids.heat), tolerance * factor, model="inverse")

    # lambda^-p tau(exp(-(lambda A)^-p)) equals the q = 1 heat function of A^p at lambda^p
    probe = grid_coordinates(GridSpec(1, -5.0, 60.0, 4))
    lhs, _ = heat_integral_log(root, probe, float(p))
    rhs, _ = heat_integral_log(ap, p * probe, 1.0)
    identity_err = float(np.max(np.abs(np.expm1(lhs - rhs))))

    rows = _coincidence_rows(
        ("(a) lim Dixmier average of A^p", "(a) lim M(lambda^-p tau(exp(-(lambda A)^-p)))",
         "(a) (1/p) lim s tau(A^(p+s))"),
        (avg, mheat, zeta_raw), (1.0, 1.0, 1.0 / p), tolerance,
    ) + [
        Row("(b) lim M(lambda^-p tau(exp(-(lambda A)^-2)))", factor * zeta, _value(parallel), tolerance),
        Row("(c) change of variable, max relative error", 0.0, identity_err, 1e-10, LE),
    ]
    notes = (f"lim s tau(A^(p+s)) = {zeta!r}", f"1/2 Gamma(p/2) = {factor!r}")
    return ScenarioResult("p-case", tuple(rows), notes, {"p": p, "root": root.name, "grids": grids.to_dict()})


# -- signed operators --------------------------------------------------------------------


def run_signed(
    pair: SignedProfilePair,
    tolerance: float = 1e-3,
    grids: Optional[MeasurabilityGrids] = None,
) -> ScenarioResult:
    """Signed heat and Dixmier-average differences and their limits."""
    grids = grids or default_grids(pair.plus)
    avg = estimate_limit(signed_diff(pair, "average", grids.average), tolerance, model="inverse")
    m_plus = cesaro_heat(pair.plus, 1.0, 1.0, grids.heat)
    m_minus = cesaro_heat(pair.minus, 1.0, 1.0, grids.heat)
    mheat = estimate_limit(m_plus.with_values(m_plus.values - m_minus.values), tolerance, model="inverse")
    raw = estimate_limit(signed_diff(pair, "heat", grids.raw_heat), tolerance, model="inverse")
    member_plus = classify_membership(pair.plus, grids.average)
    member_minus = classify_membership(pair.minus, grids.average)
    weak = member_plus.in_weak_l1 and member_minus.in_weak_l1
    little_o = member_plus.little_o and member_minus.little_o

    rows = []
    if raw.converged:
        rows.append(Row("raw signed heat limit = signed average limit", raw.value, _value(avg), 2 * tolerance))
    if avg.converged:
        rows.append(Row("Cesaro signed heat limit = signed average limit", avg.value, _value(mheat), 2 * tolerance))
    else:
        rows.append(Row("signed average converges", 1.0, 0.0, 0.0))
    notes = (
        f"raw signed heat classified {raw.classification}",
        f"both parts in weak L1: {weak}",
        f"little-o condition mu(t) t / log(1+t) -> 0 for both parts: {little_o}",
    )
    return ScenarioResult(
        "signed", tuple(rows), notes,
        {"plus": pair.plus.name, "minus": pair.minus.name, "weak_l1": weak, "little_o": little_o,
         "grids": grids.to_dict()},
    )
