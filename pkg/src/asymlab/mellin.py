"""Heat-trace models, the Mellin bridge to zeta functions and the gasket model.

``zeta(s) = (1/Gamma(s/2)) int_0^inf t^(s/2-1) h(t) dt`` is split at ``split``:
the part near 0 uses closed forms for each model and the rest uses
Gauss-Legendre panels in log t, doubled until successive estimates agree to
1e-10 relative.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .functionals import SampledFunction, cesaro
from .limits import LimitEstimate, estimate_limit
from .numerics import GridSpec, grid_coordinates
from .profiles import PiecewiseProfile, heat_integral_log, power_integral, profile_from_dict, profile_to_dict
from .scenarios import GE, LE, Row, ScenarioResult

GASKET_BETA = math.log(3.0) / math.log(5.0)
# angular frequency of gamma(t) in log t, and of g(lambda) = gamma(lambda^-2) in log lambda
GASKET_FREQ = 2.0 * math.pi / math.log(5.0)
GASKET_OMEGA = 2.0 * GASKET_FREQ

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_RTOL = 1e-10
_MAX_PANELS = 1 << 14
# below this t the profile heat trace is replaced by its leading power law
_SMALL_T_LOG = -40.0


class ModelError(ValueError):
    """Invalid heat-trace model parameters or model file."""


@dataclass(frozen=True)
class GasketParams:
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    beta: float = GASKET_BETA

    def __post_init__(self):
        if not abs(self.b) < self.a:
            raise ModelError(f"gasket model needs |b| < a, got a={self.a!r}, b={self.b!r}")
        if not 0.0 < self.beta < 1.0:
            raise ModelError(f"gasket beta must lie in (0, 1), got {self.beta!r}")

    def gamma(self, t):
        """a + b sin((2 pi / log 5)(log t - c))."""
        return self.a + self.b * np.sin(GASKET_FREQ * (np.log(t) - self.c))


@dataclass(frozen=True)
class HeatTraceModel:
    """A small-t heat trace ``h(t)`` with an exponential tail beyond t = 1.

    Kinds: ``power_cutoff`` (a t^(-p/2) on (0,1), a e^-(t-1) after),
    ``gasket`` (t^-beta gamma(t) on (0,1), gamma(1) e^-(t-1) after),
    ``from_profile`` (h(t) = tau(exp(-t A^-q)) for a finite profile) and
    ``mixture`` (nonnegative combination of other models).
    """

    kind: str
    a: float = 0.0
    p: float = 2.0
    gasket: Optional[GasketParams] = None
    profile: Optional[PiecewiseProfile] = field(default=None, compare=False)
    q: float = 1.0
    components: tuple = ()

    @classmethod
    def power_cutoff(cls, a: float, p: float) -> "HeatTraceModel":
        if a < 0 or not p > 0:
            raise ModelError("power_cutoff needs a >= 0 and p > 0")
        return cls("power_cutoff", a=float(a), p=float(p))

    @classmethod
    def from_gasket(cls, params: GasketParams) -> "HeatTraceModel":
        return cls("gasket", a=params.a, p=2.0 * params.beta, gasket=params)

    @classmethod
    def from_profile(cls, profile: PiecewiseProfile, q: float = 1.0) -> "HeatTraceModel":
        if profile.generated:
            raise ModelError("heat-trace models need a finite profile")
        tail = profile.segments[-1]
        if tail.kind != "power":
            raise ModelError("profile tail must be a power segment")
        return cls("from_profile", p=2.0 / (q * tail.alpha), profile=profile, q=float(q))

    @classmethod
    def mixture(cls, weighted: Sequence[tuple]) -> "HeatTraceModel":
        comps = tuple((float(w), m) for w, m in weighted)
        if not comps or any(w < 0 for w, _ in comps):
            raise ModelError("mixture needs nonnegative weights")
        return cls("mixture", p=max(m.p for _, m in comps), components=comps)

    # -- evaluation ---------------------------------------------------------------

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "power_cutoff":
            return np.where(t < 1.0, self.a * t ** (-self.p / 2.0), self.a * np.exp(-(t - 1.0)))
        if self.kind == "gasket":
            g = self.gasket
            inner = t ** (-g.beta) * g.gamma(np.minimum(t, 1.0))
            return np.where(t < 1.0, inner, g.gamma(1.0) * np.exp(-(t - 1.0)))
        if self.kind == "from_profile":
            flat = np.atleast_1d(t).ravel()
            logs, _ = heat_integral_log(self.profile, -np.log(flat) / self.q, self.q)
            return np.exp(logs).reshape(t.shape)
        if self.kind == "mixture":
            return sum(w * m(t) for w, m in self.components)
        raise ModelError(f"unknown model kind {self.kind!r}")

    @property
    def decay_rate(self) -> float:
        """Rate r with h(t) = O(e^(-r t)) as t -> inf."""
        if self.kind == "from_profile":
            return math.exp(-self.q * self.profile.segments[0].log_c)
        if self.kind == "mixture":
            return min(m.decay_rate for _, m in self.components)
        return 1.0

    def leading_coefficient(self) -> float:
        """K in h(t) ~ K t^(-p/2) as t -> 0 for profile models."""
        tail = self.profile.segments[-1]
        return math.gamma(1.0 + self.p / 2.0) * math.exp(tail.log_c / tail.alpha)

    # -- serialisation -----------------------------------------------------------------

    def to_dict(self) -> dict:
        if self.kind == "power_cutoff":
            return {"kind": "power_cutoff", "a": self.a, "p": self.p}
        if self.kind == "gasket":
            g = self.gasket
            return {"kind": "gasket", "a": g.a, "b": g.b, "c": g.c, "beta": g.beta}
        if self.kind == "from_profile":
            return {"kind": "from_profile", "q": self.q, "profile": profile_to_dict(self.profile)}
        return {
            "kind": "mixture",
            "components": [{"weight": w, "model": m.to_dict()} for w, m in self.components],
        }


def model_from_dict(data: dict) -> HeatTraceModel:
    if not isinstance(data, dict) or "kind" not in data:
        raise ModelError("model: expected an object with a 'kind' field")
    kind = data["kind"]
    allowed = {
        "power_cutoff": {"kind", "a", "p"},
        "gasket": {"kind", "a", "b", "c", "beta"},
        "from_profile": {"kind", "q", "profile"},
        "mixture": {"kind", "components"},
    }
    if kind not in allowed:
        raise ModelError(f"model.kind: unknown kind {kind!r}")
    extra = set(data) - allowed[kind]
    if extra:
        raise ModelError(f"model: unknown fields {sorted(extra)}")
    try:
        if kind == "power_cutoff":
            return HeatTraceModel.power_cutoff(float(data["a"]), float(data["p"]))
        if kind == "gasket":
            params = GasketParams(
                float(data["a"]), float(data.get("b", 0.0)), float(data.get("c", 0.0)),
                float(data.get("beta", GASKET_BETA)),
            )
            return HeatTraceModel.from_gasket(params)
        if kind == "from_profile":
            return HeatTraceModel.from_profile(profile_from_dict(data["profile"]), float(data.get("q", 1.0)))
        return HeatTraceModel.mixture(
            [(float(c["weight"]), model_from_dict(c["model"])) for c in data["components"]]
        )
    except KeyError as exc:
        raise ModelError(f"model: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"model: {exc}") from None


def load_model(path) -> HeatTraceModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return model_from_dict(data)


# -- quadrature ---------------------------------------------------------------------------


def log_quad(fun, t_lo: float, t_hi: float, rtol: float = _RTOL) -> tuple[float, float]:
    """int_{t_lo}^{t_hi} fun(t) dt on Gauss-Legendre panels in v = log t.

    Panels double until successive estimates differ by less than ``rtol``
    relative; returns (value, last difference).
    """
    if not t_hi > t_lo:
        return 0.0, 0.0
    la, lb = math.log(t_lo), math.log(t_hi)
    panels, prev = 4, None
    while True:
        edges = np.linspace(la, lb, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        v = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        t = np.exp(v)
        val = float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * fun(t) * t))
        if prev is not None:
            diff = abs(val - prev)
            if diff <= rtol * abs(val) or val == prev or panels >= _MAX_PANELS:
                return val, diff
        prev, panels = val, panels * 2


@dataclass(frozen=True)
class MellinIntegral:
    """Parts of int_0^inf t^(s/2-1) h(t) dt."""

    near: float
    far: float
    truncation_bound: float
    quadrature_error: float
    divergent: bool = False

    @property
    def total(self) -> float:
        return math.inf if self.divergent else self.near + self.far


def _near_closed_form(h: HeatTraceModel, s: float, t0: float) -> float:
    """int_0^t0 t^(s/2-1) h(t) dt for t0 <= 1 (t0 <= e^-40 for profile models)."""
    if h.kind == "power_cutoff":
        e = 0.5 * (s - h.p)
        return h.a * t0**e / e
    if h.kind == "gasket":
        g = h.gasket
        sig = 0.5 * s - g.beta
        L = math.log(t0)
        ph = GASKET_FREQ * (L - g.c)
        osc = (sig * math.sin(ph) - GASKET_FREQ * math.cos(ph)) / (sig * sig + GASKET_FREQ**2)
        return math.exp(sig * L) * (g.a / sig + g.b * osc)
    if h.kind == "from_profile":
        e = 0.5 * (s - h.p)
        return h.leading_coefficient() * t0**e / e
    raise ModelError(f"no closed form for {h.kind!r}")


def _near_limit(h: HeatTraceModel) -> float:
    return math.exp(_SMALL_T_LOG) if h.kind == "from_profile" else 1.0


def mellin_integral(h: HeatTraceModel, s: float, split: float = 1.0) -> MellinIntegral:
    """int_0^split + int_split^inf of t^(s/2-1) h(t) dt (no Gamma normalisation)."""
    if not split > 0:
        raise ValueError("split must be positive")
    if h.kind == "mixture":
        parts = [mellin_integral(m, s, split) for _, m in h.components]
        if any(pt.divergent for pt in parts):
            return MellinIntegral(math.inf, math.inf, 0.0, 0.0, True)
        ws = [w for w, _ in h.components]
        return MellinIntegral(
            sum(w * pt.near for w, pt in zip(ws, parts)),
            sum(w * pt.far for w, pt in zip(ws, parts)),
            sum(w * pt.truncation_bound for w, pt in zip(ws, parts)),
            sum(w * pt.quadrature_error for w, pt in zip(ws, parts)),
        )
    if not s > h.p:
        return MellinIntegral(math.inf, math.inf, 0.0, 0.0, True)
    if h.kind == "power_cutoff" and h.a == 0:
        return MellinIntegral(0.0, 0.0, 0.0, 0.0)

    def integrand(t):
        return t ** (0.5 * s - 1.0) * h(t)

    t0 = min(split, _near_limit(h))
    near = _near_closed_form(h, s, t0)
    err = 0.0
    breaks = [b for b in (t0, split, 1.0) if t0 <= b]
    rate = h.decay_rate
    t_end = max(split, 1.0) + (60.0 + s) / rate
    pieces = sorted(set(breaks + [t_end]))
    near_extra = far = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        val, e = log_quad(integrand, lo, hi)
        err += e
        if hi <= split:
            near_extra += val
        else:
            far += val
    # beyond t_end: h <= h(t_end) e^-(rate (t - t_end)) and t^(s/2-1) grows at most geometrically
    growth = max(0.0, 0.5 * s - 1.0) / t_end
    bound = float(integrand(np.array([t_end]))[0]) / max(rate - growth, 1e-300)
    return MellinIntegral(near + near_extra, far, bound, err)


def mellin_zeta(h: HeatTraceModel, s: float, split: float = 1.0) -> float:
    """zeta(s) = (1/Gamma(s/2)) int_0^inf t^(s/2-1) h(t) dt; ``inf`` when s <= p."""
    res = mellin_integral(h, s, split)
    if res.divergent:
        return math.inf
    return res.total / math.gamma(0.5 * s)


def profile_zeta(h: HeatTraceModel, s: float) -> float:
    """tau(A^(q s/2)) from the exact power integral, for ``from_profile`` models."""
    res = power_integral(h.profile, h.q * s / 2.0)
    return math.inf if res.divergent else float(res.value)


# -- bound check --------------------------------------------------------------------------


def zeta_bound_check(
    h: HeatTraceModel,
    p: float,
    C: float,
    s_list: Sequence[float],
    tolerance: float = 0.05,
    splits: Sequence[float] = (0.5, 1.0, 2.0),
) -> ScenarioResult:
    """Check 2/C - tol <= (s - p) int t^(s/2-1) h <= 2C + tol for s near p.

    The hypothesis C^-1 t^(-p/2) <= h(t) <= C t^(-p/2) on (0, 1) is tested on
    a logarithmic grid first; if it fails no bound rows are produced. The
    split location is also varied to confirm it only moves mass between the
    two parts of the integral.
    """
    t = np.logspace(-12, 0, 1201)[:-1]
    ratio = h(t) * t ** (p / 2.0)
    slack = 1e-12
    lower_ok = bool(np.all(ratio >= 1.0 / C - slack))
    upper_ok = bool(np.all(ratio <= C + slack))
    rows = [
        Row("hypothesis min h(t) t^(p/2) on (0,1)", 1.0 / C, float(ratio.min()), slack, GE),
        Row("hypothesis max h(t) t^(p/2) on (0,1)", C, float(ratio.max()), slack, LE),
    ]
    notes = []
    if not (lower_ok and upper_ok):
        notes.append("heat bound hypothesis fails; bound rows skipped")
        return ScenarioResult("zeta-bound", tuple(rows), tuple(notes), {"p": p, "C": C})
    for s in s_list:
        vals = [mellin_integral(h, s, sp) for sp in splits]
        base = vals[list(splits).index(1.0)] if 1.0 in splits else vals[0]
        scaled = (s - p) * base.total
        rows.append(Row(f"s-p={s - p:.4g} lower", 2.0 / C - tolerance, scaled, 0.0, GE))
        rows.append(Row(f"s-p={s - p:.4g} upper", 2.0 * C + tolerance, scaled, 0.0, LE))
        spread = max(abs(v.total - base.total) for v in vals) / abs(base.total)
        rows.append(Row(f"s-p={s - p:.4g} split independence", 0.0, spread, 1e-8, LE))
    notes.append("bounds apply to the unnormalised Mellin integral int_0^inf t^(s/2-1) h(t) dt")
    return ScenarioResult("zeta-bound", tuple(rows), tuple(notes), {"p": p, "C": C, "splits": list(splits)})


# -- gasket Cesaro mean ---------------------------------------------------------------------


@dataclass(frozen=True)
class GasketCesaro:
    function: SampledFunction
    limit: LimitEstimate
    max_excess: float
    bound_holds: bool


def gasket_g(params: GasketParams, grid: GridSpec) -> SampledFunction:
    """g(lambda) = lambda^(-2 beta) h(lambda^-2) = gamma(lambda^-2) for lambda >= 1."""
    x = grid_coordinates(grid)
    u = x if grid.level == 1 else np.exp(x)
    vals = params.a + params.b * np.sin(GASKET_FREQ * (-2.0 * u - params.c))
    return SampledFunction(x, vals, grid.level, {"functional": "gasket_g", "a": params.a, "b": params.b}, grid)


def gasket_cesaro(
    params: GasketParams,
    nu_max: float = math.exp(40.0),
    points_per_unit: int = 256,
    log_nu_min: float = 10.0,
    tolerance: float = 1e-6,
) -> GasketCesaro:
    """Cesaro mean of the gasket model after t = lambda^-2 and its 1/log(nu) envelope.

    ``max_excess`` is the largest |M(g)(nu) - a| - 2|b| / (omega log nu) over
    grid points with log nu >= ``log_nu_min``.
    """
    log_nu_max = math.log(nu_max)
    if log_nu_max < 10.0:
        raise ValueError("nu_max must be at least e^10")
    grid = GridSpec(1, 0.0, log_nu_max, points_per_unit)
    m = cesaro(gasket_g(params, grid))
    y = m.log_arguments
    sel = y >= log_nu_min
    envelope = 2.0 * abs(params.b) / (GASKET_OMEGA * y[sel])
    excess = float(np.max(np.abs(m.values[sel] - params.a) - envelope))
    limit = estimate_limit(m, 1e-3, model="inverse")
    m.meta.update(envelope_max_excess=excess)
    return GasketCesaro(m, limit, excess, excess <= tolerance)


# -- residue from the heat side ----------------------------------------------------------


@dataclass(frozen=True)
class HeatResidue:
    residue: float
    predicted_cesaro: float
    cesaro_limit: LimitEstimate
    consistent: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "residue": self.residue,
            "predicted_cesaro": self.predicted_cesaro,
            "cesaro_limit": self.cesaro_limit.to_dict(),
            "consistent": self.consistent,
        }


def zeta_residue(h: HeatTraceModel, p: float, eps_min: float = 1e-5, eps_max: float = 1e-1) -> LimitEstimate:
    """lim_{s -> p} (s - p) zeta(s) from a sweep in x = 1/(s - p)."""
    eps = np.logspace(math.log10(eps_max), math.log10(eps_min), 65)
    vals = np.array([e * mellin_zeta(h, p + e) for e in eps])
    f = SampledFunction(1.0 / eps, vals, 0, {"functional": "zeta_residue", "p": p})
    return estimate_limit(f, 1e-6, model="inverse")


def heat_to_residue(h: HeatTraceModel, p: float, tolerance: float = 1e-3) -> HeatResidue:
    """1/2 Gamma(p/2) lim (s - p) zeta(s) against the Cesaro limit of lambda^-p h(lambda^-2)."""
    res = zeta_residue(h, p)
    residue = res.value if res.converged else math.nan
    predicted = 0.5 * math.gamma(p / 2.0) * residue
    grid = GridSpec(1, 0.0, 300.0, 16)
    x = grid_coordinates(grid)
    g = np.exp(-p * x) * h(np.exp(-2.0 * x))
    lim = estimate_limit(cesaro(SampledFunction(x, g, 1, {"functional": "lambda^-p h(lambda^-2)"}, grid)),
                         tolerance, model="inverse")
    consistent = None
    if lim.converged and res.converged:
        consistent = abs(lim.value - predicted) <= tolerance
    return HeatResidue(residue, predicted, lim, consistent)
