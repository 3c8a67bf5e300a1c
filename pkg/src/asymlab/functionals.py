"""Asymptotic functionals sampled on grids.

Dixmier averages, heat functions, zeta residue functions and the
multiplicative Cesaro mean ``(Mx)(nu) = (1/log nu) int_1^nu x(s) ds/s``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .numerics import GridSpec, grid_coordinates, log_arguments
from .profiles import (
    MembershipError,
    PiecewiseProfile,
    SignedProfilePair,
    classify_membership,
    heat_integral_log,
    partial_integral_log,
    power_integral,
    _log_log1p_exp,
)

# half-width in u = log(lambda) of the resolved window around each profile feature
_FEATURE_WINDOW = 48.0
_FEATURE_PPU = 8
_BASE_SPAN = 64.0
_BASE_PPU = 16


@dataclass
class SampledFunction:
    """Values of a function of an asymptotic variable on an increasing coordinate.

    ``level`` gives the argument for coordinate ``x``: 1 means ``exp(x)``,
    2 means ``exp(exp(x))`` and 0 means ``x`` itself.
    """

    x: np.ndarray
    values: np.ndarray
    level: int
    meta: dict = field(default_factory=dict)
    grid: Optional[GridSpec] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.shape != self.values.shape:
            raise ValueError("x and values must have equal length")

    def __len__(self) -> int:
        return len(self.x)

    @property
    def log_arguments(self) -> np.ndarray:
        return log_arguments(self.x, self.level)

    def with_values(self, values, **meta) -> "SampledFunction":
        return SampledFunction(self.x, values, self.level, {**self.meta, **meta}, self.grid)

    def scaled(self, c: float) -> "SampledFunction":
        return self.with_values(c * self.values)

    def restrict(self, mask) -> "SampledFunction":
        return SampledFunction(self.x[mask], self.values[mask], self.level, dict(self.meta), self.grid)

    def to_csv(self, header: Sequence[str] = ()) -> str:
        """CSV with columns grid_level, x, argument_log_magnitude, value (17 significant digits)."""
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        buf.write("grid_level,x,argument_log_magnitude,value\n")
        for xi, li, vi in zip(self.x, self.log_arguments, self.values):
            buf.write(f"{self.level},{xi:.17g},{li:.17g},{vi:.17g}\n")
        return buf.getvalue()


def _grid_function(grid: GridSpec, values, **meta) -> SampledFunction:
    return SampledFunction(grid_coordinates(grid), values, grid.level, meta, grid)


# -- Cesaro mean ----------------------------------------------------------------


def _cesaro_values(u: np.ndarray, f: np.ndarray) -> np.ndarray:
    """(1/u) int_0^u f, flat below the first sample; u > 0 assumed where divided."""
    cum = kernels.cumsimpson(u, f) + f[0] * u[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u > 0, cum / np.where(u > 0, u, 1.0), f[0])
    return out


def _richardson_error(u: np.ndarray, f: np.ndarray, full: np.ndarray) -> float:
    """Max difference between the full-step and double-step rules at shared nodes / 15."""
    if len(u) < 5:
        return math.nan
    coarse = _cesaro_values(u[::2], f[::2])
    fine = full[::2]
    mask = u[::2] > 1.0
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(fine[mask] - coarse[mask])) / 15.0)


def cesaro_full(f: SampledFunction) -> SampledFunction:
    """Cesaro mean at every grid point (no restriction to arguments above e)."""
    if f.level not in (1, 2):
        raise ValueError("Cesaro mean needs a logarithmic (level 1 or 2) grid")
    u = f.log_arguments
    if u[0] > 1.0:
        raise ValueError(f"grid must start at or below argument e; first log-argument is {u[0]!r}")
    if u[0] < 0.0:
        keep = u >= 0.0
        f = f.restrict(keep)
        u = u[keep]
    vals = _cesaro_values(u, f.values)
    return f.with_values(vals, transform="cesaro", quadrature_error=_richardson_error(u, f.values, vals))


def cesaro(f: SampledFunction) -> SampledFunction:
    """Multiplicative Cesaro mean by composite Simpson accumulation in u = log s.

    Output is restricted to arguments above e. The sampled function is held
    constant below its first grid point. ``meta['quadrature_error']`` carries a
    half-step Richardson estimate.
    """
    full = cesaro_full(f)
    return full.restrict(full.log_arguments > 1.0)


# -- functionals of a profile ---------------------------------------------------


def _require_m1inf(p: PiecewiseProfile, grid: GridSpec):
    member = classify_membership(p, grid)
    if not member.in_m1inf:
        raise MembershipError(f"profile {p.name!r} is not in M_1,inf on {grid.describe()}")
    return member


def dixmier_average(p: PiecewiseProfile, grid: GridSpec, check: bool = True) -> SampledFunction:
    """a(t) = (1/log(1+t)) int_0^t mu from the exact partial integrals."""
    if check:
        _require_m1inf(p, grid)
    x = grid_coordinates(grid)
    lts = log_arguments(x, grid.level)
    vals = np.exp(partial_integral_log(p, lts) - _log_log1p_exp(lts))
    return SampledFunction(x, vals, grid.level, {"functional": "dixmier_average", "profile": p.name}, grid)


def _heat_values(p: PiecewiseProfile, log_lams: np.ndarray, q: float, power_p: float):
    logs, meta = heat_integral_log(p, log_lams, q)
    return np.exp(logs - power_p * log_lams), meta


def heat_function(p: PiecewiseProfile, q: float, power_p: float, grid: GridSpec) -> SampledFunction:
    """lambda**(-power_p) * tau(exp(-(lambda A)^(-q))) on the grid."""
    if not q > 0:
        raise ValueError("q must be positive")
    x = grid_coordinates(grid)
    vals, meta = _heat_values(p, log_arguments(x, grid.level), q, power_p)
    return SampledFunction(
        x, vals, grid.level,
        {"functional": "heat", "profile": p.name, "q": q, "power_p": power_p, **meta},
        grid,
    )


def _feature_nodes(p: PiecewiseProfile, u_max: float) -> np.ndarray:
    """u = log(lambda) nodes that resolve every profile feature below u_max."""
    nodes = [np.linspace(0.0, min(u_max, _BASE_SPAN), int(min(u_max, _BASE_SPAN) * _BASE_PPU) + 1)]
    segs = p.segments_through(u_max) if p.generated else list(p.segments)
    centres = set()
    for seg in segs:
        for lt in (seg.lo, seg.hi):
            if math.isfinite(lt):
                centres.add(lt)
                centres.add(-seg.log_value(lt))
    windows = []
    for cen in sorted(centres):
        lo, hi = max(0.0, cen - _FEATURE_WINDOW), min(u_max, cen + _FEATURE_WINDOW)
        if lo >= hi:
            continue
        if windows and lo <= windows[-1][1]:
            windows[-1][1] = max(windows[-1][1], hi)
        else:
            windows.append([lo, hi])
    for lo, hi in windows:
        nodes.append(np.linspace(lo, hi, int((hi - lo) * _FEATURE_PPU) + 2))
    return np.concatenate(nodes)


def cesaro_heat(p: PiecewiseProfile, q: float, power_p: float, grid: GridSpec) -> SampledFunction:
    """Cesaro mean of the heat function, restricted to arguments above e.

    On level-1 grids the heat function is sampled on the grid itself. On
    level-2 grids the integral in u runs over the output points merged with
    dense windows around every segment feature, so isolated bumps between
    tower-scale breakpoints are resolved.
    """
    if grid.level == 1:
        out = cesaro(heat_function(p, q, power_p, grid))
        out.meta.update(functional="cesaro_heat")
        return out
    x = grid_coordinates(grid)
    u_out = log_arguments(x, grid.level)
    if u_out[0] > 1.0:
        raise ValueError("grid must start at or below argument e")
    u = np.unique(np.concatenate([u_out[u_out >= 0], _feature_nodes(p, float(u_out[-1]))]))
    vals, meta = _heat_values(p, u, q, power_p)
    full = _cesaro_values(u, vals)
    err = _richardson_error(u, vals, full)
    idx = np.searchsorted(u, u_out)
    keep = u_out > 1.0
    return SampledFunction(
        x[keep], full[idx[keep]], grid.level,
        {"functional": "cesaro_heat", "profile": p.name, "q": q, "power_p": power_p,
         "quadrature_error": err, "quadrature_nodes": int(len(u)), **meta},
        grid,
    )


def zeta_residue_function(p: PiecewiseProfile, base_power: float, s_grid) -> SampledFunction:
    """s * tau(A^(base_power + s)) as a function of x = 1/s.

    Divergent sums are kept as data: the value is ``inf`` and the index is
    listed in ``meta['divergent']``. ``meta['tau']`` holds tau(A^(base+s)).
    """
    s = np.asarray(sorted(set(float(v) for v in s_grid), reverse=True), dtype=float)
    if s.size == 0 or not np.all(s > 0):
        raise ValueError("s values must be positive")
    vals, taus, divergent, tails = [], [], [], []
    for i, si in enumerate(s):
        res = power_integral(p, base_power + si)
        if res.divergent:
            vals.append(math.inf)
            taus.append(math.inf)
            divergent.append(i)
        else:
            tau = float(res.value)
            taus.append(tau)
            vals.append(si * tau)
        tails.append(res.tail_bound)
    return SampledFunction(
        1.0 / s, np.array(vals), 0,
        {"functional": "zeta_residue", "profile": p.name, "base_power": base_power,
         "coordinate": "x = 1/s", "s": s.tolist(), "tau": taus, "divergent": divergent,
         "tail_bound": tails},
    )


def default_s_grid(s_min: float = 1e-4, s_max: float = 1e-1, per_decade: int = 24) -> np.ndarray:
    decades = math.log10(s_max / s_min)
    return np.logspace(math.log10(s_max), math.log10(s_min), int(round(decades * per_decade)) + 1)


def signed_diff(pair: SignedProfilePair, which: str, grid: GridSpec) -> SampledFunction:
    """Pointwise difference of a functional of the positive and negative parts."""
    if which == "average":
        a, b = dixmier_average(pair.plus, grid), dixmier_average(pair.minus, grid)
    elif which == "heat":
        for part in (pair.plus, pair.minus):
            _require_m1inf(part, grid)
        a, b = heat_function(pair.plus, 1.0, 1.0, grid), heat_function(pair.minus, 1.0, 1.0, grid)
    else:
        raise ValueError(f"which must be 'average' or 'heat', got {which!r}")
    return a.with_values(a.values - b.values, functional=f"signed_{which}",
                         profile=f"{pair.plus.name} - {pair.minus.name}")


@dataclass(frozen=True)
class BoundedCheck:
    weak_l1_heat_sup: float
    marc_cesaro_heat_sup: float
    weak_l1_heat_growing: bool

    def to_dict(self) -> dict:
        return {
            "weak_l1_heat_sup": self.weak_l1_heat_sup,
            "marc_cesaro_heat_sup": self.marc_cesaro_heat_sup,
            "weak_l1_heat_growing": self.weak_l1_heat_growing,
        }


def bounded_check(p: PiecewiseProfile, grid: GridSpec) -> BoundedCheck:
    """Grid suprema of (1/lambda) tau(exp(-(lambda A)^-1)) and of its Cesaro mean."""
    raw = heat_function(p, 1.0, 1.0, grid)
    avg = cesaro_heat(p, 1.0, 1.0, grid)
    half = len(raw.values) // 2
    growing = bool(np.max(raw.values[half:]) > 2.0 * max(np.max(raw.values[: half + 1]), 1e-300))
    return BoundedCheck(float(np.max(raw.values)), float(np.max(avg.values)), growing)
