"""Decreasing rearrangements as piecewise power profiles.

A profile describes ``mu(t)`` on ``(0, inf)`` by contiguous left-open,
right-closed segments, each either constant ``c`` or a power ``c * t**-alpha``.
All integrals are exact per-segment closed forms evaluated in log space.
Infinite families (the tower counterexample, the spike profile) are produced
lazily by a generator.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .numerics import GridSpec, LogScalar, Scalar, as_logscalar, grid_coordinates, log_arguments

CONSTANT = "constant"
POWER = "power"

_KIND_CODE = {CONSTANT: 0, POWER: 1}
# relative size of a term below which a generated sum may stop
_STOP_RATIO = math.log(1e-15)
_MAX_GENERATED = 100_000
_JUNCTION_SLACK = 1e-12


class ProfileError(ValueError):
    """A profile violates its structural invariants or a file is malformed."""


class MembershipError(ValueError):
    """A functional was requested for a profile outside its domain."""


@dataclass(frozen=True)
class Coded:
    """A nonnegative number coded as ``value``, ``exp(value)`` or ``exp(exp(value))``."""

    level: int
    value: float

    def __post_init__(self):
        if self.level not in (0, 1, 2):
            raise ProfileError(f"endpoint level must be 0, 1 or 2, got {self.level!r}")
        if self.level == 0 and self.value < 0:
            raise ProfileError(f"level-0 value must be nonnegative, got {self.value!r}")

    @property
    def log(self) -> float:
        if self.level == 0:
            return -math.inf if self.value == 0 else math.log(self.value)
        if self.level == 1:
            return self.value
        return math.exp(self.value)

    @property
    def is_inf(self) -> bool:
        return self.level == 0 and self.value == math.inf

    def scaled(self, factor: float) -> "Coded":
        if self.level == 0:
            return Coded(0, self.value * factor)
        return Coded(1, self.log + math.log(factor))

    def power(self, p: float) -> "Coded":
        if self.level == 0:
            return Coded(0, self.value**p)
        if self.level == 1:
            return Coded(1, self.value * p)
        return Coded(2, self.value + math.log(p))

    def to_json(self):
        if self.is_inf:
            return "inf"
        return {"level": self.level, "value": self.value}


ZERO_POINT = Coded(0, 0.0)
INFINITY = Coded(0, math.inf)


@dataclass(frozen=True)
class Segment:
    kind: str
    c: Coded
    start: Coded
    end: Coded
    alpha: float = 0.0

    @property
    def log_c(self) -> float:
        return self.c.log

    @property
    def lo(self) -> float:
        return self.start.log

    @property
    def hi(self) -> float:
        return self.end.log

    def log_value(self, lt: float) -> float:
        """log mu at t = exp(lt) according to this segment's formula."""
        if self.kind == CONSTANT:
            return self.log_c
        return self.log_c - self.alpha * lt

    def scaled(self, factor: float) -> "Segment":
        return replace(self, c=self.c.scaled(factor))

    def power(self, p: float) -> "Segment":
        return replace(self, c=self.c.power(p), alpha=self.alpha * p)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "c": self.c.value if self.c.level == 0 else self.c.to_json()}
        if self.kind == POWER:
            out["alpha"] = self.alpha
        out["from"] = self.start.to_json()
        out["to"] = self.end.to_json()
        return out


def constant(c: float, start: Coded, end: Coded) -> Segment:
    return Segment(CONSTANT, Coded(0, float(c)), start, end)


def power(c: float, alpha: float, start: Coded, end: Coded) -> Segment:
    return Segment(POWER, Coded(0, float(c)), start, end, float(alpha))


class Generator:
    """Lazily produced, infinite sequence of segments."""

    name = "generator"
    # power integrals of mu**q converge only for q above this exponent
    critical_power = 1.0

    def segments(self) -> Iterator[Segment]:
        raise NotImplementedError

    def to_json(self):
        return self.name


class CounterexampleGenerator(Generator):
    """mu = exp(-e) on (0, e^e]; for n >= 1, 1/s on (e^{e^n}, n e^{e^n}] and
    exp(-e^{n+1}) on (n e^{e^n}, e^{e^{n+1}}]."""

    name = "counterexample"

    def segments(self) -> Iterator[Segment]:
        yield Segment(CONSTANT, Coded(1, -math.e), ZERO_POINT, Coded(2, 1.0))
        n = 1
        while True:
            knee = Coded(1, math.log(n) + math.exp(n))
            if n >= 2:
                yield Segment(POWER, Coded(0, 1.0), Coded(2, float(n)), knee, 1.0)
            yield Segment(CONSTANT, Coded(1, -math.exp(n + 1)), knee, Coded(2, float(n + 1)))
            n += 1


class SpikeGenerator(Generator):
    """t*mu(t) reaches n at t = exp(n^2) while the partial integral stays O(log t).

    mu = 1/2 on (0, 1]; for n >= 1, (1/2)/s on (t_{n-1}, t_n/(2n)] and the
    constant n/t_n on (t_n/(2n), t_n] with t_n = exp(n^2).
    """

    name = "spike"

    def segments(self) -> Iterator[Segment]:
        yield Segment(CONSTANT, Coded(0, 0.5), ZERO_POINT, Coded(0, 1.0))
        prev = Coded(0, 1.0)
        n = 1
        while True:
            knee = Coded(1, n * n - math.log(2 * n))
            top = Coded(1, float(n * n))
            yield Segment(POWER, Coded(0, 0.5), prev, knee, 1.0)
            yield Segment(CONSTANT, Coded(1, math.log(n) - n * n), knee, top)
            prev = top
            n += 1


@dataclass(frozen=True)
class TransformedGenerator(Generator):
    """A generator whose segments are raised to ``exponent`` then scaled by ``factor``."""

    base: Generator
    factor: float = 1.0
    exponent: float = 1.0

    @property
    def name(self):  # type: ignore[override]
        return self.base.name

    @property
    def critical_power(self):  # type: ignore[override]
        return self.base.critical_power / self.exponent

    def segments(self) -> Iterator[Segment]:
        for seg in self.base.segments():
            if self.exponent != 1.0:
                seg = seg.power(self.exponent)
            if self.factor != 1.0:
                seg = seg.scaled(self.factor)
            yield seg

    def to_json(self):
        return {"name": self.base.name, "scale": self.factor, "power": self.exponent}


GENERATORS = {"counterexample": CounterexampleGenerator, "spike": SpikeGenerator}


@dataclass(frozen=True)
class PiecewiseProfile:
    """Decreasing rearrangement ``mu(., A)`` as ordered segments.

    Either ``segments`` lists every piece (the last one reaching infinity) or
    ``generator`` produces them all.
    """

    name: str
    segments: tuple = ()
    generator: Optional[Generator] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def generated(self) -> bool:
        return self.generator is not None

    def iter_segments(self) -> Iterator[Segment]:
        if self.generator is None:
            yield from self.segments
        else:
            yield from self.generator.segments()

    def segments_through(self, lt: float) -> list[Segment]:
        """All segments whose left end lies below ``t = exp(lt)``."""
        out = []
        for k, seg in enumerate(self.iter_segments()):
            if seg.lo >= lt:
                break
            if k > _MAX_GENERATED:
                raise ProfileError("segment generator did not reach the requested argument")
            out.append(seg)
        return out

    def first_segments(self, count: int) -> list[Segment]:
        out = []
        for seg in self.iter_segments():
            if len(out) >= count:
                break
            out.append(seg)
        return out

    def validate(self) -> "PiecewiseProfile":
        """Check contiguity, monotonicity and decay; raise ProfileError naming the fault."""
        segs = self.segments if self.generator is None else self.first_segments(12)
        if not segs:
            raise ProfileError(f"profile {self.name!r} has no segments")
        if segs[0].kind != CONSTANT:
            raise ProfileError("segment 0 must be constant (mu(0+) must be finite)")
        if segs[0].lo != -math.inf:
            raise ProfileError("segment 0 must start at 0")
        for i, seg in enumerate(segs):
            if seg.kind not in _KIND_CODE:
                raise ProfileError(f"segment {i}: unknown kind {seg.kind!r}")
            if not seg.log_c > -math.inf or math.isnan(seg.log_c) or seg.log_c == math.inf:
                raise ProfileError(f"segment {i}: coefficient c must be positive and finite")
            if seg.kind == POWER and not seg.alpha > 0:
                raise ProfileError(f"segment {i}: power exponent alpha must be > 0")
            if not seg.lo < seg.hi:
                raise ProfileError(f"segment {i}: empty or reversed interval")
            if seg.kind == CONSTANT and seg.hi == math.inf:
                raise ProfileError(f"segment {i}: constant tail does not decay to 0")
            if i > 0:
                prev = segs[i - 1]
                if prev.hi != seg.lo:
                    raise ProfileError(
                        f"junction {i - 1}->{i}: segments not contiguous "
                        f"(log end {prev.hi!r} vs log start {seg.lo!r})"
                    )
                left = prev.log_value(prev.hi)
                right = seg.log_value(seg.lo)
                if right > left + _JUNCTION_SLACK * max(1.0, abs(left)):
                    raise ProfileError(
                        f"junction {i - 1}->{i} at log t = {seg.lo!r}: mu increases "
                        f"(log mu {left!r} -> {right!r})"
                    )
        if self.generator is None and segs[-1].hi != math.inf:
            raise ProfileError(f"last segment {len(segs) - 1} must extend to infinity")
        return self

    def scaled(self, factor: float) -> "PiecewiseProfile":
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        if self.generator is not None:
            gen = self.generator
            if isinstance(gen, TransformedGenerator):
                gen = replace(gen, factor=gen.factor * factor)
            else:
                gen = TransformedGenerator(gen, factor=factor)
            return PiecewiseProfile(f"{self.name}*{factor!r}", (), gen)
        return PiecewiseProfile(
            f"{self.name}*{factor!r}", tuple(s.scaled(factor) for s in self.segments)
        )


def segment_arrays(segs: list[Segment]):
    kind = np.array([_KIND_CODE[s.kind] for s in segs], dtype=np.int64)
    lc = np.array([s.log_c for s in segs], dtype=float)
    alpha = np.array([s.alpha for s in segs], dtype=float)
    lo = np.array([s.lo for s in segs], dtype=float)
    hi = np.array([s.hi for s in segs], dtype=float)
    return kind, lc, alpha, lo, hi


@dataclass(frozen=True)
class SegmentSum:
    """Result of a summed per-segment integral.

    ``tail_bound`` is a certified bound on the omitted remainder of a
    generated profile (0 for finite profiles).
    """

    value: LogScalar
    divergent: bool = False
    terms: int = 0
    tail_bound: float = 0.0

    def __float__(self) -> float:
        return math.inf if self.divergent else float(self.value)


# -- constructors -------------------------------------------------------------


def make_canonical(c: float = 1.0) -> PiecewiseProfile:
    """mu = c on (0, 1] and c/t on (1, inf)."""
    return PiecewiseProfile(
        f"canonical({c!r})",
        (constant(c, ZERO_POINT, Coded(0, 1.0)), power(c, 1.0, Coded(0, 1.0), INFINITY)),
    )


def make_root(p: float) -> PiecewiseProfile:
    """mu = min(1, t**(-1/p))."""
    return PiecewiseProfile(
        f"root({p!r})",
        (constant(1.0, ZERO_POINT, Coded(0, 1.0)), power(1.0, 1.0 / p, Coded(0, 1.0), INFINITY)),
    )


def make_counterexample() -> PiecewiseProfile:
    return PiecewiseProfile("counterexample", (), CounterexampleGenerator())


def make_spike() -> PiecewiseProfile:
    return PiecewiseProfile("spike", (), SpikeGenerator())


# -- evaluation ---------------------------------------------------------------


def _lt(t: Scalar) -> float:
    t = as_logscalar(t)
    if t.sign <= 0:
        raise ValueError("argument must be positive")
    return t.log_magnitude


def evaluate(p: PiecewiseProfile, t: Scalar) -> LogScalar:
    """mu(t); at a junction the left segment's value is returned."""
    lt = _lt(t)
    for k, seg in enumerate(p.iter_segments()):
        if lt <= seg.hi:
            return LogScalar.from_log(seg.log_value(lt))
        if k > _MAX_GENERATED:
            break
    raise ProfileError("argument beyond the profile's segments")


def evaluate_log(p: PiecewiseProfile, log_ts) -> np.ndarray:
    """Vectorised log mu at ``exp(log_ts)``."""
    log_ts = np.asarray(log_ts, dtype=float)
    top = float(np.max(log_ts)) if log_ts.size else 0.0
    segs = p.segments_through(top)
    return kernels.evaluate_log_batch(segment_arrays(segs), log_ts)


def distribution(p: PiecewiseProfile, s: Scalar) -> LogScalar:
    """Lebesgue measure of {t : mu(t) > s}."""
    ls = _lt(s)
    for k, seg in enumerate(p.iter_segments()):
        if seg.kind == CONSTANT:
            if seg.log_c > ls:
                continue
            return LogScalar.from_log(seg.lo)
        # c t^-alpha > s  <=>  log t < (log c - log s) / alpha
        cross = (seg.log_c - ls) / seg.alpha
        if cross <= seg.lo:
            return LogScalar.from_log(seg.lo)
        if cross < seg.hi:
            return LogScalar.from_log(cross)
        if k > _MAX_GENERATED:
            break
    raise ProfileError("level set did not terminate")


def partial_integral(p: PiecewiseProfile, t: Scalar) -> LogScalar:
    """int_0^t mu(s) ds."""
    lt = _lt(t)
    acc = -math.inf
    for seg in p.segments_through(lt):
        top = min(seg.hi, lt)
        acc = kernels.logaddexp(
            acc, kernels.segment_power_log(_KIND_CODE[seg.kind], seg.log_c, seg.alpha, seg.lo, top, 1.0)
        )
    return LogScalar.from_log(acc)


def partial_integral_log(p: PiecewiseProfile, log_ts) -> np.ndarray:
    log_ts = np.asarray(log_ts, dtype=float)
    top = float(np.max(log_ts)) if log_ts.size else 0.0
    return kernels.partial_log_batch(segment_arrays(p.segments_through(top)), log_ts)


def _generated_sum(p: PiecewiseProfile, term_of, past_knee) -> SegmentSum:
    """Sum generated segment terms until the geometric stopping rule certifies the rest.

    Stop after a term below 1e-15 of the running sum (past the knee) that is
    followed by a term at most half as large; the remainder is then bounded by
    twice that next term.
    """
    acc = -math.inf
    pending = None
    for k, seg in enumerate(p.iter_segments()):
        term = term_of(seg)
        if term == math.inf:
            return SegmentSum(LogScalar.zero(), True, k + 1, math.inf)
        if pending is not None:
            if term <= pending + math.log(0.5):
                acc = kernels.logaddexp(acc, term)
                bound = math.exp(term + math.log(2.0) - acc) if acc > -math.inf else 0.0
                return SegmentSum(LogScalar.from_log(acc), False, k + 1, bound)
            pending = None
        acc = kernels.logaddexp(acc, term)
        if past_knee(seg) and (term == -math.inf or term < acc + _STOP_RATIO):
            pending = term
        if k > _MAX_GENERATED:
            break
    raise ProfileError("generated sum did not meet the stopping rule")


def power_integral(p: PiecewiseProfile, q: float, upper: Optional[Scalar] = None) -> SegmentSum:
    """tau(A^q) = int_0^upper mu(s)^q ds, exact per segment.

    A divergent integral is returned with ``divergent=True`` rather than raised.
    """
    if upper is not None:
        lt = _lt(upper)
        acc = -math.inf
        segs = p.segments_through(lt)
        for seg in segs:
            term = kernels.segment_power_log(
                _KIND_CODE[seg.kind], seg.log_c, seg.alpha, seg.lo, min(seg.hi, lt), q
            )
            if term == math.inf:
                return SegmentSum(LogScalar.zero(), True, len(segs))
            acc = kernels.logaddexp(acc, term)
        return SegmentSum(LogScalar.from_log(acc), False, len(segs))
    if p.generated:
        if q <= p.generator.critical_power:
            return SegmentSum(LogScalar.zero(), True, 0, math.inf)
        return _generated_sum(
            p,
            lambda seg: kernels.segment_power_log(
                _KIND_CODE[seg.kind], seg.log_c, seg.alpha, seg.lo, seg.hi, q
            ),
            lambda seg: True,
        )
    acc = -math.inf
    for seg in p.segments:
        term = kernels.segment_power_log(_KIND_CODE[seg.kind], seg.log_c, seg.alpha, seg.lo, seg.hi, q)
        if term == math.inf:
            return SegmentSum(LogScalar.zero(), True, len(p.segments))
        acc = kernels.logaddexp(acc, term)
    return SegmentSum(LogScalar.from_log(acc), False, len(p.segments))


def heat_integral(p: PiecewiseProfile, lam: Scalar, q: float) -> SegmentSum:
    """tau(exp(-(lam A)^(-q))) = int_0^inf exp(-(lam mu(s))^(-q)) ds.

    Power pieces reduce to increments of the lower incomplete gamma function
    with parameter 1/(q alpha); constant pieces are elementary.
    """
    llam = _lt(lam)
    if not q > 0:
        raise ValueError("heat exponent q must be positive")

    def term_of(seg):
        return kernels.segment_heat_log(_KIND_CODE[seg.kind], seg.log_c, seg.alpha, seg.lo, seg.hi, llam, q)

    if p.generated:
        # past the knee lam * mu <= 1 on the whole segment
        return _generated_sum(p, term_of, lambda seg: llam + seg.log_value(seg.lo) <= 0.0)
    acc = -math.inf
    for seg in p.segments:
        term = term_of(seg)
        if term == math.inf:
            raise MembershipError("mu does not tend to 0; heat integral is infinite")
        acc = kernels.logaddexp(acc, term)
    return SegmentSum(LogScalar.from_log(acc), False, len(p.segments))


def heat_integral_log(p: PiecewiseProfile, log_lambdas, q: float):
    """Vectorised log heat integral; returns (values, metadata)."""
    log_lambdas = np.asarray(log_lambdas, dtype=float)
    meta = {"tail_bound": 0.0, "segments": len(p.segments)}
    if p.generated:
        top = heat_integral(p, LogScalar.from_log(float(np.max(log_lambdas))), q)
        segs = p.first_segments(top.terms)
        meta = {"tail_bound": top.tail_bound, "segments": len(segs)}
    else:
        segs = list(p.segments)
        if any(s.kind == CONSTANT and s.hi == math.inf for s in segs):
            raise MembershipError("mu does not tend to 0; heat integral is infinite")
    return kernels.heat_log_batch(segment_arrays(segs), log_lambdas, q), meta


def pth_power(p: PiecewiseProfile, exponent: float) -> PiecewiseProfile:
    """Profile of A**exponent: mu(t, A^p) = mu(t, A)^p."""
    if not exponent > 0:
        raise ValueError("exponent must be positive")
    name = f"{p.name}^{exponent!r}"
    if p.generator is not None:
        gen = p.generator
        if isinstance(gen, TransformedGenerator):
            gen = replace(gen, exponent=gen.exponent * exponent, factor=gen.factor**exponent)
        else:
            gen = TransformedGenerator(gen, exponent=exponent)
        return PiecewiseProfile(name, (), gen)
    return PiecewiseProfile(name, tuple(s.power(exponent) for s in p.segments))


# -- membership ---------------------------------------------------------------


@dataclass(frozen=True)
class Membership:
    in_weak_l1: bool
    weak_l1_sup: float
    in_m1inf: bool
    m1inf_sup: float
    little_o: bool

    def to_dict(self) -> dict:
        return {
            "in_weak_L1": self.in_weak_l1,
            "weak_L1_sup": self.weak_l1_sup,
            "in_M1inf": self.in_m1inf,
            "M1inf_sup": self.m1inf_sup,
            "little_o_check": self.little_o,
        }


def _segment_tmu_sup(seg: Segment, lt_cap: float) -> float:
    """log sup of t*mu(t) over the segment clipped at exp(lt_cap)."""
    hi = min(seg.hi, lt_cap)
    if seg.kind == CONSTANT:
        return seg.log_c + hi
    slope = 1.0 - seg.alpha
    if slope > 0:
        return seg.log_c + slope * hi
    if slope == 0:
        return seg.log_c
    return seg.log_c + slope * seg.lo


def _log_log1p_exp(lt):
    """log(log(1 + e^lt)) elementwise."""
    lt = np.asarray(lt, dtype=float)
    inner = np.where(lt > 0, lt + np.log1p(np.exp(-np.abs(lt))), np.log1p(np.exp(np.minimum(lt, 0))))
    return np.log(inner)


# nested fractions of the log range over which generated suprema are compared
_NESTED_FRACTIONS = (0.25, 0.5, 1.0)
_GROWTH_STEP = math.log(1.1)


def _keeps_growing(log_sups) -> bool:
    """True when every doubling of the range raises the supremum by more than 10%."""
    return all(b - a > _GROWTH_STEP for a, b in zip(log_sups, log_sups[1:]))


def classify_membership(p: PiecewiseProfile, grid: GridSpec) -> Membership:
    """Decide weak-L1 and Marcinkiewicz membership and the little-o condition.

    Finite profiles are decided exactly from the tail exponent. Generated
    profiles are judged on the grid range: a supremum is declared unbounded
    when it rises by more than 10% from each of the nested ranges
    log t <= L/4, L/2, L to the next (L the largest grid log-argument). This
    catches growth as slow as (log t)^0.14 while a supremum creeping up to a
    finite limit is left bounded.
    """
    x = grid_coordinates(grid)
    lts = log_arguments(x, grid.level)
    lt_max = float(lts[-1])
    segs = p.segments_through(lt_max) if p.generated else list(p.segments)

    sup_tmu = max(_segment_tmu_sup(s, lt_max) for s in segs)
    log_avg = partial_integral_log(p, lts) - _log_log1p_exp(lts)
    # the average also peaks at segment ends inside the grid range
    ends = np.array([s.hi for s in segs if s.hi < lt_max] + [lt_max])
    log_avg_ends = partial_integral_log(p, ends) - _log_log1p_exp(ends)
    sup_avg = float(max(np.max(log_avg), np.max(log_avg_ends)))
    # mu(0+) = c of the first segment is the t -> 0 limit of the average
    sup_avg = max(sup_avg, segs[0].log_c)

    if not p.generated:
        tail = segs[-1]
        in_weak = tail.alpha >= 1.0
        in_m1 = tail.alpha >= 1.0
        little_o = tail.alpha >= 1.0
        return Membership(
            in_weak, math.exp(sup_tmu) if in_weak else math.inf,
            in_m1, math.exp(sup_avg) if in_m1 else math.inf, little_o,
        )

    caps = [lt_max * f for f in _NESTED_FRACTIONS] if lt_max > 0 else [lt_max] * len(_NESTED_FRACTIONS)
    tmu_sups = [max(_segment_tmu_sup(s, cap) for s in segs if s.lo < cap) for cap in caps]
    in_weak = not _keeps_growing(tmu_sups)
    log_avg_all = np.concatenate([log_avg, log_avg_ends])
    lts_all = np.concatenate([lts, ends])
    avg_sups = [float(np.max(log_avg_all[lts_all <= cap], initial=segs[0].log_c)) for cap in caps]
    in_m1 = not _keeps_growing(avg_sups)
    log_ratio = evaluate_log(p, lts) + lts - _log_log1p_exp(lts)
    quarter = max(1, len(lts) // 4)
    little_o = float(np.max(log_ratio[-quarter:])) < float(np.max(log_ratio[:quarter])) + math.log(0.5)
    return Membership(
        in_weak, math.exp(sup_tmu) if in_weak else math.inf,
        in_m1, math.exp(sup_avg) if in_m1 else math.inf, little_o,
    )


# -- serialisation --------------------------------------------------------------


def profile_to_dict(p: PiecewiseProfile) -> dict:
    return {
        "name": p.name,
        "segments": [s.to_json() for s in p.segments],
        "generator": "none" if p.generator is None else p.generator.to_json(),
    }


def _parse_coded(raw, where: str, allow_inf: bool) -> Coded:
    if raw == "inf":
        if not allow_inf:
            raise ProfileError(f"{where}: 'inf' not allowed here")
        return INFINITY
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return Coded(0, float(raw))
    if not isinstance(raw, dict) or set(raw) != {"level", "value"}:
        raise ProfileError(f"{where}: expected {{level, value}}, a number or 'inf'")
    level, value = raw["level"], raw["value"]
    if level not in (0, 1, 2) or isinstance(level, bool):
        raise ProfileError(f"{where}.level: must be 0, 1 or 2")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ProfileError(f"{where}.value: must be a number")
    try:
        return Coded(int(level), float(value))
    except ProfileError as exc:
        raise ProfileError(f"{where}: {exc}") from None


def _parse_generator(raw, where: str) -> Optional[Generator]:
    if raw in (None, "none"):
        return None
    if isinstance(raw, str):
        if raw not in GENERATORS:
            raise ProfileError(f"{where}: unknown generator {raw!r}")
        return GENERATORS[raw]()
    if isinstance(raw, dict) and raw.get("name") in GENERATORS:
        base = GENERATORS[raw["name"]]()
        return TransformedGenerator(base, float(raw.get("scale", 1.0)), float(raw.get("power", 1.0)))
    raise ProfileError(f"{where}: malformed generator")


def profile_from_dict(data: dict) -> PiecewiseProfile:
    if not isinstance(data, dict):
        raise ProfileError("profile: expected a JSON object")
    unknown = set(data) - {"name", "segments", "generator"}
    if unknown:
        raise ProfileError(f"profile: unknown fields {sorted(unknown)}")
    name = data.get("name", "profile")
    raw_segments = data.get("segments", [])
    if not isinstance(raw_segments, list):
        raise ProfileError("segments: expected a list")
    generator = _parse_generator(data.get("generator", "none"), "generator")
    segs = []
    for i, raw in enumerate(raw_segments):
        where = f"segments[{i}]"
        if not isinstance(raw, dict):
            raise ProfileError(f"{where}: expected an object")
        kind = raw.get("kind")
        if kind not in (CONSTANT, POWER):
            raise ProfileError(f"{where}.kind: must be 'constant' or 'power', got {kind!r}")
        allowed = {"kind", "c", "from", "to"} | ({"alpha"} if kind == POWER else set())
        extra = set(raw) - allowed
        if extra:
            raise ProfileError(f"{where}: unknown fields {sorted(extra)}")
        for key in ("c", "from", "to"):
            if key not in raw:
                raise ProfileError(f"{where}.{key}: missing")
        c = _parse_coded(raw["c"], f"{where}.c", allow_inf=False)
        if c.log == -math.inf:
            raise ProfileError(f"{where}.c: must be positive")
        alpha = 0.0
        if kind == POWER:
            if "alpha" not in raw or not isinstance(raw["alpha"], (int, float)):
                raise ProfileError(f"{where}.alpha: missing or not a number")
            alpha = float(raw["alpha"])
        segs.append(
            Segment(kind, c, _parse_coded(raw["from"], f"{where}.from", False),
                    _parse_coded(raw["to"], f"{where}.to", True), alpha)
        )
    if generator is not None and segs:
        raise ProfileError("profile: explicit segments cannot be combined with a generator")
    return PiecewiseProfile(str(name), tuple(segs), generator).validate()


def dumps_profile(p: PiecewiseProfile) -> str:
    return json.dumps(profile_to_dict(p), indent=2)


def loads_profile(text: str) -> PiecewiseProfile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return profile_from_dict(data)


def load_profile(path) -> PiecewiseProfile:
    return loads_profile(Path(path).read_text(encoding="utf-8"))


def save_profile(p: PiecewiseProfile, path) -> None:
    Path(path).write_text(dumps_profile(p) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SignedProfilePair:
    """Rearrangements of the positive and negative parts of a self-adjoint operator."""

    plus: PiecewiseProfile
    minus: PiecewiseProfile

    def validate(self) -> "SignedProfilePair":
        self.plus.validate()
        self.minus.validate()
        return self


def load_pair(plus_path, minus_path) -> SignedProfilePair:
    return SignedProfilePair(load_profile(plus_path), load_profile(minus_path)).validate()
