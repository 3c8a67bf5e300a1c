"""Extended-range scalars, the lower incomplete gamma function and grids."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Union

import numpy as np

from . import kernels

NEGATIVE, ZERO, POSITIVE = -1, 0, 1


@total_ordering
@dataclass(frozen=True)
class LogScalar:
    """A real number stored as a sign and the natural log of its magnitude.

    The magnitude is never exponentiated during arithmetic, so values such as
    ``exp(exp(30))`` can be added, multiplied and compared safely.
    """

    sign: int
    log_magnitude: float = 0.0

    def __post_init__(self):
        if self.sign not in (NEGATIVE, ZERO, POSITIVE):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign == ZERO:
            object.__setattr__(self, "log_magnitude", 0.0)
        elif not math.isfinite(self.log_magnitude):
            if self.log_magnitude == -math.inf:
                object.__setattr__(self, "sign", ZERO)
                object.__setattr__(self, "log_magnitude", 0.0)
            else:
                raise ValueError(f"log magnitude must be finite, got {self.log_magnitude!r}")

    @classmethod
    def from_float(cls, x: float) -> "LogScalar":
        if x == 0:
            return cls(ZERO)
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r}")
        return cls(POSITIVE if x > 0 else NEGATIVE, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_magnitude: float, sign: int = POSITIVE) -> "LogScalar":
        return cls(sign, log_magnitude)

    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(ZERO)

    @property
    def log(self) -> float:
        """log|x|, with ``-inf`` for zero."""
        return -math.inf if self.sign == ZERO else self.log_magnitude

    def __float__(self) -> float:
        if self.sign == ZERO:
            return 0.0
        return self.sign * kernels.safe_exp(self.log_magnitude)

    def __neg__(self) -> "LogScalar":
        return LogScalar(-self.sign, self.log_magnitude)

    def __abs__(self) -> "LogScalar":
        return LogScalar(abs(self.sign), self.log_magnitude)

    def __add__(self, other: "LogScalar") -> "LogScalar":
        other = as_logscalar(other)
        if self.sign == ZERO:
            return other
        if other.sign == ZERO:
            return self
        a, b = self.log_magnitude, other.log_magnitude
        if self.sign == other.sign:
            return LogScalar(self.sign, kernels.logaddexp(a, b))
        if a == b:
            return LogScalar(ZERO)
        if a > b:
            return LogScalar(self.sign, kernels.logsubexp(a, b))
        return LogScalar(other.sign, kernels.logsubexp(b, a))

    __radd__ = __add__

    def __sub__(self, other: "LogScalar") -> "LogScalar":
        return self + (-as_logscalar(other))

    def __rsub__(self, other) -> "LogScalar":
        return as_logscalar(other) - self

    def __mul__(self, other: "LogScalar") -> "LogScalar":
        other = as_logscalar(other)
        if self.sign == ZERO or other.sign == ZERO:
            return LogScalar(ZERO)
        return LogScalar(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    __rmul__ = __mul__

    def __truediv__(self, other: "LogScalar") -> "LogScalar":
        other = as_logscalar(other)
        if other.sign == ZERO:
            raise ZeroDivisionError("LogScalar division by zero")
        if self.sign == ZERO:
            return LogScalar(ZERO)
        return LogScalar(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def __rtruediv__(self, other) -> "LogScalar":
        return as_logscalar(other) / self

    def __pow__(self, exponent: float) -> "LogScalar":
        if self.sign == NEGATIVE:
            raise ValueError("fractional power of a negative LogScalar")
        if self.sign == ZERO:
            if exponent <= 0:
                raise ZeroDivisionError("non-positive power of zero")
            return self
        return LogScalar(POSITIVE, self.log_magnitude * exponent)

    def cmp(self, other: "LogScalar") -> int:
        other = as_logscalar(other)
        if self.sign != other.sign:
            return -1 if self.sign < other.sign else 1
        if self.sign == ZERO or self.log_magnitude == other.log_magnitude:
            return 0
        bigger = self.log_magnitude > other.log_magnitude
        if self.sign == POSITIVE:
            return 1 if bigger else -1
        return -1 if bigger else 1

    def __lt__(self, other) -> bool:
        return self.cmp(other) < 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, (LogScalar, int, float)):
            return NotImplemented
        return self.cmp(other) == 0

    def __hash__(self) -> int:
        return hash((self.sign, self.log_magnitude))

    def __repr__(self) -> str:
        if self.sign == ZERO:
            return "LogScalar(0)"
        s = "-" if self.sign == NEGATIVE else ""
        return f"LogScalar({s}exp({self.log_magnitude!r}))"


Scalar = Union[LogScalar, float, int]


def as_logscalar(x: Scalar) -> LogScalar:
    if isinstance(x, LogScalar):
        return x
    return LogScalar.from_float(float(x))


def logscalar_arith(a: LogScalar, b: LogScalar, op: str):
    """Apply ``op`` in {"add", "sub", "mul", "div", "cmp"} to two LogScalars.

    ``cmp`` returns -1, 0 or 1; the others return a LogScalar. Division by a
    zero LogScalar raises ``ZeroDivisionError``.
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "cmp":
        return a.cmp(b)
    raise ValueError(f"unknown operation {op!r}")


def _log_of(x: Scalar) -> float:
    if isinstance(x, LogScalar):
        if x.sign == NEGATIVE:
            raise ValueError("negative argument")
        return x.log
    x = float(x)
    if x < 0:
        raise ValueError("negative argument")
    if x == 0:
        return -math.inf
    return math.log(x)


def lower_incomplete_gamma(a: float, x: Scalar) -> float:
    """gamma(a, x) = int_0^x u^(a-1) e^(-u) du.

    ``x`` may be a float (``math.inf`` allowed) or a LogScalar. Uses the power
    series below ``x = a + 1`` and the Legendre continued fraction above.
    """
    if not a > 0:
        raise ValueError(f"lower_incomplete_gamma needs a > 0, got {a!r}")
    return kernels.safe_exp(kernels.log_lower_gamma(float(a), _log_of(x)))


def upper_incomplete_gamma(a: float, x: Scalar) -> float:
    """Gamma(a, x) = int_x^inf u^(a-1) e^(-u) du."""
    if not a > 0:
        raise ValueError(f"upper_incomplete_gamma needs a > 0, got {a!r}")
    return kernels.safe_exp(kernels.log_upper_gamma(float(a), _log_of(x)))


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid in a coordinate ``x``.

    ``level`` 1 means the argument is ``exp(x)``; level 2 means
    ``exp(exp(x))``. Around each refinement point the density is doubled
    within ``refinement_halfwidth`` and the point itself is inserted.
    """

    level: int
    x_min: float
    x_max: float
    points_per_unit: int
    refinement_points: tuple = field(default=())
    refinement_halfwidth: float = 0.5

    def __post_init__(self):
        if self.level not in (1, 2):
            raise ValueError(f"grid level must be 1 or 2, got {self.level!r}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got {self.x_min} >= {self.x_max}")
        if int(self.points_per_unit) != self.points_per_unit or self.points_per_unit < 1:
            raise ValueError("points_per_unit must be a positive integer")
        object.__setattr__(self, "refinement_points", tuple(float(r) for r in self.refinement_points))

    def describe(self) -> str:
        text = f"{self.level}:{self.x_min!r}:{self.x_max!r}:{self.points_per_unit}"
        if self.refinement_points:
            text += f" refine={list(self.refinement_points)}"
        return text

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "points_per_unit": self.points_per_unit,
            "refinement_points": list(self.refinement_points),
            "refinement_halfwidth": self.refinement_halfwidth,
        }

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``LEVEL:XMIN:XMAX:PPU``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"grid must look like LEVEL:XMIN:XMAX:PPU, got {text!r}")
        return cls(int(parts[0]), float(parts[1]), float(parts[2]), int(parts[3]))


def grid_coordinates(spec: GridSpec) -> np.ndarray:
    """Strictly increasing grid coordinates ``x``."""
    n = max(1, int(round((spec.x_max - spec.x_min) * spec.points_per_unit)))
    base = np.linspace(spec.x_min, spec.x_max, n + 1)
    extra = []
    for r in spec.refinement_points:
        if not spec.x_min <= r <= spec.x_max:
            continue
        extra.append(r)
        lo, hi = r - spec.refinement_halfwidth, r + spec.refinement_halfwidth
        mids = 0.5 * (base[:-1] + base[1:])
        extra.extend(mids[(mids >= lo) & (mids <= hi)])
    if extra:
        base = np.unique(np.concatenate([base, np.asarray(extra, dtype=float)]))
    return base


def log_arguments(x: np.ndarray, level: int) -> np.ndarray:
    """Natural log of the grid arguments for coordinates ``x``."""
    x = np.asarray(x, dtype=float)
    if level == 1:
        return x.copy()
    if level == 2:
        return np.exp(x)
    if level == 0:
        return np.log(x)
    raise ValueError(f"unknown grid level {level!r}")


def make_grid(spec: GridSpec) -> list[LogScalar]:
    """Grid arguments as LogScalars (``exp(x)`` or ``exp(exp(x))``)."""
    return [LogScalar.from_log(float(v)) for v in log_arguments(grid_coordinates(spec), spec.level)]
