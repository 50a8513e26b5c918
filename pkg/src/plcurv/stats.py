"""Monte Carlo estimate records and error propagation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Estimate:
    """A scalar estimate with its standard error.

    ``samples == 0`` marks a value obtained by exact evaluation.
    """

    value: float
    std_error: float = 0.0
    samples: int = 0
    rejections: int = 0

    @classmethod
    def from_values(cls, values, rejections: int = 0) -> "Estimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            raise ValueError("no samples")
        mean = float(values.mean())
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n, rejections)

    @classmethod
    def exact(cls, value: float) -> "Estimate":
        return cls(float(value), 0.0, 0, 0)

    @property
    def is_exact(self) -> bool:
        return self.samples == 0

    def scaled(self, factor: float) -> "Estimate":
        return replace(self, value=self.value * factor,
                       std_error=self.std_error * abs(factor))

    def __add__(self, other: "Estimate") -> "Estimate":
        return Estimate(self.value + other.value,
                        math.hypot(self.std_error, other.std_error),
                        self.samples + other.samples,
                        self.rejections + other.rejections)

    def __mul__(self, other: "Estimate") -> "Estimate":
        # independent factors, first-order propagation
        se = math.sqrt((other.value * self.std_error) ** 2
                       + (self.value * other.std_error) ** 2
                       + (self.std_error * other.std_error) ** 2)
        return Estimate(self.value * other.value, se,
                        self.samples + other.samples,
                        self.rejections + other.rejections)


MeasureEstimate = Estimate


def total(estimates) -> Estimate:
    out = Estimate.exact(0.0)
    for e in estimates:
        out = out + e
    return out


def combined_error(a: Estimate, b: Estimate) -> float:
    return math.hypot(a.std_error, b.std_error)


@dataclass
class Report:
    """Serializable record of one estimated quantity."""

    name: str
    estimate: Estimate
    seed: int | None = None
    exact: float | None = None
    passed: bool | None = None
    params: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.estimate.value

    @property
    def std_error(self) -> float:
        return self.estimate.std_error

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.estimate.value,
            "std_error": self.estimate.std_error,
            "samples": self.estimate.samples,
            "exact": self.exact,
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    """Comparison of two estimates of the same quantity.

    The check passes when ``|lhs - rhs| <= max(abs_tol, rel_tol * |rhs|,
    sigmas * combined_std_error)``.
    """

    name: str
    lhs: Estimate
    rhs: Estimate
    abs_tol: float = 1e-9
    rel_tol: float = 0.0
    sigmas: float = 4.0
    details: dict = field(default_factory=dict)

    @property
    def abs_diff(self) -> float:
        return abs(self.lhs.value - self.rhs.value)

    @property
    def rel_diff(self) -> float:
        if self.rhs.value == 0:
            return math.inf if self.abs_diff else 0.0
        return self.abs_diff / abs(self.rhs.value)

    @property
    def threshold(self) -> float:
        return max(self.abs_tol, self.rel_tol * abs(self.rhs.value),
                   self.sigmas * combined_error(self.lhs, self.rhs))

    @property
    def passed(self) -> bool:
        return self.abs_diff <= self.threshold

    @property
    def rejections(self) -> int:
        return self.lhs.rejections + self.rhs.rejections

    def results(self) -> list[dict]:
        rows = []
        # an exact right side is the target for the left side too
        target = self.rhs.value if self.rhs.is_exact else None
        for side, est in (("lhs", self.lhs), ("rhs", self.rhs)):
            rows.append({
                "name": f"{self.name}.{side}",
                "value": est.value,
                "std_error": est.std_error,
                "samples": est.samples,
                "exact": est.value if est.is_exact else target,
                "pass": self.passed,
            })
        return rows
