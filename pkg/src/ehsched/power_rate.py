"""Power-rate functions g(r) and the helpers built on them.

A model maps an instantaneous rate (bits/s) to transmit power (W). Every model
must be convex, strictly increasing and satisfy g(0) = 0. Two families are
provided; anything else exposing ``power``/``slope_at_zero`` works with the
generic bisection inverse.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Protocol, Union

__all__ = [
    "DomainError",
    "NoSolutionError",
    "DegenerateInputWarning",
    "Shannon",
    "Monomial",
    "PowerRateModel",
    "power",
    "rate",
    "max_bits",
    "even_allocation",
    "model_from_dict",
    "model_to_dict",
]

MAX_BISECTION_ITERS = 200
_LN2 = math.log(2.0)


class DomainError(ValueError):
    """Argument outside the domain of a power-rate operation."""


class NoSolutionError(ArithmeticError):
    """The requested allocation has no solution (e.g. not enough energy)."""


class DegenerateInputWarning(UserWarning):
    pass


class _Model(Protocol):
    def power(self, r: float) -> float: ...

    def slope_at_zero(self) -> float: ...


@dataclass(frozen=True)
class Shannon:
    """AWGN capacity inverse: g(r) = N0*W * (2^(r/W) - 1)."""

    bandwidth: float = 1.0
    noise_power: float = 1.0

    def __post_init__(self):
        if not (self.bandwidth > 0 and self.noise_power > 0):
            raise DomainError("bandwidth and noise_power must be positive")

    def power(self, r: float) -> float:
        try:
            return self.noise_power * math.expm1(r / self.bandwidth * _LN2)
        except OverflowError:
            return math.inf

    def inverse(self, p: float) -> float:
        return self.bandwidth * math.log1p(p / self.noise_power) / _LN2

    def slope_at_zero(self) -> float:
        return self.noise_power * _LN2 / self.bandwidth


@dataclass(frozen=True)
class Monomial:
    """g(r) = scale * r^exponent with exponent > 1."""

    exponent: float = 2.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.exponent > 1 and self.scale > 0):
            raise DomainError("monomial model needs exponent > 1 and scale > 0")

    def power(self, r: float) -> float:
        try:
            return self.scale * r**self.exponent
        except OverflowError:
            return math.inf

    def inverse(self, p: float) -> float:
        return (p / self.scale) ** (1.0 / self.exponent)

    def slope_at_zero(self) -> float:
        return 0.0


PowerRateModel = Union[Shannon, Monomial]


def power(model: _Model, r: float) -> float:
    if r < 0:
        raise DomainError(f"negative rate {r!r}")
    return model.power(r)


def _bisect_inverse(model: _Model, p: float) -> float:
    lo, hi = 0.0, 1.0
    while model.power(hi) < p:
        hi *= 2.0
        if hi > 1e300:
            raise NoSolutionError("power out of range")
    for _ in range(MAX_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if model.power(mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            return 0.5 * (lo + hi)
    raise NoSolutionError("bisection did not converge")


def rate(model: _Model, p: float) -> float:
    """Inverse of :func:`power`."""
    if p < 0:
        raise DomainError(f"negative power {p!r}")
    if p == 0:
        return 0.0
    inv = getattr(model, "inverse", None)
    if inv is not None:
        return inv(p)
    return _bisect_inverse(model, p)


def max_bits(model: _Model, energy: float, t: float) -> float:
    """Bits deliverable by time ``t`` spending ``energy`` at constant rate."""
    if energy < 0:
        raise DomainError(f"negative energy {energy!r}")
    if t <= 0:
        if t < 0:
            raise DomainError(f"negative time {t!r}")
        if energy > 0:
            warnings.warn("max_bits evaluated at t=0", DegenerateInputWarning, stacklevel=2)
        return 0.0
    return rate(model, energy / t) * t


def even_allocation(model: _Model, data: float, energy: float) -> tuple[float, float]:
    """Constant-rate transmission of ``data`` bits that spends exactly ``energy``.

    Returns ``(duration, rate)`` with ``power(rate) * duration == energy``.
    Raises :class:`NoSolutionError` when the energy cannot carry the data at
    any rate, which for models with ``g'(0) > 0`` happens once
    ``data * g'(0) >= energy``.
    """
    if data < 0 or energy < 0:
        raise DomainError("data and energy must be non-negative")
    if data == 0:
        return 0.0, 0.0
    if energy == 0:
        raise NoSolutionError("no energy for positive data")
    # energy per bit at rate r is g(r)/r, increasing from g'(0)
    per_bit = energy / data
    if per_bit <= model.slope_at_zero():
        raise NoSolutionError("energy cannot carry the data at any rate")
    if isinstance(model, Monomial):
        r = (per_bit / model.scale) ** (1.0 / (model.exponent - 1.0))
        return data / r, r
    lo, hi = 0.0, 1.0
    while model.power(hi) / hi < per_bit:
        lo, hi = hi, hi * 2.0
    for _ in range(MAX_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi or hi - lo <= 4e-16 * hi:
            break
        if model.power(mid) / mid < per_bit:
            lo = mid
        else:
            hi = mid
    else:
        raise NoSolutionError("even allocation bisection did not converge")
    r = 0.5 * (lo + hi)
    return data / r, r


def model_from_dict(spec: dict) -> PowerRateModel:
    kind = spec.get("kind", "shannon")
    params = spec.get("params", {}) or {}
    if kind == "shannon":
        return Shannon(float(params.get("bandwidth", 1.0)), float(params.get("noise_power", 1.0)))
    if kind == "monomial":
        return Monomial(float(params.get("exponent", 2.0)), float(params.get("scale", 1.0)))
    raise DomainError(f"unknown power-rate model {kind!r}")


def model_to_dict(model: PowerRateModel) -> dict:
    if isinstance(model, Shannon):
        return {"kind": "shannon", "params": {"bandwidth": model.bandwidth, "noise_power": model.noise_power}}
    if isinstance(model, Monomial):
        return {"kind": "monomial", "params": {"exponent": model.exponent, "scale": model.scale}}
    raise DomainError(f"cannot serialise {model!r}")
