"""Funnel functions, performance funnels and the funnel gain law.

A funnel function ``phi`` is positive for ``t > 0`` and bounded; the funnel
boundary is ``psi = 1/phi`` and the performance funnel is the set of
``(t, e)`` with ``phi(t) * |e| < 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import FunnelPoleError, SingularGainError


@dataclass(frozen=True)
class ExpReciprocal:
    """phi(t) = 1 / (scale * exp(-rate * t) + offset).

    The boundary decays exponentially from ``scale + offset`` to ``offset``.
    """

    scale: float
    rate: float
    offset: float

    def __call__(self, t: float) -> float:
        return 1.0 / (self.scale * math.exp(-self.rate * t) + self.offset)


@dataclass(frozen=True)
class ConstantPhi:
    value: float

    def __call__(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class FunnelSpec:
    """A funnel function with its boundary and membership predicate.

    ``phi`` is any callable of time.  The class-Phi regularity conditions are
    not checked for user callables; the built-in shapes satisfy them.
    ``allows_zero_at_origin`` permits ``phi(0) == 0``, i.e. a boundary with a
    pole at ``t = 0`` that places no restriction on the initial error.
    """

    phi: Callable[[float], float]
    phi_deriv_bound: float = math.inf
    allows_zero_at_origin: bool = False

    def __post_init__(self):
        if not self.allows_zero_at_origin and not self.phi(0.0) > 0:
            raise ValueError("phi(0) must be positive unless allows_zero_at_origin is set")

    def boundary(self, t: float) -> float:
        p = self.phi(t)
        if p <= 0.0:
            raise FunnelPoleError(f"funnel boundary has a pole at t={t!r} (phi={p!r})")
        return 1.0 / p

    def in_funnel(self, t: float, e: float) -> bool:
        return self.phi(t) * abs(e) < 1.0

    def gain(self, t: float, e: float) -> float:
        """Funnel gain ``1 / (1 - phi(t)^2 e^2)``; raises outside the funnel."""
        pe = self.phi(t) * e
        den = 1.0 - pe * pe
        if not den > 0.0:
            raise SingularGainError(f"error {e!r} is not inside the funnel at t={t!r}")
        return 1.0 / den

    def margin(self, t: float, e: float) -> float:
        """Signed distance ``psi(t) - e`` to the upper boundary."""
        return self.boundary(t) - e


def exponential_funnel(scale: float, rate: float, offset: float) -> FunnelSpec:
    if not (scale >= 0 and rate >= 0 and offset > 0):
        raise ValueError("need scale >= 0, rate >= 0 and offset > 0")
    return FunnelSpec(ExpReciprocal(float(scale), float(rate), float(offset)),
                      phi_deriv_bound=scale * rate / offset ** 2)


def constant_funnel(value: float) -> FunnelSpec:
    if not value > 0:
        raise ValueError(f"constant funnel function must be positive, got {value}")
    return FunnelSpec(ConstantPhi(float(value)), phi_deriv_bound=0.0)


# Module-level aliases mirroring the method names.

def boundary(f: FunnelSpec, t: float) -> float:
    return f.boundary(t)


def in_funnel(f: FunnelSpec, t: float, e: float) -> bool:
    return f.in_funnel(t, e)


def gain(f: FunnelSpec, t: float, e: float) -> float:
    return f.gain(t, e)


def margin(f: FunnelSpec, t: float, e: float) -> float:
    return f.margin(t, e)
