"""Longitudinal follower-vehicle model.

    x' = v
    m v' = u - F_g(t) - F_a(t, v) - F_r(v) + delta(t)

with gravity ``F_g = m g sin(theta)``, aerodynamic drag ``F_a = rho C_d A v**2 / 2``
and rolling friction smoothed as ``F_r = m g C_r erf(alpha v)``.  All quantities
are SI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

TimeFunction = Callable[[float], float]

GRAVITY = 9.81


@dataclass(frozen=True)
class Constant:
    """Time function returning a fixed value; comparable and serialisable."""

    value: float

    def __call__(self, t: float) -> float:
        return self.value


def constant(value: float) -> Constant:
    return Constant(float(value))


@dataclass(frozen=True)
class VehicleParams:
    """Physical constants and environment signals of the follower.

    ``theta``, ``rho`` and ``delta`` are callables of time (slope angle [rad],
    air density [kg/m^3], disturbance force [N]).
    """

    m: float
    c_d: float
    c_r: float
    area: float
    alpha: float = 100.0
    theta: TimeFunction = field(default_factory=lambda: Constant(0.0))
    rho: TimeFunction = field(default_factory=lambda: Constant(1.3))
    delta: TimeFunction = field(default_factory=lambda: Constant(0.0))
    g: float = GRAVITY


def table1_params(**overrides) -> VehicleParams:
    """Passenger-car parameters used in the reference scenarios."""
    values = dict(m=1300.0, c_d=0.32, c_r=0.01, area=2.4, alpha=100.0,
                  theta=Constant(0.0), rho=Constant(1.3), delta=Constant(0.0))
    values.update(overrides)
    return VehicleParams(**values)


def force_free_params(m: float = 1300.0) -> VehicleParams:
    """A plant with every resistive force and disturbance switched off."""
    return VehicleParams(m=m, c_d=0.0, c_r=0.0, area=1.0,
                         theta=Constant(0.0), rho=Constant(0.0), delta=Constant(0.0))


def erf_eval(z: float) -> float:
    # libm erf is accurate to a few ulp, far below the 1e-12 requirement
    return math.erf(z)


def gravity_force(p: VehicleParams, t: float) -> float:
    return p.m * p.g * math.sin(p.theta(t))


def aero_drag(p: VehicleParams, t: float, v: float) -> float:
    # even in v: the model does not flip sign for reversing vehicles
    return 0.5 * p.rho(t) * p.c_d * p.area * v * v


def rolling_friction(p: VehicleParams, v: float) -> float:
    return p.m * p.g * p.c_r * math.erf(p.alpha * v)


def accel_rhs(p: VehicleParams, t: float, v: float, u: float) -> float:
    """Acceleration of the follower under engine force ``u``."""
    resist = gravity_force(p, t) + aero_drag(p, t, v) + rolling_friction(p, v)
    return (u - resist + p.delta(t)) / p.m
