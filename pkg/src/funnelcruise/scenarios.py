"""Leader trajectories and preset traffic scenarios.

Leader motion is piecewise constant acceleration.  Velocity is clamped at
zero: a braking segment that would reverse the leader instead brings it to a
standstill for the rest of the segment.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .controller import ControllerConfig, LeaderState, classify_region, distance_error
from .dynamics import Constant, VehicleParams, force_free_params, table1_params
from .funnel import constant_funnel, exponential_funnel


@dataclass(frozen=True)
class SimState:
    t: float
    x: float
    v: float


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    h_init: float = 1e-4
    h_min: float = 1e-10
    h_max: float = 0.5
    output_dt: float = 0.01

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if not self.output_dt > 0:
            raise ValueError("output_dt must be positive")


@dataclass(frozen=True)
class LeaderProfile:
    """Leader kinematics from an initial state and ``(duration, accel)`` segments.

    After the last segment the leader keeps its final velocity.
    """

    x0_l: float
    v0_l: float
    segments: tuple[tuple[float, float], ...] = ()
    _pieces: tuple = field(init=False, repr=False, compare=False)
    _starts: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple((float(d), float(a)) for d, a in self.segments)
        object.__setattr__(self, "segments", segs)
        if self.v0_l < 0:
            raise ValueError("initial leader velocity must be non-negative")
        if any(not d > 0 for d, _ in segs):
            raise ValueError("segment durations must be positive")
        pieces = _build_pieces(self.x0_l, self.v0_l, segs)
        object.__setattr__(self, "_pieces", pieces)
        object.__setattr__(self, "_starts", tuple(p[0] for p in pieces))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Times where the leader acceleration changes."""
        return tuple(p[0] for p in self._pieces[1:])

    def state(self, t: float) -> LeaderState:
        i = bisect.bisect_right(self._starts, t) - 1
        t0, x0, v0, a = self._pieces[max(i, 0)]
        s = t - t0
        return LeaderState(x0 + v0 * s + 0.5 * a * s * s, v0 + a * s)

    def position(self, t: float) -> float:
        i = bisect.bisect_right(self._starts, t) - 1
        t0, x0, v0, a = self._pieces[max(i, 0)]
        s = t - t0
        return x0 + v0 * s + 0.5 * a * s * s

    def __call__(self, t: float) -> LeaderState:
        return self.state(t)


def _build_pieces(x0, v0, segments):
    pieces = []
    t, x, v = 0.0, float(x0), float(v0)
    for duration, a in segments:
        if a < 0 and v + a * duration < 0:
            t_stop = -v / a
            pieces.append((t, x, v, a))
            x += v * t_stop + 0.5 * a * t_stop * t_stop
            t += t_stop
            v = 0.0
            pieces.append((t, x, 0.0, 0.0))
            t += duration - t_stop
        else:
            pieces.append((t, x, v, a))
            x += v * duration + 0.5 * a * duration * duration
            v += a * duration
            t += duration
    pieces.append((t, x, v, 0.0))
    # drop zero-length pieces so bisect never lands on them
    out = []
    for p in pieces:
        if out and p[0] <= out[-1][0]:
            out[-1] = p
        else:
            out.append(p)
    return tuple(out)


def leader_state(p: LeaderProfile, t: float) -> LeaderState:
    return p.state(t)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    plant: VehicleParams
    controller: ControllerConfig
    leader: LeaderProfile
    init: SimState
    t_end: float = 50.0
    integ: IntegratorConfig = field(default_factory=IntegratorConfig)


def reference_controller(**overrides) -> ControllerConfig:
    """Controller used by all presets: 0.5 s time gap, 2 m standstill margin,
    36 m/s favourite velocity, exponentially shrinking velocity funnel and a
    constant 4 m distance funnel."""
    values = dict(lambda1=0.5, lambda2=2.0, v_ref=Constant(36.0),
                  phi_v=exponential_funnel(22.5, 0.2, 0.2), phi_d=constant_funnel(0.25))
    values.update(overrides)
    return ControllerConfig(**values)


# Leader profiles are designed reconstructions of the qualitative scenarios;
# the exact published leader curves are not available.
_LEADERS = {
    # ahead and faster than the follower, settles at 30 m/s where it is caught
    # up, later pulls away at 40 m/s
    1: LeaderProfile(100.0, 20.0, ((5.0, 0.0), (10.0, 1.0), (20.0, 0.0), (5.0, 2.0))),
    # cruises at 25 m/s, then full brake at -8 m/s^2 to standstill
    2: LeaderProfile(100.0, 25.0, ((25.0, 0.0), (20.0, -8.0))),
    # strongly varying acceleration
    3: LeaderProfile(100.0, 25.0, ((15.0, 0.0), (3.0, 3.0), (4.0, -4.0), (3.0, 4.0),
                                   (4.0, -5.0), (5.0, 3.0))),
}


def scenario_preset(scenario_id: int) -> ScenarioConfig:
    if scenario_id not in _LEADERS:
        raise KeyError(f"unknown scenario id {scenario_id!r}; expected 1, 2 or 3")
    return ScenarioConfig(
        name=f"scenario{scenario_id}",
        plant=table1_params(),
        controller=reference_controller(),
        leader=_LEADERS[scenario_id],
        init=SimState(0.0, 0.0, 15.0),
        t_end=50.0,
        integ=IntegratorConfig(),
    )


def frozen_scenario(t_end: float = 10.0) -> ScenarioConfig:
    """All forces off, follower starts at the favourite velocity, leader far away."""
    return ScenarioConfig(
        name="frozen",
        plant=force_free_params(),
        controller=reference_controller(),
        leader=LeaderProfile(1e6, 0.0),
        init=SimState(0.0, 0.0, 36.0),
        t_end=t_end,
    )


def validate_scenario(s: ScenarioConfig) -> list[str]:
    """Violated invariants of ``s`` as readable messages; empty if valid."""
    out = []
    c, p = s.controller, s.plant
    if not c.lambda1 > 0:
        out.append("lambda1 must be positive")
    if not c.lambda2 > 0:
        out.append("lambda2 must be positive")
    if c.saturation is not None and not c.saturation[0] < 0 < c.saturation[1]:
        out.append("saturation bounds need u_min < 0 < u_max")
    if not p.m > 0:
        out.append("plant mass m must be positive")
    if not p.area > 0:
        out.append("plant frontal area must be positive")
    if not p.alpha > 0:
        out.append("friction smoothing alpha must be positive")
    if not s.t_end > 0:
        out.append("t_end must be positive")
    if c.v_ref(0.0) < 0:
        out.append("v_ref must be non-negative")
    if not c.phi_d.phi(0.0) > 0:
        out.append("phi_d(0) must be positive")
    if s.init.t != 0.0:
        out.append("initial time must be 0")
    if not (math.isfinite(s.init.x) and math.isfinite(s.init.v)):
        out.append("initial state must be finite")
    if out:
        return out

    leader = s.leader.state(0.0)
    if classify_region(c, 0.0, s.init.x, s.init.v, leader) is None:
        e_d = distance_error(c, 0.0, s.init.x, s.init.v, leader)
        if e_d >= c.phi_d.boundary(0.0):
            out.append("initial distance error outside distance funnel (safety distance violated)")
        else:
            out.append("initial velocity error outside velocity funnel")
    return out


def with_overrides(s: ScenarioConfig, **changes) -> ScenarioConfig:
    return replace(s, **changes)


def sign_alternations(accels: Sequence[float]) -> int:
    signs = [a > 0 for a in accels if a != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)
