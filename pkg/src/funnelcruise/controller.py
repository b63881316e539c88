"""The funnel cruise control law.

Two funnel controllers are combined:

* velocity funnel controller ``u_v = -k_v e_v`` with ``e_v = v - v_ref``;
* distance funnel controller ``u_d = -k_d e_d`` with
  ``e_d = x - x_l + x_safe + psi_d`` and ``x_safe = lambda1 v + lambda2``,
  i.e. ``e_d`` is the tracking error of the weighted output ``lambda1 v + x``.

The active law depends on which region of the admissible set the state is in:

=========  ===============================================  ===================
region     condition                                        control
=========  ===============================================  ===================
V          ``e_d <= -psi_d`` and ``e_v`` in velocity funnel  ``u_v``
D          ``e_v <= -psi_v`` and ``e_d`` in distance funnel  ``u_d``
VD         both errors inside their funnels                 ``min(u_v, u_d)``
=========  ===============================================  ===================

The three conditions are mutually exclusive.  Anything else is outside the
admissible set and the law is undefined there.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .dynamics import Constant
from .errors import OutsideDomainError
from .funnel import FunnelSpec


class Region(str, enum.Enum):
    VELOCITY = "V"
    DISTANCE = "D"
    OVERLAP = "VD"
    # only produced in saturated mode, where the law is extended past the funnels
    OUTSIDE = "OUT"

    def __str__(self):
        return self.value


class LeaderState(NamedTuple):
    x_l: float
    v_l: float


@dataclass(frozen=True)
class ControllerConfig:
    """Tuning of the funnel cruise controller.

    ``lambda1`` [s] and ``lambda2`` [m] define the safety distance
    ``lambda1 v + lambda2``.  ``saturation`` optionally clamps the applied force
    to ``(u_min, u_max)``.  Range checks live in
    :func:`funnelcruise.scenarios.validate_scenario`.
    """

    lambda1: float
    lambda2: float
    phi_v: FunnelSpec
    phi_d: FunnelSpec
    v_ref: Callable[[float], float] = field(default_factory=lambda: Constant(36.0))
    saturation: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.saturation is not None:
            object.__setattr__(self, "saturation", tuple(float(b) for b in self.saturation))

    def x_safe(self, v: float) -> float:
        return self.lambda1 * v + self.lambda2


@dataclass(frozen=True)
class ControlOutput:
    u: float
    u_saturated: float
    e_v: float
    e_d: float
    k_v: Optional[float]
    k_d: Optional[float]
    region: Region
    psi_v: float
    psi_d: float


def _psi(phi: float) -> float:
    return 1.0 / phi if phi > 0.0 else math.inf


def velocity_error(cfg: ControllerConfig, t: float, v: float) -> float:
    return v - cfg.v_ref(t)


def distance_error(cfg: ControllerConfig, t: float, x: float, v: float,
                   leader: LeaderState) -> float:
    return x - leader.x_l + cfg.lambda1 * v + cfg.lambda2 + cfg.phi_d.boundary(t)


def _region(e_v, e_d, psi_v, psi_d):
    in_v = abs(e_v) < psi_v
    in_d = abs(e_d) < psi_d
    if in_v and e_d <= -psi_d:
        return Region.VELOCITY
    if in_d and e_v <= -psi_v:
        return Region.DISTANCE
    if in_v and in_d:
        return Region.OVERLAP
    return None


def classify_region(cfg: ControllerConfig, t: float, x: float, v: float,
                    leader: LeaderState) -> Optional[Region]:
    """Region containing ``(t, x, v)``, or ``None`` outside the admissible set."""
    psi_v = _psi(cfg.phi_v.phi(t))
    psi_d = cfg.phi_d.boundary(t)
    e_v = v - cfg.v_ref(t)
    e_d = x - leader.x_l + cfg.lambda1 * v + cfg.lambda2 + psi_d
    return _region(e_v, e_d, psi_v, psi_d)


def saturate(u: float, u_min: float, u_max: float) -> float:
    if u >= u_max:
        return u_max
    if u <= u_min:
        return u_min
    return u


def law(cfg: ControllerConfig, t: float, x: float, v: float, x_l: float,
        guard: float = 0.0) -> tuple:
    """Control law at ``(t, x, v)`` with leader position ``x_l``.

    Returns the fields of :class:`ControlOutput` as a plain tuple (this is
    the simulator's inner loop).

    Only the gains of the active branch are computed.  States outside the
    admissible set, or whose active funnel errors satisfy
    ``phi |e| >= 1 - guard``, raise :class:`OutsideDomainError`.

    With saturation configured the law is extended instead: a branch at its
    gain singularity is worth ``+inf`` (error below the funnel) or ``-inf``
    (above), and outside the admissible set the applied force is ``u_min`` if
    an error is above its funnel and ``u_max`` otherwise.  These are the limits
    of the saturated signal at the funnel boundaries.
    """
    phi_v = cfg.phi_v.phi(t)
    phi_d = cfg.phi_d.phi(t)
    psi_v = _psi(phi_v)
    psi_d = 1.0 / phi_d
    e_v = v - cfg.v_ref(t)
    e_d = x - x_l + cfg.lambda1 * v + cfg.lambda2 + psi_d
    region = _region(e_v, e_d, psi_v, psi_d)
    sat = cfg.saturation
    if region is None:
        if sat is None:
            raise OutsideDomainError(t, x, v, _violation(e_v, e_d, psi_v, psi_d))
        u = -math.inf if (e_v >= psi_v or e_d >= psi_d) else math.inf
        return (u, saturate(u, *sat), e_v, e_d, None, None,
                Region.OUTSIDE, psi_v, psi_d)

    limit = 1.0 - guard
    k_v = k_d = None
    u_v = u_d = math.inf
    if region is not Region.DISTANCE:
        s = phi_v * e_v
        if abs(s) < limit:
            k_v = 1.0 / (1.0 - s * s)
            u_v = -k_v * e_v
        elif sat is None:
            raise OutsideDomainError(t, x, v, "velocity error at the velocity funnel boundary")
        else:
            u_v = -math.copysign(math.inf, e_v)
    if region is not Region.VELOCITY:
        s = phi_d * e_d
        if abs(s) < limit:
            k_d = 1.0 / (1.0 - s * s)
            u_d = -k_d * e_d
        elif sat is None:
            raise OutsideDomainError(t, x, v, "distance error at the distance funnel boundary")
        else:
            u_d = -math.copysign(math.inf, e_d)

    u = min(u_v, u_d)
    u_sat = u if sat is None else saturate(u, *sat)
    return (u, u_sat, e_v, e_d, k_v, k_d, region, psi_v, psi_d)


def evaluate(cfg: ControllerConfig, t: float, x: float, v: float, x_l: float,
             guard: float = 0.0) -> ControlOutput:
    """:func:`law` packaged as a :class:`ControlOutput`."""
    return ControlOutput(*law(cfg, t, x, v, x_l, guard))


def _violation(e_v, e_d, psi_v, psi_d):
    if e_v >= psi_v:
        return "velocity error above the velocity funnel"
    if e_d >= psi_d:
        return "distance error above the distance funnel (safety distance)"
    if e_v <= -psi_v and e_d <= -psi_d:
        return "velocity below the velocity funnel while the distance funnel is inactive"
    return "state in neither funnel"


def control(cfg: ControllerConfig, t: float, x: float, v: float,
            leader: LeaderState) -> ControlOutput:
    """Funnel cruise control output at ``(t, x, v)`` given the leader state.

    Raises :class:`OutsideDomainError` when the state is not admissible.
    """
    return evaluate(cfg, t, x, v, leader.x_l)
