"""Integration of the closed loop ``x' = v, v' = a(t, v, u(t, x, v))``.

:func:`simulate` uses the Dormand-Prince 5(4) embedded pair with PI step-size
control and a componentwise max-norm error test.  The control law has a gain
singularity at the funnel boundaries, so every stage evaluation is guarded: a
stage that leaves the admissible set, or comes within ``DOMAIN_GUARD`` of a
funnel boundary, rejects the step.

The right-hand side is continuous but has kinks where the active branch of the
law changes (region seams and the switch inside the minimum).  Across a kink
the 5th- and 4th-order solutions share most of their error, so the embedded
estimate is too optimistic.  When the branch at the end of a step differs from
the one at its start, the step is also compared with two half steps and the
larger of the two error estimates decides.  The kink itself is not located.

Steps are cut so that they end exactly on the output grid and on the leader's
acceleration breakpoints; output rows are therefore integrator states, never
interpolants.

:func:`reference_simulate` is a plain fixed-step classical RK4 used as an
independent check of the adaptive path.
"""
from __future__ import annotations

import logging
import math
from dataclasses import replace
from typing import Callable, Iterable, Optional

from .controller import ControllerConfig, LeaderState, Region, evaluate, law
from .dynamics import Constant, VehicleParams, accel_rhs, gravity_force
from .errors import InitialConditionError, OutsideDomainError, StepCollapseError
from .scenarios import IntegratorConfig, SimState
from .trace import Trace, make_row

log = logging.getLogger(__name__)

LeaderFunction = Callable[[float], LeaderState]

DOMAIN_GUARD = 1e-12

SAFETY = 0.9
GROW_MAX = 5.0
SHRINK_MIN = 0.1
REJECT_OUTSIDE = 0.25
# PI controller exponents for a 5th-order pair (Hairer & Wanner, DOPRI5)
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between 5th- and embedded 4th-order weights
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)


def make_rhs(plant: VehicleParams, cfg: ControllerConfig, leader_at: LeaderFunction,
             guard: float = 0.0):
    """Closed-loop acceleration ``f(t, x, v)``; raises OutsideDomainError."""
    return _make_rhs(plant, cfg, leader_at, guard)[0]


def _branch(out):
    # which expression produced the applied force; a change of branch within a
    # step means the right-hand side has a kink there
    region = out[6]
    if region is Region.OVERLAP:
        region = "VD/v" if out[4] is not None and out[0] == -out[4] * out[2] else "VD/d"
    return region, out[0] != out[1]


def _make_rhs(plant, cfg, leader_at, guard):
    """Right-hand side plus a one-element list holding the law output of its last call."""
    position = getattr(leader_at, "position", None)
    if position is None:
        def position(t):
            return leader_at(t).x_l
    mark = [None]

    if all(isinstance(sig, Constant) for sig in (plant.theta, plant.rho, plant.delta)):
        # time-invariant environment: fold the constant force terms once
        m, alpha = plant.m, plant.alpha
        offset = plant.delta.value - gravity_force(plant, 0.0)
        drag = 0.5 * plant.rho.value * plant.c_d * plant.area
        fric = m * plant.g * plant.c_r
        erf = math.erf

        def rhs(t, x, v):
            out = law(cfg, t, x, v, position(t), guard)
            mark[0] = out
            return (out[1] - drag * v * v - fric * erf(alpha * v) + offset) / m
    else:
        def rhs(t, x, v):
            out = law(cfg, t, x, v, position(t), guard)
            mark[0] = out
            return accel_rhs(plant, t, v, out[1])
    return rhs, mark


def closed_loop_rhs(plant: VehicleParams, cfg: ControllerConfig, t: float, x: float,
                    v: float, leader_at: LeaderFunction) -> tuple[float, float]:
    return v, make_rhs(plant, cfg, leader_at)(t, x, v)


def output_times(t_end: float, output_dt: float) -> list[float]:
    n = int(math.floor(t_end / output_dt + 1e-9))
    times = [k * output_dt for k in range(n + 1)]
    if t_end - times[-1] > 1e-9 * max(1.0, t_end):
        times.append(t_end)
    else:
        times[-1] = t_end
    return times


def _merge_stops(grid: list[float], extra: Iterable[float], t_end: float) -> list[float]:
    tol = 1e-9
    stops = list(grid[1:])
    for b in extra:
        if 0.0 < b < t_end and all(abs(b - s) > tol for s in stops):
            stops.append(b)
    return sorted(stops)


def _check_initial(cfg, leader_at, x0, v0):
    unsat = replace(cfg, saturation=None)
    try:
        evaluate(unsat, 0.0, x0, v0, leader_at(0.0).x_l)
    except OutsideDomainError as exc:
        raise InitialConditionError(0.0, x0, v0, exc.reason) from None


def _dp_step(f, t, x, v, k1, h, t_new):
    """One Dormand-Prince step; returns the 5th-order state, the FSAL stage and
    the embedded error components."""
    x2, v2 = x + h * A21 * v, v + h * A21 * k1
    k2 = f(t + C2 * h, x2, v2)
    x3 = x + h * (A31 * v + A32 * v2)
    v3 = v + h * (A31 * k1 + A32 * k2)
    k3 = f(t + C3 * h, x3, v3)
    x4 = x + h * (A41 * v + A42 * v2 + A43 * v3)
    v4 = v + h * (A41 * k1 + A42 * k2 + A43 * k3)
    k4 = f(t + C4 * h, x4, v4)
    x5 = x + h * (A51 * v + A52 * v2 + A53 * v3 + A54 * v4)
    v5 = v + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)
    k5 = f(t + C5 * h, x5, v5)
    x6 = x + h * (A61 * v + A62 * v2 + A63 * v3 + A64 * v4 + A65 * v5)
    v6 = v + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)
    k6 = f(t + h, x6, v6)
    # position' = velocity, so the position stages are the velocity values
    x_new = x + h * (B1 * v + B3 * v3 + B4 * v4 + B5 * v5 + B6 * v6)
    v_new = v + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
    k7 = f(t_new, x_new, v_new)
    ex = h * (E1 * v + E3 * v3 + E4 * v4 + E5 * v5 + E6 * v6 + E7 * v_new)
    ev = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
    return x_new, v_new, k7, ex, ev


def simulate(plant: VehicleParams, cfg: ControllerConfig, integ: IntegratorConfig,
             init: SimState, leader_at: LeaderFunction, t_end: float,
             breakpoints: Optional[Iterable[float]] = None,
             record_steps: bool = True) -> Trace:
    """Adaptive closed-loop simulation over ``[init.t, t_end]``.

    Returns a :class:`Trace` with one row per ``integ.output_dt`` and, if
    ``record_steps``, one row per accepted step.  Breakpoints default to
    ``leader_at.breakpoints`` when available.

    Raises InitialConditionError if the initial state is not admissible and
    StepCollapseError (carrying the partial trace) if the step size falls
    below ``integ.h_min``.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if init.t != 0.0:
        raise ValueError("simulations start at t = 0")
    if breakpoints is None:
        breakpoints = getattr(leader_at, "breakpoints", ())
    x, v = float(init.x), float(init.v)
    _check_initial(cfg, leader_at, x, v)

    f, mark = _make_rhs(plant, cfg, leader_at, DOMAIN_GUARD)
    rtol, atol = integ.rel_tol, integ.abs_tol
    grid = output_times(t_end, integ.output_dt)
    stops = _merge_stops(grid, breakpoints, t_end)
    grid_set = set(grid)

    states = [(0.0, x, v)]
    out_states = [(0.0, x, v)]
    t = 0.0
    k1 = f(t, x, v)
    branch = _branch(mark[0])
    kink = False
    h = integ.h_init
    err_prev = 1e-4
    rejected = False
    n_reject = 0
    i_stop = 0

    while t < t_end:
        stop = stops[i_stop]
        h_eff = h
        hit = False
        if t + h_eff >= stop - integ.h_min:
            h_eff = stop - t
            hit = True

        try:
            t_new = stop if hit else t + h_eff
            x_new, v_new, k7, ex, ev = _dp_step(f, t, x, v, k1, h_eff, t_new)
            end_branch = _branch(mark[0])
            if end_branch != branch:
                # the embedded estimate is unreliable across a kink of the
                # right-hand side; compare against two half steps as well
                t_mid = t + 0.5 * h_eff
                xm, vm, km, _, _ = _dp_step(f, t, x, v, k1, 0.5 * h_eff, t_mid)
                x2, v2, _, _, _ = _dp_step(f, t_mid, xm, vm, km, 0.5 * h_eff, t_new)
                kink = True
        except OutsideDomainError as exc:
            n_reject += 1
            h = h_eff * REJECT_OUTSIDE
            rejected = True
            if h < integ.h_min:
                raise StepCollapseError(
                    f"step size below h_min={integ.h_min} at t={t!r}: {exc.reason}",
                    last_state=SimState(t, x, v), reason=exc.reason,
                    partial=_build_trace(cfg, leader_at, out_states, states,
                                         record_steps, partial=True,
                                         error=exc.reason)) from exc
            continue

        sx = atol + rtol * max(abs(x), abs(x_new))
        sv = atol + rtol * max(abs(v), abs(v_new))
        err = max(abs(ex) / sx, abs(ev) / sv)
        if kink:
            kink = False
            err = max(err, abs(x2 - x_new) / sx, abs(v2 - v_new) / sv)

        if err <= 1.0:
            if err == 0.0:
                fac = GROW_MAX
            else:
                fac = SAFETY * err ** -ALPHA * err_prev ** BETA
                fac = min(GROW_MAX, max(SHRINK_MIN, fac))
            if rejected:
                fac = min(fac, 1.0)
            err_prev = max(err, 1e-4)
            rejected = False
            t, x, v, k1, branch = t_new, x_new, v_new, k7, end_branch
            states.append((t, x, v))
            if hit:
                if t in grid_set:
                    out_states.append((t, x, v))
                i_stop += 1
                # a forced short step says nothing about the step size
                h = max(h, h_eff * fac) if h_eff < h else h_eff * fac
            else:
                h = h_eff * fac
            h = min(h, integ.h_max)
        else:
            n_reject += 1
            rejected = True
            h = h_eff * max(SHRINK_MIN, SAFETY * err ** -0.2)
            if h < integ.h_min:
                raise StepCollapseError(
                    f"step size below h_min={integ.h_min} at t={t!r} (error norm {err:.3g})",
                    last_state=SimState(t, x, v), reason="local error tolerance",
                    partial=_build_trace(cfg, leader_at, out_states, states,
                                         record_steps, partial=True,
                                         error="local error tolerance"))

    log.debug("simulate: %d accepted, %d rejected steps", len(states) - 1, n_reject)
    return _build_trace(cfg, leader_at, out_states, states, record_steps)


def _build_trace(cfg, leader_at, out_states, states, record_steps, partial=False, error=None):
    rows = [make_row(cfg, leader_at, *s) for s in out_states]
    steps = [make_row(cfg, leader_at, *s) for s in states] if record_steps else []
    return Trace(rows, steps, partial=partial, error=error)


def reference_simulate(plant: VehicleParams, cfg: ControllerConfig, init: SimState,
                       leader_at: LeaderFunction, t_end: float, dt: float = 1e-4,
                       output_dt: float = 0.01) -> Trace:
    """Fixed-step classical RK4; rows at multiples of ``output_dt``.

    A step whose stages leave the admissible set is redone as two half steps,
    recursively, at most 10 levels deep.
    """
    if dt > 1e-3:
        raise ValueError("reference integration requires dt <= 1e-3")
    sub = round(output_dt / dt)
    if abs(sub * dt - output_dt) > 1e-9 * output_dt:
        raise ValueError("output_dt must be an integer multiple of dt")
    n_out = round(t_end / output_dt)
    x, v = float(init.x), float(init.v)
    _check_initial(cfg, leader_at, x, v)
    f = make_rhs(plant, cfg, leader_at)

    def step(t, x, v, h, depth):
        try:
            k1 = f(t, x, v)
            k2 = f(t + 0.5 * h, x + 0.5 * h * v, v + 0.5 * h * k1)
            v2 = v + 0.5 * h * k1
            k3 = f(t + 0.5 * h, x + 0.5 * h * v2, v + 0.5 * h * k2)
            v3 = v + 0.5 * h * k2
            k4 = f(t + h, x + h * v3, v + h * k3)
            v4 = v + h * k3
            return (x + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
                    v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        except OutsideDomainError:
            if depth >= 10:
                raise
            half = 0.5 * h
            x, v = step(t, x, v, half, depth + 1)
            return step(t + half, x, v, half, depth + 1)

    out_states = [(0.0, x, v)]
    for i in range(n_out):
        base = i * sub
        for j in range(sub):
            t = (base + j) * dt
            x, v = step(t, x, v, dt, 0)
        out_states.append(((i + 1) * output_dt if i + 1 < n_out else t_end, x, v))
    return _build_trace(cfg, leader_at, out_states, [], False)
