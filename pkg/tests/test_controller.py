import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from funnelcruise.controller import (LeaderState, Region, classify_region, control,
                                     distance_error, law, saturate, velocity_error)
from funnelcruise.errors import OutsideDomainError
from funnelcruise.funnel import constant_funnel
from funnelcruise.scenarios import reference_controller

from helpers import check_region_partition

CFG = reference_controller()


def test_velocity_error_examples():
    assert velocity_error(CFG, 3.0, 36.0) == 0.0
    assert velocity_error(CFG, 0.0, 15.0) == -21.0
    assert velocity_error(CFG, 0.0, 40.0) == 4.0


def test_distance_error_examples():
    assert distance_error(CFG, 0.0, 0.0, 15.0, LeaderState(100.0, 20.0)) == -86.5
    assert distance_error(CFG, 0.0, 0.0, 0.0, LeaderState(6.0, 0.0)) == 0.0
    # leader exactly at safety distance plus the funnel half-width
    v = 20.0
    gap = CFG.x_safe(v) + 4.0
    assert distance_error(CFG, 1.0, 10.0, v, LeaderState(10.0 + gap, v)) == 0.0


def test_region_examples():
    assert classify_region(CFG, 0.0, 0.0, 15.0, LeaderState(100.0, 20.0)) is Region.VELOCITY
    # e_v = -psi_v - 1 with e_d = 0
    psi_v = CFG.phi_v.boundary(0.0)
    v = 36.0 - psi_v - 1.0
    x_l = CFG.x_safe(v) + 4.0
    assert classify_region(CFG, 0.0, 0.0, v, LeaderState(x_l, 0.0)) is Region.DISTANCE
    x_l = CFG.x_safe(36.0) + 4.0
    assert classify_region(CFG, 0.0, 0.0, 36.0, LeaderState(x_l, 0.0)) is Region.OVERLAP


def test_control_initial_state():
    out = control(CFG, 0.0, 0.0, 15.0, LeaderState(100.0, 20.0))
    assert out.region is Region.VELOCITY
    assert out.e_v == -21.0
    assert out.k_v == pytest.approx(6.9362, abs=5e-5)
    assert out.u == pytest.approx(145.66, abs=5e-3)
    # the distance gain is not evaluated outside the distance funnel
    assert out.k_d is None
    assert out.u_saturated == out.u


def test_overlap_takes_minimum():
    # psi_v = 0.2, e_v = -0.1; psi_d = 4, e_d = -1
    cfg = replace(CFG, phi_v=constant_funnel(5.0))
    v = 35.9
    x_l = cfg.lambda1 * v + cfg.lambda2 + 4.0 + 1.0
    out = control(cfg, 0.0, 0.0, v, LeaderState(x_l, v))
    assert out.region is Region.OVERLAP
    assert -out.k_v * out.e_v == pytest.approx(0.4 / 3.0, rel=1e-12)
    assert -out.k_d * out.e_d == pytest.approx(16.0 / 15.0, rel=1e-12)
    assert out.u == pytest.approx(0.13333, abs=1e-5)


def test_overlap_zero_errors():
    x_l = CFG.x_safe(36.0) + 4.0
    out = control(CFG, 2.0, 0.0, 36.0, LeaderState(x_l, 30.0))
    assert out.region is Region.OVERLAP
    assert out.u == 0.0


@pytest.mark.parametrize("u, expected", [(0.0, 0.0), (2e4, 1e4), (-2e4, -1e4),
                                         (math.inf, 1e4), (-math.inf, -1e4)])
def test_saturate_examples(u, expected):
    assert saturate(u, -1e4, 1e4) == expected


@given(st.floats(-1e6, 1e6), st.floats(1, 1e5), st.floats(1, 1e5))
def test_saturate_idempotent(u, lo, hi):
    once = saturate(u, -lo, hi)
    assert saturate(once, -lo, hi) == once
    assert -lo <= once <= hi


def test_outside_domain_raises_without_saturation():
    # safety distance violated: e_d above the distance funnel
    with pytest.raises(OutsideDomainError) as info:
        control(CFG, 0.0, 0.0, 15.0, LeaderState(5.0, 0.0))
    assert "distance" in info.value.reason
    # velocity above the velocity funnel
    with pytest.raises(OutsideDomainError):
        control(CFG, 0.0, 0.0, 60.0, LeaderState(1e4, 0.0))


def test_outside_domain_saturated_extension():
    cfg = replace(CFG, saturation=(-1e4, 1e4))
    out = control(cfg, 0.0, 0.0, 15.0, LeaderState(5.0, 0.0))
    assert out.region is Region.OUTSIDE
    assert out.u == -math.inf and out.u_saturated == -1e4
    # both errors below their funnels: push forward
    v = 36.0 - cfg.phi_v.boundary(0.0) - 1.0
    out = control(cfg, 0.0, 0.0, v, LeaderState(1e4, 0.0))
    assert out.region is Region.OUTSIDE
    assert out.u_saturated == 1e4


def test_region_partition_exclusive_random():
    assert check_region_partition(CFG) >= 100_000


def _domain_state(draw_ev, draw_ed, t):
    psi_v = CFG.phi_v.boundary(t)
    v = 36.0 + draw_ev * psi_v
    x_l = CFG.x_safe(v) + 4.0 - draw_ed * 4.0
    return v, x_l


@given(st.floats(0, 50), st.floats(-0.999, 0.999), st.floats(-5.0, -1.0))
def test_sign_structure_velocity_region(t, s_v, s_d):
    v, x_l = _domain_state(s_v, s_d, t)
    out = control(CFG, t, 0.0, v, LeaderState(x_l, 0.0))
    assert out.region is Region.VELOCITY
    assert np.sign(out.u) == -np.sign(out.e_v)


@given(st.floats(0, 50), st.floats(-5.0, -1.0), st.floats(-0.999, 0.999))
def test_sign_structure_distance_region(t, s_v, s_d):
    v, x_l = _domain_state(s_v, s_d, t)
    out = control(CFG, t, 0.0, v, LeaderState(x_l, 0.0))
    assert out.region is Region.DISTANCE
    assert np.sign(out.u) == -np.sign(out.e_d)


@given(st.floats(0, 50), st.floats(-0.999, -1e-6), st.floats(-0.999, -1e-6))
def test_overlap_with_negative_errors_accelerates(t, s_v, s_d):
    v, x_l = _domain_state(s_v, s_d, t)
    out = control(CFG, t, 0.0, v, LeaderState(x_l, 0.0))
    assert out.region is Region.OVERLAP
    assert out.u >= 0.0


@given(st.floats(0, 50), st.floats(0.01, 0.45))
def test_velocity_gain_grows_with_error(t, s):
    psi_v = CFG.phi_v.boundary(t)
    far = LeaderState(1e6, 0.0)
    k1 = control(CFG, t, 0.0, 36.0 + s * psi_v, far).k_v
    k2 = control(CFG, t, 0.0, 36.0 + 2 * s * psi_v, far).k_v
    assert k2 > k1


def _max_jump_along_path(delta):
    # crosses the seam e_v = -psi_v at fixed t and x, inside the distance funnel
    t = 38.0
    psi_v = CFG.phi_v.boundary(t)
    e_v = np.arange(-psi_v - 2e-4, -psi_v + 2e-4, delta)
    v = 36.0 + e_v
    x_l = CFG.x_safe(36.0 - psi_v) + 4.0 + 3.99
    u = [law(CFG, t, 0.0, vi, x_l)[0] for vi in v]
    return float(np.abs(np.diff(u)).max())


def test_control_continuous_across_seam():
    j1 = _max_jump_along_path(1e-7)
    j2 = _max_jump_along_path(5e-8)
    j3 = _max_jump_along_path(2.5e-8)
    assert j2 <= 0.75 * j1
    assert j3 <= 0.75 * j2
