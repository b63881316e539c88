"""Funnel cruise control: a model-free adaptive cruise controller with a
velocity funnel and a distance funnel, a closed-loop vehicle simulator and a
checker for the controller's safety and funnel invariants."""

from .controller import (ControlOutput, ControllerConfig, LeaderState, Region,
                         classify_region, control, distance_error, saturate,
                         velocity_error)
from .dynamics import (Constant, VehicleParams, accel_rhs, aero_drag, erf_eval,
                       gravity_force, rolling_friction, table1_params)
from .funnel import FunnelSpec, constant_funnel, exponential_funnel
from .integrator import closed_loop_rhs, reference_simulate, simulate
from .scenarios import (IntegratorConfig, LeaderProfile, ScenarioConfig, SimState,
                        frozen_scenario,
                        leader_state, scenario_preset, validate_scenario)
from .trace import Trace, TraceRow

__version__ = "0.1.0"
