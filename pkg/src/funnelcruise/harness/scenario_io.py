"""Scenario files.

Scenarios are TOML documents with SI units throughout::

    name = "scenario1"
    t_end = 50.0                      # [s]

    [plant]
    m = 1300.0                        # [kg]
    c_d = 0.32
    c_r = 0.01
    area = 2.4                        # [m^2]
    alpha = 100.0                     # optional, friction smoothing [s/m]
    theta = 0.0                       # optional, slope [rad]
    rho = 1.3                         # optional, air density [kg/m^3]
    delta = 0.0                       # optional, disturbance force [N]
    g = 9.81                          # optional [m/s^2]

    [controller]
    lambda1 = 0.5                     # time gap [s]
    lambda2 = 2.0                     # standstill margin [m]
    v_ref = 36.0                      # optional [m/s]
    saturation = [-1e4, 1e4]          # optional, (u_min, u_max) [N]

    [controller.phi_v]                # funnel functions, one of
    kind = "exp_reciprocal"           #   1 / (scale exp(-rate t) + offset)
    scale = 22.5
    rate = 0.2
    offset = 0.2

    [controller.phi_d]
    kind = "constant"                 #   value
    value = 0.25

    [leader]
    x0 = 100.0                        # [m]
    v0 = 20.0                         # [m/s]
    segments = [[5.0, 0.0], [10.0, 1.0]]   # (duration [s], accel [m/s^2])

    [init]
    x = 0.0
    v = 15.0

    [integrator]                      # optional, defaults shown by dump_scenario
    rel_tol = 1e-10
    abs_tol = 1e-10
    h_init = 1e-4
    h_min = 1e-10
    h_max = 0.5
    output_dt = 0.01

Time-dependent signals (``theta``, ``rho``, ``delta``, ``v_ref``) can only be
constants in files.  Unknown keys are errors.
"""
from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Union

import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..controller import ControllerConfig
from ..dynamics import Constant, VehicleParams
from ..errors import ScenarioParseError, ScenarioValidationError
from ..funnel import ConstantPhi, ExpReciprocal, constant_funnel, exponential_funnel
from ..scenarios import (IntegratorConfig, LeaderProfile, ScenarioConfig, SimState,
                         validate_scenario)

PathLike = Union[str, Path]

_REQUIRED = {
    "plant": ("m", "c_d", "c_r", "area"),
    "controller": ("lambda1", "lambda2", "phi_v", "phi_d"),
    "leader": ("x0", "v0"),
    "init": ("x", "v"),
}
_OPTIONAL = {
    "": ("name", "t_end", "plant", "controller", "leader", "init", "integrator"),
    "plant": ("alpha", "theta", "rho", "delta", "g"),
    "controller": ("v_ref", "saturation"),
    "leader": ("segments",),
    "init": (),
    "integrator": ("rel_tol", "abs_tol", "h_init", "h_min", "h_max", "output_dt"),
}
_FUNNEL_KEYS = {"exp_reciprocal": ("scale", "rate", "offset"), "constant": ("value",)}


def _check_keys(table: dict, section: str):
    allowed = set(_REQUIRED.get(section, ())) | set(_OPTIONAL[section])
    for key in table:
        if key not in allowed:
            where = f"{section}.{key}" if section else key
            raise ScenarioParseError(f"unknown key {where!r}")
    for key in _REQUIRED.get(section, ()):
        if key not in table:
            raise ScenarioParseError(f"missing field '{section}.{key}'")


def _num(table: dict, key: str, where: str) -> float:
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f"field '{where}.{key}' must be a number, got {value!r}")
    return float(value)


def _table(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ScenarioParseError(f"'{key}' must be a table")
    return value


def _funnel(table, where):
    if not isinstance(table, dict):
        raise ScenarioParseError(f"'{where}' must be a table")
    kind = table.get("kind")
    if kind not in _FUNNEL_KEYS:
        raise ScenarioParseError(
            f"field '{where}.kind' must be one of {sorted(_FUNNEL_KEYS)}, got {kind!r}")
    keys = _FUNNEL_KEYS[kind]
    for key in table:
        if key != "kind" and key not in keys:
            raise ScenarioParseError(f"unknown key '{where}.{key}'")
    for key in keys:
        if key not in table:
            raise ScenarioParseError(f"missing field '{where}.{key}'")
    args = [_num(table, k, where) for k in keys]
    try:
        if kind == "constant":
            return constant_funnel(*args)
        return exponential_funnel(*args)
    except ValueError as exc:
        raise ScenarioValidationError([f"{where}: {exc}"]) from None


def scenario_from_dict(doc: dict, default_name: str = "scenario") -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from a parsed document, without validation."""
    if not doc:
        raise ScenarioParseError("empty scenario document")
    _check_keys(doc, "")
    sections = {}
    for section in ("plant", "controller", "leader", "init", "integrator"):
        table = _table(doc, section)
        if section != "integrator" and section not in doc:
            raise ScenarioParseError(f"missing section [{section}]")
        _check_keys(table, section)
        sections[section] = table
    pl, ct, ld, ini, ig = (sections[k] for k in
                           ("plant", "controller", "leader", "init", "integrator"))

    plant_kw = {k: _num(pl, k, "plant") for k in pl}
    for key in ("theta", "rho", "delta"):
        if key in plant_kw:
            plant_kw[key] = Constant(plant_kw[key])
    plant = VehicleParams(**plant_kw)

    saturation = None
    if "saturation" in ct:
        sat = ct["saturation"]
        if not (isinstance(sat, list) and len(sat) == 2):
            raise ScenarioParseError("field 'controller.saturation' must be [u_min, u_max]")
        saturation = tuple(_num({"s": s}, "s", "controller.saturation") for s in sat)
    controller = ControllerConfig(
        lambda1=_num(ct, "lambda1", "controller"),
        lambda2=_num(ct, "lambda2", "controller"),
        phi_v=_funnel(ct["phi_v"], "controller.phi_v"),
        phi_d=_funnel(ct["phi_d"], "controller.phi_d"),
        v_ref=Constant(_num(ct, "v_ref", "controller") if "v_ref" in ct else 36.0),
        saturation=saturation,
    )

    segments = ld.get("segments", [])
    if not isinstance(segments, list) or any(
            not (isinstance(s, list) and len(s) == 2) for s in segments):
        raise ScenarioParseError("field 'leader.segments' must be a list of [duration, accel]")
    segments = tuple((_num({"d": d}, "d", "leader.segments"), _num({"a": a}, "a", "leader.segments"))
                     for d, a in segments)
    try:
        leader = LeaderProfile(_num(ld, "x0", "leader"), _num(ld, "v0", "leader"), segments)
    except ValueError as exc:
        raise ScenarioValidationError([f"leader: {exc}"]) from None

    try:
        integ = IntegratorConfig(**{k: _num(ig, k, "integrator") for k in ig})
    except ValueError as exc:
        raise ScenarioValidationError([f"integrator: {exc}"]) from None

    name = doc.get("name", default_name)
    if not isinstance(name, str):
        raise ScenarioParseError("field 'name' must be a string")
    return ScenarioConfig(
        name=name,
        plant=plant,
        controller=controller,
        leader=leader,
        init=SimState(0.0, _num(ini, "x", "init"), _num(ini, "v", "init")),
        t_end=_num(doc, "t_end", "") if "t_end" in doc else 50.0,
        integ=integ,
    )


def parse_scenario(text: str, default_name: str = "scenario") -> ScenarioConfig:
    """Parse and validate scenario text."""
    if not text.strip():
        raise ScenarioParseError("empty scenario file")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # the decoder message carries line and column
        raise ScenarioParseError(f"malformed scenario file: {exc}") from None
    config = scenario_from_dict(doc, default_name)
    violations = validate_scenario(config)
    if violations:
        raise ScenarioValidationError(violations)
    return config


def load_scenario(path: PathLike) -> ScenarioConfig:
    """Read, parse and validate a scenario file.

    Raises ScenarioParseError for malformed files (empty, bad syntax, missing or
    unknown fields) and ScenarioValidationError listing every violated invariant.
    """
    path = Path(path)
    try:
        return parse_scenario(path.read_text(encoding="utf-8"), default_name=path.stem)
    except ScenarioParseError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from None


def _const(sig, where):
    if not isinstance(sig, Constant):
        raise ValueError(f"{where} is not a constant and cannot be written to a scenario file")
    return sig.value


def _funnel_dict(spec, where):
    phi = spec.phi
    if isinstance(phi, ConstantPhi):
        return {"kind": "constant", "value": phi.value}
    if isinstance(phi, ExpReciprocal):
        return {"kind": "exp_reciprocal", "scale": phi.scale, "rate": phi.rate,
                "offset": phi.offset}
    raise ValueError(f"{where} has no file representation")


def scenario_to_dict(s: ScenarioConfig) -> dict:
    p, c, ig = s.plant, s.controller, s.integ
    controller = {"lambda1": c.lambda1, "lambda2": c.lambda2,
                  "v_ref": _const(c.v_ref, "controller.v_ref")}
    if c.saturation is not None:
        controller["saturation"] = list(c.saturation)
    controller["phi_v"] = _funnel_dict(c.phi_v, "controller.phi_v")
    controller["phi_d"] = _funnel_dict(c.phi_d, "controller.phi_d")
    return {
        "name": s.name,
        "t_end": s.t_end,
        "plant": {"m": p.m, "c_d": p.c_d, "c_r": p.c_r, "area": p.area, "alpha": p.alpha,
                  "theta": _const(p.theta, "plant.theta"), "rho": _const(p.rho, "plant.rho"),
                  "delta": _const(p.delta, "plant.delta"), "g": p.g},
        "controller": controller,
        "leader": {"x0": s.leader.x0_l, "v0": s.leader.v0_l,
                   "segments": [list(seg) for seg in s.leader.segments]},
        "init": {"x": s.init.x, "v": s.init.v},
        "integrator": {"rel_tol": ig.rel_tol, "abs_tol": ig.abs_tol, "h_init": ig.h_init,
                       "h_min": ig.h_min, "h_max": ig.h_max, "output_dt": ig.output_dt},
    }


def dumps_scenario(s: ScenarioConfig) -> str:
    return tomli_w.dumps(scenario_to_dict(s))


def dump_scenario(s: ScenarioConfig, path: PathLike) -> None:
    Path(path).write_text(dumps_scenario(s), encoding="utf-8")


def config_digest(s: ScenarioConfig) -> str:
    """SHA-256 of the canonical file form, or of ``repr`` for configs with
    non-constant signals."""
    try:
        text = dumps_scenario(s)
    except ValueError:
        text = repr(s)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def bundled_scenario_path(scenario_id: int) -> Path:
    return Path(__file__).resolve().parent.parent / "data" / f"scenario{scenario_id}.toml"
