"""Time-stamped records of closed-loop simulations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .controller import ControllerConfig, evaluate

COLUMNS = ("t", "x", "v", "x_l", "v_l", "x_safe", "e_v", "e_d", "psi_v", "psi_d",
           "k_v", "k_d", "u", "u_sat", "region")


class TraceRow(NamedTuple):
    t: float
    x: float
    v: float
    x_l: float
    v_l: float
    x_safe: float
    e_v: float
    e_d: float
    psi_v: float
    psi_d: float
    k_v: Optional[float]
    k_d: Optional[float]
    u: float
    u_sat: float
    region: str


def make_row(cfg: ControllerConfig, leader_at, t: float, x: float, v: float) -> TraceRow:
    leader = leader_at(t)
    out = evaluate(cfg, t, x, v, leader.x_l)
    return TraceRow(t, x, v, leader.x_l, leader.v_l, cfg.lambda1 * v + cfg.lambda2,
                    out.e_v, out.e_d, out.psi_v, out.psi_d, out.k_v, out.k_d,
                    out.u, out.u_saturated, out.region.value)


@dataclass
class Trace:
    """Output-grid rows plus, optionally, every accepted integrator step.

    ``partial`` marks a trace cut short by an integration failure described
    in ``error``.
    """

    rows: list[TraceRow] = field(default_factory=list)
    steps: list[TraceRow] = field(default_factory=list)
    partial: bool = False
    error: Optional[str] = None

    def __len__(self):
        return len(self.rows)

    def column(self, name: str, steps: bool = False) -> np.ndarray:
        idx = COLUMNS.index(name)
        src = self.steps if steps else self.rows
        if name == "region":
            return np.array([r[idx] for r in src], dtype=object)
        return np.array([math.nan if r[idx] is None else r[idx] for r in src], dtype=float)
