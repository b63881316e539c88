"""Realized safety and funnel margins of a closed-loop trace."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..controller import ControllerConfig
from ..trace import Trace

# margins at or below this count as touching the boundary (tolerance 1e-10 noise)
MARGIN_FLOOR = 1e-9


@dataclass(frozen=True)
class InvariantReport:
    """Infima of the guaranteed margins along a trace.

    ``min_safety_margin`` is ``inf(x_l - x - x_safe)``; the funnel margins are
    ``inf(psi - e)`` per funnel; ``min_combined_lower`` is
    ``inf(max(0, psi_v + e_v) + max(0, psi_d + e_d))``, which stays positive
    when at least one error keeps away from its lower boundary.  The minima
    run over output rows and accepted steps; ``max_u_jump_per_sample`` is the
    largest change of ``u`` between consecutive output rows.
    """

    min_safety_margin: float
    min_upper_margin_v: float
    min_upper_margin_d: float
    min_combined_lower: float
    sup_abs_u: float
    max_u_jump_per_sample: float
    passed: bool

    @property
    def margins(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k.startswith("min_")}

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _stack(trace: Trace, name: str) -> np.ndarray:
    return np.concatenate([trace.column(name), trace.column(name, steps=True)])


def check_invariants(trace: Trace, cfg: Optional[ControllerConfig] = None) -> InvariantReport:
    """Measure the margins of ``trace`` and decide whether they all hold.

    ``cfg`` is accepted for symmetry with the simulator; every quantity needed
    is already recorded in the trace.
    """
    if not trace.rows:
        raise ValueError("cannot check an empty trace")
    e_v, e_d = _stack(trace, "e_v"), _stack(trace, "e_d")
    psi_v, psi_d = _stack(trace, "psi_v"), _stack(trace, "psi_d")
    gap = _stack(trace, "x_l") - _stack(trace, "x") - _stack(trace, "x_safe")
    u = _stack(trace, "u")

    combined = np.maximum(0.0, psi_v + e_v) + np.maximum(0.0, psi_d + e_d)
    min_safety = float(gap.min())
    min_v = float((psi_v - e_v).min())
    min_d = float((psi_d - e_d).min())
    min_comb = float(combined.min())
    sup_u = float(np.abs(u).max())

    u_rows = trace.column("u")
    if len(u_rows) < 2:
        jump = 0.0
    elif np.all(np.isfinite(u_rows)):
        jump = float(np.abs(np.diff(u_rows)).max())
    else:
        jump = math.inf

    ok = (all(m > MARGIN_FLOOR for m in (min_safety, min_v, min_d, min_comb))
          and math.isfinite(sup_u))
    return InvariantReport(min_safety, min_v, min_d, min_comb, sup_u, jump, bool(ok))
