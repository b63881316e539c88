"""Scenario files, trace files, invariant checking and the command line."""

from .checker import InvariantReport, check_invariants
from .runner import emit_batch, run
from .scenario_io import dump_scenario, load_scenario, parse_scenario
from .traceio import read_trace, write_trace

__all__ = ["InvariantReport", "check_invariants", "emit_batch", "run", "dump_scenario",
           "load_scenario", "parse_scenario", "read_trace", "write_trace"]
