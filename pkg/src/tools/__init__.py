"""MCP tools for the fractional Hartree NLS simulator."""

from .experiment_tools import check_inequalities_tool, run_experiment_tool, solve_ground_state_tool

__all__ = [
    'run_experiment_tool',
    'solve_ground_state_tool',
    'check_inequalities_tool',
]
