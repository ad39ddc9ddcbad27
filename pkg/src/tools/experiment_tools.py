"""Simulator tools for the fhnls MCP server."""

import asyncio
from datetime import datetime
from typing import Dict, List, Optional, Union

from loguru import logger
from mcp.server.fastmcp import FastMCP
from pydantic import ValidationError

from ..config.config import format_validation_error, load_experiment_config
from ..models.experiment_models import ExperimentConfig
from ..services.experiment_service import ExperimentService
from ..services.ground_state_service import solve_ground_state
from ..services.inequality_service import report_violations, run_inequality_suite
from ..services.spectral_service import build_grid


def run_experiment_tool(mcp: FastMCP) -> None:
    """Register the experiment runner tool."""

    @mcp.tool(description="Run a fractional Hartree experiment from a YAML config path or an inline config")
    async def run_experiment(
        config_path: Optional[str] = None,
        config: Optional[Dict] = None,
        output_dir: Optional[str] = None,
    ) -> Dict:
        """
        Run one experiment and return its manifest.

        Args:
            config_path: Path to an experiment YAML document
            config: The same document as a mapping (used when config_path is not given)
            output_dir: Override for output.directory

        Returns:
            The run manifest: status, passed, emitted files and metrics
        """
        try:
            if config_path:
                experiment = load_experiment_config(config_path)
            elif config is not None:
                experiment = ExperimentConfig.model_validate(config)
            else:
                raise ValueError("either config_path or config is required")
            logger.info(f"Starting experiment {experiment.experiment.value} via MCP")

            service = ExperimentService()
            manifest = await asyncio.to_thread(service.run, experiment, output_dir)
            return manifest.model_dump(mode="json")

        except ValidationError as e:
            message = format_validation_error(e)
            logger.error(f"Invalid experiment config: {message}")
            return _error_response(message)
        except Exception as e:
            logger.error(f"Error running experiment: {str(e)}")
            return _error_response(str(e))


def solve_ground_state_tool(mcp: FastMCP) -> None:
    """Register the ground state tool."""

    @mcp.tool(name="solve_ground_state", description="Solve |D|^alpha Q - (|x|^-gamma * |Q|^2) Q = -Q on a periodic grid")
    async def solve_ground_state_handler(
        alpha: float,
        gamma: float,
        dim: int = 2,
        points_per_axis: int = 64,
        half_length: float = 20.0,
        tol: float = 1e-8,
        max_iter: int = 2000,
    ) -> Dict:
        """
        Compute the ground state and report its invariants (no profile is returned).
        """
        try:
            grid = build_grid(dim, points_per_axis, half_length)
            result = await asyncio.to_thread(solve_ground_state, grid, alpha, gamma, tol, max_iter)
            return {
                "status": "success",
                "converged": result.converged,
                "residual": result.residual,
                "mass": result.mass,
                "l2_norm": result.l2_norm,
                "quotient_value": result.quotient_value,
                "pairing_defect": result.pairing_defect,
                "pohozaev_defect": result.pohozaev_defect,
                "iterations": result.iterations,
                "polish_iterations": result.polish_iterations,
                "message": result.message,
            }
        except Exception as e:
            logger.error(f"Error solving ground state: {str(e)}")
            return _error_response(str(e))


def check_inequalities_tool(mcp: FastMCP) -> None:
    """Register the inequality suite tool."""

    @mcp.tool(description="Evaluate worst LHS/RHS ratios of the harmonic-analysis inequalities on seeded families")
    async def check_inequalities(
        suite: Union[str, List[str]] = "all",
        samples: int = 20,
        seed: int = 0,
        dim: int = 2,
        points_per_axis: int = 32,
        half_length: float = 10.0,
        refine: bool = False,
    ) -> Dict:
        """
        Run the inequality checkers and return one report per inequality.
        """
        try:
            grid = build_grid(dim, points_per_axis, half_length)
            reports = await asyncio.to_thread(run_inequality_suite, grid, samples, seed, suite, refine)
            logger.info(f"Inequality suite finished with {len(reports)} reports")
            return {
                "status": "success",
                "reports": [report.model_dump(mode="json") for report in reports],
                "violations": [message for report in reports for message in report_violations(report)],
                "timestamp": datetime.now().isoformat(),
            }
        except Exception as e:
            logger.error(f"Error checking inequalities: {str(e)}")
            return _error_response(str(e))


def _error_response(message: str) -> Dict:
    return {
        "status": "error",
        "error_message": message,
        "timestamp": datetime.now().isoformat(),
    }
