"""fhnls MCP Server - fractional Hartree NLS simulations as MCP tools.

The server exposes:
- run_experiment: the config-driven experiment runner
- solve_ground_state: the ground state solver
- check_inequalities: the inequality lab suite

Tool calls run the same services as the fhnls command line.
"""

import asyncio
import os

from loguru import logger
from mcp.server.fastmcp import FastMCP

from .consts import FHNLS_APPLICATION_NAME, FHNLS_VERSION
from .tools.experiment_tools import (
    check_inequalities_tool, run_experiment_tool, solve_ground_state_tool
)
from .utils.logger import configure_logging


def create_server() -> FastMCP:
    """Create and configure the fhnls MCP server."""

    mcp = FastMCP(FHNLS_APPLICATION_NAME)

    logger.info("Registering fhnls MCP tools...")
    run_experiment_tool(mcp)
    solve_ground_state_tool(mcp)
    check_inequalities_tool(mcp)

    logger.info("fhnls MCP Server initialized successfully")
    return mcp


async def main():
    """Main entry point for the MCP server."""

    log_level = os.getenv("LOG_LEVEL", "INFO").upper()
    configure_logging(log_level, os.getenv("FHNLS_LOG_FILE"))

    logger.info(f"Starting {FHNLS_APPLICATION_NAME} {FHNLS_VERSION}")
    logger.info(f"  - Log Level: {log_level}")
    logger.info(f"  - Output directory: {os.getenv('FHNLS_OUTPUT_DIR', './runs')}")

    try:
        server = create_server()
        logger.info("fhnls MCP Server is ready to process requests")
        await server.run_stdio_async()
    except KeyboardInterrupt:
        logger.info("Shutting down fhnls MCP Server...")
    except Exception as e:
        logger.error(f"Error running fhnls MCP Server: {str(e)}")
        raise


if __name__ == "__main__":
    asyncio.run(main())
