from pathlib import Path
from typing import Dict, Union
import os

import psutil
import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import ValidationError

from ..consts import MASS_DRIFT_TOLERANCE
from ..models.experiment_models import ExperimentConfig


class FhnlsConfig:
    """Runtime configuration for the simulator: defaults, then environment, then a YAML file."""

    def __init__(self, config_path: str = None):
        load_dotenv()  # Load environment variables

        self.config = {
            'logging': {
                'level': os.getenv('LOG_LEVEL', 'INFO'),
                'file': os.getenv('FHNLS_LOG_FILE')
            },
            'runtime': {
                'workers': int(os.getenv('FHNLS_WORKERS', psutil.cpu_count(logical=False) or 1))
            },
            'numerics': {
                'mass_tolerance': MASS_DRIFT_TOLERANCE
            }
        }

        # Override with config file if provided
        if config_path and os.path.exists(config_path):
            with open(config_path, 'r') as f:
                file_config = yaml.safe_load(f) or {}
                self._deep_update(self.config, file_config)

    def get(self, key: str, default=None):
        """Get configuration value using dot notation (e.g., 'runtime.workers')"""
        keys = key.split('.')
        value = self.config
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k, default)
            else:
                return default
        return value

    def get_worker_cap(self) -> int:
        return int(self.get('runtime.workers', 1))

    def update(self, updates: Dict):
        """Update configuration"""
        self._deep_update(self.config, updates)

    def _deep_update(self, d: Dict, u: Dict):
        """Recursively update dictionary d with values from dictionary u"""
        for k, v in u.items():
            if isinstance(v, dict) and k in d and isinstance(d[k], dict):
                self._deep_update(d[k], v)
            else:
                d[k] = v


def format_validation_error(error: ValidationError) -> str:
    """One entry per problem, each naming the offending field path."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item['loc']) or "<config>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate an experiment YAML document."""
    path = Path(path)
    with open(path, 'r') as f:
        document = yaml.safe_load(f)
    if not isinstance(document, dict):
        raise ValueError(f"{path} does not contain a YAML mapping")
    config = ExperimentConfig.model_validate(document)
    logger.debug(f"Loaded experiment config {path} ({config.experiment.value}, hash {config.config_hash()[:12]})")
    return config


def dump_experiment_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    """Write config as YAML; load_experiment_config reads it back unchanged."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        yaml.safe_dump(config.model_dump(mode="json"), f, sort_keys=False)
    return path
