"""Numerical services of the fractional Hartree NLS simulator."""

from .experiment_service import ExperimentService

__all__ = [
    'ExperimentService',
]
