"""Models for the fractional Hartree NLS simulator."""

from .errors import (
    GridMismatchError, GroundStateCollapseError, InsufficientSamplesError, NumericalInstabilityError
)
from .evolution_models import (
    CheckpointData, EvolutionSnapshot, EvolutionState, EvolutionStatus, StepController, StepMode,
    TrajectorySummary
)
from .experiment_models import ExperimentConfig, ExperimentKind, RunManifest, RunStatus
from .ground_state_models import GroundStateResult
from .hartree_models import HartreeKernel, PotentialSpec
from .inequality_models import FieldFamily, HolderSplit, InequalityId, RatioReport
from .observable_models import ObservableRecord, StrichartzAccumulator
from .spectral_models import ComplexField, DispersionSymbol, Grid, SobolevVariant, Space, SymbolKind

__all__ = [
    'GridMismatchError', 'GroundStateCollapseError', 'InsufficientSamplesError', 'NumericalInstabilityError',
    'CheckpointData', 'EvolutionSnapshot', 'EvolutionState', 'EvolutionStatus', 'StepController', 'StepMode',
    'TrajectorySummary', 'ExperimentConfig', 'ExperimentKind', 'RunManifest', 'RunStatus',
    'GroundStateResult', 'HartreeKernel', 'PotentialSpec', 'FieldFamily', 'HolderSplit', 'InequalityId',
    'RatioReport', 'ObservableRecord', 'StrichartzAccumulator', 'ComplexField', 'DispersionSymbol', 'Grid',
    'SobolevVariant', 'Space', 'SymbolKind'
]
