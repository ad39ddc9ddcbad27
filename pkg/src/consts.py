"""Constants for the fractional Hartree NLS simulator."""

import os
from dotenv import load_dotenv

load_dotenv()

# Application name
FHNLS_APPLICATION_NAME = "fhnls"
FHNLS_VERSION = "1.0.0"

# Grid limits
SUPPORTED_DIMENSIONS = (1, 2, 3)
MIN_POINTS_PER_AXIS = 8

# FFT threads used inside each transform
FFT_WORKERS = int(os.getenv("FHNLS_FFT_WORKERS", "1"))

# Integrator defaults
DEFAULT_BLOWUP_THRESHOLD = 1.0e3
DEFAULT_OBSERVER_STRIDE = 10
ADAPTIVE_DOUBLING_STREAK = 10
MASS_DRIFT_TOLERANCE = 1.0e-10

# Diagnostics
MIN_CADENCE_SAMPLES = 16
KERNEL_SELF_CHECK_TOLERANCE = 0.02
CENTROID_WARNING_FRACTION = 0.1
BOUNDARY_AMPLITUDE_LIMIT = 1.0e-10

# Singular-cell quadrature orders
SINGULAR_RADIAL_NODES = 24
SINGULAR_FACE_NODES = 16

# Ground state solver defaults
GROUND_STATE_DEFAULT_TOL = 1.0e-8
GROUND_STATE_DEFAULT_MAX_ITER = 2000
GROUND_STATE_INITIAL_WIDTH_FRACTION = 1.0 / 6.0

# Inequality lab
INEQUALITY_DEFAULT_SAMPLES = 100
INEQUALITY_REGRESSION_SLACK = 0.05

REFINEMENT_RATIO_BOUNDS = (0.8, 1.2)
SYMMETRY_DEFECT_TOLERANCE = 1.0e-8
COMMUTATOR_IDENTITY_TOLERANCE = 1.0e-12

# Experiment verdicts
SUB_THRESHOLD_GROWTH_LIMIT = 5.0
BLOWUP_ROOT_FACTOR = 2.0
VIRIAL_RESIDUAL_TOLERANCE = 1.0e-2
STRICHARTZ_SATURATION_START = 20.0
STRICHARTZ_SATURATION_RATE = 0.01
SCATTERING_STABILITY_TOLERANCE = 1.0e-3

# Checkpoint format
CHECKPOINT_MAGIC = b"FHNLS001"
CHECKPOINT_VERSION = 1

# Experiment configs
EXPERIMENT_SCHEMA_VERSION = 1
DEFAULT_OUTPUT_DIR = os.getenv("FHNLS_OUTPUT_DIR", "./runs")

# Observable CSV column order
OBSERVABLE_COLUMNS = [
    't',
    'mass',
    'kinetic',
    'potential',
    'energy',
    'h_gamma_half',
    'dilation_virial',
    'weighted_virial',
    'moment2',
    'grad_moment',
]
