"""Quantum-noise-limited optical beam displacement measurement."""

__version__ = "0.1.0"

from .modes import BeamState, CoeffVector, ModeSpec, decompose, displaced_coeff, mode_amplitude
from .detection import (
    Scheme,
    SchemeConfig,
    SchemeResult,
    SqueezeSpec,
    SqueezeTarget,
    evaluate,
    qnl_crossover_db,
    qnl_sensitivity,
)
from .montecarlo import McConfig, McResult, empirical_sensitivity, run_montecarlo
