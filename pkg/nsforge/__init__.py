"""
nsforge - Nash iteration experiments for the stationary Navier-Stokes equations on the 2D torus
"""

__version__ = "1.0.0"
__author__ = "nsforge Team"
__email__ = "team@nsforge.dev"

# Import core components
from .core.fourier_field import Arity, Grid2, SpectralField
from .core.tensor_geometry import FRAME, DirectionSet, admissible_radius
from .core.mikado import MikadoFamily, build_family

# Import the iteration
from .iteration.params import IterationParams, IterationState
from .iteration.driver import RunReport, base_step, run, select_lambda

# Import utilities
from .utils.serializer import ReportSerializer
from .utils.presets import PresetManager
from .utils.events import EventManager


def create_run(preset="desk", **overrides):
    """Run a preset with parameter overrides; returns (states, report)"""
    from .utils.presets import preset_manager

    return run(preset_manager.params_for(preset, overrides))


__all__ = [
    'Arity', 'Grid2', 'SpectralField', 'FRAME', 'DirectionSet', 'admissible_radius',
    'MikadoFamily', 'build_family',
    'IterationParams', 'IterationState', 'RunReport', 'base_step', 'run', 'select_lambda',
    'ReportSerializer', 'PresetManager', 'EventManager',
    'create_run'
]
