"""
The Nash iteration: parameters, increments, checks, probes and the driver
"""

from .params import IterationParams, IterationState
from .increment import Increment, build_increment, reynolds_update
from .checks import CheckReport, check_inductive, weak_form_residual
from .probes import decay_probe_hhl, decay_probe_hl
from .driver import RunReport, base_step, run, select_lambda

__all__ = ['IterationParams', 'IterationState', 'Increment', 'build_increment', 'reynolds_update',
           'CheckReport', 'check_inductive', 'weak_form_residual', 'decay_probe_hl', 'decay_probe_hhl',
           'RunReport', 'base_step', 'run', 'select_lambda']
