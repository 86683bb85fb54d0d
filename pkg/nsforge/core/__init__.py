"""
Spectral fields, norms, tensor geometry and Mikado flows
"""

from .fourier_field import Arity, Grid2, SpectralField
from .norms import NormTable, lp_norm, sobolev_norm, besov_norm
from .tensor_geometry import FRAME, DirectionSet, amplitude_fields
from .mikado import MikadoFamily, build_family

__all__ = ['Arity', 'Grid2', 'SpectralField', 'NormTable', 'lp_norm', 'sobolev_norm', 'besov_norm',
           'FRAME', 'DirectionSet', 'amplitude_fields', 'MikadoFamily', 'build_family']
