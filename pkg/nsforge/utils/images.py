"""
Graymap snapshots of fields for quick visual checks
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from ..core.fourier_field import Arity, SpectralField, inverse_transform, vorticity
from ..core.norms import magnitude

logger = logging.getLogger(__name__)


def scalar_view(field: SpectralField) -> SpectralField:
    """Vorticity of a vector field; scalars pass through"""
    if field.arity is Arity.VECTOR2:
        return vorticity(field)
    return field


def to_gray(values: np.ndarray) -> np.ndarray:
    """Linear map to 0..255: symmetric about zero for signed data, [0, max] otherwise"""
    peak = float(np.abs(values).max()) if values.size else 0.0
    if peak == 0.0:
        return np.full(values.shape, 128, dtype=np.uint8)
    if values.min() < 0:
        scaled = 127.5 * (values / peak + 1.0)
    else:
        scaled = 255.0 * values / peak
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def emit_image(field: SpectralField, path: Union[str, Path], n: Optional[int] = None) -> Path:
    """Write a binary PGM of the field samples, x_1 to the right and x_2 upward

    Tensors are shown by their Frobenius magnitude.
    """
    view = scalar_view(field)
    samples = inverse_transform(view, n)
    if view.arity is Arity.SYMTENSOR2:
        values = magnitude(samples, view.arity)
    else:
        values = samples[0]
    # rows of the image run from the top, so x_2 is flipped
    pixels = to_gray(values.T[::-1])
    path = Path(path)
    Image.fromarray(pixels).save(path, format="PPM")
    logger.debug("wrote %dx%d graymap %s", pixels.shape[1], pixels.shape[0], path)
    return path
