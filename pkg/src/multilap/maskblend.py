"""Degree-based structure mask and layer blending."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .affinity import WeightField


def mask_from_degrees(degree: np.ndarray, valid_count: np.ndarray,
                      gamma: float = 1.0) -> np.ndarray:
    m = 1.0 - degree / valid_count
    # d_i <= p_i holds exactly in theory; keep rounding from leaking outside [0, 1]
    m = np.clip(m, 0.0, 1.0)
    if gamma != 1.0:
        m = m ** gamma
    return m


def structure_mask(w: WeightField | Sequence[WeightField], source_level: int = 1,
                   gamma: float = 1.0) -> np.ndarray:
    """``m_i = 1 - d_i / p_i`` from the degrees of one cascade level.

    ``w`` is either a single field or the list of cascade levels, in which
    case ``source_level`` (1-based) picks the level.
    """
    if isinstance(w, WeightField):
        field = w
    else:
        if not 1 <= source_level <= len(w):
            raise ValueError(f"mask source level {source_level} out of range")
        field = w[source_level - 1]
    return mask_from_degrees(field.degree, field.valid_count, gamma)


def blend(base, mapped_bands: Sequence[np.ndarray], mapped_high,
          mask: np.ndarray | None = None, clamp: bool = True) -> np.ndarray:
    """Sum the mapped layers, gating every detail layer (never the base) by ``mask``."""
    z = np.array(base, dtype=np.float64)
    if mask is not None and np.shape(mask) != z.shape:
        raise ValueError("mask dimension mismatch")
    details = [*mapped_bands, mapped_high]
    for layer in details:
        layer = np.asarray(layer, dtype=np.float64)
        if layer.shape != z.shape:
            raise ValueError(f"dimension mismatch: {layer.shape} vs {z.shape}")
        z += layer if mask is None else mask * layer
    if clamp:
        np.clip(z, 0.0, 1.0, out=z)
    return z
