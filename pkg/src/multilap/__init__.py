"""Fast multi-layer Laplacian image enhancement."""

from .affinity import KernelParams, WeightField, build_weight_field, field_stats
from .cascade import (FilterCascade, LayerStack, build_cascade, decompose, hadamard_square,
                      laplacian_apply)
from .maskblend import blend, structure_mask
from .normfilter import (NormMode, apply_exact, apply_norm_free, estimate_alpha,
                         variance_factors)
from .pipeline import EnhanceConfig, enhance, enhance_plane, resolve_preset
from .tonemap import CurveSpec, ToneCurve, apply_curve, make_curve

__version__ = "0.1.0"

__all__ = [
    "CurveSpec", "EnhanceConfig", "FilterCascade", "KernelParams", "LayerStack",
    "NormMode", "ToneCurve", "WeightField", "apply_curve", "apply_exact",
    "apply_norm_free", "blend", "build_cascade", "build_weight_field", "decompose",
    "enhance", "enhance_plane", "estimate_alpha", "field_stats", "hadamard_square",
    "laplacian_apply", "make_curve", "resolve_preset", "structure_mask",
    "variance_factors",
]
