"""End-to-end enhancement: colour routing, decomposition, mapping, masking, blending."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .affinity import KernelParams, check_plane
from .cascade import LayerStack, build_cascade, decompose, stream_decompose
from .maskblend import blend, mask_from_degrees
from .normfilter import NormMode
from .tonemap import CurveSpec, apply_curve, make_curve

COLOR_MODES = ("luma_only", "per_channel_rgb")
ENGINES = ("auto", "field", "stream")

# BT.601 full range, signed chroma (no offset)
RGB_TO_YUV = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])
YUV_TO_RGB = np.linalg.inv(RGB_TO_YUV)


class InvariantError(RuntimeError):
    """An internal consistency check failed (non-finite or out-of-range output)."""


def layer_names(k: int) -> list[str]:
    return ["base", *(f"band{l}" for l in range(1, k)), "high"]


@dataclass(frozen=True)
class EnhanceConfig:
    kernel: KernelParams = field(default_factory=KernelParams)
    k: int = 2
    norm: NormMode = field(default_factory=NormMode)
    curves: tuple[CurveSpec, ...] = ()
    mask_enabled: bool = False
    mask_source_level: int = 1
    mask_gamma: float = 1.0
    color_mode: str = "luma_only"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be an integer >= 1")
        curves = tuple(self.curves) or (CurveSpec(),) * (self.k + 1)
        if len(curves) != self.k + 1:
            raise ValueError(f"expected {self.k + 1} curves for k={self.k}, got {len(curves)}")
        curves = (curves[0].with_domain("base"),
                  *(c.with_domain("signed_detail") for c in curves[1:]))
        object.__setattr__(self, "curves", curves)
        if self.color_mode not in COLOR_MODES:
            raise ValueError(f"unknown color mode {self.color_mode!r}")
        if not 1 <= self.mask_source_level <= self.k:
            raise ValueError("mask_source_level must index an existing level")
        if not self.mask_gamma > 0:
            raise ValueError("mask_gamma must be positive")


def _s(a, width, domain="signed_detail"):
    return CurveSpec("s_curve", a=a, width=width, domain=domain)


_KERNEL = KernelParams(kernel="nlm", h_y=0.7, spatial_term=False,
                       window_radius=2, patch_radius=1)

PRESETS = {
    # fine layer removed, medium layer through a narrow s-curve, no mask
    "smooth": EnhanceConfig(
        kernel=_KERNEL, k=2,
        curves=(CurveSpec("identity", domain="base"), _s(10, 0.2),
                CurveSpec("linear_gain", beta=0.0)),
        mask_enabled=False),
    "sharpen": EnhanceConfig(
        kernel=_KERNEL, k=2,
        curves=(_s(6, 0.75, "base"), _s(50, 0.33), _s(20, 0.66)),
        mask_enabled=True),
    "denoise_sharpen": EnhanceConfig(
        kernel=_KERNEL, k=2,
        curves=(_s(5, 0.75, "base"), _s(60, 0.45),
                CurveSpec("inverse_s_curve", a=10, width=1.0)),
        mask_enabled=True),
    "identity": EnhanceConfig(kernel=_KERNEL, k=2, mask_enabled=False),
}


def resolve_preset(name: str) -> EnhanceConfig:
    key = name.replace("-", "_")
    if key not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key]


@dataclass
class PlaneResult:
    output: np.ndarray
    stack: LayerStack
    mapped: list[np.ndarray]
    mask: np.ndarray | None
    degrees: list[np.ndarray]
    valid_count: np.ndarray
    alphas: list


def _pick_engine(config: EnhanceConfig, engine: str) -> str:
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if engine != "auto":
        return engine
    if config.norm.mode == "norm_free" and config.norm.alpha == "closed_form":
        return "field"
    return "stream"


def enhance_plane(y, config: EnhanceConfig, engine: str = "auto",
                  threads: int = 1, clamp: bool = True) -> PlaneResult:
    y = check_plane(y)
    engine = _pick_engine(config, engine)
    if engine == "field":
        cas = build_cascade(y, config.kernel, config.k, config.norm, threads=threads)
        stack = decompose(y, cas)
        degrees = [lv.degree for lv in cas.levels]
        valid = cas.levels[0].valid_count
        alphas = cas.alphas
    else:
        res = stream_decompose(y, config.kernel, config.k, config.norm, threads=threads)
        stack, degrees, valid, alphas = res.stack, res.degrees, res.valid_count, res.alphas

    mapped = [apply_curve(make_curve(spec), layer)
              for spec, layer in zip(config.curves, stack.layers)]
    mask = None
    if config.mask_enabled:
        mask = mask_from_degrees(degrees[config.mask_source_level - 1], valid,
                                 config.mask_gamma)
    out = blend(mapped[0], mapped[1:-1], mapped[-1], mask, clamp=clamp)
    if not np.all(np.isfinite(out)):
        raise InvariantError("non-finite values in enhanced output")
    return PlaneResult(out, stack, mapped, mask, degrees, valid, alphas)


def rgb_to_yuv(rgb: np.ndarray) -> np.ndarray:
    return rgb @ RGB_TO_YUV.T


def yuv_to_rgb(yuv: np.ndarray) -> np.ndarray:
    return yuv @ YUV_TO_RGB.T


@dataclass
class EnhanceResult:
    image: np.ndarray
    planes: list[PlaneResult]


def to_float(image) -> np.ndarray:
    a = np.asarray(image)
    if a.dtype == np.uint8:
        return a.astype(np.float64) / 255.0
    return a.astype(np.float64)


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def enhance_yuv(yuv: np.ndarray, config: EnhanceConfig, **kw) -> tuple[np.ndarray, PlaneResult]:
    """Enhance the luma plane of a YUV image; chroma is passed through untouched."""
    res = enhance_plane(yuv[..., 0], config, **kw)
    out = yuv.copy()
    out[..., 0] = res.output
    return out, res


def enhance_detailed(image, config: EnhanceConfig, engine: str = "auto",
                     threads: int = 1) -> EnhanceResult:
    a = np.asarray(image)
    is_u8 = a.dtype == np.uint8
    x = to_float(a)
    kw = dict(engine=engine, threads=threads)
    if x.ndim == 2 or (x.ndim == 3 and x.shape[2] == 1):
        res = enhance_plane(x.reshape(x.shape[:2]), config, **kw)
        out = res.output.reshape(x.shape)
        planes = [res]
    elif x.ndim == 3 and x.shape[2] == 3:
        if config.color_mode == "luma_only":
            yuv_out, res = enhance_yuv(rgb_to_yuv(x), config, **kw)
            out = np.clip(yuv_to_rgb(yuv_out), 0.0, 1.0)
            planes = [res]
        else:
            planes = [enhance_plane(x[..., c], config, **kw) for c in range(3)]
            out = np.stack([p.output for p in planes], axis=-1)
    else:
        raise ValueError(f"unsupported channel count for image of shape {x.shape}")
    if np.any(out < 0.0) or np.any(out > 1.0):
        raise InvariantError("enhanced output left [0, 1]")
    return EnhanceResult(to_uint8(out) if is_u8 else out, planes)


def enhance(image, config: EnhanceConfig | str, engine: str = "auto",
            threads: int = 1) -> np.ndarray:
    """Enhance a grayscale plane or an RGB image; returns the same shape and dtype.

    ``config`` may be an :class:`EnhanceConfig` or a preset name.
    """
    if isinstance(config, str):
        config = resolve_preset(config)
    return enhance_detailed(image, config, engine=engine, threads=threads).image


def with_overrides(config: EnhanceConfig, **changes) -> EnhanceConfig:
    return replace(config, **changes)
