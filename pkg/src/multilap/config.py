"""Flat ``key = value`` text format for :class:`EnhanceConfig`.

Lines starting with ``#`` are comments.  Per-layer curves use
``curve.<layer>.<attr>`` where layer is ``base``, ``band1`` ... ``band{k-1}``
or ``high``.  Example::

    kernel = nlm
    h = 0.7
    window = 2
    patch = 1
    levels = 2
    norm = fast
    alpha = invmean
    mask = on
    curve.high.family = s_curve
    curve.high.a = 20.0
    curve.high.width = 0.66
"""

from __future__ import annotations

from .affinity import KernelParams
from .normfilter import NormMode
from .pipeline import EnhanceConfig, layer_names
from .tonemap import CurveSpec


class ConfigError(ValueError):
    pass


_NORM_NAMES = {"exact": "exact", "fast": "norm_free", "norm_free": "norm_free"}
_ALPHA_NAMES = {"closed": "closed_form", "closed_form": "closed_form",
                "trace": "trace_ratio", "trace_ratio": "trace_ratio",
                "invmean": "inverse_mean_degree",
                "inverse_mean_degree": "inverse_mean_degree"}
_ALPHA_OUT = {"closed_form": "closed", "trace_ratio": "trace",
              "inverse_mean_degree": "invmean"}
_COLOR_NAMES = {"luma": "luma_only", "luma_only": "luma_only",
                "rgb": "per_channel_rgb", "per_channel_rgb": "per_channel_rgb"}
_CURVE_ATTRS = ("family", "a", "width", "gamma", "beta")


def _bool(v: str) -> bool:
    v = v.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _num(v: str) -> float:
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"not a number: {v!r}") from None


def _int(v: str) -> int:
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"not an integer: {v!r}") from None


def to_mapping(config: EnhanceConfig) -> dict[str, str]:
    kp, nm = config.kernel, config.norm
    out = {
        "kernel": kp.kernel,
        "h": repr(kp.h_y),
        "spatial": "on" if kp.spatial_term else "off",
        "window": str(kp.window_radius),
        "patch": str(kp.patch_radius),
        "levels": str(config.k),
        "norm": "exact" if nm.mode == "exact" else "fast",
        "alpha": _ALPHA_OUT[nm.alpha] if isinstance(nm.alpha, str) else repr(float(nm.alpha)),
        "mask": "on" if config.mask_enabled else "off",
        "mask_level": str(config.mask_source_level),
        "mask_gamma": repr(config.mask_gamma),
        "color": "luma" if config.color_mode == "luma_only" else "rgb",
    }
    if kp.h_x is not None:
        out["hx"] = repr(kp.h_x)
    for name, spec in zip(layer_names(config.k), config.curves):
        p = f"curve.{name}."
        out[p + "family"] = spec.family
        if spec.family == "linear_gain":
            out[p + "beta"] = repr(float(spec.beta))
        elif spec.family != "identity":
            out[p + "a"] = repr(float(spec.a))
            out[p + "width"] = repr(float(spec.width))
        if spec.family == "gamma_s_curve" and spec.gamma is not None:
            out[p + "gamma"] = repr(float(spec.gamma))
    return out


def dumps(config: EnhanceConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in to_mapping(config).items())


def parse_lines(text: str) -> dict[str, str]:
    items = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        items[key] = value
    return items


def from_mapping(items: dict[str, str]) -> EnhanceConfig:
    items = dict(items)
    known = {"kernel", "h", "hx", "spatial", "window", "patch", "levels", "norm",
             "alpha", "mask", "mask_level", "mask_gamma", "color"}
    for key in items:
        if key in known:
            continue
        parts = key.split(".")
        if len(parts) != 3 or parts[0] != "curve" or parts[2] not in _CURVE_ATTRS:
            raise ConfigError(f"unknown config key {key!r}")

    k = _int(items.get("levels", "2"))
    names = layer_names(max(k, 1))
    for key in items:
        if key.startswith("curve.") and key.split(".")[1] not in names:
            raise ConfigError(f"{key!r} does not name a layer for levels={k}")

    try:
        kernel = KernelParams(
            kernel=items.get("kernel", "nlm"),
            h_y=_num(items.get("h", "0.7")),
            h_x=_num(items["hx"]) if "hx" in items else None,
            spatial_term=_bool(items.get("spatial", "off")),
            window_radius=_int(items.get("window", "2")),
            patch_radius=_int(items.get("patch", "1")),
        )
        norm_name = items.get("norm", "fast")
        if norm_name not in _NORM_NAMES:
            raise ConfigError(f"unknown norm {norm_name!r}")
        alpha = items.get("alpha", "invmean")
        alpha = _ALPHA_NAMES[alpha] if alpha in _ALPHA_NAMES else _num(alpha)
        norm = NormMode(_NORM_NAMES[norm_name], alpha)

        curves = []
        for name in names:
            p = f"curve.{name}."
            fam = items.get(p + "family", "identity")
            curves.append(CurveSpec(
                family=fam,
                a=_num(items.get(p + "a", "1")),
                width=_num(items.get(p + "width", "1")),
                gamma=_num(items[p + "gamma"]) if p + "gamma" in items else None,
                beta=_num(items[p + "beta"]) if p + "beta" in items else None,
                domain="base" if name == "base" else "signed_detail",
            ))
        color = items.get("color", "luma")
        if color not in _COLOR_NAMES:
            raise ConfigError(f"unknown color mode {color!r}")
        return EnhanceConfig(
            kernel=kernel, k=k, norm=norm, curves=tuple(curves),
            mask_enabled=_bool(items.get("mask", "off")),
            mask_source_level=_int(items.get("mask_level", "1")),
            mask_gamma=_num(items.get("mask_gamma", "1")),
            color_mode=_COLOR_NAMES[color],
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None


def loads(text: str) -> EnhanceConfig:
    return from_mapping(parse_lines(text))
