"""Exact row-normalized filtering and the normalization-free approximation.

The exact filter is ``W = D^-1 K``.  The approximation replaces ``D^-1`` with
a scalar, ``W_hat = I + alpha (K - D)``, which keeps rows summing to one and
stays symmetric for every ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .affinity import WeightField, field_stats

ALPHA_STRATEGIES = ("closed_form", "trace_ratio", "inverse_mean_degree")
NORM_MODES = ("exact", "norm_free")

# denominators of the closed form below this are treated as K == D
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class NormMode:
    """How each cascade level is normalized.

    ``alpha`` is one of :data:`ALPHA_STRATEGIES` or a positive float (fixed).
    """

    mode: str = "norm_free"
    alpha: Union[str, float] = "inverse_mean_degree"

    def __post_init__(self):
        if self.mode not in NORM_MODES:
            raise ValueError(f"unknown normalization mode {self.mode!r}")
        if isinstance(self.alpha, str):
            if self.alpha not in ALPHA_STRATEGIES:
                raise ValueError(f"unknown alpha strategy {self.alpha!r}")
        elif not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("fixed alpha must be a positive finite number")


@dataclass(frozen=True)
class AlphaEstimate:
    value: float
    strategy: str
    degenerate: bool = False

    def __float__(self) -> float:
        return self.value


def _check_dims(w: WeightField, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != w.shape:
        raise ValueError(f"dimension mismatch: field {w.shape}, image {y.shape}")
    return y


def kernel_sum(w: WeightField, y) -> np.ndarray:
    """``K y`` accumulated over window offsets in a fixed order."""
    y = _check_dims(w, y)
    acc = np.zeros(w.shape)
    for o, dst, src in w.pairs():
        acc[dst] += w.weights[o][dst] * y[src]
    return acc


def apply_exact(w: WeightField, y) -> np.ndarray:
    return kernel_sum(w, y) / w.degree


def apply_norm_free(w: WeightField, y, alpha: float) -> np.ndarray:
    """``y + alpha (K y - D y)``.  Not clamped; may leave the input range."""
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    y = _check_dims(w, y)
    return y + alpha * (kernel_sum(w, y) - w.degree * y)


def apply_filter(w: WeightField, y, norm: NormMode, alpha: float | None = None):
    if norm.mode == "exact":
        return apply_exact(w, y)
    if alpha is None:
        alpha = float(estimate_alpha(w, norm.alpha))
    return apply_norm_free(w, y, alpha)


def trace_terms(w: WeightField) -> dict[str, float]:
    """Traces entering the least-squares alpha, computed from the windows.

    Relies on ``k_ij == k_ji`` (true for both kernels with clipped windows).
    """
    d = w.degree
    kc = w.weights[w.center]
    tr_k2 = 0.0
    tr_kdk = 0.0
    for o, dst, src in w.pairs():
        k = w.weights[o][dst]
        k2 = k * k
        tr_k2 += float(k2.sum())
        tr_kdk += float((k2 / d[src]).sum())
    return {
        "tr_K": float(kc.sum()),
        "tr_D": float(d.sum()),
        "tr_KD": float((kc * d).sum()),
        "tr_D2": float((d * d).sum()),
        "tr_K2": tr_k2,
        "tr_KDinvK": tr_kdk,
    }


def closed_form_alpha(w: WeightField) -> AlphaEstimate:
    t = trace_terms(w)
    num = t["tr_KDinvK"] - 2 * t["tr_K"] + t["tr_D"]
    den = t["tr_K2"] - 2 * t["tr_KD"] + t["tr_D2"]
    if den <= DEGENERATE_TOL:
        return AlphaEstimate(1.0 / field_stats(w).d_bar, "inverse_mean_degree", True)
    return AlphaEstimate(num / den, "closed_form")


def estimate_alpha(w: WeightField, strategy: Union[str, float] = "inverse_mean_degree"
                   ) -> AlphaEstimate:
    if not isinstance(strategy, str):
        NormMode(alpha=strategy)  # validates
        return AlphaEstimate(float(strategy), "fixed")
    if strategy == "closed_form":
        return closed_form_alpha(w)
    st = field_stats(w)
    if strategy == "trace_ratio":
        return AlphaEstimate(st.s1 / st.s2, strategy)
    if strategy == "inverse_mean_degree":
        return AlphaEstimate(1.0 / st.d_bar, strategy)
    raise ValueError(f"unknown alpha strategy {strategy!r}")


@dataclass
class VarianceFactors:
    nu: np.ndarray
    nu_hat: np.ndarray
    rho: np.ndarray
    nu_hat_approx: np.ndarray
    self_weight: np.ndarray  # exact normalized w_ii


def variance_factors(w: WeightField, alpha: float) -> VarianceFactors:
    """Sum-squared filter weights of the exact and approximate filters per pixel."""
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    d = w.degree
    nu = np.zeros(w.shape)
    nu_hat = np.zeros(w.shape)
    for o, dst, _ in w.pairs():
        k = w.weights[o][dst]
        wn = k / d[dst]
        nu[dst] += wn * wn
        if o == w.center:
            wh = 1.0 + alpha * (k - d[dst])
        else:
            wh = alpha * k
        nu_hat[dst] += wh * wh
    rho = alpha * d
    approx = rho * rho * nu + (rho - 1.0) ** 2
    return VarianceFactors(nu, nu_hat, rho, approx, w.weights[w.center] / d)
