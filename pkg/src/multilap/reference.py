"""Dense brute-force oracles for tiny images.

Everything here assembles full ``n x n`` matrices from a direct double loop
over pixel pairs, independent of the windowed code paths, so it can be used
to check them.  All entry points refuse images with more than 4096 pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .affinity import KernelParams, check_plane
from .normfilter import NormMode
from .tonemap import apply_curve, make_curve

MAX_PIXELS = 4096


def _guard(y) -> np.ndarray:
    y = check_plane(y)
    if y.size > MAX_PIXELS:
        raise ValueError(f"image too large for dense reference ({y.size} > {MAX_PIXELS} pixels)")
    return y


def pair_affinity(y: np.ndarray, params: KernelParams, i: tuple[int, int],
                  j: tuple[int, int]) -> float:
    """Kernel value for one pixel pair, evaluated from scratch."""
    h, w = y.shape
    (ri, ci), (rj, cj) = i, j
    if params.kernel == "bilateral" or params.patch_radius == 0:
        dist = (y[ri, ci] - y[rj, cj]) ** 2
    else:
        q = params.patch_radius
        total, count = 0.0, 0
        for pr in range(-q, q + 1):
            for pc in range(-q, q + 1):
                a, b = (ri + pr, ci + pc), (rj + pr, cj + pc)
                if 0 <= a[0] < h and 0 <= a[1] < w and 0 <= b[0] < h and 0 <= b[1] < w:
                    total += (y[a] - y[b]) ** 2
                    count += 1
        dist = total / count
    e = -dist / params.h_y
    if params.spatial_term:
        e -= ((ri - rj) ** 2 + (ci - cj) ** 2) / params.h_x
    return math.exp(e)


def dense_kernel(y, params: KernelParams) -> np.ndarray:
    """``K`` with zeros for pairs outside each other's window."""
    y = _guard(y)
    h, w = y.shape
    n = y.size
    r = params.window_radius
    K = np.zeros((n, n))
    for ri in range(h):
        for ci in range(w):
            for rj in range(max(0, ri - r), min(h, ri + r + 1)):
                for cj in range(max(0, ci - r), min(w, ci + r + 1)):
                    K[ri * w + ci, rj * w + cj] = pair_affinity(y, params, (ri, ci), (rj, cj))
    return K


def dense_window_counts(shape: tuple[int, int], radius: int) -> np.ndarray:
    h, w = shape
    p = np.zeros(h * w, dtype=int)
    for ri in range(h):
        for ci in range(w):
            rows = min(h, ri + radius + 1) - max(0, ri - radius)
            cols = min(w, ci + radius + 1) - max(0, ci - radius)
            p[ri * w + ci] = rows * cols
    return p


@dataclass
class DenseFilter:
    matrix: np.ndarray
    exact: bool
    K: np.ndarray
    alpha: float | None = None

    @property
    def degrees(self) -> np.ndarray:
        return self.K.sum(axis=1)

    def apply(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        return (self.matrix @ y.ravel()).reshape(y.shape)


def dense_alpha(K: np.ndarray, strategy) -> float:
    d = K.sum(axis=1)
    if not isinstance(strategy, str):
        return float(strategy)
    if strategy == "inverse_mean_degree":
        return 1.0 / d.mean()
    if strategy == "trace_ratio":
        return d.sum() / (d * d).sum()
    if strategy == "closed_form":
        D = np.diag(d)
        num = np.trace(K @ np.diag(1 / d) @ K) - 2 * np.trace(K) + np.trace(D)
        den = np.trace(K @ K) - 2 * np.trace(K @ D) + np.trace(D @ D)
        return num / den if den > 1e-12 else 1.0 / d.mean()
    raise ValueError(f"unknown alpha strategy {strategy!r}")


def dense_from_kernel(K: np.ndarray, mode: NormMode, alpha: float | None = None) -> DenseFilter:
    d = K.sum(axis=1)
    if mode.mode == "exact":
        return DenseFilter(K / d[:, None], True, K)
    if alpha is None:
        alpha = dense_alpha(K, mode.alpha)
    n = K.shape[0]
    return DenseFilter(np.eye(n) + alpha * (K - np.diag(d)), False, K, alpha)


def dense_assemble(y, params: KernelParams, mode: NormMode | None = None,
                   alpha: float | None = None) -> DenseFilter:
    mode = mode or NormMode("exact")
    return dense_from_kernel(dense_kernel(y, params), mode, alpha)


@dataclass
class ScanResult:
    alpha_star: float
    grid: np.ndarray
    J_values: np.ndarray

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0]) if self.grid.size > 1 else 0.0


def frobenius_scan(y, params: KernelParams, lo: float = 0.0, hi: float | None = None,
                   steps: int = 10_000, K: np.ndarray | None = None) -> ScanResult:
    """Evaluate ``J(a) = ||W - W_hat(a)||_F^2`` on a uniform grid and take the argmin.

    ``hi`` defaults to ``2 / mean(d)``; the grid has ``steps`` intervals.
    """
    if steps < 1:
        raise ValueError("empty grid")
    if K is None:
        K = dense_kernel(y, params)
    d = K.sum(axis=1)
    if hi is None:
        hi = 2.0 / d.mean()
    grid = np.linspace(lo, hi, steps + 1)
    W = K / d[:, None]
    A = W - np.eye(K.shape[0])
    L = K - np.diag(d)
    J = np.empty(grid.size)
    chunk = max(1, 2_000_000 // A.size)
    for s in range(0, grid.size, chunk):
        g = grid[s:s + chunk]
        diff = A[None] - g[:, None, None] * L[None]
        J[s:s + chunk] = (diff * diff).sum(axis=(1, 2))
    return ScanResult(float(grid[np.argmin(J)]), grid, J)


def diffusion_power(y, params: KernelParams, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be >= 1")
    y = _guard(y)
    W = dense_assemble(y, params, NormMode("exact")).matrix
    v = y.ravel()
    for _ in range(k):
        v = W @ v
    return v.reshape(y.shape)


def dense_variance_factors(y, params: KernelParams, alpha: float):
    """(nu, nu_hat, rho, self_weight) from dense rows of W and W_hat."""
    K = dense_kernel(y, params)
    d = K.sum(axis=1)
    W = K / d[:, None]
    Wh = np.eye(K.shape[0]) + alpha * (K - np.diag(d))
    return (W ** 2).sum(axis=1), (Wh ** 2).sum(axis=1), alpha * d, np.diag(W).copy()


def dense_enhance(y, config, clamp: bool = True) -> np.ndarray:
    """The whole single-plane chain composed by hand from dense matrices.

    Each level's kernel is evaluated explicitly at ``h / 2**l`` rather than by
    squaring, and the structure mask comes from dense row sums.
    """
    y = _guard(y)
    n = y.size
    v = y.ravel()
    filtered, Ks = [], []
    params = config.kernel
    for _ in range(config.k):
        K = dense_kernel(y, params)
        Ks.append(K)
        filtered.append(dense_from_kernel(K, config.norm).matrix @ v)
        params = params.halved()
    layers = [filtered[0]]
    layers += [filtered[l + 1] - filtered[l] for l in range(config.k - 1)]
    layers.append(v - filtered[-1])
    mapped = [apply_curve(make_curve(spec), layer)
              for spec, layer in zip(config.curves, layers)]
    if config.mask_enabled:
        p = dense_window_counts(y.shape, config.kernel.window_radius)
        m = 1.0 - Ks[config.mask_source_level - 1].sum(axis=1) / p
        m = np.clip(m, 0.0, 1.0) ** config.mask_gamma
    else:
        m = np.ones(n)
    z = mapped[0] + sum(m * t for t in mapped[1:])
    if clamp:
        z = np.clip(z, 0.0, 1.0)
    return z.reshape(y.shape)
