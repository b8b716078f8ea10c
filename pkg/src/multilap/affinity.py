"""Windowed un-normalized affinity weights (NLM and bilateral kernels).

Weights are stored densely as one plane per window offset: ``weights[o, i]``
holds ``k_ij`` for ``j = i + offsets[o]``.  Entries whose neighbour falls
outside the image are zero and flagged invalid.  Windows and patches are
clipped at the borders; nothing is padded.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np

KERNELS = ("nlm", "bilateral")


@dataclass(frozen=True)
class KernelParams:
    kernel: str = "nlm"
    h_y: float = 0.7
    h_x: float | None = None
    spatial_term: bool = False
    window_radius: int = 2
    patch_radius: int = 1

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not self.h_y > 0:
            raise ValueError("h_y must be positive")
        if self.spatial_term and not (self.h_x is not None and self.h_x > 0):
            raise ValueError("spatial term requires h_x > 0")
        if int(self.window_radius) != self.window_radius or self.window_radius < 1:
            raise ValueError("window_radius must be an integer >= 1")
        if int(self.patch_radius) != self.patch_radius or self.patch_radius < 0:
            raise ValueError("patch_radius must be an integer >= 0")

    @property
    def window_size(self) -> int:
        return (2 * self.window_radius + 1) ** 2

    def halved(self) -> "KernelParams":
        """Parameters of the kernel obtained by squaring every weight."""
        h_x = self.h_x / 2 if self.h_x is not None else None
        return replace(self, h_y=self.h_y / 2, h_x=h_x)


class _ExpCounter:
    """Counts scalar exp() evaluations made while building weight fields."""

    def __init__(self):
        self._lock = threading.Lock()
        self.count = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        with self._lock:
            self.count += x.size
        return np.exp(x)

    def reset(self) -> None:
        with self._lock:
            self.count = 0


exp_counter = _ExpCounter()


def window_offsets(radius: int) -> list[tuple[int, int]]:
    """Row-major list of (dy, dx) offsets; the centre sits at index len // 2."""
    r = range(-radius, radius + 1)
    return [(dy, dx) for dy in r for dx in r]


def offset_slices(shape: tuple[int, int], dy: int, dx: int):
    """Slices (dst, src) such that pixel ``dst`` pairs with ``src = dst + (dy, dx)``.

    Returns None when the offset leaves no valid pair.
    """
    h, w = shape
    if abs(dy) >= h or abs(dx) >= w:
        return None
    r0, r1 = max(0, -dy), h - max(0, dy)
    c0, c1 = max(0, -dx), w - max(0, dx)
    dst = (slice(r0, r1), slice(c0, c1))
    src = (slice(r0 + dy, r1 + dy), slice(c0 + dx, c1 + dx))
    return dst, src


def _box_mean(a: np.ndarray, q: int) -> np.ndarray:
    """Mean over the clipped (2q+1)^2 neighbourhood, in a fixed summation order."""
    if q == 0:
        return a
    h, w = a.shape
    rows = a.copy()
    for s in range(1, min(q, w - 1) + 1):
        rows[:, s:] += a[:, :-s]
        rows[:, :-s] += a[:, s:]
    out = rows.copy()
    for s in range(1, min(q, h - 1) + 1):
        out[s:] += rows[:-s]
        out[:-s] += rows[s:]
    out /= _clipped_counts(h, q)[:, None]
    out /= _clipped_counts(w, q)[None, :]
    return out


def _clipped_counts(n: int, q: int) -> np.ndarray:
    idx = np.arange(n)
    return (np.minimum(idx + q, n - 1) - np.maximum(idx - q, 0) + 1).astype(np.float64)


def offset_weights(y: np.ndarray, params: KernelParams, dy: int, dx: int):
    """Affinities for every valid pair at one window offset.

    Returns ``(dst, src, k)`` where ``k`` has the shape of ``y[dst]``, or None.
    """
    sl = offset_slices(y.shape, dy, dx)
    if sl is None:
        return None
    dst, src = sl
    diff = y[dst] - y[src]
    dist = diff * diff
    if params.kernel == "nlm":
        # mean over the overlap of the two patches that lies inside the image
        dist = _box_mean(dist, params.patch_radius)
    expo = dist * (-1.0 / params.h_y)
    if params.spatial_term:
        expo = expo - (dy * dy + dx * dx) / params.h_x
    return dst, src, exp_counter(expo)


def check_plane(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2:
        raise ValueError("expected a single-channel 2-D image plane")
    if y.size == 0:
        raise ValueError("empty image")
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite input")
    return y


@dataclass
class WeightField:
    """Per-pixel window stacks of affinities plus degrees and valid counts."""

    params: KernelParams
    weights: np.ndarray  # (m, H, W), zero where invalid
    degree: np.ndarray  # (H, W)
    valid_count: np.ndarray  # (H, W) int
    offsets: list[tuple[int, int]] = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.degree.shape

    @property
    def height(self) -> int:
        return self.shape[0]

    @property
    def width(self) -> int:
        return self.shape[1]

    @property
    def window_radius(self) -> int:
        return self.params.window_radius

    @property
    def center(self) -> int:
        return len(self.offsets) // 2

    @property
    def valid(self) -> np.ndarray:
        v = np.zeros(self.weights.shape, dtype=bool)
        for o, (dy, dx) in enumerate(self.offsets):
            sl = offset_slices(self.shape, dy, dx)
            if sl is not None:
                v[o][sl[0]] = True
        return v

    def pairs(self) -> Iterator[tuple[int, tuple, tuple]]:
        """Yield ``(o, dst, src)`` for every offset with at least one valid pair."""
        for o, (dy, dx) in enumerate(self.offsets):
            sl = offset_slices(self.shape, dy, dx)
            if sl is not None:
                yield o, sl[0], sl[1]


def valid_counts(shape: tuple[int, int], radius: int) -> np.ndarray:
    h, w = shape
    idx_r, idx_c = np.arange(h), np.arange(w)
    nr = np.minimum(idx_r + radius, h - 1) - np.maximum(idx_r - radius, 0) + 1
    nc = np.minimum(idx_c + radius, w - 1) - np.maximum(idx_c - radius, 0) + 1
    return np.multiply.outer(nr, nc)


def build_weight_field(y, params: KernelParams, threads: int = 1) -> WeightField:
    """Evaluate the kernel once for every valid (i, j) pair in each window.

    Offsets are computed independently (optionally on a thread pool) and
    degrees are accumulated afterwards in offset order, so the result does
    not depend on ``threads``.
    """
    y = check_plane(y)
    offsets = window_offsets(params.window_radius)
    weights = np.zeros((len(offsets),) + y.shape)

    def work(o):
        res = offset_weights(y, params, *offsets[o])
        if res is not None:
            dst, _, k = res
            weights[o][dst] = k

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, range(len(offsets))))
    else:
        for o in range(len(offsets)):
            work(o)

    wf = WeightField(params, weights, np.zeros(y.shape),
                     valid_counts(y.shape, params.window_radius), offsets)
    wf.degree = degrees_of(wf)
    return wf


def degrees_of(w: WeightField) -> np.ndarray:
    d = np.zeros(w.shape)
    for o, dst, _ in w.pairs():
        d[dst] += w.weights[o][dst]
    return d


class FieldStats(NamedTuple):
    s1: float
    s2: float
    d_bar: float
    n: int
    m: int


def field_stats(w: WeightField) -> FieldStats:
    d = w.degree
    s1 = float(d.sum())
    s2 = float((d * d).sum())
    n = d.size
    return FieldStats(s1, s2, s1 / n, n, w.params.window_size)
