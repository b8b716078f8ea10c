"""Per-layer point-wise mapping curves, realised as lookup tables.

Signed detail curves act on ``[-w, w]``::

    S(t) = w * (2 sigmoid(a t / w) - 1) / (2 sigmoid(a) - 1)

which is odd, passes through ``(+-w, +-w)`` and joins the identity there.
Base-layer curves use the same shape recentred at 0.5 over
``[0.5 - w/2, 0.5 + w/2]``.  Outside its active range every curve is the
identity (linear gain excepted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FAMILIES = ("identity", "linear_gain", "s_curve", "inverse_s_curve", "gamma_s_curve")
DOMAINS = ("signed_detail", "base")
N_LUT = 4096
DEFAULT_GAMMA = 0.75


@dataclass(frozen=True)
class CurveSpec:
    family: str = "identity"
    a: float = 1.0
    width: float = 1.0
    gamma: float | None = None
    beta: float | None = None
    domain: str = "signed_detail"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown curve family {self.family!r}")
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown curve domain {self.domain!r}")
        if self.family == "linear_gain":
            if self.beta is None or not math.isfinite(self.beta):
                raise ValueError("linear_gain needs a finite beta")
        if self.family in ("s_curve", "inverse_s_curve", "gamma_s_curve"):
            if not (self.a > 0 and math.isfinite(self.a)):
                raise ValueError("curve strength a must be positive")
            if not 0 < self.width <= 1:
                raise ValueError("curve width must lie in (0, 1]")
        if self.family == "gamma_s_curve":
            if self.domain != "base":
                raise ValueError("gamma_s_curve is defined on the base domain only")
            if self.gamma is not None and not self.gamma > 0:
                raise ValueError("gamma must be positive")

    def with_domain(self, domain: str) -> "CurveSpec":
        return CurveSpec(self.family, self.a, self.width, self.gamma, self.beta, domain)


def sigmoid(u):
    return 1.0 / (1.0 + np.exp(-u))


def s_curve_signed(t, a: float, w: float):
    """Closed-form signed s-curve on ``[-w, w]`` (no identity extension)."""
    t = np.asarray(t, dtype=np.float64)
    return w * (2.0 * sigmoid(a * t / w) - 1.0) / (2.0 * sigmoid(a) - 1.0)


def central_slope(a: float) -> float:
    return (a / 2.0) / (2.0 * sigmoid(a) - 1.0)


@dataclass(frozen=True)
class ToneCurve:
    """Piecewise-linear table on ``[lo, hi]``; identity outside.

    ``xs`` is increasing.  ``linear_gain`` and ``identity`` curves carry no
    table and are evaluated exactly.
    """

    spec: CurveSpec
    lo: float
    hi: float
    xs: np.ndarray | None
    ys: np.ndarray | None

    def __call__(self, t):
        return apply_curve(self, t)


def _active_range(spec: CurveSpec) -> tuple[float, float, float, float]:
    """(lo, hi, centre, half-width) of the non-identity part."""
    if spec.domain == "signed_detail":
        return -spec.width, spec.width, 0.0, spec.width
    half = spec.width / 2.0
    return 0.5 - half, 0.5 + half, 0.5, half


def _forward_table(spec: CurveSpec, n: int):
    lo, hi, c, half = _active_range(spec)
    if spec.family == "gamma_s_curve":
        lo, hi = 0.0, 1.0
    xs = np.linspace(lo, hi, n)
    xs[0], xs[-1] = lo, hi
    if spec.family == "gamma_s_curve":
        g = spec.gamma if spec.gamma is not None else DEFAULT_GAMMA
        u = xs ** g
        blo, bhi, _, _ = _active_range(spec)
        inside = (u >= blo) & (u <= bhi)
        ys = u.copy()
        ys[inside] = c + s_curve_signed(u[inside] - c, spec.a, half)
    else:
        ys = c + s_curve_signed(xs - c, spec.a, half)
    # pin the joins to the identity exactly
    ys[0], ys[-1] = (0.0, 1.0) if spec.family == "gamma_s_curve" else (lo, hi)
    return lo, hi, xs, ys


def make_curve(spec: CurveSpec, n: int = N_LUT) -> ToneCurve:
    if spec.family in ("identity", "linear_gain"):
        return ToneCurve(spec, 0.0, 0.0, None, None)
    lo, hi, xs, ys = _forward_table(spec, n)
    ys = np.maximum.accumulate(ys)
    if spec.family == "inverse_s_curve":
        # invert the monotone table by swapping axes; interpolation then
        # searches the (non-uniform) forward values.  Saturated runs of equal
        # values collapse to their first sample.
        keep = np.concatenate(([True], np.diff(ys) > 0))
        xs, ys = ys[keep], xs[keep]
        xs[-1], ys[-1] = hi, hi
    return ToneCurve(spec, lo, hi, xs, ys)


def apply_curve(c: ToneCurve, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    fam = c.spec.family
    if fam == "identity":
        return p.copy()
    if fam == "linear_gain":
        return c.spec.beta * p
    out = p.copy()
    inside = (p >= c.lo) & (p <= c.hi)
    t = p[inside]
    sign = None
    if c.spec.domain == "signed_detail":
        # evaluate on |t| so the result is exactly odd and T(0) = 0
        sign, t = np.sign(t), np.abs(t)
    if fam == "inverse_s_curve":
        v = np.interp(t, c.xs, c.ys)
    else:
        v = _lookup_uniform(c, t)
    out[inside] = v if sign is None else sign * v
    return out


def _lookup_uniform(c: ToneCurve, t: np.ndarray) -> np.ndarray:
    # index arithmetic instead of a binary search
    n = c.ys.size
    pos = (t - c.lo) * ((n - 1) / (c.hi - c.lo))
    i = np.minimum(pos.astype(np.intp), n - 2)
    f = pos - i
    y0, y1 = c.ys[i], c.ys[i + 1]
    # capped at the upper node so rounding cannot break monotonicity
    v = np.minimum(y0 + f * (y1 - y0), y1)
    v[t == c.lo] = c.ys[0]
    v[t == c.hi] = c.ys[-1]
    return v
