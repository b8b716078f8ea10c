"""Oracle suite run by ``multilap --verify`` on built-in tiny fixtures."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import reference as ref
from .affinity import KernelParams, build_weight_field, exp_counter, field_stats
from .cascade import build_cascade, hadamard_square
from .normfilter import (NormMode, apply_exact, apply_norm_free, closed_form_alpha,
                         variance_factors)
from .pipeline import enhance_plane, resolve_preset


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def fixtures() -> dict[str, np.ndarray]:
    rng = np.random.default_rng(20160419)
    checker = (np.indices((4, 4)).sum(axis=0) % 2).astype(float)
    return {
        "step_1x4": np.array([[0.0, 0.0, 1.0, 1.0]]),
        "ramp_1x8": np.linspace(0.0, 1.0, 8)[None, :],
        "noisy_step_1x6": np.array([[0.1, 0.15, 0.05, 0.9, 0.85, 0.95]]),
        "checker_4x4": 0.25 + 0.5 * checker,
        "random_4x4": rng.random((4, 4)),
    }


def _max(a) -> float:
    return float(np.max(np.abs(a)))


def _field_checks(name: str, y: np.ndarray, params: KernelParams) -> list[Check]:
    out = []
    w = build_weight_field(y, params)
    K = ref.dense_kernel(y, params)
    d_bar = field_stats(w).d_bar

    exact = ref.dense_from_kernel(K, NormMode("exact"))
    err = _max(exact.apply(y) - apply_exact(w, y))
    out.append(Check(f"{name}: exact filter vs dense D^-1 K", err <= 1e-10, f"{err:.2e}"))

    for scale in (0.1, 1.0, 10.0):
        a = scale / d_bar
        approx = ref.dense_from_kernel(K, NormMode("norm_free"), a)
        err = _max(approx.apply(y) - apply_norm_free(w, y, a))
        rows = _max(approx.matrix.sum(axis=1) - 1.0)
        sym = _max(approx.matrix - approx.matrix.T)
        ok = err <= 1e-10 and rows <= 1e-6 and sym <= 1e-9
        out.append(Check(f"{name}: norm-free alpha={scale:g}/d_bar", ok,
                         f"apply {err:.1e}, rows {rows:.1e}, sym {sym:.1e}"))

    scan = ref.frobenius_scan(y, params, K=K)
    est = closed_form_alpha(w)
    gap = abs(est.value - scan.alpha_star)
    out.append(Check(f"{name}: closed-form alpha vs Frobenius scan", gap <= scan.step,
                     f"|{est.value:.6g} - {scan.alpha_star:.6g}| vs step {scan.step:.2e}"))

    st = field_stats(w)
    ratio = st.s1 / st.s2
    ok = 1.0 / (st.m * st.n) <= ratio <= 1.0 / st.d_bar
    out.append(Check(f"{name}: 1/(mn) <= s1/s2 <= 1/d_bar", ok, f"s1/s2 = {ratio:.6g}"))

    sq = hadamard_square(w)
    direct = build_weight_field(y, params.halved())
    err = _max(sq.weights - direct.weights)
    out.append(Check(f"{name}: squared field vs explicit h/2", err <= 1e-9, f"{err:.2e}"))

    vf = variance_factors(w, 1.0 / d_bar)
    slack = np.abs(vf.nu_hat - vf.nu_hat_approx) - (
        2 * np.abs(vf.rho * (1 - vf.rho)) * vf.self_weight + 1e-9)
    out.append(Check(f"{name}: variance-factor bound", bool(np.all(slack <= 0)),
                     f"max slack {float(slack.max()):.2e}"))
    return out


def _enhance_checks(name: str, y: np.ndarray) -> list[Check]:
    out = []
    for preset in ("sharpen", "denoise_sharpen", "smooth"):
        cfg = replace(resolve_preset(preset), norm=NormMode("exact"))
        got = enhance_plane(y, cfg, engine="field").output
        want = ref.dense_enhance(y, cfg)
        err = _max(got - want)
        out.append(Check(f"{name}: {preset} (exact) vs dense chain", err <= 1e-6, f"{err:.2e}"))
    return out


def run_checks(progress: Callable[[Check], None] | None = None) -> list[Check]:
    checks = []
    params = resolve_preset("sharpen").kernel
    for name, y in fixtures().items():
        for c in _field_checks(name, y, params) + _enhance_checks(name, y):
            checks.append(c)
            if progress:
                progress(c)
    # cascade exp count does not grow with the number of levels
    y = fixtures()["random_4x4"]
    counts = []
    for k in (1, 2, 3):
        exp_counter.reset()
        build_cascade(y, params, k, NormMode("exact"))
        counts.append(exp_counter.count)
    pairs = int(build_weight_field(y, params).valid_count.sum())
    c = Check("exp() evaluations independent of k", counts == [pairs] * 3,
              f"counts {counts}, valid pairs {pairs}")
    checks.append(c)
    if progress:
        progress(c)
    return checks
