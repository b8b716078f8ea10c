"""Running-time grid over window size and image size.

Only the enhancement call is timed; image synthesis and I/O are excluded.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .pipeline import EnhanceConfig, enhance_plane, resolve_preset

DEFAULT_WINDOWS = (3, 5, 7, 9)
DEFAULT_SIZES = (0.4, 1.0, 3.0, 12.0)
FIELDS = ("window", "megapixels", "width", "height", "seconds", "mp_per_s")


@dataclass
class BenchRow:
    window: int
    megapixels: float
    width: int
    height: int
    seconds: float

    @property
    def mp_per_s(self) -> float:
        return self.width * self.height / 1e6 / self.seconds


def synthetic_image(megapixels: float, seed: int = 0) -> np.ndarray:
    side = max(1, round(math.sqrt(megapixels * 1e6)))
    return np.random.default_rng(seed).random((side, side))


def run_benchmark(windows=DEFAULT_WINDOWS, sizes=DEFAULT_SIZES,
                  config: EnhanceConfig | None = None, repeats: int = 1,
                  threads: int = 1, seed: int = 0) -> list[BenchRow]:
    config = config or resolve_preset("sharpen")
    rows = []
    for mp in sizes:
        y = synthetic_image(mp, seed)
        for win in windows:
            if win < 3 or win % 2 == 0:
                raise ValueError(f"window size must be odd and >= 3, got {win}")
            cfg = replace(config, kernel=replace(config.kernel, window_radius=win // 2))
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                enhance_plane(y, cfg, threads=threads)
                times.append(time.perf_counter() - t0)
            rows.append(BenchRow(win, mp, y.shape[1], y.shape[0], sum(times) / len(times)))
    return rows


def format_rows(rows: list[BenchRow], delimiter: str = "\t") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(FIELDS)
    for r in rows:
        w.writerow([f"{r.window}x{r.window}", f"{r.megapixels:g}", r.width, r.height,
                    f"{r.seconds:.4f}", f"{r.mp_per_s:.3f}"])
    return buf.getvalue()
