import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def brute_force_kernel(y, kernel="nlm", h_y=0.7, h_x=None, spatial=False, r=2, q=1):
    """Straight double loop over pixel pairs and patch offsets; returns dense K."""
    h, w = y.shape
    n = h * w
    K = np.zeros((n, n))
    for i in range(n):
        ri, ci = divmod(i, w)
        for j in range(n):
            rj, cj = divmod(j, w)
            if abs(ri - rj) > r or abs(ci - cj) > r:
                continue
            if kernel == "bilateral" or q == 0:
                dist = (y[ri, ci] - y[rj, cj]) ** 2
            else:
                vals = []
                for a in range(-q, q + 1):
                    for b in range(-q, q + 1):
                        if (0 <= ri + a < h and 0 <= ci + b < w
                                and 0 <= rj + a < h and 0 <= cj + b < w):
                            vals.append((y[ri + a, ci + b] - y[rj + a, cj + b]) ** 2)
                dist = sum(vals) / len(vals)
            e = -dist / h_y
            if spatial:
                e -= ((ri - rj) ** 2 + (ci - cj) ** 2) / h_x
            K[i, j] = math.exp(e)
    return K


def field_to_dense(w):
    """Scatter a WeightField into an n x n matrix."""
    h, wd = w.shape
    K = np.zeros((h * wd, h * wd))
    for o, dst, _ in w.pairs():
        dy, dx = w.offsets[o]
        rows, cols = np.mgrid[dst[0], dst[1]]
        i = (rows * wd + cols).ravel()
        j = ((rows + dy) * wd + cols + dx).ravel()
        K[i, j] = w.weights[o][dst].ravel()
    return K
