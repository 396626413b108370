"""Chrominance propagation: affinity-weighted sparse linear system solved
with successive over-relaxation, hint cells held as hard constraints."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.linalg import spsolve_triangular

from . import color
from .hints import HintSet


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-6
    max_iter: int = 10000
    sigma_floor: float = 0.01
    omega: float = 1.6

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.omega < 2:
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")


@dataclass(frozen=True)
class AffinityGraph:
    """Row-stochastic 3x3-neighborhood weights as a sparse matrix."""

    weights: sparse.csr_matrix  # (H*W, H*W)
    shape: tuple[int, int]


@dataclass(frozen=True)
class PropagationResult:
    a: np.ndarray
    b: np.ndarray
    iterations: int
    residual: float
    no_hints: bool = False


def build_affinity(gray: np.ndarray, sigma_floor: float = 0.01) -> AffinityGraph:
    """Gaussian intensity affinities over the 3x3 neighborhood.

    w_rs is proportional to exp(-(Y_r - Y_s)^2 / (2 sigma_r^2)) with
    sigma_r the local 3x3 standard deviation floored at sigma_floor;
    rows are normalized to sum to one.
    """
    gray = np.asarray(gray, dtype=np.float64)
    h, w = gray.shape
    if h < 2 or w < 2:
        raise ValueError(f"image must be at least 2x2, got {h}x{w}")
    n = h * w

    mean = ndimage.uniform_filter(gray, size=3, mode="nearest")
    mean_sq = ndimage.uniform_filter(gray**2, size=3, mode="nearest")
    sigma = np.sqrt(np.maximum(mean_sq - mean**2, 0.0))
    sigma = np.maximum(sigma, sigma_floor)

    idx = np.arange(n).reshape(h, w)
    rows, cols, vals = [], [], []
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            sy = slice(max(0, dy), h + min(0, dy))
            sx = slice(max(0, dx), w + min(0, dx))
            ty = slice(max(0, -dy), h + min(0, -dy))
            tx = slice(max(0, -dx), w + min(0, -dx))
            r = idx[ty, tx].ravel()
            c = idx[sy, sx].ravel()
            diff = gray[ty, tx] - gray[sy, sx]
            wgt = np.exp(-(diff**2) / (2.0 * sigma[ty, tx] ** 2)).ravel()
            rows.append(r)
            cols.append(c)
            vals.append(wgt)
    mat = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    row_sums = np.asarray(mat.sum(axis=1)).ravel()
    inv = sparse.diags(1.0 / row_sums)
    return AffinityGraph(weights=(inv @ mat).tocsr(), shape=(h, w))


def hint_constraint_planes(hints: HintSet, shape: tuple[int, int]):
    """Rasterize hint cells into fixed (a, b) planes plus a constraint mask."""
    h, w = shape
    d = hints.cell_size
    fixed = np.zeros((h, w), dtype=bool)
    a = np.zeros((h, w))
    b = np.zeros((h, w))
    for hp in hints.hints:
        cy, cx = hp.cy // d, hp.cx // d
        sy = slice(cy * d, min((cy + 1) * d, h))
        sx = slice(cx * d, min((cx + 1) * d, w))
        fixed[sy, sx] = True
        a[sy, sx] = hp.a
        b[sy, sx] = hp.b
    return a, b, fixed


def _sor_solve(w_free: sparse.csr_matrix, b_vec: np.ndarray, cfg: SolverConfig,
               x0: float = 0.0):
    """SOR iteration for (I - W_ff) x = b via sparse triangular sweeps."""
    n = w_free.shape[0]
    a_mat = (sparse.identity(n, format="csr") - w_free).tocsr()
    lower = sparse.tril(a_mat, k=-1, format="csr")
    upper = sparse.triu(a_mat, k=1, format="csr")
    m = (sparse.identity(n, format="csr") + cfg.omega * lower).tocsr()
    x = np.full(n, x0)
    residual = np.inf
    for it in range(1, cfg.max_iter + 1):
        rhs = (1.0 - cfg.omega) * x - cfg.omega * (upper @ x) + cfg.omega * b_vec
        x = spsolve_triangular(m, rhs, lower=True)
        residual = float(np.max(np.abs(a_mat @ x - b_vec))) if n else 0.0
        if residual < cfg.tol:
            return x, it, residual
    return x, cfg.max_iter, residual


def propagate(gray: np.ndarray, hints: HintSet, cfg: SolverConfig | None = None,
              graph: AffinityGraph | None = None) -> PropagationResult:
    """Spread hint chrominance to every pixel.

    Hinted cells are hard constraints; free pixels satisfy
    U_r = sum_s w_rs U_s, solved independently for a and b.
    """
    cfg = cfg or SolverConfig()
    gray = np.asarray(gray, dtype=np.float64)
    h, w = gray.shape
    if len(hints) == 0:
        return PropagationResult(np.zeros((h, w)), np.zeros((h, w)),
                                 iterations=0, residual=0.0, no_hints=True)
    if graph is None:
        graph = build_affinity(gray, cfg.sigma_floor)
    a0, b0, fixed = hint_constraint_planes(hints, (h, w))
    free = ~fixed.ravel()
    if not free.any():
        return PropagationResult(a0, b0, iterations=0, residual=0.0)

    wmat = graph.weights
    w_ff = wmat[free][:, free]
    w_fc = wmat[free][:, ~free]

    out = {}
    iters, resid = 0, 0.0
    for name, plane in (("a", a0), ("b", b0)):
        fixed_vals = plane.ravel()[~free]
        b_vec = w_fc @ fixed_vals
        # warm start at the mean hint value; same fixed point, fewer sweeps
        x, it, r = _sor_solve(w_ff, b_vec, cfg, x0=float(fixed_vals.mean()))
        full = plane.ravel().copy()
        full[free] = x
        out[name] = full.reshape(h, w)
        iters = max(iters, it)
        resid = max(resid, r)
    return PropagationResult(out["a"], out["b"], iterations=iters, residual=resid)


def colorize(gray: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Assemble the lightness plane with solved chrominance into sRGB."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.shape != np.asarray(a).shape or gray.shape != np.asarray(b).shape:
        raise ValueError("gray/a/b plane dimensions differ")
    return color.lab_to_rgb(color.gray_to_lab(gray, a, b))
