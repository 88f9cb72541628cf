"""Weight design: minimise the weight constant over the probability simplex."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction as Fr
from typing import List, Sequence, Tuple

import numpy as np

from .filters import FeedbackFilter, filter_constant, first_order_filter
from .schemes import Direction, SchemeError, SchemeSpec, make_scheme, weight_constant

log = logging.getLogger(__name__)


@dataclass
class OptimizerConfig:
    restarts: int = 16
    max_iter: int = 100_000
    tol: float = 1e-12
    seed: int = 0


@dataclass
class OptimizeResult:
    scheme: SchemeSpec
    weight_constant: float
    objective: float
    iterations: int
    hit_iteration_cap: bool


def project_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum(w) = 1}`` (sort-based)."""
    x = np.asarray(x, dtype=np.float64)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(x - theta, 0.0)


def design_matrix(directions: Sequence[Direction], constants: Sequence[float], r: int) -> np.ndarray:
    """Rows ``m = 0..r`` of ``C_k * i_k**(r-m) * j_k**m``; objective is ``|A w|**2``."""
    a = np.empty((r + 1, len(directions)))
    for k, (d, c) in enumerate(zip(directions, constants)):
        for m in range(r + 1):
            a[m, k] = c * d.i ** (r - m) * d.j ** m
    return a


def _pgd(a: np.ndarray, w0: np.ndarray, cfg: OptimizerConfig) -> Tuple[np.ndarray, float, int]:
    g = a.T @ a
    lip = 2.0 * np.linalg.eigvalsh(g).max()
    step = 1.0 / lip if lip > 0 else 1.0
    w = project_simplex(w0)
    f = float(w @ g @ w)
    for it in range(1, cfg.max_iter + 1):
        w_new = project_simplex(w - step * 2.0 * (g @ w))
        f_new = float(w_new @ g @ w_new)
        if f - f_new < cfg.tol:
            return w_new, f_new, it
        w, f = w_new, f_new
    return w, f, cfg.max_iter


def optimize_weights(
    directions: Sequence[Direction],
    filters: Sequence[FeedbackFilter],
    r: int,
    config: OptimizerConfig = None,
    name: str = "optimized",
) -> OptimizeResult:
    """Minimise the order-``r`` weight constant over simplex weights.

    Projected gradient descent from ``config.restarts`` seeded starting
    points (the first is the simplex barycentre); the best objective wins,
    ties going to the lowest restart index.
    """
    cfg = config or OptimizerConfig()
    directions = [d if isinstance(d, Direction) else Direction(*d) for d in directions]
    if len(directions) != len(filters) or not directions:
        raise SchemeError("need one filter per direction and at least one direction")
    for d in directions:
        if not d.admissible:
            raise SchemeError(f"inadmissible direction ({d.i},{d.j})")
    if len(set(directions)) != len(directions):
        raise SchemeError("duplicate directions")

    k = len(directions)
    consts = [filter_constant(h, r) for h in filters]
    a = design_matrix(directions, consts, r)
    rng = np.random.default_rng(cfg.seed)

    best = None
    for restart in range(max(1, cfg.restarts)):
        w0 = np.full(k, 1.0 / k) if restart == 0 else rng.dirichlet(np.ones(k))
        w, f, its = _pgd(a, w0, cfg)
        if best is None or f < best[1]:
            best = (w, f, its)
    w, f, its = best
    capped = its >= cfg.max_iter
    if capped:
        log.warning("optimize_weights: iteration cap %d reached", cfg.max_iter)

    # tidy negligible weights and renormalise so the scheme validates exactly
    w = np.where(w < 1e-14, 0.0, w)
    w = w / w.sum()
    scheme = make_scheme(name, [(d.i, d.j, float(x), h) for d, x, h in zip(directions, w, filters)],
                         order=r)
    return OptimizeResult(scheme, weight_constant(scheme), f, its, capped)


def first_order_directions(p: int, s: int, l: int) -> List[Direction]:
    """Admissible directions ``(0, 1..l)`` and ``(1..p, -s..l)``."""
    dirs = [Direction(0, j) for j in range(1, l + 1)]
    dirs += [Direction(i, j) for i in range(1, p + 1) for j in range(-s, l + 1)]
    return dirs


def optimize_first_order(p: int, s: int, l: int) -> Tuple[SchemeSpec, float]:
    """Closed-form optimum for first-order schemes.

    Only ``w[1,-s] = (s+1)/(1+(s+1)**2)`` and ``w[0,1]`` are non-zero, and the
    optimal weight constant is ``1/sqrt(1 + (s+1)**2)`` whatever ``p, l``.
    """
    if p < 1 or l < 1 or s < 0:
        raise SchemeError("need p >= 1, l >= 1 and s >= 0")
    w_diag = Fr(s + 1, 1 + (s + 1) ** 2)
    h1 = first_order_filter()
    entries = [(0, 1, 1 - w_diag, h1), (1, -s, w_diag, h1)]
    scheme = make_scheme(f"Opt-{s}", entries, order=1)
    return scheme, 1.0 / math.sqrt(1 + (s + 1) ** 2)
