"""Raster-order weighted Sigma-Delta quantization of 2D sample grids.

At every site ``n`` (rows outer, columns inner)::

    a    = sum_k w_k * sum_t h^k_t * v[n - t * d_k]
    q[n] = sign(a + y[n])            # sign(0) = -1
    v[n] = a + y[n] - q[n]

Reads outside the already computed region hit "ghost" state, which is zero
or a per-site pseudorandom value depending on the :class:`InitPolicy`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .schemes import SchemeSpec, get_scheme, scheme_problems, SchemeError

GHOST_RANGE = 0.9


@dataclass(frozen=True)
class InitPolicy:
    """Ghost-state initialisation: ``"zero"`` or ``"uniform"`` in ``[-amplitude, amplitude]``."""

    mode: str = "zero"
    seed: int = 0
    amplitude: float = GHOST_RANGE

    def __post_init__(self):
        if self.mode not in ("zero", "uniform"):
            raise ValueError(f"unknown init mode {self.mode!r}")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ValueError("ghost amplitude must lie in [0, 1]")

    @classmethod
    def zero(cls) -> "InitPolicy":
        return cls("zero")

    @classmethod
    def uniform(cls, seed: int, amplitude: float = GHOST_RANGE) -> "InitPolicy":
        return cls("uniform", int(seed), amplitude)


ZERO_INIT = InitPolicy.zero()


@dataclass
class QuantizationResult:
    bits: np.ndarray  # int8, values in {-1, +1}
    state: np.ndarray  # float64
    max_abs_state: float
    overflow: bool  # max |v| > 1 somewhere

    @property
    def report(self) -> dict:
        return {"max_abs_state": self.max_abs_state, "overflow": self.overflow}


@numba.njit(cache=True, nogil=True)
def _splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15))
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def _ghost_value(seed, n1, n2, amp):
    h = _splitmix64(np.uint64(seed))
    h = _splitmix64(h ^ np.uint64(n1 & 0xFFFFFFFFFFFF))
    h = _splitmix64(h ^ np.uint64(n2 & 0xFFFFFFFFFFFF))
    u = (h >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    return amp * (2.0 * u - 1.0)


@numba.njit(cache=True, nogil=True)
def _fill_ghosts(vpad, r0, c0, n1_rows, n2_cols, seed, amp):
    rows, cols = vpad.shape
    for a in range(rows):
        n1 = a - r0
        for b in range(cols):
            n2 = b - c0
            if n1 < 0 or n2 < 0 or n2 >= n2_cols:
                vpad[a, b] = _ghost_value(seed, n1, n2, amp)


@numba.njit(cache=True, nogil=True)
def _run(y, vpad, r0, c0, entry_ptr, weights, di, dj, taps, bits):
    n_rows, n_cols = y.shape
    n_entries = weights.size
    for n1 in range(n_rows):
        for n2 in range(n_cols):
            a = 0.0
            for k in range(n_entries):
                acc = 0.0
                for t in range(entry_ptr[k], entry_ptr[k + 1]):
                    acc += taps[t] * vpad[r0 + n1 - di[t], c0 + n2 - dj[t]]
                a += weights[k] * acc
            u = a + y[n1, n2]
            q = 1 if u > 0.0 else -1
            vpad[r0 + n1, c0 + n2] = u - q
            bits[n1, n2] = q


def _compile_scheme(s: SchemeSpec):
    entry_ptr = [0]
    di, dj, taps = [], [], []
    for e in s.entries:
        for t, ht in e.filter.nonzero():
            di.append(t * e.direction.i)
            dj.append(t * e.direction.j)
            taps.append(ht)
        entry_ptr.append(len(taps))
    return (np.asarray(entry_ptr, dtype=np.int64),
            np.asarray([e.weight for e in s.entries], dtype=np.float64),
            np.asarray(di, dtype=np.int64), np.asarray(dj, dtype=np.int64),
            np.asarray(taps, dtype=np.float64))


def quantize_grid(y, scheme, init: Optional[InitPolicy] = None) -> QuantizationResult:
    """Run a weighted Sigma-Delta scheme over ``y`` in raster order.

    Args:
        y: 2D array of real samples.
        scheme: a :class:`SchemeSpec` or the name of a built-in scheme.
        init: ghost-state policy, zero by default.

    Returns:
        :class:`QuantizationResult` with the 1-bit grid, the state grid and
        an overflow flag (``max |v| > 1``; reported, never raised).
    """
    s = get_scheme(scheme)
    problems = scheme_problems(s)
    if problems:
        raise SchemeError(f"invalid scheme {s.name!r}: " + "; ".join(problems))
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 2:
        raise ValueError(f"expected a 2D grid, got shape {y.shape}")
    if not np.isfinite(y).all():
        raise ValueError("sample grid contains non-finite values")
    init = init or ZERO_INIT

    entry_ptr, weights, di, dj, taps = _compile_scheme(s)
    r0 = int(di.max(initial=0))
    c0 = int(dj.max(initial=0))
    c1 = int(-dj.min(initial=0))
    n1, n2 = y.shape
    vpad = np.zeros((r0 + n1, c0 + n2 + c1))
    if init.mode == "uniform":
        _fill_ghosts(vpad, r0, c0, n1, n2, np.uint64(init.seed & 0xFFFFFFFFFFFFFFFF),
                     float(init.amplitude))
    bits = np.empty((n1, n2), dtype=np.int8)
    _run(y, vpad, r0, c0, entry_ptr, weights, di, dj, taps, bits)
    state = vpad[r0:, c0:c0 + n2].copy()
    vmax = float(np.abs(state).max()) if state.size else 0.0
    return QuantizationResult(bits, state, vmax, vmax > 1.0)


def ghost_values(seed: int, n1, n2, amplitude: float = GHOST_RANGE) -> np.ndarray:
    """Ghost values the uniform policy assigns to sites ``(n1, n2)``."""
    n1, n2 = np.broadcast_arrays(np.asarray(n1, dtype=np.int64), np.asarray(n2, dtype=np.int64))
    out = np.empty(n1.shape)
    flat = out.reshape(-1)
    for k, (a, b) in enumerate(zip(n1.reshape(-1), n2.reshape(-1))):
        flat[k] = _ghost_value(np.uint64(seed & 0xFFFFFFFFFFFFFFFF), int(a), int(b), amplitude)
    return out


def mean_deviation(y, q) -> float:
    """``|sum(y - q)| / (N1 * N2)``."""
    y = np.asarray(y, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if y.shape != q.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {q.shape}")
    return float(abs(np.sum(y - q)) / y.size)
