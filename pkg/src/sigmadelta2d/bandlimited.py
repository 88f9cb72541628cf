"""Quantizing a synthetic bandlimited signal and measuring the sup-norm error.

The reconstruction for coefficients ``c`` on the lattice ``n / lam`` is::

    f(x1, x2) = lam**-2 * sum_{n1, n2} c[n1, n2] * k(x1 - n1/lam) * k(x2 - n2/lam)

with the separable kernel ``k(x) = 5 * sinc(5 x)``, evaluated as two matrix
products instead of the quadruple loop.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .quantizer import ZERO_INIT, quantize_grid
from .schemes import SchemeSpec, get_scheme

log = logging.getLogger(__name__)

DEFAULT_LAMBDAS = tuple(75 + 25 * n for n in range(9))
DEFAULT_REGION = (2.0, 8.0, 2.0, 8.0)
DEFAULT_STEP = 0.01


@dataclass(frozen=True)
class LatticeSpec:
    """Samples at ``n / lam`` for ``n = 0 .. floor(extent * lam)`` on both axes."""

    lam: float
    extent: float = 10.0

    def __post_init__(self):
        if not self.lam > 1:
            raise ValueError(f"oversampling rate must exceed 1, got {self.lam}")
        if not self.extent > 0:
            raise ValueError("lattice extent must be positive")

    @property
    def size(self) -> int:
        return int(math.floor(self.extent * self.lam + 1e-9)) + 1

    def axis(self) -> np.ndarray:
        return np.arange(self.size) / self.lam


@dataclass(frozen=True)
class SincKernel:
    """``scale * sinc(bandwidth * x)`` per axis, ``sinc(x) = sin(pi x)/(pi x)``.

    The 2D kernel is the product of the two axis factors, so the defaults give
    ``25 * sinc(5 x1) * sinc(5 x2)``.  ``radius`` truncates the support.
    """

    bandwidth: float = 5.0
    scale: float = 5.0
    radius: Optional[float] = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        k = self.scale * np.sinc(self.bandwidth * x)
        if self.radius is not None:
            k = np.where(np.abs(x) <= self.radius, k, 0.0)
        return k

    def value2d(self, x1, x2):
        return self(x1) * self(x2)


ReconstructionKernel = SincKernel
DEFAULT_KERNEL = SincKernel()


def eval_test_function(x1, x2):
    """``0.3 * cos(3 x1 + 2 x2) * cos(x2 / 3)``, the real part of the complex test signal."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    return 0.3 * np.cos(3.0 * x1 + 2.0 * x2) * np.cos(x2 / 3.0)


def sample_function(f: Callable, spec: LatticeSpec) -> np.ndarray:
    """Grid ``y[n1, n2] = f(n1 / lam, n2 / lam)``; ``f`` must broadcast over arrays."""
    t = spec.axis()
    return np.asarray(f(t[:, None], t[None, :]), dtype=np.float64) * np.ones((t.size, t.size))


def kernel_matrix(points, spec: LatticeSpec, kernel: SincKernel = DEFAULT_KERNEL) -> np.ndarray:
    """``K[a, n] = k(points[a] - n / lam)``."""
    points = np.asarray(points, dtype=np.float64)
    return kernel(points[:, None] - spec.axis()[None, :])


def reconstruct(coeffs, spec: LatticeSpec, kernel: SincKernel = DEFAULT_KERNEL,
                eval_x1=None, eval_x2=None) -> np.ndarray:
    """Field ``F[a, b]`` at ``(eval_x1[a], eval_x2[b])`` via ``K1 @ C @ K2.T / lam**2``."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (spec.size, spec.size):
        raise ValueError(f"coefficients shaped {coeffs.shape}, lattice needs {(spec.size,) * 2}")
    k1 = kernel_matrix(eval_x1, spec, kernel)
    k2 = kernel_matrix(eval_x2, spec, kernel)
    return (k1 @ coeffs) @ k2.T / spec.lam**2


def region_axes(region=DEFAULT_REGION, step: float = DEFAULT_STEP) -> Tuple[np.ndarray, np.ndarray]:
    x1lo, x1hi, x2lo, x2hi = region
    if not (x1hi >= x1lo and x2hi >= x2lo) or step <= 0:
        raise ValueError(f"empty evaluation region {region} / step {step}")
    n1 = int(round((x1hi - x1lo) / step)) + 1
    n2 = int(round((x2hi - x2lo) / step)) + 1
    return np.linspace(x1lo, x1hi, n1), np.linspace(x2lo, x2hi, n2)


@dataclass
class ErrorField:
    region: Tuple[float, float, float, float]
    step: float
    values: np.ndarray  # |F_A - F_B| on the evaluation grid

    @property
    def maximum(self) -> float:
        return float(self.values.max())


def sup_error(coeff_a, coeff_b, spec: LatticeSpec, kernel: SincKernel = DEFAULT_KERNEL,
              region=DEFAULT_REGION, step: float = DEFAULT_STEP) -> ErrorField:
    """Pointwise ``|recon(A) - recon(B)|`` over ``region``, using linearity (one reconstruction)."""
    x1, x2 = region_axes(region, step)
    diff = np.asarray(coeff_a, dtype=np.float64) - np.asarray(coeff_b, dtype=np.float64)
    return ErrorField(tuple(region), step, np.abs(reconstruct(diff, spec, kernel, x1, x2)))


def approximation_error(spec: LatticeSpec, kernel: SincKernel = DEFAULT_KERNEL,
                        region=DEFAULT_REGION, step: float = DEFAULT_STEP) -> float:
    """``max |f - f_lam|`` for the test function over ``region``."""
    x1, x2 = region_axes(region, step)
    y = sample_function(eval_test_function, spec)
    approx = reconstruct(y, spec, kernel, x1, x2)
    exact = eval_test_function(x1[:, None], x2[None, :])
    return float(np.abs(exact - approx).max())


# ---------------------------------------------------------------------------
# error-decay sweep


@dataclass
class DecayReport:
    rows: List[Tuple[str, float, float]] = field(default_factory=list)  # (scheme, lam, error)

    def errors(self, scheme: str) -> Tuple[np.ndarray, np.ndarray]:
        pts = sorted((lam, err) for name, lam, err in self.rows if name == scheme)
        return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])

    @property
    def schemes(self) -> List[str]:
        seen = []
        for name, _, _ in self.rows:
            if name not in seen:
                seen.append(name)
        return seen

    def slope(self, scheme: str) -> float:
        lam, err = self.errors(scheme)
        if lam.size < 2:
            return float("nan")
        return fit_loglog_slope(lam, err)

    @property
    def slopes(self) -> Dict[str, float]:
        return {name: self.slope(name) for name in self.schemes}

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scheme", "lambda", "sup_error"])
            for name, lam, err in self.rows:
                w.writerow([name, f"{lam:g}", repr(err)])

    def write_slopes_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scheme", "slope"])
            for name, s in self.slopes.items():
                w.writerow([name, repr(s)])

    def write_gnuplot(self, path: Union[str, Path]) -> None:
        """One whitespace-separated block per scheme, blocks split by two blank lines."""
        with open(path, "w") as fh:
            for name in self.schemes:
                fh.write(f"# {name}\n# lambda sup_error\n")
                for lam, err in zip(*self.errors(name)):
                    fh.write(f"{lam:g} {err:.10e}\n")
                fh.write("\n\n")

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "DecayReport":
        with open(path, newline="") as fh:
            rows = [(r["scheme"], float(r["lambda"]), float(r["sup_error"]))
                    for r in csv.DictReader(fh)]
        return cls(rows)


def fit_loglog_slope(lam, err) -> float:
    """Least-squares slope of ``log(err)`` against ``log(lam)``."""
    slope, _ = np.polyfit(np.log(np.asarray(lam, float)), np.log(np.asarray(err, float)), 1)
    return float(slope)


def quantize_samples(y, scheme, scan_rows: str = "x2") -> np.ndarray:
    """1-bit coefficients for a sample grid ``y[n1, n2]``.

    ``scan_rows`` picks the axis the quantizer's outer (row) loop walks.
    ``"x2"`` treats the grid like an image with ``x2`` down the rows, the
    layout a ``meshgrid``-style sampler produces; ``"x1"`` uses ``y`` as is.
    """
    if scan_rows == "x1":
        return quantize_grid(y, scheme, ZERO_INIT).bits
    if scan_rows == "x2":
        return quantize_grid(np.asarray(y).T, scheme, ZERO_INIT).bits.T
    raise ValueError(f"scan_rows must be 'x1' or 'x2', got {scan_rows!r}")


def quantization_error(scheme: Union[str, SchemeSpec], lam: float, extent: float = 10.0,
                       kernel: SincKernel = DEFAULT_KERNEL, region=DEFAULT_REGION,
                       step: float = DEFAULT_STEP, scan_rows: str = "x2") -> float:
    """Sup-norm quantization error of one scheme at one oversampling rate."""
    spec = LatticeSpec(lam, extent)
    y = sample_function(eval_test_function, spec)
    q = quantize_samples(y, scheme, scan_rows)
    return sup_error(y, q, spec, kernel, region, step).maximum


def decay_experiment(schemes: Sequence[Union[str, SchemeSpec]],
                     lambdas: Sequence[float] = DEFAULT_LAMBDAS,
                     region=DEFAULT_REGION, step: float = DEFAULT_STEP,
                     extent: float = 10.0, kernel: SincKernel = DEFAULT_KERNEL,
                     workers: int = 1, scan_rows: str = "x2") -> DecayReport:
    """Sweep ``schemes x lambdas`` and collect the sup-norm quantization errors."""
    if not schemes or not lambdas:
        raise ValueError("need at least one scheme and one oversampling rate")
    specs = [get_scheme(s) for s in schemes]
    cells = [(s, float(lam)) for s in specs for lam in lambdas]

    def run(cell):
        s, lam = cell
        err = quantization_error(s, lam, extent, kernel, region, step, scan_rows)
        log.info("%s lam=%g err=%.4e", s.name, lam, err)
        return s.name, lam, err

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    return DecayReport(rows)
