"""Causal feedback filters for one-dimensional Sigma-Delta recursions.

A feedback filter ``h`` is a finite sequence of taps ``h[0], h[1], ..., h[L]``
with ``h[0] == 0``.  The recursion ``v[n] = (h * v)[n] + y[n] - q[n]`` is of
order ``r`` when ``delta0 - h`` has ``r`` vanishing moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

MOMENT_TOL = 1e-12


class InvalidFilterError(ValueError):
    """Raised for taps or parameters that do not describe a valid filter."""


@dataclass(frozen=True)
class FeedbackFilter:
    """Finitely supported causal filter.

    ``taps[s]`` holds ``h_s``; taps beyond the tuple are zero.  ``kappa`` is
    kept only for filters built by :func:`make_sparse_second_order`, so that
    they serialize back to their compact form.  Equality ignores
    ``declared_order``.
    """

    taps: Tuple[float, ...]
    declared_order: Optional[int] = field(default=None, compare=False)
    kappa: Optional[int] = None

    def __post_init__(self):
        taps = tuple(float(t) for t in self.taps)
        if not taps:
            raise InvalidFilterError("filter needs at least one tap")
        if taps[0] != 0.0:
            raise InvalidFilterError("tap 0 must be exactly 0 (causality)")
        if not all(math.isfinite(t) for t in taps):
            raise InvalidFilterError("taps must be finite")
        object.__setattr__(self, "taps", taps)
        if self.declared_order is not None:
            if self.declared_order < 1:
                raise InvalidFilterError("declared order must be positive")
            if not validate_moments(self, self.declared_order):
                raise InvalidFilterError(
                    f"taps {taps} do not have {self.declared_order} vanishing moments")

    @property
    def support(self) -> int:
        """Largest index ``L`` with a non-zero tap (0 for the zero filter)."""
        nz = [s for s, t in enumerate(self.taps) if t != 0.0]
        return nz[-1] if nz else 0

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(t) for t in self.taps))

    def nonzero(self):
        """Yield ``(s, h_s)`` for every non-zero tap."""
        for s, t in enumerate(self.taps):
            if t != 0.0:
                yield s, t

    def __len__(self):
        return len(self.taps)


def make_filter(taps: Sequence[float], order: Optional[int] = None) -> FeedbackFilter:
    return FeedbackFilter(tuple(taps), declared_order=order)


def first_order_filter() -> FeedbackFilter:
    """``h = [0, 1]``, the classical first-order loop."""
    return FeedbackFilter((0.0, 1.0), declared_order=1)


def make_sparse_second_order(kappa: int) -> FeedbackFilter:
    """Two-tap second-order filter with taps at 1 and ``kappa + 1``.

    ``h[1] = (kappa + 1) / kappa`` and ``h[kappa + 1] = -1 / kappa``, so that
    ``sum(h) = 1`` and ``sum(s * h[s]) = 0``.  The l1 norm is ``1 + 2/kappa``.

    >>> make_sparse_second_order(2).taps
    (0.0, 1.5, 0.0, -0.5)
    """
    if isinstance(kappa, bool) or int(kappa) != kappa or kappa < 2:
        raise InvalidFilterError(f"kappa must be an integer >= 2, got {kappa!r}")
    kappa = int(kappa)
    taps = [0.0] * (kappa + 2)
    taps[1] = (kappa + 1) / kappa
    taps[kappa + 1] = -1.0 / kappa
    return FeedbackFilter(tuple(taps), declared_order=2, kappa=kappa)


def finite_difference_filter(r: int) -> FeedbackFilter:
    """The filter ``delta0 - Delta^r``, i.e. the plain r-th order loop."""
    if r < 1:
        raise InvalidFilterError("order must be positive")
    taps = [0.0] + [float((-1) ** (k + 1) * math.comb(r, k)) for k in range(1, r + 1)]
    return FeedbackFilter(tuple(taps), declared_order=r)


def validate_moments(h: FeedbackFilter, r: int, tol: float = MOMENT_TOL) -> bool:
    """True iff ``delta0 - h`` has ``r`` vanishing moments (to ``tol``)."""
    for k in range(r):
        # (delta0 - h) contributes 1 * 0**k at s = 0; 0**0 == 1
        moment = (1.0 if k == 0 else 0.0) - sum(t * s**k for s, t in h.nonzero())
        if abs(moment) > tol:
            return False
    return True


def detect_order(h: FeedbackFilter, r_max: int) -> int:
    """Largest ``r <= r_max`` with ``r`` vanishing moments, 0 if none."""
    if r_max < 1:
        raise InvalidFilterError("r_max must be >= 1")
    order = 0
    for r in range(1, r_max + 1):
        if not validate_moments(h, r):
            break
        order = r
    return order


def filter_constant(h: FeedbackFilter, r: int) -> float:
    """Signed filter constant ``C_h = sum_s h_s * s**r``."""
    return float(sum(t * s**r for s, t in h.nonzero()))


def generalized_directional_convolution(
    psi: Callable[[float, float], float],
    h: FeedbackFilter,
    d: Tuple[float, float],
    a: Tuple[float, float],
) -> float:
    """Evaluate ``sum_{s>=1} h_s * psi(a - s*d)``."""
    total = 0.0
    for s, t in h.nonzero():
        total += t * psi(a[0] - s * d[0], a[1] - s * d[1])
    return total
