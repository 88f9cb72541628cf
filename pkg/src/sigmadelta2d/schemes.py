"""Weighted Sigma-Delta schemes: directions, weights and feedback filters.

A scheme is a convex combination of one-dimensional recursions run along
lattice directions ``d = (i, j)`` that point back into the already quantized
part of the raster (previous rows, or further left in the current row).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction as Fr
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from .filters import (
    FeedbackFilter,
    InvalidFilterError,
    detect_order,
    filter_constant,
    first_order_filter,
    make_sparse_second_order,
    validate_moments,
)

WEIGHT_TOL = 1e-12


class SchemeError(ValueError):
    """Raised when a scheme description is malformed."""


@dataclass(frozen=True, order=True)
class Direction:
    """Lattice offset ``(i, j)``: ``i`` rows up, ``j`` columns to the left."""

    i: int
    j: int

    def __post_init__(self):
        if int(self.i) != self.i or int(self.j) != self.j:
            raise SchemeError(f"direction components must be integers: {self}")
        object.__setattr__(self, "i", int(self.i))
        object.__setattr__(self, "j", int(self.j))

    @property
    def admissible(self) -> bool:
        return self.i > 0 or (self.i == 0 and self.j > 0)


@dataclass(frozen=True)
class Entry:
    direction: Direction
    weight: float
    filter: FeedbackFilter


@dataclass(frozen=True)
class SchemeSpec:
    name: str
    order: int
    entries: Tuple[Entry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def directions(self) -> List[Direction]:
        return [e.direction for e in self.entries]

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.entries])

    @property
    def reach(self) -> int:
        """Longest filter support over all entries (``L_max``)."""
        return max((e.filter.support for e in self.entries), default=0)

    def describe(self) -> str:
        lines = [f"{self.name} (order {self.order})"]
        for e in self.entries:
            d = e.direction
            lines.append(f"  ({d.i:+d},{d.j:+d})  w={e.weight:.6g}  h={_filter_label(e.filter)}")
        return "\n".join(lines)


def _filter_label(h: FeedbackFilter) -> str:
    if h.kappa is not None:
        return f"h^{h.kappa}"
    return "[" + ", ".join(f"{t:g}" for t in h.taps) + "]"


def scheme_problems(s: SchemeSpec) -> List[str]:
    """Human-readable list of violated invariants (empty when valid)."""
    problems = []
    if s.order < 1:
        problems.append("order must be a positive integer")
    if not s.entries:
        problems.append("scheme has no entries")
    seen = set()
    for e in s.entries:
        d = e.direction
        if not d.admissible:
            problems.append(f"direction ({d.i},{d.j}) points to a not yet quantized site")
        if d in seen:
            problems.append(f"duplicate direction ({d.i},{d.j})")
        seen.add(d)
        if not (e.weight >= 0.0) or not math.isfinite(e.weight):
            problems.append(f"weight {e.weight} at ({d.i},{d.j}) is negative or not finite")
        if s.order >= 1 and not validate_moments(e.filter, s.order):
            problems.append(f"filter at ({d.i},{d.j}) is not of order {s.order}")
    total = math.fsum(e.weight for e in s.entries)
    if s.entries and abs(total - 1.0) > WEIGHT_TOL:
        problems.append(f"weights sum to {total!r}, not 1")
    return problems


def validate_scheme(s: SchemeSpec) -> bool:
    return not scheme_problems(s)


def weight_constant(s: SchemeSpec) -> float:
    """Weight constant of order ``s.order``.

    ``C_W**2 = sum_{m=0..r} (sum_k w_k * C_{h_k} * i_k**(r-m) * j_k**m)**2``
    with signed filter constants ``C_h = sum_s h_s * s**r``.
    """
    r = s.order
    consts = [filter_constant(e.filter, r) for e in s.entries]
    total = 0.0
    for m in range(r + 1):
        inner = math.fsum(
            e.weight * c * e.direction.i ** (r - m) * e.direction.j ** m
            for e, c in zip(s.entries, consts)
        )
        total += inner * inner
    return math.sqrt(total)


@dataclass(frozen=True)
class ExtendedWeightMatrix:
    """Dense coefficients of ``delta0 - sum_k w_k sum_s h^k_s delta_{s d_k}``.

    ``coeffs[a, b]`` belongs to the offset ``(a, b - col0)``: ``a`` rows up
    and ``b - col0`` columns to the left.  The origin sits at ``(0, col0)``.
    """

    coeffs: np.ndarray
    col0: int

    def at(self, i: int, j: int) -> float:
        b = j + self.col0
        if 0 <= i < self.coeffs.shape[0] and 0 <= b < self.coeffs.shape[1]:
            return float(self.coeffs[i, b])
        return 0.0

    def offsets(self) -> Dict[Tuple[int, int], float]:
        a, b = np.nonzero(self.coeffs)
        return {(int(x), int(y) - self.col0): float(self.coeffs[x, y]) for x, y in zip(a, b)}


def tap_offsets(s: SchemeSpec) -> List[Tuple[int, int, float, int]]:
    """``(row_off, col_off, w * h_t, entry_index)`` for every non-zero tap."""
    out = []
    for k, e in enumerate(s.entries):
        for t, ht in e.filter.nonzero():
            out.append((t * e.direction.i, t * e.direction.j, e.weight * ht, k))
    return out


def extended_weight_matrix(s: SchemeSpec) -> ExtendedWeightMatrix:
    offs = tap_offsets(s)
    rows = max([o[0] for o in offs] + [0]) + 1
    col0 = max([-o[1] for o in offs] + [0])
    cols = col0 + max([o[1] for o in offs] + [0]) + 1
    coeffs = np.zeros((rows, cols))
    coeffs[0, col0] = 1.0
    for di, dj, c, _ in offs:
        coeffs[di, dj + col0] -= c
    return ExtendedWeightMatrix(coeffs, col0)


def stability_margin(s: SchemeSpec) -> float:
    """``2 - sum_k w_k * ||h_k||_1``: largest input amplitude with ``|v| <= 1`` guaranteed."""
    return 2.0 - math.fsum(e.weight * e.filter.l1_norm for e in s.entries)


def l1_budget(s: SchemeSpec) -> float:
    return math.fsum(e.weight * e.filter.l1_norm for e in s.entries)


# ---------------------------------------------------------------------------
# construction helpers and the built-in registry


def make_scheme(
    name: str,
    entries: Iterable[Tuple[int, int, Union[float, Fr], FeedbackFilter]],
    order: Optional[int] = None,
) -> SchemeSpec:
    """Build a scheme from ``(i, j, weight, filter)`` tuples.

    Without an explicit ``order`` the smallest order over all filters is
    used, which makes mixed-order schemes valid at their lowest common order.
    Raises :class:`SchemeError` if the result is not a valid scheme.
    """
    ents = tuple(Entry(Direction(i, j), float(w), h) for i, j, w, h in entries)
    if order is None:
        order = min(detect_order(e.filter, 8) for e in ents) if ents else 1
    s = SchemeSpec(name=name, order=order, entries=ents)
    problems = scheme_problems(s)
    if problems:
        raise SchemeError(f"invalid scheme {name!r}: " + "; ".join(problems))
    return s


def _registry() -> Dict[str, SchemeSpec]:
    h1 = first_order_filter()
    h3 = make_sparse_second_order(3)
    h4 = make_sparse_second_order(4)
    h550 = make_sparse_second_order(550)

    def first(name, table):
        return make_scheme(name, [(i, j, w, h1) for i, j, w in table], order=1)

    reg = [
        first("1st-RbR", [(0, 1, 1)]),
        first("1st-A", [(0, 1, Fr(1, 2)), (1, 0, Fr(1, 2))]),
        first("F-S", [(0, 1, Fr(7, 16)), (1, 1, Fr(1, 16)), (1, 0, Fr(5, 16)), (1, -1, Fr(3, 16))]),
        first("S-Fan", [(0, 1, Fr(8, 16)), (1, 0, Fr(4, 16)), (1, -1, Fr(2, 16)),
                        (1, -2, Fr(1, 16)), (1, -3, Fr(1, 16))]),
        first("JJN", [(0, 1, Fr(7, 48)), (0, 2, Fr(5, 48)),
                      (1, -2, Fr(3, 48)), (1, -1, Fr(5, 48)), (1, 0, Fr(7, 48)),
                      (1, 1, Fr(5, 48)), (1, 2, Fr(3, 48)),
                      (2, -2, Fr(1, 48)), (2, -1, Fr(3, 48)), (2, 0, Fr(5, 48)),
                      (2, 1, Fr(3, 48)), (2, 2, Fr(1, 48))]),
        first("Opt-2", [(0, 1, Fr(7, 10)), (1, -2, Fr(3, 10))]),
        first("Opt-4", [(0, 1, Fr(21, 26)), (1, -4, Fr(5, 26))]),
        make_scheme("2nd-RbR", [(0, 1, 1, h3)], order=2),
        make_scheme("2nd-A33", [(0, 1, Fr(1, 2), h3), (1, 0, Fr(1, 2), h3)], order=2),
        make_scheme("2nd-A34", [(0, 1, Fr(1, 2), h3), (1, 0, Fr(1, 2), h4)], order=2),
        make_scheme("2nd-SD", [(0, 1, Fr(88, 199), h550), (1, -1, Fr(12, 199), h550),
                               (1, 0, Fr(87, 199), h550), (1, 1, Fr(1, 199), h550),
                               (0, 2, Fr(11, 398), h3), (2, 0, Fr(11, 398), h3)], order=2),
        make_scheme("S-Fan-12", [(0, 1, Fr(21, 50), h1), (1, 0, Fr(17, 50), h1),
                                 (1, -1, Fr(5, 50), h1), (1, -2, Fr(2, 50), h1),
                                 (1, -3, Fr(2, 50), h1),
                                 (0, 2, Fr(3, 100), h3), (2, 0, Fr(2, 100), h3),
                                 (2, -1, Fr(1, 200), h3), (2, -2, Fr(1, 200), h3)]),
    ]
    return {s.name: s for s in reg}


_REGISTRY = _registry()

FIRST_ORDER_NAMES = ("1st-RbR", "1st-A", "F-S", "S-Fan", "JJN", "Opt-2", "Opt-4")
SECOND_ORDER_NAMES = ("2nd-RbR", "2nd-A33", "2nd-A34")


def builtin_schemes() -> Dict[str, SchemeSpec]:
    """Name -> scheme for every built-in scheme (a fresh dict each call)."""
    return dict(_REGISTRY)


def get_scheme(name: Union[str, SchemeSpec]) -> SchemeSpec:
    if isinstance(name, SchemeSpec):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise SchemeError(
            f"unknown scheme {name!r}; known: {', '.join(_REGISTRY)}") from None


# ---------------------------------------------------------------------------
# JSON config files


def filter_to_dict(h: FeedbackFilter) -> dict:
    if h.kappa is not None:
        return {"kappa": h.kappa}
    return {"taps": list(h.taps)}


def filter_from_dict(d: dict) -> FeedbackFilter:
    if "kappa" in d:
        return make_sparse_second_order(d["kappa"])
    if "taps" in d:
        return FeedbackFilter(tuple(d["taps"]))
    raise SchemeError(f"filter needs 'taps' or 'kappa': {d!r}")


def scheme_to_dict(s: SchemeSpec) -> dict:
    return {
        "name": s.name,
        "order": s.order,
        "entries": [
            {"i": e.direction.i, "j": e.direction.j, "weight": e.weight,
             "filter": filter_to_dict(e.filter)}
            for e in s.entries
        ],
    }


def scheme_from_dict(d: dict) -> SchemeSpec:
    """Parse and validate a scheme config; raises :class:`SchemeError`."""
    try:
        entries = tuple(
            Entry(Direction(e["i"], e["j"]), float(e["weight"]), filter_from_dict(e["filter"]))
            for e in d["entries"]
        )
        s = SchemeSpec(name=str(d["name"]), order=int(d["order"]), entries=entries)
    except (KeyError, TypeError, InvalidFilterError) as exc:
        raise SchemeError(f"malformed scheme config: {exc}") from exc
    problems = scheme_problems(s)
    if problems:
        raise SchemeError(f"invalid scheme {s.name!r}: " + "; ".join(problems))
    return s


def dump_schemes(schemes: Iterable[SchemeSpec], path: Union[str, Path]) -> None:
    data = [scheme_to_dict(s) for s in schemes]
    Path(path).write_text(json.dumps(data, indent=2))


def load_schemes(path: Union[str, Path]) -> List[SchemeSpec]:
    """Load one scheme (JSON object) or several (JSON list) from a file."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [scheme_from_dict(d) for d in data]
