import math

import numpy as np
import pytest

from sigmadelta2d.filters import filter_constant, first_order_filter, make_sparse_second_order
from sigmadelta2d.optimize import (
    OptimizerConfig,
    design_matrix,
    first_order_directions,
    optimize_first_order,
    optimize_weights,
    project_simplex,
)
from sigmadelta2d.schemes import Direction, SchemeError, validate_scheme, weight_constant

from oracles import brute_force_min


def _weights(s):
    return {(e.direction.i, e.direction.j): e.weight for e in s.entries}


def test_closed_form_s4():
    s, c = optimize_first_order(1, 4, 1)
    assert _weights(s) == pytest.approx({(0, 1): 21 / 26, (1, -4): 5 / 26})
    assert c == pytest.approx(1 / math.sqrt(26), abs=1e-15)
    assert weight_constant(s) == pytest.approx(c, abs=1e-14)


def test_closed_form_s0():
    s, c = optimize_first_order(1, 0, 1)
    assert _weights(s) == pytest.approx({(0, 1): 0.5, (1, 0): 0.5})
    assert c == pytest.approx(1 / math.sqrt(2))


def test_closed_form_s2():
    s, c = optimize_first_order(1, 2, 1)
    assert _weights(s) == pytest.approx({(0, 1): 7 / 10, (1, -2): 3 / 10})
    assert c == pytest.approx(1 / math.sqrt(10))


def test_closed_form_bad_args():
    with pytest.raises(SchemeError):
        optimize_first_order(0, 1, 1)
    with pytest.raises(SchemeError):
        optimize_first_order(1, -1, 1)


@pytest.mark.parametrize("s", range(5))
@pytest.mark.parametrize("p,l", [(1, 1), (2, 2)])
def test_closed_form_not_beaten_by_grid(s, p, l):
    dirs = first_order_directions(p, s, l)
    a = design_matrix(dirs, [1.0] * len(dirs), 1)
    best, _ = brute_force_min(a, step=1e-2)
    _, c = optimize_first_order(p, s, l)
    assert c * c <= best + 1e-12


def test_pgd_matches_closed_form():
    dirs = first_order_directions(1, 3, 1)
    h = first_order_filter()
    res = optimize_weights(dirs, [h] * len(dirs), 1)
    assert res.weight_constant == pytest.approx(1 / math.sqrt(17), abs=1e-6)
    assert not res.hit_iteration_cap


def test_two_h3_averaged():
    h3 = make_sparse_second_order(3)
    res = optimize_weights([Direction(0, 1), Direction(1, 0)], [h3, h3], 2)
    assert [e.weight for e in res.scheme.entries] == pytest.approx([0.5, 0.5], abs=1e-6)
    assert validate_scheme(res.scheme)


def test_single_direction():
    res = optimize_weights([Direction(1, 1)], [first_order_filter()], 1)
    assert res.scheme.entries[0].weight == 1.0


def test_three_directions_boundary_optimum():
    h3 = make_sparse_second_order(3)
    dirs = [Direction(0, 1), Direction(1, 0), Direction(1, -1)]
    res = optimize_weights(dirs, [h3] * 3, 2)
    a = design_matrix(dirs, [filter_constant(h3, 2)] * 3, 2)
    best, w_grid = brute_force_min(a, step=1e-3)
    assert res.objective <= best + 1e-9
    assert [e.weight for e in res.scheme.entries] == pytest.approx([0.5, 0.5, 0.0], abs=1e-5)
    assert w_grid == pytest.approx([0.5, 0.5, 0.0], abs=2e-3)


def test_argmin_invariant_under_constant_scaling():
    dirs = [Direction(0, 1), Direction(1, -1), Direction(1, 2)]
    a = design_matrix(dirs, [1.0, 1.0, 1.0], 1)
    from sigmadelta2d.optimize import _pgd
    cfg = OptimizerConfig()
    w1, f1, _ = _pgd(a, np.full(3, 1 / 3), cfg)
    w2, f2, _ = _pgd(3.0 * a, np.full(3, 1 / 3), cfg)
    assert w1 == pytest.approx(w2, abs=1e-6)
    assert f2 == pytest.approx(9 * f1, rel=1e-6)


def test_deterministic_given_seed():
    h = first_order_filter()
    dirs = first_order_directions(2, 2, 2)
    a = optimize_weights(dirs, [h] * len(dirs), 1, OptimizerConfig(seed=3))
    b = optimize_weights(dirs, [h] * len(dirs), 1, OptimizerConfig(seed=3))
    assert a.scheme == b.scheme


def test_iteration_cap_reported(caplog):
    h = first_order_filter()
    dirs = first_order_directions(1, 4, 1)
    res = optimize_weights(dirs, [h] * len(dirs), 1, OptimizerConfig(restarts=1, max_iter=2, tol=0.0))
    assert res.hit_iteration_cap
    assert "iteration cap" in caplog.text


def test_rejects_bad_inputs():
    h = first_order_filter()
    with pytest.raises(SchemeError):
        optimize_weights([Direction(0, 1)], [h, h], 1)
    with pytest.raises(SchemeError):
        optimize_weights([(0, -1)], [h], 1)
    with pytest.raises(SchemeError):
        optimize_weights([(0, 1), (0, 1)], [h, h], 1)


def test_project_simplex_examples():
    assert project_simplex(np.array([0.2, 0.3, 0.5])) == pytest.approx([0.2, 0.3, 0.5])
    assert project_simplex(np.array([2.0, 0.0])) == pytest.approx([1.0, 0.0])
    assert project_simplex(np.array([1.0, 1.0])) == pytest.approx([0.5, 0.5])
