"""Designing scheme weights by minimising the weight constant.

``python demos/weight_design.py``
"""
import math

from sigmadelta2d.filters import first_order_filter, make_sparse_second_order
from sigmadelta2d.optimize import first_order_directions, optimize_first_order, optimize_weights
from sigmadelta2d.schemes import Direction, builtin_schemes, stability_margin, weight_constant

# First order: widening the stencil to the left keeps lowering the constant.
print("first order, closed form")
for s in range(6):
    scheme, c = optimize_first_order(1, s, 1)
    w = {(e.direction.i, e.direction.j): e.weight for e in scheme.entries}
    print(f"  s={s}  C_W={c:.5f}  w(0,1)={w[(0, 1)]:.4f}  w(1,{-s})={w[(1, -s)]:.4f}")

# The numerical optimizer finds the same point among many candidate directions.
dirs = first_order_directions(2, 3, 2)
res = optimize_weights(dirs, [first_order_filter()] * len(dirs), 1)
print(f"\nnumerical over {len(dirs)} directions: C_W={res.weight_constant:.6f} "
      f"(closed form {1 / math.sqrt(17):.6f})")

# Second order: a larger kappa widens the stability margin but raises the constant.
print("\nsecond order with sparse filters")
for k in (2, 3, 5):
    h = make_sparse_second_order(k)
    r = optimize_weights([Direction(0, 1), Direction(1, 0), Direction(1, 1), Direction(1, -1)],
                         [h] * 4, 2, name=f"sparse-{k}")
    print(f"  kappa={k}  C_W={r.weight_constant:.4f}  margin={stability_margin(r.scheme):.4f}")

print("\nregistry")
for name, s in builtin_schemes().items():
    print(f"  {name:9s} order {s.order}  C_W={weight_constant(s):9.4f}  margin={stability_margin(s):.4f}")
