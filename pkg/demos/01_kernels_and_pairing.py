"""Kernels and the line pairing functional.

Walks through the algebra that everything else is built on: the Stokeslet,
its on-sphere factor, the local drag matrix, their inverse relation, and
the pairing of two fields along a circle against closed-form values.
"""

import numpy as np
from numpy.random import default_rng

from filstokes import (
    curve_from_spec,
    drag_matrix,
    line_pairing,
    oseen,
    pressure_kernel,
    recenter,
    s0,
)

rng = default_rng(0)

print("== Stokeslet ==")
x = np.array([1.0, 0.0, 0.0])
print(f"S(e1) * 8 pi = \n{8 * np.pi * oseen(x)}")
print(f"P(e1) = {pressure_kernel(x)}  (1/(4 pi) = {1 / (4 * np.pi):.6f})")

print("\n== drag matrix and its inverse relation ==")
p = rng.standard_normal(3)
p /= np.linalg.norm(p)
print(f"random unit p = {np.round(p, 4)}")
print(f"s0(p) k(p) =\n{np.round(s0(p) @ drag_matrix(p), 12)}")
eigs = np.sort(np.linalg.eigvalsh(drag_matrix(p)))
print(f"eigenvalues of k(p): {eigs}  (4 pi, 8 pi, 8 pi = "
      f"{4 * np.pi:.4f}, {8 * np.pi:.4f})")

print("\n== pairing on the unit circle ==")
circle, _ = recenter(curve_from_spec({"preset": "circle", "nodes": 128}))
e3 = np.broadcast_to(np.array([0.0, 0.0, 1.0]), (circle.n, 3))
val = line_pairing(circle, e3, e3)
print(f"I[e3, e3] = {val:.10f}   (8 pi^2 = {8 * np.pi**2:.10f})")
# the tangent is orthogonal to e3 everywhere, so k(tau) e3 = 8 pi e3 and
# the integral is (1/2) * 8 pi * 2 pi exactly

v = rng.standard_normal((circle.n, 3))
w = rng.standard_normal((circle.n, 3))
print(f"symmetry check |I[v,w] - I[w,v]| = "
      f"{abs(line_pairing(circle, v, w) - line_pairing(circle, w, v)):.2e}")
