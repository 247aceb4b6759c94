"""Trajectory-level validation of the whole chain.

Realize a quadratic target, integrate the full delay equation seeded on the
center plane, project it back through the adjoint pairing, and compare with
the reduced three-dimensional flow pushed through the computed change of
variables.  Halving the amplitude must shrink the disagreement by about
2^(order+1): the reduction truncates at that order.

Starting the trajectory on the computed center manifold (rather than on its
tangent plane) removes the off-manifold transient and exposes the next
order; this exercises the infinite-dimensional part of the transformation
against the actual dynamics.
"""

from trizero import RealizeTarget, compare_flows, locus, realize, reduce

p = locus(1.0, 0.0)

print("order-2 target {A[2,0]: 1}:")
target = RealizeTarget(max_degree=2, coeffs={2: {"A[2,0]": 1.0}})
fg = realize(target, p)
nf, _ = reduce(fg, p, 2)
prev = None
for eps in (0.04, 0.02, 0.01):
    rep = compare_flows(p, fg, nf, eps)
    note = f"   ratio vs previous = {prev / rep.e_max:.2f}" if prev else ""
    print(f"  e({eps}) = {rep.e_max:.3e}{note}")
    prev = rep.e_max
print("  (cubic scaling: each halving divides the error by ~8)")
print()

print("order-3 target, trajectory started on the computed manifold:")
target = RealizeTarget(
    max_degree=3,
    coeffs={2: {"A[2,0]": 1.0, "B[2,0]": 0.5}, 3: {"A[3,1]": -0.4}},
)
fg = realize(target, p)
nf, _ = reduce(fg, p, 3)
prev = None
for eps in (0.04, 0.02, 0.01):
    rep = compare_flows(p, fg, nf, eps, N=192, manifold_seed=True)
    note = f"   ratio vs previous = {prev / rep.e_max:.2f}" if prev else ""
    print(f"  e({eps}) = {rep.e_max:.3e}{note}")
    prev = rep.e_max
print("  (quartic scaling: each halving divides the error by ~16)")
