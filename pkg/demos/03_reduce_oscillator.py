"""Reducing a concrete oscillator to its center-manifold normal form.

We take a van-der-Pol-flavored nonlinearity (instantaneous quadratic and
cubic terms plus a delayed quadratic) and reduce it to order three.  The
output is the list of retained coefficients on the complement basis
(labels A[j,i] for u1^(j-i) u2^i and B[j,i] for u1^(j-1-i) u3^(i+1), all in
the third component), together with the residual diagnostics of the
infinite-dimensional part of the transformation.
"""

from trizero import FGSeries, HomoPoly, locus, reduce
from trizero.formats import format_nf_coeffs

p = locus(1.0, 0.0)

F = {
    2: HomoPoly.from_dict(2, 2, {(2, 0): 0.3, (1, 1): -0.1}),
    3: HomoPoly.from_dict(2, 3, {(2, 1): -1.0}),   # ~ x^2 x' damping
}
G = {
    2: HomoPoly.from_dict(2, 2, {(0, 2): 0.2}),
}
fg = FGSeries.build(F=F, G=G, max_degree=3)

nf, trace = reduce(fg, p, 3)

print("retained normal-form coefficients:")
for line in format_nf_coeffs(nf):
    print("  " + line)

print()
print("per-order diagnostics:")
for j, tr in trace.orders.items():
    res = tr.U2.residuals
    print(f"  order {j}: split residual {tr.split_residual:.1e}; "
          f"v-solve ode {res['ode']:.1e}, boundary {res['boundary']:.1e}, "
          f"projection {res['projection']:.1e}; "
          f"theta-degree {tr.U2.theta_degree}")

print()
print("the degree-2 entry of the center-manifold table for the u1^2 monomial")
print("(an R^2-valued polynomial in the history variable):")
tp = trace.orders[2].U2.table[(2, 0, 0)]
for k, row in enumerate(tp.coeffs):
    print(f"  theta^{k}: ({row[0]: .6f}, {row[1]: .6f})")
