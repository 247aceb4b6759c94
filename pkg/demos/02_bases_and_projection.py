"""The center basis, its dual, and the projection of trajectories.

The center subspace is spanned by the columns (1,0), (theta,1),
(theta^2/2, theta); the adjoint rows are normalized against them through
the delayed bilinear pairing.  The second column of Psi(0) is the weight
vector of the scalar nonlinearity in the projected equation: its last two
entries are the locus constants kappa1, kappa2, and its first entry kappa0
is pinned by the fourth and fifth derivatives of the characteristic
function (all three rows of the projected equation are active).
"""

import numpy as np

from trizero import (
    bilinear,
    char_derivative_at_zero,
    locus,
    project_center,
    psi_basis,
    simulate_dde,
)
from trizero.linear import phi_at

p = locus(1.0, 0.0)
basis = psi_basis(p)

print("Psi(0):")
print(np.array2string(basis.psi0, precision=12))
p3, p4, p5 = (char_derivative_at_zero(p, k) for k in (3, 4, 5))
kappa0 = 0.375 * p4 ** 2 / p3 ** 3 - 0.3 * p5 / p3 ** 2
print(f"second column = (kappa0, kappa1, kappa2) "
      f"= ({kappa0:.12f}, {p.kappa1:.12f}, {p.kappa2:.12f})")

gram = np.array([
    [bilinear(basis.psi[i], basis.phi[j], p) for j in range(3)]
    for i in range(3)
])
print(f"normalization defect |(Psi,Phi) - I| = {np.max(np.abs(gram - np.eye(3))):.2e}")
print()

# project a linear trajectory started on the center plane: the projection
# follows the nilpotent flow exp(Bt) u0 exactly (up to grid error)
u0 = np.array([0.01, -0.004, 0.006])
traj = simulate_dde(p, None, lambda t: phi_at(t) @ u0, 1.0, 64)
times, proj = project_center(traj, p)
B = np.array([[0.0, 1, 0], [0, 0, 1], [0, 0, 0]])

import scipy.linalg

worst = max(
    np.linalg.norm(proj[i] - scipy.linalg.expm(B * t) @ u0)
    for i, t in enumerate(times)
)
print("linear flow seeded with history Phi(theta) u0:")
print(f"  max | (Psi, z_t) - exp(Bt) u0 | over [0, 1] = {worst:.2e}")
print(f"  u(0)   = {proj[0]}")
print(f"  u(1)   = {proj[-1]}")
print(f"  theory = {scipy.linalg.expm(B * times[-1]) @ u0}")
