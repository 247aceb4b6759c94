"""Linear theory of the delayed oscillator at its triple-zero point.

Covers the parameter locus where the linearization carries a nilpotent
triple-zero eigenvalue, the characteristic quasi-polynomial and its
derivatives, the basis of the three-dimensional center subspace, the adjoint
basis with its normalization, and the bilinear pairing between them.

The first-order system behind everything here is

    x'(t) = y(t)
    y'(t) = -a (x(t) - x(t-tau0)) + a tau0 y(t) - beta (y(t) - y(t-tau0))
            + F(x(t), y(t)) + G(x(t-tau0), y(t-tau0))

whose linear part is L phi = M0 phi(0) + M1 phi(-tau0) with

    M0 = [[0, 1], [-a, a*tau0 - beta]],    M1 = [[0, 0], [a, beta]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateCubicTerm,
    DomainError,
    NormalizationError,
    SpectralDegeneracy,
)
from .poly import ThetaPoly, theta_shift

__all__ = [
    "OscillatorParams",
    "CharReport",
    "BasisPair",
    "locus",
    "char_eval",
    "char_derivative_at_zero",
    "char_derivatives",
    "psi_basis",
    "bilinear",
    "m_matrices",
    "phi_basis",
    "phi_at",
    "REFERENCE_PARAMS",
]


@dataclass(frozen=True)
class OscillatorParams:
    """A point on the triple-zero locus with its derived constants.

    kappa1 and kappa2 weight the scalar nonlinearity in the second and third
    rows of the projected equation; kappa2 = 6 / P'''(0).
    """

    a: float
    beta: float
    tau0: float
    b: float
    alpha: float
    kappa1: float
    kappa2: float


def locus(a: float, beta: float) -> OscillatorParams:
    """Construct the triple-zero parameter point over (a, beta).

    Raises DomainError for a <= 0 and DegenerateCubicTerm when
    a*tau0 = 3*beta (equivalently 3*beta^2 = 2*a), where the cubic
    coefficient of the characteristic function vanishes.
    """
    if not a > 0.0:
        raise DomainError(f"need a > 0, got a = {a}")
    tau0 = beta / a + math.sqrt(beta * beta + 2.0 * a) / a
    b = beta - a * tau0
    c3 = a * tau0 - 3.0 * beta
    if abs(c3) <= 1e-12 * max(1.0, abs(a * tau0)):
        raise DegenerateCubicTerm(
            f"a*tau0 = {a * tau0} equals 3*beta = {3 * beta}: "
            "cubic coefficient degenerates"
        )
    kappa1 = 3.0 * (a * tau0 - 4.0 * beta) / (2.0 * tau0 * c3 * c3)
    kappa2 = 6.0 / (tau0 * tau0 * c3)
    return OscillatorParams(a=a, beta=beta, tau0=tau0, b=b, alpha=a,
                            kappa1=kappa1, kappa2=kappa2)


REFERENCE_PARAMS = ((1.0, 0.0), (2.0, 1.0))


def m_matrices(p: OscillatorParams) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous and delayed coefficient matrices (M0, M1).

    At a locus point -b = a*tau0 - beta and alpha = a; writing the entries
    through (b, alpha) keeps off-locus perturbations (used by the spectral
    instruments to demonstrate cluster loss) honest.
    """
    M0 = np.array([[0.0, 1.0], [-p.a, -p.b]])
    M1 = np.array([[0.0, 0.0], [p.alpha, p.beta]])
    return M0, M1


def char_eval(p: OscillatorParams, lam: complex) -> complex:
    """P(lam) = lam^2 + b lam + a - (alpha + beta lam) e^{-lam tau0}."""
    return (
        lam * lam + p.b * lam + p.a
        - (p.alpha + p.beta * lam) * np.exp(-lam * p.tau0)
    )


def char_derivative_at_zero(p: OscillatorParams, k: int) -> float:
    """k-th derivative of the characteristic function at lambda = 0.

    Closed form: the polynomial part contributes (a, b, 2, 0, ...) and the
    exponential part contributes -((-tau0)^k alpha + k beta (-tau0)^(k-1)).
    """
    poly_part = {0: p.a, 1: p.b, 2: 2.0}.get(k, 0.0)
    t = -p.tau0
    exp_part = (t ** k) * p.alpha + (k * p.beta * t ** (k - 1) if k >= 1 else 0.0)
    return poly_part - exp_part


@dataclass(frozen=True)
class CharReport:
    """Derivative values at zero plus the imaginary-axis scan summary."""

    p0: float
    p1: float
    p2: float
    p3: float
    axis_margin: float
    scan_bound: float
    omega_min: float


def char_derivatives(p: OscillatorParams, omega_step: float = 1e-3,
                     margin_threshold: float = 1e-6) -> CharReport:
    """Evaluate P, P', P'', P''' at zero and scan the imaginary axis.

    The scan covers [omega_min, scan_bound]; beyond scan_bound the quadratic
    term dominates every other one, so no roots exist there.  Below omega_min
    the modulus is small because of the known triple root, whose
    nondegeneracy P'''(0) != 0 certifies the absence of a fourth axis root;
    omega_min is chosen so that the local cubic growth has reached 0.01.
    """
    vals = [char_derivative_at_zero(p, k) for k in range(4)]
    p3 = vals[3]
    omega_min = (0.06 / abs(p3)) ** (1.0 / 3.0)
    scan_bound = max(
        10.0,
        2.0 * (abs(p.b) + abs(p.beta) + math.sqrt(p.a + p.alpha) + 1.0),
    )
    omegas = np.arange(omega_min, scan_bound + omega_step, omega_step)
    lam = 1j * omegas
    vals_axis = np.abs(
        -omegas ** 2 + p.b * lam + p.a
        - (p.alpha + p.beta * lam) * np.exp(-lam * p.tau0)
    )
    margin = float(vals_axis.min())
    if margin < margin_threshold:
        raise SpectralDegeneracy(
            f"imaginary-axis margin {margin:.3e} below {margin_threshold:.1e} "
            f"near omega = {omegas[int(np.argmin(vals_axis))]:.6f}"
        )
    return CharReport(p0=vals[0], p1=vals[1], p2=vals[2], p3=p3,
                      axis_margin=margin, scan_bound=scan_bound,
                      omega_min=omega_min)


# ---------------------------------------------------------------------------
# center and adjoint bases
# ---------------------------------------------------------------------------

def phi_basis() -> tuple[ThetaPoly, ThetaPoly, ThetaPoly]:
    """Columns of the center basis: (1,0), (theta,1), (theta^2/2, theta)."""
    return (
        ThetaPoly(np.array([[1.0, 0.0]])),
        ThetaPoly(np.array([[0.0, 1.0], [1.0, 0.0]])),
        ThetaPoly(np.array([[0.0, 0.0], [0.0, 1.0], [0.5, 0.0]])),
    )


def phi_at(theta: float) -> np.ndarray:
    """The 2x3 matrix of the center basis evaluated at theta."""
    return np.array([
        [1.0, theta, 0.5 * theta * theta],
        [0.0, 1.0, theta],
    ])


@dataclass(frozen=True)
class BasisPair:
    """Center basis columns and normalized adjoint rows.

    phi[j](theta) lives on [-tau0, 0]; psi[i](s) lives on [0, tau0].
    psi0 is the 3x2 matrix of adjoint values at s = 0; its second column is
    the coefficient vector of the scalar nonlinearity in the projected
    u-equation.
    """

    phi: tuple[ThetaPoly, ThetaPoly, ThetaPoly]
    psi: tuple[ThetaPoly, ThetaPoly, ThetaPoly]
    psi0: np.ndarray
    norm_residual: float


def bilinear(psi_row: ThetaPoly, phi_col: ThetaPoly, p: OscillatorParams) -> float:
    """The adjoint pairing (psi, phi).

    Only the delayed atom of the linear part contributes an integral term:
    the inner integral attached to the instantaneous atom is empty, while the
    atom at -tau0 yields, after orienting the inner integral,

        (psi, phi) = psi(0) phi(0)
                     + int_{-tau0}^{0} psi(z + tau0) M1 phi(z) dz.
    """
    _, M1 = m_matrices(p)
    val = float(np.dot(theta_eval_at_zero(psi_row), theta_eval_at_zero(phi_col)))
    # psi(z + tau0) M1 phi(z): row * matrix * column, expanded per component
    shifted = theta_shift(psi_row, p.tau0)
    integrand = np.polynomial.polynomial.polymul(
        shifted.component(1),
        p.a * phi_col.component(0) + p.beta * phi_col.component(1),
    )
    anti = np.polynomial.polynomial.polyint(integrand)
    val += float(
        np.polynomial.polynomial.polyval(0.0, anti)
        - np.polynomial.polynomial.polyval(-p.tau0, anti)
    )
    return val


def theta_eval_at_zero(tp: ThetaPoly) -> np.ndarray:
    return np.array(tp.coeffs[0])


def _psi_rows_from_initial(psi0: np.ndarray) -> tuple[ThetaPoly, ThetaPoly, ThetaPoly]:
    """Adjoint rows psi(s) = expm(-B s) psi0, written out for B nilpotent."""
    r1, r2, r3 = psi0
    return (
        ThetaPoly(np.array([r1, -r2, 0.5 * r3])),
        ThetaPoly(np.array([r2, -r3])),
        ThetaPoly(np.array([r3])),
    )


@lru_cache(maxsize=64)
def psi_basis(p: OscillatorParams) -> BasisPair:
    """Compute the adjoint basis normalized against the center basis.

    The rows satisfy the adjoint chain psi_i' = -psi_{i+1} together with the
    boundary conditions psi_i(0) M0 + psi_i(tau0) M1 = psi_{i+1}(0)
    (psi_4 = 0), which characterize membership in the adjoint eigenspace; the
    pairing conditions (psi_i, phi_j) = delta_ij then pin the basis uniquely.
    All fifteen equations are linear in the six unknowns of psi0 and are
    solved jointly; rank deficiency or a residual above 1e-10 raises
    NormalizationError.
    """
    M0, M1 = m_matrices(p)
    tau0 = p.tau0
    phis = phi_basis()

    rows = []
    rhs = []

    def unit_psi0(i, c):
        z = np.zeros((3, 2))
        z[i, c] = 1.0
        return z

    units = [unit_psi0(i, c) for i in range(3) for c in range(2)]

    # boundary conditions: psi_i(0) M0 + psi_i(tau0) M1 - psi_{i+1}(0) = 0
    for i in range(3):
        for comp in range(2):
            row = np.zeros(6)
            for k, u in enumerate(units):
                psis = _psi_rows_from_initial(u)
                v = (
                    theta_eval_at_zero(psis[i]) @ M0
                    + np.array([
                        np.polynomial.polynomial.polyval(tau0, psis[i].component(0)),
                        np.polynomial.polynomial.polyval(tau0, psis[i].component(1)),
                    ]) @ M1
                )
                if i < 2:
                    v = v - theta_eval_at_zero(psis[i + 1])
                row[k] = v[comp]
            rows.append(row)
            rhs.append(0.0)

    # normalization: (psi_i, phi_j) = delta_ij
    for i in range(3):
        for j in range(3):
            row = np.zeros(6)
            for k, u in enumerate(units):
                psis = _psi_rows_from_initial(u)
                row[k] = bilinear(psis[i], phis[j], p)
            rows.append(row)
            rhs.append(1.0 if i == j else 0.0)

    A = np.array(rows)
    y = np.array(rhs)
    sol, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 6:
        raise NormalizationError(
            f"adjoint normalization system has rank {rank} < 6; "
            "basis not uniquely determined"
        )
    residual = float(np.max(np.abs(A @ sol - y)))
    if residual > 1e-10:
        raise NormalizationError(
            f"adjoint normalization residual {residual:.3e} exceeds 1e-10"
        )
    psi0 = sol.reshape(3, 2)
    psi0.flags.writeable = False
    return BasisPair(phi=phis, psi=_psi_rows_from_initial(psi0), psi0=psi0,
                     norm_residual=residual)
