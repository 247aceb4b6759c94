"""Order-by-order center-manifold normal-form reduction of the oscillator.

The projected system splits into a three-dimensional part driven by the
nilpotent block B and an infinite-dimensional complement:

    u' = B u + Psi(0) N(u, v)
    v' = A_{Q1} v + (I - pi) X0 N(u, v)

with N the R^2-valued nonlinearity evaluated through the two arguments
phi(0) and phi(-tau0) of the state segment.  At each order j a near-identity
change of variables (u, v) = (u, v) + (U1_j(u), U2_j(u)) removes everything
removable: the u-part is resolved through the homological split of
``homological.split`` and the v-part through a linear solve over
theta-polynomials.

The engine recomposes the transformed system from the original one at every
order using the accumulated transformation, which keeps the bookkeeping of
lower-order feedback exact; the re-expanded lower orders are checked against
their recorded values on every pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CMResidualError, LambdaResidualError, ThetaDegreeError
from .homological import nf_third_component, split, t_matrix
from .linear import OscillatorParams, m_matrices, psi_basis
from .poly import (
    HomoPoly,
    ThetaPoly,
    VecPoly3,
    enumerate_monomials,
    poly_mul,
    series_add,
    series_compose,
    theta_derivative,
    theta_eval,
)

__all__ = [
    "FGSeries",
    "NFSeries",
    "CMTable",
    "OrderTrace",
    "ReductionTrace",
    "project_nonlinearity",
    "solve_v_homological",
    "reduce",
    "REDUCTION_THETA_CAP",
]

# Theta-degrees of the v-component transformations grow with the order
# (roughly by 2j + forcing degree per order), so the pipeline cap sits well
# above the standalone default of poly.DEFAULT_THETA_CAP.
REDUCTION_THETA_CAP = 64


@dataclass(frozen=True)
class FGSeries:
    """Graded bivariate polynomial pair defining the oscillator nonlinearity.

    F[j] and G[j] are homogeneous degree-j polynomials in two variables;
    only degrees >= 2 are admitted (the nonlinearities vanish at the origin
    together with their first-order partials).
    """

    F: dict[int, HomoPoly]
    G: dict[int, HomoPoly]
    max_degree: int

    def __post_init__(self):
        for name, table in (("F", self.F), ("G", self.G)):
            for d, poly in table.items():
                if d < 2:
                    raise ValueError(f"{name}[{d}]: degrees below 2 not allowed")
                if poly.nvars != 2 or poly.degree != d:
                    raise ValueError(
                        f"{name}[{d}] must be a 2-variable degree-{d} polynomial"
                    )
        if self.max_degree < 2:
            raise ValueError("max_degree must be >= 2")

    @staticmethod
    def zero(max_degree: int) -> "FGSeries":
        return FGSeries(F={}, G={}, max_degree=max_degree)

    @staticmethod
    def build(F=None, G=None, max_degree=None) -> "FGSeries":
        F = dict(F or {})
        G = dict(G or {})
        if max_degree is None:
            max_degree = max([2, *F.keys(), *G.keys()])
        return FGSeries(F=F, G=G, max_degree=max_degree)

    def f_value(self, point) -> float:
        return sum(p.eval(point) for p in self.F.values())

    def g_value(self, point) -> float:
        return sum(p.eval(point) for p in self.G.values())

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.F.values()) and all(
            p.is_zero() for p in self.G.values()
        )


@dataclass(frozen=True)
class NFSeries:
    """Per-degree coefficients of the reduced flow on the complement basis."""

    max_degree: int
    coeffs: dict[int, dict[str, float]]

    def degree_coeffs(self, j: int) -> dict[str, float]:
        return dict(self.coeffs.get(j, {}))

    def third_component(self, j: int) -> HomoPoly:
        return nf_third_component(j, self.coeffs.get(j, {}))

    def vector_field(self, u) -> np.ndarray:
        """Right-hand side B u + sum_j g_j(u) of the reduced equation."""
        u = np.asarray(u, dtype=float)
        out = np.array([u[1], u[2], 0.0])
        for j in self.coeffs:
            out[2] += self.third_component(j).eval(u)
        return out

    def max_coeff_diff(self, other: "NFSeries") -> float:
        worst = 0.0
        for j in set(self.coeffs) | set(other.coeffs):
            mine = self.coeffs.get(j, {})
            theirs = other.coeffs.get(j, {})
            for lb in set(mine) | set(theirs):
                worst = max(worst, abs(mine.get(lb, 0.0) - theirs.get(lb, 0.0)))
        return worst


@dataclass(frozen=True)
class CMTable:
    """The v-component of one normal-form transformation.

    Maps every degree-j monomial in u to an R^2-valued theta-polynomial on
    [-tau0, 0], together with the residuals of the three defining
    conditions: the interior transport identity ('ode'), the jump relation
    at theta = 0 ('boundary') and adjoint orthogonality ('projection').
    """

    degree: int
    table: dict[tuple[int, ...], ThetaPoly]
    residuals: dict[str, float]
    theta_degree: int

    def eval_at(self, theta: float) -> dict[tuple[int, ...], np.ndarray]:
        return {m: theta_eval(tp, theta) for m, tp in self.table.items()}


@dataclass(frozen=True)
class OrderTrace:
    """Everything the engine produced at one order."""

    degree: int
    f1_pre: VecPoly3
    g1: dict[str, float]
    U1: VecPoly3
    U2: CMTable
    split_residual: float
    lower_u_residual: float
    lower_v_residual: float
    forcing_kerpi_residual: float


@dataclass(frozen=True)
class ReductionTrace:
    """Per-order records plus the accumulated change of variables.

    ``u_transform`` maps the final normal-form coordinate to the original
    projection coordinate (identity plus degree >= 2 corrections);
    ``v_transform`` holds the accumulated v-component per degree and
    monomial, i.e. the center-manifold parametrization in the final
    coordinate.
    """

    orders: dict[int, OrderTrace]
    u_transform: dict[int, VecPoly3]
    v_transform: dict[int, dict[tuple[int, ...], ThetaPoly]]

    def max_residual(self) -> float:
        worst = 0.0
        for tr in self.orders.values():
            worst = max(worst, tr.split_residual, tr.lower_u_residual,
                        tr.lower_v_residual, *tr.U2.residuals.values())
        return worst

    def apply_u_transform(self, uhat) -> np.ndarray:
        """Original-coordinate image of a normal-form point."""
        uhat = np.asarray(uhat, dtype=float)
        out = np.zeros(3)
        for vec in self.u_transform.values():
            out += vec.eval(uhat)
        return out

    def invert_u_transform(self, u, iterations: int = 12) -> np.ndarray:
        """Normal-form preimage of an original-coordinate point (fixed point)."""
        u = np.asarray(u, dtype=float)
        uhat = np.array(u)
        for _ in range(iterations):
            corr = np.zeros(3)
            for d, vec in self.u_transform.items():
                if d >= 2:
                    corr += vec.eval(uhat)
            uhat = u - corr
        return uhat

    def manifold_offset(self, uhat, theta: float) -> np.ndarray:
        """Value of the accumulated v-component at one history point."""
        uhat = np.asarray(uhat, dtype=float)
        out = np.zeros(2)
        for table in self.v_transform.values():
            for mono, tp in table.items():
                coeff = float(np.prod(uhat ** np.array(mono)))
                if coeff != 0.0:
                    out += coeff * theta_eval(tp, theta)
        return out


# ---------------------------------------------------------------------------
# series helpers over VecPoly3 / theta tables
# ---------------------------------------------------------------------------

def _identity_vecpoly() -> VecPoly3:
    return VecPoly3((
        HomoPoly.monomial(3, (1, 0, 0)),
        HomoPoly.monomial(3, (0, 1, 0)),
        HomoPoly.monomial(3, (0, 0, 1)),
    ))


def _component_series(vs: dict[int, VecPoly3], i: int) -> dict[int, HomoPoly]:
    return {d: v.components[i] for d, v in vs.items()}


def _vec_from_components(parts: list[dict[int, HomoPoly]]) -> dict[int, VecPoly3]:
    degrees = set()
    for s in parts:
        degrees |= set(s)
    out = {}
    for d in degrees:
        comps = tuple(
            s.get(d, HomoPoly.zero(3, d)) for s in parts
        )
        out[d] = VecPoly3(comps)
    return out


def _vec_series_add(a: dict[int, VecPoly3], b: dict[int, VecPoly3]) -> dict[int, VecPoly3]:
    out = dict(a)
    for d, v in b.items():
        out[d] = out[d] + v if d in out else v
    return out


def _vec_series_compose(vs: dict[int, VecPoly3], subst: list[dict[int, HomoPoly]],
                        trunc: int) -> dict[int, VecPoly3]:
    comps_out: list[dict[int, HomoPoly]] = []
    for i in range(3):
        acc: dict[int, HomoPoly] = {}
        for d, v in vs.items():
            acc = series_add(acc, series_compose(v.components[i], subst, trunc, 3))
        comps_out.append(acc)
    return _vec_from_components(comps_out)


def _theta_series_compose(ws: dict[int, dict[tuple, ThetaPoly]],
                          subst: list[dict[int, HomoPoly]],
                          trunc: int) -> dict[int, dict[tuple, ThetaPoly]]:
    out: dict[int, dict[tuple, ThetaPoly]] = {}
    for d, table in ws.items():
        for mono, tp in table.items():
            scalar = HomoPoly.monomial(3, mono)
            expanded = series_compose(scalar, subst, trunc, 3)
            for d2, poly in expanded.items():
                dst = out.setdefault(d2, {})
                for mono2, c in poly.as_dict().items():
                    add = tp.scale(c)
                    dst[mono2] = dst[mono2] + add if mono2 in dst else add
    return out


def _theta_series_add(ws, other):
    out = {d: dict(t) for d, t in ws.items()}
    for d, table in other.items():
        dst = out.setdefault(d, {})
        for mono, tp in table.items():
            dst[mono] = dst[mono] + tp if mono in dst else tp
    return out


def _theta_series_eval(ws: dict[int, dict[tuple, ThetaPoly]], theta: float
                       ) -> tuple[dict[int, HomoPoly], dict[int, HomoPoly]]:
    """Evaluate the v-series at one history point; returns two scalar series."""
    xs: dict[int, HomoPoly] = {}
    ys: dict[int, HomoPoly] = {}
    for d, table in ws.items():
        terms_x = {}
        terms_y = {}
        for mono, tp in table.items():
            val = theta_eval(tp, theta)
            if val[0] != 0.0:
                terms_x[mono] = terms_x.get(mono, 0.0) + val[0]
            if val[1] != 0.0:
                terms_y[mono] = terms_y.get(mono, 0.0) + val[1]
        if terms_x:
            xs[d] = HomoPoly.from_dict(3, d, terms_x)
        if terms_y:
            ys[d] = HomoPoly.from_dict(3, d, terms_y)
    return xs, ys


def _inv_jacobian_apply(u_series: dict[int, VecPoly3], y_series: dict[int, VecPoly3],
                        trunc: int) -> dict[int, VecPoly3]:
    """Solve DU(u) Z(u) = Y(u) degree by degree (U = id + higher terms)."""
    z: dict[int, VecPoly3] = {}
    corrections = {d: v for d, v in u_series.items() if d >= 2}
    for d in range(1, trunc + 1):
        val = y_series.get(d, VecPoly3.zero(d))
        for k, Uk in corrections.items():
            m = d - (k - 1)
            if m < 1 or m not in z:
                continue
            val = val - _dir_deriv_vec(Uk, z[m])
        z[d] = val
    return z


def _dir_deriv_vec(U: VecPoly3, Y: VecPoly3) -> VecPoly3:
    """(DU) Y: contract the Jacobian of U with the vector polynomial Y."""
    comps = []
    for comp in U.components:
        acc = HomoPoly.zero(3, comp.degree - 1 + Y.degree)
        for i in range(3):
            acc = acc + poly_mul(comp.partial(i), Y.components[i])
        comps.append(acc)
    return VecPoly3(tuple(comps))


def _apply_B(v: VecPoly3) -> VecPoly3:
    c1, c2, c3 = v.components
    return VecPoly3((c2, c3, HomoPoly.zero(3, v.degree)))


def _phi_theta_times(w: np.ndarray) -> ThetaPoly:
    """Phi(theta) w for w in R^3: rows are the theta-power coefficients."""
    return ThetaPoly(np.array([
        [w[0], w[1]],
        [w[1], w[2]],
        [0.5 * w[2], 0.0],
    ]))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _linear_w_series(p: OscillatorParams) -> tuple[list, list]:
    """Base series of the two nonlinearity arguments at v = 0."""
    u1 = HomoPoly.monomial(3, (1, 0, 0))
    u2 = HomoPoly.monomial(3, (0, 1, 0))
    u3 = HomoPoly.monomial(3, (0, 0, 1))
    w0 = [{1: u1}, {1: u2}]
    w1 = [
        {1: u1 + u2.scale(-p.tau0) + u3.scale(0.5 * p.tau0 ** 2)},
        {1: u2 + u3.scale(-p.tau0)},
    ]
    return w0, w1


def _nonlinearity_series(fg: FGSeries, w0: list, w1: list, trunc: int
                         ) -> dict[int, HomoPoly]:
    """E = F(w0) + G(w1) as a graded scalar series in u, truncated."""
    E: dict[int, HomoPoly] = {}
    for k, poly in fg.F.items():
        if k <= trunc:
            E = series_add(E, series_compose(poly, w0, trunc, 3))
    for k, poly in fg.G.items():
        if k <= trunc:
            E = series_add(E, series_compose(poly, w1, trunc, 3))
    return {d: q for d, q in E.items() if not q.is_zero()}


def project_nonlinearity(fg: FGSeries, p: OscillatorParams, j: int,
                         v_subst=None) -> VecPoly3:
    """Degree-j u-terms of the projected nonlinearity.

    Returns E_j weighted by the second column of Psi(0), where

        E = F((u1, u2) + v(0)) + G((u1 - tau0 u2 + tau0^2 u3 / 2,
                                     u2 - tau0 u3) + v(-tau0))

    and v(0), v(-tau0) come from ``v_subst`` (a pair of graded R^2-valued
    substitutions, each given as two scalar series), both zero when absent.

    Note the weight vector: the dual basis forces a nonzero first entry
    kappa0 alongside (kappa1, kappa2); all three channels of the projected
    equation carry the scalar nonlinearity.
    """
    w0, w1 = _linear_w_series(p)
    if v_subst is not None:
        v0, v1 = v_subst
        w0 = [series_add(w0[0], dict(v0[0])), series_add(w0[1], dict(v0[1]))]
        w1 = [series_add(w1[0], dict(v1[0])), series_add(w1[1], dict(v1[1]))]
    E = _nonlinearity_series(fg, w0, w1, j)
    Ej = E.get(j, HomoPoly.zero(3, j))
    col = psi_basis(p).psi0[:, 1]
    return VecPoly3((Ej.scale(col[0]), Ej.scale(col[1]), Ej.scale(col[2])))


@lru_cache(maxsize=None)
def _nilpotent_data(j: int):
    """Powers A^k of the scalar transport matrix and the nilpotency index."""
    A = t_matrix(j)
    powers = [np.eye(A.shape[0])]
    while powers[-1].any():
        powers.append(powers[-1] @ A)
    return A, powers[:-1]  # last entry is the zero matrix


def _projection_weights(p: OscillatorParams, max_power: int) -> np.ndarray:
    """w[i, k, c]: pairing of adjoint row i against theta^k e_c."""
    basis = psi_basis(p)
    out = np.zeros((3, max_power + 1, 2))
    poly = np.polynomial.polynomial
    from .poly import theta_shift

    for i, psi in enumerate(basis.psi):
        psi0 = psi.coeffs[0]
        shifted2 = theta_shift(psi, p.tau0).component(1)
        for k in range(max_power + 1):
            mono = np.zeros(k + 1)
            mono[k] = 1.0
            anti = poly.polyint(poly.polymul(shifted2, mono))
            integral = float(poly.polyval(0.0, anti) - poly.polyval(-p.tau0, anti))
            out[i, k, 0] = (1.0 if k == 0 else 0.0) * psi0[0] + p.a * integral
            out[i, k, 1] = (1.0 if k == 0 else 0.0) * psi0[1] + p.beta * integral
    return out


def _solve_v_general(j: int, phi_map: dict, lambda_map: dict,
                     p: OscillatorParams, theta_cap: int) -> CMTable:
    """Solve the v-component homological equation for general forcing.

    The unknown h assigns a theta-polynomial h_m to each degree-j monomial.
    Conditions:
      (i)   D_u h(u) . Bu - d/dtheta h(u)(theta) = phi(u)(theta)
      (ii)  d/dtheta h(u)(0) - L h(u) = lambda(u)
      (iii) (Psi, h_m) = 0 for every monomial m.
    The interior identity (i) is integrated exactly by variation of
    constants (the transport matrix is nilpotent), leaving one linear system
    for the initial values h_m(0) under (ii) and (iii).
    """
    ms = enumerate_monomials(3, j)
    idx = {m: i for i, m in enumerate(ms)}
    M = len(ms)
    A64, apowers64 = _nilpotent_data(j)
    # extended-precision assembly: the pairing rows mix theta-powers up to
    # ~2j + forcing degree on [-tau0, 0], which cancel catastrophically in
    # plain double at parameter points with large adjoint entries
    ld = np.longdouble
    A = A64.astype(ld)
    apowers = [ak.astype(ld) for ak in apowers64]
    nu = len(apowers)  # A^nu = 0
    M0_64, M1_64 = m_matrices(p)
    M0, M1 = M0_64.astype(ld), M1_64.astype(ld)
    tau0 = ld(p.tau0)

    # forcing arrays
    phi_deg = 0
    for tp in phi_map.values():
        phi_deg = max(phi_deg, tp.degree)
    PHI = np.zeros((phi_deg + 1, M, 2), dtype=ld)
    for mono, tp in phi_map.items():
        PHI[: tp.coeffs.shape[0], idx[mono], :] = tp.coeffs
    LAM = np.zeros((M, 2), dtype=ld)
    for mono, val in lambda_map.items():
        LAM[idx[mono]] = val

    # particular solution H_p(theta) = -int_0^theta exp(A (theta-s)) phi(s) ds
    hp_deg = nu - 1 + phi_deg + 1
    HP = np.zeros((hp_deg + 1, M, 2), dtype=ld)
    for k in range(nu):
        Ak = apowers[k]
        for q in range(phi_deg + 1):
            coef = ld(1.0) / ld(math.perm(k + q + 1, k + 1))
            HP[k + q + 1] -= coef * (Ak @ PHI[q])

    # exp(A theta) coefficient matrices and exp(-A tau0)
    EK = [apowers[k] / ld(math.factorial(k)) for k in range(nu)]
    exp_neg = sum(EK[k] * (-tau0) ** k for k in range(nu))
    hp_neg = sum(HP[t] * (-tau0) ** t for t in range(HP.shape[0]))

    eye_m = np.eye(M, dtype=ld)
    # (ii): A H0 - phi_0 - H0 M0^T - (exp(-A tau0) H0 + HP(-tau0)) M1^T = LAM
    K2 = (np.kron(A, np.eye(2, dtype=ld)) - np.kron(eye_m, M0)
          - np.kron(exp_neg, M1))
    rhs2 = (LAM + PHI[0] + hp_neg @ M1.T).reshape(-1)

    # (iii): adjoint orthogonality rows
    max_pow = max(nu - 1, HP.shape[0] - 1)
    W = _projection_weights(p, max_pow).astype(ld)
    K3 = np.zeros((3 * M, 2 * M), dtype=ld)
    rhs3 = np.zeros(3 * M, dtype=ld)
    for i in range(3):
        # sum_k w[i,k,c] (A^k/k!)_{m,m'} acting on H0_{m',c}
        block = np.zeros((M, 2 * M), dtype=ld)
        for k in range(nu):
            block += np.kron(EK[k], W[i, k, :].reshape(1, 2))
        K3[i * M:(i + 1) * M, :] = block
        const = np.zeros(M, dtype=ld)
        for t in range(HP.shape[0]):
            const += HP[t] @ W[i, t, :]
        rhs3[i * M:(i + 1) * M] = -const

    K = np.vstack([K2, K3])
    rhs = np.concatenate([rhs2, rhs3])
    # equilibrate columns; factorize in double, then mixed-precision
    # iterative refinement (residuals in extended precision) recovers the
    # solution of the consistent system to well below the double-precision
    # noise of a single solve
    col = np.linalg.norm(K.astype(float), axis=0)
    col[col == 0.0] = 1.0
    Ks = K / col.astype(ld)
    Ks64 = Ks.astype(float)
    sol = np.linalg.lstsq(Ks64, rhs.astype(float), rcond=None)[0].astype(ld)
    for _ in range(4):
        r = rhs - Ks @ sol
        if float(np.max(np.abs(r))) < 1e-16 * max(1.0, float(np.max(np.abs(rhs)))):
            break
        sol = sol + np.linalg.lstsq(Ks64, r.astype(float), rcond=None)[0].astype(ld)
    sol = sol / col.astype(ld)
    H0 = sol.reshape(M, 2)

    # assemble theta coefficient stack H[t] = EK[t] H0 + HP[t], then round
    # to the double precision actually handed back
    n_pow = max(nu, HP.shape[0])
    H_ld = np.zeros((n_pow, M, 2), dtype=ld)
    for k in range(nu):
        H_ld[k] += EK[k] @ H0
    H_ld[: HP.shape[0]] += HP
    H = H_ld.astype(float)

    # residuals of the three conditions, recomputed for the returned
    # double-precision table with extended-precision accumulation
    Hx = H.astype(ld)
    res_ode = 0.0
    ode_scale = 0.0
    for t in range(n_pow):
        nxt = (t + 1) * Hx[t + 1] if t + 1 < n_pow else np.zeros((M, 2), dtype=ld)
        force = PHI[t] if t < PHI.shape[0] else np.zeros((M, 2), dtype=ld)
        res_ode = max(res_ode, float(np.max(np.abs(A @ Hx[t] - nxt - force))))
        ode_scale = max(ode_scale, float(np.max(
            np.abs(A) @ np.abs(Hx[t]) + np.abs(nxt) + np.abs(force)
        )))
    h_neg = sum(Hx[t] * (-tau0) ** t for t in range(n_pow))
    h1 = Hx[1] if n_pow > 1 else np.zeros((M, 2), dtype=ld)
    res_bnd = float(np.max(np.abs(h1 - Hx[0] @ M0.T - h_neg @ M1.T - LAM)))
    res_proj = 0.0
    proj_scale = 0.0
    for i in range(3):
        vals = np.zeros(M, dtype=ld)
        mass = np.zeros(M, dtype=ld)
        for t in range(n_pow):
            vals += Hx[t] @ W[i, t, :]
            mass += np.abs(Hx[t]) @ np.abs(W[i, t, :])
        res_proj = max(res_proj, float(np.max(np.abs(vals))))
        proj_scale = max(proj_scale, float(np.max(mass)))
    # rounding the stored table to double perturbs each pairing by up to
    # the summed absolute mass times the unit roundoff; below that level a
    # nonzero residual carries no information about the solve
    proj_floor = 16.0 * np.finfo(float).eps * proj_scale
    bnd_scale = float(np.max(
        np.abs(h1) + np.abs(Hx[0] @ M0.T)
        + sum(np.abs(Hx[t]) * abs(tau0) ** t for t in range(n_pow)) @ np.abs(M1.T)
        + np.abs(LAM)
    ))
    bnd_floor = 16.0 * np.finfo(float).eps * bnd_scale

    residuals = {"ode": res_ode, "boundary": res_bnd, "projection": res_proj}
    table = {}
    theta_degree = 0
    for m in ms:
        tp = ThetaPoly(H[:, idx[m], :])
        if tp.degree > theta_cap:
            raise ThetaDegreeError(
                f"v-component theta-degree {tp.degree} exceeds cap {theta_cap} "
                f"at order {j}"
            )
        theta_degree = max(theta_degree, tp.degree)
        table[m] = tp
    bounds = {
        "ode": max(1e-10, 16.0 * np.finfo(float).eps * ode_scale),
        "boundary": max(1e-10, bnd_floor),
        "projection": max(1e-10, proj_floor),
    }
    if any(residuals[k] > bounds[k] for k in residuals):
        raise CMResidualError(
            f"center-manifold solve residuals {residuals} exceed bounds "
            f"{bounds} at order {j}"
        )
    return CMTable(degree=j, table=table, residuals=residuals,
                   theta_degree=theta_degree)


def solve_v_homological(j: int, rhs, p: OscillatorParams,
                        theta_cap: int = REDUCTION_THETA_CAP) -> CMTable:
    """Solve the v-component equation for forcing (I - pi) X0 F_j(u).

    ``rhs`` maps each degree-j monomial to the R^2 value of F_j on it (a
    dict or an array over graded-lex monomial order).  The continuous part
    of the forcing is -Phi(theta) Psi(0) F_j(u) and the jump part is F_j(u).
    """
    ms = enumerate_monomials(3, j)
    if isinstance(rhs, np.ndarray):
        rhs = {m: np.asarray(rhs[i], dtype=float) for i, m in enumerate(ms)}
    psi0 = psi_basis(p).psi0
    phi_map = {}
    lambda_map = {}
    for m, val in rhs.items():
        val = np.asarray(val, dtype=float)
        if not val.any():
            continue
        w = psi0 @ val
        phi_map[m] = _phi_theta_times(w).scale(-1.0)
        lambda_map[m] = val
    return _solve_v_general(j, phi_map, lambda_map, p, theta_cap)


# ---------------------------------------------------------------------------
# the reduction driver
# ---------------------------------------------------------------------------

def _forcing_series(comp_w, udot, E, psi0, p, upto):
    """Continuous/jump forcing of the v-equation, degrees 2..upto.

    Contributions: the projected nonlinearity (I - pi) X0 F, the transport
    of the accumulated v-transformation by A_{Q1}, and -Dv . udot.
    """
    M0, M1 = m_matrices(p)
    phi_srs: dict[int, dict] = {d: {} for d in range(2, upto + 1)}
    lam_srs: dict[int, dict] = {d: {} for d in range(2, upto + 1)}

    def add_phi(d, mono, tp):
        dst = phi_srs[d]
        dst[mono] = dst[mono] + tp if mono in dst else tp

    def add_lam(d, mono, val):
        dst = lam_srs[d]
        dst[mono] = dst[mono] + val if mono in dst else np.array(val)

    # (I - pi) X0 F with F = (0, E)
    for d in range(2, upto + 1):
        Ed = E.get(d)
        if Ed is None:
            continue
        for mono, c in Ed.as_dict().items():
            val = np.array([0.0, c])
            add_lam(d, mono, val)
            add_phi(d, mono, _phi_theta_times(psi0 @ val).scale(-1.0))

    # A_{Q1} acting on the accumulated v-transformation
    for d, table in comp_w.items():
        if d > upto:
            continue
        for mono, tp in table.items():
            dtp = theta_derivative(tp)
            add_phi(d, mono, dtp)
            val0 = tp.coeffs[0]
            valneg = theta_eval(tp, -p.tau0)
            d0 = dtp.coeffs[0]
            add_lam(d, mono, M0 @ val0 + M1 @ valneg - d0)

    # -Dv . udot
    for d2, table in comp_w.items():
        for mono, tp in table.items():
            for i in range(3):
                if mono[i] == 0:
                    continue
                dm = list(mono)
                dm[i] -= 1
                base = HomoPoly.monomial(3, tuple(dm), float(mono[i]))
                for d3, yvec in udot.items():
                    d = d2 - 1 + d3
                    if d > upto or d < 2:
                        continue
                    prod = poly_mul(base, yvec.components[i])
                    for mono2, c in prod.as_dict().items():
                        add_phi(d, mono2, tp.scale(-c))
    return phi_srs, lam_srs


def _forcing_norm(phi_d, lam_d):
    worst = 0.0
    for tp in phi_d.values():
        worst = max(worst, tp.max_abs())
    for val in lam_d.values():
        worst = max(worst, float(np.max(np.abs(val))))
    return worst


def _kerpi_residual(phi_d, lam_d, p):
    """Check the forcing lies in ker(pi): (Psi, phi_m) + Psi(0) lam_m = 0."""
    basis = psi_basis(p)
    max_pow = 0
    for tp in phi_d.values():
        max_pow = max(max_pow, tp.degree)
    W = _projection_weights(p, max_pow)
    worst = 0.0
    for mono in set(phi_d) | set(lam_d):
        tp = phi_d.get(mono)
        lam = lam_d.get(mono, np.zeros(2))
        for i in range(3):
            val = float(basis.psi0[i] @ lam)
            if tp is not None:
                for t in range(tp.coeffs.shape[0]):
                    val += float(tp.coeffs[t] @ W[i, t, :])
            worst = max(worst, abs(val))
    return worst


def reduce(fg: FGSeries, p: OscillatorParams, order: int,
           theta_cap: int = REDUCTION_THETA_CAP) -> tuple[NFSeries, ReductionTrace]:
    """Reduce the oscillator with nonlinearities ``fg`` to normal form.

    Iterates j = 2..order: collects the current degree-j u-terms from the
    original system composed with the accumulated transformation, splits
    them against the complement basis (the retained part g_j lives there),
    removes the range part through U1_j, and solves for the v-component
    transformation U2_j.  Returns the per-degree complement coefficients and
    the full trace.
    """
    if order < 2:
        raise ValueError("normal-form order must be >= 2")
    basis = psi_basis(p)
    psi0 = basis.psi0
    col2 = psi0[:, 1]

    comp_u: dict[int, VecPoly3] = {1: _identity_vecpoly()}
    comp_w: dict[int, dict] = {}
    g_coeffs: dict[int, dict[str, float]] = {}
    g_vec: dict[int, VecPoly3] = {}
    traces: dict[int, OrderTrace] = {}

    for j in range(2, order + 1):
        # arguments of the nonlinearity through the accumulated transformation
        w0_base, w1_base = _linear_w_series(p)
        u1s = _component_series(comp_u, 0)
        u2s = _component_series(comp_u, 1)
        u3s = _component_series(comp_u, 2)
        v0x, v0y = _theta_series_eval(comp_w, 0.0)
        vnx, vny = _theta_series_eval(comp_w, -p.tau0)
        tau0 = p.tau0
        w0 = [series_add(u1s, v0x), series_add(u2s, v0y)]
        w1x = series_add(series_add(u1s, {d: q.scale(-tau0) for d, q in u2s.items()}),
                         {d: q.scale(0.5 * tau0 ** 2) for d, q in u3s.items()})
        w1x = series_add(w1x, vnx)
        w1y = series_add(u2s, {d: q.scale(-tau0) for d, q in u3s.items()})
        w1y = series_add(w1y, vny)
        w1 = [w1x, w1y]

        E = _nonlinearity_series(fg, w0, w1, j)

        # u-equation: Z = (DU)^(-1) (B U + P), P = E-weighted column
        Y: dict[int, VecPoly3] = {}
        for d, v in comp_u.items():
            if d <= j:
                Y[d] = _apply_B(v)
        for d, Ed in E.items():
            if d > j:
                continue
            Pv = VecPoly3((Ed.scale(col2[0]), Ed.scale(col2[1]), Ed.scale(col2[2])))
            Y[d] = Y[d] + Pv if d in Y else Pv
        Z = _inv_jacobian_apply(comp_u, Y, j)

        lower_u = 0.0
        u_scale = 1.0
        for k in range(2, j):
            lower_u = max(lower_u, (Z[k] - g_vec[k]).max_abs())
            u_scale = max(u_scale, g_vec[k].max_abs(), Z[k].max_abs())
        if lower_u > 1e-8 * u_scale:
            raise LambdaResidualError(
                f"re-expanded lower-order u-terms drifted by {lower_u:.3e} "
                f"at order {j}"
            )

        f1 = Z.get(j, VecPoly3.zero(j))
        sp = split(f1)
        g_coeffs[j] = sp.w_part
        g_vec[j] = sp.w_vector()
        U1 = sp.preimage

        # v-equation forcing in the current variables
        udot = {1: _apply_B(comp_u[1])}
        for k in range(2, j):
            udot[k] = g_vec[k]
        phi_srs, lam_srs = _forcing_series(comp_w, udot, E, psi0, p, j)
        lower_v = 0.0
        for d in range(2, j):
            lower_v = max(lower_v, _forcing_norm(phi_srs[d], lam_srs[d]))
        v_scale = max(1.0, _forcing_norm(phi_srs[j], lam_srs[j]))
        for table in comp_w.values():
            for tp in table.values():
                v_scale = max(v_scale, tp.max_abs())
        if lower_v > 1e-8 * v_scale:
            raise LambdaResidualError(
                f"re-expanded lower-order v-forcing drifted by {lower_v:.3e} "
                f"at order {j}"
            )
        kerpi = _kerpi_residual(phi_srs[j], lam_srs[j], p)
        U2 = _solve_v_general(j, phi_srs[j], lam_srs[j], p, theta_cap)

        # accumulate the transformation: u -> u + U1_j(u), v -> v + U2_j(u)
        subst = [
            series_add({1: comp_u[1].components[i]}, {j: U1.components[i]})
            for i in range(3)
        ]
        comp_u = _vec_series_compose(comp_u, subst, order)
        comp_w = _theta_series_compose(comp_w, subst, order)
        comp_w = _theta_series_add(comp_w, {j: U2.table})

        traces[j] = OrderTrace(
            degree=j, f1_pre=f1, g1=dict(sp.w_part), U1=U1, U2=U2,
            split_residual=sp.residual, lower_u_residual=lower_u,
            lower_v_residual=lower_v, forcing_kerpi_residual=kerpi,
        )

    nf = NFSeries(max_degree=order, coeffs=g_coeffs)
    return nf, ReductionTrace(orders=traces, u_transform=comp_u,
                              v_transform=comp_w)
