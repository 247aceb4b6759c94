"""Constructive realizability: from a prescribed normal form to F and G.

Given target complement coefficients w_j for j = 2..order, the algorithm
walks up the orders: it reduces the partially built nonlinearity to read off
the feedback Lambda_j contributed by lower orders, sets the correction
target Theta_j = w_j - Lambda_j, and chooses degree-j polynomial pairs
(F_j, G_j) whose same-order contribution to the reduced flow is exactly
Theta_j.  The final reduction of the assembled series then reproduces the
target coefficientwise.

The same-order contribution map T_j : (F_j, G_j) -> W_j is linear; it is the
complement projection of the degree-j projected term, which mixes all three
rows of the weight vector (kappa0, kappa1, kappa2) through the homological
split.  T_j is assembled column by column and inverted by minimum-norm least
squares; the classical single-row construction (``construct_order``, built
on the triangular lemma solve) realizes the third-row part alone and is kept
as the direct inverse of the (A_j, B_{j-2}) decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LambdaResidualError, LemmaPreconditionError
from .homological import parse_label, split, w_basis, w_labels
from .linear import OscillatorParams
from .poly import (
    HomoPoly,
    compose_linear,
    enumerate_monomials,
    mono_index,
    monomial_count,
)
from .reduction import FGSeries, NFSeries, project_nonlinearity, reduce

__all__ = [
    "GDecomposition",
    "RealizeTarget",
    "decompose",
    "lemma_solve",
    "construct_order",
    "realize",
    "order_contribution_matrix",
]


# ---------------------------------------------------------------------------
# the (A, B, C, D) decomposition of the composed nonlinearity
# ---------------------------------------------------------------------------

def _two_var(p3: HomoPoly, keep: tuple[int, int]) -> HomoPoly:
    """Project a 3-variable polynomial onto two variables, checking the rest."""
    terms = {}
    for exps, c in p3.as_dict().items():
        out = [0, 0]
        ok = True
        for v in range(3):
            if v == keep[0]:
                out[0] = exps[v]
            elif v == keep[1]:
                out[1] = exps[v]
            elif exps[v] != 0:
                ok = False
        if not ok:
            raise ValueError(f"unexpected variable in term {exps}")
        terms[tuple(out)] = c
    return HomoPoly.from_dict(2, p3.degree, terms)


def _divide_monomial(p: HomoPoly, divisor: tuple[int, ...], tol: float = 1e-11):
    """Divide by a monomial; coefficients on non-divisible terms must be tiny."""
    deg = p.degree - sum(divisor)
    terms = {}
    junk = 0.0
    for exps, c in p.as_dict().items():
        new = tuple(e - d for e, d in zip(exps, divisor))
        if any(e < 0 for e in new):
            junk = max(junk, abs(c))
            continue
        terms[new] = c
    scale = max(1.0, p.max_abs())
    if junk > tol * scale:
        raise ValueError(
            f"polynomial not divisible by monomial {divisor}: residue {junk:.3e}"
        )
    return HomoPoly.from_dict(p.nvars, deg, terms)


@dataclass(frozen=True)
class GDecomposition:
    """Pieces of F_j(u1,u2) + G_j(u1 - tau0 u2 + tau0^2 u3 / 2, u2 - tau0 u3).

    The composed scalar equals
        A_j(u1,u2) + u1 u3 B(u1,u3) + u2 u3 C(u1,u2,u3) + u3^2 D(u3).
    ``B_part`` is a 2-variable polynomial whose variables mean (u1, u3);
    ``D_part`` is univariate in u3.
    """

    degree: int
    A_j: HomoPoly
    B_part: HomoPoly
    C_part: HomoPoly
    D_part: HomoPoly
    reconstruction_residual: float


def _lin(nvars: int, coeffs: dict[tuple[int, ...], float]) -> HomoPoly:
    return HomoPoly.from_dict(nvars, 1, coeffs)


def _compose_args(p: OscillatorParams):
    """Linear forms used by the decomposition, in three variables."""
    t = p.tau0
    full = [
        _lin(3, {(1, 0, 0): 1.0, (0, 1, 0): -t, (0, 0, 1): 0.5 * t * t}),
        _lin(3, {(0, 1, 0): 1.0, (0, 0, 1): -t}),
    ]
    no_u3 = [
        _lin(3, {(1, 0, 0): 1.0, (0, 1, 0): -t}),
        _lin(3, {(0, 1, 0): 1.0}),
    ]
    shear = [
        _lin(3, {(1, 0, 0): 1.0, (0, 0, 1): 0.5 * t * t}),
        _lin(3, {(0, 0, 1): -t}),
    ]
    u1_only = [
        _lin(3, {(1, 0, 0): 1.0}),
        HomoPoly.zero(3, 1),
    ]
    u3_only = [
        _lin(3, {(0, 0, 1): 0.5 * t * t}),
        _lin(3, {(0, 0, 1): -t}),
    ]
    return full, no_u3, shear, u1_only, u3_only


def decompose(fhat: HomoPoly, ghat: HomoPoly, p: OscillatorParams) -> GDecomposition:
    """Split the composed degree-j scalar into its four canonical pieces."""
    if fhat.degree != ghat.degree:
        raise ValueError("F and G pieces must share one degree")
    j = fhat.degree
    full, no_u3, shear, u1_only, u3_only = _compose_args(p)
    g_full = compose_linear(ghat, full)
    g_no_u3 = compose_linear(ghat, no_u3)
    g_shear = compose_linear(ghat, shear)
    g_u1 = compose_linear(ghat, u1_only)
    g_u3 = compose_linear(ghat, u3_only)
    f3 = compose_linear(fhat, [
        _lin(3, {(1, 0, 0): 1.0}), _lin(3, {(0, 1, 0): 1.0}),
    ])

    A3 = f3 + g_no_u3
    B3 = g_shear - g_u1 - g_u3
    C3 = g_full - g_no_u3 - g_shear + g_u1
    D3 = g_u3

    A_j = _two_var(A3, (0, 1))
    B_part = _two_var(_divide_monomial(B3, (1, 0, 1)), (0, 2))
    C_part = _divide_monomial(C3, (0, 1, 1))
    D_quot = _divide_monomial(D3, (0, 0, 2))
    D_part = HomoPoly.from_dict(
        1, j - 2, {(e[2],): c for e, c in D_quot.as_dict().items()}
    )

    # reconstruction residual: the four pieces must re-sum exactly
    from .poly import poly_mul
    u1u3 = HomoPoly.monomial(3, (1, 0, 1))
    u2u3 = HomoPoly.monomial(3, (0, 1, 1))
    u3sq = HomoPoly.monomial(3, (0, 0, 2))
    B_back = compose_linear(B_part, [
        _lin(3, {(1, 0, 0): 1.0}), _lin(3, {(0, 0, 1): 1.0}),
    ])
    D_back = compose_linear(D_part, [_lin(3, {(0, 0, 1): 1.0})])
    recon = A3 + poly_mul(u1u3, B_back) + poly_mul(u2u3, C_part) + poly_mul(u3sq, D_back)
    residual = (recon - (f3 + g_full)).max_abs()
    return GDecomposition(degree=j, A_j=A_j, B_part=B_part, C_part=C_part,
                          D_part=D_part, reconstruction_residual=residual)


# ---------------------------------------------------------------------------
# the triangular lemma solve
# ---------------------------------------------------------------------------

def lemma_solve(zeta: HomoPoly, p: OscillatorParams) -> HomoPoly:
    """Find xi with zeta(u1,u3) = xi(u1 + tau0^2 u3/2, -tau0 u3)
                                   - xi(u1, 0) - xi(tau0^2 u3/2, -tau0 u3).

    ``zeta`` is a 2-variable polynomial in (u1, u3) with vanishing pure
    powers; the gauge fixes the pure-power coefficients of xi to zero and
    the remaining ones follow from a forward triangular solve:

        sum_{i=1..m} C(j-i, m-i) (tau0^2/2)^(m-i) (-tau0)^i gamma_{j-i,i}
            = eps_{j-m,m},   m = 1..j-1.
    """
    if zeta.nvars != 2:
        raise LemmaPreconditionError("lemma input must be a 2-variable polynomial")
    j = zeta.degree
    eps = {m[1]: c for m, c in zip(zeta.monomials(), zeta.coeffs)}
    if abs(eps.get(0, 0.0)) > 0.0 or abs(eps.get(j, 0.0)) > 0.0:
        raise LemmaPreconditionError(
            "lemma input must vanish on the pure powers u1^j and u3^j"
        )
    t = p.tau0
    half = 0.5 * t * t
    gamma = {0: 0.0, j: 0.0}
    for m in range(1, j):
        acc = 0.0
        for i in range(1, m):
            acc += (math.comb(j - i, m - i) * half ** (m - i)
                    * (-t) ** i * gamma[i])
        diag = (-t) ** m  # C(j-m, 0) (-tau0)^m
        gamma[m] = (eps.get(m, 0.0) - acc) / diag
    return HomoPoly.from_dict(2, j, {(j - i, i): g for i, g in gamma.items()})


def _magic_expand(xi: HomoPoly, p: OscillatorParams) -> HomoPoly:
    """xi(u1 + tau0^2 u3/2, -tau0 u3) - xi(u1, 0) - xi(tau0^2 u3/2, -tau0 u3),
    computed in the (u1, u3) plane (2-variable output)."""
    t = p.tau0
    half = 0.5 * t * t
    shear = [_lin(2, {(1, 0): 1.0, (0, 1): half}), _lin(2, {(0, 1): -t})]
    u1_only = [_lin(2, {(1, 0): 1.0}), HomoPoly.zero(2, 1)]
    u3_only = [_lin(2, {(0, 1): half}), _lin(2, {(0, 1): -t})]
    return (compose_linear(xi, shear) - compose_linear(xi, u1_only)
            - compose_linear(xi, u3_only))


# ---------------------------------------------------------------------------
# per-order construction
# ---------------------------------------------------------------------------

def _theta_split(theta: dict[str, float], degree: int):
    """Separate label coefficients into q_j(u1,u2) and s_{j-2}(u1,u3)."""
    q_terms = {}
    s_terms = {}
    for lb, c in theta.items():
        fam, j, i = parse_label(lb)
        if j != degree:
            raise ValueError(f"label {lb} does not match degree {degree}")
        if fam == "A":
            q_terms[(j - i, i)] = c
        else:
            # u1^(j-1-i) u3^(i+1) = u1 u3 * u1^(j-2-i) u3^i
            s_terms[(j - 2 - i, i)] = c
    q = HomoPoly.from_dict(2, degree, q_terms)
    s = HomoPoly.from_dict(2, degree - 2, s_terms) if degree >= 2 else None
    return q, s


def construct_order(theta: dict[str, float], p: OscillatorParams,
                    degree: int | None = None) -> tuple[HomoPoly, HomoPoly]:
    """Single-order construction of (F_j, G_j) from complement coefficients.

    Splits the target into q_j (A labels) and s_{j-2} (B labels), solves the
    triangular lemma for G_j from u1 u3 s_{j-2} / kappa2, and back-solves
    F_j = q_j / kappa2 - G_j(u1 - tau0 u2, u2).  By construction the
    decomposition of the result satisfies kappa2 A_j = q_j and
    kappa2 B_{j-2} = s_{j-2}.
    """
    if degree is None:
        degrees = {parse_label(lb)[1] for lb in theta}
        if len(degrees) != 1:
            raise ValueError("cannot infer a single degree from the labels")
        degree = degrees.pop()
    q, s = _theta_split(theta, degree)
    # zeta = u1 u3 s / kappa2 as a polynomial in (u1, u3)
    zeta_terms = {(e[0] + 1, e[1] + 1): c / p.kappa2 for e, c in s.as_dict().items()}
    zeta = HomoPoly.from_dict(2, degree, zeta_terms)
    if zeta.is_zero():
        ghat = HomoPoly.zero(2, degree)
    else:
        ghat = lemma_solve(zeta, p)
    g_shift = compose_linear(ghat, [
        _lin(2, {(1, 0): 1.0, (0, 1): -p.tau0}), _lin(2, {(0, 1): 1.0}),
    ])
    fhat = q.scale(1.0 / p.kappa2) - g_shift
    return fhat, ghat


# ---------------------------------------------------------------------------
# the realizability driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealizeTarget:
    """Prescribed complement coefficients per degree."""

    max_degree: int
    coeffs: dict[int, dict[str, float]]

    def __post_init__(self):
        if not 2 <= self.max_degree:
            raise ValueError("target order must be >= 2")
        for j, table in self.coeffs.items():
            if not 2 <= j <= self.max_degree:
                raise ValueError(f"target degree {j} outside 2..{self.max_degree}")
            valid = set(w_labels(j))
            for lb in table:
                fam, jj, i = parse_label(lb)
                if jj != j or lb not in valid:
                    raise ValueError(
                        f"label {lb} is not a valid degree-{j} basis label"
                    )

    def degree_coeffs(self, j: int) -> dict[str, float]:
        return dict(self.coeffs.get(j, {}))

    def as_nfseries(self) -> NFSeries:
        return NFSeries(max_degree=self.max_degree,
                        coeffs={j: dict(t) for j, t in self.coeffs.items()})


def _fg_basis(j: int):
    """Unit coefficient directions of (F_j, G_j)."""
    out = []
    for which in ("F", "G"):
        for exps in enumerate_monomials(2, j):
            out.append((which, exps))
    return out


def order_contribution_matrix(j: int, p: OscillatorParams):
    """Matrix of the same-order map (F_j, G_j) -> complement coefficients.

    Columns follow ``_fg_basis(j)``; rows follow the labels of w_basis(j).
    """
    basis = w_basis(j)
    dirs = _fg_basis(j)
    T = np.zeros((len(basis.labels), len(dirs)))
    for col, (which, exps) in enumerate(dirs):
        unit = HomoPoly.monomial(2, exps)
        fg = FGSeries.build(
            F={j: unit} if which == "F" else {},
            G={j: unit} if which == "G" else {},
            max_degree=j,
        )
        term = project_nonlinearity(fg, p, j)
        sp = split(term)
        for row, lb in enumerate(basis.labels):
            T[row, col] = sp.w_part.get(lb, 0.0)
    return T, dirs, basis.labels


def realize(target: RealizeTarget, p: OscillatorParams,
            solve_tol: float = 1e-9) -> FGSeries:
    """Produce polynomial nonlinearities whose reduction is the target.

    Order by order: reduce the series built so far to read off the feedback
    Lambda_j, form Theta_j = w_j - Lambda_j, and solve the same-order linear
    map for (F_j, G_j) realizing Theta_j (minimum-norm representative).  The
    map is onto the complement space; a solve residual above tolerance
    raises LambdaResidualError.
    """
    order = target.max_degree
    F: dict[int, HomoPoly] = {}
    G: dict[int, HomoPoly] = {}
    for j in range(2, order + 1):
        if not F and not G:
            lam = {}
        else:
            fg_sofar = FGSeries.build(F=F, G=G, max_degree=order)
            nf_sofar, _ = reduce(fg_sofar, p, j)
            lam = nf_sofar.degree_coeffs(j)
        want = target.degree_coeffs(j)
        theta = {lb: want.get(lb, 0.0) - lam.get(lb, 0.0)
                 for lb in set(want) | set(lam)}
        T, dirs, labels = order_contribution_matrix(j, p)
        rhs = np.array([theta.get(lb, 0.0) for lb in labels])
        sol, _, _, _ = np.linalg.lstsq(T, rhs, rcond=None)
        for _ in range(2):
            r = rhs - T @ sol
            if not r.any():
                break
            sol = sol + np.linalg.lstsq(T, r, rcond=None)[0]
        residual = float(np.max(np.abs(T @ sol - rhs))) if rhs.size else 0.0
        if residual > solve_tol * max(1.0, float(np.max(np.abs(rhs)))):
            raise LambdaResidualError(
                f"order-{j} correction target unreachable: residual "
                f"{residual:.3e} exceeds {solve_tol:.1e}"
            )
        fj = np.zeros(monomial_count(2, j))
        gj = np.zeros(monomial_count(2, j))
        for val, (which, exps) in zip(sol, dirs):
            if which == "F":
                fj[mono_index(exps)] += val
            else:
                gj[mono_index(exps)] += val
        fpoly = HomoPoly(2, j, fj)
        gpoly = HomoPoly(2, j, gj)
        if not fpoly.is_zero():
            F[j] = fpoly
        if not gpoly.is_zero():
            G[j] = gpoly
    return FGSeries.build(F=F, G=G, max_degree=order)
