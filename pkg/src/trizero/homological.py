"""Homological operator of the nilpotent triple-zero block and its complement.

For the 3x3 Jordan block B, the operator L_B h = Dh(u) Bu - B h(u) acts on
the space H^j of homogeneous degree-j polynomial maps R^3 -> R^3.  Its range
admits the explicit complement W_j spanned by third-component monomial
vectors

    (0, 0, u1^(j-i) u2^i),        i = 0..j                       (A labels)
    (0, 0, u1^(j-1-i) u3^(i+1)),  i = 0..(j-2)/2  (j even)       (B labels)
                                  i = 0..(j-1)/2  (j odd)

so dim W_j = (3j+2)/2 for even j and (3j+3)/2 for odd j.  Normal-form terms
live in W_j; everything in the range of L_B is removable by a near-identity
change of variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SplitError
from .poly import (
    HomoPoly,
    VecPoly3,
    directional_derivative_Bu,
    enumerate_monomials,
    mono_index,
    monomial_count,
)

__all__ = [
    "WBasis",
    "SplitResult",
    "lb_apply",
    "lb_matrix",
    "t_matrix",
    "w_basis",
    "w_labels",
    "label_monomial",
    "parse_label",
    "split",
    "w_part_vector",
    "nf_third_component",
]


def lb_apply(h: VecPoly3) -> VecPoly3:
    """L_B h = (T h1 - h2, T h2 - h3, T h3), T = u2 d/du1 + u3 d/du2."""
    h1, h2, h3 = h.components
    return VecPoly3((
        directional_derivative_Bu(h1) - h2,
        directional_derivative_Bu(h2) - h3,
        directional_derivative_Bu(h3),
    ))


@lru_cache(maxsize=None)
def t_matrix(degree: int) -> np.ndarray:
    """Matrix of T = u2 d/du1 + u3 d/du2 on degree-``degree`` monomials."""
    ms = enumerate_monomials(3, degree)
    idx = {m: i for i, m in enumerate(ms)}
    A = np.zeros((len(ms), len(ms)))
    for j, (e1, e2, e3) in enumerate(ms):
        if e1 > 0:
            A[idx[(e1 - 1, e2 + 1, e3)], j] += e1
        if e2 > 0:
            A[idx[(e1, e2 - 1, e3 + 1)], j] += e2
    return A


@lru_cache(maxsize=None)
def lb_matrix(degree: int) -> np.ndarray:
    """Matrix of L_B on H^degree in the component-major stacked basis."""
    A = t_matrix(degree)
    m = A.shape[0]
    L = np.zeros((3 * m, 3 * m))
    L[0:m, 0:m] = A
    L[0:m, m:2 * m] = -np.eye(m)
    L[m:2 * m, m:2 * m] = A
    L[m:2 * m, 2 * m:3 * m] = -np.eye(m)
    L[2 * m:3 * m, 2 * m:3 * m] = A
    return L


_LABEL_RE = re.compile(r"^([AB])\[(\d+),(\d+)\]$")


def w_labels(degree: int) -> list[str]:
    """Ordered labels of the complement basis at the given degree."""
    labels = [f"A[{degree},{i}]" for i in range(degree + 1)]
    bmax = (degree - 2) // 2 if degree % 2 == 0 else (degree - 1) // 2
    labels += [f"B[{degree},{i}]" for i in range(bmax + 1)]
    return labels


def label_monomial(label: str) -> tuple[int, ...]:
    """Third-component exponent triple addressed by a complement label."""
    fam, j, i = parse_label(label)
    if fam == "A":
        return (j - i, i, 0)
    return (j - 1 - i, 0, i + 1)


def parse_label(label: str) -> tuple[str, int, int]:
    m = _LABEL_RE.match(label.strip())
    if m is None:
        raise ValueError(f"malformed basis label {label!r}")
    fam, j, i = m.group(1), int(m.group(2)), int(m.group(3))
    if fam == "A":
        if not 0 <= i <= j:
            raise ValueError(f"invalid basis label {label!r}: need 0 <= i <= {j}")
    else:
        bmax = (j - 2) // 2 if j % 2 == 0 else (j - 1) // 2
        if not 0 <= i <= bmax:
            raise ValueError(
                f"invalid basis label {label!r}: B family at degree {j} "
                f"allows i = 0..{bmax}"
            )
    return fam, j, i


@dataclass(frozen=True)
class WBasis:
    """Labeled basis of the complement W_j."""

    degree: int
    labels: tuple[str, ...]
    monomials: tuple[tuple[int, ...], ...]
    vectors: tuple[VecPoly3, ...]

    def __len__(self):
        return len(self.labels)


@lru_cache(maxsize=None)
def w_basis(degree: int) -> WBasis:
    if degree < 2:
        raise ValueError("complement basis defined for degree >= 2")
    labels = tuple(w_labels(degree))
    monos = tuple(label_monomial(lb) for lb in labels)
    zero = HomoPoly.zero(3, degree)
    vectors = tuple(
        VecPoly3((zero, zero, HomoPoly.monomial(3, m))) for m in monos
    )
    return WBasis(degree=degree, labels=labels, monomials=monos, vectors=vectors)


@lru_cache(maxsize=None)
def _w_matrix(degree: int) -> np.ndarray:
    basis = w_basis(degree)
    m = monomial_count(3, degree)
    W = np.zeros((3 * m, len(basis)))
    for k, mono in enumerate(basis.monomials):
        W[2 * m + mono_index(mono, degree), k] = 1.0
    return W


@dataclass(frozen=True)
class SplitResult:
    """Decomposition p = range_part + w_part with L_B(preimage) = range_part."""

    degree: int
    w_part: dict[str, float]
    range_part: VecPoly3
    preimage: VecPoly3
    residual: float

    def w_vector(self) -> VecPoly3:
        return w_part_vector(self.degree, self.w_part)


def w_part_vector(degree: int, coeffs: dict[str, float]) -> VecPoly3:
    """Assemble the W_j element with the given label coefficients."""
    basis = w_basis(degree)
    zero = HomoPoly.zero(3, degree)
    third = HomoPoly.from_dict(
        3, degree,
        {label_monomial(lb): c for lb, c in coeffs.items() if c != 0.0},
    )
    return VecPoly3((zero, zero, third))


def nf_third_component(degree: int, coeffs: dict[str, float]) -> HomoPoly:
    """Third-component polynomial carried by a set of label coefficients."""
    return HomoPoly.from_dict(
        3, degree, {label_monomial(lb): c for lb, c in coeffs.items()}
    )


def split(p: VecPoly3, tol: float = 1e-9) -> SplitResult:
    """Split p in H^j into its complement part and a removable part.

    Solves the joint system [L_B | W] (preimage, w) = p by minimum-norm least
    squares: the complement coefficients are unique because the sum is
    direct, and the minimum-norm solution fixes the preimage inside the
    kernel of L_B deterministically.
    """
    j = p.degree
    if j < 2:
        raise ValueError("split defined for degree >= 2")
    L = lb_matrix(j)
    W = _w_matrix(j)
    basis = w_basis(j)
    aug = np.hstack([L, W])
    target = p.to_stacked()
    sol, _, _, _ = np.linalg.lstsq(aug, target, rcond=None)
    # the system is consistent by the direct-sum property, so a couple of
    # refinement passes push the residual to the rounding floor of the data
    for _ in range(2):
        r = target - aug @ sol
        if not r.any():
            break
        sol = sol + np.linalg.lstsq(aug, r, rcond=None)[0]
    residual = float(np.max(np.abs(aug @ sol - target))) if target.size else 0.0
    scale = max(1.0, p.max_abs())
    if residual > tol * scale:
        raise SplitError(
            f"range/complement split residual {residual:.3e} exceeds "
            f"{tol:.1e} * {scale:.3e} at degree {j}"
        )
    n = L.shape[0]
    pre = VecPoly3.from_stacked(j, sol[:n])
    wc = {lb: float(c) for lb, c in zip(basis.labels, sol[n:])}
    range_part = VecPoly3.from_stacked(j, L @ sol[:n])
    return SplitResult(degree=j, w_part=wc, range_part=range_part,
                       preimage=pre, residual=residual)
