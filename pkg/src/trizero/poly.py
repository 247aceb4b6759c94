"""Homogeneous polynomial algebra in up to three variables.

Monomials are ordered graded-lexicographically with u1 > u2 > u3.  Within a
fixed degree this is plain lexicographic descent on the exponent tuples, e.g.
for degree 2 in three variables:

    u1^2, u1*u2, u1*u3, u2^2, u2*u3, u3^2      (indices 0..5)

Coefficients are double-precision reals.  All containers are immutable after
construction and every operation is a pure function, so values can be shared
freely across threads.

The module also provides ``ThetaPoly``: polynomials in the history variable
theta with coefficients in R^2, used for the basis columns/rows of the
center/adjoint spaces and for the infinite-dimensional component of the
center-manifold transformations.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import ArityError, DomainError, ThetaDegreeError, ParseError

__all__ = [
    "HomoPoly",
    "VecPoly3",
    "ThetaPoly",
    "enumerate_monomials",
    "mono_index",
    "monomial_count",
    "compose_linear",
    "directional_derivative_Bu",
    "theta_eval",
    "theta_derivative",
    "theta_integrate",
    "theta_shift",
    "format_poly",
    "parse_poly",
    "parse_poly_series",
    "format_poly_series",
    "series_add",
    "series_scale",
    "series_mul",
    "series_pow",
    "series_compose",
    "DEFAULT_THETA_CAP",
]

DEFAULT_THETA_CAP = 16

_VAR_NAMES = ("u1", "u2", "u3")


def monomial_count(nvars: int, degree: int) -> int:
    """Number of monomials of the given total degree in nvars variables."""
    return math.comb(degree + nvars - 1, nvars - 1)


@lru_cache(maxsize=None)
def enumerate_monomials(nvars: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples of the given degree, graded-lex order (u1 > u2 > u3)."""
    if nvars == 1:
        return ((degree,),)
    if nvars == 2:
        return tuple((e1, degree - e1) for e1 in range(degree, -1, -1))
    if nvars == 3:
        return tuple(
            (e1, e2, degree - e1 - e2)
            for e1 in range(degree, -1, -1)
            for e2 in range(degree - e1, -1, -1)
        )
    raise ArityError(f"nvars must be 1, 2 or 3, got {nvars}")


@lru_cache(maxsize=None)
def _index_table(nvars: int, degree: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(enumerate_monomials(nvars, degree))}


def mono_index(exponents: Sequence[int], degree: int | None = None) -> int:
    """Position of an exponent tuple in graded-lex order.

    Raises IndexError on negative exponents or when the exponent sum does not
    equal the stated degree.
    """
    exps = tuple(int(e) for e in exponents)
    if any(e < 0 for e in exps):
        raise IndexError(f"negative exponent in {exps}")
    total = sum(exps)
    if degree is not None and total != degree:
        raise IndexError(f"exponent sum {total} does not match degree {degree}")
    return _index_table(len(exps), total)[exps]


def _as_coeffs(nvars: int, degree: int, coeffs) -> np.ndarray:
    arr = np.asarray(coeffs, dtype=float)
    want = monomial_count(nvars, degree)
    if arr.shape != (want,):
        raise ValueError(
            f"coefficient vector has shape {arr.shape}, expected ({want},) "
            f"for degree {degree} in {nvars} variables"
        )
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class HomoPoly:
    """A homogeneous polynomial with dense graded-lex coefficients.

    ``degree`` is structural: the zero polynomial exists at every degree.
    """

    nvars: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.nvars not in (1, 2, 3):
            raise ArityError(f"nvars must be 1, 2 or 3, got {self.nvars}")
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        object.__setattr__(self, "coeffs", _as_coeffs(self.nvars, self.degree, self.coeffs))

    # ---- constructors -------------------------------------------------
    @staticmethod
    def zero(nvars: int, degree: int) -> "HomoPoly":
        return HomoPoly(nvars, degree, np.zeros(monomial_count(nvars, degree)))

    @staticmethod
    def monomial(nvars: int, exponents: Sequence[int], coeff: float = 1.0) -> "HomoPoly":
        exps = tuple(int(e) for e in exponents)
        if len(exps) != nvars:
            raise ArityError(f"{len(exps)} exponents for nvars={nvars}")
        degree = sum(exps)
        c = np.zeros(monomial_count(nvars, degree))
        c[mono_index(exps)] = coeff
        return HomoPoly(nvars, degree, c)

    @staticmethod
    def from_dict(nvars: int, degree: int, terms: Mapping[tuple[int, ...], float]) -> "HomoPoly":
        c = np.zeros(monomial_count(nvars, degree))
        for exps, val in terms.items():
            c[mono_index(exps, degree)] += val
        return HomoPoly(nvars, degree, c)

    # ---- basic queries -------------------------------------------------
    def monomials(self) -> tuple[tuple[int, ...], ...]:
        return enumerate_monomials(self.nvars, self.degree)

    def coeff(self, exponents: Sequence[int]) -> float:
        return float(self.coeffs[mono_index(exponents, self.degree)])

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def as_dict(self, tol: float = 0.0) -> dict[tuple[int, ...], float]:
        return {
            m: float(c)
            for m, c in zip(self.monomials(), self.coeffs)
            if abs(c) > tol
        }

    # ---- arithmetic ------------------------------------------------------
    def _check_compatible(self, other: "HomoPoly"):
        if self.nvars != other.nvars or self.degree != other.degree:
            raise ValueError(
                f"incompatible shapes: ({self.nvars},{self.degree}) vs "
                f"({other.nvars},{other.degree})"
            )

    def __add__(self, other: "HomoPoly") -> "HomoPoly":
        self._check_compatible(other)
        return HomoPoly(self.nvars, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "HomoPoly") -> "HomoPoly":
        self._check_compatible(other)
        return HomoPoly(self.nvars, self.degree, self.coeffs - other.coeffs)

    def __neg__(self) -> "HomoPoly":
        return HomoPoly(self.nvars, self.degree, -self.coeffs)

    def scale(self, c: float) -> "HomoPoly":
        return HomoPoly(self.nvars, self.degree, c * self.coeffs)

    def __mul__(self, other):
        if isinstance(other, HomoPoly):
            return poly_mul(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def eval(self, point: Sequence[float]) -> float:
        pt = np.asarray(point, dtype=float)
        if pt.shape != (self.nvars,):
            raise ArityError(f"point has shape {pt.shape}, expected ({self.nvars},)")
        exps = np.array(self.monomials())
        return float(np.sum(self.coeffs * np.prod(pt ** exps, axis=1)))

    def partial(self, var: int) -> "HomoPoly":
        """Partial derivative with respect to variable index ``var`` (0-based)."""
        if self.degree == 0:
            return HomoPoly.zero(self.nvars, 0)
        out = np.zeros(monomial_count(self.nvars, self.degree - 1))
        tgt = _index_table(self.nvars, self.degree - 1)
        for exps, c in zip(self.monomials(), self.coeffs):
            if c == 0.0 or exps[var] == 0:
                continue
            new = list(exps)
            new[var] -= 1
            out[tgt[tuple(new)]] += c * exps[var]
        return HomoPoly(self.nvars, self.degree - 1, out)

    def __str__(self):
        return format_poly(self)


@lru_cache(maxsize=None)
def _mul_table(nvars: int, d1: int, d2: int) -> np.ndarray:
    """Flat index map: product of monomial i (degree d1) and j (degree d2)."""
    ms1 = enumerate_monomials(nvars, d1)
    ms2 = enumerate_monomials(nvars, d2)
    tgt = _index_table(nvars, d1 + d2)
    table = np.empty((len(ms1), len(ms2)), dtype=np.intp)
    for i, a in enumerate(ms1):
        for j, b in enumerate(ms2):
            table[i, j] = tgt[tuple(x + y for x, y in zip(a, b))]
    return table


def poly_mul(a: HomoPoly, b: HomoPoly) -> HomoPoly:
    """Product of two homogeneous polynomials (degrees add)."""
    if a.nvars != b.nvars:
        raise ArityError(f"nvars mismatch: {a.nvars} vs {b.nvars}")
    table = _mul_table(a.nvars, a.degree, b.degree)
    out = np.zeros(monomial_count(a.nvars, a.degree + b.degree))
    np.add.at(out, table.ravel(), np.outer(a.coeffs, b.coeffs).ravel())
    return HomoPoly(a.nvars, a.degree + b.degree, out)


def compose_linear(p: HomoPoly, subst: Sequence[HomoPoly]) -> HomoPoly:
    """Substitute a degree-1 polynomial for each variable of ``p``.

    All substitution entries must share a common variable count; the result
    has that variable count and the degree of ``p``.
    """
    if len(subst) != p.nvars:
        raise ArityError(f"{len(subst)} substitutions for {p.nvars} variables")
    tvars = subst[0].nvars
    for s in subst:
        if s.nvars != tvars:
            raise ArityError("substitution entries disagree on variable count")
        if s.degree != 1:
            raise ArityError("substitution entries must have degree 1")
    # cache powers of each substitution entry up to the needed exponent
    powers: list[list[HomoPoly]] = []
    for i, s in enumerate(subst):
        need = max((m[i] for m in p.monomials()), default=0)
        col = [HomoPoly(tvars, 0, np.ones(1))]
        for _ in range(need):
            col.append(poly_mul(col[-1], s))
        powers.append(col)
    out = HomoPoly.zero(tvars, p.degree)
    for exps, c in zip(p.monomials(), p.coeffs):
        if c == 0.0:
            continue
        term = HomoPoly(tvars, 0, np.array([c]))
        for i, e in enumerate(exps):
            if e:
                term = poly_mul(term, powers[i][e])
        out = out + term
    return out


def directional_derivative_Bu(p: HomoPoly) -> HomoPoly:
    """u2*dp/du1 + u3*dp/du2 for a polynomial in three variables.

    This is the scalar transport term of the homological operator for the
    3x3 nilpotent Jordan block; it preserves the degree.
    """
    if p.nvars != 3:
        raise ArityError("directional_derivative_Bu needs a 3-variable polynomial")
    out = np.zeros_like(np.asarray(p.coeffs))
    tgt = _index_table(3, p.degree)
    for exps, c in zip(p.monomials(), p.coeffs):
        if c == 0.0:
            continue
        e1, e2, e3 = exps
        if e1 > 0:
            out[tgt[(e1 - 1, e2 + 1, e3)]] += c * e1
        if e2 > 0:
            out[tgt[(e1, e2 - 1, e3 + 1)]] += c * e2
    return HomoPoly(3, p.degree, out)


@dataclass(frozen=True)
class VecPoly3:
    """An element of H^j: three homogeneous polynomials in three variables."""

    components: tuple[HomoPoly, HomoPoly, HomoPoly]

    def __post_init__(self):
        c = self.components
        if len(c) != 3:
            raise ArityError("VecPoly3 needs exactly three components")
        if any(p.nvars != 3 for p in c):
            raise ArityError("VecPoly3 components must be 3-variable polynomials")
        if len({p.degree for p in c}) != 1:
            raise ValueError("VecPoly3 components must share one degree")
        object.__setattr__(self, "components", tuple(c))

    @property
    def degree(self) -> int:
        return self.components[0].degree

    @staticmethod
    def zero(degree: int) -> "VecPoly3":
        z = HomoPoly.zero(3, degree)
        return VecPoly3((z, z, z))

    def __add__(self, other: "VecPoly3") -> "VecPoly3":
        return VecPoly3(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VecPoly3") -> "VecPoly3":
        return VecPoly3(tuple(a - b for a, b in zip(self.components, other.components)))

    def scale(self, c: float) -> "VecPoly3":
        return VecPoly3(tuple(p.scale(c) for p in self.components))

    def max_abs(self) -> float:
        return max(p.max_abs() for p in self.components)

    def to_stacked(self) -> np.ndarray:
        """Component-major coefficient vector of length 3 * monomial_count."""
        return np.concatenate([p.coeffs for p in self.components])

    @staticmethod
    def from_stacked(degree: int, vec: np.ndarray) -> "VecPoly3":
        m = monomial_count(3, degree)
        if vec.shape != (3 * m,):
            raise ValueError(f"stacked vector has shape {vec.shape}, expected ({3*m},)")
        return VecPoly3(tuple(HomoPoly(3, degree, vec[i * m:(i + 1) * m]) for i in range(3)))

    def eval(self, point: Sequence[float]) -> np.ndarray:
        return np.array([p.eval(point) for p in self.components])


# ---------------------------------------------------------------------------
# polynomials in the history variable theta with coefficients in R^2
# ---------------------------------------------------------------------------

def _trim_rows(arr: np.ndarray) -> np.ndarray:
    """Drop trailing exactly-zero coefficient rows; keep at least one."""
    n = arr.shape[0]
    while n > 1 and not arr[n - 1].any():
        n -= 1
    return arr[:n]


@dataclass(frozen=True)
class ThetaPoly:
    """p(theta) = sum_k coeffs[k] * theta^k with coeffs[k] in R^2."""

    coeffs: np.ndarray  # shape (degree+1, 2)

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise ValueError(f"ThetaPoly coefficients must be (k, 2), got {arr.shape}")
        arr = _trim_rows(arr).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @staticmethod
    def zero() -> "ThetaPoly":
        return ThetaPoly(np.zeros((1, 2)))

    @staticmethod
    def constant(value: Sequence[float]) -> "ThetaPoly":
        return ThetaPoly(np.asarray(value, dtype=float).reshape(1, 2))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __add__(self, other: "ThetaPoly") -> "ThetaPoly":
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        out = np.zeros((n, 2))
        out[: self.coeffs.shape[0]] += self.coeffs
        out[: other.coeffs.shape[0]] += other.coeffs
        return ThetaPoly(out)

    def __sub__(self, other: "ThetaPoly") -> "ThetaPoly":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "ThetaPoly":
        return ThetaPoly(c * self.coeffs)

    def component(self, i: int) -> np.ndarray:
        """1-D ascending coefficient array of component i."""
        return np.array(self.coeffs[:, i])

    def check_cap(self, cap: int = DEFAULT_THETA_CAP) -> "ThetaPoly":
        if self.degree > cap:
            raise ThetaDegreeError(
                f"theta-polynomial degree {self.degree} exceeds cap {cap}"
            )
        return self


def theta_eval(p: ThetaPoly, theta: float, domain: tuple[float, float] | None = None) -> np.ndarray:
    """Evaluate p(theta).  Exact at theta = 0 (returns the constant row).

    When ``domain`` is supplied the point must lie inside it (small slack for
    rounding); outside points raise DomainError.
    """
    if domain is not None:
        lo, hi = domain
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if not (lo - slack <= theta <= hi + slack):
            raise DomainError(f"theta = {theta} outside [{lo}, {hi}]")
    if theta == 0.0:
        return np.array(p.coeffs[0])
    # Horner scheme per component
    out = np.zeros(2)
    for row in p.coeffs[::-1]:
        out = out * theta + row
    return out


def theta_derivative(p: ThetaPoly) -> ThetaPoly:
    if p.degree == 0:
        return ThetaPoly.zero()
    k = np.arange(1, p.degree + 1).reshape(-1, 1)
    return ThetaPoly(p.coeffs[1:] * k)


def theta_integrate(p: ThetaPoly, cap: int | None = None) -> ThetaPoly:
    """Antiderivative with zero constant term."""
    if cap is not None and p.degree + 1 > cap:
        raise ThetaDegreeError(
            f"antiderivative degree {p.degree + 1} exceeds cap {cap}"
        )
    out = np.zeros((p.coeffs.shape[0] + 1, 2))
    k = np.arange(1, p.coeffs.shape[0] + 1).reshape(-1, 1)
    out[1:] = p.coeffs / k
    return ThetaPoly(out)


def theta_shift(p: ThetaPoly, c: float) -> ThetaPoly:
    """Return q with q(theta) = p(theta + c), by binomial re-expansion."""
    n = p.coeffs.shape[0]
    out = np.zeros_like(np.asarray(p.coeffs))
    for k in range(n):
        for m in range(k + 1):
            out[m] += p.coeffs[k] * math.comb(k, m) * c ** (k - m)
    return ThetaPoly(out)


# ---------------------------------------------------------------------------
# graded series helpers: a series is a dict {degree: HomoPoly}, zero terms
# omitted, all entries sharing one nvars
# ---------------------------------------------------------------------------

Series = dict


def series_add(a: Series, b: Series) -> Series:
    out = dict(a)
    for d, p in b.items():
        out[d] = out[d] + p if d in out else p
    return out


def series_scale(a: Series, c: float) -> Series:
    return {d: p.scale(c) for d, p in a.items()}


def series_mul(a: Series, b: Series, trunc: int) -> Series:
    out: Series = {}
    for d1, p in a.items():
        for d2, q in b.items():
            d = d1 + d2
            if d > trunc:
                continue
            term = poly_mul(p, q)
            out[d] = out[d] + term if d in out else term
    return out


def series_pow(a: Series, k: int, trunc: int, nvars: int) -> Series:
    out: Series = {0: HomoPoly(nvars, 0, np.ones(1))}
    for _ in range(k):
        out = series_mul(out, a, trunc)
    return out


def series_compose(p: HomoPoly, args: Sequence[Series], trunc: int, nvars: int) -> Series:
    """Substitute a graded series for every variable of ``p`` and truncate.

    Each argument series must only contain degrees >= 1.
    """
    if len(args) != p.nvars:
        raise ArityError(f"{len(args)} argument series for {p.nvars} variables")
    powers: list[list[Series]] = []
    for i, s in enumerate(args):
        need = max((m[i] for m in p.monomials()), default=0)
        col: list[Series] = [{0: HomoPoly(nvars, 0, np.ones(1))}]
        for _ in range(need):
            col.append(series_mul(col[-1], s, trunc))
        powers.append(col)
    out: Series = {}
    for exps, c in zip(p.monomials(), p.coeffs):
        if c == 0.0:
            continue
        term: Series = {0: HomoPoly(nvars, 0, np.array([c]))}
        for i, e in enumerate(exps):
            if e:
                term = series_mul(term, powers[i][e], trunc)
        out = series_add(out, term)
    return {d: q for d, q in out.items() if d > 0 or not q.is_zero()}


# ---------------------------------------------------------------------------
# text format:   1.0*u1^2 - 0.5*u1*u3
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<coeff>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"(?P<mono>(?:\s*\*\s*u[123](?:\^\d+)?)*)\s*$"
)
_FACTOR_RE = re.compile(r"u([123])(?:\^(\d+))?")


def _format_monomial(exps: Sequence[int]) -> str:
    parts = []
    for name, e in zip(_VAR_NAMES, exps):
        if e == 0:
            continue
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: HomoPoly, sig: int = 12) -> str:
    """Render in the signed-term text format; '0' for the zero polynomial."""
    parts = []
    for exps, c in zip(p.monomials(), p.coeffs):
        if c == 0.0:
            continue
        mono = _format_monomial(exps)
        mag = f"{abs(c):.{sig}g}"
        body = mag if not mono else f"{mag}*{mono}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts) if parts else "0"


def format_poly_series(series: Mapping[int, HomoPoly], sig: int = 12) -> str:
    degrees = sorted(d for d, p in series.items() if not p.is_zero())
    if not degrees:
        return "0"
    chunks = []
    for d in degrees:
        text = format_poly(series[d], sig)
        if chunks and not text.startswith("-"):
            chunks.append(f"+ {text}")
        elif chunks:
            chunks.append(f"- {text[1:].strip()}")
        else:
            chunks.append(text)
    return " ".join(chunks)


def _split_terms(text: str) -> list[str]:
    """Split on top-level '+'/'-' that separate terms (not exponents' signs)."""
    terms = []
    current = ""
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "+-" and current.strip() and current.rstrip()[-1:].lower() not in ("e",):
            terms.append(current)
            current = ch
        else:
            current += ch
        i += 1
    if current.strip():
        terms.append(current)
    return terms


def _parse_terms(text: str) -> dict[tuple[int, ...], float]:
    """Parse into {3-exponent tuple: coefficient}; variables u1,u2,u3."""
    text = text.strip()
    if text in ("", "0"):
        return {}
    acc: dict[tuple[int, ...], float] = {}
    for raw in _split_terms(text):
        term = raw.strip()
        if not term:
            continue
        m = _TERM_RE.match(term)
        if m is None:
            # allow a bare monomial with implicit coefficient 1
            sign = 1.0
            body = term
            if body.startswith(("+", "-")):
                sign = -1.0 if body[0] == "-" else 1.0
                body = body[1:].strip()
            facs = body.split("*")
            exps = [0, 0, 0]
            ok = bool(facs)
            for f in facs:
                fm = _FACTOR_RE.fullmatch(f.strip())
                if fm is None:
                    ok = False
                    break
                exps[int(fm.group(1)) - 1] += int(fm.group(2) or 1)
            if not ok:
                raise ParseError(f"cannot parse polynomial term {term!r}")
            key = tuple(exps)
            acc[key] = acc.get(key, 0.0) + sign
            continue
        coeff = float(m.group("coeff"))
        if m.group("sign") == "-":
            coeff = -coeff
        exps = [0, 0, 0]
        for fm in _FACTOR_RE.finditer(m.group("mono")):
            exps[int(fm.group(1)) - 1] += int(fm.group(2) or 1)
        key = tuple(exps)
        acc[key] = acc.get(key, 0.0) + coeff
    return acc


def _shrink_exps(exps: tuple[int, ...], nvars: int) -> tuple[int, ...]:
    if any(e != 0 for e in exps[nvars:]):
        raise ParseError(
            f"term uses variable beyond u{nvars} but nvars={nvars}"
        )
    return exps[:nvars]


def parse_poly(text: str, nvars: int, degree: int | None = None) -> HomoPoly:
    """Parse a homogeneous polynomial from the text format."""
    terms = _parse_terms(text)
    shrunk = {_shrink_exps(e, nvars): c for e, c in terms.items()}
    degrees = {sum(e) for e in shrunk}
    if not degrees:
        if degree is None:
            raise ParseError("cannot infer degree of the zero polynomial")
        return HomoPoly.zero(nvars, degree)
    if len(degrees) > 1:
        raise ParseError(f"polynomial is not homogeneous: degrees {sorted(degrees)}")
    d = degrees.pop()
    if degree is not None and d != degree:
        raise ParseError(f"polynomial has degree {d}, expected {degree}")
    return HomoPoly.from_dict(nvars, d, shrunk)


def parse_poly_series(text: str, nvars: int) -> dict[int, HomoPoly]:
    """Parse a polynomial with mixed degrees into homogeneous parts."""
    terms = _parse_terms(text)
    by_degree: dict[int, dict[tuple[int, ...], float]] = {}
    for exps, c in terms.items():
        e = _shrink_exps(exps, nvars)
        by_degree.setdefault(sum(e), {})[e] = by_degree.get(sum(e), {}).get(e, 0.0) + c
    return {d: HomoPoly.from_dict(nvars, d, t) for d, t in sorted(by_degree.items())}
