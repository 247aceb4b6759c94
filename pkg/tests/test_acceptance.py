"""Acceptance suite: one test per criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.

Criterion 3 asserts that the first entry of the second adjoint column
vanishes.  The dual basis forced by the pairing has a nonzero entry there
(the resolvent coefficient kappa0, cross-checked symbolically and
dynamically), so that criterion fails and is expected to fail; the
analysis lives in the decisions ledger.  Everything it can legitimately
check (the kappa1/kappa2 entries and the normalization residual) also
passes separately as criterion 3b.
"""

import math
import time

import numpy as np
import pytest

from trizero.errors import DegenerateCubicTerm
from trizero.homological import lb_matrix, split, w_basis, w_labels
from trizero.linear import (
    bilinear,
    char_derivative_at_zero,
    locus,
    psi_basis,
)
from trizero.poly import HomoPoly
from trizero.realize import RealizeTarget, _magic_expand, construct_order, decompose, lemma_solve, realize
from trizero.reduction import FGSeries, project_nonlinearity, reduce
from trizero.simulate import compare_flows, spectral_oracle

SQRT2 = math.sqrt(2.0)
REFS = ((1.0, 0.0), (2.0, 1.0))


def report(number, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {number:>2} ({name}): {status}  {detail}")
    return ok


@pytest.fixture(scope="module")
def locus_sample():
    rng = np.random.default_rng(20240817)
    pts = []
    t0 = time.perf_counter()
    while len(pts) < 1000:
        a = float(rng.uniform(0.1, 10.0))
        beta = float(rng.uniform(-3.0, 3.0))
        try:
            pts.append(locus(a, beta))
        except DegenerateCubicTerm:
            continue
    return pts, time.perf_counter() - t0


def test_criterion_01_locus_correctness(locus_sample):
    pts, build_time = locus_sample
    t0 = time.perf_counter()
    worst_low = 0.0
    worst_p3 = 0.0
    for p in pts:
        worst_low = max(worst_low, *(abs(char_derivative_at_zero(p, k))
                                     for k in range(3)))
        p3 = char_derivative_at_zero(p, 3)
        worst_p3 = max(worst_p3, abs(p3 - p.tau0 ** 2 * (p.a * p.tau0 - 3 * p.beta)))
    elapsed = time.perf_counter() - t0 + build_time
    ok = worst_low < 1e-12 and worst_p3 < 1e-10 and elapsed < 1.0
    assert report(1, "locus correctness",
                  ok, f"|P..P''|max = {worst_low:.2e}, P''' defect = {worst_p3:.2e}, "
                      f"runtime = {elapsed:.3f} s")


def test_criterion_02_kappa_identity(locus_sample):
    pts, _ = locus_sample
    worst = max(abs(p.kappa2 * char_derivative_at_zero(p, 3) - 6.0) for p in pts)
    assert report(2, "kappa identity", worst < 1e-9, f"max defect = {worst:.2e}")


def test_criterion_03_adjoint_consistency():
    # as stated: the second column of Psi(0) equals (0, kappa1, kappa2).
    # The pairing-normalized dual basis carries a nonzero first entry
    # (kappa0 = 3 P4^2 / (8 P3^3) - 3 P5 / (10 P3^2)), so this cannot hold;
    # see the decisions ledger for the full analysis.
    worst_col = 0.0
    worst_norm = 0.0
    for a, beta in REFS:
        p = locus(a, beta)
        basis = psi_basis(p)
        expect = np.array([0.0, p.kappa1, p.kappa2])
        worst_col = max(worst_col, float(np.max(np.abs(basis.psi0[:, 1] - expect))))
        gram = np.array([
            [bilinear(basis.psi[i], basis.phi[j], p) for j in range(3)]
            for i in range(3)
        ])
        worst_norm = max(worst_norm, float(np.max(np.abs(gram - np.eye(3)))))
    ok = worst_col < 1e-10 and worst_norm < 1e-10
    assert report(3, "adjoint column equals (0, kappa1, kappa2)", ok,
                  f"column defect = {worst_col:.2e} (first entry is kappa0 != 0), "
                  f"normalization = {worst_norm:.2e}")


def test_criterion_03b_adjoint_attainable_part():
    # the substance the criterion can check: rows two and three meet the
    # displayed constants and the pairing is normalized
    worst = 0.0
    for a, beta in REFS:
        p = locus(a, beta)
        basis = psi_basis(p)
        worst = max(worst,
                    abs(basis.psi0[1, 1] - p.kappa1),
                    abs(basis.psi0[2, 1] - p.kappa2),
                    basis.norm_residual)
    assert report("3b", "kappa1/kappa2 rows + normalization", worst < 1e-10,
                  f"max defect = {worst:.2e}")


def test_criterion_04_w_dimensions():
    ok = True
    for j in range(2, 9):
        want = (3 * j + 2) // 2 if j % 2 == 0 else (3 * j + 3) // 2
        count = len(w_basis(j))
        sv = np.linalg.svd(lb_matrix(j), compute_uv=False)
        rank = int(np.sum(sv > 1e-9 * sv[0]))
        ok = ok and count == want and rank + count == 3 * (j + 1) * (j + 2) // 2
    assert report(4, "complement dimensions", ok)


def test_criterion_05_lemma():
    p = locus(1.0, 0.0)
    xi = lemma_solve(HomoPoly.monomial(2, (1, 1)), p)
    hand1 = abs(xi.coeff((1, 1)) + 1.0 / SQRT2)
    xi = lemma_solve(HomoPoly.from_dict(2, 3, {(2, 1): 1.0, (1, 2): 1.0}), p)
    hand2 = max(abs(xi.coeff((2, 1)) + 1.0 / SQRT2),
                abs(xi.coeff((1, 2)) - (1 - 2.0) / 2.0))
    rng = np.random.default_rng(55)
    worst = 0.0
    for a, beta in REFS:
        pp = locus(a, beta)
        for j in range(2, 7):
            for _ in range(100):
                zeta = HomoPoly.from_dict(
                    2, j, {(j - i, i): float(rng.uniform(-1, 1))
                           for i in range(1, j)})
                back = _magic_expand(lemma_solve(zeta, pp), pp)
                worst = max(worst, (back - zeta).max_abs())
    ok = hand1 < 1e-12 and hand2 < 1e-12 and worst < 1e-9
    assert report(5, "triangular lemma", ok,
                  f"hand values = {max(hand1, hand2):.2e}, "
                  f"reconstruction = {worst:.2e}")


def test_criterion_06_construction_identity():
    rng = np.random.default_rng(66)
    worst = 0.0
    for a, beta in REFS:
        p = locus(a, beta)
        for j in range(2, 6):
            labels = w_labels(j)
            for _ in range(50):
                theta = {lb: float(rng.uniform(-1, 1)) for lb in labels}
                fhat, ghat = construct_order(theta, p, degree=j)
                dec = decompose(fhat, ghat, p)
                for i in range(j + 1):
                    worst = max(worst, abs(
                        p.kappa2 * dec.A_j.coeff((j - i, i))
                        - theta.get(f"A[{j},{i}]", 0.0)))
                bmax = (j - 2) // 2 if j % 2 == 0 else (j - 1) // 2
                for i in range(bmax + 1):
                    worst = max(worst, abs(
                        p.kappa2 * dec.B_part.coeff((j - 2 - i, i))
                        - theta.get(f"B[{j},{i}]", 0.0)))
    assert report(6, "construction identity", worst < 1e-10,
                  f"max defect = {worst:.2e}")


def test_criterion_07_theorem_roundtrip():
    rng = np.random.default_rng(77)
    t0 = time.perf_counter()
    worst = 0.0
    for a, beta in REFS:
        p = locus(a, beta)
        for order in (2, 3, 4):
            for _ in range(20):
                coeffs = {
                    j: {lb: float(rng.uniform(-1, 1)) for lb in w_labels(j)}
                    for j in range(2, order + 1)
                }
                target = RealizeTarget(max_degree=order, coeffs=coeffs)
                fg = realize(target, p)
                nf, _ = reduce(fg, p, order)
                worst = max(worst, nf.max_coeff_diff(target.as_nfseries()))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 60.0
    assert report(7, "theorem roundtrip", ok,
                  f"max coefficient diff = {worst:.2e}, runtime = {elapsed:.1f} s")


def test_criterion_08_lambda2_zero():
    rng = np.random.default_rng(88)
    worst = 0.0
    for a, beta in REFS:
        p = locus(a, beta)
        for _ in range(25):
            fg = FGSeries.build(
                F={2: HomoPoly(2, 2, rng.uniform(-1, 1, 3))},
                G={2: HomoPoly(2, 2, rng.uniform(-1, 1, 3))},
            )
            nf, _ = reduce(fg, p, 2)
            direct = split(project_nonlinearity(fg, p, 2)).w_part
            for lb in set(nf.coeffs[2]) | set(direct):
                worst = max(worst, abs(nf.coeffs[2].get(lb, 0.0)
                                       - direct.get(lb, 0.0)))
    assert report(8, "order-2 reduction matches direct projection",
                  worst < 1e-12, f"max diff = {worst:.2e}")


def test_criterion_09_spectral_oracle():
    ok = True
    details = []
    for a, beta in REFS:
        p = locus(a, beta)
        orc = spectral_oracle(p, 24, dps=30)
        cmax = float(np.max(np.abs(orc.center_eigs)))
        ok = ok and cmax < 1e-5 and orc.gap > 0.1 and orc.nilpotent_residual < 1e-6
        details.append(f"({a},{beta}): |c| = {cmax:.1e}, gap = {orc.gap:.2f}, "
                       f"nilp = {orc.nilpotent_residual:.1e}")
    assert report(9, "spectral oracle", ok, "; ".join(details))


def test_criterion_10_flow_agreement():
    t0 = time.perf_counter()
    p = locus(1.0, 0.0)
    target = RealizeTarget(max_degree=2, coeffs={2: {"A[2,0]": 1.0}})
    fg = realize(target, p)
    nf, _ = reduce(fg, p, 2)
    e1 = compare_flows(p, fg, nf, 0.02).e_max
    e2 = compare_flows(p, fg, nf, 0.01).e_max
    elapsed = time.perf_counter() - t0
    ratio = e1 / e2
    ok = ratio >= 5.6 and elapsed < 30.0
    assert report(10, "asymptotic flow agreement", ok,
                  f"e(0.02)/e(0.01) = {ratio:.2f}, runtime = {elapsed:.1f} s")
