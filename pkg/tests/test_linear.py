import math

import numpy as np
import pytest

from trizero.errors import DegenerateCubicTerm, DomainError
from trizero.linear import (
    bilinear,
    char_derivative_at_zero,
    char_derivatives,
    char_eval,
    locus,
    m_matrices,
    phi_basis,
    psi_basis,
)
from trizero.poly import ThetaPoly, theta_derivative

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)


class TestLocus:
    def test_reference_point_1(self, ref1):
        assert ref1.tau0 == pytest.approx(SQRT2, abs=1e-10)
        assert ref1.b == pytest.approx(-SQRT2, abs=1e-10)
        assert ref1.alpha == 1.0
        assert ref1.kappa1 == pytest.approx(0.75, abs=1e-10)
        assert ref1.kappa2 == pytest.approx(3.0 / SQRT2, abs=1e-10)
        assert ref1.kappa2 == pytest.approx(2.1213203436, abs=1e-9)

    def test_reference_point_2(self, ref2):
        assert ref2.tau0 == pytest.approx((1 + SQRT5) / 2, abs=1e-10)
        assert ref2.b == pytest.approx(-SQRT5, abs=1e-10)
        assert ref2.kappa2 == pytest.approx(9.7082039325, abs=1e-9)

    def test_degenerate_cubic(self):
        # tau0 = 2 makes a*tau0 = 3 = 3*beta
        with pytest.raises(DegenerateCubicTerm):
            locus(1.5, 1.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            locus(-1.0, 0.0)
        with pytest.raises(DomainError):
            locus(0.0, 1.0)

    def test_random_sample_invariants(self):
        rng = np.random.default_rng(42)
        count = 0
        while count < 1000:
            a = float(rng.uniform(0.1, 10.0))
            beta = float(rng.uniform(-3.0, 3.0))
            try:
                p = locus(a, beta)
            except DegenerateCubicTerm:
                continue
            count += 1
            assert p.alpha == a
            assert abs(p.tau0 - (beta / a + math.sqrt(beta ** 2 + 2 * a) / a)) < 1e-12 * p.tau0
            assert abs(p.b - (beta - a * p.tau0)) < 1e-12 * max(1.0, abs(p.b))
            assert p.kappa2 != 0.0


class TestCharacteristic:
    def test_zero_root(self, ref1):
        assert char_eval(ref1, 0.0) == 0.0

    def test_imaginary_value(self, ref1):
        val = char_eval(ref1, 1j)
        expect = -math.cos(SQRT2) + 1j * (math.sin(SQRT2) - SQRT2)
        assert val == pytest.approx(expect, abs=1e-12)
        assert val.real == pytest.approx(-0.155944, abs=1e-6)
        assert val.imag == pytest.approx(-0.426448, abs=1e-6)

    def test_real_axis_value(self, ref1):
        val = char_eval(ref1, 10.0)
        expect = 101.0 - 10 * SQRT2 - math.exp(-10 * SQRT2)
        assert val == pytest.approx(expect, rel=1e-12)
        assert val.real == pytest.approx(86.8578, abs=1e-3)

    def test_conjugate_symmetry(self, both_refs):
        rng = np.random.default_rng(9)
        for p in both_refs:
            for _ in range(20):
                lam = complex(rng.uniform(-2, 2), rng.uniform(-5, 5))
                assert char_eval(p, np.conj(lam)) == pytest.approx(
                    np.conj(char_eval(p, lam)), rel=1e-12, abs=1e-12
                )

    def test_triple_zero_derivatives(self, both_refs):
        for p in both_refs:
            rep = char_derivatives(p)
            assert abs(rep.p0) < 1e-12
            assert abs(rep.p1) < 1e-12
            assert abs(rep.p2) < 1e-12
            assert rep.p3 == pytest.approx(
                p.tau0 ** 2 * (p.a * p.tau0 - 3 * p.beta), abs=1e-10
            )

    def test_p3_reference_value(self, ref1):
        assert char_derivatives(ref1).p3 == pytest.approx(2 * SQRT2, abs=1e-10)

    def test_kappa_identity(self, both_refs):
        for p in both_refs:
            rep = char_derivatives(p)
            assert p.kappa2 * rep.p3 == pytest.approx(6.0, abs=1e-10)

    def test_axis_margin(self, both_refs):
        for p in both_refs:
            assert char_derivatives(p).axis_margin > 1e-3

    def test_off_locus_detected(self, ref1):
        # perturbing alpha creates P(0) != 0; scanning is not the tool for
        # that, but the derivative values expose it
        from dataclasses import replace
        bad = replace(ref1, alpha=ref1.alpha + 0.1)
        assert abs(char_derivative_at_zero(bad, 0)) == pytest.approx(0.1, abs=1e-14)


class TestBases:
    def test_phi_columns(self):
        phi1, phi2, phi3 = phi_basis()
        assert np.allclose(phi1.coeffs, [[1.0, 0.0]])
        assert np.allclose(phi2.coeffs, [[0.0, 1.0], [1.0, 0.0]])
        assert np.allclose(phi3.coeffs, [[0.0, 0.0], [0.0, 1.0], [0.5, 0.0]])

    def test_phi_chain(self):
        # phi' = previous column (the transport chain of the center basis)
        phi = phi_basis()
        dcols = [theta_derivative(c) for c in phi]
        assert dcols[0].is_zero()
        assert (dcols[1] - phi[0]).max_abs() == 0.0
        assert (dcols[2] - phi[1]).max_abs() == 0.0

    def test_psi_chain(self, both_refs):
        # psi_i' = -psi_{i+1}, psi_3' = 0, coefficientwise
        for p in both_refs:
            basis = psi_basis(p)
            d = [theta_derivative(r) for r in basis.psi]
            assert (d[0] + basis.psi[1]).max_abs() < 1e-14
            assert (d[1] + basis.psi[2]).max_abs() < 1e-14
            assert d[2].is_zero()

    def test_normalization(self, both_refs):
        for p in both_refs:
            basis = psi_basis(p)
            gram = np.array([
                [bilinear(basis.psi[i], basis.phi[j], p) for j in range(3)]
                for i in range(3)
            ])
            assert np.max(np.abs(gram - np.eye(3))) < 1e-10

    def test_boundary_conditions(self, both_refs):
        # psi_i(0) M0 + psi_i(tau0) M1 = psi_{i+1}(0), the adjoint-domain
        # characterization that pins the rows inside the dual eigenspace
        poly = np.polynomial.polynomial
        for p in both_refs:
            M0, M1 = m_matrices(p)
            basis = psi_basis(p)
            rows0 = [r.coeffs[0] for r in basis.psi]
            rows_tau = [
                np.array([poly.polyval(p.tau0, r.component(0)),
                          poly.polyval(p.tau0, r.component(1))])
                for r in basis.psi
            ]
            for i in range(3):
                nxt = rows0[i + 1] if i < 2 else np.zeros(2)
                resid = rows0[i] @ M0 + rows_tau[i] @ M1 - nxt
                assert np.max(np.abs(resid)) < 1e-10

    def test_kappa_rows(self, both_refs):
        # entries 2 and 3 of the second column reproduce the projection
        # constants of the locus
        for p in both_refs:
            basis = psi_basis(p)
            assert basis.psi0[1, 1] == pytest.approx(p.kappa1, abs=1e-10)
            assert basis.psi0[2, 1] == pytest.approx(p.kappa2, abs=1e-10)

    def test_first_row_resolvent_coefficient(self, both_refs):
        # the top entry of the second column is pinned by the quartic and
        # quintic derivatives of the characteristic function:
        #   kappa0 = (3/8) P4^2 / P3^3 - (3/10) P5 / P3^2
        # (nonzero: all three rows of the projected equation carry the
        # scalar nonlinearity)
        for p in both_refs:
            basis = psi_basis(p)
            p3 = char_derivative_at_zero(p, 3)
            p4 = char_derivative_at_zero(p, 4)
            p5 = char_derivative_at_zero(p, 5)
            kappa0 = 0.375 * p4 ** 2 / p3 ** 3 - 0.3 * p5 / p3 ** 2
            assert basis.psi0[0, 1] == pytest.approx(kappa0, abs=1e-10)
            assert abs(kappa0) > 1e-2

    def test_ref1_psi0_values(self, ref1):
        # closed forms: 27/40, 3 sqrt2/80; 3 sqrt2/4, 3/4; -3, 3 sqrt2/2
        expected = np.array([
            [27.0 / 40.0, 3 * SQRT2 / 80.0],
            [3 * SQRT2 / 4.0, 0.75],
            [-3.0, 3 * SQRT2 / 2.0],
        ])
        assert np.max(np.abs(psi_basis(ref1).psi0 - expected)) < 1e-12


class TestBilinear:
    def test_constant_pairing(self, both_refs):
        psi = ThetaPoly.constant([1.0, 0.0])
        phi = ThetaPoly.constant([1.0, 0.0])
        for p in both_refs:
            assert bilinear(psi, phi, p) == pytest.approx(1.0, abs=1e-14)

    def test_zero_row(self, ref1):
        psi = ThetaPoly.zero()
        phi = ThetaPoly.constant([0.7, -0.3])
        assert bilinear(psi, phi, ref1) == 0.0

    def test_second_component_pairing_beta_zero(self, ref1):
        psi = ThetaPoly.constant([0.0, 1.0])
        phi = ThetaPoly.constant([0.0, 1.0])
        # the delayed atom weights the second row by beta = 0 here
        assert bilinear(psi, phi, ref1) == pytest.approx(1.0, abs=1e-14)

    def test_linearity(self, ref2):
        rng = np.random.default_rng(3)
        psi1 = ThetaPoly(rng.uniform(-1, 1, (3, 2)))
        psi2 = ThetaPoly(rng.uniform(-1, 1, (2, 2)))
        phi = ThetaPoly(rng.uniform(-1, 1, (3, 2)))
        lhs = bilinear(psi1 + psi2.scale(2.5), phi, ref2)
        rhs = bilinear(psi1, phi, ref2) + 2.5 * bilinear(psi2, phi, ref2)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
