import math

import numpy as np
import pytest

from trizero.errors import LemmaPreconditionError
from trizero.homological import w_labels
from trizero.poly import HomoPoly
from trizero.realize import (
    RealizeTarget,
    _magic_expand,
    construct_order,
    decompose,
    lemma_solve,
    realize,
)
from trizero.reduction import reduce

SQRT2 = math.sqrt(2.0)


def random_target(rng, order):
    coeffs = {
        j: {lb: float(rng.uniform(-1, 1)) for lb in w_labels(j)}
        for j in range(2, order + 1)
    }
    return RealizeTarget(max_degree=order, coeffs=coeffs)


class TestDecompose:
    def test_cross_term(self, ref1):
        ghat = HomoPoly.monomial(2, (1, 1))
        fhat = HomoPoly.zero(2, 2)
        dec = decompose(fhat, ghat, ref1)
        # (u1 + u3)(-sqrt2 u3) - 0 - (u3)(-sqrt2 u3) = -sqrt2 u1 u3
        assert dec.B_part.coeff((0, 0)) == pytest.approx(-SQRT2, abs=1e-12)
        assert dec.reconstruction_residual < 1e-13

    def test_pure_instantaneous(self, ref1):
        dec = decompose(HomoPoly.monomial(2, (2, 0)), HomoPoly.zero(2, 2), ref1)
        assert dec.A_j.coeff((2, 0)) == pytest.approx(1.0)
        assert dec.B_part.is_zero() and dec.C_part.is_zero() and dec.D_part.is_zero()

    def test_delayed_velocity_square(self, ref1):
        dec = decompose(HomoPoly.zero(2, 2), HomoPoly.monomial(2, (0, 2)), ref1)
        assert dec.A_j.coeff((0, 2)) == pytest.approx(1.0, abs=1e-13)
        assert dec.C_part.coeff((0, 0, 0)) == pytest.approx(-2 * SQRT2, abs=1e-12)
        assert dec.D_part.coeff((0,)) == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("j", range(2, 7))
    def test_reconstruction_random(self, j, both_refs):
        rng = np.random.default_rng(300 + j)
        for p in both_refs:
            for _ in range(10):
                fhat = HomoPoly(2, j, rng.uniform(-1, 1, j + 1))
                ghat = HomoPoly(2, j, rng.uniform(-1, 1, j + 1))
                dec = decompose(fhat, ghat, p)
                assert dec.reconstruction_residual < 1e-11


class TestLemma:
    def test_bilinear_cross(self, ref1):
        zeta = HomoPoly.monomial(2, (1, 1))
        xi = lemma_solve(zeta, ref1)
        assert xi.coeff((1, 1)) == pytest.approx(-1.0 / SQRT2, abs=1e-12)
        assert xi.coeff((2, 0)) == 0.0 and xi.coeff((0, 2)) == 0.0

    def test_cubic_hand_values(self, ref1):
        zeta = HomoPoly.from_dict(2, 3, {(2, 1): 1.0, (1, 2): 1.0})
        xi = lemma_solve(zeta, ref1)
        assert xi.coeff((2, 1)) == pytest.approx(-1.0 / SQRT2, abs=1e-12)
        assert xi.coeff((1, 2)) == pytest.approx(-0.5, abs=1e-12)

    def test_zero(self, ref1):
        assert lemma_solve(HomoPoly.zero(2, 4), ref1).is_zero()

    def test_precondition(self, ref1):
        with pytest.raises(LemmaPreconditionError):
            lemma_solve(HomoPoly.monomial(2, (3, 0)), ref1)
        with pytest.raises(LemmaPreconditionError):
            lemma_solve(HomoPoly.from_dict(2, 2, {(1, 1): 1.0, (0, 2): 0.5}), ref1)

    @pytest.mark.parametrize("j", range(2, 7))
    def test_roundtrip_random(self, j, both_refs):
        rng = np.random.default_rng(400 + j)
        for p in both_refs:
            for _ in range(100):
                terms = {(j - i, i): float(rng.uniform(-1, 1)) for i in range(1, j)}
                zeta = HomoPoly.from_dict(2, j, terms)
                xi = lemma_solve(zeta, p)
                back = _magic_expand(xi, p)
                assert (back - zeta).max_abs() < 1e-9
                assert xi.coeff((j, 0)) == 0.0 and xi.coeff((0, j)) == 0.0


class TestConstructOrder:
    def test_pure_q_target(self, ref1):
        fhat, ghat = construct_order({"A[2,0]": 1.0}, ref1)
        assert ghat.is_zero()
        assert fhat.coeff((2, 0)) == pytest.approx(SQRT2 / 3.0, abs=1e-10)
        assert sum(abs(c) for c in fhat.coeffs) == pytest.approx(SQRT2 / 3.0, abs=1e-10)

    def test_delay_target(self, ref1):
        fhat, ghat = construct_order({"B[2,0]": 1.0}, ref1)
        assert ghat.coeff((1, 1)) == pytest.approx(-1.0 / 3.0, abs=1e-10)
        assert fhat.coeff((1, 1)) == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert fhat.coeff((0, 2)) == pytest.approx(-SQRT2 / 3.0, abs=1e-10)

    def test_empty_target(self, ref1):
        fhat, ghat = construct_order({}, ref1, degree=3)
        assert fhat.is_zero() and ghat.is_zero()

    @pytest.mark.parametrize("j", range(2, 6))
    def test_postcondition(self, j, both_refs):
        # kappa2 A_j = q_j and kappa2 B_{j-2} = s_{j-2} through decompose
        rng = np.random.default_rng(500 + j)
        for p in both_refs:
            for _ in range(50):
                theta = {lb: float(rng.uniform(-1, 1)) for lb in w_labels(j)}
                fhat, ghat = construct_order(theta, p, degree=j)
                dec = decompose(fhat, ghat, p)
                for i in range(j + 1):
                    want = theta.get(f"A[{j},{i}]", 0.0)
                    got = p.kappa2 * dec.A_j.coeff((j - i, i))
                    assert abs(got - want) < 1e-10
                bmax = (j - 2) // 2 if j % 2 == 0 else (j - 1) // 2
                for i in range(bmax + 1):
                    want = theta.get(f"B[{j},{i}]", 0.0)
                    got = p.kappa2 * dec.B_part.coeff((j - 2 - i, i))
                    assert abs(got - want) < 1e-10


class TestRealizeTarget:
    def test_label_validation(self):
        with pytest.raises(ValueError):
            RealizeTarget(max_degree=2, coeffs={2: {"B[2,3]": 1.0}})
        with pytest.raises(ValueError):
            RealizeTarget(max_degree=2, coeffs={3: {"A[3,0]": 1.0}})
        RealizeTarget(max_degree=3, coeffs={3: {"B[3,1]": -0.25}})


class TestRealize:
    def test_zero_target(self, ref1):
        target = RealizeTarget(max_degree=3, coeffs={})
        fg = realize(target, ref1)
        assert not fg.F and not fg.G

    def test_single_label_roundtrip(self, ref1):
        target = RealizeTarget(max_degree=2, coeffs={2: {"A[2,0]": 1.0}})
        fg = realize(target, ref1)
        nf, _ = reduce(fg, ref1, 2)
        assert nf.max_coeff_diff(target.as_nfseries()) < 1e-10
        # the pair must counteract the row mixing, so it is richer than a
        # single monomial
        assert 2 in fg.F or 2 in fg.G

    def test_mixed_roundtrip_order3(self, ref1):
        target = RealizeTarget(
            max_degree=3,
            coeffs={2: {"A[2,0]": 1.0, "B[2,0]": 1.0}},
        )
        fg = realize(target, ref1)
        nf, _ = reduce(fg, ref1, 3)
        assert nf.max_coeff_diff(target.as_nfseries()) < 1e-8

    @pytest.mark.parametrize("order", (2, 3, 4))
    def test_random_roundtrips(self, order, both_refs):
        rng = np.random.default_rng(600 + order)
        for p in both_refs:
            for _ in range(3):
                target = random_target(rng, order)
                fg = realize(target, p)
                nf, _ = reduce(fg, p, order)
                assert nf.max_coeff_diff(target.as_nfseries()) < 1e-8

    def test_determinism(self, ref1):
        rng = np.random.default_rng(61)
        target = random_target(rng, 3)
        fg1 = realize(target, ref1)
        fg2 = realize(target, ref1)
        for j in fg1.F:
            assert np.array_equal(fg1.F[j].coeffs, fg2.F[j].coeffs)
        for j in fg1.G:
            assert np.array_equal(fg1.G[j].coeffs, fg2.G[j].coeffs)
