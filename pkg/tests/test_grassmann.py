import math
import random
from fractions import Fraction

import pytest

from hyperfermi.grassmann import (CapacityError, FIELD, berezin, derivative,
                                  exp_even, gmul, l1_norm, log_nilpotent,
                                  make_algebra, series_apply,
                                  symmetric_product)
from hyperfermi.rational import half_binomial, neg_half_binomial

from conftest import rand_element, rand_even_nilpotent


def z_of(ctx, site=0):
    s = symmetric_product(ctx, site, site)
    return series_apply([half_binomial(k) for k in range(ctx.m + 1)], s)


def inv_z_of(ctx, site=0):
    s = symmetric_product(ctx, site, site)
    return series_apply([neg_half_binomial(k) for k in range(ctx.m + 1)], s)


class TestAlgebraConstruction:
    def test_generator_counts(self):
        assert make_algebra(1, 1).num_generators == 2
        assert make_algebra(1, 0).num_generators == 0
        assert make_algebra(4, 2).num_generators == 16
        assert make_algebra(2, 2, with_sources=True).num_generators == 16

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            make_algebra(40, 2)
        make_algebra(40, 2, max_generators=256)

    def test_generator_order_documented(self):
        # (species, site, color, conjugate): unbarred precedes barred
        ctx = make_algebra(2, 2, with_sources=True)
        assert ctx.gen_index(FIELD, 0, 1, False) == 0
        assert ctx.gen_index(FIELD, 0, 1, True) == 1
        assert ctx.gen_index(FIELD, 0, 2, False) == 2
        assert ctx.gen_index(FIELD, 1, 1, False) == 4
        names = [ctx.gen_name(i) for i in range(4)]
        assert names == ["psi[0,1]", "psibar[0,1]", "psi[0,2]", "psibar[0,2]"]

    def test_mode_validation(self):
        ctx = make_algebra(1, 1, mode="exact")
        with pytest.raises(ValueError):
            ctx.scalar(0.5)
        fctx = make_algebra(1, 1, mode="float")
        assert fctx.scalar(0.5).scalar_part() == 0.5


class TestProduct:
    def test_single_transposition_sign(self):
        ctx = make_algebra(1, 1)
        prod = gmul(ctx.psibar(0, 1), ctx.psi(0, 1))
        canonical = gmul(ctx.psi(0, 1), ctx.psibar(0, 1))
        assert prod == -canonical

    def test_nilpotency(self):
        ctx = make_algebra(1, 1)
        assert gmul(ctx.psi(0, 1), ctx.psi(0, 1)).is_zero()

    def test_nilpotent_inverse_pair(self):
        ctx = make_algebra(1, 1)
        q = gmul(ctx.psibar(0, 1), ctx.psi(0, 1))
        assert (1 + q) * (1 - q) == ctx.one()

    def test_context_mismatch(self):
        a = make_algebra(1, 1)
        b = make_algebra(1, 1)
        with pytest.raises(ValueError):
            gmul(a.one(), b.one())

    def test_anticommutativity(self, rng):
        ctx = make_algebra(2, 2)
        for _ in range(10):
            i, j = rng.sample(range(ctx.num_generators), 2)
            gi = ctx._make({1 << i: Fraction(1)})
            gj = ctx._make({1 << j: Fraction(1)})
            assert gmul(gi, gj) == -gmul(gj, gi)

    def test_associativity_distributivity(self, rng):
        ctx = make_algebra(2, 2)
        for _ in range(12):
            a = rand_element(ctx, rng)
            b = rand_element(ctx, rng)
            c = rand_element(ctx, rng)
            assert (a * b) * c == a * (b * c)
            assert a * (b + c) == a * b + a * c

    def test_even_elements_commute(self, rng):
        ctx = make_algebra(2, 2)
        for _ in range(8):
            a = rand_even_nilpotent(ctx, rng)
            b = rand_element(ctx, rng)
            assert a * b == b * a


class TestNorm:
    def test_norm_of_one(self):
        assert l1_norm(make_algebra(1, 1).one()) == 1

    def test_submultiplicative(self, rng):
        ctx = make_algebra(2, 2)
        for _ in range(20):
            f = rand_element(ctx, rng)
            g = rand_element(ctx, rng)
            assert l1_norm(f * g) <= l1_norm(f) * l1_norm(g)

    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
    def test_z_squared_norm(self, m):
        ctx = make_algebra(1, m)
        z = z_of(ctx)
        assert l1_norm(z * z) == 1 + 2 * m

    def test_symmetric_product_norm_off_diagonal(self):
        for m in (1, 2, 3):
            ctx = make_algebra(2, m)
            assert l1_norm(symmetric_product(ctx, 0, 1)) == 2 * m

    def test_symmetric_product_diagonal_m1(self):
        ctx = make_algebra(1, 1)
        s = symmetric_product(ctx, 0, 0)
        assert s == gmul(ctx.psibar(0, 1), ctx.psi(0, 1)) * 2

    def test_psi_dot_psi_power_vanishes(self):
        for m in (1, 2, 3):
            ctx = make_algebra(1, m)
            s = symmetric_product(ctx, 0, 0)
            assert not (s ** m).is_zero()
            assert (s ** (m + 1)).is_zero()


class TestBerezin:
    def test_one_site_anchor(self):
        # integral of 1/z is 1 at m = 1; this pins the sign convention
        ctx = make_algebra(1, 1)
        ivz = ctx.one() - gmul(ctx.psibar(0, 1), ctx.psi(0, 1))
        assert berezin(ivz, [0]) == ctx.one()

    def test_integral_of_one_vanishes(self):
        ctx = make_algebra(2, 2)
        assert berezin(ctx.one(), [0]).is_zero()

    def test_positivity_for_all_m(self):
        # the one-site integral of 1/z stays positive up to m = 6
        for m in range(1, 7):
            ctx = make_algebra(1, m)
            val = berezin(inv_z_of(ctx), [0]).scalar_part()
            assert val > 0

    def test_bounded_by_norm(self, rng):
        ctx = make_algebra(2, 2)
        for _ in range(15):
            f = rand_element(ctx, rng, terms=6, max_degree=8)
            val = berezin(f, [0, 1]).scalar_part()
            assert abs(val) <= l1_norm(f)

    def test_site_order_independence(self, rng):
        ctx = make_algebra(3, 2)
        f = rand_element(ctx, rng, terms=8, max_degree=10)
        a = berezin(berezin(f, [0]), [2])
        b = berezin(berezin(f, [2]), [0])
        assert a == b == berezin(f, [0, 2])

    def test_derivative_rules(self):
        ctx = make_algebra(1, 2)
        i_psi = ctx.gen_index(FIELD, 0, 1, False)
        theta = ctx.psi(0, 1)
        eta = ctx.psibar(0, 2)
        omega = ctx.psibar(0, 1)
        assert derivative(gmul(theta, omega), i_psi) == omega
        assert derivative(omega, i_psi).is_zero()
        assert derivative(gmul(eta, gmul(theta, omega)), i_psi) == -gmul(eta, omega)


class TestSeries:
    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
    def test_z_square_and_inverse(self, m):
        ctx = make_algebra(1, m)
        s = symmetric_product(ctx, 0, 0)
        z = z_of(ctx)
        assert z * z == ctx.one() + s
        assert z * inv_z_of(ctx) == ctx.one()

    def test_z_m1_explicit(self):
        ctx = make_algebra(1, 1)
        assert z_of(ctx) == ctx.one() + gmul(ctx.psibar(0, 1), ctx.psi(0, 1))

    def test_rejects_odd_or_scalar(self):
        ctx = make_algebra(1, 1)
        with pytest.raises(ValueError):
            series_apply([Fraction(1)], ctx.psi(0, 1))
        with pytest.raises(ValueError):
            series_apply([Fraction(1)], ctx.one())


class TestExp:
    def test_exp_zero(self):
        ctx = make_algebra(1, 1)
        assert exp_even(ctx.zero()) == ctx.one()

    def test_exp_single_bilinear(self):
        ctx = make_algebra(1, 1)
        q = gmul(ctx.psibar(0, 1), ctx.psi(0, 1))
        assert exp_even(q) == ctx.one() + q

    def test_group_law(self, rng):
        ctx = make_algebra(2, 2)
        for _ in range(6):
            a = rand_even_nilpotent(ctx, rng)
            assert exp_even(a) * exp_even(-a) == ctx.one()

    def test_exact_mode_rejects_scalar(self):
        ctx = make_algebra(1, 1)
        with pytest.raises(ValueError):
            exp_even(ctx.one())

    def test_float_mode_allows_scalar(self):
        ctx = make_algebra(1, 1, mode="float")
        q = gmul(ctx.psibar(0, 1), ctx.psi(0, 1))
        e = exp_even(q + 1.0)
        assert e.scalar_part() == pytest.approx(math.e)

    def test_log_inverts_exp(self, rng):
        ctx = make_algebra(2, 2)
        a = rand_even_nilpotent(ctx, rng)
        assert log_nilpotent(exp_even(a) - 1) == a


class TestPrinting:
    def test_monomial_rendering(self):
        ctx = make_algebra(1, 1)
        q = gmul(ctx.psibar(0, 1), ctx.psi(0, 1))
        assert "psi[0,1] psibar[0,1]" in q.to_string()

    def test_zero_renders(self):
        assert make_algebra(1, 1).zero().to_string() == "0"


class TestFloatMode:
    def test_float_z_identity(self):
        ctx = make_algebra(1, 3, mode="float")
        s = symmetric_product(ctx, 0, 0)
        z = series_apply([float(half_binomial(k)) for k in range(4)], s)
        diff = z * z - (ctx.one() + s)
        assert l1_norm(diff) < 1e-12
