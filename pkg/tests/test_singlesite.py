"""Coefficient families and one-site quantities against independent oracles.

The oracle builds the power series of sqrt(1+x), its inverse, and the
P_l / Q_l families by direct series arithmetic (coefficient recursions and
convolutions), never through the closed-form binomial expressions under
test.
"""

import math
from fractions import Fraction

import pytest

from hyperfermi.grassmann import berezin, l1_norm, make_algebra, symmetric_product
from hyperfermi.singlesite import (SingleSiteParams, coeff_a, coeff_b,
                                   e_squared_lower_bound,
                                   eps_expansion_elements, norm_psi_pow,
                                   one_point_norm_ratios, ratio_R,
                                   ratio_R_binomial_form, single_site_Z,
                                   single_site_Z_engine)
from hyperfermi.rational import half_binomial

ORDER = 13


def series_mul(a, b, order=ORDER):
    out = [Fraction(0)] * order
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(order - i):
            out[i + j] += ai * b[j]
    return out


def sqrt_series(order=ORDER):
    """Coefficients of sqrt(1+x) from s*s = 1+x, solved term by term."""
    s = [Fraction(0)] * order
    s[0] = Fraction(1)
    for k in range(1, order):
        conv = sum(s[i] * s[k - i] for i in range(1, k))
        target = Fraction(1) if k == 1 else Fraction(0)
        s[k] = (target - conv) / (2 * s[0])
    return s


def series_inverse(a, order=ORDER):
    out = [Fraction(0)] * order
    out[0] = 1 / a[0]
    for k in range(1, order):
        out[k] = -sum(a[i] * out[k - i] for i in range(1, k + 1)) / a[0]
    return out


def oracle_families(order=ORDER):
    """(a_k(l), b_k(l)) tables derived purely from series arithmetic."""
    s = sqrt_series(order)
    inv_s = series_inverse(s, order)
    one_minus_s = [Fraction(1) - s[0]] + [-c for c in s[1:]]
    a_table, b_table = {}, {}
    q = [Fraction(1)] + [Fraction(0)] * (order - 1)  # (1-s)^0
    for l in range(order):
        p = series_mul(q, inv_s, order)
        for k in range(order):
            a_table[(k, l)] = p[k]
            b_table[(k, l)] = q[k]
        q = series_mul(q, one_minus_s, order)
    return a_table, b_table


A_ORACLE, B_ORACLE = oracle_families()


class TestCoefficients:
    def test_against_series_oracle(self):
        for l in range(ORDER):
            for k in range(ORDER):
                assert coeff_a(k, l) == A_ORACLE[(k, l)], (k, l)
                assert coeff_b(k, l) == B_ORACLE[(k, l)], (k, l)

    def test_frozen_values(self):
        assert coeff_a(1, 0) == Fraction(-1, 2)
        assert coeff_a(0, 1) == 0
        assert coeff_a(2, 0) == Fraction(3, 8)
        assert coeff_b(1, 1) == Fraction(-1, 2)
        assert coeff_b(2, 0) == 0
        assert coeff_b(0, 0) == 1

    def test_am0_closed_form(self):
        for m in range(0, 9):
            assert abs(coeff_a(m, 0)) == Fraction(math.comb(2 * m, m),
                                                  4 ** m)

    def test_b_dominated_by_a(self):
        for l in range(ORDER):
            for k in range(ORDER):
                assert abs(coeff_b(k, l)) <= abs(coeff_a(k, l))

    def test_p_times_sqrt_equals_q(self):
        # convolution identity: sum_{i+j=k} a_i(l) binom(1/2, j) = b_k(l)
        for l in range(6):
            for k in range(ORDER):
                conv = sum(coeff_a(i, l) * half_binomial(k - i)
                           for i in range(k + 1))
                assert conv == coeff_b(k, l), (k, l)

    def test_q_recurrence(self):
        # Q_{l+1} = Q_l - Q_l * sqrt(1+x)
        for l in range(5):
            for k in range(ORDER):
                conv = sum(coeff_b(i, l) * half_binomial(k - i)
                           for i in range(k + 1))
                assert coeff_b(k, l + 1) == coeff_b(k, l) - conv


class TestSingleSiteZ:
    def test_anchors(self):
        assert single_site_Z(SingleSiteParams(1, Fraction(0))) == 1
        assert single_site_Z(SingleSiteParams(2, Fraction(0))) == 3
        assert single_site_Z(SingleSiteParams(0, Fraction(7, 3))) == 1

    @pytest.mark.parametrize("m", range(5))
    @pytest.mark.parametrize("eps", [Fraction(0), Fraction(1, 2), Fraction(1),
                                     Fraction(3)])
    def test_closed_form_equals_engine(self, m, eps):
        p = SingleSiteParams(m, eps)
        assert single_site_Z(p) == single_site_Z_engine(p)

    def test_positive_and_increasing_in_eps(self):
        for m in range(1, 7):
            grid = [Fraction(k, 4) for k in range(8)]
            values = [single_site_Z(SingleSiteParams(m, e)) for e in grid]
            assert all(v > 0 for v in values)
            assert all(a < b for a, b in zip(values, values[1:]))


class TestNormPsiPow:
    def test_instances(self):
        assert norm_psi_pow(1, 2) == 4
        assert norm_psi_pow(3, 3) == 48
        assert norm_psi_pow(0, 5) == 1
        assert norm_psi_pow(4, 3) == 0

    @pytest.mark.parametrize("m", range(1, 7))
    def test_engine_agreement(self, m):
        ctx = make_algebra(1, m)
        s = symmetric_product(ctx, 0, 0)
        power = ctx.one()
        for k in range(m + 1):
            assert l1_norm(power) == norm_psi_pow(k, m)
            power = power * s


class TestRatioR:
    def test_single_term(self):
        for m in (0, 1, 4, 9):
            assert ratio_R(m, m) == 1

    def test_two_formulas_agree(self):
        for m in range(13):
            for l in range(m + 1):
                assert ratio_R(l, m) == ratio_R_binomial_form(l, m)

    def test_r01_direct(self):
        # direct summation: k=0 gives (1 / (1/2)) * 2^-1 = 1, k=1 gives 1
        assert ratio_R(0, 1) == 2

    def test_bounded_by_e_squared(self):
        cert = e_squared_lower_bound()
        assert float(cert) == pytest.approx(math.e ** 2, rel=1e-12)
        for m in range(16):
            for l in range(m + 1):
                r = ratio_R(l, m)
                # each summand ratio of binomials is at most 1, so R is
                # dominated by the truncated series of e^2
                assert r <= cert


class TestNormRatios:
    def test_m1_eps0(self):
        q, p = one_point_norm_ratios(SingleSiteParams(1, Fraction(0)))
        # numerator norms: |1| = 1 and |1 - psibar psi| = 2, with Z = 1
        assert q == 1
        assert p == 2

    def test_eps0_q_ratio_trivial(self):
        for m in range(1, 7):
            z = single_site_Z(SingleSiteParams(m, Fraction(0)))
            assert z >= 1
            q, _ = one_point_norm_ratios(SingleSiteParams(m, Fraction(0)))
            assert q * z == 1
            assert q <= 1

    def test_sweep_below_threshold(self):
        worst = Fraction(0)
        for m in range(1, 8):
            for eps in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3)):
                q, p = one_point_norm_ratios(SingleSiteParams(m, eps))
                worst = max(worst, q, p)
        assert worst <= 8

    def test_expansion_matches_direct_elements(self):
        # the Q/P expansions reproduce exp(-eps(z-1)) and its 1/z variant
        from hyperfermi.grassmann import exp_even, series_apply
        from hyperfermi.rational import neg_half_binomial
        for m in (1, 2, 3):
            for eps in (Fraction(1, 2), Fraction(2)):
                q_elem, p_elem = eps_expansion_elements(SingleSiteParams(m, eps))
                ctx = q_elem.ctx
                s = symmetric_product(ctx, 0, 0)
                z = series_apply([half_binomial(k) for k in range(m + 1)], s)
                invz = series_apply([neg_half_binomial(k) for k in range(m + 1)], s)
                direct_q = exp_even((z - 1) * (-eps))
                assert q_elem == direct_q
                assert p_elem == invz * direct_q
