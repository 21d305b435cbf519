"""Closed-form one-site combinatorics of the fermionic site weight.

Everything here is exact: the Taylor coefficients of the families

    P_l(x) = (1 - sqrt(1+x))^l / sqrt(1+x) = sum_k a_k(l) x^k
    Q_l(x) = (1 - sqrt(1+x))^l           = sum_k b_k(l) x^k

the one-site normalisation Z(eps, m), the l1 norms of powers of the local
fermion bilinear, the bounded ratio sums R_l, and the measured norm ratios
that certify the uniform one-site estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import grassmann
from .grassmann import berezin, l1_norm, make_algebra, series_apply, symmetric_product
from .rational import half_binomial, neg_half_binomial


@dataclass(frozen=True)
class SingleSiteParams:
    """Fermion pairs per site and the pinning field."""
    m: int
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be >= 0")
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.eps < 0:
            raise ValueError("eps must be >= 0")


def coeff_a(k: int, l: int) -> Fraction:
    """Taylor coefficient a_k(l); zero for k < l."""
    if k < 0 or l < 0:
        raise ValueError("k, l must be >= 0")
    if k < l:
        return Fraction(0)
    sign = -1 if k % 2 else 1
    return sign * Fraction(2) ** (l - 2 * k) * math.comb(2 * k - l, k - l)


def coeff_b(k: int, l: int) -> Fraction:
    """Taylor coefficient b_k(l); zero for k < l, and Q_0 = 1 exactly."""
    if k < 0 or l < 0:
        raise ValueError("k, l must be >= 0")
    if l == 0:
        # Q_0(x) = 1; the l/k factor of the generic formula is a 0/0 here
        return Fraction(1 if k == 0 else 0)
    if k < l:
        return Fraction(0)
    sign = -1 if k % 2 else 1
    return sign * Fraction(2) ** (l - 2 * k) * Fraction(l, k) \
        * math.comb(2 * k - l - 1, k - l)


def norm_psi_pow(k: int, m: int) -> Fraction:
    """l1 norm of the k-th power of the site bilinear: 2^k m!/(m-k)!."""
    if k < 0 or m < 0:
        raise ValueError("k, m must be >= 0")
    if k > m:
        return Fraction(0)
    return Fraction(2) ** k * Fraction(math.factorial(m), math.factorial(m - k))


def single_site_Z(p: SingleSiteParams) -> Fraction:
    """One-site normalisation: 2^m m! sum_l eps^l/l! |a_m(l)|."""
    total = Fraction(0)
    for l in range(p.m + 1):
        total += p.eps ** l / math.factorial(l) * abs(coeff_a(p.m, l))
    return Fraction(2) ** p.m * math.factorial(p.m) * total


def single_site_Z_engine(p: SingleSiteParams) -> Fraction:
    """Brute-force Berezin evaluation of the one-site integral of
    exp(-eps (z-1)) / z; independent cross-check of single_site_Z."""
    if p.m == 0:
        return Fraction(1)
    ctx = make_algebra(1, p.m)
    s = symmetric_product(ctx, 0, 0)
    z = series_apply([half_binomial(k) for k in range(p.m + 1)], s)
    inv_z = series_apply([neg_half_binomial(k) for k in range(p.m + 1)], s)
    weight = inv_z * grassmann.exp_even((z - 1) * (-p.eps))
    return berezin(weight, [0]).scalar_part()


def ratio_R(l: int, m: int) -> Fraction:
    """The bounded ratio sum sum_{k=l}^m (|a_k(l)|/|a_m(l)|) 2^(k-m)/(m-k)!."""
    if not 0 <= l <= m:
        raise ValueError("need 0 <= l <= m")
    am = abs(coeff_a(m, l))
    total = Fraction(0)
    for k in range(l, m + 1):
        total += abs(coeff_a(k, l)) / am * Fraction(2) ** (k - m) \
            / math.factorial(m - k)
    return total


def ratio_R_binomial_form(l: int, m: int) -> Fraction:
    """Equivalent form sum_j 2^j/j! C(2m-l-2j, m-l-j)/C(2m-l, m-l)."""
    if not 0 <= l <= m:
        raise ValueError("need 0 <= l <= m")
    den = math.comb(2 * m - l, m - l)
    total = Fraction(0)
    for j in range(m - l + 1):
        total += Fraction(2) ** j / math.factorial(j) \
            * Fraction(math.comb(2 * m - l - 2 * j, m - l - j), den)
    return total


def e_squared_lower_bound(terms: int = 41) -> Fraction:
    """Rational lower bound on e^2 = sum_j 2^j/j!; partial sums increase."""
    return sum((Fraction(2) ** j / math.factorial(j) for j in range(terms)),
               Fraction(0))


def eps_expansion_elements(p: SingleSiteParams):
    """The finite expansions of exp(-eps(z-1)) and exp(-eps(z-1))/z in the
    one-site algebra, built from the Q and P coefficient families."""
    if p.m < 1:
        raise ValueError("requires m >= 1")
    ctx = make_algebra(1, p.m)
    s = symmetric_product(ctx, 0, 0)
    powers = [ctx.one()]
    for _ in range(p.m):
        powers.append(powers[-1] * s)
    q_elem = ctx.zero()
    p_elem = ctx.zero()
    for l in range(p.m + 1):
        w = p.eps ** l / math.factorial(l)
        if w == 0 and l > 0:
            continue
        for k in range(l, p.m + 1):
            q_elem = q_elem + powers[k] * (w * coeff_b(k, l))
            p_elem = p_elem + powers[k] * (w * coeff_a(k, l))
    return q_elem, p_elem


def one_point_norm_ratios(p: SingleSiteParams) -> tuple[Fraction, Fraction]:
    """Measured norm ratios (|exp(-eps(z-1))| / Z, |exp(-eps(z-1))/z| / Z).

    The uniform constant bounding these is not pinned analytically; callers
    compare against a configurable threshold (default 8 in the CLI suites).
    """
    q_elem, p_elem = eps_expansion_elements(p)
    Z = single_site_Z(p)
    return l1_norm(q_elem) / Z, l1_norm(p_elem) / Z
