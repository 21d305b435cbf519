"""Sparse finite-dimensional Grassmann algebra with exact coefficients.

Generators live in a fixed universe determined by the algebra context:
``num_sites`` sites, ``m`` colors per site, one unbarred and one barred
generator per (site, color), and optionally a parallel family of source
generators used for generating functions.  The total order on generators is

    (species, site, color, conjugate)

with field < source, unbarred < barred.  A monomial is a bitmask over this
order; any permutation sign picked up while canonicalising a product is
absorbed into the coefficient.  Zero coefficients are pruned eagerly, so
the term map of an element never stores zeros.

Berezin integration uses left derivatives,

    d_t (t w) = w,    d_t w = 0 if t not in w,    d_t (s w) = -s d_t w,

applied per site and color as ``d_psibar d_psi`` with the rightmost
operator acting first.  This convention makes the one-site integral of
1/z equal to 1 (and keeps it positive for every m), which pins the global
sign once and for all.

Elements are immutable values: all operations return fresh elements and
never mutate their inputs, so they are safe to share across threads.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

FIELD = 0
SOURCE = 1

#: Default cap on the total number of generators of one context.  Bitmask
#: monomials stay cheap well beyond this, but partition functions blow up
#: combinatorially long before, so the cap mostly guards against typos.
DEFAULT_MAX_GENERATORS = 128

SPECIES_NAMES = {(FIELD, False): "psi", (FIELD, True): "psibar",
                 (SOURCE, False): "rho", (SOURCE, True): "rhobar"}


class CapacityError(RuntimeError):
    """Requested computation exceeds the configured generator budget."""


class AlgebraContext:
    """Fixed generator universe plus the coefficient mode.

    mode "exact" stores coefficients as arbitrary-precision rationals;
    mode "float" stores binary64.  A context is homogeneous: elements of
    different contexts cannot be combined.
    """

    def __init__(self, num_sites: int, m: int, with_sources: bool = False,
                 mode: str = "exact",
                 max_generators: int = DEFAULT_MAX_GENERATORS):
        if num_sites < 1:
            raise ValueError("num_sites must be >= 1")
        if m < 0:
            raise ValueError("m must be >= 0")
        if mode not in ("exact", "float"):
            raise ValueError("mode must be 'exact' or 'float'")
        self.num_sites = num_sites
        self.m = m
        self.with_sources = bool(with_sources)
        self.mode = mode
        self.gens_per_species = 2 * m * num_sites
        self.num_generators = self.gens_per_species * (2 if with_sources else 1)
        if self.num_generators > max_generators:
            raise CapacityError(
                "algebra needs %d generators, budget is %d"
                % (self.num_generators, max_generators))
        self.source_mask = ((1 << self.num_generators) - 1) ^ \
                           ((1 << self.gens_per_species) - 1)

    # -- generator bookkeeping -------------------------------------------

    def gen_index(self, species: int, site: int, color: int,
                  barred: bool) -> int:
        if species not in (FIELD, SOURCE):
            raise ValueError("bad species %r" % (species,))
        if species == SOURCE and not self.with_sources:
            raise ValueError("context was built without source generators")
        if not 0 <= site < self.num_sites:
            raise ValueError("site %r out of range" % (site,))
        if not 1 <= color <= self.m:
            raise ValueError("color %r out of range 1..%d" % (color, self.m))
        return (species * self.gens_per_species
                + site * 2 * self.m + (color - 1) * 2 + int(barred))

    def gen_info(self, index: int) -> tuple[int, int, int, bool]:
        species, rest = divmod(index, self.gens_per_species)
        site, rest = divmod(rest, 2 * self.m)
        color, barred = divmod(rest, 2)
        return species, site, color + 1, bool(barred)

    def gen_name(self, index: int) -> str:
        species, site, color, barred = self.gen_info(index)
        return "%s[%d,%d]" % (SPECIES_NAMES[(species, barred)], site, color)

    def site_mask(self, site: int, species: int = FIELD) -> int:
        """Bitmask of all generators of one site (one species)."""
        lo = species * self.gens_per_species + site * 2 * self.m
        return ((1 << (2 * self.m)) - 1) << lo

    # -- coefficients ----------------------------------------------------

    def coerce(self, value):
        if self.mode == "exact":
            if isinstance(value, float):
                raise ValueError("exact mode does not accept floats")
            return Fraction(value)
        return float(value)

    # -- element constructors --------------------------------------------

    def _make(self, terms: dict) -> "GrassmannElement":
        return GrassmannElement(self, terms)

    def zero(self) -> "GrassmannElement":
        return self._make({})

    def scalar(self, value) -> "GrassmannElement":
        c = self.coerce(value)
        return self._make({0: c} if c else {})

    def one(self) -> "GrassmannElement":
        return self.scalar(1)

    def generator(self, species: int, site: int, color: int,
                  barred: bool) -> "GrassmannElement":
        bit = 1 << self.gen_index(species, site, color, barred)
        return self._make({bit: self.coerce(1)})

    def psi(self, site: int, color: int) -> "GrassmannElement":
        return self.generator(FIELD, site, color, False)

    def psibar(self, site: int, color: int) -> "GrassmannElement":
        return self.generator(FIELD, site, color, True)

    def rho(self, site: int, color: int) -> "GrassmannElement":
        return self.generator(SOURCE, site, color, False)

    def rhobar(self, site: int, color: int) -> "GrassmannElement":
        return self.generator(SOURCE, site, color, True)

    def __repr__(self):
        return ("AlgebraContext(num_sites=%d, m=%d, with_sources=%s, mode=%r)"
                % (self.num_sites, self.m, self.with_sources, self.mode))


def make_algebra(num_sites: int, m: int, with_sources: bool = False,
                 mode: str = "exact",
                 max_generators: int = DEFAULT_MAX_GENERATORS) -> AlgebraContext:
    """Create the algebra context with the documented generator order."""
    return AlgebraContext(num_sites, m, with_sources, mode, max_generators)


def _merge_sign_is_neg(ma: int, mb: int) -> bool:
    """Parity of the permutation sorting the concatenation of two
    canonically ordered disjoint monomials (ma's generators first)."""
    swaps = 0
    if ma.bit_count() <= mb.bit_count():
        t = ma
        while t:
            low = t & -t
            swaps += (mb & (low - 1)).bit_count()
            t ^= low
    else:
        t = mb
        while t:
            low = t & -t
            swaps += (ma >> low.bit_length()).bit_count()
            t ^= low
    return bool(swaps & 1)


class GrassmannElement:
    """Sparse element: map from monomial bitmask to nonzero coefficient."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: AlgebraContext, terms: dict):
        self.ctx = ctx
        self.terms = terms

    # -- inspection ------------------------------------------------------

    def scalar_part(self):
        return self.terms.get(0, self.ctx.coerce(0))

    def is_zero(self) -> bool:
        return not self.terms

    def is_even(self) -> bool:
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def is_odd(self) -> bool:
        return all(m.bit_count() % 2 == 1 for m in self.terms)

    def max_degree(self) -> int:
        return max((m.bit_count() for m in self.terms), default=0)

    def support_mask(self) -> int:
        mask = 0
        for m in self.terms:
            mask |= m
        return mask

    def coefficient(self, mono: int):
        return self.terms.get(mono, self.ctx.coerce(0))

    # -- ring operations -------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, GrassmannElement):
            other = self.ctx.scalar(other)
        self._check_ctx(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return self.ctx._make(out)

    __radd__ = __add__

    def __neg__(self):
        return self.ctx._make({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, GrassmannElement):
            other = self.ctx.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return self.ctx.scalar(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, GrassmannElement):
            c = self.ctx.coerce(other)
            if not c:
                return self.ctx.zero()
            return self.ctx._make({m: v * c for m, v in self.terms.items()})
        self._check_ctx(other)
        return gmul(self, other)

    def __rmul__(self, other):
        # scalars commute with everything, so left scalar action is the same
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, GrassmannElement):
            raise TypeError("division by a Grassmann element is not defined")
        if self.ctx.mode == "exact":
            return self * (Fraction(1) / Fraction(other))
        return self * (1.0 / float(other))

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined")
        result = self.ctx.one()
        base = self
        n = k
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, GrassmannElement):
            return self.ctx is other.ctx and self.terms == other.terms
        return self.terms == {} if not other else self.terms == {0: self.ctx.coerce(other)}

    def __hash__(self):
        return hash((id(self.ctx), tuple(sorted(self.terms.items()))))

    def _check_ctx(self, other: "GrassmannElement"):
        if self.ctx is not other.ctx:
            raise ValueError("elements belong to different algebra contexts")

    # -- printing --------------------------------------------------------

    def to_string(self, max_terms: int | None = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (m.bit_count(), m)):
            c = self.terms[mono]
            if mono == 0:
                parts.append(str(c))
            else:
                gens = " ".join(self.ctx.gen_name(i)
                                for i in _bit_indices(mono))
                parts.append("%s * %s" % (c, gens) if c != 1 else gens)
            if max_terms is not None and len(parts) >= max_terms:
                parts.append("... (%d terms)" % len(self.terms))
                break
        return " + ".join(parts)

    def __repr__(self):
        return "<GrassmannElement %s>" % self.to_string(max_terms=6)


def _bit_indices(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def gmul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Bilinear product; terms with a repeated generator vanish."""
    if a.ctx is not b.ctx:
        raise ValueError("elements belong to different algebra contexts")
    out: dict = {}
    bitems = list(b.terms.items())
    for ma, ca in a.terms.items():
        for mb, cb in bitems:
            if ma & mb:
                continue
            c = ca * cb
            if _merge_sign_is_neg(ma, mb):
                c = -c
            key = ma | mb
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
    return a.ctx._make(out)


def symmetric_product(ctx: AlgebraContext, i: int, j: int) -> GrassmannElement:
    """Even degree-2 bilinear sum_a (psibar[i,a] psi[j,a] + psibar[j,a] psi[i,a]).

    For i == j this is 2 sum_a psibar[i,a] psi[i,a].
    """
    acc = ctx.zero()
    for color in range(1, ctx.m + 1):
        acc = acc + gmul(ctx.psibar(i, color), ctx.psi(j, color))
        acc = acc + gmul(ctx.psibar(j, color), ctx.psi(i, color))
    return acc


def derivative(x: GrassmannElement, gen_index: int) -> GrassmannElement:
    """Left derivative with respect to a single generator."""
    bit = 1 << gen_index
    below = bit - 1
    out = {}
    for mono, c in x.terms.items():
        if mono & bit:
            if (mono & below).bit_count() & 1:
                c = -c
            out[mono ^ bit] = c
    return x.ctx._make(out)


def berezin(x: GrassmannElement, sites) -> GrassmannElement:
    """Berezin integral over the field generators of the given sites.

    Per site the operator is the composition of d_psibar d_psi over the
    colors, rightmost first.  Each site block is an even operator, so the
    result does not depend on the order of the sites (tested).
    """
    ctx = x.ctx
    res = x
    for site in sorted(set(sites)):
        if not 0 <= site < ctx.num_sites:
            raise ValueError("site %r not in context" % (site,))
        for color in range(1, ctx.m + 1):
            res = derivative(res, ctx.gen_index(FIELD, site, color, False))
            res = derivative(res, ctx.gen_index(FIELD, site, color, True))
    return res


def l1_norm(x: GrassmannElement):
    """Sum of absolute values of the stored basis coefficients."""
    if x.ctx.mode == "exact":
        total = Fraction(0)
        for c in x.terms.values():
            total += -c if c < 0 else c
        return total
    return math.fsum(abs(x.terms[m]) for m in sorted(x.terms))


def series_apply(coeffs: Sequence, x: GrassmannElement) -> GrassmannElement:
    """Evaluate sum_k coeffs[k] * x**k for an even nilpotent x.

    The series is exact because x**k vanishes once 2k exceeds the number
    of generators; coeffs may be any sequence at least that long.
    """
    if not x.is_even():
        raise ValueError("series_apply requires an even element")
    if x.scalar_part():
        raise ValueError("series_apply requires zero scalar part; "
                         "split the scalar off first")
    ctx = x.ctx
    acc = ctx.zero()
    power = ctx.one()
    for k, c in enumerate(coeffs):
        if k > 0:
            power = power * x
            if power.is_zero():
                break
        acc = acc + power * c
    return acc


def exp_even(x: GrassmannElement) -> GrassmannElement:
    """Exponential of an even element, exact on the nilpotent part.

    In exact mode the scalar part must vanish (exp of a rational is not
    rational); callers arrange the exponent accordingly or track the
    scalar prefactor themselves.  In float mode the scalar part is split
    off and exponentiated numerically.
    """
    if not x.is_even():
        raise ValueError("exp_even requires an even element")
    ctx = x.ctx
    c = x.scalar_part()
    prefactor = None
    if c:
        if ctx.mode == "exact":
            raise ValueError("exp_even in exact mode requires zero scalar part")
        prefactor = math.exp(c)
        x = x - c
    acc = ctx.one()
    term = ctx.one()
    k = 0
    while True:
        k += 1
        term = term * x
        if term.is_zero():
            break
        if ctx.mode == "exact":
            term = term * Fraction(1, k)
        else:
            term = term * (1.0 / k)
        acc = acc + term
        if k > ctx.num_generators:
            raise AssertionError("exp_even did not terminate; input not nilpotent?")
    if prefactor is not None:
        acc = acc * prefactor
    return acc


def log_nilpotent(x: GrassmannElement) -> GrassmannElement:
    """log(1 + x) for an even nilpotent x, as a finite series."""
    if not x.is_even():
        raise ValueError("log_nilpotent requires an even element")
    if x.scalar_part():
        raise ValueError("log_nilpotent requires zero scalar part")
    ctx = x.ctx
    acc = ctx.zero()
    power = ctx.one()
    k = 0
    while True:
        k += 1
        power = power * x
        if power.is_zero():
            break
        if ctx.mode == "exact":
            coef = Fraction(-1 if k % 2 == 0 else 1, k)
        else:
            coef = (-1.0 if k % 2 == 0 else 1.0) / k
        acc = acc + power * coef
        if k > ctx.num_generators:
            raise AssertionError("log_nilpotent did not terminate")
    return acc
