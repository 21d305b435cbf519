import random
from fractions import Fraction

import pytest

from hyperfermi.grassmann import AlgebraContext, GrassmannElement


def rand_fraction(rng: random.Random, num_max: int = 6, den_max: int = 6,
                  signed: bool = False, allow_zero: bool = True) -> Fraction:
    lo = -num_max if signed else (0 if allow_zero else 1)
    num = rng.randint(lo, num_max)
    if not allow_zero and num == 0:
        num = 1
    return Fraction(num, rng.randint(1, den_max))


def rand_element(ctx: AlgebraContext, rng: random.Random, terms: int = 5,
                 max_degree: int = 4) -> GrassmannElement:
    """Random sparse element with small rational coefficients."""
    out = ctx.zero()
    n = ctx.num_generators
    for _ in range(terms):
        deg = rng.randint(0, min(max_degree, n))
        gens = rng.sample(range(n), deg)
        mono = 0
        for g in gens:
            mono |= 1 << g
        coeff = rand_fraction(rng, signed=True)
        out = out + ctx._make({mono: Fraction(1)}) * coeff
    return out


def rand_even_nilpotent(ctx: AlgebraContext, rng: random.Random,
                        terms: int = 4) -> GrassmannElement:
    out = ctx.zero()
    n = ctx.num_generators
    for _ in range(terms):
        deg = 2 * rng.randint(1, max(1, min(2, n // 2)))
        gens = rng.sample(range(n), deg)
        mono = 0
        for g in gens:
            mono |= 1 << g
        out = out + ctx._make({mono: Fraction(1)}) * rand_fraction(rng, signed=True)
    return out


@pytest.fixture
def rng():
    return random.Random(20260810)
