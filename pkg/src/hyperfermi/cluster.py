"""Connected parts, polymer activities and the hard-core gas machinery.

The connected part of the Gibbs factor is defined by the partition
recursion

    exp(-W(Y)) = sum over partitions Pi of Y of prod_{B in Pi} conn(B),

with conn(B) = 1 for singletons.  Anchoring the block that contains the
lowest site turns this into a subset recursion, which is used both at the
level of Grassmann elements and, after integrating against the factorised
site measure, at the level of scalars: connected parts are even, so the
Berezin integral of a product over disjoint blocks factorises and

    I(Y) := int dnu_Y conn(Y) = Z(Y) - sum_{B anchored, B proper} I(B) Z(Y\\B).

Activities are K(Y) = I(Y) / prod_{j in Y} Z_j and the observable variant
K2 integrates conn(Y) against psibar[i0] psi[j0].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .grassmann import GrassmannElement, berezin, gmul
from .graphs import WeightedGraph
from .model import H0Model, ModelParams
from .singlesite import SingleSiteParams, single_site_Z


def set_partitions(items):
    """Yield all partitions of a sequence as lists of lists."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _anchored_proper_subsets(mask: int):
    """Proper nonempty submasks of mask containing its lowest bit."""
    anchor = mask & -mask
    rest = mask ^ anchor
    sub = rest
    while sub:
        sub = (sub - 1) & rest
        cand = sub | anchor
        if cand != mask:
            yield cand
        if sub == 0:
            break


class ActivityTable:
    """Memoised polymer activities for one (graph, params) pair."""

    def __init__(self, graph: WeightedGraph, params: ModelParams):
        self.graph = graph
        self.params = params
        self.model = H0Model(graph, params)
        self._z1 = {v: single_site_Z(SingleSiteParams(params.m, graph.eps[v]))
                    for v in graph.vertices}
        self._Z: dict = {0: Fraction(1)}
        self._I: dict = {}
        self._expw: dict = {}
        self._conn: dict = {}
        self._k2: dict = {}

    # -- masks <-> vertex sets -------------------------------------------

    def mask_of(self, Y) -> int:
        mask = 0
        for v in Y:
            mask |= 1 << self.graph.site_index(v)
        return mask

    def set_of(self, mask: int):
        return frozenset(self.graph.vertices[i]
                         for i in range(self.graph.n) if mask >> i & 1)

    # -- scalar route ------------------------------------------------------

    def Z(self, mask: int) -> Fraction:
        if mask not in self._Z:
            self._Z[mask] = self.model.partition_function(self.set_of(mask))
        return self._Z[mask]

    def I(self, mask: int) -> Fraction:
        """nu-integral of the connected part, by anchored subset recursion."""
        if mask not in self._I:
            if mask.bit_count() <= 1:
                self._I[mask] = self.Z(mask)
            else:
                val = self.Z(mask)
                for sub in _anchored_proper_subsets(mask):
                    val -= self.I(sub) * self.Z(mask ^ sub)
                self._I[mask] = val
        return self._I[mask]

    def Z1_product(self, mask: int) -> Fraction:
        out = Fraction(1)
        for v in self.set_of(mask):
            out *= self._z1[v]
        return out

    def K(self, Y) -> Fraction:
        """Polymer activity; Y must have at least two sites."""
        mask = Y if isinstance(Y, int) else self.mask_of(Y)
        if mask.bit_count() < 2:
            raise ValueError("polymers have at least two sites")
        return self.I(mask) / self.Z1_product(mask)

    # -- element route -----------------------------------------------------

    def exp_minus_W(self, mask: int) -> GrassmannElement:
        if mask not in self._expw:
            Y = self.set_of(mask)
            acc = self.model.ctx.one()
            for (i, j, _w) in self.graph.edges:
                if i in Y and j in Y:
                    acc = acc * self.model.exp_minus_W_edge(i, j)
            self._expw[mask] = acc
        return self._expw[mask]

    def connected_element(self, mask: int) -> GrassmannElement:
        if mask not in self._conn:
            if mask.bit_count() <= 1:
                self._conn[mask] = self.model.ctx.one()
            else:
                val = self.exp_minus_W(mask)
                for sub in _anchored_proper_subsets(mask):
                    val = val - self.connected_element(sub) * self.exp_minus_W(mask ^ sub)
                self._conn[mask] = val
        return self._conn[mask]

    def K2(self, Y, i0, j0, alpha: int = 1) -> Fraction:
        """Observable activity; zero unless both marked sites lie in Y."""
        mask = Y if isinstance(Y, int) else self.mask_of(Y)
        Yset = self.set_of(mask)
        if i0 not in Yset or j0 not in Yset:
            return Fraction(0)
        key = (mask, i0, j0, alpha)
        if key not in self._k2:
            conn = self.connected_element(mask)
            obs = self.model.observable(i0, j0, alpha)
            integrand = conn * obs
            for v in Yset:
                integrand = integrand * self.model.nu(v)
            val = berezin(integrand,
                          [self.graph.site_index(v) for v in Yset]).scalar_part()
            self._k2[key] = val / self.Z1_product(mask)
        return self._k2[key]

    # -- enumeration -------------------------------------------------------

    def polymer_masks(self, min_size: int = 2, max_size: int | None = None,
                      containing: int = 0):
        n = self.graph.n
        hi = n if max_size is None else min(max_size, n)
        for mask in range(1, 1 << n):
            k = mask.bit_count()
            if k < min_size or k > hi:
                continue
            if containing and (mask & containing) != containing:
                continue
            yield mask

    def nonzero_activities(self, max_size: int | None = None):
        """All polymers with K(Y) != 0, as (mask, K) pairs."""
        out = []
        for mask in self.polymer_masks(2, max_size):
            k = self.K(mask)
            if k != 0:
                out.append((mask, k))
        return out

    def to_json_dict(self, max_size: int | None = None) -> dict:
        from .rational import format_rational
        entries = []
        for mask in self.polymer_masks(2, max_size):
            entries.append({"sites": sorted(self.set_of(mask)),
                            "K": format_rational(self.K(mask))})
        return {"polymers": entries}


# -- documented operation surfaces ------------------------------------------


def connected_part(graph: WeightedGraph, params: ModelParams, Y) -> GrassmannElement:
    table = ActivityTable(graph, params)
    return table.connected_element(table.mask_of(Y))


def activity(graph: WeightedGraph, params: ModelParams, Y) -> Fraction:
    return ActivityTable(graph, params).K(Y)


def activity2(graph: WeightedGraph, params: ModelParams, Y, i0, j0,
              alpha: int = 1) -> Fraction:
    return ActivityTable(graph, params).K2(Y, i0, j0, alpha)


def polymer_identity_check(graph: WeightedGraph, params: ModelParams,
                           table: ActivityTable | None = None):
    """Verify the hard-core polymer-gas identity at zero sources.

    Left side: the full normalisation divided by the product of one-site
    normalisations (one big Berezin integral).  Right side: families of
    pairwise-disjoint polymers of size >= 2 weighted by their activities
    (each activity an independent small Berezin integral plus the subset
    recursion).  Returns (equal, residual, lhs, rhs).
    """
    table = table or ActivityTable(graph, params)
    n = graph.n
    full = (1 << n) - 1
    lhs = table.Z(full) / table.Z1_product(full)
    memo = {0: Fraction(1)}

    def families(mask: int) -> Fraction:
        if mask not in memo:
            anchor = mask & -mask
            total = families(mask ^ anchor)  # anchor site in no polymer
            rest = mask ^ anchor
            sub = rest
            while True:
                cand = sub | anchor
                if cand.bit_count() >= 2:
                    total += table.K(cand) * families(mask ^ cand)
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            memo[mask] = total
        return memo[mask]

    rhs = families(full)
    return lhs == rhs, lhs - rhs, lhs, rhs


def resummation_check(graph: WeightedGraph, params: ModelParams, Y) -> bool:
    """Definitional round trip: summing products of connected parts over
    all partitions of Y recovers exp(-W(Y)) exactly."""
    table = ActivityTable(graph, params)
    mask = table.mask_of(Y)
    total = table.model.ctx.zero()
    for part in set_partitions(sorted(table.set_of(mask))):
        prod = table.model.ctx.one()
        for block in part:
            prod = prod * table.connected_element(table.mask_of(block))
        total = total + prod
    return total == table.exp_minus_W(mask)


# -- hard-core Ursell functions ----------------------------------------------


def phi_conn(Ys) -> int:
    """Ursell function of the hard-core interaction on a polymer family.

    phi of a family is 1 if the polymers are pairwise disjoint, else 0;
    its connected part follows the same anchored partition recursion and
    depends only on the overlap pattern of the family.
    """
    sets = [frozenset(Y) for Y in Ys]
    n = len(sets)
    if n == 0:
        raise ValueError("need at least one polymer")
    adj = [0] * n
    for a in range(n):
        for b in range(a + 1, n):
            if sets[a] & sets[b]:
                adj[a] |= 1 << b
                adj[b] |= 1 << a

    def phi(mask: int) -> int:
        a = mask
        while a:
            low = a & -a
            idx = low.bit_length() - 1
            if adj[idx] & mask:
                return 0
            a ^= low
        return 1

    memo: dict = {}

    def conn(mask: int) -> int:
        if mask.bit_count() <= 1:
            return 1
        if mask not in memo:
            val = phi(mask)
            for sub in _anchored_proper_subsets(mask):
                val -= conn(sub) * phi(mask ^ sub)
            memo[mask] = val
        return memo[mask]

    return conn((1 << n) - 1)


def overlap_spanning_tree_count(Ys) -> int:
    """Number of spanning trees of the overlap graph of a polymer family;
    this dominates |phi_conn| (tree-graph bound)."""
    sets = [frozenset(Y) for Y in Ys]
    n = len(sets)
    if n == 1:
        return 1
    L = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if sets[a] & sets[b]:
                L[a][a] += 1
                L[b][b] += 1
                L[a][b] -= 1
                L[b][a] -= 1
    from .forests import bareiss_determinant
    minor = [[Fraction(L[i][j]) for j in range(1, n)] for i in range(1, n)]
    det = bareiss_determinant(minor)
    return int(det)


# -- the two-point polymer series and its bound ------------------------------


@dataclass
class TwoPointSeries:
    partial_sums: list
    A_value: float
    B_value: float
    tail_bound: float
    convergent: bool


def _series_data(table: ActivityTable, i0, j0, alpha: int, C: float):
    """Shared enumeration: nonzero activities, the observable activities,
    and the weights A = sum |K2| C^|Y| and B = sup_k sum |K| C^|Y|."""
    g = table.graph
    acts = table.nonzero_activities()
    pair_mask = table.mask_of({i0, j0})
    k2 = {}
    for mask in table.polymer_masks(1, None, containing=pair_mask):
        val = table.K2(mask, i0, j0, alpha)
        if val != 0:
            k2[mask] = val
    A = sum(abs(float(v)) * C ** mask.bit_count() for mask, v in k2.items())
    B = 0.0
    for v in g.vertices:
        vbit = 1 << g.site_index(v)
        s = sum(abs(float(kv)) * C ** mask.bit_count()
                for mask, kv in acts if mask & vbit)
        B = max(B, s)
    return acts, k2, A, B


def two_point_series(graph: WeightedGraph, params: ModelParams, i0, j0,
                     alpha: int = 1, N_max: int = 3, C: float = math.e,
                     table: ActivityTable | None = None) -> TwoPointSeries:
    """Partial sums of the polymer log-series for the two-point function.

    Families may repeat polymers, so the series is infinite; it is
    truncated at N_max families and certified by the geometric tail
    A * B^N_max / (1 - B).  If B >= 1 the tail is inconclusive and the
    partial sums are still returned.
    """
    table = table or ActivityTable(graph, params)
    acts, k2_all, A, B = _series_data(table, i0, j0, alpha, C)
    singleton = Fraction(0)
    if i0 == j0:
        singleton = table.K2(table.mask_of({i0}), i0, j0, alpha)
    k2_big = [(mask, v) for mask, v in k2_all.items() if mask.bit_count() >= 2]
    partial = []
    total = singleton
    for N in range(1, N_max + 1):
        term = Fraction(0)
        for (m1, kv1) in k2_big:
            if N == 1:
                term += kv1
                continue
            for rest in itertools.product(acts, repeat=N - 1):
                prod = kv1
                for (_m, kv) in rest:
                    prod *= kv
                family = [table.set_of(m1)] + [table.set_of(m) for m, _ in rest]
                phi_c = phi_conn(family)
                if phi_c:
                    term += prod * phi_c
        term /= math.factorial(N - 1)
        total += term
        partial.append(total)
    convergent = B < 1.0
    tail = A * B ** N_max / (1.0 - B) if convergent else float("inf")
    return TwoPointSeries(partial, A, B, tail, convergent)


@dataclass
class MayerBound:
    A_value: float
    B_value: float
    bound: float
    convergent: bool


def mayer_bound(graph: WeightedGraph, params: ModelParams, i0, j0,
                alpha: int = 1, C: float = math.e,
                table: ActivityTable | None = None) -> MayerBound:
    """Rigorous bound A/(1-B) on |two_point| by exhaustive polymer sums."""
    table = table or ActivityTable(graph, params)
    _acts, _k2, A, B = _series_data(table, i0, j0, alpha, C)
    if B < 1.0:
        return MayerBound(A, B, A / (1.0 - B), True)
    return MayerBound(A, B, float("inf"), False)


# -- the combinatorial exponential identity -----------------------------------


def exp_partition_identity_check(f_values, N_max: int = 6):
    """Compare, degree by degree, the partition sum against the exponential.

    f_values[n-1] is f(n).  Left side at size N: (1/N!) times the sum over
    set partitions of {1..N} of the product of f over block sizes (literal
    enumeration).  Right side: the coefficient of x^N in exp(sum_n f(n)
    x^n / n!), via polynomial arithmetic.  Returns (equal, lhs, rhs).
    """
    f = {n: Fraction(v) for n, v in enumerate(f_values, start=1)}

    def fval(n):
        return f.get(n, Fraction(0))

    lhs = []
    for N in range(1, N_max + 1):
        total = Fraction(0)
        for part in set_partitions(range(N)):
            prod = Fraction(1)
            for block in part:
                prod *= fval(len(block))
                if prod == 0:
                    break
            total += prod
        lhs.append(total / math.factorial(N))

    # exp of the polynomial g(x) = sum f(n)/n! x^n, truncated at degree N_max
    g = [Fraction(0)] * (N_max + 1)
    for n in range(1, N_max + 1):
        g[n] = fval(n) / math.factorial(n)
    expg = [Fraction(0)] * (N_max + 1)
    expg[0] = Fraction(1)
    power = list(expg)
    for M in range(1, N_max + 1):
        nxt = [Fraction(0)] * (N_max + 1)
        for a in range(N_max + 1):
            if power[a] == 0:
                continue
            for b in range(1, N_max + 1 - a):
                nxt[a + b] += power[a] * g[b]
        power = nxt
        inv = Fraction(1, math.factorial(M))
        for d in range(N_max + 1):
            expg[d] += power[d] * inv
    rhs = expg[1:N_max + 1]
    return lhs == rhs, lhs, rhs
