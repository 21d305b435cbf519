"""Spanning forests, weighted tree sums and the arboreal-gas duality.

The arboreal gas on a weighted graph assigns each spanning forest F the
weight prod_{e in F} beta_e times prod_{T tree of F} (1 + sum_{v in T}
eps_v).  Its partition function coincides exactly with the m = 1 fermionic
partition function with edge weights beta_e, which this module evaluates
through two independent routes: direct forest enumeration and Berezin
integration of the quartic-perturbed bilinear form.

Exact determinants use fraction-free Bareiss elimination so that the
matrix-tree and rooted-forest identities can be checked with rationals.
"""

from __future__ import annotations

from fractions import Fraction

from .grassmann import berezin, exp_even, gmul, make_algebra
from .graphs import WeightedGraph


class Forest:
    """An acyclic edge subset with its derived tree decomposition."""

    def __init__(self, graph: WeightedGraph, edges):
        self.graph = graph
        self.edges = tuple(edges)
        parent = {v: v for v in graph.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (i, j, _w) in self.edges:
            ri, rj = find(i), find(j)
            if ri == rj:
                raise ValueError("edge set contains a cycle")
            parent[ri] = rj
        groups: dict = {}
        for v in graph.vertices:
            groups.setdefault(find(v), []).append(v)
        self.trees = tuple(frozenset(g) for g in groups.values())

    def arboreal_weight(self) -> Fraction:
        w = Fraction(1)
        for (_i, _j, we) in self.edges:
            w *= we
        for tree in self.trees:
            w *= 1 + sum((self.graph.eps[v] for v in tree), Fraction(0))
        return w

    def __repr__(self):
        return "Forest(edges=%r)" % ([(i, j) for (i, j, _w) in self.edges],)


def enumerate_forests(graph: WeightedGraph, max_edges: int = 20):
    """Yield every acyclic edge subset exactly once.

    Recursive include/exclude over the edge list with union-find rollback;
    cycles are pruned as soon as both endpoints share a component.
    """
    edges = graph.edges
    if len(edges) > max_edges:
        raise ValueError("forest enumeration capped at %d edges" % max_edges)
    parent = {v: v for v in graph.vertices}
    size = {v: 1 for v in graph.vertices}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    chosen: list = []

    def rec(idx: int):
        if idx == len(edges):
            yield Forest(graph, chosen)
            return
        yield from rec(idx + 1)
        (i, j, w) = edges[idx]
        ri, rj = find(i), find(j)
        if ri != rj:
            if size[ri] < size[rj]:
                ri, rj = rj, ri
            parent[rj] = ri
            size[ri] += size[rj]
            chosen.append(edges[idx])
            yield from rec(idx + 1)
            chosen.pop()
            parent[rj] = rj
            size[ri] -= size[rj]

    yield from rec(0)


def arboreal_Z(graph: WeightedGraph) -> Fraction:
    """Arboreal-gas partition function by exhaustive forest enumeration."""
    total = Fraction(0)
    for forest in enumerate_forests(graph):
        total += forest.arboreal_weight()
    return total


def h02_partition(graph: WeightedGraph) -> Fraction:
    """m = 1 fermionic partition function via the bilinear-plus-quartic form.

    Integrates exp(-(psibar, (L + 1 + eps) psi)) times the product over
    edges of (1 - beta_e q_i q_j) with q = psibar psi, where L is the
    weighted graph Laplacian.  Independent of the site-factorised route.
    """
    n = graph.n
    ctx = make_algebra(n, 1)
    L = graph.laplacian()
    # M = L + I + diag(eps)
    bilinear = ctx.zero()
    for a in range(n):
        for b in range(n):
            coef = L[a][b]
            if a == b:
                coef = coef + 1 + graph.eps[graph.vertices[a]]
            if coef:
                bilinear = bilinear + gmul(ctx.psibar(a, 1), ctx.psi(b, 1)) * coef
    acc = exp_even(-bilinear)
    for (i, j, w) in graph.edges:
        a, b = graph.site_index(i), graph.site_index(j)
        quart = gmul(gmul(ctx.psibar(a, 1), ctx.psi(a, 1)),
                     gmul(ctx.psibar(b, 1), ctx.psi(b, 1)))
        acc = acc * (ctx.one() - quart * w)
    return berezin(acc, range(n)).scalar_part()


def bareiss_determinant(matrix) -> Fraction:
    """Exact determinant by fraction-free Bareiss elimination."""
    a = [list(map(Fraction, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return Fraction(1)
    for row in a:
        if len(row) != n:
            raise ValueError("matrix must be square")
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            a[i][k] = Fraction(0)
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def kirchhoff_tree_sum(graph: WeightedGraph, Y=None) -> Fraction:
    """Weighted spanning-tree sum of the induced subgraph on Y, via any
    cofactor of the weighted Laplacian; zero when Y is disconnected."""
    sub = graph if Y is None else graph.induced(Y)
    if sub.n == 1:
        return Fraction(1)
    L = sub.laplacian()
    minor = [[L[i][j] for j in range(1, sub.n)] for i in range(1, sub.n)]
    return bareiss_determinant(minor)


def spanning_tree_sum_enumeration(graph: WeightedGraph, Y=None) -> Fraction:
    """Brute-force oracle: sum edge-weight products over spanning trees."""
    sub = graph if Y is None else graph.induced(Y)
    total = Fraction(0)
    for forest in enumerate_forests(sub):
        if len(forest.trees) == 1:
            w = Fraction(1)
            for (_i, _j, we) in forest.edges:
                w *= we
            total += w
    return total


def rooted_forest_det_check(graph: WeightedGraph, d):
    """Check det(L + diag(d)) against the rooted-forest expansion.

    The right side sums over forests the edge-weight product times, per
    tree, the sum of d over its vertices (one root choice per tree).
    Returns (equal, determinant, forest_sum).
    """
    n = graph.n
    L = graph.laplacian()
    dd = {v: Fraction(d[v]) for v in graph.vertices}
    M = [[L[i][j] + (dd[graph.vertices[i]] if i == j else 0)
          for j in range(n)] for i in range(n)]
    det = bareiss_determinant(M)
    total = Fraction(0)
    for forest in enumerate_forests(graph):
        w = Fraction(1)
        for (_i, _j, we) in forest.edges:
            w *= we
        for tree in forest.trees:
            w *= sum((dd[v] for v in tree), Fraction(0))
            if w == 0:
                break
        total += w
    return det == total, det, total


def duality_check(graph: WeightedGraph):
    """Exact equality of the arboreal and fermionic partition functions.

    Returns (equal, arboreal_value, fermionic_value).
    """
    za = arboreal_Z(graph)
    zh = h02_partition(graph)
    return za == zh, za, zh
