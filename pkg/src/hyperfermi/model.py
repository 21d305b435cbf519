"""The fermionic lattice model on a weighted graph.

Builds the edge interaction W_ij = beta J_ij (-1 - psi_i.psi_j + z_i z_j),
the site weight nu_j = exp(-eps_j (z_j - 1)) / z_j, and evaluates partition
functions, two-point functions and source generating functions by exact
Berezin integration.  Sites are integrated out as soon as every factor
touching them has been multiplied in, which keeps intermediate elements
supported on a small frontier (a transfer-matrix sweep on chains).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .grassmann import (FIELD, SOURCE, AlgebraContext, GrassmannElement,
                        berezin, derivative, exp_even, gmul, make_algebra,
                        series_apply, symmetric_product)
from .graphs import WeightedGraph
from .rational import half_binomial, neg_half_binomial


@dataclass(frozen=True)
class ModelParams:
    beta: Fraction
    m: int
    mode: str = "exact"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.mode == "exact":
            object.__setattr__(self, "beta", Fraction(self.beta))
        elif self.mode == "float":
            object.__setattr__(self, "beta", float(self.beta))
        else:
            raise ValueError("mode must be 'exact' or 'float'")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


class H0Model:
    """Caches the per-site and per-edge elements of one (graph, params) pair."""

    def __init__(self, graph: WeightedGraph, params: ModelParams,
                 with_sources: bool = False):
        self.graph = graph
        self.params = params
        self.ctx = make_algebra(graph.n, params.m, with_sources=with_sources,
                                mode=params.mode)
        self._z: dict = {}
        self._inv_z: dict = {}
        self._nu: dict = {}
        self._edge_exp: dict = {}
        self._site_obs: dict = {}
        m = params.m
        self._half = [half_binomial(k) for k in range(m + 1)]
        self._neg_half = [neg_half_binomial(k) for k in range(m + 1)]
        if params.mode == "float":
            self._half = [float(c) for c in self._half]
            self._neg_half = [float(c) for c in self._neg_half]

    # -- cached building blocks -----------------------------------------

    def site(self, v) -> int:
        return self.graph.site_index(v)

    def z(self, v) -> GrassmannElement:
        if v not in self._z:
            s = symmetric_product(self.ctx, self.site(v), self.site(v))
            self._z[v] = series_apply(self._half, s)
        return self._z[v]

    def inv_z(self, v) -> GrassmannElement:
        if v not in self._inv_z:
            s = symmetric_product(self.ctx, self.site(v), self.site(v))
            self._inv_z[v] = series_apply(self._neg_half, s)
        return self._inv_z[v]

    def nu(self, v) -> GrassmannElement:
        if v not in self._nu:
            eps = self.graph.eps[v]
            if self.params.mode == "float":
                eps = float(eps)
            exponent = (self.z(v) - 1) * (-eps)
            self._nu[v] = self.inv_z(v) * exp_even(exponent)
        return self._nu[v]

    def W_edge(self, i, j) -> GrassmannElement:
        """beta J_ij (-1 - psi_i.psi_j + z_i z_j); even with zero scalar part."""
        Jw = self.graph.weight(i, j)
        coef = self.params.beta * (Jw if self.params.mode == "exact" else float(Jw))
        cross = symmetric_product(self.ctx, self.site(i), self.site(j))
        zz = self.z(i) * self.z(j)
        return (zz - cross - 1) * coef

    def exp_minus_W_edge(self, i, j) -> GrassmannElement:
        key = (min(i, j), max(i, j))
        if key not in self._edge_exp:
            self._edge_exp[key] = exp_even(-self.W_edge(i, j))
        return self._edge_exp[key]

    def W(self, Y) -> GrassmannElement:
        """Sum of W_ij over edges with both endpoints in Y."""
        acc = self.ctx.zero()
        for (i, j, _w) in self.graph.edges:
            if i in Y and j in Y:
                acc = acc + self.W_edge(i, j)
        return acc

    def observable(self, i0, j0, alpha) -> GrassmannElement:
        key = (i0, j0, alpha)
        if key not in self._site_obs:
            self._site_obs[key] = gmul(self.ctx.psibar(self.site(i0), alpha),
                                       self.ctx.psi(self.site(j0), alpha))
        return self._site_obs[key]

    # -- integration ------------------------------------------------------

    def integrate(self, Y=None, observable: GrassmannElement | None = None,
                  prefactor: GrassmannElement | None = None,
                  source_degree_cap: int | None = None):
        """nu-weighted Berezin integral of exp(-W(Y)) over the sites Y,
        optionally against an observable and an extra even prefactor.

        Sites are eliminated greedily: a site is integrated as soon as all
        edge factors incident to it inside Y have been multiplied.
        """
        g = self.graph
        sites = sorted(g.vertices if Y is None else Y)
        order = {v: k for k, v in enumerate(sites)}
        in_y = set(sites)
        edges = [(i, j) for (i, j, _w) in g.edges if i in in_y and j in in_y]
        # step at which an edge factor enters: when its later endpoint comes up
        entering: dict = {k: [] for k in range(len(sites))}
        last_needed = {v: order[v] for v in sites}
        for (i, j) in edges:
            step = max(order[i], order[j])
            entering[step].append((i, j))
            last_needed[i] = max(last_needed[i], step)
            last_needed[j] = max(last_needed[j], step)
        acc = self.ctx.one() if observable is None else observable
        if prefactor is not None:
            acc = acc * prefactor
        cap = source_degree_cap
        smask = self.ctx.source_mask if cap is not None else 0
        for step, v in enumerate(sites):
            for (i, j) in entering[step]:
                acc = acc * self.exp_minus_W_edge(i, j)
                if cap is not None:
                    acc = _prune_source_degree(acc, smask, cap)
            for w in sites:
                if last_needed.get(w) == step:
                    acc = acc * self.nu(w)
                    acc = berezin(acc, [self.site(w)])
                    last_needed[w] = None
        return acc

    def partition_function(self, Y=None):
        """Exact normalisation over the sites Y (default: the whole graph)."""
        value = self.integrate(Y).scalar_part()
        return value

    def two_point(self, i0, j0, alpha: int = 1):
        Z = self.partition_function()
        if Z == 0:
            raise ZeroDivisionError("degenerate normalisation: Z = 0")
        num = self.integrate(observable=self.observable(i0, j0, alpha))
        return num.scalar_part() / Z


def _prune_source_degree(x: GrassmannElement, smask: int, cap: int) -> GrassmannElement:
    terms = {m: c for m, c in x.terms.items() if (m & smask).bit_count() <= cap}
    if len(terms) == len(x.terms):
        return x
    return x.ctx._make(terms)


# -- module-level operations matching the documented surfaces ---------------

def build_W(graph: WeightedGraph, params: ModelParams, Y) -> GrassmannElement:
    return H0Model(graph, params).W(Y)


def build_nu(graph: WeightedGraph, params: ModelParams, j) -> GrassmannElement:
    return H0Model(graph, params).nu(j)


def partition_function(graph: WeightedGraph, params: ModelParams):
    return H0Model(graph, params).partition_function()


def two_point(graph: WeightedGraph, params: ModelParams, i0, j0, alpha: int = 1):
    return H0Model(graph, params).two_point(i0, j0, alpha)


def generating_function(graph: WeightedGraph, params: ModelParams,
                        rho_degree: int = 2) -> GrassmannElement:
    """Source generating function, truncated at the given source degree.

    Returns the element of the source algebra obtained by integrating all
    field generators of nu^Lambda exp(-W) exp((psi.rho)); its degree-0
    part is the partition function.
    """
    model = H0Model(graph, params, with_sources=True)
    ctx = model.ctx
    src = ctx.one()
    for v in graph.vertices:
        s = model.site(v)
        for color in range(1, params.m + 1):
            src = src * (ctx.one() + gmul(ctx.psibar(s, color), ctx.rho(s, color)))
            src = src * (ctx.one() + gmul(ctx.rhobar(s, color), ctx.psi(s, color)))
        src = _prune_source_degree(src, ctx.source_mask, rho_degree)
    return model.integrate(prefactor=src, source_degree_cap=rho_degree)


def two_point_from_sources(graph: WeightedGraph, params: ModelParams,
                           i0, j0, alpha: int = 1, rho_degree: int = 2):
    """Extract the two-point function from log of the generating function.

    The correlation is the mixed source derivative of log Z(rho) at rho=0,
    taken first in rho[i0,alpha] and then in rhobar[j0,alpha] (left
    derivatives); the order is pinned by agreement with the direct route.
    """
    from .grassmann import log_nilpotent
    Zr = generating_function(graph, params, rho_degree)
    Z0 = Zr.scalar_part()
    if Z0 == 0:
        raise ZeroDivisionError("degenerate normalisation: Z = 0")
    X = Zr * (Fraction(1) / Z0 if params.mode == "exact" else 1.0 / Z0) - 1
    L = log_nilpotent(X)
    ctx = Zr.ctx
    s_i0 = graph.site_index(i0)
    s_j0 = graph.site_index(j0)
    d1 = derivative(L, ctx.gen_index(SOURCE, s_i0, alpha, False))
    d2 = derivative(d1, ctx.gen_index(SOURCE, s_j0, alpha, True))
    return d2.scalar_part()


def source_linear_coefficients(graph: WeightedGraph, params: ModelParams,
                               rho_degree: int = 2):
    """All degree-1 source coefficients of the generating function
    (these vanish by symmetry; exposed for verification)."""
    Zr = generating_function(graph, params, rho_degree)
    return {m: c for m, c in Zr.terms.items() if m.bit_count() == 1}


@dataclass(frozen=True)
class TField:
    """Horospherical field assignment, one real value per vertex."""
    t: dict

    def __post_init__(self):
        for v, val in self.t.items():
            if not math.isfinite(float(val)):
                raise ValueError("t field must be finite at vertex %r" % (v,))


def build_D_matrix(graph: WeightedGraph, params: ModelParams, t: TField):
    """The vertex matrix with off-diagonal -beta J_ij and diagonal
    beta sum_i J_ij e^(t_i - t_j) + eps_j e^(-t_j), as a nested float list."""
    import numpy as np
    n = graph.n
    beta = float(params.beta)
    tv = [float(t.t.get(v, 0.0)) for v in graph.vertices]
    D = np.zeros((n, n))
    for (i, j, w) in graph.edges:
        a, b = graph.site_index(i), graph.site_index(j)
        D[a, b] = -beta * float(w)
        D[b, a] = -beta * float(w)
    for j, v in enumerate(graph.vertices):
        diag = 0.0
        for (u, w) in graph.neighbors(v):
            iu = graph.site_index(u)
            diag += beta * float(w) * math.exp(tv[iu] - tv[j])
        diag += float(graph.eps[v]) * math.exp(-tv[j])
        D[j, j] = diag
    return D


def d_matrix_positivity(graph: WeightedGraph, params: ModelParams, t: TField,
                        tol: float = 1e-10) -> dict:
    """Positivity certificate for the D matrix.

    The matrix is congruent, via the positive diagonal e^(t/2), to the
    symmetric matrix e^(t/2) D e^(t/2) = beta L(t) + eps, where L(t) is a
    positive semidefinite weighted Laplacian; its smallest eigenvalue is
    the reported floor.  The similarity-symmetrised variant
    sym(e^(t/2) D e^(-t/2)) is also reported: it can fail positivity for
    moderate t fields even though D itself has positive spectrum, so it is
    informational only.
    """
    import numpy as np
    D = build_D_matrix(graph, params, t)
    tv = np.array([float(t.t.get(v, 0.0)) for v in graph.vertices])
    E = np.diag(np.exp(tv / 2.0))
    Einv = np.diag(np.exp(-tv / 2.0))
    congruent = E @ D @ E
    congruent = (congruent + congruent.T) / 2.0
    eig_congruent = np.linalg.eigvalsh(congruent)
    sim = E @ D @ Einv
    sym_sim = (sim + sim.T) / 2.0
    eig_sym_sim = np.linalg.eigvalsh(sym_sim)
    det_D = float(np.linalg.det(D))
    floor = float(eig_congruent.min())
    return {
        "eig_floor_congruence": floor,
        "eig_floor_similarity_sym": float(eig_sym_sim.min()),
        "det_D": det_D,
        "positive": bool(floor > tol and det_D > 0.0),
    }
