"""Weighted graphs with exact edge and vertex weights, plus JSON I/O.

The JSON schema is shared by the model, forest and CLI layers:

    {"vertices": [0, 1, 2],
     "edges": [[0, 1, "1/10"], [1, 2, "1"]],
     "eps": {"0": "1/2", "2": "1"}}

Rationals are serialised as "p/q" strings (or bare integers).  A lattice
shorthand {"lattice": {"dim": 1, "length": 6, "J": "nn"}} builds
nearest-neighbour chains; dim 2 adds a "width" field.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .rational import format_rational, parse_rational


class WeightedGraph:
    """Vertex set with symmetric nonnegative edge weights and vertex field.

    Edges are stored once per unordered pair with i < j; zero-weight edges
    are dropped.  Vertices must be distinct integers; algebra site indices
    are positions in the sorted vertex list.
    """

    def __init__(self, vertices, edges=(), eps=None):
        vs = sorted(vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("vertices must be distinct")
        if not vs:
            raise ValueError("graph needs at least one vertex")
        self.vertices = tuple(vs)
        self._pos = {v: i for i, v in enumerate(self.vertices)}
        weights: dict = {}
        for (i, j, w) in edges:
            if i == j:
                raise ValueError("self-loops are not allowed (J_ii = 0)")
            if i not in self._pos or j not in self._pos:
                raise ValueError("edge endpoint not a vertex: (%r, %r)" % (i, j))
            w = Fraction(w)
            if w < 0:
                raise ValueError("edge weights must be >= 0")
            if w == 0:
                continue
            key = (min(i, j), max(i, j))
            if key in weights:
                raise ValueError("duplicate edge %r" % (key,))
            weights[key] = w
        self._weights = dict(sorted(weights.items()))
        self.eps = {v: Fraction(0) for v in self.vertices}
        for v, e in (eps or {}).items():
            v = int(v)
            if v not in self._pos:
                raise ValueError("eps key %r is not a vertex" % (v,))
            e = Fraction(e)
            if e < 0:
                raise ValueError("vertex weights must be >= 0")
            self.eps[v] = e

    # -- structure ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    def site_index(self, v: int) -> int:
        return self._pos[v]

    @property
    def edges(self):
        return [(i, j, w) for (i, j), w in self._weights.items()]

    def weight(self, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        return self._weights.get((min(i, j), max(i, j)), Fraction(0))

    def neighbors(self, v: int):
        out = []
        for (i, j), w in self._weights.items():
            if i == v:
                out.append((j, w))
            elif j == v:
                out.append((i, w))
        return out

    def max_row_sum(self) -> Fraction:
        """sup over vertices of the incident weight sum."""
        best = Fraction(0)
        for v in self.vertices:
            s = sum((w for _, w in self.neighbors(v)), Fraction(0))
            best = max(best, s)
        return best

    def induced(self, subset) -> "WeightedGraph":
        sub = set(subset)
        if not sub <= set(self.vertices):
            raise ValueError("subset contains non-vertices")
        edges = [(i, j, w) for (i, j, w) in self.edges if i in sub and j in sub]
        eps = {v: self.eps[v] for v in sub}
        return WeightedGraph(sorted(sub), edges, eps)

    def laplacian(self, scale: Fraction = Fraction(1)):
        """Dense weighted graph Laplacian (rows/cols in vertex order)."""
        n = self.n
        L = [[Fraction(0)] * n for _ in range(n)]
        for (i, j, w) in self.edges:
            a, b = self._pos[i], self._pos[j]
            sw = scale * w
            L[a][a] += sw
            L[b][b] += sw
            L[a][b] -= sw
            L[b][a] -= sw
        return L

    # -- serialisation -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [[i, j, format_rational(w)] for (i, j, w) in self.edges],
            "eps": {str(v): format_rational(e)
                    for v, e in self.eps.items() if e != 0},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "WeightedGraph":
        if "lattice" in data:
            return cls.from_lattice_dict(data["lattice"])
        vertices = data["vertices"]
        edges = [(int(i), int(j), parse_rational(w))
                 for (i, j, w) in data.get("edges", [])]
        eps = {int(v): parse_rational(e)
               for v, e in data.get("eps", {}).items()}
        return cls(vertices, edges, eps)

    @classmethod
    def from_json_file(cls, path) -> "WeightedGraph":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    # -- constructors --------------------------------------------------------

    @classmethod
    def path(cls, length: int, J=Fraction(1), eps=Fraction(0)) -> "WeightedGraph":
        if length < 1:
            raise ValueError("length must be >= 1")
        edges = [(i, i + 1, Fraction(J)) for i in range(length - 1)]
        return cls(range(length), edges, {v: Fraction(eps) for v in range(length)})

    @classmethod
    def grid(cls, rows: int, cols: int, J=Fraction(1), eps=Fraction(0)) -> "WeightedGraph":
        if rows < 1 or cols < 1:
            raise ValueError("grid dimensions must be >= 1")
        def vid(r, c):
            return r * cols + c
        edges = []
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    edges.append((vid(r, c), vid(r, c + 1), Fraction(J)))
                if r + 1 < rows:
                    edges.append((vid(r, c), vid(r + 1, c), Fraction(J)))
        n = rows * cols
        return cls(range(n), edges, {v: Fraction(eps) for v in range(n)})

    @classmethod
    def complete(cls, n: int, J=Fraction(1), eps=Fraction(0)) -> "WeightedGraph":
        edges = [(i, j, Fraction(J)) for i in range(n) for j in range(i + 1, n)]
        return cls(range(n), edges, {v: Fraction(eps) for v in range(n)})

    @classmethod
    def from_lattice_dict(cls, spec: dict) -> "WeightedGraph":
        dim = int(spec.get("dim", 1))
        if spec.get("J", "nn") != "nn":
            raise ValueError("only nearest-neighbour lattice shorthand is supported")
        if dim == 1:
            return cls.path(int(spec["length"]))
        if dim == 2:
            return cls.grid(int(spec["length"]), int(spec["width"]))
        raise ValueError("lattice shorthand supports dim 1 or 2")

    @classmethod
    def from_shorthand(cls, text: str) -> "WeightedGraph":
        """Parse "1d:L" or "2d:LxW" nearest-neighbour lattices."""
        kind, _, size = text.partition(":")
        if kind == "1d":
            return cls.path(int(size))
        if kind == "2d":
            l, _, w = size.partition("x")
            return cls.grid(int(l), int(w))
        raise ValueError("unknown lattice shorthand %r" % text)

    def __repr__(self):
        return "WeightedGraph(n=%d, edges=%d)" % (self.n, len(self._weights))
