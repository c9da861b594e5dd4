"""Graph Laplacians, coboundary calculus, and the pullback commutation demo.

Three operators share one weight matrix: the unnormalized Laplacian
D - W, the symmetric normalization I - D^{-1/2} W D^{-1/2}, and the
random-walk form I - D^{-1} W.  Zero-degree vertices are their own
connected components; under the default policy their diagonal entries in
the normalized forms are set to 0 so the nullity still counts components.

The coboundary half of the module works on unweighted 1-skeletons: a
0-cochain is a vertex array, a 1-cochain an array over canonically
oriented edges (u < v) read antisymmetrically.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateDegreeError, InputError

__all__ = [
    "WeightedGraphMatrices",
    "LaplacianOperator",
    "build_laplacian",
    "coboundary",
    "coboundary_adjoint",
    "pullback_zero_cochain",
    "pullback_one_cochain",
    "noncommutativity_witness",
    "UnionFind",
    "component_labels",
    "export_coo",
]

KINDS = ("unnormalized", "symmetric", "random_walk")


@dataclass
class WeightedGraphMatrices:
    """Symmetric non-negative weights with their degree vector."""

    weights: sp.csr_matrix
    degrees: np.ndarray

    @classmethod
    def from_weights(cls, weights, tol=0.0):
        W = sp.csr_matrix(weights, dtype=float)
        if W.shape[0] != W.shape[1]:
            raise InputError("weight matrix must be square")
        if W.diagonal().any():
            raise InputError("weight matrix must have a zero diagonal")
        asym = abs(W - W.T)
        if asym.nnz and asym.max() > tol:
            raise InputError("weight matrix must be symmetric")
        if W.nnz and W.data.min() < 0:
            raise InputError("weights must be non-negative")
        return cls(weights=W, degrees=np.asarray(W.sum(axis=1)).ravel())

    @property
    def n(self):
        return self.weights.shape[0]

    @property
    def isolated(self):
        return np.flatnonzero(self.degrees == 0.0)


@dataclass
class LaplacianOperator:
    kind: str
    matrix: sp.csr_matrix
    degrees: np.ndarray

    @property
    def n(self):
        return self.matrix.shape[0]

    def __call__(self, x):
        return self.matrix @ x

    def toarray(self):
        return self.matrix.toarray()


def build_laplacian(graph, kind, isolated_policy="zero_diagonal"):
    """Assemble one of the three Laplacians from a weighted graph.

    ``isolated_policy`` controls zero-degree vertices under the normalized
    kinds: "zero_diagonal" (default) zeroes their diagonal entry, "error"
    raises DegenerateDegreeError.
    """
    if kind not in KINDS:
        raise InputError(f"unknown Laplacian kind {kind!r}; expected one of {KINDS}")
    if not isinstance(graph, WeightedGraphMatrices):
        graph = WeightedGraphMatrices.from_weights(graph)
    W, deg = graph.weights, graph.degrees
    n = graph.n
    if kind == "unnormalized":
        L = sp.diags(deg) - W
        return LaplacianOperator(kind=kind, matrix=L.tocsr(), degrees=deg)
    iso = graph.isolated
    if iso.size and isolated_policy == "error":
        raise DegenerateDegreeError(
            f"{iso.size} zero-degree vertex(es) under normalized kind {kind!r}"
        )
    diag = np.ones(n)
    diag[iso] = 0.0  # isolated vertices become exact null directions
    if kind == "symmetric":
        s = np.zeros(n)
        pos = deg > 0
        s[pos] = 1.0 / np.sqrt(deg[pos])
        M = sp.diags(s) @ W @ sp.diags(s)
    else:
        dinv = np.zeros(n)
        pos = deg > 0
        dinv[pos] = 1.0 / deg[pos]
        M = sp.diags(dinv) @ W
    L = sp.diags(diag) - M
    return LaplacianOperator(kind=kind, matrix=L.tocsr(), degrees=deg)


# ---------------------------------------------------------------------------
# Coboundary calculus on unweighted skeletons
# ---------------------------------------------------------------------------


def canonical_edges(edges):
    out = []
    seen = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise InputError("self-loops are not edges of a simplicial 1-skeleton")
        e = (min(u, v), max(u, v))
        if e not in seen:
            seen.add(e)
            out.append(e)
    return np.array(sorted(out), dtype=int).reshape(-1, 2)


def _one_cochain_array(g, edges):
    """Accept an array aligned with canonical edges, or an oriented dict."""
    if isinstance(g, dict):
        arr = np.zeros(len(edges))
        lookup = {(int(u), int(v)): idx for idx, (u, v) in enumerate(edges)}
        for (u, v), val in g.items():
            u, v = int(u), int(v)
            if (v, u) in g and g[(v, u)] != -val:
                raise InputError(f"1-cochain not antisymmetric on edge ({u}, {v})")
            if (u, v) in lookup:
                arr[lookup[(u, v)]] = val
            elif (v, u) in lookup:
                arr[lookup[(v, u)]] = -val
            else:
                raise InputError(f"({u}, {v}) is not an edge of the skeleton")
        return arr
    arr = np.asarray(g, dtype=float)
    if arr.shape != (len(edges),):
        raise InputError("1-cochain length does not match the edge count")
    return arr


def coboundary(f, edges):
    """Difference of a vertex function along each oriented edge (u, v) -> f(v) - f(u)."""
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    f = np.asarray(f, dtype=float)
    return f[edges[:, 1]] - f[edges[:, 0]]


def coboundary_adjoint(g, edges, n_vertices):
    """Adjoint of the coboundary under unit inner products on simplices."""
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    arr = _one_cochain_array(g, edges)
    out = np.zeros(int(n_vertices))
    np.add.at(out, edges[:, 0], -arr)
    np.add.at(out, edges[:, 1], arr)
    return out


def pullback_zero_cochain(vertex_map, f):
    """[p* f](u) = f(p(u)) for a simplicial map given as a vertex array."""
    return np.asarray(f, dtype=float)[np.asarray(vertex_map, dtype=int)]


def pullback_one_cochain(vertex_map, g, edges_src, edges_dst):
    """Pull a 1-cochain back along a simplicial map; edges collapsed to a
    vertex pull back to zero."""
    vm = np.asarray(vertex_map, dtype=int)
    edges_src = np.asarray(edges_src, dtype=int).reshape(-1, 2)
    edges_dst = np.asarray(edges_dst, dtype=int).reshape(-1, 2)
    arr = _one_cochain_array(g, edges_dst)
    lookup = {(int(u), int(v)): idx for idx, (u, v) in enumerate(edges_dst)}
    out = np.zeros(len(edges_src))
    for idx, (u, v) in enumerate(edges_src):
        pu, pv = int(vm[u]), int(vm[v])
        if pu == pv:
            continue
        if (pu, pv) in lookup:
            out[idx] = arr[lookup[(pu, pv)]]
        elif (pv, pu) in lookup:
            out[idx] = -arr[lookup[(pv, pu)]]
        else:
            raise InputError(f"image edge ({pu}, {pv}) missing from target skeleton")
    return out


@dataclass
class WitnessReport:
    adjoint_then_pullback: float
    pullback_then_adjoint: float
    commutes: bool
    coboundary_commutes: bool

    def summary(self):
        return (
            f"adjoint(pullback(f)) at the split vertex = {self.adjoint_then_pullback:g}, "
            f"pullback(adjoint(f)) = {self.pullback_then_adjoint:g}; "
            f"adjoint commutes with pullback: {self.commutes}; "
            f"coboundary commutes with pullback: {self.coboundary_commutes}"
        )


def noncommutativity_witness():
    """Fixed two-complex demonstration that the coboundary adjoint does not
    commute with simplicial pullback, while the coboundary itself does.

    The source is the full triangle on vertices {a, b, c}, the target a
    single edge {A, B}; the map sends a to A and both b, c to B.  For the
    unit 1-cochain f(A, B) = 1 the two evaluation orders at vertex a give
    -2 versus -1.
    """
    edges_tri = canonical_edges([(0, 1), (0, 2), (1, 2)])
    edges_seg = canonical_edges([(0, 1)])
    vmap = np.array([0, 1, 1])  # a -> A, b -> B, c -> B
    f_edge = np.array([1.0])  # value on the oriented edge (A, B)

    pulled = pullback_one_cochain(vmap, f_edge, edges_tri, edges_seg)
    lhs = coboundary_adjoint(pulled, edges_tri, 3)[0]
    rhs = pullback_zero_cochain(vmap, coboundary_adjoint(f_edge, edges_seg, 2))[0]

    commutes_delta = True
    for f0 in np.eye(2):
        left = coboundary(pullback_zero_cochain(vmap, f0), edges_tri)
        right = pullback_one_cochain(vmap, coboundary(f0, edges_seg), edges_tri, edges_seg)
        if not np.array_equal(left, right):
            commutes_delta = False
    return WitnessReport(
        adjoint_then_pullback=float(lhs),
        pullback_then_adjoint=float(rhs),
        commutes=bool(lhs == rhs),
        coboundary_commutes=commutes_delta,
    )


# ---------------------------------------------------------------------------
# Components and export
# ---------------------------------------------------------------------------


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def component_labels(weights):
    """Connected-component labels of a symmetric weight matrix, by union-find."""
    W = sp.csr_matrix(weights)
    uf = UnionFind(W.shape[0])
    coo = W.tocoo()
    for a, b, w in zip(coo.row, coo.col, coo.data):
        if w != 0.0 and a != b:
            uf.union(int(a), int(b))
    roots = [uf.find(i) for i in range(W.shape[0])]
    relabel = {}
    labels = np.empty(W.shape[0], dtype=int)
    for i, r in enumerate(roots):
        labels[i] = relabel.setdefault(r, len(relabel))
    return labels, len(relabel)


def export_coo(matrix, path):
    """Coordinate-triple text dump (row, col, value), one entry per line."""
    coo = sp.coo_matrix(matrix)
    path = Path(path)
    with path.open("w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{int(r)} {int(c)} {repr(float(v))}\n")
    return path
