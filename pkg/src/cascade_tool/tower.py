"""Cover towers, nerve graphs, kernel partitions of unity, and pullbacks.

A cover tower assigns to each tree level i the cover by balls of radius
ratio * 2**(i+1) around the level's points; the tree's one-level ancestor
assignment is the refinement map between consecutive scales.  The nerve
graph at a scale has one vertex per cover set and density-aware edge
weights: the product of the two endpoint subtree populations with a
radial kernel evaluated at the centers (bandwidth twice the partition
radius r_i = ratio * 2**i).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .covertree import descendant_counts_at_level
from .errors import DomainError, InputError
from .geometry import tent_profile

__all__ = [
    "CoverTower",
    "NerveGraph",
    "PartitionOfUnity",
    "tower_from_cover_tree",
    "build_nerve_graph",
    "pou_for_scale",
    "pou_eval",
    "extend_and_pull_back",
    "pullback_vertex_function",
    "refinement_matrix",
]


@dataclass
class CoverTower:
    tree: object
    ratio: float
    scales: list  # ascending; larger level = coarser cover
    centers: dict  # level -> sorted ids of C_level
    refinement: dict  # level -> array, cover-set index at level -> index at level+1

    def radius(self, level):
        return self.ratio * 2.0 ** (level + 1)

    def pou_bandwidth(self, level):
        return self.ratio * 2.0 ** level

    def n_sets(self, level):
        return len(self.centers[level])


@dataclass
class NerveGraph:
    scale: int
    center_ids: np.ndarray
    radius: float
    bandwidth: float
    counts: np.ndarray
    weights: sp.csr_matrix

    @property
    def n(self):
        return len(self.center_ids)

    @property
    def isolated(self):
        deg = np.asarray(self.weights.sum(axis=1)).ravel()
        return np.flatnonzero(deg == 0.0)


@dataclass
class PartitionOfUnity:
    """Kernel partition of unity at one tower scale: each center carries the
    kernel with bandwidth r_i, renormalized over the covering centers."""

    center_ids: np.ndarray
    center_coords: np.ndarray
    bandwidth: float
    profile: object
    rescale: float = 1.0


def tower_from_cover_tree(tree, ratio=1.0, scales=None):
    """Assemble the cover tower of a tree for a ball-radius ratio >= 1.

    ``scales`` selects a contiguous level range (lo, hi); default is every
    tree level.  Construction certifies the refinement containment bound
    d(x, parent) + r(level) <= r(level + 1) on every refinement edge.
    """
    if ratio < 1.0:
        raise InputError(f"ratio must be >= 1, got {ratio}")
    if scales is None:
        lo, hi = tree.bottom_level, tree.top_level
    else:
        lo, hi = int(scales[0]), int(scales[1])
        if lo < tree.bottom_level or hi > tree.top_level or lo > hi:
            raise InputError(
                f"requested levels [{lo}, {hi}] not contained in "
                f"[{tree.bottom_level}, {tree.top_level}]"
            )
    levels = list(range(lo, hi + 1))
    centers = {j: tree.level_members(j) for j in levels}
    refinement = {}
    for j in levels[:-1]:
        ids = centers[j]
        anc = tree.ancestor_table(j + 1)[ids]
        up = centers[j + 1]
        pos = np.searchsorted(up, anc)
        if not np.array_equal(up[pos], anc):
            raise InputError(f"refinement target missing at level {j + 1}")
        refinement[j] = pos
        # containment certificate for the cover-tower property
        d = np.linalg.norm(tree.points[ids] - tree.points[anc], axis=1) \
            if tree.metric is None else \
            np.array([tree.metric(tree.points[a], tree.points[b]) for a, b in zip(ids, anc)])
        r_fine = ratio * 2.0 ** (j + 1)
        r_coarse = ratio * 2.0 ** (j + 2)
        bad = np.flatnonzero(d + r_fine > r_coarse)
        if bad.size:
            x = int(ids[bad[0]])
            raise InputError(
                f"containment violated at level {j}: point {x} sits "
                f"{d[bad[0]]:.6g} from its parent, over the {r_coarse - r_fine:.6g} budget"
            )
    return CoverTower(tree=tree, ratio=float(ratio), scales=levels,
                      centers=centers, refinement=refinement)


def build_nerve_graph(tower, level, profile=tent_profile):
    """Weighted 1-skeleton of the nerve at one scale.

    Edge weight between cover sets k and j is
    count(k) * count(j) * profile(d(center_k, center_j) / bandwidth) with
    bandwidth 2 * r_i; the weight is positive exactly when the center
    distance is below the bandwidth.  Zero-degree vertices are kept (they
    are genuine connected components) and exposed via ``isolated``.
    """
    tree = tower.tree
    if level not in tower.centers:
        raise InputError(f"scale {level} not present in tower")
    ids, counts = descendant_counts_at_level(tree, level)
    coords = tree.points[ids]
    bandwidth = 2.0 * tower.pou_bandwidth(level)
    m = len(ids)
    if tree.metric is None and coords.shape[0] > 1:
        from scipy.spatial import cKDTree

        pairs = cKDTree(coords).query_pairs(r=bandwidth, output_type="ndarray")
        if len(pairs):
            a, b = pairs[:, 0], pairs[:, 1]
            d = np.linalg.norm(coords[a] - coords[b], axis=1)
        else:
            a = b = np.zeros(0, dtype=int)
            d = np.zeros(0)
    else:
        iu = np.triu_indices(m, k=1)
        a, b = iu
        if tree.metric is None:
            d = np.linalg.norm(coords[a] - coords[b], axis=1)
        else:
            d = np.array([tree.metric(coords[i], coords[j]) for i, j in zip(a, b)])
        keep = d <= bandwidth
        a, b, d = a[keep], b[keep], d[keep]
    w = counts[a] * counts[b] * np.asarray(profile(d / bandwidth), dtype=float)
    pos = w > 0.0
    a, b, w = a[pos], b[pos], w[pos]
    weights = sp.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([a, b]), np.concatenate([b, a]))),
        shape=(m, m),
    ).tocsr()
    return NerveGraph(
        scale=int(level),
        center_ids=ids,
        radius=tower.radius(level),
        bandwidth=bandwidth,
        counts=counts.astype(float),
        weights=weights,
    )


def pou_for_scale(tower, level, profile=tent_profile):
    if level not in tower.centers:
        raise InputError(f"scale {level} not present in tower")
    ids = tower.centers[level]
    return PartitionOfUnity(
        center_ids=ids,
        center_coords=tower.tree.points[ids],
        bandwidth=tower.pou_bandwidth(level),
        profile=profile,
        rescale=tower.tree.rescale,
    )


def _pou_raw(pou, queries):
    queries = np.atleast_2d(np.asarray(queries, dtype=float)) * pou.rescale
    d = np.linalg.norm(queries[:, None, :] - pou.center_coords[None, :, :], axis=2)
    k = np.asarray(pou.profile(d / pou.bandwidth), dtype=float)
    total = k.sum(axis=1)
    return k, total


def pou_matrix(pou, queries):
    """Barycentric coordinates for many query points at once.

    Returns (coords, uncovered): rows of ``coords`` sum to 1 where covered;
    ``uncovered`` flags rows where every kernel vanished.
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    n_q, n_c = queries.shape[0], len(pou.center_ids)
    chunk = max(1, int(2e7) // max(n_c, 1))
    coords = np.empty((n_q, n_c))
    uncovered = np.zeros(n_q, dtype=bool)
    for s in range(0, n_q, chunk):
        k, total = _pou_raw(pou, queries[s:s + chunk])
        bad = total == 0.0
        safe = np.where(bad, 1.0, total)
        coords[s:s + chunk] = k / safe[:, None]
        uncovered[s:s + chunk] = bad
    return coords, uncovered


def pou_eval(pou, y):
    """Barycentric coordinate vector of one query point; raises DomainError
    when no center covers it."""
    coords, uncovered = pou_matrix(pou, np.asarray(y, dtype=float)[None, :])
    if uncovered[0]:
        raise DomainError("query point is outside the support of every center kernel")
    return coords[0]


@dataclass
class Extension:
    values: np.ndarray
    uncovered: np.ndarray  # indices of query points no kernel reaches

    @property
    def ok(self):
        return self.uncovered.size == 0


def extend_and_pull_back(f, pou, queries):
    """Extend a vertex function over the covered region and sample it.

    Values are sum_x phi_x(y) f(x); uncovered query points get NaN and are
    listed in the result.
    """
    f = np.asarray(f, dtype=float)
    if f.shape[0] != len(pou.center_ids):
        raise InputError("vertex function length does not match the scale's cover")
    coords, uncovered = pou_matrix(pou, queries)
    values = coords @ f
    values[uncovered] = np.nan
    return Extension(values=values, uncovered=np.flatnonzero(uncovered))


def refinement_matrix(p_map, n_coarse):
    """Sparse 0/1 matrix carrying coarse vertex functions to fine vertices
    by composition with the refinement map (one 1 per row)."""
    p_map = np.asarray(p_map, dtype=int)
    n_fine = len(p_map)
    if p_map.size and (p_map.min() < 0 or p_map.max() >= n_coarse):
        raise InputError("refinement map targets out of range")
    return sp.csr_matrix(
        (np.ones(n_fine), (np.arange(n_fine), p_map)), shape=(n_fine, n_coarse)
    )


def pullback_vertex_function(p_map, f, n_coarse=None):
    """Compose a coarse vertex function with a refinement map."""
    f = np.asarray(f, dtype=float)
    n_coarse = f.shape[0] if n_coarse is None else n_coarse
    p_map = np.asarray(p_map, dtype=int)
    if p_map.size and (p_map.min() < 0 or p_map.max() >= n_coarse):
        raise InputError("refinement map targets out of range")
    return f[p_map]
