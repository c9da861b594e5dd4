"""Dyadic cover trees: construction, queries, and invariant verification.

A cover tree here is a leveled tree on the dataset points.  Level sets
C_j grow as j decreases (nesting), every point has a unique ancestor in
each higher level within the dyadic distance bound (cover), and points
sharing a level are more than 2**j apart (separation).  Levels are plain
integers, so radii like 2**(j+1) may be fractional for negative j.

Construction is sequential single-point insertion in input-id order;
candidate parents are chosen nearest-first with ties broken by smallest
point id, which makes the whole structure a pure function of the input.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .geometry import PointCloud

__all__ = [
    "CoverTree",
    "InvariantReport",
    "build_cover_tree",
    "verify_invariants",
    "grandparent",
    "descendant_count",
    "descendant_counts_at_level",
]


@dataclass
class CoverTree:
    """Leveled tree over a point cloud.

    Fields
    ------
    points : ndarray
        Coordinates used for all tree distances (the input cloud scaled by
        ``rescale``); read-only.
    entry_level : ndarray of int
        Highest level at which each point appears; a point belongs to C_j
        exactly when entry_level >= j.  The root's entry is ``top_level``.
    parent_of : ndarray of int
        Parent point id at ``entry_level + 1`` (self for the root).
    """

    points: np.ndarray
    entry_level: np.ndarray
    parent_of: np.ndarray
    root: int
    top_level: int
    bottom_level: int
    rescale: float = 1.0
    metric: object = None
    _anc_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.points.shape[0]

    def levels(self):
        return range(self.bottom_level, self.top_level + 1)

    def level_members(self, j):
        """Sorted ids of C_j."""
        if j < self.bottom_level or j > self.top_level:
            raise InputError(f"level {j} outside [{self.bottom_level}, {self.top_level}]")
        return np.flatnonzero(self.entry_level >= j)

    def level_sizes(self):
        return {j: int(np.count_nonzero(self.entry_level >= j)) for j in self.levels()}

    def _dist_rows(self, p, ids):
        if self.metric is None:
            return np.linalg.norm(self.points[ids] - p, axis=1)
        return np.array([self.metric(p, self.points[i]) for i in ids])

    def ancestor_table(self, j):
        """Array mapping every point id to its unique ancestor in C_j."""
        if j < self.bottom_level or j > self.top_level:
            raise InputError(f"level {j} outside [{self.bottom_level}, {self.top_level}]")
        if j in self._anc_cache:
            return self._anc_cache[j]
        if j == self.bottom_level:
            table = np.arange(self.n)
        else:
            below = self.ancestor_table(j - 1)
            step = np.arange(self.n)
            move = self.entry_level < j  # these ids leave the level set; hop to parent
            step[move] = self.parent_of[move]
            table = step[below]
        table.setflags(write=False)
        self._anc_cache[j] = table
        return table


def _ceil_log2(d):
    s = math.ceil(math.log2(d))
    while 2.0 ** s < d:
        s += 1
    while 2.0 ** (s - 1) >= d:
        s -= 1
    return s


def build_cover_tree(cloud, metric=None, rescale=1.0, max_levels=48):
    """Insert the points of ``cloud`` one by one, maintaining the three
    cover-tree axioms.

    Parameters
    ----------
    cloud : PointCloud
    metric : callable or None
        Two-argument distance on coordinate arrays; None selects the
        vectorized Euclidean path.
    rescale : float
        Optional factor applied to all coordinates before building, for
        aligning dyadic radii with the dataset diameter.  Default is no
        scaling.
    max_levels : int
        Cap on the number of levels kept below the top, guarding against
        near-duplicate points.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    if rescale <= 0:
        raise InputError("rescale must be positive")
    pts = np.array(cloud.points, dtype=float) * float(rescale)
    pts.setflags(write=False)
    n = pts.shape[0]
    if n == 0:
        raise InputError("cannot build a cover tree on an empty cloud")

    entry = np.full(n, np.iinfo(np.int64).min, dtype=np.int64)
    parent = np.arange(n)
    root = 0
    if n == 1:
        entry[0] = 0
        return CoverTree(pts, entry, parent, root, 0, 0, rescale, metric)

    def dists(p, ids):
        if metric is None:
            return np.linalg.norm(pts[np.asarray(ids)] - p, axis=1)
        return np.array([metric(p, pts[i]) for i in ids])

    # children[q][j] lists the points attached to q that enter at level j
    children = {root: {}}
    cur_top = None  # max entry level among non-root points, once any exist

    for pid in range(1, n):
        p = pts[pid]
        d_root = dists(p, [root])[0]
        if d_root == 0.0:
            raise InputError(f"duplicate points: {pid} coincides with {root}")
        start = _ceil_log2(d_root)
        if cur_top is not None:
            start = max(start, cur_top + 1)

        # descend while some candidate stays within 2**i of p
        frames = []
        qi = [root]
        i = start
        floor_level = start - max_levels
        dist_cache = {root: d_root}
        while True:
            cand = list(qi)
            for q in qi:
                cand.extend(children.get(q, {}).get(i - 1, ()))
            new = [c for c in cand if c not in dist_cache]
            if new:
                for c, dv in zip(new, dists(p, new)):
                    dist_cache[c] = dv
            dmin = min(dist_cache[c] for c in cand)
            if dmin == 0.0:
                dup = min(c for c in cand if dist_cache[c] == 0.0)
                raise InputError(f"duplicate points: {pid} coincides with {dup}")
            radius = 2.0 ** i
            if dmin > radius or i <= floor_level:
                break
            frames.append((i, qi))
            qi = [c for c in cand if dist_cache[c] <= radius]
            i -= 1

        placed = False
        for j, qj in reversed(frames):
            radius = 2.0 ** j
            ok = [(dist_cache[q], q) for q in qj if dist_cache[q] <= radius]
            if ok:
                _, q_best = min(ok)
                entry[pid] = j - 1
                parent[pid] = q_best
                children.setdefault(q_best, {}).setdefault(j - 1, []).append(pid)
                if cur_top is None or entry[pid] > cur_top:
                    cur_top = int(entry[pid])
                placed = True
                break
        if not placed:  # cannot happen: the start frame always covers p
            raise InputError(f"failed to place point {pid}")

    top = cur_top + 1
    entry[root] = top
    parent[root] = root

    # finest level: all points present and still separated
    if metric is None:
        from scipy.spatial import cKDTree

        nn = cKDTree(pts).query(pts, k=2)[0][:, 1]
        d_min = float(nn.min())
    else:
        d_min = math.inf
        for a in range(n):
            ds = dists(pts[a], [b for b in range(n) if b != a])
            d_min = min(d_min, float(ds.min()))
    bottom = min(int(entry[1:].min() if n > 1 else 0), _ceil_log2(d_min) - 1)
    bottom = max(bottom, top - max_levels)

    return CoverTree(pts, entry, parent, root, top, bottom, rescale, metric)


def grandparent(tree, x, j):
    """Unique ancestor of point ``x`` in level set C_j."""
    if j > tree.top_level or j < tree.bottom_level:
        raise InputError(f"level {j} outside [{tree.bottom_level}, {tree.top_level}]")
    y = int(x)
    while tree.entry_level[y] < j:
        y = int(tree.parent_of[y])
    return y


def descendant_count(tree, y, j):
    """Number of dataset points whose level-j ancestor is ``y``.

    All points live in the bottom level, so this is the size of y's full
    subtree population at level j (distinct ids, including y itself).
    """
    y = int(y)
    if tree.entry_level[y] < j:
        raise InputError(f"point {y} is not a member of level {j}")
    table = tree.ancestor_table(j)
    return int(np.count_nonzero(table == y))


def descendant_counts_at_level(tree, j, source_level=None):
    """Counts for every member of C_j at once.

    Returns (member_ids, counts) with counts aligned to member_ids.  When
    ``source_level`` is given, only points of that level set are counted.
    """
    members = tree.level_members(j)
    table = tree.ancestor_table(j)
    if source_level is not None:
        mask = tree.entry_level >= source_level
        table = table[mask]
    counts = np.bincount(table, minlength=tree.n)
    return members, counts[members]


# ---------------------------------------------------------------------------
# Invariant verification
# ---------------------------------------------------------------------------


@dataclass
class InvariantReport:
    passed: bool
    violations: list
    checked_levels: tuple

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None

    def summary(self):
        if self.passed:
            lo, hi = self.checked_levels
            return f"pass: nesting, cover, separation hold on levels [{lo}, {hi}]"
        return f"FAIL: {len(self.violations)} violation(s); first: {self.violations[0]}"


def verify_invariants(tree, cloud=None, max_report=1000):
    """Exhaustively check nesting, cover, and separation on a built tree.

    Strict inequalities are enforced with zero tolerance on double
    precision distances.  Returns a report listing every violated triple
    (up to ``max_report`` entries).
    """
    violations = []
    pts = tree.points
    levels = list(tree.levels())
    member_sets = {j: set(tree.level_members(j).tolist()) for j in levels}

    if cloud is not None:
        missing = set(range(len(cloud))) - member_sets[tree.bottom_level]
        for x in sorted(missing):
            violations.append(("bottom", tree.bottom_level, int(x), "missing from bottom level"))

    for j in levels[:-1]:
        for x in sorted(member_sets[j + 1] - member_sets[j]):
            violations.append(("nesting", j + 1, int(x), "not present one level down"))

    for j in levels:
        ids = np.fromiter(sorted(member_sets[j]), dtype=int)
        if len(ids) < 2:
            continue
        sep = 2.0 ** j
        block = pts[ids]
        if tree.metric is None:
            diff = block[:, None, :] - block[None, :, :]
            dmat = np.sqrt((diff * diff).sum(axis=2))
        else:
            m = len(ids)
            dmat = np.zeros((m, m))
            for a in range(m):
                for b in range(a + 1, m):
                    dmat[a, b] = dmat[b, a] = tree.metric(block[a], block[b])
        iu = np.triu_indices(len(ids), k=1)
        bad = np.flatnonzero(~(dmat[iu] > sep))
        for t in bad[: max(0, max_report - len(violations))]:
            a, b = iu[0][t], iu[1][t]
            violations.append(("separation", j, int(ids[a]), int(ids[b]), float(dmat[a, b]), sep))

    for idx_i, i in enumerate(levels):
        ids = np.fromiter(sorted(member_sets[i]), dtype=int)
        for j in levels[idx_i + 1:]:
            anc = tree.ancestor_table(j)[ids]
            if tree.metric is None:
                d = np.linalg.norm(pts[ids] - pts[anc], axis=1)
            else:
                d = np.array([tree.metric(pts[a], pts[b]) for a, b in zip(ids, anc)])
            bound = 2.0 ** (j + 1) - 2.0 ** i
            bad = np.flatnonzero(~(d < bound))
            for t in bad[: max(0, max_report - len(violations))]:
                violations.append(
                    ("cover", i, j, int(ids[t]), int(anc[t]), float(d[t]), bound)
                )

    return InvariantReport(
        passed=not violations,
        violations=violations,
        checked_levels=(tree.bottom_level, tree.top_level),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def tree_to_json_dict(tree):
    """Explicit {levels, parent} form: parent rows are (id, level, parent id)
    for every member of every level below the top."""
    levels = {str(j): [int(x) for x in tree.level_members(j)] for j in tree.levels()}
    parent_rows = []
    for j in range(tree.bottom_level, tree.top_level):
        for x in tree.level_members(j):
            up = int(x) if tree.entry_level[x] > j else int(tree.parent_of[x])
            parent_rows.append([int(x), int(j), up])
    return {
        "levels": levels,
        "parent": parent_rows,
        "top_level": tree.top_level,
        "bottom_level": tree.bottom_level,
        "root": int(tree.root),
        "rescale": tree.rescale,
    }


def tree_from_json_dict(data, cloud):
    """Rebuild a CoverTree from its serialized form plus the original cloud."""
    top = int(data["top_level"])
    bottom = int(data["bottom_level"])
    rescale = float(data.get("rescale", 1.0))
    pts = np.array(cloud.points, dtype=float) * rescale
    pts.setflags(write=False)
    n = pts.shape[0]
    entry = np.full(n, bottom, dtype=np.int64)
    for j_str, ids in data["levels"].items():
        j = int(j_str)
        for x in ids:
            entry[x] = max(entry[x], j)
    parent = np.arange(n)
    for x, j, up in data["parent"]:
        if int(j) == int(entry[x]) and int(up) != int(x):
            parent[x] = int(up)
    return CoverTree(pts, entry, parent, int(data["root"]), top, bottom, rescale, None)
