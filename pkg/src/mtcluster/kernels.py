"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorized pure-numpy version.  The module-level names bind to the numba
variant unless numba is missing or ``MTCLUSTER_NO_NUMBA`` is set to a
non-empty value other than ``0`` at import time.  Both variants are always
reachable through :data:`IMPLEMENTATIONS` so tests and the benchmark can
compare them.

Conventions shared by all kernels:

* vertex subsets are ``int64`` bitmasks (so at most 62 vertices here);
* a tree on ``0..n`` is a row ``parents[i]`` with ``parents[0] == -1``;
* ``incompat`` is a boolean matrix whose ``[i, j]`` entry says ``i`` and
  ``j`` overlap.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_flag = os.environ.get("MTCLUSTER_NO_NUMBA", "")
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"

# numpy fallback processes edge subsets in blocks of this size
_BLOCK = 1 << 15


# ---------------------------------------------------------------------------
# Ursell coefficient: signed sum over connected spanning edge subsets
# ---------------------------------------------------------------------------


def _ursell_edge_sum_loop(n_vertices, eu, ev):
    m = eu.shape[0]
    full = (np.int64(1) << n_vertices) - 1
    adj = np.zeros(n_vertices, dtype=np.int64)
    total = 0
    for mask in range(np.int64(1) << m):
        for v in range(n_vertices):
            adj[v] = 0
        cnt = 0
        for e in range(m):
            if (mask >> e) & 1:
                adj[eu[e]] |= np.int64(1) << ev[e]
                adj[ev[e]] |= np.int64(1) << eu[e]
                cnt += 1
        if cnt < n_vertices - 1:
            continue
        reach = np.int64(1)
        frontier = np.int64(1)
        while frontier != 0:
            new = np.int64(0)
            for v in range(n_vertices):
                if (frontier >> v) & 1:
                    new |= adj[v]
            frontier = new & ~reach
            reach |= new
        if reach == full:
            if cnt % 2 == 0:
                total += 1
            else:
                total -= 1
    return total


def _ursell_edge_sum_numpy(n_vertices, eu, ev):
    m = len(eu)
    full = (1 << n_vertices) - 1
    total = 0
    shifts = np.arange(m, dtype=np.int64)
    for start in range(0, 1 << m, _BLOCK):
        masks = np.arange(start, min(start + _BLOCK, 1 << m), dtype=np.int64)
        bits = (masks[:, None] >> shifts) & 1
        adj = np.zeros((len(masks), n_vertices), dtype=np.int64)
        for e in range(m):
            adj[:, eu[e]] |= bits[:, e] << int(ev[e])
            adj[:, ev[e]] |= bits[:, e] << int(eu[e])
        reach = np.ones(len(masks), dtype=np.int64)
        for _ in range(n_vertices):
            new = reach.copy()
            for v in range(n_vertices):
                new |= np.where((reach >> v) & 1 == 1, adj[:, v], 0)
            reach = new
        cnt = bits.sum(axis=1)
        connected = reach == full
        sign = 1 - 2 * (cnt % 2)
        total += int(sign[connected].sum())
    return total


# ---------------------------------------------------------------------------
# Penrose condition counted over a batch of labeled rooted trees
# ---------------------------------------------------------------------------


def _count_penrose_loop(parents, depths, ranks, incompat, check_t2):
    n_trees, size = parents.shape
    count = 0
    for t in range(n_trees):
        ok = True
        for i in range(1, size):
            if not incompat[i, parents[t, i]]:
                ok = False
                break
        if not ok:
            continue
        for i in range(size):
            if not ok:
                break
            for j in range(size):
                if i == j:
                    continue
                di = depths[t, i]
                dj = depths[t, j]
                if di == dj and incompat[i, j]:
                    ok = False
                    break
                if (check_t2 and i > 0 and dj == di - 1
                        and ranks[t, parents[t, i]] < ranks[t, j]
                        and incompat[i, j]):
                    ok = False
                    break
        if ok:
            count += 1
    return count


def _count_penrose_numpy(parents, depths, ranks, incompat, check_t2):
    n_trees, size = parents.shape
    ok = np.ones(n_trees, dtype=bool)
    for i in range(1, size):
        ok &= incompat[i, parents[:, i]]
    rows = np.arange(n_trees)
    for i in range(size):
        for j in range(size):
            if i == j or not incompat[i, j]:
                continue
            bad = depths[:, i] == depths[:, j]
            if check_t2 and i > 0:
                older_parent = ranks[rows, parents[:, i]] < ranks[:, j]
                bad |= (depths[:, j] == depths[:, i] - 1) & older_parent
            ok &= ~bad
    return int(ok.sum())


# ---------------------------------------------------------------------------
# Penrose-weighted label sums over naturally labeled plane trees
# ---------------------------------------------------------------------------


def _tuple_weights_loop(parents, depths, incompat, rho, x0, check_t2):
    n_trees, size = parents.shape
    n_labels = rho.shape[0]
    out = np.zeros(n_trees, dtype=np.float64)
    labels = np.zeros(size, dtype=np.int64)
    choice = np.zeros(size, dtype=np.int64)
    prefix = np.ones(size + 1, dtype=np.float64)
    for t in range(n_trees):
        labels[0] = x0
        if size == 1:
            out[t] = 1.0
            continue
        total = 0.0
        i = 1
        choice[1] = -1
        while i >= 1:
            c = choice[i] + 1
            found = False
            while c < n_labels:
                if incompat[c, labels[parents[t, i]]]:
                    good = True
                    for j in range(1, i):
                        dj = depths[t, j]
                        di = depths[t, i]
                        if dj == di and incompat[c, labels[j]]:
                            good = False
                            break
                        if (check_t2 and dj == di - 1 and j > parents[t, i]
                                and incompat[c, labels[j]]):
                            good = False
                            break
                    if good:
                        found = True
                        break
                c += 1
            if not found:
                i -= 1
                continue
            choice[i] = c
            labels[i] = c
            prefix[i + 1] = prefix[i] * rho[c]
            if i == size - 1:
                total += prefix[size]
            else:
                i += 1
                choice[i] = -1
        out[t] = total
    return out


def _tuple_weights_numpy(parents, depths, incompat, rho, x0, check_t2):
    n_trees, size = parents.shape
    n_labels = len(rho)
    out = np.zeros(n_trees)
    cand = np.arange(n_labels)
    for t in range(n_trees):
        par = parents[t]
        dep = depths[t]
        partial = np.full((1, 1), x0, dtype=np.int64)
        weight = np.ones(1)
        for i in range(1, size):
            # rows: partial tuples, columns: candidate label for vertex i
            allowed = incompat[cand[None, :], partial[:, par[i]][:, None]]
            for j in range(1, i):
                if dep[j] == dep[i] or (check_t2 and dep[j] == dep[i] - 1
                                        and j > par[i]):
                    allowed &= ~incompat[cand[None, :], partial[:, j][:, None]]
            r, c = np.nonzero(allowed)
            if len(r) == 0:
                weight = np.zeros(0)
                break
            partial = np.column_stack([partial[r], c])
            weight = weight[r] * rho[c]
        out[t] = weight.sum()
    return out


# ---------------------------------------------------------------------------
# Independence polynomial on every subset (highest-bit deletion recursion)
# ---------------------------------------------------------------------------


def _xi_all_subsets_loop(n, star_masks, w):
    out = np.empty(np.int64(1) << n, dtype=np.float64)
    out[0] = 1.0
    for v in range(n):
        lo = np.int64(1) << v
        keep = ~star_masks[v]
        for mask in range(lo, lo << 1):
            out[mask] = out[mask - lo] + w[v] * out[mask & keep]
    return out


def _xi_all_subsets_numpy(n, star_masks, w):
    out = np.empty(1 << n, dtype=np.float64)
    out[0] = 1.0
    for v in range(n):
        lo = 1 << v
        block = np.arange(lo, lo << 1, dtype=np.int64)
        out[lo:lo << 1] = out[:lo] + w[v] * out[block & ~np.int64(star_masks[v])]
    return out


# ---------------------------------------------------------------------------
# Interval membership for partition-scheme verification
# ---------------------------------------------------------------------------


def _interval_counts_loop(tree_masks, top_masks, graph_masks):
    n_graphs = graph_masks.shape[0]
    counts = np.zeros(n_graphs, dtype=np.int64)
    first = np.full(n_graphs, -1, dtype=np.int64)
    for g in range(n_graphs):
        gm = graph_masks[g]
        for k in range(tree_masks.shape[0]):
            if (tree_masks[k] & ~gm) == 0 and (gm & ~top_masks[k]) == 0:
                if counts[g] == 0:
                    first[g] = k
                counts[g] += 1
    return counts, first


def _interval_counts_numpy(tree_masks, top_masks, graph_masks):
    inside = ((tree_masks[None, :] & ~graph_masks[:, None]) == 0) & (
        (graph_masks[:, None] & ~top_masks[None, :]) == 0)
    counts = inside.sum(axis=1).astype(np.int64)
    first = np.where(counts > 0, inside.argmax(axis=1), -1).astype(np.int64)
    return counts, first


_NUMPY = {
    "ursell_edge_sum": _ursell_edge_sum_numpy,
    "count_penrose": _count_penrose_numpy,
    "tuple_weights": _tuple_weights_numpy,
    "xi_all_subsets": _xi_all_subsets_numpy,
    "interval_counts": _interval_counts_numpy,
}

IMPLEMENTATIONS = {"numpy": _NUMPY}

if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "ursell_edge_sum": njit(cache=True)(_ursell_edge_sum_loop),
        "count_penrose": njit(cache=True)(_count_penrose_loop),
        "tuple_weights": njit(cache=True)(_tuple_weights_loop),
        "xi_all_subsets": njit(cache=True)(_xi_all_subsets_loop),
        "interval_counts": njit(cache=True)(_interval_counts_loop),
    }

_active = IMPLEMENTATIONS[BACKEND]

ursell_edge_sum = _active["ursell_edge_sum"]
count_penrose = _active["count_penrose"]
tuple_weights = _active["tuple_weights"]
xi_all_subsets = _active["xi_all_subsets"]
interval_counts = _active["interval_counts"]
