"""Brute-force reference computations used for cross-checking.

These enumerate paths explicitly or solve dense systems directly, sharing no
code with the fast implementations. They are exponential or cubic and meant
for small graphs only.
"""
from __future__ import annotations

import itertools

import numpy as np

from .graph import require_regular


def nb_paths(graph, v, t):
    """All non-backtracking vertex sequences of ``t`` steps starting at ``v``."""
    paths = [(v,)]
    for _ in range(t):
        nxt = []
        for p in paths:
            for z in graph.neighbors(p[-1]):
                if len(p) >= 2 and z == p[-2]:
                    continue
                nxt.append(p + (z,))
        paths = nxt
    return paths


def nb_distribution_enumerated(graph, t):
    """``P^{(t)}`` and the conditioned rows by counting non-backtracking paths.

    Returns ``(P, excl)`` in the same layout as
    :class:`~minsum_laplacian.walks.WalkDistribution`.
    """
    require_regular(graph)
    n = graph.n_vertices
    P = np.zeros((n, n))
    excl = np.zeros((2 * graph.n_edges, n))
    for v in range(n):
        paths = nb_paths(graph, v, t)
        for p in paths:
            P[v, p[-1]] += 1
        P[v] /= len(paths)
    for e in range(graph.n_edges):
        for row, (v, w) in ((2 * e, (graph.tails[e], graph.heads[e])), (2 * e + 1, (graph.heads[e], graph.tails[e]))):
            kept = [p for p in nb_paths(graph, int(v), t) if t == 0 or p[1] != w]
            for p in kept:
                excl[row, p[-1]] += 1
            excl[row] /= len(kept)
    return P, excl


def killed_walk_enumerated(graph, removed, k):
    """``P_v(X_k = w, T_Z > k)`` by summing over every walk of length ``k``.

    Returns an ``(n, n)`` matrix over all vertices; rows and columns of ``Z``
    are zero.
    """
    n = graph.n_vertices
    removed = set(int(z) for z in removed)
    W = graph.adjacency_sparse().toarray()
    P = W / W.sum(axis=1, keepdims=True)
    out = np.zeros((n, n))
    for v in range(n):
        if v in removed:
            continue
        stack = [(v, 1.0, 0)]
        while stack:
            u, prob, steps = stack.pop()
            if steps == k:
                out[v, u] += prob
                continue
            for z in np.flatnonzero(P[u]):
                if int(z) not in removed:
                    stack.append((int(z), prob * P[u, z], steps + 1))
    return out


def pinv_voltages(graph, b):
    """``L^+ b`` with a dense Moore-Penrose pseudo-inverse."""
    L = graph.laplacian_sparse().toarray()
    return np.linalg.pinv(L) @ np.asarray(b, dtype=float)


def kkt_qp(R, h, A, b):
    """Dense KKT solve of ``min x^T R x / 2 + h^T x`` subject to ``A x = b``.

    Uses least squares so rank-deficient ``A`` is tolerated.
    """
    R = np.asarray(R, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    K = np.block([[R, -A.T], [A, np.zeros((m, m))]])
    rhs = np.concatenate([-np.asarray(h, dtype=float), np.asarray(b, dtype=float)])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:n]


def subsets(items, size):
    return [tuple(c) for c in itertools.combinations(items, size)]
