"""Non-backtracking walk distributions and killed random walks.

Non-backtracking walks live on directed arcs: arc ``2e`` runs
``tails[e] -> heads[e]`` and arc ``2e + 1`` the reverse. A walk that just
used arc ``u -> z`` continues uniformly over the ``d - 1`` arcs leaving ``z``
other than ``z -> u``. Everything is computed exactly by dynamic
programming; nothing is sampled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameter, VertexInRemovedSet
from .graph import require_regular


@dataclass(frozen=True)
class WalkDistribution:
    """Distributions of a non-backtracking walk after ``t`` steps.

    Attributes
    ----------
    t : int
    P : ndarray (n, n)
        ``P[v, z] = P_v(Y_t = z)``.
    excl : ndarray (2m, n) or None
        Conditioned rows, one per arc. Row ``2e`` is the law of ``Y_t`` from
        ``tails[e]`` given that the first step avoids ``heads[e]``; row
        ``2e + 1`` swaps the roles.
    """

    t: int
    P: np.ndarray
    excl: np.ndarray | None = None

    def conditioned(self, graph, v, w):
        """Row ``P^{(t,w)}_v``: law from ``v`` with first step not to ``w``."""
        e = graph.edge_index(v, w)
        return self.excl[2 * e if graph.tails[e] == v else 2 * e + 1]


def arc_arrays(graph):
    """Start and end vertex of each arc."""
    start = np.empty(2 * graph.n_edges, dtype=np.int64)
    end = np.empty_like(start)
    start[0::2], end[0::2] = graph.tails, graph.heads
    start[1::2], end[1::2] = graph.heads, graph.tails
    return start, end


def nb_transition(graph):
    """0/1 arc transition matrix: ``T[a, a'] = 1`` iff ``a'`` may follow ``a``."""
    start, end = arc_arrays(graph)
    out_arcs = [[] for _ in range(graph.n_vertices)]
    for a, u in enumerate(start.tolist()):
        out_arcs[u].append(a)
    rows, cols = [], []
    for a in range(len(start)):
        for a2 in out_arcs[end[a]]:
            if a2 != (a ^ 1):
                rows.append(a)
                cols.append(a2)
    m2 = len(start)
    return sp.csr_array((np.ones(len(rows)), (rows, cols)), shape=(m2, m2))


def _end_matrix(graph):
    start, end = arc_arrays(graph)
    return sp.csr_array(
        (np.ones(len(end)), (np.arange(len(end)), end)), shape=(len(end), graph.n_vertices)
    )


def nb_distribution(graph, t, conditioned=True):
    """Exact non-backtracking walk laws after ``t`` steps by arc dynamic programming.

    Parameters
    ----------
    graph : WeightedGraph
        d-regular with equal weights, ``d >= 2``.
    t : int
        Number of steps, ``t >= 0``.
    conditioned : bool
        Also compute the rows conditioned on the first step.

    Raises
    ------
    NotRegular, UnequalWeights
    """
    d, _ = require_regular(graph)
    if d < 2:
        raise InvalidParameter("non-backtracking walks need d >= 2")
    if t < 0:
        raise InvalidParameter(f"t must be >= 0, got {t}")
    n = graph.n_vertices
    if t == 0:
        eye = np.eye(n)
        excl = None
        if conditioned:
            start, _ = arc_arrays(graph)
            excl = eye[start]
        return WalkDistribution(0, eye, excl)

    T = nb_transition(graph)
    H = _end_matrix(graph)
    start, _ = arc_arrays(graph)
    # arc mass after one step
    X = np.zeros((n, 2 * graph.n_edges))
    X[start, np.arange(len(start))] = 1.0 / d
    for _ in range(t - 1):
        X = np.asarray((T.T @ X.T).T) / (d - 1)
    P = np.asarray((H.T @ X.T).T)

    excl = None
    if conditioned:
        # avoiding v -> w on the first step is the same as continuing from w -> v
        Y = T[np.arange(len(start)) ^ 1].toarray() / (d - 1)
        for _ in range(t - 1):
            Y = np.asarray((T.T @ Y.T).T) / (d - 1)
        excl = np.asarray((H.T @ Y.T).T)
    return WalkDistribution(t, P, excl)


def nb_distribution_recursive(graph, t):
    """``P^{(t)}`` from the three-term recursion in the 0/1 adjacency ``B``.

    ``P^1 = B/d``, ``P^2 = (B P^1 - I)/(d-1)`` and
    ``P^t = (B P^{t-1} - P^{t-2})/(d-1)``.
    """
    for P in nb_distribution_sequence(graph, t):
        pass
    return P


def nb_distribution_sequence(graph, t_max):
    """Yield ``P^{(0)}, ..., P^{(t_max)}`` via the adjacency recursion."""
    d, _ = require_regular(graph)
    n = graph.n_vertices
    B = graph.unweighted_adjacency_sparse()
    eye = np.eye(n)
    yield eye
    if t_max == 0:
        return
    prev, curr = None, B.toarray() / d
    yield curr
    for s in range(2, t_max + 1):
        # the t = 2 step removes the immediate return, later ones the two-back term
        back = eye if s == 2 else prev
        prev, curr = curr, (B @ curr - back) / (d - 1)
        yield curr


# -- difference matrices --------------------------------------------------


def delta(graph, P):
    """``Delta_e = P[tail] - P[head]`` for every edge."""
    return P[graph.tails] - P[graph.heads]


def delta_tilde(graph, dist):
    """``P^{(t,head)}_{tail} - P^{(t,tail)}_{head}`` from conditioned rows."""
    return dist.excl[0::2] - dist.excl[1::2]


def unit_difference(graph):
    """``(m, n)`` matrix with row ``e`` equal to ``1_tail - 1_head``."""
    m, n = graph.n_edges, graph.n_vertices
    U = np.zeros((m, n))
    U[np.arange(m), graph.tails] = 1.0
    U[np.arange(m), graph.heads] = -1.0
    return U


def delta_tilde_sequence(graph, t_max):
    """Yield ``Delta~^{(1)}, ..., Delta~^{(t_max)}`` from the three-term recursion.

    Rows are edges. With ``u_e = 1_tail - 1_head``:
    ``Delta~^1 = (B u + u)/(d-1)``, ``Delta~^2 = (B Delta~^1 - u)/(d-1)`` and
    ``Delta~^t = (B Delta~^{t-1} - Delta~^{t-2})/(d-1)``.
    """
    d, _ = require_regular(graph)
    if d < 2:
        raise InvalidParameter("non-backtracking walks need d >= 2")
    B = graph.unweighted_adjacency_sparse()
    U = unit_difference(graph)
    if t_max < 1:
        return
    # rows times symmetric B
    prev = np.asarray((B @ U.T).T) / (d - 1) + U / (d - 1)
    yield prev
    if t_max < 2:
        return
    curr = np.asarray((B @ prev.T).T) / (d - 1) - U / (d - 1)
    yield curr
    for _ in range(3, t_max + 1):
        prev, curr = curr, (np.asarray((B @ curr.T).T) - prev) / (d - 1)
        yield curr


def delta_tilde_recursion(graph, t):
    """``Delta~^{(t)}`` (rows = edges) via the recursion, ``t >= 1``."""
    if t < 1:
        raise InvalidParameter(f"t must be >= 1, got {t}")
    for D in delta_tilde_sequence(graph, t):
        pass
    return D


def delta_sequence(graph, t_max):
    """Yield ``Delta^{(1)}, ..., Delta^{(t_max)}`` (rows = edges)."""
    seq = nb_distribution_sequence(graph, t_max)
    next(seq)
    for P in seq:
        yield delta(graph, P)


def delta_inf_norm(D):
    """Induced infinity norm: the largest row l1 sum."""
    D = np.asarray(D)
    if D.size == 0:
        return 0.0
    return float(np.abs(D).sum(axis=1).max())


def tv_profile(D):
    """Per-row total variation, half the row l1 sum."""
    return 0.5 * np.abs(np.asarray(D)).sum(axis=1)


# -- killed random walks ------------------------------------------------


_TRANSITION_CACHE = "_walk_transition"


def transition_matrix(graph):
    """Simple random walk ``D^-1 W`` (dense, read-only, cached on the graph)."""
    P = graph.__dict__.get(_TRANSITION_CACHE)
    if P is None:
        P = graph.adjacency_sparse().toarray() / graph.weighted_degrees[:, None]
        P.flags.writeable = False
        graph.__dict__[_TRANSITION_CACHE] = P
    return P


def _kept(graph, removed):
    removed = sorted({int(z) for z in removed})
    if not removed:
        raise InvalidParameter("the removed set Z must be nonempty")
    for z in removed:
        if not 0 <= z < graph.n_vertices:
            raise InvalidParameter(f"vertex {z} out of range")
    mask = np.ones(graph.n_vertices, dtype=bool)
    mask[removed] = False
    return np.flatnonzero(mask), mask


def killed_transition(graph, removed):
    """Walk matrix on ``V \\ Z`` with mass entering ``Z`` discarded.

    Returns the matrix and the kept vertex ids (row ``i`` is ``kept[i]``).
    ``matrix_power(Pbar, k)[i, j] = P_{kept[i]}(X_k = kept[j], T_Z > k)``.
    """
    kept, _ = _kept(graph, removed)
    P = transition_matrix(graph)
    return P[np.ix_(kept, kept)], kept


def restricted_laplacian(graph, removed):
    """``L`` with the rows and columns of ``Z`` deleted, and the kept ids."""
    kept, _ = _kept(graph, removed)
    L = graph.laplacian_sparse().toarray()
    return L[np.ix_(kept, kept)], kept


def _local(kept, v, removed):
    pos = np.searchsorted(kept, v)
    if pos >= len(kept) or kept[pos] != v:
        raise VertexInRemovedSet(f"vertex {v} lies in the removed set {sorted(removed)}")
    return int(pos)


def _hitting(Pbar, iw, IminusP=None):
    # harmonic on kept \ {w}, 1 at w; killed mass counts as 0
    k = Pbar.shape[0]
    if IminusP is None:
        IminusP = np.eye(k) - Pbar
    free = np.delete(np.arange(k), iw)
    h = np.zeros(k)
    h[iw] = 1.0
    if free.size:
        h[free] = np.linalg.solve(IminusP[free][:, free], Pbar[free, iw])
    return h


def hitting_probabilities(graph, removed, w):
    """``h[i] = P_{kept[i]}(T_w < T_Z)`` with ``T`` the hitting time from time 0.

    Solves the harmonic system on ``V \\ (Z + {w})``; ``h = 1`` at ``w``.
    Returns ``(h, kept)``.
    """
    kept, _ = _kept(graph, removed)
    iw = _local(kept, w, removed)
    Pbar = transition_matrix(graph)[np.ix_(kept, kept)]
    return _hitting(Pbar, iw), kept


def expected_visits(graph, removed, w):
    """Expected number of visits to ``w`` (time 0 included) before the walk from ``w`` hits ``Z``."""
    h, kept = hitting_probabilities(graph, removed, w)
    iw = _local(kept, w, removed)
    Pbar = transition_matrix(graph)[np.ix_(kept, kept)]
    # probability of returning to w before Z
    rho = Pbar[iw] @ h
    return 1.0 / (1.0 - rho)


def restricted_laplacian_inverse_via_walks(graph, removed, v, w):
    """Entry ``(v, w)`` of the inverse restricted Laplacian from walk quantities.

    ``Lbar^-1_vw = P_v(T_w < T_Z) * E_w[visits to w before T_Z] / d_w`` with
    ``d_w`` the weighted degree.

    Raises
    ------
    VertexInRemovedSet
    """
    h, kept = hitting_probabilities(graph, removed, w)
    iv = _local(kept, v, removed)
    return float(h[iv] * expected_visits(graph, removed, w) / graph.weighted_degrees[w])


def restricted_inverse_column_via_walks(graph, removed, w):
    """Column ``w`` of the inverse restricted Laplacian, indexed like ``kept``.

    Returns ``(column, kept)``.
    """
    h, kept = hitting_probabilities(graph, removed, w)
    iw = _local(kept, w, removed)
    Pbar = transition_matrix(graph)[np.ix_(kept, kept)]
    visits = 1.0 / (1.0 - Pbar[iw] @ h)
    return h * visits / graph.weighted_degrees[w], kept


def restricted_inverse_via_walks(graph, removed):
    """The whole inverse restricted Laplacian, one walk-formula column at a time.

    Returns ``(Linv, kept)`` with rows and columns indexed like ``kept``.
    """
    kept, _ = _kept(graph, removed)
    Pbar = transition_matrix(graph)[np.ix_(kept, kept)]
    IminusP = np.eye(len(kept)) - Pbar
    out = np.empty((len(kept), len(kept)))
    for j, w in enumerate(kept):
        h = _hitting(Pbar, j, IminusP)
        out[:, j] = h / (1.0 - Pbar[j] @ h) / graph.weighted_degrees[w]
    return out, kept
