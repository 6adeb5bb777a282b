"""Computation trees and closed-form error characterizations.

The min-sum estimate after ``t`` steps equals the exact optimum of the same
problem posed on the depth-``t`` unrolling of the graph around the root edge
(flow) or root vertex (voltage), with the initial messages acting as a linear
perturbation on the tree boundary. This module builds those trees, solves the
tree problems, and evaluates the exact error formulas for cycles and for
d-regular graphs with equal weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._messages import layout, perturbation_vector
from .constants import RegularConstants, epsilon_bound, regular_constants  # noqa: F401
from .errors import InvalidDepth, InvalidParameter, NotCycle, SingularSystem
from .exact import solve_constrained_qp, solve_exact
from .graph import WeightedGraph, check_injection, require_leafless, require_regular
from .walks import nb_distribution, restricted_laplacian_inverse_via_walks

#: Largest computation tree we are willing to build.
TREE_CAP = 200_000

FLOW = "flow"
VOLTAGE = "voltage"


@dataclass(frozen=True)
class ComputationTree:
    """Unrolled neighbourhood of a root edge (flow) or root vertex (voltage).

    Tree vertices are numbered in breadth-first order. Flow trees start with
    the two root endpoints (tail then head) at level 0 and the root edge is
    tree edge 0. Voltage trees start with the root vertex at level -1.

    Attributes
    ----------
    graph : WeightedGraph
    kind : str
        ``"flow"`` or ``"voltage"``.
    depth : int
    root : int or tuple
        Root edge index (flow) or root vertex (voltage).
    sigma : ndarray
        Original vertex of each tree vertex.
    level : ndarray
        Level of each tree vertex.
    parent : ndarray
        Parent tree vertex, -1 for the level-0 flow endpoints and the voltage root.
    tails, heads : ndarray
        Tree edges. Flow trees keep the original orientation.
    edge_sigma : ndarray
        Original edge of each tree edge.
    """

    graph: WeightedGraph
    kind: str
    depth: int
    root: int
    sigma: np.ndarray
    level: np.ndarray
    parent: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    edge_sigma: np.ndarray

    @property
    def n_vertices(self):
        return len(self.sigma)

    @property
    def n_edges(self):
        return len(self.tails)

    @property
    def weights(self):
        return self.graph.weights[self.edge_sigma]

    def vertices_at(self, k):
        return np.flatnonzero(self.level == k)

    def level_sizes(self):
        lo = -1 if self.kind == VOLTAGE else 0
        return [int(np.sum(self.level == k)) for k in range(lo, self.depth + 1)]

    @property
    def interior(self):
        """Tree vertices below the last level; these carry the constraints."""
        return np.flatnonzero(self.level < self.depth)

    def as_graph(self):
        """The tree as a :class:`WeightedGraph` (vertex ids are tree ids)."""
        return WeightedGraph(self.n_vertices, self.tails, self.heads, self.weights)


def build_tree(graph, root, t, kind=FLOW, cap=TREE_CAP):
    """Unroll ``graph`` to depth ``t`` around ``root``.

    Parameters
    ----------
    root : int or (int, int)
        Edge index or endpoint pair for flow trees, vertex for voltage trees.
    t : int
        Depth, at least 1.
    kind : {"flow", "voltage"}

    Raises
    ------
    HasLeaves
        Flow trees need a leafless graph.
    InvalidDepth
        ``t < 1`` or the tree would exceed ``cap`` vertices.
    """
    if kind not in (FLOW, VOLTAGE):
        raise InvalidParameter(f"kind must be 'flow' or 'voltage', got {kind!r}")
    if int(t) != t or t < 1:
        raise InvalidDepth(f"tree depth must be an integer >= 1, got {t}")
    t = int(t)
    sigma, level, parent, arrival = [], [], [], []
    tails, heads, esig = [], [], []

    def add_vertex(v, lev, par, via):
        if len(sigma) >= cap:
            raise InvalidDepth(f"computation tree exceeds {cap} vertices at depth {t}")
        sigma.append(v)
        level.append(lev)
        parent.append(par)
        arrival.append(via)
        return len(sigma) - 1

    def add_edge(a, b, e):
        # keep the stored orientation of the original edge
        if graph.tails[e] == sigma[a]:
            tails.append(a)
            heads.append(b)
        else:
            tails.append(b)
            heads.append(a)
        esig.append(e)

    if kind == FLOW:
        require_leafless(graph)
        if isinstance(root, tuple):
            root = graph.edge_index(*root)
        root = int(root)
        if not 0 <= root < graph.n_edges:
            raise InvalidParameter(f"edge {root} out of range")
        a = add_vertex(int(graph.tails[root]), 0, -1, root)
        b = add_vertex(int(graph.heads[root]), 0, -1, root)
        add_edge(a, b, root)
        frontier = [a, b]
        first = 1
    else:
        root = int(root)
        if not 0 <= root < graph.n_vertices:
            raise InvalidParameter(f"vertex {root} out of range")
        r = add_vertex(root, -1, -1, -1)
        frontier = [r]
        first = 0

    for lev in range(first, t + 1):
        nxt = []
        for u in frontier:
            for e in graph.incident(sigma[u]):
                if e == arrival[u]:
                    continue
                c = add_vertex(graph.other(e, sigma[u]), lev, u, e)
                add_edge(u, c, e)
                nxt.append(c)
        frontier = nxt

    arr = lambda x: np.array(x, dtype=np.int64)  # noqa: E731
    return ComputationTree(
        graph, kind, t, root, arr(sigma), arr(level), arr(parent), arr(tails), arr(heads), arr(esig)
    )


# -- tree problems ----------------------------------------------------------


def _tree_incidence(tree):
    m = tree.n_edges
    rows = np.concatenate([tree.tails, tree.heads])
    cols = np.concatenate([np.arange(m), np.arange(m)])
    vals = np.concatenate([np.ones(m), -np.ones(m)])
    return sp.csr_array((vals, (rows, cols)), shape=(tree.n_vertices, m))


def _boundary_edges(tree):
    """Tree edges reaching the last level, with the parent-side vertex of each."""
    child = np.where(tree.level[tree.heads] == tree.depth, tree.heads, tree.tails)
    mask = tree.level[child] == tree.depth
    idx = np.flatnonzero(mask)
    par = tree.parent[child[idx]]
    return idx, par


def lift_flow_perturbation(tree, perturbation):
    """Linear cost on tree edges induced by the initial messages.

    Only last-level edges carry a cost: edge ``f`` hanging below ``u`` gets
    ``p_{sigma(f) -> sigma(u)}``.
    """
    g = tree.graph
    p = perturbation_vector(g, perturbation)
    out = np.zeros(tree.n_edges)
    idx, par = _boundary_edges(tree)
    e = tree.edge_sigma[idx]
    slots = 2 * e + (g.heads[e] == tree.sigma[par]).astype(np.int64)
    out[idx] = p[slots]
    return out


def lift_voltage_perturbation(tree, perturbation):
    """Linear cost on interior tree vertices induced by the initial messages.

    A vertex ``u`` on level ``t - 1`` collects ``p_{sigma(f) -> sigma(u)}``
    over its child edges ``f``. Returned in :attr:`ComputationTree.interior`
    order.
    """
    g = tree.graph
    p = perturbation_vector(g, perturbation)
    full = np.zeros(tree.n_vertices)
    idx, par = _boundary_edges(tree)
    e = tree.edge_sigma[idx]
    slots = 2 * e + (g.heads[e] == tree.sigma[par]).astype(np.int64)
    np.add.at(full, par, p[slots])
    return full[tree.interior]


def solve_tree_flow(tree, injection, perturbation=None):
    """Minimum-cost flow on a flow computation tree.

    Minimises ``x^T R x / 2 + pbar^T x`` subject to Kirchhoff's law at every
    vertex above the last level, where the injection at a tree vertex is that
    of its image. Entry 0 is the root edge.
    """
    if tree.kind != FLOW:
        raise InvalidParameter("solve_tree_flow needs a flow tree")
    b = check_injection(injection, tree.graph)
    keep = tree.interior
    A = _tree_incidence(tree)[keep]
    h = lift_flow_perturbation(tree, perturbation)
    return solve_constrained_qp(sp.diags_array(1.0 / tree.weights), h, A, b[tree.sigma[keep]])


def tree_laplacian(tree):
    """Weighted Laplacian of the whole tree (sparse)."""
    return tree.as_graph().laplacian_sparse()


def tree_restricted_laplacian(tree):
    """Tree Laplacian restricted to the interior vertices (sparse CSC)."""
    keep = tree.interior
    return tree_laplacian(tree)[keep][:, keep].tocsc()


def solve_tree_voltage(tree, injection, perturbation=None):
    """Voltages on the interior of a voltage computation tree.

    Minimises ``nu^T Lbar nu / 2 + (pbar - bbar)^T nu`` with ``Lbar`` the
    tree Laplacian restricted to the interior. Entry 0 is the root.

    Raises
    ------
    SingularSystem
    """
    if tree.kind != VOLTAGE:
        raise InvalidParameter("solve_tree_voltage needs a voltage tree")
    b = check_injection(injection, tree.graph)
    keep = tree.interior
    rhs = b[tree.sigma[keep]] - lift_voltage_perturbation(tree, perturbation)
    try:
        nu = spla.splu(tree_restricted_laplacian(tree)).solve(rhs)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    return nu


# -- sensitivity formulas -----------------------------------------------------


def _boundary_load(tree, nu):
    """For each level ``t - 1`` vertex, the sum of ``W nu_sigma`` over its children."""
    idx, par = _boundary_edges(tree)
    child = np.where(tree.parent[tree.heads[idx]] == par, tree.heads[idx], tree.tails[idx])
    load = np.zeros(tree.n_vertices)
    np.add.at(load, par, tree.weights[idx] * nu[tree.sigma[child]])
    return load


def _inverse_columns(tree, cols, method):
    """Rows of ``Lbar^-1`` restricted to the interior, for the given tree columns."""
    keep = tree.interior
    pos = -np.ones(tree.n_vertices, dtype=np.int64)
    pos[keep] = np.arange(len(keep))
    if method == "direct":
        lu = spla.splu(tree_restricted_laplacian(tree))
        out = {}
        for c in cols:
            rhs = np.zeros(len(keep))
            rhs[pos[c]] = 1.0
            out[int(c)] = lu.solve(rhs)
        return out, pos
    if method != "walks":
        raise InvalidParameter(f"unknown method {method!r}")
    tg = tree.as_graph()
    removed = tree.vertices_at(tree.depth)
    out = {}
    for c in cols:
        col = np.zeros(len(keep))
        for r in (0, 1) if tree.kind == FLOW else (0,):
            col[pos[r]] = restricted_laplacian_inverse_via_walks(tg, removed, r, int(c))
        out[int(c)] = col
    return out, pos


def flow_error_sensitivity(graph, injection, edge, t, method="direct", nu=None):
    """Predicted ``x*_e - xhat^t_e`` from the tree's restricted-Laplacian inverse.

    ``W_root * sum_u (Lbar^-1[tail, u] - Lbar^-1[head, u]) * load_u`` over
    level ``t - 1`` vertices ``u``, with ``load_u`` the sum of ``W nu*`` over
    the children of ``u``. ``method`` is ``"direct"`` (sparse LU) or
    ``"walks"`` (hitting probabilities).
    """
    tree = build_tree(graph, edge, t, FLOW)
    if nu is None:
        nu = solve_exact(graph, injection).voltages
    load = _boundary_load(tree, np.asarray(nu, dtype=float))
    cols = tree.vertices_at(t - 1)
    inv, pos = _inverse_columns(tree, cols, method)
    # level-0 endpoints are tree vertices 0 (tail) and 1 (head)
    total = sum((inv[c][pos[0]] - inv[c][pos[1]]) * load[c] for c in cols)
    return float(graph.weights[tree.root] * total)


def voltage_error_sensitivity(graph, injection, vertex, t, method="direct", nu=None):
    """Predicted ``nu*_v - nuhat^t_v``: ``sum_u Lbar^-1[root, u] * load_u``."""
    tree = build_tree(graph, vertex, t, VOLTAGE)
    if nu is None:
        nu = solve_exact(graph, injection).voltages
    load = _boundary_load(tree, np.asarray(nu, dtype=float))
    cols = tree.vertices_at(t - 1)
    inv, pos = _inverse_columns(tree, cols, method)
    return float(sum(inv[c][pos[0]] * load[c] for c in cols))


# -- cycles -------------------------------------------------------------------


def cycle_weights(graph):
    """Weights ``W_k`` of edge ``{k, k+1 mod n}`` for a cycle stored in that order.

    Raises
    ------
    NotCycle
        Edge ``k`` does not join ``k`` and ``k + 1 mod n``.
    """
    n = graph.n_vertices
    if graph.n_edges != n or n < 3:
        raise NotCycle(f"expected a cycle with n edges, got n={n}, m={graph.n_edges}")
    k = np.arange(n)
    nxt = (k + 1) % n
    ok = ((graph.tails == k) & (graph.heads == nxt)) | ((graph.tails == nxt) & (graph.heads == k))
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise NotCycle(f"edge {bad} must join vertices {bad} and {(bad + 1) % n}")
    return graph.weights.copy()


def _inv_sum(weights, lo, hi):
    """``sum_{k=lo}^{hi} 1 / W_{k mod n}``."""
    n = len(weights)
    return float(np.sum(1.0 / weights[np.arange(lo, hi + 1) % n]))


def cycle_alpha(graph, v, t):
    """``sum_{k=v}^{v+t} 1/W_k  /  sum_{k=v-t-1}^{v+t} 1/W_k``."""
    w = cycle_weights(graph)
    return _inv_sum(w, v, v + t) / _inv_sum(w, v - t - 1, v + t)


def cycle_beta(graph, e, t):
    """``1 / sum_{k=e-t}^{e+t} 1/W_k`` for edge ``e = {e, e+1}``."""
    w = cycle_weights(graph)
    return 1.0 / _inv_sum(w, e - t, e + t)


@dataclass(frozen=True)
class CyclePrediction:
    """Predicted errors ``nu* - nuhat^t`` and ``x* - xhat^t`` with the coefficients used."""

    voltage_error: np.ndarray
    flow_error: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray


def error_characterization_cycle(graph, injection, t, nu=None):
    """Exact min-sum errors at time ``t`` on a weighted cycle.

    ``nu*_v - nuhat_v = alpha_v nu*_{v-t-1} + (1 - alpha_v) nu*_{v+t+1}`` and
    ``x*_e - xhat_e = A_{ve} beta_e (nu*_{v-t} - nu*_{v+t+1})`` for ``e = {v, v+1}``,
    indices mod ``n``.

    Raises
    ------
    NotCycle
    """
    if t < 2:
        raise InvalidParameter(f"cycle characterization needs t >= 2, got {t}")
    cycle_weights(graph)
    n = graph.n_vertices
    if nu is None:
        nu = solve_exact(graph, injection).voltages
    nu = np.asarray(nu, dtype=float)
    v = np.arange(n)
    alpha = np.array([cycle_alpha(graph, i, t) for i in range(n)])
    beta = np.array([cycle_beta(graph, i, t) for i in range(n)])
    verr = alpha * nu[(v - t - 1) % n] + (1 - alpha) * nu[(v + t + 1) % n]
    sign = np.where(graph.tails == v, 1.0, -1.0)
    ferr = sign * beta * (nu[(v - t) % n] - nu[(v + t + 1) % n])
    return CyclePrediction(verr, ferr, alpha, beta)


def cycle_l_norm_error_closed_form(nu, omega, t):
    """Squared L-norm error of the plain voltage estimate on an equal-weight cycle.

    ``||nu*||_L^2 / 2 + (omega/2) sum_v nu*_v (2 nu*_{v+2t+2} - nu*_{v+2t+3} - nu*_{v+2t+1})``.
    """
    nu = np.asarray(nu, dtype=float)
    n = len(nu)
    v = np.arange(n)
    lnorm2 = omega * np.sum((nu - np.roll(nu, -1)) ** 2)
    cross = nu * (2 * nu[(v + 2 * t + 2) % n] - nu[(v + 2 * t + 3) % n] - nu[(v + 2 * t + 1) % n])
    return float(0.5 * lnorm2 + 0.5 * omega * cross.sum())


def cycle_gamblers_ruin(tree_weights):
    """Closed-form ``f_s = P_s(T_1 < T_{2t+1})`` on a weighted path ``0..2t+1``.

    ``tree_weights[k]`` is the conductance of path edge ``{k, k+1}``;
    returns ``f_1..f_{2t+1}``.
    """
    w = np.asarray(tree_weights, dtype=float)
    inv = 1.0 / w[1:]  # edges 1..2t
    tail = np.concatenate([np.cumsum(inv[::-1])[::-1], [0.0]])
    return tail / inv.sum()


def birth_death_hitting(p, q, f_lo=1.0, f_hi=0.0):
    """Solve ``f_s = q_s f_{s-1} + p_s f_{s+1}`` for interior states ``s = 1..N``.

    ``p`` and ``q`` hold the up/down probabilities of the interior states;
    any missing mass is killing. Returns ``f_0..f_{N+1}`` with the given
    boundary values.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    N = len(p)
    A = sp.diags_array([-q[1:], np.ones(N), -p[:-1]], offsets=[-1, 0, 1]).tocsc()
    rhs = np.zeros(N)
    rhs[0] += q[0] * f_lo
    rhs[-1] += p[-1] * f_hi
    f = spla.spsolve(A, rhs) if N > 1 else rhs / A.toarray()[0, 0]
    return np.concatenate([[f_lo], np.atleast_1d(f), [f_hi]])


# -- regular graphs -----------------------------------------------------------


@dataclass(frozen=True)
class RegularPrediction:
    voltage_error: np.ndarray
    flow_error: np.ndarray
    constants: RegularConstants


def error_characterization_regular(graph, injection, t, nu=None):
    """Exact min-sum errors at time ``t`` on a d-regular equal-weight graph.

    ``nu* - nuhat^t = P^{(t+1)} nu* / b_{d,t}`` and
    ``x*_e - xhat^t_e = (omega / c_{d,t}) ((d-1)/d) (Delta~^{(t)} nu*)_e``
    where ``Delta~`` uses the conditioned non-backtracking laws.

    Raises
    ------
    NotRegular, UnequalWeights, InvalidParameter
    """
    d, omega = require_regular(graph)
    const = regular_constants(d, t)
    if nu is None:
        nu = solve_exact(graph, injection).voltages
    nu = np.asarray(nu, dtype=float)
    P = nb_distribution(graph, t + 1, conditioned=False).P
    excl = nb_distribution(graph, t, conditioned=True).excl
    dtilde = excl[0::2] - excl[1::2]
    verr = P @ nu / const.b
    ferr = (omega / const.c) * ((d - 1) / d) * (dtilde @ nu)
    return RegularPrediction(verr, ferr, const)


def reduced_network(d, t, omega=1.0, kind=FLOW):
    """Conductances and walk probabilities of the reduced gambler's-ruin network.

    Nodes ``0..t`` form a path of conductance ``omega``; each node ``s`` also
    connects to a sink ``t + 1`` with conductance ``C_s``.

    Returns
    -------
    C, p, q : ndarray
        Length ``t + 1``. ``p[s]``, ``q[s]`` are the up/down step probabilities
        (``p[t]`` steps into the sink).
    """
    if d < 3 or t < 3:
        raise InvalidParameter(f"reduced network needs d >= 3 and t >= 3, got d={d}, t={t}")

    def h(s):
        return 1.0 / ((d - 1) ** s - 1)

    C = np.empty(t + 1)
    C[0] = omega * (d - 1)
    for s in range(1, t):
        C[s] = omega * (d - 2) ** 2 / (d - 1) * (1 + h(s + 1))
    C[t] = omega * (d - 2) * (1 + (h(t) if kind == FLOW else h(t + 1)))
    p = np.empty(t + 1)
    q = np.empty(t + 1)
    p[0] = omega / (omega + C[0])
    q[0] = 1 - p[0]
    p[1:t] = q[1:t] = omega / (2 * omega + C[1:t])
    p[t] = C[t] / (omega + C[t])
    q[t] = 1 - p[t]
    return C, p, q


def reduced_network_inverse(d, t, omega=1.0, kind=FLOW):
    """Tree restricted-inverse entries from the reduced network.

    For ``kind="flow"`` returns ``(Lbar^-1[root tail, u], Lbar^-1[root head, u])``
    for a level ``t - 1`` vertex ``u`` under the root tail. For
    ``kind="voltage"`` returns ``Lbar^-1[root, u]`` for a level ``t - 1``
    vertex ``u``.
    """
    _, p, q = reduced_network(d, t, omega, kind)
    # states 1..t; state t steps down with q_t and into the sink with p_t
    f = birth_death_hitting(p[1:], q[1:], 1.0, 0.0)
    denom = (1 - f[1] * p[0]) * omega * d
    if kind == FLOW:
        return f[t - 1] / denom, f[t] / denom
    return f[t] / denom


def xi_sequence(d, t, kind=FLOW, stated_base=False):
    """``xi_0..xi_{t-1}`` from the reduced-network walk probabilities.

    ``xi_{t-1}`` equals ``c_{d,t}`` for flow trees and
    ``(d-1)/((d-2)(1+h_{t+1})) b_{d,t}`` for voltage trees. The base value
    consistent with the hitting-probability recursion is
    ``xi_0 = (1 - p_0 q_1)/p_1``; ``stated_base=True`` uses ``p_0 q_1/p_1``
    instead, which reproduces the stated ``delta`` sequence.
    """
    _, p, q = reduced_network(d, t, 1.0, kind)
    xi = np.empty(t)
    xi[0] = (p[0] * q[1] if stated_base else 1 - p[0] * q[1]) / p[1]
    xi[1] = (1 - p[0] * q[1] - p[1] * q[2]) / (q[1] * p[2] * (d - 1))
    for s in range(2, t):
        xi[s] = p[s] / (q[s] * p[s + 1] * (d - 1)) * xi[s - 1] - p[s - 1] * p[s] * q[s + 1] / (
            q[s - 1] * q[s] * p[s + 1] * (d - 1) ** 2
        ) * xi[s - 2]
    return xi
