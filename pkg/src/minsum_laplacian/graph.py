"""Weighted graphs, generators, leaf stripping and text I/O.

A :class:`WeightedGraph` is simple, connected and positively weighted. Its
edge list is stored in construction order together with the (tail, head)
orientation given by the caller; that ordered, oriented list *is* the
directed edge set used by the flow solver, the incidence matrix and every
per-edge vector in the package.
"""
from __future__ import annotations

import re
from collections import deque
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import (
    Disconnected,
    DuplicateEdge,
    InvalidInjection,
    InvalidParameter,
    NonPositiveWeight,
    ParseError,
    SelfLoop,
)

#: Graphs with at most this many vertices expose dense matrices.
DENSE_CAP = 2048


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


class WeightedGraph:
    """Immutable simple, connected, undirected graph with positive weights.

    Use :func:`build_graph` or one of the generators rather than calling the
    constructor directly; the constructor trusts its input.

    Attributes
    ----------
    n_vertices : int
    tails, heads : ndarray of int
        Edge ``e`` is oriented ``tails[e] -> heads[e]``.
    weights : ndarray of float
        Conductance ``W_vw`` of each edge; the resistance is ``1 / W_vw``.
    """

    def __init__(self, n_vertices, tails, heads, weights):
        self.n_vertices = int(n_vertices)
        self.tails = _frozen(np.asarray(tails, dtype=np.int64))
        self.heads = _frozen(np.asarray(heads, dtype=np.int64))
        self.weights = _frozen(np.asarray(weights, dtype=float))
        n = self.n_vertices
        self.degrees = _frozen(
            np.bincount(self.tails, minlength=n) + np.bincount(self.heads, minlength=n)
        )
        self.weighted_degrees = _frozen(
            np.bincount(self.tails, weights=self.weights, minlength=n)
            + np.bincount(self.heads, weights=self.weights, minlength=n)
        )
        incident = [[] for _ in range(n)]
        for e, (v, w) in enumerate(zip(self.tails.tolist(), self.heads.tolist())):
            incident[v].append(e)
            incident[w].append(e)
        self._incident = tuple(tuple(es) for es in incident)
        self._index = {}
        for e, (v, w) in enumerate(zip(self.tails.tolist(), self.heads.tolist())):
            self._index[(v, w)] = e
            self._index[(w, v)] = e

    # -- basic structure -------------------------------------------------

    @property
    def n_edges(self):
        return len(self.weights)

    @property
    def edges(self):
        """Edges as ``(tail, head, weight)`` tuples in stored order."""
        return [
            (int(v), int(w), float(x))
            for v, w, x in zip(self.tails, self.heads, self.weights)
        ]

    def __repr__(self):
        return f"WeightedGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and np.array_equal(self.tails, other.tails)
            and np.array_equal(self.heads, other.heads)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def incident(self, v):
        """Indices of the edges touching ``v``, in edge order."""
        return self._incident[v]

    def neighbors(self, v):
        return [self.other(e, v) for e in self._incident[v]]

    def other(self, e, v):
        """The endpoint of edge ``e`` that is not ``v``."""
        t, h = int(self.tails[e]), int(self.heads[e])
        if v == t:
            return h
        if v == h:
            return t
        raise InvalidParameter(f"vertex {v} is not an endpoint of edge {e}")

    def edge_index(self, v, w):
        """Index of the edge joining ``v`` and ``w`` (either orientation)."""
        try:
            return self._index[(v, w)]
        except KeyError:
            raise InvalidParameter(f"no edge between {v} and {w}") from None

    def weight(self, v, w):
        return float(self.weights[self.edge_index(v, w)])

    def sign(self, v, e):
        """Incidence entry ``A_ve``: +1 if ``e`` leaves ``v``, -1 if it enters."""
        if self.tails[e] == v:
            return 1
        if self.heads[e] == v:
            return -1
        return 0

    @property
    def min_degree(self):
        return int(self.degrees.min()) if self.n_vertices else 0

    def regular_degree(self):
        """Common degree if the graph is regular, else ``None``."""
        if self.n_vertices == 0:
            return None
        d = int(self.degrees[0])
        return d if np.all(self.degrees == d) else None

    def common_weight(self):
        """Shared edge weight if all weights are equal, else ``None``."""
        if self.n_edges == 0:
            return None
        w = float(self.weights[0])
        return w if np.all(self.weights == w) else None

    # -- matrices --------------------------------------------------------

    def _maybe_dense(self, m):
        if self.n_vertices <= DENSE_CAP:
            return m.toarray()
        return m.tocoo()

    def adjacency_sparse(self):
        n = self.n_vertices
        rows = np.concatenate([self.tails, self.heads])
        cols = np.concatenate([self.heads, self.tails])
        vals = np.concatenate([self.weights, self.weights])
        return sp.csr_array((vals, (rows, cols)), shape=(n, n))

    def laplacian_sparse(self):
        return (sp.diags_array(self.weighted_degrees) - self.adjacency_sparse()).tocsr()

    def incidence_sparse(self):
        m = self.n_edges
        rows = np.concatenate([self.tails, self.heads])
        cols = np.concatenate([np.arange(m), np.arange(m)])
        vals = np.concatenate([np.ones(m), -np.ones(m)])
        return sp.csr_array((vals, (rows, cols)), shape=(self.n_vertices, m))

    def adjacency(self):
        """Weighted adjacency ``W`` (dense up to :data:`DENSE_CAP` vertices)."""
        return self._maybe_dense(self.adjacency_sparse())

    def laplacian(self):
        """``L = D - W``."""
        return self._maybe_dense(self.laplacian_sparse())

    def incidence(self):
        """Signed vertex-edge incidence matrix ``A`` (vertices by edges)."""
        return self._maybe_dense(self.incidence_sparse())

    def degree_matrix(self):
        return self._maybe_dense(sp.diags_array(self.weighted_degrees).tocsr())

    def resistance(self):
        """Diagonal edge resistance matrix ``R`` with ``R_ee = 1 / W_e``."""
        m = sp.diags_array(1.0 / self.weights).tocsr()
        return m.toarray() if self.n_edges <= DENSE_CAP else m.tocoo()

    def unweighted_adjacency_sparse(self):
        a = self.adjacency_sparse()
        a.data[:] = 1.0
        return a

    def diameter(self):
        """Hop diameter."""
        dist = shortest_path(self.unweighted_adjacency_sparse(), directed=False, unweighted=True)
        return int(dist.max())


# -- construction --------------------------------------------------------


def build_graph(edge_list, n_vertices=None):
    """Validate an edge list and build a :class:`WeightedGraph`.

    Parameters
    ----------
    edge_list : iterable of (int, int, float)
        ``(tail, head, weight)`` triples. Input order fixes edge indices and
        the orientation fixes the sign convention for flows.
    n_vertices : int, optional
        Defaults to one more than the largest vertex id.

    Raises
    ------
    SelfLoop, DuplicateEdge, NonPositiveWeight, Disconnected, InvalidParameter
    """
    tails, heads, weights = [], [], []
    seen = {}
    for i, item in enumerate(edge_list):
        try:
            v, w, x = item
        except (TypeError, ValueError):
            raise InvalidParameter(f"edge #{i} is not a (tail, head, weight) triple: {item!r}") from None
        if int(v) != v or int(w) != w:
            raise InvalidParameter(f"edge #{i} has non-integer endpoints {item!r}")
        v, w, x = int(v), int(w), float(x)
        if v < 0 or w < 0:
            raise InvalidParameter(f"edge #{i} has a negative vertex id: ({v}, {w})")
        if v == w:
            raise SelfLoop(f"self-loop at vertex {v} (edge #{i})")
        if not x > 0 or not np.isfinite(x):
            raise NonPositiveWeight(f"edge #{i} ({v}, {w}) has weight {x}; weights must be positive")
        key = (min(v, w), max(v, w))
        if key in seen:
            raise DuplicateEdge(f"edge #{i} ({v}, {w}) duplicates edge #{seen[key]}")
        seen[key] = i
        tails.append(v)
        heads.append(w)
        weights.append(x)

    top = max(max(tails, default=-1), max(heads, default=-1)) + 1
    if n_vertices is None:
        n_vertices = top
    elif top > n_vertices:
        raise InvalidParameter(f"vertex id {top - 1} out of range for n_vertices={n_vertices}")

    graph = WeightedGraph(n_vertices, tails, heads, weights)
    if n_vertices > 1:
        n_comp, labels = connected_components(graph.adjacency_sparse(), directed=False)
        if n_comp > 1:
            stray = int(np.flatnonzero(labels != labels[0])[0])
            raise Disconnected(
                f"graph has {n_comp} connected components; vertex {stray} is not reachable from vertex 0"
            )
    return graph


def check_injection(b, graph, rtol=1e-12):
    """Validate an injection vector and return it as a float array.

    ``b`` must have one entry per vertex and sum to zero within
    ``rtol * ||b||_1``.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (graph.n_vertices,):
        raise InvalidInjection(
            f"injection has shape {b.shape}, expected ({graph.n_vertices},)"
        )
    if not np.all(np.isfinite(b)):
        raise InvalidInjection("injection has non-finite entries")
    total = b.sum()
    if abs(total) > rtol * np.abs(b).sum():
        raise InvalidInjection(f"injection sums to {total:g}; it must sum to zero")
    return b


def dipole(n, source, sink, amount=1.0):
    """Unit current entering at ``source`` and leaving at ``sink``."""
    b = np.zeros(n)
    b[source] += amount
    b[sink] -= amount
    return b


def require_leafless(graph):
    from .errors import HasLeaves

    if graph.n_vertices and graph.min_degree < 2:
        leaf = int(np.argmin(graph.degrees))
        raise HasLeaves(f"vertex {leaf} has degree {int(graph.degrees[leaf])}; the graph must have no leaves")


def require_regular(graph, equal_weights=True):
    """Return ``(d, omega)`` for a regular graph, raising otherwise."""
    from .errors import NotRegular, UnequalWeights

    d = graph.regular_degree()
    if d is None:
        raise NotRegular(
            f"graph is not regular (degrees range {graph.degrees.min()}..{graph.degrees.max()})"
        )
    omega = graph.common_weight()
    if equal_weights and omega is None:
        raise UnequalWeights("all edges must share the same weight")
    return d, omega


# -- generators -------------------------------------------------------------


def cycle(n, weight=1.0):
    """Cycle ``0 - 1 - ... - (n-1) - 0`` with edges ``(i, i+1 mod n)``."""
    if n < 3:
        raise InvalidParameter(f"cycle needs n >= 3, got {n}")
    return build_graph([(i, (i + 1) % n, weight) for i in range(n)], n)


def weighted_cycle(weights):
    """Cycle whose edge ``(i, i+1 mod n)`` carries ``weights[i]``."""
    n = len(weights)
    if n < 3:
        raise InvalidParameter(f"cycle needs n >= 3, got {n}")
    return build_graph([(i, (i + 1) % n, w) for i, w in enumerate(weights)], n)


def k_connected_cycle(n, k, weight=1.0):
    """Circulant graph joining each vertex to its ``k`` nearest neighbours per side."""
    if k < 1 or 2 * k >= n:
        raise InvalidParameter(f"k-connected cycle needs 1 <= k and 2k < n, got n={n}, k={k}")
    return build_graph([(i, (i + j) % n, weight) for i in range(n) for j in range(1, k + 1)], n)


def torus(dims, weight=1.0):
    """Periodic grid with the given side lengths (each at least 3)."""
    dims = [int(s) for s in dims]
    if not dims or any(s < 3 for s in dims):
        raise InvalidParameter(f"torus sides must all be >= 3, got {dims}")
    n = int(np.prod(dims))
    coords = np.array(np.unravel_index(np.arange(n), dims)).T
    edges = []
    for v in range(n):
        for axis, side in enumerate(dims):
            c = coords[v].copy()
            c[axis] = (c[axis] + 1) % side
            edges.append((v, int(np.ravel_multi_index(c, dims)), weight))
    return build_graph(edges, n)


def petersen(weight=1.0):
    outer = [(i, (i + 1) % 5, weight) for i in range(5)]
    spokes = [(i, i + 5, weight) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5, weight) for i in range(5)]
    return build_graph(outer + spokes + inner, 10)


def complete(n, weight=1.0):
    if n < 2:
        raise InvalidParameter(f"complete graph needs n >= 2, got {n}")
    return build_graph([(i, j, weight) for i in range(n) for j in range(i + 1, n)], n)


def path(n, weight=1.0):
    if n < 2:
        raise InvalidParameter(f"path needs n >= 2, got {n}")
    return build_graph([(i, i + 1, weight) for i in range(n - 1)], n)


def generate(family, *args, weight=1.0, **kwargs):
    """Build a named graph family.

    ``family`` is one of ``cycle``, ``k_connected_cycle``, ``torus``,
    ``petersen``, ``complete``; remaining arguments go to the generator.
    """
    families = {
        "cycle": cycle,
        "k_connected_cycle": k_connected_cycle,
        "torus": torus,
        "petersen": petersen,
        "complete": complete,
    }
    try:
        fn = families[family]
    except KeyError:
        raise InvalidParameter(f"unknown graph family {family!r}; choose from {sorted(families)}") from None
    return fn(*args, weight=weight, **kwargs)


def random_leafless(n, rng, degrees=(2, 3, 4), weight_range=(0.5, 2.0), max_tries=10_000):
    """Random simple connected graph with minimum degree 2.

    Degrees are drawn from ``degrees``, stubs are paired uniformly at random
    (configuration model) and the candidate is rejected until it is simple,
    connected and leafless. Weights are uniform in ``weight_range``.
    """
    for _ in range(max_tries):
        deg = rng.choice(degrees, size=n)
        if deg.sum() % 2:
            continue
        stubs = np.repeat(np.arange(n), deg)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = {tuple(sorted(p)) for p in pairs.tolist()}
        if len(keys) != len(pairs):
            continue
        ws = rng.uniform(*weight_range, size=len(pairs))
        edges = [(int(v), int(w), float(x)) for (v, w), x in zip(pairs, ws)]
        try:
            g = build_graph(edges, n)
        except Disconnected:
            continue
        if g.min_degree >= 2:
            return g
    raise InvalidParameter(f"could not sample a leafless graph on {n} vertices")


# -- leaves -----------------------------------------------------------------


class LeafStripResult(NamedTuple):
    """Outcome of :func:`leaf_strip`.

    ``graph`` is the leafless core with vertices relabelled ``0..n'-1``;
    ``vertex_map[i]`` / ``edge_map[j]`` give the original ids of core vertex
    ``i`` and core edge ``j``. ``fixed_flows`` maps original edge indices to
    the flow forced on them by Kirchhoff's law.
    """

    graph: WeightedGraph
    injection: np.ndarray
    fixed_flows: dict
    vertex_map: np.ndarray
    edge_map: np.ndarray


def leaf_strip(graph, injection):
    """Remove degree-1 vertices one at a time, fixing the flow on their edge.

    A leaf ``w`` with unique edge ``e`` must carry ``x_e = A_we * b_w``; its
    injection is then folded into the neighbour. Leaves are processed in
    increasing vertex order (with newly created leaves queued behind), so the
    result is deterministic.
    """
    b = check_injection(injection, graph).copy()
    n = graph.n_vertices
    deg = graph.degrees.astype(np.int64).copy()
    alive_v = np.ones(n, dtype=bool)
    alive_e = np.ones(graph.n_edges, dtype=bool)
    fixed = {}

    queue = deque(int(v) for v in np.flatnonzero(deg == 1))
    while queue:
        w = queue.popleft()
        if not alive_v[w] or deg[w] != 1:
            continue
        e = next(f for f in graph.incident(w) if alive_e[f])
        u = graph.other(e, w)
        fixed[e] = graph.sign(w, e) * b[w]
        b[u] += b[w]
        b[w] = 0.0
        alive_v[w] = False
        alive_e[e] = False
        deg[w] = 0
        deg[u] -= 1
        if deg[u] == 1:
            queue.append(u)
        elif deg[u] == 0:
            # last vertex of a tree
            alive_v[u] = False

    vertex_map = np.flatnonzero(alive_v)
    edge_map = np.flatnonzero(alive_e)
    relabel = -np.ones(n, dtype=np.int64)
    relabel[vertex_map] = np.arange(len(vertex_map))
    core = WeightedGraph(
        len(vertex_map),
        relabel[graph.tails[edge_map]],
        relabel[graph.heads[edge_map]],
        graph.weights[edge_map],
    )
    return LeafStripResult(core, b[vertex_map], fixed, vertex_map, edge_map)


# -- text I/O ---------------------------------------------------------------


def _data_lines(path):
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_graph_lines(lines, path=None):
    edges = []
    for lineno, fields in lines:
        if len(fields) != 3:
            raise ParseError(f"expected 'tail head weight', got {len(fields)} fields", path, lineno)
        try:
            v, w, x = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError:
            raise ParseError(f"cannot parse edge {' '.join(fields)!r}", path, lineno) from None
        edges.append((lineno, (v, w, x)))
    try:
        return build_graph([e for _, e in edges])
    except (SelfLoop, DuplicateEdge, NonPositiveWeight, InvalidParameter) as exc:
        # point at the offending line when we can tell which one it was
        msg = str(exc)
        hit = re.search(r"edge #(\d+)", msg)
        if hit:
            raise ParseError(msg, path, edges[int(hit.group(1))][0]) from exc
        raise ParseError(msg, path) from exc


def read_graph(path):
    """Read ``tail head weight`` lines; ``#`` starts a comment."""
    return parse_graph_lines(_data_lines(path), path)


def read_injection(path, n_vertices):
    """Read ``vertex value`` lines; vertices not listed get 0."""
    b = np.zeros(n_vertices)
    seen = {}
    for lineno, fields in _data_lines(path):
        if len(fields) != 2:
            raise ParseError(f"expected 'vertex value', got {len(fields)} fields", path, lineno)
        try:
            v, x = int(fields[0]), float(fields[1])
        except ValueError:
            raise ParseError(f"cannot parse {' '.join(fields)!r}", path, lineno) from None
        if not 0 <= v < n_vertices:
            raise ParseError(f"vertex {v} out of range 0..{n_vertices - 1}", path, lineno)
        if v in seen:
            raise ParseError(f"vertex {v} already given on line {seen[v]}", path, lineno)
        seen[v] = lineno
        b[v] = x
    return b


def format_graph(graph):
    return "".join(f"{v} {w} {x!r}\n" for v, w, x in graph.edges)


def write_graph(graph, path):
    Path(path).write_text(format_graph(graph), encoding="utf-8")


def write_injection(b, path):
    Path(path).write_text("".join(f"{v} {float(x)!r}\n" for v, x in enumerate(b) if x != 0), encoding="utf-8")
