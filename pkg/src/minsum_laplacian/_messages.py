"""Slot layout shared by both message-passing solvers.

Every undirected edge ``e`` carries two messages, one towards each endpoint.
They live in a flat array of length ``2m``: slot ``2e`` is the message
towards ``tails[e]`` and slot ``2e + 1`` the one towards ``heads[e]``. The
partner slot ``k ^ 1`` is therefore the message on the same edge towards the
other endpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidParameter


@dataclass(frozen=True)
class SlotLayout:
    """Sparse operators for summing incoming messages.

    Attributes
    ----------
    target : ndarray
        ``target[k]`` is the vertex slot ``k`` points at.
    source : ndarray
        ``source[k]`` is the other endpoint ``w`` of the edge.
    edge : ndarray
        Edge index of each slot.
    sign : ndarray
        Incidence sign ``A_{target, edge}``: +1 for even slots, -1 for odd.
    gather : sparse (2m, 2m)
        ``(gather @ y)[k]`` sums ``y`` over slots ``f -> w`` with ``w =
        source[k]`` and ``f`` distinct from ``edge[k]``. No subtraction is
        involved, so the sums are exact.
    into : sparse (n, 2m)
        ``(into @ y)[v]`` sums ``y`` over all slots pointing at ``v``.
    """

    target: np.ndarray
    source: np.ndarray
    edge: np.ndarray
    sign: np.ndarray
    gather: sp.csr_array
    into: sp.csr_array
    n_vertices: int = field(default=0)


_CACHE_ATTR = "_slot_layout"


def layout(graph):
    """Slot operators for ``graph`` (computed once and cached on the graph)."""
    cached = graph.__dict__.get(_CACHE_ATTR)
    if cached is not None:
        return cached
    m, n = graph.n_edges, graph.n_vertices
    target = np.empty(2 * m, dtype=np.int64)
    target[0::2] = graph.tails
    target[1::2] = graph.heads
    source = np.empty(2 * m, dtype=np.int64)
    source[0::2] = graph.heads
    source[1::2] = graph.tails
    edge = np.repeat(np.arange(m), 2)
    sign = np.tile([1.0, -1.0], m)

    # slots grouped by the vertex they point at
    by_target = [[] for _ in range(n)]
    for k, v in enumerate(target.tolist()):
        by_target[v].append(k)
    rows, cols = [], []
    for k in range(2 * m):
        e = edge[k]
        for j in by_target[source[k]]:
            if edge[j] != e:
                rows.append(k)
                cols.append(j)
    gather = sp.csr_array(
        (np.ones(len(rows)), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(2 * m, 2 * m),
    )
    into = sp.csr_array((np.ones(2 * m), (target, np.arange(2 * m))), shape=(n, 2 * m))
    lay = SlotLayout(target, source, edge, sign, gather, into, n)
    graph.__dict__[_CACHE_ATTR] = lay
    return lay


def slot(graph, e, v):
    """Slot index of the message on edge ``e`` towards endpoint ``v``."""
    if graph.tails[e] == v:
        return 2 * e
    if graph.heads[e] == v:
        return 2 * e + 1
    raise InvalidParameter(f"vertex {v} is not an endpoint of edge {e}")


def perturbation_vector(graph, perturbation):
    """Normalise a perturbation to a flat slot array.

    Accepts ``None`` (zeros), an array of length ``2m`` in slot order, or a
    mapping ``{(edge, endpoint): value}``; unlisted pairs are 0.
    """
    m2 = 2 * graph.n_edges
    if perturbation is None:
        return np.zeros(m2)
    if isinstance(perturbation, dict):
        p = np.zeros(m2)
        for (e, v), val in perturbation.items():
            p[slot(graph, int(e), int(v))] = float(val)
        return p
    p = np.asarray(perturbation, dtype=float)
    if p.shape != (m2,):
        raise InvalidParameter(f"perturbation has shape {p.shape}, expected ({m2},)")
    return p.copy()


def slot_map(graph, values):
    """Slot array as a ``{(edge, endpoint): value}`` dict."""
    lay = layout(graph)
    return {(int(lay.edge[k]), int(lay.target[k])): float(values[k]) for k in range(len(values))}
