"""Min-sum message passing with quadratic messages for the electrical flow.

Each message ``e -> v`` is the quadratic ``R z^2 + r z + const`` in the flow
``z`` on ``e``. Signs follow the stored edge orientation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._messages import layout, perturbation_vector, slot
from .errors import InvalidParameter, TooEarly, ZeroDenominator
from .graph import check_injection, leaf_strip, require_leafless, require_regular
from .minsum_voltage import averaging_weights


@dataclass(frozen=True)
class FlowMessageState:
    """Quadratic (``quad``) and linear (``lin``) coefficients per message slot."""

    quad: np.ndarray
    lin: np.ndarray
    iteration: int = 0

    def at(self, graph, e, v):
        """``(R, r)`` of the message on edge ``e`` towards ``v``."""
        k = slot(graph, e, v)
        return float(self.quad[k]), float(self.lin[k])


def init_flow(graph, perturbation=None):
    """Initial messages ``R^0 = 1 / W_e`` and ``r^0 = p`` (0 by default).

    Raises
    ------
    HasLeaves
    """
    require_leafless(graph)
    quad = np.repeat(1.0 / graph.weights, 2)
    return FlowMessageState(quad, perturbation_vector(graph, perturbation), 0)


def step_flow(state, graph, injection):
    """One synchronous update of every message from the previous buffer."""
    b = np.asarray(injection, dtype=float)
    lay = layout(graph)
    re = 1.0 / graph.weights[lay.edge]
    cond = lay.gather @ (1.0 / state.quad)
    if np.any(cond == 0):
        raise ZeroDenominator("vanishing denominator in flow message update")
    quad = re + 1.0 / cond
    # lay.sign[k] is A_{target,edge}; the partner slot gives A_{source,edge}
    a_we = lay.sign[np.arange(len(lay.sign)) ^ 1]
    signed = lay.gather @ (lay.sign * state.lin / state.quad)
    lin = -a_we * (signed + b[lay.source]) / cond
    return FlowMessageState(quad, lin, state.iteration + 1)


def estimate_flow(state, graph):
    """``x_e = -(r_{e->v} + r_{e->w}) / (R_{e->v} + R_{e->w} - R_e)``."""
    if state.iteration < 1:
        raise TooEarly("flow estimate needs at least one iteration")
    num = state.lin[0::2] + state.lin[1::2]
    denom = state.quad[0::2] + state.quad[1::2] - 1.0 / graph.weights
    if np.any(denom == 0):
        raise ZeroDenominator("vanishing denominator in flow estimate")
    return -num / denom


def estimate_flow_averaged(state_prev, state_curr, graph, d=None, t=None):
    """Average of the flow estimates at ``t-1`` and ``t`` weighted by ``c_{d,t-1}``, ``c_{d,t}``.

    Raises
    ------
    NotRegular, UnequalWeights, TooEarly
    """
    deg, _ = require_regular(graph)
    d = deg if d is None else d
    if d != deg:
        raise InvalidParameter(f"d={d} does not match the graph degree {deg}")
    t = state_curr.iteration if t is None else t
    if state_prev.iteration + 1 != state_curr.iteration or state_curr.iteration != t:
        raise InvalidParameter("states must be consecutive iterations t-1 and t")
    a0, a1 = averaging_weights(d, t, "flow")
    return a0 * estimate_flow(state_prev, graph) + a1 * estimate_flow(state_curr, graph)


def run_flow(graph, injection, iters, perturbation=None):
    """Estimates at ``t = 1..iters`` as an ``(iters, m)`` array."""
    if iters < 1:
        raise InvalidParameter(f"iters must be >= 1, got {iters}")
    b = check_injection(injection, graph)
    state = init_flow(graph, perturbation)
    out = np.empty((iters, graph.n_edges))
    for t in range(iters):
        state = step_flow(state, graph, b)
        out[t] = estimate_flow(state, graph)
    return out


def run_flow_with_leaves(graph, injection, iters):
    """Strip leaves, run the solver on the core and merge the fixed leaf flows.

    Returns an ``(iters, m)`` array over the original edges. A tree has an
    empty core, in which case every row is the fixed flow.
    """
    b = check_injection(injection, graph)
    core = leaf_strip(graph, b)
    out = np.zeros((iters, graph.n_edges))
    for e, x in core.fixed_flows.items():
        out[:, e] = x
    if core.graph.n_edges:
        out[:, core.edge_map] = run_flow(core.graph, core.injection, iters)
    return out


def optimal_flow_perturbation(graph, nu):
    """Perturbation ``p_{e->v} = -A_{we} nu_w`` that makes every estimate exact."""
    lay = layout(graph)
    a_we = lay.sign[np.arange(len(lay.sign)) ^ 1]
    return -a_we * np.asarray(nu, dtype=float)[lay.source]
