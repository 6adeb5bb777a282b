"""Min-sum message passing with quadratic messages for ``L nu = b``.

Each message ``e -> v`` is the quadratic ``W z^2 + w z + const`` in the
voltage ``z`` of ``v``; only the two leading coefficients are tracked.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._messages import layout, perturbation_vector, slot
from .constants import regular_constants
from .errors import InvalidParameter, TooEarly, ZeroDenominator
from .graph import check_injection, require_leafless, require_regular


@dataclass(frozen=True)
class VoltageMessageState:
    """Quadratic (``quad``) and linear (``lin``) coefficients per message slot."""

    quad: np.ndarray
    lin: np.ndarray
    iteration: int = 0

    def at(self, graph, e, v):
        """``(W, w)`` of the message on edge ``e`` towards ``v``."""
        k = slot(graph, e, v)
        return float(self.quad[k]), float(self.lin[k])


def init_voltage(graph, perturbation=None):
    """Initial messages ``W^0 = W_e`` and ``w^0 = p`` (0 by default).

    Raises
    ------
    HasLeaves
    """
    require_leafless(graph)
    quad = np.repeat(graph.weights, 2).astype(float)
    return VoltageMessageState(quad, perturbation_vector(graph, perturbation), 0)


def step_voltage(state, graph, injection):
    """One synchronous update of every message from the previous buffer."""
    b = np.asarray(injection, dtype=float)
    lay = layout(graph)
    we = graph.weights[lay.edge]
    sum_quad = lay.gather @ state.quad
    sum_lin = lay.gather @ state.lin
    denom = we + sum_quad
    if np.any(denom == 0):
        raise ZeroDenominator("vanishing denominator in voltage message update")
    quad = we * sum_quad / denom
    lin = we * (sum_lin - b[lay.source]) / denom
    return VoltageMessageState(quad, lin, state.iteration + 1)


def estimate_voltage(state, graph, injection):
    """``nu_v = (b_v - sum_e w_{e->v}) / sum_e W_{e->v}``."""
    if state.iteration < 1:
        raise TooEarly("voltage estimate needs at least one iteration")
    b = np.asarray(injection, dtype=float)
    lay = layout(graph)
    denom = lay.into @ state.quad
    if np.any(denom == 0):
        raise ZeroDenominator("vanishing denominator in voltage estimate")
    return (b - lay.into @ state.lin) / denom


def averaging_weights(d, t, which):
    """Convex weights ``(k_{t-1}, k_t) / (k_{t-1} + k_t)`` for the averaged estimators."""
    if t < 4:
        raise TooEarly(f"averaged estimate needs t >= 4, got t={t}")
    prev, curr = regular_constants(d, t - 1), regular_constants(d, t)
    a, b = (prev.b, curr.b) if which == "voltage" else (prev.c, curr.c)
    return a / (a + b), b / (a + b)


def estimate_voltage_averaged(state_prev, state_curr, graph, injection, d=None, t=None):
    """Average of the estimates at ``t-1`` and ``t`` weighted by ``b_{d,t-1}``, ``b_{d,t}``.

    Meant for d-regular graphs with equal weights, where the plain estimate
    alternates in sign on bipartite graphs.

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
    a0, a1 = averaging_weights(d, t, "voltage")
    return a0 * estimate_voltage(state_prev, graph, injection) + a1 * estimate_voltage(
        state_curr, graph, injection
    )


def run_voltage(graph, injection, iters, perturbation=None):
    """Estimates at ``t = 1..iters`` as an ``(iters, n)`` array."""
    if iters < 1:
        raise InvalidParameter(f"iters must be >= 1, got {iters}")
    b = check_injection(injection, graph)
    state = init_voltage(graph, perturbation)
    out = np.empty((iters, graph.n_vertices))
    for t in range(iters):
        state = step_voltage(state, graph, b)
        out[t] = estimate_voltage(state, graph, b)
    return out


def optimal_voltage_perturbation(graph, nu):
    """Perturbation ``p_{e->v} = -W_e nu_w`` that makes every estimate exact."""
    lay = layout(graph)
    return -graph.weights[lay.edge] * np.asarray(nu, dtype=float)[lay.source]
