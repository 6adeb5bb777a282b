"""Constants of the d-regular error characterization.

On a d-regular graph with equal weights the min-sum errors are fixed
multiples of non-backtracking walk averages; the multiples ``b_{d,t}``
(voltage) and ``c_{d,t}`` (flow) come from a gambler's-ruin reduction of the
computation tree. Two versions are computed:

* the *stated* sequences, using the commonly quoted base value
  ``delta_0 = 1/d`` and end formulas, and
* the *exact* sequences, whose base value ``delta_0 = d - 1 + 1/d`` and end
  formulas follow from the hitting-probability recursion of the reduced
  network. Only these reproduce the computation-tree inverse, and they are the
  ones used for predictions and averaging.

Both satisfy the bound chain ``1/2 <= (d-2)/(d-1) <= b <= c < 4`` and ``c >= 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class RegularConstants:
    """Characterization constants for degree ``d`` at time ``t``.

    Attributes
    ----------
    h : ndarray
        ``h[s] = 1/((d-1)^s - 1)`` for ``s = 0..t+1`` (``h[0]`` is inf).
    delta : ndarray
        Exact ``delta_0..delta_{t-2}``.
    b, c : float
        Exact voltage and flow constants.
    delta_stated : ndarray
        ``delta_0..delta_{t-2}`` from the stated base value ``1/d``.
    b_stated, c_stated : float
        Constants from the stated end formulas.
    """

    d: int
    t: int
    h: np.ndarray
    delta: np.ndarray
    b: float
    c: float
    delta_stated: np.ndarray
    b_stated: float
    c_stated: float

    @property
    def lower(self):
        return (self.d - 2) / (self.d - 1)


def _h(d, s):
    # 1 / ((d-1)^s - 1), written to stay finite for large s
    q = float(d - 1) ** (-s)
    return q / (1.0 - q)


def epsilon_bound(d):
    """Upper bound ``eps_d`` with ``c_{d,t} <= 1 + eps_d`` for all ``t >= 3``."""
    if d < 3:
        raise InvalidParameter(f"need d >= 3, got {d}")
    alpha = 1 + 1 / (d - 1) ** 2
    c_plus = (d * (d - 1) * ((d - 1) ** 2 + 1) - 1) / (d * ((d - 1) ** 2 - 1))
    alpha_bar = alpha * (c_plus / (d - 1) * (1 + 1 / (d - 2)) - 1 / (d * (d - 1) ** 2))
    return alpha_bar - 1


def delta_sequence(d, n, delta0):
    """``delta_0..delta_{n-1}`` with ``delta_1 = 1/(d-1) + d - 1``.

    ``delta_s = (2 + (d-2)^2/(d-1) (1 + h_{s+2})) delta_{s-1}/(d-1) - delta_{s-2}/(d-1)^2``.
    """
    delta = np.empty(max(n, 2))
    delta[0] = delta0
    delta[1] = 1.0 / (d - 1) + d - 1
    k = (d - 2) ** 2 / (d - 1)
    for s in range(2, n):
        delta[s] = (2 + k * (1 + _h(d, s + 2))) * delta[s - 1] / (d - 1) - delta[s - 2] / (d - 1) ** 2
    return delta[:n]


def _check(d, t, b, c, label):
    lo = (d - 2) / (d - 1)
    if not (np.isfinite(b) and np.isfinite(c) and 0.5 <= lo <= b <= c < 4 and c >= 1):
        raise ArithmeticError(f"{label} constant bounds violated for d={d}, t={t}: b={b!r}, c={c!r}")


def regular_constants(d, t, check=True):
    """Evaluate the ``h`` and ``delta`` recursions and the constants ``b_{d,t}``, ``c_{d,t}``.

    Parameters
    ----------
    d : int
        Degree, at least 3.
    t : int
        Time, at least 3.
    check : bool
        Assert the bound chain for both the exact and the stated constants.

    Raises
    ------
    InvalidParameter
    """
    if int(d) != d or d < 3:
        raise InvalidParameter(f"regular constants need integer d >= 3, got {d}")
    if int(t) != t or t < 3:
        raise InvalidParameter(f"regular constants need integer t >= 3, got {t}")
    d, t = int(d), int(t)
    h = np.array([np.inf] + [_h(d, s) for s in range(1, t + 2)])
    g = (d - 2) * (1 + h[t + 1])  # reduced end conductance, voltage tree
    k = (d - 2) * (1 + h[t])  # reduced end conductance, flow tree

    stated = delta_sequence(d, t - 1, 1.0 / d)
    b_stated = (1 + g) * stated[t - 2] / (d - 1) ** 2 - g * stated[t - 3] / (d - 1) ** 3
    c_stated = (1 + 1 / k) * stated[t - 2] / (d - 1) - stated[t - 3] / (d - 1) ** 2

    delta = delta_sequence(d, t - 1, d - 1 + 1.0 / d)
    b = (1 + g) * delta[t - 2] / (d - 1) ** 2 - delta[t - 3] / (d - 1) ** 3
    c = (1 + 1 / k) * delta[t - 2] / (d - 1) - delta[t - 3] / (k * (d - 1) ** 2)

    out = RegularConstants(d, t, h, delta, float(b), float(c), stated, float(b_stated), float(c_stated))
    if check:
        _check(d, t, out.b, out.c, "exact")
        _check(d, t, out.b_stated, out.c_stated, "stated")
    return out
