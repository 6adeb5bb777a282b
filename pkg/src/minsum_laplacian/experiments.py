"""Decay of walk difference norms with time, and a log-log slope fit."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import graph as G
from .errors import InvalidParameter
from .walks import delta_inf_norm, delta_sequence, delta_tilde_sequence, unit_difference

WHICH = ("delta", "delta-sum", "delta-tilde", "delta-tilde-sum")
FAMILIES = ("k_connected_cycle", "torus")
MIN_FIT_POINTS = 4


def family_graph(family, d, n):
    """Degree-``d`` member of a family: a ``d/2``-connected cycle on ``n``
    vertices, or a ``d/2``-dimensional torus with side ``n``."""
    if d < 4 or d % 2:
        raise InvalidParameter(f"d must be even and >= 4, got {d}")
    if family == "k_connected_cycle":
        return G.k_connected_cycle(n, d // 2)
    if family == "torus":
        return G.torus([n] * (d // 2))
    raise InvalidParameter(f"unknown family {family!r}; choose from {FAMILIES}")


def decay_curve(graph, t_max, which="delta"):
    """``(t, norm)`` rows for ``t = 1..t_max``.

    ``delta`` is ``||Delta^(t)||``, ``delta-sum`` is ``||Delta^(t) + Delta^(t+1)||``,
    ``delta-tilde`` is ``||Delta~^(t)||`` and ``delta-tilde-sum`` is
    ``||Delta~^(t-1) + Delta~^(t)||`` with ``Delta~^(0)_e = 1_tail - 1_head``.
    """
    if which not in WHICH:
        raise InvalidParameter(f"unknown curve {which!r}; choose from {WHICH}")
    if t_max < 1:
        raise InvalidParameter(f"t-max must be >= 1, got {t_max}")
    # stream the matrices: each is m x n, so keep at most two alive
    if which in ("delta", "delta-sum"):
        seq = delta_sequence(graph, t_max + (which == "delta-sum"))
    else:
        seq = delta_tilde_sequence(graph, t_max)
        if which == "delta-tilde-sum":
            seq = itertools.chain([unit_difference(graph)], seq)
    if which.endswith("-sum"):
        seq = (a + b for a, b in itertools.pairwise(seq))
    t = np.arange(1, t_max + 1)
    return t, np.array([delta_inf_norm(D) for D in seq])


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of ``log norm`` against ``log t`` on ``1 <= t <= window``."""

    window: int
    n_points: int
    slope: float | None
    intercept: float | None

    @property
    def ok(self):
        return self.slope is not None


def fit_window(graph):
    """Last time before walks can wrap around: ``floor(diameter / d)``."""
    d = graph.regular_degree() or int(graph.degrees.max())
    return graph.diameter() // d


def fit_slope(t, values, window):
    t = np.asarray(t)
    values = np.asarray(values)
    mask = (t <= window) & (values > 0)
    k = int(mask.sum())
    if k < MIN_FIT_POINTS:
        return SlopeFit(window, k, None, None)
    slope, intercept = np.polyfit(np.log(t[mask]), np.log(values[mask]), 1)
    return SlopeFit(window, k, float(slope), float(intercept))


def tv_decay(family, d, n, t_max, which="delta"):
    """Decay table and slope fit for one graph family member."""
    if t_max < 3:
        raise InvalidParameter(f"t-max must be >= 3, got {t_max}")
    g = family_graph(family, d, n)
    t, vals = decay_curve(g, t_max, which)
    return t, vals, fit_slope(t, vals, fit_window(g))


def svg_plot(t, values, title=""):
    """Minimal self-contained SVG of ``values`` against ``t`` on log-log axes."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v > 0
    t, v = t[keep], v[keep]
    W, H, pad = 480, 320, 48
    if len(t) == 0:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}"></svg>\n'
    lx, ly = np.log10(t), np.log10(v)
    x0, x1 = lx.min(), max(lx.max(), lx.min() + 1e-9)
    y0, y1 = ly.min(), max(ly.max(), ly.min() + 1e-9)
    px = pad + (lx - x0) / (x1 - x0) * (W - 2 * pad)
    py = H - pad - (ly - y0) / (y1 - y0) * (H - 2 * pad)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">\n'
        f'<rect width="{W}" height="{H}" fill="white"/>\n'
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>\n'
        f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">t (log scale, {t.min():g} to {t.max():g})</text>\n'
        f'<text x="14" y="{H / 2}" transform="rotate(-90 14 {H / 2})" text-anchor="middle">'
        f"norm (log scale, {v.min():.3g} to {v.max():.3g})</text>\n"
        f'<text x="{W / 2}" y="20" text-anchor="middle">{title}</text>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>\n'
        "</svg>\n"
    )
