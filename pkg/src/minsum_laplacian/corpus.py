"""Built-in test graphs and seeded injections."""
from __future__ import annotations

import numpy as np

from . import graph as G

#: Seed for every random graph and injection in the corpus.
SEED = 20240611


def corpus(max_n=None):
    """Named graphs used by the verification suites.

    Random leafless graphs on 6, 8 and 10 vertices come from a fixed seed.
    ``max_n`` drops larger graphs.
    """
    rng = np.random.default_rng(SEED)
    items = [
        ("triangle", G.cycle(3)),
        ("K4", G.complete(4)),
        ("K5", G.complete(5)),
        ("petersen", G.petersen()),
        ("cycle5", G.cycle(5)),
        ("cycle7", G.cycle(7)),
        ("cycle9", G.cycle(9)),
        ("cycle12", G.cycle(12)),
        ("ccycle10", G.k_connected_cycle(10, 2)),
        ("ccycle20", G.k_connected_cycle(20, 2)),
        ("torus3x3", G.torus([3, 3])),
        ("torus4x4", G.torus([4, 4])),
    ]
    for n in (6, 8, 10):
        items.append((f"random{n}", G.random_leafless(n, rng)))
    if max_n is not None:
        items = [(name, g) for name, g in items if g.n_vertices <= max_n]
    return items


def regular_corpus():
    """Equal-weight regular graphs of degree at least 3."""
    return [
        ("K4", G.complete(4)),
        ("K5", G.complete(5)),
        ("petersen", G.petersen()),
        ("ccycle10", G.k_connected_cycle(10, 2)),
        ("torus3x3", G.torus([3, 3])),
    ]


def weighted_cycles():
    """Cycles with three weight patterns on 7, 9 and 12 vertices."""
    out = []
    rng = np.random.default_rng(SEED)
    for n in (7, 9, 12):
        out.append((f"cycle{n}-equal", G.cycle(n, 1.5)))
        out.append((f"cycle{n}-236", G.weighted_cycle([(2.0, 3.0, 6.0)[i % 3] for i in range(n)])))
        out.append((f"cycle{n}-random", G.weighted_cycle(rng.uniform(0.5, 3.0, size=n))))
    return out


def random_injection(n, rng):
    """Zero-sum Gaussian injection."""
    b = rng.normal(size=n)
    return b - b.mean()
