"""Verification suites over the built-in corpus.

Each suite returns a :class:`SuiteResult` listing the maximum residual of
every check against its tolerance. Failures are reported, never raised.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import characterization as C
from . import walks as Wk
from .constants import epsilon_bound, regular_constants
from .corpus import SEED, corpus, random_injection, regular_corpus, weighted_cycles
from .exact import solve_exact
from .minsum_flow import optimal_flow_perturbation, run_flow
from .minsum_voltage import optimal_voltage_perturbation, run_voltage
from .oracles import killed_walk_enumerated, nb_distribution_enumerated, subsets


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual < self.tol)


@dataclass
class SuiteResult:
    suite: str
    checks: list = field(default_factory=list)

    def add(self, name, residual, tol):
        self.checks.append(Check(name, float(residual), tol))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self):
        return max((c.residual for c in self.checks), default=0.0)


def _max(values):
    return max((float(v) for v in values), default=0.0)


def fixpoint(max_n=12, t_max=6, tol=1e-9):
    """Optimal initial messages make both estimates exact at every ``t``."""
    res = SuiteResult("fixpoint")
    rng = np.random.default_rng(SEED)
    for name, g in corpus(max_n):
        b = random_injection(g.n_vertices, rng)
        sol = solve_exact(g, b)
        V = run_voltage(g, b, t_max, optimal_voltage_perturbation(g, sol.voltages))
        F = run_flow(g, b, t_max, optimal_flow_perturbation(g, sol.voltages))
        res.add(f"{name} voltage", np.abs(V - sol.voltages).max(), tol)
        res.add(f"{name} flow", np.abs(F - sol.flows).max(), tol)
    return res


def tree_equivalence(max_n=8, t_max=5, tol=1e-9):
    """Estimates under random initial messages equal the tree optimum at the root."""
    res = SuiteResult("tree-equivalence")
    rng = np.random.default_rng(SEED + 1)
    for name, g in corpus(max_n):
        b = random_injection(g.n_vertices, rng)
        p = rng.normal(size=2 * g.n_edges)
        V = run_voltage(g, b, t_max, p)
        F = run_flow(g, b, t_max, p)
        for t in range(1, t_max + 1):
            fv = _max(
                abs(C.solve_tree_voltage(C.build_tree(g, v, t, C.VOLTAGE), b, p)[0] - V[t - 1, v])
                for v in range(g.n_vertices)
            )
            ff = _max(
                abs(C.solve_tree_flow(C.build_tree(g, e, t, C.FLOW), b, p)[0] - F[t - 1, e])
                for e in range(g.n_edges)
            )
            res.add(f"{name} t={t} voltage", fv, tol)
            res.add(f"{name} t={t} flow", ff, tol)
    return res


def cycle_characterization(t_range=range(2, 9), tol=1e-10):
    """Measured errors on weighted cycles equal the closed forms."""
    res = SuiteResult("cycle-characterization")
    rng = np.random.default_rng(SEED + 2)
    for name, g in weighted_cycles():
        b = random_injection(g.n_vertices, rng)
        sol = solve_exact(g, b)
        V = run_voltage(g, b, max(t_range))
        F = run_flow(g, b, max(t_range))
        omega = g.common_weight()
        for t in t_range:
            pred = C.error_characterization_cycle(g, b, t, sol.voltages)
            res.add(f"{name} t={t} voltage", np.abs(pred.voltage_error - (sol.voltages - V[t - 1])).max(), tol)
            res.add(f"{name} t={t} flow", np.abs(pred.flow_error - (sol.flows - F[t - 1])).max(), tol)
            if omega is not None:
                res.add(f"{name} t={t} alpha=1/2", np.abs(pred.alpha - 0.5).max(), tol)
                res.add(f"{name} t={t} beta=w/(2t+1)", np.abs(pred.beta - omega / (2 * t + 1)).max(), tol)
    return res


def regular_characterization(t_range=range(3, 7), tol=1e-8):
    """Measured errors on regular graphs equal the walk-based predictions."""
    res = SuiteResult("regular-characterization")
    rng = np.random.default_rng(SEED + 3)
    for name, g in regular_corpus():
        b = random_injection(g.n_vertices, rng)
        sol = solve_exact(g, b)
        V = run_voltage(g, b, max(t_range))
        F = run_flow(g, b, max(t_range))
        for t in t_range:
            pred = C.error_characterization_regular(g, b, t, sol.voltages)
            res.add(f"{name} t={t} voltage", np.abs(pred.voltage_error - (sol.voltages - V[t - 1])).max(), tol)
            res.add(f"{name} t={t} flow", np.abs(pred.flow_error - (sol.flows - F[t - 1])).max(), tol)
    return res


def constants(d_range=range(3, 11), t_range=range(3, 51), tol=1e-12):
    """Bound chain for the constants and agreement with the reduced network."""
    res = SuiteResult("constants")
    worst = 0.0
    for d in d_range:
        eps = epsilon_bound(d)
        for t in t_range:
            k = regular_constants(d, t, check=False)
            for b, c in ((k.b, k.c), (k.b_stated, k.c_stated)):
                ok = np.isfinite(b) and np.isfinite(c) and 0.5 <= k.lower <= b <= c < 4 and c >= 1
                worst = max(worst, 0.0 if ok else 1.0)
            worst = max(worst, 0.0 if k.c <= 1 + eps else 1.0)
    res.add("bound chain d=3..10, t=3..50", worst, 0.5)
    # independent route through the gambler's-ruin network
    xi_res = 0.0
    for d in (3, 4, 5):
        for t in (3, 4, 5, 6):
            k = regular_constants(d, t)
            xf = C.xi_sequence(d, t, C.FLOW)
            xv = C.xi_sequence(d, t, C.VOLTAGE)
            g = (d - 2) * (1 + k.h[t + 1])
            xi_res = max(
                xi_res,
                np.abs(xf[:-1] - k.delta).max() / k.delta.max(),
                abs(xf[-1] - k.c),
                abs(xv[-1] - (d - 1) / g * k.b),
                np.abs(C.xi_sequence(d, t, C.FLOW, stated_base=True)[:-1] - k.delta_stated).max()
                / k.delta_stated.max(),
            )
    res.add("xi recursion vs constants", xi_res, 1e-10)
    return res


def walks(tol=1e-12):
    """Walk recursions, enumeration oracles and the killed-walk identities."""
    from .graph import complete, cycle, petersen, torus

    res = SuiteResult("walks")
    for name, g in (("K4", complete(4)), ("petersen", petersen())):
        for t in range(1, 7):
            dist = Wk.nb_distribution(g, t)
            res.add(
                f"{name} t={t} delta~ recursion",
                np.abs(Wk.delta_tilde_recursion(g, t) - Wk.delta_tilde(g, dist)).max(),
                tol,
            )
    for name, g in (("K4", complete(4)), ("K5", complete(5)), ("petersen", petersen()), ("cycle7", cycle(7)), ("torus3x3", torus([3, 3]))):
        for t in range(0, 5):
            P, excl = nb_distribution_enumerated(g, t)
            dist = Wk.nb_distribution(g, t)
            res.add(f"{name} t={t} enumeration", max(np.abs(P - dist.P).max(), np.abs(excl - dist.excl).max()), tol)
    rng = np.random.default_rng(SEED + 4)
    small = [(name, g) for name, g in corpus(7)]
    for name, g in small:
        for size in (s for s in (1, 2, 3) if s < g.n_vertices):
            Z = sorted(rng.choice(g.n_vertices, size=size, replace=False).tolist())
            Pbar, kept = Wk.killed_transition(g, Z)
            for k in range(0, 7):
                enum = killed_walk_enumerated(g, Z, k)[np.ix_(kept, kept)]
                res.add(f"{name} Z={Z} k={k} killed walk", np.abs(np.linalg.matrix_power(Pbar, k) - enum).max(), tol)
    res_inv = 0.0
    for name, g in corpus(12):
        for size in (s for s in (1, 2, 3) if s < g.n_vertices):
            for Z in subsets(range(g.n_vertices), size)[:4]:
                L, kept = Wk.restricted_laplacian(g, Z)
                Li = np.linalg.inv(L)
                for j, w in enumerate(kept):
                    col, _ = Wk.restricted_inverse_column_via_walks(g, Z, w)
                    res_inv = max(res_inv, np.abs(col - Li[:, j]).max())
                v, w = kept[0], kept[-1]
                res_inv = max(res_inv, abs(Wk.restricted_laplacian_inverse_via_walks(g, Z, v, w) - Li[0, -1]))
    res.add("restricted inverse via walks", res_inv, 1e-10)
    return res


SUITES = {
    "fixpoint": fixpoint,
    "tree-equivalence": tree_equivalence,
    "cycle-characterization": cycle_characterization,
    "regular-characterization": regular_characterization,
    "constants": constants,
    "walks": walks,
}


def run(suite):
    return SUITES[suite]()
