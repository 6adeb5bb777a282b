"""Acceptance criteria 1-10.

Each test prints one ``criterion N: PASS|FAIL`` line with its worst residual
and wall time; the lines are repeated in the pytest terminal summary. Run
``python3 tests/test_acceptance.py`` for the lines alone.
"""
import time

import numpy as np
import pytest

from minsum_laplacian import characterization as C
from minsum_laplacian import experiments as X
from minsum_laplacian import graph as G
from minsum_laplacian import walks as W
from minsum_laplacian.constants import regular_constants
from minsum_laplacian.corpus import SEED, corpus, random_injection, regular_corpus, weighted_cycles
from minsum_laplacian.exact import l_norm, solve_exact
from minsum_laplacian.minsum_flow import optimal_flow_perturbation, run_flow
from minsum_laplacian.minsum_voltage import optimal_voltage_perturbation, run_voltage
from minsum_laplacian.oracles import killed_walk_enumerated, nb_distribution_enumerated, subsets

RESULTS = []


class _Criterion:
    """Times a block and records one result line."""

    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.checks = []

    def check(self, ok, detail):
        self.checks.append((bool(ok), detail))

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        self.check(elapsed < self.budget, f"runtime {elapsed:.2f}s < {self.budget:g}s")
        ok = exc_type is None and all(c for c, _ in self.checks)
        details = "; ".join(d for _, d in self.checks)
        if exc_type is not None:
            details = f"{exc_type.__name__}: {exc}; {details}"
        line = f"criterion {self.number}: {'PASS' if ok else 'FAIL'} {self.title} ({details})"
        RESULTS.append(line)
        print(line)
        self.passed = ok
        return False


def _assert(crit):
    failed = [d for ok, d in crit.checks if not ok]
    assert not failed, failed


def test_criterion_01_fixpoint_exactness():
    with _Criterion(1, "fix-point exactness", 5.0) as crit:
        rng = np.random.default_rng(SEED)
        worst = 0.0
        for _, g in corpus(12):
            b = random_injection(g.n_vertices, rng)
            sol = solve_exact(g, b)
            V = run_voltage(g, b, 6, optimal_voltage_perturbation(g, sol.voltages))
            F = run_flow(g, b, 6, optimal_flow_perturbation(g, sol.voltages))
            worst = max(worst, np.abs(V - sol.voltages).max(), np.abs(F - sol.flows).max())
        crit.check(worst < 1e-9, f"max residual {worst:.2e} < 1e-9")
    _assert(crit)


def test_criterion_02_tree_equivalence():
    with _Criterion(2, "computation-tree equivalence", 30.0) as crit:
        rng = np.random.default_rng(SEED + 1)
        worst = 0.0
        for _, g in corpus(8):
            b = random_injection(g.n_vertices, rng)
            p = rng.normal(size=2 * g.n_edges)
            V = run_voltage(g, b, 5, p)
            F = run_flow(g, b, 5, p)
            for t in range(1, 6):
                for v in range(g.n_vertices):
                    root = C.solve_tree_voltage(C.build_tree(g, v, t, C.VOLTAGE), b, p)[0]
                    worst = max(worst, abs(root - V[t - 1, v]))
                for e in range(g.n_edges):
                    root = C.solve_tree_flow(C.build_tree(g, e, t, C.FLOW), b, p)[0]
                    worst = max(worst, abs(root - F[t - 1, e]))
        crit.check(worst < 1e-9, f"max residual {worst:.2e} < 1e-9")
    _assert(crit)


def test_criterion_03_cycle_characterization():
    with _Criterion(3, "cycle characterization", 5.0) as crit:
        rng = np.random.default_rng(SEED + 2)
        worst = coeff = 0.0
        for _, g in weighted_cycles():
            b = random_injection(g.n_vertices, rng)
            sol = solve_exact(g, b)
            V = run_voltage(g, b, 8)
            F = run_flow(g, b, 8)
            omega = g.common_weight()
            for t in range(2, 9):
                pred = C.error_characterization_cycle(g, b, t, sol.voltages)
                worst = max(
                    worst,
                    np.abs(pred.voltage_error - (sol.voltages - V[t - 1])).max(),
                    np.abs(pred.flow_error - (sol.flows - F[t - 1])).max(),
                )
                if omega is not None:
                    coeff = max(
                        coeff, np.abs(pred.alpha - 0.5).max(), np.abs(pred.beta - omega / (2 * t + 1)).max()
                    )
        crit.check(worst < 1e-10, f"error residual {worst:.2e} < 1e-10")
        crit.check(coeff < 1e-10, f"alpha/beta residual {coeff:.2e} < 1e-10")
    _assert(crit)


def test_criterion_04_regular_characterization():
    with _Criterion(4, "regular characterization", 60.0) as crit:
        rng = np.random.default_rng(SEED + 3)
        worst = 0.0
        names = [name for name, _ in regular_corpus()]
        assert names == ["K4", "K5", "petersen", "ccycle10", "torus3x3"]
        for _, g in regular_corpus():
            b = random_injection(g.n_vertices, rng)
            sol = solve_exact(g, b)
            V = run_voltage(g, b, 6)
            F = run_flow(g, b, 6)
            for t in range(3, 7):
                pred = C.error_characterization_regular(g, b, t, sol.voltages)
                worst = max(
                    worst,
                    np.abs(pred.voltage_error - (sol.voltages - V[t - 1])).max(),
                    np.abs(pred.flow_error - (sol.flows - F[t - 1])).max(),
                )
        crit.check(worst < 1e-8, f"max residual {worst:.2e} < 1e-8")
    _assert(crit)


def test_criterion_05_constant_bounds():
    with _Criterion(5, "constant bound chain", 1.0) as crit:
        bad = []
        with np.errstate(over="raise", under="raise", invalid="raise", divide="raise"):
            for d in range(3, 11):
                for t in range(3, 51):
                    k = regular_constants(d, t, check=False)
                    for label, b, c in (("exact", k.b, k.c), ("stated", k.b_stated, k.c_stated)):
                        if not (np.isfinite(b) and np.isfinite(c) and 0.5 <= k.lower <= b <= c < 4 and c >= 1):
                            bad.append((label, d, t))
        crit.check(not bad, f"{len(bad)} violations over d=3..10, t=3..50")
    _assert(crit)


def test_criterion_06_cycle_flow_bound():
    with _Criterion(6, "equal-weight cycle flow bound", 1.0) as crit:
        rng = np.random.default_rng(SEED + 6)
        slack, worst = -np.inf, 0.0
        for n in (7, 9, 12, 15):
            for omega in (1.0, 2.5):
                g = G.cycle(n, omega)
                b = random_injection(n, rng)
                sol = solve_exact(g, b)
                nu = sol.voltages
                F = run_flow(g, b, 10)
                v = np.arange(n)
                for t in range(2, 11):
                    err = sol.flows - F[t - 1]
                    bound = 2 * omega / (2 * t + 1) * np.abs(nu).max()
                    slack = max(slack, np.abs(err).max() - bound)
                    beta = omega / (2 * t + 1)
                    exact = beta * np.abs(nu[(v - t) % n] - nu[(v + t + 1) % n])
                    worst = max(worst, np.abs(np.abs(err) - exact).max())
        crit.check(slack <= 1e-12, f"max(error - bound) {slack:.2e} <= 0")
        crit.check(worst < 1e-10, f"|error| vs beta|nu diff| residual {worst:.2e}")
    _assert(crit)


def test_criterion_07_cycle_voltage_oscillation():
    with _Criterion(7, "cycle voltage non-convergence", 1.0) as crit:
        g = G.cycle(9)
        b = G.dipole(9, 0, 4)
        nu = solve_exact(g, b).voltages
        V = run_voltage(g, b, 10)
        sq = np.array([l_norm(nu - V[t - 1], g) ** 2 for t in range(2, 11)])
        closed = np.array([C.cycle_l_norm_error_closed_form(nu, 1.0, t) for t in range(2, 11)])
        worst = np.abs(sq - closed).max()
        crit.check(worst < 1e-9, f"closed-form residual {worst:.2e} < 1e-9")
        err = np.sqrt(sq)
        crit.check(np.any(np.diff(err) > 1e-9), "L-norm error not monotonically decreasing")
    _assert(crit)


def test_criterion_08_killed_walks():
    with _Criterion(8, "restricted inverse and killed walks", 10.0) as crit:
        worst_inv = 0.0
        n_sets = 0
        for _, g in corpus():
            for size in (1, 2, 3):
                if size >= g.n_vertices:
                    continue
                for Z in subsets(range(g.n_vertices), size):
                    L, _ = W.restricted_laplacian(g, Z)
                    M, _ = W.restricted_inverse_via_walks(g, Z)
                    worst_inv = max(worst_inv, np.abs(M - np.linalg.inv(L)).max())
                    n_sets += 1
        worst_walk = 0.0
        for _, g in corpus(7):
            for size in (1, 2, 3):
                if size >= g.n_vertices:
                    continue
                for Z in subsets(range(g.n_vertices), size):
                    Pbar, kept = W.killed_transition(g, Z)
                    for k in range(7):
                        enum = killed_walk_enumerated(g, Z, k)[np.ix_(kept, kept)]
                        worst_walk = max(worst_walk, np.abs(np.linalg.matrix_power(Pbar, k) - enum).max())
        crit.check(worst_inv < 1e-10, f"inverse residual {worst_inv:.2e} < 1e-10 over {n_sets} sets")
        crit.check(worst_walk < 1e-12, f"killed-walk residual {worst_walk:.2e} < 1e-12")
    _assert(crit)


def test_criterion_09_nb_recursion():
    with _Criterion(9, "non-backtracking recursion", 10.0) as crit:
        worst_rec = 0.0
        for g in (G.complete(4), G.petersen()):
            for t in range(1, 7):
                ref = W.delta_tilde(g, W.nb_distribution(g, t))
                worst_rec = max(worst_rec, np.abs(W.delta_tilde_recursion(g, t) - ref).max())
        worst_enum = 0.0
        graphs = [g for _, g in corpus(10) if g.regular_degree() is not None and g.common_weight() is not None]
        for g in graphs:
            for t in range(0, 5):
                P, excl = nb_distribution_enumerated(g, t)
                d = W.nb_distribution(g, t)
                worst_enum = max(worst_enum, np.abs(d.P - P).max(), np.abs(d.excl - excl).max())
        crit.check(worst_rec < 1e-12, f"recursion residual {worst_rec:.2e} < 1e-12")
        crit.check(worst_enum < 1e-12, f"enumeration residual {worst_enum:.2e} < 1e-12 on {len(graphs)} graphs")
    _assert(crit)


def _curve(family, n, which):
    g = X.family_graph(family, 4, n)
    window = X.fit_window(g)
    t, vals = X.decay_curve(g, window, which)
    return t, vals, X.fit_slope(t, vals, window), window


def test_criterion_10_decay_reproduction():
    with _Criterion(10, "total-variation decay", 120.0) as crit:
        for family, which, n_small, n_big in (
            ("k_connected_cycle", "delta", 1000, 2000),
            ("torus", "delta-sum", 20, 24),
        ):
            t, vals, fit, window = _curve(family, n_small, which)
            ok = fit.ok and -0.65 <= fit.slope <= -0.35
            slope = "none" if not fit.ok else f"{fit.slope:.3f}"
            crit.check(ok, f"{family} {which} slope {slope} over t <= {window}")
            t2, vals2, _, window2 = _curve(family, n_big, which)
            common = min(window, window2)
            diff = np.abs(vals[:common] - vals2[:common]).max()
            crit.check(diff < 1e-10, f"n={n_small} vs n={n_big} agree to {diff:.1e} for t <= {common}")
    _assert(crit)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
