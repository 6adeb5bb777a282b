import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minsum_laplacian import characterization as C
from minsum_laplacian import graph as G
from minsum_laplacian.errors import HasLeaves, InvalidDepth, InvalidParameter, NotCycle
from minsum_laplacian.exact import l_norm, solve_exact
from minsum_laplacian.minsum_flow import optimal_flow_perturbation, run_flow
from minsum_laplacian.minsum_voltage import optimal_voltage_perturbation, run_voltage
from strategies import cycle_weights, graph_and_injection


def _ancestor(tree, u):
    while tree.parent[u] != -1:
        u = tree.parent[u]
    return u


# -- computation trees -------------------------------------------------------------


@pytest.mark.parametrize("t", [1, 2, 5])
def test_cycle_flow_tree_is_path(t):
    g = G.cycle(7)
    tree = C.build_tree(g, 3, t, C.FLOW)
    assert tree.n_vertices == 2 * t + 2 and tree.n_edges == 2 * t + 1
    assert set(tree.as_graph().degrees) == {1, 2}
    assert tree.edge_sigma[0] == 3 and tree.tails[0] == 0 and tree.heads[0] == 1


@pytest.mark.parametrize("t", [1, 2, 5])
def test_cycle_voltage_tree_is_path(t):
    tree = C.build_tree(G.cycle(7), 2, t, C.VOLTAGE)
    assert tree.n_vertices == 2 * t + 3
    assert tree.level[0] == -1 and tree.sigma[0] == 2
    # root sits in the middle of the path
    dist = [abs(int(k)) for k in tree.level[1:]]
    assert max(dist) == t and tree.level_sizes() == [1] + [2] * (t + 1)


@pytest.mark.parametrize("g, d", [(G.petersen(), 3), (G.complete(5), 4), (G.torus([3, 3]), 4)])
def test_tree_level_sizes(g, d):
    t = 4
    flow = C.build_tree(g, 0, t, C.FLOW)
    assert flow.level_sizes() == [2 * (d - 1) ** k for k in range(t + 1)]
    volt = C.build_tree(g, 0, t, C.VOLTAGE)
    assert volt.level_sizes() == [1] + [d * (d - 1) ** k for k in range(t + 1)]
    # every tree edge maps to a graph edge joining the images of its ends
    for tr in (flow, volt):
        for a, b, e in zip(tr.tails, tr.heads, tr.edge_sigma):
            assert (tr.sigma[a], tr.sigma[b]) == (g.tails[e], g.heads[e])


def test_tree_errors():
    with pytest.raises(InvalidDepth):
        C.build_tree(G.cycle(5), 0, 0)
    with pytest.raises(InvalidDepth):
        C.build_tree(G.complete(6), 0, 8, C.FLOW, cap=1000)
    with pytest.raises(HasLeaves):
        C.build_tree(G.path(4), 0, 2, C.FLOW)
    with pytest.raises(InvalidParameter):
        C.build_tree(G.cycle(5), 0, 2, "edge")
    with pytest.raises(InvalidParameter):
        C.build_tree(G.cycle(5), 9, 2, C.VOLTAGE)


def test_flow_root_accepts_endpoint_pair():
    g = G.petersen()
    a = C.build_tree(g, (1, 0), 2, C.FLOW)
    assert a.root == g.edge_index(0, 1)


# -- tree problems ---------------------------------------------------------------


def test_tree_flow_zero():
    tree = C.build_tree(G.petersen(), 0, 3, C.FLOW)
    assert not C.solve_tree_flow(tree, np.zeros(10)).any()


def test_tree_voltage_zero():
    tree = C.build_tree(G.petersen(), 0, 3, C.VOLTAGE)
    assert not C.solve_tree_voltage(tree, np.zeros(10)).any()


def test_tree_flow_triangle_t1():
    tree = C.build_tree(G.cycle(3), 0, 1, C.FLOW)
    assert C.solve_tree_flow(tree, [1, -1, 0])[0] == pytest.approx(2 / 3, abs=1e-15)


def test_tree_voltage_cycle7_t2():
    g = G.cycle(7)
    b = G.dipole(7, 0, 3)
    V = run_voltage(g, b, 2)
    for v in range(7):
        assert C.solve_tree_voltage(C.build_tree(g, v, 2, C.VOLTAGE), b)[0] == pytest.approx(V[1, v], abs=1e-12)


def test_tree_solvers_reject_wrong_kind():
    g = G.cycle(5)
    with pytest.raises(InvalidParameter):
        C.solve_tree_flow(C.build_tree(g, 0, 2, C.VOLTAGE), np.zeros(5))
    with pytest.raises(InvalidParameter):
        C.solve_tree_voltage(C.build_tree(g, 0, 2, C.FLOW), np.zeros(5))


@given(graph_and_injection(max_n=8), st.integers(1, 3))
def test_optimal_perturbation_lifts_to_exact(gb, t):
    g, b = gb
    sol = solve_exact(g, b)
    pf = optimal_flow_perturbation(g, sol.voltages)
    pv = optimal_voltage_perturbation(g, sol.voltages)
    for e in range(g.n_edges):
        x = C.solve_tree_flow(C.build_tree(g, e, t, C.FLOW), b, pf)[0]
        assert x == pytest.approx(sol.flows[e], abs=1e-9)
    for v in range(g.n_vertices):
        nu = C.solve_tree_voltage(C.build_tree(g, v, t, C.VOLTAGE), b, pv)[0]
        assert nu == pytest.approx(sol.voltages[v], abs=1e-9)


def test_lift_flow_perturbation_targets_last_level():
    g = G.petersen()
    tree = C.build_tree(g, 0, 2, C.FLOW)
    p = np.arange(1.0, 2.0 * g.n_edges + 1)
    h = C.lift_flow_perturbation(tree, p)
    last = np.flatnonzero(np.maximum(tree.level[tree.tails], tree.level[tree.heads]) == 2)
    assert np.count_nonzero(h[np.setdiff1d(np.arange(tree.n_edges), last)]) == 0
    assert np.count_nonzero(h[last]) == len(last)


# -- sensitivity formulas ------------------------------------------------------------


@given(graph_and_injection(max_n=8), st.integers(2, 3), st.sampled_from(["direct", "walks"]))
def test_sensitivity_formulas_match_measured_errors(gb, t, method):
    g, b = gb
    sol = solve_exact(g, b)
    F = run_flow(g, b, t)
    V = run_voltage(g, b, t)
    for e in range(g.n_edges):
        pred = C.flow_error_sensitivity(g, b, e, t, method, nu=sol.voltages)
        assert pred == pytest.approx(sol.flows[e] - F[t - 1, e], abs=1e-9)
    for v in range(g.n_vertices):
        pred = C.voltage_error_sensitivity(g, b, v, t, method, nu=sol.voltages)
        assert pred == pytest.approx(sol.voltages[v] - V[t - 1, v], abs=1e-9)


# -- cycles -------------------------------------------------------------------------


def test_equal_weight_coefficients():
    g = G.cycle(9, 1.0)
    for t in (2, 3, 7):
        assert C.cycle_alpha(g, 4, t) == pytest.approx(0.5, abs=1e-15)
    assert C.cycle_beta(g, 0, 2) == pytest.approx(1 / 5, abs=1e-15)
    assert C.cycle_beta(G.cycle(9, 2.5), 3, 4) == pytest.approx(2.5 / 9, abs=1e-15)


def test_weighted_beta_pattern():
    w = [(2.0, 3.0, 6.0)[i % 3] for i in range(9)]
    g = G.weighted_cycle(w)
    for e in range(9):
        ref = 1 / sum(1 / w[k % 9] for k in range(e - 2, e + 3))
        assert C.cycle_beta(g, e, 2) == pytest.approx(ref, rel=1e-15)
    b = G.dipole(9, 0, 4)
    sol = solve_exact(g, b)
    pred = C.error_characterization_cycle(g, b, 2, sol.voltages)
    assert np.allclose(pred.flow_error, sol.flows - run_flow(g, b, 2)[1], atol=1e-12)


@given(cycle_weights(min_n=5, max_n=13), st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_cycle_characterization(weights, t, seed):
    g = G.weighted_cycle(weights)
    rng = np.random.default_rng(seed)
    b = rng.normal(size=g.n_vertices)
    b[-1] = -b[:-1].sum()
    sol = solve_exact(g, b)
    pred = C.error_characterization_cycle(g, b, t)
    assert np.abs(pred.voltage_error - (sol.voltages - run_voltage(g, b, t)[-1])).max() < 1e-10
    assert np.abs(pred.flow_error - (sol.flows - run_flow(g, b, t)[-1])).max() < 1e-10


def test_cycle_characterization_errors():
    with pytest.raises(NotCycle):
        C.error_characterization_cycle(G.petersen(), np.zeros(10), 3)
    with pytest.raises(NotCycle):
        C.cycle_weights(G.build_graph([(0, 2, 1), (2, 1, 1), (1, 3, 1), (3, 0, 1)]))
    with pytest.raises(InvalidParameter):
        C.error_characterization_cycle(G.cycle(5), np.zeros(5), 1)


@pytest.mark.parametrize("n", [7, 9, 12])
@pytest.mark.parametrize("omega", [1.0, 2.5])
def test_cycle_l_norm_error_closed_form(n, omega):
    g = G.cycle(n, omega)
    b = np.random.default_rng(n).normal(size=n)
    b -= b.mean()
    nu = solve_exact(g, b).voltages
    V = run_voltage(g, b, 8)
    for t in range(2, 9):
        measured = l_norm(nu - V[t - 1], g) ** 2
        assert C.cycle_l_norm_error_closed_form(nu, omega, t) == pytest.approx(measured, abs=1e-9)


@given(cycle_weights(min_n=3, max_n=12))
def test_gamblers_ruin_closed_form(w):
    # a path 0..2t+1 with conductances w[0..2t]
    w = np.array(w if len(w) % 2 else w + [1.0])
    t = (len(w) - 1) // 2
    p = w[2:] / (w[1:-1] + w[2:])
    q = w[1:-1] / (w[1:-1] + w[2:])
    f = C.birth_death_hitting(p, q, 1.0, 0.0)
    assert np.abs(C.cycle_gamblers_ruin(w) - f).max() < 1e-12
    assert len(f) == 2 * t + 1


def test_gamblers_ruin_on_cycle_tree_matches_tree_inverse():
    g = G.weighted_cycle([1.0, 2.0, 0.5, 3.0, 1.5, 2.5, 0.8])
    t = 3
    tree = C.build_tree(g, 0, t, C.FLOW)
    # order the path from one end to the other
    A = tree.as_graph()
    end = int(np.flatnonzero(A.degrees == 1)[0])
    order, prev = [end], -1
    while len(order) < tree.n_vertices:
        nxt = [u for u in A.neighbors(order[-1]) if u != prev]
        prev = order[-1]
        order.append(nxt[0])
    w = np.array([A.weight(a, b) for a, b in zip(order[:-1], order[1:])])
    f = C.cycle_gamblers_ruin(w)
    p = w[2:] / (w[1:-1] + w[2:])
    q = w[1:-1] / (w[1:-1] + w[2:])
    assert np.abs(f - C.birth_death_hitting(p, q)).max() < 1e-12


# -- regular graphs ---------------------------------------------------------------


def test_regular_prediction_petersen_dipole():
    g = G.petersen()
    b = G.dipole(10, 0, 7)
    sol = solve_exact(g, b)
    pred = C.error_characterization_regular(g, b, 3, sol.voltages)
    assert np.abs(pred.voltage_error - (sol.voltages - run_voltage(g, b, 3)[-1])).max() < 1e-8
    assert np.abs(pred.flow_error - (sol.flows - run_flow(g, b, 3)[-1])).max() < 1e-8


def test_regular_prediction_zero_injection():
    pred = C.error_characterization_regular(G.complete(5), np.zeros(5), 4)
    assert not pred.voltage_error.any() and not pred.flow_error.any()


@pytest.mark.parametrize("g", [G.complete(4, 2.0), G.k_connected_cycle(12, 2, 0.5), G.torus([3, 4])])
@pytest.mark.parametrize("t", [3, 5])
def test_regular_prediction_weighted(g, t):
    b = np.random.default_rng(t).normal(size=g.n_vertices)
    b -= b.mean()
    sol = solve_exact(g, b)
    pred = C.error_characterization_regular(g, b, t)
    assert np.abs(pred.voltage_error - (sol.voltages - run_voltage(g, b, t)[-1])).max() < 1e-8
    assert np.abs(pred.flow_error - (sol.flows - run_flow(g, b, t)[-1])).max() < 1e-8


@pytest.mark.parametrize("d, g", [(3, G.complete(4)), (4, G.complete(5))])
@pytest.mark.parametrize("t", [3, 4, 5])
@pytest.mark.parametrize("omega", [1.0, 0.5])
def test_reduced_network_matches_tree_inverse(d, g, t, omega):
    g = G.build_graph([(v, w, omega) for v, w, _ in g.edges])
    for kind in (C.FLOW, C.VOLTAGE):
        tree = C.build_tree(g, 0, t, kind)
        keep = tree.interior
        pos = -np.ones(tree.n_vertices, dtype=int)
        pos[keep] = np.arange(len(keep))
        Li = np.linalg.inv(C.tree_restricted_laplacian(tree).toarray())
        ref = C.reduced_network_inverse(d, t, omega, kind)
        for u in tree.vertices_at(t - 1):
            if kind == C.FLOW:
                if _ancestor(tree, u) != 0:
                    continue
                got = (Li[pos[0], pos[u]], Li[pos[1], pos[u]])
                assert np.abs(np.array(got) - ref).max() < 1e-10
            else:
                assert abs(Li[0, pos[u]] - ref) < 1e-10


def test_reduced_network_conductances():
    d, t, omega = 4, 5, 2.0
    C_, p, q = C.reduced_network(d, t, omega, C.FLOW)
    h = lambda s: 1 / ((d - 1) ** s - 1)  # noqa: E731
    assert C_[0] == omega * (d - 1)
    assert C_[2] == pytest.approx(omega * (d - 2) ** 2 / (d - 1) * (1 + h(3)))
    assert C_[t] == pytest.approx(omega * (d - 2) * (1 + h(t)))
    assert C.reduced_network(d, t, omega, C.VOLTAGE)[0][t] == pytest.approx(omega * (d - 2) * (1 + h(t + 1)))
    assert np.all(p + q <= 1 + 1e-15)
    with pytest.raises(InvalidParameter):
        C.reduced_network(2, 5)
