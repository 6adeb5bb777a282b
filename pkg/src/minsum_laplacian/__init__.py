"""Min-sum message passing for Laplacian systems and electrical flows on weighted graphs."""
from .characterization import (
    build_tree,
    error_characterization_cycle,
    error_characterization_regular,
    flow_error_sensitivity,
    reduced_network,
    voltage_error_sensitivity,
)
from .constants import RegularConstants, epsilon_bound, regular_constants
from .errors import *  # noqa: F401,F403
from .exact import ExactSolution, norm, solve_constrained_qp, solve_exact
from .graph import (
    WeightedGraph,
    build_graph,
    complete,
    cycle,
    dipole,
    k_connected_cycle,
    leaf_strip,
    petersen,
    read_graph,
    read_injection,
    torus,
    weighted_cycle,
)
from .minsum_flow import (
    estimate_flow,
    estimate_flow_averaged,
    init_flow,
    run_flow,
    run_flow_with_leaves,
    step_flow,
)
from .minsum_voltage import (
    estimate_voltage,
    estimate_voltage_averaged,
    init_voltage,
    run_voltage,
    step_voltage,
)
from .walks import delta_tilde_recursion, nb_distribution

__version__ = "0.1.0"
