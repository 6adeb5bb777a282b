"""Exact baselines: Laplacian voltages, electrical flows, constrained QPs and norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonStochasticMatrix, NotConverged, RangeViolation, SingularSystem
from .graph import WeightedGraph, check_injection

CG_RTOL = 1e-12
EIG_FALLBACK_CAP = 512


@dataclass(frozen=True)
class ExactSolution:
    """Zero-sum voltages ``nu*`` and the electrical flow ``x*`` they induce."""

    voltages: np.ndarray
    flows: np.ndarray
    iterations: int = 0
    method: str = "cg"


def _project(x):
    return x - x.mean()


def projected_cg(L, b, rtol=CG_RTOL, maxiter=None):
    """Conjugate gradient for ``L x = b`` on the zero-sum subspace.

    Every iterate and search direction is re-centred so round-off cannot
    push the solution along the all-ones kernel.

    Returns
    -------
    x : ndarray
    iterations : int
    residual : float
        Final relative residual ``||b - L x|| / ||b||``.
    """
    n = b.shape[0]
    maxiter = 20 * n if maxiter is None else maxiter
    b = _project(b)
    bnorm = np.linalg.norm(b)
    x = np.zeros(n)
    if bnorm == 0:
        return x, 0, 0.0
    r = b.copy()
    p = r.copy()
    rr = r @ r
    for k in range(1, maxiter + 1):
        Lp = L @ p
        alpha = rr / (p @ Lp)
        x = _project(x + alpha * p)
        r = _project(r - alpha * Lp)
        rr_new = r @ r
        if np.sqrt(rr_new) <= rtol * bnorm:
            # recompute the true residual to guard against drift in r
            true = np.linalg.norm(b - L @ x) / bnorm
            if true <= rtol:
                return x, k, true
            r = _project(b - L @ x)
            rr_new = r @ r
        p = _project(r + (rr_new / rr) * p)
        rr = rr_new
    return x, maxiter, float(np.linalg.norm(b - L @ x) / bnorm)


def pinv_solve(L, b):
    """Zero-sum solution of ``L x = b`` via a symmetric eigendecomposition."""
    evals, evecs = la.eigh(np.asarray(L, dtype=float))
    tol = evals.max() * L.shape[0] * np.finfo(float).eps
    keep = evals > tol
    coeff = (evecs[:, keep].T @ b) / evals[keep]
    return _project(evecs[:, keep] @ coeff)


def solve_exact(graph: WeightedGraph, injection, rtol=CG_RTOL):
    """Zero-sum voltages ``L^+ b`` and the flow ``R^-1 A^T nu*``.

    Uses projected conjugate gradient with relative tolerance ``rtol`` and an
    iteration cap of ``20 n``; small graphs fall back to a dense
    eigendecomposition if CG stalls.

    Raises
    ------
    NotConverged
        CG stalled on a graph too large for the dense fallback.
    """
    b = check_injection(injection, graph)
    n = graph.n_vertices
    if n == 0:
        return ExactSolution(np.zeros(0), np.zeros(graph.n_edges), 0, "empty")
    L = graph.laplacian_sparse()
    nu, its, res = projected_cg(L, b, rtol)
    method = "cg"
    if res > rtol:
        if n > EIG_FALLBACK_CAP:
            raise NotConverged(
                f"conjugate gradient stopped at relative residual {res:.3g}", residual=res, iterations=its
            )
        nu = pinv_solve(L.toarray(), b)
        method = "eigh"
    return ExactSolution(nu, flows_from_voltages(graph, nu), its, method)


def flows_from_voltages(graph, nu):
    """Ohm's law ``x_e = W_e (nu_tail - nu_head)``."""
    nu = np.asarray(nu, dtype=float)
    return graph.weights * (nu[graph.tails] - nu[graph.heads])


def solve_constrained_qp(R, h, A, b, range_tol=1e-10):
    """Minimise ``x^T R x / 2 + h^T x`` subject to ``A x = b``.

    Uses the closed form ``x = R^-1 A^T L^+ b + (R^-1 A^T L^+ A - I) R^-1 h``
    with ``L = A R^-1 A^T``.

    Parameters
    ----------
    R : array_like or sparse
        Positive diagonal matrix, or the vector of its diagonal.
    h : array_like
    A : array_like or sparse
    b : array_like
        Must lie in the range of ``A``.

    Raises
    ------
    RangeViolation
        ``b`` is not in the range of ``A`` (checked to ``range_tol``).
    """
    if sp.issparse(R):
        r = np.asarray(R.diagonal(), dtype=float)
    else:
        R = np.asarray(R, dtype=float)
        r = np.diag(R).copy() if R.ndim == 2 else R.copy()
    if np.any(r <= 0):
        raise SingularSystem("resistance diagonal must be positive")
    h = np.asarray(h, dtype=float)
    b = np.asarray(b, dtype=float)
    rinv = 1.0 / r

    if sp.issparse(A):
        A = sp.csr_array(A)
        L = (A @ sp.diags_array(rinv) @ A.T).tocsc()
        # full row rank is the common case (trees with a removed level)
        try:
            y = spla.splu(L).solve(b + A @ (rinv * h))
        except RuntimeError:
            return solve_constrained_qp(r, h, A.toarray(), b, range_tol)
        x = rinv * (A.T @ y) - rinv * h
        resid = np.linalg.norm(A @ x - b)
        scale = max(1.0, np.linalg.norm(b))
        if resid > range_tol * scale * 1e2:
            raise RangeViolation(f"b is not in the range of A (residual {resid:.3g})")
        return x

    A = np.atleast_2d(np.asarray(A, dtype=float))
    L = (A * rinv) @ A.T
    Lp = la.pinvh(L)
    x = rinv * (A.T @ (Lp @ b)) + rinv * (A.T @ (Lp @ (A @ (rinv * h)))) - rinv * h
    resid = np.linalg.norm(A @ x - b)
    if resid > range_tol * max(1.0, np.linalg.norm(b)):
        raise RangeViolation(f"b is not in the range of A (residual {resid:.3g})")
    return x


# -- norms -------------------------------------------------------------------


def l_inf(v):
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def l2(v):
    return float(np.linalg.norm(v))


def l_norm(v, graph):
    """Energy pseudo-norm ``sqrt(sum_e W_e (v_tail - v_head)^2)``."""
    v = np.asarray(v, dtype=float)
    diff = v[graph.tails] - v[graph.heads]
    return float(np.sqrt(np.sum(graph.weights * diff**2)))


@dataclass(frozen=True)
class LMNorm:
    """Total-variation normalised L-norm and the edges it had to skip.

    ``dropped`` lists edges whose two rows of ``M`` coincide; ``dropped_nonzero``
    flags any of those whose numerator ``(M v)_tail - (M v)_head`` was not zero.
    """

    value: float
    dropped: tuple
    dropped_nonzero: bool


def check_stochastic(M, tol=1e-10):
    M = np.asarray(M, dtype=float)
    sums = M.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1) > tol)
    if bad.size:
        raise NonStochasticMatrix(f"row {bad[0]} of M sums to {sums[bad[0]]!r}, not 1")
    if np.any(M < -tol):
        raise NonStochasticMatrix("M has negative entries")
    return M


def l_m_norm_report(v, graph, M, tol=1e-14):
    """``||v||_{L,M}`` with per-edge total variation denominators."""
    M = check_stochastic(M)
    v = np.asarray(v, dtype=float)
    Mv = M @ v
    tv = 0.5 * np.abs(M[graph.tails] - M[graph.heads]).sum(axis=1)
    num = Mv[graph.tails] - Mv[graph.heads]
    keep = tv > tol
    dropped = tuple(int(e) for e in np.flatnonzero(~keep))
    nonzero = bool(np.any(np.abs(num[~keep]) > 1e-12 * max(1.0, l_inf(v))))
    total = np.sum(graph.weights[keep] * (num[keep] / tv[keep]) ** 2)
    return LMNorm(float(np.sqrt(total)), dropped, nonzero)


def norm(kind, v, graph, M=None):
    """Dispatch on ``kind`` in ``{"l_inf", "l2", "L_norm", "L_M_norm"}``."""
    if kind == "l_inf":
        return l_inf(v)
    if kind == "l2":
        return l2(v)
    if kind == "L_norm":
        return l_norm(v, graph)
    if kind == "L_M_norm":
        if M is None:
            raise ValueError("L_M_norm needs the matrix M")
        return l_m_norm_report(v, graph, M).value
    raise ValueError(f"unknown norm {kind!r}")


def energy(graph, x):
    """Primal energy ``x^T R x / 2``."""
    x = np.asarray(x, dtype=float)
    return float(0.5 * np.sum(x**2 / graph.weights))


def dual_objective(graph, nu, b):
    """``-nu^T L nu / 2 + b^T nu``."""
    return float(-0.5 * l_norm(nu, graph) ** 2 + np.dot(b, nu))
