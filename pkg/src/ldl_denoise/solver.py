"""Alternating solver that recovers label distributions under dependent noise.

Observed rows are modeled as ``Omega = D + X P + (X W) Q`` with D on the
probability simplex, a low-rank regression W (nuclear norm, handled through
an auxiliary consensus variable Z = W), row-sparse noise maps P and Q
(l2,1 penalties, one IRLS step each per sweep), and a graph alignment term
tying the embedding's similarity structure to the feature-space graph.

Update order per sweep: Z (singular value thresholding), W (one Armijo
backtracking gradient step), P, Q (reweighted least squares), then the
multiplier/penalty update Gamma += mu (Z - W), mu = min(growth * mu, mu_max).

The recovered matrix returned by :func:`fit` is the algorithm's maintained
estimate of the true distributions: the noise-model reconstruction
``Omega - X P - (X W) Q`` and the regression prediction ``X W`` pull on it
with equal weight, and each row is projected back onto the simplex. The
equal weighting is what makes recovery row-selective: rows the regression
explains keep their observations, rows it cannot explain (the corrupted
ones) are pulled toward the prediction. :func:`recover_D` exposes the pure
constraint rearrangement instead and returns ``Omega`` unchanged whenever
``P = Q = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteState, SingularSystem
from .graph import graph_term_grad, graph_term_value, induced_similarity
from .prox import l21_norm, l21_reweight_diag, nuclear_norm, project_rows_to_simplex, svt
from .types import LabelDistributionMatrix, Model


def _values(M):
    return M.values if hasattr(M, "values") else np.asarray(M, dtype=float)


# equal weight on the constraint reconstruction and the regression
# prediction when maintaining the recovered-distribution iterate
_RECOVERY_BLEND = 0.5


@dataclass
class SolverState:
    """Mutable iterate of the alternating loop."""

    W: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    Z: np.ndarray  # consensus copy of W carrying the nuclear norm
    Gamma: np.ndarray  # Lagrange multipliers for Z = W
    mu: float
    iter: int = 0
    objective_history: list = None
    consensus_history: list = None
    w_stall_count: int = 0

    def __post_init__(self):
        if self.objective_history is None:
            self.objective_history = []
        if self.consensus_history is None:
            self.consensus_history = []


@dataclass(frozen=True)
class FitReport:
    model: Model
    recovered_D: LabelDistributionMatrix
    iterations: int
    converged: bool
    final_objective: float
    objective_history: tuple
    consensus_history: tuple
    w_stall_count: int = 0


def init_state(X, Omega, hyper):
    """Ridge-start the regression, everything else at zero.

    ``W = (X^T X + 1e-3 I)^{-1} X^T Omega``, ``Z = W``, ``P = Q = Gamma = 0``.
    """
    Xv, Ov = _values(X), _values(Omega)
    if Xv.shape[0] != Ov.shape[0]:
        raise DimensionMismatch(f"X has {Xv.shape[0]} rows, Omega has {Ov.shape[0]}")
    d, q = Xv.shape[1], Ov.shape[1]
    G = Xv.T @ Xv + 1e-3 * np.eye(d)
    try:
        W = np.linalg.solve(G, Xv.T @ Ov)
    except np.linalg.LinAlgError as exc:  # cannot happen with a positive ridge
        raise SingularSystem("ridge initialization failed") from exc
    return SolverState(
        W=W,
        P=np.zeros((d, q)),
        Q=np.zeros((q, q)),
        Z=W.copy(),
        Gamma=np.zeros((d, q)),
        mu=hyper.mu0,
    )


def residual(state, X, Omega):
    """Data residual ``Omega - X P - (X W)(Q + I)``."""
    Xv, Ov = _values(X), _values(Omega)
    q = Ov.shape[1]
    if state.W.shape != (Xv.shape[1], q) or state.P.shape != state.W.shape:
        raise DimensionMismatch("state matrices do not match X/Omega shapes")
    XW = Xv @ state.W
    return Ov - Xv @ state.P - XW @ (state.Q + np.eye(q))


def update_Z(state, alpha):
    """Prox step for the nuclear norm: ``Z = svt(W - Gamma/mu, alpha/mu)``."""
    target = state.W - state.Gamma / state.mu
    state.Z = svt(target, alpha / state.mu).shrunk
    return state.Z


def _w_objective(W, state, Xv, Ov, graph):
    q = Ov.shape[1]
    R = Ov - Xv @ state.P - (Xv @ W) @ (state.Q + np.eye(q))
    val = 0.5 * float((R * R).sum())
    if graph.num_edges:
        val += graph_term_value(graph, induced_similarity(W, Xv, graph))
    diff = state.Z - W
    val += float((state.Gamma * diff).sum()) + 0.5 * state.mu * float((diff * diff).sum())
    return val


def _w_gradient(W, state, Xv, Ov, graph):
    q = Ov.shape[1]
    QI = state.Q + np.eye(q)
    R = Ov - Xv @ state.P - (Xv @ W) @ QI
    grad = -(Xv.T @ R) @ QI.T
    if graph.num_edges:
        grad = grad + graph_term_grad(W, Xv, graph)
    grad += -state.Gamma + state.mu * (W - state.Z)
    return grad


def update_W(state, X, Omega, graph, hyper, x_opnorm=None):
    """One Armijo backtracking gradient step on the W block.

    Initial step 1 / (||X||_2^2 ||Q+I||_2^2 + mu), sufficient-decrease
    constant 1e-4, at most 30 halvings. On failure W is left unchanged and
    the stall counter is bumped.
    """
    Xv, Ov = _values(X), _values(Omega)
    grad = _w_gradient(state.W, state, Xv, Ov, graph)
    gnorm2 = float((grad * grad).sum())
    if gnorm2 == 0.0:
        return state.W
    if x_opnorm is None:
        x_opnorm = np.linalg.norm(Xv, 2)
    qi_norm = np.linalg.norm(state.Q + np.eye(state.Q.shape[0]), 2)
    lip = x_opnorm**2 * qi_norm**2 + state.mu
    step = 1.0 / lip
    f0 = _w_objective(state.W, state, Xv, Ov, graph)
    for _ in range(30):
        cand = state.W - step * grad
        if _w_objective(cand, state, Xv, Ov, graph) <= f0 - 1e-4 * step * gnorm2:
            state.W = cand
            return state.W
        step *= 0.5
    state.w_stall_count += 1
    return state.W


def _solve_reweighted(G_full, rhs):
    try:
        return np.linalg.solve(G_full, rhs)
    except np.linalg.LinAlgError:
        pass
    try:
        n = G_full.shape[0]
        return np.linalg.solve(G_full + 1e-10 * np.eye(n), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("reweighted least-squares solve failed") from exc


def update_P(state, X, Omega, beta, eps):
    """IRLS step for the instance-noise map:
    ``(X^T X + 2 beta G) P = X^T (Omega - (X W)(Q + I))``."""
    Xv, Ov = _values(X), _values(Omega)
    q = Ov.shape[1]
    G = l21_reweight_diag(state.P, eps)
    lhs = Xv.T @ Xv + np.diag(2.0 * beta * G)
    rhs = Xv.T @ (Ov - (Xv @ state.W) @ (state.Q + np.eye(q)))
    state.P = _solve_reweighted(lhs, rhs)
    return state.P


def update_Q(state, X, Omega, gamma, eps):
    """IRLS step for the label-noise map with B = X W:
    ``(B^T B + 2 gamma H) Q = B^T (Omega - X P - X W)``."""
    Xv, Ov = _values(X), _values(Omega)
    B = Xv @ state.W
    H = l21_reweight_diag(state.Q, eps)
    lhs = B.T @ B + np.diag(2.0 * gamma * H)
    rhs = B.T @ (Ov - Xv @ state.P - B)
    state.Q = _solve_reweighted(lhs, rhs)
    return state.Q


def update_multipliers(state, hyper):
    """``Gamma += mu (Z - W)`` then ``mu = min(growth * mu, mu_max)``."""
    state.Gamma = state.Gamma + state.mu * (state.Z - state.W)
    state.mu = min(hyper.mu_growth * state.mu, hyper.mu_max)
    return state.Gamma, state.mu


def augmented_lagrangian(state, X, Omega, graph, hyper):
    """Full objective: data fit + penalties + alignment + coupling terms."""
    R = residual(state, X, Omega)
    val = 0.5 * float((R * R).sum())
    val += hyper.alpha * nuclear_norm(state.Z)
    val += hyper.beta * l21_norm(state.P)
    val += hyper.gamma * l21_norm(state.Q)
    if graph.num_edges:
        val += graph_term_value(graph, induced_similarity(state.W, _values(X), graph))
    diff = state.Z - state.W
    val += float((state.Gamma * diff).sum()) + 0.5 * state.mu * float((diff * diff).sum())
    return val


def _p_objective(state, Xv, Ov):
    q = Ov.shape[1]
    R = Ov - Xv @ state.P - (Xv @ state.W) @ (state.Q + np.eye(q))
    return 0.5 * float((R * R).sum())


def _check_finite(state, it):
    for name in ("W", "P", "Q", "Z", "Gamma"):
        if not np.all(np.isfinite(getattr(state, name))):
            raise NonFiniteState(f"{name} became non-finite at iteration {it}")


def fit(X, Omega, hyper, graph, debug_checks=False):
    """Run the alternating loop until the objective and the consensus gap
    ``||Z - W||_F / max(1, ||W||_F)`` both settle below ``hyper.tol``.

    With ``debug_checks`` the P/Q steps assert their own subproblem
    objectives do not increase (up to the IRLS smoothing slack).
    """
    Xv, Ov = _values(X), _values(Omega)
    state = init_state(Xv, Ov, hyper)
    x_opnorm = np.linalg.norm(Xv, 2)
    obj = augmented_lagrangian(state, Xv, Ov, graph, hyper)
    state.objective_history.append(obj)
    state.consensus_history.append(0.0)  # Z == W at init

    converged = False
    eps = hyper.l21_smooth_eps
    for it in range(1, hyper.max_iter + 1):
        update_Z(state, hyper.alpha)
        update_W(state, Xv, Ov, graph, hyper, x_opnorm=x_opnorm)
        if debug_checks:
            before = _p_objective(state, Xv, Ov) + hyper.beta * l21_norm(state.P)
        update_P(state, Xv, Ov, hyper.beta, eps)
        if debug_checks:
            after = _p_objective(state, Xv, Ov) + hyper.beta * l21_norm(state.P)
            slack = hyper.beta * state.P.shape[0] * eps + 1e-9 * (1.0 + abs(before))
            assert after <= before + slack, f"P step increased its objective at {it}"
            before = _p_objective(state, Xv, Ov) + hyper.gamma * l21_norm(state.Q)
        update_Q(state, Xv, Ov, hyper.gamma, eps)
        if debug_checks:
            after = _p_objective(state, Xv, Ov) + hyper.gamma * l21_norm(state.Q)
            slack = hyper.gamma * state.Q.shape[0] * eps + 1e-9 * (1.0 + abs(before))
            assert after <= before + slack, f"Q step increased its objective at {it}"
        update_multipliers(state, hyper)
        state.iter = it
        _check_finite(state, it)

        new_obj = augmented_lagrangian(state, Xv, Ov, graph, hyper)
        consensus = float(
            np.linalg.norm(state.Z - state.W) / max(1.0, np.linalg.norm(state.W))
        )
        state.objective_history.append(new_obj)
        state.consensus_history.append(consensus)
        rel_change = abs(new_obj - obj) / max(1.0, abs(obj))
        obj = new_obj
        if max(rel_change, consensus) < hyper.tol:
            converged = True
            break

    model = Model(W=state.W, P=state.P, Q=state.Q)
    recovered = recovered_estimate(model, Xv, Ov)
    return FitReport(
        model=model,
        recovered_D=recovered,
        iterations=state.iter,
        converged=converged,
        final_objective=obj,
        objective_history=tuple(state.objective_history),
        consensus_history=tuple(state.consensus_history),
        w_stall_count=state.w_stall_count,
    )


def recover_D(model, X, Omega):
    """Subtract the fitted noise and project each row back onto the simplex:
    ``proj(Omega - X P - (X W) Q)``."""
    Xv, Ov = _values(X), _values(Omega)
    if Xv.shape[1] != model.d or Ov.shape[1] != model.q:
        raise DimensionMismatch(
            f"model is {model.d}x{model.q}, data is {Xv.shape[1]} features x {Ov.shape[1]} labels"
        )
    raw = Ov - Xv @ model.P - (Xv @ model.W) @ model.Q
    return LabelDistributionMatrix(project_rows_to_simplex(raw))


def recovered_estimate(model, X, Omega, blend=_RECOVERY_BLEND):
    """The maintained true-distribution iterate returned by :func:`fit`.

    Rows of ``blend * (X W) + (1 - blend) * (Omega - X P - (X W) Q)``
    projected onto the simplex. The correction applied to each row scales
    with how badly the regression explains it, so unexplained (corrupted)
    rows move toward the prediction while well-explained rows keep their
    observed values.
    """
    Xv, Ov = _values(X), _values(Omega)
    if Xv.shape[1] != model.d or Ov.shape[1] != model.q:
        raise DimensionMismatch(
            f"model is {model.d}x{model.q}, data is {Xv.shape[1]} features x {Ov.shape[1]} labels"
        )
    XW = Xv @ model.W
    reconstruction = Ov - Xv @ model.P - XW @ model.Q
    raw = blend * XW + (1.0 - blend) * reconstruction
    return LabelDistributionMatrix(project_rows_to_simplex(raw))


def predict(model, X_new):
    """Rows of ``X_new W`` projected onto the simplex."""
    Xv = _values(X_new)
    if Xv.shape[1] != model.d:
        raise DimensionMismatch(f"model expects {model.d} features, got {Xv.shape[1]}")
    return LabelDistributionMatrix(project_rows_to_simplex(Xv @ model.W))
