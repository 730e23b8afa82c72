import logging
from dataclasses import dataclass
from dataclasses import field
from typing import Optional
from typing import Tuple

import cvxpy as cp
import numpy as np
import pandas as pd

from orthobot.chaos import pce
from orthobot.chaos.pce import PceVector
from orthobot.exceptions import InfeasibleError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import ShapeError
from orthobot.exceptions import SolverError
from orthobot.polynomials.basis import multi_ortho_basis
from orthobot.polynomials.measures import ProductMeasure
from orthobot.polynomials.measures import measure_from_spec
from orthobot.polynomials.tensor import compute_tensor
from orthobot.polynomials.tensor import galerkin_nu

logger = logging.getLogger(__name__)

BETA_MIXTURE = {
    "kind": "mixture",
    "weights": [0.3, 0.7],
    "components": [
        {"kind": "beta01", "alpha": 2.0, "beta": 4.5},
        {"kind": "beta01", "alpha": 4.0, "beta": 1.5},
    ],
}

CLARABEL_OPTIONS = {"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10}
SCS_OPTIONS = {"eps_abs": 1e-9, "eps_rel": 1e-9, "max_iters": 100000}

STATIONARITY_TOLERANCE = 1e-6
FEASIBILITY_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class OcpConfig:
    """
    Linear system x(t + 1) = A x(t) + B u(t) with A = ((k, 0), (a21, a22)),
    uncertain k and uncertain initial state, and the moment constraint
    E[x2(t)] + lam std(x2(t)) <= x2_max.
    """

    k: PceVector
    x0: Tuple[PceVector, PceVector]
    a21: float = 0.088
    a22: float = 0.819
    b: Tuple[float, float] = (-0.005, -0.002)
    q: np.ndarray = field(default_factory=lambda: np.eye(2))
    r: float = 1.0
    horizon: int = 75
    lam: float = 1.618
    x2_max: float = 0.17
    solver: str = "CLARABEL"
    solver_options: Optional[dict] = None

    @property
    def basis(self):
        return self.k.basis


def validate_ocp_config(cfg):
    """
    Validate the optimal control configuration.

    :param cfg: OcpConfig
    :return:
    """

    q = np.asarray(cfg.q, dtype=float)
    if q.shape != (2, 2) or not np.allclose(q, q.T):
        raise ParameterDomainError("`q` must be a symmetric 2 x 2 matrix")
    if np.min(np.linalg.eigvalsh(q)) <= 0:
        raise ParameterDomainError("`q` must be positive definite")

    if not cfg.r > 0:
        raise ParameterDomainError("`r` must be positive")

    if not (isinstance(cfg.horizon, (int, np.integer)) and cfg.horizon >= 1):
        raise ParameterDomainError("`horizon` must be a positive integer")

    if cfg.lam < 0:
        raise ParameterDomainError("`lam` must be non-negative")

    if len(cfg.x0) != 2 or any(x.basis is not cfg.basis for x in cfg.x0):
        raise ShapeError("`x0` must be two PCE vectors in the basis of `k`")

    if cfg.solver not in ("CLARABEL", "SCS"):
        raise ParameterDomainError("`solver` must be CLARABEL or SCS")


def ocp_galerkin_dynamics(x_t, u_t, cfg, nu):
    """
    One step of the Galerkin-projected dynamics.

    :param x_t: Pair of PceVector for x1 and x2
    :param u_t: Control input
    :param cfg: OcpConfig
    :param nu: Dense Galerkin coefficients
    :return: Pair of PceVector at the next time step
    """

    x1, x2 = x_t
    for x in (x1, x2):
        if x.basis is not cfg.basis:
            raise ShapeError("state and `k` are expanded in different bases")
    following_x1 = pce.galerkin_product(nu, cfg.k.coefficients, x1.coefficients)
    following_x2 = cfg.a21 * x1.coefficients + cfg.a22 * x2.coefficients
    following_x1[0] += cfg.b[0] * u_t
    following_x2[0] += cfg.b[1] * u_t
    return PceVector(following_x1, cfg.basis), PceVector(following_x2, cfg.basis)


def construct_dynamics_matrices(cfg, nu):
    """
    Matrices of the stacked coefficient dynamics s(t + 1) = M s(t) + b u(t)
    with s = (x1 coefficients, x2 coefficients).

    :param cfg: OcpConfig
    :param nu: Dense Galerkin coefficients
    :return: Tuple of M and b
    """

    size = cfg.basis.size
    identity = np.eye(size)
    k_matrix = np.einsum("ijk,j->ik", nu, cfg.k.coefficients)
    m = np.block(
        [
            [k_matrix, np.zeros((size, size))],
            [cfg.a21 * identity, cfg.a22 * identity],
        ]
    )
    b = np.zeros(2 * size)
    b[0] = cfg.b[0]
    b[size] = cfg.b[1]
    return m, b


def condense(m, b, s0, horizon):
    """
    Eliminate the states: s(t) = F[t - 1] + G[t - 1] u for t = 1 .. horizon.

    :param m: State matrix
    :param b: Input vector
    :param s0: Initial state
    :param horizon: Number of control inputs
    :return: Tuple of F with shape (horizon, n) and G with shape (horizon, n, horizon)
    """

    n = len(s0)
    f = np.zeros((horizon, n))
    g = np.zeros((horizon, n, horizon))
    state = s0
    response = np.zeros((n, horizon))
    for t in range(horizon):
        state = m @ state
        response = m @ response
        response[:, t] = b
        f[t] = state
        g[t] = response
    return f, g


@dataclass(frozen=True, eq=False)
class OcpResult:
    controls: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    objective: float
    residuals: dict
    status: str
    basis: object

    def moments(self):
        """
        Control inputs and state moments over time.

        :return: DataFrame with t, u, mean_x1, std_x1, mean_x2, std_x2
        """

        frame = pd.DataFrame({"t": np.arange(len(self.x1))})
        frame["u"] = np.append(self.controls, np.nan)
        for name, coefficients in (("x1", self.x1), ("x2", self.x2)):
            frame[f"mean_{name}"] = coefficients[:, 0]
            frame[f"std_{name}"] = pce.std_trajectory(coefficients, self.basis)
        return frame


class _CondensedProblem:
    """Objective ||A u + c||^2 + r ||u||^2 and constraints g_t(u) <= 0."""

    def __init__(self, cfg, f, g):
        size = cfg.basis.size
        norms = cfg.basis.norms()
        q_root = np.linalg.cholesky(np.asarray(cfg.q, dtype=float)).T
        weight = np.kron(q_root, np.diag(np.sqrt(norms)))

        self.r = cfg.r
        self.lam = cfg.lam
        self.x2_max = cfg.x2_max
        self.a = np.concatenate([weight @ g_t for g_t in g])
        self.c = np.concatenate([weight @ f_t for f_t in f])
        self.mean_rows = g[:, size, :]
        self.mean_constants = f[:, size]
        scale = np.sqrt(norms[1:])
        self.std_rows = scale[None, :, None] * g[:, size + 1 :, :]
        self.std_constants = scale[None, :] * f[:, size + 1 :]

    def objective(self, u):
        residual = self.a @ u + self.c
        return float(residual @ residual + self.r * u @ u)

    def gradient(self, u):
        return 2.0 * self.a.T @ (self.a @ u + self.c) + 2.0 * self.r * u

    def constraint_values(self, u):
        std = np.linalg.norm(
            np.einsum("tkj,j->tk", self.std_rows, u) + self.std_constants, axis=1
        )
        return self.mean_rows @ u + self.mean_constants + self.lam * std - self.x2_max

    def constraint_gradients(self, u):
        v = np.einsum("tkj,j->tk", self.std_rows, u) + self.std_constants
        norm = np.linalg.norm(v, axis=1)
        direction = np.divide(
            v, norm[:, None], out=np.zeros_like(v), where=norm[:, None] > 0
        )
        std_gradients = np.einsum("tkj,tk->tj", self.std_rows, direction)
        return self.mean_rows + self.lam * std_gradients

    def kkt_residuals(self, u, multipliers):
        gradient = self.gradient(u)
        values = self.constraint_values(u)
        lagrangian = gradient + multipliers @ self.constraint_gradients(u)
        # constraint values are -inf without an upper limit
        active = multipliers != 0
        slackness = multipliers[active] * values[active]
        return {
            "stationarity": float(
                np.max(np.abs(lagrangian)) / max(1.0, np.max(np.abs(gradient)))
            ),
            "complementary_slackness": float(np.max(np.abs(slackness), initial=0.0)),
            "primal_feasibility": float(max(0.0, np.max(values))),
            "dual_feasibility": float(max(0.0, -np.min(multipliers))),
        }

    def solve_unconstrained(self):
        hessian = self.a.T @ self.a + self.r * np.eye(self.a.shape[1])
        return np.linalg.solve(hessian, -self.a.T @ self.c)

    def solve(self, solver, options):
        u = cp.Variable(self.a.shape[1])
        constraints = [
            self.mean_rows[t] @ u
            + self.mean_constants[t]
            + self.lam * cp.norm(self.std_rows[t] @ u + self.std_constants[t])
            <= self.x2_max
            for t in range(len(self.mean_rows))
        ]
        objective = cp.sum_squares(self.a @ u + self.c) + self.r * cp.sum_squares(u)
        problem = cp.Problem(cp.Minimize(objective), constraints)
        try:
            problem.solve(solver=solver, **options)
        except cp.SolverError as e:
            raise SolverError(f"{solver} failed: {e}")
        multipliers = np.array(
            [
                0.0 if c.dual_value is None else float(np.squeeze(c.dual_value))
                for c in constraints
            ]
        )
        return problem.status, u.value, multipliers


def ocp_solve(cfg):
    """
    Solve the chance-constrained optimal control problem on the PCE coefficients.

    The Galerkin-projected dynamics are condensed so that every state is an
    affine function of the controls. The objective sums E[x' Q x] over the
    horizon, which is a quadratic form in the coefficients weighted by the
    basis norms, and the constraint holds at every t = 1 .. horizon. The
    second-order-cone program is solved with cvxpy; without an upper limit the
    normal equations are solved directly.

    :param cfg: OcpConfig
    :return: OcpResult
    """

    validate_ocp_config(cfg)
    basis = cfg.basis
    x1_0, x2_0 = cfg.x0

    initial = pce.mean(x2_0) + cfg.lam * pce.std(x2_0)
    if initial > cfg.x2_max:
        raise InfeasibleError(
            f"initial state violates the constraint: {initial} > {cfg.x2_max}"
        )

    logger.info(
        f"condensing dynamics over {cfg.horizon} steps and {basis.size} coefficients"
    )
    nu = galerkin_nu(compute_tensor(basis, 3), compute_tensor(basis, 2))
    m, b = construct_dynamics_matrices(cfg, nu)
    s0 = np.concatenate([x1_0.coefficients, x2_0.coefficients])
    f, g = condense(m, b, s0, cfg.horizon)
    problem = _CondensedProblem(cfg, f, g)

    if np.isinf(cfg.x2_max):
        logger.info("no upper limit, solving the normal equations")
        status = "optimal"
        controls = problem.solve_unconstrained()
        multipliers = np.zeros(cfg.horizon)
    else:
        options = cfg.solver_options
        if options is None:
            options = CLARABEL_OPTIONS if cfg.solver == "CLARABEL" else SCS_OPTIONS
        logger.info(f"solving second-order-cone program with {cfg.solver}")
        status, controls, multipliers = problem.solve(cfg.solver, options)
        if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            raise InfeasibleError(f"optimal control problem is {status}")
        if controls is None:
            raise SolverError(f"{cfg.solver} stopped with status {status}")

    residuals = problem.kkt_residuals(controls, multipliers)
    logger.info(f"optimal control residuals {residuals}")
    converged = (
        residuals["stationarity"] <= STATIONARITY_TOLERANCE
        and residuals["primal_feasibility"] <= FEASIBILITY_TOLERANCE
    )
    if status != cp.OPTIMAL:
        if not converged:
            raise SolverError(f"{cfg.solver} stopped with status {status}", residuals)
        logger.warning(f"{cfg.solver} reported {status} within residual tolerance")
    elif not converged:
        logger.warning("optimal control residuals exceed tolerance")

    states = np.concatenate([s0[None, :], f + g @ controls])
    size = basis.size
    return OcpResult(
        controls=controls,
        x1=states[:, :size],
        x2=states[:, size:],
        objective=problem.objective(controls),
        residuals=residuals,
        status=status,
        basis=basis,
    )


def ocp_monte_carlo(cfg, controls, count, seed):
    """
    Simulate sampled realizations of (k, x0) driven by fixed controls.

    :param cfg: OcpConfig
    :param controls: Control inputs, one per step
    :param count: Number of realizations
    :param seed: Seed of the germ generator
    :return: Tuple of the fraction of realizations violating x2 <= x2_max at
        any time and a DataFrame of sample moments over time
    """

    logger.info(f"simulating {count} realizations of the controlled system")
    germs = pce.sample_germ(cfg.basis, count, seed)
    k = pce.sample(cfg.k, germs)
    x1 = pce.sample(cfg.x0[0], germs)
    x2 = pce.sample(cfg.x0[1], germs)

    x1_path = [x1]
    x2_path = [x2]
    for u in controls:
        x1, x2 = k * x1 + cfg.b[0] * u, cfg.a21 * x1 + cfg.a22 * x2 + cfg.b[1] * u
        x1_path.append(x1)
        x2_path.append(x2)
    x1_path = np.array(x1_path)
    x2_path = np.array(x2_path)

    violated = x2_path > cfg.x2_max
    rate = float(np.mean(np.any(violated, axis=0)))
    logger.info(f"{rate:.2%} of realizations violate the upper limit")
    frame = pd.DataFrame(
        {
            "t": np.arange(len(x2_path)),
            "mean_x1": x1_path.mean(axis=1),
            "std_x1": x1_path.std(axis=1, ddof=1),
            "mean_x2": x2_path.mean(axis=1),
            "std_x2": x2_path.std(axis=1, ddof=1),
            "violated": violated.mean(axis=1),
        }
    )
    return rate, frame


def ocp_config(
    k_support=(0.923, 0.926),
    x1_0=None,
    x2_0=None,
    germ=None,
    degree=4,
    **kwargs,
):
    """
    Build an OcpConfig on the product of the germ of k and two Gaussian germs
    for the initial state.

    :param k_support: Pair (k_low, k_high), k = k_low + (k_high - k_low) z
    :param x1_0: {"mean": .., "std": ..} of the first initial state
    :param x2_0: {"mean": .., "std": ..} of the second initial state
    :param germ: Measure spec of z, the beta mixture by default
    :param degree: Total degree of the basis
    :param kwargs: Remaining OcpConfig fields
    :return: OcpConfig
    """

    if x1_0 is None:
        x1_0 = {"mean": 0.5, "std": 1.0 / 60.0}
    if x2_0 is None:
        x2_0 = {"mean": 0.1, "std": 0.01}
    if germ is None:
        germ = BETA_MIXTURE
    low, high = k_support
    if not low <= high:
        raise ParameterDomainError("`k_support` must satisfy k_low <= k_high")

    gaussian = {"kind": "gaussian"}
    germs = ProductMeasure(
        tuple(measure_from_spec(s) for s in (germ, gaussian, gaussian))
    )
    basis = multi_ortho_basis(germs, degree)
    x0 = (
        pce.matched_input(basis, 1, x1_0["mean"], x1_0["std"]),
        pce.matched_input(basis, 2, x2_0["mean"], x2_0["std"]),
    )
    if "q" in kwargs:
        kwargs["q"] = np.asarray(kwargs["q"], dtype=float)
    if "b" in kwargs:
        kwargs["b"] = tuple(kwargs["b"])
    return OcpConfig(
        k=pce.affine_input(basis, 0, low, high - low), x0=x0, **kwargs
    )
