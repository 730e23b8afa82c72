import logging
from dataclasses import dataclass
from typing import Optional
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from orthobot.exceptions import BasisIndexError
from orthobot.exceptions import ConvergenceError
from orthobot.exceptions import InstabilityError
from orthobot.exceptions import NumericalBreakdownError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import UnsupportedMeasureError
from orthobot.polynomials.measures import canonical_measure
from orthobot.polynomials.measures import density_eval
from orthobot.polynomials.measures import truncated_support
from orthobot.polynomials.quadrature import QuadratureRule
from orthobot.polynomials.quadrature import gauss_rule
from orthobot.polynomials.quadrature import lebesgue_rule

logger = logging.getLogger(__name__)

SOURCES = ("closed_form", "stieltjes", "lanczos", "multiple_discretization")
ORTHOGONALITY_TOLERANCE = 1e-8


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """
    Coefficients of the three-term recurrence
    phi_{k+1}(t) = (t - alpha_k) phi_k(t) - beta_k phi_{k-1}(t).
    """

    alpha: np.ndarray
    beta: np.ndarray
    source: str
    support: Tuple[float, float] = (-np.inf, np.inf)

    def __post_init__(self):
        if len(self.alpha) != len(self.beta) or len(self.alpha) < 1:
            raise ParameterDomainError(
                "`alpha` and `beta` must be non-empty and of equal length"
            )
        if self.beta[0] != 1.0:
            raise ParameterDomainError("`beta[0]` must be 1 for a probability measure")
        if np.any(~(np.asarray(self.beta) > 0)):
            raise NumericalBreakdownError("recurrence coefficients contain beta <= 0")

    def __len__(self):
        return len(self.alpha)

    def norms(self, n=None):
        """<phi_k, phi_k> = beta_0 beta_1 ... beta_k"""
        return np.cumprod(self.beta[: n or len(self)])


@dataclass(frozen=True)
class DiscretizationConfig:
    """
    Discretization of a measure by a density-weighted Lebesgue rule.

    :param rule: One of fejer1, fejer2, clenshaw_curtis
    :param nodes: Node count, defaults to max(10 N, 1000)
    """

    rule: str = "fejer1"
    nodes: Optional[int] = None

    def node_count(self, n):
        return self.nodes if self.nodes is not None else max(10 * n, 1000)


def _validate_n(n):
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ParameterDomainError(f"`N` must be a positive integer, got {n}")


def discretize(m, config=DiscretizationConfig(), n=1):
    """
    Density-weighted quadrature rule of a measure on its truncated support.

    Weights are normalized to unit mass.

    :param m: Measure
    :param config: DiscretizationConfig
    :param n: Number of recurrence coefficients the rule has to support
    :return: QuadratureRule
    """

    support = truncated_support(m, moments=2 * n)
    rule = lebesgue_rule(config.rule, config.node_count(n), support)
    weights = rule.weights * density_eval(m, rule.nodes)
    mass = np.sum(weights)
    if not mass > 0:
        raise NumericalBreakdownError(f"discretization of {m.name} has no mass")
    return QuadratureRule(rule.nodes, weights / mass, rule.kind)


def _jacobi_coefficients(n, a, b):
    """monic Jacobi coefficients for the weight (1 - t)^a (1 + t)^b on [-1, 1]"""
    k = np.arange(n, dtype=float)
    alpha = np.empty(n)
    beta = np.ones(n)
    alpha[0] = (b - a) / (a + b + 2.0)
    s = 2.0 * k[1:] + a + b
    alpha[1:] = (b ** 2 - a ** 2) / (s * (s + 2.0))
    if n > 1:
        beta[1] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b))
    if n > 2:
        j = k[2:]
        s = 2.0 * j + a + b
        beta[2:] = (
            4.0 * j * (j + a) * (j + b) * (j + a + b) / (s ** 2 * (s + 1.0) * (s - 1.0))
        )
    return alpha, beta


def closed_form_coefficients(kind, n, alpha=None, beta=None):
    """
    Recurrence coefficients of the canonical measures in closed form.

    :param kind: Canonical measure kind
    :param n: Number of coefficient pairs
    :param alpha: First shape parameter for beta01, gamma and jacobi
    :param beta: Second shape parameter for beta01, gamma and jacobi
    :return: RecurrenceCoefficients
    """

    _validate_n(n)
    # validates kind and shape parameters
    support = canonical_measure(kind, alpha=alpha, beta=beta).support
    k = np.arange(n, dtype=float)
    a = np.zeros(n)
    b = np.ones(n)

    if kind == "gaussian":
        b[1:] = k[1:]
    elif kind == "hermite":
        b[1:] = k[1:] / 2.0
    elif kind in ("legendre", "uniform01"):
        b[1:] = k[1:] ** 2 / (4.0 * k[1:] ** 2 - 1.0)
        if kind == "uniform01":
            a[:] = 0.5
            b[1:] /= 4.0
    elif kind == "jacobi":
        a, b = _jacobi_coefficients(n, alpha, beta)
    elif kind == "beta01":
        a, b = _jacobi_coefficients(n, beta - 1.0, alpha - 1.0)
        a = (1.0 + a) / 2.0
        b[1:] /= 4.0
    elif kind in ("gamma", "laguerre"):
        shape, rate = (alpha, beta) if kind == "gamma" else (1.0, 1.0)
        a = (2.0 * k + shape) / rate
        b[1:] = k[1:] * (k[1:] + shape - 1.0) / rate ** 2
    else:
        raise UnsupportedMeasureError(f"no closed form for measure kind `{kind}`")

    return RecurrenceCoefficients(a, b, "closed_form", support)


def _check_discrete(rule, n):
    if np.count_nonzero(rule.weights > 0) < n:
        raise ParameterDomainError(
            f"discretization with {len(rule)} nodes cannot carry {n} orthogonal polynomials"
        )
    if np.any(rule.weights < 0):
        raise ParameterDomainError("discretization weights must be non-negative")


def stieltjes_discrete(rule, n):
    """
    Stieltjes procedure on a discrete measure.

    Polynomial values are carried normalized to unit length, so that
    over- and underflow do not occur for large degrees.

    :param rule: QuadratureRule with non-negative weights
    :param n: Number of coefficient pairs
    :return: Tuple of alpha and beta arrays
    """

    _validate_n(n)
    _check_discrete(rule, n)
    x = rule.nodes
    w = rule.weights / np.sum(rule.weights)

    alpha = np.zeros(n)
    beta = np.ones(n)
    q_previous = np.zeros_like(x)
    q = np.ones_like(x)
    alpha[0] = np.dot(w, x)
    with np.errstate(over="raise", invalid="raise"):
        try:
            for k in range(n - 1):
                r = (x - alpha[k]) * q - np.sqrt(beta[k]) * q_previous
                norm = np.dot(w, r * r)
                if not norm > 0:
                    raise NumericalBreakdownError(
                        f"beta_{k + 1} = {norm} <= 0, discretization too coarse for N = {n}"
                    )
                beta[k + 1] = norm
                q_previous, q = q, r / np.sqrt(norm)
                alpha[k + 1] = np.dot(w, x * q * q)
        except FloatingPointError as e:
            raise InstabilityError(
                f"overflow in Stieltjes procedure ({e}), scale the weights and polynomials"
            )
    return alpha, beta


def lanczos_discrete(rule, n):
    """
    Lanczos procedure on a discrete measure.

    Tridiagonalizes diag(nodes) starting from sqrt(weights); the resulting
    Jacobi matrix holds the recurrence coefficients. Full reorthogonalization
    is applied twice per step.

    :param rule: QuadratureRule with non-negative weights
    :param n: Number of coefficient pairs
    :return: Tuple of alpha and beta arrays
    """

    _validate_n(n)
    _check_discrete(rule, n)
    x = rule.nodes
    w = rule.weights / np.sum(rule.weights)

    q = np.zeros((n, len(x)))
    q[0] = np.sqrt(w)
    alpha = np.zeros(n)
    beta = np.ones(n)
    for k in range(n):
        v = x * q[k]
        alpha[k] = np.dot(q[k], v)
        if k == n - 1:
            break
        v -= alpha[k] * q[k]
        if k > 0:
            v -= np.sqrt(beta[k]) * q[k - 1]
        basis = q[: k + 1]
        for _ in range(2):
            v -= basis.T @ (basis @ v)
        norm = np.dot(v, v)
        if not np.isfinite(norm):
            raise InstabilityError(f"Lanczos step {k + 1} overflowed")
        if not norm > 0:
            raise NumericalBreakdownError(
                f"beta_{k + 1} = {norm} <= 0, discretization too coarse for N = {n}"
            )
        beta[k + 1] = norm
        q[k + 1] = v / np.sqrt(norm)
        loss = np.max(np.abs(basis @ q[k + 1]))
        if loss > ORTHOGONALITY_TOLERANCE:
            raise InstabilityError(
                f"Lanczos vectors lost orthogonality ({loss:.2e}) at step {k + 1}"
            )
    return alpha, beta


PROCEDURES = {"stieltjes": stieltjes_discrete, "lanczos": lanczos_discrete}


def _on_discretization(procedure, m, n, disc):
    _validate_n(n)
    if disc.node_count(n) < n:
        raise ParameterDomainError(
            f"discretization with {disc.node_count(n)} nodes is too small for N = {n}"
        )
    logger.debug(f"{procedure} on {disc.node_count(n)} {disc.rule} nodes for {m.name}")
    alpha, beta = PROCEDURES[procedure](discretize(m, disc, n), n)
    return RecurrenceCoefficients(alpha, beta, procedure, m.support)


def stieltjes(m, n, disc=DiscretizationConfig()):
    """
    Recurrence coefficients of an arbitrary measure by the Stieltjes procedure.

    :param m: Measure
    :param n: Number of coefficient pairs
    :param disc: DiscretizationConfig for the inner products
    :return: RecurrenceCoefficients
    """

    return _on_discretization("stieltjes", m, n, disc)


def lanczos(m, n, disc=DiscretizationConfig()):
    """
    Recurrence coefficients of an arbitrary measure by the Lanczos procedure.

    :param m: Measure
    :param n: Number of coefficient pairs
    :param disc: DiscretizationConfig for the inner products
    :return: RecurrenceCoefficients
    """

    return _on_discretization("lanczos", m, n, disc)


def _component_rule(component, nodes):
    if component.is_canonical:
        rc = closed_form_coefficients(component.kind, nodes, **component.parameters)
        return gauss_rule(rc, nodes)
    return discretize(component, DiscretizationConfig(nodes=nodes), nodes // 2)


def merged_discretization(m, nodes):
    """
    Union of the component rules with weights scaled by the mixture weights.

    :param m: Measure with components
    :param nodes: Nodes per component
    :return: QuadratureRule
    """

    rules = [(w, _component_rule(c, nodes)) for w, c in m.components]
    x = np.concatenate([r.nodes for _, r in rules])
    weights = np.concatenate([w * r.weights for w, r in rules])
    order = np.argsort(x, kind="stable")
    return QuadratureRule(x[order], weights[order], "merged")


def multiple_discretization(
    m,
    n,
    per_component_nodes=None,
    tol=1e-10,
    max_iterations=12,
    procedure="stieltjes",
):
    """
    Recurrence coefficients of a mixture measure by multiple discretization.

    Canonical components contribute Gauss rules, other components Fejér
    discretizations. The node count per component doubles until two
    successive coefficient sets agree within `tol`.

    :param m: Measure with components
    :param n: Number of coefficient pairs
    :param per_component_nodes: Initial nodes per component, defaults to 2 N + 1
    :param tol: Componentwise agreement tolerance
    :param max_iterations: Maximum number of discretizations
    :param procedure: stieltjes or lanczos
    :return: RecurrenceCoefficients
    """

    _validate_n(n)
    if not m.components:
        raise ParameterDomainError(f"{m.name} has no components to discretize")
    if procedure not in PROCEDURES:
        raise ParameterDomainError(
            f"`procedure` must be one of {sorted(PROCEDURES)}, got {procedure}"
        )

    nodes = per_component_nodes or 2 * n + 1
    previous = None
    current = None
    for iteration in range(max_iterations):
        current = PROCEDURES[procedure](merged_discretization(m, nodes), n)
        logger.debug(
            f"multiple discretization iteration {iteration} with {nodes} nodes"
        )
        if previous is not None and all(
            np.allclose(c, p, rtol=tol, atol=tol) for c, p in zip(current, previous)
        ):
            logger.info(
                f"multiple discretization converged after {iteration + 1} iterations"
            )
            alpha, beta = current
            return RecurrenceCoefficients(
                alpha, beta, "multiple_discretization", m.support
            )
        previous = current
        nodes *= 2

    raise ConvergenceError(
        f"multiple discretization did not converge within {max_iterations} iterations",
        previous=previous,
        current=current,
    )


def recurrence_coefficients(m, n, method="auto", disc=DiscretizationConfig()):
    """
    Recurrence coefficients by the method suited to the measure.

    :param m: Measure
    :param n: Number of coefficient pairs
    :param method: auto, closed_form, stieltjes, lanczos or multiple_discretization
    :param disc: DiscretizationConfig for stieltjes and lanczos
    :return: RecurrenceCoefficients
    """

    if method == "auto":
        if m.is_canonical:
            method = "closed_form"
        elif m.components:
            method = "multiple_discretization"
        else:
            method = "stieltjes"

    if method == "closed_form":
        if not m.is_canonical:
            raise UnsupportedMeasureError(f"{m.name} has no closed-form coefficients")
        return closed_form_coefficients(m.kind, n, **m.parameters)
    if method == "stieltjes":
        return stieltjes(m, n, disc)
    if method == "lanczos":
        return lanczos(m, n, disc)
    if method == "multiple_discretization":
        return multiple_discretization(m, n)
    raise ParameterDomainError(f"unknown recurrence method `{method}`")


def expand_monic(rc, k):
    """
    Monomial coefficients of phi_k, ascending, with leading coefficient 1.

    :param rc: RecurrenceCoefficients
    :param k: Degree, below the number of coefficient pairs
    :return: Array of length k + 1
    """

    if not 0 <= k < len(rc):
        raise BasisIndexError(
            f"degree {k} out of range for {len(rc)} coefficient pairs"
        )
    previous = np.zeros(1)
    current = np.ones(1)
    for j in range(k):
        following = P.polysub(P.polymulx(current), rc.alpha[j] * current)
        if j > 0:
            following = P.polysub(following, rc.beta[j] * previous)
        previous, current = current, following
    return current
