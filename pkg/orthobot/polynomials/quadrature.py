import logging
import math
from dataclasses import dataclass
from typing import Callable
from typing import Tuple

import numpy as np
from scipy import fft

from orthobot.exceptions import EigensolverError
from orthobot.exceptions import InsufficientCoefficientsError
from orthobot.exceptions import InvalidEndpointError
from orthobot.exceptions import NumericalBreakdownError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import TruncationRequiredError

logger = logging.getLogger(__name__)

RULE_KINDS = (
    "gauss",
    "gauss_radau",
    "gauss_lobatto",
    "fejer1",
    "fejer2",
    "clenshaw_curtis",
)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class SymTridiagonal:
    diagonal: np.ndarray
    subdiagonal: np.ndarray

    def __post_init__(self):
        if len(self.diagonal) < 1:
            raise ParameterDomainError("`diagonal` must not be empty")
        if len(self.subdiagonal) != len(self.diagonal) - 1:
            raise ParameterDomainError(
                "`subdiagonal` must be one element shorter than `diagonal`"
            )

    def to_dense(self):
        return (
            np.diag(self.diagonal)
            + np.diag(self.subdiagonal, 1)
            + np.diag(self.subdiagonal, -1)
        )


def symtridiag_eigen(t):
    """
    Eigenvalues and first eigenvector components of a symmetric tridiagonal matrix.

    Implicit QL with Wilkinson-type shifts and deflation. Rotations are applied
    to the first row of the eigenvector matrix only, which is all Golub-Welsch
    needs.

    :param t: SymTridiagonal matrix
    :return: Tuple of ascending eigenvalues and first components of unit eigenvectors
    """

    n = len(t.diagonal)
    d = np.array(t.diagonal, dtype=float)
    e = np.zeros(n)
    e[: n - 1] = t.subdiagonal
    z = np.zeros(n)
    z[0] = 1.0

    eps = np.finfo(float).eps
    max_iterations = 30 * n
    iterations = 0

    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break

            iterations += 1
            if iterations > max_iterations:
                raise EigensolverError(
                    f"QL iteration did not converge after {max_iterations} iterations"
                )

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # recover from underflow
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = np.argsort(d, kind="stable")
    logger.debug(f"symmetric tridiagonal eigensolve of size {n} in {iterations} sweeps")
    return d[order], z[order]


def jacobi_matrix(rc, n):
    """
    Jacobi matrix of the first `n` recurrence coefficients.

    :param rc: RecurrenceCoefficients
    :param n: Matrix size
    :return: SymTridiagonal with diagonal alpha and subdiagonal sqrt(beta)
    """

    if n < 1:
        raise ParameterDomainError("`n` must be a positive integer")
    if n > len(rc):
        raise InsufficientCoefficientsError(
            f"{n} nodes requested but only {len(rc)} recurrence coefficients available"
        )
    return SymTridiagonal(
        np.array(rc.alpha[:n], dtype=float), np.sqrt(np.array(rc.beta[1:n]))
    )


def _rule_from_jacobi(t, beta0, kind):
    nodes, first = symtridiag_eigen(t)
    weights = beta0 * first ** 2
    if np.any(weights <= 0.0):
        raise NumericalBreakdownError(
            f"{kind} rule produced non-positive weights, recurrence coefficients are corrupt"
        )
    return QuadratureRule(nodes, weights, kind)


def gauss_rule(rc, n):
    """
    Gauss rule via Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix,
    weights beta_0 times the squared first eigenvector components.

    :param rc: RecurrenceCoefficients
    :param n: Number of nodes
    :return: QuadratureRule exact to degree 2n - 1
    """

    return _rule_from_jacobi(jacobi_matrix(rc, n), rc.beta[0], "gauss")


def _monic_values(rc, n, tau):
    """values of phi_0 .. phi_n at a scalar point"""
    values = np.zeros(n + 1)
    values[0] = 1.0
    if n >= 1:
        values[1] = tau - rc.alpha[0]
    for k in range(1, n):
        values[k + 1] = (tau - rc.alpha[k]) * values[k] - rc.beta[k] * values[k - 1]
    return values


def _check_endpoint(rc, endpoint):
    a, b = rc.support
    if a < endpoint < b:
        raise InvalidEndpointError(
            f"endpoint {endpoint} lies inside the support ({a}, {b})"
        )


def gauss_radau_rule(rc, n, fixed_endpoint):
    """
    Gauss-Radau rule with one node fixed at `fixed_endpoint`.

    The last diagonal entry of the Jacobi matrix is modified so that the
    endpoint becomes an eigenvalue.

    :param rc: RecurrenceCoefficients
    :param n: Number of nodes, including the fixed one
    :param fixed_endpoint: Node prescribed at a support boundary
    :return: QuadratureRule exact to degree 2n - 2
    """

    _check_endpoint(rc, fixed_endpoint)
    t = jacobi_matrix(rc, n)
    phi = _monic_values(rc, n - 1, fixed_endpoint)
    diagonal = np.array(t.diagonal)
    if n == 1:
        diagonal[0] = fixed_endpoint
    else:
        diagonal[-1] = fixed_endpoint - rc.beta[n - 1] * phi[n - 2] / phi[n - 1]
    rule = _rule_from_jacobi(
        SymTridiagonal(diagonal, t.subdiagonal), rc.beta[0], "gauss_radau"
    )
    return rule


def gauss_lobatto_rule(rc, n, left, right):
    """
    Gauss-Lobatto rule with nodes fixed at both `left` and `right`.

    The last diagonal and subdiagonal entries are chosen so that both
    endpoints become eigenvalues.

    :param rc: RecurrenceCoefficients
    :param n: Number of nodes, including both endpoints
    :param left: Left endpoint
    :param right: Right endpoint
    :return: QuadratureRule exact to degree 2n - 3
    """

    if n < 2:
        raise ParameterDomainError("`n` must be at least 2 for a Lobatto rule")
    if not left < right:
        raise InvalidEndpointError("`left` must be smaller than `right`")
    _check_endpoint(rc, left)
    _check_endpoint(rc, right)

    t = jacobi_matrix(rc, n)
    phi_left = _monic_values(rc, n - 1, left)
    phi_right = _monic_values(rc, n - 1, right)
    system = np.array(
        [[phi_left[n - 1], phi_left[n - 2]], [phi_right[n - 1], phi_right[n - 2]]]
    )
    rhs = np.array([left * phi_left[n - 1], right * phi_right[n - 1]])
    alpha_n, beta_n = np.linalg.solve(system, rhs)
    if beta_n <= 0.0:
        raise NumericalBreakdownError("Lobatto modification produced beta <= 0")

    diagonal = np.array(t.diagonal)
    diagonal[-1] = alpha_n
    subdiagonal = np.array(t.subdiagonal)
    subdiagonal[-1] = math.sqrt(beta_n)
    rule = _rule_from_jacobi(
        SymTridiagonal(diagonal, subdiagonal), rc.beta[0], "gauss_lobatto"
    )
    return rule


def _check_interval(n, interval, minimum):
    a, b = interval
    if n < minimum:
        raise ParameterDomainError(f"`n` must be at least {minimum}")
    if not (np.isfinite(a) and np.isfinite(b)):
        raise TruncationRequiredError(
            f"interval ({a}, {b}) is infinite, truncate the support first"
        )
    if not a < b:
        raise ParameterDomainError("`interval` must satisfy a < b")
    return a, b


def _affine(nodes, weights, interval, kind):
    """map an ascending rule on [-1, 1] to the interval"""
    a, b = interval
    return QuadratureRule(
        a + (b - a) * (nodes + 1.0) / 2.0, weights * (b - a) / 2.0, kind
    )


def fejer1_rule(n, interval=(-1.0, 1.0)):
    """
    Fejér's first rule: Chebyshev points of the first kind, open at both ends.

    :param n: Number of nodes
    :param interval: Finite interval
    :return: QuadratureRule for the Lebesgue weight on the interval
    """

    _check_interval(n, interval, 1)
    theta = (2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n)
    # weights are a type-III DCT of the even Chebyshev moments
    moments = np.zeros(n)
    moments[0] = 1.0
    j = np.arange(1, (n - 1) // 2 + 1)
    moments[2 * j] = -1.0 / (4.0 * j ** 2 - 1.0)
    weights = 2.0 / n * fft.dct(moments, type=3)
    return _affine(np.cos(theta)[::-1], weights[::-1], interval, "fejer1")


def fejer2_rule(n, interval=(-1.0, 1.0)):
    """
    Fejér's second rule: interior Chebyshev points of the second kind.

    :param n: Number of nodes
    :param interval: Finite interval
    :return: QuadratureRule for the Lebesgue weight on the interval
    """

    _check_interval(n, interval, 1)
    theta = np.arange(1, n + 1) * np.pi / (n + 1)
    total = np.zeros(n)
    for j in range(1, (n + 1) // 2 + 1):
        total += np.sin((2 * j - 1) * theta) / (2 * j - 1)
    weights = 4.0 * np.sin(theta) / (n + 1) * total
    return _affine(np.cos(theta)[::-1], weights[::-1], interval, "fejer2")


def clenshaw_curtis_rule(n, interval=(-1.0, 1.0)):
    """
    Clenshaw-Curtis rule: Chebyshev extreme points including both endpoints.

    :param n: Number of nodes
    :param interval: Finite interval
    :return: QuadratureRule for the Lebesgue weight on the interval
    """

    _check_interval(n, interval, 2)
    degree = n - 1
    theta = np.arange(n) * np.pi / degree
    weights = np.zeros(n)
    inner = np.ones(degree - 1)
    theta_inner = theta[1:-1]
    if degree % 2 == 0:
        weights[0] = weights[-1] = 1.0 / (degree ** 2 - 1)
        for j in range(1, degree // 2):
            inner -= 2.0 * np.cos(2 * j * theta_inner) / (4 * j ** 2 - 1)
        inner -= np.cos(degree * theta_inner) / (degree ** 2 - 1)
    else:
        weights[0] = weights[-1] = 1.0 / degree ** 2
        for j in range(1, (degree - 1) // 2 + 1):
            inner -= 2.0 * np.cos(2 * j * theta_inner) / (4 * j ** 2 - 1)
    weights[1:-1] = 2.0 * inner / degree
    return _affine(np.cos(theta)[::-1], weights[::-1], interval, "clenshaw_curtis")


LEBESGUE_RULES = {
    "fejer1": fejer1_rule,
    "fejer2": fejer2_rule,
    "clenshaw_curtis": clenshaw_curtis_rule,
}


def lebesgue_rule(kind, n, interval):
    try:
        return LEBESGUE_RULES[kind](n, interval)
    except KeyError:
        raise ParameterDomainError(
            f"`kind` must be one of {sorted(LEBESGUE_RULES)}, got {kind}"
        )


def integrate(rule: QuadratureRule, f: Callable) -> float:
    """
    Apply a quadrature rule.

    :param rule: QuadratureRule
    :param f: Vectorised integrand
    :return: Sum of weights times integrand values at the nodes
    """

    return float(np.dot(rule.weights, f(rule.nodes)))


def tensor_grid(rules) -> Tuple[np.ndarray, np.ndarray]:
    """
    Full tensor grid of univariate rules.

    :param rules: Sequence of QuadratureRule, one per dimension
    :return: Tuple of nodes with shape (count, dimensions) and product weights
    """

    grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    weight_grids = np.meshgrid(*[r.weights for r in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in weight_grids], axis=1), axis=1)
    return nodes, weights
