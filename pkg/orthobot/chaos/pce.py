import logging
from dataclasses import dataclass

import numpy as np

from orthobot.exceptions import BasisIndexError
from orthobot.exceptions import NumericalBreakdownError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import ShapeError
from orthobot.polynomials import measures
from orthobot.polynomials.tensor import galerkin_nu

logger = logging.getLogger(__name__)

VARIANCE_TOLERANCE = 1e-14


@dataclass(frozen=True, eq=False)
class PceVector:
    """Coefficients x_k of a random variable x = sum_k x_k Phi_k."""

    coefficients: np.ndarray
    basis: object

    def __post_init__(self):
        if len(self.coefficients) != self.basis.size:
            raise ShapeError(
                f"{len(self.coefficients)} coefficients for a basis of size {self.basis.size}"
            )

    def __len__(self):
        return len(self.coefficients)

    def __add__(self, other):
        _check_same_basis(self, other)
        return PceVector(self.coefficients + other.coefficients, self.basis)

    def __mul__(self, scalar):
        return PceVector(scalar * self.coefficients, self.basis)

    __rmul__ = __mul__


def _check_same_basis(*vectors):
    basis = vectors[0].basis
    for v in vectors[1:]:
        if v.basis is not basis:
            raise ShapeError("PCE vectors are expanded in different bases")


def deterministic(basis, c):
    """PCE of the constant c"""
    coefficients = np.zeros(basis.size)
    coefficients[0] = c
    return PceVector(coefficients, basis)


def _unit_position(basis, i):
    if not 0 <= i < len(basis.factors):
        raise BasisIndexError(f"germ {i} out of range for {len(basis.factors)} germs")
    unit = np.zeros(len(basis.factors), dtype=int)
    unit[i] = 1
    matches = np.flatnonzero(np.all(basis.index_array == unit, axis=1))
    if len(matches) == 0:
        raise ParameterDomainError("basis of degree 0 cannot carry a random input")
    return int(matches[0])


def affine_input(basis, i, a, b):
    """
    PCE of a + b z_i, where z_i is the i-th germ.

    With monic phi_1(t) = t - alpha_0 the germ is z_i = alpha_0 + phi_1, so the
    expansion has exactly two terms.

    :param basis: OrthoBasis or MultiOrthoBasis
    :param i: Germ dimension
    :param a: Offset
    :param b: Slope
    :return: PceVector
    """

    if b == 0:
        return deterministic(basis, a)
    coefficients = np.zeros(basis.size)
    coefficients[0] = a + b * basis.factors[i].rc.alpha[0]
    coefficients[_unit_position(basis, i)] = b
    return PceVector(coefficients, basis)


def matched_input(basis, i, mean, std):
    """
    Two-term PCE along germ i with prescribed mean and standard deviation.

    :param basis: OrthoBasis or MultiOrthoBasis
    :param i: Germ dimension
    :param mean: Mean of the input
    :param std: Standard deviation of the input
    :return: PceVector
    """

    if std < 0:
        raise ParameterDomainError(f"`std` must be non-negative, got {std}")
    if std == 0:
        return deterministic(basis, mean)
    rc = basis.factors[i].rc
    b = std / np.sqrt(rc.beta[1])
    return affine_input(basis, i, mean - b * rc.alpha[0], b)


def mean(x):
    return float(x.coefficients[0])


def _variance(coefficients, norms):
    variance = coefficients[..., 1:] ** 2 @ norms[1:]
    if np.any(variance < -VARIANCE_TOLERANCE):
        raise NumericalBreakdownError(f"negative variance {np.min(variance)}")
    return np.maximum(variance, 0.0)


def std(x, t2=None):
    """
    Standard deviation from the coefficients.

    :param x: PceVector
    :param t2: Order-2 Tensor, defaults to the basis norms
    :return: sqrt(sum_{k >= 1} x_k^2 <Phi_k, Phi_k>)
    """

    if t2 is None:
        norms = x.basis.norms()
    else:
        norms = np.array([t2[k, k] for k in range(t2.basis_size)])
    if len(norms) != len(x):
        raise ShapeError(f"{len(norms)} norms for {len(x)} coefficients")
    return float(np.sqrt(_variance(x.coefficients, norms)))


def std_trajectory(coefficients, basis):
    """
    Standard deviations of a trajectory of coefficient vectors.

    :param coefficients: Array of shape (steps, basis size)
    :param basis: OrthoBasis or MultiOrthoBasis
    :return: Array of shape (steps,)
    """

    coefficients = np.atleast_2d(coefficients)
    if coefficients.shape[1] != basis.size:
        raise ShapeError(
            f"{coefficients.shape[1]} coefficients for a basis of size {basis.size}"
        )
    return np.sqrt(_variance(coefficients, basis.norms()))


def galerkin_product(nu, x, y):
    """
    Coefficients of the projected product, z_k1 = sum x_k2 y_k3 nu(k1, k2, k3).

    :param nu: Dense Galerkin coefficients
    :param x: Coefficient array
    :param y: Coefficient array
    :return: Coefficient array
    """

    return np.einsum("ijk,j,k->i", nu, x, y)


def galerkin_multiply(x, y, t3, t2):
    """
    Degree-truncated product of two PCE vectors.

    :param x: PceVector
    :param y: PceVector
    :param t3: Order-3 Tensor
    :param t2: Order-2 Tensor
    :return: PceVector
    """

    _check_same_basis(x, y)
    if t3.basis_size != len(x) or t2.basis_size != len(x):
        raise ShapeError(
            f"tensors over {t3.basis_size} elements for {len(x)} coefficients"
        )
    nu = galerkin_nu(t3, t2)
    return PceVector(galerkin_product(nu, x.coefficients, y.coefficients), x.basis)


def sample(x, tau):
    """
    Realizations of a PCE at germ points.

    :param x: PceVector
    :param tau: Germ point of shape (m,) or points of shape (count, m)
    :return: Scalar or array of realizations
    """

    tau = np.asarray(tau, dtype=float)
    single = tau.ndim == 1 and len(tau) == len(x.basis.factors)
    points = tau.reshape(-1, len(x.basis.factors))
    values = x.basis.evaluate_all(points) @ x.coefficients
    if single:
        return float(values[0])
    return values


def sample_germ(basis, count, seed):
    """
    Draw i.i.d. germ realizations.

    Every dimension gets its own generator stream spawned from `seed`.

    :param basis: OrthoBasis or MultiOrthoBasis
    :param count: Number of realizations
    :param seed: Non-negative integer seed
    :return: Array of shape (count, m)
    """

    streams = np.random.SeedSequence(seed).spawn(len(basis.factors))
    logger.debug(f"sampling {count} germs with seed {seed}")
    return np.column_stack(
        [
            measures.sample(factor.measure, count, np.random.default_rng(stream))
            for factor, stream in zip(basis.factors, streams)
        ]
    )
