import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import comb

from orthobot.exceptions import BasisIndexError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import ShapeError
from orthobot.polynomials.measures import Measure
from orthobot.polynomials.measures import ProductMeasure
from orthobot.polynomials.quadrature import QuadratureRule
from orthobot.polynomials.quadrature import gauss_rule
from orthobot.polynomials.recurrence import RecurrenceCoefficients
from orthobot.polynomials.recurrence import recurrence_coefficients

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """
    Monic orthogonal polynomials phi_0 .. phi_degree of a measure.

    `rc` holds 2 (degree + 1) coefficient pairs so that the companion Gauss
    rule `quad` integrates products of three basis polynomials exactly.
    """

    measure: Measure
    rc: RecurrenceCoefficients
    degree: int
    quad: QuadratureRule
    method: str = "auto"

    @property
    def size(self):
        return self.degree + 1

    @property
    def factors(self):
        return (self,)

    @property
    def index_set(self):
        return [(k,) for k in range(self.size)]

    @property
    def index_array(self):
        return np.arange(self.size)[:, None]

    def norms(self):
        """<phi_k, phi_k> for k in 0 .. degree"""
        return self.rc.norms(self.size)

    def coefficients(self, count):
        """recurrence coefficients with at least `count` pairs"""
        if count <= len(self.rc):
            return self.rc
        logger.debug(f"extending coefficients of {self.measure.name} to {count}")
        return recurrence_coefficients(self.measure, count, self.method)

    def evaluate_all(self, tau):
        """
        Values of all basis polynomials.

        :param tau: Array of shape (count,) or (count, 1)
        :return: Array of shape (count, size)
        """

        tau = np.asarray(tau, dtype=float)
        if tau.ndim == 2:
            if tau.shape[1] != 1:
                raise ShapeError(f"univariate basis got points of shape {tau.shape}")
            tau = tau[:, 0]
        values = np.zeros(tau.shape + (self.size,))
        values[..., 0] = 1.0
        if self.degree >= 1:
            values[..., 1] = tau - self.rc.alpha[0]
        for k in range(1, self.degree):
            values[..., k + 1] = (tau - self.rc.alpha[k]) * values[
                ..., k
            ] - self.rc.beta[k] * values[..., k - 1]
        return values


def ortho_basis(measure, degree, method="auto"):
    """
    Build the univariate orthogonal basis of a measure.

    :param measure: Measure
    :param degree: Maximum polynomial degree
    :param method: auto, closed_form, stieltjes, lanczos or multiple_discretization
    :return: OrthoBasis
    """

    if not (isinstance(degree, (int, np.integer)) and degree >= 0):
        raise ParameterDomainError(
            f"`degree` must be a non-negative integer, got {degree}"
        )
    nodes = 2 * (degree + 1)
    rc = recurrence_coefficients(measure, nodes, method)
    logger.debug(f"built degree {degree} basis for {measure.name} from {rc.source}")
    return OrthoBasis(measure, rc, degree, gauss_rule(rc, nodes), method)


def evaluate(b, k, tau):
    """
    Evaluate phi_k by forward recurrence.

    :param b: OrthoBasis
    :param k: Degree, at most `b.degree`
    :param tau: Scalar or array of points
    :return: Values with the shape of `tau`
    """

    if not 0 <= k <= b.degree:
        raise BasisIndexError(f"degree {k} out of range for basis of degree {b.degree}")
    tau = np.asarray(tau, dtype=float)
    previous = np.zeros_like(tau)
    current = np.ones_like(tau)
    for j in range(k):
        following = (tau - b.rc.alpha[j]) * current - b.rc.beta[j] * previous
        previous, current = current, following
    if current.ndim == 0:
        return float(current)
    return current


def _compositions(total, parts):
    """tuples of `parts` non-negative integers summing to `total`, descending"""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def total_degree_index_set(m, p):
    """
    Multi-indices of total degree at most p, graded and lexicographic within
    each grade, starting with the zero tuple.

    :param m: Number of dimensions
    :param p: Maximum total degree
    :return: List of tuples
    """

    if m < 1 or p < 0:
        raise ParameterDomainError("`m` must be positive and `p` non-negative")
    index_set = [idx for grade in range(p + 1) for idx in _compositions(grade, m)]
    assert len(index_set) == comb(m + p, p, exact=True)
    return index_set


@dataclass(frozen=True, eq=False)
class MultiOrthoBasis:
    factors: Tuple[OrthoBasis, ...]
    index_set: Tuple[Tuple[int, ...], ...]
    total_degree: int

    @property
    def size(self):
        return len(self.index_set)

    @property
    def dimensions(self):
        return len(self.factors)

    @property
    def index_array(self):
        return np.array(self.index_set, dtype=int)

    @property
    def measure(self):
        return ProductMeasure(tuple(f.measure for f in self.factors))

    def position(self, idx):
        try:
            return self.index_set.index(tuple(idx))
        except ValueError:
            raise BasisIndexError(f"multi-index {tuple(idx)} not in the index set")

    def norms(self):
        """<Phi_k, Phi_k> as products of the univariate norms"""
        norms = np.ones(self.size)
        for i, factor in enumerate(self.factors):
            norms *= factor.norms()[self.index_array[:, i]]
        return norms

    def evaluate_all(self, tau):
        """
        Values of all basis polynomials.

        :param tau: Array of shape (count, m)
        :return: Array of shape (count, size)
        """

        tau = np.atleast_2d(np.asarray(tau, dtype=float))
        if tau.shape[1] != self.dimensions:
            raise ShapeError(
                f"expected points with {self.dimensions} coordinates, got {tau.shape[1]}"
            )
        values = np.ones((tau.shape[0], self.size))
        for i, factor in enumerate(self.factors):
            values *= factor.evaluate_all(tau[:, i])[:, self.index_array[:, i]]
        return values


def multi_ortho_basis(factors, p):
    """
    Total-degree product basis.

    :param factors: ProductMeasure or a sequence of OrthoBasis or Measure, one
        per germ
    :param p: Maximum total degree
    :return: MultiOrthoBasis
    """

    if isinstance(factors, ProductMeasure):
        factors = factors.factors
    factors = tuple(
        ortho_basis(f, p) if isinstance(f, Measure) else f for f in factors
    )
    if not factors:
        raise ParameterDomainError("`factors` must contain at least one basis")
    for factor in factors:
        if factor.degree < p:
            raise ParameterDomainError(
                f"factor of degree {factor.degree} cannot carry total degree {p}"
            )
    index_set = tuple(total_degree_index_set(len(factors), p))
    logger.debug(f"built {len(index_set)} element basis over {len(factors)} germs")
    return MultiOrthoBasis(factors, index_set, p)


def evaluate_multi(mb, idx, tau):
    """
    Evaluate the product polynomial Phi_idx.

    :param mb: MultiOrthoBasis
    :param idx: Multi-index from the index set
    :param tau: Point with one coordinate per germ
    :return: Product of the univariate values
    """

    if len(idx) != mb.dimensions or len(tau) != mb.dimensions:
        raise ShapeError(
            f"expected {mb.dimensions} indices and coordinates, got {len(idx)} and {len(tau)}"
        )
    mb.position(idx)
    value = 1.0
    for factor, k, t in zip(mb.factors, idx, tau):
        value *= evaluate(factor, k, t)
    return value
