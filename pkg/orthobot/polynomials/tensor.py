import logging
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from itertools import permutations
from string import ascii_letters

import numpy as np

from orthobot.exceptions import OrderError
from orthobot.exceptions import ShapeError
from orthobot.polynomials.quadrature import gauss_rule

logger = logging.getLogger(__name__)

ZERO_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Tensor:
    """
    Sparse, permutation-symmetric tensor of scalar products
    <phi_k1 ... phi_k(n-1), phi_kn>, keyed by the sorted index tuple.
    """

    order: int
    entries: dict
    basis_size: int

    def __getitem__(self, index):
        if len(index) != self.order:
            raise ShapeError(f"tensor of order {self.order} indexed with {index}")
        return self.entries.get(tuple(sorted(index)), 0.0)

    def __len__(self):
        return len(self.entries)

    def to_dense(self):
        dense = np.zeros((self.basis_size,) * self.order)
        for key, value in self.entries.items():
            for permuted in set(permutations(key)):
                dense[permuted] = value
        return dense


def _quad_size(n, degree):
    return math.ceil((n * degree + 1) / 2)


def univariate_tensor(b, n, quad_size=None):
    """
    Dense order-n tensor of a univariate basis by Gauss quadrature.

    Entries are symmetrized by their sorted index and thresholded, so that
    products over dimensions are formed from identical values.

    :param b: OrthoBasis
    :param n: Order
    :param quad_size: Gauss nodes, defaults to the exact size ceil((n d + 1) / 2)
    :return: Array of shape (size,) * n
    """

    count = quad_size or _quad_size(n, b.degree)
    rule = gauss_rule(b.coefficients(count), count)
    values = b.evaluate_all(rule.nodes)

    letters = ascii_letters[1 : n + 1]
    subscripts = "a," + ",".join(f"a{c}" for c in letters) + "->" + letters
    dense = np.einsum(subscripts, rule.weights, *([values] * n))

    grid = np.indices(dense.shape).reshape(n, -1).T
    canonical = np.sort(grid, axis=1)
    dense = dense[tuple(canonical.T)].reshape(dense.shape)

    scale = np.max(np.abs(dense))
    dense[np.abs(dense) <= ZERO_THRESHOLD * scale] = 0.0
    return dense


def compute_tensor(b, n, quad_size=None):
    """
    Tensorized scalar products of order n.

    Multivariate entries are products over dimensions of univariate entries.

    :param b: OrthoBasis or MultiOrthoBasis
    :param n: Order, at least 1
    :param quad_size: Gauss nodes per factor, defaults to the exact size
    :return: Tensor
    """

    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise OrderError(f"tensor order must be a positive integer, got {n}")

    logger.debug(f"computing order {n} tensor over {b.size} basis elements")
    univariate = [univariate_tensor(f, n, quad_size) for f in b.factors]
    combos = np.array(list(combinations_with_replacement(range(b.size), n)), dtype=int)
    index_array = b.index_array

    values = np.ones(len(combos))
    for i, dense in enumerate(univariate):
        values *= dense[tuple(index_array[combos[:, j], i] for j in range(n))]

    scale = np.max(np.abs(values))
    keep = np.abs(values) > ZERO_THRESHOLD * scale
    entries = {
        tuple(int(k) for k in key): float(v)
        for key, v in zip(combos[keep], values[keep])
    }
    logger.debug(
        f"order {n} tensor has {len(entries)} of {len(combos)} entries nonzero"
    )
    return Tensor(n, entries, b.size)


def galerkin_nu(t3, t2):
    """
    Normalized Galerkin coefficients nu(k1, k2, k3) = t3(k2, k3, k1) / t2(k1, k1);
    k1 is the projection index.

    :param t3: Tensor of order 3
    :param t2: Tensor of order 2
    :return: Dense array of shape (size, size, size)
    """

    if t3.order != 3 or t2.order != 2:
        raise ShapeError(f"expected orders 3 and 2, got {t3.order} and {t2.order}")
    if t3.basis_size != t2.basis_size:
        raise ShapeError(
            f"tensors over {t3.basis_size} and {t2.basis_size} basis elements"
        )
    norms = np.array([t2[k, k] for k in range(t2.basis_size)])
    return t3.to_dense() / norms[:, None, None]
