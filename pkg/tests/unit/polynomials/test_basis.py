import numpy as np
import pytest
from scipy.special import comb

from orthobot.exceptions import BasisIndexError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import ShapeError
from orthobot.polynomials.basis import evaluate
from orthobot.polynomials.basis import evaluate_multi
from orthobot.polynomials.basis import multi_ortho_basis
from orthobot.polynomials.basis import ortho_basis
from orthobot.polynomials.basis import total_degree_index_set
from orthobot.polynomials.measures import ProductMeasure
from orthobot.polynomials.measures import canonical_measure
from orthobot.polynomials.measures import mixture
from orthobot.polynomials.quadrature import integrate


@pytest.fixture
def uniform_basis():
    return ortho_basis(canonical_measure("uniform01"), 4)


@pytest.fixture
def gaussian_basis():
    return ortho_basis(canonical_measure("gaussian"), 4)


def test_ortho_basis(uniform_basis):
    assert uniform_basis.size == 5
    assert len(uniform_basis.rc) == 10
    assert len(uniform_basis.quad) == 10
    assert uniform_basis.index_set == [(0,), (1,), (2,), (3,), (4,)]
    assert uniform_basis.index_array.shape == (5, 1)
    assert uniform_basis.factors == (uniform_basis,)
    np.testing.assert_allclose(
        uniform_basis.norms(), np.cumprod(uniform_basis.rc.beta[:5])
    )

    with pytest.raises(ParameterDomainError):
        ortho_basis(canonical_measure("uniform01"), -1)


def test_evaluate(gaussian_basis):
    # monic Hermite polynomials
    tau = np.array([-1.5, 0.0, 2.0])
    np.testing.assert_allclose(evaluate(gaussian_basis, 2, tau), tau ** 2 - 1.0)
    np.testing.assert_allclose(
        evaluate(gaussian_basis, 4, tau), tau ** 4 - 6.0 * tau ** 2 + 3.0
    )
    assert evaluate(gaussian_basis, 0, 0.3) == 1.0
    assert evaluate(gaussian_basis, 3, 1.0) == pytest.approx(-2.0)

    with pytest.raises(BasisIndexError):
        evaluate(gaussian_basis, 5, 0.0)


def test_evaluate_all(uniform_basis):
    tau = np.linspace(0.0, 1.0, 7)
    values = uniform_basis.evaluate_all(tau)

    assert values.shape == (7, 5)
    for k in range(5):
        np.testing.assert_allclose(values[:, k], evaluate(uniform_basis, k, tau))
    np.testing.assert_allclose(uniform_basis.evaluate_all(tau[:, None]), values)

    with pytest.raises(ShapeError):
        uniform_basis.evaluate_all(np.zeros((3, 2)))


def test_orthogonality_on_companion_rule():
    measure = mixture(
        [0.3, 0.7],
        [canonical_measure("beta01", 2.0, 4.5), canonical_measure("beta01", 4.0, 1.5)],
    )
    b = ortho_basis(measure, 4)
    values = b.evaluate_all(b.quad.nodes)
    gram = (values * b.quad.weights[:, None]).T @ values

    np.testing.assert_allclose(np.diag(gram), b.norms(), rtol=1e-10)
    normalized = gram / np.sqrt(np.outer(b.norms(), b.norms()))
    np.testing.assert_allclose(normalized, np.eye(5), atol=1e-10)


def test_coefficients_extend(uniform_basis):
    assert uniform_basis.coefficients(4) is uniform_basis.rc
    extended = uniform_basis.coefficients(14)
    assert len(extended) == 14
    np.testing.assert_allclose(extended.beta[:10], uniform_basis.rc.beta)


def test_total_degree_index_set():
    assert total_degree_index_set(2, 2) == [
        (0, 0),
        (1, 0),
        (0, 1),
        (2, 0),
        (1, 1),
        (0, 2),
    ]
    assert total_degree_index_set(1, 3) == [(0,), (1,), (2,), (3,)]

    index_set = total_degree_index_set(3, 4)
    assert len(index_set) == comb(7, 4, exact=True) == 35
    assert len(set(index_set)) == 35
    grades = [sum(idx) for idx in index_set]
    assert grades == sorted(grades)

    with pytest.raises(ParameterDomainError):
        total_degree_index_set(0, 2)


def test_multi_ortho_basis(uniform_basis, gaussian_basis):
    mb = multi_ortho_basis([uniform_basis, gaussian_basis], 4)

    assert mb.size == 15
    assert mb.dimensions == 2
    assert mb.index_set[0] == (0, 0)
    assert mb.position((1, 2)) == mb.index_set.index((1, 2))

    norms = mb.norms()
    k = mb.position((2, 1))
    expected = uniform_basis.norms()[2] * gaussian_basis.norms()[1]
    assert norms[k] == pytest.approx(expected)

    with pytest.raises(BasisIndexError):
        mb.position((5, 0))


def test_multi_ortho_basis_from_measures():
    mb = multi_ortho_basis(
        [canonical_measure("uniform01"), canonical_measure("gaussian")], 3
    )
    assert mb.size == 10
    assert all(f.degree == 3 for f in mb.factors)

    with pytest.raises(ParameterDomainError) as e:
        multi_ortho_basis([mb.factors[0]], 4)
    assert "cannot carry total degree 4" in str(e.value)

    with pytest.raises(ParameterDomainError):
        multi_ortho_basis([], 2)


def test_multivariate_evaluation(uniform_basis, gaussian_basis):
    mb = multi_ortho_basis([uniform_basis, gaussian_basis], 4)
    tau = np.array([[0.2, -1.0], [0.9, 0.5]])

    values = mb.evaluate_all(tau)

    assert values.shape == (2, 15)
    k = mb.position((1, 2))
    expected = evaluate_multi(mb, (1, 2), tau[1])
    assert values[1, k] == pytest.approx(expected)
    assert expected == pytest.approx((0.9 - 0.5) * (0.25 - 1.0))

    with pytest.raises(ShapeError):
        mb.evaluate_all(np.zeros((2, 3)))

    with pytest.raises(ShapeError):
        evaluate_multi(mb, (1, 2, 0), tau[0])

    with pytest.raises(BasisIndexError):
        evaluate_multi(mb, (4, 1), tau[0])


def test_multivariate_orthogonality(uniform_basis, gaussian_basis):
    mb = multi_ortho_basis([uniform_basis, gaussian_basis], 3)
    nodes = np.array(
        [[a, b] for a in uniform_basis.quad.nodes for b in gaussian_basis.quad.nodes]
    )
    weights = np.outer(uniform_basis.quad.weights, gaussian_basis.quad.weights).ravel()

    values = mb.evaluate_all(nodes)
    gram = (values * weights[:, None]).T @ values

    np.testing.assert_allclose(np.diag(gram), mb.norms(), rtol=1e-10)
    normalized = gram / np.sqrt(np.outer(mb.norms(), mb.norms()))
    np.testing.assert_allclose(normalized, np.eye(mb.size), atol=1e-10)
    assert integrate(uniform_basis.quad, np.ones_like) == pytest.approx(1.0)


def test_multi_ortho_basis_from_product_measure():
    product = ProductMeasure(
        (canonical_measure("uniform01"), canonical_measure("gaussian"))
    )
    mb = multi_ortho_basis(product, 2)

    assert mb.size == 6
    assert len(mb.measure) == 2
    assert [f.name for f in mb.measure.factors] == [f.name for f in product.factors]

    with pytest.raises(ParameterDomainError):
        ProductMeasure(())
