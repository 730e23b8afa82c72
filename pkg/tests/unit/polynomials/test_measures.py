import numpy as np
import pytest
from scipy import stats

from orthobot.exceptions import NormalizationError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import SpecError
from orthobot.exceptions import UnsupportedMeasureError
from orthobot.polynomials.measures import CANONICAL_KINDS
from orthobot.polynomials.measures import canonical_measure
from orthobot.polynomials.measures import cdf
from orthobot.polynomials.measures import custom_measure
from orthobot.polynomials.measures import density_eval
from orthobot.polynomials.measures import inverse_cdf
from orthobot.polynomials.measures import mean
from orthobot.polynomials.measures import measure_from_spec
from orthobot.polynomials.measures import measure_to_spec
from orthobot.polynomials.measures import mixture
from orthobot.polynomials.measures import sample
from orthobot.polynomials.measures import total_mass
from orthobot.polynomials.measures import truncated_support

SHAPES = {"beta01": (2.0, 4.5), "gamma": (2.0, 1.0), "jacobi": (0.5, 1.5)}


@pytest.fixture
def beta_mixture():
    return mixture(
        [0.3, 0.7],
        [canonical_measure("beta01", 2.0, 4.5), canonical_measure("beta01", 4.0, 1.5)],
    )


def parabola(t):
    return 0.75 * (1.0 - t ** 2)


@pytest.mark.parametrize("kind", CANONICAL_KINDS)
def test_canonical_measure_is_normalized(kind):
    m = canonical_measure(kind, *SHAPES.get(kind, (None, None)))
    assert m.is_canonical
    assert total_mass(m) == pytest.approx(1.0, abs=1e-6)
    assert mean(m) == pytest.approx(m.distribution.mean())


def test_beta_mass_with_endpoint_singularity():
    m = canonical_measure("beta01", 4.0, 1.5)
    assert total_mass(m, nodes=2000) == pytest.approx(1.0, abs=1e-6)


def test_canonical_measure_parameters():
    with pytest.raises(ParameterDomainError) as e:
        canonical_measure("beta01", 0.0, 1.0)
    assert "`alpha` must be positive" in str(e.value)

    with pytest.raises(ParameterDomainError) as e:
        canonical_measure("gamma", 1.0, -1.0)
    assert "`beta` must be positive" in str(e.value)

    with pytest.raises(ParameterDomainError) as e:
        canonical_measure("jacobi", -1.0, 0.0)
    assert "`alpha` must be greater than -1" in str(e.value)

    with pytest.raises(UnsupportedMeasureError):
        canonical_measure("cauchy")


def test_symmetry_flags():
    assert canonical_measure("gaussian").is_symmetric
    assert canonical_measure("beta01", 2.0, 2.0).is_symmetric
    assert not canonical_measure("beta01", 2.0, 4.5).is_symmetric
    assert canonical_measure("uniform01").midpoint == 0.5


def test_density_eval():
    m = canonical_measure("uniform01")
    assert density_eval(m, 0.5) == 1.0
    assert isinstance(density_eval(m, 0.5), float)
    assert density_eval(m, np.array([-1.0, 0.5, 2.0])).tolist() == [0.0, 1.0, 0.0]

    singular = canonical_measure("beta01", 0.5, 0.5)
    assert density_eval(singular, np.array([-0.5, 1.5])).tolist() == [0.0, 0.0]


def test_mixture(beta_mixture):
    assert beta_mixture.support == (0.0, 1.0)
    assert beta_mixture.kind == "mixture"
    assert not beta_mixture.is_symmetric
    assert len(beta_mixture.components) == 2
    assert mean(beta_mixture) == pytest.approx(0.3 * 2.0 / 6.5 + 0.7 * 4.0 / 5.5)
    assert total_mass(beta_mixture, nodes=2000) == pytest.approx(1.0, abs=1e-6)

    symmetric = mixture(
        [0.5, 0.5],
        [canonical_measure("uniform01"), canonical_measure("beta01", 2.0, 2.0)],
    )
    assert symmetric.is_symmetric


def test_mixture_validation():
    components = [canonical_measure("uniform01"), canonical_measure("uniform01")]

    with pytest.raises(NormalizationError) as e:
        mixture([0.5, 0.6], components)
    assert "`weights` must sum to 1" in str(e.value)

    with pytest.raises(ParameterDomainError):
        mixture([1.0], components)

    with pytest.raises(ParameterDomainError) as e:
        mixture([1.5, -0.5], components)
    assert "`weights` must be positive" in str(e.value)

    with pytest.raises(ParameterDomainError) as e:
        mixture(
            [0.5, 0.5],
            [canonical_measure("gaussian"), canonical_measure("gamma", 2.0, 1.0)],
        )
    assert "bounded supports or identical supports" in str(e.value)


def test_custom_measure():
    m = custom_measure(parabola, (-1.0, 1.0), symmetric=True)
    assert m.kind is None
    assert not m.is_canonical

    with pytest.raises(NormalizationError) as e:
        custom_measure(lambda t: 3.0 * parabola(t), (-1.0, 1.0))
    assert "pass `normalize=True`" in str(e.value)

    scaled = custom_measure(lambda t: 3.0 * parabola(t), (-1.0, 1.0), normalize=True)
    assert total_mass(scaled) == pytest.approx(1.0, abs=1e-12)

    with pytest.raises(ParameterDomainError):
        custom_measure(parabola, (1.0, -1.0))


def test_truncated_support():
    m = canonical_measure("gaussian")
    a, b = truncated_support(m)
    assert np.isfinite(a) and np.isfinite(b)
    assert density_eval(m, b) < 1e-14 * density_eval(m, 0.0)

    gamma = canonical_measure("gamma", 2.0, 1.0)
    a, b = truncated_support(gamma)
    assert a == 0.0
    assert 30.0 < b < 200.0

    assert truncated_support(canonical_measure("uniform01")) == (0.0, 1.0)


def test_truncated_support_singular_density():
    m = canonical_measure("gamma", 0.5, 1.0)
    assert density_eval(m, 0.0) == np.inf

    a, b = truncated_support(m)

    assert a == 0.0
    assert m.distribution.sf(b) < 1e-12
    assert total_mass(m) == pytest.approx(1.0, abs=1e-2)


def test_truncated_support_weights_tails():
    m = canonical_measure("gamma", 2.0, 1.0)
    _, b = truncated_support(m)
    _, wide = truncated_support(m, moments=22)

    def log_tail(t):
        return 22.0 * np.log(t) + m.distribution.logpdf(t)

    assert wide > b
    assert log_tail(wide) < np.log(1e-14) + log_tail(23.0)


def test_custom_measure_far_from_origin():
    m = custom_measure(stats.norm(5000.0, 1.0).pdf, (-np.inf, np.inf))

    a, b = truncated_support(m)

    assert a < 4995.0 < 5005.0 < b
    assert b - a < 100.0
    assert mean(m) == pytest.approx(5000.0, abs=1e-8)


def test_cdf_and_inverse(beta_mixture):
    assert cdf(beta_mixture, 1.0) == pytest.approx(1.0)
    assert cdf(beta_mixture, 0.0) == pytest.approx(0.0)

    m = custom_measure(parabola, (-1.0, 1.0), symmetric=True)
    assert cdf(m, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert inverse_cdf(m, cdf(m, 0.3)) == pytest.approx(0.3, abs=1e-9)

    u = np.array([0.1, 0.5, 0.9])
    gaussian = canonical_measure("gaussian")
    np.testing.assert_allclose(cdf(gaussian, inverse_cdf(gaussian, u)), u)


def test_inverse_cdf_far_from_origin():
    m = custom_measure(np.ones_like, (1e4, 1e4 + 1.0))

    quantiles = inverse_cdf(m, np.array([0.25, 0.5]))

    np.testing.assert_allclose(quantiles, [1e4 + 0.25, 1e4 + 0.5], atol=1e-7)
    draws = sample(m, 10, np.random.default_rng(0))
    assert np.all((draws >= 1e4) & (draws <= 1e4 + 1.0))


def test_sample(beta_mixture):
    rng = np.random.default_rng(1234)
    draws = sample(beta_mixture, 20000, rng)

    assert draws.shape == (20000,)
    assert np.all((draws > 0.0) & (draws < 1.0))
    standard_error = draws.std() / np.sqrt(len(draws))
    assert abs(draws.mean() - mean(beta_mixture)) < 5 * standard_error


def test_measure_spec_round_trip(beta_mixture):
    spec = measure_to_spec(beta_mixture)
    assert spec == {
        "kind": "mixture",
        "weights": [0.3, 0.7],
        "components": [
            {"kind": "beta01", "alpha": 2.0, "beta": 4.5},
            {"kind": "beta01", "alpha": 4.0, "beta": 1.5},
        ],
    }
    assert measure_to_spec(measure_from_spec(spec)) == spec

    with pytest.raises(SpecError) as e:
        measure_from_spec({"alpha": 1.0})
    assert "`kind`" in str(e.value)

    with pytest.raises(SpecError) as e:
        measure_from_spec({"kind": "mixture", "weights": [1.0]})
    assert "missing field `components`" in str(e.value)

    with pytest.raises(UnsupportedMeasureError):
        measure_to_spec(custom_measure(parabola, (-1.0, 1.0)))
