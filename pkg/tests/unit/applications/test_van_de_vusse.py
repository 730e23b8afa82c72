import numpy as np
import pytest

from orthobot.applications.van_de_vusse import VanDeVusseConfig
from orthobot.applications.van_de_vusse import rk4_integrate
from orthobot.applications.van_de_vusse import vdv_config
from orthobot.applications.van_de_vusse import vdv_galerkin_rhs
from orthobot.applications.van_de_vusse import vdv_monte_carlo
from orthobot.applications.van_de_vusse import vdv_propagate
from orthobot.applications.van_de_vusse import vdv_realizations
from orthobot.applications.van_de_vusse import vdv_rhs
from orthobot.chaos import pce
from orthobot.exceptions import BlowUpError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import ShapeError
from orthobot.polynomials.basis import ortho_basis
from orthobot.polynomials.measures import canonical_measure

MOMENT_COLUMNS = [
    "t",
    "mean_cA",
    "std_cA",
    "lower_cA",
    "upper_cA",
    "mean_cB",
    "std_cB",
    "lower_cB",
    "upper_cB",
]


@pytest.fixture
def short_config():
    return vdv_config(degree=2, t_end=0.01, dt=1e-3)


def test_vdv_rhs():
    rhs = vdv_rhs(np.array([0.5, 0.1]), 50.0, 100.0, 10.0, 0.1)
    np.testing.assert_allclose(rhs, [-0.05 - 25.0 - 2.5, -0.01 + 25.0 - 10.0])

    states = np.array([[0.5, 0.4], [0.1, 0.2]])
    assert vdv_rhs(states, np.array([50.0, 40.0]), 100.0, 10.0, 0.1).shape == (2, 2)


def test_rk4_integrate():
    times, states = rk4_integrate(lambda y: -y, np.array([1.0]), 1.0, 0.01)

    assert len(times) == 101
    assert states.shape == (101, 1)
    assert states[-1, 0] == pytest.approx(np.exp(-1.0), rel=1e-9)


def test_rk4_integrate_records_every_nth_step():
    times, states = rk4_integrate(lambda y: -y, np.array([1.0]), 1.0, 0.01, 30)

    np.testing.assert_allclose(times, [0.0, 0.3, 0.6, 0.9, 1.0])
    assert len(states) == 5


def test_rk4_integrate_blow_up():
    with pytest.raises(BlowUpError) as e:
        rk4_integrate(lambda y: y * y, np.array([1.0]), 2.0, 0.01)
    assert 0.9 < e.value.time < 2.0


def test_degree_zero_propagation_is_deterministic():
    cfg = vdv_config(
        r1={"mean": 50.0, "std": 0.0},
        r2={"mean": 100.0, "std": 0.0},
        degree=0,
        t_end=0.01,
        dt=1e-4,
    )
    result = vdv_propagate(cfg)
    _, states = rk4_integrate(
        lambda y: vdv_rhs(y, 50.0, 100.0, 10.0, 0.1), np.array([0.5, 0.1]), 0.01, 1e-4
    )

    np.testing.assert_allclose(result.ca[:, 0], states[:, 0], rtol=1e-12)
    np.testing.assert_allclose(result.cb[:, 0], states[:, 1], rtol=1e-12)


def test_certain_rates_give_zero_spread():
    cfg = vdv_config(
        r1={"mean": 50.0, "std": 0.0}, r2=75.0, degree=2, t_end=0.01, dt=1e-3
    )
    moments = vdv_propagate(cfg).moments()
    np.testing.assert_allclose(moments["std_cA"], 0.0, atol=1e-14)
    np.testing.assert_allclose(moments["std_cB"], 0.0, atol=1e-14)


def test_zero_rate_is_not_replaced_by_default():
    cfg = vdv_config(r1=0.0, degree=2, t_end=0.01, dt=1e-3)

    np.testing.assert_array_equal(cfg.r1.coefficients, 0.0)
    assert pce.std(cfg.r2) == pytest.approx(10.0)
    moments = vdv_propagate(cfg).moments()
    np.testing.assert_allclose(moments["std_cA"], 0.0, atol=1e-14)


def test_vdv_propagate(short_config):
    result = vdv_propagate(short_config, record_every=5)
    moments = result.moments()

    assert list(moments.columns) == MOMENT_COLUMNS
    np.testing.assert_allclose(moments["t"], [0.0, 0.005, 0.01])
    assert result.ca.shape == (3, short_config.basis.size)
    assert moments["mean_cA"].iloc[0] == 0.5
    assert moments["std_cA"].iloc[0] == 0.0
    assert moments["std_cA"].iloc[-1] > 0.0
    assert np.all(moments["lower_cB"] <= moments["upper_cB"])
    assert moments["mean_cA"].iloc[-1] < 0.5


def test_galerkin_rhs_shape(short_config):
    nu = np.zeros((3, 3, 3))
    with pytest.raises(ShapeError):
        vdv_galerkin_rhs(np.zeros((2, short_config.basis.size)), short_config, nu)


def test_vdv_realizations(short_config):
    times, ca, cb = vdv_realizations(short_config, 50, 1234, record_every=5)

    assert len(times) == 3
    assert ca.shape == (3, 50)
    assert cb.shape == (3, 50)
    np.testing.assert_array_equal(ca[0], 0.5)

    _, again, _ = vdv_realizations(short_config, 50, 1234, record_every=5)
    np.testing.assert_array_equal(ca, again)


def test_vdv_monte_carlo_matches_propagation(short_config):
    moments = vdv_propagate(short_config).moments()
    mc = vdv_monte_carlo(short_config, 4000, 1234)

    assert list(mc.columns) == ["t", "mean_cA", "std_cA", "mean_cB", "std_cB"]
    np.testing.assert_allclose(mc["mean_cA"], moments["mean_cA"], rtol=0.01)
    np.testing.assert_allclose(mc["mean_cB"], moments["mean_cB"], rtol=0.01)
    assert mc["std_cA"].iloc[-1] == pytest.approx(moments["std_cA"].iloc[-1], rel=0.1)


def test_config_validation(short_config):
    cfg = short_config
    r1, r2, ca0, cb0 = cfg.r1, cfg.r2, cfg.ca0, cfg.cb0

    with pytest.raises(ParameterDomainError):
        VanDeVusseConfig(r1, r2, 10.0, 0.1, ca0, cb0, dt=0.0)

    with pytest.raises(ParameterDomainError):
        VanDeVusseConfig(r1, r2, 10.0, 0.1, ca0, cb0, t_end=-1.0)

    other = ortho_basis(canonical_measure("uniform01"), 2)
    with pytest.raises(ShapeError):
        VanDeVusseConfig(r1, r2, 10.0, 0.1, pce.deterministic(other, 0.5), cb0)

    with pytest.raises(ParameterDomainError):
        vdv_config(germs=[{"kind": "uniform01"}])

    assert short_config.steps == 10
    assert short_config.basis.size == 6
