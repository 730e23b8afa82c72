import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from orthobot.chaos import pce
from orthobot.chaos.pce import PceVector
from orthobot.exceptions import BlowUpError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import ShapeError
from orthobot.polynomials.basis import multi_ortho_basis
from orthobot.polynomials.measures import ProductMeasure
from orthobot.polynomials.measures import measure_from_spec
from orthobot.polynomials.tensor import compute_tensor
from orthobot.polynomials.tensor import galerkin_nu

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VanDeVusseConfig:
    """
    Van de Vusse reaction with uncertain rates r1, r2 and initial
    concentrations, integrated by fixed-step RK4.
    """

    r1: PceVector
    r2: PceVector
    r3: float
    u: float
    ca0: PceVector
    cb0: PceVector
    t_end: float = 0.1
    dt: float = 1e-4

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterDomainError(f"`dt` must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ParameterDomainError(f"`t_end` must be positive, got {self.t_end}")
        basis = self.r1.basis
        for x in (self.r2, self.ca0, self.cb0):
            if x.basis is not basis:
                raise ShapeError("`r1`, `r2`, `ca0` and `cb0` must share one basis")

    @property
    def basis(self):
        return self.r1.basis

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))


def vdv_rhs(state, r1, r2, r3, u):
    """
    Right-hand side of the deterministic reaction for one or many samples.

    :param state: Array of shape (2, ...) with concentrations cA and cB
    :return: Array of the same shape
    """

    ca, cb = state
    return np.stack([-ca * u - r1 * ca - r3 * ca * ca, -cb * u + r1 * ca - r2 * cb])


def vdv_galerkin_rhs(state, cfg, nu):
    """
    Right-hand side of the Galerkin-projected reaction for the coefficients
    of cA and cB.

    :param state: Array of shape (2, size) with coefficients of cA and cB
    :param cfg: VanDeVusseConfig
    :param nu: Dense Galerkin coefficients
    :return: Array of shape (2, size)
    """

    ca, cb = state
    if len(ca) != nu.shape[0] or len(cb) != nu.shape[0]:
        raise ShapeError(
            f"state of length {len(ca)} for Galerkin coefficients of size {nu.shape[0]}"
        )
    r1, r2 = cfg.r1.coefficients, cfg.r2.coefficients
    r1_ca = pce.galerkin_product(nu, r1, ca)
    dca = -ca * cfg.u - r1_ca - cfg.r3 * pce.galerkin_product(nu, ca, ca)
    dcb = -cb * cfg.u + r1_ca - pce.galerkin_product(nu, r2, cb)
    return np.stack([dca, dcb])


def rk4_integrate(rhs, y0, t_end, dt, record_every=1):
    """
    Classical fixed-step Runge-Kutta integration.

    :param rhs: Callable of the state
    :param y0: Initial state array
    :param t_end: Final time
    :param dt: Step size
    :param record_every: Keep every n-th step
    :return: Tuple of recorded times and states
    """

    steps = int(round(t_end / dt))
    y = np.array(y0, dtype=float)
    times = [0.0]
    states = [y.copy()]
    logger.debug(f"integrating {steps} RK4 steps of size {dt}")
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, steps + 1):
            k1 = rhs(y)
            k2 = rhs(y + dt / 2.0 * k1)
            k3 = rhs(y + dt / 2.0 * k2)
            k4 = rhs(y + dt * k3)
            y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise BlowUpError(
                    f"integration blew up at t = {step * dt}", time=step * dt
                )
            if step % record_every == 0 or step == steps:
                times.append(step * dt)
                states.append(y.copy())
    return np.array(times), np.array(states)


@dataclass(frozen=True, eq=False)
class Propagation:
    times: np.ndarray
    ca: np.ndarray
    cb: np.ndarray
    basis: object

    def moments(self):
        """
        Means, standard deviations and mean +/- 3 std envelopes over time.

        :return: DataFrame with one row per recorded time
        """

        frame = pd.DataFrame({"t": self.times})
        for name, coefficients in (("cA", self.ca), ("cB", self.cb)):
            mean = coefficients[:, 0]
            std = pce.std_trajectory(coefficients, self.basis)
            frame[f"mean_{name}"] = mean
            frame[f"std_{name}"] = std
            frame[f"lower_{name}"] = mean - 3.0 * std
            frame[f"upper_{name}"] = mean + 3.0 * std
        return frame


def vdv_propagate(cfg, record_every=1):
    """
    Integrate the Galerkin-projected reaction.

    :param cfg: VanDeVusseConfig
    :param record_every: Keep every n-th step
    :return: Propagation with coefficient trajectories of cA and cB
    """

    basis = cfg.basis
    logger.info(f"propagating {basis.size} PCE coefficients to t = {cfg.t_end}")
    nu = galerkin_nu(compute_tensor(basis, 3), compute_tensor(basis, 2))
    y0 = np.stack([cfg.ca0.coefficients, cfg.cb0.coefficients])
    times, states = rk4_integrate(
        lambda y: vdv_galerkin_rhs(y, cfg, nu), y0, cfg.t_end, cfg.dt, record_every
    )
    return Propagation(times, states[:, 0], states[:, 1], basis)


def vdv_realizations(cfg, count, seed, record_every=1):
    """
    Integrate sampled realizations of the reaction with the same RK4 steps.

    :param cfg: VanDeVusseConfig
    :param count: Number of realizations
    :param seed: Seed of the germ generator
    :param record_every: Keep every n-th step
    :return: Tuple of times and arrays of shape (recorded, count) for cA and cB
    """

    germs = pce.sample_germ(cfg.basis, count, seed)
    r1 = pce.sample(cfg.r1, germs)
    r2 = pce.sample(cfg.r2, germs)
    y0 = np.stack([pce.sample(cfg.ca0, germs), pce.sample(cfg.cb0, germs)])
    times, states = rk4_integrate(
        lambda y: vdv_rhs(y, r1, r2, cfg.r3, cfg.u), y0, cfg.t_end, cfg.dt, record_every
    )
    return times, states[:, 0], states[:, 1]


def vdv_monte_carlo(cfg, count, seed, record_every=1):
    """
    Monte Carlo moments of the reaction.

    :param cfg: VanDeVusseConfig
    :param count: Number of realizations
    :param seed: Seed of the germ generator
    :param record_every: Keep every n-th step
    :return: DataFrame with t and sample mean and std of cA and cB
    """

    logger.info(f"integrating {count} Monte Carlo realizations")
    times, ca, cb = vdv_realizations(cfg, count, seed, record_every)
    return pd.DataFrame(
        {
            "t": times,
            "mean_cA": ca.mean(axis=1),
            "std_cA": ca.std(axis=1, ddof=1),
            "mean_cB": cb.mean(axis=1),
            "std_cB": cb.std(axis=1, ddof=1),
        }
    )


def _input(basis, i, value):
    if isinstance(value, dict):
        return pce.matched_input(basis, i, value["mean"], value.get("std", 0.0))
    return pce.deterministic(basis, value)


def vdv_config(
    r1=None,
    r2=None,
    r3=10.0,
    u=0.1,
    ca0=0.5,
    cb0=0.1,
    germs=None,
    degree=4,
    t_end=0.1,
    dt=1e-4,
):
    """
    Build a VanDeVusseConfig on a total-degree basis with one germ per
    uncertain rate.

    Rates are given as {"mean": .., "std": ..}, defaults are the uniform
    rates with 10 % standard deviation around 50 and 100. Initial
    concentrations are deterministic.

    :param germs: Measure specs of the two germs, uniform01 by default
    :param degree: Total degree of the basis
    :return: VanDeVusseConfig
    """

    if r1 is None:
        r1 = {"mean": 50.0, "std": 5.0}
    if r2 is None:
        r2 = {"mean": 100.0, "std": 10.0}
    if germs is None:
        germs = [{"kind": "uniform01"}, {"kind": "uniform01"}]
    if len(germs) != 2:
        raise ParameterDomainError("`germs` must name one measure per uncertain rate")
    product = ProductMeasure(tuple(measure_from_spec(g) for g in germs))
    basis = multi_ortho_basis(product, degree)
    return VanDeVusseConfig(
        r1=_input(basis, 0, r1),
        r2=_input(basis, 1, r2),
        r3=r3,
        u=u,
        ca0=pce.deterministic(basis, ca0),
        cb0=pce.deterministic(basis, cb0),
        t_end=t_end,
        dt=dt,
    )
