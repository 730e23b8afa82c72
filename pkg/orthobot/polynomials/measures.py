import logging
from dataclasses import dataclass
from dataclasses import field
from typing import Callable
from typing import Optional
from typing import Tuple

import numpy as np
from scipy import stats

from orthobot.exceptions import NormalizationError
from orthobot.exceptions import ParameterDomainError
from orthobot.exceptions import SpecError
from orthobot.exceptions import UnsupportedMeasureError
from orthobot.polynomials.quadrature import fejer1_rule

logger = logging.getLogger(__name__)

CANONICAL_KINDS = (
    "gaussian",
    "uniform01",
    "beta01",
    "gamma",
    "hermite",
    "legendre",
    "jacobi",
    "laguerre",
)

TRUNCATION_RATIO = 1e-14
MODE_GRID_POINTS = 1024
MODE_MIN_SCALE = -6
MODE_MAX_SCALE = 64
WALK_STEPS = 64
BISECTION_STEPS = 200
WEIGHT_TOLERANCE = 1e-12
MASS_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Measure:
    """
    Probability measure given by a density on a support interval.

    Canonical measures carry the matching scipy distribution, which supplies
    CDFs, inverse CDFs and analytic moments. Mixtures carry their components.
    """

    name: str
    density: Callable = field(repr=False)
    support: Tuple[float, float]
    is_symmetric: bool = False
    components: Tuple = ()
    kind: Optional[str] = None
    parameters: dict = field(default_factory=dict)
    distribution: Optional[object] = field(default=None, repr=False, compare=False)

    @property
    def is_canonical(self):
        return self.kind in CANONICAL_KINDS

    @property
    def midpoint(self):
        a, b = self.support
        if np.isfinite(a) and np.isfinite(b):
            return (a + b) / 2.0
        if self.is_symmetric:
            return 0.0
        return None

    def __call__(self, tau):
        return density_eval(self, tau)


@dataclass(frozen=True)
class ProductMeasure:
    """Independent germs, one univariate measure per dimension."""

    factors: Tuple[Measure, ...]

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ParameterDomainError("`factors` must contain at least one measure")

    def __len__(self):
        return len(self.factors)


def _safe_point(support):
    a, b = support
    if np.isfinite(a) and np.isfinite(b):
        return (a + b) / 2.0
    if np.isfinite(a):
        return a + 1.0
    if np.isfinite(b):
        return b - 1.0
    return 0.0


def density_eval(m, tau):
    """
    Evaluate the density, returning 0 outside the support.

    :param m: Measure
    :param tau: Scalar or array of points
    :return: Density values with the shape of `tau`
    """

    tau = np.asarray(tau, dtype=float)
    a, b = m.support
    inside = (tau >= a) & (tau <= b)
    with np.errstate(all="ignore"):
        raw = m.density(np.where(inside, tau, _safe_point(m.support)))
    values = np.nan_to_num(np.where(inside, raw, 0.0), nan=0.0, posinf=np.inf)
    if values.ndim == 0:
        return float(values)
    return values


def _positive(name, value):
    if not value > 0:
        raise ParameterDomainError(f"`{name}` must be positive, got {value}")


def _above_minus_one(name, value):
    if not value > -1:
        raise ParameterDomainError(f"`{name}` must be greater than -1, got {value}")


def _from_distribution(name, kind, distribution, support, symmetric, **parameters):
    return Measure(
        name=name,
        density=distribution.pdf,
        support=support,
        is_symmetric=symmetric,
        kind=kind,
        parameters=parameters,
        distribution=distribution,
    )


def canonical_measure(kind, alpha=None, beta=None):
    """
    Canonical measure of the Askey scheme.

    The classical weights (hermite, legendre, jacobi, laguerre) are delivered
    normalized to unit mass.

    :param kind: One of CANONICAL_KINDS
    :param alpha: First shape parameter for beta01, gamma and jacobi
    :param beta: Second shape parameter for beta01, gamma and jacobi
    :return: Measure
    """

    if kind == "gaussian":
        return _from_distribution(
            "gaussian", kind, stats.norm(), (-np.inf, np.inf), True
        )
    if kind == "uniform01":
        return _from_distribution(
            "uniform01", kind, stats.uniform(0.0, 1.0), (0.0, 1.0), True
        )
    if kind == "beta01":
        _positive("alpha", alpha)
        _positive("beta", beta)
        return _from_distribution(
            f"beta01({alpha}, {beta})",
            kind,
            stats.beta(alpha, beta),
            (0.0, 1.0),
            alpha == beta,
            alpha=alpha,
            beta=beta,
        )
    if kind == "gamma":
        # shape alpha, rate beta
        _positive("alpha", alpha)
        _positive("beta", beta)
        return _from_distribution(
            f"gamma({alpha}, {beta})",
            kind,
            stats.gamma(alpha, scale=1.0 / beta),
            (0.0, np.inf),
            False,
            alpha=alpha,
            beta=beta,
        )
    if kind == "hermite":
        return _from_distribution(
            "hermite", kind, stats.norm(scale=np.sqrt(0.5)), (-np.inf, np.inf), True
        )
    if kind == "legendre":
        return _from_distribution(
            "legendre", kind, stats.uniform(-1.0, 2.0), (-1.0, 1.0), True
        )
    if kind == "jacobi":
        # weight (1 - t)^alpha (1 + t)^beta on [-1, 1]
        _above_minus_one("alpha", alpha)
        _above_minus_one("beta", beta)
        return _from_distribution(
            f"jacobi({alpha}, {beta})",
            kind,
            stats.beta(beta + 1.0, alpha + 1.0, loc=-1.0, scale=2.0),
            (-1.0, 1.0),
            alpha == beta,
            alpha=alpha,
            beta=beta,
        )
    if kind == "laguerre":
        return _from_distribution(
            "laguerre", kind, stats.expon(), (0.0, np.inf), False
        )
    raise UnsupportedMeasureError(f"unknown canonical measure `{kind}`")


def _hull(supports):
    return (min(s[0] for s in supports), max(s[1] for s in supports))


def mixture(weights, components):
    """
    Mixture measure sum_i w_i rho_i.

    :param weights: Positive mixture weights summing to 1
    :param components: Component measures
    :return: Measure with components populated and support the convex hull
    """

    weights = [float(w) for w in weights]
    components = list(components)
    if len(weights) != len(components) or not components:
        raise ParameterDomainError(
            "`weights` and `components` must be non-empty and of equal length"
        )
    if any(w <= 0 for w in weights):
        raise ParameterDomainError("`weights` must be positive")
    if abs(sum(weights) - 1.0) > WEIGHT_TOLERANCE:
        raise NormalizationError(f"`weights` must sum to 1, got {sum(weights)}")

    supports = [c.support for c in components]
    bounded = all(np.isfinite(s[0]) and np.isfinite(s[1]) for s in supports)
    if not bounded and any(s != supports[0] for s in supports):
        raise ParameterDomainError(
            "`components` must all have bounded supports or identical supports"
        )
    support = _hull(supports)

    midpoint = (support[0] + support[1]) / 2.0 if bounded else 0.0
    symmetric = all(
        c.is_symmetric and c.midpoint is not None and np.isclose(c.midpoint, midpoint)
        for c in components
    )

    def density(tau):
        return sum(w * density_eval(c, tau) for w, c in zip(weights, components))

    name = " + ".join(f"{w}*{c.name}" for w, c in zip(weights, components))
    return Measure(
        name=name,
        density=density,
        support=support,
        is_symmetric=symmetric,
        components=tuple(zip(weights, components)),
        kind="mixture",
    )


def custom_measure(density, support, symmetric=False, normalize=False, name="custom"):
    """
    Measure from a user supplied vectorised density.

    :param density: Callable returning the density for an array of points
    :param support: Pair (a, b) with -inf <= a < b <= inf
    :param symmetric: Whether the density is symmetric about the support midpoint
    :param normalize: Divide the density by its numerically computed mass
    :param name: Display name
    :return: Measure
    """

    a, b = float(support[0]), float(support[1])
    if not a < b:
        raise ParameterDomainError("`support` must satisfy a < b")

    measure = Measure(
        name=name, density=density, support=(a, b), is_symmetric=symmetric
    )
    mass = total_mass(measure)
    if normalize:
        logger.debug(f"normalizing {name} by mass {mass}")

        def scaled(tau):
            return density(tau) / mass

        return Measure(
            name=name, density=scaled, support=(a, b), is_symmetric=symmetric
        )
    if abs(mass - 1.0) > MASS_TOLERANCE:
        raise NormalizationError(
            f"density of {name} integrates to {mass}, pass `normalize=True`"
        )
    return measure


def _log_density(m, tau):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(density_eval(m, tau))


def _locate_mode(m):
    # grids of doubling width around the finite end or 0, two scales past the
    # first one where the density shows up; singular points never win
    a, b = m.support
    start = a if np.isfinite(a) else (b if np.isfinite(b) else 0.0)
    grid = np.linspace(-1.0, 1.0, 2 * MODE_GRID_POINTS + 1)
    mode, peak, found = start, -np.inf, None
    for k in range(MODE_MIN_SCALE, MODE_MAX_SCALE):
        points = start + 2.0 ** k * grid
        points = points[(points >= a) & (points <= b)]
        values = _log_density(m, points)
        values = np.where(np.isfinite(values), values, -np.inf)
        i = int(np.argmax(values))
        if values[i] > peak:
            mode, peak = float(points[i]), float(values[i])
        if found is None and np.isfinite(peak):
            found = k
        if found is not None and k >= found + 2:
            break
    return mode, peak


def truncated_support(m, ratio=TRUNCATION_RATIO, moments=0):
    """
    Finite interval carrying the measure up to a negligible tail.

    Infinite ends are moved out from the mode by doubling until
    (1 + |tau - mode|)^moments times the density drops below `ratio` times
    the largest value seen so far. Pass moments = 2 N when the interval has
    to carry inner products of polynomials up to degree N.

    :param m: Measure
    :param ratio: Relative density threshold
    :param moments: Polynomial degree weighting the tails
    :return: Finite pair (a, b)
    """

    a, b = m.support
    if np.isfinite(a) and np.isfinite(b):
        return a, b

    mode, peak = _locate_mode(m)
    if not np.isfinite(peak):
        raise NormalizationError(f"density of {m.name} vanishes on every grid point")
    threshold = np.log(ratio)

    def walk(direction):
        top = peak
        distance = 1.0
        for _ in range(WALK_STEPS):
            tau = mode + direction * distance
            value = _log_density(m, tau) + moments * np.log1p(distance)
            if value < threshold + top:
                return tau
            if np.isfinite(value):
                top = max(top, value)
            distance *= 2.0
        raise NormalizationError(f"density of {m.name} does not decay")

    left = a if np.isfinite(a) else walk(-1.0)
    right = b if np.isfinite(b) else walk(1.0)
    logger.debug(f"truncated support of {m.name} to ({left}, {right})")
    return left, right


def total_mass(m, nodes=1000):
    """
    Numerical mass of the density over its truncated support.

    :param m: Measure
    :param nodes: Number of Fejér nodes
    :return: Integral of the density
    """

    rule = fejer1_rule(nodes, truncated_support(m))
    return float(np.dot(rule.weights, density_eval(m, rule.nodes)))


def mean(m):
    if m.distribution is not None:
        return float(m.distribution.mean())
    if m.components:
        return sum(w * mean(c) for w, c in m.components)
    rule = fejer1_rule(1000, truncated_support(m))
    weights = rule.weights * density_eval(m, rule.nodes)
    return float(np.dot(weights, rule.nodes) / np.sum(weights))


def cdf(m, tau, nodes=200):
    """
    Cumulative distribution function.

    :param m: Measure
    :param tau: Scalar or array of points
    :param nodes: Fejér nodes per point for densities without closed form
    :return: CDF values
    """

    tau = np.asarray(tau, dtype=float)
    if m.distribution is not None:
        return m.distribution.cdf(tau)
    if m.components:
        return sum(w * cdf(c, tau, nodes) for w, c in m.components)

    a, b = truncated_support(m)
    upper = np.clip(tau, a, b)
    rule = fejer1_rule(nodes)
    # one rule per evaluation point, mapped to [a, tau]
    half = (upper - a)[..., None] / 2.0
    points = a + half * (rule.nodes + 1.0)
    return np.sum(half * rule.weights * density_eval(m, points), axis=-1)


def inverse_cdf(m, u, tol=1e-12):
    """
    Quantile function; bisection on the CDF where no closed form exists.

    :param m: Measure
    :param u: Scalar or array of probabilities in [0, 1]
    :param tol: Bisection tolerance on tau, relative beyond |tau| = 1
    :return: Quantiles
    """

    u = np.asarray(u, dtype=float)
    if m.distribution is not None:
        return m.distribution.ppf(u)

    a, b = truncated_support(m)
    low = np.full(u.shape, a)
    high = np.full(u.shape, b)
    scale = max(1.0, abs(a), abs(b))
    for _ in range(BISECTION_STEPS):
        if np.max(high - low, initial=0.0) <= tol * scale:
            break
        middle = (low + high) / 2.0
        below = cdf(m, middle) < u
        low = np.where(below, middle, low)
        high = np.where(below, high, middle)
    return (low + high) / 2.0


def sample(m, count, rng):
    """
    Draw i.i.d. samples.

    Mixtures select a component first and then invert that component's CDF.

    :param m: Measure
    :param count: Number of samples
    :param rng: numpy Generator
    :return: Array of samples
    """

    if m.components:
        weights = np.array([w for w, _ in m.components])
        choice = rng.choice(len(weights), size=count, p=weights / weights.sum())
        draws = np.empty(count)
        for i, (_, component) in enumerate(m.components):
            selected = choice == i
            draws[selected] = sample(component, int(np.sum(selected)), rng)
        return draws
    return inverse_cdf(m, rng.random(count))


def measure_from_spec(spec):
    """
    Build a Measure from its JSON description.

    :param spec: Dictionary such as {"kind": "beta01", "alpha": 2.0, "beta": 4.5}
        or {"kind": "mixture", "weights": [...], "components": [...]}
    :return: Measure
    """

    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("measure spec must be an object with a `kind` field")
    kind = spec["kind"]
    if kind == "mixture":
        for key in ("weights", "components"):
            if key not in spec:
                raise SpecError(f"mixture spec is missing field `{key}`")
        return mixture(
            spec["weights"], [measure_from_spec(c) for c in spec["components"]]
        )
    if kind not in CANONICAL_KINDS:
        raise SpecError(f"unknown measure kind `{kind}`")
    return canonical_measure(kind, alpha=spec.get("alpha"), beta=spec.get("beta"))


def measure_to_spec(m):
    if m.components:
        return {
            "kind": "mixture",
            "weights": [w for w, _ in m.components],
            "components": [measure_to_spec(c) for _, c in m.components],
        }
    if not m.is_canonical:
        raise UnsupportedMeasureError(f"{m.name} has no JSON representation")
    return {"kind": m.kind, **m.parameters}
