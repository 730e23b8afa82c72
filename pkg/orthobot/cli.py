import logging
from dataclasses import dataclass
from dataclasses import field
from typing import Optional
from typing import Tuple

import click
import numpy as np
import pandas as pd

from orthobot.applications.benchmark import BenchmarkConfig
from orthobot.applications.benchmark import run_benchmark
from orthobot.applications.van_de_vusse import vdv_config
from orthobot.applications.van_de_vusse import vdv_monte_carlo
from orthobot.applications.van_de_vusse import vdv_propagate
from orthobot.applications.van_de_vusse import vdv_realizations
from orthobot.data.utils import apply_overrides
from orthobot.data.utils import get_dict_keys
from orthobot.data.utils import load_spec
from orthobot.data.utils import output_path
from orthobot.data.utils import write_csv
from orthobot.data.utils import write_json
from orthobot.exceptions import InvalidEndpointError
from orthobot.exceptions import OrthobotError
from orthobot.exceptions import SpecError
from orthobot.optimiser.optimal_control import ocp_config
from orthobot.optimiser.optimal_control import ocp_monte_carlo
from orthobot.optimiser.optimal_control import ocp_solve
from orthobot.polynomials.basis import multi_ortho_basis
from orthobot.polynomials.basis import ortho_basis
from orthobot.polynomials.measures import mean
from orthobot.polynomials.measures import measure_from_spec
from orthobot.polynomials.quadrature import LEBESGUE_RULES
from orthobot.polynomials.quadrature import gauss_lobatto_rule
from orthobot.polynomials.quadrature import gauss_radau_rule
from orthobot.polynomials.quadrature import gauss_rule
from orthobot.polynomials.recurrence import DiscretizationConfig
from orthobot.polynomials.recurrence import discretize
from orthobot.polynomials.recurrence import expand_monic
from orthobot.polynomials.recurrence import recurrence_coefficients
from orthobot.polynomials.tensor import compute_tensor

log_fmt = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
root = logging.getLogger()
logger = logging.getLogger(__name__)

DEFAULT_SEED = 1234
SUBCOMMANDS = ("basis", "quad", "tensor", "propagate", "ocp", "bench")


@dataclass(frozen=True)
class RunConfig:
    """
    One CLI invocation.

    :param subcommand: One of SUBCOMMANDS
    :param spec: Path of the JSON spec, None for defaults
    :param out: Prefix of the written artifacts
    :param seed: Seed of every random generator
    :param overrides: `key=value` strings applied to the spec
    """

    subcommand: str
    spec: Optional[str] = None
    out: str = "orthobot"
    seed: int = DEFAULT_SEED
    overrides: Tuple[str, ...] = field(default_factory=tuple)


def _measure(spec):
    if "measure" not in spec:
        raise SpecError("spec is missing field `measure`")
    return measure_from_spec(spec["measure"])


def run_basis(spec, cfg):
    spec = get_dict_keys(spec, ["measure", "n", "method"])
    measure = _measure(spec)
    n = spec.get("n", 5)
    rc = recurrence_coefficients(measure, n, spec.get("method", "auto"))
    monic = [expand_monic(rc, k) for k in range(n)]
    write_json(
        {
            "source": rc.source,
            "mean": mean(measure),
            "alpha": rc.alpha,
            "beta": rc.beta,
            "monic": [m.tolist() for m in monic],
        },
        output_path(cfg.out, "_basis.json"),
    )
    frame = pd.DataFrame(
        [np.pad(m, (0, n - len(m)), constant_values=np.nan) for m in monic],
        columns=[f"a{i}" for i in range(n)],
    )
    frame.insert(0, "degree", range(n))
    return [
        output_path(cfg.out, "_basis.json"),
        write_csv(frame, output_path(cfg.out, "_monic.csv")),
    ]


def _endpoint(measure, endpoint):
    if endpoint is not None:
        return endpoint
    for candidate in measure.support:
        if np.isfinite(candidate):
            return candidate
    raise InvalidEndpointError(f"{measure.name} has no finite support endpoint")


RULE_NAMES = {
    "gauss": "gauss",
    "radau": "gauss_radau",
    "lobatto": "gauss_lobatto",
    "fejer1": "fejer1",
    "fejer2": "fejer2",
    "cc": "clenshaw_curtis",
}


def quadrature_rule(measure, rule, n, endpoint=None, method="auto"):
    """
    Quadrature rule against a measure.

    Gauss kinds come from the recurrence coefficients; Fejér and
    Clenshaw-Curtis rules are density-weighted discretizations on the
    truncated support.

    :param measure: Measure
    :param rule: One of RULE_NAMES or the rule kind it stands for
    :param n: Number of nodes
    :param endpoint: Fixed Radau node, defaults to the finite support endpoint
    :param method: Recurrence method for the Gauss kinds
    :return: QuadratureRule
    """

    rule = RULE_NAMES.get(rule, rule)
    if rule in LEBESGUE_RULES:
        return discretize(measure, DiscretizationConfig(rule, n), n)
    rc = recurrence_coefficients(measure, n, method)
    if rule == "gauss":
        return gauss_rule(rc, n)
    if rule == "gauss_radau":
        return gauss_radau_rule(rc, n, _endpoint(measure, endpoint))
    if rule == "gauss_lobatto":
        left, right = measure.support
        if not (np.isfinite(left) and np.isfinite(right)):
            raise InvalidEndpointError(f"{measure.name} has an unbounded support")
        return gauss_lobatto_rule(rc, n, left, right)
    raise SpecError(f"unknown quadrature rule `{rule}`")


def run_quad(spec, cfg):
    spec = get_dict_keys(spec, ["measure", "rule", "n", "endpoint", "method"])
    rule = quadrature_rule(
        _measure(spec),
        spec.get("rule", "gauss"),
        spec.get("n", 5),
        spec.get("endpoint"),
        spec.get("method", "auto"),
    )
    frame = pd.DataFrame({"node": rule.nodes, "weight": rule.weights})
    return [write_csv(frame, output_path(cfg.out, "_quad.csv"))]


def run_tensor(spec, cfg):
    spec = get_dict_keys(spec, ["measures", "degree", "order"])
    if "measures" not in spec:
        raise SpecError("spec is missing field `measures`")
    measures = [measure_from_spec(m) for m in spec["measures"]]
    degree = spec.get("degree", 4)
    order = spec.get("order", 3)
    if len(measures) == 1:
        basis = ortho_basis(measures[0], degree)
    else:
        basis = multi_ortho_basis(measures, degree)
    tensor = compute_tensor(basis, order)
    frame = pd.DataFrame(
        [key + (value,) for key, value in sorted(tensor.entries.items())],
        columns=[f"k{i + 1}" for i in range(order)] + ["value"],
    )
    write_json(
        {"index_set": [list(i) for i in basis.index_set], "order": order},
        output_path(cfg.out, "_index_set.json"),
    )
    return [
        write_csv(frame, output_path(cfg.out, "_tensor.csv")),
        output_path(cfg.out, "_index_set.json"),
    ]


PROPAGATE_FIELDS = [
    "r1",
    "r2",
    "r3",
    "u",
    "ca0",
    "cb0",
    "germs",
    "degree",
    "t_end",
    "dt",
]


def run_propagate(spec, cfg):
    spec = get_dict_keys(
        spec, PROPAGATE_FIELDS + ["record_every", "monte_carlo", "realizations"]
    )
    vdv = vdv_config(**{k: spec[k] for k in PROPAGATE_FIELDS if k in spec})
    record_every = spec.get("record_every", 10)
    moments = vdv_propagate(vdv, record_every).moments()
    columns = ["t", "mean_cA", "std_cA", "mean_cB", "std_cB"]
    artifacts = [write_csv(moments[columns], output_path(cfg.out, "_moments.csv"))]
    summary = {"basis_size": vdv.basis.size, "steps": vdv.steps, "seed": cfg.seed}

    count = spec.get("monte_carlo", 0)
    if count:
        oracle = vdv_monte_carlo(vdv, count, cfg.seed, record_every)
        summary["monte_carlo"] = {
            "samples": count,
            **{
                f"max_relative_deviation_{c}": float(
                    np.max(np.abs(moments[c] - oracle[c]) / np.abs(oracle[c]))
                )
                for c in ("mean_cA", "mean_cB")
            },
        }
        artifacts.append(write_csv(oracle, output_path(cfg.out, "_monte_carlo.csv")))

    paths = spec.get("realizations", 0)
    if paths:
        times, ca, cb = vdv_realizations(vdv, paths, cfg.seed, record_every)
        frame = pd.DataFrame({"t": times})
        for i in range(paths):
            frame[f"cA_{i}"] = ca[:, i]
            frame[f"cB_{i}"] = cb[:, i]
        artifacts.append(write_csv(frame, output_path(cfg.out, "_realizations.csv")))

    artifacts.append(write_json(summary, output_path(cfg.out, "_summary.json")))
    return artifacts


OCP_FIELDS = [
    "k_support",
    "x1_0",
    "x2_0",
    "germ",
    "degree",
    "a21",
    "a22",
    "b",
    "q",
    "r",
    "horizon",
    "lam",
    "x2_max",
    "solver",
    "solver_options",
]


def run_ocp(spec, cfg):
    spec = get_dict_keys(spec, OCP_FIELDS + ["monte_carlo"])
    ocp = ocp_config(**{k: spec[k] for k in OCP_FIELDS if k in spec})
    result = ocp_solve(ocp)
    artifacts = [write_csv(result.moments(), output_path(cfg.out, "_trajectory.csv"))]
    summary = {
        "objective": result.objective,
        "status": result.status,
        "residuals": result.residuals,
        "seed": cfg.seed,
    }

    count = spec.get("monte_carlo", 100000)
    if count:
        rate, frame = ocp_monte_carlo(ocp, result.controls, count, cfg.seed)
        summary["violation_rate"] = rate
        summary["samples"] = count
        artifacts.append(write_csv(frame, output_path(cfg.out, "_monte_carlo.csv")))

    artifacts.append(write_json(summary, output_path(cfg.out, "_summary.json")))
    return artifacts


def run_bench(spec, cfg):
    spec = get_dict_keys(spec, ["repetitions", "degree"])
    timings = run_benchmark(BenchmarkConfig(**spec))
    click.echo(timings.to_string(index=False))
    return [write_csv(timings, output_path(cfg.out, "_bench.csv"))]


HANDLERS = {
    "basis": run_basis,
    "quad": run_quad,
    "tensor": run_tensor,
    "propagate": run_propagate,
    "ocp": run_ocp,
    "bench": run_bench,
}


def run(cfg):
    """
    Execute one subcommand and write its artifacts.

    :param cfg: RunConfig
    :return: List of written paths
    """

    if cfg.subcommand not in HANDLERS:
        raise SpecError(f"unknown subcommand `{cfg.subcommand}`")
    spec = apply_overrides(load_spec(cfg.spec), cfg.overrides)
    logger.info(f"running {cfg.subcommand} with seed {cfg.seed}")
    return HANDLERS[cfg.subcommand](spec, cfg)


def _invoke(subcommand, spec, out, seed, overrides, **options):
    extra = [f"{k}={v}" for k, v in options.items() if v is not None]
    cfg = RunConfig(subcommand, spec, out, seed, tuple(overrides) + tuple(extra))
    try:
        for path in run(cfg):
            click.echo(path)
    except OrthobotError as e:
        raise click.ClickException(str(e))


def common_options(command):
    command = click.option("--set", "overrides", multiple=True, help="key=value")(
        command
    )
    command = click.option("--seed", type=int, default=DEFAULT_SEED)(command)
    command = click.option("--out", default="orthobot", help="output path prefix")(
        command
    )
    command = click.option("--spec", type=click.Path(exists=True), default=None)(
        command
    )
    return command


@click.group()
@click.option("--debug/--no-debug", default=False, envvar="ORTHOBOT_DEBUG")
def cli(debug):
    logging.basicConfig(format=log_fmt)
    root.setLevel(logging.DEBUG if debug else logging.INFO)


@cli.command()
@common_options
@click.option("--n", type=int, default=None, help="number of polynomials")
def basis(spec, out, seed, overrides, n):
    _invoke("basis", spec, out, seed, overrides, n=n)


@cli.command()
@common_options
@click.option("--rule", type=click.Choice(list(RULE_NAMES)), default=None)
@click.option("--n", type=int, default=None, help="number of nodes")
def quad(spec, out, seed, overrides, rule, n):
    _invoke("quad", spec, out, seed, overrides, rule=rule, n=n)


@cli.command()
@common_options
@click.option("--order", type=int, default=None)
def tensor(spec, out, seed, overrides, order):
    _invoke("tensor", spec, out, seed, overrides, order=order)


@cli.command()
@common_options
def propagate(spec, out, seed, overrides):
    _invoke("propagate", spec, out, seed, overrides)


@cli.command()
@common_options
def ocp(spec, out, seed, overrides):
    _invoke("ocp", spec, out, seed, overrides)


@cli.command()
@common_options
def bench(spec, out, seed, overrides):
    _invoke("bench", spec, out, seed, overrides)
