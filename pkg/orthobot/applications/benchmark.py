import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from orthobot.exceptions import ParameterDomainError
from orthobot.optimiser.optimal_control import BETA_MIXTURE
from orthobot.polynomials.basis import multi_ortho_basis
from orthobot.polynomials.basis import ortho_basis
from orthobot.polynomials.measures import measure_from_spec
from orthobot.polynomials.tensor import compute_tensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchmarkConfig:
    repetitions: int = 10000
    degree: int = 4

    def __post_init__(self):
        if self.repetitions < 1:
            raise ParameterDomainError("`repetitions` must be positive")


def _examples(degree):
    mixture = measure_from_spec(BETA_MIXTURE)
    uniform = measure_from_spec({"kind": "uniform01"})
    gaussian = measure_from_spec({"kind": "gaussian"})
    return [
        ("beta_mixture", 1, lambda: ortho_basis(mixture, degree)),
        ("propagation", 2, lambda: multi_ortho_basis([uniform, uniform], degree)),
        (
            "optimisation",
            3,
            lambda: multi_ortho_basis([mixture, gaussian, gaussian], degree),
        ),
    ]


def _mean_microseconds(function, repetitions):
    timings = np.empty(repetitions)
    for i in range(repetitions):
        start = time.perf_counter()
        function()
        timings[i] = time.perf_counter() - start
    return float(np.mean(timings) * 1e6)


def run_benchmark(cfg=BenchmarkConfig()):
    """
    Time basis construction and order-2 and order-3 tensors of the three
    example configurations. The first run is included in the mean.

    :param cfg: BenchmarkConfig
    :return: DataFrame of mean times in microseconds
    """

    rows = []
    for name, uncertainties, build in _examples(cfg.degree):
        logger.info(f"timing {name} over {cfg.repetitions} repetitions")
        basis = build()
        rows.append(
            {
                "example": name,
                "uncertainties": uncertainties,
                "basis_size": basis.size,
                "basis_us": _mean_microseconds(build, cfg.repetitions),
                "tensor2_us": _mean_microseconds(
                    lambda: compute_tensor(basis, 2), cfg.repetitions
                ),
                "tensor3_us": _mean_microseconds(
                    lambda: compute_tensor(basis, 3), cfg.repetitions
                ),
            }
        )
    return pd.DataFrame(rows)
