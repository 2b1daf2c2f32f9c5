"""
Plot data for the standard figures, as output records.
"""
import logging
from typing import Callable, Dict, List

import numpy as np

from matching.models.output import OutputRecord
from matching.services.classical import classical_service
from matching.services.generalised import generalised_service
from matching.services.hypothesis import matching_test_service

logger = logging.getLogger(__name__)

SIZES = range(1, 13)
PANEL_SIZE = 12
PANEL_PROB = 0.2
PANEL_SAMPLES = 10_000
PANEL_SEED = 1
POWER_SIZES = (4, 6, 8, 10)
POWER_TRIALS = (1, 2, 3, 4, 5)
POWER_ALPHA = 0.05


def classical_pmf() -> OutputRecord:
    """Classical matching masses for sizes 1..12."""
    rows: List[List[object]] = []
    table = classical_service.table(max(SIZES))
    for n in SIZES:
        rows.extend([n, k, table.pmf(k, n)] for k in range(n + 1))
    return OutputRecord(command="figures", parameters={"name": "classical-pmf"}, columns=["n", "k", "pmf"], rows=rows)


def poisson_sse() -> OutputRecord:
    """Squared distance to the Poisson limit for sizes 1..12."""
    rows: List[List[object]] = [[n, classical_service.poisson_sse(n)] for n in SIZES]
    return OutputRecord(command="figures", parameters={"name": "poisson-sse"}, columns=["n", "sse"], rows=rows)


def generalised_pmf(prob: float = PANEL_PROB) -> OutputRecord:
    """Generalised matching masses for sizes 1..12 at one probability."""
    rows: List[List[object]] = []
    for n in SIZES:
        log_pmf = generalised_service.single_trial_log_pmf(n, prob)
        rows.extend([n, k, float(np.exp(v))] for k, v in enumerate(log_pmf))
    return OutputRecord(
        command="figures",
        parameters={"name": "generalised-pmf", "prob": prob},
        columns=["n", "k", "pmf"],
        rows=rows,
    )


def panels() -> OutputRecord:
    """Mass, distribution, quantile and sampled-proportion panels for n = 12, prob = 0.2."""
    dist = generalised_service.distribution(PANEL_SIZE, prob=PANEL_PROB)
    support = list(range(PANEL_SIZE + 1))
    probs = [i / 100 for i in range(101)]
    draws = generalised_service.sample(dist, PANEL_SAMPLES, np.random.default_rng(PANEL_SEED))
    proportions = np.bincount(draws, minlength=PANEL_SIZE + 1) / PANEL_SAMPLES

    rows: List[List[object]] = []
    rows.extend(["pmf", k, p] for k, p in zip(support, generalised_service.pmf(support, dist)))
    rows.extend(["cdf", k, p] for k, p in zip(support, generalised_service.cdf(support, dist)))
    rows.extend(["quantile", p, q] for p, q in zip(probs, generalised_service.quantile(probs, dist)))
    rows.extend(["sample", k, float(p)] for k, p in zip(support, proportions))
    return OutputRecord(
        command="figures",
        parameters={"name": "panels", "size": PANEL_SIZE, "prob": PANEL_PROB, "seed": PANEL_SEED},
        columns=["panel", "x", "y"],
        rows=rows,
    )


def power_curves() -> OutputRecord:
    """Canonical test power over theta for the standard grid of sizes and trials."""
    thetas = [i / 100 for i in range(101)]
    rows: List[List[object]] = []
    for n in POWER_SIZES:
        for m in POWER_TRIALS:
            curve = matching_test_service.power_curve(n, m, POWER_ALPHA, thetas)
            rows.extend([n, m, curve.t_star, p.theta, p.power] for p in curve.points)
    return OutputRecord(
        command="figures",
        parameters={"name": "power-curves", "alpha": POWER_ALPHA},
        columns=["n", "m", "t_star", "theta", "power"],
        rows=rows,
    )


FIGURES: Dict[str, Callable[[], OutputRecord]] = {
    "classical-pmf": classical_pmf,
    "poisson-sse": poisson_sse,
    "generalised-pmf": generalised_pmf,
    "panels": panels,
    "power-curves": power_curves,
}


def build_figures(name: str) -> Dict[str, OutputRecord]:
    """Records for one figure, or for all of them when name is 'all'."""
    names = list(FIGURES) if name == "all" else [name]
    records = {}
    for figure in names:
        logger.info(f"Building figure data: {figure}")
        records[figure] = FIGURES[figure]()
    return records
