"""
Subcommand handlers.

Each handler turns parsed arguments into library calls and returns an
OutputRecord; no numbers are computed here.
"""
import argparse
import math
from typing import Any, Dict, List, Optional

import numpy as np

from matching.config.settings import settings
from matching.models.distribution import GMDParams
from matching.models.inference import Dataset
from matching.models.output import OutputRecord
from matching.services.classical import classical_service
from matching.services.generalised import generalised_service
from matching.services.hypothesis import matching_test_service
from matching.services.inference import inference_service
from matching.services.numerics import log_subfactorial
from matching.services.oracle import matching_oracle


def _params(args: argparse.Namespace) -> GMDParams:
    return GMDParams(size=args.size, trials=args.trials, prob=args.prob)


def _echo(args: argparse.Namespace, *names: str) -> Dict[str, Any]:
    return {name: getattr(args, name) for name in names}


def _dataset(args: argparse.Namespace) -> Dataset:
    return Dataset.from_file(args.data, args.size)


def pmf_command(args: argparse.Namespace) -> OutputRecord:
    dist = generalised_service.trials_distribution(_params(args), args.approx)
    values = generalised_service.pmf(args.k, dist, log=args.log)
    return OutputRecord(
        command="pmf",
        parameters=_echo(args, "k", "size", "trials", "prob", "log", "approx"),
        columns=["k", "log_pmf" if args.log else "pmf"],
        rows=[[k, float(v)] for k, v in zip(args.k, values)],
        flags={"method": dist.method},
    )


def cdf_command(args: argparse.Namespace) -> OutputRecord:
    dist = generalised_service.trials_distribution(_params(args), args.approx)
    values = generalised_service.cdf(args.t, dist, lower_tail=args.lower_tail, log_p=args.log_p)
    name = "cdf" if args.lower_tail else "sf"
    return OutputRecord(
        command="cdf",
        parameters=_echo(args, "t", "size", "trials", "prob", "lower_tail", "log_p", "approx"),
        columns=["t", f"log_{name}" if args.log_p else name],
        rows=[[t, float(v)] for t, v in zip(args.t, values)],
        flags={"method": dist.method},
    )


def quantile_command(args: argparse.Namespace) -> OutputRecord:
    dist = generalised_service.trials_distribution(_params(args), args.approx)
    values = generalised_service.quantile(args.p, dist, lower_tail=args.lower_tail, log_p=args.log_p)
    return OutputRecord(
        command="quantile",
        parameters=_echo(args, "p", "size", "trials", "prob", "lower_tail", "log_p", "approx"),
        columns=["p", "quantile"],
        rows=[[p, int(q) if math.isfinite(q) else q] for p, q in zip(args.p, values)],
        flags={"method": dist.method},
    )


def sample_command(args: argparse.Namespace) -> OutputRecord:
    seed = args.seed if args.seed is not None else settings.default_seed
    dist = generalised_service.trials_distribution(_params(args), args.approx)
    draws = generalised_service.sample(dist, args.count, np.random.default_rng(seed), args.method)
    return OutputRecord(
        command="sample",
        parameters={**_echo(args, "count", "size", "trials", "prob", "method", "approx"), "seed": seed},
        columns=["draw"],
        rows=[[int(x)] for x in draws],
        flags={"method": dist.method if args.method == "inverse" else "two-step"},
    )


def hdr_command(args: argparse.Namespace) -> OutputRecord:
    region = generalised_service.hdr(args.cover_prob, _params(args), args.approx)
    return OutputRecord(
        command="hdr",
        parameters=_echo(args, "cover_prob", "size", "trials", "prob", "approx"),
        columns=["region", "cover_prob", "coverage", "contiguous"],
        rows=[[region.label(), region.cover_prob, region.coverage, region.contiguous]],
        flags={"method": region.method},
    )


def moments_command(args: argparse.Namespace) -> OutputRecord:
    moments = generalised_service.moments(
        _params(args), asymptotic=args.asymptotic, include_sd=args.include_sd
    )
    columns = ["mean", "variance", "skewness", "kurtosis"]
    row: List[Any] = [moments.mean, moments.variance, moments.skewness, moments.kurtosis]
    if args.include_sd:
        columns.append("sd")
        row.append(moments.sd)
    return OutputRecord(
        command="moments",
        parameters=_echo(args, "size", "trials", "prob", "include_sd", "asymptotic"),
        columns=columns,
        rows=[row],
        flags={"method": "asymptotic" if args.asymptotic else "exact"},
    )


def mle_command(args: argparse.Namespace) -> OutputRecord:
    data = _dataset(args)
    result = inference_service.fit(
        data,
        ci_method=args.ci_method,
        level=args.conf_level,
        resamples=args.bootstrap_sims,
        seed=args.seed,
        tail_split=args.tail_split,
    )
    lower, upper = result.ci if result.ci is not None else (None, None)
    mom: Optional[float] = inference_service.mom_estimate(data) if data.size > 1 else None
    mom_approx: Optional[float] = inference_service.mom_approx(data) if data.size > 1 else None
    return OutputRecord(
        command="mle",
        parameters={
            **_echo(args, "size", "ci_method", "conf_level", "tail_split"),
            "data": str(args.data),
            "trials": data.trials,
            "mean_matches": data.mean,
        },
        columns=[
            "theta_hat", "phi_hat", "max_loglik", "likelihood_per_point",
            "ci_lower", "ci_upper", "mom_estimate", "mom_approx", "iterations",
        ],
        rows=[[
            result.theta_hat, result.phi_hat, result.max_loglik, result.likelihood_per_point,
            lower, upper, mom, mom_approx, result.iterations,
        ]],
        flags={
            "boundary": result.boundary_flag,
            "ci_method": str(result.ci_method),
            **({"bootstrap_sims": str(args.bootstrap_sims), "seed": str(args.seed)}
               if args.ci_method == "bootstrap" else {}),
        },
    )


def matching_test_command(args: argparse.Namespace) -> OutputRecord:
    data = _dataset(args)
    result = matching_test_service.matching_test(
        data, null_prob=args.null_prob, alternative=args.alternative, approx=args.approx
    )
    return OutputRecord(
        command="test",
        parameters={**_echo(args, "size", "null_prob", "alternative", "approx"), "data": str(args.data)},
        columns=["trials", "observed_total", "mean_matches", "p_value"],
        rows=[[result.trials, result.observed_total, result.mean_matches, result.p_value]],
        flags={"method": result.method},
    )


def power_command(args: argparse.Namespace) -> OutputRecord:
    grid = args.theta_grid if args.theta_grid else [i / 20 for i in range(21)]
    curve = matching_test_service.power_curve(args.size, args.trials, args.alpha, grid, args.approx)
    return OutputRecord(
        command="power",
        parameters={**_echo(args, "size", "trials", "alpha", "approx"), "theta_grid": grid},
        columns=["theta", "power"],
        rows=[[p.theta, p.power] for p in curve.points],
        flags={
            "t_star": str(curve.t_star),
            "rejection_region": "empty" if curve.rejection_region_empty else "nonempty",
        },
    )


def subfactorial_command(args: argparse.Namespace) -> OutputRecord:
    rows = []
    for n in args.n:
        log_value = log_subfactorial(n)
        rows.append([n, log_value, math.exp(log_value) if log_value < 700 else math.inf])
    return OutputRecord(
        command="subfactorial",
        parameters=_echo(args, "n"),
        columns=["n", "log_subfactorial", "subfactorial"],
        rows=rows,
    )


def diagnostics_command(args: argparse.Namespace) -> OutputRecord:
    n = args.size
    rows = [[k, classical_service.classical_size_recursion_check(k, n)] for k in range(n + 1)]
    return OutputRecord(
        command="diagnostics",
        parameters=_echo(args, "size"),
        columns=["k", "size_recursion_residual"],
        rows=rows,
        flags={"poisson_sse": f"{classical_service.poisson_sse(n):.15g}"},
    )


def oracle_command(args: argparse.Namespace) -> OutputRecord:
    exact = matching_oracle.enumerate_generalised(args.size, args.prob).as_floats()
    production = np.exp(generalised_service.single_trial_log_pmf(args.size, args.prob))
    errors = np.abs(exact - production)
    return OutputRecord(
        command="oracle",
        parameters=_echo(args, "size", "prob"),
        columns=["k", "enumerated", "production", "abs_error"],
        rows=[[k, float(e), float(p), float(d)] for k, (e, p, d) in enumerate(zip(exact, production, errors))],
        flags={"max_abs_error": f"{float(errors.max()):.3e}"},
    )
