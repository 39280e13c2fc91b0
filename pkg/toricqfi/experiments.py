"""The five experiment pipelines: compute, then write manifest, tables and figures."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Type, TypeVar

import numpy as np
from pydantic import BaseModel

from .config import (
    GROUND,
    PHASE_DIAGRAM,
    QUENCH_DISORDER,
    QUENCH_UNIFORM,
    THERMAL_BOUND,
    ExperimentConfig,
    GroundConfig,
    PhaseDiagramConfig,
    QuenchDisorderConfig,
    QuenchUniformConfig,
    ThermalConfig,
)
from .disorder import DisorderSpec, average_ensemble
from .errors import ConfigError
from .output import RunHeader, build_manifest, write_line_plot, write_manifest, write_table
from .qfi import (
    ELECTRIC,
    MAGNETIC,
    QfiCurve,
    ScalingFit,
    entanglement_depth,
    fit_or_saturate,
    qfi_density,
    thermal_bound_curve,
    thermal_bound_pair,
    topological_index,
    wilson_loop,
)
from .uniform import (
    ToricFieldPoint,
    ground_wd_profile,
    quench_cxd_infty_exact,
    quench_wd_infty,
    quench_wd_profile,
)

logger = logging.getLogger(__name__)

FIT_COLUMNS = ["alpha", "beta", "residual", "l_min", "l_max", "n_samples", "status"]
START_SITE_POLICY = "floor(N/4) evenly spaced start sites averaged within each realization"

M = TypeVar("M", bound=BaseModel)


@dataclass
class RunResult:
    """Files written by a run and the rows of its console summary."""

    experiment: str
    output_dir: Path
    summary_columns: List[str]
    summary_rows: List[List[Any]] = field(default_factory=list)
    files: List[Path] = field(default_factory=list)


def _parameters(config: ExperimentConfig, model: Type[M]) -> M:
    if not isinstance(config.parameters, model):
        raise ConfigError(
            f"{config.experiment} needs {model.__name__}, got {type(config.parameters).__name__}"
        )
    return config.parameters


def _start_run(config: ExperimentConfig, extra: Optional[Dict[str, Any]] = None) -> RunHeader:
    return write_manifest(config.output_dir, build_manifest(config.to_dict(), extra))


def _fit_cells(fit: ScalingFit) -> List[Any]:
    return [fit.alpha, fit.beta, fit.residual, fit.window[0], fit.window[1], fit.n_samples, fit.status]


def run_ground(config: ExperimentConfig) -> RunResult:
    """w_D(D), f_Q(L) and the scaling fit for each field in the grid."""
    params = _parameters(config, GroundConfig)
    n_sites = params.resolved_sites
    side = params.l_region
    l_values = np.arange(1, side + 1)

    wd_rows: List[List[Any]] = []
    fq_rows: List[List[Any]] = []
    fit_rows: List[List[Any]] = []
    series = []
    result = RunResult(GROUND, config.output_dir, ["lambda", "w_D at D=L-1", "f_Q(L)", "beta", "status"])

    for lam in params.lambdas:
        logger.info("Ground state at lambda=%g, N=%d, L=%d", lam, n_sites, side)
        wd = ground_wd_profile(lam, n_sites, side - 1)
        for distance, value in enumerate(wd, start=1):
            wd_rows.append([lam, distance, value, wilson_loop(value, distance)])

        curve = QfiCurve.from_wd_profile(wd, l_values, label=f"lambda={lam:g}")
        for side_length, f_q, total in zip(curve.l_values, curve.f_q, curve.total_fisher()):
            fq_rows.append([lam, side_length, f_q, total, entanglement_depth(f_q)])

        fit = fit_or_saturate(curve)
        fit_rows.append([lam, *_fit_cells(fit)])
        plateau = float(wd[-1]) if wd.size else math.nan
        result.summary_rows.append([lam, plateau, float(curve.f_q[-1]), fit.beta, fit.status])
        series.append((f"lambda={lam:g}", np.arange(1, side), wd))

    header = _start_run(config, {"n_sites": n_sites})
    out = config.output_dir
    result.files = [
        write_table(out / "wd_vs_D.csv", header, ["lambda", "D", "w_D", "W_D"], wd_rows),
        write_table(out / "fq_vs_L.csv", header, ["lambda", "L", "f_Q", "F_Q", "depth"], fq_rows),
        write_table(out / "fit.csv", header, ["lambda", *FIT_COLUMNS], fit_rows),
    ]
    if params.plot and side > 1:
        result.files.append(
            write_line_plot(out / "wd_vs_D.svg", series, "D", "w_D", f"Ground state, N={n_sites}")
        )
    return result


def ground_qfi_curve(lam: float, l_values: Sequence[int], n_factor: int, label: str) -> QfiCurve:
    """f_Q(L) with N = n_factor L at each side length."""
    values = [
        qfi_density(ground_wd_profile(lam, n_factor * side, side - 1)) for side in l_values
    ]
    return QfiCurve(np.asarray(l_values, dtype=int), np.asarray(values), label)


def run_phase_diagram(config: ExperimentConfig) -> RunResult:
    """Topological index for every (lambda^x, lambda^z) pair; one curve per distinct field."""
    params = _parameters(config, PhaseDiagramConfig)
    fields = sorted(set(params.lambda_x) | set(params.lambda_z))

    curves: Dict[float, QfiCurve] = {}
    fits: Dict[float, ScalingFit] = {}
    for lam in fields:
        logger.info("Scaling curve at lambda=%g over L=%s", lam, params.l_values)
        curves[lam] = ground_qfi_curve(lam, params.l_values, params.n_factor, f"lambda={lam:g}")
        fits[lam] = fit_or_saturate(curves[lam])

    result = RunResult(
        PHASE_DIAGRAM, config.output_dir, ["lambda_x", "lambda_z", "beta_e", "beta_m", "index"]
    )
    index_rows: List[List[Any]] = []
    for lambda_x in params.lambda_x:
        for lambda_z in params.lambda_z:
            fit_e, fit_m = fits[lambda_x], fits[lambda_z]
            topo = topological_index(fit_e, fit_m)
            index_rows.append(
                [lambda_x, lambda_z, topo.beta_e, topo.beta_m, topo.index, fit_e.residual, fit_m.residual]
            )
            result.summary_rows.append([lambda_x, lambda_z, topo.beta_e, topo.beta_m, topo.index])

    fq_rows = [
        [lam, side, params.n_factor * side, f_q, entanglement_depth(f_q)]
        for lam in fields
        for side, f_q in zip(curves[lam].l_values.tolist(), curves[lam].f_q.tolist())
    ]
    fit_rows = [[lam, *_fit_cells(fits[lam])] for lam in fields]

    header = _start_run(config)
    out = config.output_dir
    result.files = [
        write_table(
            out / "index.csv",
            header,
            ["lambda_x", "lambda_z", "beta_e", "beta_m", "index", "residual_e", "residual_m"],
            index_rows,
        ),
        write_table(out / "fq_vs_L.csv", header, ["lambda", "L", "N", "f_Q", "depth"], fq_rows),
        write_table(out / "fit.csv", header, ["lambda", *FIT_COLUMNS], fit_rows),
    ]
    if params.plot:
        series = [(c.label, c.l_values, c.f_q - 1.0) for c in curves.values()]
        result.files.append(
            write_line_plot(out / "fq_vs_L.svg", series, "L", "f_Q - 1", log_x=True, log_y=True)
        )
    return result


def run_quench_uniform(config: ExperimentConfig) -> RunResult:
    """C^x_d(t) over a time grid next to the long-time closed forms."""
    params = _parameters(config, QuenchUniformConfig)
    times = np.linspace(params.t_min, params.t_max, params.n_times)
    distances = list(params.d_values)
    # Closed forms describe quenches out of the lambda=0 state only.
    closed = params.lambda0 == 0.0

    values = np.array(
        [
            quench_wd_profile(params.lambda0, params.lambda_quench, t, params.n_sites, distances)
            for t in times
        ]
    )
    exact = [
        quench_cxd_infty_exact(d, params.lambda_quench) if closed else math.nan for d in distances
    ]
    wd_infty = [quench_wd_infty(d, params.lambda_quench) if closed else math.nan for d in distances]

    cx_rows = [
        [t, d, values[i, k], exact[k], wd_infty[k]]
        for i, t in enumerate(times.tolist())
        for k, d in enumerate(distances)
    ]
    means = values.mean(axis=0)
    average_rows = []
    result = RunResult(QUENCH_UNIFORM, config.output_dir, ["d", "time average", "exact", "rel. error"])
    for k, d in enumerate(distances):
        error = abs(means[k] - exact[k]) / abs(exact[k]) if closed else math.nan
        average_rows.append([d, means[k], exact[k], error])
        result.summary_rows.append([d, float(means[k]), exact[k], error])

    header = _start_run(config)
    out = config.output_dir
    result.files = [
        write_table(
            out / "cx_vs_t.csv", header, ["t", "d", "C_x", "cxd_infty_exact", "wd_infty"], cx_rows
        ),
        write_table(
            out / "time_average.csv",
            header,
            ["d", "C_x_mean", "cxd_infty_exact", "rel_error"],
            average_rows,
        ),
    ]
    if params.plot:
        series = [(f"d={d}", times, values[:, k]) for k, d in enumerate(distances)]
        result.files.append(write_line_plot(out / "cx_vs_t.svg", series, "t", "C^x_d(t)"))
    return result


def run_quench_disorder(
    config: ExperimentConfig, on_result: Optional[Callable[[int], None]] = None
) -> RunResult:
    """Ensemble-averaged Wilson loops and f_Q after a quench with random couplings."""
    params = _parameters(config, QuenchDisorderConfig)
    spec = DisorderSpec(
        j_base=params.j_base,
        delta_j=params.delta_j,
        lambda_quench=params.lambda_quench,
        l_region=params.l_region,
        n_sites=params.n_sites,
        n_realizations=params.n_realizations,
        master_seed=config.seed,
        times=tuple(params.times),
        d_values=tuple(params.d_values) if params.d_values is not None else None,
        enforce_five_l=params.enforce_five_l,
    )
    ensemble = average_ensemble(spec, n_jobs=config.threads, on_result=on_result)

    times = ensemble.times.tolist()
    distances = ensemble.d_values.tolist()
    final = len(times) - 1
    wbar_t_rows = [
        [t, d, ensemble.mean_wd[i, k], ensemble.stderr_wd[i, k]]
        for i, t in enumerate(times)
        for k, d in enumerate(distances)
    ]
    wbar_d_rows = [
        [times[final], d, ensemble.mean_wd[final, k], ensemble.stderr_wd[final, k]]
        for k, d in enumerate(distances)
    ]
    fq_rows = [
        [t, side, ensemble.mean_fq[i, k], ensemble.stderr_fq[i, k], entanglement_depth(ensemble.mean_fq[i, k])]
        for i, t in enumerate(times)
        for k, side in enumerate(ensemble.l_values.tolist())
    ]

    header = _start_run(
        config,
        {
            "n_sites": spec.chain_sites,
            "d_values": distances,
            "start_site_policy": START_SITE_POLICY,
            "start_sites": ensemble.start_sites,
            "failures": [[index, message] for index, message in ensemble.failures],
        },
    )
    out = config.output_dir
    result = RunResult(QUENCH_DISORDER, config.output_dir, ["quantity", "value"])
    result.files = [
        write_table(out / "wbar_vs_t.csv", header, ["t", "D", "wbar", "stderr"], wbar_t_rows),
        write_table(out / "wbar_vs_D.csv", header, ["t", "D", "wbar", "stderr"], wbar_d_rows),
        write_table(
            out / "fqbar_vs_L.csv", header, ["t", "L", "fqbar", "stderr", "depth"], fq_rows
        ),
    ]
    if ensemble.fit is not None:
        result.files.append(
            write_table(
                out / "fit.csv", header, ["t", *FIT_COLUMNS], [[times[final], *_fit_cells(ensemble.fit)]]
            )
        )

    result.summary_rows = [
        ["realizations", ensemble.n_realizations - len(ensemble.failures)],
        ["failures", len(ensemble.failures)],
        ["N", spec.chain_sites],
        ["final t", times[final]],
    ]
    if ensemble.l_values.size:
        result.summary_rows.append(["mean f_Q(L)", float(ensemble.mean_fq[final, -1])])
    if ensemble.fit is not None:
        result.summary_rows += [["beta", ensemble.fit.beta], ["fit status", ensemble.fit.status]]

    if params.plot and ensemble.l_values.size:
        series = [(f"t={t:g}", ensemble.l_values, ensemble.mean_fq[i]) for i, t in enumerate(times)]
        result.files.append(write_line_plot(out / "fqbar_vs_L.svg", series, "L", "mean f_Q"))
    return result


def run_thermal(config: ExperimentConfig) -> RunResult:
    """Electric and magnetic thermal bounds on f_Q and their (vanishing) exponents."""
    params = _parameters(config, ThermalConfig)
    point = ToricFieldPoint(0.0, 0.0, j_a=params.j_a, j_b=params.j_b)

    bound_rows: List[List[Any]] = []
    fit_rows: List[List[Any]] = []
    series = []
    result = RunResult(
        THERMAL_BOUND, config.output_dir, ["T", "bound_e(L_max)", "bound_m(L_max)", "beta_e", "beta_m"]
    )
    for temperature in params.temperatures:
        for side in params.l_values:
            bound_e, bound_m = thermal_bound_pair(point, temperature, side)
            bound_rows.append([temperature, side, bound_e, bound_m])

        curve_e = thermal_bound_curve(point.j_b, temperature, params.l_values, ELECTRIC)
        curve_m = thermal_bound_curve(point.j_a, temperature, params.l_values, MAGNETIC)
        fit_e, fit_m = fit_or_saturate(curve_e), fit_or_saturate(curve_m)
        topo = topological_index(fit_e, fit_m)
        fit_rows.append(
            [temperature, topo.beta_e, topo.beta_m, topo.index, fit_e.residual, fit_m.residual]
        )
        result.summary_rows.append(
            [temperature, float(curve_e.f_q[-1]), float(curve_m.f_q[-1]), topo.beta_e, topo.beta_m]
        )
        series.append((f"T={temperature:g}", curve_e.l_values, curve_e.f_q))

    header = _start_run(config)
    out = config.output_dir
    result.files = [
        write_table(out / "thermal_bound.csv", header, ["T", "L", "bound_e", "bound_m"], bound_rows),
        write_table(
            out / "thermal_fit.csv",
            header,
            ["T", "beta_e", "beta_m", "index", "residual_e", "residual_m"],
            fit_rows,
        ),
    ]
    if params.plot:
        result.files.append(
            write_line_plot(out / "thermal_bound.svg", series, "L", "bound on f_Q", log_x=True)
        )
    return result


def run_experiment(
    config: ExperimentConfig, on_result: Optional[Callable[[int], None]] = None
) -> RunResult:
    """Dispatch on ``config.experiment``."""
    if config.experiment == QUENCH_DISORDER:
        return run_quench_disorder(config, on_result)
    runners: Dict[str, Callable[[ExperimentConfig], RunResult]] = {
        GROUND: run_ground,
        PHASE_DIAGRAM: run_phase_diagram,
        QUENCH_UNIFORM: run_quench_uniform,
        THERMAL_BOUND: run_thermal,
    }
    if config.experiment not in runners:
        raise ConfigError(f"Unknown experiment '{config.experiment}'")
    return runners[config.experiment](config)
