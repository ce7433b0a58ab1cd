# services/runner.py
"""
RunConfig 하나를 실행해 직렬화 가능한 결과로 만든다.

명령별 결과는 JSON payload 와 (해당되면) 표, 플롯 계열을 함께 가진다.
형식 선택과 파일 쓰기는 render_result / report_writer 가 맡는다.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from app.config import get_settings
from app.exceptions import InputValidationError, PersistenceError
from app.models.measure import BandId, SpectralMeasure
from app.schemas.run_config import Command, OutputFormat, RunConfig
from app.services import report_writer
from app.services.dyadic_assembly import assemble, assembly_trace, plan_bands, upper_bound_or_trivial
from app.services.gp_sampler import (
    default_step,
    fit_log_decay,
    mc_persistence,
    mc_sweep,
    persistence_grid,
    sample_path,
)
from app.services.sharpness import example_measure, lower_bound
from app.services.spectral_measure import (
    admissible_delta,
    band_range,
    dyadic_band,
    parse_measure,
    rescale_to_unit_band,
)
from app.services.toeplitz import rho, sigma_for_band

logger = logging.getLogger(__name__)

MODULE = "cli"
GRID_NOTE = "grid event; upper-approximates the continuous-interval persistence probability"
ESTIMATE_COLUMNS = ["L", "step", "trials", "successes", "p_hat", "stderr", "ci_lo", "ci_hi"]
RHO_COLUMNS = ["n", "rho2", "rho", "condition", "singular"]
SIGMA_COLUMNS = ["k", "a", "N", "sigma2", "sigma"]
SAMPLE_COLUMNS = ["x", "f"]
SWEEP_COLUMNS = [
    "kind", "L", "p_hat", "stderr", "upper_bound", "lower_bound_log10",
    "fit_intercept", "fit_slope_L", "fit_slope_L2",
]
DEFAULT_TABLE_DEGREE = 4


@dataclass
class RunResult:
    command: Command
    payload: Dict[str, Any]
    columns: Optional[List[str]] = None
    rows: Optional[List[List[Any]]] = None
    series: Optional[Tuple[List[float], List[float]]] = None
    labels: Tuple[str, str] = ("x", "y")


# ============================================
# 입력
# ============================================
def load_measure(config: RunConfig) -> SpectralMeasure:
    if config.example_measure is not None:
        return example_measure(config.example_measure)
    try:
        text = Path(config.measure_path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputValidationError(f"cannot read measure file {config.measure_path}: {e}", MODULE) from e
    return parse_measure(text)


def _delta(config: RunConfig, mu: SpectralMeasure) -> float:
    return config.delta if config.delta is not None else admissible_delta(mu)


# ============================================
# 명령별 계산
# ============================================
def estimate_table(mu: SpectralMeasure, config: RunConfig) -> RunResult:
    step = config.step if config.step is not None else default_step(mu, config.L)
    est = mc_persistence(mu, config.L, step=step, trials=config.trials, master_seed=config.seed, workers=config.workers)
    row = [config.L, step, est.trials, est.successes, est.p_hat, est.stderr, est.ci_lo, est.ci_hi]
    payload = {"L": config.L, "step": step, "seed": config.seed, "estimate": est, "note": GRID_NOTE}
    return RunResult(Command.estimate, payload, ESTIMATE_COLUMNS, [row])


def certify_payload(mu: SpectralMeasure, config: RunConfig) -> Dict[str, Any]:
    delta = _delta(config, mu)
    plan = plan_bands(mu, delta, config.L, c_pp=config.c_pp, discrete=config.discrete)
    if not plan.feasible:
        return {
            "trivial": True,
            "total_bound": 0.5,
            "delta": delta,
            "L": config.L,
            "diagnostics": plan.diagnostics,
            "plan": plan,
        }
    bound = assemble(mu, delta, config.L, c_pp=config.c_pp, discrete=config.discrete, workers=config.workers)
    trace = assembly_trace(bound)
    trace["trivial"] = False
    return trace


def rho_table(mu: SpectralMeasure, n_max: int) -> Tuple[List[str], List[List[Any]]]:
    rows = []
    for n in range(n_max + 1):
        value = rho(mu, n)
        rows.append([n, value.rho2, value.rho, value.condition, value.singular])
    return RHO_COLUMNS, rows


def sigma_table(mu: SpectralMeasure, N_max: int, delta: float) -> Tuple[List[str], List[List[Any]]]:
    """밴드마다 단위 밴드로 재스케일한 측도의 σ², N = 0..N_max"""
    rows = []
    k_lo, k_hi = band_range(mu, delta)
    for k in range(k_lo, k_hi + 1):
        band = BandId(k=k)
        mu_a = dyadic_band(mu, band, delta)
        if mu_a is None:
            continue
        a = band.scale(delta)
        unit = rescale_to_unit_band(mu_a, a)
        for N in range(N_max + 1):
            spectrum = sigma_for_band(unit, N)
            rows.append([k, a, N, spectrum.sigma2, spectrum.sigma])
    return SIGMA_COLUMNS, rows


def sample_series(mu: SpectralMeasure, config: RunConfig) -> RunResult:
    step = config.step if config.step is not None else default_step(mu, config.L)
    count = persistence_grid(config.L, step).size
    path = sample_path(mu, 0.0, step, count, config.seed)
    xs, ys = path.grid.tolist(), path.values.tolist()
    payload = {"step": step, "seed": config.seed, "x": xs, "f": ys}
    return RunResult(
        Command.sample, payload, SAMPLE_COLUMNS, [[x, y] for x, y in zip(xs, ys)],
        series=(xs, ys), labels=("x", "f(x)"),
    )


def sweep_table(mu: SpectralMeasure, config: RunConfig) -> RunResult:
    L_values = list(config.L_values)
    sweep = mc_sweep(mu, L_values, step=config.step, trials=config.trials, master_seed=config.seed, workers=config.workers)
    delta = _delta(config, mu)
    R = config.R if config.R is not None else mu.max_frequency

    rows: List[List[Any]] = []
    for item in sweep:
        upper = upper_bound_or_trivial(mu, delta, item.L, c_pp=config.c_pp, discrete=config.discrete) if item.L > 0 else 0.5
        lower = lower_bound(config.C, item.L, R).log10_bound if config.C is not None and item.L >= 1 else None
        rows.append(["data", item.L, item.estimate.p_hat, item.estimate.stderr, upper, lower, None, None, None])
    fit = fit_log_decay([r.L for r in sweep], [r.estimate.p_hat for r in sweep])
    rows.append(["fit", None, None, None, None, None, fit.intercept, fit.slope_L, fit.slope_L2])

    payload = {
        "seed": config.seed,
        "delta": delta,
        "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows[:-1]],
        "estimates": [r.estimate for r in sweep],
        "fit": fit,
        "note": GRID_NOTE,
    }
    return RunResult(
        Command.sweep, payload, SWEEP_COLUMNS, rows,
        series=([r.L for r in sweep], [r.estimate.p_hat for r in sweep]), labels=("L", "p_hat"),
    )


# ============================================
# 디스패치
# ============================================
def _estimate(config: RunConfig) -> RunResult:
    return estimate_table(load_measure(config), config)


def _certify(config: RunConfig) -> RunResult:
    return RunResult(Command.certify, certify_payload(load_measure(config), config))


def _lower(config: RunConfig) -> RunResult:
    R = config.R if config.R is not None else load_measure(config).max_frequency
    return RunResult(Command.lower, {"lower_bound": lower_bound(config.C, config.L, R)})


def _rho(config: RunConfig) -> RunResult:
    columns, rows = rho_table(load_measure(config), config.n)
    return RunResult(Command.rho, {"rho": [dict(zip(columns, r)) for r in rows]}, columns, rows)


def _sigma(config: RunConfig) -> RunResult:
    mu = load_measure(config)
    delta = _delta(config, mu)
    columns, rows = sigma_table(mu, config.n, delta)
    return RunResult(Command.sigma, {"delta": delta, "sigma": [dict(zip(columns, r)) for r in rows]}, columns, rows)


def _sample(config: RunConfig) -> RunResult:
    return sample_series(load_measure(config), config)


def _sweep(config: RunConfig) -> RunResult:
    return sweep_table(load_measure(config), config)


def _report(config: RunConfig) -> RunResult:
    """estimate, certify, lower, rho, sigma (그리고 L_values 가 있으면 sweep) 를 한 JSON 으로"""
    mu = load_measure(config)
    settings = get_settings()
    degree = config.n if config.n is not None else DEFAULT_TABLE_DEGREE
    delta = _delta(config, mu)
    bundle: Dict[str, Any] = {
        "measure": mu.to_document(),
        "estimate": estimate_table(mu, config).payload,
        "certify": certify_payload(mu, config),
    }
    if config.C is not None and config.L >= 1:
        R = config.R if config.R is not None else mu.max_frequency
        bundle["lower"] = lower_bound(config.C, config.L, R)
    rho_cols, rho_rows = rho_table(mu, min(degree, settings.rho_max_degree))
    bundle["rho"] = [dict(zip(rho_cols, r)) for r in rho_rows]
    sigma_cols, sigma_rows = sigma_table(mu, min(degree, settings.sigma_max_degree), delta)
    bundle["sigma"] = [dict(zip(sigma_cols, r)) for r in sigma_rows]
    if config.L_values:
        bundle["sweep"] = sweep_table(mu, config).payload
    return RunResult(Command.report, bundle)


HANDLERS: Dict[Command, Callable[[RunConfig], RunResult]] = {
    Command.estimate: _estimate,
    Command.certify: _certify,
    Command.lower: _lower,
    Command.rho: _rho,
    Command.sigma: _sigma,
    Command.sample: _sample,
    Command.sweep: _sweep,
    Command.report: _report,
}


def execute(config: RunConfig) -> RunResult:
    logger.info("명령 실행: %s", config.command.value)
    return HANDLERS[config.command](config)


def render_result(result: RunResult, fmt: OutputFormat) -> str:
    if fmt == OutputFormat.csv:
        return report_writer.render_csv(result.columns, result.rows)
    if fmt == OutputFormat.svg:
        xs, ys = result.series
        return report_writer.render_svg(xs, ys, title=result.command.value, x_label=result.labels[0], y_label=result.labels[1])
    return report_writer.render_json({"command": result.command.value, "result": result.payload})


def run(config: RunConfig, stream=None) -> int:
    """
    설정 실행 -> 산출물 쓰기 -> 종료 코드

    0: 성공, 2: 검증 오류 (파일 입출력 포함), 3: 수치 결함
    """
    try:
        result = execute(config)
        report_writer.write_text(render_result(result, config.format), config.out_path, stream)
    except PersistenceError as e:
        logger.error("%s", e)
        return e.exit_code
    except OSError as e:
        logger.error("[%s] cannot write output: %s", MODULE, e)
        return InputValidationError.exit_code
    return 0
