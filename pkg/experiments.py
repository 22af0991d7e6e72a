"""
Experiment drivers for the axisymmetric Hall-MHD lab.

This module owns the scientific configuration (a plain-text ``key = value``
document with ``[section]`` headers), the single-run driver, the parameter sweep
over eps or nu, the lemma bench driver, the manufactured-solution convergence
study and the trend summary of a sweep.

Every driver writes into one output directory: the effective configuration echo,
its CSV files and a summary text file, so each experiment can be reproduced from
its directory alone.
"""

import csv
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import version
from bench import (
    FAMILY_KINDS,
    RatioReport,
    SampleFamily,
    summarize_reports,
    verify_biot_savart,
    verify_gn,
    verify_grad_ur_over_r,
    verify_heat_maxreg,
    verify_heat_smoothing,
    verify_nu_scaling,
    write_bench_csv,
)
from diagnostics import write_csv
from grid_fields import Grid, make_grid
from manufactured import manufactured_solution
from solver import BumpShape, InitialDataSpec, PhysicalParams, RunControl, RunOutcome, checkpoint_load, run
from src.core import (
    BenchError,
    ConfigurationError,
    GridError,
    SimulationError,
    get_logger,
    handle_simulation_operations,
    log_run_metrics,
    safe_experiment,
)

logger = get_logger(__name__, "experiments")

CONFIG_FILE = "config.txt"
DIAGNOSTICS_FILE = "diagnostics.csv"
SUMMARY_FILE = "summary.txt"
CHECKPOINT_FILE = "checkpoint.axhm"

# A comment starts at "#" at line start or after whitespace
COMMENT_PATTERN = re.compile(r"(?:^|\s)#")

SWEEP_PARAMETERS = ("eps", "nu")

VERDICT_PLATEAU = "plateau"
VERDICT_MONOTONE = "monotone-consistent"
VERDICT_VIOLATED = "violated"


@dataclass(frozen=True)
class GridConfig:
    n_r: int = 256
    n_z: int = 256
    r_max: float = 8.0
    z_len: float = 16.0

    def __post_init__(self):
        try:
            self.to_grid()
        except GridError as e:
            raise ConfigurationError(str(e)) from e

    def to_grid(self) -> Grid:
        return make_grid(self.n_r, self.n_z, self.r_max, self.z_len)


@dataclass(frozen=True)
class InitialConfig:
    eps: float = 1e-3
    h_amp: float = 1.0
    omega_amp: float = 0.5
    swirl_shape: str = "gaussian"
    h_shape: str = "gaussian"
    omega_shape: str = "gaussian"
    swirl_width: float = 1.0
    h_width: float = 1.0
    omega_width: float = 1.0
    center_z: Optional[float] = None
    ring_radius: float = 2.0

    def __post_init__(self):
        self.to_spec()

    def _shape(self, kind: str, width: float) -> BumpShape:
        return BumpShape(kind=kind, width=width, center_z=self.center_z, ring_radius=self.ring_radius)

    def to_spec(self) -> InitialDataSpec:
        return InitialDataSpec(
            eps=self.eps,
            swirl_shape=self._shape(self.swirl_shape, self.swirl_width),
            h_shape=self._shape(self.h_shape, self.h_width),
            omega_shape=self._shape(self.omega_shape, self.omega_width),
            h_amp=self.h_amp,
            omega_amp=self.omega_amp,
        )


@dataclass(frozen=True)
class ControlConfig:
    t_end: float = 1.0
    cfl_safety: float = 0.4
    dt_min: float = 1e-9
    record_every: int = 10
    norm_cap: float = 1e6
    checkpoint_every: int = 0
    output_dir: str = "output"
    seed: int = 0
    stop_on_bootstrap: bool = True

    def __post_init__(self):
        if not self.output_dir:
            raise ConfigurationError("output_dir must not be empty")
        self.to_run_control(self.output_dir)

    def to_run_control(self, out_dir: str) -> RunControl:
        checkpoint_path = os.path.join(out_dir, CHECKPOINT_FILE) if self.checkpoint_every > 0 else None
        return RunControl(
            t_end=self.t_end,
            cfl_safety=self.cfl_safety,
            dt_min=self.dt_min,
            record_every=self.record_every,
            norm_cap=self.norm_cap,
            checkpoint_every=self.checkpoint_every,
            checkpoint_path=checkpoint_path,
            stop_on_bootstrap=self.stop_on_bootstrap,
        )


@dataclass(frozen=True)
class BenchConfig:
    resolutions: Tuple[int, ...] = (128, 256)
    count: int = 8
    family: str = "random_bandlimited"
    heat_time: float = 0.05
    nu_values: Tuple[float, ...] = (1.0, 0.1, 0.01)

    def __post_init__(self):
        if len(self.resolutions) != 2 or self.resolutions[0] >= self.resolutions[1]:
            raise ConfigurationError("resolutions must be a coarse,fine pair with coarse < fine")
        if any(n < 8 for n in self.resolutions):
            raise ConfigurationError("resolutions must be ≥ 8")
        if self.count < 1:
            raise ConfigurationError("count must be ≥ 1")
        if self.family not in FAMILY_KINDS:
            raise ConfigurationError(f"family must be one of {', '.join(FAMILY_KINDS)}, got {self.family!r}")
        if not self.heat_time > 0:
            raise ConfigurationError("heat_time must be > 0")
        if not self.nu_values or any(not nu > 0 for nu in self.nu_values):
            raise ConfigurationError("nu_values must be > 0")


@dataclass(frozen=True)
class RunConfig:
    """Effective configuration of one experiment, one dataclass per section."""

    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysicalParams = field(default_factory=PhysicalParams)
    initial: InitialConfig = field(default_factory=InitialConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)


SECTIONS = {
    "grid": GridConfig,
    "physics": PhysicalParams,
    "initial": InitialConfig,
    "control": ControlConfig,
    "bench": BenchConfig,
}


def _strip_quotes(text: str) -> str:
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _convert_scalar(text: str, kind: type) -> Any:
    if kind is bool:
        lowered = text.lower()
        if lowered not in ("true", "false"):
            raise ValueError(f"expected true or false, got {text!r}")
        return lowered == "true"
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return _strip_quotes(text)


def _convert_value(text: str, default: Any) -> Any:
    """Convert raw text to the type of a section default."""
    if default is None:
        return None if text.lower() == "none" else float(text)
    if isinstance(default, tuple):
        item_kind = type(default[0])
        items = [item.strip() for item in text.split(",") if item.strip()]
        if not items:
            raise ValueError("expected a comma-separated list")
        return tuple(_convert_scalar(item, item_kind) for item in items)
    return _convert_scalar(text, type(default))


def parse_config(text: str) -> RunConfig:
    """
    Parse a configuration document.

    Lines are ``[section]`` headers or ``key = value`` pairs; ``section.key =
    value`` is accepted anywhere. ``#`` starts a comment at line start or after
    whitespace, so values such as ``runs/#1`` keep their ``#``. Missing keys
    take their defaults.

    Args:
        text: Configuration document

    Returns:
        Validated RunConfig

    Raises:
        ConfigurationError: With the line number of the first offending line
    """
    defaults = RunConfig()
    section: Optional[str] = None
    seen: Dict[Tuple[str, str], int] = {}
    values: Dict[str, Dict[str, Any]] = {name: {} for name in SECTIONS}

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = COMMENT_PATTERN.split(raw, maxsplit=1)[0].strip()
        if not line:
            continue

        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigurationError(f"malformed section header {line!r}", line_number)
            name = line[1:-1].strip()
            if name not in SECTIONS:
                raise ConfigurationError(f"unknown section [{name}]", line_number)
            section = name
            continue

        if "=" not in line:
            raise ConfigurationError(f"expected 'key = value', got {line!r}", line_number)
        key, value_text = (part.strip() for part in line.split("=", 1))
        if "." in key:
            target, key = key.split(".", 1)
            if target not in SECTIONS:
                raise ConfigurationError(f"unknown section {target!r}", line_number)
        elif section is None:
            raise ConfigurationError(f"key {key!r} outside of a section", line_number)
        else:
            target = section

        block = getattr(defaults, target)
        if key not in {f.name for f in fields(block)}:
            raise ConfigurationError(f"unknown key {target}.{key}", line_number)
        if (target, key) in seen:
            raise ConfigurationError(
                f"duplicate key {target}.{key} (first set on line {seen[(target, key)]})", line_number
            )
        seen[(target, key)] = line_number

        try:
            converted = _convert_value(value_text, getattr(block, key))
        except ValueError as e:
            raise ConfigurationError(f"invalid value for {target}.{key}: {e}", line_number) from e

        try:
            replace(block, **{key: converted})
        except (ConfigurationError, BenchError) as e:
            reason = getattr(e, "reason", str(e))
            raise ConfigurationError(reason, line_number) from e
        values[target][key] = converted

    try:
        return RunConfig(**{name: replace(getattr(defaults, name), **values[name]) for name in SECTIONS})
    except ConfigurationError as e:
        culprit = max((seen[(name, key)] for name in SECTIONS for key in values[name]), default=None)
        raise ConfigurationError(e.reason, culprit) from e


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format_value(item) for item in value)
    return str(value)


def format_config(config: RunConfig) -> str:
    """Echo a configuration in the parse_config format; parse_config(format_config(c)) == c."""
    lines = [f"# axisym-hall-lab {version.get_version()} effective configuration"]
    for name in SECTIONS:
        block = getattr(config, name)
        lines.append("")
        lines.append(f"[{name}]")
        for item in fields(block):
            lines.append(f"{item.name} = {_format_value(getattr(block, item.name))}")
    return "\n".join(lines) + "\n"


def load_config(path: Optional[str]) -> RunConfig:
    """Read a configuration file; None gives the defaults."""
    if path is None:
        return RunConfig()
    with open(path, encoding="utf-8") as handle:
        return parse_config(handle.read())


@dataclass
class RunResult:
    """Outcome of run_experiment with its output files."""

    outcome: RunOutcome
    e0: float
    out_dir: str
    csv_path: str


def _run_summary(config: RunConfig, outcome: RunOutcome, e0: float) -> str:
    verdict = outcome.verdict
    lines = [
        f"axisym-hall-lab {version.get_version()} run summary",
        f"grid: {config.grid.to_grid().describe()}",
        f"E0: {e0!r}",
        f"steps: {outcome.steps}",
        f"final t: {outcome.state.t!r}",
        f"reason: {outcome.reason.value}",
        f"t_proxy: {verdict.t_proxy!r} ({verdict.reason.value})",
        f"records: {len(outcome.history)}",
    ]
    return "\n".join(lines) + "\n"


@handle_simulation_operations("experiment run", component="experiments")
def run_experiment(config: RunConfig, out_dir: str, resume_from: Optional[str] = None) -> RunResult:
    """
    Run one configuration and write config.txt, diagnostics.csv and summary.txt.

    Args:
        config: Effective configuration
        out_dir: Output directory (created if missing)
        resume_from: Optional checkpoint to continue from

    Returns:
        RunResult

    Raises:
        OSError: If an output file cannot be written
        CheckpointError: If the checkpoint cannot be resumed
    """
    os.makedirs(out_dir, exist_ok=True)
    grid = config.grid.to_grid()
    control = config.control.to_run_control(out_dir)

    with open(os.path.join(out_dir, CONFIG_FILE), "w", encoding="utf-8") as handle:
        handle.write(format_config(config))

    initial_state = checkpoint_load(resume_from, expected_grid=grid) if resume_from else None
    outcome = run(grid, config.initial.to_spec(), config.physics, control, initial_state=initial_state)

    e0 = outcome.history[0].h3_u + outcome.history[0].h3_h if outcome.history else math.nan
    csv_path = os.path.join(out_dir, DIAGNOSTICS_FILE)
    write_csv(outcome.history, csv_path)
    with open(os.path.join(out_dir, SUMMARY_FILE), "w", encoding="utf-8") as handle:
        handle.write(_run_summary(config, outcome, e0))
    return RunResult(outcome=outcome, e0=e0, out_dir=out_dir, csv_path=csv_path)


def with_parameter(config: RunConfig, param: str, value: float) -> RunConfig:
    """Copy of config with eps or nu replaced."""
    if param == "eps":
        return replace(config, initial=replace(config.initial, eps=value))
    if param == "nu":
        return replace(config, physics=replace(config.physics, nu=value))
    raise ConfigurationError(f"param must be one of {', '.join(SWEEP_PARAMETERS)}, got {param!r}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    t_proxy: float
    reason: str
    e0: float
    csv_path: str
    error: Optional[str] = None


@dataclass
class SweepResult:
    """Rows of a sweep sorted by parameter value, with the monotonicity verdict."""

    param: str
    rows: List[SweepRow]
    verdict: str

    @property
    def csv_paths(self) -> List[str]:
        return [row.csv_path for row in self.rows]


def _sweep_row(task: Tuple[RunConfig, str, float, str]) -> SweepRow:
    config, param, value, row_dir = task
    csv_path = os.path.join(row_dir, DIAGNOSTICS_FILE)
    result, error = safe_experiment(run_experiment, with_parameter(config, param, value), row_dir)
    if error is not None:
        return SweepRow(value, math.nan, "error", math.nan, csv_path, f"{error.__class__.__name__}: {error}")
    verdict = result.outcome.verdict
    return SweepRow(value, verdict.t_proxy, result.outcome.reason.value, result.e0, result.csv_path)


def _expected_direction(param: str) -> int:
    """+1 if t_proxy should not decrease as the parameter decreases, -1 if it should not increase."""
    return 1 if param == "eps" else -1


def monotone_verdict(param: str, rows: Sequence[SweepRow]) -> str:
    """
    Verdict on t_proxy along decreasing parameter values.

    For eps, t_proxy should be non-decreasing as eps decreases; for nu it should be
    non-increasing (report only). Equal values are a plateau. Error rows are ignored.
    """
    usable = sorted((row for row in rows if row.error is None), key=lambda row: row.value, reverse=True)
    proxies = [row.t_proxy for row in usable]
    if len(proxies) < 2:
        return VERDICT_MONOTONE
    if all(proxy == proxies[0] for proxy in proxies):
        return VERDICT_PLATEAU
    direction = _expected_direction(param)
    steps = [direction * (after - before) for before, after in zip(proxies, proxies[1:])]
    return VERDICT_MONOTONE if all(step >= 0 for step in steps) else VERDICT_VIOLATED


@handle_simulation_operations("parameter sweep", component="experiments")
def sweep(base: RunConfig, param: str, values: Sequence[float], out_dir: str, workers: int = 1) -> SweepResult:
    """
    Run one configuration per parameter value.

    Each row writes into ``<out_dir>/<param>_<index>`` with index in sorted order.
    Failing rows are recorded with their error and never abort the sweep.

    Args:
        base: Base configuration
        param: "eps" or "nu"
        values: Parameter values (eps >= 0, nu > 0)
        out_dir: Sweep output directory
        workers: Process count; rows run sequentially when 1

    Returns:
        SweepResult sorted by parameter value

    Raises:
        ConfigurationError: If the parameter or a value is invalid
    """
    start_time = time.time()
    if param not in SWEEP_PARAMETERS:
        raise ConfigurationError(f"param must be one of {', '.join(SWEEP_PARAMETERS)}, got {param!r}")
    ordered = sorted(float(value) for value in values)
    if not ordered:
        raise ConfigurationError("values must not be empty")
    if param == "eps" and ordered[0] < 0:
        raise ConfigurationError("eps values must be ≥ 0")
    if param == "nu" and not ordered[0] > 0:
        raise ConfigurationError("nu values must be > 0")
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigurationError(f"workers must be a positive integer, got {workers!r}")

    os.makedirs(out_dir, exist_ok=True)
    tasks = [(base, param, value, os.path.join(out_dir, f"{param}_{index}")) for index, value in enumerate(ordered)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(task) for task in tasks]

    result = SweepResult(param=param, rows=rows, verdict=monotone_verdict(param, rows))
    failures = sum(1 for row in rows if row.error is not None)
    log_run_metrics(
        logger,
        "parameter sweep",
        time.time() - start_time,
        {"param": param, "rows": len(rows), "failures": failures, "verdict": result.verdict},
        success=failures == 0,
    )
    return result


def write_sweep_csv(result: SweepResult, path: str) -> None:
    """Write value,t_proxy,reason,e0,csv_path rows."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["value", "t_proxy", "reason", "e0", "csv_path"])
        for row in result.rows:
            writer.writerow([repr(row.value), repr(row.t_proxy), row.reason, repr(row.e0), row.csv_path])


def quadruple_log_shape(eps: float) -> Optional[float]:
    """(log log log log 1/eps)^{3/5}, or None where an inner logarithm is not positive."""
    if not 0 < eps < 1:
        return None
    value = 1.0 / eps
    for _ in range(4):
        if not value > 0:
            return None
        value = math.log(value)
    if not value > 0:
        return None
    return value**0.6


def resistive_shape(nu: float) -> float:
    """(1 + 1/nu)^{-3/5}."""
    return (1.0 + 1.0 / nu) ** -0.6


@dataclass
class TrendSummary:
    """Report-only trend of a sweep: verdict, ratio table and continuum lower-bound shapes."""

    param: str
    verdict: str
    values: List[float]
    t_proxies: List[float]
    ratios: List[Optional[float]]
    lower_bound_shapes: List[Optional[float]]
    text: str = ""


def fit_trend(result: SweepResult) -> TrendSummary:
    """
    Summarize a sweep along decreasing parameter values.

    The ratio table holds t_proxy(value_{k+1}) / t_proxy(value_k). The lower-bound
    shapes describe the continuum lifespan guarantee, a different object from the
    discrete breakdown proxy, and are labelled so.

    Raises:
        SimulationError: If fewer than 2 usable rows exist
    """
    usable = sorted((row for row in result.rows if row.error is None), key=lambda row: row.value, reverse=True)
    if len(usable) < 2:
        raise SimulationError("need ≥ 2 rows")

    values = [row.value for row in usable]
    proxies = [row.t_proxy for row in usable]
    ratios = [after / before if before > 0 else None for before, after in zip(proxies, proxies[1:])]

    if result.param == "eps":
        shapes = [quadruple_log_shape(value) for value in values]
    else:
        raw = [resistive_shape(value) for value in values]
        shapes = [shape / raw[0] for shape in raw]

    verdict = monotone_verdict(result.param, usable)
    lines = [
        f"axisym-hall-lab {version.get_version()} trend summary",
        f"parameter: {result.param} (rows ordered by decreasing value)",
        f"verdict: {verdict}",
        f"t_proxy range: [{min(proxies)!r}, {max(proxies)!r}]",
        "",
        "value,t_proxy,ratio_to_previous,lower_bound_shape",
    ]
    for index, (value, proxy, shape) in enumerate(zip(values, proxies, shapes)):
        ratio = ratios[index - 1] if index > 0 else None
        lines.append(
            f"{value!r},{proxy!r},{'' if ratio is None else repr(ratio)},"
            f"{'undefined' if shape is None else repr(shape)}"
        )
    lines.append("")
    lines.append(
        "lower_bound_shape is the continuum lifespan lower bound of the smooth solution, "
        "a different object from the discrete breakdown proxy; it is not fitted."
    )
    failures = [row for row in result.rows if row.error is not None]
    for row in failures:
        lines.append(f"failed row {row.value!r}: {row.error}")
    return TrendSummary(
        param=result.param,
        verdict=verdict,
        values=values,
        t_proxies=proxies,
        ratios=ratios,
        lower_bound_shapes=shapes,
        text="\n".join(lines) + "\n",
    )


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    h: float
    error: float
    order: float


@dataclass
class ConvergenceTable:
    case: str
    rows: List[ConvergenceRow]

    @property
    def orders(self) -> List[float]:
        return [row.order for row in self.rows[1:]]


def observed_orders(errors: Sequence[float]) -> List[float]:
    """log2(e_h / e_{h/2}) for consecutive errors; nan where an error vanishes."""
    orders = [math.nan]
    for coarse, fine in zip(errors, errors[1:]):
        orders.append(math.log2(coarse / fine) if coarse > 0 and fine > 0 else math.nan)
    return orders


@handle_simulation_operations("convergence study", component="experiments")
def convergence_study(
    case: str,
    resolutions: Sequence[int],
    params: Optional[PhysicalParams] = None,
    t_final: float = 0.01,
    r_max: float = 4.0,
    z_len: float = 8.0,
    cfl_safety: float = 0.4,
) -> ConvergenceTable:
    """
    Sup-norm error of a manufactured solution at t_final over doubling resolutions.

    Args:
        case: heat_kernel, coupled or zero
        resolutions: At least 3 cell counts per direction, each double the last
        params: Physical parameters (defaults to all ones)
        t_final: Final time
        r_max, z_len: Domain
        cfl_safety: Safety factor of the time step

    Returns:
        ConvergenceTable with observed orders computed from the table

    Raises:
        ConfigurationError: If the resolutions or the case are invalid
    """
    start_time = time.time()
    resolutions = list(resolutions)
    if len(resolutions) < 3:
        raise ConfigurationError("convergence study needs ≥ 3 resolutions")
    if any(fine != 2 * coarse for coarse, fine in zip(resolutions, resolutions[1:])):
        raise ConfigurationError(f"resolutions must double, got {resolutions!r}")

    solution = manufactured_solution(case, params)
    control = RunControl(
        t_end=t_final,
        cfl_safety=cfl_safety,
        dt_min=0.0,
        record_every=10**9,
        norm_cap=1e300,
        stop_on_bootstrap=False,
    )

    errors: List[float] = []
    spacings: List[float] = []
    for n in resolutions:
        grid = make_grid(n, n, r_max, z_len)
        outcome = run(
            grid,
            InitialDataSpec(),
            solution.params,
            control,
            forcing=solution.forcing_for(grid),
            initial_state=solution.state_at(grid, 0.0),
        )
        if outcome.reason.value != "completed":
            raise SimulationError(f"manufactured run on {grid.describe()} ended with {outcome.reason.value}")
        errors.append(solution.error(outcome.state))
        spacings.append(grid.h_r)
        logger.info(f"{case} at n={n}: sup error {errors[-1]:.6e}")

    rows = [
        ConvergenceRow(n, h, error, order)
        for n, h, error, order in zip(resolutions, spacings, errors, observed_orders(errors))
    ]
    log_run_metrics(
        logger,
        "convergence study",
        time.time() - start_time,
        {"case": case, "resolutions": resolutions, "orders": [f"{row.order:.3f}" for row in rows[1:]]},
    )
    return ConvergenceTable(case=case, rows=rows)


def write_convergence_csv(table: ConvergenceTable, path: str) -> None:
    """Write n,h,error,order rows."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["n", "h", "error", "order"])
        for row in table.rows:
            writer.writerow([row.n, repr(row.h), repr(row.error), repr(row.order)])


def _bench_checks(config: RunConfig) -> List[Tuple[str, Any, Dict[str, Any]]]:
    bench = config.bench
    family = SampleFamily(kind=bench.family, count=bench.count, seed=config.control.seed)
    domain = {"resolutions": bench.resolutions, "r_max": config.grid.r_max, "z_len": config.grid.z_len}
    checks: List[Tuple[str, Any, Dict[str, Any]]] = [
        ("sobolev", verify_gn, dict(family=family, j=0, m=1, p=6.0, q=2.0, r_exp=2.0, alpha=1.0, **domain)),
        (
            "gagliardo_nirenberg",
            verify_gn,
            dict(family=family, j=1, m=2, p=3.0, q=2.0, r_exp=2.0, alpha=0.75, **domain),
        ),
    ]
    for p in (2.0, 3.0, 6.0):
        checks.append((f"biot_savart_p{p:g}", verify_biot_savart, dict(family=family, p=p, **domain)))
    for p in (2.0, 6.0):
        checks.append((f"grad_ur_over_r_p{p:g}", verify_grad_ur_over_r, dict(family=family, p=p, **domain)))
    checks.append(("heat_maxreg", verify_heat_maxreg, dict(family=family, t_final=bench.heat_time, **domain)))
    for source in ("initial", "forcing"):
        scaling = dict(family=family, nu_values=bench.nu_values, t_final=bench.heat_time, source=source, **domain)
        checks.append((f"nu_scaling_{source}", verify_nu_scaling, scaling))
    for order in (0, 1, 2):
        smoothing = dict(family=family, order=order, t=bench.heat_time, **domain)
        checks.append((f"heat_smoothing_k{order}", verify_heat_smoothing, smoothing))
    return checks


@handle_simulation_operations("lemma bench", component="experiments")
def run_bench(config: RunConfig, out_dir: str) -> List[RatioReport]:
    """
    Run every inequality check with the [bench] settings.

    Writes config.txt, bench.csv and summary.txt; a failing check is listed in the
    summary and never aborts the others.
    """
    start_time = time.time()
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, CONFIG_FILE), "w", encoding="utf-8") as handle:
        handle.write(format_config(config))

    reports: List[RatioReport] = []
    failures: List[str] = []
    for name, check, kwargs in _bench_checks(config):
        report, error = safe_experiment(check, **kwargs)
        if error is not None:
            failures.append(f"{name}: {error.__class__.__name__}: {error}")
            continue
        reports.append(report)

    write_bench_csv(reports, os.path.join(out_dir, "bench.csv"))
    summary = summarize_reports(reports)
    if failures:
        summary += "\n" + "\n".join(f"failed {line}" for line in failures) + "\n"
    with open(os.path.join(out_dir, SUMMARY_FILE), "w", encoding="utf-8") as handle:
        handle.write(summary)

    log_run_metrics(
        logger,
        "lemma bench",
        time.time() - start_time,
        {"checks": len(reports), "failures": len(failures)},
        success=not failures,
    )
    return reports
