"""
Numerical bench for the functional inequalities used by the a-priori chain.

Each check evaluates a left-hand side and a right-hand side on sampled smooth
fields at two resolutions and reports the per-sample ratios LHS / RHS. The
inequalities are one-sided: the bench measures constants and their drift under
refinement, it never certifies a sharp value.

Sample families are reproducible from their seed. Draws are made once per family
and evaluated on every grid, so the coarse and fine ratios describe the same
functions.
"""

import csv
import math
import statistics
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

import version
from grid_fields import Grid, Parity, ScalarField, gradient_magnitude, lp_norm, make_grid
from operators import hessian_magnitude, laplacian_scalar, meridian_gradient_magnitude, meridian_velocity
from solver import ssp_rk3
from src.core import BenchError, get_logger

logger = get_logger(__name__, "bench")

FAMILY_KINDS = ("gaussian_bumps", "random_bandlimited", "vortex_rings")

EXPONENT_TOLERANCE = 1e-12

# Stable explicit heat step: safety * h_min^2 / (4 nu C_LAP)
HEAT_SAFETY = 0.4
HEAT_C_LAP = 5.0

Profile = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SampleFamily:
    """Reproducible family of smooth samples, even in r and decaying in the domain.

    Ranges are (low, high) pairs; center offsets are measured from the domain center.
    """

    kind: str = "gaussian_bumps"
    count: int = 8
    seed: int = 0
    width_range: Tuple[float, float] = (0.6, 1.2)
    center_range: Tuple[float, float] = (-1.0, 1.0)
    ring_radius_range: Tuple[float, float] = (1.0, 2.0)
    max_wavenumber: int = 3

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise BenchError(f"family kind must be one of {', '.join(FAMILY_KINDS)}, got {self.kind!r}")
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 1:
            raise BenchError(f"count must be a positive integer, got {self.count!r}")
        low, high = self.width_range
        if not 0 < low <= high:
            raise BenchError(f"width range must satisfy 0 < low <= high, got {self.width_range!r}")

    def profiles(self) -> List[Profile]:
        """Draw count profiles f(r, z_tilde) from the seed."""
        rng = np.random.default_rng(self.seed)
        profiles: List[Profile] = []
        for _ in range(self.count):
            amplitude = rng.uniform(0.5, 1.5)
            width = rng.uniform(*self.width_range)
            offset = rng.uniform(*self.center_range)
            if self.kind == "gaussian_bumps":
                profiles.append(_gaussian_profile(amplitude, width, offset))
            elif self.kind == "vortex_rings":
                radius = rng.uniform(*self.ring_radius_range)
                profiles.append(_ring_profile(amplitude, 0.6 * width, offset, radius))
            else:
                modes = rng.integers(0, self.max_wavenumber + 1, size=(3, 2))
                weights = rng.uniform(-0.5, 0.5, size=3)
                phases = rng.uniform(0.0, 2.0 * math.pi, size=3)
                profiles.append(_bandlimited_profile(amplitude, width, offset, modes, weights, phases))
        return profiles

    def samples(self, grid: Grid, odd: bool = False) -> List[np.ndarray]:
        """Evaluate the family on a grid; odd samples are r times the even ones."""
        r_mesh, z_mesh = grid.mesh()
        z_tilde = z_mesh - grid.z_center
        evaluated = [profile(r_mesh, z_tilde) for profile in self.profiles()]
        if odd:
            return [r_mesh * values for values in evaluated]
        return evaluated


def _gaussian_profile(amplitude: float, width: float, offset: float) -> Profile:
    def profile(r, z):
        return amplitude * np.exp(-(r**2 + (z - offset) ** 2) / width**2)

    return profile


def _ring_profile(amplitude: float, width: float, offset: float, radius: float) -> Profile:
    def profile(r, z):
        axial = (z - offset) ** 2
        return amplitude * (
            np.exp(-((r - radius) ** 2 + axial) / width**2) + np.exp(-((r + radius) ** 2 + axial) / width**2)
        )

    return profile


def _bandlimited_profile(
    amplitude: float, width: float, offset: float, modes: np.ndarray, weights: np.ndarray, phases: np.ndarray
) -> Profile:
    def profile(r, z):
        z_shift = z - offset
        envelope = np.exp(-(r**2 + z_shift**2) / width**2)
        oscillation = np.ones_like(r)
        for (k_r, k_z), weight, phase in zip(modes, weights, phases):
            oscillation = oscillation + weight * np.cos(k_r * r) * np.cos(k_z * z_shift + phase)
        return amplitude * envelope * oscillation

    return profile


@dataclass
class RatioReport:
    """Measured LHS / RHS ratios of one inequality at a coarse and a fine resolution."""

    lemma_id: str
    ratios: List[float]
    sample_ids: List[int]
    max_ratio: float
    median_ratio: float
    resolutions: Tuple[int, int]
    coarse_max_ratio: float
    stability: float
    skipped: List[str] = field(default_factory=list)
    per_parameter: Dict[str, float] = field(default_factory=dict)
    spread: Optional[float] = None
    dt_stability: Optional[float] = None

    @property
    def is_empty(self) -> bool:
        return not self.ratios


def _relative_change(coarse: float, fine: float) -> float:
    if coarse == 0:
        return 0.0 if fine == 0 else math.inf
    return abs(fine - coarse) / abs(coarse)


def _measure_family(
    family: SampleFamily,
    grid: Grid,
    measure: Callable[[Grid, np.ndarray], Tuple[float, float]],
    odd: bool,
) -> Tuple[List[float], List[int], List[str]]:
    ratios: List[float] = []
    sample_ids: List[int] = []
    skipped: List[str] = []
    for index, values in enumerate(family.samples(grid, odd=odd)):
        lhs, rhs = measure(grid, values)
        if rhs == 0:
            skipped.append(f"sample {index}: zero right-hand side")
            continue
        ratio = lhs / rhs
        if not math.isfinite(ratio):
            raise BenchError(f"non-finite ratio for sample {index} on {grid.describe()}")
        ratios.append(ratio)
        sample_ids.append(index)
    return ratios, sample_ids, skipped


def _bench_grids(resolutions: Sequence[int], r_max: float, z_len: float) -> Tuple[Grid, Grid]:
    if len(resolutions) != 2:
        raise BenchError(f"resolutions must be a (coarse, fine) pair, got {list(resolutions)!r}")
    coarse, fine = resolutions
    return make_grid(coarse, coarse, r_max, z_len), make_grid(fine, fine, r_max, z_len)


def _build_report(
    lemma_id: str,
    family: SampleFamily,
    measure: Callable[[Grid, np.ndarray], Tuple[float, float]],
    resolutions: Sequence[int],
    r_max: float,
    z_len: float,
    odd: bool = False,
) -> RatioReport:
    coarse_grid, fine_grid = _bench_grids(resolutions, r_max, z_len)
    coarse_ratios, _, _ = _measure_family(family, coarse_grid, measure, odd)
    ratios, sample_ids, skipped = _measure_family(family, fine_grid, measure, odd)

    max_ratio = max(ratios, default=0.0)
    coarse_max = max(coarse_ratios, default=0.0)
    report = RatioReport(
        lemma_id=lemma_id,
        ratios=ratios,
        sample_ids=sample_ids,
        max_ratio=max_ratio,
        median_ratio=statistics.median(ratios) if ratios else 0.0,
        resolutions=(coarse_grid.n_r, fine_grid.n_r),
        coarse_max_ratio=coarse_max,
        stability=_relative_change(coarse_max, max_ratio),
        skipped=skipped,
    )
    logger.info(
        f"{lemma_id}: max ratio {report.max_ratio:.6g}, stability {report.stability:.3g} "
        f"over {len(ratios)} samples ({len(skipped)} skipped)"
    )
    return report


def _reciprocal(exponent: float) -> float:
    return 0.0 if exponent == math.inf else 1.0 / exponent


def _derivative_magnitude(field_values: ScalarField, order: int) -> ScalarField:
    if order == 0:
        return field_values.with_values(np.abs(field_values.values))
    if order == 1:
        return gradient_magnitude(field_values)
    return hessian_magnitude(field_values)


def check_gn_exponents(j: int, m: int, p: float, q: float, r_exp: float, alpha: float) -> float:
    """
    Validate the exponents of the interpolation inequality.

    Requires 1/p = j/3 + alpha (1/r - m/3) + (1 - alpha)/q, j/m <= alpha <= 1,
    j < m <= 2, and rejects the excluded cases (j = 0, m r < 3, q = inf) and
    (1 < r < inf with m - j - 3/r a non-negative integer).

    Returns:
        The (absolute) residual of the exponent relation

    Raises:
        BenchError: Naming the violated condition
    """
    for name, value in (("j", j), ("m", m)):
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 2:
            raise BenchError(f"unsupported derivative order {name}={value!r}; orders 0 to 2 are implemented")
    if not j < m:
        raise BenchError(f"need j < m, got j={j}, m={m}")
    for name, value in (("p", p), ("q", q), ("r", r_exp)):
        if not value >= 1:
            raise BenchError(f"{name} must be in [1, inf], got {value!r}")
    if not j / m <= alpha <= 1:
        raise BenchError(f"alpha must lie in [j/m, 1], got {alpha!r}")

    residual = _reciprocal(p) - (
        j / 3.0 + alpha * (_reciprocal(r_exp) - m / 3.0) + (1.0 - alpha) * _reciprocal(q)
    )
    if abs(residual) > EXPONENT_TOLERANCE:
        raise BenchError(f"exponent relation violated: residual {residual:.3e}")

    if j == 0 and m * r_exp < 3 and q == math.inf:
        raise BenchError("excluded case: j = 0, m r < 3 and q = inf")
    if 1 < r_exp < math.inf:
        gap = m - j - 3.0 / r_exp
        if gap >= -EXPONENT_TOLERANCE and abs(gap - round(gap)) <= EXPONENT_TOLERANCE:
            raise BenchError(f"excluded case: m - j - 3/r = {gap:g} is a non-negative integer")
    return abs(residual)


def verify_gn(
    family: SampleFamily,
    j: int,
    m: int,
    p: float,
    q: float,
    r_exp: float,
    alpha: float,
    resolutions: Sequence[int] = (64, 128),
    r_max: float = 6.0,
    z_len: float = 12.0,
) -> RatioReport:
    """
    Interpolation inequality ||grad^j f||_p <= C ||grad^m f||_r^alpha ||f||_q^(1 - alpha).

    Args:
        family: Samples f (even scalars)
        j, m: Derivative orders, j < m <= 2
        p, q, r_exp: Lebesgue exponents (math.inf allowed)
        alpha: Interpolation weight
        resolutions: (coarse, fine) cell counts per direction
        r_max, z_len: Bench domain

    Returns:
        RatioReport with ratio LHS / RHS per sample

    Raises:
        BenchError: If the exponents violate the relation or hit an excluded case
    """
    check_gn_exponents(j, m, p, q, r_exp, alpha)

    def measure(grid: Grid, values: np.ndarray) -> Tuple[float, float]:
        sample = ScalarField(grid, values, Parity.EVEN)
        lhs = lp_norm(_derivative_magnitude(sample, j), p)
        rhs = lp_norm(_derivative_magnitude(sample, m), r_exp) ** alpha * lp_norm(sample, q) ** (1.0 - alpha)
        return lhs, rhs

    lemma_id = f"gagliardo_nirenberg_j{j}_m{m}_p{p:g}_q{q:g}_r{r_exp:g}"
    return _build_report(lemma_id, family, measure, resolutions, r_max, z_len)


def verify_biot_savart(
    family: SampleFamily,
    p: float,
    resolutions: Sequence[int] = (64, 128),
    r_max: float = 6.0,
    z_len: float = 12.0,
) -> RatioReport:
    """
    Biot-Savart bound ||grad u||_p <= C_p ||omega_theta||_p for u recovered from omega_theta.

    Samples are odd (r times the family). At p = 2 the ratio is 1 up to
    discretization and truncation error.
    """
    if not 1 < p < math.inf:
        raise BenchError(f"p must be in (1, inf), got {p!r}")

    def measure(grid: Grid, values: np.ndarray) -> Tuple[float, float]:
        omega_theta = ScalarField(grid, values, Parity.ODD)
        b = meridian_velocity(omega_theta)
        return lp_norm(meridian_gradient_magnitude(b), p), lp_norm(omega_theta, p)

    return _build_report(f"biot_savart_p{p:g}", family, measure, resolutions, r_max, z_len, odd=True)


def verify_grad_ur_over_r(
    family: SampleFamily,
    p: float = 2.0,
    resolutions: Sequence[int] = (64, 128),
    r_max: float = 6.0,
    z_len: float = 12.0,
) -> RatioReport:
    """Bound ||grad(u_r / r)||_p <= C ||Omega||_p with u_r recovered from omega_theta = r Omega."""
    if not 1 < p < math.inf:
        raise BenchError(f"p must be in (1, inf), got {p!r}")

    def measure(grid: Grid, values: np.ndarray) -> Tuple[float, float]:
        big_omega = ScalarField(grid, values, Parity.EVEN)
        b = meridian_velocity(ScalarField(grid, grid.r_column * values, Parity.ODD))
        ratio_field = ScalarField(grid, b.u_r.values / grid.r_column, Parity.EVEN)
        return lp_norm(gradient_magnitude(ratio_field), p), lp_norm(big_omega, p)

    return _build_report(f"grad_ur_over_r_p{p:g}", family, measure, resolutions, r_max, z_len)


def heat_time_step(grid: Grid, nu: float) -> float:
    """Stable explicit step for v_t = nu Delta v on this grid."""
    if not nu > 0:
        raise BenchError(f"nu must be positive, got {nu!r}")
    return HEAT_SAFETY * grid.h_min**2 / (4.0 * nu * HEAT_C_LAP)


def integrate_heat(
    initial: ScalarField,
    forcing: Optional[ScalarField],
    nu: float,
    t_final: float,
    dt: Optional[float] = None,
) -> List[Tuple[float, ScalarField]]:
    """
    Integrate v_t = nu Delta v + g with SSP-RK3 and return every step.

    Args:
        initial: Even initial field v_0
        forcing: Even time-independent forcing g, or None
        nu: Diffusivity
        t_final: Final time
        dt: Largest allowed step (defaults to the stable explicit step)

    Returns:
        List of (t, v(t)) snapshots including t = 0 and t = t_final
    """
    grid = initial.grid
    limit = heat_time_step(grid, nu) if dt is None else dt
    steps = max(1, math.ceil(t_final / limit)) if t_final > 0 else 0
    step_size = t_final / steps if steps else 0.0
    source = forcing.values if forcing is not None else 0.0

    def rhs(t: float, arrays: Tuple[np.ndarray, ...]) -> Tuple[np.ndarray, ...]:
        (values,) = arrays
        return (nu * laplacian_scalar(ScalarField(grid, values, Parity.EVEN)).values + source,)

    snapshots = [(0.0, initial)]
    current = (initial.values,)
    for index in range(steps):
        current = ssp_rk3(current, index * step_size, step_size, rhs)
        snapshots.append(((index + 1) * step_size, ScalarField(grid, current[0], Parity.EVEN)))
    return snapshots


def _time_l2(snapshots: Sequence[Tuple[float, ScalarField]], norm: Callable[[ScalarField], float]) -> float:
    """Trapezoid L^2 in time of a spatial norm over snapshots."""
    times = np.array([t for t, _ in snapshots])
    squares = np.array([norm(snapshot) ** 2 for _, snapshot in snapshots])
    if len(times) < 2:
        return 0.0
    return math.sqrt(float(trapezoid(squares, times)))


def _hessian_l2(field_values: ScalarField) -> float:
    return lp_norm(hessian_magnitude(field_values), 2)


def verify_heat_maxreg(
    family: SampleFamily,
    q: float = 2.0,
    p: float = 2.0,
    t_final: float = 0.1,
    resolutions: Sequence[int] = (32, 64),
    r_max: float = 6.0,
    z_len: float = 12.0,
    dt_halving: bool = True,
) -> RatioReport:
    """
    Maximal regularity ||grad^2 v||_{L^q L^p} <= C ||f||_{L^q L^p} for v_t = Delta v + f, v(0) = 0.

    Forcing samples are time independent, so ||f||_{L^2 L^2} = sqrt(T) ||f||_2.
    With dt_halving the fine grid is re-measured at half the explicit step; the
    per_parameter entries "dt" and "dt/2" hold both maxima and dt_stability
    their relative change.
    """
    if (q, p) != (2.0, 2.0):
        raise BenchError(f"only q = p = 2 is implemented, got q={q!r}, p={p!r}")
    if not t_final > 0:
        raise BenchError(f"T must be positive, got {t_final!r}")

    def measure_at(dt_scale: float) -> Callable[[Grid, np.ndarray], Tuple[float, float]]:
        def measure(grid: Grid, values: np.ndarray) -> Tuple[float, float]:
            forcing = ScalarField(grid, values, Parity.EVEN)
            dt = dt_scale * heat_time_step(grid, 1.0)
            snapshots = integrate_heat(ScalarField.zeros(grid, Parity.EVEN), forcing, 1.0, t_final, dt=dt)
            return _time_l2(snapshots, _hessian_l2), math.sqrt(t_final) * lp_norm(forcing, 2)

        return measure

    report = _build_report("heat_maxreg_q2_p2", family, measure_at(1.0), resolutions, r_max, z_len)
    if not dt_halving:
        return report

    _, fine_grid = _bench_grids(resolutions, r_max, z_len)
    halved, _, _ = _measure_family(family, fine_grid, measure_at(0.5), odd=False)
    halved_max = max(halved, default=0.0)
    dt_stability = _relative_change(report.max_ratio, halved_max)
    logger.info(f"heat_maxreg_q2_p2: max ratio {halved_max:.6g} at dt/2, dt stability {dt_stability:.3g}")
    return replace(report, per_parameter={"dt": report.max_ratio, "dt/2": halved_max}, dt_stability=dt_stability)


def verify_nu_scaling(
    family: SampleFamily,
    nu_values: Sequence[float] = (1.0, 0.1, 0.01),
    t_final: float = 0.1,
    source: str = "initial",
    resolutions: Sequence[int] = (32, 64),
    r_max: float = 6.0,
    z_len: float = 12.0,
) -> RatioReport:
    """
    Scaling of ||grad^2 v||_{L^2(0,T;L^2)} <= C (T^{1/2} ||grad^2 v_0||_2 + nu^{-1} ||g||_{L^2(0,T;L^2)}).

    With source "initial" the samples are v_0 and g = 0; with "forcing" they are g
    and v_0 = 0. The measured C is the largest ratio per nu; spread is max C / min C.

    Raises:
        BenchError: If a nu is not positive or the source is unknown
    """
    if source not in ("initial", "forcing"):
        raise BenchError(f"source must be 'initial' or 'forcing', got {source!r}")
    nu_list = list(nu_values)
    if not nu_list or any(not nu > 0 for nu in nu_list):
        raise BenchError(f"nu values must be positive, got {nu_list!r}")

    reports: List[RatioReport] = []
    for nu in nu_list:

        def measure(grid: Grid, values: np.ndarray, nu: float = nu) -> Tuple[float, float]:
            sample = ScalarField(grid, values, Parity.EVEN)
            zero = ScalarField.zeros(grid, Parity.EVEN)
            if source == "initial":
                snapshots = integrate_heat(sample, None, nu, t_final)
                rhs = math.sqrt(t_final) * _hessian_l2(sample)
            else:
                snapshots = integrate_heat(zero, sample, nu, t_final)
                rhs = math.sqrt(t_final) * lp_norm(sample, 2) / nu
            return _time_l2(snapshots, _hessian_l2), rhs

        reports.append(_build_report(f"nu_scaling_nu{nu:g}", family, measure, resolutions, r_max, z_len))

    per_parameter = {f"nu={nu:g}": report.max_ratio for nu, report in zip(nu_list, reports)}
    constants = [value for value in per_parameter.values() if value > 0]
    spread = max(constants) / min(constants) if constants else 0.0

    fine = [ratio for report in reports for ratio in report.ratios]
    sample_ids = [sample for report in reports for sample in report.sample_ids]
    coarse_max = max((report.coarse_max_ratio for report in reports), default=0.0)
    max_ratio = max(fine, default=0.0)
    return RatioReport(
        lemma_id=f"nu_scaling_{source}",
        ratios=fine,
        sample_ids=sample_ids,
        max_ratio=max_ratio,
        median_ratio=statistics.median(fine) if fine else 0.0,
        resolutions=reports[0].resolutions,
        coarse_max_ratio=coarse_max,
        stability=_relative_change(coarse_max, max_ratio),
        skipped=[note for report in reports for note in report.skipped],
        per_parameter=per_parameter,
        spread=spread,
    )


def verify_heat_smoothing(
    family: SampleFamily,
    order: int,
    t: float = 0.05,
    resolutions: Sequence[int] = (32, 64),
    r_max: float = 6.0,
    z_len: float = 12.0,
) -> RatioReport:
    """Smoothing ||grad^k e^{t Delta} g||_2 <= C t^{-k/2} ||g||_2; ratio t^{k/2} ||grad^k v(t)||_2 / ||g||_2."""
    if order not in (0, 1, 2):
        raise BenchError(f"order must be 0, 1 or 2, got {order!r}")
    if not t > 0:
        raise BenchError(f"t must be positive, got {t!r}")

    def measure(grid: Grid, values: np.ndarray) -> Tuple[float, float]:
        sample = ScalarField(grid, values, Parity.EVEN)
        _, evolved = integrate_heat(sample, None, 1.0, t)[-1]
        lhs = t ** (order / 2.0) * lp_norm(_derivative_magnitude(evolved, order), 2)
        return lhs, lp_norm(sample, 2)

    return _build_report(f"heat_smoothing_k{order}", family, measure, resolutions, r_max, z_len)


def write_bench_csv(reports: Sequence[RatioReport], path: str) -> None:
    """Write lemma_id,sample_id,ratio rows with the diagnostics CSV conventions."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["lemma_id", "sample_id", "ratio"])
        for report in reports:
            for sample_id, ratio in zip(report.sample_ids, report.ratios):
                writer.writerow([report.lemma_id, sample_id, repr(float(ratio))])


def summarize_reports(reports: Sequence[RatioReport]) -> str:
    """Plain-text summary block of a bench run."""
    lines = [
        f"axisym-hall-lab {version.get_version()} bench summary",
        "Constants are measured on a truncated cylinder with discrete norms;",
        "they approximate the whole-space constants only under refinement.",
        "",
    ]
    for report in reports:
        lines.append(
            f"{report.lemma_id}: samples={len(report.ratios)} max={report.max_ratio:.6g} "
            f"median={report.median_ratio:.6g} coarse_max={report.coarse_max_ratio:.6g} "
            f"stability={report.stability:.3g} resolutions={report.resolutions[0]}/{report.resolutions[1]}"
        )
        for name, value in report.per_parameter.items():
            lines.append(f"  {name}: C={value:.6g}")
        if report.spread is not None:
            lines.append(f"  spread={report.spread:.3g}")
        if report.dt_stability is not None:
            lines.append(f"  dt_stability={report.dt_stability:.3g}")
        for note in report.skipped:
            lines.append(f"  skipped {note}")
    return "\n".join(lines) + "\n"
