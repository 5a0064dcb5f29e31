"""Free-space link budget: from geometry and wavelength to bound spectra.

Maps a monostatic free-space geometry (range ``L``, transceiver pupil
radius ``r_t``, target radius ``r_T``, ambient temperature ``T0``) to the
equal-bath sensing scenario it induces at a given wavelength:

* diffraction-limited power transmissivity
  ``eta = area_factor * (pi r_t^2)(pi r_T^2) / (lambda L)^2``,
  the same for the forward and return pass, so ``eta_eff = eta^2``;
* blackbody background occupancy per mode from the Planck law at ``T0``;
* the covert-probe MSE bound coefficient ``c_ase`` of that scenario, its
  spectrum over a frequency band, the wavelength minimizing it, and the
  resulting bound ``B = c_ase / (eps sqrt(floor(W T)))``.

Conventions worth stating up front:

* Frequency means optical frequency ``f = c / lambda`` (hertz).
* The raw transmissivity formula is a far-field expression and exceeds 1
  at short range; ``eta_policy`` decides whether that raises
  NearFieldError (``"error"``) or saturates at ``eta_max`` (``"clamp"``).
* ``area_factor`` selects among effective-aperture conventions for soft
  (Gaussian-profile) pupils: 1 for bare geometric areas, 1/2 and 1/4 for
  the conventions where one or both apertures contribute half their
  geometric area.  The default is 1/4, under which the band of interest
  is far-field for kilometer ranges and the bound spectra have genuine
  interior minima; ``reproduce_paper_report`` sweeps all conventions.

Vacuum propagation throughout: no atmospheric extinction or turbulence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._constants import BOLTZMANN_K, PLANCK_H, SPEED_OF_LIGHT
from .errors import DomainError, EmptySweepError, NearFieldError
from .estimation import qcrb_ase
from .scenario import SensingScenario

__all__ = [
    "LinkGeometry",
    "SweepRow",
    "SweepMinimum",
    "TargetResult",
    "ConventionResult",
    "ReproduceReport",
    "planck_occupancy",
    "geometric_transmissivity",
    "c_ase_at",
    "mse_bound_b",
    "sweep_frequency",
    "find_sweep_minimum",
    "optimize_wavelength",
    "reproduce_paper_report",
]

_ALLOWED_AREA_FACTORS = (1.0, 0.5, 0.25)
_ALLOWED_POLICIES = ("error", "clamp")

#: Inverse golden ratio, the section step of the minimizer.
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LinkGeometry:
    """Monostatic free-space geometry and the transmissivity convention.

    Lengths in meters, temperature in kelvin.  ``eta_max`` only matters
    under the ``"clamp"`` policy.
    """

    range_m: float
    r_t: float = 0.04
    r_target: float = 0.10
    t0: float = 300.0
    area_factor: float = 0.25
    eta_policy: str = "error"
    eta_max: float = 0.99

    def __post_init__(self) -> None:
        for name in ("range_m", "r_t", "r_target", "t0"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.area_factor not in _ALLOWED_AREA_FACTORS:
            raise ValueError(
                f"area_factor must be one of {_ALLOWED_AREA_FACTORS}, "
                f"got {self.area_factor}"
            )
        if self.eta_policy not in _ALLOWED_POLICIES:
            raise ValueError(
                f"eta_policy must be one of {_ALLOWED_POLICIES}, "
                f"got {self.eta_policy!r}"
            )
        if not 0.0 < self.eta_max < 1.0:
            raise ValueError(f"eta_max must be in (0, 1), got {self.eta_max}")


@dataclass(frozen=True)
class SweepRow:
    """One frequency point of a bound spectrum.

    Invalid points (near-field under the error policy, or a degenerate
    scenario) keep their frequency, wavelength and background occupancy
    but carry ``None`` for the quantities that could not be evaluated,
    plus a short reason in ``flag``.
    """

    f_hz: float
    lambda_m: float
    eta: float | None
    nbar_b: float
    c_ase: float | None
    b: float | None
    flag: str = ""

    @property
    def valid(self) -> bool:
        return self.c_ase is not None


@dataclass(frozen=True)
class SweepMinimum:
    """Location and nature of a sweep's smallest valid c_ase."""

    index: int
    row: SweepRow
    is_interior: bool
    is_unique: bool


def planck_occupancy(wavelength: float, t0: float) -> float:
    """Blackbody occupancy per mode, 1/(exp(hc/(lambda k T0)) - 1).

    Overflow-safe: deep in the Wien tail (tiny ``wavelength * t0``) the
    occupancy underflows to exactly 0.0.
    """
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if t0 <= 0.0:
        raise ValueError(f"t0 must be positive, got {t0}")
    exponent = PLANCK_H * SPEED_OF_LIGHT / (wavelength * BOLTZMANN_K * t0)
    if exponent > 700.0:
        return 0.0
    return 1.0 / math.expm1(exponent)


def geometric_transmissivity(wavelength: float, geometry: LinkGeometry) -> float:
    """Single-pass power transmissivity of the diffraction-limited link.

    eta_raw = area_factor * (pi r_t^2)(pi r_target^2) / (lambda L)^2.
    Values above 1 mean the far-field formula has left its regime; the
    geometry's policy then decides between NearFieldError and clamping
    to ``eta_max``.
    """
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    area_t = math.pi * geometry.r_t**2
    area_target = math.pi * geometry.r_target**2
    eta_raw = geometry.area_factor * area_t * area_target / (
        wavelength * geometry.range_m
    ) ** 2
    if eta_raw > 1.0:
        if geometry.eta_policy == "clamp":
            return geometry.eta_max
        raise NearFieldError(
            f"far-field transmissivity {eta_raw:.4g} exceeds 1 at "
            f"wavelength {wavelength:.4g} m, range {geometry.range_m:.4g} m; "
            "the diffraction formula does not apply this close"
        )
    return eta_raw


def c_ase_at(
    wavelength: float, geometry: LinkGeometry
) -> tuple[float, float, float]:
    """(eta, nbar_b, c_ase) of the link at one wavelength.

    Builds the equal-bath scenario (eta, eta, nbar_b, nbar_b) — so
    eta_eff = eta^2 and nbar_b_eff = nbar_b — and returns the covert
    MSE bound coefficient.  Near-field and degenerate-scenario errors
    propagate.
    """
    eta = geometric_transmissivity(wavelength, geometry)
    nbar_b = planck_occupancy(wavelength, geometry.t0)
    scenario = SensingScenario(eta, eta, nbar_b, nbar_b)
    # epsilon and n cancel from the coefficient; any valid pair works here.
    c_ase, _ = qcrb_ase(scenario, 1.0, 1)
    return eta, nbar_b, c_ase


def mse_bound_b(
    wavelength: float,
    geometry: LinkGeometry,
    epsilon: float,
    bandwidth: float,
    integration_time: float,
) -> float:
    """MSE lower bound B = c_ase(lambda) / (eps sqrt(floor(W T)))."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n = _mode_count(bandwidth, integration_time)
    _, _, c_ase = c_ase_at(wavelength, geometry)
    return c_ase / (epsilon * math.sqrt(n))


def _mode_count(bandwidth: float, integration_time: float) -> int:
    if bandwidth <= 0.0 or integration_time <= 0.0:
        raise ValueError("bandwidth and integration time must be positive")
    n = int(math.floor(bandwidth * integration_time))
    if n < 1:
        raise ValueError(
            f"time-bandwidth product {bandwidth * integration_time:g} "
            "yields no usable mode"
        )
    return n


def sweep_frequency(
    f_min: float,
    f_max: float,
    points: int,
    geometry: LinkGeometry,
    *,
    epsilon: float = 1e-3,
    bandwidth: float = 3e12,
    integration_time: float = 1.0,
) -> list[SweepRow]:
    """Bound spectrum on a uniform frequency grid, ordered by frequency.

    Each row evaluates independently; rows where the link is invalid
    (near-field under the error policy, or a degenerate scenario) are
    flagged rather than aborting the sweep.  Raises EmptySweepError when
    no row at all is valid.  The ``B`` column uses the given
    ``(epsilon, bandwidth, integration_time)``; the defaults are the
    operating point of the published reference spectra (eps = 1e-3,
    W = 3 THz, T = 1 s).
    """
    if not f_min < f_max:
        raise ValueError(f"need f_min < f_max, got {f_min} >= {f_max}")
    if f_min <= 0.0:
        raise ValueError(f"f_min must be positive, got {f_min}")
    if points < 2:
        raise ValueError(f"need at least two sweep points, got {points}")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n = _mode_count(bandwidth, integration_time)
    root_n = math.sqrt(n)

    rows: list[SweepRow] = []
    step = (f_max - f_min) / (points - 1)
    for i in range(points):
        f = f_min + step * i
        wavelength = SPEED_OF_LIGHT / f
        nbar_b = planck_occupancy(wavelength, geometry.t0)
        try:
            eta, nbar_b, c_ase = c_ase_at(wavelength, geometry)
        except NearFieldError:
            rows.append(
                SweepRow(f, wavelength, None, nbar_b, None, None, "near-field")
            )
            continue
        except DomainError:
            eta = geometric_transmissivity(wavelength, geometry)
            rows.append(
                SweepRow(f, wavelength, eta, nbar_b, None, None, "degenerate")
            )
            continue
        rows.append(
            SweepRow(f, wavelength, eta, nbar_b, c_ase, c_ase / (epsilon * root_n))
        )
    if not any(row.valid for row in rows):
        raise EmptySweepError(
            f"no valid link point in [{f_min:g}, {f_max:g}] Hz for this geometry"
        )
    return rows


def find_sweep_minimum(rows: list[SweepRow]) -> SweepMinimum:
    """Smallest valid c_ase of a sweep, and whether it is a clean minimum.

    ``is_interior`` means the minimizing row has valid neighbors on both
    sides (it is not pressed against the band edge or the validity
    boundary); ``is_unique`` means the sweep has exactly one strict
    local minimum among interior valid rows.
    """
    valid = [(i, row) for i, row in enumerate(rows) if row.valid]
    if not valid:
        raise EmptySweepError("sweep has no valid rows")
    best_index, best_row = min(valid, key=lambda item: item[1].c_ase)

    def _interior(i: int) -> bool:
        return (
            0 < i < len(rows) - 1
            and rows[i - 1].valid
            and rows[i + 1].valid
        )

    local_minima = [
        i
        for i, row in enumerate(rows)
        if row.valid
        and _interior(i)
        and row.c_ase < rows[i - 1].c_ase
        and row.c_ase < rows[i + 1].c_ase
    ]
    return SweepMinimum(
        index=best_index,
        row=best_row,
        is_interior=_interior(best_index),
        is_unique=len(local_minima) == 1,
    )


def optimize_wavelength(
    geometry: LinkGeometry,
    lambda_bracket: tuple[float, float],
    *,
    epsilon: float = 1e-3,
    bandwidth: float = 3e12,
    integration_time: float = 1.0,
    coarse_points: int = 200,
    tolerance: float = 1e-9,
) -> tuple[float, float, float]:
    """Wavelength minimizing c_ase inside a bracket, plus the bound there.

    A 200-point coarse scan locates the valid neighborhood of the
    minimum (so the section search never brackets a flagged region
    blindly), then golden-section refines to ``|d lambda| <= tolerance``
    (1e-3 um by default).  Returns ``(lambda_star, c_ase_star, b)`` with
    ``b`` evaluated at the caller's ``(epsilon, bandwidth,
    integration_time)``.  Raises EmptySweepError when no wavelength in
    the bracket is valid.
    """
    lo, hi = lambda_bracket
    if not 0.0 < lo < hi:
        raise ValueError(f"need 0 < lambda_lo < lambda_hi, got {lambda_bracket}")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n = _mode_count(bandwidth, integration_time)

    def objective(wavelength: float) -> float:
        try:
            return c_ase_at(wavelength, geometry)[2]
        except (NearFieldError, DomainError):
            return math.inf

    grid = [lo + (hi - lo) * i / (coarse_points - 1) for i in range(coarse_points)]
    values = [objective(w) for w in grid]
    best = min(range(coarse_points), key=lambda i: values[i])
    if math.isinf(values[best]):
        raise EmptySweepError(
            f"no valid wavelength in [{lo:g}, {hi:g}] m for this geometry"
        )
    a = grid[best - 1] if best > 0 else grid[0]
    b_edge = grid[best + 1] if best < coarse_points - 1 else grid[-1]

    x1 = b_edge - _GOLDEN * (b_edge - a)
    x2 = a + _GOLDEN * (b_edge - a)
    f1, f2 = objective(x1), objective(x2)
    while b_edge - a > tolerance:
        if f1 <= f2:
            b_edge, x2, f2 = x2, x1, f1
            x1 = b_edge - _GOLDEN * (b_edge - a)
            f1 = objective(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b_edge - a)
            f2 = objective(x2)
    lambda_star = 0.5 * (a + b_edge)
    c_star = objective(lambda_star)
    if math.isinf(c_star):
        # The section landed on the invalid side of a validity boundary;
        # take the best interior evaluation instead.
        lambda_star, c_star = (x1, f1) if f1 <= f2 else (x2, f2)
    return lambda_star, c_star, c_star / (epsilon * math.sqrt(n))


# Published reference values the convention sweep is scored against:
# three quoted optimal wavelengths with their bounds, and two quoted
# bounds at fixed wavelengths, all at eps = 1e-3, W = 3 THz, T = 1 s.
_OPTIMIZE_TARGETS: tuple[tuple[float, float, float], ...] = (
    (1000.0, 9.40e-6, 0.00322),
    (3000.0, 6.35e-6, 0.09927),
    (5000.0, 5.38e-6, 0.81438),
)
_FIXED_TARGETS: tuple[tuple[float, float, float], ...] = (
    (1000.0, 8.7e-6, 0.00327),
    (1000.0, 3.0e-6, 0.08423),
)
# The band the reference spectra are plotted over (15-100 THz).  Brackets
# reaching below it can capture the validity-boundary basin, where the
# covertness constraint degenerates and c_ase plunges toward zero; the
# quoted optima are the smooth in-band minima.
_REFERENCE_BRACKET = (SPEED_OF_LIGHT / 100e12, SPEED_OF_LIGHT / 15e12)


@dataclass(frozen=True)
class TargetResult:
    """One reference value under one convention."""

    label: str
    kind: str  # "optimize" | "fixed"
    range_m: float
    lambda_target_m: float | None
    b_target: float
    lambda_m: float | None
    b_value: float | None
    d_lambda_m: float | None
    b_rel_err: float | None
    flag: str
    matches: bool


@dataclass(frozen=True)
class ConventionResult:
    area_factor: float
    eta_policy: str
    results: tuple[TargetResult, ...]

    @property
    def matches_all(self) -> bool:
        return all(result.matches for result in self.results)


@dataclass(frozen=True)
class ReproduceReport:
    """Convention-sensitivity scorecard against the reference values."""

    epsilon: float
    bandwidth_hz: float
    integration_time_s: float
    lambda_tolerance_m: float
    b_rel_tolerance: float
    conventions: tuple[ConventionResult, ...]

    @property
    def matched(self) -> ConventionResult | None:
        for convention in self.conventions:
            if convention.matches_all:
                return convention
        return None


def _score_target(
    *,
    label: str,
    kind: str,
    range_m: float,
    lambda_target_m: float | None,
    b_target: float,
    lambda_m: float | None,
    b_value: float | None,
    flag: str,
    lambda_tol: float,
    b_tol: float,
) -> TargetResult:
    d_lambda = None
    b_rel = None
    matches = False
    if b_value is not None:
        b_rel = abs(b_value - b_target) / b_target
        matches = b_rel <= b_tol
        if lambda_target_m is not None and lambda_m is not None:
            d_lambda = lambda_m - lambda_target_m
            matches = matches and abs(d_lambda) <= lambda_tol
    return TargetResult(
        label=label,
        kind=kind,
        range_m=range_m,
        lambda_target_m=lambda_target_m,
        b_target=b_target,
        lambda_m=lambda_m,
        b_value=b_value,
        d_lambda_m=d_lambda,
        b_rel_err=b_rel,
        flag=flag,
        matches=matches,
    )


def reproduce_paper_report(
    *,
    epsilon: float = 1e-3,
    bandwidth: float = 3e12,
    integration_time: float = 1.0,
    lambda_tolerance: float = 0.05e-6,
    b_rel_tolerance: float = 0.02,
) -> ReproduceReport:
    """Score every transmissivity convention against the reference values.

    For each (area_factor, eta_policy) pair this optimizes the
    wavelength at 1/3/5 km and evaluates the fixed-wavelength bounds,
    recording residuals against the published reference values (quoted
    optima and bounds).  A convention "matches" when every target agrees
    within ``lambda_tolerance`` and ``b_rel_tolerance``; when none does
    — the documented situation for these references — the report itself,
    with per-target residuals for every convention, is the deliverable.
    """
    conventions = []
    for area_factor in _ALLOWED_AREA_FACTORS:
        for policy in _ALLOWED_POLICIES:
            results = []
            for range_m, lambda_target, b_target in _OPTIMIZE_TARGETS:
                geometry = LinkGeometry(
                    range_m=range_m, area_factor=area_factor, eta_policy=policy
                )
                label = f"optimum at L = {range_m / 1000:g} km"
                try:
                    lambda_star, _, b_value = optimize_wavelength(
                        geometry,
                        _REFERENCE_BRACKET,
                        epsilon=epsilon,
                        bandwidth=bandwidth,
                        integration_time=integration_time,
                    )
                    flag = ""
                except EmptySweepError:
                    lambda_star, b_value, flag = None, None, "empty-sweep"
                results.append(
                    _score_target(
                        label=label,
                        kind="optimize",
                        range_m=range_m,
                        lambda_target_m=lambda_target,
                        b_target=b_target,
                        lambda_m=lambda_star,
                        b_value=b_value,
                        flag=flag,
                        lambda_tol=lambda_tolerance,
                        b_tol=b_rel_tolerance,
                    )
                )
            for range_m, wavelength, b_target in _FIXED_TARGETS:
                geometry = LinkGeometry(
                    range_m=range_m, area_factor=area_factor, eta_policy=policy
                )
                label = f"bound at {wavelength * 1e6:g} um, L = {range_m / 1000:g} km"
                try:
                    b_value = mse_bound_b(
                        wavelength, geometry, epsilon, bandwidth, integration_time
                    )
                    flag = ""
                except NearFieldError:
                    b_value, flag = None, "near-field"
                except DomainError:
                    b_value, flag = None, "degenerate"
                results.append(
                    _score_target(
                        label=label,
                        kind="fixed",
                        range_m=range_m,
                        lambda_target_m=None,
                        b_target=b_target,
                        lambda_m=wavelength,
                        b_value=b_value,
                        flag=flag,
                        lambda_tol=lambda_tolerance,
                        b_tol=b_rel_tolerance,
                    )
                )
            conventions.append(
                ConventionResult(
                    area_factor=area_factor,
                    eta_policy=policy,
                    results=tuple(results),
                )
            )
    return ReproduceReport(
        epsilon=epsilon,
        bandwidth_hz=bandwidth,
        integration_time_s=integration_time,
        lambda_tolerance_m=lambda_tolerance,
        b_rel_tolerance=b_rel_tolerance,
        conventions=tuple(conventions),
    )
