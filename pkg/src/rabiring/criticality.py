"""Gap scaling across phase boundaries and the full phase-diagram raster.

The lowest excitation energy is scanned on log-spaced reduced couplings
on either side of the onset, fit to a power law, and the same solver
machinery drives the (theta, g1) raster and the current sweep behind
the command-line tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bogoliubov import bilinear_matrix, excitation_spectrum
from .errors import ConvergenceError, InsufficientPointsError
from .meanfield import (
    MinimizeStrategy,
    SolverReport,
    closed_form_afsr,
    closed_form_csr,
    closed_form_fsr,
    minimize_energy,
    newton_refine,
)
from .model import MeanFieldConfiguration, PhaseLabel, RingParameters
from .normal_phase import classify_theta, phase_boundaries
from . import observables

DEFAULT_DELTAS = np.logspace(-4.0, -2.0, 16)


@dataclass(frozen=True)
class GapCurve:
    """Lowest excitation energy against coupling on one side of onset.

    ``g1s`` is strictly increasing; ``deltas`` holds the matching
    reduced couplings |g1/g1c - 1|.  The point nearest the boundary has
    the smallest gap of the curve.
    """

    theta: float
    side: str
    g1c: float
    g1s: np.ndarray
    deltas: np.ndarray
    eps1: np.ndarray

    def __post_init__(self):
        for name in ("g1s", "deltas", "eps1"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.g1s) <= 0):
            raise ValueError("gap curve couplings must be strictly increasing")
        if np.any(self.eps1 < 0):
            raise ValueError("gap curve energies must be nonnegative")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.g1s.tolist(), self.eps1.tolist()))


def _np_gap(params: RingParameters) -> float:
    spectrum = excitation_spectrum(
        bilinear_matrix(params, MeanFieldConfiguration.zero(params.n))
    )
    return float(spectrum.energies[0])


def _branch_seed(params: RingParameters) -> MeanFieldConfiguration:
    label = classify_theta(params).label
    config = None
    if label.kind == "FSR":
        config = closed_form_fsr(params)
    elif label.kind == "AFSR":
        config = closed_form_afsr(params)
    elif label.kind == "CSR" and params.n == 6:
        try:
            config = closed_form_csr(params, label.variant)
        except ConvergenceError:
            config = None
    if config is None:
        result = minimize_energy(params, MinimizeStrategy(random_starts=32, seed=0))
        config = result.ground.config
    return config


def gap_curve(
    params: RingParameters,
    theta: float,
    side: str,
    deltas: np.ndarray | None = None,
) -> GapCurve:
    """Scan the lowest excitation gap on one side of the onset coupling.

    Below the onset the zero-displacement spectrum is evaluated
    directly.  Above it the condensed branch is followed by
    continuation: the largest reduced coupling is seeded from the
    closed-form branch of the softest momentum and each smaller
    coupling is refined from its already-converged neighbor, so the
    curve stays on one branch instead of hopping between orbits.
    Solver failures propagate as ``ConvergenceError`` naming the
    offending coupling.
    """
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")
    base = params.replace(theta=theta, g1=0.0)
    boundaries = phase_boundaries(base.n, base.hop / base.omega, method="auto")
    if np.min(np.abs(boundaries - theta)) <= 1e-3 * math.pi:
        raise ValueError(
            "theta sits too close to a first-order boundary for a scaling scan"
        )
    if deltas is None:
        deltas = DEFAULT_DELTAS
    deltas = np.sort(np.asarray(deltas, dtype=float))
    if np.any(deltas <= 0):
        raise ValueError("reduced couplings must be positive")
    g1c = classify_theta(base).g1c

    eps = np.empty_like(deltas)
    if side == "below":
        for i, d in enumerate(deltas):
            eps[i] = _np_gap(base.replace(g1=g1c * (1.0 - d)))
        g1s = g1c * (1.0 - deltas)
        order = np.argsort(g1s)
        return GapCurve(
            theta=theta,
            side=side,
            g1c=g1c,
            g1s=g1s[order],
            deltas=deltas[order],
            eps1=eps[order],
        )

    config = None
    for i in range(deltas.size - 1, -1, -1):
        at = base.replace(g1=g1c * (1.0 + deltas[i]))
        if config is None:
            config = _branch_seed(at)
        else:
            refined = newton_refine(at, config)
            if not refined.converged:
                raise ConvergenceError(
                    f"continuation failed to converge at g1={at.g1}",
                    last_iterate=refined.config,
                )
            config = refined.config
        if float(np.max(np.abs(config.stacked))) <= 1e-8:
            raise ConvergenceError(
                f"continuation collapsed to the zero configuration at g1={at.g1}",
                last_iterate=config,
            )
        eps[i] = float(
            excitation_spectrum(bilinear_matrix(at, config)).energies[0]
        )
    return GapCurve(
        theta=theta,
        side=side,
        g1c=g1c,
        g1s=g1c * (1.0 + deltas),
        deltas=deltas,
        eps1=eps,
    )


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit eps1 = exp(log_prefactor) * delta^gamma."""

    gamma: float
    log_prefactor: float
    window: tuple[float, float]
    r_squared: float
    n_points: int


def fit_exponent(
    curve: GapCurve, window: tuple[float, float] | None = None
) -> ScalingFit:
    """Least-squares line through (log delta, log eps1).

    ``window`` optionally restricts the fit to reduced couplings inside
    [window[0], window[1]].  At least 8 valid points (positive gap,
    positive reduced coupling) are required.
    """
    deltas = curve.deltas
    eps = curve.eps1
    mask = (deltas > 0) & (eps > 0) & np.isfinite(eps)
    if window is not None:
        lo, hi = window
        mask &= (deltas >= lo * (1.0 - 1e-12)) & (deltas <= hi * (1.0 + 1e-12))
    if int(np.sum(mask)) < 8:
        raise InsufficientPointsError(
            f"exponent fit needs at least 8 valid points, got {int(np.sum(mask))}"
        )
    x = np.log(deltas[mask])
    y = np.log(eps[mask])
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(
        gamma=float(slope),
        log_prefactor=float(intercept),
        window=(float(np.min(deltas[mask])), float(np.max(deltas[mask]))),
        r_squared=r_squared,
        n_points=int(np.sum(mask)),
    )


def halved_window(curve: GapCurve) -> tuple[float, float]:
    """The lower half of a curve's reduced-coupling window in log scale."""
    lo = float(np.min(curve.deltas))
    hi = float(np.max(curve.deltas))
    return (lo, math.sqrt(lo * hi))


@dataclass(frozen=True)
class PhaseCell:
    """One raster cell of the phase diagram."""

    theta: float
    g1: float
    label: PhaseLabel
    a4: float
    b2: float
    current: float
    odd_subring: float
    even_subring: float

    @property
    def label_text(self) -> str:
        return self.label.text()


def _representative(reports: tuple[SolverReport, ...]) -> SolverReport:
    """Deterministic pick among degenerate minima: largest A_4, then
    lexicographically largest configuration."""
    return max(
        reports,
        key=lambda m: (
            round(float(m.config.a[min(3, m.config.n - 1)]), 12),
            tuple(m.config.stacked.tolist()),
        ),
    )


def _cell_strategy(
    seed: int, col: int, row: int, extra: tuple[MeanFieldConfiguration, ...],
    random_starts: int,
) -> MinimizeStrategy:
    rng = np.random.default_rng(np.random.SeedSequence([seed, col, row]))
    return MinimizeStrategy(
        random_starts=random_starts, extra_seeds=extra, rng=rng
    )


def _solve_cell(
    params: RingParameters,
    seed: int,
    col: int,
    row: int,
    prev: MeanFieldConfiguration | None,
    random_starts: int,
) -> tuple[PhaseCell, MeanFieldConfiguration | None]:
    extra = (prev,) if prev is not None else ()
    result = minimize_energy(
        params, _cell_strategy(seed, col, row, extra, random_starts)
    )
    if not result.minima:
        cell = PhaseCell(
            theta=params.theta,
            g1=params.g1,
            label=PhaseLabel("FAILED"),
            a4=math.nan,
            b2=math.nan,
            current=math.nan,
            odd_subring=math.nan,
            even_subring=math.nan,
        )
        return cell, prev
    rep = _representative(result.ground_family())
    a4 = float(rep.config.a[min(3, params.n - 1)])
    b2 = float(rep.config.b[min(1, params.n - 1)])
    if params.n == 6:
        odd, even = observables.subring_currents(rep.config)
    else:
        odd = even = math.nan
    cell = PhaseCell(
        theta=params.theta,
        g1=params.g1,
        label=rep.label,
        a4=a4,
        b2=b2,
        current=observables.ring_current(rep.config),
        odd_subring=odd,
        even_subring=even,
    )
    return cell, rep.config


def _phase_column(
    args: tuple[RingParameters, float, tuple[float, ...], int, int, int]
) -> list[PhaseCell]:
    params, theta, g1_grid, seed, col, random_starts = args
    cells: list[PhaseCell] = []
    prev: MeanFieldConfiguration | None = None
    for row, g1 in enumerate(g1_grid):
        at = params.replace(theta=theta, g1=g1)
        cell, prev = _solve_cell(at, seed, col, row, prev, random_starts)
        cells.append(cell)
    return cells


def phase_diagram(
    params: RingParameters,
    theta_grid,
    g1_grid,
    seed: int = 0,
    jobs: int = 1,
    random_starts: int = 8,
) -> list[PhaseCell]:
    """Rasterize the (theta, g1) plane with the multi-start minimizer.

    Cells in one theta column are solved in increasing g1 with the
    previous minimum passed along as a continuation seed; columns are
    independent and may be solved by parallel workers.  Per-cell random
    seeding depends only on (seed, column, row), so the output is
    byte-identical for any worker count.  Rows are ordered by theta,
    then g1.
    """
    theta_grid = [float(t) for t in np.asarray(theta_grid, dtype=float)]
    g1_grid = tuple(float(g) for g in np.asarray(g1_grid, dtype=float))
    if not theta_grid or not g1_grid:
        raise ValueError("phase diagram grids must be nonempty")
    tasks = [
        (params, theta, g1_grid, seed, col, random_starts)
        for col, theta in enumerate(theta_grid)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(_phase_column, tasks))
    else:
        columns = [_phase_column(task) for task in tasks]
    return [cell for column in columns for cell in column]


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    current: float
    odd_subring: float
    even_subring: float


def current_sweep(
    params: RingParameters,
    theta_grid,
    seed: int = 0,
    random_starts: int = 8,
) -> list[SweepPoint]:
    """Ground-state ring and subring currents along a theta sweep.

    Each angle is solved with the multi-start minimizer, seeded with
    the previous angle's ground configuration for continuity; currents
    are taken on the deterministic representative of the ground family.
    """
    if params.n != 6:
        raise ValueError("the current sweep reports hexagon subring currents")
    points: list[SweepPoint] = []
    prev: MeanFieldConfiguration | None = None
    for col, theta in enumerate(np.asarray(theta_grid, dtype=float)):
        at = params.replace(theta=float(theta))
        cell, prev = _solve_cell(at, seed, col, 0, prev, random_starts)
        points.append(
            SweepPoint(
                theta=float(theta),
                current=cell.current,
                odd_subring=cell.odd_subring,
                even_subring=cell.even_subring,
            )
        )
    return points
