"""Displaced-frame energy functional and the multi-start minimizer.

The ground-state energy of the projected ring model is a function of
2N real displacement amplitudes.  This module evaluates that energy,
its stationarity residuals and their Jacobian, the closed-form branch
constructors for the four superradiant patterns of the hexagon, and an
unconstrained multi-start Newton minimizer that finds every degenerate
minimum and classifies it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, SingularDenominatorError
from .model import (
    MeanFieldConfiguration,
    PhaseLabel,
    RingParameters,
    symmetry_orbit,
)
from . import observables


@dataclass(frozen=True)
class EffectiveSiteQuantities:
    """Per-site energy scales of the displaced frame.

    delta_n = sqrt(delta^2 + 16 g^2 A_n^2), lambda_n = g delta / delta_n,
    chi_n = lambda_n^2 / delta_n.
    """

    delta_n: np.ndarray
    lambda_n: np.ndarray
    chi_n: np.ndarray


def site_quantities(params: RingParameters, a) -> EffectiveSiteQuantities:
    a = np.asarray(a, dtype=float)
    g = params.g
    delta_n = np.sqrt(params.delta ** 2 + 16.0 * g ** 2 * a ** 2)
    lambda_n = g * params.delta / delta_n
    chi_n = lambda_n ** 2 / delta_n
    for arr in (delta_n, lambda_n, chi_n):
        arr.setflags(write=False)
    return EffectiveSiteQuantities(delta_n, lambda_n, chi_n)


def ground_energy(params: RingParameters, config: MeanFieldConfiguration) -> float:
    """Mean-field energy E_g of a displacement configuration.

    E_g = sum_n [omega |alpha_n|^2 - delta_n / 2
                 + J alpha_n^* (e^{i theta} alpha_{n+1} + e^{-i theta} alpha_{n-1})].

    The hopping sum is real for any real (A, B); it is evaluated in
    complex arithmetic and the imaginary part is asserted to be
    negligible before discarding it, so an indexing mistake cannot go
    unnoticed.
    """
    if config.n != params.n:
        raise ValueError("configuration length does not match parameter n")
    alpha = config.alpha
    quantities = site_quantities(params, config.a)
    phase = np.exp(1j * params.theta)
    hopping = params.hop * np.sum(
        np.conj(alpha) * (phase * np.roll(alpha, -1) + np.conj(phase) * np.roll(alpha, 1))
    )
    total = (
        params.omega * np.sum(np.abs(alpha) ** 2)
        - 0.5 * np.sum(quantities.delta_n)
        + hopping
    )
    assert abs(total.imag) < 1e-10 * (1.0 + abs(total.real)), (
        f"hopping sum picked up an imaginary part {total.imag:.3e}"
    )
    return float(total.real)


def stationarity_residuals(
    params: RingParameters, config: MeanFieldConfiguration
) -> np.ndarray:
    """Stationarity residuals of E_g, one per amplitude.

    Returns a 2N vector aligned with ``config.stacked``: the first N
    entries are the real-part equations

        omega A_n - 4 g^2 A_n / delta_n + J cos(theta) (A_{n+1} + A_{n-1})
        + J sin(theta) (B_{n-1} - B_{n+1}),

    the last N the imaginary-part equations

        omega B_n + J sin(theta) (A_{n+1} - A_{n-1})
        + J cos(theta) (B_{n+1} + B_{n-1}).

    These are half the gradient of ``ground_energy`` with respect to
    the stacked amplitudes; their zero set is the same.
    """
    if config.n != params.n:
        raise ValueError("configuration length does not match parameter n")
    a, b = config.a, config.b
    g = params.g
    delta_n = np.sqrt(params.delta ** 2 + 16.0 * g ** 2 * a ** 2)
    jc = params.hop * math.cos(params.theta)
    js = params.hop * math.sin(params.theta)
    ra = (
        params.omega * a
        - 4.0 * g ** 2 * a / delta_n
        + jc * (np.roll(a, -1) + np.roll(a, 1))
        + js * (np.roll(b, 1) - np.roll(b, -1))
    )
    rb = (
        params.omega * b
        + js * (np.roll(a, -1) - np.roll(a, 1))
        + jc * (np.roll(b, -1) + np.roll(b, 1))
    )
    return np.concatenate([ra, rb])


def residual_norm(params: RingParameters, config: MeanFieldConfiguration) -> float:
    return float(np.max(np.abs(stationarity_residuals(params, config))))


def residual_jacobian(
    params: RingParameters, config: MeanFieldConfiguration
) -> np.ndarray:
    """Jacobian of ``stationarity_residuals`` in the stacked ordering.

    Symmetric (it is half the Hessian of E_g).  The neighbor matrices
    below satisfy (left @ v)[n] = v[n-1] and (right @ v)[n] = v[n+1].
    """
    n = params.n
    a = config.a
    g = params.g
    delta_n = np.sqrt(params.delta ** 2 + 16.0 * g ** 2 * a ** 2)
    jc = params.hop * math.cos(params.theta)
    js = params.hop * math.sin(params.theta)
    left = np.roll(np.eye(n), -1, axis=1)
    right = np.roll(np.eye(n), 1, axis=1)
    jac = np.zeros((2 * n, 2 * n))
    jac[:n, :n] = (
        np.diag(params.omega - 4.0 * g ** 2 * params.delta ** 2 / delta_n ** 3)
        + jc * (left + right)
    )
    jac[:n, n:] = js * (left - right)
    jac[n:, :n] = js * (right - left)
    jac[n:, n:] = params.omega * np.eye(n) + jc * (left + right)
    return jac


@dataclass(frozen=True)
class NewtonResult:
    config: MeanFieldConfiguration
    converged: bool
    iterations: int
    residual_norm: float


def newton_refine(
    params: RingParameters,
    config: MeanFieldConfiguration,
    tol: float = 1e-12,
    max_iter: int = 200,
    max_halvings: int = 30,
) -> NewtonResult:
    """Damped Newton iteration on the stationarity residuals.

    Steps solve the linearized system; each step is halved (up to
    ``max_halvings`` times) until the squared residual norm decreases.
    Convergence is declared when the max-norm residual drops below
    ``tol`` in units of omega.
    """
    x = config.stacked.copy()
    for iteration in range(max_iter):
        current = MeanFieldConfiguration.from_stacked(x)
        r = stationarity_residuals(params, current)
        rmax = float(np.max(np.abs(r)))
        if rmax < tol:
            return NewtonResult(current, True, iteration, rmax)
        jac = residual_jacobian(params, current)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        f0 = float(np.dot(r, r))
        scale = 1.0
        for _ in range(max_halvings):
            trial = x + scale * step
            rt = stationarity_residuals(
                params, MeanFieldConfiguration.from_stacked(trial)
            )
            if float(np.dot(rt, rt)) < f0:
                x = trial
                break
            scale *= 0.5
        else:
            return NewtonResult(current, rmax < tol, iteration, rmax)
    current = MeanFieldConfiguration.from_stacked(x)
    rmax = float(np.max(np.abs(stationarity_residuals(params, current))))
    return NewtonResult(current, rmax < tol, max_iter, rmax)


def b_from_a(params: RingParameters, a) -> np.ndarray:
    """Imaginary parts implied by the real parts on the hexagon.

    B_n = -J sin(theta) [omega (A_{n+1} - A_{n-1})
          + J cos(theta) (A_{n-2} - A_{n+2})] / (omega^2 - J^2 cos^2 theta).
    """
    if params.n != 6:
        raise ValueError("the B-from-A elimination is specific to n=6")
    a = np.asarray(a, dtype=float)
    if a.size != 6:
        raise ValueError("expected 6 real amplitudes")
    jc = params.hop * math.cos(params.theta)
    denom = params.omega ** 2 - jc ** 2
    if abs(denom) < 1e-12:
        raise SingularDenominatorError(
            f"omega^2 - J^2 cos^2 theta vanishes at theta={params.theta}"
        )
    js = params.hop * math.sin(params.theta)
    return (
        -js
        * (
            params.omega * (np.roll(a, -1) - np.roll(a, 1))
            + jc * (np.roll(a, 2) - np.roll(a, -2))
        )
        / denom
    )


def reduced_residual(params: RingParameters, a) -> np.ndarray:
    """Six-site stationarity residuals with the B amplitudes eliminated.

    r_n = A_n (omega - 4 g^2 / delta_n) + J cos(theta) (A_{n+1} + A_{n-1})
          - kappa [omega (2 A_n - A_{n-2} - A_{n+2})
                   + J cos(theta) (2 A_{n+3} - A_{n+1} - A_{n-1})]

    with kappa = J^2 sin^2 theta / (omega^2 - J^2 cos^2 theta).  This
    equals the real-part block of ``stationarity_residuals`` evaluated
    at (A, b_from_a(A)), which the test suite checks as an identity.
    """
    if params.n != 6:
        raise ValueError("the reduced residual is specific to n=6")
    a = np.asarray(a, dtype=float)
    if a.size != 6:
        raise ValueError("expected 6 real amplitudes")
    g = params.g
    delta_n = np.sqrt(params.delta ** 2 + 16.0 * g ** 2 * a ** 2)
    jc = params.hop * math.cos(params.theta)
    js = params.hop * math.sin(params.theta)
    denom = params.omega ** 2 - jc ** 2
    if abs(denom) < 1e-12:
        raise SingularDenominatorError(
            f"omega^2 - J^2 cos^2 theta vanishes at theta={params.theta}"
        )
    kappa = js ** 2 / denom
    return (
        a * (params.omega - 4.0 * g ** 2 / delta_n)
        + jc * (np.roll(a, -1) + np.roll(a, 1))
        - kappa
        * (
            params.omega * (2.0 * a - np.roll(a, 2) - np.roll(a, -2))
            + jc * (2.0 * np.roll(a, 3) - np.roll(a, -1) - np.roll(a, 1))
        )
    )


def _uniform_g1c(params: RingParameters, sign: float) -> float:
    u = 1.0 + sign * 2.0 * (params.hop / params.omega) * math.cos(params.theta)
    if u <= 0.0:
        raise ValueError("hopping too strong for a real onset coupling")
    return 0.5 * math.sqrt(u)


def _amplitude_scale(params: RingParameters, g1c: float) -> float:
    """Displacement scale sqrt(delta/omega) sqrt(g1^4/g1c^4 - 1) / (4 g1)."""
    ratio = params.g1 ** 4 / g1c ** 4 - 1.0
    if ratio <= 0.0:
        return 0.0
    return (
        math.sqrt(params.delta / params.omega) * math.sqrt(ratio) / (4.0 * params.g1)
    )


def closed_form_fsr(params: RingParameters) -> MeanFieldConfiguration | None:
    """Uniform superradiant branch, positive sign.

    A_n = (1/(4 g1)) sqrt(delta/omega)
          sqrt(16 g1^4 / (1 + 2 (J/w) cos theta)^2 - 1),  B_n = 0,
    defined when g1 exceeds g1c = sqrt(1 + 2 (J/w) cos theta) / 2.
    Returns None at or below the onset.
    """
    g1c = _uniform_g1c(params, +1.0)
    if params.g1 <= g1c:
        return None
    amp = _amplitude_scale(params, g1c)
    return MeanFieldConfiguration(np.full(params.n, amp), np.zeros(params.n))


def closed_form_afsr(params: RingParameters) -> MeanFieldConfiguration | None:
    """Staggered superradiant branch A_n = (-1)^n a, B = 0 (even rings).

    The amplitude follows the uniform-branch formula with the hopping
    term reversed: the trailing constant under the inner square root is
    read as 1 (the staggered pattern maps onto the uniform one under
    J -> -J, which the stationarity check in the tests confirms).
    Defined when g1 > g1c = sqrt(1 - 2 (J/w) cos theta) / 2, else None.
    """
    if params.n % 2:
        raise ValueError("a staggered pattern needs an even ring")
    g1c = _uniform_g1c(params, -1.0)
    if params.g1 <= g1c:
        return None
    amp = _amplitude_scale(params, g1c)
    signs = np.where(np.arange(params.n) % 2 == 0, 1.0, -1.0)
    return MeanFieldConfiguration(amp * signs, np.zeros(params.n))


_CSR_MOMENTUM_INDEX = {"I": 2, "II": 1}


def _csr_pattern(
    params: RingParameters, variant: str, a1: float, a2: float
) -> MeanFieldConfiguration:
    jc = params.hop * math.cos(params.theta)
    js = params.hop * math.sin(params.theta)
    if variant == "I":
        a = np.array([a1, a2, a2, a1, a2, a2])
        b2 = -js * (a2 - a1) / (params.omega - jc)
        b = np.array([0.0, b2, -b2, 0.0, b2, -b2])
    else:
        a = np.array([a1, a2, -a2, -a1, -a2, a2])
        b2 = js * (a2 + a1) / (params.omega + jc)
        b = np.array([0.0, b2, b2, 0.0, -b2, -b2])
    return MeanFieldConfiguration(a, b)


def closed_form_csr(
    params: RingParameters, variant: str
) -> MeanFieldConfiguration | None:
    """Chiral branch of the hexagon for the requested pattern variant.

    Variant "I" imposes A = (A1, A2, A2, A1, A2, A2) with
    B = (0, B2, -B2, 0, B2, -B2) and B2 = -J sin(theta) (A2 - A1) /
    (omega - J cos(theta)); variant "II" imposes
    A = (A1, A2, -A2, -A1, -A2, A2) with B = (0, B2, B2, 0, -B2, -B2)
    and B2 = J sin(theta) (A2 + A1) / (omega + J cos(theta)).  On these
    patterns the full stationarity system collapses to two equations in
    (A1, A2), which are solved by damped Newton.

    The flux angle is checked (not assumed) to lie in the variant's
    chiral window, meaning the variant's momentum minimizes the
    critical coupling there; outside the window, at or below onset, or
    when only the trivial zero is reachable, None is returned.
    """
    if params.n != 6:
        raise ValueError("the chiral closed forms are specific to n=6")
    if variant not in _CSR_MOMENTUM_INDEX:
        raise ValueError(f"unknown chiral variant {variant!r}")
    from .normal_phase import classify_theta, critical_coupling

    target = _CSR_MOMENTUM_INDEX[variant]
    tied_indices = {
        round(abs(k) * 6 / (2.0 * math.pi)) for k in classify_theta(params).tied
    }
    if target not in tied_indices:
        return None
    k_var = 2.0 * math.pi * target / 6.0
    g1c = critical_coupling(params, k_var)
    if params.g1 <= g1c:
        return None
    scale = _amplitude_scale(params, g1c)

    def residual2(a1: float, a2: float) -> np.ndarray:
        config = _csr_pattern(params, variant, a1, a2)
        return stationarity_residuals(params, config)[:2]

    if variant == "I":
        seeds = [(scale, -scale), (-scale, scale), (2 * scale, -scale), (-2 * scale, scale)]
    else:
        seeds = [(scale, scale), (-scale, -scale), (2 * scale, scale), (-2 * scale, -scale),
                 (scale, -scale), (-scale, scale)]
    last = None
    any_converged = False
    for a1, a2 in seeds:
        x = np.array([a1, a2])
        converged = False
        for _ in range(200):
            r = residual2(*x)
            if np.max(np.abs(r)) < 1e-12:
                converged = True
                break
            h = 1e-7 * max(1.0, float(np.max(np.abs(x))))
            jac = np.empty((2, 2))
            for col in range(2):
                dx = np.zeros(2)
                dx[col] = h
                jac[:, col] = (residual2(*(x + dx)) - residual2(*(x - dx))) / (2 * h)
            try:
                step = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError:
                break
            f0 = float(np.dot(r, r))
            lam = 1.0
            for _ in range(30):
                trial = x + lam * step
                rt = residual2(*trial)
                if float(np.dot(rt, rt)) < f0:
                    x = trial
                    break
                lam *= 0.5
            else:
                break
        last = x
        if not converged:
            continue
        any_converged = True
        if np.max(np.abs(x)) > 1e-8:
            return _csr_pattern(params, variant, float(x[0]), float(x[1]))
    if not any_converged:
        raise ConvergenceError(
            f"chiral pattern {variant} did not converge at theta={params.theta}, "
            f"g1={params.g1}",
            last_iterate=last,
        )
    return None


def classify_solution(
    params: RingParameters,
    config: MeanFieldConfiguration,
    tol: float = 1e-6,
) -> PhaseLabel:
    """Match a converged configuration against the known phase patterns.

    Patterns are tested up to cyclic shifts and a global sign flip with
    componentwise tolerance ``tol``.  Chirality on chiral matches is
    the sign of the ring current.  Configurations matching nothing get
    the UNKNOWN label.
    """
    a, b = config.a, config.b
    scale = max(1.0, float(np.max(np.abs(config.stacked))))
    if np.max(np.abs(config.stacked)) <= tol * scale:
        return PhaseLabel("NP")
    b_zero = np.max(np.abs(b)) <= tol * scale
    if b_zero and np.max(a) - np.min(a) <= tol * scale:
        return PhaseLabel("FSR", momentum_index=0)
    if (
        b_zero
        and params.n % 2 == 0
        and np.max(np.abs(a + np.roll(a, 1))) <= tol * scale
    ):
        return PhaseLabel("AFSR", momentum_index=params.n // 2)
    if params.n == 6:
        for variant in ("I", "II"):
            if _matches_csr(config, variant, tol * scale):
                current = observables.ring_current(config)
                chirality = 1 if current > 0 else -1
                return PhaseLabel(
                    "CSR",
                    momentum_index=_CSR_MOMENTUM_INDEX[variant],
                    chirality=chirality,
                    variant=variant,
                )
    return PhaseLabel("UNKNOWN")


def _matches_csr(config: MeanFieldConfiguration, variant: str, tol: float) -> bool:
    for shift in range(6):
        for sign in (1.0, -1.0):
            a = sign * np.roll(config.a, shift)
            b = sign * np.roll(config.b, shift)
            if variant == "I":
                pattern_ok = (
                    abs(a[0] - a[3]) <= tol
                    and max(abs(a[1] - a[2]), abs(a[1] - a[4]), abs(a[1] - a[5])) <= tol
                    and max(abs(b[0]), abs(b[3])) <= tol
                    and max(abs(b[1] + b[2]), abs(b[1] - b[4]), abs(b[1] + b[5])) <= tol
                )
            else:
                pattern_ok = (
                    abs(a[0] + a[3]) <= tol
                    and max(abs(a[1] + a[2]), abs(a[1] + a[4]), abs(a[1] - a[5])) <= tol
                    and max(abs(b[0]), abs(b[3])) <= tol
                    and max(abs(b[1] - b[2]), abs(b[1] + b[4]), abs(b[1] + b[5])) <= tol
                )
            if pattern_ok and abs(b[1]) > tol and abs(a[0] - a[1]) > tol:
                return True
    return False


@dataclass(frozen=True)
class MinimizeStrategy:
    """Knobs for the multi-start minimizer.

    ``random_starts`` random draws are added to the closed-form
    branches (and their symmetry orbits) and any ``extra_seeds``; the
    draws are uniform in [-1.2 amp, 1.2 amp]^{2N} where amp is the
    uniform-branch amplitude scale, or sqrt(delta/omega) when that
    branch is undefined.
    """

    random_starts: int = 64
    seed: int = 0
    include_closed_forms: bool = True
    extra_seeds: tuple[MeanFieldConfiguration, ...] = ()
    tol: float = 1e-12
    max_iter: int = 200
    rng: np.random.Generator | None = None


@dataclass(frozen=True)
class SolverReport:
    """One local minimum found by ``minimize_energy``."""

    config: MeanFieldConfiguration
    energy: float
    residual_norm: float
    label: PhaseLabel
    iterations: int
    seed_origin: str


@dataclass(frozen=True)
class MinimizeResult:
    minima: tuple[SolverReport, ...]
    n_starts: int
    n_converged: int
    n_dropped: int

    @property
    def ground(self) -> SolverReport:
        return self.minima[0]

    def ground_family(self, rel_tol: float = 1e-10) -> tuple[SolverReport, ...]:
        """All minima degenerate with the global one in energy."""
        e0 = self.minima[0].energy
        span = rel_tol * max(1.0, abs(e0))
        return tuple(m for m in self.minima if m.energy <= e0 + span)


def _random_box_scale(params: RingParameters) -> float:
    try:
        g1c = _uniform_g1c(params, +1.0)
    except ValueError:
        return math.sqrt(params.delta / params.omega)
    amp = _amplitude_scale(params, g1c)
    if amp <= 0.0:
        return math.sqrt(params.delta / params.omega)
    return amp


def _closed_form_starts(
    params: RingParameters,
) -> list[tuple[str, MeanFieldConfiguration]]:
    starts: list[tuple[str, MeanFieldConfiguration]] = []
    fsr = closed_form_fsr(params)
    if fsr is not None:
        starts.append(("closed-form:FSR", fsr))
    if params.n % 2 == 0:
        afsr = closed_form_afsr(params)
        if afsr is not None:
            starts.append(("closed-form:AFSR", afsr))
    if params.n == 6:
        for variant in ("I", "II"):
            try:
                csr = closed_form_csr(params, variant)
            except ConvergenceError:
                csr = None
            if csr is not None:
                starts.append((f"closed-form:CSR-{variant}", csr))
    return starts


def minimize_energy(
    params: RingParameters, strategy: MinimizeStrategy | None = None
) -> MinimizeResult:
    """Find all distinct local minima of the mean-field energy.

    Every start (closed-form branches with their symmetry orbits,
    caller-supplied seeds, the zero configuration, and random draws) is
    refined by damped Newton on the stationarity residuals.  Converged
    stationary points with an indefinite Hessian are discarded, the
    survivors are deduplicated, and each surviving minimum's symmetry
    orbit is completed so degenerate families are reported in full.
    The result is sorted by energy, then lexicographically, so it is
    deterministic for a fixed strategy seed.
    """
    if strategy is None:
        strategy = MinimizeStrategy()
    starts: list[tuple[str, MeanFieldConfiguration]] = [
        ("zero", MeanFieldConfiguration.zero(params.n))
    ]
    if strategy.include_closed_forms:
        for origin, config in _closed_form_starts(params):
            starts.append((origin, config))
            for i, member in enumerate(symmetry_orbit(config, params)):
                starts.append((f"orbit:{origin}[{i}]", member))
    for i, seeded in enumerate(strategy.extra_seeds):
        starts.append((f"seed:{i}", seeded))
    rng = strategy.rng if strategy.rng is not None else np.random.default_rng(strategy.seed)
    box = 1.2 * _random_box_scale(params)
    for i in range(strategy.random_starts):
        draw = rng.uniform(-box, box, size=2 * params.n)
        starts.append((f"random:{i}", MeanFieldConfiguration.from_stacked(draw)))

    found: list[SolverReport] = []
    n_converged = 0
    for origin, start in starts:
        result = newton_refine(
            params, start, tol=strategy.tol, max_iter=strategy.max_iter
        )
        if not result.converged:
            continue
        n_converged += 1
        hessian_half = residual_jacobian(params, result.config)
        eigs = np.linalg.eigvalsh(hessian_half)
        if eigs[0] < -1e-8 * max(1.0, float(np.max(np.abs(eigs)))):
            continue
        if any(result.config.close_to(m.config, tol=1e-7) for m in found):
            continue
        found.append(
            SolverReport(
                config=result.config,
                energy=ground_energy(params, result.config),
                residual_norm=result.residual_norm,
                label=classify_solution(params, result.config),
                iterations=result.iterations,
                seed_origin=origin,
            )
        )

    completed = list(found)
    for report in found:
        for member in symmetry_orbit(report.config, params):
            if any(member.close_to(m.config, tol=1e-7) for m in completed):
                continue
            completed.append(
                SolverReport(
                    config=member,
                    energy=ground_energy(params, member),
                    residual_norm=residual_norm(params, member),
                    label=classify_solution(params, member),
                    iterations=0,
                    seed_origin=f"completion:{report.seed_origin}",
                )
            )

    completed.sort(key=lambda m: (m.energy, tuple(m.config.stacked.tolist())))
    return MinimizeResult(
        minima=tuple(completed),
        n_starts=len(starts),
        n_converged=n_converged,
        n_dropped=len(starts) - n_converged,
    )
