"""Closed-form normal-phase diagnostics.

Dispersion, excitation energies, momentum-resolved critical coupling,
flux-angle phase boundaries, and the general-N census of condensation
momenta.  Everything here is a pure function of the parameter values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularDenominatorError
from .model import PhaseLabel, RingParameters

_TIE_TOL = 1e-12


def momentum_grid(n: int) -> np.ndarray:
    """The n ring momenta k = 2 pi m / n reduced to (-pi, pi], sorted."""
    m = np.arange(n)
    ks = 2.0 * np.pi * m / n
    ks = np.where(ks > np.pi + 1e-15, ks - 2.0 * np.pi, ks)
    return np.sort(ks)


def dispersion(params: RingParameters, k) -> np.ndarray | float:
    """Photon dispersion omega_k = omega (1 - 2 g1^2) + 2 J cos(theta - k)."""
    return params.omega * (1.0 - 2.0 * params.g1 ** 2) + 2.0 * params.hop * np.cos(
        params.theta - np.asarray(k, dtype=float)
    )


def np_excitation(params: RingParameters, k: float) -> float | None:
    """Normal-phase excitation energy at momentum k.

    Returns (1/2) [sqrt((w_k + w_-k)^2 - 16 omega^2 g1^4) + w_k - w_-k].
    A radicand within round-off of zero (relative to the size of the
    two squared terms) is treated as exactly zero, so evaluating right
    at the gap-closing coupling stays well defined.  A genuinely
    negative radicand means the zero-displacement state is not a valid
    expansion point at these parameters and None is returned instead
    of a number.
    """
    wk = float(dispersion(params, k))
    wmk = float(dispersion(params, -k))
    sym_sq = (wk + wmk) ** 2
    pair_sq = 16.0 * (params.omega * params.g1 ** 2) ** 2
    radicand = sym_sq - pair_sq
    if radicand < 0.0:
        if radicand < -1e-12 * (sym_sq + pair_sq):
            return None
        radicand = 0.0
    return 0.5 * (math.sqrt(radicand) + wk - wmk)


def critical_coupling(params: RingParameters, k: float) -> float:
    """Coupling g1c(k) at which the momentum-k excitation gap closes.

    g1c(k) = (1/2) sqrt[(1 + 4 (J/w) cos(theta) cos(k) + 4 Jp Jm)
                        / (1 + 2 (J/w) cos(theta) cos(k))]
    with Jp = (J/w) cos(theta + k) and Jm = (J/w) cos(theta - k).
    """
    jw = params.hop / params.omega
    th = params.theta
    den = 1.0 + 2.0 * jw * math.cos(th) * math.cos(k)
    if abs(den) < 1e-12:
        raise SingularDenominatorError(
            f"critical coupling denominator vanishes at theta={th}, k={k}, J/omega={jw}"
        )
    jp = jw * math.cos(th + k)
    jm = jw * math.cos(th - k)
    num = 1.0 + 4.0 * jw * math.cos(th) * math.cos(k) + 4.0 * jp * jm
    ratio = num / den
    if ratio < 0.0:
        raise ValueError(
            f"no real critical coupling at theta={th}, k={k}, J/omega={jw}"
        )
    return 0.5 * math.sqrt(ratio)


def _momentum_index(n: int, k: float) -> int:
    return round(abs(k) * n / (2.0 * np.pi))


def _label_for_momentum(n: int, k: float) -> PhaseLabel:
    m = _momentum_index(n, k)
    if m == 0:
        return PhaseLabel("FSR", momentum_index=0)
    if 2 * m == n:
        return PhaseLabel("AFSR", momentum_index=m)
    variant = None
    if n == 6:
        variant = "I" if m == 2 else "II"
    return PhaseLabel("CSR", momentum_index=m, chirality=None, variant=variant)


@dataclass(frozen=True)
class ThetaClassification:
    """Which momentum condenses first at a given flux angle.

    ``k_star`` is the momentum whose excitation gap actually closes at
    the threshold, ``g1c`` its critical coupling, and ``tied`` the
    tuple of all grid momenta whose critical couplings agree with the
    minimum within 1e-12 (so +/- pairs always appear together, and
    four-way ties show up at boundary angles).  The dispersion's odd
    part 4 J sin(theta) sin(k) keeps one member of each +/- pair
    gapped, so for angles with positive sine the soft momentum is the
    negative member; k_star is nonnegative when the odd part vanishes.
    The label's chirality is None for chiral momenta because
    normal-phase data cannot fix a current direction.
    """

    k_star: float
    g1c: float
    label: PhaseLabel
    tied: tuple[float, ...]


def classify_theta(params: RingParameters) -> ThetaClassification:
    """Find the momentum with the smallest critical coupling.

    The value of params.g1 is irrelevant here.  When several distinct
    |k| classes tie (a boundary angle), the smallest |k| class is
    reported as k_star (signed toward the branch where the gap closes)
    and the full tied set is preserved.
    """
    if not params.hop > 0:
        raise ValueError("classification needs a positive hopping amplitude")
    ks = momentum_grid(params.n)
    g1cs = np.array([critical_coupling(params, float(k)) for k in ks])
    gmin = float(np.min(g1cs))
    tied = tuple(float(k) for k in ks[g1cs <= gmin + _TIE_TOL])
    k_star = min(abs(k) for k in tied)
    if k_star > _TIE_TOL and abs(k_star - math.pi) > _TIE_TOL:
        if math.sin(params.theta) > 0.0:
            k_star = -k_star
    return ThetaClassification(
        k_star=k_star,
        g1c=gmin,
        label=_label_for_momentum(params.n, k_star),
        tied=tied,
    )


def _argmin_class(n: int, j_over_omega: float, theta: float) -> int:
    params = RingParameters(n=n, hop=j_over_omega, theta=theta, omega=1.0)
    return _momentum_index(n, classify_theta(params).k_star)


def _closed_form_boundaries_n6(j_over_omega: float) -> np.ndarray:
    c = (math.sqrt(1.0 + 8.0 * j_over_omega ** 2) - 1.0) / (4.0 * j_over_omega)
    pos = np.array([math.acos(c), math.pi / 2.0, math.acos(-c)])
    return np.sort(np.concatenate([-pos, pos]))


def _scan_boundaries(n: int, j_over_omega: float, points: int = 2001) -> np.ndarray:
    thetas = np.linspace(0.0, np.pi, points, endpoint=False)
    classes = [_argmin_class(n, j_over_omega, float(t)) for t in thetas]
    pos = []
    for i in range(len(thetas) - 1):
        if classes[i] == classes[i + 1]:
            continue
        lo, hi = float(thetas[i]), float(thetas[i + 1])
        clo = classes[i]
        while hi - lo > 1e-9:
            mid = 0.5 * (lo + hi)
            if _argmin_class(n, j_over_omega, mid) == clo:
                lo = mid
            else:
                hi = mid
        pos.append(0.5 * (lo + hi))
    pos = np.array(pos)
    return np.sort(np.concatenate([-pos, pos]))


def phase_boundaries(
    n: int, j_over_omega: float, method: str = "auto"
) -> np.ndarray:
    """Flux angles separating the superradiant phases, sorted.

    For n = 6 the default is the closed-form set {+/- pi/2} together
    with +/- arccos(+/- c) where c = (sqrt(1 + 8 (J/w)^2) - 1)/(4 J/w).
    ``method="scan"`` instead locates the angles where the argmin of
    the momentum-resolved critical coupling switches, by a dense scan
    over [0, pi) plus bisection to 1e-9, mirrored to negative angles.
    The two methods answer slightly different questions (closed-form
    level crossings of g1c versus onset argmin switches) and are both
    exposed so they can be compared.
    """
    if n < 3:
        raise ValueError("need at least 3 cavities")
    if not j_over_omega > 0:
        raise ValueError("boundaries need a positive hopping amplitude")
    if method not in ("auto", "closed-form", "scan"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed-form" and n != 6:
        raise ValueError("the closed-form boundary set is specific to n=6")
    if method == "auto":
        method = "closed-form" if n == 6 else "scan"
    if method == "closed-form":
        return _closed_form_boundaries_n6(j_over_omega)
    return _scan_boundaries(n, j_over_omega)


def phase_census(n: int, j_over_omega: float = 0.05) -> tuple[int, int, int]:
    """Count distinct phase kinds over theta in [0, pi).

    Returns (number of CSR momentum classes, number of FSR phases,
    number of AFSR phases) found by sweeping the argmin classification
    on a dense angle grid.
    """
    if n < 3:
        raise ValueError("need at least 3 cavities")
    thetas = np.linspace(0.0, np.pi, 2001, endpoint=False)
    csr: set[int] = set()
    fsr = afsr = 0
    for t in thetas:
        m = _argmin_class(n, j_over_omega, float(t))
        if m == 0:
            fsr = 1
        elif 2 * m == n:
            afsr = 1
        else:
            csr.add(m)
    return (len(csr), fsr, afsr)
