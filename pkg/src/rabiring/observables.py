"""Physical diagnostics of a mean-field configuration.

Ring and subring photon currents, in-plane spin vectors, the discrete
winding number, and the magnetic-analogy coupling regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousWindingError, WindingUndefinedError
from .model import MeanFieldConfiguration, RingParameters


@dataclass(frozen=True)
class CurrentReport:
    """Ring current and the two next-nearest-neighbor subring currents."""

    ring: float
    odd_subring: float
    even_subring: float


def ring_current(config: MeanFieldConfiguration) -> float:
    """Coherent expectation of the ring current operator.

    The photon current i sum_n (a_n^dag a_{n+1} - h.c.) evaluates on a
    displaced state to I = -2 sum_n (A_n B_{n+1} - B_n A_{n+1}), cyclic.
    """
    a, b = config.a, config.b
    return float(-2.0 * np.sum(a * np.roll(b, -1) - b * np.roll(a, -1)))


def _loop_current(config: MeanFieldConfiguration, sites: tuple[int, int, int]) -> float:
    a, b = config.a, config.b
    total = 0.0
    for i, j in zip(sites, sites[1:] + sites[:1]):
        total += -2.0 * (a[i] * b[j] - b[i] * a[j])
    return total


def subring_currents(config: MeanFieldConfiguration) -> tuple[float, float]:
    """Currents around the odd (1,3,5) and even (2,4,6) site triangles.

    Mean-field expectations of i [(a_1^dag a_3 + a_3^dag a_5 +
    a_5^dag a_1) - h.c.] and the even-site analog.  Only defined on the
    hexagon.
    """
    if config.n != 6:
        raise ValueError("subring currents are specific to n=6")
    odd = _loop_current(config, (0, 2, 4))
    even = _loop_current(config, (1, 3, 5))
    return (odd, even)


def current_report(config: MeanFieldConfiguration) -> CurrentReport:
    odd, even = subring_currents(config)
    return CurrentReport(ring=ring_current(config), odd_subring=odd, even_subring=even)


@dataclass(frozen=True)
class SpinField:
    """In-plane magnetization vectors (A_n, -B_n), one per site."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("spin field must be an (N, 2) array")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def spin_vectors(config: MeanFieldConfiguration) -> SpinField:
    return SpinField(np.column_stack([config.a, -config.b]))


def winding_number(field: SpinField, min_norm: float = 1e-9) -> int:
    """Net number of turns of the spin vectors around the ring.

    Sums the wrapped angle increments between cyclically neighboring
    vectors and divides by 2 pi.  The sum is asserted to land on an
    integer within 1e-6.  Raises ``WindingUndefinedError`` when a
    vector is shorter than ``min_norm`` and ``AmbiguousWindingError``
    when a step is a half turn within 1e-9 (antipodal neighbors, as in
    the staggered phase, have no preferred rotation direction).
    """
    vectors = field.vectors
    norms = np.hypot(vectors[:, 0], vectors[:, 1])
    if np.any(norms <= min_norm):
        raise WindingUndefinedError(
            "winding is undefined: a spin vector has (near-)zero length"
        )
    angles = np.arctan2(vectors[:, 1], vectors[:, 0])
    steps = np.diff(np.concatenate([angles, angles[:1]]))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    steps = np.where(steps <= -np.pi + 1e-15, steps + 2.0 * np.pi, steps)
    if np.any(np.abs(np.abs(steps) - np.pi) < 1e-9):
        raise AmbiguousWindingError(
            "winding is ambiguous: neighboring spin vectors are antipodal"
        )
    total = float(np.sum(steps)) / (2.0 * np.pi)
    nearest = round(total)
    assert abs(total - nearest) < 1e-6, f"winding sum {total} is not near an integer"
    return int(nearest)


@dataclass(frozen=True)
class MagneticCouplings:
    """Sign structure of the magnetic analog of the ring model.

    ``xy_sign`` is the sign of J cos(theta) (negative means the planar
    exchange is ferromagnetic), ``dm`` is the antisymmetric exchange
    scale J sin(theta), and ``regime`` tags which term dominates.
    """

    xy_sign: int
    dm: float
    regime: str


def magnetic_couplings(params: RingParameters) -> MagneticCouplings:
    """Classify the magnetic regime of the flux angle.

    The planar exchange scales with J cos(theta) and the antisymmetric
    (chirality-favoring) exchange with J sin(theta).  The regime is
    "DM-dominated" when |sin| exceeds |cos| (flux angle within an
    eighth turn of +/- pi/2), otherwise "XY-ferro" for J cos(theta) < 0
    and "XY-antiferro" for J cos(theta) > 0.
    """
    xy = params.hop * math.cos(params.theta)
    dm = params.hop * math.sin(params.theta)
    if abs(dm) > abs(xy):
        regime = "DM-dominated"
    elif xy < 0:
        regime = "XY-ferro"
    else:
        regime = "XY-antiferro"
    xy_sign = 0 if xy == 0 else (1 if xy > 0 else -1)
    return MagneticCouplings(xy_sign=xy_sign, dm=dm, regime=regime)
