"""Parameter space, order-parameter container, and symmetry actions.

Everything downstream works with the two value types defined here:
``RingParameters`` (the physical inputs) and ``MeanFieldConfiguration``
(the 2N real displacement amplitudes).  Both are immutable, so they can
be shared freely between parallel workers.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

_THETA_SLACK = 1e-12

PHASE_KINDS = ("NP", "FSR", "AFSR", "CSR", "UNKNOWN", "FAILED")


@dataclass(frozen=True)
class RingParameters:
    """Physical inputs for a ring of n cavities with complex hopping.

    Energies are measured in units of ``omega``.  ``g1`` is the
    dimensionless coupling; the bare coupling is recovered via the
    ``g`` property as g1 * sqrt(delta * omega).
    """

    n: int = 6
    delta: float = 50.0
    hop: float = 0.05
    theta: float = 0.0
    g1: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"cavity count must be an integer >= 3, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not (self.omega > 0):
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not (self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not (self.g1 >= 0):
            raise ValueError(f"g1 must be nonnegative, got {self.g1}")
        if not (-math.pi - _THETA_SLACK <= self.theta <= math.pi + _THETA_SLACK):
            raise ValueError(f"theta must lie in [-pi, pi], got {self.theta}")
        for name in ("delta", "hop", "theta", "g1", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def g(self) -> float:
        """Bare coupling g = g1 * sqrt(delta * omega)."""
        return self.g1 * math.sqrt(self.delta * self.omega)

    @classmethod
    def from_bare(cls, g: float, **kwargs) -> "RingParameters":
        """Build parameters from the bare coupling instead of g1."""
        probe = cls(g1=0.0, **kwargs)
        return dataclasses.replace(probe, g1=g / math.sqrt(probe.delta * probe.omega))

    def replace(self, **kwargs) -> "RingParameters":
        return dataclasses.replace(self, **kwargs)


def _frozen_array(values, n=None) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("amplitude vectors must be one dimensional")
    if n is not None and arr.size != n:
        raise ValueError(f"expected length {n}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("amplitude vectors must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MeanFieldConfiguration:
    """Real and imaginary displacement amplitudes (A_n, B_n) on the ring.

    The complex per-site displacement is alpha_n = A_n + i B_n, with the
    site index cyclic.  Instances are immutable; the arrays are
    write-protected copies of the inputs.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _frozen_array(self.a)
        b = _frozen_array(self.b, n=a.size)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def alpha(self) -> np.ndarray:
        return self.a + 1j * self.b

    @property
    def stacked(self) -> np.ndarray:
        """The 2N vector [A_1..A_N, B_1..B_N] used by solvers."""
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_stacked(cls, x) -> "MeanFieldConfiguration":
        x = np.asarray(x, dtype=float)
        if x.size % 2:
            raise ValueError("stacked vector must have even length")
        half = x.size // 2
        return cls(x[:half], x[half:])

    @classmethod
    def zero(cls, n: int) -> "MeanFieldConfiguration":
        return cls(np.zeros(n), np.zeros(n))

    def shifted(self, s: int) -> "MeanFieldConfiguration":
        """Cyclic site relabeling n -> n + s."""
        return MeanFieldConfiguration(np.roll(self.a, s), np.roll(self.b, s))

    def negated(self) -> "MeanFieldConfiguration":
        return MeanFieldConfiguration(-self.a, -self.b)

    def close_to(self, other: "MeanFieldConfiguration", tol: float = 1e-9) -> bool:
        return (
            self.n == other.n
            and float(np.max(np.abs(self.stacked - other.stacked))) <= tol
        )


@dataclass(frozen=True)
class PhaseLabel:
    """Phase assignment of a configuration or of a boundary momentum.

    ``momentum_index`` is the integer m of the condensation momentum
    k = 2 pi m / N and is meaningful for CSR labels.  ``chirality`` is
    the sign of the ring current: +1 or -1 on chiral configurations, 0
    on non-chiral phases, and None when a CSR momentum is identified
    but the current direction is not determined (for example from
    normal-phase data alone).  ``variant`` distinguishes the two
    hexagon chiral patterns ("I" for |k| = 2 pi / 3, "II" for
    |k| = pi / 3) and is set only for n = 6.
    """

    kind: str
    momentum_index: int | None = None
    chirality: int | None = 0
    variant: str | None = None

    def __post_init__(self):
        if self.kind not in PHASE_KINDS:
            raise ValueError(f"unknown phase kind {self.kind!r}")
        if self.kind == "CSR":
            if self.chirality not in (1, -1, None):
                raise ValueError("CSR labels carry chirality +1, -1, or None")
            if self.momentum_index in (None, 0):
                raise ValueError("CSR labels need a nonzero momentum index")
        elif self.chirality != 0:
            raise ValueError(f"{self.kind} labels must have chirality 0")
        if self.kind == "FSR" and self.momentum_index not in (None, 0):
            raise ValueError("FSR condenses at momentum index 0")

    def text(self) -> str:
        """Short printable label used in tables and CSV output."""
        if self.kind != "CSR":
            return self.kind
        if self.variant is not None:
            return f"CSR-{self.variant}"
        return f"CSR(m={self.momentum_index})"


def constant_energy(params: RingParameters) -> float:
    """Additive constant offset E0 of the projected ring Hamiltonian.

    Evaluates N * [-delta/2 + (omega + 3 hop) g^2 / delta^2 - g^2 / delta]
    exactly in this form.  The middle term carries one more inverse power
    of delta than the last one; it is reproduced verbatim by design and
    must not be rescaled here.  The offset never enters any optimization
    objective, it only shifts reported total energies.
    """
    g2 = params.g ** 2
    return params.n * (
        -params.delta / 2.0
        + (params.omega + 3.0 * params.hop) * g2 / params.delta ** 2
        - g2 / params.delta
    )


def _orbit_key(config: MeanFieldConfiguration, tol: float) -> tuple:
    return tuple(np.round(config.stacked / tol).astype(np.int64).tolist())


def symmetry_orbit(
    config: MeanFieldConfiguration,
    params: RingParameters | None = None,
    tol: float = 1e-9,
) -> list[MeanFieldConfiguration]:
    """Orbit of a configuration under global sign flip and cyclic shifts.

    Returns the distinct members (componentwise tolerance ``tol``) in a
    deterministic order.  Uniform configurations give an orbit of two,
    the zero configuration gives one, and the hexagon chiral patterns
    give six, matching the ground-state degeneracies of the model.
    """
    if params is not None and config.n != params.n:
        raise ValueError("configuration length does not match parameter n")
    seen: dict[tuple, MeanFieldConfiguration] = {}
    for shift in range(config.n):
        rolled = config.shifted(shift)
        for member in (rolled, rolled.negated()):
            key = _orbit_key(member, tol)
            if key not in seen:
                seen[key] = member
    return [seen[key] for key in sorted(seen)]
