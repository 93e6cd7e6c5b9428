"""Quadratic bosonic forms around a mean-field point and their spectra.

The displaced-frame Hamiltonian is bilinear in the fluctuation
operators.  This module assembles the 2N x 2N coefficient matrix and
extracts excitation energies by diagonalizing the dynamical matrix,
which stays well defined at the gapless critical point (a Cholesky
based para-unitary factorization would fail exactly there).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PairingError
from .meanfield import site_quantities
from .model import MeanFieldConfiguration, RingParameters


@dataclass(frozen=True)
class QuadraticForm:
    """Coefficient matrix M of H = (1/2) Psi^dag M Psi + const.

    Psi stacks (a_1 .. a_N, a_1^dag .. a_N^dag).  M is hermitian with
    block structure [[h, d], [conj(d), conj(h)]]; h carries the number
    conserving part (diagonal omega - 2 chi_n plus the complex hopping)
    and d the anomalous part (diagonal -2 chi_n).  ``energy_unit``
    records omega for tolerance bookkeeping.
    """

    matrix: np.ndarray
    energy_unit: float = 1.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError("quadratic form must be a square 2N x 2N matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
            raise ValueError("quadratic form must be hermitian")
        n = m.shape[0] // 2
        d = m[:n, n:]
        if np.max(np.abs(d - d.T)) > 1e-10 * scale:
            raise ValueError("anomalous block must be symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.size // 2

    @property
    def h(self) -> np.ndarray:
        return self.matrix[: self.n, : self.n]

    @property
    def d(self) -> np.ndarray:
        return self.matrix[: self.n, self.n :]


def bilinear_matrix(
    params: RingParameters, config: MeanFieldConfiguration
) -> QuadraticForm:
    """Fluctuation Hamiltonian around a displacement configuration.

    Per site the number-conserving coefficient is omega - 2 chi_n and
    the anomalous coefficient -chi_n on both double-creation and
    double-annihilation terms, with chi_n = lambda_n^2 / delta_n
    evaluated at the configuration's real amplitudes; neighboring sites
    couple through J e^{i theta} in the forward direction.
    """
    if config.n != params.n:
        raise ValueError("configuration length does not match parameter n")
    n = params.n
    chi = site_quantities(params, config.a).chi_n
    h = np.diag(params.omega - 2.0 * chi).astype(complex)
    phase = params.hop * np.exp(1j * params.theta)
    for site in range(n):
        h[site, (site + 1) % n] += phase
        h[(site + 1) % n, site] += np.conj(phase)
    d = np.diag(-2.0 * chi).astype(complex)
    top = np.concatenate([h, d], axis=1)
    bottom = np.concatenate([d.conj(), h.conj()], axis=1)
    return QuadraticForm(np.concatenate([top, bottom], axis=0), params.omega)


@dataclass(frozen=True)
class ExcitationSpectrum:
    """Sorted excitation energies with a stability verdict.

    ``stable`` is true when the dynamical spectrum is real (within
    1e-8 of its scale) and the coefficient matrix is positive
    semidefinite, which together certify the expansion point as a
    local minimum.  ``zero_modes`` counts energies below 1e-7 in units
    of the form's energy unit.
    """

    energies: np.ndarray
    stable: bool
    zero_modes: int

    def __post_init__(self):
        arr = np.array(self.energies, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "energies", arr)


def excitation_spectrum(form: QuadraticForm) -> ExcitationSpectrum:
    """Diagonalize the dynamical matrix and pair eigenvalues as +/- eps.

    The eigenvalues of eta M (eta = diag(+1 .. +1, -1 .. -1)) come in
    opposite-sign pairs for a valid stationary point; after sorting by
    real part, the i-th smallest is matched against the i-th largest.
    A mismatch beyond 1e-6 of the spectral scale raises
    ``PairingError``.
    """
    n = form.n
    eta = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
    eigenvalues = np.linalg.eigvals(eta @ form.matrix)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    real_ok = bool(np.max(np.abs(eigenvalues.imag)) <= 1e-8 * scale)
    re = np.sort(eigenvalues.real)
    energies = np.empty(n)
    for i in range(n):
        lo, hi = re[i], re[2 * n - 1 - i]
        if abs(lo + hi) > 1e-6 * scale:
            raise PairingError(
                f"eigenvalues {lo:.6e} and {hi:.6e} do not form a +/- pair"
            )
        energies[i] = 0.5 * (hi - lo)
    energies = np.sort(energies)
    m_eigs = np.linalg.eigvalsh(0.5 * (form.matrix + form.matrix.conj().T))
    m_scale = max(1.0, float(np.max(np.abs(m_eigs))))
    psd_ok = bool(m_eigs[0] >= -1e-8 * m_scale)
    zero_tol = 1e-7 * form.energy_unit
    return ExcitationSpectrum(
        energies=energies,
        stable=real_ok and psd_ok,
        zero_modes=int(np.sum(np.abs(energies) < zero_tol)),
    )
