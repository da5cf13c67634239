"""Two-qubit polarization state left after tracing over arrival times.

Everything here is an independent cross-check of the overlap-based
concurrence: the 4x4 density matrix built from kappa is an X-state whose
Wootters concurrence equals |kappa|, and the general eigenvalue formula is
evaluated without using that shortcut.

Basis ordering of the 4x4 matrices is frozen as
{|s_a s_b>, |s_a s_b'>, |s_a' s_b>, |s_a' s_b'>}; golden values depend on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericsError

#: PSD tolerance; absorbs roundoff from kappa computed by quadrature.
PSD_TOLERANCE = 1e-10

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Y_PAIR = np.kron(_SIGMA_Y, _SIGMA_Y)


def normalize_jones(vec) -> np.ndarray:
    """Unit-norm Jones vector (two complex components)."""
    v = np.asarray(vec, dtype=complex).reshape(2)
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not math.isfinite(norm):
        raise NumericsError("cannot normalize a zero Jones vector")
    return v / norm


def orthogonal_jones(vec) -> np.ndarray:
    """The orthogonal polarization, with a fixed phase convention."""
    v = normalize_jones(vec)
    return np.array([-np.conj(v[1]), np.conj(v[0])])


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Validated 4x4 density matrix in the frozen product basis."""

    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise NumericsError("density matrix must be 4x4")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise NumericsError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-12 or abs(np.trace(rho).imag) > 1e-12:
            raise NumericsError("density matrix trace is not 1")
        if float(np.linalg.eigvalsh(rho).min()) < -PSD_TOLERANCE:
            raise NumericsError("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", rho)
        rho.setflags(write=False)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)


def density_matrix_from_overlap(kappa: complex) -> TwoQubitState:
    """State of the received pair given the waveform overlap kappa.

    rho = 1/2 (|s_a s_b><s_a s_b| + |s_a' s_b'><s_a' s_b'|
               + kappa |s_a s_b><s_a' s_b'| + conj(kappa) h.c.)
    """
    if abs(kappa) > 1.0 + 1e-9:
        raise NumericsError(f"|kappa| = {abs(kappa)!r} > 1: non-physical overlap")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 0.5
    rho[3, 3] = 0.5
    rho[0, 3] = 0.5 * kappa
    rho[3, 0] = 0.5 * np.conj(kappa)
    return TwoQubitState(rho)


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def wootters_concurrence(state: TwoQubitState) -> float:
    """General two-qubit concurrence from the spin-flipped spectrum.

    Uses the Hermitian equivalent sqrt(rho) (sy x sy) conj(rho) (sy x sy)
    sqrt(rho), whose eigenvalues are real and non-negative by construction,
    instead of the non-Hermitian product form.
    """
    rho = state.rho
    sq = _sqrtm_psd(rho)
    flipped = SIGMA_Y_PAIR @ rho.conj() @ SIGMA_Y_PAIR
    herm = sq @ flipped @ sq
    vals = np.clip(np.linalg.eigvalsh(herm), 0.0, None)
    lam = np.sqrt(vals)[::-1]  # decreasing
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def conditioned_partner_state(coefficients: np.ndarray, s_a) -> np.ndarray:
    """Bob's collapse polarization when Alice's photon collapses onto s_a.

    ``coefficients`` is the 2x2 matrix M of the pair state sum M_jk |j, k>;
    for a maximally entangled pair (M M^dag = I/2) the returned s_b satisfies
    <s_a, s_b_perp | pair> = 0, so the pair keeps the two-term form in the
    {s_a, s_b} bases.
    """
    m = np.asarray(coefficients, dtype=complex)
    if m.shape != (2, 2):
        raise NumericsError("coefficient matrix must be 2x2")
    if np.max(np.abs(m @ m.conj().T - 0.5 * np.eye(2))) > 1e-9:
        raise NumericsError("no PSP-aligned basis exists")
    s_a = normalize_jones(s_a)
    return normalize_jones(m.T @ np.conj(s_a))
