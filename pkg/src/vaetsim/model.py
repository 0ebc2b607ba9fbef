"""Physical parameter records and Hamiltonian constructors.

Units: all energies and rates are expressed in units of the donor
tunneling J (carried explicitly so display conversions stay a pure output
transform); times are in 1/J.

Basis conventions, fixed once for the whole package:

* single site: index 0 is the excited state ``|e>``, index 1 the ground
  state ``|g>``, so ``sigma_z = |e><e| - |g><g| = diag(1, -1)``;
* dimer: donor slot leftmost, ordering ``|ee>, |eg>, |ge>, |gg>``
  (indices 0..3), i.e. ``kron(donor, acceptor)``;
* dimer + vibration: ``kron(dimer, fock)``, index = 4-level dimer index
  times N plus the phonon number.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import as_complex_matrix, kron

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)

#: Dimer basis indices in the fixed ordering.
IDX_EE, IDX_EG, IDX_GE, IDX_GG = 0, 1, 2, 3

DIMER_STATE_NAMES = ("ee", "eg", "ge", "gg")


class FockTruncationWarning(UserWarning):
    """Thermal occupation too close to the Fock cutoff for comfort."""


@dataclass(frozen=True)
class DimerParams:
    """Chromophore dimer parameters, energies in units of J.

    ``j_tunnel`` is the donor tunneling (the unit itself), ``gamma`` the
    donor gain-loss rate, ``alpha`` the donor-acceptor coupling, and
    ``delta`` the acceptor half-gap (full gap 2*delta).
    """

    j_tunnel: float = 1.0
    gamma: float = 0.0
    alpha: float = 1.0
    delta: float = 8.0

    def __post_init__(self):
        if not self.j_tunnel > 0:
            raise ValueError(f"j_tunnel must be > 0, got {self.j_tunnel}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")


@dataclass(frozen=True)
class VibrationParams:
    """Vibrational mode parameters: frequency, donor coupling, temperature
    (as k_B T), and Fock-space truncation."""

    nu: float = 16.12
    kappa: float = 0.3
    kbt: float = 40.0
    fock_dim: int = 50

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.kbt < 0:
            raise ValueError(f"kbt must be >= 0, got {self.kbt}")
        if self.fock_dim < 2:
            raise ValueError(f"fock_dim must be >= 2, got {self.fock_dim}")

    @property
    def mean_occupation(self) -> float:
        """Bose-Einstein occupation 1/(e^{nu/kbt} - 1) (untruncated)."""
        if self.kbt == 0:
            return 0.0
        return 1.0 / math.expm1(self.nu / self.kbt)

    @property
    def fock_adequate(self) -> bool:
        """Truncation adequacy: mean occupation below fock_dim / 5."""
        return self.mean_occupation < self.fock_dim / 5.0


@dataclass(frozen=True)
class DissipationParams:
    """Acceptor spontaneous-emission rate for the Lindblad channel."""

    gamma_a: float = 0.0

    def __post_init__(self):
        if self.gamma_a < 0:
            raise ValueError(f"gamma_a must be >= 0, got {self.gamma_a}")


@dataclass(frozen=True)
class BasisLabel:
    """Human-readable label for one tensor-product basis state."""

    donor_state: str
    acceptor_state: str
    phonon_number: int = 0

    def __post_init__(self):
        if self.donor_state not in ("g", "e"):
            raise ValueError(f"donor_state must be 'g' or 'e', got {self.donor_state!r}")
        if self.acceptor_state not in ("g", "e"):
            raise ValueError(
                f"acceptor_state must be 'g' or 'e', got {self.acceptor_state!r}"
            )
        if self.phonon_number < 0:
            raise ValueError(f"phonon_number must be >= 0, got {self.phonon_number}")


def basis_index(label: BasisLabel, fock_dim: int = 1) -> int:
    """Map a label to its index in the ``kron(dimer, fock)`` ordering."""
    if label.phonon_number >= fock_dim:
        raise ValueError(
            f"phonon_number {label.phonon_number} outside Fock dimension {fock_dim}"
        )
    dimer = 2 * (0 if label.donor_state == "e" else 1) + (
        0 if label.acceptor_state == "e" else 1
    )
    return dimer * fock_dim + label.phonon_number


def basis_label(index: int, fock_dim: int = 1) -> BasisLabel:
    """Inverse of :func:`basis_index`."""
    if not 0 <= index < 4 * fock_dim:
        raise ValueError(f"index {index} outside dimension {4 * fock_dim}")
    dimer, n = divmod(index, fock_dim)
    return BasisLabel(
        donor_state="e" if dimer < 2 else "g",
        acceptor_state="e" if dimer % 2 == 0 else "g",
        phonon_number=n,
    )


def lowering_operator(fock_dim: int) -> np.ndarray:
    """Truncated boson annihilation operator; a|N-1> ladder top is cut hard."""
    return np.diag(np.sqrt(np.arange(1, fock_dim, dtype=float)), 1).astype(
        np.complex128
    )


def number_operator(fock_dim: int) -> np.ndarray:
    return np.diag(np.arange(fock_dim, dtype=float)).astype(np.complex128)


def dimer_hamiltonian(p: DimerParams) -> np.ndarray:
    """4x4 dimer Hamiltonian in the ``|ee>,|eg>,|ge>,|gg>`` basis.

    ``-i gamma sigma_z(d) + J sigma_x(d) + delta sigma_z(a)
    + alpha sigma_x(d) sigma_x(a)``.  Complex symmetric; PT-symmetric
    under parity ``sigma_x(d)`` and complex conjugation.
    """
    return (
        -1j * p.gamma * kron(SIGMA_Z, IDENTITY_2)
        + p.j_tunnel * kron(SIGMA_X, IDENTITY_2)
        + p.delta * kron(IDENTITY_2, SIGMA_Z)
        + p.alpha * kron(SIGMA_X, SIGMA_X)
    )


def donor_hamiltonian(j: float, gamma: float) -> np.ndarray:
    """2x2 donor monomer: ``-i gamma sigma_z + J sigma_x``."""
    if not j > 0:
        raise ValueError(f"j must be > 0, got {j}")
    return -1j * gamma * SIGMA_Z + j * SIGMA_X


def check_fock_adequacy(v: VibrationParams, stacklevel: int = 3) -> bool:
    """Warn (never fail) when the thermal occupation crowds the truncation."""
    if not v.fock_adequate:
        warnings.warn(
            f"mean thermal occupation {v.mean_occupation:.3g} is not small "
            f"against fock_dim={v.fock_dim} (adequacy bound fock_dim/5); "
            "results may be truncation-limited",
            FockTruncationWarning,
            stacklevel=stacklevel,
        )
    return v.fock_adequate


def full_hamiltonian(p: DimerParams, v: VibrationParams) -> np.ndarray:
    """Dimer + vibration Hamiltonian on the 4N-dimensional product space.

    ``H = H_dim (x) I_N + kappa sigma_z(d) (x) (a + a^dag)
    + nu I_4 (x) a^dag a``.  Emits :class:`FockTruncationWarning` when the
    thermal occupation is not comfortably inside the truncation.
    """
    check_fock_adequacy(v)
    n = v.fock_dim
    a = lowering_operator(n)
    return (
        kron(dimer_hamiltonian(p), np.eye(n))
        + v.kappa * kron(kron(SIGMA_Z, IDENTITY_2), a + a.conj().T)
        + v.nu * kron(np.eye(4), number_operator(n))
    )


def effective_single_excitation_hamiltonian(
    p: DimerParams, v: VibrationParams
) -> np.ndarray:
    """Projection onto span{|eg>, |ge>} (x) Fock, ordering (|eg>, |ge>).

    ``(-delta - i gamma) s_z + alpha s_x + kappa s_z (a + a^dag)
    + nu a^dag a`` with the pseudo-spin defined on the single-excitation
    pair.  At kappa = 0 the two dimer-like eigenvalue branches are
    ``+/- sqrt(alpha^2 - (gamma - i delta)^2)`` shifted by the phonon
    ladder.
    """
    n = v.fock_dim
    a = lowering_operator(n)
    c = -p.delta - 1j * p.gamma
    return (
        c * kron(SIGMA_Z, np.eye(n))
        + p.alpha * kron(SIGMA_X, np.eye(n))
        + v.kappa * kron(SIGMA_Z, a + a.conj().T)
        + v.nu * kron(IDENTITY_2, number_operator(n))
    )


def passive_pt_offset(h_d, gamma: float) -> np.ndarray:
    """Loss-offset form ``-i gamma I + H_d`` of a 2x2 donor Hamiltonian.

    Shifts every eigenvalue by ``-i gamma``, turning balanced gain/loss
    into pure loss.
    """
    m = as_complex_matrix(h_d, "passive offset input")
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    return m - 1j * gamma * np.eye(2)


def uphill_condition(p: DimerParams) -> tuple[bool, float]:
    """Whether donor-to-acceptor transfer is uphill: delta - J > alpha / 2.

    Returns the boolean and the margin ``delta - J - alpha/2`` in units
    of J.
    """
    margin = p.delta - p.j_tunnel - p.alpha / 2.0
    return margin > 0, margin
