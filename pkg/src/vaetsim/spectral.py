"""Non-Hermitian spectrum of the dimer: closed forms, exceptional points,
eigenvector coalescence, and vibrational transition matrix elements.

Eigenvalue labels follow the closed-form branch convention
``lambda_1 = -lambda_2`` (inner "-" branch) and ``lambda_3 = -lambda_4``
(inner "+" branch); numerically computed eigenvalues are matched to these
labels by nearest assignment.  For delta > 0 the dimer hosts a single
two-fold degenerate line of second-order exceptional points where the
pairs (1,3) and (2,4) coalesce simultaneously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NumericError, PhaseDomainError
from .linalg import EigenSystem, eig_general
from .model import IDENTITY_2, SIGMA_Z, DimerParams, dimer_hamiltonian, kron

#: Acceptance bound (radians) on the principal angle between coalescing
#: right eigenvectors at a second-order EP; eigenvectors approach each
#: other with square-root sensitivity, so machine-level parameter accuracy
#: gives angles far below this.
EP_ANGLE_TOL = 1e-3


@dataclass(frozen=True)
class SortedDimerSpectrum:
    """The four branch-labelled dimer eigenvalues, units of J."""

    lambda1: complex
    lambda2: complex
    lambda3: complex
    lambda4: complex

    @property
    def values(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3, self.lambda4])

    def transition(self, j: int, k: int) -> complex:
        """Transition value lambda_j - lambda_k, 1-based indices."""
        vals = self.values
        return vals[j - 1] - vals[k - 1]


@dataclass(frozen=True)
class EPReport:
    """Location and classification of an exceptional point."""

    gamma_star: float
    order_n: int
    degeneracy_s: int
    coalesced_groups: tuple[tuple[int, ...], ...]
    eigvec_min_angle: float
    transition_count: int


@dataclass(frozen=True)
class ExceptionalLine:
    """EP locations traced over the donor-acceptor coupling at fixed delta."""

    delta: float
    samples: tuple[tuple[float, float], ...]  # (alpha, gamma_star) pairs


def simultaneous_transition_count(s: int, n: int, total_dim: int) -> int:
    """Number of single-phonon transitions between eigenstates of distinct
    coalescing groups at an s-fold degenerate n-th order EP.

    ``s(s-1)n^2/2`` for s > 1; for a non-degenerate EP each of the n
    coalesced states can reach the remaining states (n transitions) unless
    the EP swallows the whole spectrum, in which case there are none.
    """
    if s > 1:
        return s * (s - 1) * n * n // 2
    if n == total_dim:
        return 0
    return n


def dimer_spectrum_closed_form(p: DimerParams) -> SortedDimerSpectrum:
    """Closed-form dimer eigenvalues on the principal square-root branch.

    With ``xi = alpha^2 + J^2 - gamma^2 + delta^2`` and inner radical
    ``r = sqrt(alpha^2 J^2 + (J^2 - gamma^2) delta^2)``:
    ``lambda_1 = -lambda_2 = -sqrt(xi - 2r)`` and
    ``lambda_3 = -lambda_4 = -sqrt(xi + 2r)``.
    """
    j, g, a, d = p.j_tunnel, p.gamma, p.alpha, p.delta
    xi = a * a + j * j - g * g + d * d
    r = np.sqrt(complex(a * a * j * j + (j * j - g * g) * d * d))
    l1 = -np.sqrt(xi - 2.0 * r)
    l3 = -np.sqrt(xi + 2.0 * r)
    return SortedDimerSpectrum(
        lambda1=complex(l1), lambda2=complex(-l1),
        lambda3=complex(l3), lambda4=complex(-l3),
    )


def match_to_closed_form(
    values: np.ndarray, spectrum: SortedDimerSpectrum
) -> np.ndarray:
    """Permutation mapping branch labels to entries of ``values``.

    ``perm[j]`` is the index into ``values`` assigned to ``lambda_{j+1}``,
    chosen by minimum total distance (optimal assignment).
    """
    target = spectrum.values
    cost = np.abs(values[None, :] - target[:, None])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(4, dtype=int)
    perm[rows] = cols
    return perm


def dimer_eigensystem_sorted(p: DimerParams) -> tuple[SortedDimerSpectrum, np.ndarray]:
    """Numerical dimer eigensystem with columns ordered as psi_1..psi_4."""
    spec = dimer_spectrum_closed_form(p)
    sys = eig_general(dimer_hamiltonian(p))
    perm = match_to_closed_form(sys.values, spec)
    return spec, sys.right_vectors[:, perm]


def donor_eigensystem(j: float, gamma: float) -> EigenSystem:
    """Closed-form donor monomer eigensystem.

    Eigenvalues ``-/+ sqrt(J^2 - gamma^2)``; unnormalized eigenvectors
    ``(-(sqrt(J^2-gamma^2) + i gamma)/J, 1)`` and
    ``((sqrt(J^2-gamma^2) - i gamma)/J, 1)``, returned unit-normalized.
    At gamma = J both collapse onto ``(-i, 1)/sqrt(2)``.
    """
    if not j > 0:
        raise ValueError(f"j must be > 0, got {j}")
    root = np.sqrt(complex(j * j - gamma * gamma))
    values = np.array([-root, root])
    v1 = np.array([-(root + 1j * gamma) / j, 1.0])
    v2 = np.array([(root - 1j * gamma) / j, 1.0])
    vectors = np.column_stack([v1 / np.linalg.norm(v1), v2 / np.linalg.norm(v2)])
    h = np.array([[-1j * gamma, j], [j, 1j * gamma]], dtype=np.complex128)
    residuals = np.linalg.norm(h @ vectors - vectors * values, axis=0)
    return EigenSystem(values=values, right_vectors=vectors, residuals=residuals)


def principal_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Principal angle between the spans of two vectors, in radians."""
    overlap = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(math.acos(min(1.0, overlap)))


def _ep_inner_radical(gamma: float, p: DimerParams) -> float:
    j, a, d = p.j_tunnel, p.alpha, p.delta
    return a * a * j * j + (j * j - gamma * gamma) * d * d


def find_ep(p: DimerParams) -> EPReport:
    """Locate the two-fold degenerate second-order EP in gamma, delta > 0.

    The inner radical ``alpha^2 J^2 + (J^2 - gamma^2) delta^2`` is strictly
    decreasing in gamma^2, so its root is bracketed and bisected to machine
    precision; the closed form ``J sqrt(1 + alpha^2/delta^2)`` seeds the
    bracket.  (Bisection runs to full double precision: the EP certificate,
    a vanishing eigenvalue gap, needs gamma* to much better than 1e-10.)
    """
    if not p.delta > 0:
        raise PhaseDomainError(
            "find_ep requires delta > 0; use classify_delta_zero for delta = 0"
        )
    seed = p.j_tunnel * math.sqrt(1.0 + (p.alpha / p.delta) ** 2)
    lo, hi = 0.5 * seed, 2.0 * seed
    if not (_ep_inner_radical(lo, p) > 0 > _ep_inner_radical(hi, p)):
        raise NumericError(
            f"EP bracket failed: f({lo})={_ep_inner_radical(lo, p):.3e}, "
            f"f({hi})={_ep_inner_radical(hi, p):.3e}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _ep_inner_radical(mid, p) > 0:
            lo = mid
        else:
            hi = mid
    gamma_star = 0.5 * (lo + hi)

    at_ep = DimerParams(p.j_tunnel, gamma_star, p.alpha, p.delta)
    _, vectors = dimer_eigensystem_sorted(at_ep)
    angle13 = principal_angle(vectors[:, 0], vectors[:, 2])
    angle24 = principal_angle(vectors[:, 1], vectors[:, 3])
    return EPReport(
        gamma_star=gamma_star,
        order_n=2,
        degeneracy_s=2,
        coalesced_groups=((1, 3), (2, 4)),
        eigvec_min_angle=min(angle13, angle24),
        transition_count=simultaneous_transition_count(2, 2, 4),
    )


def trace_exceptional_line(
    delta: float, alpha_grid, j_tunnel: float = 1.0
) -> ExceptionalLine:
    """EP location per alpha at fixed delta; gamma* must come out strictly
    increasing in alpha (it does, from the closed form)."""
    alphas = np.asarray(alpha_grid, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0:
        raise ValueError("alpha_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(alphas) <= 0):
        raise ValueError("alpha_grid must be strictly increasing")
    samples = []
    for a in alphas:
        try:
            rep = find_ep(DimerParams(j_tunnel, 0.0, float(a), delta))
        except (NumericError, PhaseDomainError) as exc:
            raise NumericError(f"EP trace failed at alpha={a}: {exc}") from exc
        samples.append((float(a), rep.gamma_star))
    gammas = [g for _, g in samples]
    if np.any(np.diff(gammas) <= 0):
        raise NumericError("traced exceptional line is not strictly increasing")
    return ExceptionalLine(delta=delta, samples=tuple(samples))


def classify_delta_zero(j: float, alpha: float) -> list[EPReport]:
    """EP structure of the gapless-acceptor dimer (delta = 0).

    The branches reduce to ``-/+ sqrt((alpha - J)^2 - gamma^2)`` and
    ``-/+ sqrt((alpha + J)^2 - gamma^2)``: for alpha = 0 all four
    eigenvalues coalesce at gamma = J (fourth-order point); for alpha > 0
    each branch has its own second-order EP, at ``|alpha - J|`` and
    ``alpha + J``.  Reports carry numerically computed eigenvector angles,
    which expose the Hermitian-degeneracy corner cases (gamma = 0) where
    eigenvalues cross without eigenvector coalescence.
    """
    if not j > 0:
        raise ValueError(f"j must be > 0, got {j}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")

    def group_angle(gamma: float, groups) -> float:
        p = DimerParams(j, gamma, alpha, 0.0)
        _, vectors = dimer_eigensystem_sorted(p)
        angles = []
        for grp in groups:
            idx = [i - 1 for i in grp]
            for a_i in range(len(idx)):
                for b_i in range(a_i + 1, len(idx)):
                    angles.append(
                        principal_angle(vectors[:, idx[a_i]], vectors[:, idx[b_i]])
                    )
        return min(angles)

    if alpha == 0:
        groups = ((1, 2, 3, 4),)
        return [
            EPReport(
                gamma_star=j,
                order_n=4,
                degeneracy_s=1,
                coalesced_groups=groups,
                eigvec_min_angle=group_angle(j, groups),
                transition_count=simultaneous_transition_count(1, 4, 4),
            )
        ]
    reports = []
    branch_points = [(abs(alpha - j), (1, 2)), (alpha + j, (3, 4))]
    for gamma_star, grp in branch_points:
        reports.append(
            EPReport(
                gamma_star=gamma_star,
                order_n=2,
                degeneracy_s=1,
                coalesced_groups=(grp,),
                eigvec_min_angle=group_angle(gamma_star, (grp,)),
                transition_count=simultaneous_transition_count(2, 2, 4),
            )
        )
    return reports


@dataclass(frozen=True)
class CoalescenceReport:
    """Pairwise eigenvector angles and basis-state projections."""

    pair_angles: dict = field(default_factory=dict)  # (j, k) -> radians
    projections: np.ndarray = None  # (4 basis, 4 states) |<k|psi_j>|


def eigvec_coalescence(p: DimerParams) -> CoalescenceReport:
    """Angles between all eigenvector pairs plus ``|<k|psi_j>|`` for the
    four dimer basis states (rows) and the four eigenstates (columns)."""
    _, vectors = dimer_eigensystem_sorted(p)
    angles = {}
    for a_i in range(4):
        for b_i in range(a_i + 1, 4):
            angles[(a_i + 1, b_i + 1)] = principal_angle(
                vectors[:, a_i], vectors[:, b_i]
            )
    return CoalescenceReport(pair_angles=angles, projections=np.abs(vectors))


def transition_matrix_elements(
    p: DimerParams, allow_near_ep: bool = False, ep_margin: float = 1e-6
) -> dict[tuple[int, int], float]:
    """``|<psi_j| sigma_z(d) |psi_k>|`` for the six pairs j < k.

    Plain Euclidean inner products of unit-normalized right eigenvectors.
    Eigenvectors degrade at the EP itself, so gamma within ``ep_margin``
    of gamma* is rejected unless ``allow_near_ep`` is set.
    """
    if p.delta > 0 and not allow_near_ep:
        gamma_star = p.j_tunnel * math.sqrt(1.0 + (p.alpha / p.delta) ** 2)
        if p.gamma > gamma_star - ep_margin:
            raise PhaseDomainError(
                f"gamma={p.gamma} is within {ep_margin} of the EP at "
                f"{gamma_star:.6f}; pass allow_near_ep=True to accept "
                "ill-conditioned eigenvectors"
            )
    _, vectors = dimer_eigensystem_sorted(p)
    op = kron(SIGMA_Z, IDENTITY_2)
    out = {}
    for k in range(4):
        for j in range(k + 1, 4):
            out[(j + 1, k + 1)] = float(
                abs(np.vdot(vectors[:, j], op @ vectors[:, k]))
            )
    return out


def slow_period(p: DimerParams) -> float:
    """Period of the gain-loss-induced slow oscillation, 2 pi / |lambda_42|.

    Defined in the PT-unbroken phase only, where the (4,2) and (1,3)
    transitions are real; diverges at the EP.
    """
    spec = dimer_spectrum_closed_form(p)
    l42 = spec.transition(4, 2)
    if abs(l42.imag) > 1e-10 * max(1.0, abs(l42)) or abs(l42) == 0:
        raise PhaseDomainError(
            f"slow period undefined: transition (4,2) = {l42:.6g} is not "
            "real and nonzero (broken phase or EP)"
        )
    return 2.0 * math.pi / abs(l42.real)
