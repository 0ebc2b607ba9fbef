"""Dense complex linear algebra with explicit contracts.

Everything downstream (operator construction, spectra, propagators) goes
through the helpers here, so validation happens in exactly one place:
entries must be finite, dimensions are capped, eigenpairs carry their
residuals, and the matrix exponential is the scaling-and-squaring Pade
scheme (via SciPy) rather than an eigendecomposition, which would break
down at an exceptional point where the eigenvector matrix is singular.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DecompositionError, SizingError

#: Largest matrix dimension the package will construct.  The working scale
#: is 4N = 200; the cap leaves headroom for convergence studies.
MAX_DIM = 1024

#: Residual acceptance bound for eigendecompositions, relative to the
#: spectral norm.  Near an exceptional point the eigenvalues themselves are
#: ill-conditioned (errors scale like a fractional power of the
#: perturbation) but the residual stays certifiable.
EIG_RESIDUAL_RTOL = 1e-9


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and coerce ``a`` to a 2-D complex128 array.

    Raises
    ------
    ValueError
        If the input is not 2-D or contains non-finite entries.
    SizingError
        If either dimension exceeds :data:`MAX_DIM`.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] > MAX_DIM or m.shape[1] > MAX_DIM:
        raise SizingError(
            f"{name} shape {m.shape} exceeds maximum dimension {MAX_DIM}"
        )
    if not np.isfinite(m.real).all() or not np.isfinite(m.imag).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _require_square(m: np.ndarray, name: str) -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def matrix_fingerprint(m: np.ndarray) -> str:
    """Short identifier for diagnostics: shape, norm, and a content hash."""
    h = hashlib.sha256(np.ascontiguousarray(m).tobytes()).hexdigest()[:12]
    return f"shape={m.shape} fro={np.linalg.norm(m):.6g} sha={h}"


def kron(a, b) -> np.ndarray:
    """Kronecker product with the package-wide dimension cap.

    Raises :class:`SizingError` if the product dimensions would exceed
    :data:`MAX_DIM`.
    """
    am = as_complex_matrix(a, "kron operand a")
    bm = as_complex_matrix(b, "kron operand b")
    rows = am.shape[0] * bm.shape[0]
    cols = am.shape[1] * bm.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise SizingError(
            f"kron result {rows}x{cols} exceeds maximum dimension {MAX_DIM}"
        )
    return np.kron(am, bm)


@dataclass(frozen=True)
class EigenSystem:
    """Full eigensystem of a general (possibly non-Hermitian) matrix.

    ``values[j]`` pairs with the unit-norm column ``right_vectors[:, j]``;
    ``residuals[j]`` is the 2-norm of ``H v - lambda v`` for that pair.
    No ordering is imposed here; callers sort or match downstream.
    """

    values: np.ndarray
    right_vectors: np.ndarray
    residuals: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def eig_general(h) -> EigenSystem:
    """Eigendecomposition of a general square complex matrix.

    Right eigenvectors are normalized to unit Euclidean norm and every
    pair's residual is checked against ``EIG_RESIDUAL_RTOL * ||H||_2``.

    Raises
    ------
    DecompositionError
        On LAPACK iteration failure or a residual above the bound, with
        the matrix fingerprint attached.
    """
    m = _require_square(as_complex_matrix(h, "eig input"), "eig input")
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(
            f"eigendecomposition failed ({exc}); {matrix_fingerprint(m)}"
        ) from exc
    norms = np.linalg.norm(vectors, axis=0)
    vectors = vectors / norms
    residuals = np.linalg.norm(m @ vectors - vectors * values, axis=0)
    scale = np.linalg.norm(m, 2)
    bound = EIG_RESIDUAL_RTOL * max(scale, np.finfo(float).tiny)
    if np.any(residuals > bound):
        raise DecompositionError(
            f"eigen residual {residuals.max():.3e} exceeds {bound:.3e}; "
            + matrix_fingerprint(m)
        )
    return EigenSystem(values=values, right_vectors=vectors, residuals=residuals)


def expm(a) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with Pade approximants.

    Safe at exceptional points (no diagonalization involved).
    """
    m = _require_square(as_complex_matrix(a, "expm input"), "expm input")
    return scipy.linalg.expm(m)
