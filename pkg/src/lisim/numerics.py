"""Dense complex-matrix kernels with explicit numerical contracts.

Thin, contract-checked wrappers around LAPACK (via numpy) used by every
other module: Hermitian eigendecomposition, SVD, base-2 log-determinants
of Hermitian positive-definite matrices, orthonormal range bases, and
inverse matrix square roots. All functions are pure and safe to call
from concurrent workers.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError

#: Max absolute entry deviation tolerated in hermiticity checks.
TOL_HERMITIAN = 1e-10

#: Relative cutoff (vs. the largest singular value) for rank decisions.
DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class EigDecomp:
    """Eigendecomposition of a Hermitian matrix.

    ``basis`` is unitary with eigenvectors as columns, ``values`` is real
    and sorted descending, and ``basis @ diag(values) @ basis.conj().T``
    reconstructs the input.
    """

    basis: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class SvdDecomp:
    """SVD ``left @ diag(singulars) @ right.conj().T`` (thin form).

    ``left`` and ``right`` are semi-unitary; ``singulars`` is real,
    nonnegative and sorted descending.
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def rank(self, rank_tol: float = DEFAULT_RANK_TOL) -> int:
        """Number of singular values above ``rank_tol`` times the largest."""
        if self.singulars.size == 0 or self.singulars[0] <= 0.0:
            return 0
        return int(np.count_nonzero(self.singulars > rank_tol * self.singulars[0]))


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise NumericalDomainError(f"{name} contains non-finite entries")
    return a


def check_hermitian(a: np.ndarray, tol: float = TOL_HERMITIAN) -> None:
    """Raise unless ``max |A - A^H|`` is within ``tol``."""
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    deviation = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if deviation > tol:
        raise NumericalDomainError(
            f"matrix is not Hermitian (max entry deviation {deviation:.3e})"
        )


def hermitian_eig(a) -> EigDecomp:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Parameters
    ----------
    a : array_like
        Square matrix, Hermitian within ``TOL_HERMITIAN``.

    Raises
    ------
    NumericalDomainError
        If the input is not Hermitian within tolerance.
    """
    a = _as_matrix(a)
    check_hermitian(a)
    values, basis = np.linalg.eigh(a)
    # eigh returns ascending order; flip to descending
    return EigDecomp(basis=np.ascontiguousarray(basis[:, ::-1]),
                     values=np.ascontiguousarray(values[::-1]))


def svd(a) -> SvdDecomp:
    """Thin singular value decomposition of an arbitrary complex matrix."""
    a = _as_matrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SvdDecomp(left=u, singulars=s, right=vh.conj().T)


def logdet2_hpd(a) -> float:
    """Base-2 log-determinant of a Hermitian positive-definite matrix.

    Uses a Cholesky factorization, so the determinant itself is never
    formed and the result is safe for very large or very small
    determinants.

    Raises
    ------
    NumericalDomainError
        If the input is not Hermitian or not positive definite.
    """
    a = _as_matrix(a)
    check_hermitian(a)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalDomainError(f"matrix is not positive definite: {exc}") from exc
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def orthonormal_range(a, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of ``a``.

    Parameters
    ----------
    a : array_like
        Matrix of shape (m, n).
    rank_tol : float
        Relative singular-value cutoff; columns are kept while their
        singular value exceeds ``rank_tol`` times the largest one.

    Returns
    -------
    numpy.ndarray
        Semi-unitary matrix of shape (m, r) with r the numerical rank.
        A zero (or empty) input yields r = 0.
    """
    if rank_tol <= 0.0:
        raise ValueError("rank_tol must be positive")
    dec = svd(a)
    return dec.left[:, : dec.rank(rank_tol)]


def inv_sqrt_hpd(a) -> np.ndarray:
    """Inverse matrix square root ``B`` of an HPD matrix, ``B A B = I``.

    Raises
    ------
    NumericalDomainError
        If the input is not Hermitian or has a non-positive eigenvalue.
    """
    dec = hermitian_eig(a)
    if dec.values.size and dec.values[-1] <= 0.0:
        raise NumericalDomainError(
            f"matrix is not positive definite (min eigenvalue {dec.values[-1]:.3e})"
        )
    b = (dec.basis * dec.values**-0.5) @ dec.basis.conj().T
    # kill round-off asymmetry so the result is Hermitian by construction
    return 0.5 * (b + b.conj().T)
