"""Dense symmetric linear algebra primitives.

All matrices are plain float64 numpy arrays. Matrices that are symmetric by
contract are stored *exactly* symmetric (the upper triangle is mirrored onto
the lower one), so equality checks downstream never trip over last-ulp
asymmetry from matrix products.

Eigendecompositions are ordered by descending absolute eigenvalue, with ties
broken by descending signed value and then position, and every eigenvector is
sign-canonicalized so that its entry of largest magnitude is positive.  The
ordering matches how dimension-reduction directions are ranked; the sign rule
exists only so repeated runs print identical bases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrix, InvalidVector, NotPositiveDefinite

SYMMETRY_TOL = 1e-12
ORTHONORMAL_TOL = 1e-10
PD_RTOL = 1e-12


def mirror(a: np.ndarray) -> np.ndarray:
    """Exactly symmetric copy of a matrix that is symmetric up to rounding
    (upper triangle mirrored onto the lower one).  No symmetry check: use it
    on products like B' A B whose skew is pure float noise at any scale."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def symmetrize(a: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Check `a` is square, finite and symmetric to absolute `tol`; return the
    exactly symmetric copy."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")
    skew = float(np.abs(a - a.T).max()) if a.size else 0.0
    if skew > tol:
        raise InvalidMatrix(f"matrix is not symmetric: max |a - a'| = {skew:.3e}")
    return mirror(a)


@dataclass(frozen=True)
class EigenSystem:
    """Full ordered eigensystem of a symmetric matrix.

    ``values[k]`` pairs with column ``vectors[:, k]``; values are sorted by
    descending ``|value|`` and columns are orthonormal with canonical signs.
    """

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        v = self.vectors
        gram_err = float(np.abs(v.T @ v - np.eye(v.shape[1])).max())
        if gram_err > ORTHONORMAL_TOL:
            raise InvalidMatrix(
                f"eigenvector columns are not orthonormal: max |V'V - I| = {gram_err:.3e}"
            )


@dataclass(frozen=True)
class Basis:
    """Orthonormal p x k column set spanning a k-dimensional subspace."""

    columns: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.columns, dtype=float)
        if c.ndim != 2 or c.shape[1] < 1 or c.shape[1] > c.shape[0]:
            raise InvalidMatrix(f"basis must be p x k with 1 <= k <= p, got {c.shape}")
        gram_err = float(np.abs(c.T @ c - np.eye(c.shape[1])).max())
        if gram_err > ORTHONORMAL_TOL:
            raise InvalidMatrix(
                f"basis columns are not orthonormal: max |B'B - I| = {gram_err:.3e}"
            )
        object.__setattr__(self, "columns", c)

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def rank(self) -> int:
        return self.columns.shape[1]


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the entry of largest magnitude is positive (ties break
    to the lowest index, which is what argmax does)."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, k])))
        if out[i, k] < 0:
            out[:, k] = -out[:, k]
    return out


def sym_eigen(a: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix, ordered by descending |eigenvalue|."""
    a = symmetrize(a)
    w, v = np.linalg.eigh(a)
    order = sorted(range(len(w)), key=lambda i: (-abs(w[i]), -w[i], i))
    return EigenSystem(values=w[order], vectors=_canonical_signs(v[:, order]))


def _pd_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """eigh of a symmetric matrix that must be positive definite."""
    w, v = np.linalg.eigh(a)
    w_min, w_max = float(w[0]), float(w[-1])
    if w_max <= 0.0 or w_min <= PD_RTOL * w_max:
        raise NotPositiveDefinite(
            f"matrix is not positive definite: min eigenvalue {w_min:.6e} "
            f"vs max {w_max:.6e}",
            eigenvalue=w_min,
        )
    return w, v


def inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric inverse square root R of a positive definite matrix: R a R = I."""
    a = symmetrize(a)
    w, v = _pd_eigh(a)
    return mirror((v * w**-0.5) @ v.T)


def sym_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric square root of a positive definite matrix."""
    a = symmetrize(a)
    w, v = _pd_eigh(a)
    return mirror((v * w**0.5) @ v.T)


def sym_inverse(a: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, exactly symmetric."""
    a = symmetrize(a)
    w, v = _pd_eigh(a)
    return mirror((v / w) @ v.T)


def residual_projector(b: Basis) -> np.ndarray:
    """I - B B', the orthogonal projector onto the complement of span(b)."""
    p = b.dim
    return mirror(np.eye(p) - b.columns @ b.columns.T)


def project_out(b: Basis, v: np.ndarray) -> np.ndarray:
    """(I - B B') v without forming the projector."""
    return v - b.columns @ (b.columns.T @ v)


def sine_to_subspace(v: np.ndarray, b: Basis) -> float:
    """|sin| of the angle between unit vector v and its projection onto span(b).

    Equals ||(I - P) v|| which lies in [0, 1] for unit v.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != b.dim:
        raise InvalidVector(f"expected a vector of length {b.dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidVector("vector has non-finite entries")
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > 1e-10:
        raise InvalidVector(f"expected a unit vector, got norm {nrm!r}")
    return float(min(1.0, max(0.0, np.linalg.norm(project_out(b, v)))))
