"""Orthonormal subspace arithmetic in finite-dimensional complex Hilbert spaces.

Subspaces are represented by matrices whose columns form an orthonormal
basis.  All rank decisions are controlled by an explicit relative tolerance
so that every computation is deterministic and reproducible: vectors are
processed in input order and there is no pivoting randomness.

The central operation is :func:`orbit`, which computes the smallest
invariant subspace of a Hermitian matrix containing a given seed subspace.
For a bounded operator in finite dimension this coincides with polynomial
closure under the matrix, so iterated block-Krylov closure with
re-orthogonalization computes it exactly (up to the rank tolerance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Default relative tolerance for rank and orthogonality decisions.
DEFAULT_TOL = 1e-10

#: Documented constant `c` in the orbit invariance certificate
#: ||(I - P) A P|| <= c * tol * ||A||.  Each dropped closure residual has
#: norm <= tol*||A||; at most sqrt(dim) of them combine in the operator norm.
ORBIT_CERT_FACTOR = 10.0


class DimensionMismatchError(ValueError):
    """Raised when vector or ambient dimensions are inconsistent."""


class SymmetryError(ValueError):
    """Raised when a matrix required to be Hermitian is not, beyond tolerance."""


class ContainmentError(ValueError):
    """Raised when a subspace required to be contained in another is not."""


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal spanning set of a subspace of C^ambient_dim.

    ``matrix`` has shape ``(ambient_dim, dim)``; its columns are the basis
    vectors, orthonormal to within ``tol``.  Dimension zero is represented
    by a matrix with zero columns.
    """

    ambient_dim: int
    matrix: np.ndarray
    tol: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != self.ambient_dim:
            raise DimensionMismatchError(
                f"basis matrix shape {m.shape} incompatible with ambient "
                f"dimension {self.ambient_dim}"
            )
        if m.shape[1] > self.ambient_dim:
            raise DimensionMismatchError(
                f"{m.shape[1]} basis vectors exceed ambient dimension "
                f"{self.ambient_dim}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace, as a dense matrix."""
        return self.matrix @ self.matrix.conj().T

    def contains(self, vector: np.ndarray, tol: float | None = None) -> bool:
        """Whether ``vector`` lies in the subspace to within tolerance."""
        v = np.asarray(vector, dtype=complex)
        if v.shape != (self.ambient_dim,):
            raise DimensionMismatchError(
                f"vector length {v.shape} != ambient {self.ambient_dim}"
            )
        tol = self.tol if tol is None else tol
        residual = v - self.matrix @ (self.matrix.conj().T @ v)
        return np.linalg.norm(residual) <= tol * max(np.linalg.norm(v), 1.0)

    @classmethod
    def empty(cls, ambient_dim: int, tol: float = DEFAULT_TOL) -> "SubspaceBasis":
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex), tol)

    @classmethod
    def full(cls, ambient_dim: int, tol: float = DEFAULT_TOL) -> "SubspaceBasis":
        return cls(ambient_dim, np.eye(ambient_dim, dtype=complex), tol)


def _as_columns(vectors, ambient_dim: int | None) -> np.ndarray:
    """Convert a list of vectors or an (n, k) array to a column matrix."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        cols = np.asarray(vectors, dtype=complex)
    else:
        vecs = [np.asarray(v, dtype=complex) for v in vectors]
        if not vecs:
            if ambient_dim is None:
                raise DimensionMismatchError(
                    "ambient_dim required to orthonormalize an empty set"
                )
            return np.zeros((ambient_dim, 0), dtype=complex)
        lengths = {v.shape for v in vecs}
        if len(lengths) != 1 or vecs[0].ndim != 1:
            raise DimensionMismatchError(f"inconsistent vector shapes: {lengths}")
        cols = np.stack(vecs, axis=1)
    if ambient_dim is not None and cols.shape[0] != ambient_dim:
        raise DimensionMismatchError(
            f"vectors have length {cols.shape[0]}, expected {ambient_dim}"
        )
    return cols


def _gram_schmidt(cols: np.ndarray, drop_threshold: float,
                  against: np.ndarray | None = None) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Columns are processed in order; a column is dropped when its residual
    after projection (onto ``against`` and previously accepted columns)
    has norm <= drop_threshold.  Returns the accepted orthonormal columns.
    """
    n = cols.shape[0]
    accepted: list[np.ndarray] = []
    for j in range(cols.shape[1]):
        v = cols[:, j].copy()
        # project twice: the classical fix for loss of orthogonality
        for _ in range(2):
            if against is not None and against.shape[1]:
                v -= against @ (against.conj().T @ v)
            for q in accepted:
                v -= (q.conj() @ v) * q
        norm = np.linalg.norm(v)
        if norm > drop_threshold:
            accepted.append(v / norm)
    if not accepted:
        return np.zeros((n, 0), dtype=complex)
    return np.stack(accepted, axis=1)


def orthonormalize(vectors, tol: float = DEFAULT_TOL, *,
                   ambient_dim: int | None = None) -> SubspaceBasis:
    """Orthonormal basis of the span of ``vectors``.

    A vector whose residual after projection onto the previously accepted
    vectors has norm <= tol * max(largest input norm, 1) is dropped.
    Deterministic given the input order.

    ``vectors`` may be a sequence of 1-d arrays or an (n, k) array of
    columns; ``ambient_dim`` is only needed when the input is empty.
    """
    cols = _as_columns(vectors, ambient_dim)
    n = cols.shape[0]
    if cols.shape[1] == 0:
        return SubspaceBasis.empty(n, tol)
    scale = max(np.max(np.linalg.norm(cols, axis=0)), 1.0)
    basis = _gram_schmidt(cols, tol * scale)
    return SubspaceBasis(n, basis, tol)


def check_hermitian(a: np.ndarray, tol: float, what: str = "matrix") -> np.ndarray:
    """Validate near-Hermiticity (Frobenius norm) and return (A + A^dag)/2."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"{what} is not square: shape {a.shape}")
    if a.size:
        defect = np.linalg.norm(a - a.conj().T)
        if defect > tol * max(np.linalg.norm(a), 1.0):
            raise SymmetryError(
                f"{what} is not Hermitian: ||A - A^dag|| = {defect:.3e}"
            )
    return (a + a.conj().T) / 2


def _eigen_clusters(w: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Index ranges of eigenvalues chained by gaps <= tol * max(1, |w|max)."""
    threshold = tol * max(1.0, float(np.max(np.abs(w))))
    ranges = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > threshold:
            ranges.append((start, i))
            start = i
    return ranges


def orbit(a: np.ndarray, seed: SubspaceBasis, tol: float = DEFAULT_TOL) -> SubspaceBasis:
    """Smallest A-invariant subspace containing span(seed), A Hermitian.

    In finite dimension the invariant closure of a seed S decomposes over
    the spectrum: it is the direct sum, over the eigenspaces E of A, of
    span(P_E S).  The eigenspaces are obtained from one eigendecomposition
    with eigenvalues chained into clusters at relative gap tol; the rank
    of each projected seed is decided by singular values > tol.  This is
    exact up to the tolerance and, unlike iterated Krylov closure, does
    not accumulate noise over closure passes.  The result P satisfies
    ||(I - P) A P|| <= ORBIT_CERT_FACTOR * tol * ||A||.
    """
    a = check_hermitian(a, tol, "orbit generator")
    n = a.shape[0]
    if seed.ambient_dim != n:
        raise DimensionMismatchError(
            f"seed ambient {seed.ambient_dim} != matrix dimension {n}"
        )
    if seed.dim == 0 or n == 0:
        return SubspaceBasis.empty(n, tol)
    w, u = np.linalg.eigh(a)
    pieces = []
    for lo, hi in _eigen_clusters(w, tol):
        block = u[:, lo:hi]
        coords = block.conj().T @ seed.matrix  # seed projected into the cluster
        if not coords.size:
            continue
        left, sing, _ = np.linalg.svd(coords, full_matrices=False)
        keep = sing > tol
        if np.any(keep):
            pieces.append(block @ left[:, keep])
    if not pieces:
        return SubspaceBasis.empty(n, tol)
    return SubspaceBasis(n, np.hstack(pieces), tol)


def orbit_block_closure(a: np.ndarray, seed: SubspaceBasis,
                        tol: float = DEFAULT_TOL) -> SubspaceBasis:
    """Invariant closure by iterated block-Krylov passes.

    Repeatedly applies A to the newest vectors, orthogonalizes against
    everything accepted so far (twice), and keeps residuals with norm
    > tol*||A||; terminates in at most ambient_dim passes.  Kept as an
    independent cross-check of :func:`orbit` -- it is reliable at small
    dimension but accumulates roundoff over many passes, so the spectral
    route is the primary implementation.
    """
    a = check_hermitian(a, tol, "orbit generator")
    n = a.shape[0]
    if seed.ambient_dim != n:
        raise DimensionMismatchError(
            f"seed ambient {seed.ambient_dim} != matrix dimension {n}"
        )
    if seed.dim == 0:
        return SubspaceBasis.empty(n, tol)
    scale = max(np.linalg.norm(a, 2), 1.0) if n else 1.0
    basis = seed.matrix
    fresh = basis
    while fresh.shape[1] and basis.shape[1] < n:
        image = a @ fresh
        fresh = _gram_schmidt(image, tol * scale, against=basis)
        if fresh.shape[1]:
            basis = np.hstack([basis, fresh])
    return SubspaceBasis(n, basis, tol)


def complement(whole: SubspaceBasis, part: SubspaceBasis,
               tol: float = DEFAULT_TOL) -> SubspaceBasis:
    """Orthogonal complement of ``part`` inside ``whole``.

    Requires part to be contained in whole (each part vector within
    distance ~tol of span(whole)); the result has dimension
    dim(whole) - dim(part).
    """
    if whole.ambient_dim != part.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {whole.ambient_dim} vs {part.ambient_dim}"
        )
    if part.dim:
        residual = part.matrix - whole.matrix @ (whole.matrix.conj().T @ part.matrix)
        worst = np.max(np.linalg.norm(residual, axis=0))
        if worst > 10 * tol:
            raise ContainmentError(
                f"part is not contained in whole: max residual {worst:.3e}"
            )
    deflated = whole.matrix - part.matrix @ (part.matrix.conj().T @ whole.matrix)
    result = _gram_schmidt(deflated, max(tol, DEFAULT_TOL))
    expected = whole.dim - part.dim
    if result.shape[1] != expected:
        raise ContainmentError(
            f"complement dimension {result.shape[1]} != expected {expected}"
        )
    return SubspaceBasis(whole.ambient_dim, result, tol)


def projector_distance(a: SubspaceBasis, b: SubspaceBasis) -> float:
    """Operator (spectral) norm of P_a - P_b.

    Zero iff the subspaces are equal; equals the sine of the largest
    principal angle when the subspaces have equal dimension.
    """
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}"
        )
    if a.dim == 0 and b.dim == 0:
        return 0.0
    diff = a.projector() - b.projector()
    return float(np.linalg.norm(diff, 2))


def direct_sum_basis(*parts: SubspaceBasis) -> SubspaceBasis:
    """Concatenate bases of mutually orthogonal subspaces of one ambient space."""
    dims = {p.ambient_dim for p in parts}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed ambient dimensions: {dims}")
    matrix = np.hstack([p.matrix for p in parts])
    tol = max(p.tol for p in parts)
    return SubspaceBasis(parts[0].ambient_dim, matrix, tol)


def numeric_rank(m: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values exceeding tol * (largest singular value)."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {m.shape}")
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))
