"""Canonical four-way decomposition of a conservative system and its checks.

Splits the observable space H1 and the hidden space H2 into the parts that
are dynamically coupled to the other side and the parts that are completely
decoupled:

    H = H1d + H1c + H2c + H2d,

where H2c is the part of H2 reachable from H1 through the full generator
(the invariant closure of H1, minus H1 itself) and symmetrically for H1c.
In the concatenated basis the full operator becomes block-diagonal with a
single coupled core [[Omega1c, Gamma_c], [Gamma_c^dag, Omega2c]].

Two independent routes to the coupled subspaces are always computed and
cross-checked: the definitional one (invariant closures of H1 and H2 under
the full operator) and the fast one (closures of the coupling ranges under
the diagonal blocks alone).  Their agreement is the strongest internal
correctness certificate available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .subspaces import (
    DEFAULT_TOL,
    SubspaceBasis,
    check_hermitian,
    complement,
    direct_sum_basis,
    numeric_rank,
    orbit,
    orthonormalize,
    projector_distance,
)
from .systems import BlockSystem, assemble_full, decoupled_parts

#: Multiple of the system tolerance allowed for cross-route agreement and
#: block-zero residuals (the `c` of the module contracts).
CONSISTENCY_FACTOR = 100.0

#: Default relative eigenvalue-gap threshold for multiplicity clustering.
DEFAULT_CLUSTER_TOL = 1e-8


class DecompositionError(RuntimeError):
    """Definitional and fast-path coupled subspaces disagree beyond tolerance."""

    def __init__(self, dist_h1c: float, dist_h2c: float):
        super().__init__(
            f"coupled-subspace routes disagree: "
            f"d(H1c) = {dist_h1c:.3e}, d(H2c) = {dist_h2c:.3e}"
        )
        self.dist_h1c = dist_h1c
        self.dist_h2c = dist_h2c


@dataclass(frozen=True)
class FourWayDecomposition:
    """Bases of the four parts plus the operators restricted to them.

    h1d, h1c live in the observable coordinates (ambient d1); h2c, h2d in
    the hidden coordinates (ambient d2).  Restricted operators are formed
    by basis conjugation and re-symmetrized.
    """

    h1d: SubspaceBasis
    h1c: SubspaceBasis
    h2c: SubspaceBasis
    h2d: SubspaceBasis
    omega1d: np.ndarray
    omega1c: np.ndarray
    omega2c: np.ndarray
    omega2d: np.ndarray
    gamma_c: np.ndarray
    tol: float

    @property
    def dims(self) -> dict[str, int]:
        return {
            "h1d": self.h1d.dim,
            "h1c": self.h1c.dim,
            "h2c": self.h2c.dim,
            "h2d": self.h2d.dim,
        }

    def core_operator(self) -> np.ndarray:
        """The coupled core [[Omega1c, Gamma_c], [Gamma_c^dag, Omega2c]]."""
        return assemble_full(self.core_system()).omega

    def core_system(self) -> BlockSystem:
        return BlockSystem(self.omega1c, self.omega2c, self.gamma_c, self.tol)

    def to_dict(self) -> dict:
        return {"dims": self.dims, "tol": self.tol}


@dataclass(frozen=True)
class TheoremReport:
    """Result of the reconstruction-theorem verification suite."""

    orbit_equalities: list[tuple[str, float]]
    multiplicity_omega_c: int
    bound: int
    bound_satisfied: bool
    reconstructible_core: bool
    dims: dict[str, int]
    tol: float

    @property
    def max_distance(self) -> float:
        return max((d for _, d in self.orbit_equalities), default=0.0)

    def passed(self, distance_tol: float | None = None) -> bool:
        limit = distance_tol if distance_tol is not None else \
            CONSISTENCY_FACTOR * self.tol
        return (self.max_distance <= limit
                and self.bound_satisfied
                and self.reconstructible_core)

    def to_dict(self) -> dict:
        return {
            "orbit_equalities": [[name, dist] for name, dist in
                                 self.orbit_equalities],
            "multiplicity_omega_c": self.multiplicity_omega_c,
            "bound": self.bound,
            "bound_satisfied": self.bound_satisfied,
            "reconstructible_core": self.reconstructible_core,
            "dims": self.dims,
            "tol": self.tol,
        }


def _embed_observable(basis: SubspaceBasis, d1: int, d2: int) -> SubspaceBasis:
    m = np.vstack([basis.matrix, np.zeros((d2, basis.dim), dtype=complex)])
    return SubspaceBasis(d1 + d2, m, basis.tol)


def _embed_hidden(basis: SubspaceBasis, d1: int, d2: int) -> SubspaceBasis:
    m = np.vstack([np.zeros((d1, basis.dim), dtype=complex), basis.matrix])
    return SubspaceBasis(d1 + d2, m, basis.tol)


def _restrict(a: np.ndarray, basis: SubspaceBasis) -> np.ndarray:
    """B^dag A B, re-symmetrized to kill roundoff drift."""
    r = basis.matrix.conj().T @ a @ basis.matrix
    return (r + r.conj().T) / 2


def _project_out_block(closure: SubspaceBasis, side_basis: SubspaceBasis,
                       take: slice, other: slice, tol: float) -> SubspaceBasis:
    """Re-express closure-minus-side in the coordinates of the other block.

    The complement vectors must have vanishing components on the original
    side; this is asserted before re-orthonormalizing the remaining rows.
    """
    excess = complement(closure, side_basis, tol)
    if excess.dim == 0:
        return SubspaceBasis.empty(take.stop - take.start
                                   if take.stop is not None else 0, tol)
    leak = excess.matrix[other]
    worst = np.max(np.linalg.norm(leak, axis=0)) if leak.size else 0.0
    if worst > CONSISTENCY_FACTOR * tol:
        raise DecompositionError(worst, worst)
    rows = excess.matrix[take]
    result = orthonormalize(rows, tol, ambient_dim=rows.shape[0])
    if result.dim != excess.dim:
        raise DecompositionError(float(result.dim), float(excess.dim))
    return result


def decompose(sys: BlockSystem) -> FourWayDecomposition:
    """Compute the four-way split and the restricted operators.

    The coupled hidden part is defined as the invariant closure of H1
    under the full operator, minus H1, and symmetrically for the coupled
    observable part.  The equivalent fast route (closures of Ran(Gamma)
    and Ran(Gamma^dag) under the diagonal blocks) is computed as well and
    the two are required to agree to within CONSISTENCY_FACTOR * tol.
    """
    d1, d2, tol = sys.d1, sys.d2, sys.tol
    omega = assemble_full(sys).omega

    h1_full = _embed_observable(SubspaceBasis.full(d1, tol), d1, d2)
    h2_full = _embed_hidden(SubspaceBasis.full(d2, tol), d1, d2)

    closure_h1 = orbit(omega, h1_full, tol)
    closure_h2 = orbit(omega, h2_full, tol)
    h2c = _project_out_block(closure_h1, h1_full, slice(d1, d1 + d2),
                             slice(0, d1), tol)
    h1c = _project_out_block(closure_h2, h2_full, slice(0, d1),
                             slice(d1, d1 + d2), tol)
    # independent fast route through the coupling ranges
    ran_gamma = orthonormalize(sys.gamma, tol, ambient_dim=d1)
    ran_gamma_dag = orthonormalize(sys.gamma.conj().T, tol, ambient_dim=d2)
    h1c_fast = orbit(sys.omega1, ran_gamma, tol)
    h2c_fast = orbit(sys.omega2, ran_gamma_dag, tol)
    dist1 = projector_distance(h1c, h1c_fast)
    dist2 = projector_distance(h2c, h2c_fast)
    if max(dist1, dist2) > CONSISTENCY_FACTOR * tol:
        raise DecompositionError(dist1, dist2)

    h1d = complement(SubspaceBasis.full(d1, tol), h1c, tol)
    h2d = complement(SubspaceBasis.full(d2, tol), h2c, tol)

    return FourWayDecomposition(
        h1d=h1d, h1c=h1c, h2c=h2c, h2d=h2d,
        omega1d=_restrict(sys.omega1, h1d),
        omega1c=_restrict(sys.omega1, h1c),
        omega2c=_restrict(sys.omega2, h2c),
        omega2d=_restrict(sys.omega2, h2d),
        gamma_c=h1c.matrix.conj().T @ sys.gamma @ h2c.matrix,
        tol=tol,
    )


def decomposition_basis(sys: BlockSystem, dec: FourWayDecomposition) -> np.ndarray:
    """Unitary whose columns are the concatenated (h1d, h1c, h2c, h2d) basis."""
    d1, d2 = sys.d1, sys.d2
    cols = [
        _embed_observable(dec.h1d, d1, d2).matrix,
        _embed_observable(dec.h1c, d1, d2).matrix,
        _embed_hidden(dec.h2c, d1, d2).matrix,
        _embed_hidden(dec.h2d, d1, d2).matrix,
    ]
    return np.hstack(cols)


def verify_block_form(sys: BlockSystem, dec: FourWayDecomposition) -> float:
    """Max norm over the blocks required to vanish in the decomposed operator.

    Conjugates the full operator into the (h1d, h1c, h2c, h2d) basis and
    measures every block outside the allowed pattern (the four diagonal
    blocks and the core coupling pair).  Values <= c*tol*||Omega|| certify
    the decomposition; large values flag a failure.
    """
    omega = assemble_full(sys).omega
    u = decomposition_basis(sys, dec)
    t = u.conj().T @ omega @ u
    sizes = [dec.h1d.dim, dec.h1c.dim, dec.h2c.dim, dec.h2d.dim]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    allowed = {(0, 0), (1, 1), (2, 2), (3, 3), (1, 2), (2, 1)}
    worst = 0.0
    for i in range(4):
        for j in range(4):
            if (i, j) in allowed or sizes[i] == 0 or sizes[j] == 0:
                continue
            block = t[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]]
            worst = max(worst, float(np.linalg.norm(block, 2)))
    return worst


def multiplicity(a: np.ndarray, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> int:
    """Largest eigenvalue-cluster size of a Hermitian matrix.

    Eigenvalues are sorted and chained into clusters wherever the gap
    between consecutive values is <= cluster_tol * max(1, ||A||).  In
    exact arithmetic this is the maximal eigenvalue multiplicity, which
    for a Hermitian matrix equals the minimal number of generating
    vectors (the spectral multiplicity).
    """
    a = check_hermitian(a, max(cluster_tol, DEFAULT_TOL), "multiplicity input")
    if a.shape[0] == 0:
        return 0
    w = np.linalg.eigvalsh(a)
    threshold = cluster_tol * max(1.0, float(np.max(np.abs(w))))
    best = 1
    run = 1
    for gap in np.diff(w):
        run = run + 1 if gap <= threshold else 1
        best = max(best, run)
    return best


def verify_theorem(sys: BlockSystem, dec: FourWayDecomposition | None = None,
                   cluster_tol: float = DEFAULT_CLUSTER_TOL) -> TheoremReport:
    """Run the full reconstruction-theorem check suite on one system.

    Compares, by projector distance, the four characterizations of the
    coupled core: H1c + H2c, the invariant closures of H1c, of H2c, and
    of the range of the symmetrized coupling.  Also checks the proof-chain
    identity that the closure of the coupling range under the decoupled
    diagonal operator splits as the direct sum of the one-sided closures,
    computes the spectral multiplicity of the core operator, and tests it
    against min(2*rank(Gamma), dim H1c, dim H2c).
    """
    if dec is None:
        dec = decompose(sys)
    d1, d2, tol = sys.d1, sys.d2, sys.tol
    omega = assemble_full(sys).omega
    omega_ring, gamma_ring = decoupled_parts(sys)
    n = d1 + d2

    h1c_full = _embed_observable(dec.h1c, d1, d2)
    h2c_full = _embed_hidden(dec.h2c, d1, d2)
    core = direct_sum_basis(h1c_full, h2c_full)
    closure_h1c = orbit(omega, h1c_full, tol)
    closure_h2c = orbit(omega, h2c_full, tol)
    ran_ring = orthonormalize(gamma_ring, tol, ambient_dim=n)
    closure_ring = orbit(omega, ran_ring, tol)

    subspaces = [
        ("h1c+h2c", core),
        ("closure(h1c)", closure_h1c),
        ("closure(h2c)", closure_h2c),
        ("closure(ran coupling)", closure_ring),
    ]
    equalities: list[tuple[str, float]] = []
    for i in range(len(subspaces)):
        for j in range(i + 1, len(subspaces)):
            name = f"{subspaces[i][0]} vs {subspaces[j][0]}"
            equalities.append(
                (name, projector_distance(subspaces[i][1], subspaces[j][1]))
            )

    # proof-chain identity: closure under the decoupled diagonal operator
    # splits as the direct sum of the one-sided closures
    closure_ring_diag = orbit(omega_ring, ran_ring, tol)
    ran_gamma = orthonormalize(sys.gamma, tol, ambient_dim=d1)
    ran_gamma_dag = orthonormalize(sys.gamma.conj().T, tol, ambient_dim=d2)
    split_sum = direct_sum_basis(
        _embed_observable(orbit(sys.omega1, ran_gamma, tol), d1, d2),
        _embed_hidden(orbit(sys.omega2, ran_gamma_dag, tol), d1, d2),
    )
    equalities.append(
        ("diag closure vs one-sided sum",
         projector_distance(closure_ring_diag, split_sum))
    )

    mult = multiplicity(dec.core_operator(), cluster_tol)
    rank_gamma = numeric_rank(sys.gamma, tol)
    bound = min(2 * rank_gamma, dec.h1c.dim, dec.h2c.dim)

    if dec.h1c.dim == 0 and dec.h2c.dim == 0:
        core_reconstructible = True  # empty core, vacuously
    else:
        core_dec = decompose(dec.core_system())
        core_reconstructible = core_dec.h1d.dim == 0 and core_dec.h2d.dim == 0

    return TheoremReport(
        orbit_equalities=equalities,
        multiplicity_omega_c=mult,
        bound=bound,
        bound_satisfied=mult <= bound,
        reconstructible_core=core_reconstructible,
        dims=dec.dims,
        tol=tol,
    )


def is_reconstructible(sys: BlockSystem) -> bool:
    """Whether both decoupled parts vanish (system equals its coupled core)."""
    dec = decompose(sys)
    return dec.h1d.dim == 0 and dec.h2d.dim == 0
