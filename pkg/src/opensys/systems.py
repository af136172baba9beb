"""Data model for conservative systems split into observable and hidden parts.

A :class:`BlockSystem` holds the triple (Omega1, Omega2, Gamma): the
Hermitian frequency operators of the observable and hidden blocks and the
coupling operator mapping hidden to observable variables.  The full
frequency operator is assembled as

    Omega = [[Omega1, Gamma  ],
             [Gamma^dag, Omega2]]

Systems serialize to a structured JSON file with complex scalars written
as [re, im] pairs of decimal doubles; the round trip is bit-exact.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .subspaces import (
    DEFAULT_TOL,
    DimensionMismatchError,
    check_hermitian,
)


@dataclass(frozen=True)
class BlockSystem:
    """Conservative system (Omega1, Omega2, Gamma) with rank tolerance.

    Hermiticity of the diagonal blocks is validated on construction and
    then enforced exactly by symmetrization, so downstream eigensolvers
    always receive exactly Hermitian input.
    """

    omega1: np.ndarray
    omega2: np.ndarray
    gamma: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        o1 = check_hermitian(self.omega1, self.tol, "omega1")
        o2 = check_hermitian(self.omega2, self.tol, "omega2")
        g = np.asarray(self.gamma, dtype=complex)
        if g.ndim != 2 or g.shape != (o1.shape[0], o2.shape[0]):
            raise DimensionMismatchError(
                f"gamma shape {g.shape} incompatible with blocks "
                f"{o1.shape[0]}x{o2.shape[0]}"
            )
        object.__setattr__(self, "omega1", o1)
        object.__setattr__(self, "omega2", o2)
        object.__setattr__(self, "gamma", g)

    @property
    def d1(self) -> int:
        return self.omega1.shape[0]

    @property
    def d2(self) -> int:
        return self.omega2.shape[0]


@dataclass(frozen=True)
class FullOperator:
    """Assembled Hermitian frequency operator with its block split (d1, d2)."""

    omega: np.ndarray
    split: tuple[int, int]

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=complex)
        d1, d2 = self.split
        if omega.shape != (d1 + d2, d1 + d2):
            raise DimensionMismatchError(
                f"operator shape {omega.shape} != split {self.split}"
            )
        object.__setattr__(self, "omega", omega)

    @property
    def dim(self) -> int:
        return self.omega.shape[0]


def assemble_full(sys: BlockSystem) -> FullOperator:
    """Assemble [[Omega1, Gamma], [Gamma^dag, Omega2]] by direct placement."""
    d1, d2 = sys.d1, sys.d2
    omega = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    omega[:d1, :d1] = sys.omega1
    omega[d1:, d1:] = sys.omega2
    omega[:d1, d1:] = sys.gamma
    omega[d1:, :d1] = sys.gamma.conj().T
    return FullOperator(omega, (d1, d2))


def decoupled_parts(sys: BlockSystem) -> tuple[np.ndarray, np.ndarray]:
    """The pair (block-diagonal part, pure-coupling part) of the full operator.

    Returns diag(Omega1, Omega2) and [[0, Gamma], [Gamma^dag, 0]]; their sum
    is exactly the assembled full operator (pure placement, no arithmetic).
    """
    d1, d2 = sys.d1, sys.d2
    n = d1 + d2
    omega_ring = np.zeros((n, n), dtype=complex)
    omega_ring[:d1, :d1] = sys.omega1
    omega_ring[d1:, d1:] = sys.omega2
    gamma_ring = np.zeros((n, n), dtype=complex)
    gamma_ring[:d1, d1:] = sys.gamma
    gamma_ring[d1:, :d1] = sys.gamma.conj().T
    return omega_ring, gamma_ring


def random_system(d1: int, d2: int, coupling_rank: int, seed: int,
                  tol: float = DEFAULT_TOL) -> BlockSystem:
    """Deterministic pseudo-random system with coupling of exact rank.

    The Hermitian blocks are GOE-style with entries scaled by 1/sqrt(dim)
    so the spectral norm is O(1) independent of dimension (frequency units
    normalized); the coupling is a sum of ``coupling_rank`` outer products
    of normalized random vectors.  The same seed reproduces the system
    bit-for-bit.
    """
    if not 0 <= coupling_rank <= min(d1, d2):
        raise ValueError(
            f"coupling rank {coupling_rank} outside [0, {min(d1, d2)}]"
        )
    rng = np.random.default_rng(seed)

    def hermitian(d: int) -> np.ndarray:
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return (g + g.conj().T) / (2.0 * np.sqrt(max(d, 1)))

    omega1 = hermitian(d1)
    omega2 = hermitian(d2)
    gamma = np.zeros((d1, d2), dtype=complex)
    for _ in range(coupling_rank):
        u = rng.standard_normal(d1) + 1j * rng.standard_normal(d1)
        v = rng.standard_normal(d2) + 1j * rng.standard_normal(d2)
        gamma += np.outer(u / np.linalg.norm(u), (v / np.linalg.norm(v)).conj())
    return BlockSystem(omega1, omega2, gamma, tol)


# --- serialization ---------------------------------------------------------

def encode_matrix(m: np.ndarray) -> list:
    """Row-major nested lists with each complex entry as an [re, im] pair."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data: list, shape: tuple[int, int]) -> np.ndarray:
    """Inverse of :func:`encode_matrix`; ``shape`` disambiguates empty axes."""
    out = np.zeros(shape, dtype=complex)
    if len(data) != shape[0]:
        raise ValueError(f"matrix has {len(data)} rows, expected {shape[0]}")
    for i, row in enumerate(data):
        if len(row) != shape[1]:
            raise ValueError(
                f"row {i} has {len(row)} entries, expected {shape[1]}"
            )
        for j, pair in enumerate(row):
            out[i, j] = complex(pair[0], pair[1])
    return out


def system_to_dict(sys: BlockSystem) -> dict:
    return {
        "d1": sys.d1,
        "d2": sys.d2,
        "tol": sys.tol,
        "omega1": encode_matrix(sys.omega1),
        "omega2": encode_matrix(sys.omega2),
        "gamma": encode_matrix(sys.gamma),
    }


def system_from_dict(data: dict) -> BlockSystem:
    try:
        d1 = int(data["d1"])
        d2 = int(data["d2"])
        tol = float(data["tol"])
        omega1 = decode_matrix(data["omega1"], (d1, d1))
        omega2 = decode_matrix(data["omega2"], (d2, d2))
        gamma = decode_matrix(data["gamma"], (d1, d2))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed system data: {exc}") from exc
    return BlockSystem(omega1, omega2, gamma, tol)


def write_json_atomic(data: dict, path: str) -> None:
    """Write JSON via a temp file then rename, so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_system(sys: BlockSystem, path: str) -> None:
    write_json_atomic(system_to_dict(sys), path)


def load_system(path: str) -> BlockSystem:
    with open(path) as fh:
        data = json.load(fh)
    return system_from_dict(data)
