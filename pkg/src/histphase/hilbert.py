"""Finite-dimensional state vectors, rays, projectors and density matrices.

Every object here is an immutable value: the wrapped numpy arrays are
copied on construction and flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12
RAY_TOL = 1e-10
HERMITIAN_TOL = 1e-12
IDEMPOTENT_TOL = 1e-10
UNITARY_TOL = 1e-10
ORTHOGONAL_TOL = 1e-10


class HilbertError(ValueError):
    """Invalid Hilbert-space object or incompatible operands."""


class DimensionMismatchError(HilbertError):
    pass


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_same_dim(da: int, db: int) -> None:
    if da != db:
        raise DimensionMismatchError(f"incompatible spaces: dim {da} vs dim {db}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm vector in C^d."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise HilbertError("state vector must be a nonempty 1-d array")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise HilbertError(f"state vector not normalized (norm={norm!r}); use normalize()")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __len__(self):
        return self.dim

    def with_phase(self, phi: float) -> StateVector:
        return StateVector(np.exp(1j * phi) * self.amplitudes)


@dataclass(frozen=True, eq=False)
class Ray:
    """Phase-equivalence class of a unit vector (a point of projective space)."""

    representative: StateVector

    def __post_init__(self):
        if not isinstance(self.representative, StateVector):
            object.__setattr__(self, "representative", normalize(self.representative))

    @property
    def dim(self) -> int:
        return self.representative.dim

    @property
    def vector(self) -> np.ndarray:
        return self.representative.amplitudes

    def __eq__(self, other):
        if not isinstance(other, Ray):
            return NotImplemented
        if self.dim != other.dim:
            return False
        return abs(abs(inner_product(self.representative, other.representative)) - 1.0) <= RAY_TOL

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Projector:
    """Hermitian idempotent matrix. Construction rejects anything else."""

    matrix: np.ndarray
    rank: int = -1

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise HilbertError(f"projector must be square, got shape {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise HilbertError(f"projector not Hermitian (defect {herm:.3e})")
        idem = np.max(np.abs(m @ m - m))
        if idem > IDEMPOTENT_TOL:
            raise HilbertError(f"projector not idempotent (defect {idem:.3e})")
        tr = np.trace(m).real
        rank = int(round(tr))
        if abs(tr - rank) > IDEMPOTENT_TOL:
            raise HilbertError(f"projector trace {tr!r} is not an integer")
        if self.rank >= 0 and self.rank != rank:
            raise HilbertError(f"declared rank {self.rank} but trace gives {rank}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rank", rank)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_fine_grained(self) -> bool:
        return self.rank == 1

    def complement(self) -> Projector:
        return Projector(np.eye(self.dim) - self.matrix)

    @classmethod
    def identity(cls, dim: int) -> Projector:
        return cls(np.eye(dim, dtype=complex))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise HilbertError(f"density matrix must be square, got shape {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise HilbertError(f"density matrix not Hermitian (defect {herm:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > NORM_TOL:
            raise HilbertError(f"density matrix trace {tr!r} != 1")
        lo = np.linalg.eigvalsh(m).min()
        if lo < -1e-10:
            raise HilbertError(f"density matrix has negative eigenvalue {lo!r}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi) -> DensityMatrix:
        v = _as_vector(psi)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise HilbertError(f"unitary must be square, got shape {m.shape}")
        defect = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if defect > UNITARY_TOL:
            raise HilbertError(f"matrix not unitary (defect {defect:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> np.ndarray:
        return self.matrix.conj().T

    @classmethod
    def identity(cls, dim: int) -> UnitaryMatrix:
        return cls(np.eye(dim, dtype=complex))


def _as_vector(x) -> np.ndarray:
    if isinstance(x, Ray):
        return x.representative.amplitudes
    if isinstance(x, StateVector):
        return x.amplitudes
    return np.asarray(x, dtype=complex)


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, (Projector, DensityMatrix, UnitaryMatrix)):
        return x.matrix
    return np.asarray(x, dtype=complex)


def inner_product(a, b) -> complex:
    """Return <a|b>, conjugate-linear in the first argument."""
    va, vb = _as_vector(a), _as_vector(b)
    _check_same_dim(va.shape[0], vb.shape[0])
    return complex(np.vdot(va, vb))


def normalize(v: Iterable[complex]) -> StateVector:
    arr = np.asarray(list(v) if not isinstance(v, np.ndarray) else v, dtype=complex)
    norm = np.linalg.norm(arr)
    if norm == 0.0 or not np.isfinite(norm):
        raise HilbertError("cannot normalize null vector")
    return StateVector(arr / norm)


def ray(v) -> Ray:
    """Ray through ``v`` (any nonzero vector, StateVector or Ray)."""
    if isinstance(v, Ray):
        return v
    if isinstance(v, StateVector):
        return Ray(v)
    return Ray(normalize(v))


def projector_from_ray(r) -> Projector:
    v = _as_vector(ray(r))
    return Projector(np.outer(v, v.conj()), rank=1)


def fs_distance(a, b) -> float:
    """Fubini-Study geodesic distance arccos|<a|b>|, in [0, pi/2]."""
    ov = abs(inner_product(ray(a).representative, ray(b).representative))
    return float(np.arccos(min(ov, 1.0)))


def geodesic_interpolate(a, b, s: float) -> Ray:
    """Point at fraction ``s`` along the Fubini-Study geodesic from ``a`` to ``b``.

    The representative of ``b`` is rephased so its overlap with ``a`` is real and
    positive; the two unit vectors are then joined by a great-circle arc.
    """
    va = ray(a).vector
    vb = ray(b).vector
    _check_same_dim(va.shape[0], vb.shape[0])
    ov = np.vdot(va, vb)
    mod = abs(ov)
    if mod <= ORTHOGONAL_TOL:
        raise HilbertError("geodesic undefined / non-unique: endpoints are orthogonal")
    vb = vb * (ov.conjugate() / mod)
    dist = np.arccos(min(mod, 1.0))
    if dist < 1e-15:
        return Ray(normalize(va))
    out = (np.sin((1.0 - s) * dist) * va + np.sin(s * dist) * vb) / np.sin(dist)
    return Ray(normalize(out))


def orthonormal_basis_of(p) -> list[StateVector]:
    """Orthonormal vectors spanning the range of a projector."""
    P = p if isinstance(p, Projector) else Projector(p)
    vals, vecs = np.linalg.eigh(P.matrix)
    keep = vals > 0.5
    return [StateVector(vecs[:, k] / np.linalg.norm(vecs[:, k])) for k in np.flatnonzero(keep)]


def basis_state(dim: int, k: int) -> StateVector:
    e = np.zeros(dim, dtype=complex)
    e[k] = 1.0
    return StateVector(e)


def bloch_state(theta: float, phi: float) -> StateVector:
    """Spin-1/2 state with Bloch vector at colatitude ``theta``, azimuth ``phi``."""
    return StateVector(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]))


def bloch_vector(psi) -> np.ndarray:
    v = _as_vector(psi)
    rho = np.outer(v, v.conj())
    return np.array([2 * rho[0, 1].real, 2 * rho[1, 0].imag, (rho[0, 0] - rho[1, 1]).real])


# JSON helpers: complex arrays travel as nested [re, im] pairs.

def to_pairs(a) -> list:
    arr = np.asarray(_as_matrix(a) if not isinstance(a, (StateVector, Ray)) else _as_vector(a))
    if arr.ndim == 0:
        z = complex(arr)
        return [z.real, z.imag]
    return [to_pairs(x) for x in arr]


def from_pairs(obj: Sequence) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.shape[-1] != 2:
        raise HilbertError("expected innermost [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
