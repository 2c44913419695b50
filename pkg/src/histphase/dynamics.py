"""Time-dependent Hamiltonian evolution, the action, and the phase split.

Units: hbar = 1, Hamiltonians in angular-frequency units. Evolution follows
dU/dt = -i H U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import DiscretePath, geometric_phase_open, wrap_angle
from .hilbert import (
    HERMITIAN_TOL,
    DimensionMismatchError,
    HilbertError,
    Projector,
    StateVector,
    UnitaryMatrix,
    _as_matrix,
    _as_vector,
)

PROPAGATOR_UNITARY_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    sampler: Callable[[float], np.ndarray]
    dim: int

    def __call__(self, t: float) -> np.ndarray:
        h = np.asarray(self.sampler(float(t)), dtype=complex)
        if h.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"Hamiltonian sample has shape {h.shape}, expected {(self.dim, self.dim)}")
        defect = np.max(np.abs(h - h.conj().T))
        if defect > HERMITIAN_TOL:
            raise HilbertError(f"Hamiltonian not Hermitian at t={t!r} (defect {defect:.3e})")
        return h

    def scaled(self, factor: float) -> TimeDependentHamiltonian:
        return TimeDependentHamiltonian(lambda t: factor * self.sampler(t), self.dim)

    @classmethod
    def constant(cls, h) -> TimeDependentHamiltonian:
        h = np.array(h, dtype=complex)
        return cls(lambda t: h, h.shape[0])

    @classmethod
    def zero(cls, dim: int) -> TimeDependentHamiltonian:
        return cls.constant(np.zeros((dim, dim), dtype=complex))


def rotating_field(theta: float, period: float, strength: float = 1.0) -> TimeDependentHamiltonian:
    """Spin-1/2 in a field of fixed colatitude whose azimuth turns once per ``period``.

    H(t) = (strength / 2) n(t).sigma with n at colatitude ``theta`` and azimuth
    2 pi t / period.
    """
    st, ct = math.sin(theta), math.cos(theta)

    def sampler(t):
        phi = 2 * math.pi * t / period
        return 0.5 * strength * (st * math.cos(phi) * SIGMA_X + st * math.sin(phi) * SIGMA_Y + ct * SIGMA_Z)

    return TimeDependentHamiltonian(sampler, 2)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    h -= np.trace(h).real / dim * np.eye(dim)
    return scale * h / max(np.linalg.norm(h, 2), 1e-300)


def random_smooth_hamiltonian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> TimeDependentHamiltonian:
    """H0 + sin(w1 t) H1 + cos(w2 t) H2 with random traceless Hermitian terms."""
    h0, h1, h2 = (random_hermitian(rng, dim, scale) for _ in range(3))
    w1, w2 = rng.uniform(0.5, 3.0, size=2)
    return TimeDependentHamiltonian(lambda t: h0 + math.sin(w1 * t) * h1 + math.cos(w2 * t) * h2, dim)


def expm_hermitian(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) for Hermitian h (or a stack of them) via eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * vals * dt)
    return (vecs * phases[..., None, :]) @ np.swapaxes(vecs.conj(), -1, -2)


@dataclass(frozen=True, eq=False)
class PropagatorTable:
    """U(t_k) on an increasing grid with U(t_0) = identity."""

    times: np.ndarray
    unitaries: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        u = np.array(self.unitaries, dtype=complex)
        if t.ndim != 1 or t.shape[0] < 1 or u.shape[0] != t.shape[0] or u.ndim != 3:
            raise HilbertError("propagator table needs one d x d unitary per grid time")
        if np.any(np.diff(t) <= 0):
            raise HilbertError("propagator grid must be strictly increasing")
        eye = np.eye(u.shape[1])
        defect = np.max(np.abs(np.swapaxes(u.conj(), 1, 2) @ u - eye))
        if defect > PROPAGATOR_UNITARY_TOL:
            raise HilbertError(f"propagator entries not unitary (defect {defect:.3e})")
        if np.max(np.abs(u[0] - eye)) > PROPAGATOR_UNITARY_TOL:
            raise HilbertError("U(t_0) must be the identity")
        t.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "unitaries", u)

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    def __len__(self):
        return self.times.shape[0]

    def index_of(self, t: float) -> int:
        k = int(np.searchsorted(self.times, t))
        for j in (k - 1, k):
            if 0 <= j < len(self) and abs(self.times[j] - t) <= 1e-12 * max(1.0, abs(t)):
                return j
        raise HilbertError(f"time {t!r} is not on the propagator grid")

    def unitary(self, k: int) -> UnitaryMatrix:
        return UnitaryMatrix(self.unitaries[k])

    def at(self, t: float) -> np.ndarray:
        return self.unitaries[self.index_of(t)]

    @classmethod
    def identity(cls, times: Sequence[float], dim: int) -> PropagatorTable:
        n = len(times)
        return cls(np.asarray(times, dtype=float), np.broadcast_to(np.eye(dim, dtype=complex), (n, dim, dim)))

    @classmethod
    def from_steps(cls, times: Sequence[float], steps: Sequence) -> PropagatorTable:
        """Compose arbitrary per-step unitaries: U(t_k) = step_k U(t_{k-1})."""
        steps = [_as_matrix(s) for s in steps]
        if len(steps) != len(times) - 1:
            raise HilbertError("need one step unitary per grid interval")
        dim = steps[0].shape[0] if steps else 1
        u = np.empty((len(times), dim, dim), dtype=complex)
        u[0] = np.eye(dim)
        for k, s in enumerate(steps, start=1):
            u[k] = s @ u[k - 1]
        return cls(np.asarray(times, dtype=float), u)


def propagate(H: TimeDependentHamiltonian, t_grid: Sequence[float]) -> PropagatorTable:
    """Time-ordered propagator by midpoint matrix exponentials (second order)."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.shape[0] < 2:
        raise HilbertError("time grid needs at least two points")
    if np.any(np.diff(t) <= 0):
        raise HilbertError("time grid must be strictly increasing")
    dt = np.diff(t)
    mids = t[:-1] + dt / 2
    hs = np.array([H(m) for m in mids])
    vals, vecs = np.linalg.eigh(hs)
    steps = (vecs * np.exp(-1j * vals * dt[:, None])[:, None, :]) @ np.swapaxes(vecs.conj(), 1, 2)
    u = np.empty((t.shape[0], H.dim, H.dim), dtype=complex)
    u[0] = np.eye(H.dim)
    for k in range(1, t.shape[0]):
        u[k] = steps[k - 1] @ u[k - 1]
    return PropagatorTable(t, u)


def evolve_state(table: PropagatorTable, psi0) -> DiscretePath:
    """Schrodinger trajectory U(t_k)|psi0> on the table's grid.

    The returned path keeps the evolved vectors as its representatives, so it
    doubles as the lift for the connection integral and the action.
    """
    v = _as_vector(psi0)
    if v.shape[0] != table.dim:
        raise DimensionMismatchError(f"state dim {v.shape[0]} vs propagator dim {table.dim}")
    vecs = table.unitaries @ v
    return DiscretePath(table.times, vecs)


def heisenberg_projector(P: Projector, U) -> Projector:
    """U^dagger P U."""
    u = U if isinstance(U, UnitaryMatrix) else UnitaryMatrix(U)
    if u.dim != P.dim:
        raise DimensionMismatchError(f"projector dim {P.dim} vs unitary dim {u.dim}")
    return Projector(u.dagger @ P.matrix @ u.matrix, rank=P.rank)


def _lift_of(lift, times) -> DiscretePath:
    if isinstance(lift, DiscretePath):
        if times is not None and len(times) != len(lift):
            raise HilbertError("time stamps do not match the lift length")
        return lift
    vecs = [_as_vector(s) for s in lift]
    if times is None:
        raise HilbertError("a bare list of vectors needs time stamps")
    if len(times) != len(vecs):
        raise HilbertError(f"{len(vecs)} vectors but {len(times)} time stamps")
    return DiscretePath(np.asarray(times, dtype=float), np.array(vecs))


def energy_expectations(path: DiscretePath, H: TimeDependentHamiltonian) -> np.ndarray:
    if H.dim != path.dim:
        raise DimensionMismatchError(f"Hamiltonian dim {H.dim} vs path dim {path.dim}")
    hs = np.array([H(t) for t in path.times])
    return np.einsum("ki,kij,kj->k", path.vectors.conj(), hs, path.vectors).real


def _trapezoid(values: np.ndarray, times: np.ndarray) -> float:
    return float(np.sum(np.diff(times) * (values[1:] + values[:-1]) / 2))


def kinematic_action(path: DiscretePath) -> complex:
    """Left-endpoint sum of i<psi_{k-1}|psi_k - psi_{k-1}> over the lift."""
    v = path.vectors
    fwd = np.einsum("ij,ij->i", v[:-1].conj(), v[1:])
    return complex(1j * np.sum(fwd - 1.0))


def action_functional(lift, H: TimeDependentHamiltonian, times=None) -> complex:
    """Discrete integral of <phi| i d/dt - H |phi> along a lift.

    The kinematic part uses left-endpoint overlap differences, the Hamiltonian
    part the trapezoid rule. The imaginary part is a discretization artefact
    of order dt.
    """
    path = _lift_of(lift, times)
    energy = _trapezoid(energy_expectations(path, H), path.times)
    return kinematic_action(path) - energy


@dataclass(frozen=True)
class PhaseSplit:
    total_angle: float
    geometric_angle: float
    dynamical_angle: float
    dynamical_phase: float  # unwrapped -integral <H> dt

    @property
    def closure_defect(self) -> float:
        return abs(wrap_angle(self.total_angle - self.geometric_angle - self.dynamical_angle))


def phase_split(lift, H: TimeDependentHamiltonian, times=None) -> PhaseSplit:
    """Split the phase of a lift into geometric and dynamical parts.

    geometric: argument of the closed overlap product of the rays.
    dynamical: -integral <psi|H|psi> dt (trapezoid).
    total: arg <psi(t_0)|psi(t_f)>, the phase difference of the endpoints
    (closing the open path by a geodesic). The split is meaningful when the
    lift is the Schrodinger trajectory of ``H``; with ``H = 0`` that is the
    horizontal lift.
    """
    path = _lift_of(lift, times)
    geo = geometric_phase_open(path)
    dyn = -_trapezoid(energy_expectations(path, H), path.times)
    closing = np.vdot(path.vectors[0], path.vectors[-1])
    return PhaseSplit(wrap_angle(np.angle(closing)), geo.angle, wrap_angle(dyn), dyn)


def adiabatic_spin_split(
    theta: float,
    ramp_time: float,
    n_steps: int,
    strength: float = 2 * math.pi,
) -> PhaseSplit:
    """Phase split for a spin that starts aligned with a slowly rotating field."""
    if ramp_time <= 0:
        raise ValueError(f"ramp time must be positive, got {ramp_time!r}")
    H = rotating_field(theta, ramp_time, strength)
    table = propagate(H, np.linspace(0.0, ramp_time, n_steps + 1))
    psi0 = StateVector(np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=complex))
    return phase_split(evolve_state(table, psi0), H)
