"""Geometric phases of sampled paths in projective Hilbert space."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hilbert import (
    ORTHOGONAL_TOL,
    DimensionMismatchError,
    HilbertError,
    Ray,
    StateVector,
    _as_vector,
    _frozen,
)

VANISH_TOL = 1e-12
ERROR_FLOOR = 1e-13


class OrthogonalityError(HilbertError):
    """A phase or geodesic was requested across orthogonal rays."""


class NotALoopError(HilbertError):
    pass


def wrap_angle(x: float) -> float:
    """Map an angle to (-pi, pi]."""
    y = math.remainder(float(x), 2 * math.pi)
    if y <= -math.pi:
        y += 2 * math.pi
    return y


def angle_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """Time-stamped samples of a path of rays.

    ``vectors`` holds one unit representative per sample (row). Ray-level
    quantities ignore the representatives' phases; the connection integral and
    the action use them as the lift.
    """

    times: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        t = _frozen(self.times, dtype=float)
        v = np.array(self.vectors, dtype=complex, copy=True)
        if t.ndim != 1 or v.ndim != 2 or v.shape[0] != t.shape[0]:
            raise HilbertError(f"need n+1 times and an (n+1, d) sample array, got {t.shape} and {v.shape}")
        if t.shape[0] < 2:
            raise HilbertError("a path needs at least two samples")
        if np.any(np.diff(t) <= 0):
            raise HilbertError("path times must be strictly increasing")
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms == 0):
            raise HilbertError("cannot normalize null vector")
        v = v / norms[:, None]
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def from_states(cls, states: Sequence, times: Sequence[float] | None = None) -> DiscretePath:
        vecs = np.array([_as_vector(s) for s in states])
        if times is None:
            times = np.arange(len(vecs), dtype=float)
        return cls(np.asarray(times, dtype=float), vecs)

    from_rays = from_states

    @property
    def n_steps(self) -> int:
        return self.times.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.times.shape[0]

    @property
    def rays(self) -> list[Ray]:
        return [Ray(StateVector(v)) for v in self.vectors]

    @property
    def lift(self) -> list[StateVector]:
        return [StateVector(v) for v in self.vectors]

    def with_phases(self, phases) -> DiscretePath:
        """Same rays, representatives multiplied by ``exp(i*phases)``."""
        return DiscretePath(self.times, self.vectors * np.exp(1j * np.asarray(phases))[:, None])

    def reversed(self) -> DiscretePath:
        t = self.times
        return DiscretePath((t[-1] + t[0]) - t[::-1], self.vectors[::-1])

    def concat(self, other: DiscretePath) -> DiscretePath:
        """Join at a shared sample: ``other`` starts on this path's last ray.

        The shared sample keeps this path's representative.
        """
        if not Ray(StateVector(self.vectors[-1])) == Ray(StateVector(other.vectors[0])):
            raise HilbertError("paths do not share a junction ray")
        shift = self.times[-1] - other.times[0]
        return DiscretePath(
            np.concatenate([self.times, other.times[1:] + shift]),
            np.vstack([self.vectors, other.vectors[1:]]),
        )


@dataclass(frozen=True)
class PhaseResult:
    phase_factor: complex
    angle: float
    magnitude: float

    @property
    def valid(self) -> bool:
        return self.magnitude > 0.0

    @classmethod
    def from_complex(cls, z: complex) -> PhaseResult:
        mag = abs(z)
        if mag == 0.0:
            return cls(0j, math.nan, 0.0)
        return cls(complex(z), wrap_angle(np.angle(z)), float(mag))


@dataclass(frozen=True)
class ConvergenceRow:
    n_steps: int
    angle: float
    abs_error_vs_reference: float


def _step_overlaps(vecs: np.ndarray) -> np.ndarray:
    # <psi_i | psi_{i-1}> for i = 1..n
    return np.einsum("ij,ij->i", vecs[1:].conj(), vecs[:-1])


def overlap_chain(vecs) -> complex:
    """Raw product <v_0|v_n> * prod_i <v_i|v_{i-1}> with no vanishing check."""
    vecs = np.asarray(vecs, dtype=complex)
    return complex(np.vdot(vecs[0], vecs[-1]) * np.prod(_step_overlaps(vecs)))


def pancharatnam_product(path: DiscretePath) -> PhaseResult:
    """Closed overlap product of a sampled path.

    The closing factor <psi_0|psi_n> joins the endpoints by a geodesic, so the
    result does not depend on the representatives chosen. A vanishing factor
    yields magnitude 0 and an undefined (nan) angle.
    """
    vecs = path.vectors
    steps = _step_overlaps(vecs)
    closing = np.vdot(vecs[0], vecs[-1])
    if min(np.abs(steps).min(), abs(closing)) <= VANISH_TOL:
        return PhaseResult(0j, math.nan, 0.0)
    return PhaseResult.from_complex(closing * np.prod(steps))


def geometric_phase_open(path: DiscretePath) -> PhaseResult:
    if abs(np.vdot(path.vectors[0], path.vectors[-1])) <= ORTHOGONAL_TOL:
        raise OrthogonalityError("open-path phase undefined: endpoints are orthogonal")
    return pancharatnam_product(path)


def _lift_array(path: DiscretePath, lift) -> np.ndarray:
    if lift is None:
        return path.vectors
    vecs = np.array([_as_vector(s) for s in lift], dtype=complex)
    if vecs.shape[0] != len(path):
        raise HilbertError(f"lift has {vecs.shape[0]} vectors for {len(path)} samples")
    if vecs.shape[1] != path.dim:
        raise DimensionMismatchError(f"lift dimension {vecs.shape[1]} vs path dimension {path.dim}")
    vecs = vecs / np.linalg.norm(vecs, axis=1)[:, None]
    same = np.abs(np.einsum("ij,ij->i", vecs.conj(), path.vectors))
    if np.any(np.abs(same - 1.0) > 1e-10):
        raise HilbertError("lift does not represent the path's rays")
    return vecs


def connection_integral(path: DiscretePath, lift=None) -> float:
    """Left-endpoint line integral of the Berry connection along a lift.

    Sums Re(i <psi_{i-1}|psi_i - psi_{i-1}>) = -Im <psi_{i-1}|psi_i>. Gauge
    dependent. ``lift`` defaults to the path's stored representatives.
    """
    vecs = _lift_array(path, lift)
    fwd = np.einsum("ij,ij->i", vecs[:-1].conj(), vecs[1:])
    if np.abs(fwd).min() <= VANISH_TOL:
        raise OrthogonalityError("lift has orthogonal consecutive samples")
    return float(-np.sum(fwd.imag))


def horizontal_lift(path: DiscretePath) -> DiscretePath:
    """Rephase representatives so consecutive overlaps are real and positive."""
    vecs = np.array(path.vectors)
    for i in range(1, len(vecs)):
        ov = np.vdot(vecs[i - 1], vecs[i])
        if abs(ov) <= VANISH_TOL:
            raise OrthogonalityError(f"orthogonal consecutive samples at index {i}")
        vecs[i] *= ov.conjugate() / abs(ov)
    return DiscretePath(path.times, vecs)


def is_loop(path: DiscretePath) -> bool:
    return Ray(StateVector(path.vectors[0])) == Ray(StateVector(path.vectors[-1]))


def loop_holonomy(path: DiscretePath) -> PhaseResult:
    if not is_loop(path):
        raise NotALoopError("not a loop: first and last rays differ")
    return pancharatnam_product(path)


def fs_length(path: DiscretePath) -> float:
    ov = np.abs(_step_overlaps(path.vectors))
    return float(np.sum(np.arccos(np.minimum(ov, 1.0))))


def refine_path(path: DiscretePath, factor: int) -> DiscretePath:
    """Insert ``factor - 1`` geodesic points into every segment."""
    if int(factor) != factor or factor < 2:
        raise ValueError(f"refinement factor must be an integer >= 2, got {factor!r}")
    factor = int(factor)
    vecs, t = path.vectors, path.times
    s = np.arange(factor) / factor
    out_v, out_t = [], []
    for i in range(path.n_steps):
        a, b = vecs[i], vecs[i + 1]
        ov = np.vdot(a, b)
        mod = abs(ov)
        if mod <= ORTHOGONAL_TOL:
            raise OrthogonalityError(f"orthogonal consecutive rays at segment {i}")
        b = b * (ov.conjugate() / mod)
        dist = math.acos(min(mod, 1.0))
        if dist < 1e-15:
            seg = np.repeat(a[None, :], factor, axis=0)
        else:
            seg = (np.sin((1 - s) * dist)[:, None] * a + np.sin(s * dist)[:, None] * b) / math.sin(dist)
        seg[0] = a
        out_v.append(seg)
        out_t.append(t[i] + s * (t[i + 1] - t[i]))
    out_v.append(vecs[-1:])
    out_t.append(t[-1:])
    return DiscretePath(np.concatenate(out_t), np.vstack(out_v))


LoopGenerator = Callable[[float], object]


def sample_loop(loop_generator: LoopGenerator, n: int) -> DiscretePath:
    """Sample a closed loop at s = k/n, k < n, and close it on the first sample."""
    s = np.arange(n) / n
    vecs = [_as_vector(loop_generator(float(x))) for x in s]
    vecs.append(vecs[0])
    return DiscretePath(np.append(s, 1.0), np.array(vecs))


def convergence_study(
    loop_generator: LoopGenerator,
    n_values: Sequence[int],
    reference_n: int | None = None,
) -> list[ConvergenceRow]:
    """Holonomy of a loop family at increasing sample counts.

    Errors are wrapped angle distances to the holonomy at ``reference_n``,
    which defaults to the largest ``n`` of the study.
    """
    ns = [int(n) for n in n_values]
    if not ns or any(n < 4 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError(f"n_values must be increasing and >= 4, got {list(n_values)}")

    def holonomy_angle(n: int) -> float:
        path = sample_loop(loop_generator, n)
        res = loop_holonomy(path)
        if not res.valid:
            raise OrthogonalityError(f"loop generator gives orthogonal consecutive samples at n={n}")
        return res.angle

    angles = [holonomy_angle(n) for n in ns]
    ref = angles[-1] if reference_n is None else holonomy_angle(int(reference_n))
    return [ConvergenceRow(n, a, angle_distance(a, ref)) for n, a in zip(ns, angles)]


def fitted_order(rows: Sequence[ConvergenceRow], floor: float = ERROR_FLOOR) -> float:
    """Least-squares slope of -log2(error) against log2(n).

    Rows at or below ``floor`` are discarded. Returns ``inf`` when every row is
    at the floor (the discretization is exact) and ``nan`` when only one row
    remains.
    """
    pts = [(r.n_steps, r.abs_error_vs_reference) for r in rows if r.abs_error_vs_reference > floor]
    if not pts:
        return math.inf
    if len(pts) < 2:
        return math.nan
    x = np.log2([p[0] for p in pts])
    y = np.log2([p[1] for p in pts])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def bloch_latitude_loop(theta: float) -> LoopGenerator:
    """Loop of spin-1/2 states at fixed colatitude, azimuth 0 -> 2*pi."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)

    def gen(u: float) -> np.ndarray:
        return np.array([c, np.exp(2j * math.pi * u) * s])

    return gen


def solid_angle_phase(theta: float) -> float:
    """Holonomy angle -pi(1 - cos theta) of the latitude loop, wrapped."""
    return wrap_angle(-math.pi * (1 - math.cos(theta)))
