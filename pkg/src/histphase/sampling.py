"""Seeded random states, projectors and paths for property sweeps."""

from __future__ import annotations

import numpy as np

from .dynamics import random_hermitian
from .geometry import DiscretePath


def random_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_projector(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    q = random_unitary(rng, dim)[:, :rank]
    return q @ q.conj().T


def random_alternatives(rng: np.random.Generator, dim: int, ranks) -> list[np.ndarray]:
    """Mutually orthogonal projectors with the given ranks (ranks must sum to dim)."""
    if sum(ranks) != dim:
        raise ValueError(f"ranks {ranks} do not sum to {dim}")
    q = random_unitary(rng, dim)
    out, k = [], 0
    for r in ranks:
        cols = q[:, k:k + r]
        out.append(cols @ cols.conj().T)
        k += r
    return out


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_path(rng: np.random.Generator, dim: int, n_steps: int) -> DiscretePath:
    """n_steps + 1 independent random rays with random representatives."""
    vecs = np.array([random_vector(rng, dim) for _ in range(n_steps + 1)])
    return DiscretePath(np.arange(n_steps + 1, dtype=float), vecs)


def smooth_path(rng: np.random.Generator, dim: int, times, scale: float = 1.0) -> DiscretePath:
    """exp(-i K t) psi0 for a random Hermitian K with operator norm ``scale``."""
    k = random_hermitian(rng, dim, scale)
    v0 = random_vector(rng, dim)
    times = np.asarray(times, dtype=float)
    vals, vecs = np.linalg.eigh(k)
    coeff = vecs.conj().T @ v0
    out = (vecs @ (np.exp(-1j * np.outer(vals, times)) * coeff[:, None])).T
    return DiscretePath(times, out)
