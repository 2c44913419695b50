"""Decoherence functional: operator, kinematic, dynamical and coarse-sum forms."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import PropagatorTable, TimeDependentHamiltonian, _lift_of, action_functional
from .geometry import VANISH_TOL, DiscretePath
from .hilbert import DensityMatrix, DimensionMismatchError, HilbertError, to_pairs
from .histories import (
    MAX_TUPLES,
    History,
    HistorySet,
    TooManyHistoriesError,
    _tuple_count,
    class_operator,
    heisenberg_bases,
    join_histories,
)

HERMITICITY_TOL = 1e-12
GRAND_SUM_TOL = 1e-9


class VanishingOverlapWarning(UserWarning):
    pass


def _rho(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else np.asarray(x, dtype=complex)


def decoherence_functional(a: History, b: History, rho0, table: PropagatorTable) -> complex:
    """Tr(C_a rho0 C_b^dagger)."""
    if a.dim != b.dim or _rho(rho0).shape[0] != a.dim:
        raise DimensionMismatchError("histories and initial state must share one dimension")
    if a.times != b.times:
        raise HilbertError("histories are on different time grids")
    ca = class_operator(a, table)
    cb = class_operator(b, table)
    return complex(np.trace(ca @ _rho(rho0) @ cb.conj().T))


def _path_factor(vecs: np.ndarray) -> complex:
    # prod_k <v_k|v_{k-1}>
    return complex(np.prod(np.einsum("ij,ij->i", vecs[1:].conj(), vecs[:-1])))


def finegrained_pair(psi: np.ndarray, phi: np.ndarray, rho0, rho_f=None) -> complex:
    """Tr(rho_f C_psi rho0 C_phi^dag) for fine-grained histories with no dynamics.

    Equals <psi_0|rho0|phi_0> <phi_n|rho_f|psi_n> prod <psi_k|psi_{k-1}> prod <phi_{k-1}|phi_k>;
    rho_f = None means the identity.
    """
    start = psi[0].conj() @ _rho(rho0) @ phi[0]
    end = np.vdot(phi[-1], psi[-1]) if rho_f is None else phi[-1].conj() @ _rho(rho_f) @ psi[-1]
    return complex(start * end * _path_factor(psi) * np.conj(_path_factor(phi)))


def _check_grids(psi: DiscretePath, phi: DiscretePath) -> None:
    if len(psi) != len(phi) or np.any(psi.times != phi.times):
        raise HilbertError("paths are not on a shared time grid")
    if psi.dim != phi.dim:
        raise DimensionMismatchError(f"path dims {psi.dim} vs {phi.dim}")


def df_kinematic_finegrained(psi: DiscretePath, phi: DiscretePath, rho0) -> complex:
    """Decoherence functional of two fine-grained histories with vanishing Hamiltonian.

    Built from overlap products only: the open-path Berry factors of the two
    paths times the boundary overlaps with rho0. A vanishing consecutive
    overlap on either path gives 0 with a warning.
    """
    _check_grids(psi, phi)
    for name, p in (("psi", psi), ("phi", phi)):
        ov = np.abs(np.einsum("ij,ij->i", p.vectors[1:].conj(), p.vectors[:-1]))
        if ov.min() <= VANISH_TOL:
            warnings.warn(f"{name} has orthogonal consecutive samples", VanishingOverlapWarning, stacklevel=2)
            return 0j
    return finegrained_pair(psi.vectors, phi.vectors, rho0)


def df_dynamical_finegrained(
    psi_lift,
    phi_lift,
    rho0,
    rho_f=None,
    H: TimeDependentHamiltonian | None = None,
    times=None,
) -> complex:
    """<psi_0|rho0|phi_0> <phi_f|rho_f|psi_f> exp(i S[psi] - i conj(S[phi])).

    S is the discretized action of each lift; the result approaches the
    operator form with the propagated dynamics at first order in dt.
    """
    psi = _lift_of(psi_lift, times)
    phi = _lift_of(phi_lift, times)
    _check_grids(psi, phi)
    if H is None:
        raise HilbertError("a Hamiltonian is required")
    s_psi = action_functional(psi, H)
    s_phi = action_functional(phi, H)
    start = psi.vectors[0].conj() @ _rho(rho0) @ phi.vectors[0]
    v_psi, v_phi = psi.vectors[-1], phi.vectors[-1]
    end = np.vdot(v_phi, v_psi) if rho_f is None else v_phi.conj() @ _rho(rho_f) @ v_psi
    return complex(start * end * np.exp(1j * s_psi - 1j * np.conj(s_phi)))


def df_coarse_sum(a: History, b: History, rho0, rho_f=None, table: PropagatorTable | None = None) -> complex:
    """Double sum over the fine-grained refinements of ``a`` and ``b``.

    Every projector is split along an orthonormal basis of its range and
    carried to the Heisenberg picture; each fine-grained pair then contributes
    its overlap-product value. rho_f (Schrodinger picture at the last event
    time) defaults to the identity, which reproduces Tr(C_a rho0 C_b^dag).
    """
    if table is None:
        raise HilbertError("a propagator table is required")
    if a.times != b.times:
        raise HilbertError("histories are on different time grids")
    ba, bb = heisenberg_bases(a, table), heisenberg_bases(b, table)
    for name, bases in (("first", ba), ("second", bb)):
        if _tuple_count(bases) > MAX_TUPLES:
            raise TooManyHistoriesError(f"{name} history has {_tuple_count(bases)} fine-grained tuples (cap {MAX_TUPLES})")

    def chains(bases):
        # per tuple: path factor, first vector, last vector
        facs, firsts, lasts = [], [], []
        for rows in itertools.product(*bases):
            vecs = np.array(rows)
            facs.append(_path_factor(vecs))
            firsts.append(vecs[0])
            lasts.append(vecs[-1])
        return np.array(facs), np.array(firsts), np.array(lasts)

    fa, a0, an = chains(ba)
    fb, b0, bn = chains(bb)
    start = a0.conj() @ _rho(rho0) @ b0.T  # [r, s] = <a0_r|rho0|b0_s>
    if rho_f is None:
        end = (bn.conj() @ an.T).T  # [r, s] = <bn_s|an_r>
    else:
        u = table.at(a.times[-1])
        rho_h = u.conj().T @ _rho(rho_f) @ u
        end = (bn.conj() @ rho_h @ an.T).T
    return complex(np.sum(fa[:, None] * np.conj(fb)[None, :] * start * end))


@dataclass(frozen=True, eq=False)
class DecoherenceMatrix:
    set: HistorySet
    values: np.ndarray
    rho0: np.ndarray
    table: PropagatorTable

    @property
    def labels(self) -> list[str]:
        return ["".join(str(i) for i in lab) for lab in self.set.labels]

    @property
    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values.conj().T)))

    @property
    def grand_sum(self) -> complex:
        return complex(np.sum(self.values))

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values)

    def to_json(self) -> dict:
        return {"labels": self.labels, "values": to_pairs(self.values)}


def build_decoherence_matrix(hset: HistorySet, rho0, table: PropagatorTable) -> DecoherenceMatrix:
    """All pairwise entries, each computed independently, then checked.

    Raises if the result is not Hermitian to 1e-12, has a diagonal entry that
    is not real and >= -1e-12, or does not sum to Tr(rho0) within 1e-9.
    """
    rho = _rho(rho0)
    cs = [class_operator(h, table) for h in hset.histories]
    n = len(cs)
    vals = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            vals[i, j] = np.trace(cs[i] @ rho @ cs[j].conj().T)
    vals.setflags(write=False)
    m = DecoherenceMatrix(hset, vals, rho, table)
    if m.hermiticity_defect > HERMITICITY_TOL:
        raise HilbertError(f"decoherence matrix not Hermitian (defect {m.hermiticity_defect:.3e})")
    diag = m.diagonal
    if np.max(np.abs(diag.imag)) > HERMITICITY_TOL or diag.real.min() < -HERMITICITY_TOL:
        raise HilbertError("decoherence matrix diagonal is not real and nonnegative")
    if abs(m.grand_sum - np.trace(rho)) > GRAND_SUM_TOL:
        raise HilbertError(f"decoherence matrix grand sum {m.grand_sum!r} != Tr rho0")
    return m


def probability(m: DecoherenceMatrix, alpha_index: int) -> float:
    if not 0 <= alpha_index < m.values.shape[0]:
        raise IndexError(f"history index {alpha_index} out of range")
    return float(m.values[alpha_index, alpha_index].real)


def interference(m: DecoherenceMatrix, alpha_index: int, beta_index: int) -> float:
    """p(a or b) - p(a) - p(b), with p(a or b) from the joined history's class operator."""
    if alpha_index == beta_index:
        raise HilbertError("interference needs two distinct histories")
    a = m.set.histories[alpha_index]
    b = m.set.histories[beta_index]
    joined = join_histories(a, b)
    c = class_operator(joined, m.table)
    p_join = float(np.trace(c @ m.rho0 @ c.conj().T).real)
    return p_join - probability(m, alpha_index) - probability(m, beta_index)


@dataclass(frozen=True)
class ConsistencyReport:
    epsilon: float
    max_offdiag_modulus: float
    is_consistent: bool
    probabilities: list[float] | None = field(default=None)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "is_consistent": self.is_consistent,
            "max_offdiag_modulus": self.max_offdiag_modulus,
            "probabilities": self.probabilities,
        }


def consistency_check(m: DecoherenceMatrix, epsilon: float) -> ConsistencyReport:
    """Strong consistency: every off-diagonal |d(a, b)| <= epsilon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    vals = m.values
    off = np.abs(vals - np.diag(np.diag(vals)))
    worst = float(off.max()) if vals.shape[0] > 1 else 0.0
    ok = worst <= epsilon
    probs = [float(x) for x in np.diag(vals).real] if ok else None
    return ConsistencyReport(float(epsilon), worst, ok, probs)
