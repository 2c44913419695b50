"""Histories, class operators and coarse-grained phase sums."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import PropagatorTable, heisenberg_projector
from .geometry import DiscretePath, overlap_chain
from .hilbert import (
    DimensionMismatchError,
    HilbertError,
    Projector,
    UnitaryMatrix,
    from_pairs,
    orthonormal_basis_of,
    projector_from_ray,
    to_pairs,
)

SET_TOL = 1e-10
MAX_HISTORIES = 4096
MAX_TUPLES = 4096


class HistorySetError(HilbertError):
    pass


class TooManyHistoriesError(HilbertError):
    pass


@dataclass(frozen=True, eq=False)
class History:
    """Time-ordered projectors ``((t_1, P_1), ..., (t_n, P_n))``."""

    events: tuple

    def __post_init__(self):
        events = []
        for t, p in self.events:
            events.append((float(t), p if isinstance(p, Projector) else Projector(p)))
        if not events:
            raise HilbertError("a history needs at least one event")
        times = [t for t, _ in events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise HilbertError("history times must be strictly increasing")
        dims = {p.dim for _, p in events}
        if len(dims) != 1:
            raise DimensionMismatchError(f"history mixes projector dimensions {sorted(dims)}")
        object.__setattr__(self, "events", tuple(events))

    @classmethod
    def from_lists(cls, times: Sequence[float], projectors: Sequence) -> History:
        if len(times) != len(projectors):
            raise HilbertError("need one time per projector")
        return cls(tuple(zip(times, projectors)))

    @classmethod
    def fine_grained(cls, path: DiscretePath) -> History:
        """The history asserting each sampled ray of ``path`` at its time."""
        return cls(tuple((t, projector_from_ray(v)) for t, v in zip(path.times, path.vectors)))

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.events]

    @property
    def projectors(self) -> list[Projector]:
        return [p for _, p in self.events]

    @property
    def dim(self) -> int:
        return self.events[0][1].dim

    @property
    def is_fine_grained(self) -> bool:
        return all(p.rank == 1 for p in self.projectors)

    def __len__(self):
        return len(self.events)

    def to_json(self) -> list[dict]:
        return [{"time": t, "projector": to_pairs(p.matrix)} for t, p in self.events]

    @classmethod
    def from_json(cls, obj: Sequence[dict]) -> History:
        return cls(tuple((e["time"], Projector(from_pairs(e["projector"]))) for e in obj))


def _heisenberg_events(h: History, table: PropagatorTable):
    if h.dim != table.dim:
        raise DimensionMismatchError(f"history dim {h.dim} vs propagator dim {table.dim}")
    for t, p in h.events:
        yield t, table.at(t), p


def class_operator(h: History, table: PropagatorTable) -> np.ndarray:
    """U^dag(t_n) a_n U(t_n) ... U^dag(t_1) a_1 U(t_1), latest factor leftmost."""
    c = np.eye(h.dim, dtype=complex)
    for _, u, p in _heisenberg_events(h, table):
        c = heisenberg_projector(p, UnitaryMatrix(u)).matrix @ c
    return c


def trace_class_operator(h: History, table: PropagatorTable) -> complex:
    return complex(np.trace(class_operator(h, table)))


def heisenberg_bases(h: History, table: PropagatorTable) -> list[np.ndarray]:
    """Per event, rows U^dag(t) psi^r for an orthonormal basis psi^r of the projector's range."""
    out = []
    for _, u, p in _heisenberg_events(h, table):
        basis = np.array([v.amplitudes for v in orthonormal_basis_of(p)])
        out.append(basis @ u.conj())  # row r is (U^dag psi^r)^T
    return out


def _tuple_count(bases: Sequence[np.ndarray]) -> int:
    return math.prod(b.shape[0] for b in bases)


def coarse_phase_sum(h: History, table: PropagatorTable) -> complex:
    """Sum of closed overlap products over every fine-grained refinement of ``h``.

    Each projector is split into rank-1 pieces along an orthonormal basis of
    its range; by linearity of the trace the sum equals Tr C_h.
    """
    bases = heisenberg_bases(h, table)
    if _tuple_count(bases) > MAX_TUPLES:
        raise TooManyHistoriesError(f"{_tuple_count(bases)} fine-grained tuples exceed the cap {MAX_TUPLES}")
    total = 0j
    for rows in itertools.product(*bases):
        total += overlap_chain(np.array(rows))
    return total


@dataclass(frozen=True, eq=False)
class HistorySet:
    """Exhaustive, exclusive alternatives per time and their full product."""

    times: tuple
    alternatives: tuple
    histories: tuple
    labels: tuple  # per history, the tuple of alternative indices

    @property
    def dim(self) -> int:
        return self.alternatives[0][0].dim

    def __len__(self):
        return len(self.histories)

    def index(self, label: Sequence[int]) -> int:
        return self.labels.index(tuple(label))


def _check_slot(k: int, alts: Sequence[Projector]) -> None:
    dim = alts[0].dim
    if any(p.dim != dim for p in alts):
        raise DimensionMismatchError(f"time slot {k}: alternatives of different dimension")
    total = sum(p.matrix for p in alts)
    defect = np.linalg.norm(total - np.eye(dim), 2)
    if defect > SET_TOL:
        raise HistorySetError(f"time slot {k}: alternatives not exhaustive (||sum - 1|| = {defect:.3e})")
    for i, j in itertools.combinations(range(len(alts)), 2):
        defect = np.linalg.norm(alts[i].matrix @ alts[j].matrix, 2)
        if defect > SET_TOL:
            raise HistorySetError(
                f"time slot {k}: alternatives {i} and {j} not exclusive (||P_i P_j|| = {defect:.3e})"
            )


def build_history_set(per_time_alternatives: Sequence[Sequence], times: Sequence[float]) -> HistorySet:
    if len(per_time_alternatives) != len(times):
        raise HilbertError("need one list of alternatives per time")
    alts = []
    for k, slot in enumerate(per_time_alternatives):
        if not slot:
            raise HistorySetError(f"time slot {k} has no alternatives")
        slot = tuple(p if isinstance(p, Projector) else Projector(p) for p in slot)
        _check_slot(k, slot)
        alts.append(slot)
    count = math.prod(len(s) for s in alts)
    if count > MAX_HISTORIES:
        raise TooManyHistoriesError(f"{count} histories exceed the cap {MAX_HISTORIES}")
    labels = tuple(itertools.product(*(range(len(s)) for s in alts)))
    histories = tuple(History(tuple(zip(times, (alts[k][i] for k, i in enumerate(lab))))) for lab in labels)
    return HistorySet(tuple(float(t) for t in times), tuple(alts), histories, labels)


def join_histories(a: History, b: History) -> History:
    """Disjoint join of two histories that differ in exactly one time slot.

    The differing projectors must be mutually orthogonal; the join carries
    their sum there, so its class operator is C_a + C_b.
    """
    if a.times != b.times:
        raise HilbertError("histories are on different time grids")
    differ = [k for k, (p, q) in enumerate(zip(a.projectors, b.projectors)) if not np.allclose(p.matrix, q.matrix, atol=SET_TOL)]
    if len(differ) != 1:
        raise HilbertError(f"histories differ in {len(differ)} slots; a disjoint join needs exactly one")
    k = differ[0]
    p, q = a.projectors[k].matrix, b.projectors[k].matrix
    if np.linalg.norm(p @ q, 2) > SET_TOL:
        raise HilbertError(f"histories are not disjoint at slot {k}")
    projs = list(a.projectors)
    projs[k] = Projector(p + q)
    return History.from_lists(a.times, projs)


def fine_grained_from_states(states: Sequence, times: Sequence[float]) -> History:
    return History.from_lists(times, [projector_from_ray(s) for s in states])
