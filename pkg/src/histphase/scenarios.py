"""Named experiments behind the ``histphase`` command.

Each ``run_*`` function takes a :class:`ScenarioConfig` and returns a
:class:`RunRecord` whose ``checks`` map names the scenario's internal
assertions to pass/fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .decoherence import (
    build_decoherence_matrix,
    consistency_check,
    decoherence_functional,
    df_coarse_sum,
    interference,
)
from .dynamics import PropagatorTable, adiabatic_spin_split, propagate, random_smooth_hamiltonian
from .geometry import (
    ERROR_FLOOR,
    angle_distance,
    bloch_latitude_loop,
    convergence_study,
    fitted_order,
    loop_holonomy,
    sample_loop,
    solid_angle_phase,
    wrap_angle,
)
from .hilbert import DensityMatrix, basis_state, projector_from_ray
from .histories import History, build_history_set, coarse_phase_sum, trace_class_operator
from .sampling import random_alternatives, random_density

N_STEPS_MIN = 4
N_STEPS_MAX = 2**20


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    n_steps: int | None = None
    output: str | None = None
    format: str = "csv"
    seed: int = 0

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {sorted(SCENARIOS)}")
        spec = SCENARIOS[self.scenario]
        unknown = set(self.params) - set(spec.defaults)
        if unknown:
            raise ConfigError(f"unknown parameter(s) for {self.scenario}: {sorted(unknown)}")
        for k, v in self.params.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"parameter {k} must be a finite number, got {v!r}")
        n = self.resolved_n_steps()
        if int(n) != n or not N_STEPS_MIN <= n <= N_STEPS_MAX:
            raise ConfigError(f"n_steps must be an integer in [{N_STEPS_MIN}, {N_STEPS_MAX}], got {n!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")

    def resolved_params(self) -> dict:
        out = dict(SCENARIOS[self.scenario].defaults)
        out.update(self.params)
        return out

    def resolved_n_steps(self) -> int:
        return SCENARIOS[self.scenario].default_n_steps if self.n_steps is None else self.n_steps

    @classmethod
    def from_dict(cls, obj: dict) -> ScenarioConfig:
        allowed = {"scenario", "params", "n_steps", "output", "format", "seed"}
        extra = set(obj) - allowed
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "scenario" not in obj:
            raise ConfigError("config needs a 'scenario' key")
        return cls(**obj)


@dataclass
class RunRecord:
    scenario: str
    params: dict
    rows: list[dict]
    wall_time: float
    library_version: str = __version__
    checks: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.rows) and all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


@dataclass(frozen=True)
class ScenarioSpec:
    run: Callable[[ScenarioConfig], RunRecord]
    defaults: dict
    default_n_steps: int
    columns: tuple
    angle_columns: tuple
    description: str


def _powers_of_two(lo: int, hi: int) -> list[int]:
    out = []
    n = lo
    while n <= hi:
        out.append(n)
        n *= 2
    if out and out[-1] != hi and hi > lo:
        out.append(hi)
    return out


def _angles_ok(rows, columns) -> bool:
    for r in rows:
        for c in columns:
            x = r[c]
            if x is not None and not (-math.pi < x <= math.pi):
                return False
    return True


def run_bloch_loop(config: ScenarioConfig) -> RunRecord:
    t0 = time.perf_counter()
    p = config.resolved_params()
    theta = float(p["theta"])
    if not 0.0 < theta < math.pi:
        raise ConfigError("theta must lie strictly between the poles (0, pi)")
    n_max = config.resolved_n_steps()
    ref_n = int(p["reference_n"])
    gen = bloch_latitude_loop(theta)

    # Richardson step for the O(1/n^2) error of the latitude-loop product
    a_hi = loop_holonomy(sample_loop(gen, ref_n)).angle
    a_lo = loop_holonomy(sample_loop(gen, ref_n // 2)).angle
    reference = wrap_angle(a_hi + wrap_angle(a_hi - a_lo) / 3)
    exact = solid_angle_phase(theta)

    rows = []
    for n in _powers_of_two(8, n_max):
        path = sample_loop(gen, n)
        hol = loop_holonomy(path).angle
        tr = trace_class_operator(History.fine_grained(path), PropagatorTable.identity(path.times, 2))
        tr_angle = wrap_angle(np.angle(tr))
        rows.append({
            "n": n,
            "holonomy_angle": hol,
            "error_vs_reference": angle_distance(hol, reference),
            "analytic_error": angle_distance(hol, exact),
            "trace_class_operator_angle": tr_angle,
            "identity_gap": angle_distance(tr_angle, hol),
        })
    checks = {
        "trace_identity_1e-12": all(r["identity_gap"] < 1e-12 for r in rows),
        "error_below_10_over_n": all(r["error_vs_reference"] < 10 / r["n"] for r in rows if r["n"] >= 128),
        "reference_matches_solid_angle": angle_distance(reference, exact) < 1e-8,
    }
    summary = {"reference_angle": reference, "reference_n": ref_n, "solid_angle_phase": exact}
    return RunRecord(config.scenario, p, rows, time.perf_counter() - t0, checks=checks, summary=summary)


def run_adiabatic_spin(config: ScenarioConfig) -> RunRecord:
    t0 = time.perf_counter()
    p = config.resolved_params()
    theta, base_t = float(p["theta"]), float(p["ramp_time"])
    if base_t <= 0:
        raise ConfigError("ramp_time must be positive")
    doublings, strength, scale = int(p["doublings"]), float(p["strength"]), float(p["scale"])
    if doublings < 1:
        raise ConfigError("need at least one doubling")
    target = solid_angle_phase(theta)
    base_n = config.resolved_n_steps()

    rows = []
    for k in range(doublings + 1):
        ramp = base_t * 2**k
        n = base_n * 2**k
        split = adiabatic_spin_split(theta, ramp, n, strength)
        rows.append({
            "T": ramp,
            "n_steps": n,
            "total_angle": split.total_angle,
            "dynamical_angle": split.dynamical_angle,
            "geometric_angle": split.geometric_angle,
            "geometric_error": angle_distance(split.geometric_angle, target),
            "closure_defect": split.closure_defect,
            "dynamical_phase": split.dynamical_phase,
        })
    errs = [r["geometric_error"] for r in rows]
    last = rows[-1]
    scaled = adiabatic_spin_split(theta, last["T"], last["n_steps"], strength * scale)
    scaled_gap = angle_distance(scaled.geometric_angle, last["geometric_angle"])
    checks = {
        "geometric_error_decreasing": all(b <= 1.1 * a for a, b in zip(errs, errs[1:])),
        "split_closure_1e-3": all(r["closure_defect"] < 1e-3 for r in rows),
        "scaled_hamiltonian_geometric_1e-3": scaled_gap < 1e-3,
    }
    summary = {
        "target_geometric_angle": target,
        "scale": scale,
        "scaled_geometric_angle": scaled.geometric_angle,
        "scaled_geometric_gap": scaled_gap,
        "scaled_dynamical_phase": scaled.dynamical_phase,
        "dynamical_phase_ratio": scaled.dynamical_phase / last["dynamical_phase"],
    }
    return RunRecord(config.scenario, p, rows, time.perf_counter() - t0, checks=checks, summary=summary)


def double_slit_set(orthogonal_final: bool = False):
    """Two-time C^2 set: which-slit basis {e0, e1} at t=1, final basis at t=2."""
    e0, e1 = basis_state(2, 0), basis_state(2, 1)
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    slits = [projector_from_ray(e0), projector_from_ray(e1)]
    final = slits if orthogonal_final else [projector_from_ray(plus), projector_from_ray(minus)]
    hset = build_history_set([slits, final], [1.0, 2.0])
    rho0 = DensityMatrix.pure(plus)
    table = PropagatorTable.identity([0.0, 1.0, 2.0], 2)
    return hset, rho0, table


def run_double_slit(config: ScenarioConfig) -> RunRecord:
    t0 = time.perf_counter()
    p = config.resolved_params()
    hset, rho0, table = double_slit_set(bool(p["orthogonal_final"]))
    m = build_decoherence_matrix(hset, rho0, table)
    report = consistency_check(m, float(p["epsilon"]))

    # the two branches (slit 0, slit 1) ending in final outcome 0
    branch = [hset.index((0, 0)), hset.index((1, 0))]
    rows = []
    for i in branch:
        for j in branch:
            d = m.values[i, j]
            rows.append({
                "alpha": m.labels[i],
                "beta": m.labels[j],
                "re_d": float(d.real),
                "im_d": float(d.imag),
                "abs_d": float(abs(d)),
                "interference": None if i == j else interference(m, i, j),
            })

    identity_gaps = []
    for i in range(len(hset)):
        for j in range(len(hset)):
            diff = sum(a != b for a, b in zip(hset.labels[i], hset.labels[j]))
            if i != j and diff == 1:
                identity_gaps.append(abs(interference(m, i, j) - 2 * m.values[i, j].real))
    checks = {
        "hermitian_1e-12": m.hermiticity_defect < 1e-12,
        "grand_sum_1e-9": abs(m.grand_sum - 1) < 1e-9,
        "interference_identity_1e-12": max(identity_gaps) < 1e-12,
    }
    summary = {
        "labels": m.labels,
        "decoherence_matrix": m.to_json()["values"],
        "probabilities": [float(x) for x in m.diagonal.real],
        "grand_sum": [m.grand_sum.real, m.grand_sum.imag],
        "interference_defect": rows[1]["interference"],
        "consistency": report.to_json(),
    }
    return RunRecord(config.scenario, p, rows, time.perf_counter() - t0, checks=checks, summary=summary)


def run_convergence(config: ScenarioConfig) -> RunRecord:
    t0 = time.perf_counter()
    p = config.resolved_params()
    theta = float(p["theta"])
    if not 0.0 <= theta <= math.pi:
        raise ConfigError("theta must lie in [0, pi]")
    ns = _powers_of_two(8, config.resolved_n_steps())
    ref_n = int(p["reference_n"]) or None
    study = convergence_study(bloch_latitude_loop(theta), ns, reference_n=ref_n)
    order = fitted_order(study)
    rows = [{"n": r.n_steps, "angle": r.angle, "abs_error": r.abs_error_vs_reference} for r in study]
    errs = [r.abs_error_vs_reference for r in study]
    monotone = all(b <= a for a, b in zip(errs, errs[1:]) if b > ERROR_FLOOR)
    checks = {"errors_monotone_above_floor": monotone, "fitted_order_at_least_1": order >= 1.0}
    summary = {
        "fitted_order": order if math.isfinite(order) else str(order),
        "exact_at_all_n": all(e <= ERROR_FLOOR for e in errs),
        "reference_n": ref_n or ns[-1],
    }
    return RunRecord(config.scenario, p, rows, time.perf_counter() - t0, checks=checks, summary=summary)


def run_df_coarse_check(config: ScenarioConfig) -> RunRecord:
    t0 = time.perf_counter()
    p = config.resolved_params()
    dim, rank, n_times, trials = int(p["dim"]), int(p["rank"]), int(p["times"]), int(p["trials"])
    if not 2 <= dim <= 4 or not 1 <= n_times <= 3 or not 1 <= rank < dim or trials < 1:
        raise ConfigError("need 2 <= dim <= 4, 1 <= rank < dim, 1 <= times <= 3, trials >= 1")
    n = config.resolved_n_steps()
    grid = np.linspace(0.0, 1.0, n + 1)
    event_idx = np.linspace(0, n, n_times + 1).astype(int)[1:]
    event_times = grid[event_idx]
    rng = np.random.default_rng(config.seed)

    rows = []
    for trial in range(trials):
        H = random_smooth_hamiltonian(rng, dim, float(p["h_scale"]))
        table = propagate(H, grid)
        rho0 = DensityMatrix(random_density(rng, dim))
        pair = []
        for _ in range(2):
            projs = [random_alternatives(rng, dim, [rank, dim - rank])[0] for _ in event_times]
            pair.append(History.from_lists(event_times, projs))
        a, b = pair
        op = decoherence_functional(a, b, rho0, table)
        coarse = df_coarse_sum(a, b, rho0, None, table)
        tr = trace_class_operator(a, table)
        rows.append({
            "trial": trial,
            "re_operator": op.real,
            "im_operator": op.imag,
            "re_coarse_sum": coarse.real,
            "im_coarse_sum": coarse.imag,
            "df_discrepancy": abs(coarse - op),
            "phase_sum_discrepancy": abs(coarse_phase_sum(a, table) - tr),
        })
    worst = max(max(r["df_discrepancy"], r["phase_sum_discrepancy"]) for r in rows)
    checks = {"coarse_sums_match_1e-9": worst < 1e-9}
    summary = {"max_discrepancy": worst, "seed": config.seed}
    return RunRecord(config.scenario, p, rows, time.perf_counter() - t0, checks=checks, summary=summary)


SCENARIOS: dict[str, ScenarioSpec] = {
    "bloch_loop": ScenarioSpec(
        run_bloch_loop,
        {"theta": math.pi / 2, "reference_n": 16384},
        1024,
        ("n", "holonomy_angle", "error_vs_reference", "analytic_error", "trace_class_operator_angle", "identity_gap"),
        ("holonomy_angle", "trace_class_operator_angle"),
        "holonomy of a spin-1/2 latitude loop vs -pi(1-cos theta); trace-of-class-operator identity",
    ),
    "adiabatic_spin": ScenarioSpec(
        run_adiabatic_spin,
        {"theta": math.pi / 3, "ramp_time": 50.0, "doublings": 4, "strength": 8 * math.pi, "scale": 2.0},
        2000,
        ("T", "n_steps", "total_angle", "dynamical_angle", "geometric_angle", "geometric_error",
         "closure_defect", "dynamical_phase"),
        ("total_angle", "dynamical_angle", "geometric_angle"),
        "geometric/dynamical split for a spin following a slowly rotating field",
    ),
    "double_slit": ScenarioSpec(
        run_double_slit,
        {"orthogonal_final": 0, "epsilon": 0.1},
        4,
        ("alpha", "beta", "re_d", "im_d", "abs_d", "interference"),
        (),
        "two-branch decoherence matrix, interference defect and consistency verdict in C^2",
    ),
    "convergence": ScenarioSpec(
        run_convergence,
        {"theta": math.pi / 2, "reference_n": 0},
        128,
        ("n", "angle", "abs_error"),
        ("angle",),
        "holonomy convergence for a latitude loop (theta=pi/2 equator, theta=0 constant loop)",
    ),
    "df_coarse_check": ScenarioSpec(
        run_df_coarse_check,
        {"dim": 3, "rank": 2, "times": 2, "trials": 20, "h_scale": 0.5},
        64,
        ("trial", "re_operator", "im_operator", "re_coarse_sum", "im_coarse_sum", "df_discrepancy",
         "phase_sum_discrepancy"),
        (),
        "coarse-grained sums over fine-grained refinements vs the operator forms",
    ),
}


def run(config: ScenarioConfig) -> RunRecord:
    config.validate()
    spec = SCENARIOS[config.scenario]
    record = spec.run(config)
    record.checks["angles_in_range"] = _angles_ok(record.rows, spec.angle_columns)
    return record
