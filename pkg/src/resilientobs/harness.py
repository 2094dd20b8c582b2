"""Full-run orchestration: truth, observer bank, detection, switching, CSV.

Truth and observers are advanced together by one RK4 step per sample, with
the sensor outputs evaluated at the integrator stage times (attack signals
at stage times, noise held constant over the sample).  Holding the
measurement constant over a whole 20 ms step would leave a discretization
bias above the noise floor of the high-gain observers, so the coupled
continuous-time loop is what gets integrated.

Per sample: advance truth and observers -> apply resets -> switching-index
update loop (consecutive, same sample) -> state estimate -> record row.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    IntegrationDivergedError,
    ScenarioInvalidError,
    WindowsUndefinedError,
)
from .inversion import LeftInverse, LipschitzEstimates, left_inverse_for
from .model import PlantModel, get_model, measure, rk4_step
from .observer import (
    EnvelopeParams,
    ObserverConfig,
    ObserverState,
    apply_reset,
    make_observer_config,
    observer_rhs,
)
from .detection import residual as subset_residual
from .detection import threshold as detection_threshold
from .scenario import (
    AttackScenario,
    AttackSignal,
    RunConfig,
    ScenarioValidation,
    WindowConstants,
    compute_windows,
    noise_stream,
    validate_scenario,
)
from .switching import (
    SubsetEnumeration,
    SwitchState,
    error_bound,
    estimate_state,
    sigma_update,
)

INT_COLUMNS = {"sigma", "fired", "in_transient", "resets_cum"}
_LIP_CACHE: dict[tuple, LipschitzEstimates] = {}


@dataclass
class SimulationTrace:
    columns: list[str]
    rows: list[np.ndarray] = field(default_factory=list)

    def append(self, row: np.ndarray) -> None:
        if len(row) != len(self.columns):
            raise ValueError("row width does not match columns")
        self.rows.append(np.asarray(row, dtype=float))

    def as_array(self) -> np.ndarray:
        return (
            np.vstack(self.rows)
            if self.rows
            else np.empty((0, len(self.columns)))
        )

    def column(self, name: str) -> np.ndarray:
        return self.as_array()[:, self.columns.index(name)]


@dataclass
class RunReport:
    switch_events: list[tuple[float, int, int]] = field(default_factory=list)
    detection_onsets: list[float] = field(default_factory=list)
    assumption_violations: list[float] = field(default_factory=list)
    max_steady_state_error: float = 0.0
    wall_clock_s: float = 0.0
    validation: ScenarioValidation | None = None
    windows: WindowConstants | None = None

    def to_dict(self) -> dict:
        return {
            "switch_events": [
                {"t": t, "from": a, "to": b} for t, a, b in self.switch_events
            ],
            "detection_onsets": self.detection_onsets,
            "assumption_violations": self.assumption_violations,
            "max_steady_state_error": self.max_steady_state_error,
            "wall_clock_s": self.wall_clock_s,
            "windows": (
                None
                if self.windows is None
                else {
                    "delta1": self.windows.delta1,
                    "delta2": self.windows.delta2,
                    "delta": self.windows.delta,
                }
            ),
            "scenario_valid": None if self.validation is None else self.validation.passed,
        }


def trace_columns(model: PlantModel) -> list[str]:
    cols = ["t"]
    cols += [f"x{i}" for i in range(1, model.n + 1)]
    cols += [f"y{i}" for i in range(1, model.p + 1)]
    cols += [f"a{i}" for i in range(1, model.p + 1)]
    cols += [f"zhat{i}" for i in range(1, model.total_dim + 1)]
    cols += ["sigma", "residual_active", "threshold_active", "fired"]
    cols += [f"xhat{i}" for i in range(1, model.n + 1)]
    cols += ["err_inf", "err_bound", "in_transient", "resets_cum"]
    return cols


def build_bank(model: PlantModel, cfg: RunConfig) -> list[ObserverConfig]:
    thetas = (
        [cfg.theta] * model.p
        if isinstance(cfg.theta, float)
        else list(cfg.theta)
    )
    if len(thetas) != model.p:
        raise ConfigError("observer.theta must be scalar or one value per sensor")
    bounds = (
        [cfg.noise_bound] * model.p
        if isinstance(cfg.noise_bound, float)
        else list(cfg.noise_bound)
    )
    if len(bounds) != model.p:
        raise ConfigError("noise.bound must be scalar or one value per sensor")
    return [
        make_observer_config(model, i + 1, thetas[i], bounds[i])
        for i in range(model.p)
    ]


def build_enumeration(model: PlantModel, cfg: RunConfig) -> SubsetEnumeration:
    if cfg.lambda_order is not None:
        return SubsetEnumeration(q=cfg.q, subsets=cfg.lambda_order)
    if cfg.q == 1:
        return SubsetEnumeration.leave_one_out(model.p)
    return SubsetEnumeration.lexicographic(model.p, cfg.q)


def lip_estimates(
    model: PlantModel, q: int, coeff: float, lip_upper_psi: float = 770.0
) -> LipschitzEstimates:
    key = (model.name, q, coeff)
    if key not in _LIP_CACHE:
        _LIP_CACHE[key] = LipschitzEstimates.sample(
            model,
            subset_size=model.p - 2 * q,
            threshold_coeff=coeff,
            lip_upper_psi=lip_upper_psi,
            samples=2000,
            seed=20240901,
        )
    return _LIP_CACHE[key]


def run(cfg: RunConfig, force: bool = False) -> tuple[SimulationTrace, RunReport]:
    """Execute one deterministic simulation run."""
    t_start = time.perf_counter()
    model = get_model(cfg.model)
    bank = build_bank(model, cfg)
    env = EnvelopeParams.from_configs(bank)
    enum = build_enumeration(model, cfg)
    inverses: dict[tuple[int, ...], LeftInverse] = {
        sub: left_inverse_for(model, sub) for sub in enum.subsets
    }
    lip = lip_estimates(model, cfg.q, cfg.detector_coeff)

    scn = AttackScenario(
        signals=cfg.attacks,
        q=cfg.q,
        noise_bounds=tuple(
            [cfg.noise_bound] * model.p
            if isinstance(cfg.noise_bound, float)
            else cfg.noise_bound
        ),
        noise_seed=cfg.noise_seed if cfg.noise_seed is not None else cfg.seed,
    )

    n_steps = int(round(cfg.horizon / cfg.dt))
    grid = np.arange(n_steps + 1) * cfg.dt

    windows = None
    validation = None
    try:
        windows = compute_windows(bank)
        validation = validate_scenario(scn, windows, grid, model.p)
    except WindowsUndefinedError:
        if cfg.attacks and not force:
            raise
    if validation is not None and not validation.passed and not force:
        raise ScenarioInvalidError(
            f"only {validation.min_free} attack-free sensors at "
            f"t={validation.first_violation:g}; need {validation.required} "
            "(re-run with force to override)"
        )

    noise = noise_stream(scn, n_steps + 1)
    x = np.zeros(model.n) if cfg.x0 is None else np.array(cfg.x0, dtype=float)
    if cfg.z0 is not None:
        if len(cfg.z0) != model.p:
            raise ConfigError("observer.z0 must list one block per sensor")
        states = [
            ObserverState(zhat=np.array(cfg.z0[i], dtype=float))
            for i in range(model.p)
        ]
    else:
        states = [ObserverState(zhat=np.zeros(ni)) for ni in model.dims]
    for st, oc in zip(states, bank):
        if len(st.zhat) != oc.n_i:
            raise ConfigError("observer.z0 block size mismatch")

    trace = SimulationTrace(columns=trace_columns(model))
    report = RunReport(windows=windows, validation=validation)
    switch = SwitchState()
    slices = model.block_slices()
    box_warned = False
    prev_cycles = 0

    def record_sample(t, x, v, switch):
        nonlocal prev_cycles
        a = scn.attack_vector(t, model.p)
        y = measure(model, x, a, v)
        blocks = [st.zhat for st in states]
        zfull = np.concatenate(blocks)

        cache: dict[int, tuple[float, float]] = {}

        def eval_subset(sigma):
            if sigma not in cache:
                sub = enum.subset(sigma)
                zI = np.concatenate([blocks[i - 1] for i in sub])
                r = subset_residual(model, inverses[sub], zI)
                thr = detection_threshold(env, cfg.detector_coeff, t)
                cache[sigma] = (r, thr)
            return cache[sigma]

        def fires(sigma):
            r, thr = eval_subset(sigma)
            return r > thr

        pre_sigma = switch.sigma
        switch = sigma_update(switch, enum, fires, t)
        if switch.cycles_this_sample:
            report.switch_events.append((float(t), pre_sigma, switch.sigma))
            if prev_cycles == 0:
                report.detection_onsets.append(float(t))
        if switch.assumption_violated:
            report.assumption_violations.append(float(t))
        prev_cycles = switch.cycles_this_sample

        est = estimate_state(switch, blocks, inverses, enum, env, lip, t)
        r_act, thr_act = eval_subset(switch.sigma)
        err = float(np.max(np.abs(est.xhat - x)))
        row = np.concatenate(
            [
                [t],
                x,
                y,
                a,
                zfull,
                [switch.sigma, r_act, thr_act, float(r_act > thr_act)],
                est.xhat,
                [
                    err,
                    est.bound,
                    float(est.in_transient),
                    float(sum(st.resets for st in states)),
                ],
            ]
        )
        trace.append(row)
        return switch, err

    switch, _ = record_sample(0.0, x, noise[0], switch)
    max_err = 0.0
    d1 = windows.delta1 if windows is not None else 0.0

    joint = np.concatenate([x] + [st.zhat for st in states])
    n = model.n

    def joint_rhs(tt, s, v):
        xx = s[:n]
        out = np.empty_like(s)
        out[:n] = model.f(xx) + model.g(xx) * model.input(tt)
        a_t = scn.attack_vector(tt, model.p)
        for i, oc in enumerate(bank):
            sl = slices[i]
            y_i = model.h[i](xx) + a_t[i] + v[i]
            out[n + sl.start : n + sl.stop] = observer_rhs(
                oc, model, s[n + sl.start : n + sl.stop], model.input(tt), y_i
            )
        return out

    for k in range(n_steps):
        t0, t1 = grid[k], grid[k + 1]
        v = noise[k]
        joint = rk4_step(lambda tt, s: joint_rhs(tt, s, v), joint, t0, t1 - t0)
        if not np.all(np.isfinite(joint)):
            raise IntegrationDivergedError(f"run diverged at t={t1:g}")
        x = joint[:n]
        if not box_warned and np.max(np.abs(x)) > model.M_x:
            warnings.warn(
                f"truth state left the admissible box at t={t1:g}; "
                "scenario may be invalid",
                stacklevel=2,
            )
            box_warned = True
        for i, oc in enumerate(bank):
            sl = slices[i]
            st = ObserverState(
                zhat=joint[n + sl.start : n + sl.stop],
                resets=states[i].resets,
                last_reset_time=states[i].last_reset_time,
            )
            st = apply_reset(oc, st, t1)
            states[i] = st
            joint[n + sl.start : n + sl.stop] = st.zhat
        switch, err = record_sample(t1, x.copy(), noise[k + 1], switch)
        if t1 >= d1:
            max_err = max(max_err, err)

    report.max_steady_state_error = max_err
    report.wall_clock_s = time.perf_counter() - t_start
    return trace, report


def export_csv(trace: SimulationTrace, path: str | Path) -> None:
    """Write the trace with exact column names and 17-significant-digit floats."""
    path = Path(path)
    int_idx = {i for i, c in enumerate(trace.columns) if c in INT_COLUMNS}
    with path.open("w", newline="") as fh:
        fh.write(",".join(trace.columns) + "\n")
        for row in trace.rows:
            fields = [
                str(int(v)) if i in int_idx else format(v, ".17g")
                for i, v in enumerate(row)
            ]
            fh.write(",".join(fields) + "\n")


def read_csv(path: str | Path) -> SimulationTrace:
    """Round-trip reader for exported traces."""
    lines = Path(path).read_text().strip().split("\n")
    columns = lines[0].split(",")
    trace = SimulationTrace(columns=columns)
    for line in lines[1:]:
        trace.append(np.array([float(v) for v in line.split(",")]))
    return trace
