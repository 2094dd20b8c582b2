"""Attack signals, measurement noise, dwell-window constants, run configs.

A scenario declares which sensors are attacked when, the declared sparsity
q, and the noise bounds.  Scenario validity means that at every grid time at
least p-q sensors have been attack free for the trailing dwell window, whose
length is derived in closed form from the observer envelope constants.

Config files are JSON with top-level keys::

    model, horizon, dt, seed,
    observer: {theta, z0},
    attacks:  [{sensor, kind, interval, amplitude, period, times, values}],
    noise:    {bound, seed},
    detector: {coeff},
    estimator: {lambda_order}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, WindowsUndefinedError
from .observer import ObserverConfig

ATTACK_KINDS = ("zero", "square", "constant", "ramp", "custom-table")
DEFAULT_DELTA_MARGIN = 0.01


@dataclass(frozen=True)
class AttackSignal:
    """One per-sensor attack waveform; zero outside its interval."""

    sensor: int  # 1-based
    kind: str
    interval: tuple[float, float] = (0.0, 0.0)
    amplitude: float = 0.0
    period: float = 1.0
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ConfigError(f"unknown attack kind {self.kind!r}")
        if self.kind == "custom-table" and len(self.times) != len(self.values):
            raise ConfigError("custom-table needs matching times/values")


def attack_value(sig: AttackSignal, t: float) -> float:
    """Signal value at time t; exactly zero outside the active interval."""
    t_on, t_off = sig.interval
    if sig.kind == "zero" or t < t_on or t > t_off:
        return 0.0
    if sig.kind == "constant":
        return sig.amplitude
    if sig.kind == "ramp":
        return sig.amplitude * (t - t_on)
    if sig.kind == "square":
        phase = ((t - t_on) / sig.period) % 1.0
        return sig.amplitude if phase < 0.5 else -sig.amplitude
    # custom-table: zero-order hold over the listed breakpoints
    idx = np.searchsorted(np.asarray(sig.times), t, side="right") - 1
    if idx < 0:
        return 0.0
    return float(sig.values[idx])


@dataclass(frozen=True)
class AttackScenario:
    signals: tuple[AttackSignal, ...]
    q: int
    noise_bounds: tuple[float, ...]  # per-sensor M_v
    noise_seed: int

    def attack_vector(self, t: float, p: int) -> np.ndarray:
        a = np.zeros(p)
        for sig in self.signals:
            a[sig.sensor - 1] += attack_value(sig, t)
        return a

    def attacked_intervals(self, p: int) -> list[list[tuple[float, float]]]:
        """Per-sensor intervals on which the sensor may be nonzero."""
        out: list[list[tuple[float, float]]] = [[] for _ in range(p)]
        for sig in self.signals:
            if sig.kind == "zero" or (sig.amplitude == 0 and not sig.values):
                continue
            out[sig.sensor - 1].append(sig.interval)
        return out


@dataclass(frozen=True)
class WindowConstants:
    delta1: float
    delta2: float
    delta: float


def compute_windows(
    configs: list[ObserverConfig], margin: float = DEFAULT_DELTA_MARGIN
) -> WindowConstants:
    """Minimal dwell constants satisfying the re-convergence inequalities.

    For each sensor the two conditions invert to closed-form logarithms;
    the returned values are the maxima over sensors, and the full window is
    their sum plus a small margin.  Requires every noise floor eps_i > 0.
    """
    if any(c.eps <= 0 for c in configs):
        raise WindowsUndefinedError("eps_i = 0 for some sensor; no finite window")
    d1 = d2 = 0.0
    for c in configs:
        lead = max(2 * c.eta * c.M_z, c.eps) + 2 * c.M_z
        d1 = max(d1, (8 / c.theta) * math.log(lead * c.eta / c.eps))
        d2 = max(d2, (8 / c.theta) * math.log(2 * c.M_z * c.eta / c.eps))
    d1, d2 = max(d1, 0.0), max(d2, 0.0)
    return WindowConstants(delta1=d1, delta2=d2, delta=d1 + d2 + margin)


@dataclass(frozen=True)
class ScenarioValidation:
    passed: bool
    min_free: int
    required: int
    first_violation: float | None


def validate_scenario(
    scn: AttackScenario,
    windows: WindowConstants,
    grid: np.ndarray,
    p: int,
) -> ScenarioValidation:
    """Check that at least p - q sensors are attack free over the trailing
    dwell window at every grid time."""
    intervals = scn.attacked_intervals(p)
    required = p - scn.q
    min_free = p
    first_violation = None
    for t in np.asarray(grid, dtype=float):
        lo = max(t - windows.delta, 0.0)
        free = sum(
            1
            for i in range(p)
            if not any(on <= t and off >= lo for on, off in intervals[i])
        )
        if free < min_free:
            min_free = free
        if free < required and first_violation is None:
            first_violation = float(t)
    return ScenarioValidation(
        passed=min_free >= required,
        min_free=min_free,
        required=required,
        first_violation=first_violation,
    )


def noise_stream(scn: AttackScenario, n_samples: int) -> np.ndarray:
    """Deterministic per-sample noise matrix of shape (n_samples, p)."""
    rng = np.random.default_rng(scn.noise_seed)
    bounds = np.asarray(scn.noise_bounds)
    return rng.uniform(-1.0, 1.0, size=(n_samples, len(bounds))) * bounds


# --- run configuration ------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    model: str
    horizon: float
    dt: float
    seed: int
    theta: tuple[float, ...] | float
    z0: tuple[tuple[float, ...], ...] | None
    x0: tuple[float, ...] | None
    attacks: tuple[AttackSignal, ...]
    q: int
    noise_bound: tuple[float, ...] | float
    noise_seed: int | None
    detector_coeff: float
    lambda_order: tuple[tuple[int, ...], ...] | None
    raw: dict = field(default_factory=dict, compare=False)


def parse_config(data: dict) -> RunConfig:
    try:
        model = data["model"]
    except KeyError:
        raise ConfigError("config is missing required key 'model'") from None
    obs = data.get("observer", {})
    noise = data.get("noise", {})
    det = data.get("detector", {})
    est = data.get("estimator", {})
    attacks = tuple(_parse_attack(a) for a in data.get("attacks", []))
    z0 = obs.get("z0")
    if z0 is not None:
        z0 = tuple(tuple(float(v) for v in blk) for blk in z0)
    lam = est.get("lambda_order")
    if lam is not None:
        lam = tuple(tuple(int(i) for i in sub) for sub in lam)
    theta = obs.get("theta", 32.0)
    if isinstance(theta, (list, tuple)):
        theta = tuple(float(v) for v in theta)
    else:
        theta = float(theta)
    bound = noise.get("bound", 1e-6)
    if isinstance(bound, (list, tuple)):
        bound = tuple(float(v) for v in bound)
    else:
        bound = float(bound)
    x0 = data.get("x0")
    if x0 is not None:
        x0 = tuple(float(v) for v in x0)
    return RunConfig(
        model=model,
        horizon=float(data.get("horizon", 25.0)),
        dt=float(data.get("dt", 0.02)),
        seed=int(data.get("seed", 0)),
        theta=theta,
        z0=z0,
        x0=x0,
        attacks=attacks,
        q=int(data.get("q", 1)),
        noise_bound=bound,
        noise_seed=noise.get("seed"),
        detector_coeff=float(det.get("coeff", 5391.0)),
        lambda_order=lam,
        raw=data,
    )


def _parse_attack(a: dict) -> AttackSignal:
    try:
        return AttackSignal(
            sensor=int(a["sensor"]),
            kind=a.get("kind", "zero"),
            interval=tuple(float(v) for v in a.get("interval", (0.0, 0.0))),
            amplitude=float(a.get("amplitude", 0.0)),
            period=float(a.get("period", 1.0)),
            times=tuple(float(v) for v in a.get("times", ())),
            values=tuple(float(v) for v in a.get("values", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad attack entry {a!r}: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(data)
