"""Per-sensor high-gain partial observers.

Each sensor gets an observer for its observable subsystem only.  The output
correction gain is ``P^{-1} C^T`` where P solves the stationary theta-scaled
Lyapunov-type equation ``0 = -theta P - A^T P - P A + C^T C`` for the shift
matrix A and first-coordinate row C.  The drift nonlinearities are evaluated
through a component-wise saturation at the observable box radius, so the
observer sees a globally Lipschitz extension of the plant maps.

A reset rule re-initializes an estimate whose norm leaves the certified
bound, which keeps compromised observers from diverging under unbounded
attack signals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalFailureError, ObserverDivergedError
from .model import PlantModel, rk4_step

# extreme eigenvalues of the theta=1 solution, cached per dimension
_PTILDE_EIGS: dict[int, tuple[float, float]] = {}


def shift_matrix(n: int) -> np.ndarray:
    """n x n matrix with ones on the first superdiagonal."""
    return np.eye(n, k=1)


def solve_gain_equation(n: int, theta: float) -> np.ndarray:
    """Positive definite P solving 0 = -theta P - A^T P - P A + C^T C.

    Closed recurrence: the (i, j) entry satisfies
    ``theta p_ij + p_{i-1,j} + p_{i,j-1} = delta_i1 delta_j1``.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    P = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            up = P[i - 1, j] if i > 0 else 0.0
            left = P[i, j - 1] if j > 0 else 0.0
            rhs = 1.0 if (i == 0 and j == 0) else 0.0
            P[i, j] = P[j, i] = (rhs - up - left) / theta
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise NumericalFailureError(
            f"gain equation solution not positive definite (n={n}, theta={theta})"
        ) from None
    return P


def solve_gain(n: int, theta: float) -> np.ndarray:
    """Observer correction gain P^{-1} C^T.

    Uses the binomial closed form for n <= 3 and the direct symmetric solve
    otherwise.  The closed form and the solve agree to roundoff.
    """
    if theta < 1:
        raise ValueError("theta must be >= 1")
    if n == 1:
        return np.array([theta])
    if n == 2:
        return np.array([2 * theta, theta**2])
    if n == 3:
        return np.array([3 * theta, 3 * theta**2, theta**3])
    P = solve_gain_equation(n, theta)
    e1 = np.zeros(n)
    e1[0] = 1.0
    return np.linalg.solve(P, e1)


def _ptilde_eigs(n: int) -> tuple[float, float]:
    if n not in _PTILDE_EIGS:
        if n == 1:
            _PTILDE_EIGS[n] = (1.0, 1.0)
        elif n == 2:
            # trace 3, det 1
            lam1 = (3 - math.sqrt(5)) / 2
            lam2 = (3 + math.sqrt(5)) / 2
            _PTILDE_EIGS[n] = (lam1, lam2)
        else:
            w = np.linalg.eigvalsh(solve_gain_equation(n, 1.0))
            _PTILDE_EIGS[n] = (float(w[0]), float(w[-1]))
    return _PTILDE_EIGS[n]


def envelope_constants(n: int, theta: float, M_v: float) -> tuple[float, float]:
    """Error-envelope constants (eta, eps) of the high-gain observer.

    eta scales the decaying transient term, eps is the noise floor:
    ``eta = sqrt(2 n lam2 / lam1) theta^(n-1)``,
    ``eps = 4 sqrt(2) M_v / lam1 * theta^(n-1)``,
    with lam1, lam2 the extreme eigenvalues of the theta = 1 solution of the
    gain equation.
    """
    if theta < 1:
        raise ValueError("theta must be >= 1")
    if M_v < 0:
        raise ValueError("noise bound must be >= 0")
    lam1, lam2 = _ptilde_eigs(n)
    scale = theta ** (n - 1)
    eta = math.sqrt(2 * n * lam2 / lam1) * scale
    eps = 4 * math.sqrt(2) * M_v / lam1 * scale
    return eta, eps


@dataclass(frozen=True)
class ObserverConfig:
    """Frozen per-sensor observer parameters (1-based sensor index)."""

    sensor: int
    n_i: int
    theta: float
    M_z: float
    M_v: float
    gain: np.ndarray
    eta: float
    eps: float
    reset_radius: float
    reset_target: np.ndarray

    @property
    def rate(self) -> float:
        return self.theta / 8.0


@dataclass(frozen=True)
class ObserverState:
    zhat: np.ndarray
    resets: int = 0
    last_reset_time: float | None = None


def make_observer_config(
    model: PlantModel,
    sensor: int,
    theta: float,
    M_v: float,
    reset_target: np.ndarray | None = None,
) -> ObserverConfig:
    n_i = model.dims[sensor - 1]
    M_z = model.M_z[sensor - 1]
    eta, eps = envelope_constants(n_i, theta, M_v)
    target = np.zeros(n_i) if reset_target is None else np.asarray(reset_target, float)
    if np.max(np.abs(target)) > M_z:
        raise ValueError("reset target must lie inside the observable box")
    return ObserverConfig(
        sensor=sensor,
        n_i=n_i,
        theta=theta,
        M_z=M_z,
        M_v=M_v,
        gain=solve_gain(n_i, theta),
        eta=eta,
        eps=eps,
        reset_radius=max(2 * eta * M_z, eps) + M_z,
        reset_target=target,
    )


def observer_rhs(
    cfg: ObserverConfig, model: PlantModel, zhat: np.ndarray, u: float, y: float
) -> np.ndarray:
    """Right-hand side of the partial observer ODE.

    Shift-structure drift with the saturated top-slot nonlinearity, the
    saturated triangular input map times u, and the output correction.
    """
    i = cfg.sensor - 1
    zsat = np.clip(zhat, -cfg.M_z, cfg.M_z)
    drift = np.empty(cfg.n_i)
    drift[:-1] = zhat[1:]
    drift[-1] = model.alpha[i](zsat)
    return drift + model.beta[i](zsat) * u - cfg.gain * (zhat[0] - y)


def step_observer(
    cfg: ObserverConfig,
    st: ObserverState,
    model: PlantModel,
    u,
    y,
    dt: float,
    t: float = 0.0,
) -> ObserverState:
    """Advance one observer by RK4 over [t, t+dt], then apply the reset rule.

    ``u`` and ``y`` may be scalars (held constant over the step) or callables
    of time, letting the caller supply stage-time values.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    ufn = u if callable(u) else (lambda tt: u)
    yfn = y if callable(y) else (lambda tt: y)

    def rhs(tt, z):
        return observer_rhs(cfg, model, z, ufn(tt), yfn(tt))

    zhat = rk4_step(rhs, st.zhat, t, dt)
    if not np.all(np.isfinite(zhat)):
        raise ObserverDivergedError(
            f"observer {cfg.sensor} diverged at t={t + dt:g}"
        )
    return apply_reset(cfg, replace(st, zhat=zhat), t + dt)


def apply_reset(cfg: ObserverConfig, st: ObserverState, t: float | None = None) -> ObserverState:
    """Reset the estimate when its norm strictly exceeds the certified radius."""
    if np.max(np.abs(st.zhat)) > cfg.reset_radius:
        return ObserverState(
            zhat=cfg.reset_target.copy(),
            resets=st.resets + 1,
            last_reset_time=t,
        )
    return st


@dataclass(frozen=True)
class EnvelopeParams:
    """Parameters of the bank-wide error envelope delta(t).

    gamma(t) = max_i gamma0[i] * exp(-rate[i] t) decays from the worst
    transient; eps_global is the noise floor.
    """

    gamma0: np.ndarray  # per-sensor 2 * M_z,i * eta_i
    rates: np.ndarray  # per-sensor theta_i / 8
    eps_global: float

    @classmethod
    def from_configs(cls, configs: list[ObserverConfig]) -> "EnvelopeParams":
        return cls(
            gamma0=np.array([2 * c.M_z * c.eta for c in configs]),
            rates=np.array([c.rate for c in configs]),
            eps_global=max(c.eps for c in configs),
        )

    @property
    def gamma_max(self) -> float:
        return float(np.max(self.gamma0))


def delta(env: EnvelopeParams, t: float) -> float:
    """Time-varying observer-error envelope max{gamma(t), eps}."""
    if t < 0:
        raise ValueError("t must be >= 0")
    gamma = float(np.max(env.gamma0 * np.exp(-env.rates * t)))
    return max(gamma, env.eps_global)
