"""Plant models: dynamics, sensor maps, observable-coordinate maps, integration.

A :class:`PlantModel` bundles the drift ``f``, input vector field ``g``, the
``p`` scalar sensor maps ``h[i]``, and the per-sensor observable-coordinate
maps ``phi[i]`` together with the box radii that bound the state and the
observable coordinates.  All registered callables are expected to be
vectorized over a leading batch axis (``x`` of shape ``(3,)`` or ``(N, 3)``).

Models are registered by name in a catalog; scenario configs select a model
by its catalog name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationDivergedError, InvalidSubsetError

FD_STEP = 1e-6


@dataclass(frozen=True)
class PlantModel:
    """Continuous-time plant with redundant scalar sensors.

    Attributes
    ----------
    n, p : state dimension and sensor count.
    f, g : drift and input vector field, each mapping states to states.
    h : list of p scalar output maps.
    input : reference input signal u(t).
    M_x : infinity-norm radius of the admissible state box.
    dims : per-sensor observable sub-dimensions (n_1, ..., n_p).
    phi : list of p observable-coordinate maps, phi[i]: R^n -> R^{dims[i]}.
    alpha : top-slot drift nonlinearity of each observable subsystem.
    beta : input coefficient map of each observable subsystem (triangular).
    M_z : per-sensor box radii bounding phi[i] over the state box.
    phi_jac : optional closed-form Jacobians of phi[i]; finite differences
        are used for sensors without one.
    inner_inverses : smooth inner left inverses keyed by sensor-index tuple
        (1-based, ascending), used to build Lipschitz-extended left inverses.
    """

    name: str
    n: int
    p: int
    f: Callable
    g: Callable
    h: list[Callable]
    input: Callable
    M_x: float
    dims: tuple[int, ...]
    phi: list[Callable]
    alpha: list[Callable]
    beta: list[Callable]
    M_z: tuple[float, ...]
    phi_jac: list[Callable | None] = field(default=None)
    inner_inverses: dict[tuple[int, ...], Callable] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.dims) != self.p:
            raise ValueError("dims must have one entry per sensor")

    @property
    def total_dim(self) -> int:
        return int(sum(self.dims))

    def block_slices(self) -> list[slice]:
        """Slices of each sensor's block in the stacked observable vector."""
        out, off = [], 0
        for ni in self.dims:
            out.append(slice(off, off + ni))
            off += ni
        return out

    def xdot(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.f(x) + self.g(x) * self.input(t)


# --- model catalog ----------------------------------------------------------

_CATALOG: dict[str, Callable[[], PlantModel]] = {}


def register_model(name: str, factory: Callable[[], PlantModel]) -> None:
    _CATALOG[name] = factory


def get_model(name: str) -> PlantModel:
    try:
        return _CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known: {sorted(_CATALOG)}") from None


def model_names() -> list[str]:
    return sorted(_CATALOG)


# --- operations -------------------------------------------------------------

def rk4_step(rhs: Callable, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of ``x' = rhs(t, x)``."""
    k1 = rhs(t, x)
    k2 = rhs(t + dt / 2, x + dt / 2 * k1)
    k3 = rhs(t + dt / 2, x + dt / 2 * k2)
    k4 = rhs(t + dt, x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_step(model: PlantModel, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    """Advance the true state over [t, t+dt] with RK4.

    The input u is evaluated at the RK4 stage times.  Raises
    :class:`IntegrationDivergedError` if the step produces non-finite values.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise IntegrationDivergedError("non-finite state on entry")
    out = rk4_step(model.xdot, x, t, dt)
    if not np.all(np.isfinite(out)):
        raise IntegrationDivergedError(f"state diverged at t={t + dt:g}")
    return out


def measure(model: PlantModel, x: np.ndarray, a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sensor outputs y_i = h_i(x) + a_i + v_i."""
    hx = np.array([hi(x) for hi in model.h], dtype=float)
    return hx + np.asarray(a, dtype=float) + np.asarray(v, dtype=float)


def check_subset(model: PlantModel, indices: Sequence[int]) -> tuple[int, ...]:
    """Validate a 1-based, strictly increasing sensor index set."""
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise InvalidSubsetError("empty sensor subset")
    if any(i < 1 or i > model.p for i in idx):
        raise InvalidSubsetError(f"subset {idx} out of range [1, {model.p}]")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise InvalidSubsetError(f"subset {idx} must be strictly increasing")
    return idx


def phi_eval(model: PlantModel, indices: Sequence[int], x: np.ndarray) -> np.ndarray:
    """Stacked observable coordinates of the selected sensors, in ascending
    sensor order.  ``x`` may carry a leading batch axis."""
    idx = check_subset(model, indices)
    blocks = [np.atleast_1d(np.asarray(model.phi[i - 1](x), dtype=float)) for i in idx]
    return np.concatenate(blocks, axis=-1)


def phi_jacobian(model: PlantModel, indices: Sequence[int], x: np.ndarray) -> np.ndarray:
    """Jacobian of the stacked observable map at ``x``.

    Uses registered closed forms where available, otherwise central finite
    differences with step ``FD_STEP``.  Batched input gives a batched stack
    of Jacobians.
    """
    idx = check_subset(model, indices)
    x = np.asarray(x, dtype=float)
    rows = []
    for i in idx:
        jac = model.phi_jac[i - 1] if model.phi_jac is not None else None
        if jac is not None:
            rows.append(np.asarray(jac(x), dtype=float))
        else:
            rows.append(_fd_jacobian(model.phi[i - 1], x, model.dims[i - 1]))
    return np.concatenate(rows, axis=-2)


def _fd_jacobian(fn: Callable, x: np.ndarray, m: int) -> np.ndarray:
    n = x.shape[-1]
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = FD_STEP
        df = (np.atleast_1d(fn(x + e)) - np.atleast_1d(fn(x - e))) / (2 * FD_STEP)
        cols.append(df)
    return np.stack(cols, axis=-1).reshape(x.shape[:-1] + (m, n))


def sample_state_box(model: PlantModel, count: int, seed: int = 0) -> np.ndarray:
    """Uniform samples from the admissible state box, shape (count, n)."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-model.M_x, model.M_x, size=(count, model.n))
