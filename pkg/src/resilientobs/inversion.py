"""Subset projections, Lipschitz-extended left inverses, redundancy audit.

The left inverse of a sensor-subset observability map is extended from the
image to the whole coordinate space by a double saturation: the inner clamp
confines evaluation to the observable box (where the smooth inner inverse is
valid), the outer clamp maps the result into the state box.

Lipschitz constants are *estimated* by sampling; sampled maxima are lower
bounds of the true upper constant and sampled minima are upper bounds of the
true lower constant, so certified (config-supplied) values are used for
detector thresholds while the sampled figures serve as diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import UnsupportedSubsetError
from .model import PlantModel, check_subset, phi_eval, phi_jacobian

DEGENERATE_TOL = 1e-6
RANK_TOL = 1e-6


@dataclass(frozen=True)
class SubsetIndex:
    """Ordered sensor-index set with its block dimensions."""

    indices: tuple[int, ...]
    dims: tuple[int, ...]

    @classmethod
    def make(cls, model: PlantModel, indices: Sequence[int]) -> "SubsetIndex":
        idx = check_subset(model, indices)
        return cls(indices=idx, dims=tuple(model.dims[i - 1] for i in idx))

    @property
    def total(self) -> int:
        return int(sum(self.dims))


def saturate(w: np.ndarray, M: float) -> np.ndarray:
    """Component-wise clamp to [-M, M]."""
    if M <= 0:
        raise ValueError("saturation radius must be positive")
    return np.clip(np.asarray(w, dtype=float), -M, M)


@dataclass(frozen=True)
class LeftInverse:
    """Lipschitz-extended left inverse of a subset observability map."""

    subset: SubsetIndex
    inner: Callable
    M_z: float
    M_x: float


def left_inverse_for(model: PlantModel, indices: Sequence[int]) -> LeftInverse:
    """Look up the registered inner inverse for a subset of this model."""
    sub = SubsetIndex.make(model, indices)
    inner = model.inner_inverses.get(sub.indices)
    if inner is None:
        raise UnsupportedSubsetError(
            f"model {model.name!r} registers no inner inverse for {sub.indices}"
        )
    return LeftInverse(
        subset=sub, inner=inner, M_z=max(model.M_z), M_x=model.M_x
    )


def psi_eval(inv: LeftInverse, zI: np.ndarray) -> np.ndarray:
    """sat(inner(sat(zI, M_z)), M_x); the result always lies in the state box."""
    return saturate(inv.inner(saturate(zI, inv.M_z)), inv.M_x)


# --- sampled Lipschitz estimation -------------------------------------------

def _pair_set(dim: int, radius: float, samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Latin-hypercube pair set plus short coordinate-axis displacements."""
    rng = np.random.default_rng(seed)
    eng = qmc.LatinHypercube(d=dim, seed=rng)
    a = (eng.random(samples) * 2 - 1) * radius
    b = (eng.random(samples) * 2 - 1) * radius
    # axis-aligned difference quotients around the first points
    h = 1e-4 * radius
    axes = np.repeat(np.eye(dim)[None, :, :], samples, axis=0) * h
    base = np.repeat(a[:, None, :], dim, axis=1)
    a2 = np.clip(base + axes, -radius, radius).reshape(-1, dim)
    b2 = np.clip(base - axes, -radius, radius).reshape(-1, dim)
    return np.concatenate([a, a2]), np.concatenate([b, b2])


def estimate_lip_upper(
    fn: Callable,
    dim: int,
    radius: float,
    samples: int = 2000,
    seed: int = 0,
) -> float:
    """Sampled lower estimate of the infinity-norm Lipschitz upper constant
    of ``fn`` on the centered box of the given radius."""
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    x1, x2 = _pair_set(dim, radius, samples, seed)
    num = np.max(np.abs(np.atleast_2d(fn(x1)) - np.atleast_2d(fn(x2))), axis=-1)
    den = np.max(np.abs(x1 - x2), axis=-1)
    mask = den > 0
    return float(np.max(num[mask] / den[mask]))


def estimate_lip_lower(
    model: PlantModel,
    indices: Sequence[int],
    samples: int = 2000,
    seed: int = 0,
) -> float:
    """Sampled upper estimate of the lower (bi-Lipschitz) constant of the
    subset observability map on the state box.  A value at or below
    ``DEGENERATE_TOL`` is numerical evidence of an injectivity failure."""
    sub = SubsetIndex.make(model, indices)
    x1, x2 = _pair_set(model.n, model.M_x, samples, seed)
    z1 = phi_eval(model, sub.indices, x1)
    z2 = phi_eval(model, sub.indices, x2)
    num = np.max(np.abs(z1 - z2), axis=-1)
    den = np.max(np.abs(x1 - x2), axis=-1)
    mask = den > 0
    return float(np.min(num[mask] / den[mask]))


@dataclass(frozen=True)
class LipschitzEstimates:
    """Certified (config) and sampled Lipschitz figures for one model."""

    lip_upper_phi: float
    lip_upper_psi: float
    lip_lower: dict[tuple[int, ...], float] = field(default_factory=dict)
    threshold_coeff: float = 1.0

    @property
    def lip_lower_min(self) -> float:
        return min(self.lip_lower.values())

    @classmethod
    def sample(
        cls,
        model: PlantModel,
        subset_size: int,
        threshold_coeff: float,
        lip_upper_psi: float,
        samples: int = 2000,
        seed: int = 0,
    ) -> "LipschitzEstimates":
        """Sampled diagnostics with config-certified threshold data."""
        upper = estimate_lip_upper(
            lambda x: phi_eval(model, range(1, model.p + 1), x),
            model.n,
            model.M_x,
            samples=samples,
            seed=seed,
        )
        lower = {
            J: estimate_lip_lower(model, J, samples=samples, seed=seed)
            for J in combinations(range(1, model.p + 1), subset_size)
        }
        return cls(
            lip_upper_phi=upper,
            lip_upper_psi=lip_upper_psi,
            lip_lower=lower,
            threshold_coeff=threshold_coeff,
        )


# --- redundancy audit -------------------------------------------------------

@dataclass(frozen=True)
class SubsetAudit:
    indices: tuple[int, ...]
    sigma_min: float
    lip_lower: float
    passed: bool
    witness: tuple[float, ...] | None  # grid point of minimal singular value


@dataclass(frozen=True)
class RedundancyReport:
    k: int
    entries: list[SubsetAudit]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "passed": self.passed,
            "subsets": [
                {
                    "indices": list(e.indices),
                    "sigma_min": e.sigma_min,
                    "lip_lower": e.lip_lower,
                    "passed": e.passed,
                    "witness": list(e.witness) if e.witness is not None else None,
                }
                for e in self.entries
            ],
        }


def _grid_points(model: PlantModel, per_axis: int) -> np.ndarray:
    axes = [np.linspace(-model.M_x, model.M_x, per_axis)] * model.n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def check_redundant_observability(
    model: PlantModel,
    k: int,
    grid_per_axis: int = 21,
    samples: int = 2000,
    seed: int = 0,
) -> RedundancyReport:
    """Audit k-redundant observability numerically.

    For every subset of size p-k the stacked Jacobian must have full column
    rank (smallest singular value above ``RANK_TOL``) across a regular grid
    on the state box, and the sampled lower Lipschitz estimate must be
    positive.  Failures are reported with a witness point, not raised.
    """
    if not 0 <= k < model.p:
        raise ValueError("need 0 <= k < p")
    pts = _grid_points(model, grid_per_axis)
    entries = []
    for I in combinations(range(1, model.p + 1), model.p - k):
        jac = phi_jacobian(model, I, pts)  # (G, m, n)
        if jac.shape[-2] < model.n:
            # fewer stacked rows than states: column rank n is impossible
            at, sigma_min = 0, 0.0
        else:
            svals = np.linalg.svd(jac, compute_uv=False)
            smin_per_pt = svals[:, -1]
            at = int(np.argmin(smin_per_pt))
            sigma_min = float(smin_per_pt[at])
        lo = estimate_lip_lower(model, I, samples=samples, seed=seed)
        ok = sigma_min > RANK_TOL and lo > DEGENERATE_TOL
        entries.append(
            SubsetAudit(
                indices=I,
                sigma_min=sigma_min,
                lip_lower=lo,
                passed=ok,
                witness=None if ok else tuple(float(v) for v in pts[at]),
            )
        )
    return RedundancyReport(k=k, entries=entries)
