"""Built-in benchmark plant: 3 states, 1 input, 4 redundant sensors.

The observable decompositions were derived by hand from the sensor maps:
for sensors 1-3 the observable subsystem is two-dimensional with linear
top-slot drift ``alpha(z) = -2 z1 - 3 z2`` and constant input coefficients;
sensor 4 is one-dimensional with ``alpha(z) = -z1``.  The inner left
inverses of the four leave-one-out sensor subsets (and of the full stack)
are closed forms, recovering the state from sums of coordinate blocks.

All maps are vectorized over a leading batch axis.
"""

from __future__ import annotations

import numpy as np

from .model import PlantModel, register_model

BENCHMARK_NAME = "benchmark-siso-3state-4sensor"


def _f(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return np.stack(
        [
            -2 * x1 - x2**3,
            -x2,
            -x2 * np.cos(x2) + np.sin(x2) - x3,
        ],
        axis=-1,
    )


def _g(x):
    x2 = x[..., 1]
    return np.stack([1 + 3 * x2**2, np.ones_like(x2), np.cos(x2)], axis=-1)


def _u(t):
    return 0.25 * np.sin(0.2 * np.pi * t) - 0.1


def _h1(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return x1 + x2 - x2**3 - np.sin(x2) + x3


def _h2(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return x1 + np.sin(x2) - x2**3 - x3


def _h3(x):
    x1, x2 = x[..., 0], x[..., 1]
    return -x1 + x2**3 + x2


def _h4(x):
    x2, x3 = x[..., 1], x[..., 2]
    return -x2 - np.sin(x2) + x3


def _phi1(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return np.stack(
        [_h1(x), -2 * x1 + np.sin(x2) - x2 + 2 * x2**3 - x3], axis=-1
    )


def _phi2(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return np.stack(
        [_h2(x), -2 * x1 - np.sin(x2) + 2 * x2**3 + x3], axis=-1
    )


def _phi3(x):
    x1, x2 = x[..., 0], x[..., 1]
    return np.stack([_h3(x), 2 * x1 - x2 - 2 * x2**3], axis=-1)


def _phi4(x):
    return _h4(x)[..., np.newaxis]


def _jac_rows(x, rows):
    # rows: list of 3 callables per row -> stacked (..., m, 3)
    out = np.stack(
        [np.stack([c(x) for c in row], axis=-1) for row in rows], axis=-2
    )
    return out


def _jac_phi1(x):
    x2 = x[..., 1]
    one = np.ones_like(x2)
    return _jac_rows(
        x,
        [
            [lambda x: one, lambda x: 1 - 3 * x2**2 - np.cos(x2), lambda x: one],
            [lambda x: -2 * one, lambda x: np.cos(x2) - 1 + 6 * x2**2, lambda x: -one],
        ],
    )


def _jac_phi2(x):
    x2 = x[..., 1]
    one = np.ones_like(x2)
    return _jac_rows(
        x,
        [
            [lambda x: one, lambda x: np.cos(x2) - 3 * x2**2, lambda x: -one],
            [lambda x: -2 * one, lambda x: -np.cos(x2) + 6 * x2**2, lambda x: one],
        ],
    )


def _jac_phi3(x):
    x2 = x[..., 1]
    one = np.ones_like(x2)
    zero = np.zeros_like(x2)
    return _jac_rows(
        x,
        [
            [lambda x: -one, lambda x: 1 + 3 * x2**2, lambda x: zero],
            [lambda x: 2 * one, lambda x: -1 - 6 * x2**2, lambda x: zero],
        ],
    )


def _jac_phi4(x):
    x2 = x[..., 1]
    one = np.ones_like(x2)
    zero = np.zeros_like(x2)
    return _jac_rows(x, [[lambda x: zero, lambda x: -1 - np.cos(x2), lambda x: one]])


# observable-subsystem drift/input maps (saturation extension is applied by
# the observer, not here)

def _alpha_2d(z):
    return -2 * z[..., 0] - 3 * z[..., 1]


def _alpha_1d(z):
    return -z[..., 0]


def _const_beta(vals):
    arr = np.array(vals, dtype=float)

    def beta(z):
        return np.broadcast_to(arr, z.shape[:-1] + arr.shape).copy()

    return beta


# inner left inverses (1-based subset keys; z blocks concatenated in
# ascending sensor order)

def _inv_234(z):
    # blocks: phi2 (z0,z1), phi3 (z2,z3), phi4 (z4)
    w = 2 * z[..., 2] + z[..., 3]
    return np.stack(
        [
            z[..., 2] + z[..., 3] + w**3,
            w,
            -2 * z[..., 0] - z[..., 1] + np.sin(w),
        ],
        axis=-1,
    )


def _inv_134(z):
    # blocks: phi1 (z0,z1), phi3 (z2,z3), phi4 (z4)
    w = 2 * z[..., 2] + z[..., 3]
    return np.stack(
        [
            -z[..., 0] - z[..., 1] + w**3,
            w,
            0.5 * (2 * z[..., 0] + z[..., 1] + z[..., 4]) + np.sin(w),
        ],
        axis=-1,
    )


def _inv_124(z):
    # blocks: phi1 (z0,z1), phi2 (z2,z3), phi4 (z4); w = -x2
    w = 2 * z[..., 2] + z[..., 3] + z[..., 4]
    return np.stack(
        [
            -z[..., 0] - z[..., 1] - w**3,
            -w,
            -2 * z[..., 2] - z[..., 3] - np.sin(w),
        ],
        axis=-1,
    )


def _inv_123(z):
    # blocks: phi1 (z0,z1), phi2 (z2,z3), phi3 (z4,z5)
    w = 2 * z[..., 4] + z[..., 5]
    return np.stack(
        [
            -z[..., 0] - z[..., 1] + w**3,
            w,
            -2 * z[..., 2] - z[..., 3] + np.sin(w),
        ],
        axis=-1,
    )


def _inv_full(z):
    # full stack: reuse the {1,2,3} inverse; block 4 (z6) is redundant
    return _inv_123(z[..., :6])


def make_benchmark() -> PlantModel:
    return PlantModel(
        name=BENCHMARK_NAME,
        n=3,
        p=4,
        f=_f,
        g=_g,
        h=[_h1, _h2, _h3, _h4],
        input=_u,
        M_x=0.5,
        dims=(2, 2, 2, 1),
        phi=[_phi1, _phi2, _phi3, _phi4],
        alpha=[_alpha_2d, _alpha_2d, _alpha_2d, _alpha_1d],
        beta=[
            _const_beta([2.0, -3.0]),
            _const_beta([1.0, -2.0]),
            _const_beta([0.0, 1.0]),
            _const_beta([-1.0]),
        ],
        M_z=(2.0, 2.0, 2.0, 2.0),
        phi_jac=[_jac_phi1, _jac_phi2, _jac_phi3, _jac_phi4],
        inner_inverses={
            (2, 3, 4): _inv_234,
            (1, 3, 4): _inv_134,
            (1, 2, 4): _inv_124,
            (1, 2, 3): _inv_123,
            (1, 2, 3, 4): _inv_full,
        },
    )


register_model(BENCHMARK_NAME, make_benchmark)

# certified Lipschitz bounds used for threshold construction (sampled
# estimates are diagnostics only and are lower bounds of the true constants)
CERTIFIED_LIP_PHI = 7.0
CERTIFIED_LIP_INNER_INV = 770.0
DEFAULT_THRESHOLD_COEFF = 1.0 + CERTIFIED_LIP_PHI * CERTIFIED_LIP_INNER_INV  # 5391
