"""Shared fixtures: the built-in benchmark, its observer bank, and cached runs."""

from pathlib import Path

import numpy as np
import pytest

from resilientobs.harness import build_bank, lip_estimates, run
from resilientobs.inversion import left_inverse_for
from resilientobs.model import get_model
from resilientobs.observer import EnvelopeParams
from resilientobs.scenario import AttackSignal, RunConfig, compute_windows, load_config
from resilientobs.switching import SubsetEnumeration

BENCHMARK = "benchmark-siso-3state-4sensor"
CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def make_config(**overrides) -> RunConfig:
    base = dict(
        model=BENCHMARK,
        horizon=25.0,
        dt=0.02,
        seed=0,
        theta=32.0,
        z0=None,
        x0=(0.05, 0.05, 0.05),
        attacks=(),
        q=1,
        noise_bound=1e-6,
        noise_seed=None,
        detector_coeff=5391.0,
        lambda_order=None,
    )
    base.update(overrides)
    return RunConfig(**base)


@pytest.fixture(scope="session")
def model():
    return get_model(BENCHMARK)


@pytest.fixture(scope="session")
def bank(model):
    return build_bank(model, make_config())


@pytest.fixture(scope="session")
def env(bank):
    return EnvelopeParams.from_configs(bank)


@pytest.fixture(scope="session")
def enum():
    return SubsetEnumeration.leave_one_out(4)


@pytest.fixture(scope="session")
def inverses(model, enum):
    return {sub: left_inverse_for(model, sub) for sub in enum.subsets}


@pytest.fixture(scope="session")
def windows(bank):
    return compute_windows(bank)


@pytest.fixture(scope="session")
def lip(model):
    return lip_estimates(model, 1, 5391.0)


@pytest.fixture(scope="session")
def attack_run():
    cfg = load_config(CONFIG_DIR / "benchmark_attack.json")
    return run(cfg)


@pytest.fixture(scope="session")
def clean_run():
    cfg = load_config(CONFIG_DIR / "benchmark_clean.json")
    return run(cfg)


@pytest.fixture(scope="session")
def random_scenario(windows):
    """Factory for randomized dwell-compliant attack scenarios.

    Attacks hit the two-dimensional sensors (1-3) at amplitudes that are
    reliably detectable at the default threshold; consecutive attacks are
    separated by more than the dwell window Delta.
    """

    def _make(rng: np.random.Generator, horizon: float = 25.0) -> RunConfig:
        n_attacks = int(rng.integers(1, 3))
        attacks = []
        t = float(rng.uniform(3.0, 6.0))
        for _ in range(n_attacks):
            duration = float(rng.uniform(1.0, 2.0))
            attacks.append(
                AttackSignal(
                    sensor=int(rng.integers(1, 4)),
                    kind=str(rng.choice(["square", "constant"])),
                    interval=(t, t + duration),
                    amplitude=float(rng.uniform(0.4, 0.8)),
                    period=0.5,
                )
            )
            t = t + duration + windows.delta + 0.1 + float(rng.uniform(0.0, 1.0))
        return make_config(
            attacks=tuple(attacks),
            x0=tuple(rng.uniform(-0.1, 0.1, size=3)),
            seed=int(rng.integers(0, 2**31)),
            noise_seed=int(rng.integers(0, 2**31)),
            horizon=horizon,
        )

    return _make


def zhat_blocks(model, trace, row):
    """Per-sensor observer blocks from one trace row."""
    Z = np.array(
        [trace.column(f"zhat{i}")[row] for i in range(1, model.total_dim + 1)]
    )
    return [Z[sl] for sl in model.block_slices()]
