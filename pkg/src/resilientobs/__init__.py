"""Sensor-attack detection and resilient state estimation toolkit."""

from . import benchmark as _benchmark  # registers the built-in model
from .benchmark import BENCHMARK_NAME, DEFAULT_THRESHOLD_COEFF, make_benchmark
from .detection import DetectionRecord, detect_global, detect_subset, residual, threshold
from .harness import RunReport, SimulationTrace, export_csv, read_csv, run
from .inversion import (
    LeftInverse,
    LipschitzEstimates,
    SubsetIndex,
    check_redundant_observability,
    estimate_lip_lower,
    estimate_lip_upper,
    left_inverse_for,
    psi_eval,
    saturate,
)
from .model import (
    PlantModel,
    get_model,
    integrate_step,
    measure,
    model_names,
    phi_eval,
    phi_jacobian,
    register_model,
)
from .observer import (
    EnvelopeParams,
    ObserverConfig,
    ObserverState,
    apply_reset,
    delta,
    envelope_constants,
    make_observer_config,
    solve_gain,
    step_observer,
)
from .scenario import (
    AttackScenario,
    AttackSignal,
    RunConfig,
    WindowConstants,
    attack_value,
    compute_windows,
    load_config,
    parse_config,
    validate_scenario,
)
from .switching import (
    Estimate,
    SubsetEnumeration,
    SwitchState,
    brute_force_violation,
    error_bound,
    estimate_state,
    sigma_update,
)

__version__ = "0.1.0"
