"""Command-line interface.

Subcommands:
  run       simulate a scenario config, write CSV trace and JSON report
  audit     check k-redundant observability of a model
  gains     print per-sensor observer gains and envelope/window constants
  validate  check a scenario config against the dwell-window assumption
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import benchmark  # noqa: F401  (registers the built-in model)
from .errors import ResilientObsError
from .harness import build_bank, build_enumeration, export_csv, run
from .inversion import check_redundant_observability
from .model import get_model, model_names
from .observer import EnvelopeParams, delta
from .scenario import (
    AttackScenario,
    compute_windows,
    load_config,
    validate_scenario,
)


def _add_config_arg(p):
    p.add_argument("--config", required=True, help="path to JSON scenario config")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resilientobs",
        description="Sensor-attack detection and resilient state estimation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario")
    _add_config_arg(p_run)
    p_run.add_argument("--out", default="trace.csv", help="CSV output path")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument(
        "--force", action="store_true", help="run even if scenario validation fails"
    )

    p_audit = sub.add_parser("audit", help="redundant-observability audit")
    p_audit.add_argument("--k", type=int, required=True, help="redundancy degree")
    p_audit.add_argument(
        "--model", default="benchmark-siso-3state-4sensor", choices=model_names()
    )
    p_audit.add_argument("--json", dest="json_out", help="write report JSON here")

    p_gains = sub.add_parser("gains", help="print observer bank constants")
    _add_config_arg(p_gains)

    p_val = sub.add_parser("validate", help="validate a scenario config")
    _add_config_arg(p_val)

    return parser


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    trace, report = run(cfg, force=args.force)
    out = Path(args.out)
    export_csv(trace, out)
    report_path = out.with_suffix(".report.json")
    report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print(f"wrote {out} ({len(trace.rows)} rows) and {report_path}")
    for t, frm, to in report.switch_events:
        print(f"  switch at t={t:g}: {frm} -> {to}")
    if report.assumption_violations:
        print(f"  assumption violations at: {report.assumption_violations}")
    return 0


def cmd_audit(args) -> int:
    model = get_model(args.model)
    report = check_redundant_observability(model, args.k)
    print(f"redundancy audit: model={model.name} k={args.k}")
    print(f"{'subset':<14} {'sigma_min':>12} {'lip_lower':>12} {'status':>8}")
    for e in report.entries:
        status = "pass" if e.passed else "FAIL"
        print(
            f"{str(e.indices):<14} {e.sigma_min:>12.4e} {e.lip_lower:>12.4e} {status:>8}"
        )
        if e.witness is not None:
            print(f"    witness point: {e.witness}")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print("overall:", "pass" if report.passed else "FAIL")
    return 0 if report.passed else 1


def cmd_gains(args) -> int:
    cfg = load_config(args.config)
    model = get_model(cfg.model)
    bank = build_bank(model, cfg)
    env = EnvelopeParams.from_configs(bank)
    for oc in bank:
        print(
            f"sensor {oc.sensor}: n_i={oc.n_i} theta={oc.theta:g} "
            f"gain={np.array2string(oc.gain, precision=6)} "
            f"eta={oc.eta:.6g} eps={oc.eps:.6g} reset_radius={oc.reset_radius:.6g}"
        )
    print(f"delta(0) = {delta(env, 0.0):.6g}")
    try:
        w = compute_windows(bank)
        print(f"delta1 = {w.delta1:.6g}  delta2 = {w.delta2:.6g}  Delta = {w.delta:.6g}")
    except ResilientObsError as exc:
        print(f"windows undefined: {exc}")
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    model = get_model(cfg.model)
    bank = build_bank(model, cfg)
    build_enumeration(model, cfg)  # surface enumeration config errors early
    windows = compute_windows(bank)
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
    v = validate_scenario(scn, windows, grid, model.p)
    print(
        f"Delta = {windows.delta:.4g}; min attack-free sensors = {v.min_free} "
        f"(need {v.required})"
    )
    if v.passed:
        print("scenario: valid")
        return 0
    print(f"scenario: INVALID (first violation at t={v.first_violation:g})")
    return 1


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return {
            "run": cmd_run,
            "audit": cmd_audit,
            "gains": cmd_gains,
            "validate": cmd_validate,
        }[args.command](args)
    except ResilientObsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
