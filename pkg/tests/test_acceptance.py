"""Acceptance gate: the ten headline checks, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines on stdout.
"""

import time

import numpy as np

from conftest import make_config, zhat_blocks

from resilientobs.detection import residual as det_residual
from resilientobs.harness import run
from resilientobs.inversion import check_redundant_observability, psi_eval
from resilientobs.model import phi_eval, sample_state_box
from resilientobs.observer import delta, envelope_constants, solve_gain
from resilientobs.switching import brute_force_violation
from test_observer import lyapunov_oracle_gain


def _verdict(num, ok, detail):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_envelope_constants(bank, env):
    eta, eps = envelope_constants(2, 32.0, 1e-6)
    gamma0 = env.gamma_max
    eps_ok = abs(eps - 4.74e-4) / 4.74e-4 <= 0.01
    gamma_ok = abs(gamma0 - 671.0) / 671.0 <= 0.01
    rate_ok = all(c.rate == 4.0 for c in bank)
    _verdict(
        1,
        eps_ok and gamma_ok and rate_ok,
        f"eps={eps:.4g} (ref 4.74e-4), gamma0={gamma0:.4g} (ref 671), "
        f"decay exponent 4 {'exact' if rate_ok else 'WRONG'}",
    )


def test_criterion_02_window_constants(bank, windows):
    total = windows.delta1 + windows.delta2
    worst = -np.inf
    for c in bank:
        lead = max(2 * c.eta * c.M_z, c.eps) + 2 * c.M_z
        r1 = lead * c.eta * np.exp(-c.theta * windows.delta1 / 8) - c.eps
        r2 = 2 * c.M_z * c.eta * np.exp(-c.theta * windows.delta2 / 8) - c.eps
        worst = max(worst, r1, r2)
    ok = total <= 8.37 and worst <= 1e-12
    _verdict(
        2, ok, f"delta1+delta2={total:.4f} (<= 8.37), worst residual {worst:.2e}"
    )


def test_criterion_03_gain_closed_form():
    worst = 0.0
    for theta in np.linspace(1.0, 64.0, 10):
        got = solve_gain(2, theta)
        ref = lyapunov_oracle_gain(2, theta)
        closed = np.array([2 * theta, theta**2])
        worst = max(
            worst,
            float(np.max(np.abs(got - ref) / np.abs(ref))),
            float(np.max(np.abs(got - closed) / closed)),
        )
    _verdict(3, worst <= 1e-9, f"max relative error vs oracle {worst:.2e}")


def test_criterion_04_redundancy_audit(model):
    t0 = time.perf_counter()
    report = check_redundant_observability(model, 2)
    elapsed = time.perf_counter() - t0
    sig = min(e.sigma_min for e in report.entries)
    lip = min(e.lip_lower for e in report.entries)
    ok = (
        report.passed
        and len(report.entries) == 6
        and sig > 1e-6
        and lip > 1e-3
        and elapsed < 60.0
    )
    _verdict(
        4,
        ok,
        f"6 subsets, min sigma {sig:.2e}, min lower-Lip {lip:.2e}, {elapsed:.1f}s",
    )


def test_criterion_05_left_inverse_identity(model, inverses):
    xs = sample_state_box(model, 10_000, seed=13)
    worst = 0.0
    for sub in ((2, 3, 4), (1, 3, 4), (1, 2, 4), (1, 2, 3)):
        z = phi_eval(model, sub, xs)
        back = psi_eval(inverses[sub], z)
        worst = max(worst, float(np.max(np.abs(back - xs))))
    _verdict(5, worst <= 1e-9, f"max identity error {worst:.2e} over 1e4 points x 4")


def test_criterion_06_switching_reproduction(attack_run):
    trace, report = attack_run
    events = [(t, a, b) for t, a, b in report.switch_events]
    ok = (
        len(events) == 2
        and events[0][1:] == (1, 3)
        and abs(events[0][0] - 6.0) <= 5 * 0.02
        and events[1][1:] == (3, 2)
        and abs(events[1][0] - 17.0) <= 5 * 0.02
        and report.wall_clock_s < 10.0
    )
    _verdict(
        6,
        ok,
        f"events {[(round(t, 2), a, b) for t, a, b in events]}, "
        f"wall clock {report.wall_clock_s:.2f}s",
    )


def test_criterion_07_resilience_property(random_scenario):
    rng = np.random.default_rng(777)
    bound_violations = 0
    worst_emp = 0.0
    for _ in range(20):
        trace, _ = run(random_scenario(rng))
        t = trace.column("t")
        err = trace.column("err_inf")
        bound = trace.column("err_bound")
        trans = trace.column("in_transient").astype(bool)
        bound_violations += int(np.sum(err[~trans] > bound[~trans]))
        excl = np.zeros(len(t), dtype=bool)
        for i in np.where(trans)[0]:
            excl[max(0, i - 2) : i + 3] = True
        mask = (t >= 1.0) & ~excl
        worst_emp = max(worst_emp, float(np.max(err[mask])))
    ok = bound_violations == 0 and worst_emp <= 0.05
    _verdict(
        7,
        ok,
        f"20 scenarios: {bound_violations} bound violations, "
        f"empirical envelope {worst_emp:.2e} (<= 0.05)",
    )


def test_criterion_08_detector_soundness(model, windows):
    rng = np.random.default_rng(888)
    fires = 0
    for _ in range(50):
        z0 = tuple(tuple(rng.uniform(-2, 2, size=ni)) for ni in model.dims)
        cfg = make_config(
            horizon=6.0,
            x0=tuple(rng.uniform(-0.1, 0.1, size=3)),
            z0=z0,
            seed=int(rng.integers(0, 2**31)),
            noise_seed=int(rng.integers(0, 2**31)),
        )
        trace, _ = run(cfg)
        t = trace.column("t")
        fires += int(np.sum(trace.column("fired")[t >= windows.delta1]))
    _verdict(8, fires == 0, f"50 attack-free runs: {fires} fires after t=delta1")


def test_criterion_09_observer_error_envelope(model, bank):
    rng = np.random.default_rng(999)
    slices = model.block_slices()
    worst_ratio = 0.0
    for _ in range(20):
        z0 = tuple(tuple(rng.uniform(-2, 2, size=ni)) for ni in model.dims)
        cfg = make_config(
            horizon=5.0,
            x0=tuple(rng.uniform(-0.1, 0.1, size=3)),
            z0=z0,
            seed=int(rng.integers(0, 2**31)),
            noise_seed=int(rng.integers(0, 2**31)),
        )
        trace, _ = run(cfg)
        t = trace.column("t")
        X = np.stack([trace.column(f"x{i}") for i in range(1, 4)], axis=-1)
        Z = np.stack(
            [trace.column(f"zhat{i}") for i in range(1, model.total_dim + 1)],
            axis=-1,
        )
        for i, oc in enumerate(bank):
            ztrue = phi_eval(model, [i + 1], X)
            e = np.max(np.abs(Z[:, slices[i]] - ztrue), axis=-1)
            envelope = np.maximum(oc.eta * e[0] * np.exp(-oc.rate * t), oc.eps)
            worst_ratio = max(worst_ratio, float(np.max(e / envelope)))
    _verdict(
        9,
        worst_ratio <= 1.0,
        f"20 runs x 4 observers: worst error/envelope ratio {worst_ratio:.3f}",
    )


def test_criterion_10_brute_force_equivalence(
    model, env, enum, inverses, attack_run, clean_run
):
    from resilientobs.scenario import AttackSignal

    forced = make_config(
        attacks=(
            AttackSignal(sensor=2, kind="square", interval=(5.0, 7.0),
                         amplitude=0.5, period=0.5),
            AttackSignal(sensor=3, kind="square", interval=(5.0, 7.0),
                         amplitude=0.5, period=0.5),
        ),
        horizon=10.0,
    )
    cases = [attack_run, clean_run, run(forced, force=True)]
    mismatches = 0
    samples = 0
    for trace, report in cases:
        flagged = {round(float(t), 10) for t in report.assumption_violations}
        tcol = trace.column("t")
        for row, t in enumerate(tcol):
            blocks = zhat_blocks(model, trace, row)
            thr = 5391.0 * delta(env, float(t))

            def fires(sigma):
                sub = enum.subset(sigma)
                zI = np.concatenate([blocks[i - 1] for i in sub])
                return det_residual(model, inverses[sub], zI) > thr

            ref = brute_force_violation(fires, len(enum))
            if ref != (round(float(t), 10) in flagged):
                mismatches += 1
            samples += 1
    _verdict(
        10, mismatches == 0, f"{mismatches} mismatches over {samples} samples"
    )
