"""Acceptance gate: every criterion at its stated tolerance and runtime budget.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.
"""

import math
import time

import numpy as np
import pytest

from influence import (
    AnalyticAccel,
    ScenarioConfig,
    cli,
    coarse_grain,
    constant_rates,
    derive_rng,
    dynamic_state,
    emergent_state,
    evolve_ode,
    lorentz_boost,
    quantify_interval,
    receive_left,
    receive_right,
    simulate_accelerated,
)
from influence.simulation import (
    oracle_backward_project,
    oracle_leq,
    oracle_project,
    random_poset,
)

from conftest import make_five_step_poset


def report(number: int, name: str, passed: bool, elapsed: float, budget: float, detail: str):
    status = "PASS" if passed and elapsed < budget else "FAIL"
    print(f"ACCEPTANCE {number:2d} {name}: {status} ({elapsed:.2f}s / budget {budget:.0f}s) {detail}")
    assert passed, f"criterion {number} ({name}): {detail}"
    assert elapsed < budget, f"criterion {number} ({name}) exceeded budget: {elapsed:.2f}s"


def test_01_mass_shell_identity():
    trials = 100_000
    rng = derive_rng(1001)
    n = rng.integers(1, 1_000_000, size=trials)
    dp = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    dq = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(trials):
        s = emergent_state(int(n[i]), float(dp[i]), float(dq[i]))
        err = abs(s.energy**2 - s.momentum**2 - s.mass**2) / s.mass**2
        if err > worst:
            worst = err
    elapsed = time.perf_counter() - t0
    report(1, "mass-shell identity", worst <= 1e-12, elapsed, 1.0,
           f"worst |E^2-P^2-M^2|/M^2 = {worst:.2e} over {trials} draws")


def test_02_minkowski_emergence():
    trials = 100_000
    rng = derive_rng(1002)
    dp = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    dq = np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=trials))
    sign = rng.integers(0, 2, size=trials) * 2 - 1
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(trials):
        q = quantify_interval(float(dp[i]), float(sign[i] * dq[i]))
        err = abs(q.dt**2 - q.dx**2 - q.ds2) / abs(q.ds2)
        if err > worst:
            worst = err
    elapsed = time.perf_counter() - t0
    report(2, "Minkowski emergence", worst <= 1e-12, elapsed, 1.0,
           f"worst |dt^2-dx^2-dp*dq|/|dp*dq| = {worst:.2e} over {trials} draws")


def test_03_receipt_invariance():
    steps = 1_000_000
    state = dynamic_state(1.0, 1.0, 1.0)
    target = state.dp * state.dq
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(steps // 2):
        state = receive_right(state)
        state = receive_left(state)
        if i % 8192 == 0:
            drift = abs(state.dp * state.dq / target - 1.0)
            if drift > worst:
                worst = drift
    worst = max(worst, abs(state.dp * state.dq / target - 1.0))
    elapsed = time.perf_counter() - t0
    report(3, "receipt invariance", worst <= 1e-9, elapsed, 1.0,
           f"relative drift of dp*dq = {worst:.2e} over {steps} receipts")


def test_04_constant_acceleration_law():
    config = ScenarioConfig(
        kind="accelerated", r=0.01, phi0=0.0, n_events=100_000, window=1000, seed=42
    )
    t0 = time.perf_counter()
    path = simulate_accelerated(config)
    measured = coarse_grain(path, config.window)
    residual = float(np.abs(measured.residuals()).max())
    fit = measured.fit_rapidity()
    elapsed = time.perf_counter() - t0
    slope_err = abs(fit.slope / 0.01 - 1.0)
    report(4, "constant-acceleration law", residual <= 0.02 and slope_err <= 0.05,
           elapsed, 30.0,
           f"max |beta residual| = {residual:.4f} (<=0.02), "
           f"slope = {fit.slope:.6f} ({slope_err * 100:.2f}% from 0.01)")


def _newton_trajectory():
    r = 0.05
    accel = AnalyticAccel(rate=r, rapidity0=0.0)
    return r, evolve_ode(accel.state(1.0), constant_rates(r), 9.0, 1e-3)


def test_05_newtons_second_law():
    t0 = time.perf_counter()
    r, traj = _newton_trajectory()
    dP = (traj.momentum[2:] - traj.momentum[:-2]) / (2 * traj.dtau)
    expected = traj.mass * traj.gamma[1:-1] * r
    worst = float(np.max(np.abs(dP / expected - 1.0)))
    elapsed = time.perf_counter() - t0
    report(5, "relativistic second law", worst <= 1e-6, elapsed, 5.0,
           f"worst |dP/dtau / (M gamma r) - 1| = {worst:.2e} at {len(dP)} interior samples")


def test_06_power_law():
    t0 = time.perf_counter()
    r, traj = _newton_trajectory()
    dE = (traj.energy[2:] - traj.energy[:-2]) / (2 * traj.dtau)
    expected = traj.force[1:-1] * traj.beta[1:-1]
    worst = float(np.max(np.abs(dE / expected - 1.0)))
    elapsed = time.perf_counter() - t0
    report(6, "relativistic power", worst <= 1e-6, elapsed, 5.0,
           f"worst |dE/dtau / (F beta) - 1| = {worst:.2e} at {len(dE)} interior samples")


def test_07_ode_convergence():
    accel = AnalyticAccel(rate=0.3, rapidity0=0.2)
    t0 = time.perf_counter()
    errors = []
    for dtau in (0.04, 0.02, 0.01):
        traj = evolve_ode(accel.state(1.0), constant_rates(0.3), 4.0, dtau)
        dp_exact, dq_exact = accel.deltas(traj.tau[-1])
        errors.append(
            max(abs(traj.dp[-1] - dp_exact) / dp_exact, abs(traj.dq[-1] - dq_exact) / dq_exact)
        )
    ratios = [errors[0] / errors[1], errors[1] / errors[2]]
    elapsed = time.perf_counter() - t0
    ok = all(16 * 0.8 <= r <= 16 * 1.2 for r in ratios)
    report(7, "4th-order convergence", ok, elapsed, 10.0,
           f"halving-error ratios = {ratios[0]:.2f}, {ratios[1]:.2f} (16 +- 20%)")


def test_08_projection_oracle_equivalence():
    rng = derive_rng(1008)
    sizes = (
        [(10, 100)] * 850 + [(100, 160)] * 130 + [(160, 200)] * 20
    )
    t0 = time.perf_counter()
    checked_events = 0
    mismatches = 0
    for lo, hi in sizes:
        p = random_poset(rng, max_events=hi, min_events=lo)
        for e in p.events():
            for cid in p.chains:
                if p.forward_project(e, cid) != oracle_project(p, e, cid):
                    mismatches += 1
                if p.backward_project(e, cid) != oracle_backward_project(p, e, cid):
                    mismatches += 1
            checked_events += 1

    # hand-built five-step walk anchors
    walk = make_five_step_poset()
    anchors_ok = (
        oracle_project(walk, "w1", "obs_right") == "r1"
        and oracle_project(walk, "w2", "obs_right") == "r2"
        and walk.forward_project("w1", "obs_right") == "r1"
        and walk.forward_project("w2", "obs_right") == "r2"
        and walk.forward_project("w1", "obs_left") == "l1"
        and walk.forward_project("w2", "obs_left") == "l1"
        and walk.leq("w1", "r1")
        and not walk.leq("w2", "r1")
        and oracle_leq(walk, "w1", "r1")
        and not oracle_leq(walk, "w2", "r1")
    )
    elapsed = time.perf_counter() - t0
    report(8, "projection oracle equivalence", mismatches == 0 and anchors_ok, elapsed, 30.0,
           f"{checked_events} events across {len(sizes)} posets, {mismatches} mismatches, "
           f"walk anchors {'ok' if anchors_ok else 'BAD'}")


def test_09_lorentz_consistency():
    trials = 100_000
    rng = derive_rng(1009)
    dt = np.exp(rng.uniform(math.log(0.5), math.log(2.0), size=trials))
    dx = rng.uniform(-0.45, 0.45, size=trials) * dt
    v1 = rng.uniform(-0.95, 0.95, size=trials)
    v2 = rng.uniform(-0.95, 0.95, size=trials)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(trials):
        a, b = lorentz_boost(float(dt[i]), float(dx[i]), float(v1[i]))
        err = abs((a * a - b * b) / (dt[i] ** 2 - dx[i] ** 2) - 1.0)
        c, d = lorentz_boost(a, b, float(v2[i]))
        w = (v1[i] + v2[i]) / (1.0 + v1[i] * v2[i])
        c2, d2 = lorentz_boost(float(dt[i]), float(dx[i]), float(w))
        scale = max(abs(c2), abs(d2))
        err = max(err, abs(c - c2) / scale, abs(d - d2) / scale)
        if err > worst:
            worst = err
    elapsed = time.perf_counter() - t0
    report(9, "Lorentz consistency", worst <= 1e-12, elapsed, 1.0,
           f"worst invariance/additivity error = {worst:.2e} over {trials} transforms")


def test_10_determinism(tmp_path):
    args = [
        "simulate", "--kind", "accel", "--r", "0.01", "--phi0", "0",
        "--n", "100000", "--window", "1000", "--seed", "42",
    ]
    t0 = time.perf_counter()
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    same_csv = (tmp_path / "a" / "trajectory.csv").read_bytes() == (
        tmp_path / "b" / "trajectory.csv"
    ).read_bytes()
    same_json = (tmp_path / "a" / "summary.json").read_bytes() == (
        tmp_path / "b" / "summary.json"
    ).read_bytes()
    elapsed = time.perf_counter() - t0
    report(10, "byte determinism", same_csv and same_json, elapsed, 60.0,
           f"trajectory.csv identical: {same_csv}, summary.json identical: {same_json}")
