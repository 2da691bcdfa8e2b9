"""One test per acceptance criterion; each prints a PASS/FAIL line with its tolerance."""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from scissorkin.constraint_dof import dof, loop_basis, numeric_dof_oracle
from scissorkin.data import load_json
from scissorkin.deploy_sim import DriveProfile, compare_units, node_stats, ring_assembly, simulate, unit_log
from scissorkin.kinematics import drive_sensitivity, sample
from scissorkin.mech_model import (
    link_length_errors, link_lengths, reference_unit, solve_angle_from_width, stretched_length,
)
from scissorkin.oracle import fd_acceleration, fd_velocity, max_relative_error
from scissorkin.screw_algebra import bracket_array, ring_rotation

DEG = math.pi / 180
SWEEP = np.linspace(12.54, 80.0, 25) * DEG
# drive joint rates in rad/s; see the ledger for why slower rates are not used for the FD checks
DRIVE_RATES = (0.1, 0.5, 1.0)


def report(number, title, value, tolerance, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] AC{number:02d} {title}: {value} (tolerance {tolerance})"
    if detail:
        line += f"; {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def unit():
    return reference_unit()


def test_ac01_link_lengths_match_published_table():
    published = (6.64, 6.64, 2.14, 2.14, 2.14, 2.14, 3.32, 3.32, 3.32, 3.32, 1.66, 1.66, 1.66, 1.66)
    got = link_lengths(5.09, 80 * DEG).as_tuple()
    err = max(abs(g - p) for g, p in zip(got, published))
    report(1, "link lengths l1..l14 vs published", f"max |error| = {err:.4f} m", "0.01 m", err <= 0.01,
           f"l1 = {got[0]:.4f}, l3 = {got[2]:.4f}, l7 = {got[6]:.4f}, l11 = {got[10]:.4f}")


def test_ac02_stretched_lengths():
    published = {12: 6.470, 18: 4.341, 24: 3.263}
    errs = {N: abs(stretched_length(25, N) - v) for N, v in published.items()}
    worst = max(errs.values())
    report(2, "stretched length D sin(pi/N) for N = 12/18/24", f"max |error| = {worst:.5f} m", "0.01 m",
           worst <= 0.01, ", ".join(f"N={N}: {stretched_length(25, N):.4f}" for N in published))


def test_ac03_angle_from_width():
    got = math.degrees(solve_angle_from_width(3.32, 5.09))
    report(3, "deployed angle from W = 5.09, L = 3.32", f"{got:.3f} deg", "79.90 +- 0.05 deg",
           abs(got - 79.90) <= 0.05)


def test_ac04_mobility(unit):
    t0 = time.perf_counter()
    results = [(dof(unit, th), numeric_dof_oracle(unit, th)) for th in SWEEP]
    loops = len(loop_basis(unit))
    elapsed = time.perf_counter() - t0
    ok = all(a == 1 and b == 1 for a, b in results) and loops == 8 and elapsed < 1.0
    report(4, "DoF at 25 angles in [12.54, 80] deg", f"dof/oracle pairs {sorted(set(results))}, loops = {loops}",
           "dof == oracle == 1, 8 loops, < 1 s", ok, f"runtime {elapsed:.3f} s")


def _sweep_errors(unit):
    vel = acc = 0.0
    for th in SWEEP:
        sens = drive_sensitivity(unit, th)
        for rate in DRIVE_RATES:
            thd = rate / sens
            _, _, v, _, a, _, _ = sample(unit, th, thd, 0.0)
            vel = max(vel, max_relative_error(v, fd_velocity(unit, th, thd)))
            acc = max(acc, max_relative_error(a, fd_acceleration(unit, th, thd)))
    return vel, acc


@pytest.fixture(scope="module")
def sweep_errors(unit):
    return _sweep_errors(unit)


def test_ac05_velocity_oracle(sweep_errors):
    vel, _ = sweep_errors
    report(5, "node velocity vs central FD of positions", f"max rel error = {vel:.2e}", "1e-6", vel < 1e-6,
           f"25 angles x drive rates {DRIVE_RATES} rad/s")


def test_ac06_acceleration_oracle(sweep_errors):
    _, acc = sweep_errors
    report(6, "node acceleration vs second-order FD of positions", f"max rel error = {acc:.2e}", "1e-4", acc < 1e-4,
           f"25 angles x drive rates {DRIVE_RATES} rad/s")


@pytest.fixture(scope="module")
def deploy_log(unit):
    return simulate(unit, DriveProfile(), 0.05)


@pytest.fixture(scope="module")
def cycle_log(unit):
    return simulate(unit, DriveProfile(cycle=True), 0.05)


def test_ac07_loop_closure_along_deployment(unit, deploy_log):
    worst = max(float(np.max(np.abs(link_length_errors(unit, p)))) for p in deploy_log.pos)
    report(7, "link lengths at every logged sample", f"max |error| = {worst:.2e} m", "1e-9 m", worst < 1e-9,
           f"{len(deploy_log)} samples")


def test_ac08_ring_equivariance(unit):
    alpha = 2 * math.pi / 12
    profile = DriveProfile()
    log0 = simulate(unit, profile, 0.5)
    worst_state = worst_mse = 0.0
    for j in (1, 5, 11):
        R = ring_rotation(j, alpha)
        logj = simulate(unit, profile, 0.5, frame=R)  # solved independently in its ring slot
        for f in ("pos", "vel", "omega", "acc", "eps"):
            worst_state = max(worst_state, float(np.max(np.abs(getattr(logj, f) - getattr(log0, f) @ R.T))))
        worst_mse = max(worst_mse, max(compare_units(log0, logj, align=(j, alpha)).mse.values()))
    ok = worst_state <= 1e-12 and worst_mse <= 1e-12
    report(8, "unit j solved in place vs rotated unit 0", f"max |diff| = {worst_state:.2e}, max MSE = {worst_mse:.2e}",
           "1e-12", ok, "units 1, 5, 11 of 12")


def test_ac09_timing(deploy_log, cycle_log):
    k = int(np.argmin(np.abs(cycle_log.t - 53.0)))
    ok = (deploy_log.t[-1] == 53.0 and abs(math.degrees(deploy_log.theta[-1]) - 80) < 1e-12
          and cycle_log.t[-1] == 102.0 and abs(math.degrees(cycle_log.theta[-1]) - 12.54) < 1e-12
          and cycle_log.t[k] == 53.0 and abs(math.degrees(cycle_log.theta[k]) - 80) < 1e-12)
    report(9, "deployed at 53 s, cycle complete at 102 s",
           f"theta(53) = {math.degrees(cycle_log.theta[k]):.6f} deg, theta(102) = {math.degrees(cycle_log.theta[-1]):.6f} deg",
           "exact times, angles within 1e-12 deg", ok, f"{len(cycle_log)} samples")


def test_ac10_lie_algebra():
    rng = np.random.default_rng(20240601)
    a, b, c = (rng.normal(size=(1000, 6)) for _ in range(3))
    anti = np.max(np.abs(bracket_array(a, b) + bracket_array(b, a)))
    jac = np.max(np.abs(bracket_array(a, bracket_array(b, c)) + bracket_array(b, bracket_array(c, a))
                        + bracket_array(c, bracket_array(a, b))))
    worst = max(anti, jac)
    report(10, "bracket antisymmetry and Jacobi, 1000 random triples",
           f"antisymmetry {anti:.1e}, Jacobi {jac:.1e}", "1e-12", worst < 1e-12)


def test_ac11_peripheral_faster_than_inner(unit, deploy_log):
    stats = node_stats(deploy_log).table
    peri = {n: stats[n]["linear_velocity"][0] for n in unit.nodes_with_role("peripheral")}
    inner = {n: stats[n]["linear_velocity"][0] for n in unit.nodes_with_role("inner")}
    fixture = load_json("published_node_stats.json")
    info = fixture["rows"]["A"]["unit1"]["linear_velocity"]["max"]
    report(11, "min peripheral max speed > max inner max speed",
           f"{min(peri.values()):.2f} mm/s > {max(inner.values()):.2f} mm/s", "strict", min(peri.values()) > max(inner.values()),
           f"informative only: published node A max {info:g} mm/s vs {stats[fixture['node_mapping']['A']]['linear_velocity'][0]:.1f} mm/s here")


def test_ac12_structural_deformation_out_of_scope():
    line = "[SKIP] AC12 structural deformation and mesh convergence: not reproducible without loads, sections and supports"
    ACCEPTANCE_LINES.append(line)
    print(line)
    pytest.skip("structural finite element results are outside this kinematics toolkit")


def test_ac13_performance(unit):
    t0 = time.perf_counter()
    log = simulate(unit, DriveProfile(cycle=True), 0.05)
    ring = ring_assembly(log, 12, 2 * math.pi / 12, unit.interface)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 5.0 and len(ring) == 2041 and len(ring.nodes) == 12 * 17
    report(13, "12-unit ring, 102 s cycle, dt = 0.05 s", f"{elapsed:.2f} s", "< 5 s", ok,
           f"{len(ring)} samples x {len(ring.nodes)} nodes")
    assert unit_log(ring, 0).nodes
