"""Acceptance suite: one test per exit criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with
``pytest -s``) and asserts the criterion's stated tolerances.  Expensive
reference runs are shared through module-scoped fixtures.
"""

import math
import time

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import measurement_test_params
from zenoreg.analytics import time_averaged_infidelity
from zenoreg.cli import main as cli_main
from zenoreg.dynamics import (
    bloch_evolution,
    evolve,
    jump_ensemble,
    nonselective_fidelity_closed,
    null_trajectory,
    reduced_master_equation,
    zeno_decay_rate,
)
from zenoreg.oracle import build_bose_hubbard, exact_evolve_fidelity, exact_ground_state, fock_basis
from zenoreg.params import PhysicalConfig, derive_params, hole_leak_log, regime_check
from zenoreg.register import build_basis, build_free_hamiltonian, perturbative_ground_state
from zenoreg.analytics import free_evolution_fidelity

REGISTER_N = 501
ATOMS_N = 551


def _report(number: int, label: str, failures: list) -> None:
    status = "PASS" if not failures else "FAIL"
    line = f"[{status}] acceptance criterion {number}: {label}"
    print(line)
    if failures:
        raise AssertionError(line + "\n  - " + "\n  - ".join(failures))


def _check(failures: list, ok: bool, message: str) -> None:
    if not ok:
        failures.append(message)


@pytest.fixture(scope="module")
def reference():
    cfg = PhysicalConfig(
        wavelength_m=785e-9,
        scattering_length_m=5.6e-9,
        depth_parallel_er=22.0,
        depth_transverse_er=38.5,
        trap_frequency_hz=8.0,
        atomic_rabi_gamma=25.0,
        linewidth_hz=6.065e6,
        detuning_gamma=-6.85e4,
        franck_condon=5e-7,
        atoms=ATOMS_N,
        register_sites=REGISTER_N,
    )
    return cfg, derive_params(cfg)


@pytest.fixture(scope="module")
def eliminated_20(reference):
    _, p = reference
    t0 = time.monotonic()
    series = null_trajectory(p, REGISTER_N, t_end=20.0, model="eliminated")
    return series, time.monotonic() - t0


@pytest.fixture(scope="module")
def full_20(reference):
    _, p = reference
    t0 = time.monotonic()
    series = null_trajectory(p, REGISTER_N, t_end=20.0, model="full")
    return series, time.monotonic() - t0


@pytest.fixture(scope="module")
def eliminated_100(reference):
    _, p = reference
    return null_trajectory(p, REGISTER_N, t_end=100.0, model="eliminated")


@pytest.fixture(scope="module")
def master_100(reference):
    _, p = reference
    return reduced_master_equation(p, REGISTER_N, t_end=100.0, max_samples=2001)


def test_criterion_1_parameter_chain(reference):
    t0 = time.monotonic()
    cfg, p = reference
    report = regime_check(p, cfg.register_sites, cfg.atoms)
    edge = p.delta_over_u * ((cfg.atoms - 1) / 2.0) ** 2
    elapsed = time.monotonic() - t0

    failures = []
    _check(failures, abs(p.u_hz / 3574.0 - 1.0) <= 0.01, f"U = {p.u_hz:.1f} Hz not within 1% of 3574")
    _check(failures, abs(1.0 / p.j_over_u / 500.0 - 1.0) <= 0.02, f"U/J = {1 / p.j_over_u:.1f} not within 2% of 500")
    _check(failures, abs(p.kappa_over_u / 0.13 - 1.0) <= 0.05, f"kappa/U = {p.kappa_over_u:.4f} not within 5% of 0.13")
    _check(failures, abs(p.vc_over_u / 15.5 - 1.0) <= 0.02, f"|V_c|/U = {p.vc_over_u:.3f} not within 2% of 15.5")
    _check(failures, abs(p.s_a / 6.7e-8 - 1.0) <= 0.02, f"s_A = {p.s_a:.3g} not within 2% of 6.7e-8")
    _check(failures, abs(edge / 0.9 - 1.0) <= 0.02, f"edge energy = {edge:.4f} U not within 2% of 0.9 U")
    _check(failures, abs(report.strength / 1.5 - 1.0) <= 0.10, f"strength = {report.strength:.3f} not within 10% of 1.5")
    _check(failures, elapsed < 1.0, f"runtime {elapsed:.2f} s exceeds 1 s")
    _report(1, "physical parameter chain", failures)


def _windowed_means(series, width=1.0):
    nbin = int(series.t[-1] // width)
    idx = np.minimum((series.t // width).astype(int), nbin - 1)
    return np.array([series.fidelity[idx == k].mean() for k in range(nbin)])


def test_criterion_2_null_trajectory_band(eliminated_20, full_20):
    elim, elim_s = eliminated_20
    full, full_s = full_20
    failures = []
    for name, series in (("eliminated", elim), ("full", full)):
        _check(
            failures,
            abs(series.fidelity[0] - 0.992) <= 0.002,
            f"{name}: F(0) = {series.fidelity[0]:.5f} outside 0.992 +- 0.002",
        )
        _check(
            failures,
            series.fidelity[-1] >= 0.999,
            f"{name}: F(20/U) = {series.fidelity[-1]:.6f} < 0.999",
        )
        _check(
            failures,
            4.0 <= series.t_sat <= 16.0,
            f"{name}: t_sat = {series.t_sat:.2f}/U outside [4, 16]/U",
        )
        # monotone after the initial transient: 1/U-window means nondecreasing
        means = _windowed_means(series)
        _check(
            failures,
            float(np.diff(means[1:]).min()) >= -1e-5,
            f"{name}: windowed fidelity means decrease by {-np.diff(means[1:]).min():.2e}",
        )
    agreement = float(np.max(np.abs(full.fidelity - elim.fidelity)))
    _check(failures, agreement <= 1e-3, f"full vs eliminated max |dF| = {agreement:.2e} > 1e-3")
    _check(failures, elim_s < 60.0, f"eliminated runtime {elim_s:.1f} s exceeds 1 min")
    _check(failures, full_s < 600.0, f"full runtime {full_s:.1f} s exceeds 10 min")
    _report(2, "null-trajectory saturation band", failures)


def test_criterion_3_efficiency_and_oscillation(reference, eliminated_100, master_100):
    t0 = time.monotonic()
    _, p = reference
    failures = []

    f_cond = float(eliminated_100.fidelity[-1])
    rho_rme = float(master_100.rho_tt[-1])
    rho0 = float(master_100.rho_tt[0])
    mixtures = []
    for eta in (1.0, 0.9, 0.8):
        computed = eta * f_cond + (1.0 - eta) * rho_rme
        closed = eta + (1.0 - eta) * float(
            nonselective_fidelity_closed(p, REGISTER_N, rho0, 100.0)
        )
        mixtures.append(computed)
        _check(
            failures,
            abs(computed - closed) <= 0.01,
            f"eta={eta}: plateau {computed:.5f} deviates from closed form {closed:.5f} by > 0.01",
        )
    _check(
        failures,
        mixtures[0] > mixtures[1] > mixtures[2],
        f"plateaus not ordered by efficiency: {mixtures}",
    )

    # post-measurement free oscillation of the saturated register at U
    basis = build_basis(REGISTER_N)
    saturated = eliminated_100.final_state.expanded()
    saturated.amplitudes /= math.sqrt(saturated.norm_sq())
    h_free = build_free_hamiltonian(basis, p)
    series = evolve(h_free, saturated, t_end=150.0, max_samples=4096)
    signal = (1.0 - series.fidelity) - np.mean(1.0 - series.fidelity)
    spectrum = np.abs(np.fft.rfft(signal * np.hanning(signal.size)))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(signal.size, d=series.t[1] - series.t[0])
    peak = int(spectrum.argmax())
    a, b, c = spectrum[peak - 1 : peak + 2]
    omega = freqs[peak] + 0.5 * (a - c) / (a - 2 * b + c) * (freqs[1] - freqs[0])
    _check(
        failures,
        abs(omega - 1.0) <= 0.02,
        f"post-measurement oscillation at {omega:.4f} U, not within 2% of U",
    )
    elapsed = time.monotonic() - t0
    _check(failures, elapsed < 60.0, f"runtime {elapsed:.1f} s exceeds 1 min")
    _report(3, "finite-efficiency plateaus and post-measurement oscillation", failures)


def test_criterion_4_zeno_closed_form(reference):
    t0 = time.monotonic()
    _, p = reference
    failures = []

    series = bloch_evolution(p, REGISTER_N, t_end=1e4, max_samples=2001)
    closed = nonselective_fidelity_closed(p, REGISTER_N, 1.0, series.t)
    mask = series.t >= 5.0 / p.vc_over_u
    rel = np.abs(series.rho_tt[mask] - closed[mask]) / closed[mask]
    _check(
        failures,
        float(rel.max()) <= 0.01,
        f"Bloch vs closed form max relative deviation {rel.max():.2e} > 1%",
    )

    late = series.t >= 2000.0
    fitted = -np.polyfit(series.t[late], np.log(series.rho_tt[late]), 1)[0]
    formula = zeno_decay_rate(p, REGISTER_N)
    _check(
        failures,
        abs(fitted / formula - 1.0) <= 0.01,
        f"fitted rate {fitted:.3e} deviates from formula {formula:.3e} by > 1%",
    )
    _check(
        failures,
        abs(formula / 7.8e-6 - 1.0) <= 0.02,
        f"formula rate {formula:.3e} U not within 2% of 7.8e-6 U",
    )
    elapsed = time.monotonic() - t0
    _check(failures, elapsed < 60.0, f"runtime {elapsed:.1f} s exceeds 1 min")
    _report(4, "Zeno decay closed form", failures)


def test_criterion_5_unraveling_equivalence():
    t0 = time.monotonic()
    p = measurement_test_params()
    n_traj = 10_000
    ens = jump_ensemble(p, 5, n_traj=n_traj, seed=2024, t_end=10.0, model="full", max_samples=11)
    rme = reduced_master_equation(p, 5, t_end=10.0, max_samples=11)
    failures = []

    sigma_s = np.sqrt(np.maximum(rme.trace * (1.0 - rme.trace), 1e-12) / n_traj)
    dev_s = np.abs(ens.survival - rme.trace) / sigma_s
    _check(
        failures,
        bool(np.all(dev_s[1:] <= 3.0)),
        f"survival deviates by up to {dev_s[1:].max():.2f} sigma (limit 3)",
    )
    sigma_t = np.sqrt(np.maximum(rme.rho_tt * (1.0 - rme.rho_tt), 1e-12) / n_traj)
    dev_t = np.abs(ens.uncond_t_population - rme.rho_tt) / sigma_t
    _check(
        failures,
        bool(np.all(dev_t[1:] <= 3.0)),
        f"target population deviates by up to {dev_t[1:].max():.2f} sigma (limit 3)",
    )
    elapsed = time.monotonic() - t0
    _check(failures, elapsed < 300.0, f"runtime {elapsed:.1f} s exceeds 5 min")
    _report(5, "jump unraveling matches the master equation", failures)


def test_criterion_6_free_evolution_vs_oracle():
    t0 = time.monotonic()
    failures = []
    for n_sites in (3, 5, 7):
        for u_over_j in (100.0, 500.0):
            for delta in (0.0, 1e-3):
                j = 1.0 / u_over_j
                basis = fock_basis(n_sites, n_sites)
                series = exact_evolve_fidelity(basis, j, 1.0, delta, u_over_j, max_samples=1501)
                closed = free_evolution_fidelity(n_sites - 1, j, 1.0, delta, series.t)
                band = 1.0 - float(series.fidelity.min())
                pointwise = float(np.max(np.abs(closed - series.fidelity)))
                tag = f"N=M={n_sites}, U/J={u_over_j:g}, delta/U={delta:g}"
                _check(
                    failures,
                    pointwise <= 0.2 * band,
                    f"{tag}: pointwise deviation {pointwise:.3e} exceeds 0.2 x band {band:.3e}"
                    f" (ratio {pointwise / band:.2f})",
                )
                avg = float(np.mean(1.0 - series.fidelity))
                target = time_averaged_infidelity(n_sites - 1, j, 1.0)
                _check(
                    failures,
                    abs(avg / target - 1.0) <= 0.25,
                    f"{tag}: mean infidelity {avg:.3e} not within 25% of {target:.3e}",
                )
    elapsed = time.monotonic() - t0
    _check(failures, elapsed < 300.0, f"runtime {elapsed:.1f} s exceeds 5 min")
    _report(6, "first-order free-evolution law vs exact oracle", failures)


def test_criterion_7_ground_state_energetics():
    t0 = time.monotonic()
    failures = []

    j = 0.01
    h3 = build_bose_hubbard(fock_basis(3, 3, boundary="periodic"), j, 1.0, 0.0)
    e3, _ = exact_ground_state(h3)
    e_pt = -4.0 * 3 * j**2
    _check(
        failures,
        abs(e3 - e_pt) <= 0.1 * abs(e_pt),
        f"periodic N=M=3 energy {e3:.4e} not within 10% of {e_pt:.4e}",
    )

    j2 = 1.0 / 500.0
    h2 = build_bose_hubbard(fock_basis(2, 2), j2, 1.0, 0.0)
    e2, _ = exact_ground_state(h2)
    analytic = 0.5 * (1.0 - math.sqrt(1.0 + 16.0 * j2**2))
    _check(
        failures,
        abs(e2 / analytic - 1.0) <= 1e-8,
        f"open N=M=2 energy {e2:.10e} vs analytic {analytic:.10e}",
    )
    elapsed = time.monotonic() - t0
    _check(failures, elapsed < 10.0, f"runtime {elapsed:.1f} s exceeds 10 s")
    _report(7, "ground-state energetics", failures)


def test_criterion_8_invariant_suites(reference, tmp_path):
    t0 = time.monotonic()
    cfg, p = reference
    failures = []

    # conditioned-norm monotonicity under the non-Hermitian evolution
    cond = null_trajectory(p, 5, t_end=1.5, model="full", max_samples=301)
    _check(
        failures,
        float(np.diff(cond.norm_sq).max()) <= 1e-9,
        "conditioned norm increased along a null trajectory",
    )

    # Hermitian evolution conserves norm and energy
    basis = build_basis(21)
    h_free = build_free_hamiltonian(basis, p)
    psi0 = perturbative_ground_state(basis, p)
    herm = evolve(h_free, psi0, t_end=100.0, max_samples=201)
    _check(
        failures,
        float(np.max(np.abs(herm.norm_sq - 1.0))) < 1e-8,
        f"Hermitian norm drift {np.max(np.abs(herm.norm_sq - 1.0)):.2e}",
    )
    psi_t = herm.final_state.amplitudes
    e_t = float(np.vdot(psi_t, h_free.matvec(psi_t)).real / np.vdot(psi_t, psi_t).real)
    e_0 = float(np.vdot(psi0.amplitudes, h_free.matvec(psi0.amplitudes)).real)
    _check(
        failures,
        abs(e_t - e_0) < 1e-8 * h_free.frequency_bound(),
        f"Hermitian energy drift {abs(e_t - e_0):.2e}",
    )

    # closed-form and product-form barrier estimates agree
    for n, big_n in ((3, 21), (11, 21), (51, 101), (101, 199)):
        log_c = hole_leak_log(5.0, 1.0, n, big_n, form="closed")
        log_p = hole_leak_log(5.0, 1.0, n, big_n, form="product")
        _check(
            failures,
            abs(math.expm1(log_c - log_p)) < 1e-8,
            f"hole-leak forms disagree at (n={n}, N={big_n})",
        )

    # seeded ensembles are bit-identical across worker counts
    mini = measurement_test_params()
    kwargs = dict(n_traj=1100, seed=77, t_end=2.0, model="full", max_samples=6)
    one = jump_ensemble(mini, 5, workers=1, **kwargs)
    three = jump_ensemble(mini, 5, workers=3, **kwargs)
    _check(
        failures,
        np.array_equal(one.survival, three.survival)
        and np.array_equal(one.cond_fidelity, three.cond_fidelity)
        and np.array_equal(one.jump_times, three.jump_times, equal_nan=True),
        "ensemble results depend on the worker count",
    )

    # identical manifests give byte-identical CLI outputs
    runner = CliRunner()
    args = ["trajectory", "--n", "5", "--t-end", "1", "--model", "eliminated"]
    out_a, out_b = tmp_path / "ra", tmp_path / "rb"
    ok_a = runner.invoke(cli_main, args + ["--out", str(out_a)]).exit_code == 0
    ok_b = runner.invoke(cli_main, args + ["--out", str(out_b)]).exit_code == 0
    same_csv = open(f"{out_a}.csv", "rb").read() == open(f"{out_b}.csv", "rb").read()
    _check(failures, ok_a and ok_b and same_csv, "CLI rerun is not byte-identical")

    elapsed = time.monotonic() - t0
    _check(failures, elapsed < 300.0, f"runtime {elapsed:.1f} s exceeds 5 min")
    _report(8, "cross-cutting invariants", failures)
