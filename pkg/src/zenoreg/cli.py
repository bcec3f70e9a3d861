"""Command-line interface.

Times are accepted and reported in units of 1/U (``--hz`` switches the
time column to seconds using the derived U).  ``--t-end`` accepts either a
plain number (units of 1/U) or ``<number>/J`` for multiples of the
tunneling time.  Parameter precedence: built-in defaults < ``--config``
file < command-line flags.  Every run writes a JSON sidecar with the
resolved manifest next to its data.
"""

from __future__ import annotations

import sys
from dataclasses import replace

import click
import numpy as np

from . import __version__
from .analytics import free_evolution_fidelity, perturbative_ground_energy, preparation_stats
from .dynamics import (
    bloch_evolution,
    evolve,
    finite_efficiency_fidelity,
    jump_ensemble,
    nonselective_fidelity_closed,
    null_trajectory,
    reduced_master_equation,
    zeno_decay_rate,
)
from .oracle import double_occupancy_evolve, exact_evolve_fidelity, fock_basis
from .params import ParameterError, derive_params, reference_config, read_config, regime_check
from .register import (
    ModelError,
    StateVector,
    build_basis,
    build_free_hamiltonian,
    fidelity,
    perturbative_ground_state,
)
from .runio import RunManifest, write_csv, write_sidecar
from .svg import SvgError, emit_svg

CONFIG_ERRORS = (ParameterError, ModelError, SvgError, FileNotFoundError, OSError, ValueError)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _resolve(config, n, u_over_j, strict):
    try:
        cfg = read_config(config) if config else reference_config()
        if n is not None:
            cfg = replace(cfg, register_sites=n)
        p = derive_params(cfg)
        if u_over_j is not None:
            p = replace(p, j_over_u=1.0 / u_over_j)
        report = regime_check(p, cfg.register_sites, cfg.atoms, cfg.hole_probability_threshold)
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    if not report.all_ok:
        message = (
            "measurement regime violated: "
            f"omega_ratio={report.omega_ratio:.3g} strength={report.strength:.3g} "
            f"edge_ratio={report.edge_ratio:.3g} p_h={report.p_h:.3g}"
        )
        if strict:
            _fail(message)
        click.echo(f"warning: {message}", err=True)
    return cfg, p, report


def _parse_t_end(text, p) -> float:
    if text is None:
        return None
    text = str(text).strip()
    try:
        if text.endswith("/J"):
            return float(text[:-2]) / p.j_over_u
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ParameterError(f"cannot parse t-end value {text!r}") from None


def _time_column(t, p, hz):
    if hz:
        return "t_s", t / (2.0 * np.pi * p.u_hz)
    return "t_over_u", t


def _manifest(subcommand, cfg, p, seed=None, **kwargs) -> RunManifest:
    parameters = {
        "config": {
            "atoms": cfg.atoms,
            "register_sites": cfg.register_sites,
            "efficiency": cfg.efficiency,
        },
        "derived": p.as_dict(),
    }
    parameters.update(kwargs)
    return RunManifest(subcommand=subcommand, parameters=parameters, seed=seed)


def _emit(base, manifest, header, columns, extra=None):
    csv_path = f"{base}.csv"
    json_path = f"{base}.json"
    write_csv(csv_path, header, columns)
    manifest.outputs = [csv_path, json_path]
    write_sidecar(json_path, manifest, extra)
    click.echo(f"wrote {csv_path} and {json_path}")


config_option = click.option("--config", type=click.Path(), default=None, help="key=value config file")
n_option = click.option("--n", type=int, default=None, help="register size (odd)")
uoj_option = click.option("--u-over-j", type=float, default=None, help="override the U/J ratio")
strict_option = click.option("--strict", is_flag=True, help="fail on regime violations")
hz_option = click.option("--hz", is_flag=True, help="report times in seconds instead of 1/U")
dt_option = click.option("--dt", type=float, default=None, help="integrator step (units of 1/U)")


def out_option(default):
    return click.option("--out", default=default, show_default=True, help="output base path")


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Simulate measurement-stabilized register initialization."""


@main.command()
@config_option
@n_option
@uoj_option
@strict_option
@out_option("zenoreg_params")
def params(config, n, u_over_j, strict, out):
    """Derived model parameters and regime report as JSON."""
    cfg, p, report = _resolve(config, n, u_over_j, strict)
    payload = {
        "u_hz": p.u_hz,
        "j_over_u": p.j_over_u,
        "delta_over_u": p.delta_over_u,
        "kappa_over_u": p.kappa_over_u,
        "omega_m_over_u": p.omega_m_over_u,
        "gamma_m_over_u": p.gamma_m_over_u,
        "vc_over_u": p.vc_over_u,
        "s_a": p.s_a,
        "strength": report.strength,
        "p_h": report.p_h,
        "regime": report.as_dict(),
    }
    manifest = _manifest("params", cfg, p)
    json_path = f"{out}.json"
    manifest.outputs = [json_path]
    write_sidecar(json_path, manifest, payload)
    for key in ("u_hz", "j_over_u", "kappa_over_u", "vc_over_u", "s_a", "strength", "p_h"):
        click.echo(f"{key} = {payload[key]:.6g}")
    click.echo(f"wrote {json_path}")


@main.command()
@config_option
@n_option
@uoj_option
@strict_option
@click.option("--dump-state", is_flag=True, help="include the state amplitudes")
@out_option("zenoreg_ground")
def ground(config, n, u_over_j, strict, dump_state, out):
    """Perturbative ground state: fidelity, failure probability, energy."""
    cfg, p, _ = _resolve(config, n, u_over_j, strict)
    basis = build_basis(cfg.register_sites)
    try:
        psi = perturbative_ground_state(basis, p)
        stats = preparation_stats(p, cfg.register_sites)
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    payload = {
        "fidelity": fidelity(psi),
        "p_fail": stats.p_fail,
        "t_prep_over_u": stats.t_prep,
        "energy_estimate_over_u": perturbative_ground_energy(
            cfg.register_sites - 1, p.j_over_u, 1.0
        ),
        "dimension": basis.dimension,
    }
    if dump_state:
        payload["state"] = {
            "n": basis.n,
            "amplitudes": [[a.real, a.imag] for a in psi.amplitudes],
        }
    manifest = _manifest("ground", cfg, p)
    json_path = f"{out}.json"
    manifest.outputs = [json_path]
    write_sidecar(json_path, manifest, payload)
    click.echo(f"F0 = {payload['fidelity']:.6g}, p_fail = {payload['p_fail']:.6g}")
    click.echo(f"wrote {json_path}")


@main.command()
@config_option
@n_option
@uoj_option
@strict_option
@hz_option
@dt_option
@click.option("--t-end", default="30", show_default=True, help="end time (1/U, or '<x>/J')")
@click.option("--model", type=click.Choice(["auto", "full", "eliminated"]), default="auto", show_default=True)
@out_option("zenoreg_trajectory")
def trajectory(config, n, u_over_j, strict, hz, dt, t_end, model, out):
    """Null-measurement trajectory from the ground state (conditioned F)."""
    cfg, p, _ = _resolve(config, n, u_over_j, strict)
    try:
        t_end = _parse_t_end(t_end, p)
        series = null_trajectory(p, cfg.register_sites, t_end=t_end, model=model, dt=dt)
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    name, tcol = _time_column(series.t, p, hz)
    manifest = _manifest("trajectory", cfg, p, t_end=t_end, dt=dt, model=model, hz=hz)
    _emit(
        out,
        manifest,
        [name, "fidelity", "norm_sq"],
        [tcol, series.fidelity, series.norm_sq],
        extra={"t_sat_over_u": series.t_sat},
    )
    click.echo(f"t_sat = {series.t_sat:.4g}/U, final F = {series.fidelity[-1]:.6g}")


@main.command()
@config_option
@n_option
@uoj_option
@strict_option
@hz_option
@dt_option
@click.option("--t-end", default="10", show_default=True)
@click.option("--traj", type=int, default=1000, show_default=True, help="trajectory count")
@click.option("--seed", type=int, default=1234, show_default=True)
@click.option("--model", type=click.Choice(["auto", "full", "eliminated"]), default="full", show_default=True)
@out_option("zenoreg_ensemble")
def ensemble(config, n, u_over_j, strict, hz, dt, t_end, traj, seed, model, out):
    """Jump Monte Carlo ensemble: survival and conditional fidelity."""
    cfg, p, _ = _resolve(config, n, u_over_j, strict)
    try:
        t_end = _parse_t_end(t_end, p)
        result = jump_ensemble(
            p, cfg.register_sites, n_traj=traj, seed=seed, t_end=t_end, model=model, dt=dt
        )
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    name, tcol = _time_column(result.t, p, hz)
    edges, counts = result.jump_histogram()
    n_failed = int(np.isfinite(result.jump_times).sum())
    manifest = _manifest(
        "ensemble", cfg, p, seed=seed, t_end=t_end, dt=dt, model=result.model, n_traj=traj
    )
    _emit(
        out,
        manifest,
        [name, "survival", "cond_fidelity", "uncond_t_population"],
        [tcol, result.survival, result.cond_fidelity, result.uncond_t_population],
        extra={
            "jump_histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
            "failures": n_failed,
            "failure_fraction": n_failed / traj,
        },
    )
    click.echo(f"failures: {n_failed}/{traj}")


@main.command()
@config_option
@n_option
@uoj_option
@strict_option
@hz_option
@dt_option
@click.option("--t-end", default="100", show_default=True)
@out_option("zenoreg_nonselective")
def nonselective(config, n, u_over_j, strict, hz, dt, t_end, out):
    """Nonselective decay: master equation vs Bloch system vs closed form."""
    cfg, p, _ = _resolve(config, n, u_over_j, strict)
    n_reg = cfg.register_sites
    try:
        t_end = _parse_t_end(t_end, p)
        rme = reduced_master_equation(p, n_reg, t_end=t_end, dt=dt, max_samples=2001)
        bloch = bloch_evolution(p, n_reg, t_end=t_end, dt=dt, max_samples=2001)
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    rho0 = rme.rho_tt[0]
    closed = nonselective_fidelity_closed(p, n_reg, rho0, rme.t)
    # the Bloch reduction starts from a pure target state; rescale to rho0
    bloch_tt = rho0 * bloch.rho_tt
    name, tcol = _time_column(rme.t, p, hz)
    manifest = _manifest("nonselective", cfg, p, t_end=t_end, dt=dt)
    _emit(
        out,
        manifest,
        [name, "rho_tt_master", "rho_tt_bloch", "rho_tt_closed", "trace_master"],
        [tcol, rme.rho_tt, bloch_tt, closed, rme.trace],
        extra={"zeno_rate_over_u": zeno_decay_rate(p, n_reg)},
    )


@main.command()
@config_option
@n_option
@uoj_option
@strict_option
@hz_option
@click.option("--t-end", default="100", show_default=True)
@click.option("--eta", multiple=True, type=float, help="detector efficiencies (repeatable)")
@out_option("zenoreg_efficiency")
def efficiency(config, n, u_over_j, strict, hz, t_end, eta, out):
    """Finite detector efficiency sweep of the long-time fidelity."""
    cfg, p, _ = _resolve(config, n, u_over_j, strict)
    etas = list(eta) if eta else [1.0, 0.9, 0.8]
    n_reg = cfg.register_sites
    try:
        t_end = _parse_t_end(t_end, p)
        basis = build_basis(n_reg)
        rho0 = fidelity(perturbative_ground_state(basis, p))
        t = np.linspace(0.0, t_end, 1001)
        curves = [np.asarray(finite_efficiency_fidelity(e, p, n_reg, rho0, t)) for e in etas]
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    name, tcol = _time_column(t, p, hz)
    header = [name, "rho_ns"] + [f"f_eta_{e:g}" for e in etas]
    columns = [tcol, np.asarray(nonselective_fidelity_closed(p, n_reg, rho0, t))] + curves
    manifest = _manifest("efficiency", cfg, p, t_end=t_end, etas=etas)
    _emit(out, manifest, header, columns, extra={"etas": etas, "rho_tt0": rho0})


@main.command()
@config_option
@n_option
@uoj_option
@strict_option
@hz_option
@dt_option
@click.option("--t-end", default="0.5/J", show_default=True)
@click.option("--from-saturated", is_flag=True, help="start from a measurement-saturated state")
@out_option("zenoreg_free")
def free(config, n, u_over_j, strict, hz, dt, t_end, from_saturated, out):
    """Free lattice evolution: closed-form fidelity vs restricted numerics."""
    cfg, p, _ = _resolve(config, n, u_over_j, strict)
    n_reg = cfg.register_sites
    try:
        t_end = _parse_t_end(t_end, p)
        basis = build_basis(n_reg)
        h_free = build_free_hamiltonian(basis, p)
        if from_saturated:
            sat = null_trajectory(p, n_reg, t_end=30.0, model="eliminated")
            amps = sat.final_state.expanded().amplitudes
            psi0 = StateVector(basis, amps / np.linalg.norm(amps))
        else:
            amps = np.zeros(basis.dimension, dtype=np.complex128)
            amps[0] = 1.0
            psi0 = StateVector(basis, amps)
        series = evolve(h_free, psi0, t_end=t_end, dt=dt, max_samples=2001)
        closed = free_evolution_fidelity(n_reg - 1, p.j_over_u, 1.0, p.delta_over_u, series.t)
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    name, tcol = _time_column(series.t, p, hz)
    manifest = _manifest("free", cfg, p, t_end=t_end, dt=dt, from_saturated=from_saturated)
    _emit(
        out,
        manifest,
        [name, "f_closed", "f_numeric"],
        [tcol, np.asarray(closed), series.fidelity],
    )


@main.command()
@config_option
@uoj_option
@strict_option
@hz_option
@dt_option
@click.option("--atoms", type=int, default=5, show_default=True, help="N = M for the oracle")
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default="open", show_default=True)
@click.option("--delta-over-u", type=float, default=None, help="override the trap scale")
@click.option("--t-end", default="1/J", show_default=True)
@out_option("zenoreg_oracle")
def oracle(config, u_over_j, strict, hz, dt, atoms, boundary, delta_over_u, t_end, out):
    """Exact Bose-Hubbard evolution vs truncations and the closed form."""
    cfg, p, _ = _resolve(config, None, u_over_j, strict)
    delta = delta_over_u if delta_over_u is not None else p.delta_over_u
    try:
        t_end = _parse_t_end(t_end, p)
        basis = fock_basis(atoms, atoms, boundary)
        exact = exact_evolve_fidelity(basis, p.j_over_u, 1.0, delta, t_end, dt=dt, max_samples=2001)
        closed = free_evolution_fidelity(atoms - 1, p.j_over_u, 1.0, delta, exact.t)
        header = ["t_over_u", "f_exact", "f_closed"]
        columns = [exact.t, exact.fidelity, np.asarray(closed)]
        extra = {"basis_dim": basis.dimension}
        if atoms % 2 == 1:
            docc = double_occupancy_evolve(atoms, p.j_over_u, 1.0, delta, t_end, dt=dt, max_samples=2001)
            docc_f = np.interp(exact.t, docc.t, docc.fidelity)
            header.insert(2, "f_docc")
            columns.insert(2, docc_f)
            extra["docc_basis_dim"] = atoms * (atoms - 1) + 1
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    name, tcol = _time_column(exact.t, p, hz)
    header[0] = name
    columns[0] = tcol
    manifest = _manifest(
        "oracle", cfg, p, atoms=atoms, boundary=boundary, delta_over_u=delta, t_end=t_end, dt=dt
    )
    _emit(out, manifest, header, columns, extra=extra)


@main.command()
@click.option("--in", "csv_path", required=True, type=click.Path(exists=True), help="input CSV")
@click.option("--x-label", default="", help="x axis label (defaults to first column name)")
@click.option("--y-label", default="", help="y axis label")
@click.option("--title", default="", help="plot title")
@out_option("zenoreg_plot")
def plot(csv_path, x_label, y_label, title, out):
    """Render a CSV time series (first column = x) as an SVG line plot."""
    try:
        with open(csv_path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != len(header) or len(header) < 2:
            raise SvgError("CSV must carry a header row and at least two columns")
        x = data[:, 0]
        series = [(name, x, data[:, i + 1]) for i, name in enumerate(header[1:])]
        svg_path = f"{out}.svg"
        emit_svg(svg_path, series, x_label=x_label or header[0], y_label=y_label, title=title)
    except CONFIG_ERRORS as exc:
        _fail(str(exc))
    manifest = RunManifest(subcommand="plot", parameters={"input": str(csv_path)})
    manifest.outputs = [svg_path]
    write_sidecar(f"{out}.json", manifest)
    click.echo(f"wrote {svg_path}")


if __name__ == "__main__":
    main()
