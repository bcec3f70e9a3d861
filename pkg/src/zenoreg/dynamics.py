"""Time evolution of the measured register.

All rates and energies are in units of U and times in units of 1/U.  Four
levels of description are implemented, from most to least microscopic:

1. Conditioned wavefunction evolution under a non-Hermitian Hamiltonian
   (full model with molecular states, or the eliminated T+S model), used
   for null-measurement trajectories.
2. Jump Monte Carlo ensembles: the standard waiting-time unraveling with a
   single jump class.  A molecular decay dumps the atom pair out of the
   trap, so a jump terminates the trajectory as a register failure.
3. The reduced master equation for (rho_TT, rho_SS, rho_ST) with per-state
   coherence damping kappa_j and uniform population damping 2 kappa.
4. A pseudo two-state Bloch system (u, v, w, x) and its closed-form
   solution rho_TT(t) = rho_TT(0) exp(-Gamma_Z t) with

       Gamma_Z = 8 (n-1) J^2 kappa / ((U+|V_c|)^2 + kappa^2).

Bookkeeping for the two-state reduction: a register of n sites has n-1
bonds, i.e. 2(n-1) pair states.  The collective coupling between |T> and
the symmetric pair mode is g = sqrt(2 * 2(n-1)) J = 2 sqrt(n-1) J, and the
closed-form exponent uses the bond-pair count n-1; with these counts the
integrated Bloch system and the closed form agree exactly.

The integrator throughout is fixed-step RK4.  The full model is stiff
(gamma_M/U is a few thousand), so its default step is 0.02/gamma_M, while
the eliminated model and the master equation resolve the fastest coherence
rotation with 0.01/(U+|V_c|).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .params import DerivedParams
from .register import (
    RestrictedBasis,
    SparseOperator,
    StateVector,
    build_basis,
    build_effective_hamiltonian,
    build_eliminated_hamiltonian,
    coherence_damping_rate,
    pair_state_energy,
    perturbative_ground_state,
)

MAX_OUTPUT_SAMPLES = 5000
NORM_MONOTONE_TOL = 1e-9
ENSEMBLE_CHUNK = 4096  # per-column arithmetic is chunk-invariant; sizing is speed only
DENSE_STEP_DIM = 128  # below this, apply the one-step RK4 matrix densely


class IntegrationError(RuntimeError):
    """Raised when a step size is refused or an integration check fails."""


def full_model_step(p: DerivedParams) -> float:
    """Default RK4 step for the stiff full model."""
    return 0.02 / p.gamma_m_over_u if p.gamma_m_over_u > 0 else 0.01 / (1.0 + p.vc_over_u)


def eliminated_model_step(p: DerivedParams) -> float:
    """Default RK4 step for the eliminated model and the master equation."""
    return 0.01 / (1.0 + p.vc_over_u)


def _plan_grid(t_end: float, dt: float, max_samples: int):
    """Uniform output grid of at most ``max_samples`` points.

    The step count is rounded up to a multiple of the sample stride, and dt
    shrinks accordingly, so the grid always lands exactly on t_end.
    """
    if t_end <= 0 or dt <= 0:
        raise IntegrationError("t_end and dt must be positive")
    max_samples = max(2, min(max_samples, MAX_OUTPUT_SAMPLES))
    n_steps = max(1, math.ceil(t_end / dt))
    n_gaps = min(max_samples - 1, n_steps)
    stride = math.ceil(n_steps / n_gaps)
    n_steps = stride * n_gaps
    return n_steps, stride, t_end / n_steps, n_gaps


def _check_step(op: SparseOperator, dt: float) -> None:
    bound = 0.05 / op.frequency_bound() if op.frequency_bound() > 0 else math.inf
    if dt > bound * (1.0 + 1e-12):
        raise IntegrationError(
            f"dt = {dt:.6g} too large for this operator; require dt <= {bound:.6g}"
        )


def _rk4_factor(matrix, dt: float):
    """Scaled generator A = -i dt H; one RK4 step is the quartic polynomial in A."""
    return matrix * (-1j * dt)


def _rk4_step_inplace(a, psi, tmp):
    k1 = a.dot(psi)
    np.multiply(k1, 0.5, out=tmp)
    tmp += psi
    k2 = a.dot(tmp)
    np.multiply(k2, 0.5, out=tmp)
    tmp += psi
    k3 = a.dot(tmp)
    np.add(psi, k3, out=tmp)
    k4 = a.dot(tmp)
    k2 += k3
    k2 *= 2.0
    k2 += k1
    k2 += k4
    k2 /= 6.0
    psi += k2


def _rk4_step_matrix(matrix, dt: float) -> np.ndarray:
    """Dense one-step RK4 update for a time-independent generator.

    For constant H the staged RK4 update is the fixed polynomial
    I + A + A^2/2 + A^3/6 + A^4/24 with A = -i dt H; applying it as a
    single matrix product avoids the staged temporaries on small systems.
    """
    a = (matrix * (-1j * dt)).toarray()
    a2 = a @ a
    return np.eye(matrix.shape[0], dtype=np.complex128) + a + a2 / 2.0 + a2 @ a / 6.0 + a2 @ a2 / 24.0


@dataclass
class TrajectorySeries:
    """Sampled fidelity and squared norm along one evolution.

    ``energy`` carries the sampled expectation <psi|H|psi>/<psi|psi> where
    the producer tracks it (Hermitian oracle runs); None otherwise.
    """

    t: np.ndarray
    fidelity: np.ndarray
    norm_sq: np.ndarray
    jump_time: float | None = None
    t_sat: float | None = None
    final_state: StateVector | None = None
    energy: np.ndarray | None = None

    def saturation_time(self, level: float = 0.999) -> float | None:
        """First time with F >= level * F(t_end)."""
        target = level * self.fidelity[-1]
        hits = np.nonzero(self.fidelity >= target)[0]
        return float(self.t[hits[0]]) if hits.size else None


def evolve(
    op: SparseOperator,
    psi0: StateVector | np.ndarray,
    t_end: float,
    dt: float | None = None,
    max_samples: int = MAX_OUTPUT_SAMPLES,
    target_index: int = 0,
    enforce_norm_monotone: bool = False,
) -> TrajectorySeries:
    """Fixed-step RK4 integration of i dpsi/dt = H psi.

    ``psi0`` may be a StateVector or a bare amplitude array.  The reported
    fidelity is the conditioned population |psi[target_index]|^2/||psi||^2.
    The step must satisfy dt <= 0.05 / (max |diag| + max off-diagonal row
    sum); too-large steps are refused with the required bound in the
    message.
    """
    amps0 = psi0.amplitudes if isinstance(psi0, StateVector) else np.asarray(psi0)
    if amps0.shape[0] != op.dim:
        raise IntegrationError("state and operator dimensions differ")
    if dt is None:
        dt = 0.05 / op.frequency_bound() if op.frequency_bound() > 0 else t_end
    _check_step(op, dt)
    n_steps, stride, h, n_gaps = _plan_grid(t_end, dt, max_samples)

    a = _rk4_factor(op.matrix, h)
    psi = amps0.astype(np.complex128, copy=True)
    tmp = np.empty_like(psi)

    t = np.linspace(0.0, t_end, n_gaps + 1)
    fid = np.empty(n_gaps + 1)
    norm = np.empty(n_gaps + 1)

    def record(i: int) -> None:
        nsq = float(np.vdot(psi, psi).real)
        norm[i] = nsq
        fid[i] = float(abs(psi[target_index]) ** 2 / nsq) if nsq > 0 else 0.0

    record(0)
    for i in range(1, n_gaps + 1):
        for _ in range(stride):
            _rk4_step_inplace(a, psi, tmp)
        record(i)
        if enforce_norm_monotone and norm[i] > norm[i - 1] + NORM_MONOTONE_TOL:
            raise IntegrationError(
                f"conditioned norm increased at t = {t[i]:.6g} "
                f"({norm[i - 1]:.12g} -> {norm[i]:.12g})"
            )

    final = StateVector(psi0.basis, psi) if isinstance(psi0, StateVector) else None
    return TrajectorySeries(t=t, fidelity=fid, norm_sq=norm, final_state=final)


def _resolve_model(model: str | None, n: int) -> str:
    if model in ("full", "eliminated"):
        return model
    if model in (None, "auto"):
        return "eliminated" if n > 50 else "full"
    raise ValueError(f"unknown model {model!r}")


def null_trajectory(
    p: DerivedParams,
    n: int,
    t_end: float,
    model: str | None = None,
    dt: float | None = None,
    max_samples: int = MAX_OUTPUT_SAMPLES,
) -> TrajectorySeries:
    """Conditioned no-decay trajectory from the perturbative ground state.

    Under continuous pair measurement a null result drives the register
    into |T>; the series carries ``t_sat``, the first time the conditioned
    fidelity reaches 99.9% of its final value.
    """
    model = _resolve_model(model, n)
    basis = build_basis(n)
    ground = perturbative_ground_state(basis, p)
    if model == "full":
        op = build_effective_hamiltonian(basis, p)
        psi0 = ground
        dt = dt if dt is not None else full_model_step(p)
    else:
        op = build_eliminated_hamiltonian(basis, p)
        psi0 = ground.reduced()
        dt = dt if dt is not None else eliminated_model_step(p)
    series = evolve(
        op, psi0, t_end, dt=dt, max_samples=max_samples, enforce_norm_monotone=True
    )
    series.t_sat = series.saturation_time()
    return series


# ---------------------------------------------------------------------------
# jump Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class EnsembleResult:
    """Statistics of a seeded jump Monte Carlo ensemble.

    ``jump_times`` holds one entry per trajectory (NaN if it survived).
    ``uncond_t_population`` estimates the unconditioned target population:
    the normalized |c_T|^2/||psi||^2 of surviving trajectories averaged
    over the whole ensemble with failures contributing zero.  Since a
    survivor's normalized state is deterministic and the survival indicator
    has mean ||psi||^2, this estimator is unbiased for the rho_TT of the
    trace-non-preserving master equation (a failed register holds no
    target population).
    """

    n_traj: int
    seed: int
    model: str
    t: np.ndarray
    survival: np.ndarray
    cond_fidelity: np.ndarray
    uncond_t_population: np.ndarray
    jump_times: np.ndarray

    def jump_histogram(self, bins: int = 50):
        finite = self.jump_times[np.isfinite(self.jump_times)]
        edges = np.linspace(0.0, float(self.t[-1]), bins + 1)
        counts, _ = np.histogram(finite, bins=edges)
        return edges, counts


def _trajectory_threshold(seed: int, index: int) -> float:
    """Waiting-time threshold for trajectory ``index``: one uniform draw
    from an independent stream keyed by (seed, index)."""
    return float(np.random.default_rng([seed, index]).random())


def jump_ensemble(
    p: DerivedParams,
    n: int,
    n_traj: int,
    seed: int,
    t_end: float,
    model: str = "full",
    dt: float | None = None,
    max_samples: int = 501,
    workers: int | None = None,
) -> EnsembleResult:
    """Waiting-time jump Monte Carlo over ``n_traj`` trajectories.

    Each trajectory draws one uniform threshold r from a stream derived
    from (seed, trajectory index) and evolves under the non-Hermitian
    Hamiltonian until ||psi||^2 <= r, which marks a molecular decay: the
    register is lost and the trajectory ends.  Results are bit-identical
    for a given (seed, n_traj, parameters) regardless of the worker count:
    trajectories are processed in fixed-size chunks whose arithmetic is
    independent of scheduling, and merged in index order.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    model = _resolve_model(model, n)
    basis = build_basis(n)
    ground = perturbative_ground_state(basis, p)
    if model == "full":
        op = build_effective_hamiltonian(basis, p)
        psi0 = ground.amplitudes
        dt = dt if dt is not None else full_model_step(p)
    else:
        op = build_eliminated_hamiltonian(basis, p)
        psi0 = ground.reduced().amplitudes
        dt = dt if dt is not None else eliminated_model_step(p)
    _check_step(op, dt)
    n_steps, stride, h, n_gaps = _plan_grid(t_end, dt, max_samples)
    dense_step = op.dim <= DENSE_STEP_DIM
    r_step = _rk4_step_matrix(op.matrix, h) if dense_step else None
    a = None if dense_step else op.matrix * (-1j * h)

    chunk_bounds = [(s, min(s + ENSEMBLE_CHUNK, n_traj)) for s in range(0, n_traj, ENSEMBLE_CHUNK)]

    def run_chunk(bounds):
        start, stop = bounds
        count = stop - start
        thresholds = np.array([_trajectory_threshold(seed, i) for i in range(start, stop)])
        psi = np.tile(psi0[:, None], (1, count))
        tmp = np.empty_like(psi)
        alive = np.ones(count, dtype=bool)
        jump_step = np.full(count, -1, dtype=np.int64)

        alive_count = np.empty(n_gaps + 1, dtype=np.int64)
        cond_sum = np.empty(n_gaps + 1)

        def column_norms():
            return np.einsum("ij,ij->j", psi.real, psi.real) + np.einsum(
                "ij,ij->j", psi.imag, psi.imag
            )

        def record(i):
            norms = column_norms()
            pop = np.abs(psi[0, :]) ** 2
            alive_count[i] = int(alive.sum())
            with np.errstate(invalid="ignore", divide="ignore"):
                cond = np.where(norms > 0, pop / norms, 0.0)
            cond_sum[i] = float(cond[alive].sum())

        record(0)
        step = 0
        for i in range(1, n_gaps + 1):
            for _ in range(stride):
                if dense_step:
                    np.matmul(r_step, psi, out=tmp)
                    psi, tmp = tmp, psi
                else:
                    _rk4_step_inplace(a, psi, tmp)
                step += 1
                norms = column_norms()
                crossed = alive & (norms <= thresholds)
                if crossed.any():
                    jump_step[crossed] = step
                    alive[crossed] = False
            record(i)
        return alive_count, cond_sum, jump_step

    requested = workers if workers is not None else (os.cpu_count() or 1)
    cap = os.environ.get("ZENO_THREADS")
    if cap is not None:
        requested = min(requested, max(1, int(cap)))
    requested = max(1, min(requested, len(chunk_bounds)))

    if requested == 1:
        results = [run_chunk(b) for b in chunk_bounds]
    else:
        with ThreadPoolExecutor(max_workers=requested) as pool:
            results = list(pool.map(run_chunk, chunk_bounds))

    alive_total = sum(r[0] for r in results)
    cond_total = sum(r[1] for r in results)
    jump_steps = np.concatenate([r[2] for r in results])

    t = np.linspace(0.0, t_end, n_gaps + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond_fid = np.where(alive_total > 0, cond_total / alive_total, np.nan)
    jump_times = np.where(jump_steps >= 0, jump_steps * h, np.nan)

    return EnsembleResult(
        n_traj=n_traj,
        seed=seed,
        model=model,
        t=t,
        survival=alive_total / n_traj,
        cond_fidelity=cond_fid,
        uncond_t_population=cond_total / n_traj,
        jump_times=jump_times,
    )


# ---------------------------------------------------------------------------
# reduced master equation
# ---------------------------------------------------------------------------


@dataclass
class ReducedDensityState:
    """Density-matrix components kept after molecular elimination.

    Pair-state entries follow the reduced basis order (per bond: +, -).
    Coherences between different pair states are outside this description.
    """

    rho_tt: float
    rho_ss: np.ndarray
    rho_st: np.ndarray

    def trace(self) -> float:
        return float(self.rho_tt + self.rho_ss.sum())


def ground_reduced_density(basis: RestrictedBasis, p: DerivedParams) -> ReducedDensityState:
    """Density matrix of the perturbative ground state, reduced layout."""
    psi = perturbative_ground_state(basis, p).reduced().amplitudes
    c_t = psi[0]
    c_s = psi[1:]
    return ReducedDensityState(
        rho_tt=float(abs(c_t) ** 2),
        rho_ss=np.abs(c_s) ** 2,
        rho_st=c_s * np.conj(c_t),
    )


@dataclass
class RMESeries:
    t: np.ndarray
    rho_tt: np.ndarray
    rho_ss_sum: np.ndarray
    trace: np.ndarray
    final: ReducedDensityState


def reduced_master_equation(
    p: DerivedParams,
    n: int,
    rho0: ReducedDensityState | None = None,
    t_end: float = 10.0,
    dt: float | None = None,
    max_samples: int = MAX_OUTPUT_SAMPLES,
) -> RMESeries:
    """Integrate the reduced (trace-non-preserving) master equation.

    Per pair state: the T coherence rotates at E(S_j^+-) + |V_c| and decays
    at kappa_j (molecular-detuning denominator); the population decays at
    2 kappa (uniform).  The trace rho_TT + sum rho_SS is nonincreasing.
    """
    basis = build_basis(n)
    if rho0 is None:
        rho0 = ground_reduced_density(basis, p)
    if dt is None:
        dt = eliminated_model_step(p)
    n_b = basis.n_bonds
    if rho0.rho_ss.shape != (2 * n_b,) or rho0.rho_st.shape != (2 * n_b,):
        raise IntegrationError("initial state does not match the register size")

    e_plus_vc = np.empty(2 * n_b)
    kap_coh = np.empty(2 * n_b)
    for j in basis.bonds:
        for sign in (+1, -1):
            idx = basis.reduced_s_index(int(j), sign) - 1
            e_plus_vc[idx] = pair_state_energy(int(j), sign, 1.0, p.delta_over_u) + p.vc_over_u
            kap_coh[idx] = coherence_damping_rate(int(j), sign, p)
    two_kappa = 2.0 * p.kappa_over_u
    sqrt2j = math.sqrt(2.0) * p.j_over_u

    # frequency scale for the step refusal: fastest rotation + damping
    omega_max = float(np.max(e_plus_vc) + np.max(kap_coh) + two_kappa + 4.0 * sqrt2j)
    if dt > 0.05 / omega_max * (1.0 + 1e-12):
        raise IntegrationError(
            f"dt = {dt:.6g} too large for the master equation; require dt <= {0.05 / omega_max:.6g}"
        )

    n_steps, stride, h, n_gaps = _plan_grid(t_end, dt, max_samples)

    rho_tt = float(rho0.rho_tt)
    rho_ss = rho0.rho_ss.astype(np.float64, copy=True)
    rho_st = rho0.rho_st.astype(np.complex128, copy=True)

    def rhs(tt, ss, st):
        im_st = st.imag
        d_st = (-1j * e_plus_vc - kap_coh) * st + (1j * sqrt2j) * (tt - ss)
        d_ss = 2.0 * sqrt2j * im_st - two_kappa * ss
        d_tt = -2.0 * sqrt2j * float(im_st.sum())
        return d_tt, d_ss, d_st

    t = np.linspace(0.0, t_end, n_gaps + 1)
    out_tt = np.empty(n_gaps + 1)
    out_ss = np.empty(n_gaps + 1)
    out_tt[0] = rho_tt
    out_ss[0] = float(rho_ss.sum())

    for i in range(1, n_gaps + 1):
        for _ in range(stride):
            k1 = rhs(rho_tt, rho_ss, rho_st)
            k2 = rhs(rho_tt + 0.5 * h * k1[0], rho_ss + 0.5 * h * k1[1], rho_st + 0.5 * h * k1[2])
            k3 = rhs(rho_tt + 0.5 * h * k2[0], rho_ss + 0.5 * h * k2[1], rho_st + 0.5 * h * k2[2])
            k4 = rhs(rho_tt + h * k3[0], rho_ss + h * k3[1], rho_st + h * k3[2])
            rho_tt += (h / 6.0) * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
            rho_ss += (h / 6.0) * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
            rho_st += (h / 6.0) * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
        out_tt[i] = rho_tt
        out_ss[i] = float(rho_ss.sum())
        if rho_tt < -1e-6 or float(rho_ss.min(initial=0.0)) < -1e-6:
            raise IntegrationError(f"population went negative at t = {t[i]:.6g}")

    return RMESeries(
        t=t,
        rho_tt=out_tt,
        rho_ss_sum=out_ss,
        trace=out_tt + out_ss,
        final=ReducedDensityState(rho_tt=rho_tt, rho_ss=rho_ss, rho_st=rho_st),
    )


# ---------------------------------------------------------------------------
# pseudo-Bloch system and closed forms
# ---------------------------------------------------------------------------


@dataclass
class BlochState:
    """u = Re rho_ST, v = Im rho_ST, w = rho_SS - rho_TT, x = trace."""

    u: float
    v: float
    w: float
    x: float


PURE_TARGET_BLOCH = BlochState(u=0.0, v=0.0, w=-1.0, x=1.0)


@dataclass
class BlochSeries:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    x: np.ndarray

    @property
    def rho_tt(self) -> np.ndarray:
        return 0.5 * (self.x - self.w)

    @property
    def rho_ss(self) -> np.ndarray:
        return 0.5 * (self.x + self.w)


def collective_coupling(p: DerivedParams, n: int) -> float:
    """|T> to symmetric-pair-mode matrix element, 2 sqrt(n-1) J."""
    return math.sqrt(2.0 * 2.0 * (n - 1)) * p.j_over_u


def bloch_evolution(
    p: DerivedParams,
    n: int,
    b0: BlochState = PURE_TARGET_BLOCH,
    t_end: float = 10.0,
    dt: float | None = None,
    max_samples: int = MAX_OUTPUT_SAMPLES,
) -> BlochSeries:
    """Integrate the pseudo two-state Bloch system.

        du/dt = (U+|V_c|) v - kappa u
        dv/dt = -kappa v - (U+|V_c|) u - g w
        dw/dt = -kappa (x+w) + 4 g v
        dx/dt = -kappa (x+w)

    with g the collective coupling (see ``collective_coupling``).  The
    system is linear and time invariant, so the fixed-step RK4 update is a
    constant 4x4 matrix; sample gaps apply its matrix power.
    """
    omega0 = 1.0 + p.vc_over_u
    kappa = p.kappa_over_u
    g = collective_coupling(p, n)
    if dt is None:
        dt = 0.01 / (omega0 + kappa + 4.0 * g)
    if dt > 0.05 / (omega0 + kappa + 4.0 * g) * (1.0 + 1e-12):
        raise IntegrationError("dt too large for the Bloch system")
    n_steps, stride, h, n_gaps = _plan_grid(t_end, dt, max_samples)

    gen = np.array(
        [
            [-kappa, omega0, 0.0, 0.0],
            [-omega0, -kappa, -g, 0.0],
            [0.0, 4.0 * g, -kappa, -kappa],
            [0.0, 0.0, -kappa, -kappa],
        ]
    )
    hg = h * gen
    step = np.eye(4) + hg + hg @ hg / 2.0 + hg @ hg @ hg / 6.0 + hg @ hg @ hg @ hg / 24.0
    gap = np.linalg.matrix_power(step, stride)

    y = np.array([b0.u, b0.v, b0.w, b0.x], dtype=np.float64)
    out = np.empty((n_gaps + 1, 4))
    out[0] = y
    for i in range(1, n_gaps + 1):
        y = gap @ y
        out[i] = y
    t = np.linspace(0.0, t_end, n_gaps + 1)
    return BlochSeries(t=t, u=out[:, 0], v=out[:, 1], w=out[:, 2], x=out[:, 3])


def zeno_decay_rate(p: DerivedParams, n: int) -> float:
    """Nonselective target-population decay rate, units of U.

    Gamma_Z = 8 (n-1) J^2 kappa / ((U+|V_c|)^2 + kappa^2); n-1 is the
    bond-pair count of the n-site register.  Equals 2 g^2 kappa / (...)
    with the collective coupling g, so it matches the integrated Bloch
    system exactly.
    """
    omega0 = 1.0 + p.vc_over_u
    return 8.0 * (n - 1) * p.j_over_u**2 * p.kappa_over_u / (omega0**2 + p.kappa_over_u**2)


def nonselective_fidelity_closed(p: DerivedParams, n: int, rho_tt0: float, t):
    """Closed-form nonselective target population rho_TT(0) e^(-Gamma_Z t).

    Stated validity: kappa/(2 sqrt(n) J) > 1 and t beyond the coherence
    transient ~1/|V_c|.
    """
    return rho_tt0 * np.exp(-zeno_decay_rate(p, n) * np.asarray(t, dtype=np.float64))


def finite_efficiency_fidelity(eta: float, p: DerivedParams, n: int, rho_tt0: float, t):
    """Conditioned fidelity with detector efficiency eta.

    F(eta, t) = eta + (1 - eta) rho_TT^ns(t): undetected decays mix the
    nonselective outcome into the null-result state.  Valid for times past
    both the preparation scale 1/kappa and the coherence transient.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    return eta + (1.0 - eta) * nonselective_fidelity_closed(p, n, rho_tt0, t)
