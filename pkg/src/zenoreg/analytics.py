"""Closed-form results for free evolution and preparation statistics.

The symbol ``n_pairs`` below is the bond-pair count of the register: an
n-site register has n-1 bonds, each contributing one +/- pair of defect
states.  Callers holding a register size pass ``n - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import DerivedParams, ParameterError
from .register import build_basis, fidelity, perturbative_ground_state

_SIN_LIMIT_EPS = 1e-9


@dataclass(frozen=True)
class PreparationStats:
    """Preparation time scale (units of 1/U) and failure probability."""

    t_prep: float
    p_fail: float


def _sine_ratio(n_pairs: int, delta: float, t: np.ndarray) -> np.ndarray:
    """sin(delta (n_pairs - 1) t) / sin(delta t) with removable singularities.

    Where sin(delta t) vanishes the analytic limit
    (n_pairs - 1) cos(delta (n_pairs - 1) t) / cos(delta t) is used, which
    also covers delta = 0.
    """
    k = n_pairs - 1
    arg = delta * t
    num = np.sin(k * arg)
    den = np.sin(arg)
    singular = np.abs(den) < _SIN_LIMIT_EPS
    safe_den = np.where(singular, 1.0, den)
    ratio = num / safe_den
    limit = k * np.cos(k * arg) / np.cos(arg)
    return np.where(singular, limit, ratio)


def free_evolution_fidelity(n_pairs: int, j: float, u: float, delta: float, t):
    """Target fidelity under free lattice evolution from |T>.

    F(t) = 1 - 8 (J/U)^2 (n - cos(U t) (1 + sin(delta (n-1) t)/sin(delta t)))

    with n the bond-pair count.  First-order result, valid for
    delta/U << 1 and t < 1/J.  At delta = 0 this reduces to
    1 - 8 n (J/U)^2 (1 - cos(U t)).
    """
    t = np.asarray(t, dtype=np.float64)
    ratio = _sine_ratio(n_pairs, delta, t)
    jr = j / u
    f = 1.0 - 8.0 * jr**2 * (n_pairs - np.cos(u * t) * (1.0 + ratio))
    return f if f.shape else float(f)


def time_averaged_infidelity(n_pairs: int, j: float, u: float) -> float:
    """Cycle-averaged deviation from perfect fidelity, 8 n (J/U)^2."""
    return 8.0 * n_pairs * (j / u) ** 2


def perturbative_ground_energy(n_pairs_2: int, j: float, u: float) -> float:
    """Second-order ground-state energy -4 N J^2 / U.

    N counts the bonds contributing +/- pair excitations: the number of
    atoms for a commensurate periodic chain, or n-1 for the open register.
    """
    if u <= 0:
        raise ParameterError("u must be > 0")
    return -4.0 * n_pairs_2 * j**2 / u


def preparation_stats(p: DerivedParams, n: int) -> PreparationStats:
    """Preparation time 1/kappa and failure probability 1 - rho_TT(0)."""
    if p.kappa_over_u <= 0:
        raise ParameterError("preparation time undefined for kappa = 0")
    basis = build_basis(n)
    ground = perturbative_ground_state(basis, p)
    return PreparationStats(
        t_prep=1.0 / p.kappa_over_u,
        p_fail=1.0 - fidelity(ground),
    )
