"""Restricted many-body basis and operators for the measured register.

An n-site register (n odd) holds one atom per site in the target state |T>.
The only defects kept are a single atom pair next to its hole.  For each
bond j (connecting sites j and j+1, j = -(n-1)/2 .. (n-1)/2 - 1) there are
two pair-hole orientations and, under the catalysis laser, two
photoassociated molecular states:

    |S_j^+> : pair at site j,   hole at site j+1
    |S_j^-> : pair at site j+1, hole at site j
    |M_j^+->: same defect with the pair bound into a molecule

Basis order is |T> first, then (S_j^+, S_j^-, M_j^+, M_j^-) per bond in
ascending j.  Full dimension 1 + 4(n-1).  Operators that eliminate the
molecular states act on the T+S subspace in the same order with the M
slots dropped (dimension 1 + 2(n-1)).

With the trap offset eps(j) = delta j^2 and |T> defining the zero of
energy, the pair-state energies are E(S_j^+/-) = U -/+ delta (2j+1); all
energies here are in units of U (so U = 1).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse

from .params import DerivedParams

HERMITIAN_TOL = 1e-12


class ModelError(ValueError):
    """Raised for invalid basis or state construction."""


@dataclass(frozen=True)
class RestrictedBasis:
    """Index map over {|T>, |S_j^+->, |M_j^+->} for an n-site register."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 3 or self.n % 2 == 0:
            raise ModelError("register size n must be odd and >= 3")

    @property
    def dimension(self) -> int:
        return 1 + 4 * (self.n - 1)

    @property
    def reduced_dimension(self) -> int:
        """Dimension of the T+S subspace used after molecular elimination."""
        return 1 + 2 * (self.n - 1)

    @property
    def n_bonds(self) -> int:
        return self.n - 1

    @cached_property
    def bonds(self) -> np.ndarray:
        half = (self.n - 1) // 2
        return np.arange(-half, half)

    @cached_property
    def sites(self) -> np.ndarray:
        half = (self.n - 1) // 2
        return np.arange(-half, half + 1)

    index_t: int = field(default=0, init=False, repr=False)

    def _bond_pos(self, j: int) -> int:
        pos = j + (self.n - 1) // 2
        if not 0 <= pos < self.n_bonds:
            raise ModelError(f"bond label {j} out of range for n={self.n}")
        return pos

    def s_index(self, j: int, sign: int) -> int:
        """Full-basis index of |S_j^+> (sign=+1) or |S_j^-> (sign=-1)."""
        return 1 + 4 * self._bond_pos(j) + (0 if sign > 0 else 1)

    def m_index(self, j: int, sign: int) -> int:
        return 1 + 4 * self._bond_pos(j) + (2 if sign > 0 else 3)

    def reduced_s_index(self, j: int, sign: int) -> int:
        """Index of |S_j^+-> in the T+S (eliminated) layout."""
        return 1 + 2 * self._bond_pos(j) + (0 if sign > 0 else 1)

    def label(self, index: int) -> str:
        if index == 0:
            return "T"
        pos, slot = divmod(index - 1, 4)
        j = pos - (self.n - 1) // 2
        return ("S%+d+" % j, "S%+d-" % j, "M%+d+" % j, "M%+d-" % j)[slot]


def build_basis(n: int) -> RestrictedBasis:
    return RestrictedBasis(n)


def pair_state_energy(j: int, sign: int, u: float, delta: float) -> float:
    """Energy of |S_j^+-> relative to |T>: U -/+ delta (2j+1)."""
    return u - sign * delta * (2 * j + 1)


@dataclass
class SparseOperator:
    """Complex sparse matrix in coordinate form with deterministic ordering.

    Only the matrix-vector product is needed on large instances; a CSR
    matrix is cached for it.
    """

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    hermitian: bool = False

    @classmethod
    def from_triplets(cls, dim: int, triplets, hermitian: bool = False) -> "SparseOperator":
        if triplets:
            rows, cols, vals = zip(*triplets)
        else:
            rows, cols, vals = (), (), ()
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.complex128)
        if rows.size and (rows.min() < 0 or rows.max() >= dim or cols.min() < 0 or cols.max() >= dim):
            raise ModelError("sparse entry index out of range")
        # fixed (row, col) ordering so serialized operators are reproducible
        order = np.lexsort((cols, rows))
        op = cls(dim=dim, rows=rows[order], cols=cols[order], vals=vals[order], hermitian=hermitian)
        if hermitian and not op.is_hermitian():
            raise ModelError("operator marked hermitian is not")
        return op

    @cached_property
    def matrix(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.dim, self.dim)
        )

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix.dot(x)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        diff = self.matrix - self.matrix.conjugate().transpose()
        if diff.nnz == 0:
            return True
        return np.max(np.abs(diff.data)) <= tol

    def frequency_bound(self) -> float:
        """max |diagonal| + max off-diagonal row sum; bounds the spectrum."""
        diag = np.abs(self.matrix.diagonal())
        absmat = scipy.sparse.csr_matrix(
            (np.abs(self.vals), (self.rows, self.cols)), shape=(self.dim, self.dim)
        )
        row_sums = np.asarray(absmat.sum(axis=1)).ravel() - diag
        return float(diag.max(initial=0.0) + row_sums.max(initial=0.0))


@dataclass
class StateVector:
    """Complex amplitudes over a restricted basis (full or T+S layout)."""

    basis: RestrictedBasis
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape not in ((self.basis.dimension,), (self.basis.reduced_dimension,)):
            raise ModelError(
                f"amplitude length {self.amplitudes.shape} matches neither the full "
                f"({self.basis.dimension}) nor reduced ({self.basis.reduced_dimension}) layout"
            )
        if not np.all(np.isfinite(self.amplitudes.view(np.float64))):
            raise ModelError("state amplitudes must be finite")

    @property
    def is_reduced(self) -> bool:
        return self.amplitudes.shape[0] == self.basis.reduced_dimension

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes.copy())

    def reduced(self) -> "StateVector":
        """Project onto the T+S subspace (drops molecular amplitudes)."""
        if self.is_reduced:
            return self.copy()
        idx = np.zeros(self.basis.reduced_dimension, dtype=np.int64)
        for pos in range(self.basis.n_bonds):
            idx[1 + 2 * pos] = 1 + 4 * pos
            idx[2 + 2 * pos] = 2 + 4 * pos
        return StateVector(self.basis, self.amplitudes[idx])

    def expanded(self) -> "StateVector":
        """Embed a T+S state into the full layout (zero molecular amplitudes)."""
        if not self.is_reduced:
            return self.copy()
        amps = np.zeros(self.basis.dimension, dtype=np.complex128)
        amps[0] = self.amplitudes[0]
        for pos in range(self.basis.n_bonds):
            amps[1 + 4 * pos] = self.amplitudes[1 + 2 * pos]
            amps[2 + 4 * pos] = self.amplitudes[2 + 2 * pos]
        return StateVector(self.basis, amps)

    def to_json(self) -> str:
        amps = [[float(a.real), float(a.imag)] for a in self.amplitudes]
        return json.dumps({"n": self.basis.n, "amplitudes": amps})

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        data = json.loads(text)
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]], dtype=np.complex128)
        return cls(RestrictedBasis(int(data["n"])), amps)


def fidelity(psi: StateVector) -> float:
    """Conditioned target-state fidelity |c_T|^2 / ||psi||^2."""
    norm = psi.norm_sq()
    if norm <= 0.0:
        raise ModelError("fidelity undefined for a zero-norm state")
    return float(abs(psi.amplitudes[0]) ** 2 / norm)


def _interaction_triplets(basis: RestrictedBasis, p: DerivedParams):
    """Triplets of the rotating-frame Hamiltonian with molecular states kept."""
    vc, j_hop, omega_m, delta = p.vc_over_u, p.j_over_u, p.omega_m_over_u, p.delta_over_u
    triplets = [(0, 0, 0.0 + 0.0j)]
    for j in basis.bonds:
        for sign in (+1, -1):
            e_s = pair_state_energy(int(j), sign, 1.0, delta)
            s = basis.s_index(int(j), sign)
            m = basis.m_index(int(j), sign)
            triplets.append((s, s, complex(vc + e_s)))
            triplets.append((m, m, complex(vc + e_s - 1.0)))
            triplets.append((0, s, complex(-math.sqrt(2.0) * j_hop)))
            triplets.append((s, 0, complex(-math.sqrt(2.0) * j_hop)))
            triplets.append((s, m, complex(omega_m / 2.0)))
            triplets.append((m, s, complex(omega_m / 2.0)))
    return triplets


def build_interaction_hamiltonian(basis: RestrictedBasis, p: DerivedParams) -> SparseOperator:
    """Rotating-frame Hamiltonian over T, S and M states (units of U).

    Diagonal: 0 for T, |V_c| + E(S_j^+-) for S, the same minus U for M.
    Off-diagonal: -sqrt(2) J between T and each S, Omega_M/2 between each
    S and its M partner.
    """
    return SparseOperator.from_triplets(
        basis.dimension, _interaction_triplets(basis, p), hermitian=True
    )


def build_effective_hamiltonian(basis: RestrictedBasis, p: DerivedParams) -> SparseOperator:
    """Non-Hermitian Hamiltonian for null-result conditioning.

    Equals the interaction Hamiltonian with -i gamma_M/2 added to every
    molecular diagonal; norm loss under this operator is the accumulated
    decay probability.
    """
    triplets = _interaction_triplets(basis, p)
    for j in basis.bonds:
        for sign in (+1, -1):
            m = basis.m_index(int(j), sign)
            triplets.append((m, m, -0.5j * p.gamma_m_over_u))
    return SparseOperator.from_triplets(basis.dimension, triplets, hermitian=False)


def build_free_hamiltonian(basis: RestrictedBasis, p: DerivedParams) -> SparseOperator:
    """Lattice Hamiltonian with the catalysis laser off (full layout).

    T and S states only: diagonal 0 and E(S_j^+-), couplings -sqrt(2) J;
    molecular rows are identically zero.
    """
    j_hop, delta = p.j_over_u, p.delta_over_u
    triplets = [(0, 0, 0.0 + 0.0j)]
    for j in basis.bonds:
        for sign in (+1, -1):
            s = basis.s_index(int(j), sign)
            triplets.append((s, s, complex(pair_state_energy(int(j), sign, 1.0, delta))))
            triplets.append((0, s, complex(-math.sqrt(2.0) * j_hop)))
            triplets.append((s, 0, complex(-math.sqrt(2.0) * j_hop)))
    return SparseOperator.from_triplets(basis.dimension, triplets, hermitian=True)


def coherence_damping_rate(j: int, sign: int, p: DerivedParams) -> float:
    """Damping rate of the S_j^+- to T coherence after molecular elimination.

    kappa_j = (Omega_M^2 gamma_M / 8) / ((|V_c| + E(S_j^+-) - U)^2 + (gamma_M/2)^2)
    """
    e_s = pair_state_energy(j, sign, 1.0, p.delta_over_u)
    detuning = p.vc_over_u + e_s - 1.0
    return (p.omega_m_over_u**2 * p.gamma_m_over_u / 8.0) / (
        detuning**2 + (p.gamma_m_over_u / 2.0) ** 2
    )


def build_eliminated_hamiltonian(basis: RestrictedBasis, p: DerivedParams) -> SparseOperator:
    """Non-Hermitian T+S Hamiltonian with molecular states eliminated.

    Each pair state acquires the diagonal |V_c| + E(S_j^+-) - i kappa_j.
    Valid for Omega_M/gamma_M << 1; a violation warns but still builds.
    """
    if p.gamma_m_over_u > 0 and p.omega_m_over_u / p.gamma_m_over_u >= 0.1:
        warnings.warn(
            "molecular elimination outside its validity range "
            f"(Omega_M/gamma_M = {p.omega_m_over_u / p.gamma_m_over_u:.3g} >= 0.1)",
            stacklevel=2,
        )
    vc, j_hop, delta = p.vc_over_u, p.j_over_u, p.delta_over_u
    triplets = [(0, 0, 0.0 + 0.0j)]
    for j in basis.bonds:
        for sign in (+1, -1):
            s = basis.reduced_s_index(int(j), sign)
            e_s = pair_state_energy(int(j), sign, 1.0, delta)
            kappa_j = coherence_damping_rate(int(j), sign, p)
            triplets.append((s, s, complex(vc + e_s, -kappa_j)))
            triplets.append((0, s, complex(-math.sqrt(2.0) * j_hop)))
            triplets.append((s, 0, complex(-math.sqrt(2.0) * j_hop)))
    hermitian = p.omega_m_over_u == 0.0 or p.gamma_m_over_u == 0.0
    return SparseOperator.from_triplets(basis.reduced_dimension, triplets, hermitian=hermitian)


def perturbative_ground_state(basis: RestrictedBasis, p: DerivedParams) -> StateVector:
    """First-order ground state of the free Hamiltonian (full layout).

    c_T = 1 and c_{S_j^+-} = sqrt(2) J / E(S_j^+-), then normalized;
    molecular amplitudes are zero.  Requires every pair-state energy to be
    positive, i.e. delta (2j+1) < U across the register.
    """
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    amps[0] = 1.0
    for j in basis.bonds:
        for sign in (+1, -1):
            e_s = pair_state_energy(int(j), sign, 1.0, p.delta_over_u)
            if e_s <= 0.0:
                raise ModelError(
                    f"pair-state energy E(S_{int(j):+d}{'+' if sign > 0 else '-'}) = {e_s:.3g} U "
                    "is not positive; perturbation theory invalid"
                )
            amps[basis.s_index(int(j), sign)] = math.sqrt(2.0) * p.j_over_u / e_s
    amps /= np.linalg.norm(amps)
    return StateVector(basis, amps)
