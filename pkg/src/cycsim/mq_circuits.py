"""Highest-order multiple-quantum operators and the circuits built from them:
exact and Trotterized two-level rotations between |00...0> and |11...1>,
membership/disambiguation tests, solution verification, and the per-subspace
trial search loop.

Spin conventions: qubit k = 1 is the least significant bit of the register
index; |0> is the +1/2 eigenstate of I_kz.  Dense 2^n matrices throughout
(n <= 12), applied through the sparse engine as local unitaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import gates, hilbert
from .hilbert import GateLedger, GateOp, LocalUnitary, RegisterLayout, SparseState, SimulationError
from .numtheory import CyclicGroupSpec, DomainError

MAX_QUBITS = 12

_I2 = np.eye(2, dtype=complex)
_IPLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # I+|1> = |0>
_IMINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # I-|0> = |1>
_IX = (_IPLUS + _IMINUS) / 2
_IY = (_IPLUS - _IMINUS) / 2j
_IZ = np.array([[0.5, 0], [0, -0.5]], dtype=complex)


@dataclass(frozen=True)
class SpinConventions:
    """Operator builders for an n-qubit register (qubit 1 least significant)."""

    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise DomainError(f"qubit count {self.n} outside 1..{MAX_QUBITS}")

    def single(self, k: int, op: np.ndarray) -> np.ndarray:
        """op on qubit k, identity elsewhere."""
        if not 1 <= k <= self.n:
            raise DomainError(f"qubit index {k} outside 1..{self.n}")
        out = np.array([[1.0 + 0j]])
        for j in range(self.n, 0, -1):  # most significant first in the kron chain
            out = np.kron(out, op if j == k else _I2)
        return out

    def ix(self, k: int) -> np.ndarray:
        return self.single(k, _IX)

    def iy(self, k: int) -> np.ndarray:
        return self.single(k, _IY)

    def iz(self, k: int) -> np.ndarray:
        return self.single(k, _IZ)

    def iplus(self, k: int) -> np.ndarray:
        return self.single(k, _IPLUS)

    def iminus(self, k: int) -> np.ndarray:
        return self.single(k, _IMINUS)

    def iz_total(self) -> np.ndarray:
        return sum(self.iz(k) for k in range(1, self.n + 1))

    def product_chain(self, op_builder: Callable[[int], np.ndarray]) -> np.ndarray:
        out = np.eye(2**self.n, dtype=complex)
        for k in range(1, self.n + 1):
            out = out @ op_builder(k)
        return out


@dataclass(frozen=True)
class TransitionReport:
    probability: float
    verdict: str  # member | non_member | is_zero | is_Nminus1

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise SimulationError("probability outside [0, 1]")


def q_n_operator(n: int, axis: str) -> np.ndarray:
    """Hermitian operator coupling only |00...0> and |11...1>."""
    spins = SpinConventions(n)
    up = spins.product_chain(spins.iplus)
    down = spins.product_chain(spins.iminus)
    if axis == "x":
        return (up + down) / 2
    if axis == "y":
        return (up - down) / 2j
    raise DomainError(f"axis must be x or y, got {axis!r}")


def u_ny_matrix(n: int, theta: float) -> np.ndarray:
    """exp(-i 2 theta Q_ny): plane rotation in span{|0...0>, |1...1>}."""
    N = 2**n
    mat = np.eye(N, dtype=complex)
    mat[0, 0] = math.cos(theta)
    mat[N - 1, N - 1] = math.cos(theta)
    mat[N - 1, 0] = math.sin(theta)
    mat[0, N - 1] = -math.sin(theta)
    return mat


def u_ny_exact(n: int, theta: float, reg: str) -> GateOp:
    if not -math.pi <= theta <= math.pi:
        raise DomainError("rotation angle outside [-pi, pi]")
    return LocalUnitary(reg, u_ny_matrix(n, theta), label=f"UNY_{n}", cost_class="arith")


def c_t_matrix(n: int, t: int, theta: float) -> np.ndarray:
    mat = np.eye(2**n, dtype=complex)
    mat[t, t] = np.exp(-1j * theta)
    return mat


def u_ny_trotter_matrix(n: int, theta: float, m: int) -> np.ndarray:
    """Product-formula approximation of exp(-i 2 theta Q_ny) with O(1/m) error."""
    if m < 1:
        raise DomainError("at least one product step required")
    spins = SpinConventions(n)
    N = 2**n
    ix_chain = spins.product_chain(spins.ix)
    phi = math.pi / (2 * n)
    d0 = np.zeros((N, N), dtype=complex)
    d0[0, 0] = 1.0
    c0 = np.eye(N, dtype=complex) - 2 * d0  # C_0(pi)
    g = _expm_i_herm(ix_chain, -theta * (2 ** (n - 1)) / m)
    step = c0 @ g @ c0.conj().T @ g.conj().T
    core = np.linalg.matrix_power(step, m)
    ez = _expm_i_herm(spins.iz_total(), phi)
    return ez @ core @ ez.conj().T


def _expm_i_herm(h: np.ndarray, c: float) -> np.ndarray:
    """exp(1j * c * h) for Hermitian h, via eigendecomposition (exactly unitary)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * c * w)) @ v.conj().T


def u_ny_trotter(n: int, theta: float, m: int, reg: str) -> GateOp:
    return LocalUnitary(reg, u_ny_trotter_matrix(n, theta, m), label=f"UNY_TROT_{n}_{m}")


def trotter_error(n: int, theta: float, m: int) -> float:
    """Largest singular value of (product formula - exact)."""
    diff = u_ny_trotter_matrix(n, theta, m) - u_ny_matrix(n, theta)
    return float(np.linalg.norm(diff, 2))


def _single_register_state(n: int) -> tuple[RegisterLayout, SparseState]:
    layout = RegisterLayout([hilbert.Register("q", 2**n, "work")])
    return layout, SparseState.basis(layout)


def _run_conjugated(n: int, rotations: list[GateOp], ledger: GateLedger | None) -> SparseState:
    """exp(+i pi/2 Q_ny) . rotations . exp(-i pi/2 Q_ny) applied to the ground state."""
    layout, state = _single_register_state(n)
    half = u_ny_exact(n, math.pi / 4, "q")          # exp(-i pi/2 Q_ny)
    state = hilbert.apply(state, half, ledger)
    for rot in rotations:
        state = hilbert.apply(state, rot, ledger)
    state = hilbert.apply(state, hilbert.adjoint(half), ledger)
    return state


def membership_circuit(t_rotation: GateOp, n: int, theta: float,
                       ledger: GateLedger | None = None) -> TransitionReport:
    """Probability of reaching |1...1> from the ground state when the selective
    rotation is sandwiched between the two-level half rotations.

    Equals (1 - cos theta)/2 when the rotated basis is 0 or N-1, else 0.
    """
    state = _run_conjugated(n, [t_rotation], ledger)
    top = (2**n - 1,)
    prob = abs(state.entries.get(top, 0.0)) ** 2
    verdict = "member" if prob > 0.5 - 1e-9 else "non_member"
    return TransitionReport(prob, verdict)


def disambiguate_circuit(t_rotation_neg: GateOp, n: int,
                         ledger: GateLedger | None = None) -> TransitionReport:
    """Given a membership hit, decide ground vs highest: C_0(pi/2) then the
    candidate rotation at -pi/2 inside the same conjugation."""
    c0 = gates.selective_phase({0: math.pi / 2}, "q", label="C_0")
    state = _run_conjugated(n, [c0, t_rotation_neg], ledger)
    top = (2**n - 1,)
    prob = abs(state.entries.get(top, 0.0)) ** 2
    verdict = "is_Nminus1" if prob > 0.5 else "is_zero"
    return TransitionReport(prob, verdict)


def u_or_matrix(rep) -> np.ndarray:
    """Basis-relabeling rotation: pi x-rotations on every bit set in the rep.

    Conjugating a selective rotation C_s by this operator moves it to basis
    s XOR value (up to global phase); bits at +1 contribute identity factors.
    """
    spins = SpinConventions(rep.n)
    out = np.eye(2**rep.n, dtype=complex)
    for k, bit in enumerate(rep.bits, start=1):
        if bit:
            out = out @ _expm_i_herm(spins.ix(k), math.pi)
    return out


def u_or(rep, reg: str) -> GateOp:
    return LocalUnitary(reg, u_or_matrix(rep), label="U_OR")


def verify_solution(candidate: int, oracle_for_theta: Callable[[float], GateOp], n: int,
                    ledger: GateLedger | None = None) -> bool:
    """Two-stage check that `candidate` is the marked basis value, using at most
    two oracle calls: membership at theta = pi, then disambiguation at -pi/2.

    The oracle factory must return the selective rotation of the hidden value on
    register "q" for a requested angle.
    """
    from .oracle import binary_rep

    conj = u_or(binary_rep(candidate, n), "q")
    conj_adj = hilbert.adjoint(conj)

    def dressed(theta: float) -> GateOp:
        return hilbert.Sequence((conj_adj, oracle_for_theta(theta), conj), label="C_t")

    stage1 = membership_circuit(dressed(math.pi), n, math.pi, ledger)
    if stage1.verdict != "member":
        return False
    stage2 = disambiguate_circuit(dressed(-math.pi / 2), n, ledger)
    return stage2.verdict == "is_zero"


def trial_circuit_prob(state: SparseState, search_reg: str, n: int, spec: CyclicGroupSpec,
                       x: int, aux_oracle: GateOp,
                       ledger: GateLedger | None = None) -> tuple[float, SparseState]:
    """One search trial: dress the two-level superposition so its ground branch
    becomes the x-th subgroup state, call the auxiliary oracle once, undress, and
    read the |1...1> probability.  Returns the probability and the post-trial state.
    """
    N = 2**n
    h_r = spec.subgroup_generators[-1]
    half = u_ny_exact(n, math.pi / 4, search_reg)
    f1 = gates.transposition(0, 1, search_reg)          # fixes the top state
    shift = gates.cyclic_shift(spec.p, h_r, search_reg, power=x)
    state = hilbert.apply(state, half, ledger)
    state = hilbert.apply(state, f1, ledger)
    state = hilbert.apply(state, shift, ledger)
    state = hilbert.apply(state, aux_oracle, ledger)
    state = hilbert.apply(state, hilbert.adjoint(shift), ledger)
    state = hilbert.apply(state, hilbert.adjoint(f1), ledger)
    state = hilbert.apply(state, hilbert.adjoint(half), ledger)
    i = state.layout.index(search_reg)
    prob = state.weight_where(lambda k: k[i] == N - 1)
    return prob, state


def subspace_search(aux_oracle: GateOp, spec: CyclicGroupSpec, k: int, state: SparseState,
                    search_reg: str, n: int, threshold: float = 0.5,
                    ledger: GateLedger | None = None) -> tuple[int, SparseState, dict]:
    """Try subgroup indices x = 0, 1, ... until the highest-state probability
    crosses the threshold; at most m_r trials, one oracle call each.

    Ground and highest states of the search register sit outside the subgroup
    state space (asserted), so the inert |1...1> branch survives the dressing.
    """
    m_r = spec.largest_order
    h_r = spec.subgroup_generators[-1]
    N = 2**n
    sub_values = {pow(h_r, x, spec.p) for x in range(m_r)}
    if 0 in sub_values or N - 1 in sub_values:
        raise SimulationError("ground/highest state collides with the subgroup space")
    probs: list[float] = []
    found: int | None = None
    for x in range(m_r):
        prob, state = trial_circuit_prob(state, search_reg, n, spec, x, aux_oracle, ledger)
        probs.append(prob)
        if prob > threshold:
            found = x
            # measured outcome is the highest state; return the register to 0
            state = hilbert.apply(state, gates.transposition(0, N - 1, search_reg), ledger)
            break
    if found is None:
        raise SimulationError(
            f"search fault: no trial probability above {threshold} (component {k})")
    info = {"trial_probabilities": probs, "oracle_calls": len(probs),
            "max_probability": max(probs)}
    return found, state, info
