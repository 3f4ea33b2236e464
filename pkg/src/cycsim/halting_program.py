"""The register-stripping quantum program and its pulsed circuit model.

A program run walks a pair of subgroup-state registers through m_r conditional
units (branch check, halting statement, cyclic translation, conditional pair
transposition) plus one trailing check, returning every legal basis input
(x, y) to the shape |halt=1>|branch=1>|f(x)>|0>.  The step at which the halting
statement fired is written into a dedicated record register; the (output,
record) pairs are pairwise distinct, which is what keeps the whole map a
permutation.  The circuit variant replaces the halting flag with a two-level
control subspace driven by trigger and state-locking pulses, modeled here by a
single leakage unitary with residual amplitude epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gates, hilbert
from .hilbert import (Controlled, GateLedger, GateOp, LocalUnitary, Permutation, Register,
                      RegisterLayout, Sequence, SimulationError, SparseState, adjoint, apply)
from .numtheory import CyclicGroupSpec, DomainError, multiplicative_order


@dataclass(frozen=True)
class ProgramConfig:
    """Largest-subgroup data: order m_r, generator h, and the ambient prime."""

    p: int
    m_r: int
    h: int

    def __post_init__(self):
        if multiplicative_order(self.h, self.p) != self.m_r:
            raise DomainError(f"{self.h} does not have order {self.m_r} mod {self.p}")

    @classmethod
    def from_spec(cls, spec: CyclicGroupSpec) -> "ProgramConfig":
        return cls(spec.p, spec.largest_order, spec.subgroup_generators[-1])

    def f_r(self, x: int) -> int:
        return pow(self.h, x, self.p)

    @property
    def basis_values(self) -> tuple[int, ...]:
        return tuple(self.f_r(x) for x in range(self.m_r))

    @property
    def control_value(self) -> int:
        """First basis value outside the group: used as the circuit control state."""
        return self.p

    @property
    def record_dim(self) -> int:
        return self.m_r + 2  # steps 1..m_r+1 plus the empty value 0

    @property
    def branch_dim(self) -> int:
        return self.m_r + 2


@dataclass(frozen=True)
class HaltRecord:
    """Step at which the halting statement fired (1..m_r+1; the +1 step is the
    trailing check that catches inputs whose pair transposition fires at the
    last unit)."""

    step: int


@dataclass(frozen=True)
class PulseModel:
    """Leakage model for the state-locking pulse: residual amplitude epsilon
    stays on the control state with phase gamma at each locking event; dt0 is
    conversion-interval bookkeeping only."""

    epsilon: float = 0.0
    gamma: float = 0.0
    dt0: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise DomainError("residual amplitude must lie in [0, 1)")


def expected_record(x: int, y: int, m_r: int) -> int:
    """Closed form for the halting step, from the unit-by-unit trace: y = 0
    halts at step 1; otherwise the pair transposition fires at the unique step
    k = -(x+y) mod m_r in {1..m_r} and the statement fires one unit later."""
    if y % m_r == 0:
        return 1
    k = (-(x + y)) % m_r
    if k == 0:
        k = m_r
    return k + 1


def u_r_gate(config: ProgramConfig, f_reg: str, g_reg: str) -> GateOp:
    """For f = h**x, transpose the paired value h**(-x) with 1 in the second
    register; identity elsewhere.  An involution."""
    exponent = {v: x for x, v in enumerate(config.basis_values)}
    values = set(exponent)

    def fl(v):
        fv, gv = v
        x = exponent.get(fv)
        if x is None or gv not in values:
            return v
        partner = config.f_r(-x % config.m_r)
        if gv == partner:
            return (fv, 1)
        if gv == 1:
            return (fv, partner)
        return v

    return Permutation((f_reg, g_reg), fl, fl, label="U_r")


def _halt_gate(config: ProgramConfig, step: int, g_reg: str, nh_reg: str,
               rec_reg: str) -> GateOp:
    """Transposition (g, halt, record) = (1, 0, 0) <-> (0, 1, step): fires the
    halting statement exactly once and stores when it happened."""

    def fl(v):
        if v == (1, 0, 0):
            return (0, 1, step)
        if v == (0, 1, step):
            return (1, 0, 0)
        return v

    return Permutation((g_reg, nh_reg, rec_reg), fl, fl, label=f"HALT_{step}")


def _leak_gate(config: ProgramConfig, pulse: PulseModel, g_reg: str, dim: int) -> GateOp:
    """Locking leak on the {0, c} subspace of the pair register: the freshly
    cleared branch keeps amplitude epsilon on the control state."""
    c = config.control_value
    eps, gam = pulse.epsilon, pulse.gamma
    root = math.sqrt(1.0 - eps * eps)
    mat = np.eye(dim, dtype=complex)
    mat[0, 0] = root
    mat[c, 0] = eps * complex(math.cos(gam), -math.sin(gam))
    mat[0, c] = -eps * complex(math.cos(gam), math.sin(gam))
    mat[c, c] = root
    return LocalUnitary(g_reg, mat, label="P_SL_leak")


@dataclass(frozen=True)
class QpRegs:
    nh: str = "NH"
    bh: str = "BH"
    f: str = "FR"
    g: str = "GR"
    rec: str = "REC"


def make_qp_layout(config: ProgramConfig, regs: QpRegs = QpRegs()) -> RegisterLayout:
    n_dim = 2 ** config.p.bit_length()
    return RegisterLayout([
        Register(regs.nh, 2, "halt"),
        Register(regs.bh, config.branch_dim, "branch"),
        Register(regs.f, n_dim, "work"),
        Register(regs.g, n_dim, "work"),
        Register(regs.rec, config.record_dim, "record"),
    ])


_QP_GATE_CACHE: dict = {}


def qp_gate(config: ProgramConfig, regs: QpRegs, g_dim: int,
            pulse: PulseModel | None = None) -> GateOp:
    """The whole program as one permutation sequence: m_r units of
    [branch check, halting statement, cyclic translation, conditional pair
    transposition] plus the trailing check.  With a pulse model, each halting
    event is followed by the locking leak on the pair register.

    Instances are cached so the compiled permutation tables are shared across
    runs with the same configuration.
    """
    key = (config, regs, g_dim, pulse)
    cached = _QP_GATE_CACHE.get(key)
    if cached is not None:
        return cached
    seq: list[GateOp] = []
    inc_b = gates.set_const(1, regs.bh, config.branch_dim)
    u_b = Controlled((regs.g,), lambda v: v[0] == 1, inc_b, label="U_b")
    u_g = gates.cyclic_shift(config.p, config.h, regs.f, power=1)
    u_rc = Controlled((regs.bh,), lambda v: v[0] == 0,
                      u_r_gate(config, regs.f, regs.g), label="U_r_c")
    for i in range(1, config.m_r + 1):
        seq.append(u_b)
        seq.append(_halt_gate(config, i, regs.g, regs.nh, regs.rec))
        if pulse is not None and pulse.epsilon > 0.0:
            seq.append(Controlled((regs.rec,), lambda v, i=i: v[0] == i,
                                  _leak_gate(config, pulse, regs.g, g_dim),
                                  label="P_SL"))
        seq.append(u_g)
        seq.append(u_rc)
    seq.append(u_b)
    seq.append(_halt_gate(config, config.m_r + 1, regs.g, regs.nh, regs.rec))
    if pulse is not None and pulse.epsilon > 0.0:
        seq.append(Controlled((regs.rec,), lambda v: v[0] == config.m_r + 1,
                              _leak_gate(config, pulse, regs.g, g_dim), label="P_SL"))
    gate = Sequence(tuple(seq), label="Q_p")
    _QP_GATE_CACHE[key] = gate
    return gate


def run_qp(state: SparseState, config: ProgramConfig, regs: QpRegs = QpRegs(),
           ledger: GateLedger | None = None) -> tuple[SparseState, HaltRecord]:
    """Execute the program on a single basis input |0>|0>|f(x)>|g(y)>.

    Superposed inputs are rejected: the halting protocol is defined for basis
    states only, and silently accepting anything else would hide the restriction.
    """
    if not state.is_basis_state():
        raise SimulationError("program input must be a single basis state, "
                              "got a superposition")
    tup = state.sole_tuple()
    lay = state.layout
    if tup[lay.index(regs.nh)] != 0 or tup[lay.index(regs.bh)] != 0:
        raise SimulationError("halt and branch registers must start at 0")
    if tup[lay.index(regs.rec)] != 0:
        raise SimulationError("record register must start empty")
    g_dim = lay.dim(regs.g)
    state = apply(state, qp_gate(config, regs, g_dim), ledger)
    rec = state.register_value(regs.rec)
    return state, HaltRecord(rec)


def run_qc(state: SparseState, config: ProgramConfig, pulse: PulseModel,
           regs: QpRegs = QpRegs(),
           ledger: GateLedger | None = None) -> tuple[SparseState, dict]:
    """Circuit variant: trigger pulse moves the cleared pair state through the
    control level; the locking pulse converts it down, leaving epsilon behind.

    Time-dependent pulse control is simulated procedurally (single-basis input
    only); with epsilon = 0 the register contents reproduce the program output
    exactly.  Returns the state and a report with the fidelity to the ideal
    output.
    """
    if not state.is_basis_state():
        raise SimulationError("circuit input must be a single basis state")
    lay = state.layout
    tup = state.sole_tuple()
    x_val = tup[lay.index(regs.f)]
    g_dim = lay.dim(regs.g)
    c = config.control_value
    eps, gam = pulse.epsilon, pulse.gamma
    root = math.sqrt(1.0 - eps * eps)

    # locking conversion c -> 0 with residue eps left on c (phase gamma)
    lock = np.eye(g_dim, dtype=complex)
    lock[c, c] = eps * complex(math.cos(gam), -math.sin(gam))
    lock[0, c] = root
    lock[c, 0] = root
    lock[0, 0] = -eps * complex(math.cos(gam), math.sin(gam))
    lock_gate = LocalUnitary(regs.g, lock, label="P_SL")

    inc_b = gates.set_const(1, regs.bh, config.branch_dim)
    u_b = Controlled((regs.g,), lambda v: v[0] == 1, inc_b, label="U_b")
    p_t = gates.transposition(1, c, regs.g)
    u_g = gates.cyclic_shift(config.p, config.h, regs.f, power=1)
    u_rc = Controlled((regs.bh,), lambda v: v[0] == 0,
                      u_r_gate(config, regs.f, regs.g), label="U_r_c")

    locked = False
    i_g = lay.index(regs.g)

    def locking_due(s: SparseState) -> bool:
        return s.weight_where(lambda k: k[i_g] == c) > 0.0

    for _ in range(config.m_r):
        state = apply(state, u_b, ledger)
        if not locked:
            state = apply(state, p_t, ledger)
            if locking_due(state):
                state = apply(state, lock_gate, ledger)
                locked = True
        state = apply(state, u_g, ledger)
        state = apply(state, u_rc, ledger)
    state = apply(state, u_b, ledger)
    if not locked:
        state = apply(state, p_t, ledger)
        if locking_due(state):
            state = apply(state, lock_gate, ledger)
            locked = True

    ideal = {regs.bh: 1, regs.f: x_val, regs.g: 0}
    ideal_state = SparseState.basis(lay, ideal)
    fid = hilbert.fidelity(state, ideal_state)
    return state, {"fidelity": fid, "locked": locked, "epsilon": eps}


def reset_flags_gates(config: ProgramConfig, regs: QpRegs) -> list[GateOp]:
    """Return halt and branch flags to 0 after a deterministic program run."""
    return [
        gates.transposition(0, 1, regs.nh),
        adjoint(gates.set_const(1, regs.bh, config.branch_dim)),
    ]


@dataclass(frozen=True)
class StripRegs:
    """Register names for stripping a product state down to one component."""

    nh: str
    bh: str
    comps: tuple[str, ...]
    recs: tuple[str, ...]  # record register for component j sits at recs[j]


def strip_gate(spec: CyclicGroupSpec, keep: int, regs: StripRegs, g_dim: int,
               pulse: PulseModel | None = None) -> GateOp:
    """Remove every component register except `keep` (0-based) by running the
    program on pairs (kept, j); flags are reset between runs, records stay."""
    config = ProgramConfig.from_spec(spec)
    seq: list[GateOp] = []
    for j in range(len(regs.comps)):
        if j == keep:
            continue
        pair = QpRegs(nh=regs.nh, bh=regs.bh, f=regs.comps[keep], g=regs.comps[j],
                      rec=regs.recs[j])
        seq.append(qp_gate(config, pair, g_dim, pulse))
        seq.extend(reset_flags_gates(config, pair))
    return Sequence(tuple(seq), label=f"STRIP_{keep}")


def strip_registers(state: SparseState, keep: int, spec: CyclicGroupSpec,
                    regs: StripRegs, pulse: PulseModel | None = None,
                    ledger: GateLedger | None = None
                    ) -> tuple[SparseState, list[tuple[int, HaltRecord]]]:
    """Apply the stripping pipeline and collect the per-pair halting ledger."""
    g_dim = state.layout.dim(regs.comps[keep])
    state = apply(state, strip_gate(spec, keep, regs, g_dim, pulse), ledger)
    records: list[tuple[int, HaltRecord]] = []
    for j in range(len(regs.comps)):
        if j == keep:
            continue
        records.append((j, HaltRecord(state.register_value(regs.recs[j]))))
    return state, records
