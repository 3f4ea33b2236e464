"""Construction of the discrete-log unitary: the inversion of modular
exponentiation built through a staged state sequence with Euler filtering and
two amplitude-amplification rounds, then the full log gate as
(forward mod-exp)+ . SWAP . (inversion sequence).

The whole sequence is built from the group data alone, covariantly in the work
register, so one gate maps |g**s mod p> -> |s> for every s simultaneously (and
hence acts linearly on superpositions, up to a common sector phase from the
amplification rounds).  The double-variable modular exponential reads its base
from the work register; both amplification reflections are realized as
conjugated selective phases, never reading the index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import gates, hilbert
from .hilbert import (GateLedger, GateOp, PhaseFn, Register, RegisterLayout, Sequence,
                      SimulationError, SparseState, adjoint, apply)
from .numtheory import CyclicGroupSpec, DomainError, classical_dlog, euler_totient, factorize

STAGES = ("psi0", "psi1", "psi2", "psi3", "psi3s-weight", "psi4s", "psi5s",
          "psi6s", "psi7s", "final")


@dataclass(frozen=True)
class DlogRegs:
    """Register names used by the pipeline inside a host layout."""

    w: str = "W"      # work register: the group element (and the instance data)
    x: str = "X"      # first index register
    y: str = "Y"      # second index register
    f: str = "F"      # functional register holding b**x * g**y mod p
    out: str = "OUT"  # receives the recovered index, kept to the end
    t: str = "T"      # comparison temporary for the good reflection
    e: str = "E"      # temporary for the Euler-power filter

    def all(self) -> tuple[str, ...]:
        return (self.w, self.x, self.y, self.f, self.out, self.t, self.e)

    def aux(self) -> tuple[str, ...]:
        return (self.x, self.y, self.f, self.out, self.t, self.e)


@dataclass
class PipelineTrace:
    """Per-stage diagnostics: (stage, fidelity-to-analytic-target or None,
    support size, gate/oracle counts so far)."""

    entries: list[dict] = field(default_factory=list)

    def record(self, stage: str, fidelity: float | None, support: int,
               ledger: GateLedger | None) -> None:
        if stage not in STAGES:
            raise SimulationError(f"unknown pipeline stage {stage!r}")
        counts = ledger.counts_by_class() if ledger is not None else {}
        self.entries.append({"stage": stage, "fidelity": fidelity,
                             "support": support, "gate_counts": counts})

    def as_dict(self) -> list[dict]:
        return list(self.entries)


def register_dim(p: int) -> int:
    """Uniform register size 2**n with n = floor(log2 p) + 1; holds Z_p plus
    the out-of-group control value p and the top state 2**n - 1."""
    n = p.bit_length()
    return 2**n


def make_dlog_layout(spec: CyclicGroupSpec, regs: DlogRegs = DlogRegs()) -> RegisterLayout:
    N = register_dim(spec.p)
    return RegisterLayout([
        Register(regs.w, N, "work"),
        Register(regs.x, N, "aux"),
        Register(regs.y, N, "aux"),
        Register(regs.f, N, "aux"),
        Register(regs.out, N, "aux"),
        Register(regs.t, N, "aux"),
        Register(regs.e, N, "aux"),
    ])


# --- stage gates -------------------------------------------------------------

def _psi1_gates(spec: CyclicGroupSpec, regs: DlogRegs) -> list[GateOp]:
    p, g = spec.p, spec.g
    return [
        gates.qft(p - 1, regs.x),
        gates.qft(p - 1, regs.y),
        gates.work_mod_exp(g, p, regs.x, regs.y, regs.w, regs.f),
    ]


def _psi2_gates(spec: CyclicGroupSpec, regs: DlogRegs) -> list[GateOp]:
    p = spec.p
    return [
        gates.qft(p - 1, regs.x),
        gates.qft(p - 1, regs.y),
        gates.swap_regs(regs.x, regs.y),
    ]


def _euler_gates(spec: CyclicGroupSpec, regs: DlogRegs) -> list[GateOp]:
    """Load l**phi(p-1) * (l s) into OUT via a powered temporary: coprime l
    components then hold the bare index there."""
    m = spec.p - 1
    e = euler_totient(factorize(m)) - 1
    pw = gates.pow_const(e, m, regs.x, regs.e)
    return [pw, gates.mul3(m, regs.e, regs.y, regs.out), adjoint(pw)]


def good_rotation_stage1(spec: CyclicGroupSpec, regs: DlogRegs, phi: float) -> GateOp:
    """Selective rotation of the Euler-filtered components: compare the work
    register against the candidate index via a conditional group translation,
    rotate the |1> comparison outcome, and uncompute.

    The rotation is additionally conditioned on the first index register being
    coprime to p-1: these are exactly the components the filter certifies, and
    accidental fixed points of the Euler power map must not be rotated or the
    deterministic amplification schedule would overshoot for special indices.
    """
    p, g, m = spec.p, spec.g, spec.p - 1
    N = register_dim(p)
    load = gates.add_mod(N, regs.w, regs.t)
    shift = gates.cyclic_shift(p, g, regs.t, power=-1, control=regs.out)
    inner = gates.selective_phase({1: phi}, regs.t, label="C_1", cost_class="reflection")
    rot = hilbert.Controlled((regs.x,), lambda v: math.gcd(v[0], m) == 1, inner,
                             label="C_good")
    return Sequence((load, shift, rot, adjoint(shift), adjoint(load)), label="R_good1")


def reflect_about(preparation: GateOp, pivot: dict[str, int | None],
                  phi: float = math.pi, label: str = "R_full") -> GateOp:
    """exp(-i phi P) conjugated by the preparation, P the projector onto the
    pivot basis assignment.  A None value wildcards that register, turning the
    pivot into a subspace projector; with all values fixed this is the plain
    rank-one reflection I - (1 - exp(-i phi))|Psi><Psi|."""
    names = tuple(n for n, v in pivot.items() if v is not None)
    wanted = tuple(pivot[n] for n in names)

    def phase(vals):
        return -phi if vals == wanted else 0.0

    mask = PhaseFn(names, phase, label=label + "_pivot", cost_class="reflection")
    return Sequence((adjoint(preparation), mask, preparation), label=label)


def amplification_schedule(w: float, mode: str, grover_m: int | None = None) -> list[float]:
    """Per-iteration rotation phases.  grover: the plain pi reflections, count
    defaulting to round(pi/(4 asin sqrt w) - 1/2).  exact: phase-matched
    iterations whose final good weight is 1 up to rounding."""
    if not 0.0 < w <= 1.0:
        raise DomainError(f"good weight {w} outside (0, 1]")
    theta = math.asin(math.sqrt(w))
    if mode == "grover":
        m = grover_m if grover_m is not None else max(0, round(math.pi / (4 * theta) - 0.5))
        return [math.pi] * m
    if mode != "exact":
        raise DomainError(f"unknown amplification mode {mode!r}")
    if w >= 1.0 - 1e-12:
        return []
    j = max(0, math.ceil(math.pi / (4 * theta) - 0.5 - 1e-12))
    phi = 2 * math.asin(math.sin(math.pi / (4 * j + 6)) / math.sin(theta))
    return [phi] * (j + 1)


def amplification_gates(good_builder, full_builder, schedule: list[float]) -> list[GateOp]:
    """One good-rotation then one full-rotation per scheduled phase."""
    seq: list[GateOp] = []
    for phi in schedule:
        seq.append(good_builder(phi))
        seq.append(full_builder(phi))
    return seq


def amplitude_amplify(state: SparseState, good_builder, full_builder, mode: str,
                      good_weight: float, grover_m: int | None = None,
                      ledger: GateLedger | None = None) -> tuple[SparseState, dict]:
    """Rotate weight onto the good component of `state`.

    good_builder/full_builder map a phase angle to the corresponding rotation
    gate; good_weight is the current weight of the good component.
    """
    schedule = amplification_schedule(good_weight, mode, grover_m)
    for gate in amplification_gates(good_builder, full_builder, schedule):
        state = apply(state, gate, ledger)
    info = {"mode": mode, "iterations": len(schedule),
            "phases": schedule, "initial_weight": good_weight}
    return state, info


def _stage1_gates(spec: CyclicGroupSpec, regs: DlogRegs) -> list[GateOp]:
    return _psi1_gates(spec, regs) + _psi2_gates(spec, regs) + _euler_gates(spec, regs)


def _full_pivot(regs: DlogRegs) -> dict[str, int | None]:
    pivot: dict[str, int | None] = {n: 0 for n in regs.aux()}
    pivot[regs.w] = None  # covariant in the work register
    return pivot


def good_weight(spec: CyclicGroupSpec) -> float:
    """Weight of the coprime components after the Euler filter: phi(p-1)/(p-1)."""
    m = spec.p - 1
    return euler_totient(factorize(m)) / m


_KIT_MEMO: dict = {}


def pipeline_kit(spec: CyclicGroupSpec, regs: DlogRegs = DlogRegs(),
                 mode: str = "exact", grover_m: int | None = None) -> dict:
    """All gate pieces of the inversion sequence, built once per configuration
    so compiled permutation tables are shared across applications."""
    key = (spec, regs, mode, grover_m)
    kit = _KIT_MEMO.get(key)
    if kit is not None:
        return kit
    p, g, m = spec.p, spec.g, spec.p - 1
    schedule = amplification_schedule(good_weight(spec), mode, grover_m)

    stage1 = _stage1_gates(spec, regs)
    prep1 = Sequence(tuple(stage1), label="U_T1")
    amp1 = amplification_gates(
        lambda phi: good_rotation_stage1(spec, regs, phi),
        lambda phi: reflect_about(prep1, _full_pivot(regs), phi, label="R_full1"),
        schedule)

    mid = [
        adjoint(gates.mul3(m, regs.x, regs.out, regs.y)),  # clear l*s using l and s
        adjoint(gates.qft(p - 1, regs.x)),
        adjoint(gates.cyclic_shift(p, g, regs.f, power=1, control=regs.x)),
    ]

    prep2 = Sequence(tuple(stage1 + amp1 + mid), label="U_T2")
    amp2 = amplification_gates(
        lambda phi: gates.selective_phase({1: phi}, regs.f, label="C_1",
                                          cost_class="reflection"),
        lambda phi: reflect_about(prep2, _full_pivot(regs), phi, label="R_full2"),
        schedule)

    tail = [
        adjoint(gates.qft(p - 1, regs.x)),
        gates.transposition(1, 0, regs.f),  # state transfer |1> -> |0>
    ]
    kit = {"stage1": stage1, "amp1": amp1, "mid": mid, "amp2": amp2, "tail": tail,
           "schedule": schedule}
    _KIT_MEMO[key] = kit
    return kit


def v_f_inverse(spec: CyclicGroupSpec, regs: DlogRegs = DlogRegs(),
                mode: str = "exact", grover_m: int | None = None) -> GateOp:
    """Gate sequence mapping |R0>|g**s mod p>|0> to |R0>|g**s mod p>|s> for
    every s (exact mode: fidelity 1 up to rounding)."""
    kit = pipeline_kit(spec, regs, mode, grover_m)
    return Sequence(tuple(kit["stage1"] + kit["amp1"] + kit["mid"]
                          + kit["amp2"] + kit["tail"]), label="V_finv")


def forward_mod_exp(spec: CyclicGroupSpec, regs: DlogRegs) -> GateOp:
    """|s>|0> -> |s>|g**s mod p> on (OUT as control, W as target is NOT used);
    here built on (w=index register, out=group register) for the closing step."""
    return Sequence((
        gates.transposition(0, 1, regs.out),
        gates.cond_mod_exp_two_reg(spec.g, spec.p, regs.w, regs.out),
    ), label="V_f")


def u_log(spec: CyclicGroupSpec, regs: DlogRegs = DlogRegs(),
          mode: str = "exact", grover_m: int | None = None) -> GateOp:
    """|g**s mod p> -> |s> in the work register, auxiliaries restored; the
    adjoint maps |s> -> |g**s mod p>."""
    vinv = v_f_inverse(spec, regs, mode, grover_m)
    return Sequence((
        vinv,
        gates.swap_regs(regs.w, regs.out),
        adjoint(forward_mod_exp(spec, regs)),
    ), label="U_log")


# --- state-level stage operations (diagnostics and tests) --------------------

def prepare_psi1(spec: CyclicGroupSpec, b: int, regs: DlogRegs = DlogRegs(),
                 ledger: GateLedger | None = None) -> SparseState:
    """Uniform double index superposition with the functional register loaded:
    support (p-1)^2, every amplitude of magnitude 1/(p-1)."""
    if not 1 <= b < spec.p:
        raise DomainError(f"instance value {b} outside the group")
    layout = make_dlog_layout(spec, regs)
    state = SparseState.basis(layout, {regs.w: b})
    for gate in _psi1_gates(spec, regs):
        state = apply(state, gate, ledger)
    return state


def to_psi2(state: SparseState, spec: CyclicGroupSpec, regs: DlogRegs = DlogRegs(),
            ledger: GateLedger | None = None) -> SparseState:
    """Second Fourier pass and swap; afterwards the two index registers show
    exactly p-1 patterns (l, l*s mod (p-1))."""
    if state.support_size != (spec.p - 1) ** 2:
        raise SimulationError("input does not have the double-superposition shape")
    for gate in _psi2_gates(spec, regs):
        state = apply(state, gate, ledger)
    return state


def index_patterns(state: SparseState, regs: DlogRegs = DlogRegs()) -> set[tuple[int, int]]:
    ix = state.layout.index(regs.x)
    iy = state.layout.index(regs.y)
    return {(k[ix], k[iy]) for k in state.entries}


def euler_filter(state: SparseState, spec: CyclicGroupSpec, regs: DlogRegs = DlogRegs(),
                 ledger: GateLedger | None = None) -> tuple[SparseState, float]:
    """Apply the Euler-power filter; returns the state and the weight of the
    coprime components (phi(p-1)/(p-1) for a uniform pattern state)."""
    for gate in _euler_gates(spec, regs):
        state = apply(state, gate, ledger)
    ix = state.layout.index(regs.x)
    m = spec.p - 1
    weight = state.weight_where(lambda k: math.gcd(k[ix], m) == 1)
    return state, weight


def run_dlog_demo(spec: CyclicGroupSpec, b: int, regs: DlogRegs = DlogRegs(),
                  mode: str = "exact", grover_m: int | None = None,
                  ledger: GateLedger | None = None) -> tuple[PipelineTrace, int, SparseState]:
    """Run the staged inversion on |g**s> = |b> with per-stage diagnostics;
    returns the trace, the recovered index, and the final state."""
    trace = PipelineTrace()
    ledger = ledger if ledger is not None else GateLedger()
    p, g, m = spec.p, spec.g, spec.p - 1
    kit = pipeline_kit(spec, regs, mode, grover_m)
    layout = make_dlog_layout(spec, regs)
    state = SparseState.basis(layout, {regs.w: b})
    trace.record("psi0", 1.0, state.support_size, ledger)

    n_psi1 = 3  # the first three stage gates prepare the double superposition
    for gate in kit["stage1"][:n_psi1]:
        state = apply(state, gate, ledger)
    target = _psi1_target(spec, b, layout, regs)
    trace.record("psi1", hilbert.fidelity(state, target), state.support_size, ledger)

    for gate in kit["stage1"][n_psi1:n_psi1 + 3]:
        state = apply(state, gate, ledger)
    s_true = classical_dlog(p, g, b)
    want = {(l, (l * s_true) % m) for l in range(m)}
    pat_ok = index_patterns(state, regs) == want
    trace.record("psi2", 1.0 if pat_ok else 0.0, state.support_size, ledger)
    if not pat_ok:
        raise SimulationError("index-pattern shape check failed after the Fourier pass")

    for gate in kit["stage1"][n_psi1 + 3:]:
        state = apply(state, gate, ledger)
    ix = layout.index(regs.x)
    weight = state.weight_where(lambda k: math.gcd(k[ix], m) == 1)
    trace.record("psi3", None, state.support_size, ledger)
    trace.record("psi3s-weight", weight, state.support_size, ledger)

    for gate in kit["amp1"]:
        state = apply(state, gate, ledger)

    state = apply(state, kit["mid"][0], ledger)
    trace.record("psi4s", None, state.support_size, ledger)
    trace.record("psi5s", None, state.support_size, ledger)

    state = apply(state, kit["mid"][1], ledger)
    trace.record("psi6s", None, state.support_size, ledger)

    state = apply(state, kit["mid"][2], ledger)
    i_f = layout.index(regs.f)
    cross = state.weight_where(lambda k: k[i_f] != 1)
    trace.record("psi7s", cross, state.support_size, ledger)

    for gate in kit["amp2"] + kit["tail"]:
        state = apply(state, gate, ledger)

    target = SparseState.basis(layout, {regs.w: b, regs.out: s_true})
    fid = hilbert.fidelity(state, target)
    trace.record("final", fid, state.support_size, ledger)
    if mode == "exact":
        # plain reflections leave genuine residue; only exact mode owes clean aux
        for name in regs.aux():
            if name != regs.out:
                leak = state.register_weight_outside(name, 0)
                if leak > hilbert.RELEASE_TOL:
                    raise SimulationError(f"pipeline fault: register {name} not "
                                          f"restored (weight {leak:.3e})")
    recovered = max(((abs(a), k) for k, a in state.entries.items()))[1][layout.index(regs.out)]
    return trace, recovered, state


def _psi1_target(spec: CyclicGroupSpec, b: int, layout: RegisterLayout,
                 regs: DlogRegs) -> SparseState:
    p, g, m = spec.p, spec.g, spec.p - 1
    amp = 1.0 / m
    entries = {}
    iw = layout.index(regs.w)
    ix = layout.index(regs.x)
    iy = layout.index(regs.y)
    i_f = layout.index(regs.f)
    base = list(layout.zero_tuple())
    base[iw] = b
    for x in range(m):
        for y in range(m):
            tup = list(base)
            tup[ix], tup[iy] = x, y
            tup[i_f] = (pow(b, x, p) * pow(g, y, p)) % p
            entries[tuple(tup)] = amp + 0.0j
    return SparseState(layout, entries)
