"""State transformations between the whole cyclic-group space and its subgroup
subspaces: decompose an index or group state into a tensor product of residue /
subgroup components, lift components between subspaces, and build the
auxiliary per-subspace oracle by conjugating the base oracle with the full
reduction-plus-stripping pipeline.

Everything here is a permutation sequence built from the public group data, so
the transformations act linearly on superpositions and never read the hidden
index.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import gates, halting_program as hp
from .hilbert import (GateLedger, GateOp, Register, RegisterLayout, Sequence,
                      SimulationError, SparseState, adjoint, apply)
from .numtheory import CyclicGroupSpec, DomainError


@dataclass(frozen=True)
class SubspaceDescriptor:
    """One cyclic subgroup subspace: generator g**M_k, order m_k, and its basis
    values [generator**x mod p]."""

    k: int
    generator: int
    order: int
    basis: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.basis)) != len(self.basis):
            raise DomainError("subspace basis values must be distinct")


def descriptors(spec: CyclicGroupSpec) -> tuple[SubspaceDescriptor, ...]:
    out = []
    for k, comp in enumerate(spec.basis.components):
        gen = spec.subgroup_generators[k]
        basis = tuple(pow(gen, x, spec.p) for x in range(comp.m))
        out.append(SubspaceDescriptor(k=k, generator=gen, order=comp.m, basis=basis))
    return tuple(out)


def subspace_lift(src: SubspaceDescriptor, dst: SubspaceDescriptor, reg: str) -> GateOp:
    """|src_generator**x> -> |dst_generator**x> for x below the source order;
    identity on values outside both basis lists."""
    if src.order > dst.order:
        raise DomainError("lift target must be at least as large as the source")
    return gates.pairing_permutation(list(src.basis), list(dst.basis[:src.order]), reg,
                                     label=f"LIFT_{src.order}_{dst.order}")


@dataclass(frozen=True)
class ReductionRegs:
    """Register names for the reduction complex inside a host layout."""

    w: str                      # work register (index state or group state)
    comps: tuple[str, ...]      # one component register per CRT factor
    a: str                      # constant temp
    b: str                      # product temp
    prod: str                   # group-product accumulator

    @classmethod
    def default(cls, r: int) -> "ReductionRegs":
        return cls(w="W", comps=tuple(f"C{k + 1}" for k in range(r)),
                   a="TA", b="TB", prod="TP")

    def all(self) -> tuple[str, ...]:
        return (self.w,) + self.comps + (self.a, self.b, self.prod)


def make_reduction_layout(spec: CyclicGroupSpec,
                          regs: ReductionRegs | None = None) -> tuple[RegisterLayout, ReductionRegs]:
    regs = regs or ReductionRegs.default(spec.r)
    n_dim = 2 ** spec.p.bit_length()
    registers = [Register(regs.w, n_dim, "work")]
    registers += [Register(c, n_dim, "aux") for c in regs.comps]
    registers += [Register(regs.a, n_dim, "aux"), Register(regs.b, n_dim, "aux"),
                  Register(regs.prod, n_dim, "aux")]
    return RegisterLayout(registers), regs


# --- index-space decompositions ----------------------------------------------

def residue_product_gates(spec: CyclicGroupSpec, regs: ReductionRegs,
                          n_dim: int) -> list[GateOp]:
    """|s> -> tensor of |s mod m_k| with the composite register cancelled via
    the inverse-cofactor linear combination."""
    m = spec.p - 1
    seq: list[GateOp] = []
    for k, comp in enumerate(spec.basis.components):
        seq.append(gates.mod_reduce(comp.m, regs.w, regs.comps[k], n_dim))
    for k, comp in enumerate(spec.basis.components):
        c = (comp.n * comp.M) % m
        load = gates.set_const(c, regs.a, n_dim)
        mul = gates.mul3(m, regs.a, regs.comps[k], regs.b)
        sub = adjoint(gates.add_mod(m, regs.b, regs.w))
        seq += [load, mul, sub, adjoint(mul), adjoint(load)]
    return seq


def scaled_product_gates(spec: CyclicGroupSpec, regs: ReductionRegs,
                         n_dim: int) -> list[GateOp]:
    """|s> -> tensor of |M_k s mod (p-1)>; the sum of inverse-weighted
    components reassembles s for the cancellation."""
    m = spec.p - 1
    seq: list[GateOp] = []
    for k, comp in enumerate(spec.basis.components):
        load = gates.set_const(comp.M % m, regs.a, n_dim)
        seq += [load, gates.mul3(m, regs.a, regs.w, regs.comps[k]), adjoint(load)]
    for k, comp in enumerate(spec.basis.components):
        load = gates.set_const(comp.n % m, regs.a, n_dim)
        mul = gates.mul3(m, regs.a, regs.comps[k], regs.b)
        sub = adjoint(gates.add_mod(m, regs.b, regs.w))
        seq += [load, mul, sub, adjoint(mul), adjoint(load)]
    return seq


# --- group-space decomposition -----------------------------------------------

def subgroup_product_gates(spec: CyclicGroupSpec, regs: ReductionRegs,
                           n_dim: int) -> list[GateOp]:
    """|g**s> -> tensor of |(g**M_k)**s_k>, removing the original group state
    through the product of inverse-weighted components (checked by the caller:
    the work register must come back to 0)."""
    p = spec.p
    seq: list[GateOp] = []
    for k, comp in enumerate(spec.basis.components):
        seq.append(gates.pow_const(comp.M, p, regs.w, regs.comps[k]))
    f1 = gates.transposition(0, 1, regs.prod)
    seq.append(f1)
    recon: list[GateOp] = []
    for k, comp in enumerate(spec.basis.components):
        pw = gates.pow_const(comp.n, p, regs.comps[k], regs.a)
        recon += [pw, gates.group_mul_acc(p, regs.a, regs.prod), adjoint(pw)]
    seq += recon
    seq.append(adjoint(gates.add_mod(n_dim, regs.prod, regs.w)))  # g**s - product = 0
    seq += [adjoint(g) for g in reversed(recon)]
    seq.append(adjoint(f1))
    return seq


def largest_subspace_gates(spec: CyclicGroupSpec, regs: ReductionRegs) -> list[GateOp]:
    """Lift every component into the largest subgroup subspace."""
    descs = descriptors(spec)
    top = descs[-1]
    return [subspace_lift(descs[k], top, regs.comps[k]) for k in range(spec.r - 1)]


# --- state-level wrappers ------------------------------------------------------

def _apply_all(state: SparseState, seq: list[GateOp],
               ledger: GateLedger | None) -> SparseState:
    for g in seq:
        state = apply(state, g, ledger)
    return state


def _assert_clean(state: SparseState, names: tuple[str, ...], what: str) -> None:
    from .hilbert import RELEASE_TOL

    for name in names:
        leak = state.register_weight_outside(name, 0)
        if leak > RELEASE_TOL:
            raise SimulationError(
                f"pipeline fault in {what}: register {name} holds weight {leak:.3e} off 0")


def index_to_residue_product(state: SparseState, spec: CyclicGroupSpec,
                             regs: ReductionRegs,
                             ledger: GateLedger | None = None) -> SparseState:
    n_dim = state.layout.dim(regs.w)
    state = _apply_all(state, residue_product_gates(spec, regs, n_dim), ledger)
    _assert_clean(state, (regs.w, regs.a, regs.b), "residue decomposition")
    return state


def index_to_scaled_product(state: SparseState, spec: CyclicGroupSpec,
                            regs: ReductionRegs,
                            ledger: GateLedger | None = None) -> SparseState:
    n_dim = state.layout.dim(regs.w)
    state = _apply_all(state, scaled_product_gates(spec, regs, n_dim), ledger)
    _assert_clean(state, (regs.w, regs.a, regs.b), "scaled decomposition")
    return state


def group_state_to_subgroup_product(state: SparseState, spec: CyclicGroupSpec,
                                    regs: ReductionRegs,
                                    ledger: GateLedger | None = None) -> SparseState:
    """Tensor-decompose a group state; a dirty work register afterwards means
    the inverse-weighted component product failed to reassemble it."""
    n_dim = state.layout.dim(regs.w)
    state = _apply_all(state, subgroup_product_gates(spec, regs, n_dim), ledger)
    _assert_clean(state, (regs.w, regs.a, regs.prod), "group-state reconstruction")
    return state


def to_largest_subspace(state: SparseState, spec: CyclicGroupSpec,
                        regs: ReductionRegs,
                        ledger: GateLedger | None = None) -> SparseState:
    descs = descriptors(spec)
    top = descs[-1]
    for k in range(spec.r - 1):
        i = state.layout.index(regs.comps[k])
        allowed = set(descs[k].basis)
        if any(key[i] not in allowed for key in state.entries):
            raise SimulationError(
                f"component {k} has support outside its source subspace")
        state = apply(state, subspace_lift(descs[k], top, regs.comps[k]), ledger)
    return state


# --- the auxiliary per-subspace oracle ----------------------------------------

def reduction_gate(spec: CyclicGroupSpec, regs: ReductionRegs, strip: hp.StripRegs,
                   keep: int, n_dim: int,
                   pulse: hp.PulseModel | None = None) -> GateOp:
    """Forward pipeline |R0>|g**s> -> (records)|component keep>: decompose,
    lift, strip."""
    seq = subgroup_product_gates(spec, regs, n_dim)
    seq += largest_subspace_gates(spec, regs)
    seq.append(hp.strip_gate(spec, keep, strip, n_dim, pulse))
    return Sequence(tuple(seq), label=f"REDUCE_{keep}")


def make_aux_oracle(base_oracle: GateOp, spec: CyclicGroupSpec, k: int, theta: float,
                    regs: ReductionRegs, strip: hp.StripRegs, search_reg: str,
                    n_dim: int, pulse: hp.PulseModel | None = None) -> GateOp:
    """Selective rotation of the k-th subgroup component on the search register,
    realized with a single call of the base oracle.

    The trial value is swapped into the kept component register; the inverse
    reduction consumes the live halting records and reassembles the original
    group state exactly when the trial equals the hidden component, at which
    point the base oracle fires; the forward reduction then restores the
    pipeline registers.  `theta` is fixed by the base oracle; the argument is
    kept for the report only.
    """
    red = reduction_gate(spec, regs, strip, k, n_dim, pulse)
    swap = gates.swap_regs(search_reg, regs.comps[k])
    return Sequence((swap, adjoint(red), base_oracle, red, swap),
                    label=f"AUX_ORACLE_{k}")
