"""Oracle unitaries, selective rotations, and the binary / multi-base
register descriptions of basis states.

The hidden index lives only inside OracleSpec; the rest of the codebase
receives constructed gates and may not read it (the driver reveals it solely
in the verification section of its report).
"""

from __future__ import annotations

from dataclasses import dataclass

from .hilbert import Controlled, GateOp, Permutation, PhaseFn, RegisterLayout
from .numtheory import CyclicGroupSpec, DomainError

ORACLE_FLAVORS = ("phase", "flag", "subspace_selective")


@dataclass(frozen=True)
class BinaryRep:
    """Sign description of an n-bit basis value: b_k = +1 for bit 0, -1 for bit 1,
    with k = 1 the least-significant position."""

    n: int
    b: tuple[int, ...]

    def __post_init__(self):
        if len(self.b) != self.n or any(v not in (-1, 1) for v in self.b):
            raise DomainError("binary rep needs n entries in {+1, -1}")

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((1 - v) // 2 for v in self.b)


def binary_rep(value: int, n: int) -> BinaryRep:
    if not 0 <= value < 2**n:
        raise DomainError(f"{value} outside [0, 2^{n})")
    return BinaryRep(n, tuple(1 - 2 * ((value >> k) & 1) for k in range(n)))


def rep_value(rep: BinaryRep) -> int:
    return sum(a << k for k, a in enumerate(rep.bits))


@dataclass(frozen=True)
class MultiBaseRep:
    """Residues s_k = s mod m_k with their base-p_k digit tables."""

    residues: tuple[int, ...]
    digits: tuple[tuple[int, ...], ...]


def multibase_rep(s: int, spec: CyclicGroupSpec) -> MultiBaseRep:
    from .numtheory import crt_decompose, factorize, multibase_expand

    if not 0 <= s < spec.p - 1:
        raise DomainError(f"index {s} outside Z_{spec.p - 1}")
    residues = crt_decompose(s, spec.basis)
    f = factorize(spec.p - 1)
    digits = tuple(tuple(multibase_expand(sk, pk, ak))
                   for sk, (pk, ak) in zip(residues, f.factors))
    return MultiBaseRep(residues, digits)


@dataclass(frozen=True)
class OracleSpec:
    """Hidden marked index plus rotation angle and oracle flavor.

    `hidden_index` is the only copy of the secret; only oracle constructors and
    the driver's verification step may touch it.
    """

    hidden_index: int
    theta: float
    flavor: str
    group: CyclicGroupSpec

    def __post_init__(self):
        if not 0 <= self.hidden_index < self.group.p - 1:
            raise DomainError("hidden index outside the group order")
        if self.flavor not in ORACLE_FLAVORS:
            raise DomainError(f"unknown oracle flavor {self.flavor!r}")

    @property
    def marked_value(self) -> int:
        """g**s mod p: the marked basis value in the multiplicative state space."""
        return pow(self.group.g, self.hidden_index, self.group.p)


def selective_rotation(t: int, theta: float, reg: str,
                       cost_class: str = "arith", label: str | None = None) -> GateOp:
    """exp(-i theta |t><t|): multiplies basis t of one register by exp(-i theta)."""

    def phase(v):
        return -theta if v[0] == t else 0.0

    return PhaseFn((reg,), phase, label=label or f"C_{t}", cost_class=cost_class)


def make_oracle(spec: OracleSpec, work_reg: str, flag_reg: str | None = None) -> GateOp:
    """Phase flavor: selective rotation on the marked group state (the explicit
    (|0>-|1>)/sqrt2 ancilla is folded into the phase).  Flag flavor: toggle a
    flag register exactly on the marked state."""
    target = spec.marked_value
    if spec.flavor == "flag":
        if flag_reg is None:
            raise DomainError("flag flavor needs a flag register")

        def fwd(v):
            x, f = v
            return (x, f ^ 1) if x == target else v

        return Permutation((work_reg, flag_reg), fwd, fwd, label="oracle_flag",
                           cost_class="oracle-call")
    if spec.flavor != "phase":
        raise DomainError("use make_subspace_oracle for the subspace-selective flavor")
    gate = selective_rotation(target, spec.theta, work_reg, cost_class="oracle-call",
                              label="oracle")
    return gate


def make_subspace_oracle(spec: OracleSpec, layout: RegisterLayout, work_reg: str,
                         designated: tuple[str, ...] | None = None,
                         theta: float | None = None) -> GateOp:
    """Phase exp(-i theta) only when every designated auxiliary register reads 0
    AND the work register holds the marked state.

    By default every register except the work register is designated, which is
    the strictest reading of acting on the register library state alone.
    """
    if designated is None:
        designated = tuple(n for n in layout.names if n != work_reg)
    if work_reg in designated:
        raise DomainError("work register cannot be part of the designated library")
    inner = selective_rotation(spec.marked_value,
                               spec.theta if theta is None else theta,
                               work_reg, cost_class="oracle-call", label="oracle_sub")

    def all_zero(vals):
        return all(v == 0 for v in vals)

    return Controlled(tuple(designated), all_zero, inner, label="oracle_sub")
