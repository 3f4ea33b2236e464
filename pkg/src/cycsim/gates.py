"""Constructors for reversible arithmetic and Fourier gates.

Partial textbook definitions (result written into a |0> target) are extended to
total permutations by *adding* the result into the target modulo the register
dimension; on the intended inputs the behavior is unchanged.  Registers may be
padded above the working modulus: every gate acts as the identity outside its
defined domain, and pipelines assert that support never leaves that domain.
"""

from __future__ import annotations

import math

import numpy as np

from .hilbert import GateOp, LocalUnitary, Permutation, PhaseFn, Sequence
from .numtheory import DomainError, modinv

ARITH_KINDS = ("ADD_L", "COPY", "MUL3", "MOD_m", "SWAP", "SET_j")


def add_mod(L: int, src: str, dst: str, label: str = "ADD") -> GateOp:
    """|x>|y> -> |x>|(x+y) mod L> for x, y < L; identity outside Z_L x Z_L."""

    def fwd(v):
        x, y = v
        return (x, (x + y) % L) if x < L and y < L else v

    def inv(v):
        x, y = v
        return (x, (y - x) % L) if x < L and y < L else v

    return Permutation((src, dst), fwd, inv, label=f"{label}_{L}")


def copy_gate(L: int, src: str, dst: str) -> GateOp:
    """COPY = ADD on a zero target; its adjoint is the subtraction."""
    return add_mod(L, src, dst, label="COPY")


def mul3(L: int, a: str, b: str, dst: str) -> GateOp:
    """|x>|y>|z> -> |x>|y>|(z + x*y) mod L> for z < L (additive extension)."""

    def fwd(v):
        x, y, z = v
        return (x, y, (z + x * y) % L) if z < L else v

    def inv(v):
        x, y, z = v
        return (x, y, (z - x * y) % L) if z < L else v

    return Permutation((a, b, dst), fwd, inv, label=f"MUL3_{L}")


def mod_reduce(m: int, src: str, dst: str, dst_dim: int) -> GateOp:
    """|s>|t> -> |s>|(t + s mod m) mod d>: loads the residue of s into a zero target."""

    def fwd(v):
        s, t = v
        return (s, (t + s % m) % dst_dim)

    def inv(v):
        s, t = v
        return (s, (t - s % m) % dst_dim)

    return Permutation((src, dst), fwd, inv, label=f"MOD_{m}")


def swap_regs(r1: str, r2: str) -> GateOp:
    def fl(v):
        return (v[1], v[0])

    return Permutation((r1, r2), fl, fl, label="SWAP")


def set_const(j: int, reg: str, dim: int) -> GateOp:
    """Adds the constant j mod dim; on |0> this loads |j>."""
    if not 0 <= j < dim:
        raise DomainError(f"constant {j} outside register dimension {dim}")

    def fwd(v):
        return ((v[0] + j) % dim,)

    def inv(v):
        return ((v[0] - j) % dim,)

    return Permutation((reg,), fwd, inv, label=f"SET_{j}")


def transposition(a: int, b: int, reg: str) -> GateOp:
    """Swap two basis values of one register, identity elsewhere.

    Used where a state transfer |0> -> |j> must leave every other basis value
    (in particular the top of the register) untouched.
    """

    def fl(v):
        x = v[0]
        if x == a:
            return (b,)
        if x == b:
            return (a,)
        return v

    return Permutation((reg,), fl, fl, label=f"X_{a}_{b}")


def make_arith(kind: str, regs: tuple[str, ...], modulus: int,
               dims: tuple[int, ...] = ()) -> GateOp:
    """Dispatcher over the basic arithmetic kinds (register names in order)."""
    if kind == "ADD_L":
        return add_mod(modulus, *regs)
    if kind == "COPY":
        return copy_gate(modulus, *regs)
    if kind == "MUL3":
        return mul3(modulus, *regs)
    if kind == "MOD_m":
        return mod_reduce(modulus, regs[0], regs[1], dims[0])
    if kind == "SWAP":
        return swap_regs(*regs)
    if kind == "SET_j":
        return set_const(modulus, regs[0], dims[0])
    raise DomainError(f"unknown arithmetic kind {kind!r}")


def mul_const(a: int, N: int, reg: str) -> GateOp:
    """|x> -> |x*a mod N> for x < N; refuses construction unless gcd(a, N) = 1."""
    if math.gcd(a, N) != 1:
        raise DomainError(f"mul_const({a}, {N}): multiplier not coprime, not unitary")
    ainv = modinv(a, N)

    def fwd(v):
        return ((v[0] * a) % N,) if v[0] < N else v

    def inv(v):
        return ((v[0] * ainv) % N,) if v[0] < N else v

    return Permutation((reg,), fwd, inv, label=f"MUL_{a}_{N}")


def cond_mod_exp_two_reg(a: int, L: int, ctrl: str, tgt: str) -> GateOp:
    """|x>|y> -> |x>|y * a**x mod L> for y < L; requires gcd(a, L) = 1."""
    if math.gcd(a, L) != 1:
        raise DomainError(f"cond_mod_exp two_reg: gcd({a},{L}) != 1, not unitary")
    ainv = modinv(a, L)

    def fwd(v):
        x, y = v
        return (x, (y * pow(a, x, L)) % L) if y < L else v

    def inv(v):
        x, y = v
        return (x, (y * pow(ainv, x, L)) % L) if y < L else v

    return Permutation((ctrl, tgt), fwd, inv, label=f"CEXP_{a}_{L}")


def cond_mod_exp_three_reg(a: int, L: int, ctrl: str, mul: str, tgt: str) -> GateOp:
    """|x>|y>|z> -> |x>|y>|(z + y*a**x) mod L> for z < L; unitary for any a."""

    def fwd(v):
        x, y, z = v
        return (x, y, (z + y * pow(a, x, L)) % L) if v[2] < L else v

    def inv(v):
        x, y, z = v
        return (x, y, (z - y * pow(a, x, L)) % L) if v[2] < L else v

    return Permutation((ctrl, mul, tgt), fwd, inv, label=f"CEXP3_{a}_{L}")


def cond_mod_exp_two_var(b: int, a: int, L: int, x_reg: str, y_reg: str, tgt: str) -> GateOp:
    """|x>|y>|z> -> |x>|y>|(z + b**x * a**y) mod L> for z < L."""

    def fwd(v):
        x, y, z = v
        return (x, y, (z + pow(b, x, L) * pow(a, y, L)) % L) if z < L else v

    def inv(v):
        x, y, z = v
        return (x, y, (z - pow(b, x, L) * pow(a, y, L)) % L) if z < L else v

    return Permutation((x_reg, y_reg, tgt), fwd, inv, label=f"CEXP2V_{b}_{a}_{L}")


def cond_mod_exp(variant: str, **kw) -> GateOp:
    if variant == "two_reg":
        return cond_mod_exp_two_reg(kw["a"], kw["L"], kw["ctrl"], kw["tgt"])
    if variant == "three_reg":
        return cond_mod_exp_three_reg(kw["a"], kw["L"], kw["ctrl"], kw["mul"], kw["tgt"])
    if variant == "two_var":
        return cond_mod_exp_two_var(kw["b"], kw["a"], kw["L"], kw["x_reg"], kw["y_reg"], kw["tgt"])
    raise DomainError(f"unknown cond_mod_exp variant {variant!r}")


def pow_const(e: int, L: int, src: str, tgt: str) -> GateOp:
    """|x>|z> -> |x>|(z + x**e mod L) mod L> for z < L (register-base power).

    0**e = 0 for e >= 1, so a zero source contributes nothing.
    """
    if e < 0:
        raise DomainError("exponent must be non-negative")

    def fwd(v):
        x, z = v
        return (x, (z + pow(x, e, L)) % L) if z < L else v

    def inv(v):
        x, z = v
        return (x, (z - pow(x, e, L)) % L) if z < L else v

    return Permutation((src, tgt), fwd, inv, label=f"POW_{e}_{L}")


def group_mul_acc(p: int, src: str, dst: str) -> GateOp:
    """|u>|w> -> |u>|w*u mod p> on the multiplicative group: u, w in Z_p^+."""

    def fwd(v):
        u, w = v
        if 1 <= u < p and 1 <= w < p:
            return (u, (w * u) % p)
        return v

    def inv(v):
        u, w = v
        if 1 <= u < p and 1 <= w < p:
            return (u, (w * modinv(u, p)) % p)
        return v

    return Permutation((src, dst), fwd, inv, label=f"GMUL_{p}")


def work_mod_exp(g: int, p: int, x_reg: str, y_reg: str, w_reg: str, tgt: str) -> GateOp:
    """|x>|y>|w>|z> -> |x>|y>|w>|(z + w**x * g**y mod p) mod p> for w in Z_p^+.

    The double-variable modular exponential with the base taken from the work
    register, so one gate serves every group element held there.
    """

    def val(x, y, w):
        return (pow(w, x, p) * pow(g, y, p)) % p if 1 <= w < p else 0

    def fwd(v):
        x, y, w, z = v
        return (x, y, w, (z + val(x, y, w)) % p) if z < p else v

    def inv(v):
        x, y, w, z = v
        return (x, y, w, (z - val(x, y, w)) % p) if z < p else v

    return Permutation((x_reg, y_reg, w_reg, tgt), fwd, inv, label=f"UF_{g}_{p}")


def cyclic_shift(p: int, h: int, reg: str, power: int = 1,
                 control: str | None = None) -> GateOp:
    """Group translation y -> y * h**power mod p on {1..p-1}; fixes 0 and >= p.

    With a control register, the control value scales the exponent:
    |a>|y> -> |a>|y * h**(power*a) mod p>.
    """
    if h % p == 0:
        raise DomainError("generator divisible by modulus")
    hinv = modinv(h, p)

    if control is None:
        mult = pow(h if power >= 0 else hinv, abs(power), p)
        minv = modinv(mult, p)

        def fwd(v):
            y = v[0]
            return ((y * mult) % p,) if 1 <= y < p else v

        def inv(v):
            y = v[0]
            return ((y * minv) % p,) if 1 <= y < p else v

        return Permutation((reg,), fwd, inv, label=f"SHIFT_{h}^{power}")

    def cfwd(v):
        a, y = v
        if 1 <= y < p:
            e = (power * a) % (p - 1)
            return (a, (y * pow(h, e, p)) % p)
        return v

    def cinv(v):
        a, y = v
        if 1 <= y < p:
            e = (power * a) % (p - 1)
            return (a, (y * pow(hinv, e, p)) % p)
        return v

    return Permutation((control, reg), cfwd, cinv, label=f"CSHIFT_{h}^{power}")


def qft(N: int, reg: str) -> GateOp:
    """|l> -> (1/sqrt N) sum_k exp(+i 2 pi k l / N)|k>, dense NxN.

    Application errors out if the state has support at indices >= N.
    """
    k = np.arange(N)
    mat = np.exp(2j * math.pi * np.outer(k, k) / N) / math.sqrt(N)
    return LocalUnitary(reg, mat, label=f"QFT_{N}", cost_class="qft")


def relabel_permutation(f, r: int, dim: int, reg: str, label: str = "RELABEL") -> GateOp:
    """Bijection on Z_dim sending x -> f(x) for x < r.

    Values in the image that are not in Z_r are paired back onto the unused part
    of Z_r (ascending order), so the whole map is a deterministic permutation.
    """
    image = [f(x) for x in range(r)]
    if len(set(image)) != r:
        raise DomainError("function is not injective on its period")
    if any(not 0 <= v < dim for v in image):
        raise DomainError("function image outside the register")
    mapping = {x: image[x] for x in range(r)}
    spare_src = sorted(set(image) - set(range(r)))      # image values needing a home
    spare_dst = sorted(set(range(r)) - set(image))      # domain values freed up
    extra = dict(zip(spare_src, spare_dst))
    mapping.update(extra)
    inv_map = {v: k for k, v in mapping.items()}

    def fwd(v):
        return (mapping.get(v[0], v[0]),)

    def inv(v):
        return (inv_map.get(v[0], v[0]),)

    return Permutation((reg,), fwd, inv, label=label)


def functional_qft(f, r: int, reg: str, dim: int) -> GateOp:
    """Fourier transform conjugated into the image basis of an injective f:
    |f(l)> -> (1/sqrt r) sum_k exp(+i 2 pi k l / r)|f(k)>."""
    relabel = relabel_permutation(f, r, dim, reg, label="UF_RELABEL")
    from .hilbert import adjoint  # local import to avoid cycle at module load

    return Sequence((adjoint(relabel), qft(r, reg), relabel), label=f"FQFT_{r}")


def pairing_permutation(src_values: list[int], dst_values: list[int], reg: str,
                        label: str = "PAIR") -> GateOp:
    """Bijection sending src_values[i] -> dst_values[i], identity outside both
    lists; leftover destination values are folded back onto leftover sources in
    ascending order so the whole map stays a permutation."""
    if len(src_values) != len(dst_values):
        raise DomainError("pairing lists must have equal length")
    if len(set(src_values)) != len(src_values) or len(set(dst_values)) != len(dst_values):
        raise DomainError("pairing lists must not repeat values")
    mapping = dict(zip(src_values, dst_values))
    spare_src = sorted(set(dst_values) - set(src_values))
    spare_dst = sorted(set(src_values) - set(dst_values))
    mapping.update(zip(spare_src, spare_dst))
    inv_map = {v: k for k, v in mapping.items()}

    def fwd(v):
        return (mapping.get(v[0], v[0]),)

    def inv(v):
        return (inv_map.get(v[0], v[0]),)

    return Permutation((reg,), fwd, inv, label=label)


def selective_phase(values: dict[int, float], reg: str, label: str = "CSEL",
                    cost_class: str = "arith") -> GateOp:
    """Diagonal phase exp(-i theta_v) on chosen basis values of one register."""

    def phase(v):
        return -values.get(v[0], 0.0)

    return PhaseFn((reg,), phase, label=label, cost_class=cost_class)
