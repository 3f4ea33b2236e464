import cmath
import math

import numpy as np
import pytest

from cycsim import gates, hilbert
from cycsim.hilbert import Register, RegisterLayout, SparseState, adjoint, apply
from cycsim.numtheory import DomainError, modinv


def layout2(d1=8, d2=8):
    return RegisterLayout([Register("r1", d1), Register("r2", d2)])


def layout3(d=16):
    return RegisterLayout([Register("r1", d), Register("r2", d), Register("r3", d)])


def as_basis(layout, **vals):
    return SparseState.basis(layout, vals)


def reg_val(state, name):
    return state.sole_tuple()[state.layout.index(name)]


def test_add_mod_example():
    lay = layout2()
    out = apply(as_basis(lay, r1=3, r2=4), gates.add_mod(5, "r1", "r2"))
    assert reg_val(out, "r2") == 2  # (3+4) mod 5


def test_copy_and_subtraction():
    lay = layout2()
    cp = gates.copy_gate(8, "r1", "r2")
    out = apply(as_basis(lay, r1=5), cp)
    assert reg_val(out, "r2") == 5
    back = apply(out, adjoint(cp))
    assert reg_val(back, "r2") == 0


def test_mul3_example():
    lay = layout3()
    out = apply(as_basis(lay, r1=3, r2=4), gates.mul3(13, "r1", "r2", "r3"))
    assert reg_val(out, "r3") == 12


def test_mod_reduce():
    lay = layout2(16, 16)
    out = apply(as_basis(lay, r1=7), gates.mod_reduce(3, "r1", "r2", 16))
    assert reg_val(out, "r2") == 1  # 7 mod 3


def test_swap_and_set():
    lay = layout2()
    out = apply(as_basis(lay, r1=2, r2=6), gates.swap_regs("r1", "r2"))
    assert (reg_val(out, "r1"), reg_val(out, "r2")) == (6, 2)
    out = apply(as_basis(lay), gates.set_const(3, "r1", 8))
    assert reg_val(out, "r1") == 3
    with pytest.raises(DomainError):
        gates.set_const(8, "r1", 8)


def test_make_arith_dispatch():
    lay = layout2()
    g = gates.make_arith("ADD_L", ("r1", "r2"), 5)
    out = apply(as_basis(lay, r1=3, r2=4), g)
    assert reg_val(out, "r2") == 2
    with pytest.raises(DomainError):
        gates.make_arith("NOPE", ("r1",), 2)


def test_transposition_fixes_top():
    lay = layout2()
    f1 = gates.transposition(0, 1, "r1")
    assert reg_val(apply(as_basis(lay, r1=0), f1), "r1") == 1
    assert reg_val(apply(as_basis(lay, r1=7), f1), "r1") == 7  # top untouched


def test_mul_const():
    lay = layout2()
    assert reg_val(apply(as_basis(lay, r1=3), gates.mul_const(2, 5, "r1")), "r1") == 1
    assert reg_val(apply(as_basis(lay, r1=5), gates.mul_const(3, 7, "r1")), "r1") == 1
    ident = gates.mul_const(1, 7, "r1")
    assert reg_val(apply(as_basis(lay, r1=4), ident), "r1") == 4
    with pytest.raises(DomainError):
        gates.mul_const(2, 6, "r1")  # shared factor: not unitary
    # inverse via the modular inverse multiplier
    g = gates.mul_const(3, 7, "r1")
    ginv = gates.mul_const(modinv(3, 7), 7, "r1")
    st = as_basis(lay, r1=4)
    assert apply(apply(st, g), ginv).entries == st.entries


def test_cond_mod_exp_variants():
    lay = layout3()
    two = gates.cond_mod_exp("two_reg", a=2, L=5, ctrl="r1", tgt="r2")
    out = apply(as_basis(lay, r1=3, r2=1), two)
    assert reg_val(out, "r2") == 3  # 1*2^3 mod 5
    with pytest.raises(DomainError):
        gates.cond_mod_exp("two_reg", a=2, L=6, ctrl="r1", tgt="r2")
    three = gates.cond_mod_exp("three_reg", a=2, L=6, ctrl="r1", mul="r2", tgt="r3")
    out = apply(as_basis(lay, r1=2, r2=1), three)
    assert reg_val(out, "r3") == 4  # 1*2^2 mod 6 (non-coprime base allowed)
    twov = gates.cond_mod_exp("two_var", b=11, a=2, L=13, x_reg="r1", y_reg="r2", tgt="r3")
    out = apply(as_basis(lay, r1=1, r2=1), twov)
    assert reg_val(out, "r3") == 9  # 11*2 mod 13


def test_pow_const_zero_base():
    lay = layout2(16, 16)
    g = gates.pow_const(3, 12, "r1", "r2")
    assert reg_val(apply(as_basis(lay, r1=0), g), "r2") == 0  # 0^e = 0
    assert reg_val(apply(as_basis(lay, r1=5), g), "r2") == pow(5, 3, 12)


def test_group_mul_acc():
    lay = layout2(16, 16)
    g = gates.group_mul_acc(13, "r1", "r2")
    out = apply(as_basis(lay, r1=3, r2=5), g)
    assert reg_val(out, "r2") == 2  # 15 mod 13
    # fixes values outside the group
    out = apply(as_basis(lay, r1=3, r2=0), g)
    assert reg_val(out, "r2") == 0


def test_cyclic_shift_examples():
    lay = layout2(16, 16)
    g = gates.cyclic_shift(13, 2, "r2")
    assert reg_val(apply(as_basis(lay, r2=1), g), "r2") == 2
    assert reg_val(apply(as_basis(lay, r2=11), g), "r2") == 9  # 22 mod 13
    assert reg_val(apply(as_basis(lay, r2=0), g), "r2") == 0   # fixes 0
    assert reg_val(apply(as_basis(lay, r2=14), g), "r2") == 14  # fixes padding
    ginv = gates.cyclic_shift(13, pow(2, 11, 13), "r2")
    st = as_basis(lay, r2=7)
    assert apply(apply(st, g), ginv).entries == st.entries


def test_cyclic_shift_generator_order():
    lay = layout2(16, 16)
    g = gates.cyclic_shift(13, 2, "r2")
    st = as_basis(lay, r2=5)
    for _ in range(12):
        st = apply(st, g)
    assert reg_val(st, "r2") == 5


def test_cyclic_shift_conditional():
    lay = layout2(16, 16)
    g = gates.cyclic_shift(13, 2, "r2", power=1, control="r1")
    out = apply(as_basis(lay, r1=3, r2=2), g)
    assert reg_val(out, "r2") == (2 * pow(2, 3, 13)) % 13


def test_qft_small_cases():
    lay = layout2(4, 4)
    out = apply(as_basis(lay), gates.qft(2, "r1"))
    i1 = lay.index("r1")
    amps = {k[i1]: a for k, a in out.entries.items()}
    assert abs(amps[0] - 1 / math.sqrt(2)) < 1e-12
    assert abs(amps[1] - 1 / math.sqrt(2)) < 1e-12
    # N=3 with +i convention
    out = apply(as_basis(lay, r1=1), gates.qft(3, "r1"))
    amps = {k[i1]: a for k, a in out.entries.items()}
    for k in range(3):
        want = cmath.exp(2j * math.pi * k / 3) / math.sqrt(3)
        assert abs(amps[k] - want) < 1e-12
    q = gates.qft(3, "r1")
    st = as_basis(lay, r1=2)
    assert hilbert.fidelity(apply(apply(st, q), adjoint(q)), st) > 1 - 1e-12


def test_qft_flags_out_of_domain_support():
    lay = layout2(8, 8)
    st = as_basis(lay, r1=5)
    with pytest.raises(hilbert.SimulationError):
        apply(st, gates.qft(4, "r1"))


def _dense_columns(gate, layout, reg, dim, columns):
    """Dense matrix columns of a gate, probed on the given basis values only."""
    out = {}
    i = layout.index(reg)
    for v in columns:
        st = SparseState.basis(layout, {reg: v})
        res = apply(st, gate)
        col = np.zeros(dim, dtype=complex)
        for k, a in res.entries.items():
            col[k[i]] = a
        out[v] = col
    return out


@pytest.mark.parametrize("r", [3, 6, 12, 16])
def test_functional_qft_matches_conjugated_qft(r):
    # the composite is defined on the image basis of f; compare those columns
    # against an independently assembled relabeled Fourier matrix
    dim = 32
    lay = RegisterLayout([Register("r1", dim)])
    f = lambda x: (x * 7 + 5) % dim  # injective on Z_r
    image = [f(x) for x in range(r)]
    fq = gates.functional_qft(f, r, "r1", dim)
    got = _dense_columns(fq, lay, "r1", dim, image)
    fourier = np.exp(2j * math.pi * np.outer(np.arange(r), np.arange(r)) / r) / math.sqrt(r)
    for l in range(r):
        want = np.zeros(dim, dtype=complex)
        for k in range(r):
            want[f(k)] += fourier[k, l]
        assert np.max(np.abs(got[f(l)] - want)) < 1e-12


def test_functional_qft_identity_equals_qft():
    dim = 8
    lay = RegisterLayout([Register("r1", dim)])
    fq = gates.functional_qft(lambda x: x, 5, "r1", dim)
    cols = list(range(5))
    a = _dense_columns(fq, lay, "r1", dim, cols)
    b = _dense_columns(gates.qft(5, "r1"), lay, "r1", dim, cols)
    for v in cols:
        assert np.max(np.abs(a[v] - b[v])) < 1e-12


def test_functional_qft_group_example():
    # f(x) = 2^x mod 13 over a period of 12: the image basis carries the transform
    dim = 16
    lay = RegisterLayout([Register("r1", dim)])
    f = lambda x: pow(2, x, 13)
    fq = gates.functional_qft(f, 12, "r1", dim)
    st = SparseState.basis(lay, {"r1": 1})  # = |f(0)>
    out = apply(st, fq)
    i1 = lay.index("r1")
    amps = {k[i1]: a for k, a in out.entries.items()}
    assert set(amps) == {pow(2, k, 13) for k in range(12)}
    assert all(abs(a - 1 / math.sqrt(12)) < 1e-12 for a in amps.values())
    with pytest.raises(DomainError):
        gates.functional_qft(lambda x: x % 3, 6, "r1", dim)  # not injective


def test_pairing_permutation():
    lay = layout2(16, 16)
    g = gates.pairing_permutation([1, 3, 9], [1, 8, 12], "r1")
    assert reg_val(apply(as_basis(lay, r1=3), g), "r1") == 8
    assert reg_val(apply(as_basis(lay, r1=1), g), "r1") == 1
    assert reg_val(apply(as_basis(lay, r1=7), g), "r1") == 7  # outside both lists
    st = as_basis(lay, r1=9)
    assert apply(apply(st, g), adjoint(g)).entries == st.entries
