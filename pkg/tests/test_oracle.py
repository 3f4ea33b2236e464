import math

import pytest

from cycsim import hilbert
from cycsim.hilbert import Register, RegisterLayout, SparseState, apply
from cycsim.numtheory import DomainError
from cycsim.oracle import (BinaryRep, OracleSpec, binary_rep, make_oracle,
                           make_subspace_oracle, multibase_rep, rep_value,
                           selective_rotation)


def test_binary_rep_examples():
    assert binary_rep(0, 3).b == (1, 1, 1)
    assert binary_rep(7, 3).b == (-1, -1, -1)
    rep = binary_rep(11, 4)
    assert rep.bits == (1, 1, 0, 1)  # 11 = 8+2+1, least significant first
    assert rep.b == (-1, -1, 1, -1)
    assert rep_value(rep) == 11
    with pytest.raises(DomainError):
        binary_rep(8, 3)
    with pytest.raises(DomainError):
        BinaryRep(2, (1, 0))


@pytest.mark.parametrize("n", range(1, 13))
def test_binary_rep_roundtrip_exhaustive(n):
    for v in range(2**n):
        assert rep_value(binary_rep(v, n)) == v


def test_multibase_rep(spec13):
    rep = multibase_rep(7, spec13)
    assert rep.residues == (1, 3)
    assert rep.digits == ((1,), (1, 1))  # 1 in base 3; 3 = 1+1*2 in base 2
    rep0 = multibase_rep(0, spec13)
    assert rep0.residues == (0, 0)
    assert all(all(h == 0 for h in d) for d in rep0.digits)
    from cycsim.numtheory import crt_compose
    for s in range(12):
        assert crt_compose(multibase_rep(s, spec13).residues, spec13.basis) == s


def test_selective_rotation_basics():
    lay = RegisterLayout([Register("w", 8)])
    st = SparseState.basis(lay, {"w": 3})
    ident = selective_rotation(3, 0.0, "w")
    assert apply(st, ident).entries == st.entries
    flip = selective_rotation(0, math.pi, "w")
    out = apply(SparseState.basis(lay), flip)
    assert abs(list(out.entries.values())[0] + 1) < 1e-12
    fwd = selective_rotation(3, 0.8, "w")
    back = selective_rotation(3, -0.8, "w")
    assert hilbert.fidelity(apply(apply(st, fwd), back), st) > 1 - 1e-12


def test_oracle_spec_guards(spec13):
    with pytest.raises(DomainError):
        OracleSpec(12, math.pi, "phase", spec13)
    with pytest.raises(DomainError):
        OracleSpec(3, math.pi, "banana", spec13)


def test_phase_oracle_marks_exactly_one_state(spec13):
    lay = RegisterLayout([Register("w", 16)])
    spec = OracleSpec(7, math.pi, "phase", spec13)
    gate = make_oracle(spec, "w")
    flipped = 0
    for x in range(12):
        st = SparseState.basis(lay, {"w": pow(spec13.g, x, 13)})
        out = apply(st, gate)
        amp = list(out.entries.values())[0]
        assert abs(abs(amp) - 1) < 1e-12
        if amp.real < 0:
            flipped += 1
            assert x == 7
    assert flipped == 1  # hidden-index uniqueness


def test_phase_oracle_inverse_pair(spec13):
    import dataclasses
    lay = RegisterLayout([Register("w", 16)])
    spec = OracleSpec(5, 1.1, "phase", spec13)
    fwd = make_oracle(spec, "w")
    back = make_oracle(dataclasses.replace(spec, theta=-1.1), "w")
    st = apply(SparseState.basis(lay), hilbert.Sequence((fwd, back)))
    assert st.entries == SparseState.basis(lay).entries


def test_flag_oracle(spec13):
    lay = RegisterLayout([Register("w", 16), Register("flag", 2, "flag")])
    spec = OracleSpec(7, math.pi, "flag", spec13)
    gate = make_oracle(spec, "w", "flag")
    marked = pow(spec13.g, 7, 13)
    out = apply(SparseState.basis(lay, {"w": marked}), gate)
    assert out.sole_tuple()[lay.index("flag")] == 1
    out = apply(SparseState.basis(lay, {"w": 2}), gate)
    assert out.sole_tuple()[lay.index("flag")] == 0
    with pytest.raises(DomainError):
        make_oracle(spec, "w")  # flag register required


def test_subspace_oracle_cases(spec13):
    lay = RegisterLayout([Register("w", 16), Register("a1", 4, "aux"),
                          Register("a2", 4, "aux")])
    spec = OracleSpec(7, math.pi, "subspace_selective", spec13)
    gate = make_subspace_oracle(spec, lay, "w")
    marked = pow(spec13.g, 7, 13)
    # aux all zero and marked work value: phase applied
    out = apply(SparseState.basis(lay, {"w": marked}), gate)
    assert abs(list(out.entries.values())[0] + 1) < 1e-12
    # aux library disturbed: no action even on the marked value
    out = apply(SparseState.basis(lay, {"w": marked, "a1": 2}), gate)
    assert abs(list(out.entries.values())[0] - 1) < 1e-12
    # aux zero but unmarked work value: no action
    out = apply(SparseState.basis(lay, {"w": 5}), gate)
    assert abs(list(out.entries.values())[0] - 1) < 1e-12
    with pytest.raises(DomainError):
        make_subspace_oracle(spec, lay, "w", designated=("w", "a1"))


def test_oracle_ledger_class(spec13):
    lay = RegisterLayout([Register("w", 16), Register("a1", 4, "aux")])
    spec = OracleSpec(3, math.pi, "subspace_selective", spec13)
    gate = make_subspace_oracle(spec, lay, "w")
    led = hilbert.GateLedger()
    apply(SparseState.basis(lay, {"w": 1}), gate, led)
    assert led.count("oracle-call") == 1
