import math

import pytest

from cycsim import crt_reduction as cr
from cycsim import halting_program as hp
from cycsim import gates, hilbert
from cycsim.hilbert import Register, RegisterLayout, SparseState, adjoint, apply
from cycsim.numtheory import (DomainError, classical_dlog, crt_decompose,
                              make_group_spec)
from cycsim.oracle import OracleSpec, make_subspace_oracle

IDENTITY_PRIMES = (5, 7, 11, 13, 29, 61)


@pytest.fixture(scope="module")
def env13():
    spec = make_group_spec(13)
    layout, regs = cr.make_reduction_layout(spec)
    return spec, layout, regs


def component_values(state, layout, regs):
    tup = state.sole_tuple()
    return tuple(tup[layout.index(c)] for c in regs.comps)


@pytest.mark.parametrize("p", IDENTITY_PRIMES)
def test_index_identity_classical(p):
    # linear-combination reconstruction of the index from its residues
    spec = make_group_spec(p)
    for s in range(p - 1):
        total = sum(c.n * c.M * (s % c.m) for c in spec.basis.components)
        assert total % (p - 1) == s


@pytest.mark.parametrize("p", IDENTITY_PRIMES)
def test_group_identity_classical(p):
    # product reconstruction of the group element from subgroup components
    spec = make_group_spec(p)
    for s in range(p - 1):
        prod = 1
        for gen, c in zip(spec.subgroup_generators, spec.basis.components):
            prod = (prod * pow(gen, c.n * (s % c.m), p)) % p
        assert prod == pow(spec.g, s, p)


def test_descriptors(env13):
    spec, _, _ = env13
    descs = cr.descriptors(spec)
    assert [(d.generator, d.order) for d in descs] == [(3, 3), (8, 4)]
    assert descs[0].basis == (1, 3, 9)
    assert descs[1].basis == (1, 8, 12, 5)
    for d in descs:
        assert pow(d.generator, d.order, spec.p) == 1


def test_residue_product_example(env13):
    spec, layout, regs = env13
    out = cr.index_to_residue_product(SparseState.basis(layout, {regs.w: 7}), spec, regs)
    assert component_values(out, layout, regs) == (1, 3)
    out = cr.index_to_residue_product(SparseState.basis(layout, {regs.w: 0}), spec, regs)
    assert component_values(out, layout, regs) == (0, 0)


def test_residue_product_injective_exhaustive(env13):
    spec, layout, regs = env13
    seen = set()
    for s in range(12):
        out = cr.index_to_residue_product(SparseState.basis(layout, {regs.w: s}),
                                          spec, regs)
        vals = component_values(out, layout, regs)
        assert vals == crt_decompose(s, spec.basis)
        assert vals not in seen
        seen.add(vals)


def test_residue_product_linear_on_superpositions(env13):
    spec, layout, regs = env13
    iw = layout.index(regs.w)
    t1 = list(layout.zero_tuple())
    t2 = list(layout.zero_tuple())
    t1[iw], t2[iw] = 3, 8
    sup = SparseState(layout, {tuple(t1): 0.6, tuple(t2): 0.8j})
    out = cr.index_to_residue_product(sup, spec, regs)
    assert out.support_size == 2
    i1, i2 = (layout.index(c) for c in regs.comps)
    got = {(k[i1], k[i2]): a for k, a in out.entries.items()}
    assert abs(got[(0, 3)] - 0.6) < 1e-12       # 3 mod 3, 3 mod 4
    assert abs(got[(2, 0)] - 0.8j) < 1e-12      # 8 mod 3, 8 mod 4


def test_scaled_product_example(env13):
    spec, layout, regs = env13
    out = cr.index_to_scaled_product(SparseState.basis(layout, {regs.w: 7}), spec, regs)
    assert component_values(out, layout, regs) == (4, 9)  # 4*7 mod 12, 3*7 mod 12
    out = cr.index_to_scaled_product(SparseState.basis(layout, {regs.w: 0}), spec, regs)
    assert component_values(out, layout, regs) == (0, 0)


def test_scaled_product_identity_exhaustive(env13):
    spec, layout, regs = env13
    for s in range(12):
        out = cr.index_to_scaled_product(SparseState.basis(layout, {regs.w: s}),
                                         spec, regs)
        vals = component_values(out, layout, regs)
        for v, c in zip(vals, spec.basis.components):
            assert v == (c.M * (s % c.m)) % 12 == (c.M * s) % 12


def test_group_state_decomposition_examples(env13):
    spec, layout, regs = env13
    out = cr.group_state_to_subgroup_product(
        SparseState.basis(layout, {regs.w: pow(2, 7, 13)}), spec, regs)
    assert component_values(out, layout, regs) == (3, 5)  # 3^1 and 8^3 mod 13
    out = cr.group_state_to_subgroup_product(
        SparseState.basis(layout, {regs.w: 1}), spec, regs)
    assert component_values(out, layout, regs) == (1, 1)
    # reconstruction identity behind the uncompute: 3^1 * 8^9 = 2^7 (mod 13)
    assert (pow(3, 1, 13) * pow(8, 9, 13)) % 13 == 11 == pow(2, 7, 13)


def test_group_state_decomposition_exhaustive_and_adjoint(env13):
    spec, layout, regs = env13
    n_dim = layout.dim(regs.w)
    seq = cr.subgroup_product_gates(spec, regs, n_dim)
    gate = hilbert.Sequence(tuple(seq))
    for s in range(12):
        st = SparseState.basis(layout, {regs.w: pow(2, s, 13)})
        out = apply(st, gate)
        vals = component_values(out, layout, regs)
        want = tuple(pow(gen, s % c.m, 13) for gen, c in
                     zip(spec.subgroup_generators, spec.basis.components))
        assert vals == want
        back = apply(out, adjoint(gate))
        assert hilbert.fidelity(back, st) > 1 - 1e-12


def test_subspace_lift(env13):
    spec, layout, regs = env13
    descs = cr.descriptors(spec)
    lift = cr.subspace_lift(descs[0], descs[1], regs.comps[0])
    i = layout.index(regs.comps[0])
    assert apply(SparseState.basis(layout, {regs.comps[0]: 1}), lift).sole_tuple()[i] == 1
    assert apply(SparseState.basis(layout, {regs.comps[0]: 3}), lift).sole_tuple()[i] == 8
    assert apply(SparseState.basis(layout, {regs.comps[0]: 9}), lift).sole_tuple()[i] == 12
    # identity outside both basis lists
    assert apply(SparseState.basis(layout, {regs.comps[0]: 7}), lift).sole_tuple()[i] == 7
    # roundtrip on the source subspace
    st = SparseState.basis(layout, {regs.comps[0]: 9})
    assert apply(apply(st, lift), adjoint(lift)).entries == st.entries
    with pytest.raises(DomainError):
        cr.subspace_lift(descs[1], descs[0], regs.comps[0])


def test_to_largest_subspace(env13):
    spec, layout, regs = env13
    st = SparseState.basis(layout, {regs.comps[0]: 3, regs.comps[1]: 5})
    out = cr.to_largest_subspace(st, spec, regs)
    assert component_values(out, layout, regs) == (8, 5)
    st0 = SparseState.basis(layout, {regs.comps[0]: 1, regs.comps[1]: 1})
    assert component_values(cr.to_largest_subspace(st0, spec, regs), layout, regs) == (1, 1)
    # each lifted register decodes back to s mod m_k in the top subspace
    h_r = spec.subgroup_generators[-1]
    for s in range(12):
        st = cr.group_state_to_subgroup_product(
            SparseState.basis(layout, {regs.w: pow(2, s, 13)}), spec, regs)
        top = cr.to_largest_subspace(st, spec, regs)
        vals = component_values(top, layout, regs)
        for v, c in zip(vals, spec.basis.components):
            assert classical_dlog(13, h_r, v) % c.m == s % c.m
    # support outside the source subspace is rejected
    bad = SparseState.basis(layout, {regs.comps[0]: 8})
    with pytest.raises(hilbert.SimulationError):
        cr.to_largest_subspace(bad, spec, regs)


def _aux_env(p, hidden_s, theta=math.pi):
    spec = make_group_spec(p)
    n_dim = 2 ** p.bit_length()
    regs = cr.ReductionRegs.default(spec.r)
    strip = hp.StripRegs(nh="NH", bh="BH", comps=regs.comps,
                         recs=tuple(f"R{k+1}" for k in range(spec.r)))
    cfg = hp.ProgramConfig.from_spec(spec)
    registers = [Register(regs.w, n_dim, "work")]
    registers += [Register(c, n_dim, "aux") for c in regs.comps]
    registers += [Register(regs.a, n_dim), Register(regs.b, n_dim),
                  Register(regs.prod, n_dim)]
    registers += [Register("NH", 2, "halt"), Register("BH", cfg.branch_dim, "branch")]
    registers += [Register(x, cfg.record_dim, "record") for x in strip.recs]
    registers += [Register("SEARCH", n_dim, "work")]
    layout = RegisterLayout(registers)
    ospec = OracleSpec(hidden_s, theta, "subspace_selective", spec)
    base = make_subspace_oracle(ospec, layout, regs.w,
                                designated=tuple(n for n in layout.names
                                                 if n not in (regs.w, "SEARCH")))
    return spec, layout, regs, strip, base, n_dim


@pytest.mark.parametrize("k,s_k", [(0, 1), (1, 3)])
def test_aux_oracle_selective_on_hidden_component(k, s_k):
    spec, layout, regs, strip, base, n_dim = _aux_env(13, hidden_s=7)
    red = cr.reduction_gate(spec, regs, strip, k, n_dim)
    st = apply(SparseState.basis(layout, {regs.w: pow(2, 7, 13)}), red)
    aux = cr.make_aux_oracle(base, spec, k, math.pi, regs, strip, "SEARCH", n_dim)
    h_r = spec.subgroup_generators[-1]
    led = hilbert.GateLedger()
    for x in range(spec.largest_order):
        trial = apply(st, gates.transposition(0, pow(h_r, x, 13), "SEARCH"))
        out = apply(trial, aux, led)
        amp = list(out.entries.values())[0]
        assert out.support_size == 1
        if x == s_k:
            assert abs(amp + 1) < 1e-9   # phase fired on the hidden component
        else:
            assert abs(amp - 1) < 1e-9
    assert led.count("oracle-call") == spec.largest_order  # one base call each


def test_aux_oracle_single_call_per_application():
    spec, layout, regs, strip, base, n_dim = _aux_env(13, hidden_s=7)
    red = cr.reduction_gate(spec, regs, strip, 1, n_dim)
    st = apply(SparseState.basis(layout, {regs.w: 11}), red)
    aux = cr.make_aux_oracle(base, spec, 1, math.pi, regs, strip, "SEARCH", n_dim)
    led = hilbert.GateLedger()
    apply(st, aux, led)
    assert led.count("oracle-call") == 1
