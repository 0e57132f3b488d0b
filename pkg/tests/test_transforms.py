import numpy as np
import pytest

from cdqs_lab.channels import identity_channel, max_mixed
from cdqs_lab.errors import ArgumentError
from cdqs_lab.linalg import SystemDims, partial_trace
from cdqs_lab.protocols import predicates
from cdqs_lab.protocols.verify import compose_joint, verify_cdqs
from cdqs_lab.protocols.zoo import (
    lifted_equality,
    lifted_equality_qutrit,
    parallel_cdqs,
)
from cdqs_lab.sdp.certify import certify_security
from cdqs_lab.sdp.programs import diamond_norm
from cdqs_lab.transforms.closure import (
    and_compose,
    negate,
    or_compose,
    qss_2of2,
    qss_2of3,
    with_alice_noise,
)
from conftest import random_pure


# -- quantum secret sharing gadgets -----------------------------------------

def test_qss22_reconstruction_identity():
    enc, rec = qss_2of2()
    comp = rec.compose(enc)
    assert np.max(np.abs(comp.choi - identity_channel(2).choi)) < 1e-12


def test_qss22_marginals_input_independent(rng):
    enc, _ = qss_2of2()
    dims = SystemDims([("Q1", 2), ("Q2", 4)])
    for _ in range(5):
        out = enc.apply(random_pure(rng, 2))
        share1 = partial_trace(out, dims, ["Q1"])
        share2 = partial_trace(out, dims, ["Q2"])
        assert np.max(np.abs(share1 - np.eye(2) / 2)) < 1e-12
        assert np.max(np.abs(share2 - np.eye(4) / 4)) < 1e-12


def test_qss23_single_share_blind_and_pairs_reconstruct(rng):
    qss = qss_2of3()
    v = qss.isometry
    assert np.max(np.abs(v.conj().T @ v - np.eye(3))) < 1e-12
    dims = SystemDims([("s0", 3), ("s1", 3), ("s2", 3)])
    for _ in range(4):
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        rho = np.outer(v @ psi, (v @ psi).conj())
        for lab in ("s0", "s1", "s2"):
            marg = partial_trace(rho, dims, [lab])
            assert np.max(np.abs(marg - np.eye(3) / 3)) < 1e-10
        target = np.outer(psi, psi.conj())
        for pair, keep in [((0, 1), ["s0", "s1"]), ((1, 2), ["s1", "s2"]),
                           ((0, 2), ["s0", "s2"])]:
            got = qss.reconstructor(pair).apply(partial_trace(rho, dims, keep))
            assert np.max(np.abs(got - target)) < 1e-10


def test_qss23_qubit_embedding_roundtrip(rng):
    qss = qss_2of3()
    psi2 = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi2 /= np.linalg.norm(psi2)
    embedded = qss.embed @ psi2
    back = qss.unembed().apply(np.outer(embedded, embedded.conj()))
    assert np.max(np.abs(back - np.outer(psi2, psi2.conj()))) < 1e-12


# -- negation ----------------------------------------------------------------

def test_negate_certifies_neq():
    p = lifted_equality(1)
    np_ = negate(p)
    assert np_.predicate == predicates.non_equality(1)
    rep = verify_cdqs(np_)
    assert rep.passed
    assert rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6


def test_negate_message_size_bound():
    p = lifted_equality(2)
    np_ = negate(p)
    bound = p.message_qubits() + 2 * p.resource_qubits_per_side() + 1
    assert np_.message_qubits() <= bound


def test_negate_involution():
    p = lifted_equality(1)
    nn = negate(negate(p))
    assert nn.predicate == p.predicate
    rep = verify_cdqs(nn)
    assert rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6


def test_negate_parameter_map():
    p = with_alice_noise(lifted_equality(1), 0.04)
    np_ = negate(p)
    assert abs(np_.declared_delta - 2.0 * np.sqrt(p.declared_eps)) < 1e-12
    assert abs(np_.declared_eps - 2.0 * np.sqrt(p.declared_delta)) < 1e-12


# -- AND / OR ----------------------------------------------------------------

def test_and_compose_perfect():
    p1 = lifted_equality(1)
    pand = and_compose(p1, p1)
    assert np.array_equal(pand.predicate.table,
                          predicates.equality(1).table)
    rep = verify_cdqs(pand)
    assert rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6


def test_and_compose_noisy_bound():
    eps = 0.02
    p1 = with_alice_noise(lifted_equality(1), eps)
    p2 = with_alice_noise(parallel_cdqs(lifted_equality(1), 2), eps)
    rep = verify_cdqs(and_compose(p1, p2))
    assert rep.eps_hat <= 2 * eps + 1e-3


def test_and_zero_input_simulator_single_sub_zero():
    """When exactly one sub-predicate is 0 the composed protocol still has a
    simulator within the sub-protocol's privacy slack."""
    p_eq = lifted_equality(1)
    p_ip4 = parallel_cdqs(
        # inner product at n=1 is AND(x, y); its lift hides the 4-dim share
        __import__("cdqs_lab.protocols.zoo", fromlist=["lifted_inner_product"])
        .lifted_inner_product(1), 2)
    pand = and_compose(p_eq, p_ip4)
    rep = verify_cdqs(pand)
    for row in rep.rows:
        sub0 = predicates.equality(1).value(row.x, row.y) == 0
        sub1 = predicates.inner_product(1).value(row.x, row.y) == 0
        if row.f == 0 and sub0 != sub1:
            assert row.delta_ub <= 1e-6


def test_or_compose_perfect_and_noisy():
    q = lifted_equality_qutrit(1)
    por = or_compose(q, q)
    rep = verify_cdqs(por)
    assert rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6
    qn = with_alice_noise(q, 0.02)
    rep2 = verify_cdqs(or_compose(qn, qn))
    assert rep2.delta_hat <= 1e-3     # 2*delta + slack with delta = 0


def test_or_requires_qutrit_subs():
    with pytest.raises(ArgumentError):
        or_compose(lifted_equality(1), lifted_equality(1))


def test_zoo_certified_within_declared():
    for p in (lifted_equality(1), negate(lifted_equality(1))):
        rep = verify_cdqs(p)
        assert rep.eps_hat <= p.declared_eps + 1e-6
        assert rep.delta_hat <= p.declared_delta + 1e-6
