import numpy as np
import pytest

from cdqs_lab.errors import ArgumentError
from cdqs_lab.protocols.cds import parallel_cds
from cdqs_lab.protocols.verify import compose_joint, referee_state, verify_cdqs
from cdqs_lab.protocols.zoo import (
    REGISTRY,
    build_named,
    cds_equality,
    cds_to_cdqs_lift,
    lifted_equality,
    lifted_equality_qutrit,
    list_protocols,
    parallel_cdqs,
)


def test_lift_requires_two_bit_secret():
    with pytest.raises(ArgumentError):
        cds_to_cdqs_lift(cds_equality(1))


def test_lift_message_accounting():
    base = parallel_cds(cds_equality(2), 2)
    p = cds_to_cdqs_lift(base)
    # One qubit rides along with the classical message bits.
    m0_dim = sum(p.m0_space().values())
    assert m0_dim == (1 << base.m0_bits) * 2
    assert p.meta["classical_message_bits"] == base.communication_bits
    assert p.message_qubits() == base.m0_bits + 1 + base.m1_bits


def test_lift_zero_input_referee_state_is_padded():
    """On 0-inputs the referee's padded qubit is maximally mixed and fully
    decoupled from the reference: the canonical simulator is exact."""
    p = lifted_equality(1)
    rho = referee_state(p, 0, 1)
    d_q = 2
    for blk in rho.blocks.values():
        dc = blk.shape[0] // d_q
        b4 = blk.reshape(d_q, dc, d_q, dc)
        # Reference marginal of each block is proportional to I/2.
        ref = np.einsum("iaja->ij", b4)
        assert np.max(np.abs(ref - np.eye(2) * np.trace(ref).real / 2)) < 1e-12


def test_lift_declared_parameters():
    base = parallel_cds(cds_equality(1), 2)
    p = cds_to_cdqs_lift(base)
    assert p.declared_eps == 0.0
    assert p.declared_delta == 0.0


def test_qutrit_lift_verifies():
    rep = verify_cdqs(lifted_equality_qutrit(1))
    assert rep.passed and rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6


def test_parallel_cdqs_dims():
    p = parallel_cdqs(lifted_equality(1), 2)
    assert p.d_q == 4
    assert len(p.rand_probs) == len(lifted_equality(1).rand_probs) ** 2


def test_registry_and_builders():
    listing = list_protocols()
    assert set(listing) == set(REGISTRY)
    for name in ("eq", "ip", "eq_lifted", "route_eq"):
        built = build_named(name, 1)
        assert built is not None
    with pytest.raises(ArgumentError):
        build_named("unknown", 1)


def test_neq_zoo_entry():
    p = build_named("neq", 1)
    rep = verify_cdqs(p)
    assert rep.passed
    assert rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6
