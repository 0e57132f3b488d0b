import numpy as np
import pytest

from cdqs_lab.errors import CapacityError
from cdqs_lab.protocols import predicates
from cdqs_lab.protocols.cds import CdsProtocol, parallel_cds, verify_cds_exact
from cdqs_lab.protocols.zoo import cds_equality, cds_equality_mod, cds_inner_product


def test_equality_exhaustive_n123():
    for n in (1, 2, 3):
        rep = verify_cds_exact(cds_equality(n))
        assert rep.eps_hat == 0.0
        assert rep.delta_hat < 1e-9
        assert rep.passed
        assert rep.meta["communication_bits"] == 2


def test_equality_decode_on_one_input():
    c = cds_equality(2)
    # x = y = 0b01, z = 1: the referee's XOR decodes z for every r.
    x = y = 0b01
    for r in range(len(c.rand_probs)):
        assert (c.m0[x, 1, r] ^ c.m1[y, r]) == 1


def test_equality_messages_uniform_on_zero_inputs():
    c = cds_equality(2)
    rep = verify_cds_exact(c)
    for row in rep.rows:
        if row.f == 0:
            assert row.delta_ub < 1e-9


def test_inner_product_exhaustive_n123():
    for n in (1, 2, 3):
        rep = verify_cds_exact(cds_inner_product(n))
        assert rep.eps_hat == 0.0
        assert rep.delta_hat < 1e-9
        assert rep.passed
        assert rep.meta["communication_bits"] == n + 2


def test_inner_product_decode_example():
    c = cds_inner_product(2)
    # x = 11, y = 01 has <x,y> = 1; referee computes <x,beta> + gamma = s
    # and z = alpha + s for every randomness value.
    x, y = 0b11, 0b01
    for r in range(len(c.rand_probs)):
        rvec, s = r >> 1, r & 1
        code = c.m0[x, 0, r]
        alpha, gamma = code >> 1, code & 1
        beta = c.m1[y, r]
        dot = bin(x & beta).count("1") % 2
        assert (dot ^ gamma) == s
        assert (alpha ^ s) == 0


def test_leaky_protocol_delta_one():
    """Alice sends the secret in the clear: the best simulator is the
    uniform mixture, at distance 1 for a binary secret."""
    pred = predicates.equality(1)
    m0 = np.zeros((2, 2, 2), dtype=np.int64)
    for x in range(2):
        for z in range(2):
            m0[x, z, :] = z
    m1 = np.zeros((2, 2), dtype=np.int64)
    leaky = CdsProtocol(predicate=pred, num_secrets=2,
                        rand_probs=np.array([0.5, 0.5]), m0=m0, m1=m1,
                        name="leaky")
    rep = verify_cds_exact(leaky)
    for row in rep.rows:
        if row.f == 0:
            assert abs(row.delta_ub - 1.0) < 1e-7


def test_constant_messages_guessing_rate():
    pred = predicates.equality(1)
    m0 = np.zeros((2, 2, 2), dtype=np.int64)
    m1 = np.zeros((2, 2), dtype=np.int64)
    blind = CdsProtocol(predicate=pred, num_secrets=2,
                        rand_probs=np.array([0.5, 0.5]), m0=m0, m1=m1,
                        name="blind")
    rep = verify_cds_exact(blind)
    for row in rep.rows:
        if row.f == 1:
            assert abs(row.eps_ub - 0.5) < 1e-12      # correctness 1/|Z|
        else:
            assert row.delta_ub < 1e-9


def test_parallel_cds_hides_product_secret():
    c2 = parallel_cds(cds_equality(1), 2)
    assert c2.num_secrets == 4
    rep = verify_cds_exact(c2)
    assert rep.eps_hat == 0.0 and rep.delta_hat < 1e-9


def test_equality_mod3():
    rep = verify_cds_exact(cds_equality_mod(1, 3))
    assert rep.eps_hat == 0.0 and rep.delta_hat < 1e-9
    rep2 = verify_cds_exact(cds_equality_mod(2, 3))
    assert rep2.eps_hat == 0.0 and rep2.delta_hat < 1e-9


def test_enumeration_cap():
    big = parallel_cds(cds_equality(3), 2)
    with pytest.raises(CapacityError):
        parallel_cds(big, 3)
