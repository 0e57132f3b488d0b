import numpy as np
import pytest

from cdqs_lab.errors import ArgumentError
from cdqs_lab.protocols import predicates


def test_named_match_mathematical_definitions():
    for n in (1, 2, 3):
        eq = predicates.equality(n)
        neq = predicates.non_equality(n)
        ip = predicates.inner_product(n)
        gt = predicates.greater_than(n)
        disj = predicates.disjointness(n)
        for x in range(1 << n):
            for y in range(1 << n):
                assert eq.value(x, y) == (1 if x == y else 0)
                assert neq.value(x, y) == (1 if x != y else 0)
                dot = sum(((x >> i) & 1) * ((y >> i) & 1) for i in range(n)) % 2
                assert ip.value(x, y) == dot
                assert gt.value(x, y) == (1 if x > y else 0)
                assert disj.value(x, y) == (1 if (x & y) == 0 else 0)


def test_negation_and_boolean_combinations():
    eq = predicates.equality(2)
    assert eq.negation() == predicates.non_equality(2)
    ip = predicates.inner_product(2)
    both = eq.and_with(ip)
    either = eq.or_with(ip)
    for x, y in eq.inputs():
        assert both.value(x, y) == (eq.value(x, y) & ip.value(x, y))
        assert either.value(x, y) == (eq.value(x, y) | ip.value(x, y))


def test_hex_roundtrip():
    eq = predicates.equality(2)
    back = predicates.from_hex(2, eq.to_hex())
    assert back == eq


def test_table_validation():
    with pytest.raises(ArgumentError):
        predicates.Predicate(1, [0, 1, 2, 0])
    with pytest.raises(ArgumentError):
        predicates.Predicate(1, [0, 1, 1])
    with pytest.raises(ArgumentError):
        predicates.Predicate(9, np.zeros(4 ** 9, dtype=np.uint8))
    with pytest.raises(ArgumentError):
        predicates.named("nope", 2)
