"""Boolean predicates f: {0,1}^n x {0,1}^n -> {0,1} as explicit truth tables."""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError

MAX_N = 6


class Predicate:
    """Truth table indexed by (x << n) | y, length 2^(2n)."""

    def __init__(self, n, table, name=None):
        n = int(n)
        if not (1 <= n <= MAX_N):
            raise ArgumentError(f"predicate arity n={n} outside [1, {MAX_N}]")
        table = np.asarray(table, dtype=np.uint8)
        if table.shape != (1 << (2 * n),):
            raise ArgumentError(
                f"table length {table.shape} != {(1 << (2 * n),)} for n={n}")
        if np.any(table > 1):
            raise ArgumentError("truth table entries must be bits")
        self.n = n
        self.table = table
        self.table.setflags(write=False)
        self.name = name or "custom"

    def value(self, x, y):
        return int(self.table[(x << self.n) | y])

    def inputs(self):
        for x in range(1 << self.n):
            for y in range(1 << self.n):
                yield x, y

    def ones(self):
        return [(x, y) for x, y in self.inputs() if self.value(x, y) == 1]

    def zeros(self):
        return [(x, y) for x, y in self.inputs() if self.value(x, y) == 0]

    def negation(self):
        return Predicate(self.n, 1 - self.table, name=f"not_{self.name}")

    def and_with(self, other):
        self._check_arity(other)
        return Predicate(self.n, self.table & other.table,
                         name=f"({self.name})and({other.name})")

    def or_with(self, other):
        self._check_arity(other)
        return Predicate(self.n, self.table | other.table,
                         name=f"({self.name})or({other.name})")

    def _check_arity(self, other):
        if self.n != other.n:
            raise ArgumentError(f"arity mismatch: {self.n} vs {other.n}")

    def to_hex(self):
        bits = "".join(str(int(b)) for b in self.table)
        return hex(int(bits, 2))[2:]

    def __eq__(self, other):
        return isinstance(other, Predicate) and self.n == other.n and \
            np.array_equal(self.table, other.table)

    def __repr__(self):
        return f"Predicate(n={self.n}, {self.name})"


def from_function(n, fn, name="custom"):
    table = np.zeros(1 << (2 * n), dtype=np.uint8)
    for x in range(1 << n):
        for y in range(1 << n):
            table[(x << n) | y] = 1 if fn(x, y) else 0
    return Predicate(n, table, name=name)


def from_hex(n, hexstring):
    total = 1 << (2 * n)
    bits = bin(int(hexstring, 16))[2:].zfill(total)
    if len(bits) > total:
        raise ArgumentError(f"hex table too long for n={n}")
    return Predicate(n, [int(b) for b in bits], name="hex")


def _popcount_and(x, y):
    return bin(x & y).count("1")


def equality(n):
    return from_function(n, lambda x, y: x == y, name="EQ")


def non_equality(n):
    return from_function(n, lambda x, y: x != y, name="NEQ")


def inner_product(n):
    return from_function(n, lambda x, y: _popcount_and(x, y) % 2 == 1, name="IP")


def greater_than(n):
    return from_function(n, lambda x, y: x > y, name="GT")


def disjointness(n):
    return from_function(n, lambda x, y: (x & y) == 0, name="DISJ")


NAMED = {
    "eq": equality,
    "neq": non_equality,
    "ip": inner_product,
    "gt": greater_than,
    "disj": disjointness,
}


def named(name, n):
    key = name.lower()
    if key not in NAMED:
        raise ArgumentError(f"unknown predicate {name!r}; have {sorted(NAMED)}")
    return NAMED[key](n)
