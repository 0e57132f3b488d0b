import numpy as np
import pytest

from cdqs_lab import linalg
from cdqs_lab.errors import ArgumentError, CapacityError
from cdqs_lab.linalg import (
    SystemDims,
    fidelity,
    haar_random_unitary,
    hermitian_basis,
    load_matrix_text,
    max_entangled_vec,
    partial_trace,
    save_matrix_text,
    tensor_product,
    trace_distance,
    traceless_hermitian_basis,
)
from conftest import random_pure, random_state


def test_tensor_identity():
    assert np.allclose(tensor_product(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_basis_case():
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    assert np.allclose(tensor_product(p0, p1), np.diag([0, 1, 0, 0]))


def test_tensor_vector_consistency(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    lhs = tensor_product(a, b) @ np.kron(v, w)
    rhs = np.kron(a @ v, b @ w)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_tensor_capacity_cap():
    big = np.eye(2048, dtype=complex)
    with pytest.raises(CapacityError):
        tensor_product(big, big)


def test_partial_trace_product_state(rng):
    rho = random_state(rng, 3)
    sigma = random_state(rng, 4)
    dims = SystemDims([("A", 3), ("B", 4)])
    red = partial_trace(np.kron(rho, sigma), dims, ["A"])
    assert np.max(np.abs(red - rho)) < 1e-12


def test_partial_trace_max_entangled_marginal():
    v = max_entangled_vec(2)
    rho = np.outer(v, v.conj())
    red = partial_trace(rho, SystemDims([("A", 2), ("B", 2)]), ["A"])
    assert np.max(np.abs(red - np.eye(2) / 2)) < 1e-12


def test_partial_trace_iterated_equals_direct(rng):
    rho = random_state(rng, 8)
    dims = SystemDims([("A", 2), ("B", 2), ("C", 2)])
    direct = partial_trace(rho, dims, ["A"])
    step1 = partial_trace(rho, dims, ["A", "B"])
    step2 = partial_trace(step1, SystemDims([("A", 2), ("B", 2)]), ["A"])
    assert np.max(np.abs(direct - step2)) < 1e-12


def test_partial_trace_preserves_trace_and_positivity(rng):
    for _ in range(20):
        rho = random_state(rng, 16)
        dims = SystemDims([("A", 2), ("B", 2), ("C", 2), ("D", 2)])
        red = partial_trace(rho, dims, ["B", "D"])
        assert abs(np.trace(red).real - 1.0) < 1e-12
        assert np.min(np.linalg.eigvalsh(red)) > -1e-12


def test_partial_trace_unknown_label():
    with pytest.raises(ArgumentError):
        partial_trace(np.eye(4) / 4, SystemDims([("A", 2), ("B", 2)]), ["Z"])


def test_trace_distance_basics():
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    assert trace_distance(p0, p0) == 0.0
    assert abs(trace_distance(p0, p1) - 2.0) < 1e-14


def test_trace_distance_max_entangled_vs_mixed():
    v = max_entangled_vec(2)
    phi = np.outer(v, v.conj())
    assert abs(trace_distance(phi, np.eye(4) / 4) - 1.5) < 1e-12


def test_trace_distance_rejects_non_hermitian():
    m = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(ArgumentError):
        trace_distance(m, np.eye(2, dtype=complex) / 2)


def test_trace_distance_triangle_and_unitary_invariance(rng):
    for _ in range(25):
        a, b, c = (random_state(rng, 4) for _ in range(3))
        dab = trace_distance(a, b)
        assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-10
        u = haar_random_unitary(4, rng)
        assert abs(dab - trace_distance(u @ a @ u.conj().T,
                                        u @ b @ u.conj().T)) < 1e-10


def test_fidelity_basics():
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    assert abs(fidelity(p0, p0) - 1.0) < 1e-12
    assert fidelity(p0, p1) < 1e-12


def test_fidelity_rejects_negative_eigenvalues():
    bad = np.diag([1.2, -0.2]).astype(complex)
    with pytest.raises(ArgumentError):
        fidelity(bad, np.eye(2, dtype=complex) / 2)


def test_fuchs_van_de_graaf_both_directions(rng):
    for _ in range(200):
        d = int(rng.integers(2, 5))
        rho, sigma = random_state(rng, d), random_state(rng, d)
        f = fidelity(rho, sigma)
        half_t = 0.5 * trace_distance(rho, sigma)
        assert 1.0 - np.sqrt(f) <= half_t + 1e-9
        assert half_t <= np.sqrt(1.0 - f) + 1e-9


def test_max_entangled_product_overlap_bound(rng):
    """F(Phi+, product) <= 1/2 for qubit pairs, scanned over random products."""
    v = max_entangled_vec(2)
    phi = np.outer(v, v.conj())
    worst = 0.0
    for _ in range(10000):
        prod = np.kron(random_pure(rng, 2), random_pure(rng, 2))
        # Pure-state overlap equals the general fidelity here.
        worst = max(worst, float(np.real(np.trace(phi @ prod))))
    assert worst <= 0.5 + 1e-9


def test_haar_dim1_and_determinism():
    u = haar_random_unitary(1, seed=7)
    assert abs(abs(u[0, 0]) - 1.0) < 1e-12
    a = haar_random_unitary(5, seed=123)
    b = haar_random_unitary(5, seed=123)
    assert np.array_equal(a, b)


def test_haar_unitarity_and_first_moment():
    rng = np.random.default_rng(5)
    acc = 0.0
    n = 10000
    for _ in range(n):
        u = haar_random_unitary(4, rng)
        acc += abs(u[1, 1]) ** 2
    assert abs(acc / n - 0.25) < 0.25 * 0.05
    u = haar_random_unitary(8, seed=1)
    assert np.max(np.abs(u.conj().T @ u - np.eye(8))) < 1e-10


def test_haar_left_invariance_statistic():
    """E|tr U|^2 = 1 for Haar; fixed left multiplication must not move it."""
    rng = np.random.default_rng(11)
    v = haar_random_unitary(4, seed=99)
    plain, rotated = 0.0, 0.0
    n = 4000
    for _ in range(n):
        u = haar_random_unitary(4, rng)
        plain += abs(np.trace(u)) ** 2
        rotated += abs(np.trace(v @ u)) ** 2
    assert abs(plain / n - 1.0) < 0.15
    assert abs(rotated / n - 1.0) < 0.15


def test_matrix_text_roundtrip_bit_exact(rng):
    m = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    back = load_matrix_text(save_matrix_text(m))
    assert np.array_equal(m, back)


def test_matrix_text_malformed():
    with pytest.raises(ArgumentError):
        load_matrix_text("2 2\n1 0 0 0")
    with pytest.raises(ArgumentError):
        load_matrix_text("nope")


def test_hermitian_bases_orthonormal():
    for d in (2, 3, 4):
        full = hermitian_basis(d)
        assert len(full) == d * d
        gram = np.array([[np.trace(a.conj().T @ b).real for b in full] for a in full])
        assert np.max(np.abs(gram - np.eye(d * d))) < 1e-12
        tl = traceless_hermitian_basis(d)
        assert len(tl) == d * d - 1
        assert all(abs(np.trace(t)) < 1e-12 for t in tl)


def test_system_dims_invariants():
    with pytest.raises(ArgumentError):
        SystemDims([("A", 2), ("A", 3)])
    with pytest.raises(ArgumentError):
        SystemDims([("A", 0)])
    dims = SystemDims([("A", 2), ("B", 3)])
    assert dims.total_dim == 6
    with pytest.raises(ArgumentError):
        dims.check_matrix(np.eye(5))
