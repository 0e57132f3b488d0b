import numpy as np
import pytest
import scipy.optimize

from cdqs_lab.errors import SolverError
from cdqs_lab.linalg import herm, hermitian_basis
from cdqs_lab.sdp.solver import (
    ConeProgram,
    SdpProblem,
    solve,
    solve_cone,
    solve_partial_trace_sdp,
)


def test_max_trace_below_identity():
    d = 2
    prob = SdpProblem(block_dims=[d, d],
                      objective=[np.eye(d, dtype=complex),
                                 np.zeros((d, d), dtype=complex)],
                      maximize=True)
    for h in hermitian_basis(d):
        prob.add({0: h, 1: h}, "=", float(np.real(np.trace(h))))
    sol = solve(prob)
    assert sol.ok
    assert abs(sol.primal_value - 2.0) < 1e-7
    assert abs(sol.primal_value - sol.dual_value) <= 1e-7 * (1 + abs(sol.primal_value))


def test_largest_eigenvalue_matches_eigh(rng):
    for d in (2, 3, 5, 8):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a = herm(a)
        prob = SdpProblem(block_dims=[d], objective=[a], maximize=True)
        prob.add({0: np.eye(d, dtype=complex)}, "=", 1.0)
        sol = solve(prob)
        assert sol.ok
        lam = float(np.linalg.eigvalsh(a)[-1])
        assert abs(sol.primal_value - lam) < 1e-7


def test_smallest_eigenvalue_minimization(rng):
    a = herm(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    prob = SdpProblem(block_dims=[4], objective=[a])
    prob.add({0: np.eye(4, dtype=complex)}, "=", 1.0)
    sol = solve(prob)
    assert sol.ok
    assert abs(sol.primal_value - float(np.linalg.eigvalsh(a)[0])) < 1e-7


def test_infeasible_toy():
    prob = SdpProblem(block_dims=[2], objective=[np.zeros((2, 2), dtype=complex)])
    prob.add({0: np.eye(2, dtype=complex)}, "=", -1.0)
    sol = solve(prob)
    assert sol.status == "infeasible"


def test_inequality_rows():
    # max x0 + x1 s.t. x0 + 2 x1 <= 4, x0 <= 1 over scalars >= 0.
    prob = SdpProblem(block_dims=[1, 1],
                      objective=[np.ones((1, 1), dtype=complex),
                                 np.ones((1, 1), dtype=complex)],
                      maximize=True)
    prob.add({0: np.array([[1.0]], dtype=complex),
              1: np.array([[2.0]], dtype=complex)}, "<=", 4.0)
    prob.add({0: np.array([[1.0]], dtype=complex)}, "<=", 1.0)
    sol = solve(prob)
    assert sol.ok
    assert abs(sol.primal_value - 2.5) < 1e-7


def test_lp_section_against_scipy(rng):
    """Random LPs cross-checked against the scipy simplex/HiGHS oracle."""
    for trial in range(8):
        m, nv = 4, 7
        a_eq = rng.normal(size=(m, nv))
        x_feas = rng.random(nv) + 0.2
        b_eq = a_eq @ x_feas
        c = rng.random(nv) + 0.1     # positive costs keep the LP bounded
        ref = scipy.optimize.linprog(c, A_eq=a_eq, b_eq=b_eq,
                                     bounds=[(0, None)] * nv, method="highs")
        prog = ConeProgram(
            block_dims=[1] * nv,
            C=[np.array([[c[i]]], dtype=complex) for i in range(nv)],
            A=[{i: np.array([[a_eq[j, i]]], dtype=complex) for i in range(nv)}
               for j in range(m)],
            b=b_eq)
        sol = solve_cone(prog)
        assert sol.status == "optimal"
        assert abs(sol.pobj - ref.fun) < 1e-6 * (1 + abs(ref.fun))


def test_mixed_lp_and_psd_blocks(rng):
    # max Tr(A X) + x s.t. Tr X + x = 1, X >= 0, x >= 0.
    a = herm(rng.normal(size=(3, 3)))
    lam = float(np.linalg.eigvalsh(a)[-1])
    prob = SdpProblem(block_dims=[3, 1],
                      objective=[a, np.array([[0.5]], dtype=complex)],
                      maximize=True)
    prob.add({0: np.eye(3, dtype=complex), 1: np.array([[1.0]], dtype=complex)},
             "=", 1.0)
    sol = solve(prob)
    assert sol.ok
    assert abs(sol.primal_value - max(lam, 0.5)) < 1e-7


def test_witness_psd_invariant(rng):
    a = herm(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    prob = SdpProblem(block_dims=[4], objective=[a], maximize=True)
    prob.add({0: np.eye(4, dtype=complex)}, "=", 1.0)
    sol = solve(prob)
    assert sol.ok
    assert float(np.min(np.linalg.eigvalsh(herm(sol.witness[0])))) >= -1e-8


def test_partial_trace_solver_matches_generic(rng):
    """The structured decoder path must agree with the generic cone solver."""
    for _ in range(4):
        d_m, d_q = 3, 2
        f = rng.normal(size=(d_m * d_q, d_m * d_q)) + \
            1j * rng.normal(size=(d_m * d_q, d_m * d_q))
        f = herm(f)
        val, x, gap = solve_partial_trace_sdp(f, d_m, d_q)
        assert gap < 1e-6
        basis = hermitian_basis(d_m)
        prog = ConeProgram(
            block_dims=[d_m * d_q], C=[-f],
            A=[{0: np.kron(h, np.eye(d_q, dtype=complex))} for h in basis],
            b=np.array([float(np.real(np.trace(h))) for h in basis]))
        ref = solve_cone(prog)
        assert ref.status == "optimal"
        assert abs(val - (-0.5 * (ref.pobj + ref.dobj))) < 1e-6
        # The witness satisfies the constraint and the cone.
        pt = np.einsum("aqbq->ab", x.reshape(d_m, d_q, d_m, d_q))
        assert np.max(np.abs(pt - np.eye(d_m))) < 1e-7
        assert float(np.min(np.linalg.eigvalsh(x))) > -1e-8


def test_partial_trace_solver_raises_on_stall():
    with pytest.raises(SolverError):
        solve_partial_trace_sdp(np.eye(4, dtype=complex), 2, 2, max_iter=2)


def test_env_var_iteration_cap(monkeypatch, rng):
    from cdqs_lab.sdp import solver as solver_mod
    monkeypatch.setenv(solver_mod.ENV_MAX_ITER, "11")
    assert solver_mod._max_iter_default() == 11
    a = herm(rng.normal(size=(3, 3)))
    prob = SdpProblem(block_dims=[3], objective=[a], maximize=True)
    prob.add({0: np.eye(3, dtype=complex)}, "=", 1.0)
    sol = solve(prob)
    assert sol.iterations <= 11
