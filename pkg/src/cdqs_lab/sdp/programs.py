"""SDP builders: diamond norm, optimal decoder, constant simulator, discrimination.

Each builder encodes its problem for the in-house cone solver and reads the
relevant side of the primal/dual pair. LMI-form problems (free variables,
matrix inequalities) supply the data of the solver's dual and read `y`;
cone-form problems (PSD variable, scalar rows) read the primal witness.

All builders accept block-diagonal (labelled) data and exploit it: the
values are invariant under pinching onto the block decomposition, so per
block variables are exact, not a relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..blocks import BlockChoi, BlockState, fingerprint, group_blocks
from ..errors import ArgumentError, CapacityError, SolverError
from ..linalg import herm, hermitian_basis, require_hermitian, traceless_hermitian_basis
from .solver import ConeProgram, require_optimal, solve_cone, solve_partial_trace_sdp

# Parameter-count guard: a Schur system beyond this is refused, callers fall
# back to cheaper sound bounds.
SIM_PARAM_CAP = 1600
DIAMOND_PARAM_CAP = 1600


@dataclass
class DiamondResult:
    value: float
    rho: np.ndarray          # worst-case input density on the channel input
    gap: float
    iterations: int


@dataclass
class DecoderResult:
    fidelity: float
    blocks: dict             # label -> decoder Choi block on H_label (x) Q
    per_label: dict = field(default_factory=dict)


@dataclass
class SimulatorResult:
    value: float
    sigma: BlockState
    gap: float
    method: str = "sdp"


def _as_block_choi(delta, d_in=None, d_out=None):
    if isinstance(delta, BlockChoi):
        return delta
    delta = np.asarray(delta, dtype=complex)
    if d_in is None:
        raise ArgumentError("dense diamond-norm input needs d_in")
    if d_out is None:
        d_out = delta.shape[0] // d_in
    if delta.shape != (d_in * d_out, d_in * d_out):
        raise ArgumentError(f"Choi shape {delta.shape} != {(d_in * d_out,) * 2}")
    return BlockChoi(d_in, {("",): delta})


def diamond_norm(delta, d_in=None, d_out=None, tol=1e-9, param_cap=DIAMOND_PARAM_CAP):
    """Completely bounded trace norm of a Hermiticity-preserving map.

    `delta` is the Choi matrix of the difference map (dense array or
    BlockChoi). For a difference of two CPTP maps the value lies in [0, 2].
    Returns the optimal value together with the maximizing input density,
    which the certification see-saw re-optimizes decoders against.
    """
    bc = _as_block_choi(delta, d_in, d_out)
    dA = bc.d_in
    labels = sorted(bc.blocks, key=repr)
    m = dA ** 2 - 1 + sum((dA * bc.block_out_dim(lab)) ** 2 for lab in labels)
    if m > param_cap:
        raise CapacityError(
            f"diamond-norm SDP needs {m} parameters, beyond cap {param_cap}")
    for lab in labels:
        require_hermitian(bc.blocks[lab], "diamond-norm Choi block", atol=1e-9)

    rho_basis = traceless_hermitian_basis(dA)
    x_bases = {lab: hermitian_basis(dA * bc.block_out_dim(lab)) for lab in labels}

    # LMI form over u = (rho coords, X coords):
    #   S1_c = rho (x) I  -  X_c  >= 0,   S2_c = rho (x) I  +  X_c >= 0
    # with rho = I/dA + sum u_k h_k, maximizing sum_c <J_c, X_c>.
    block_dims = []
    C = []
    for lab in labels:
        n = dA * bc.block_out_dim(lab)
        block_dims += [n, n]
        C += [np.eye(n, dtype=complex) / dA, np.eye(n, dtype=complex) / dA]

    A = []
    b = []
    for h in rho_basis:
        row = {}
        for li, lab in enumerate(labels):
            hk = np.kron(h, np.eye(bc.block_out_dim(lab), dtype=complex))
            row[2 * li] = -hk
            row[2 * li + 1] = -hk
        A.append(row)
        b.append(0.0)
    for li, lab in enumerate(labels):
        J = herm(bc.blocks[lab])
        for H in x_bases[lab]:
            A.append({2 * li: H, 2 * li + 1: -H})
            b.append(float(np.real(np.trace(J @ H))))

    prog = ConeProgram(block_dims=block_dims, C=C, A=A, b=np.array(b))
    sol = require_optimal(solve_cone(prog, tol=tol), "diamond-norm SDP")

    rho = np.eye(dA, dtype=complex) / dA
    for k, h in enumerate(rho_basis):
        rho = rho + sol.y[k] * h
    rho = herm(rho)
    # Clean tiny negative directions so downstream purifications are valid.
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ v.conj().T
    rho = rho / max(np.real(np.trace(rho)), 1e-300)

    value = 0.5 * (sol.pobj + sol.dobj)
    return DiamondResult(value=float(value), rho=rho,
                         gap=abs(sol.pobj - sol.dobj), iterations=sol.iterations)


def diamond_norm_blocks(delta: BlockChoi, tol=1e-9, param_cap=DIAMOND_PARAM_CAP):
    return diamond_norm(delta, tol=tol, param_cap=param_cap)


def _fidelity_objective(jn_block, d_in, d_q, rho):
    """Objective matrix F with <F, J_D> = worst-input fidelity contribution.

    F_rho(D) = sum J_{D.N}[(a,q),(b,q')] rho[a,q] rho[q',b]; at rho = I/d
    this is the entanglement fidelity.
    """
    dc = jn_block.shape[0] // d_in
    j4 = jn_block.reshape(d_in, dc, d_in, dc)
    t = np.einsum("ambn,aq,pb->mqnp", j4, rho, rho, optimize=True)
    f = np.conj(t).reshape(dc * d_q, dc * d_q)
    return herm(f)


def optimal_decoder_fidelity(n, d_q=None, rho=None, tol=1e-9):
    """Best channel-reversal fidelity, exact per-label SDPs.

    `n` is the channel's Choi (BlockChoi, or dense with d_q = input dim).
    Returns the achieved fidelity f* (entanglement fidelity when rho is
    None) and the maximizing block-diagonal decoder M -> Q.
    """
    bc = _as_block_choi(n, d_q)
    d = bc.d_in
    if rho is None:
        rho = np.eye(d, dtype=complex) / d
    cache = {}
    blocks = {}
    per_label = {}
    total = 0.0
    for jn, labels in group_blocks(bc.blocks):
        dc = jn.shape[0] // d
        F = _fidelity_objective(jn, d, d, rho)
        scale = float(np.max(np.abs(F)))
        if scale < 1e-300:
            jd = np.kron(np.eye(dc, dtype=complex), np.eye(d, dtype=complex) / d)
            val = 0.0
        else:
            key = (dc, fingerprint(F / scale))
            if key in cache:
                unit_val, jd = cache[key]
            else:
                try:
                    unit_val, jd, _gap = solve_partial_trace_sdp(
                        F / scale, dc, d, tol=tol)
                except SolverError as exc:
                    raise SolverError(f"decoder SDP failed: {exc}") from exc
                cache[key] = (unit_val, jd)
            val = scale * unit_val
        for lab in labels:
            blocks[lab] = jd
            per_label[lab] = val
            total += val
    return DecoderResult(fidelity=float(total), blocks=blocks, per_label=per_label)


def _cross_block_trace_basis(dims):
    """Hermitian ops spanning 'traceless across the direct sum' directions."""
    labels = list(dims)
    ops = []
    for k in range(len(labels) - 1):
        da, db = dims[labels[k]], dims[labels[k + 1]]
        op = {labels[k]: np.eye(da, dtype=complex) / da,
              labels[k + 1]: -np.eye(db, dtype=complex) / db}
        norm = np.sqrt(1.0 / da + 1.0 / db)
        ops.append({l: m / norm for l, m in op.items()})
    return ops


def optimal_constant_simulator(n, d_in=None, tol=1e-9, param_cap=SIM_PARAM_CAP):
    """min over states sigma of || N - S_sigma . tr ||_diamond, one convex program.

    sigma enters the diamond-norm dual linearly: minimize lambda subject to
    Y >= +-(J_N - I (x) sigma), Tr_out Y <= lambda I, sigma >= 0, Tr sigma = 1.
    The trace constraint is folded into an affine parametrization of sigma,
    keeping every free variable strictly interior.
    """
    bc = _as_block_choi(n, d_in)
    dA = bc.d_in
    labels = sorted(bc.blocks, key=repr)
    dims = {lab: bc.block_out_dim(lab) for lab in labels}
    d_m = sum(dims.values())

    m = 1 + sum((dA * dims[lab]) ** 2 for lab in labels) + sum(
        d ** 2 for d in dims.values()) - 1
    if m > param_cap:
        raise CapacityError(
            f"constant-simulator SDP needs {m} parameters, beyond cap {param_cap}")

    y_bases = {lab: hermitian_basis(dA * dims[lab]) for lab in labels}
    sigma_ops = []
    for lab in labels:
        for g in traceless_hermitian_basis(dims[lab]):
            sigma_ops.append({lab: g})
    sigma_ops.extend(_cross_block_trace_basis(dims))

    # Cone blocks: per label B1_c, B2_c; then B3 (lambda I - Tr_out Y); then
    # sigma blocks B4_c. Variable order: [lambda, Y coords..., sigma coords...].
    block_dims = []
    C = []
    b1_at = {}
    b2_at = {}
    for lab in labels:
        nc = dA * dims[lab]
        sigma0 = np.eye(dims[lab], dtype=complex) / d_m
        b1_at[lab] = len(block_dims)
        block_dims.append(nc)
        C.append(herm(-bc.blocks[lab] + np.kron(np.eye(dA, dtype=complex), sigma0)))
        b2_at[lab] = len(block_dims)
        block_dims.append(nc)
        C.append(herm(bc.blocks[lab] - np.kron(np.eye(dA, dtype=complex), sigma0)))
    b3_at = len(block_dims)
    block_dims.append(dA)
    C.append(np.zeros((dA, dA), dtype=complex))
    b4_at = {}
    for lab in labels:
        b4_at[lab] = len(block_dims)
        block_dims.append(dims[lab])
        C.append(np.eye(dims[lab], dtype=complex) / d_m)

    A = []
    b = []
    # lambda
    A.append({b3_at: -np.eye(dA, dtype=complex)})
    b.append(-1.0)
    # Y coordinates
    for lab in labels:
        dc = dims[lab]
        for H in y_bases[lab]:
            h4 = H.reshape(dA, dc, dA, dc)
            tr_out = np.einsum("iaja->ij", h4)
            A.append({b1_at[lab]: -H, b2_at[lab]: -H, b3_at: tr_out})
            b.append(0.0)
    # sigma coordinates
    for ops in sigma_ops:
        row = {}
        for lab, g in ops.items():
            gk = np.kron(np.eye(dA, dtype=complex), g)
            row[b1_at[lab]] = -gk
            row[b2_at[lab]] = gk
            row[b4_at[lab]] = -g
        A.append(row)
        b.append(0.0)

    prog = ConeProgram(block_dims=block_dims, C=C, A=A, b=np.array(b))
    sol = require_optimal(solve_cone(prog, tol=tol), "constant-simulator SDP")

    sigma = {lab: np.eye(dims[lab], dtype=complex) / d_m for lab in labels}
    at = 1 + sum(len(y_bases[lab]) for lab in labels)
    for k, ops in enumerate(sigma_ops):
        for lab, g in ops.items():
            sigma[lab] = sigma[lab] + sol.y[at + k] * g
    value = -0.5 * (sol.pobj + sol.dobj)
    return SimulatorResult(value=float(value), sigma=BlockState(sigma),
                           gap=abs(sol.pobj - sol.dobj), method="sdp")


def simulator_upper_bound(n, d_in=None):
    """Sound, cheap upper bound on the simulator distance.

    Uses the canonical simulator sigma* = N(I/d) and the bound
    ||Delta||_diamond <= ||J(Delta)||_1 (from the purified-input form with
    ||sqrt(rho)||_inf <= 1). Exact in the perfectly-private regime.
    """
    bc = _as_block_choi(n, d_in)
    din = bc.d_in
    mix = np.eye(din, dtype=complex) / din
    tn = 0.0
    sigma_blocks = {}
    for j, labels in group_blocks(bc.blocks):
        dc = j.shape[0] // din
        j4 = j.reshape(din, dc, din, dc)
        sig = np.einsum("ij,iajb->ab", mix.T, j4)
        jsim = np.kron(np.eye(din, dtype=complex), sig)
        contrib = float(np.sum(np.abs(np.linalg.eigvalsh(herm(j - jsim)))))
        tn += contrib * len(labels)
        for lab in labels:
            sigma_blocks[lab] = sig
    return SimulatorResult(value=tn, sigma=BlockState(sigma_blocks), gap=0.0,
                           method="choi_trace_bound")


def optimal_discrimination(states, priors, tol=1e-9):
    """Max success probability of discriminating the given states.

    states: list of BlockState or dense density matrices with common
    structure; priors must be nonnegative and sum to 1. Decomposes over
    common labels (pinching keeps the optimum exact) and solves
    max sum_z p_z <rho_z, E_z> s.t. sum_z E_z = I per block.
    """
    priors = np.asarray(priors, dtype=float)
    if len(priors) != len(states):
        raise ArgumentError("priors length does not match states")
    if np.any(priors < -1e-12) or abs(priors.sum() - 1.0) > 1e-9:
        raise ArgumentError("priors must be nonnegative and sum to 1")
    bss = []
    for s in states:
        if isinstance(s, BlockState):
            bss.append(s)
        else:
            bss.append(BlockState({("",): np.asarray(s, dtype=complex)}))
    labels = sorted({lab for s in bss for lab in s.blocks}, key=repr)
    k = len(states)
    total = 0.0
    for lab in labels:
        dcs = {s.blocks[lab].shape[0] for s in bss if lab in s.blocks}
        if len(dcs) != 1:
            raise ArgumentError(f"inconsistent block dims for label {lab!r}")
        dc = dcs.pop()
        mats = [herm(s.blocks.get(lab, np.zeros((dc, dc))).astype(complex)) for s in bss]
        weight = sum(float(np.real(np.trace(m))) * p for m, p in zip(mats, priors))
        if weight < 1e-15:
            continue
        basis = hermitian_basis(dc)
        A = [{z: h for z in range(k)} for h in basis]
        b = np.array([float(np.real(np.trace(h))) for h in basis])
        C = [-priors[z] * mats[z] for z in range(k)]
        prog = ConeProgram(block_dims=[dc] * k, C=C, A=A, b=b)
        sol = require_optimal(solve_cone(prog, tol=tol), "discrimination SDP")
        total += -0.5 * (sol.pobj + sol.dobj)
    return float(total)
