"""Dense Hermitian semidefinite programming.

Solves the standard-form primal/dual pair over a block-diagonal Hermitian
variable,

    (P)  min  sum_b <C_b, X_b>    s.t.  sum_b <A_ib, X_b> = b_i,   X_b >= 0
    (D)  max  b . y               s.t.  C_b - sum_i y_i A_ib >= 0

with an infeasible-start primal-dual path-following method: Nesterov-Todd
scaling, Mehrotra predictor-corrector (the second-order term is computed by
a Lyapunov solve in the NT-scaled frame), and a dense Schur-complement
system. Everything is in native complex Hermitian arithmetic; inner
products <A, B> = Tr(A^dag B) are real throughout.

All 1x1 blocks are routed through a vectorized nonnegative-orthant section,
so linear programs (and inequality slacks) cost scalar array work instead
of per-block dense factorizations. Builders that want an LMI-form problem
(free variables, matrix inequalities) encode it as the data of (D) and read
the dual variables off the solution.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..errors import ArgumentError, SolverError
from ..linalg import herm, require_hermitian

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 150
ENV_MAX_ITER = "CDQS_LAB_SDP_MAX_ITER"

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITER = "max_iter"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"


@dataclass
class ConeProgram:
    """Standard-form data: block dims, per-block costs, sparse-over-blocks rows."""

    block_dims: list
    C: list
    A: list          # list over constraints of {block_index: Hermitian ndarray}
    b: np.ndarray

    def validate(self):
        if len(self.C) != len(self.block_dims):
            raise ArgumentError("objective blocks do not match block_dims")
        for nb, cb in zip(self.block_dims, self.C):
            if cb.shape != (nb, nb):
                raise ArgumentError(f"objective block shape {cb.shape} != ({nb},{nb})")
            require_hermitian(cb, "objective block")
        if len(self.A) != len(self.b):
            raise ArgumentError("constraint count does not match rhs length")
        for row in self.A:
            for bi, op in row.items():
                nb = self.block_dims[bi]
                if op.shape != (nb, nb):
                    raise ArgumentError(f"constraint block shape {op.shape} != ({nb},{nb})")
                require_hermitian(op, "constraint operator")


@dataclass
class ConeSolution:
    status: str
    pobj: float
    dobj: float
    X: list
    y: np.ndarray
    S: list
    iterations: int
    gap_rel: float
    rp_rel: float
    rd_rel: float
    mu: float

    @property
    def ok(self):
        return self.status == STATUS_OPTIMAL


def _max_iter_default():
    raw = os.environ.get(ENV_MAX_ITER)
    if raw:
        try:
            return max(10, int(raw))
        except ValueError:
            pass
    return DEFAULT_MAX_ITER


def _psd_sqrt_pair(a, floor_rel=1e-14):
    w, v = np.linalg.eigh(herm(a))
    wmax = max(float(w[-1]), 1e-300)
    w = np.clip(w, floor_rel * wmax, None)
    return (v * np.sqrt(w)) @ v.conj().T, w, v


def _nt_scaling(X, S):
    """NT scaling point W with W S W = X, plus its symmetric sqrt and inverse."""
    Xh, _, _ = _psd_sqrt_pair(X)
    T = herm(Xh @ S @ Xh)
    wt, vt = np.linalg.eigh(T)
    wtmax = max(float(wt[-1]), 1e-300)
    wt = np.clip(wt, 1e-28 * wtmax, None)
    Tmh = (vt * (wt ** -0.5)) @ vt.conj().T
    W = herm(Xh @ Tmh @ Xh)
    ww, wv = np.linalg.eigh(W)
    wwmax = max(float(ww[-1]), 1e-300)
    ww = np.clip(ww, 1e-16 * wwmax, None)
    G = (wv * np.sqrt(ww)) @ wv.conj().T
    Gi = (wv * (ww ** -0.5)) @ wv.conj().T
    return W, G, Gi


def _step_to_boundary(X, dX):
    """Largest alpha with X + alpha dX >= 0 (inf if dX pushes inward)."""
    n = X.shape[0]
    shift = 1e-14 * max(float(np.real(np.trace(X))) / n, 1e-300)
    Xs = herm(X) + shift * np.eye(n)
    try:
        w = scipy.linalg.eigh(herm(dX), Xs, eigvals_only=True, check_finite=False)
        lam_min = float(w[0])
    except (scipy.linalg.LinAlgError, ValueError):
        ew, ev = np.linalg.eigh(Xs)
        ew = np.clip(ew, 1e-14 * max(float(ew[-1]), 1e-300), None)
        Ximh = (ev * (ew ** -0.5)) @ ev.conj().T
        lam_min = float(np.min(np.linalg.eigvalsh(herm(Ximh @ dX @ Ximh))))
    if lam_min >= -1e-14:
        return np.inf
    return -1.0 / lam_min


def _lp_step_to_boundary(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _lyap_jordan(V_w, V_v, R):
    """Solve (VZ + ZV)/2 = herm(R) for Z, given eigh(V) = (V_w, V_v)."""
    Rt = V_v.conj().T @ herm(R) @ V_v
    denom = 0.5 * (V_w[:, None] + V_w[None, :])
    Z = Rt / denom
    return herm(V_v @ Z @ V_v.conj().T)


class _Sections:
    """Problem data split into PSD blocks (dim > 1) and an LP vector section."""

    def __init__(self, prog: ConeProgram):
        self.m = len(prog.A)
        self.psd_ids = [i for i, d in enumerate(prog.block_dims) if d > 1]
        self.lp_ids = [i for i, d in enumerate(prog.block_dims) if d == 1]
        self.dims = [prog.block_dims[i] for i in self.psd_ids]
        self.C = [herm(prog.C[i].astype(complex)) for i in self.psd_ids]
        self.clp = np.array([float(np.real(prog.C[i][0, 0])) for i in self.lp_ids])
        self.L = len(self.lp_ids)
        lp_pos = {bi: k for k, bi in enumerate(self.lp_ids)}
        psd_pos = {bi: k for k, bi in enumerate(self.psd_ids)}
        self.Alp = np.zeros((self.m, self.L))
        self.idx = [[] for _ in self.psd_ids]
        stacks = [[] for _ in self.psd_ids]
        for i, row in enumerate(prog.A):
            for bi, op in row.items():
                if bi in lp_pos:
                    self.Alp[i, lp_pos[bi]] = float(np.real(op[0, 0]))
                else:
                    k = psd_pos[bi]
                    self.idx[k].append(i)
                    stacks[k].append(op.astype(complex))
        self.stack = [np.array(s) if s else np.zeros((0, d, d), dtype=complex)
                      for s, d in zip(stacks, self.dims)]
        self.idx = [np.array(ix, dtype=int) for ix in self.idx]
        self.N = sum(self.dims) + self.L

    def apply(self, Xs, xlp):
        out = self.Alp @ xlp if self.L else np.zeros(self.m)
        if not self.L:
            out = np.zeros(self.m)
        for k, arr in enumerate(self.stack):
            if len(arr) == 0:
                continue
            flat = arr.reshape(len(arr), -1)
            out[self.idx[k]] += np.real(flat.conj() @ Xs[k].ravel())
        return out

    def adjoint(self, y):
        psd = []
        for k, arr in enumerate(self.stack):
            d = self.dims[k]
            if len(arr) == 0:
                psd.append(np.zeros((d, d), dtype=complex))
            else:
                psd.append(np.tensordot(y[self.idx[k]], arr, axes=1))
        lp = self.Alp.T @ y if self.L else np.zeros(0)
        return psd, lp

    def schur(self, Ws, wlp2):
        M = np.zeros((self.m, self.m))
        for k, arr in enumerate(self.stack):
            if len(arr) == 0:
                continue
            W = Ws[k]
            T = W[None, :, :] @ arr @ W[None, :, :]
            flat_a = arr.reshape(len(arr), -1)
            flat_t = T.reshape(len(arr), -1)
            Mb = np.real(flat_a.conj() @ flat_t.T)
            ix = self.idx[k]
            M[np.ix_(ix, ix)] += Mb
        if self.L:
            M += (self.Alp * wlp2[None, :]) @ self.Alp.T
        return 0.5 * (M + M.T)


def solve_cone(prog: ConeProgram, tol=DEFAULT_TOL, feas_tol=None, max_iter=None,
               verbose=False) -> ConeSolution:
    """Run the interior-point iteration on a validated cone program."""
    prog.validate()
    if feas_tol is None:
        feas_tol = max(tol, 1e-10)
    if max_iter is None:
        max_iter = _max_iter_default()

    sec = _Sections(prog)
    nblocks = len(sec.dims)
    N = max(sec.N, 1)
    m = len(prog.b)
    b = np.asarray(prog.b, dtype=float)

    norm_b = float(np.linalg.norm(b))
    norm_C = max([float(np.linalg.norm(cb)) for cb in sec.C] +
                 ([float(np.linalg.norm(sec.clp))] if sec.L else [0.0]) + [0.0])
    norm_A = max([float(np.linalg.norm(arr.reshape(len(arr), -1), axis=1).max())
                  for arr in sec.stack if len(arr)] +
                 ([float(np.abs(sec.Alp).max())] if sec.L else [0.0]) + [0.0])

    xi_p = max(10.0, np.sqrt(N), N * (1.0 + np.abs(b).max(initial=0.0)) / (1.0 + norm_A))
    xi_d = max(10.0, np.sqrt(N), norm_C, norm_A)
    X = [xi_p * np.eye(nb, dtype=complex) for nb in sec.dims]
    S = [xi_d * np.eye(nb, dtype=complex) for nb in sec.dims]
    xlp = np.full(sec.L, xi_p)
    slp = np.full(sec.L, xi_d)
    y = np.zeros(m)

    status = STATUS_MAX_ITER
    it = 0

    def inner(Xs, xl, Ss, sl):
        tot = sum(float(np.real(np.vdot(Xs[k], Ss[k]))) for k in range(nblocks))
        if sec.L:
            tot += float(xl @ sl)
        return tot

    def objective_pair():
        pobj = sum(float(np.real(np.vdot(sec.C[k], X[k]))) for k in range(nblocks))
        if sec.L:
            pobj += float(sec.clp @ xlp)
        return pobj, float(b @ y)

    for it in range(1, max_iter + 1):
        rp = b - sec.apply(X, xlp)
        Ady, Ady_lp = sec.adjoint(y)
        Rd = [sec.C[k] - S[k] - Ady[k] for k in range(nblocks)]
        rd_lp = sec.clp - slp - Ady_lp if sec.L else np.zeros(0)
        mu = inner(X, xlp, S, slp) / N

        pobj, dobj = objective_pair()
        gap_rel = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        rp_rel = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        rd_norms = [float(np.linalg.norm(Rd[k])) for k in range(nblocks)]
        if sec.L:
            rd_norms.append(float(np.linalg.norm(rd_lp)))
        rd_rel = max(rd_norms, default=0.0) / (1.0 + norm_C)

        if verbose:
            print(f"  it {it:3d}  mu {mu:9.2e}  gap {gap_rel:9.2e}  "
                  f"rp {rp_rel:9.2e}  rd {rd_rel:9.2e}")

        if gap_rel <= tol and rp_rel <= feas_tol and rd_rel <= feas_tol:
            status = STATUS_OPTIMAL
            break

        if it > 5:
            ynorm = float(np.linalg.norm(y, ord=np.inf))
            if ynorm > 1e7 * (1.0 + norm_b):
                yn = y / max(ynorm, 1e-300)
                Ayn, Ayn_lp = sec.adjoint(yn)
                lams = [float(np.max(np.linalg.eigvalsh(herm(Ayn[k]))))
                        for k in range(nblocks)]
                if sec.L:
                    lams.append(float(np.max(Ayn_lp, initial=-np.inf)))
                if max(lams, default=0.0) <= 1e-6 and float(b @ yn) > 1e-6:
                    status = STATUS_INFEASIBLE
                    break
            trX = sum(float(np.real(np.trace(X[k]))) for k in range(nblocks)) + \
                float(np.sum(xlp))
            if trX > 1e8 * N * xi_p:
                Xn = [X[k] / trX for k in range(nblocks)]
                xn = xlp / trX
                cn = sum(float(np.real(np.vdot(sec.C[k], Xn[k]))) for k in range(nblocks))
                if sec.L:
                    cn += float(sec.clp @ xn)
                if float(np.linalg.norm(sec.apply(Xn, xn))) <= 1e-6 and cn < -1e-6:
                    status = STATUS_UNBOUNDED
                    break

        # NT scaling.
        Ws, Gs, Gis = [], [], []
        for k in range(nblocks):
            W, G, Gi = _nt_scaling(X[k], S[k])
            Ws.append(W)
            Gs.append(G)
            Gis.append(Gi)
        wlp = np.sqrt(xlp / slp) if sec.L else np.zeros(0)

        M = sec.schur(Ws, wlp ** 2)
        jitter = 0.0
        base = np.trace(M).real / max(m, 1) if m else 0.0
        cho = None
        for attempt in range(6):
            try:
                cho = scipy.linalg.cho_factor(
                    M + jitter * np.eye(m), lower=True, check_finite=False)
                break
            except scipy.linalg.LinAlgError:
                jitter = max(base * 10.0 ** (-13 + 2 * attempt), 1e-300)
        if cho is None and m:
            break

        E = [herm(Ws[k] @ Rd[k] @ Ws[k]) for k in range(nblocks)]
        e_lp = wlp ** 2 * rd_lp if sec.L else np.zeros(0)
        AE = sec.apply(E, e_lp)

        def direction(R, r_lp):
            rhs = rp - sec.apply(R, r_lp) + AE
            if m:
                dy = scipy.linalg.cho_solve(cho, rhs, check_finite=False)
                resid = rhs - M @ dy
                dy = dy + scipy.linalg.cho_solve(cho, resid, check_finite=False)
            else:
                dy = np.zeros(0)
            Adyl, Adyl_lp = sec.adjoint(dy)
            dS = [Rd[k] - Adyl[k] for k in range(nblocks)]
            ds_lp = rd_lp - Adyl_lp if sec.L else np.zeros(0)
            dX = [herm(R[k] - Ws[k] @ dS[k] @ Ws[k]) for k in range(nblocks)]
            dx_lp = r_lp - wlp ** 2 * ds_lp if sec.L else np.zeros(0)
            return dy, dX, dS, dx_lp, ds_lp

        def steplen(Zs, dZs, zlp, dzlp, tau):
            a = 1.0
            for k in range(nblocks):
                bd = _step_to_boundary(Zs[k], dZs[k])
                if np.isfinite(bd):
                    a = min(a, tau * bd)
            if sec.L:
                bd = _lp_step_to_boundary(zlp, dzlp)
                if np.isfinite(bd):
                    a = min(a, tau * bd)
            return min(a, 1.0)

        tau = 0.98 if mu > 1e-4 * xi_p * xi_d else 0.995

        # Predictor.
        R_aff = [-X[k] for k in range(nblocks)]
        r_aff_lp = -xlp
        dy_a, dX_a, dS_a, dxl_a, dsl_a = direction(R_aff, r_aff_lp)
        ap = steplen(X, dX_a, xlp, dxl_a, tau)
        ad = steplen(S, dS_a, slp, dsl_a, tau)
        mu_aff = inner([X[k] + ap * dX_a[k] for k in range(nblocks)],
                       xlp + ap * dxl_a,
                       [S[k] + ad * dS_a[k] for k in range(nblocks)],
                       slp + ad * dsl_a) / N
        mu_aff = max(mu_aff, 0.0)
        sigma = float(np.clip((mu_aff / mu) ** 3 if mu > 0 else 0.1, 1e-10, 1.0))

        # Corrector with the second-order term in the scaled frame.
        R_cor = []
        for k in range(nblocks):
            Vb = herm(0.5 * (Gis[k] @ X[k] @ Gis[k] + Gs[k] @ S[k] @ Gs[k]))
            vw, vv = np.linalg.eigh(Vb)
            vw = np.clip(vw, 1e-14 * max(float(vw[-1]), 1e-300), None)
            DXa = Gis[k] @ dX_a[k] @ Gis[k]
            DSa = Gs[k] @ dS_a[k] @ Gs[k]
            second = 0.5 * (DXa @ DSa + DSa @ DXa)
            Rt = sigma * mu * np.eye(sec.dims[k]) - Vb @ Vb - second
            Z = _lyap_jordan(vw, vv, Rt)
            R_cor.append(herm(Gs[k] @ Z @ Gs[k]))
        if sec.L:
            v2 = xlp * slp
            r_cor_lp = wlp * (sigma * mu - v2 - dxl_a * dsl_a) / np.sqrt(
                np.clip(v2, 1e-300, None))
        else:
            r_cor_lp = np.zeros(0)

        dy, dX, dS, dxl, dsl = direction(R_cor, r_cor_lp)
        ap = steplen(X, dX, xlp, dxl, tau)
        ad = steplen(S, dS, slp, dsl, tau)

        if ap < 1e-10 and ad < 1e-10:
            R_ctr = []
            for k in range(nblocks):
                w, v = np.linalg.eigh(herm(S[k]))
                w = np.clip(w, 1e-16 * max(float(w[-1]), 1e-300), None)
                Sinv = (v / w) @ v.conj().T
                R_ctr.append(herm(sigma * mu * Sinv - X[k]))
            r_ctr_lp = sigma * mu / np.clip(slp, 1e-300, None) - xlp if sec.L else np.zeros(0)
            dy, dX, dS, dxl, dsl = direction(R_ctr, r_ctr_lp)
            ap = steplen(X, dX, xlp, dxl, 0.9)
            ad = steplen(S, dS, slp, dsl, 0.9)
            if ap < 1e-12 and ad < 1e-12:
                break

        for k in range(nblocks):
            X[k] = herm(X[k] + ap * dX[k])
            S[k] = herm(S[k] + ad * dS[k])
        if sec.L:
            xlp = xlp + ap * dxl
            slp = slp + ad * dsl
        y = y + ad * dy

    pobj, dobj = objective_pair()
    rp = b - sec.apply(X, xlp)
    Ady, Ady_lp = sec.adjoint(y)
    Rd = [sec.C[k] - S[k] - Ady[k] for k in range(nblocks)]
    rd_lp = sec.clp - slp - Ady_lp if sec.L else np.zeros(0)
    mu = inner(X, xlp, S, slp) / N
    gap_rel = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    rp_rel = float(np.linalg.norm(rp)) / (1.0 + norm_b)
    rd_norms = [float(np.linalg.norm(Rd[k])) for k in range(nblocks)]
    if sec.L:
        rd_norms.append(float(np.linalg.norm(rd_lp)))
    rd_rel = max(rd_norms, default=0.0) / (1.0 + norm_C)
    if status == STATUS_MAX_ITER and gap_rel <= 2.0 * tol \
            and rp_rel <= max(50.0 * feas_tol, 1e-8) \
            and rd_rel <= max(50.0 * feas_tol, 1e-8):
        # Step collapse right after crossing the tolerance still counts.
        status = STATUS_OPTIMAL

    # Reassemble outputs in the caller's block order.
    Xout, Sout = [], []
    psd_it, lp_it = 0, 0
    for bi, d in enumerate(prog.block_dims):
        if d > 1:
            Xout.append(X[psd_it])
            Sout.append(S[psd_it])
            psd_it += 1
        else:
            Xout.append(np.array([[xlp[lp_it]]], dtype=complex))
            Sout.append(np.array([[slp[lp_it]]], dtype=complex))
            lp_it += 1
    return ConeSolution(status=status, pobj=pobj, dobj=dobj, X=Xout, y=y, S=Sout,
                        iterations=it, gap_rel=gap_rel, rp_rel=rp_rel,
                        rd_rel=rd_rel, mu=mu)


# ---------------------------------------------------------------------------
# User-facing problem type: scalar (in)equality rows over a block variable.
# ---------------------------------------------------------------------------

@dataclass
class SdpProblem:
    """Hermitian SDP: optimize <objective, X> over block-diagonal X >= 0
    subject to scalar rows <op, X> {=, <=} bound."""

    block_dims: list
    objective: list
    constraints: list = field(default_factory=list)   # (ops: {block: H}, rel, bound)
    maximize: bool = False

    def add(self, ops, rel, bound):
        if rel not in ("=", "<="):
            raise ArgumentError(f"relation must be '=' or '<=', got {rel!r}")
        self.constraints.append((ops, rel, bound))


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    witness: list
    dual_y: np.ndarray
    iterations: int
    gap_rel: float

    @property
    def ok(self):
        return self.status == STATUS_OPTIMAL


def solve(problem: SdpProblem, tol=DEFAULT_TOL, max_iter=None) -> SdpSolution:
    """Lower an SdpProblem to standard form (slacks for '<=') and solve it.

    On status == 'optimal' the duality gap satisfies
    |primal - dual| <= 1e-7 (1 + |primal|) and the witness blocks are PSD
    to -1e-8; anything weaker is reported as a non-optimal status, never as
    a silent wrong answer.
    """
    dims = list(problem.block_dims)
    sign = -1.0 if problem.maximize else 1.0
    C = [sign * herm(ob.astype(complex)) for ob in problem.objective]
    A = []
    b = []
    slack_at = len(dims)
    for ops, rel, bound in problem.constraints:
        row = {bi: op.astype(complex) for bi, op in ops.items()}
        if rel == "<=":
            dims.append(1)
            C.append(np.zeros((1, 1), dtype=complex))
            row[slack_at] = np.ones((1, 1), dtype=complex)
            slack_at += 1
        A.append(row)
        b.append(float(bound))
    prog = ConeProgram(block_dims=dims, C=C, A=A, b=np.array(b))
    sol = solve_cone(prog, tol=tol, max_iter=max_iter)
    nb = len(problem.block_dims)
    pval = sign * sol.pobj
    dval = sign * sol.dobj
    witness = sol.X[:nb]
    status = sol.status
    if status == STATUS_OPTIMAL:
        if abs(pval - dval) > 1e-7 * (1.0 + abs(pval)):
            status = STATUS_MAX_ITER
        for wb in witness:
            if float(np.min(np.linalg.eigvalsh(herm(wb)))) < -1e-8:
                status = STATUS_MAX_ITER
    return SdpSolution(status=status, primal_value=pval, dual_value=dval,
                       witness=witness, dual_y=sol.y, iterations=sol.iterations,
                       gap_rel=sol.gap_rel)


def require_optimal(sol, what="SDP"):
    st = sol.status if hasattr(sol, "status") else "unknown"
    if st != STATUS_OPTIMAL:
        raise SolverError(f"{what} did not reach optimality (status={st})")
    return sol


# ---------------------------------------------------------------------------
# Dedicated path for channel-variable SDPs: the only constraint family is
# the partial trace, Tr_Q X = I_M, whose Schur complement is a sum of d_Q^2
# sandwich maps. Assembling it as a dense d_M^2 x d_M^2 system instead of
# stacking d_M^2 scalar rows drops the per-iteration cost by ~d_M^2.
# ---------------------------------------------------------------------------

def _ptrace_q(x, d_m, d_q):
    return np.einsum("aqbq->ab", x.reshape(d_m, d_q, d_m, d_q))


def solve_partial_trace_sdp(obj, d_m, d_q, tol=DEFAULT_TOL, max_iter=None,
                            minimize=False):
    """Optimize <obj, X> over X >= 0 on M(x)Q with Tr_Q X = I_M.

    Returns (value, X, gap). Default sense is maximization (the decoder
    problems); set minimize=True for the other direction.
    """
    if max_iter is None:
        max_iter = _max_iter_default()
    sign = 1.0 if minimize else -1.0
    n = d_m * d_q
    C = sign * herm(np.asarray(obj, dtype=complex))
    norm_c = float(np.linalg.norm(C))

    X = max(10.0, np.sqrt(n)) * np.eye(n, dtype=complex)
    S = max(10.0, np.sqrt(n), norm_c) * np.eye(n, dtype=complex)
    Z = np.zeros((d_m, d_m), dtype=complex)    # dual variable for Tr_Q X = I

    status = STATUS_MAX_ITER
    gap_rel = np.inf
    for it in range(1, max_iter + 1):
        Rp = np.eye(d_m, dtype=complex) - _ptrace_q(X, d_m, d_q)
        Rd = C - S - np.kron(Z, np.eye(d_q, dtype=complex))
        mu = float(np.real(np.vdot(X, S))) / n

        pobj = float(np.real(np.vdot(C, X)))
        dobj = float(np.real(np.trace(Z)))
        gap_rel = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        rp_rel = float(np.linalg.norm(Rp)) / (1.0 + np.sqrt(d_m))
        rd_rel = float(np.linalg.norm(Rd)) / (1.0 + norm_c)
        feas = max(10.0 * tol, 1e-9)
        if gap_rel <= tol and rp_rel <= feas and rd_rel <= feas:
            status = STATUS_OPTIMAL
            break

        W, G, Gi = _nt_scaling(X, S)
        w4 = W.reshape(d_m, d_q, d_m, d_q)
        T = np.einsum("aqbp,cqdp->acbd", w4, w4.conj(),
                      optimize=True).reshape(d_m * d_m, d_m * d_m)
        T = 0.5 * (T + T.conj().T)
        jitter = 1e-13 * max(float(np.real(np.trace(T))) / (d_m * d_m), 1e-300)
        cho = None
        for attempt in range(6):
            try:
                cho = scipy.linalg.cho_factor(
                    T + jitter * np.eye(d_m * d_m), lower=True, check_finite=False)
                break
            except scipy.linalg.LinAlgError:
                jitter *= 100.0

        E = herm(W @ Rd @ W)

        def direction(R):
            rhs_mat = Rp - _ptrace_q(R, d_m, d_q) + _ptrace_q(E, d_m, d_q)
            dz_vec = scipy.linalg.cho_solve(cho, rhs_mat.ravel(), check_finite=False)
            dZ = herm(dz_vec.reshape(d_m, d_m))
            dS = Rd - np.kron(dZ, np.eye(d_q, dtype=complex))
            dX = herm(R - W @ dS @ W)
            return dZ, dX, dS

        tau = 0.98 if mu > 1e-4 else 0.995
        dZ_a, dX_a, dS_a = direction(-X)
        ap = min(1.0, tau * _step_to_boundary(X, dX_a))
        ad = min(1.0, tau * _step_to_boundary(S, dS_a))
        mu_aff = max(float(np.real(np.vdot(X + ap * dX_a, S + ad * dS_a))) / n, 0.0)
        sigma = float(np.clip((mu_aff / mu) ** 3 if mu > 0 else 0.1, 1e-10, 1.0))

        Vb = herm(0.5 * (Gi @ X @ Gi + G @ S @ G))
        vw, vv = np.linalg.eigh(Vb)
        vw = np.clip(vw, 1e-14 * max(float(vw[-1]), 1e-300), None)
        DXa = Gi @ dX_a @ Gi
        DSa = G @ dS_a @ G
        Rt = sigma * mu * np.eye(n) - Vb @ Vb - 0.5 * (DXa @ DSa + DSa @ DXa)
        R_cor = herm(G @ _lyap_jordan(vw, vv, Rt) @ G)

        dZ, dX, dS = direction(R_cor)
        ap = min(1.0, tau * _step_to_boundary(X, dX))
        ad = min(1.0, tau * _step_to_boundary(S, dS))
        if ap < 1e-12 and ad < 1e-12:
            break
        X = herm(X + ap * dX)
        S = herm(S + ad * dS)
        Z = herm(Z + ad * dZ)

    pobj = float(np.real(np.vdot(C, X)))
    dobj = float(np.real(np.trace(Z)))
    if status != STATUS_OPTIMAL:
        # The loop may exit on a collapsed step right after reaching the
        # target; accept the final iterate if it meets the tolerances.
        Rp = np.eye(d_m, dtype=complex) - _ptrace_q(X, d_m, d_q)
        Rd = C - S - np.kron(Z, np.eye(d_q, dtype=complex))
        gap_rel = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        feas = max(50.0 * tol, 1e-8)
        if gap_rel <= 2.0 * tol and \
                float(np.linalg.norm(Rp)) / (1.0 + np.sqrt(d_m)) <= feas and \
                float(np.linalg.norm(Rd)) / (1.0 + norm_c) <= feas:
            status = STATUS_OPTIMAL
    if status != STATUS_OPTIMAL:
        raise SolverError(
            f"partial-trace SDP stalled (gap {gap_rel:.2e} after {it} iterations)")
    value = sign * 0.5 * (pobj + dobj)
    return value, herm(X), abs(pobj - dobj)
