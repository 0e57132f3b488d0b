"""Classical CDS protocols and their exhaustive verifier.

A protocol is stored as explicit message tables over finite randomness and
secret spaces, so correctness and security are computed exactly: the MAP
decoder's worst-secret success probability on 1-inputs, and on 0-inputs the
Chebyshev-center linear program

    min_Sim max_z || Sim - P_M(x,y,z) ||_1

(distribution distance = sum of absolute differences), solved with the
in-house cone solver in LP mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, CapacityError
from ..sdp.solver import ConeProgram, require_optimal, solve_cone
from .predicates import Predicate

ENUMERATION_CAP = 10 ** 6


@dataclass
class CdsProtocol:
    """Tables m0[x, z, r] and m1[y, r] over uniform-or-weighted randomness."""

    predicate: Predicate
    num_secrets: int
    rand_probs: np.ndarray
    m0: np.ndarray            # shape (2^n, num_secrets, |R|), int symbols
    m1: np.ndarray            # shape (2^n, |R|), int symbols
    declared_eps: float = 0.0
    declared_delta: float = 0.0
    name: str = "cds"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nx = 1 << self.predicate.n
        r = len(self.rand_probs)
        if self.m0.shape != (nx, self.num_secrets, r):
            raise ArgumentError(f"m0 table shape {self.m0.shape} != {(nx, self.num_secrets, r)}")
        if self.m1.shape != (nx, r):
            raise ArgumentError(f"m1 table shape {self.m1.shape} != {(nx, r)}")
        if abs(float(np.sum(self.rand_probs)) - 1.0) > 1e-12 or np.any(self.rand_probs < 0):
            raise ArgumentError("randomness distribution must be a probability vector")

    @property
    def m0_symbols(self):
        return int(self.m0.max()) + 1

    @property
    def m1_symbols(self):
        return int(self.m1.max()) + 1

    @property
    def m0_bits(self):
        return max(1, int(np.ceil(np.log2(max(self.m0_symbols, 2)))))

    @property
    def m1_bits(self):
        return max(1, int(np.ceil(np.log2(max(self.m1_symbols, 2)))))

    @property
    def communication_bits(self):
        return self.m0_bits + self.m1_bits

    @property
    def secret_bits(self):
        return max(1, int(np.ceil(np.log2(max(self.num_secrets, 2)))))

    def message_distributions(self, x, y):
        """P[(m0, m1) | z] for each secret z, as arrays over joint symbols."""
        k1 = self.m1_symbols
        joint = self.m0[x, :, :] * k1 + self.m1[y, :][None, :]
        out = np.zeros((self.num_secrets, self.m0_symbols * k1))
        for z in range(self.num_secrets):
            np.add.at(out[z], joint[z], self.rand_probs)
        return out


def parallel_cds(c: CdsProtocol, k: int) -> CdsProtocol:
    """k independent instances run on the same (x, y), hiding Z^k."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    nx = 1 << c.predicate.n
    nz, nr = c.num_secrets, len(c.rand_probs)
    if (nr ** k) * (nz ** k) > ENUMERATION_CAP:
        raise CapacityError("parallel CDS exceeds the enumeration cap")
    probs = c.rand_probs
    for _ in range(k - 1):
        probs = np.kron(probs, c.rand_probs)
    m0 = np.zeros((nx, nz ** k, nr ** k), dtype=np.int64)
    m1 = np.zeros((nx, nr ** k), dtype=np.int64)
    k0, k1 = c.m0_symbols, c.m1_symbols
    for z in range(nz ** k):
        zd = [(z // nz ** i) % nz for i in range(k)]
        for r in range(nr ** k):
            rd = [(r // nr ** i) % nr for i in range(k)]
            for x in range(nx):
                code = 0
                for i in range(k):
                    code = code * k0 + int(c.m0[x, zd[i], rd[i]])
                m0[x, z, r] = code
    for r in range(nr ** k):
        rd = [(r // nr ** i) % nr for i in range(k)]
        for y in range(nx):
            code = 0
            for i in range(k):
                code = code * k1 + int(c.m1[y, rd[i]])
            m1[y, r] = code
    return CdsProtocol(predicate=c.predicate, num_secrets=nz ** k, rand_probs=probs,
                       m0=m0, m1=m1, declared_eps=c.declared_eps,
                       declared_delta=c.declared_delta,
                       name=f"{c.name}_x{k}",
                       meta={"base": c.name, "instances": k})


def _solve_lp(objective, eq_rows, nvars):
    """min c.x s.t. rows (coeff dict -> rhs) with x >= 0, via 1x1 cone blocks."""
    C = [np.array([[objective.get(i, 0.0)]], dtype=complex) for i in range(nvars)]
    A = []
    b = []
    for coeffs, rhs in eq_rows:
        A.append({i: np.array([[v]], dtype=complex) for i, v in coeffs.items()})
        b.append(float(rhs))
    prog = ConeProgram(block_dims=[1] * nvars, C=C, A=A, b=np.array(b))
    sol = require_optimal(solve_cone(prog), "security LP")
    vals = np.array([float(np.real(sol.X[i][0, 0])) for i in range(nvars)])
    return 0.5 * (sol.pobj + sol.dobj), vals


def _map_decoder_worst_success(dists):
    """Worst-secret success of the MAP decoder with uniform tie randomization."""
    nz, nm = dists.shape
    success = np.zeros(nz)
    for m in range(nm):
        col = dists[:, m]
        top = float(col.max())
        if top <= 0.0:
            continue
        winners = np.nonzero(col >= top - 1e-15)[0]
        for z in winners:
            success[z] += col[z] / len(winners)
    return float(success.min())


def _security_lp(dists):
    """Exact min over simulators of max_z ||Sim - P(.|z)||_1."""
    nz, nm = dists.shape
    # Variables: Sim (nm), u (nm*nz), t (1), then slacks added per row.
    sim0 = 0
    u0 = nm
    t_at = nm + nm * nz
    nvars = t_at + 1
    rows = []

    def var(i):
        return i

    extra = [nvars]

    def slack():
        extra[0] += 1
        return extra[0] - 1

    rows.append(({var(sim0 + m): 1.0 for m in range(nm)}, 1.0))
    for z in range(nz):
        for m in range(nm):
            u = u0 + m * nz + z
            # u >= Sim - P  ->  P - Sim + u = s >= 0
            rows.append(({var(sim0 + m): -1.0, var(u): 1.0, slack(): -1.0},
                         -float(dists[z, m])))
            # u >= P - Sim  ->  Sim + u - P = s >= 0
            rows.append(({var(sim0 + m): 1.0, var(u): 1.0, slack(): -1.0},
                         float(dists[z, m])))
        rows.append(({**{var(u0 + m * nz + z): 1.0 for m in range(nm)},
                      var(t_at): -1.0, slack(): 1.0}, 0.0))
    val, vals = _solve_lp({t_at: 1.0}, rows, extra[0])
    return max(val, 0.0), vals[sim0:sim0 + nm]


def verify_cds_exact(c: CdsProtocol, tol=1e-6):
    """Exhaustive verification; returns a VerificationReport."""
    from .model import ReportRow, VerificationReport

    work = len(c.rand_probs) * c.num_secrets * c.m0_symbols * c.m1_symbols
    if work > ENUMERATION_CAP:
        raise CapacityError(
            f"CDS enumeration needs ~{work} tuples, beyond cap {ENUMERATION_CAP}")
    rows = []
    for x, y in c.predicate.inputs():
        f = c.predicate.value(x, y)
        dists = c.message_distributions(x, y)
        if f == 1:
            ok = _map_decoder_worst_success(dists)
            rows.append(ReportRow(x=x, y=y, f=1, eps_ub=1.0 - ok, eps_lb=1.0 - ok,
                                  delta_ub=None, method="exhaustive"))
        else:
            delta, sim = _security_lp(dists)
            rows.append(ReportRow(x=x, y=y, f=0, eps_ub=None, eps_lb=None,
                                  delta_ub=delta, method="lp",
                                  witness={"simulator": sim.tolist()}))
    return VerificationReport.assemble(
        kind="cds", name=c.name, n=c.predicate.n, d_q=None, rows=rows,
        declared_eps=c.declared_eps, declared_delta=c.declared_delta, tol=tol,
        meta={"communication_bits": c.communication_bits,
              "m0_bits": c.m0_bits, "m1_bits": c.m1_bits,
              "randomness": len(c.rand_probs), "secrets": c.num_secrets})
