"""Two-sided certification of channel invertibility and constant-simulability.

Correctness pipeline for a channel N with input dimension d:
  1. an entanglement-fidelity-optimal decoder D* (exact SDP),
  2. the exact diamond norm of D* . N - I as the certified upper bound,
  3. up to `seesaw_rounds` refinements re-optimizing the decoder against the
     worst-case input returned by the diamond SDP, stopping once the
     improvement drops below 1e-8,
  4. a lower bound (s_hat/2)^2 from the decoupling inequalities, where s_hat
     is the exact constant-simulator distance of the complementary channel
     (skipped, soundly, as 0 whenever that SDP exceeds capacity).

Security pipeline: the exact constant-simulator SDP when it fits, otherwise
the sound Choi-trace-norm bound with the canonical simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blocks import BlockChoi
from ..errors import CapacityError, SolverError
from .programs import (
    diamond_norm,
    optimal_constant_simulator,
    optimal_decoder_fidelity,
    simulator_upper_bound,
)

SEESAW_IMPROVEMENT = 1e-8
SEESAW_FLOOR = 1e-7
LB_PARAM_CAP = 600


def identity_choi(d):
    j = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for k in range(d):
            j[i * d + i, k * d + k] = 1.0
    return j


@dataclass
class CorrectnessCertificate:
    eps_ub: float
    eps_lb: float
    fidelity: float
    decoder: dict
    rounds: int
    lb_method: str = "skipped"

    def as_dict(self):
        return {"eps_ub": self.eps_ub, "eps_lb": self.eps_lb,
                "fidelity": self.fidelity, "seesaw_rounds": self.rounds,
                "lb_method": self.lb_method}


@dataclass
class SecurityCertificate:
    delta_ub: float
    simulator: object
    method: str

    def as_dict(self):
        return {"delta_ub": self.delta_ub, "method": self.method}


def complement_choi(n: BlockChoi) -> BlockChoi:
    """Choi of the complementary channel (single coherent environment block)."""
    lk = n.to_labeled_kraus()
    return lk.complementary(("env",)).choi_blocks()


def certify_correctness(n: BlockChoi, tol=1e-9, seesaw_rounds=5,
                        compute_lb=True, lb_param_cap=None) -> CorrectnessCertificate:
    d = n.d_in
    jid = identity_choi(d)
    rho = None
    best_eps = None
    best_dec = None
    rounds = 0
    for rnd in range(seesaw_rounds + 1):
        dec = optimal_decoder_fidelity(n, rho=rho, tol=tol)
        jdn = n.compose_decoder(dec.blocks, d)
        dn = diamond_norm(jdn - jid, d, d, tol=tol)
        if best_eps is None or dn.value < best_eps - SEESAW_IMPROVEMENT:
            best_eps = dn.value
            best_dec = dec
            rho = dn.rho
            rounds = rnd
            if best_eps <= SEESAW_FLOOR:
                break
        else:
            break
    eps_ub = max(best_eps, 0.0)

    eps_lb = 0.0
    lb_method = "skipped"
    if compute_lb:
        cap = lb_param_cap or LB_PARAM_CAP
        # Environment never exceeds the total Choi rank; estimate before
        # building anything so oversized instances cost nothing.
        env_est = sum(n.blocks[lab].shape[0] for lab in n.blocks)
        m_est = 1 + (d * env_est) ** 2 + env_est ** 2 - 1
        if m_est > cap:
            lb_method = "skipped_capacity"
        else:
            try:
                comp = complement_choi(n)
                s_hat = optimal_constant_simulator(comp, tol=tol, param_cap=cap)
                eps_lb = max(0.0, (s_hat.value / 2.0) ** 2)
                lb_method = "decoupling"
            except CapacityError:
                eps_lb = 0.0
                lb_method = "skipped_capacity"
    eps_lb = min(eps_lb, eps_ub)
    return CorrectnessCertificate(eps_ub=eps_ub, eps_lb=eps_lb,
                                  fidelity=best_dec.fidelity, decoder=best_dec.blocks,
                                  rounds=rounds, lb_method=lb_method)


def certify_security(n: BlockChoi, tol=1e-9, param_cap=None) -> SecurityCertificate:
    try:
        kwargs = {"param_cap": param_cap} if param_cap else {}
        res = optimal_constant_simulator(n, tol=tol, **kwargs)
        return SecurityCertificate(delta_ub=max(res.value, 0.0),
                                   simulator=res.sigma, method=res.method)
    except CapacityError:
        res = simulator_upper_bound(n)
        return SecurityCertificate(delta_ub=max(res.value, 0.0),
                                   simulator=res.sigma, method=res.method)


def decoupling_check(n, d_in=None, tol=1e-9):
    """Certified instantiation of the decoupling sandwich for a channel.

    Returns (lhs, mid, rhs) = ((1/4) eps_lb^2, s_hat, 2 sqrt(eps_ub)) where
    eps_ub/eps_lb certify inf_D ||D.N - I||_diamond and s_hat is the exact
    constant-simulator distance of the complementary channel; raises if
    either asserted inequality fails beyond tolerance.
    """
    from ..blocks import BlockChoi as _BC
    if not isinstance(n, _BC):
        from .programs import _as_block_choi
        n = _as_block_choi(n, d_in)
    cert = certify_correctness(n, tol=tol, compute_lb=False)
    comp = complement_choi(n)
    s_hat = optimal_constant_simulator(comp, tol=tol).value
    eps_lb = max(0.0, (s_hat / 2.0) ** 2)
    lhs = 0.25 * eps_lb ** 2
    mid = s_hat
    rhs = 2.0 * np.sqrt(max(cert.eps_ub, 0.0))
    slack = 1e-6
    if lhs > mid + slack or mid > rhs + slack:
        raise SolverError(
            f"decoupling sandwich violated: lhs={lhs:.6g} mid={mid:.6g} rhs={rhs:.6g}")
    return lhs, mid, rhs
