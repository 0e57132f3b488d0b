"""Communication-complexity reductions executed as simulations.

Each reduction consumes a certified protocol and produces a report whose
asserted inequalities are themselves the test: the coin-damped collision
tester reproduces the exact 1/2 + ||D0-D1||_2^2 / 8 acceptance probability
on three random bits and two queries; the one-way reduction classifies
predicates from exact (or tomographically estimated) referee states; the
unbounded-error reduction computes its bias in closed form after a Haar
average; the two-message interactive-proof construction checks completeness
against the certified decoder and soundness against the optimal
discrimination measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockState, block_difference, block_trace_distance
from .errors import ArgumentError, AssertionFailure, GapViolation
from .linalg import haar_random_unitary, herm, hs_norm_sq
from .protocols.model import CdqsProtocol
from .protocols.verify import compose_joint, verify_cdqs
from .protocols.zoo import parallel_cdqs
from .sdp.certify import certify_correctness
from .sdp.programs import optimal_discrimination


# ---------------------------------------------------------------------------
# Distributions and the L2 distinguisher.
# ---------------------------------------------------------------------------

class Distribution:
    """Probability vector over a finite outcome set."""

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float)
        if np.any(p < -1e-15):
            raise ArgumentError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ArgumentError(f"probabilities sum to {p.sum()}, not 1")
        self.probs = np.clip(p, 0.0, None)

    def __len__(self):
        return len(self.probs)

    def sample(self, rng):
        return int(rng.choice(len(self.probs), p=self.probs))

    def l2_sq(self):
        return float(np.dot(self.probs, self.probs))


def l2_distinguisher_exact(d0: Distribution, d1: Distribution):
    """Exact acceptance probability of the coin-damped collision tester.

    Enumerates the three random bits and both query outcomes: bit 1 selects
    a fair coin (bit 3 reused as the coin); otherwise bits 2-3 pick the
    query pair (D0,D0) w.p. 1/4, (D1,D1) w.p. 1/4, (D0,D1) w.p. 1/2, and
    the output is 1 iff (same pair and collision) or (cross pair and no
    collision). The result equals 1/2 + ||D0-D1||_2^2 / 8 identically.
    """
    if len(d0) != len(d1):
        raise ArgumentError("distributions must share an outcome set")
    p0, p1 = d0.probs, d1.probs
    total = 0.0
    for b1 in (0, 1):
        for b2 in (0, 1):
            for b3 in (0, 1):
                if b1 == 1:
                    out = b3
                    total += out / 8.0
                    continue
                if (b2, b3) == (0, 0):
                    qa, qb, same = p0, p0, True
                elif (b2, b3) == (0, 1):
                    qa, qb, same = p1, p1, True
                else:
                    qa, qb, same = p0, p1, False
                collision = float(np.dot(qa, qb))
                p_one = collision if same else 1.0 - collision
                total += p_one / 8.0
    return total


def l2_closed_form(d0: Distribution, d1: Distribution):
    return 0.5 + float(np.sum((d0.probs - d1.probs) ** 2)) / 8.0


def l2_distinguisher_run(oracle0, oracle1, rng):
    """One sampled run: three random bits, two non-adaptive queries."""
    b1, b2, b3 = (int(rng.integers(0, 2)) for _ in range(3))
    if b1 == 1:
        return b3
    if (b2, b3) == (0, 0):
        s1, s2, same = oracle0(), oracle0(), True
    elif (b2, b3) == (0, 1):
        s1, s2, same = oracle1(), oracle1(), True
    else:
        s1, s2, same = oracle0(), oracle1(), False
    collide = s1 == s2
    return int(collide if same else not collide)


def haar_l2_identity_check(rho, sigma, samples=2000, seed=0, rel_tol=0.05,
                           enforce=True):
    """Monte-Carlo check of the averaged collision-distance identity.

    Applies a shared Haar unitary, measures both states in the
    computational basis, and compares the average ||D0(U)-D1(U)||_2^2
    against ||rho-sigma||_2^2 / (d+1).
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    d = rho.shape[0]
    exact = hs_norm_sq(rho - sigma) / (d + 1)
    rng = np.random.default_rng(seed)
    acc = 0.0
    for _ in range(samples):
        u = haar_random_unitary(d, rng)
        p0 = np.real(np.einsum("ij,jk,ik->i", u, rho, u.conj()))
        p1 = np.real(np.einsum("ij,jk,ik->i", u, sigma, u.conj()))
        acc += float(np.sum((p0 - p1) ** 2))
    estimate = acc / samples
    if enforce and exact > 1e-12:
        rel = abs(estimate - exact) / exact
        if rel > rel_tol:
            raise AssertionFailure(
                f"Haar identity violated: estimate {estimate:.6g} vs exact "
                f"{exact:.6g} (rel {rel:.3f} > {rel_tol})")
    return estimate, exact


# ---------------------------------------------------------------------------
# One-way reduction with tomography.
# ---------------------------------------------------------------------------

GAP_LOW = 0.09
GAP_HIGH = 0.496
CLASSIFY_THRESHOLD = 0.293


def _state_and_marginal_product(p, x, y):
    rho = compose_joint(p, x, y).as_state()
    d_q = p.d_q
    rho_q = np.zeros((d_q, d_q), dtype=complex)
    m_blocks = {}
    for lab, blk in rho.blocks.items():
        dc = blk.shape[0] // d_q
        b4 = blk.reshape(d_q, dc, d_q, dc)
        rho_q += np.einsum("iaja->ij", b4)
        m_blocks[lab] = np.einsum("iaib->ab", b4)
    product = BlockState({lab: np.kron(rho_q, mb) for lab, mb in m_blocks.items()})
    return rho, product, rho_q, BlockState(m_blocks)


@dataclass
class OneWayRow:
    x: int
    y: int
    f: int
    distance: float
    classified: int
    correct: bool


@dataclass
class OneWayReport:
    mode: str
    rows: list
    all_correct: bool
    samples_per_input: int
    message_count: int
    params: dict
    gap_violations: list = field(default_factory=list)

    def as_dict(self):
        return {"mode": self.mode, "all_correct": self.all_correct,
                "samples_per_input": self.samples_per_input,
                "message_count": self.message_count, "params": self.params,
                "gap_violations": self.gap_violations,
                "rows": [{"x": r.x, "y": r.y, "f": r.f,
                          "distance": r.distance, "classified": r.classified,
                          "correct": r.correct} for r in self.rows]}


def tomography_samples(d, c=10.0, eps_tilde=0.1, delta_fail=0.05):
    """Sample count ceil(C d^2 log(1/delta) / eps^2) for linear inversion."""
    return int(math.ceil(c * d * d * math.log(1.0 / delta_fail) / eps_tilde ** 2))


def _pauli_grid(n_qubits):
    from .linalg import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z
    singles = [PAULI_I, PAULI_X, PAULI_Y, PAULI_Z]
    out = []
    for idx in range(4 ** n_qubits):
        mats = []
        rest = idx
        for _ in range(n_qubits):
            mats.append(singles[rest % 4])
            rest //= 4
        m = mats[0]
        for extra in mats[1:]:
            m = np.kron(extra, m)
        out.append(m)
    return out


def _linear_inversion_estimate(rho, k, rng):
    """Simulate Pauli-basis sampling and return the linear-inversion estimate."""
    d = rho.shape[0]
    n_qubits = int(round(math.log2(d)))
    if 2 ** n_qubits != d or n_qubits > 2:
        raise ArgumentError("sampled tomography supports up to two qubits")
    paulis = _pauli_grid(n_qubits)
    shots = max(1, k // (len(paulis) - 1))
    est = np.eye(d, dtype=complex) / d
    for pm in paulis[1:]:
        t = float(np.real(np.trace(pm @ rho)))
        t = min(max(t, -1.0), 1.0)
        ones = rng.binomial(shots, (1.0 + t) / 2.0)
        t_hat = 2.0 * ones / shots - 1.0
        est = est + (t_hat / d) * pm
    return est


def one_way_reduction(p: CdqsProtocol, mode="oracle", c=10.0, eps_tilde=0.1,
                      delta_fail=0.05, seed=0, samples=None) -> OneWayReport:
    """Classify f from the referee states, exactly or via tomography.

    Oracle mode computes || rho_{QM} - rho_Q (x) rho_M ||_1 exactly and
    classifies f = 1 above the midpoint of the certified gap; distances
    inside the open gap (0.09, 0.496) flag a diagnostic failure. Sampled
    mode replaces the state by a linear-inversion estimate from
    ceil(C d^2 log(1/delta)/eps^2) simulated samples.
    """
    if mode not in ("oracle", "sampled"):
        raise ArgumentError(f"mode must be oracle|sampled, got {mode!r}")
    rng = np.random.default_rng(seed)
    rows = []
    violations = []
    k = 0
    for x, y in p.predicate.inputs():
        f = p.predicate.value(x, y)
        rho, product, rho_q, rho_m = _state_and_marginal_product(p, x, y)
        if mode == "oracle":
            dist = block_trace_distance(rho, product)
        else:
            dense = rho.dense(order=sorted(rho.blocks, key=repr))
            d = dense.shape[0]
            k = samples if samples else tomography_samples(d, c, eps_tilde, delta_fail)
            est = _linear_inversion_estimate(dense, k, rng)
            d_q = p.d_q
            d_m = d // d_q
            e4 = est.reshape(d_q, d_m, d_q, d_m)
            eq = np.einsum("iaja->ij", e4)
            em = np.einsum("iaib->ab", e4)
            dist = float(np.sum(np.abs(np.linalg.eigvalsh(
                herm(est - np.kron(eq, em))))))
        classified = 1 if dist > CLASSIFY_THRESHOLD else 0
        if mode == "oracle" and GAP_LOW + 1e-9 < dist < GAP_HIGH - 1e-3:
            violations.append({"x": x, "y": y, "distance": dist})
        rows.append(OneWayRow(x=x, y=y, f=f, distance=dist,
                              classified=classified, correct=classified == f))
    report = OneWayReport(
        mode=mode, rows=rows, all_correct=all(r.correct for r in rows),
        samples_per_input=k,
        message_count=k * p.message_qubits() if mode == "sampled" else 0,
        params={"C": c, "eps_tilde": eps_tilde, "delta_fail": delta_fail,
                "seed": seed, "threshold": CLASSIFY_THRESHOLD},
        gap_violations=violations)
    if violations:
        raise GapViolation(
            f"distances inside the diagnostic gap on {len(violations)} inputs: "
            f"{violations}")
    return report


# ---------------------------------------------------------------------------
# Unbounded-error (PP) reduction.
# ---------------------------------------------------------------------------

@dataclass
class PpReport:
    s0: float
    s: float
    d_total: int
    rows: list
    beta: float
    qubits: int
    cost: float
    valid: bool
    eps: float

    def as_dict(self):
        return {"s0": self.s0, "s": self.s, "d_total": self.d_total,
                "beta": self.beta, "qubits": self.qubits, "cost": self.cost,
                "valid": self.valid, "eps": self.eps,
                "rows": [dict(r) for r in self.rows]}


def pp_s0(eps, d):
    """Damping threshold (3/2 - 2 eps)^2 / (4 d (d+1) + (3/2 - 2 eps)^2)."""
    a = (1.5 - 2.0 * eps) ** 2
    return a / (4.0 * d * (d + 1) + a)


def pp_reduction(p: CdqsProtocol, eps=0.09, security_tol=1e-8) -> PpReport:
    """Exact acceptance probabilities of the damped collision protocol.

    Requires a perfectly private protocol (certified delta below
    security_tol). On 0-inputs the correct-output probability is exactly
    (1+s)/2 with s = s0/2; on 1-inputs it is
    (1-s)(1/2 + ||rho_QM - rho_Q x rho_M||_2^2 / (8(d+1))), which must
    exceed 1/2 for the report to be valid.
    """
    rep = verify_cdqs(p)
    if rep.delta_hat > security_tol:
        raise ArgumentError(
            f"pp reduction needs a perfectly private protocol; certified "
            f"delta_hat = {rep.delta_hat}")
    d_total = p.d_q * sum(p.message_space().values())
    s0 = pp_s0(eps, d_total)
    s = s0 / 2.0
    rows = []
    valid = True
    l2_floor = (1.5 - 2.0 * eps) ** 2 / d_total
    for x, y in p.predicate.inputs():
        f = p.predicate.value(x, y)
        rho, product, _, _ = _state_and_marginal_product(p, x, y)
        l2_sq = block_difference(rho, product).hs_norm_sq()
        t = l2_sq / (8.0 * (d_total + 1))
        if f == 0:
            p_correct = s + (1.0 - s) * (0.5 - t)
        else:
            p_correct = (1.0 - s) * (0.5 + t)
            # Correctness chain: the collision distance cannot fall below
            # (3/2 - 2 eps)^2 / d on decodable inputs.
            if l2_sq < l2_floor - 1e-9:
                valid = False
        bias = p_correct - 0.5
        if bias <= 0:
            valid = False
        rows.append({"x": x, "y": y, "f": f, "l2_sq": l2_sq,
                     "p_correct": p_correct, "bias": bias})
    beta = min(r["bias"] for r in rows)
    qubits = 4 * (p.resource_qubits_per_side() + p.m1_qubits())
    cost = qubits + (math.log2(1.0 / beta) if beta > 0 else float("inf"))
    return PpReport(s0=s0, s=s, d_total=d_total, rows=rows, beta=beta,
                    qubits=qubits, cost=cost, valid=valid, eps=eps)


# ---------------------------------------------------------------------------
# Two-message interactive proof and its zero-knowledge simulation.
# ---------------------------------------------------------------------------

@dataclass
class QipTranscript:
    ell: int
    completeness: float
    soundness_bound: float
    communication: int
    t_qubits: int
    eps_hat: float
    delta_hat: float

    def as_dict(self):
        return {"ell": self.ell, "completeness": self.completeness,
                "soundness_bound": self.soundness_bound,
                "communication": self.communication, "t_qubits": self.t_qubits,
                "eps_hat": self.eps_hat, "delta_hat": self.delta_hat}


def _to_ell_bits(p: CdqsProtocol, ell):
    need = 2 ** ell
    if p.d_q == need:
        return p
    if p.d_q == 2:
        return parallel_cdqs(p, ell)
    raise ArgumentError(f"protocol hides d={p.d_q}, cannot hold {ell}-bit secrets")


def qip2_from_cdqs(p: CdqsProtocol, ell, sdp_tol=1e-9) -> QipTranscript:
    """Two-message interactive proof: verifiers run the protocol on a shared
    random basis secret, Merlin (the referee) answers with his guess.

    Completeness uses the certified decoder as the honest strategy;
    soundness bounds any Merlin by the optimal discrimination success on
    the 0-input message states plus the privacy slack.
    """
    from .protocols.verify import _joint_fingerprint
    from .sdp.certify import certify_security

    q = _to_ell_bits(p, ell)
    d = 2 ** ell
    completeness = None
    soundness = 0.0
    eps_hat = 0.0
    delta_hat = 0.0
    seen = {}
    for x, y in q.predicate.inputs():
        f = q.predicate.value(x, y)
        joint = compose_joint(q, x, y)
        key = (f, _joint_fingerprint(joint))
        if key in seen:
            continue
        if f == 1:
            cert = certify_correctness(joint, tol=sdp_tol, compute_lb=False)
            eps_hat = max(eps_hat, cert.eps_ub)
            jdn = joint.compose_decoder(cert.decoder, d)
            acc = sum(float(np.real(jdn[z * d + z, z * d + z])) for z in range(d)) / d
            completeness = acc if completeness is None else min(completeness, acc)
            seen[key] = acc
        else:
            delta_hat = max(delta_hat, certify_security(joint, tol=sdp_tol).delta_ub)
            states = []
            for z in range(d):
                basis = np.zeros((d, d), dtype=complex)
                basis[z, z] = 1.0
                states.append(joint.apply(basis))
            val = optimal_discrimination(states, [1.0 / d] * d, tol=sdp_tol)
            soundness = max(soundness, val)
            seen[key] = val
    if completeness is None:
        completeness = 1.0
    if completeness < 1.0 - eps_hat - 1e-9:
        raise AssertionFailure(
            f"completeness {completeness} below 1 - eps_hat = {1 - eps_hat}")
    if soundness > 2.0 ** (-ell) + delta_hat + 1e-6:
        raise AssertionFailure(
            f"soundness bound {soundness} above 2^-ell + delta_hat = "
            f"{2.0 ** (-ell) + delta_hat}")
    t = q.message_qubits()
    return QipTranscript(ell=ell, completeness=completeness,
                         soundness_bound=soundness, communication=t + ell + 1,
                         t_qubits=t, eps_hat=eps_hat, delta_hat=delta_hat)


@dataclass
class HvqszkResult:
    real_state: np.ndarray
    sim_state: np.ndarray
    distance: float
    bound: float
    pr_match: float

    def as_dict(self):
        return {"distance": self.distance, "bound": self.bound,
                "pr_match": self.pr_match}


def hvqszk_check(p: CdqsProtocol, ell, x, y, sdp_tol=1e-9) -> HvqszkResult:
    """Zero-knowledge simulation check on a 1-input.

    The post-response verifier state (honest Merlin = certified decoder
    followed by a basis measurement) is compared with the simulator's state
    (the true secret substituted for Merlin's answer, messages traced out);
    the exact trace distance must respect 2 sqrt(1 - Pr[z = z']).
    """
    q = _to_ell_bits(p, ell)
    if q.predicate.value(x, y) != 1:
        raise ArgumentError("the simulation check runs on a 1-input")
    d = 2 ** ell
    joint = compose_joint(q, x, y)
    cert = certify_correctness(joint, tol=sdp_tol, compute_lb=False)
    jdn = joint.compose_decoder(cert.decoder, d)
    # q(z'|z) = <z'| (D.N)(|z><z|) |z'>
    cond = np.zeros((d, d))
    for z in range(d):
        for zp in range(d):
            cond[z, zp] = max(float(np.real(jdn[z * d + zp, z * d + zp])), 0.0)
    pr_match = float(np.mean([cond[z, z] for z in range(d)]))
    real_diag = np.zeros(d * d)
    sim_diag = np.zeros(d * d)
    for z in range(d):
        for zp in range(d):
            real_diag[z * d + zp] = cond[z, zp] / d
        sim_diag[z * d + z] = 1.0 / d
    distance = float(np.sum(np.abs(real_diag - sim_diag)))
    bound = 2.0 * math.sqrt(max(1.0 - pr_match, 0.0))
    if distance > bound + 1e-9:
        raise AssertionFailure(
            f"simulation distance {distance} exceeded 2 sqrt(1-Pr) = {bound}")
    return HvqszkResult(real_state=np.diag(real_diag), sim_state=np.diag(sim_diag),
                        distance=distance, bound=bound, pr_match=pr_match)
