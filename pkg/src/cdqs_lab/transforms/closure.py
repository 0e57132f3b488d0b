"""Protocol transformations: negation, and AND/OR composition via secret sharing.

Negation replaces each party's channel by a complementary channel. For the
classically correlated resources used here the complement is taken per
shared-randomness value: on the protocol's input promise the environment
carries no coherence across randomness values, so the per-value direct sum
equals the true party complement up to a per-sector environment isometry,
which no verification quantity can see. Bob's prep complements use the
fixed square-root Kraus family, so his environment state is the transpose
of his output state and no spectral-basis ambiguity enters.

AND splits the secret with the pad-and-key ((2,2)) scheme and feeds one
share to each sub-protocol; OR uses the polynomial ((2,3)) qutrit scheme
with one share sent in the clear. Composed protocols are represented by
their referee-channel builder (the composed channel is all any
verification condition constrains), with size accounting carried in
metadata.
"""

from __future__ import annotations

import numpy as np

from ..blocks import BlockChoi
from ..channels import QuantumChannel, depolarizing
from ..errors import ArgumentError
from ..linalg import basis_state, herm, pauli
from ..protocols.model import CdqsProtocol
from ..protocols.verify import compose_joint
from ..protocols.zoo import parallel_cdqs


# ---------------------------------------------------------------------------
# Quantum secret sharing gadgets.
# ---------------------------------------------------------------------------

def qss_2of2():
    """((2,2)) scheme: pad the qubit, keep the key in the second share.

    E(rho) = (1/4) sum_ab (X^a Z^b rho Z^b X^a) (x) |ab><ab|; the
    reconstructor reads the key and undoes the pad exactly. Each single
    share is input-independent.
    """
    enc = []
    rec = []
    for a in (0, 1):
        for b in (0, 1):
            key = basis_state(2 * a + b, 4)
            enc.append(0.5 * np.kron(pauli(a, b), key[:, None]))
            rec.append(np.kron(pauli(a, b).conj().T, key[None, :]))
    encoder = QuantumChannel(enc, d_in=2, d_out=8, check=False)
    reconstructor = QuantumChannel(rec, d_in=8, d_out=2, check=False)
    return encoder, reconstructor


def _qss23_isometry():
    v = np.zeros((27, 3), dtype=complex)
    for s in range(3):
        for a in range(3):
            idx = a * 9 + ((a + s) % 3) * 3 + ((a + 2 * s) % 3)
            v[idx, s] += 1.0 / np.sqrt(3.0)
    return v


_QSS23_MAPS = {
    (0, 1): lambda u, v: ((u + 2 * (v - u)) % 3, (v - u) % 3),
    (1, 2): lambda u, v: ((2 * u - v) % 3, (v - u) % 3),
    (0, 2): lambda u, v: ((2 * v - u) % 3, (2 * (v - u)) % 3),
}


class Qss23:
    """((2,3)) threshold scheme over qutrits: degree-1 polynomial shares."""

    def __init__(self):
        self.isometry = _qss23_isometry()
        self.encoder = QuantumChannel([self.isometry], d_in=3, d_out=27, check=False)
        self.embed = np.zeros((3, 2), dtype=complex)
        self.embed[0, 0] = 1.0
        self.embed[1, 1] = 1.0

    def reconstructor(self, pair):
        """Channel (shares i<j, third share traced) -> secret qutrit."""
        pair = tuple(sorted(pair))
        if pair not in _QSS23_MAPS:
            raise ArgumentError(f"share pair must be two of (0,1,2), got {pair}")
        mapping = _QSS23_MAPS[pair]
        u_mat = np.zeros((9, 9), dtype=complex)
        for u in range(3):
            for v in range(3):
                junk, s = mapping(u, v)
                u_mat[junk * 3 + s, u * 3 + v] = 1.0
        ops = [u_mat.reshape(3, 3, 9)[w, :, :] for w in range(3)]
        return QuantumChannel(ops, d_in=9, d_out=3, check=False)

    def unembed(self):
        k1 = self.embed.conj().T
        k2 = np.zeros((2, 3), dtype=complex)
        k2[0, 2] = 1.0
        return QuantumChannel([k1, k2], d_in=3, d_out=2, check=False)


def qss_2of3():
    return Qss23()


# ---------------------------------------------------------------------------
# Negation.
# ---------------------------------------------------------------------------

def _sqrt_psd(mat):
    w, v = np.linalg.eigh(herm(mat))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def negate(p: CdqsProtocol) -> CdqsProtocol:
    """CDQS for the negated predicate: both parties apply complements.

    The shared resource is held in purified form (the purifier of a mixed
    classical-correlated state sits with Bob; his channel ignores it, so the
    base protocol is unchanged, but his complement retains it). The composed
    negated channel then has an exact closed form: environment coherences
    survive between randomness values exactly when both message registers
    agree, so the referee's Choi decomposes into blocks labelled by message
    values. Declared parameters map as (eps, delta) -> (2 sqrt(delta),
    2 sqrt(eps)); the resource state is unchanged.

    Negating twice composes the two canonical dilations back into the
    original referee channel exactly (the double complement is the original
    channel up to an environment isometry), so the double negation reuses
    the base protocol's composed channels.
    """
    base = p.meta.get("_negation_base")
    eps_new = 2.0 * float(np.sqrt(max(p.declared_delta, 0.0)))
    delta_new = 2.0 * float(np.sqrt(max(p.declared_eps, 0.0)))
    if base is not None:
        def provider(x, y, _b=base):
            return compose_joint(_b, x, y, validate=False)

        return CdqsProtocol(
            predicate=p.predicate.negation(), d_q=p.d_q,
            rand_probs=base.rand_probs, joint_provider=provider,
            declared_eps=eps_new, declared_delta=delta_new,
            name=f"neg_{p.name}",
            meta={"message_space_dim": sum(base.message_space().values()),
                  "message_qubits": base.message_qubits(),
                  "resource_qubits_per_side": base.resource_qubits_per_side(),
                  "_negation_base": p})
    if p.alice is None or p.bob is None:
        raise ArgumentError("negation needs per-party channel families")

    nr = len(p.rand_probs)
    probs = p.rand_probs
    m1_dims = sorted(p.m1_space().items(), key=repr)
    ea_dim = sum(max(len(p.alice[x][r].ops) for x in range(1 << p.predicate.n))
                 for r in range(nr))
    eb_dim = nr * sum(d for _, d in m1_dims)

    def provider(x, y):
        members = {}
        for r in range(nr):
            sp = np.sqrt(probs[r])
            if sp == 0.0:
                continue
            bob_sqrts = {lb: _sqrt_psd(m) for lb, m in p.bob[y][r].blocks.items()}
            for k, (la, kop) in enumerate(p.alice[x][r].ops):
                if np.max(np.abs(kop)) == 0.0:
                    continue
                for lb, sq in bob_sqrts.items():
                    for e in range(sq.shape[1]):
                        if np.max(np.abs(sq[:, e])) == 0.0:
                            continue
                        members.setdefault((la, lb), []).append((sp, kop, sq, e))
        blocks = {}
        for label, mem in members.items():
            nb = len(mem)
            blk = np.zeros((p.d_q, nb, p.d_q, nb), dtype=complex)
            for mi, (spi, ki, sqi, ei) in enumerate(mem):
                for mj, (spj, kj, sqj, ej) in enumerate(mem):
                    t = kj.conj().T @ ki
                    g = (sqj @ sqi)[ej, ei]
                    blk[:, mi, :, mj] += (spi * spj * g) * t.T
            blocks[label] = blk.reshape(p.d_q * nb, p.d_q * nb)
        return BlockChoi(p.d_q, blocks)

    return CdqsProtocol(
        predicate=p.predicate.negation(), d_q=p.d_q, rand_probs=p.rand_probs,
        joint_provider=provider,
        declared_eps=eps_new, declared_delta=delta_new,
        name=f"neg_{p.name}",
        meta={"base": p.name,
              "_negation_base": p,
              "message_space_dim": ea_dim * eb_dim,
              "message_qubits":
                  int(np.ceil(np.log2(max(ea_dim, 2)))) +
                  int(np.ceil(np.log2(max(eb_dim, 2)))),
              "resource_qubits_per_side": p.resource_qubits_per_side(),
              "base_message_qubits": p.message_qubits(),
              "base_resource_qubits": p.resource_qubits_per_side()})


# ---------------------------------------------------------------------------
# AND / OR composition.
# ---------------------------------------------------------------------------

def _ensure_secret_dim(p: CdqsProtocol, d):
    if p.d_q == d:
        return p
    if p.d_q == 2 and d == 4:
        return parallel_cdqs(p, 2)
    raise ArgumentError(f"sub-protocol hides d={p.d_q}, need {d}")


def _linked_provider(jv, d_q, d_mid, p1, p2, extra_dim=None):
    """Compose a fixed encoder Choi with the two sub-protocols' referee Chois.

    jv: Choi of the encoder isometry Q -> (extra (x) Q1' (x) Q2') as a dense
    array; d_mid = (d_Q1', d_Q2'); extra_dim = clear-share dimension or None.
    """
    from ..blocks import group_blocks

    d1m, d2m = d_mid
    g = extra_dim or 1
    jv6 = jv.reshape(d_q, g, d1m, d2m, d_q, g, d1m, d2m)
    cache = {}

    def provider(x, y):
        if (x, y) in cache:
            return cache[(x, y)]
        j1 = compose_joint(p1, x, y, validate=False)
        j2 = compose_joint(p2, x, y, validate=False)
        blocks = {}
        # One contraction per distinct content pair; every matching label
        # pair shares the resulting array.
        for b1, labels1 in group_blocks(j1.blocks):
            da = b1.shape[0] // d1m
            b1r = b1.reshape(d1m, da, d1m, da)
            for b2, labels2 in group_blocks(j2.blocks):
                dc = b2.shape[0] // d2m
                b2r = b2.reshape(d2m, dc, d2m, dc)
                out = np.einsum("igqrjhpt,qapb,rcte->igacjhbe", jv6, b1r, b2r,
                                optimize=True)
                blk = out.reshape(d_q * g * da * dc, d_q * g * da * dc)
                for l1 in labels1:
                    for l2 in labels2:
                        label = ("clear", l1, l2) if extra_dim else (l1, l2)
                        blocks[label] = blk
        res = BlockChoi(d_q, blocks)
        cache[(x, y)] = res
        return res

    return provider


def and_compose(p1: CdqsProtocol, p2: CdqsProtocol) -> CdqsProtocol:
    """CDQS for f1 AND f2: ((2,2))-share the secret across the sub-protocols.

    Composed declared parameters: (2 eps, delta) with eps/delta the worst of
    the sub-protocols' declared values.
    """
    if p1.d_q != 2:
        raise ArgumentError("AND composition expects a 1-qubit first protocol")
    p2 = _ensure_secret_dim(p2, 4)
    if p1.predicate.n != p2.predicate.n:
        raise ArgumentError("sub-predicates must share the input length")
    encoder, _ = qss_2of2()
    jv = encoder.choi
    provider = _linked_provider(jv, 2, (2, 4), p1, p2)
    pred = p1.predicate.and_with(p2.predicate)
    eps = max(p1.declared_eps, p2.declared_eps)
    delta = max(p1.declared_delta, p2.declared_delta)
    m_dim = sum(p1.message_space().values()) * sum(p2.message_space().values())
    return CdqsProtocol(
        predicate=pred, d_q=2, rand_probs=np.array([1.0]),
        joint_provider=provider,
        declared_eps=2.0 * eps, declared_delta=delta,
        name=f"and({p1.name},{p2.name})",
        meta={"message_space_dim": m_dim,
              "message_qubits": p1.message_qubits() + p2.message_qubits(),
              "resource_qubits_per_side":
                  p1.resource_qubits_per_side() + p2.resource_qubits_per_side(),
              "sub_protocols": [p1.name, p2.name]})


def or_compose(p1: CdqsProtocol, p2: CdqsProtocol) -> CdqsProtocol:
    """CDQS for f1 OR f2: ((2,3))-share the secret, one share in the clear.

    The sub-protocols must hide qutrits (the share dimension); the zoo
    provides qutrit-lifted constructions. Composed declared parameters:
    (eps, 2 delta).
    """
    for p in (p1, p2):
        if p.d_q != 3:
            raise ArgumentError(
                "OR composition needs qutrit-secret sub-protocols "
                "(e.g. zoo.lifted_equality_qutrit)")
    if p1.predicate.n != p2.predicate.n:
        raise ArgumentError("sub-predicates must share the input length")
    qss = qss_2of3()
    kv = qss.isometry @ qss.embed
    wm = kv.T.ravel()
    jv = np.outer(wm, wm.conj())
    provider = _linked_provider(jv, 2, (3, 3), p1, p2, extra_dim=3)
    pred = p1.predicate.or_with(p2.predicate)
    eps = max(p1.declared_eps, p2.declared_eps)
    delta = max(p1.declared_delta, p2.declared_delta)
    m_dim = 3 * sum(p1.message_space().values()) * sum(p2.message_space().values())
    clear_qubits = 2
    return CdqsProtocol(
        predicate=pred, d_q=2, rand_probs=np.array([1.0]),
        joint_provider=provider,
        declared_eps=eps, declared_delta=2.0 * delta,
        name=f"or({p1.name},{p2.name})",
        meta={"message_space_dim": m_dim,
              "message_qubits":
                  p1.message_qubits() + p2.message_qubits() + clear_qubits,
              "resource_qubits_per_side":
                  p1.resource_qubits_per_side() + p2.resource_qubits_per_side(),
              "sub_protocols": [p1.name, p2.name]})


# ---------------------------------------------------------------------------
# Noise injection (test tooling for the composition bounds).
# ---------------------------------------------------------------------------

def with_alice_noise(p: CdqsProtocol, diamond_eps, declared_eps=None) -> CdqsProtocol:
    """Depolarize the quantum part of Alice's message to diamond error eps.

    Blocks of dimension 2^k get the noise on their first qubit factor
    (diamond distance to identity exactly 3p/2 with p = 2 eps / 3);
    other block dimensions d get full depolarizing with p matched through
    ||I - S_{I/d} tr||_diamond = 2 (1 - 1/d^2).
    """
    if diamond_eps < 0:
        raise ArgumentError("noise level must be nonnegative")
    if p.joint_provider is not None or p.joint is not None:
        raise ArgumentError("noise injection needs per-party families")
    if diamond_eps == 0:
        return p
    qubit_ops = depolarizing(2.0 * diamond_eps / 3.0, 2).kraus

    def chooser(d):
        if d == 1:
            return None
        if d == 2:
            return qubit_ops
        if d % 2 == 0:
            return [np.kron(k, np.eye(d // 2, dtype=complex)) for k in qubit_ops]
        pd = diamond_eps / (2.0 * (1.0 - 1.0 / d ** 2))
        return depolarizing(pd, d).kraus

    alice = [[ch.post_compose_block(chooser) for ch in fam] for fam in p.alice]
    return CdqsProtocol(predicate=p.predicate, d_q=p.d_q, rand_probs=p.rand_probs,
                        alice=alice, bob=p.bob,
                        declared_eps=p.declared_eps + diamond_eps
                        if declared_eps is None else declared_eps,
                        declared_delta=p.declared_delta,
                        name=f"{p.name}_noise{diamond_eps}",
                        meta=dict(p.meta, noise_eps=diamond_eps))
