"""Concrete protocols: equality and inner-product CDS, the pad lift to CDQS,
negation-derived non-equality, and routing toys.

The equality scheme sends m0 = z + <a,x> + b and m1 = <a,y> + b over shared
randomness (a, b); the referee XORs the two bits. The inner-product scheme
is a span-program-style linear protocol: Alice sends alpha = z + s and
gamma = <x,r>, Bob sends beta = r + s*y, and on 1-inputs
<x,beta> + gamma = s unlocks the secret. Both are perfectly correct and
perfectly private, which the exhaustive verifier confirms.
"""

from __future__ import annotations

import numpy as np

from ..blocks import BlockState, LabeledKrausChannel
from ..errors import ArgumentError, CapacityError
from ..linalg import weyl
from . import predicates
from .cds import CdsProtocol, parallel_cds
from .model import CdqsProtocol, FRoutingProtocol


def _dot_bits(a, x, n):
    return bin(a & x).count("1") % 2


def _dot_mod(a, x, n, d):
    """<a, x> over Z_d with a a base-d digit string and x a bit string."""
    total = 0
    for i in range(n):
        total += ((a // d ** i) % d) * ((x >> i) & 1)
    return total % d


def cds_equality(n):
    """Equality CDS with 2 bits of communication, any n."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    pred = predicates.equality(n)
    nx = 1 << n
    nr = 1 << (n + 1)            # r = (a, b)
    m0 = np.zeros((nx, 2, nr), dtype=np.int64)
    m1 = np.zeros((nx, nr), dtype=np.int64)
    for r in range(nr):
        a, b = r >> 1, r & 1
        for x in range(nx):
            for z in range(2):
                m0[x, z, r] = z ^ _dot_bits(a, x, n) ^ b
            m1[x, r] = _dot_bits(a, x, n) ^ b
    return CdsProtocol(predicate=pred, num_secrets=2,
                       rand_probs=np.full(nr, 1.0 / nr), m0=m0, m1=m1,
                       name=f"eq{n}", meta={"communication_bits": 2})


def cds_inner_product(n):
    """Inner-product CDS with n + 2 bits of communication."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    pred = predicates.inner_product(n)
    nx = 1 << n
    nr = 1 << (n + 1)            # r = (rvec, s)
    m0 = np.zeros((nx, 2, nr), dtype=np.int64)
    m1 = np.zeros((nx, nr), dtype=np.int64)
    for r in range(nr):
        rvec, s = r >> 1, r & 1
        for x in range(nx):
            for z in range(2):
                alpha = z ^ s
                gamma = _dot_bits(x, rvec, n)
                m0[x, z, r] = 2 * alpha + gamma
        for y in range(nx):
            beta = rvec ^ (y if s else 0)
            m1[y, r] = beta
    return CdsProtocol(predicate=pred, num_secrets=2,
                       rand_probs=np.full(nr, 1.0 / nr), m0=m0, m1=m1,
                       name=f"ip{n}", meta={"communication_bits": n + 2})


def cds_to_cdqs_lift(c: CdsProtocol, d=2) -> CdqsProtocol:
    """Quantum-one-time-pad lift: a CDS hiding the d^2 pad keys hides a qudit.

    Alice draws pad keys (a, b) locally, applies the Heisenberg-Weyl
    X^a Z^b to the secret system, and runs the classical scheme on the key
    pair; the classical randomness becomes a shared classical-correlated
    resource state. The resulting protocol is (2 sqrt(eps))-correct and
    delta-secure, with the classical message symbols plus one message
    qudit. d = 2 is the canonical single-qubit case.
    """
    if c.num_secrets != d * d:
        raise ArgumentError(
            f"lift at d={d} needs a CDS hiding d^2 = {d * d} secrets, "
            f"got {c.num_secrets}")
    nx = 1 << c.predicate.n
    nr = len(c.rand_probs)
    alice = []
    for x in range(nx):
        fam = []
        for r in range(nr):
            ops = []
            for a in range(d):
                for b in range(d):
                    z = d * a + b
                    label = int(c.m0[x, z, r])
                    ops.append((label, weyl(a, b, d) / d))
            fam.append(LabeledKrausChannel(d, ops, check=False))
        alice.append(fam)
    bob = []
    for y in range(nx):
        fam = []
        for r in range(nr):
            label = int(c.m1[y, r])
            fam.append(BlockState({label: np.array([[1.0]], dtype=complex)}))
        bob.append(fam)
    eps = 2.0 * float(np.sqrt(max(c.declared_eps, 0.0)))
    return CdqsProtocol(predicate=c.predicate, d_q=d,
                        rand_probs=np.asarray(c.rand_probs, dtype=float),
                        alice=alice, bob=bob,
                        declared_eps=eps, declared_delta=c.declared_delta,
                        name=f"{c.name}_lifted" + (f"_d{d}" if d != 2 else ""),
                        meta={"base_cds": c.name,
                              "classical_message_bits": c.communication_bits,
                              "message_qudits_sent": 1})


def cds_equality_mod(n, d):
    """Equality CDS hiding a Z_d secret: m0 = z + <a,x> + b, m1 = <a,y> + b.

    For prime d the mask <a, x - y> is uniform over Z_d whenever x != y, so
    the scheme is perfectly correct and perfectly private.
    """
    if n < 1:
        raise ArgumentError("n must be >= 1")
    if d not in (2, 3, 5, 7):
        raise ArgumentError("modulus must be a small prime")
    pred = predicates.equality(n)
    nx = 1 << n
    nr = (d ** n) * d          # r = (a in Z_d^n, b in Z_d)
    m0 = np.zeros((nx, d, nr), dtype=np.int64)
    m1 = np.zeros((nx, nr), dtype=np.int64)
    for r in range(nr):
        a, b = r // d, r % d
        for x in range(nx):
            dot = _dot_mod(a, x, n, d)
            for z in range(d):
                m0[x, z, r] = (z + dot + b) % d
            m1[x, r] = (dot + b) % d
    return CdsProtocol(predicate=pred, num_secrets=d,
                       rand_probs=np.full(nr, 1.0 / nr), m0=m0, m1=m1,
                       name=f"eq{n}_mod{d}")


def lifted_equality_qutrit(n):
    """Lift of two parallel mod-3 equality instances: hides one qutrit."""
    return cds_to_cdqs_lift(parallel_cds(cds_equality_mod(n, 3), 2), d=3)


def lifted_equality(n):
    """Lift of two parallel equality instances: hides one qubit, any n."""
    return cds_to_cdqs_lift(parallel_cds(cds_equality(n), 2))


def lifted_inner_product(n):
    return cds_to_cdqs_lift(parallel_cds(cds_inner_product(n), 2))


def parallel_cdqs(p: CdqsProtocol, k: int, cap=200000) -> CdqsProtocol:
    """k independent instances on the same inputs, hiding d_q^k dimensions."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    if p.joint is not None:
        raise ArgumentError("parallel composition needs per-party families")
    nr = len(p.rand_probs)
    if nr ** k > cap:
        raise CapacityError(f"parallel randomness space {nr}^{k} exceeds cap")
    nx = 1 << p.predicate.n
    probs = p.rand_probs
    for _ in range(k - 1):
        probs = np.kron(probs, p.rand_probs)

    def combos(rr):
        return [(rr // nr ** i) % nr for i in range(k)]

    alice = []
    for x in range(nx):
        fam = []
        for rr in range(nr ** k):
            rd = combos(rr)
            ch = p.alice[x][rd[0]]
            for i in range(1, k):
                ch = ch.tensor(p.alice[x][rd[i]])
            fam.append(ch)
        alice.append(fam)
    bob = []
    for y in range(nx):
        fam = []
        for rr in range(nr ** k):
            rd = combos(rr)
            st = p.bob[y][rd[0]]
            for i in range(1, k):
                st = st.tensor(p.bob[y][rd[i]])
            fam.append(st)
        bob.append(fam)
    return CdqsProtocol(predicate=p.predicate, d_q=p.d_q ** k, rand_probs=probs,
                        alice=alice, bob=bob,
                        declared_eps=k * p.declared_eps,
                        declared_delta=k * p.declared_delta,
                        name=f"{p.name}_par{k}",
                        meta={"base": p.name, "instances": k})


def cdqs_nonequality_via_negation(n):
    """Non-equality CDQS: the closure transform applied to lifted equality."""
    from ..transforms.closure import negate
    if n > 3:
        raise CapacityError("non-equality via negation is desk-scale for n <= 3")
    return negate(lifted_equality(n))


# ---------------------------------------------------------------------------
# Routing toys.
# ---------------------------------------------------------------------------

def route_by_predicate(pred: predicates.Predicate, noise_p=0.0) -> FRoutingProtocol:
    """Swap the secret to the side named by f; the toy evaluates f per
    channel index. Optional depolarizing noise acts on the routed share."""
    from ..channels import depolarizing
    noise = depolarizing(noise_p, 2).kraus if noise_p > 0 else [np.eye(2, dtype=complex)]
    label = ("m",)
    channels = {}
    for x, y in pred.inputs():
        f = pred.value(x, y)
        ops = []
        for nk in noise:
            k = np.zeros((4, 2), dtype=complex)
            for q in range(2):
                for qp in range(2):
                    if f == 1:
                        # M holds the (noised) secret, M' holds |0>.
                        k[qp * 2 + 0, q] = nk[qp, q]
                    else:
                        k[0 * 2 + qp, q] = nk[qp, q]
            ops.append((label, k))
        channels[(x, y)] = [LabeledKrausChannel(2, ops, check=False)]
    eps = 1.5 * noise_p
    return FRoutingProtocol(predicate=pred, d_q=2, rand_probs=np.array([1.0]),
                            channels=channels, factor_dims={label: (2, 2)},
                            declared_eps=eps,
                            name=f"route_{pred.name}" + (f"_p{noise_p}" if noise_p else ""))


def always_keep_frouting(pred: predicates.Predicate) -> FRoutingProtocol:
    """Pathological routing that never sends the secret; 1-inputs must fail."""
    label = ("m",)
    channels = {}
    for x, y in pred.inputs():
        k = np.zeros((4, 2), dtype=complex)
        for q in range(2):
            k[0 * 2 + q, q] = 1.0
        channels[(x, y)] = [LabeledKrausChannel(2, [(label, k)], check=False)]
    return FRoutingProtocol(predicate=pred, d_q=2, rand_probs=np.array([1.0]),
                            channels=channels, factor_dims={label: (2, 2)},
                            declared_eps=0.0, name=f"keep_{pred.name}")


# ---------------------------------------------------------------------------
# Registry for the CLI and the service.
# ---------------------------------------------------------------------------

REGISTRY = {
    "eq": ("classical equality CDS, 2 bits of communication", cds_equality),
    "ip": ("classical inner-product CDS, n+2 bits of communication", cds_inner_product),
    "eq_lifted": ("pad lift of two parallel equality instances (1-qubit secret)",
                  lifted_equality),
    "eq_pp": ("alias of eq_lifted: perfectly private lifted equality", lifted_equality),
    "ip_lifted": ("pad lift of two parallel inner-product instances", lifted_inner_product),
    "neq": ("non-equality CDQS via the negation transform", cdqs_nonequality_via_negation),
    "route_eq": ("toy f-routing that swaps the secret per the equality predicate",
                 lambda n: route_by_predicate(predicates.equality(n))),
}


def list_protocols():
    return {name: desc for name, (desc, _) in sorted(REGISTRY.items())}


def build_named(name, n):
    key = name.lower()
    if key not in REGISTRY:
        raise ArgumentError(f"unknown protocol {name!r}; have {sorted(REGISTRY)}")
    return REGISTRY[key][1](n)
