"""Acceptance suite: desk-scale reproduction of the constructive claims.

Each test pins one acceptance criterion at its stated tolerance and prints
a single pass/fail line (visible regardless of capture settings). Runtime
budgets are asserted alongside the numerical bounds.
"""

import time

import numpy as np
import pytest

from cdqs_lab.blocks import labeled_from_channel
from cdqs_lab.channels import QuantumChannel, depolarizing, identity_channel
from cdqs_lab.errors import ArgumentError
from cdqs_lab.linalg import fidelity, trace_distance
from cdqs_lab.protocols.cds import verify_cds_exact
from cdqs_lab.protocols.verify import verify_cdqs
from cdqs_lab.protocols.zoo import (
    cds_equality,
    cds_inner_product,
    lifted_equality,
    lifted_equality_qutrit,
    lifted_inner_product,
    parallel_cdqs,
)
from cdqs_lab.reductions import (
    Distribution,
    haar_l2_identity_check,
    hvqszk_check,
    l2_closed_form,
    l2_distinguisher_exact,
    one_way_reduction,
    pp_reduction,
    pp_s0,
    qip2_from_cdqs,
)
from cdqs_lab.sdp.certify import decoupling_check
from cdqs_lab.transforms.closure import (
    and_compose,
    negate,
    or_compose,
    qss_2of2,
    qss_2of3,
    with_alice_noise,
)
from cdqs_lab.transforms.qec import amplify, code_catalog, noise_bound
from conftest import random_channel, random_state


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False


def emit(capsys, label, ok, detail, seconds, budget):
    status = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"[acceptance] {label} {status} ({seconds:.1f}s / {budget:.0f}s) {detail}",
              flush=True)
    assert ok, f"{label}: {detail}"
    assert seconds < budget, f"{label}: runtime {seconds:.1f}s over budget {budget}s"


def test_c01_equality_cds(capsys):
    with Timer() as t:
        ok = True
        for n in (1, 2, 3):
            rep = verify_cds_exact(cds_equality(n))
            ok &= rep.eps_hat == 0.0 and rep.delta_hat < 1e-9
            ok &= rep.meta["communication_bits"] == 2
    emit(capsys, "C01 equality-cds", ok, "eps=delta=0, comm=2 bits at n=1..3",
         t.seconds, 1.0)


def test_c02_inner_product_cds(capsys):
    with Timer() as t:
        ok = True
        for n in (1, 2, 3):
            rep = verify_cds_exact(cds_inner_product(n))
            ok &= rep.eps_hat == 0.0 and rep.delta_hat < 1e-9
            ok &= rep.meta["communication_bits"] == n + 2
    emit(capsys, "C02 inner-product-cds", ok, "eps=delta=0, comm=n+2 bits at n=1..3",
         t.seconds, 5.0)


def test_c03_lift(capsys):
    with Timer() as t:
        rep = verify_cdqs(lifted_equality(2))
        ok = rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6 and rep.passed
    emit(capsys, "C03 cds-to-cdqs-lift", ok,
         f"lifted EQ n=2: eps_hat={rep.eps_hat:.2e} delta_hat={rep.delta_hat:.2e}",
         t.seconds, 120.0)


def test_c04_closure(capsys):
    with Timer() as t:
        base = lifted_equality(2)
        neg = negate(base)
        bound = base.message_qubits() + 2 * base.resource_qubits_per_side() + 1
        rep = verify_cdqs(neg)
        ok = rep.eps_hat <= 1e-6 and rep.delta_hat <= 1e-6
        ok &= neg.message_qubits() <= bound
        ok &= np.array_equal(neg.predicate.table,
                             base.predicate.negation().table)
        double = negate(neg)
        rep2 = verify_cdqs(double)
        ok &= np.array_equal(double.predicate.table, base.predicate.table)
        ok &= rep2.eps_hat <= 1e-6 and rep2.delta_hat <= 1e-6
    emit(capsys, "C04 closure-negation", ok,
         f"NEQ eps={rep.eps_hat:.2e} delta={rep.delta_hat:.2e}, "
         f"{neg.message_qubits()}<= {bound} qubits, double negation recovers EQ",
         t.seconds, 300.0)


def test_c05_and_or(capsys):
    with Timer() as t:
        ok = True
        details = []
        for eps in (0.0, 0.02):
            p1 = lifted_equality(1)
            p2 = parallel_cdqs(p1, 2)
            if eps > 0:
                p1 = with_alice_noise(p1, eps)
                p2 = with_alice_noise(p2, eps)
            rep_and = verify_cdqs(and_compose(p1, p2))
            ok &= rep_and.eps_hat <= 2 * eps + 1e-3
            q = lifted_equality_qutrit(1)
            if eps > 0:
                q = with_alice_noise(q, eps)
            rep_or = verify_cdqs(or_compose(q, q))
            ok &= rep_or.delta_hat <= 1e-3      # 2*delta + 1e-3 with delta = 0
            details.append(f"eps={eps}: AND {rep_and.eps_hat:.4f}<= {2 * eps + 1e-3}, "
                           f"OR delta {rep_or.delta_hat:.2e}<=1e-3")
    emit(capsys, "C05 and-or-composition", ok, "; ".join(details), t.seconds, 600.0)


def test_c06_amplification(capsys):
    with Timer() as t:
        code = code_catalog("five_qubit")
        noise = depolarizing(2 * 0.01 / 3, 2)
        res = amplify(None, code, noise)
        ok = res.measured_error <= 0.014778113
        ok &= abs(res.bound - 2 * 10 * (np.e * res.params.epsilon_in) ** 2) < 1e-9
        try:
            noise_bound(5, 1, 0.7)
            ok = False
        except ArgumentError:
            pass
    emit(capsys, "C06 amplification", ok,
         f"[[5,1,3]] at 0.01: logical {res.measured_error:.2e} <= {res.bound:.5f}, "
         "eps>2/3 refused", t.seconds, 60.0)


def test_c07_one_way_reduction(capsys):
    with Timer() as t:
        ok = True
        for proto in (lifted_equality(2), lifted_inner_product(2)):
            rep = one_way_reduction(proto, mode="oracle")
            ok &= rep.all_correct
            for row in rep.rows:
                if row.f == 0:
                    ok &= row.distance <= 0.09
                else:
                    ok &= row.distance >= 0.496 - 1e-3
    emit(capsys, "C07 one-way-reduction", ok,
         "EQ and IP at n=2 classified exactly; distances respect the gap",
         t.seconds, 120.0)


def test_c08_l2_distinguisher(capsys):
    rng = np.random.default_rng(8)
    with Timer() as t:
        worst = 0.0
        for _ in range(100):
            size = int(rng.integers(2, 9))
            a = rng.random(size); a /= a.sum()
            b = rng.random(size); b /= b.sum()
            d0, d1 = Distribution(a), Distribution(b)
            worst = max(worst, abs(l2_distinguisher_exact(d0, d1) -
                                   l2_closed_form(d0, d1)))
        ok = worst < 1e-12
    emit(capsys, "C08 l2-distinguisher", ok,
         f"exact == 1/2+||D0-D1||_2^2/8 on 100 pairs (worst dev {worst:.1e})",
         t.seconds, 1.0)


def test_c09_haar_identity(capsys):
    rng = np.random.default_rng(9)
    with Timer() as t:
        ok = True
        rels = []
        for seed in (101, 102, 103):
            rho = random_state(rng, 4)
            sigma = random_state(rng, 4)
            est, exact = haar_l2_identity_check(rho, sigma, samples=2000, seed=seed)
            rel = abs(est - exact) / exact
            rels.append(rel)
            ok &= rel <= 0.05
    emit(capsys, "C09 haar-identity", ok,
         f"3 pairs at d=4, 2000 samples, rel errors {[f'{r:.3f}' for r in rels]}",
         t.seconds, 30.0)


def test_c10_pp_reduction(capsys):
    with Timer() as t:
        formula = pp_s0(0.09, 8)
        ok = abs(formula - 1.7424 / 289.7424) < 1e-9
        rep = pp_reduction(lifted_equality(1))
        ok &= rep.valid
        for row in rep.rows:
            if row["f"] == 0:
                ok &= abs(row["p_correct"] - (1 + rep.s) / 2) < 1e-12
            else:
                ok &= row["p_correct"] > 0.5
        ok &= abs(rep.s - rep.s0 / 2) < 1e-18
    emit(capsys, "C10 pp-reduction", ok,
         f"s0(0.09, 8)={formula:.4e}; 0-inputs exactly (1+s)/2, 1-inputs biased up",
         t.seconds, 120.0)


def test_c11_qip2(capsys):
    with Timer() as t:
        qt = qip2_from_cdqs(lifted_equality(2), 2)
        ok = qt.completeness >= 1 - 1e-6
        ok &= abs(qt.soundness_bound - 0.25) <= 1e-6
        ok &= qt.communication == qt.t_qubits + 3
    emit(capsys, "C11 qip2", ok,
         f"completeness={qt.completeness:.8f} soundness={qt.soundness_bound:.8f} "
         f"comm={qt.communication}=t+3", t.seconds, 120.0)


def test_c12_hvqszk(capsys):
    with Timer() as t:
        ok = True
        vals = []
        for p_noise in (0.0, 0.05, 0.1):
            proto = lifted_equality(1)
            if p_noise > 0:
                proto = with_alice_noise(proto, 1.5 * p_noise)
            res = hvqszk_check(proto, 1, 0, 0)
            ok &= res.distance <= res.bound + 1e-9
            vals.append((res.distance, res.bound))
    emit(capsys, "C12 hvqszk", ok,
         "; ".join(f"p={p}: {d:.4f}<={b:.4f}" for p, (d, b) in
                   zip((0.0, 0.05, 0.1), vals)),
         t.seconds, 120.0)


def test_c13_property_suites(capsys):
    rng = np.random.default_rng(13)
    with Timer() as t:
        ok = True
        # Decoupling sandwich on 20 random channels.
        for _ in range(20):
            ch = random_channel(rng, 2, 2)
            lhs, mid, rhs = decoupling_check(labeled_from_channel(ch).choi_blocks())
            ok &= lhs <= mid + 1e-6 <= rhs + 2e-6
        # Fuchs-van de Graaf, both directions, 10^3 pairs.
        for _ in range(1000):
            d = int(rng.integers(2, 4))
            rho, sigma = random_state(rng, d), random_state(rng, d)
            f = fidelity(rho, sigma)
            half_t = 0.5 * trace_distance(rho, sigma)
            ok &= 1 - np.sqrt(f) <= half_t + 1e-9 <= np.sqrt(1 - f) + 2e-9
        # QSS authorized/unauthorized invariants.
        enc, rec = qss_2of2()
        ok &= np.max(np.abs(rec.compose(enc).choi -
                            identity_channel(2).choi)) < 1e-10
        from cdqs_lab.linalg import SystemDims, partial_trace
        qss = qss_2of3()
        dims = SystemDims([("s0", 3), ("s1", 3), ("s2", 3)])
        for _ in range(3):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            v /= np.linalg.norm(v)
            rho3 = np.outer(qss.isometry @ v, (qss.isometry @ v).conj())
            for lab in ("s0", "s1", "s2"):
                ok &= np.max(np.abs(partial_trace(rho3, dims, [lab]) -
                                    np.eye(3) / 3)) < 1e-10
            for pair, keep in [((0, 1), ["s0", "s1"]), ((1, 2), ["s1", "s2"]),
                               ((0, 2), ["s0", "s2"])]:
                got = qss.reconstructor(pair).apply(partial_trace(rho3, dims, keep))
                ok &= np.max(np.abs(got - np.outer(v, v.conj()))) < 1e-10
        # Choi <-> Kraus round trips.
        from cdqs_lab.linalg import hermitian_basis
        for _ in range(10):
            ch = random_channel(rng, 2, 3)
            back = QuantumChannel.from_choi(ch.choi, 2, 3)
            for h in hermitian_basis(2):
                ok &= np.max(np.abs(ch.apply(h) - back.apply(h))) < 1e-10
    emit(capsys, "C13 property-suites", ok,
         "decoupling x20, Fuchs-van de Graaf x1000, QSS invariants, "
         "Choi/Kraus round-trips", t.seconds, 600.0)
