import numpy as np
import pytest

from cdqs_lab.blocks import (
    BlockChoi,
    BlockState,
    LabeledKrausChannel,
    block_trace_distance,
    detect_output_blocks,
    fingerprint_cached,
    group_blocks,
    labeled_from_channel,
)
from cdqs_lab.channels import QuantumChannel, identity_channel
from cdqs_lab.errors import ArgumentError
from cdqs_lab.linalg import herm
from conftest import random_channel, random_state


def two_block_channel(rng):
    """Channel into ('a': 2-dim) (+) ('b': 1-dim) blocks."""
    g = rng.normal(size=(3 * 2, 2)) + 1j * rng.normal(size=(3 * 2, 2))
    q, _ = np.linalg.qr(g)
    v = q[:, :2]
    ops = []
    for e in range(2):
        k = v.reshape(3, 2, 2)[:, e, :]
        ops.append(("a", k[:2, :]))
        ops.append(("b", k[2:, :]))
    return LabeledKrausChannel(2, ops)


def test_labeled_apply_matches_dense(rng):
    ch = two_block_channel(rng)
    rho = random_state(rng, 2)
    out = ch.apply(rho)
    dense_ops, offsets, total = ch.dense_kraus()
    ref = sum(k @ rho @ k.conj().T for k in dense_ops)
    got = np.zeros((total, total), dtype=complex)
    for lab, blk in out.blocks.items():
        o = offsets[lab]
        got[o:o + blk.shape[0], o:o + blk.shape[0]] = blk
    assert np.max(np.abs(got - ref)) < 1e-12


def test_choi_blocks_match_dense_choi(rng):
    ch = two_block_channel(rng)
    bc = ch.choi_blocks()
    dense_ops, offsets, total = ch.dense_kraus()
    dense = QuantumChannel(dense_ops, d_in=2, d_out=total, check=False).choi
    rebuilt = bc.dense(order=sorted(bc.blocks, key=repr))
    # Same block layout because offsets follow sorted labels too.
    assert np.max(np.abs(rebuilt - dense)) < 1e-12
    bc.validate_cptp(atol=1e-9)


def test_block_choi_apply_and_marginals(rng):
    ch = two_block_channel(rng)
    bc = ch.choi_blocks()
    rho = random_state(rng, 2)
    out1 = bc.apply(rho)
    out2 = ch.apply(rho)
    for lab in out2.blocks:
        assert np.max(np.abs(out1.blocks[lab] - out2.blocks[lab])) < 1e-11
    assert np.max(np.abs(bc.input_marginal() - np.eye(2))) < 1e-9


def test_labeled_tensor(rng):
    ch = two_block_channel(rng)
    t = ch.tensor(ch)
    rho = random_state(rng, 4)
    out = t.apply(rho)
    assert abs(out.trace() - 1.0) < 1e-9
    assert set(len(lab) for lab in t.out_dims) == {2}


def test_trace_factor(rng):
    # Build a channel into a 2x3 block and trace each factor.
    g = rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2))
    q, _ = np.linalg.qr(g)
    ch = LabeledKrausChannel(2, [("m", q[:, :2].reshape(6, 2))], check=False)
    factor_dims = {"m": (2, 3)}
    first = ch.trace_factor(factor_dims, keep="first")
    second = ch.trace_factor(factor_dims, keep="second")
    rho = random_state(rng, 2)
    full = ch.apply(rho).blocks["m"].reshape(2, 3, 2, 3)
    assert np.max(np.abs(first.apply(rho).blocks["m"] -
                         np.einsum("abcb->ac", full))) < 1e-11
    assert np.max(np.abs(second.apply(rho).blocks["m"] -
                         np.einsum("abac->bc", full))) < 1e-11


def test_labeled_complementary_matches_dense(rng):
    ch = two_block_channel(rng)
    comp = ch.complementary(("env",))
    dense_ops, _, total = ch.dense_kraus()
    ref = QuantumChannel(dense_ops, d_in=2, d_out=total, check=False).complementary()
    rho = random_state(rng, 2)
    got = comp.apply(rho).blocks[("env",)]
    want = ref.apply(rho)
    # Complements agree up to an environment isometry; compare spectra.
    sg = np.sort(np.linalg.eigvalsh(herm(got)))
    sw = np.sort(np.linalg.eigvalsh(herm(want)))
    k = min(len(sg), len(sw))
    assert np.max(np.abs(sg[-k:] - sw[-k:])) < 1e-9


def test_detect_output_blocks(rng):
    a = random_state(rng, 2)
    b = random_state(rng, 3)
    ch = identity_channel(1)
    # Block-diagonal Choi: direct sum of two channels on disjoint outputs.
    j = np.zeros((5, 5), dtype=complex)
    j[:2, :2] = a
    j[2:, 2:] = b
    bc = detect_output_blocks(j[None, :, :][0], 1)
    assert len(bc.blocks) == 2
    dims = sorted(bc.block_out_dim(l) for l in bc.blocks)
    assert dims == [2, 3]


def test_detect_output_blocks_full_when_dense(rng):
    j = random_state(rng, 4)
    bc = detect_output_blocks(j, 1)
    assert len(bc.blocks) == 1


def test_compose_decoder_matches_dense(rng):
    ch = two_block_channel(rng)
    bc = ch.choi_blocks()
    dec_blocks = {}
    for lab, d in ch.out_dims.items():
        dec = random_channel(rng, d, 2)
        dec_blocks[lab] = dec.choi
    jdn = bc.compose_decoder(dec_blocks, 2)
    # Dense reference: measure label, apply the per-label decoder.
    dense_ops, offsets, total = ch.dense_kraus()
    ops = []
    for lab, d in ch.out_dims.items():
        sel = np.zeros((d, total), dtype=complex)
        sel[:, offsets[lab]:offsets[lab] + d] = np.eye(d)
        dec = QuantumChannel.from_choi(dec_blocks[lab], d, 2)
        for k in dec.kraus:
            ops.append(k @ sel)
    big = QuantumChannel(ops, d_in=total, d_out=2, check=False)
    dense = QuantumChannel(dense_ops, d_in=2, d_out=total, check=False)
    ref = big.compose(dense).choi
    assert np.max(np.abs(jdn - ref)) < 1e-10


def test_group_blocks_shares_and_dedupes(rng):
    a = random_state(rng, 2)
    blocks = {"x": a, "y": a, "z": a.copy(), "w": random_state(rng, 2)}
    groups = group_blocks(blocks)
    assert len(groups) == 2
    sizes = sorted(len(labels) for _, labels in groups)
    assert sizes == [1, 3]
    assert fingerprint_cached(a) == fingerprint_cached(a)


def test_block_trace_distance(rng):
    a = BlockState({"u": random_state(rng, 2).astype(complex) / 2,
                    "v": random_state(rng, 2) / 2})
    assert abs(block_trace_distance(a, a)) < 1e-14
    b = BlockState({"u": a.blocks["v"], "v": a.blocks["u"]})
    dense_a = a.dense(order=["u", "v"])
    dense_b = b.dense(order=["u", "v"])
    want = float(np.sum(np.abs(np.linalg.eigvalsh(dense_a - dense_b))))
    assert abs(block_trace_distance(a, b) - want) < 1e-12


def test_labeled_kraus_validation():
    with pytest.raises(ArgumentError):
        LabeledKrausChannel(2, [("a", np.eye(2, dtype=complex) * 0.5)])
    # Inconsistent dims for one label.
    with pytest.raises(ArgumentError):
        LabeledKrausChannel(2, [("a", np.zeros((2, 2))), ("a", np.zeros((3, 2)))],
                            check=False)
