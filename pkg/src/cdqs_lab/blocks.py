"""Direct-sum (classically labelled) spaces, states, channels, and Chois.

Protocol message registers decompose as M = (+)_c H_c over classical labels
c (message values, shared-randomness values, ...). Everything the verifiers
compute (decoder fidelities, simulator distances, diamond norms) is
invariant under pinching onto such a decomposition whenever all data
matrices are block-diagonal, so states and Chois are stored per block and
never materialized densely. Labels are hashable tuples; tensoring spaces
pairs labels.

Index convention for Choi blocks: the channel input is the first tensor
factor, so a block for label c of a channel with input dimension d_in is a
(d_in*d_c) x (d_in*d_c) matrix indexed by i*d_c + a.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .linalg import herm

FINGERPRINT_DECIMALS = 12


def fingerprint(arr):
    """Stable content hash used to dedupe identical SDP blocks."""
    a = np.round(np.asarray(arr, dtype=complex), FINGERPRINT_DECIMALS) + 0.0
    return (a.shape, a.tobytes())


class _FingerprintCache:
    """Memoize fingerprints by array identity.

    Composed protocols share one ndarray across many labels; hashing each
    label's block separately would dominate the runtime. Holding a
    reference to the array keeps its id stable.
    """

    def __init__(self):
        self._by_id = {}

    def get(self, arr):
        key = id(arr)
        hit = self._by_id.get(key)
        if hit is not None:
            return hit[0]
        fp = fingerprint(arr)
        self._by_id[key] = (fp, arr)
        return fp


_FP_CACHE = _FingerprintCache()


def fingerprint_cached(arr):
    return _FP_CACHE.get(arr)


def group_blocks(blocks):
    """Group {label: array} by shared array content; returns
    [(array, [labels])] with identity-first, fingerprint-second matching."""
    by_fp = {}
    for label, arr in blocks.items():
        fp = fingerprint_cached(arr)
        by_fp.setdefault(fp, (arr, []))[1].append(label)
    return [(arr, labels) for arr, labels in by_fp.values()]


class BlockState:
    """Block-diagonal Hermitian operator over labelled blocks.

    Used both for density operators (total trace 1) and for unnormalized
    positive operators; normalization is the caller's business.
    """

    def __init__(self, blocks):
        self.blocks = {}
        for label, mat in dict(blocks).items():
            mat = np.asarray(mat, dtype=complex)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ArgumentError(f"block {label!r} is not square: {mat.shape}")
            self.blocks[label] = mat

    @property
    def labels(self):
        return list(self.blocks)

    @property
    def total_dim(self):
        return sum(m.shape[0] for m in self.blocks.values())

    def trace(self):
        return float(sum(np.real(np.trace(m)) for m in self.blocks.values()))

    def scaled(self, c):
        return BlockState({l: c * m for l, m in self.blocks.items()})

    def tensor(self, other):
        out = {}
        for la, ma in self.blocks.items():
            for lb, mb in other.blocks.items():
                out[(la, lb)] = np.kron(ma, mb)
        return BlockState(out)

    def add_into(self, other):
        """Accumulate other's blocks into self (mutating helper for builders)."""
        for l, m in other.blocks.items():
            if l in self.blocks:
                self.blocks[l] = self.blocks[l] + m
            else:
                self.blocks[l] = m.copy()
        return self

    def dense(self, order=None):
        labels = order if order is not None else sorted(self.blocks, key=repr)
        n = sum(self.blocks[l].shape[0] for l in labels)
        out = np.zeros((n, n), dtype=complex)
        at = 0
        for l in labels:
            d = self.blocks[l].shape[0]
            out[at:at + d, at:at + d] = self.blocks[l]
            at += d
        return out

    def eigvals(self):
        return np.concatenate([np.linalg.eigvalsh(herm(m)) for m in self.blocks.values()]) \
            if self.blocks else np.zeros(0)

    def trace_norm(self):
        return float(np.sum(np.abs(self.eigvals())))

    def hs_norm_sq(self):
        return float(sum(np.real(np.vdot(m, m)) for m in self.blocks.values()))


def block_difference(a: BlockState, b: BlockState):
    out = {l: m.copy() for l, m in a.blocks.items()}
    for l, m in b.blocks.items():
        if l in out:
            out[l] = out[l] - m
        else:
            out[l] = -m
    return BlockState(out)


def block_trace_distance(a: BlockState, b: BlockState):
    return block_difference(a, b).trace_norm()


class LabeledKrausChannel:
    """CPTP map from a d_in-dimensional input into a labelled direct sum.

    Kraus operators are block-confined: each op is a pair (label, K) with K
    of shape (d_label, d_in), and the channel acts as
    rho -> (+)_labels sum_{K in label} K rho K^dag.
    """

    def __init__(self, d_in, ops, check=True, atol=1e-9):
        self.d_in = int(d_in)
        self.ops = []
        self.out_dims = {}
        for label, k in ops:
            k = np.asarray(k, dtype=complex)
            if k.shape[1] != self.d_in:
                raise ArgumentError(f"Kraus for label {label!r} has input dim "
                                    f"{k.shape[1]}, expected {self.d_in}")
            d = self.out_dims.setdefault(label, k.shape[0])
            if d != k.shape[0]:
                raise ArgumentError(f"label {label!r} has inconsistent dims {d} vs {k.shape[0]}")
            self.ops.append((label, k))
        if check:
            comp = np.zeros((self.d_in, self.d_in), dtype=complex)
            for _, k in self.ops:
                comp += k.conj().T @ k
            dev = np.max(np.abs(comp - np.eye(self.d_in)))
            if dev > atol:
                raise ArgumentError(
                    f"labelled Kraus completeness violated: deviation {dev:.3e}")

    @property
    def total_out_dim(self):
        return sum(self.out_dims.values())

    def apply(self, rho):
        rho = np.asarray(rho, dtype=complex)
        out = {}
        for label, k in self.ops:
            t = k @ rho @ k.conj().T
            if label in out:
                out[label] += t
            else:
                out[label] = t
        return BlockState(out)

    def choi_blocks(self):
        """BlockChoi of the channel: per label, sum_K vec(K) vec(K)^dag."""
        by_label = {}
        for label, k in self.ops:
            by_label.setdefault(label, []).append(k)
        blocks = {}
        for label, ks in by_label.items():
            wm = np.array([k.T.ravel() for k in ks])
            blocks[label] = wm.T @ wm.conj()
        return BlockChoi(self.d_in, blocks)

    def tensor(self, other):
        ops = [((la, lb), np.kron(ka, kb))
               for la, ka in self.ops for lb, kb in other.ops]
        return LabeledKrausChannel(self.d_in * other.d_in, ops, check=False)

    def post_compose_block(self, channel_for_dim):
        """Apply a small channel to each block's quantum factor.

        channel_for_dim(d) must return a list of d x d Kraus operators (or
        None to leave blocks of that dimension untouched).
        """
        ops = []
        for label, k in self.ops:
            noise = channel_for_dim(k.shape[0])
            if noise is None:
                ops.append((label, k))
            else:
                for nk in noise:
                    ops.append((label, nk @ k))
        return LabeledKrausChannel(self.d_in, ops, check=False)

    def dense_kraus(self, order=None):
        """Embed into the dense direct-sum space; returns (ops, offsets, total)."""
        labels = order if order is not None else sorted(self.out_dims, key=repr)
        offsets = {}
        at = 0
        for l in labels:
            offsets[l] = at
            at += self.out_dims[l]
        ops = []
        for label, k in self.ops:
            big = np.zeros((at, self.d_in), dtype=complex)
            big[offsets[label]:offsets[label] + k.shape[0], :] = k
            ops.append(big)
        return ops, offsets, at

    def trace_factor(self, factor_dims, keep="first", relabel=None):
        """Trace out one tensor factor of every block (Kraus-level).

        factor_dims: {label: (d_first, d_second)}; blocks are laid out as
        first (x) second. Returns the reduced labelled channel.
        """
        ops = []
        for label, k in self.ops:
            d1, d2 = factor_dims[label]
            k3 = k.reshape(d1, d2, self.d_in)
            new_label = relabel(label) if relabel else label
            if keep == "first":
                for e in range(d2):
                    ops.append((new_label, k3[:, e, :]))
            else:
                for e in range(d1):
                    ops.append((new_label, k3[e, :, :]))
        return LabeledKrausChannel(self.d_in, ops, check=False)

    def complementary(self, env_label):
        """Complement with a single coherent environment block.

        Minimal environment: the Kraus family is Gram-reduced first, giving
        env_dim = Choi rank <= d_in * d_out.
        """
        from .channels import _reduce_kraus
        dense, _, total = self.dense_kraus()
        dense = _reduce_kraus(dense)
        env = len(dense)
        ops = []
        for o in range(total):
            c = np.zeros((env, self.d_in), dtype=complex)
            for e, k in enumerate(dense):
                c[e, :] = k[o, :]
            if np.max(np.abs(c)) == 0.0:
                continue
            ops.append((env_label, c))
        if not ops:
            ops = [(env_label, np.zeros((env, self.d_in), dtype=complex))]
        return LabeledKrausChannel(self.d_in, ops, check=False)


def labeled_from_channel(channel, label=("",)):
    """Wrap a dense QuantumChannel as a single-block labelled channel."""
    return LabeledKrausChannel(channel.d_in, [(label, k) for k in channel.kraus],
                               check=False)


def detect_output_blocks(choi, d_in, zero_tol=1e-14):
    """Split a dense Choi into its direct-sum components over the output.

    Connects output indices a ~ b whenever some |J[(i,a),(j,b)]| exceeds
    zero_tol (relative to the largest entry) and returns the BlockChoi of
    connected components; entries across components are exactly dropped,
    which perturbs the data by at most a machine-precision amount.
    """
    choi = np.asarray(choi, dtype=complex)
    n = choi.shape[0]
    d_out = n // d_in
    j4 = choi.reshape(d_in, d_out, d_in, d_out)
    scale = max(float(np.max(np.abs(choi))), 1e-300)
    support = np.max(np.abs(j4), axis=(0, 2)) > zero_tol * scale

    parent = list(range(d_out))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for a in range(d_out):
        for b in range(a + 1, d_out):
            if support[a, b] or support[b, a]:
                union(a, b)
    groups = {}
    for a in range(d_out):
        groups.setdefault(find(a), []).append(a)
    blocks = {}
    for root, idxs in sorted(groups.items()):
        idxs = sorted(idxs)
        sub = j4[:, idxs, :, :][:, :, :, idxs]
        dc = len(idxs)
        blocks[("blk", idxs[0])] = sub.reshape(d_in * dc, d_in * dc)
    return BlockChoi(d_in, blocks)


class BlockChoi:
    """Choi matrix of a channel into a labelled direct sum, stored per block."""

    def __init__(self, d_in, blocks):
        self.d_in = int(d_in)
        self.blocks = {}
        for label, mat in dict(blocks).items():
            mat = np.asarray(mat, dtype=complex)
            if mat.shape[0] != mat.shape[1] or mat.shape[0] % self.d_in:
                raise ArgumentError(
                    f"Choi block {label!r} shape {mat.shape} incompatible with d_in={d_in}")
            self.blocks[label] = mat

    @property
    def labels(self):
        return list(self.blocks)

    def block_out_dim(self, label):
        return self.blocks[label].shape[0] // self.d_in

    @property
    def total_out_dim(self):
        return sum(self.block_out_dim(l) for l in self.blocks)

    def trace(self):
        return float(sum(np.real(np.trace(m)) for m in self.blocks.values()))

    def scaled(self, c):
        return BlockChoi(self.d_in, {l: c * m for l, m in self.blocks.items()})

    def add_into(self, other):
        for l, m in other.blocks.items():
            if l in self.blocks:
                self.blocks[l] = self.blocks[l] + m
            else:
                self.blocks[l] = m.copy()
        return self

    def as_state(self):
        """ (N (x) I)(Phi+) as a BlockState on (input-reference (x) block)."""
        return BlockState({l: m / self.d_in for l, m in self.blocks.items()})

    def apply(self, rho):
        """Channel action from the Choi: N(rho)[a,b] = sum_ij rho_ij J[(i,a),(j,b)]."""
        rho = np.asarray(rho, dtype=complex)
        out = {}
        for label, j in self.blocks.items():
            dc = j.shape[0] // self.d_in
            jt = j.reshape(self.d_in, dc, self.d_in, dc)
            out[label] = np.einsum("ij,iajb->ab", rho, jt)
        return BlockState(out)

    def input_marginal(self):
        """Tr_out J (should be I_in for CPTP)."""
        out = np.zeros((self.d_in, self.d_in), dtype=complex)
        for label, j in self.blocks.items():
            dc = j.shape[0] // self.d_in
            jt = j.reshape(self.d_in, dc, self.d_in, dc)
            out += np.einsum("iaja->ij", jt)
        return out

    def output_average(self):
        """N(I/d_in) as a BlockState: the canonical constant-simulator state."""
        return self.apply(np.eye(self.d_in, dtype=complex) / self.d_in)

    def validate_cptp(self, atol=1e-9):
        marginal = np.zeros((self.d_in, self.d_in), dtype=complex)
        for j, labels in group_blocks(self.blocks):
            evmin = float(np.min(np.linalg.eigvalsh(herm(j))))
            if evmin < -atol:
                raise ArgumentError(
                    f"Choi block {labels[0]!r} has eigenvalue {evmin:.3e}")
            dc = j.shape[0] // self.d_in
            jt = j.reshape(self.d_in, dc, self.d_in, dc)
            marginal += len(labels) * np.einsum("iaja->ij", jt)
        dev = np.max(np.abs(marginal - np.eye(self.d_in)))
        if dev > atol:
            raise ArgumentError(f"block Choi not trace preserving: deviation {dev:.3e}")

    def dense(self, order=None):
        """Materialize the full Choi on input (x) (+)blocks (small cases only)."""
        labels = order if order is not None else sorted(self.blocks, key=repr)
        total = sum(self.block_out_dim(l) for l in labels)
        out = np.zeros((self.d_in * total, self.d_in * total), dtype=complex)
        at = 0
        for l in labels:
            dc = self.block_out_dim(l)
            j = self.blocks[l].reshape(self.d_in, dc, self.d_in, dc)
            for i in range(self.d_in):
                for k in range(self.d_in):
                    out[i * total + at:i * total + at + dc,
                        k * total + at:k * total + at + dc] = j[i, :, k, :]
            at += dc
        return out

    def to_labeled_kraus(self, cut=1e-11):
        """Per-label Kraus families from Choi-block eigendecompositions."""
        ops = []
        for label in sorted(self.blocks, key=repr):
            j = self.blocks[label]
            dc = j.shape[0] // self.d_in
            w, v = np.linalg.eigh(herm(j))
            for e in range(len(w)):
                if w[e] <= cut:
                    continue
                vec = np.sqrt(w[e]) * v[:, e]
                ops.append((label, vec.reshape(self.d_in, dc).T))
        return LabeledKrausChannel(self.d_in, ops, check=False)

    def trace_second_factor(self, factor_dims, relabel=None):
        """Partial trace over the second tensor factor of each block.

        factor_dims: {label: (d_first, d_second)} with the block laid out as
        H_label = first (x) second. Blocks whose first-factor labels collide
        after `relabel` are merged.
        """
        out = {}
        for label, j in self.blocks.items():
            d1, d2 = factor_dims[label]
            jt = j.reshape(self.d_in, d1, d2, self.d_in, d1, d2)
            red = np.einsum("iabjcb->iajc", jt).reshape(self.d_in * d1, self.d_in * d1)
            new_label = relabel(label) if relabel else label
            if new_label in out:
                out[new_label] = out[new_label] + red
            else:
                out[new_label] = red
        return BlockChoi(self.d_in, out)

    def trace_first_factor(self, factor_dims, relabel=None):
        out = {}
        for label, j in self.blocks.items():
            d1, d2 = factor_dims[label]
            jt = j.reshape(self.d_in, d1, d2, self.d_in, d1, d2)
            red = np.einsum("iabjad->ibjd", jt).reshape(self.d_in * d2, self.d_in * d2)
            new_label = relabel(label) if relabel else label
            if new_label in out:
                out[new_label] = out[new_label] + red
            else:
                out[new_label] = red
        return BlockChoi(self.d_in, out)

    def compose_decoder(self, decoder_blocks, d_q):
        """Choi of D . N on input -> d_q, for a block-diagonal decoder.

        decoder_blocks: {label: Choi block of D restricted to H_label -> Q,
        indexed (m*d_q + q)}. Contributions are contracted once per distinct
        (channel block, decoder block) content pair.
        """
        n = self.d_in
        out = np.zeros((n * d_q, n * d_q), dtype=complex)
        groups = {}
        for label, jn in self.blocks.items():
            if label not in decoder_blocks:
                continue
            jd = decoder_blocks[label]
            key = (fingerprint_cached(jn), fingerprint_cached(jd))
            if key in groups:
                groups[key][2] += 1
            else:
                groups[key] = [jn, jd, 1]
        for jn, jd, count in groups.values():
            dc = jn.shape[0] // n
            a = jn.reshape(n, dc, n, dc)
            b = jd.reshape(dc, d_q, dc, d_q)
            out += count * np.einsum("imjn,mqnp->iqjp", a, b).reshape(n * d_q, n * d_q)
        return out
