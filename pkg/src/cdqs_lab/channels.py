"""Quantum states and channels with Kraus, Stinespring, and Choi views.

Channels are stored operationally as Kraus families and canonically as Choi
matrices (computed on demand, cached, capacity-guarded). The Choi convention
is the unnormalized maximally entangled reference with the *input* factor
first:

    J(N) = sum_ij |i><j| (x) N(|i><j|),     Tr J = d_in  for CPTP N.

Complementary channels come from the canonical Stinespring dilation built
on the minimal Kraus family (Choi eigenvectors, eigenvalues below 1e-11
discarded), which keeps the environment dimension minimal.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import ArgumentError, CapacityError
from .linalg import (
    ENTRY_CAP,
    SystemDims,
    basis_state,
    herm,
    max_entangled_vec,
    pauli,
    require_hermitian,
    single,
)

KRAUS_EIG_CUT = 1e-11
TP_ATOL = 1e-9


class DensityState:
    """Density matrix with labelled subsystem dimensions."""

    def __init__(self, matrix, dims=None, check=True):
        matrix = np.asarray(matrix, dtype=complex)
        if dims is None:
            dims = single("S", matrix.shape[0])
        if isinstance(dims, (list, tuple)):
            dims = SystemDims(dims)
        dims.check_matrix(matrix)
        if check:
            linalg.check_state(matrix)
        self.matrix = matrix
        self.dims = dims

    @property
    def dim(self):
        return self.matrix.shape[0]

    def tensor(self, other):
        mat = linalg.tensor_product(self.matrix, other.matrix)
        dims = SystemDims(list(self.dims.systems) + list(other.dims.systems))
        return DensityState(mat, dims, check=False)

    def partial_trace(self, keep):
        mat = linalg.partial_trace(self.matrix, self.dims, keep)
        return DensityState(mat, self.dims.restricted(keep), check=False)

    def purity(self):
        return linalg.hs_norm_sq(self.matrix)


def _reduce_kraus(ops, cut=KRAUS_EIG_CUT):
    """Minimal Kraus family spanning the same Choi support (Gram reduction).

    With G[k,l] = <K_k, K_l> and G v_e = g_e v_e, the combinations
    K'_e = sum_k v[k,e] K_k are mutually orthogonal with norms g_e, so
    discarding eigenvalues below the cut drops only negligible members.
    """
    k = len(ops)
    arr = np.array(ops)
    flat = arr.reshape(k, -1)
    gram = flat.conj() @ flat.T
    w, v = np.linalg.eigh(herm(gram))
    new = []
    for e in range(k):
        if w[e] <= cut:
            continue
        new.append(np.tensordot(v[:, e], arr, axes=1))
    return new if new else [np.zeros_like(ops[0])]


class QuantumChannel:
    """Completely positive trace-preserving map between finite systems."""

    def __init__(self, kraus, d_in=None, d_out=None, in_dims=None, out_dims=None,
                 check=True):
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        if not kraus:
            raise ArgumentError("channel needs at least one Kraus operator")
        d_out_k, d_in_k = kraus[0].shape
        self.d_in = d_in or d_in_k
        self.d_out = d_out or d_out_k
        for k in kraus:
            if k.shape != (self.d_out, self.d_in):
                raise ArgumentError(f"Kraus shape {k.shape} != ({self.d_out},{self.d_in})")
        self.kraus = kraus
        self.in_dims = in_dims if in_dims is not None else single("A", self.d_in)
        self.out_dims = out_dims if out_dims is not None else single("B", self.d_out)
        self._choi = None
        if check:
            comp = sum(k.conj().T @ k for k in kraus)
            dev = np.max(np.abs(comp - np.eye(self.d_in)))
            if dev > TP_ATOL:
                raise ArgumentError(
                    f"Kraus completeness violated: max |sum K^dag K - I| = {dev:.3e}")

    # -- construction --------------------------------------------------

    @classmethod
    def from_kraus(cls, ops, in_dims=None, out_dims=None):
        return cls(ops, in_dims=in_dims, out_dims=out_dims)

    @classmethod
    def from_choi(cls, choi, d_in, d_out, in_dims=None, out_dims=None, atol=TP_ATOL):
        choi = np.asarray(choi, dtype=complex)
        if choi.shape != (d_in * d_out, d_in * d_out):
            raise ArgumentError(f"Choi shape {choi.shape} != {(d_in * d_out,) * 2}")
        require_hermitian(choi, "Choi matrix", atol=1e-9)
        w, v = np.linalg.eigh(herm(choi))
        if float(w[0]) < -1e-9:
            raise ArgumentError(f"Choi matrix has negative eigenvalue {float(w[0]):.3e}")
        tr_out = linalg.partial_trace(
            choi, SystemDims([("A", d_in), ("B", d_out)]), ["A"])
        if np.max(np.abs(tr_out - np.eye(d_in))) > atol:
            raise ArgumentError("Choi matrix is not trace preserving (Tr_out J != I_in)")
        ops = []
        for e in range(len(w)):
            if w[e] <= KRAUS_EIG_CUT:
                continue
            vec = np.sqrt(w[e]) * v[:, e]
            ops.append(vec.reshape(d_in, d_out).T)
        if not ops:
            ops = [np.zeros((d_out, d_in), dtype=complex)]
        ch = cls(ops, d_in=d_in, d_out=d_out, in_dims=in_dims, out_dims=out_dims,
                 check=False)
        ch._choi = choi
        return ch

    # -- views ----------------------------------------------------------

    @property
    def choi(self):
        if self._choi is None:
            n = self.d_in * self.d_out
            if n * n > ENTRY_CAP:
                raise CapacityError(
                    f"dense Choi of a {self.d_in}->{self.d_out} channel needs "
                    f"{n}x{n} entries, beyond cap {ENTRY_CAP}")
            wm = np.array([k.T.ravel() for k in self.kraus])
            self._choi = wm.T @ wm.conj()
        return self._choi

    def minimized(self):
        ops = _reduce_kraus(self.kraus)
        ch = QuantumChannel(ops, d_in=self.d_in, d_out=self.d_out,
                            in_dims=self.in_dims, out_dims=self.out_dims, check=False)
        ch._choi = self._choi
        return ch

    def stinespring(self):
        """Isometry V: in -> out (x) env with V^dag V = I, env minimal."""
        ops = _reduce_kraus(self.kraus)
        env = len(ops)
        v = np.zeros((self.d_out * env, self.d_in), dtype=complex)
        for e, k in enumerate(ops):
            for o in range(self.d_out):
                v[o * env + e, :] += k[o, :]
        return v, env

    def complementary(self):
        """Channel to the environment of the canonical Stinespring dilation."""
        ops = _reduce_kraus(self.kraus)
        env = len(ops)
        comp = []
        for o in range(self.d_out):
            c = np.zeros((env, self.d_in), dtype=complex)
            for e, k in enumerate(ops):
                c[e, :] = k[o, :]
            comp.append(c)
        return QuantumChannel(comp, d_in=self.d_in, d_out=env,
                              in_dims=self.in_dims, out_dims=single("E", env),
                              check=False)

    # -- action ----------------------------------------------------------

    def apply(self, rho):
        mat = rho.matrix if isinstance(rho, DensityState) else np.asarray(rho, dtype=complex)
        out = np.zeros((self.d_out, self.d_out), dtype=complex)
        for k in self.kraus:
            out += k @ mat @ k.conj().T
        return out

    def apply_state(self, state: DensityState) -> DensityState:
        return DensityState(self.apply(state), self.out_dims, check=False)

    def compose(self, other):
        """self after other (self . other)."""
        if other.d_out != self.d_in:
            raise ArgumentError(
                f"cannot compose: inner dims {other.d_out} != {self.d_in}")
        ops = [a @ b for a in self.kraus for b in other.kraus]
        if len(ops) > other.d_in * self.d_out:
            ops = _reduce_kraus(ops)
        return QuantumChannel(ops, d_in=other.d_in, d_out=self.d_out,
                              in_dims=other.in_dims, out_dims=self.out_dims,
                              check=False)

    def tensor(self, other):
        ops = [np.kron(a, b) for a in self.kraus for b in other.kraus]
        if len(ops) > self.d_in * other.d_in * self.d_out * other.d_out:
            ops = _reduce_kraus(ops)
        return QuantumChannel(ops, d_in=self.d_in * other.d_in,
                              d_out=self.d_out * other.d_out, check=False)


# ---------------------------------------------------------------------------
# Standard gadgets.
# ---------------------------------------------------------------------------

def identity_channel(d):
    return QuantumChannel([np.eye(d, dtype=complex)], check=False)


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return QuantumChannel([u])


def constant_channel(sigma, d_in):
    """The completely depolarizing channel onto a fixed state sigma."""
    sigma = sigma.matrix if isinstance(sigma, DensityState) else np.asarray(sigma, dtype=complex)
    w, v = np.linalg.eigh(herm(sigma))
    ops = []
    for e in range(len(w)):
        if w[e] <= KRAUS_EIG_CUT:
            continue
        col = np.sqrt(w[e]) * v[:, e]
        for i in range(d_in):
            op = np.zeros((sigma.shape[0], d_in), dtype=complex)
            op[:, i] = col
            ops.append(op)
    return QuantumChannel(ops, d_in=d_in, d_out=sigma.shape[0], check=False)


def max_entangled(d):
    vec = max_entangled_vec(d)
    return DensityState(np.outer(vec, vec.conj()),
                        SystemDims([("A", d), ("B", d)]), check=False)


def max_mixed(d):
    return DensityState(np.eye(d, dtype=complex) / d, check=False)


def depolarizing(p, d=2):
    """rho -> (1-p) rho + p Tr(rho) I/d. Diamond distance to identity 3p/2 at d=2."""
    if not (0.0 <= p <= 1.0):
        raise ArgumentError(f"depolarizing parameter must be in [0,1], got {p}")
    jid = identity_channel(d).choi
    jmix = np.kron(np.eye(d, dtype=complex), np.eye(d, dtype=complex) / d)
    return QuantumChannel.from_choi((1 - p) * jid + p * jmix, d, d)


def computational_state(bits):
    bits = [int(b) for b in bits]
    idx = 0
    for b in bits:
        idx = 2 * idx + b
    d = 2 ** len(bits)
    vec = basis_state(idx, d)
    return DensityState(np.outer(vec, vec.conj()), check=False)


def standard_gadgets(name, **params):
    """Named catalogue of states and channels used throughout the tests."""
    table = {
        "max_entangled": lambda: max_entangled(params.get("d", 2)),
        "max_mixed": lambda: max_mixed(params.get("d", 2)),
        "depolarizing": lambda: depolarizing(params.get("p", 0.0), params.get("d", 2)),
        "computational_state": lambda: computational_state(params["bits"]),
    }
    if name not in table:
        raise ArgumentError(f"unknown gadget {name!r}; have {sorted(table)}")
    return table[name]()


def quantum_one_time_pad(key):
    """Unitary conjugation by X^a Z^b for key bits (a, b)."""
    a, b = key
    return unitary_channel(pauli(a, b))


def qotp_average():
    """Uniform average over the four pad keys: the qubit replacer onto I/2."""
    ops = [0.5 * pauli(a, b) for a in (0, 1) for b in (0, 1)]
    return QuantumChannel(ops, check=False)


def apply_to_subsystems(channel: QuantumChannel, matrix, dims: SystemDims,
                        targets, out_label="OUT"):
    """Apply a channel to the named subsystems of a dense operator.

    Returns (new_matrix, new_dims); the target subsystems are replaced by a
    single output system placed first, with the spectators following in
    their original order. Capacity-guarded through tensor sizes.
    """
    if isinstance(targets, str):
        targets = [targets]
    dims.check_matrix(matrix)
    labels = dims.labels
    ds = dims.dims
    tgt_idx = [dims.index_of(t) for t in targets]
    other_idx = [i for i in range(len(labels)) if i not in tgt_idx]
    d_tgt = int(np.prod([ds[i] for i in tgt_idx], dtype=np.int64))
    d_other = int(np.prod([ds[i] for i in other_idx], dtype=np.int64)) if other_idx else 1
    if channel.d_in != d_tgt:
        raise ArgumentError(
            f"channel input dim {channel.d_in} != target dims product {d_tgt}")
    if channel.d_out * d_other > linalg.DIM_CAP * 32:
        raise CapacityError("dense subsystem application exceeds the size cap")
    n = len(labels)
    t = matrix.reshape(ds + ds)
    perm = tgt_idx + other_idx
    t = t.transpose(perm + [n + i for i in perm])
    t = t.reshape(d_tgt, d_other, d_tgt, d_other)
    out = np.zeros((channel.d_out, d_other, channel.d_out, d_other), dtype=complex)
    for k in channel.kraus:
        out += np.einsum("ab,bicj,dc->aidj", k, t, k.conj(), optimize=True)
    new_dims = SystemDims([(out_label, channel.d_out)] +
                          [(labels[i], ds[i]) for i in other_idx])
    return out.reshape(channel.d_out * d_other, channel.d_out * d_other), new_dims


def channel_to_text(ch: QuantumChannel):
    return f"CHOI {ch.d_in} {ch.d_out}\n" + linalg.save_matrix_text(ch.choi)


def channel_from_text(text):
    lines = text.split("\n", 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != "CHOI":
        raise ArgumentError("channel file must start with 'CHOI d_in d_out'")
    d_in, d_out = int(head[1]), int(head[2])
    mat = linalg.load_matrix_text(lines[1])
    return QuantumChannel.from_choi(mat, d_in, d_out)
