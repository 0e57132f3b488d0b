"""Dense complex linear algebra over multi-qudit Hilbert spaces.

Everything downstream (channels, SDP certification, protocol verification)
is built on the primitives here: tensor structure with labelled subsystems,
partial traces, Schatten norms, fidelity, and Haar sampling. Matrices are
plain complex128 numpy arrays; states and operators are immutable by
convention (no routine mutates its inputs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ArgumentError, CapacityError

# Numerical budget for double-precision arithmetic.
HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-9
TRACE_ATOL = 1e-9

# Dense-storage guard rails: one Hilbert space may not exceed DIM_CAP, and a
# single dense matrix may not exceed ENTRY_CAP entries.
DIM_CAP = 2**10
ENTRY_CAP = 2**20


def require_finite(a, what="matrix"):
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ArgumentError(f"{what} contains NaN or Inf entries")


def is_hermitian(a, atol=HERMITIAN_ATOL):
    return np.max(np.abs(a - a.conj().T)) <= atol


def require_hermitian(a, what="matrix", atol=HERMITIAN_ATOL):
    require_finite(a, what)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > atol:
        raise ArgumentError(f"{what} is not Hermitian (max |A - A^dag| = {dev:.3e})")


def herm(a):
    """Symmetrize away floating-point Hermiticity drift."""
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class SystemDims:
    """Ordered list of labelled subsystem dimensions.

    The product of dims must equal the matrix dimension of any state or
    channel leg it annotates; labels are unique.
    """

    systems: tuple

    def __init__(self, systems):
        systems = tuple((str(lab), int(d)) for lab, d in systems)
        labels = [lab for lab, _ in systems]
        if len(set(labels)) != len(labels):
            raise ArgumentError(f"duplicate subsystem labels in {labels}")
        for lab, d in systems:
            if d < 1:
                raise ArgumentError(f"subsystem {lab!r} has dimension {d} < 1")
            if d > DIM_CAP:
                raise CapacityError(f"subsystem {lab!r} dimension {d} exceeds cap {DIM_CAP}")
        object.__setattr__(self, "systems", systems)

    @property
    def labels(self):
        return [lab for lab, _ in self.systems]

    @property
    def dims(self):
        return [d for _, d in self.systems]

    @property
    def total_dim(self):
        return int(np.prod([d for _, d in self.systems], dtype=np.int64)) if self.systems else 1

    def dim_of(self, label):
        for lab, d in self.systems:
            if lab == label:
                return d
        raise ArgumentError(f"unknown subsystem label {label!r}; have {self.labels}")

    def index_of(self, label):
        for i, (lab, _) in enumerate(self.systems):
            if lab == label:
                return i
        raise ArgumentError(f"unknown subsystem label {label!r}; have {self.labels}")

    def check_matrix(self, a):
        if a.shape != (self.total_dim, self.total_dim):
            raise ArgumentError(
                f"matrix shape {a.shape} does not match subsystem dims "
                f"{dict(self.systems)} (total {self.total_dim})"
            )

    def restricted(self, labels):
        keep = [s for s in self.systems if s[0] in set(labels)]
        return SystemDims(keep)


def single(label, dim):
    return SystemDims([(label, dim)])


def tensor_product(a, b):
    """Kronecker product with a capacity guard on the result size."""
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows * cols > ENTRY_CAP:
        raise CapacityError(
            f"tensor product result {rows}x{cols} exceeds entry cap {ENTRY_CAP}"
        )
    return np.kron(a, b)


def tensor_many(mats):
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = tensor_product(out, m)
    return out


def partial_trace(rho, dims: SystemDims, keep):
    """Trace out all subsystems not named in `keep`, preserving their order.

    Tr(result) equals Tr(rho) exactly up to floating point.
    """
    if isinstance(keep, str):
        keep = [keep]
    keep = list(keep)
    dims.check_matrix(rho)
    for lab in keep:
        dims.dim_of(lab)
    n = len(dims.systems)
    ds = dims.dims
    keep_idx = sorted(dims.index_of(lab) for lab in keep)
    t = rho.reshape(ds + ds)
    # Trace out highest index first so lower indices stay valid.
    traced = 0
    for i in range(n - 1, -1, -1):
        if i in keep_idx:
            continue
        t = np.trace(t, axis1=i, axis2=i + (n - traced))
        traced += 1
    d_keep = int(np.prod([ds[i] for i in keep_idx], dtype=np.int64)) if keep_idx else 1
    return t.reshape(d_keep, d_keep)


def trace_norm(a):
    """Schatten 1-norm via singular values (works for non-Hermitian too)."""
    return float(np.sum(scipy.linalg.svdvals(a)))


def trace_distance(rho, sigma):
    """||rho - sigma||_1 as the sum of absolute eigenvalues of the difference.

    Both inputs must be Hermitian and share dimensions. Orthogonal pure
    states are at distance 2 in this convention.
    """
    if rho.shape != sigma.shape:
        raise ArgumentError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    require_hermitian(rho, "rho")
    require_hermitian(sigma, "sigma")
    ev = np.linalg.eigvalsh(herm(rho - sigma))
    return float(np.sum(np.abs(ev)))


def hs_norm_sq(a):
    """Squared Hilbert-Schmidt (Frobenius) norm Tr(A^dag A)."""
    return float(np.real(np.vdot(a, a)))


def psd_sqrt(a):
    w, v = np.linalg.eigh(herm(a))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def check_state(rho, atol_trace=TRACE_ATOL, atol_psd=PSD_ATOL, what="state"):
    require_hermitian(rho, what)
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > atol_trace:
        raise ArgumentError(f"{what} has trace {tr}, expected 1")
    evmin = float(np.min(np.linalg.eigvalsh(herm(rho))))
    if evmin < -atol_psd:
        raise ArgumentError(f"{what} has negative eigenvalue {evmin:.3e}")


def fidelity(rho, sigma):
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Inputs must be positive semidefinite with unit trace. F is in [0, 1],
    equals 1 iff the states coincide, and satisfies both Fuchs-van de Graaf
    inequalities against trace_distance.
    """
    check_state(rho, what="rho")
    check_state(sigma, what="sigma")
    rs = psd_sqrt(rho)
    sv = scipy.linalg.svdvals(rs @ psd_sqrt(sigma))
    f = float(np.sum(sv)) ** 2
    return min(max(f, 0.0), 1.0)


def haar_random_unitary(dim, seed=None):
    """Exactly Haar-distributed unitary via QR of a complex Gaussian matrix.

    The R-diagonal phases are normalized away, which makes the QR output
    Haar rather than merely unitary. A fixed seed gives a bit-identical
    matrix on repeat; `seed` may also be a numpy Generator.
    """
    if dim < 1:
        raise ArgumentError(f"dim must be >= 1, got {dim}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return q


def hermitian_basis(d):
    """Orthonormal basis of d x d Hermitian matrices under Tr(A B)."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j * inv_sqrt2
            e[j, i] = 1j * inv_sqrt2
            basis.append(e)
    return basis


def traceless_hermitian_basis(d):
    """Orthonormal Hermitian basis of the traceless subspace (d^2 - 1 elements)."""
    basis = []
    # Diagonal part: Gell-Mann style.
    for k in range(1, d):
        e = np.zeros((d, d), dtype=complex)
        for i in range(k):
            e[i, i] = 1.0
        e[k, k] = -k
        basis.append(e / np.sqrt(k * (k + 1)))
    full = hermitian_basis(d)
    basis.extend(full[d:])
    return basis


# Pauli matrices, used all over the channel and code constructions.
PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli(a, b):
    """X^a Z^b for key bits (a, b)."""
    p = np.eye(2, dtype=complex)
    if a:
        p = PAULI_X @ p
    if b:
        p = p @ PAULI_Z
    return p


def weyl(a, b, d):
    """Heisenberg-Weyl X^a Z^b on a d-level system (reduces to pauli at d=2)."""
    omega = np.exp(2j * np.pi / d)
    m = np.zeros((d, d), dtype=complex)
    for j in range(d):
        m[(j + a) % d, j] = omega ** (b * j)
    return m


def basis_state(index, dim):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def max_entangled_vec(d):
    """Normalized |Phi+> = (1/sqrt(d)) sum_i |ii>."""
    v = np.zeros(d * d, dtype=complex)
    for i in range(d):
        v[i * d + i] = 1.0
    return v / np.sqrt(d)


def save_matrix_text(a):
    """Serialize to the text matrix format: 'rows cols' then row-major re/im pairs."""
    require_finite(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        parts = []
        for x in row:
            parts.append(f"{float(x.real)!r} {float(x.imag)!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def load_matrix_text(text):
    tokens = text.split()
    if len(tokens) < 2:
        raise ArgumentError("matrix file too short: missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise ArgumentError(f"bad matrix header {tokens[:2]}") from exc
    need = 2 * rows * cols
    body = tokens[2:]
    if len(body) != need:
        raise ArgumentError(
            f"matrix body has {len(body)} numbers, expected {need} for {rows}x{cols}"
        )
    try:
        vals = np.array([float(t) for t in body], dtype=float)
    except ValueError as exc:
        raise ArgumentError("non-numeric entry in matrix body") from exc
    a = vals[0::2] + 1j * vals[1::2]
    return a.reshape(rows, cols)
