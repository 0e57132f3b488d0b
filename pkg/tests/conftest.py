import numpy as np
import pytest

from cdqs_lab.channels import QuantumChannel
from cdqs_lab.linalg import herm


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)


def random_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return herm(rho / np.trace(rho).real)


def random_pure(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_channel(rng, d_in, d_out, kraus_count=None):
    """Haar-ish random channel: isometry columns from a QR decomposition."""
    k = kraus_count or min(d_in * d_out, 4)
    g = rng.normal(size=(d_out * k, d_in)) + 1j * rng.normal(size=(d_out * k, d_in))
    q, _ = np.linalg.qr(g)
    v = q[:, :d_in]
    ops = [v.reshape(d_out, k, d_in)[:, e, :] for e in range(k)]
    return QuantumChannel(ops, d_in=d_in, d_out=d_out)
