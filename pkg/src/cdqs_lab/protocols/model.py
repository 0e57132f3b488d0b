"""Protocol data model: CDQS, f-routing, and the certification report.

A CDQS protocol stores, per input index and shared-randomness value, the
local actions of each party: Alice's channel family Q -> M0 (labelled
Kraus) and Bob's output states on M1. The composed referee channel for an
input pair is assembled by the verifier. Conversions from f-routing (and
toy constructions whose channel index is the input *pair*) populate an
optional joint table instead; locality is then the constructor's business,
not the type's.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..blocks import BlockChoi, BlockState, LabeledKrausChannel
from ..errors import ArgumentError, ValidationError
from .predicates import Predicate


def _merge_label_dims(target, source):
    for label, d in source.items():
        if target.setdefault(label, d) != d:
            raise ValidationError(f"label {label!r} has inconsistent dims")
    return target


@dataclass
class CdqsProtocol:
    predicate: Predicate
    d_q: int
    rand_probs: np.ndarray
    alice: list = None            # [x][r] -> LabeledKrausChannel (Q -> M0)
    bob: list = None              # [y][r] -> BlockState on M1
    joint: dict = None            # {(x, y): [r] -> LabeledKrausChannel (Q -> M)}
    joint_provider: object = None  # callable (x, y) -> BlockChoi of N^{x,y}
    declared_eps: float = 0.0
    declared_delta: float = 0.0
    name: str = "cdqs"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rand_probs = np.asarray(self.rand_probs, dtype=float)
        if abs(float(self.rand_probs.sum()) - 1.0) > 1e-12 or np.any(self.rand_probs < 0):
            raise ValidationError("shared randomness must be a probability vector")
        nx = 1 << self.predicate.n
        nr = len(self.rand_probs)
        if self.joint_provider is not None:
            return
        if self.joint is not None:
            for (x, y), fam in self.joint.items():
                if len(fam) != nr:
                    raise ValidationError(f"joint family at {(x, y)} has wrong length")
                for ch in fam:
                    if ch.d_in != self.d_q:
                        raise ValidationError("joint channel input dim != d_q")
            return
        if self.alice is None or self.bob is None:
            raise ValidationError("need either per-party families or a joint table")
        if len(self.alice) != nx or len(self.bob) != nx:
            raise ValidationError("per-party families must cover all inputs")
        for fam in self.alice:
            if len(fam) != nr:
                raise ValidationError("Alice family length != |R|")
            for ch in fam:
                if ch.d_in != self.d_q:
                    raise ValidationError("Alice channel input dim != d_q")
        for fam in self.bob:
            if len(fam) != nr:
                raise ValidationError("Bob family length != |R|")
            for st in fam:
                if abs(st.trace() - 1.0) > 1e-9:
                    raise ValidationError("Bob output state trace != 1")

    # -- size accounting -------------------------------------------------

    def m0_space(self):
        dims = {}
        if self.alice is None:
            return {}
        for fam in self.alice:
            for ch in fam:
                _merge_label_dims(dims, ch.out_dims)
        return dims

    def m1_space(self):
        dims = {}
        if self.bob is None:
            return {}
        for fam in self.bob:
            for st in fam:
                _merge_label_dims(dims, {l: m.shape[0] for l, m in st.blocks.items()})
        return dims

    def message_space(self):
        if self.joint_provider is not None:
            return {"provider": self.meta.get("message_space_dim", 2)}
        if self.joint is not None:
            dims = {}
            for fam in self.joint.values():
                for ch in fam:
                    _merge_label_dims(dims, ch.out_dims)
            return dims
        out = {}
        for la, da in self.m0_space().items():
            for lb, db in self.m1_space().items():
                out[(la, lb)] = da * db
        return out

    def m0_qubits(self):
        total = sum(self.m0_space().values())
        return int(np.ceil(np.log2(max(total, 2))))

    def m1_qubits(self):
        total = sum(self.m1_space().values())
        return int(np.ceil(np.log2(max(total, 2))))

    def message_qubits(self):
        if "message_qubits" in self.meta:
            return int(self.meta["message_qubits"])
        total = sum(self.message_space().values())
        return int(np.ceil(np.log2(max(total, 2))))

    def resource_qubits_per_side(self):
        if "resource_qubits_per_side" in self.meta:
            return int(self.meta["resource_qubits_per_side"])
        return int(np.ceil(np.log2(max(len(self.rand_probs), 2))))


@dataclass
class FRoutingProtocol:
    predicate: Predicate
    d_q: int
    rand_probs: np.ndarray
    channels: dict               # {(x, y): [r] -> LabeledKrausChannel Q -> M (x) M'}
    factor_dims: dict            # label -> (d_M_part, d_Mprime_part)
    declared_eps: float = 0.0
    name: str = "frouting"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rand_probs = np.asarray(self.rand_probs, dtype=float)
        if abs(float(self.rand_probs.sum()) - 1.0) > 1e-12 or np.any(self.rand_probs < 0):
            raise ValidationError("shared randomness must be a probability vector")
        for (x, y), fam in self.channels.items():
            if len(fam) != len(self.rand_probs):
                raise ValidationError(f"family at {(x, y)} has wrong length")
            for ch in fam:
                if ch.d_in != self.d_q:
                    raise ValidationError("first-round channel input dim != d_q")
                for label, d in ch.out_dims.items():
                    dm, dp = self.factor_dims[label]
                    if dm * dp != d:
                        raise ValidationError(
                            f"label {label!r}: M/M' partition {dm}x{dp} != dim {d}")

    def message_qubits(self):
        total_m = 0
        for label, (dm, dp) in self.factor_dims.items():
            total_m += dm
        return int(np.ceil(np.log2(max(total_m, 2))))


@dataclass
class ReportRow:
    x: int
    y: int
    f: int
    eps_ub: float = None
    eps_lb: float = None
    delta_ub: float = None
    method: str = ""
    witness: dict = None
    seconds: float = 0.0
    error: str = None

    def as_dict(self):
        return {
            "x": self.x, "y": self.y, "f": self.f,
            "eps_ub": self.eps_ub, "eps_lb": self.eps_lb,
            "delta_ub": self.delta_ub, "method": self.method,
            "seconds": self.seconds, "error": self.error,
        }


@dataclass
class VerificationReport:
    kind: str
    name: str
    n: int
    d_q: int
    rows: list
    eps_hat: float
    delta_hat: float
    declared_eps: float
    declared_delta: float
    tol: float
    passed: bool
    incomplete: bool = False
    meta: dict = field(default_factory=dict)

    @classmethod
    def assemble(cls, kind, name, n, d_q, rows, declared_eps, declared_delta,
                 tol, meta=None, eps_over_all_rows=False):
        incomplete = any(r.error for r in rows)
        if eps_over_all_rows:
            eps_vals = [r.eps_ub for r in rows if r.eps_ub is not None]
            delta_vals = []
        else:
            eps_vals = [r.eps_ub for r in rows if r.f == 1 and r.eps_ub is not None]
            delta_vals = [r.delta_ub for r in rows if r.f == 0 and r.delta_ub is not None]
        eps_hat = max(eps_vals, default=0.0)
        delta_hat = max(delta_vals, default=0.0)
        for r in rows:
            if r.eps_ub is not None and r.eps_lb is not None:
                if r.eps_lb > r.eps_ub + 1e-6:
                    raise ValidationError(
                        f"certificate inversion at ({r.x},{r.y}): "
                        f"eps_lb {r.eps_lb} > eps_ub {r.eps_ub} + 1e-6")
        passed = (not incomplete) and eps_hat <= declared_eps + tol and \
            delta_hat <= declared_delta + tol
        return cls(kind=kind, name=name, n=n, d_q=d_q, rows=rows,
                   eps_hat=eps_hat, delta_hat=delta_hat,
                   declared_eps=declared_eps, declared_delta=declared_delta,
                   tol=tol, passed=passed, incomplete=incomplete,
                   meta=dict(meta or {}))

    def row(self, x, y):
        for r in self.rows:
            if r.x == x and r.y == y:
                return r
        raise ArgumentError(f"no row for input {(x, y)}")

    def as_dict(self):
        return {
            "kind": self.kind,
            "protocol": self.name,
            "n": self.n,
            "d_q": self.d_q,
            "eps_hat": self.eps_hat,
            "delta_hat": self.delta_hat,
            "declared_eps": self.declared_eps,
            "declared_delta": self.declared_delta,
            "tolerance": self.tol,
            "passed": self.passed,
            "incomplete": self.incomplete,
            "rows": [r.as_dict() for r in self.rows],
            "meta": self.meta,
        }


class RowTimer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False
