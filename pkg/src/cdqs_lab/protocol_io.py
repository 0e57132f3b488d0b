"""File formats and machine-readable reports.

Matrix files are plain text ("rows cols" then row-major re/im pairs written
with repr, so float64 values round-trip bit-exactly). Channel files prepend
a "CHOI d_in d_out" header. Protocol configs are JSON with the fields
{kind, n, predicate, d_q, resource, alice, bob, declared_eps,
declared_delta}; classical resources are named inline, dense resource
states reference a matrix file.

Reports are serialized canonically: sorted keys, floats at 12 significant
digits, no whitespace variation, so identical runs yield byte-identical
files. A small structural validator checks instances against the schema
files shipped in cdqs_lab/schemas/.
"""

from __future__ import annotations

import json
import math
import os
import time

import numpy as np

from . import __version__, channels, linalg
from .blocks import BlockState, detect_output_blocks
from .errors import ArgumentError, ValidationError
from .protocols import predicates
from .protocols.cds import CdsProtocol
from .protocols.model import CdqsProtocol
from .protocols.zoo import REGISTRY, build_named

SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "schemas")


# ---------------------------------------------------------------------------
# Canonical JSON.
# ---------------------------------------------------------------------------

def _canon(value):
    if isinstance(value, dict):
        items = []
        for k in sorted(value):
            if k.startswith("_"):
                continue
            items.append(json.dumps(str(k)) + ":" + _canon(value[k]))
        return "{" + ",".join(items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in value) + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x) or math.isinf(x):
            raise ArgumentError("reports may not contain NaN or Inf")
        if x == 0.0:
            x = 0.0
        return f"{x:.12g}"
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    raise ArgumentError(f"cannot serialize {type(value)} canonically")


def canonical_json(obj):
    return _canon(obj) + "\n"


def emit_report(report: dict, path=None, seed=0, tolerance=1e-6,
                deterministic=True, wall_time_s=None, command=None):
    """Wrap a report with reproducibility metadata and write it canonically.

    Deterministic mode records wall_time_s as null so byte-identical runs
    stay byte-identical; version, seed, and tolerances are always embedded.
    """
    payload = dict(report)
    payload["meta_run"] = {
        "version": __version__,
        "seed": int(seed),
        "tolerance": float(tolerance),
        "deterministic": bool(deterministic),
        "wall_time_s": None if deterministic else wall_time_s,
        "command": command,
    }
    text = canonical_json(payload)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# Minimal JSON-schema-style validation.
# ---------------------------------------------------------------------------

def load_schema(name):
    with open(os.path.join(SCHEMA_DIR, name)) as fh:
        return json.load(fh)


def validate_schema(instance, schema, path="$"):
    """Structural validator for the subset of JSON Schema the repo ships."""
    stype = schema.get("type")
    if stype:
        ok = {
            "object": lambda v: isinstance(v, dict),
            "array": lambda v: isinstance(v, list),
            "string": lambda v: isinstance(v, str),
            "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
            "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
            "boolean": lambda v: isinstance(v, bool),
            "null": lambda v: v is None,
        }
        types = stype if isinstance(stype, list) else [stype]
        if not any(ok[t](instance) for t in types):
            raise ValidationError(f"{path}: expected {stype}, got {type(instance).__name__}")
    if "enum" in schema and instance not in schema["enum"]:
        raise ValidationError(f"{path}: {instance!r} not in {schema['enum']}")
    if isinstance(instance, dict):
        for req in schema.get("required", []):
            if req not in instance:
                raise ValidationError(f"{path}: missing required field {req!r}")
        for key, sub in schema.get("properties", {}).items():
            if key in instance:
                validate_schema(instance[key], sub, f"{path}.{key}")
    if isinstance(instance, list) and "items" in schema:
        for i, item in enumerate(instance):
            validate_schema(item, schema["items"], f"{path}[{i}]")
    return True


# ---------------------------------------------------------------------------
# Matrix / channel files.
# ---------------------------------------------------------------------------

def save_matrix(path, mat):
    with open(path, "w") as fh:
        fh.write(linalg.save_matrix_text(mat))


def load_matrix(path):
    with open(path) as fh:
        return linalg.load_matrix_text(fh.read())


def save_channel(path, ch):
    with open(path, "w") as fh:
        fh.write(channels.channel_to_text(ch))


def load_channel(path):
    try:
        with open(path) as fh:
            return channels.channel_from_text(fh.read())
    except ArgumentError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Protocol configs.
# ---------------------------------------------------------------------------

def _predicate_to_config(pred):
    if pred.name.lower() in predicates.NAMED:
        return {"name": pred.name.lower()}
    return {"hex": pred.to_hex()}


def _predicate_from_config(cfg, n):
    if "name" in cfg:
        return predicates.named(cfg["name"], n)
    if "hex" in cfg:
        return predicates.from_hex(n, cfg["hex"])
    raise ValidationError("predicate config needs 'name' or 'hex'")


def save_cds(c: CdsProtocol, path):
    cfg = {
        "kind": "cds",
        "n": c.predicate.n,
        "predicate": _predicate_to_config(c.predicate),
        "num_secrets": c.num_secrets,
        "rand_probs": [float(v) for v in c.rand_probs],
        "m0": c.m0.tolist(),
        "m1": c.m1.tolist(),
        "declared_eps": c.declared_eps,
        "declared_delta": c.declared_delta,
        "name": c.name,
    }
    with open(path, "w") as fh:
        fh.write(canonical_json(cfg))


def _alice_joint_channel(p: CdqsProtocol, x):
    """Materialize Alice's channel Q (x) L -> M0 densely for saving."""
    nr = len(p.rand_probs)
    labels = sorted(p.m0_space().items(), key=repr)
    offsets = {}
    at = 0
    for lab, d in labels:
        offsets[lab] = at
        at += d
    d_m0 = at
    d_in = p.d_q * nr
    ops = []
    for r in range(nr):
        for lab, k in p.alice[x][r].ops:
            big = np.zeros((d_m0, d_in), dtype=complex)
            for q in range(p.d_q):
                big[offsets[lab]:offsets[lab] + k.shape[0], q * nr + r] = k[:, q]
            ops.append(big)
    return channels.QuantumChannel(ops, d_in=d_in, d_out=d_m0, check=False)


def _bob_joint_channel(p: CdqsProtocol, y):
    nr = len(p.rand_probs)
    labels = sorted(p.m1_space().items(), key=repr)
    offsets = {}
    at = 0
    for lab, d in labels:
        offsets[lab] = at
        at += d
    d_m1 = at
    ops = []
    for r in range(nr):
        st = p.bob[y][r]
        for lab, blk in st.blocks.items():
            w, v = np.linalg.eigh(linalg.herm(blk))
            for e in range(len(w)):
                if w[e] <= 1e-12:
                    continue
                big = np.zeros((d_m1, nr), dtype=complex)
                big[offsets[lab]:offsets[lab] + blk.shape[0], r] = \
                    np.sqrt(w[e]) * v[:, e]
                ops.append(big)
    return channels.QuantumChannel(ops, d_in=nr, d_out=d_m1, check=False)


def save_cdqs(p: CdqsProtocol, dirpath):
    """Write config.json plus per-input channel files; classical resource named."""
    if p.alice is None or p.bob is None:
        raise ArgumentError("only per-party protocols can be saved")
    os.makedirs(dirpath, exist_ok=True)
    nx = 1 << p.predicate.n
    alice_files = []
    bob_files = []
    for x in range(nx):
        fn = f"alice_{x}.chan"
        save_channel(os.path.join(dirpath, fn), _alice_joint_channel(p, x))
        alice_files.append(fn)
    for y in range(nx):
        fn = f"bob_{y}.chan"
        save_channel(os.path.join(dirpath, fn), _bob_joint_channel(p, y))
        bob_files.append(fn)
    uniform = np.allclose(p.rand_probs, p.rand_probs[0])
    cfg = {
        "kind": "cdqs",
        "n": p.predicate.n,
        "predicate": _predicate_to_config(p.predicate),
        "d_q": p.d_q,
        "resource": ({"classical_uniform": len(p.rand_probs)} if uniform
                     else {"classical": [float(v) for v in p.rand_probs]}),
        "alice": alice_files,
        "bob": bob_files,
        "declared_eps": p.declared_eps,
        "declared_delta": p.declared_delta,
        "name": p.name,
    }
    path = os.path.join(dirpath, "config.json")
    with open(path, "w") as fh:
        fh.write(canonical_json(cfg))
    return path


def _restrict_alice(ch: channels.QuantumChannel, d_q, nr, r):
    ops = [k[:, r::nr] for k in ch.kraus]
    sub = channels.QuantumChannel(ops, d_in=d_q, d_out=ch.d_out, check=False)
    return detect_output_blocks(sub.choi, d_q).to_labeled_kraus()


def _restrict_bob(ch: channels.QuantumChannel, nr, r):
    vec = np.zeros((nr, nr), dtype=complex)
    vec[r, r] = 1.0
    sigma = ch.apply(vec)
    blocks = detect_output_blocks(sigma, 1)
    return BlockState({lab: m for lab, m in blocks.blocks.items()})


def load_protocol(source, n=None):
    """Named zoo protocol or a config file path; fully validated on load."""
    if isinstance(source, str) and source.lower() in REGISTRY:
        if n is None:
            raise ArgumentError("named protocols need n")
        return build_named(source, n)
    path = source
    if not os.path.exists(path):
        raise ArgumentError(f"no such protocol or file: {source!r}")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    validate_schema(cfg, load_schema("config.schema.json"), path="config")
    base = os.path.dirname(os.path.abspath(path))
    n_cfg = int(cfg["n"])
    pred = _predicate_from_config(cfg["predicate"], n_cfg)
    if cfg["kind"] == "cds":
        return CdsProtocol(
            predicate=pred, num_secrets=int(cfg["num_secrets"]),
            rand_probs=np.array(cfg["rand_probs"], dtype=float),
            m0=np.array(cfg["m0"], dtype=np.int64),
            m1=np.array(cfg["m1"], dtype=np.int64),
            declared_eps=float(cfg.get("declared_eps", 0.0)),
            declared_delta=float(cfg.get("declared_delta", 0.0)),
            name=cfg.get("name", "cds_file"))
    if cfg["kind"] != "cdqs":
        raise ValidationError(f"unsupported protocol kind {cfg['kind']!r}")
    res = cfg["resource"]
    if "classical_uniform" in res:
        nr = int(res["classical_uniform"])
        probs = np.full(nr, 1.0 / nr)
    elif "classical" in res:
        probs = np.array(res["classical"], dtype=float)
        nr = len(probs)
    else:
        raise ValidationError(
            "only classical resources are supported in config files; "
            "dense resource states are a library-level construction")
    d_q = int(cfg["d_q"])
    nx = 1 << n_cfg
    if len(cfg["alice"]) != nx or len(cfg["bob"]) != nx:
        raise ValidationError("alice/bob channel lists must cover all inputs")
    alice = []
    for fn in cfg["alice"]:
        ch = load_channel(os.path.join(base, fn))
        if ch.d_in != d_q * nr:
            raise ValidationError(
                f"{fn}: input dim {ch.d_in} != d_q * |R| = {d_q * nr}")
        alice.append([_restrict_alice(ch, d_q, nr, r) for r in range(nr)])
    bob = []
    for fn in cfg["bob"]:
        ch = load_channel(os.path.join(base, fn))
        if ch.d_in != nr:
            raise ValidationError(f"{fn}: input dim {ch.d_in} != |R| = {nr}")
        bob.append([_restrict_bob(ch, nr, r) for r in range(nr)])
    return CdqsProtocol(
        predicate=pred, d_q=d_q, rand_probs=probs, alice=alice, bob=bob,
        declared_eps=float(cfg.get("declared_eps", 0.0)),
        declared_delta=float(cfg.get("declared_delta", 0.0)),
        name=cfg.get("name", "cdqs_file"))
