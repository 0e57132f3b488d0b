"""Command-line client for the verification service.

The CLI is a thin client: it builds a request, sends it to the FastAPI app
(in-process by default, or a remote instance via --server), writes the
canonical report file, and maps the outcome onto the exit-code contract
{0 pass, 1 usage, 2 assertion fail, 3 numeric/capacity}.
"""

from __future__ import annotations

import argparse
import sys

EXIT_USAGE = 1
EXIT_FAIL = 2
EXIT_NUMERIC = 3


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="cdqs-lab",
        description="certify, transform, and reduce conditional-disclosure protocols")
    ap.add_argument("--server", default=None,
                    help="base URL of a running service (default: in-process)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--protocol", default="eq",
                       help="registry name or config file path")
        p.add_argument("--n", type=int, default=2, help="input length per party")
        p.add_argument("--tol", type=float, default=1e-6, help="pass tolerance")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="report file path")
        p.add_argument("--no-deterministic", action="store_true",
                       help="embed wall time in the report")

    pv = sub.add_parser("verify", help="certify a protocol's (eps, delta)")
    common(pv)

    pt = sub.add_parser("transform", help="apply a protocol transformation")
    pt.add_argument("op", choices=["negate", "and", "or", "amplify"])
    common(pt)
    pt.add_argument("--noise-eps", type=float, default=0.0,
                    help="injected per-protocol diamond error")
    pt.add_argument("--code", default="five_qubit", help="catalog code for amplify")
    pt.add_argument("--no-verify", action="store_true",
                    help="skip certifying the transformed protocol")

    pr = sub.add_parser("reduce", help="run a communication-complexity reduction")
    pr.add_argument("kind", choices=["oneway", "pp", "qip", "zk"])
    common(pr)
    pr.add_argument("--mode", choices=["oracle", "sampled"], default="oracle")
    pr.add_argument("--samples", type=int, default=None)
    pr.add_argument("--ell", type=int, default=2, help="secret bits for qip/zk")
    pr.add_argument("--noise-eps", type=float, default=0.0)

    sub.add_parser("list-protocols", help="list named protocols")

    ps = sub.add_parser("serve", help="run the HTTP service")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8000)
    return ap


def _client(server):
    import httpx
    if server:
        return httpx.Client(base_url=server, timeout=3600.0)
    from fastapi.testclient import TestClient

    from .service.app import create_app
    return TestClient(create_app())


def _finish(resp, out_path):
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", {})
        except Exception:
            detail = {}
        kind = detail.get("kind", "HTTPError") if isinstance(detail, dict) else "HTTPError"
        message = detail.get("message", resp.text) if isinstance(detail, dict) else str(detail)
        code = detail.get("exit_code", EXIT_USAGE) if isinstance(detail, dict) else EXIT_USAGE
        print(f"error [{kind}]: {message}", file=sys.stderr)
        return int(code)
    body = resp.json()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(body["canonical"])
    report = body.get("report", {})
    summary = {k: report[k] for k in
               ("kind", "protocol", "eps_hat", "delta_hat", "passed",
                "measured_error", "bound", "completeness", "soundness_bound",
                "all_correct", "valid", "distance", "cost")
               if k in report}
    print(" ".join(f"{k}={v}" for k, v in summary.items()) or "done")
    return int(body["exit_code"])


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service.app import create_app
        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0
    with _client(args.server) as client:
        if args.command == "list-protocols":
            resp = client.get("/protocols")
            if resp.status_code != 200:
                print(resp.text, file=sys.stderr)
                return EXIT_USAGE
            for row in resp.json():
                print(f"{row['name']:12s} {row['description']}")
            return 0
        if args.command == "verify":
            resp = client.post("/verify", json={
                "protocol": args.protocol, "n": args.n, "tolerance": args.tol,
                "seed": args.seed, "deterministic": not args.no_deterministic})
            return _finish(resp, args.out)
        if args.command == "transform":
            resp = client.post("/transform", json={
                "op": args.op, "protocol": args.protocol, "n": args.n,
                "noise_eps": args.noise_eps, "code": args.code,
                "verify": not args.no_verify, "tolerance": args.tol,
                "seed": args.seed, "deterministic": not args.no_deterministic})
            return _finish(resp, args.out)
        resp = client.post("/reduce", json={
            "kind": args.kind, "protocol": args.protocol, "n": args.n,
            "mode": args.mode, "samples": args.samples, "seed": args.seed,
            "ell": args.ell, "noise_eps": args.noise_eps,
            "tolerance": args.tol,
            "deterministic": not args.no_deterministic})
        return _finish(resp, args.out)


if __name__ == "__main__":
    sys.exit(main())
