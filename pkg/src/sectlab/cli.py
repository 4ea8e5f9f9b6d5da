"""Command line interface.

Subcommands:

  constants  exact log-domain constants for one (n, k)
  estimate   one functional of one body (optionally with a density)
  verify     one named check; exit 0 pass / 1 fail / 2 error
  scan       (n, k) sweep of the constants to CSV
  suite      the default verification grid; byte-identical JSON per seed

Every report embeds the full configuration, so a run can be reproduced
from the report file alone.  ``--deterministic`` drops the timestamp so
reruns with one seed are byte-identical; worker hints (SECTLAB_THREADS)
never influence values.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

from . import __version__
from .bodies import body_from_json, volume
from .constants import gamma_nk, gamma_within_bounds, growth_ratio, log_ball_volume, log_bp_constant
from .estimates import CheckReport
from .functionals import (dual_affine_quermass, i_minus_k, isotropic_constant,
                          sylvester, volume_radius, w_tilde)
from .measures import density_from_json
from .sampler import StreamHandle
from .verifier import CHECKS, SuiteConfig, run_suite

_REPORT_SCHEMA = "sectlab.report.v1"
_SCAN_SCHEMA = "sectlab.scan.v1"


def _emit(payload: dict, path: str | None, pretty: bool) -> None:
    text = json.dumps(payload, indent=2 if pretty else None,
                      sort_keys=True, allow_nan=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _run_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func",) and v is not None}
    cfg["version"] = __version__
    if not getattr(args, "deterministic", False):
        # worker hints and timestamps never influence values, so they are
        # excluded from byte-identical deterministic output
        cfg["threads"] = os.environ.get("SECTLAB_THREADS", "")
        cfg["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    return cfg


def _reports_to_csv(reports: list[CheckReport], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema", "check_name", "fixture", "n", "k", "relation",
                         "lhs_log", "rhs_log", "margin", "pass", "note"])
        for r in reports:
            writer.writerow([_REPORT_SCHEMA, r.check_name,
                             r.inputs.get("fixture", ""), r.n, r.k, r.relation,
                             f"{r.lhs.to_log().value:.12g}",
                             f"{r.rhs.to_log().value:.12g}",
                             f"{r.margin:.6g}", int(r.passed), r.note])


def _cmd_constants(args: argparse.Namespace) -> int:
    n, k = args.n, args.k
    payload = {
        "omega_n_log": log_ball_volume(n).log_value,
        "gamma_nk": math.exp(gamma_nk(n, k).log_value),
        "gamma_bounds_ok": gamma_within_bounds(n, k),
        "p_log": log_bp_constant(n, n - k).log_value,
        "growth_ratio": growth_ratio(n, k),
        "config": _run_config(args),
    }
    _emit(payload, args.json, args.pretty)
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    body = body_from_json(args.body)
    density = density_from_json(args.measure, body.dim) if args.measure else None
    rng = StreamHandle(args.seed)
    name = args.functional
    if name == "sylvester":
        est = sylvester(body, body.dim, args.p, args.trials, rng, density=density)
    elif name == "L":
        est = isotropic_constant(body, args.samples, rng, density=density)
    elif name == "phi":
        est = dual_affine_quermass(body, args.k, args.frames, args.samples, rng)
    elif name == "w":
        est = w_tilde(body, args.k, args.frames, args.samples, rng)
    elif name == "i_minus_k":
        est = i_minus_k(body, args.k, args.samples, rng)
    elif name == "vrad":
        est = volume_radius(body, args.samples, rng)
    elif name == "volume":
        est = volume(body, args.samples, rng)
    else:
        raise ValueError(f"unknown functional {name!r}")
    payload = {"functional": name, "estimate": est.as_dict(), "config": _run_config(args)}
    _emit(payload, args.json, args.pretty)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    if args.check not in CHECKS:
        raise ValueError(f"unknown check {args.check!r}; known: {sorted(CHECKS)}")
    body = body_from_json(args.body)
    rng = StreamHandle(args.seed)
    kwargs: dict = {"k": args.k, "frames": args.frames, "rng": rng, "seed": args.seed}
    heavy = args.check in ("bp_identity", "logconcave_identity")
    if heavy:
        kwargs["points_per_frame"] = args.points
        kwargs["sphere_samples"] = args.samples
    else:
        kwargs["sphere_samples"] = args.samples
    if args.check == "busemann_petty_volume":
        if not args.body2:
            raise ValueError("busemann_petty_volume needs --body2")
        kwargs["body_k"] = body
        kwargs["body_d"] = body_from_json(args.body2)
    else:
        kwargs["body"] = body
    if args.check in ("slicing_chain", "stability_chain", "dpp_bound",
                      "logconcave_identity"):
        if not args.measure:
            raise ValueError(f"{args.check} needs --measure")
        kwargs["density"] = density_from_json(args.measure, body.dim)
    if args.check == "grinberg":
        kwargs["transforms"] = args.transforms
    out = CHECKS[args.check](**kwargs)
    reports = out if isinstance(out, list) else [out]
    payload = {"schema": _REPORT_SCHEMA,
               "reports": [r.as_dict() for r in reports],
               "config": _run_config(args)}
    _emit(payload, args.json, args.pretty)
    if args.csv:
        _reports_to_csv(reports, args.csv)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_scan(args: argparse.Namespace) -> int:
    rows = []
    for n in range(2, args.n_max + 1):
        for k in range(1, n):
            rows.append([_SCAN_SCHEMA, n, k,
                         f"{log_ball_volume(n).log_value:.12g}",
                         f"{math.exp(gamma_nk(n, k).log_value):.12g}",
                         int(gamma_within_bounds(n, k)),
                         f"{log_bp_constant(n, n - k).log_value:.12g}",
                         f"{growth_ratio(n, k):.12g}"])
    header = ["schema", "n", "k", "omega_n_log", "gamma_nk", "gamma_bounds_ok",
              "p_log", "growth_ratio"]
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    return 0


def _cmd_suite(args: argparse.Namespace) -> int:
    cfg = SuiteConfig(seed=args.seed, frames=args.frames,
                      sphere_samples=args.samples,
                      points_per_frame=args.points,
                      include_negative_control=args.negative_control)
    result = run_suite(cfg)
    payload = result.as_dict()
    payload["config"] = _run_config(args)
    payload["suite_config"] = cfg.as_dict()
    _emit(payload, args.json, args.pretty)
    if args.csv:
        _reports_to_csv(result.reports, args.csv)
    return result.exit_code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sectlab",
        description="Numerical verification of section inequalities for convex bodies.")
    parser.add_argument("--version", action="version", version=f"sectlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", metavar="PATH", help="write the JSON report here")
        p.add_argument("--pretty", action="store_true", help="indent JSON output")
        p.add_argument("--deterministic", action="store_true",
                       help="omit timestamps so identical seeds give identical bytes")

    p = sub.add_parser("constants", help="exact constants for one (n, k)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    common(p)
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("estimate", help="estimate one functional of a body")
    p.add_argument("--functional", required=True,
                   choices=["sylvester", "L", "phi", "w", "i_minus_k", "vrad", "volume"])
    p.add_argument("--body", required=True, metavar="SPEC", help="JSON literal or path")
    p.add_argument("--measure", metavar="SPEC", help="density JSON literal or path")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--frames", type=int, default=500)
    p.add_argument("--trials", type=int, default=20_000)
    common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("verify", help="run one named check")
    p.add_argument("--check", required=True)
    p.add_argument("--body", required=True, metavar="SPEC")
    p.add_argument("--body2", metavar="SPEC")
    p.add_argument("--measure", metavar="SPEC")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--frames", type=int, default=500)
    p.add_argument("--samples", type=int, default=2000, help="sphere samples per frame")
    p.add_argument("--points", type=int, default=500, help="simplex draws per frame")
    p.add_argument("--transforms", type=int, default=5)
    p.add_argument("--csv", metavar="PATH")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("scan", help="sweep the constants over an (n, k) grid")
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("suite", help="run the default verification grid")
    p.add_argument("--frames", type=int, default=500)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--points", type=int, default=500)
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--negative-control", action="store_true",
                   help="append the reversed-inequality self-test fixture")
    common(p)
    p.set_defaults(func=_cmd_suite)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": f"{type(exc).__name__}: {exc}"}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
