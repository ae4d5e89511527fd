"""Command-line entry point: run | sweep | reproduce | verify.

All numeric work lives in the library; this layer only parses flags, builds
instances/policies, and writes files. Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .algorithms import make_policy, policy_names
from .errors import ConesError
from .geometry import polygon_vertices
from .harness import Trace, emit_csv, emit_json, fit_loglog_slope, run, sweep_T
from .instances import FAMILY_PARAMS, family_names, gen_frozen, gen_sc_lower_bound, make_instance
from .verify import SUITES, run_suite

POLICY_PARAMS = {"lsp": {"eps"}, "greedy": set(), "frugal": set(), "gap_frugal": set(), "ab": set()}


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"--param expects key=value, got {pair!r}")
        key, val = pair.split("=", 1)
        out[key.strip()] = _parse_value(val.strip())
    return out


def _eps_for(expr, T: int) -> float:
    """LSP tolerance specs: a number, '1/T', or 'T^<exponent>'."""
    if isinstance(expr, (int, float)):
        return float(expr)
    text = str(expr).replace(" ", "")
    if text == "1/T":
        return 1.0 / T
    if text.startswith("T^"):
        return float(T) ** float(text[2:])
    return float(text)


def _out_dir(args) -> Path:
    env = os.environ.get("CONES_OUT")
    base = args.out_dir or env or "out"
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _policy_factory(name: str, params: dict):
    if name == "lsp":
        expr = params.get("eps", 0.1)
        return lambda T: make_policy("lsp", eps=_eps_for(expr, T))
    return lambda T: make_policy(name)


def _split_params(args) -> tuple[dict, dict]:
    from .errors import ParameterError

    params = _parse_params(args.param)
    if args.family not in FAMILY_PARAMS:
        raise ParameterError(
            f"unknown family {args.family!r}; choose from {family_names()}"
        )
    fam_keys = FAMILY_PARAMS[args.family]
    pol_keys = POLICY_PARAMS[args.policy]
    fam = {k: v for k, v in params.items() if k in fam_keys}
    pol = {k: v for k, v in params.items() if k in pol_keys}
    unknown = set(params) - fam_keys - pol_keys
    if unknown:
        raise SystemExit(
            f"unknown parameters {sorted(unknown)} for family {args.family!r} "
            f"and policy {args.policy!r}"
        )
    return fam, pol


def cmd_run(args) -> int:
    fam_params, pol_params = _split_params(args)
    instance = make_instance(args.family, args.T, fam_params)
    policy = _policy_factory(args.policy, pol_params)(args.T)
    trace = run(policy, instance)
    out = _out_dir(args)
    stem = f"{args.policy}_{args.family}_{args.T}"
    writer = emit_json if args.format == "json" else emit_csv
    path = writer(trace, out / f"{stem}.{args.format}")
    final = trace.final()
    print(
        f"{args.policy} on {args.family} T={args.T}: "
        f"regret={final.regret_cum:.6g} movement={final.move_cum:.6g} "
        f"jumps={len(trace.jump_times)} -> {path}"
    )
    return 0


def cmd_sweep(args) -> int:
    fam_params, pol_params = _split_params(args)
    T_values = [int(t) for t in args.T_list.split(",")]
    factory = _policy_factory(args.policy, pol_params)
    rows = sweep_T(factory, args.family, T_values, fam_params)
    out = _out_dir(args)
    stem = f"{args.policy}_{args.family}_{T_values[-1]}"
    writer = emit_json if args.format == "json" else emit_csv
    path = writer(rows, out / f"sweep_{stem}.{args.format}")
    print(f"sweep written -> {path}")
    if len(rows) >= 4 and all(r.move_final > 0 for r in rows):
        slope = fit_loglog_slope(rows, "move_final")
        print(f"movement log-log slope: {slope:.3f}")
    return 0


def _emit_instance_geometry(instance, path: Path) -> None:
    lines = ["t,vertex,x0,x1"]
    for t, S in enumerate(instance.sets, start=1):
        verts = polygon_vertices(S)
        if verts is None:
            continue
        for i, v in enumerate(verts):
            lines.append(f"{t},{i},{format(v[0], '.17g')},{format(v[1], '.17g')}")
    path.write_text("\n".join(lines) + "\n")


def cmd_reproduce(args) -> int:
    out = _out_dir(args)
    name = args.figure
    if name == "fig3":
        instance = gen_frozen(7, 7, 1.0, 4.0)
        out_files = [out / "fig3_instance.json"]
        out_files[0].write_text(json.dumps(instance.to_json(), indent=1) + "\n")
        _emit_instance_geometry(instance, out / "fig3_geometry.csv")
        out_files.append(out / "fig3_geometry.csv")
        for pol in ("greedy", "frugal", "lsp"):
            policy = (
                make_policy(pol) if pol != "lsp" else make_policy("lsp", eps=1.0 / instance.T)
            )
            trace = run(policy, instance)
            out_files.append(emit_csv(trace, out / f"fig3_{pol}.csv"))
        print("fig3 bundle:", *[p.name for p in out_files])
        return 0
    if name == "fig4":
        T_values = list(range(10, 201, 10))
        specs = {
            "greedy": lambda T: make_policy("greedy"),
            "frugal": lambda T: make_policy("frugal"),
            "lsp_sqrt": lambda T: make_policy("lsp", eps=T**-0.5),
            "lsp_inv": lambda T: make_policy("lsp", eps=1.0 / T),
        }
        files = []
        for label, factory in specs.items():
            rows = sweep_T(factory, "sc_lb", T_values, {"r0": 1.0, "D": 4.0})
            files.append(emit_csv(rows, out / f"fig4_{label}.csv"))
        print("fig4 bundle:", *[p.name for p in files])
        return 0
    if name == "fig5":
        instance = gen_frozen(7, 200, 1.0, 4.0)
        files = [out / "fig5_instance.json"]
        files[0].write_text(json.dumps(instance.to_json(), indent=1) + "\n")
        for pol, factory in {
            "greedy": lambda: make_policy("greedy"),
            "frugal": lambda: make_policy("frugal"),
            "lsp_sqrt": lambda: make_policy("lsp", eps=instance.T**-0.5),
            "lsp_inv": lambda: make_policy("lsp", eps=1.0 / instance.T),
        }.items():
            trace = run(factory(), instance)
            files.append(emit_csv(trace, out / f"fig5_{pol}.csv"))
        print("fig5 bundle:", *[p.name for p in files])
        return 0
    raise SystemExit(f"unknown figure {name!r}; choose fig3, fig4 or fig5")


def cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    width = max(len(c[0]) for c in checks)
    failed = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
        failed += 0 if ok else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cones",
        description=(
            "Benchmark harness for online convex optimization over nested "
            "shrinking feasible sets."
        ),
        epilog=(
            "Defaults mirror the reference simulations (r0=1, D=4). "
            "Output directory: --out-dir, else $CONES_OUT, else ./out."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--policy", required=True, choices=policy_names())
        # family validated in the library so a bad name is a domain error
        # (exit 1) whose message lists the known families
        p.add_argument("--family", required=True)
        p.add_argument(
            "--param",
            action="append",
            metavar="KEY=VALUE",
            help="family parameter (r0, D, a, b, B, c, eps, k, T_freeze, seed, "
            "sharp_alpha, c_R, lam) or policy parameter (lsp eps accepts a "
            "number, '1/T' or 'T^-0.5')",
        )
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p_run = sub.add_parser("run", help="run one policy on one instance")
    common(p_run)
    p_run.add_argument("--T", type=int, required=True)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="one run per horizon in --T-list")
    common(p_sweep)
    p_sweep.add_argument("--T-list", required=True, help="comma-separated horizons")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="emit a figure data bundle")
    p_rep.add_argument("figure", choices=("fig3", "fig4", "fig5"))
    p_rep.add_argument("--out-dir", default=None)
    p_rep.set_defaults(func=cmd_reproduce)

    p_ver = sub.add_parser("verify", help="run invariant suites")
    p_ver.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
