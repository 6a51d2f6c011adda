"""Command-line entry point: every verification as a seeded, reproducible
experiment with a machine-readable report.

Exit codes: 0 pass, 1 tolerance fail, 2 degenerate input, 3 numerical
failure, 64 usage/configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from pydantic import ValidationError

from . import __version__
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    NumericalFailureError,
)
from .runs import (
    CharacterConfig,
    HcizConfig,
    HeatflowConfig,
    RootSystemQuery,
    SaddleConfig,
    VerifyHcConfig,
    VolumeConfig,
    run_character,
    run_hciz,
    run_heatflow,
    run_root_system,
    run_saddle,
    run_verify_hc,
    run_volume,
    EXIT_DEGENERATE,
    EXIT_NUMERICAL,
    EXIT_USAGE,
)


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _ints(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip() != ""]


def _extent(text: str) -> List[List[float]]:
    return [[float(x) for x in pair.split(",")] for pair in text.split(";")]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orbital-forge", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("json", "csv", "table"), default="json")
        sp.add_argument("--output", default=None, help="write the report to this path")

    sp = sub.add_parser("verify-hc", help="Monte Carlo vs closed-form orbital integral")
    sp.add_argument("--group", required=True, choices=("su", "so", "usp"))
    sp.add_argument("--size", required=True, type=int)
    sp.add_argument("--h1", required=True, type=_floats)
    sp.add_argument("--h2", required=True, type=_floats)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tolerance", type=float, default=0.01)
    sp.add_argument("--threads", type=int, default=None)
    common(sp)

    sp = sub.add_parser("hciz", help="determinant form of the unitary orbital integral")
    sp.add_argument("--a", required=True, type=_floats)
    sp.add_argument("--b", required=True, type=_floats)
    sp.add_argument("--compare", choices=("weylsum", "none"), default="weylsum")
    sp.add_argument("--tolerance", type=float, default=1e-10)
    common(sp)

    sp = sub.add_parser("character", help="Weyl character, optionally vs the orbit route")
    sp.add_argument("--family", required=True)
    sp.add_argument("--rank", required=True, type=int)
    sp.add_argument("--weight", required=True, type=_ints)
    sp.add_argument("--theta", type=float, default=None)
    sp.add_argument("--h", type=_floats, default=None)
    sp.add_argument("--compare", choices=("kirillov", "none"), default="kirillov")
    sp.add_argument("--tolerance", type=float, default=1e-10)
    common(sp)

    sp = sub.add_parser("volume", help="coadjoint orbit volume with homogeneity self-check")
    sp.add_argument("--family", required=True)
    sp.add_argument("--rank", required=True, type=int)
    sp.add_argument("--h1", required=True, type=_floats)
    sp.add_argument("--tolerance", type=float, default=1e-12)
    common(sp)

    sp = sub.add_parser("saddle", help="critical-point search plus the Hessian identity")
    sp.add_argument("--group", required=True, choices=("su", "so", "usp"))
    sp.add_argument("--size", required=True, type=int)
    sp.add_argument("--h1", required=True, type=_floats)
    sp.add_argument("--h2", required=True, type=_floats)
    sp.add_argument("--starts", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--step", type=float, default=1e-4)
    sp.add_argument("--tolerance", type=float, default=1e-4)
    common(sp)

    sp = sub.add_parser("heatflow", help="heat-equation residual and boundary checks")
    sp.add_argument("--check", required=True, choices=("radial", "boundary", "cm", "exactness"))
    sp.add_argument("--family", required=True)
    sp.add_argument("--rank", required=True, type=int)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--steps", type=_floats, default=[1e-2, 5e-3])
    sp.add_argument("--h1", type=_floats, default=None)
    sp.add_argument("--extent", type=_extent, default=None, help="lo,hi[;lo,hi...] per axis")
    sp.add_argument("--n-scaling", dest="n_scaling", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--tolerance", type=float, default=None)
    common(sp)

    sp = sub.add_parser("root-system", help="export root data as JSON")
    sp.add_argument("--family", required=True)
    sp.add_argument("--rank", required=True, type=int)
    common(sp)

    return p


_RUNNERS = {
    "verify-hc": (VerifyHcConfig, run_verify_hc),
    "hciz": (HcizConfig, run_hciz),
    "character": (CharacterConfig, run_character),
    "volume": (VolumeConfig, run_volume),
    "saddle": (SaddleConfig, run_saddle),
    "heatflow": (HeatflowConfig, run_heatflow),
}

_HEATFLOW_TOL_DEFAULT = {"radial": 1e-3, "cm": 1e-3, "boundary": 1e-3, "exactness": 1e-12}


def _config_from_args(command: str, args: argparse.Namespace):
    fields = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "format", "output") and v is not None
    }
    if command == "heatflow" and "tolerance" not in fields:
        fields["tolerance"] = _HEATFLOW_TOL_DEFAULT[args.check]
    model, runner = _RUNNERS[command]
    return model(**fields), runner


def _render_csv(report: dict) -> str:
    flat = {"command": report["command"], "status": report["status"]}

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}{k}." if prefix else f"{k}.", v) if isinstance(
                    v, (dict, list)
                ) else flat.__setitem__(f"{prefix}{k}", v)
        elif isinstance(obj, list):
            flat[prefix.rstrip(".")] = ";".join(str(x) for x in obj)

    walk("", report["result"])
    header = ",".join(flat.keys())
    row = ",".join(str(v) for v in flat.values())
    return header + "\n" + row + "\n"


def _render_table(report: dict) -> str:
    lines = [f"{report['command']}  [{report['status']}]  v{report['version']}"]
    for k, v in report["result"].items():
        lines.append(f"  {k}: {v}")
    return "\n".join(lines) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    if args.command == "root-system":
        try:
            payload = run_root_system(RootSystemQuery(family=args.family, rank=args.rank))
        except (ConfigurationError, ValidationError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        _emit(text, args.output)
        return 0

    if args.command == "verify-hc" and args.threads is None:
        env = os.environ.get("ORBITAL_FORGE_THREADS")
        if env:
            args.threads = int(env)

    try:
        cfg, runner = _config_from_args(args.command, args)
        report = runner(cfg)
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigurationError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        text = _render_csv(report)
    else:
        text = _render_table(report)
    _emit(text, args.output)
    return report["exit_code"]


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
