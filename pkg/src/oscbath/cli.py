"""Command line entry point: ``oscbath run`` and ``oscbath compare``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, NumericalError, OscBathError
from .scenario import PRESETS, compare_asymptotes, load_config, run_scenario, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _n0_list(text: str):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty n0 list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oscbath", description="Thermalization of an oscillator in an ohmic bath.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
        p.add_argument("--config", help="JSON scenario file; its keys override the preset")
        p.add_argument("--n0", type=_n0_list, help="comma-separated initial occupations, e.g. 0,1,5")

    run = sub.add_parser("run", help="compute occupation traces")
    common(run)
    run.add_argument("--out", help="output file (default: stdout)")
    run.add_argument("--format", choices=["csv", "json"], help="output format (default from config, else csv)")
    run.add_argument("--spectrum-out", help="also write the cavity spectrum as CSV")

    cmp_ = sub.add_parser("compare", help="compare both asymptotes with the Bose value")
    common(cmp_)
    cmp_.add_argument("--out", help="write the report as JSON to this file")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {"n0_sweep": args.n0} if args.n0 else None
        config = load_config(args.config, args.preset, overrides)
        if args.command == "run":
            result = run_scenario(config)
            text = write_outputs(result, args.out, args.format, args.spectrum_out)
            if not (args.out or config.output.path):
                sys.stdout.write(text)
        else:
            report = compare_asymptotes(config, args.n0)
            text = json.dumps(report.as_dict(), sort_keys=True, indent=1) + "\n"
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            sys.stdout.write(text)
    except ConfigError as exc:
        print(f"oscbath: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, OscBathError, ArithmeticError) as exc:
        print(f"oscbath: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
