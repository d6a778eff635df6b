"""Command-line entry point: ``cvteleport <experiment> [options]``.

Exit status is 0 on success, 1 for configuration errors and 2 when a run
completes but one of its numerical self-checks fails.
"""
import argparse
import sys

from cvteleport.experiments import (
    EXPERIMENTS,
    ConfigError,
    config_from_mapping,
    parse_sweep,
    read_config_file,
)
from cvteleport.montecarlo import GridMassError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_TOLERANCE = 2

_FLAGS = [
    ("--q", float, "entanglement coefficient q in [0, 1)"),
    ("--gain", float, "single feedback gain g"),
    ("--gain-sweep", str, "gain sweep start:stop:steps (default 0:1.5:31)"),
    ("--truncation", int, "Fock truncation N (default 60; 40 for equivalence)"),
    ("--grid-radius", float, "quadrature half-width in beta units (default 8)"),
    ("--grid-points", int, "quadrature points per axis (default 160)"),
    ("--samples", int, "number of sampled outcomes (default 10000)"),
    ("--seed", int, "RNG seed (default 0)"),
    ("--input", str, "vacuum | coherent:RE,IM | fock:N | file:PATH"),
    ("--output", str, "write the table here instead of stdout"),
    ("--format", str, "csv (default) or json"),
]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="cvteleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name, func in EXPERIMENTS.items():
        p = sub.add_parser(name, help=func.__doc__.splitlines()[0])
        p.add_argument("--config", help="flat key = value configuration file")
        for flag, typ, help_text in _FLAGS:
            p.add_argument(flag, type=typ, default=None, help=help_text)
    return parser


def _mapping(args):
    mapping = read_config_file(args.config) if args.config else {}
    for flag, _, _ in _FLAGS:
        key = flag[2:]
        value = getattr(args, key.replace("-", "_"))
        if value is not None:
            mapping[key] = str(value) if key == "gain-sweep" else value
    if "gain-sweep" in mapping and isinstance(mapping["gain-sweep"], str):
        mapping["gain-sweep"] = parse_sweep(mapping["gain-sweep"])
    return mapping


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_mapping(_mapping(args))
        table = EXPERIMENTS[args.experiment](cfg)
    except (ConfigError, OSError) as exc:
        print(f"cvteleport: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GridMassError as exc:
        print(f"cvteleport: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE

    text = table.dumps(cfg.format)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    failed = [name for name, ok in table.checks.items() if not ok]
    if failed:
        print(f"cvteleport: tolerance checks failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
