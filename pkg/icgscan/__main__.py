"""Command-line entry point for icgscan."""

from __future__ import annotations

import argparse
import sys
from typing import List, NoReturn, Optional

from . import __version__
from .cli import EXIT_USAGE, parse_lengths
from .cli import main as cli_main
from .config import PRESETS


class IcgArgumentParser(argparse.ArgumentParser):
    """Argument errors exit with the usage code 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_params_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--params", help="Flat key=value parameters file")
    parser.add_argument("--preset", choices=PRESETS, help="Starting parameter set (default: config delineation.preset, physiological)")


def _add_corpus_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="Directory of <name>.csv + <name>_truth.csv records")
    parser.add_argument("--fs", type=float, help="Sampling rate for single-column signals")
    parser.add_argument("--tolerance-ms", type=float, help="Match tolerance in ms (default from config, 30)")
    parser.add_argument("--workers", type=int, help="Worker threads")
    parser.add_argument("--progress", action="store_true", help="Show a progress bar")
    _add_params_arguments(parser)


def build_parser() -> argparse.ArgumentParser:
    """Build the top-level package parser."""

    parser = IcgArgumentParser(
        prog="icgscan",
        description="Beat-to-beat B/C/X/O delineation of impedance cardiograms.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "Examples:\n"
            "  python -m icgscan synth --spec beat.yaml --seconds 30 --seed 1 --out rec.csv\n"
            "  python -m icgscan delineate --input rec.csv --out rec_beats.csv\n"
            "  python -m icgscan eval --detected rec_beats.csv --reference rec_truth.csv --fs 250\n"
            "  python -m icgscan sweep --corpus corpus/ --lengths 5,9,13,17,21,25 --out sweep.csv\n"
            "  python -m icgscan -v calibrate --corpus corpus/ --grid grid.yaml --out grid.csv\n"
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    delineate_parser = subparsers.add_parser("delineate", help="Detect B/C/X/O points in a signal file")
    delineate_parser.add_argument("--input", required=True, help="Signal file (time_s,value or value)")
    delineate_parser.add_argument("--fs", type=float, help="Sampling rate in Hz (required for single-column input)")
    delineate_parser.add_argument("--filter-length", type=int, help="Fixed SG filter length instead of adaptive")
    delineate_parser.add_argument("--out", required=True, help="Annotation file to write")
    _add_params_arguments(delineate_parser)

    eval_parser = subparsers.add_parser("eval", help="Score detected against reference annotations")
    eval_parser.add_argument("--detected", required=True, help="Detected annotation file")
    eval_parser.add_argument("--reference", required=True, help="Reference annotation file")
    eval_parser.add_argument("--fs", type=float, help="Sampling rate in Hz")
    eval_parser.add_argument("--signal", help="Signal file the annotations refer to (fills amplitudes)")
    eval_parser.add_argument("--tolerance-ms", type=float, help="Match tolerance in ms (default from config, 30)")
    eval_parser.add_argument("--out", help="Report file (.txt, .json or .html); stdout when omitted")

    score_parser = subparsers.add_parser("score", help="Delineate and score every record of a corpus")
    score_parser.add_argument("--filter-length", type=int, help="Fixed SG filter length instead of adaptive")
    score_parser.add_argument("--out", help="Report file (.txt, .json or .html); stdout when omitted")
    _add_corpus_arguments(score_parser)

    synth_parser = subparsers.add_parser("synth", help="Generate a synthetic record with ground truth")
    synth_parser.add_argument("--spec", required=True, help="YAML beat spec")
    synth_parser.add_argument("--seconds", type=float, help="Record length in seconds")
    synth_parser.add_argument("--seed", type=int, help="Noise seed")
    synth_parser.add_argument("--fs", type=float, help="Sampling rate in Hz")
    synth_parser.add_argument("--out", required=True, help="Signal file; truth goes to <stem>_truth.csv")
    _add_params_arguments(synth_parser)

    calibrate_parser = subparsers.add_parser("calibrate", help="Grid-search delineation parameters")
    calibrate_parser.add_argument("--grid", required=True, help="YAML mapping of parameter -> values")
    calibrate_parser.add_argument("--out", required=True, help="Score table (CSV)")
    _add_corpus_arguments(calibrate_parser)

    sweep_parser = subparsers.add_parser("sweep", help="Compare fixed SG filter lengths with the adaptive one")
    sweep_parser.add_argument("--lengths", type=parse_lengths, help="Comma-separated odd lengths")
    sweep_parser.add_argument("--out", required=True, help="Sweep table (CSV)")
    _add_corpus_arguments(sweep_parser)

    plot_parser = subparsers.add_parser("plotdata", help="Write signal and point markers for plotting")
    plot_parser.add_argument("--input", required=True, help="Signal file")
    plot_parser.add_argument("--fs", type=float, help="Sampling rate in Hz")
    plot_parser.add_argument("--annotations", required=True, help="Annotation file")
    plot_parser.add_argument("--out", required=True, help="Plot data file (CSV)")

    config_parser = subparsers.add_parser("config", help="Show or change user defaults")
    config_group = config_parser.add_mutually_exclusive_group()
    config_group.add_argument("--show", action="store_true", help="Show the current configuration")
    config_group.add_argument("--set", metavar="SECTION.KEY=VALUE", help="Set and persist one value")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Program entry point."""

    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return 0

    return cli_main(args)


if __name__ == "__main__":
    sys.exit(main())
