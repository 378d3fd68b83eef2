"""Command-line interface: ``steerlab simulate | analyze | report``.

Exit codes: 0 success, 1 computation failure, 2 usage, input or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DomainError, ParseError, SteerlabError, ValidationError
from .harness.campaign import ResultSet, analyze_files, check_output_dir, run_campaign
from .harness.config import EXPERIMENT_PRESET, CampaignConfig, parse_mu_grid, resolve_seed
from .harness.io import read_json
from .harness.reports import FORMATS, emit_reports, round_sig, summary_text

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _settings(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid settings count {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steerlab", description="Certify quantum steering from two-party correlation data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo campaign")
    sim.add_argument("--config", help="JSON file with campaign settings (flags override it)")
    sim.add_argument("--mode", choices=["sweep", "histogram", "bars", "sweep-mu", "violation-bars"])
    sim.add_argument("--mu", help="value, comma list, or start:stop:step grid")
    sim.add_argument("--settings", type=_settings, help="2, 3 or 2,3")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--shots", type=int, help="multinomial shots per setting pair (default: exact distributions)")
    sim.add_argument("--sampler", choices=["haar", "fibonacci", "aligned"])
    sim.add_argument("--lattice-size", type=int)
    sim.add_argument("--bob", choices=["pauli", "random"], help="Bob's triad: fixed Pauli axes (default) or random per trial")
    sim.add_argument("--pairs", action="store_true", help="evaluate all nine two-setting pairs of each triad pair")
    sim.add_argument("--include-xy-pair", action="store_true", help="keep the A1A2/XY pair in two-setting campaigns")
    sim.add_argument("--allow-signalling", action="store_true", help="also run ASR on raw shot data")
    sim.add_argument("--preset", choices=["experiment"], help="mu=0.907 with 1000 shots, Bob measuring Pauli axes")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--format", default="csv,json,svg")
    sim.add_argument("--out", required=False)

    ana = sub.add_parser("analyze", help="certify steering from a distribution file")
    ana.add_argument("--dist", required=True)
    ana.add_argument("--bob", required=True)
    ana.add_argument("--allow-signalling", action="store_true")
    ana.add_argument("--out", required=True)

    rep = sub.add_parser("report", help="regenerate reports from a campaign directory")
    rep.add_argument("--in", dest="indir", required=True)
    rep.add_argument("--format", default="csv,json,svg")
    return parser


def _formats(text: str) -> list[str]:
    formats = [f.strip() for f in text.split(",") if f.strip()]
    unknown = [f for f in formats if f not in FORMATS]
    if unknown or not formats:
        raise UsageError(f"unknown format(s) {unknown}; choose from {','.join(FORMATS)}")
    return formats


def config_from_args(args) -> CampaignConfig:
    data: dict = {}
    if args.config:
        doc = read_json(args.config)
        if not isinstance(doc, dict):
            raise ParseError("configuration must be a JSON object")
        data.update(doc)
    if args.preset == "experiment":
        data.update(EXPERIMENT_PRESET)
        data.setdefault("mode", "histogram")
    if args.mode:
        data["mode"] = args.mode
    mode = data.get("mode", "histogram")
    if args.mu is not None:
        data["mu"] = parse_mu_grid(args.mu)
    if args.settings:
        data["n_settings"] = args.settings
    elif "n_settings" not in data and mode in ("bars", "violation-bars"):
        data["n_settings"] = [3, 2]
    if args.bob:
        data["bob"] = args.bob
    for key, value in (("trials", args.trials), ("shots", args.shots), ("workers", args.workers), ("lattice_size", args.lattice_size)):
        if value is not None:
            data[key] = value
    if args.sampler:
        data["sampler"] = args.sampler
    if args.pairs:
        data["pair_combinations"] = True
    if args.include_xy_pair:
        data["exclude_orthogonal_plane_pairs"] = False
    if args.allow_signalling:
        data["allow_signalling"] = True
    if args.out:
        data["output_dir"] = args.out
    if "output_dir" not in data:
        raise UsageError("--out is required (or output_dir in the config file)")
    data["seed"] = resolve_seed(int(data.get("seed", 0)), args.seed)
    return CampaignConfig.from_dict(data)


def cmd_simulate(args) -> int:
    formats = _formats(args.format)
    config = config_from_args(args)
    check_output_dir(config.output_dir)
    result = run_campaign(config)
    emit_reports(result, config.output_dir, formats)
    print(summary_text(result), end="")
    return EXIT_OK


def cmd_analyze(args) -> int:
    out = check_output_dir(args.out)
    record = analyze_files(args.dist, args.bob, allow_signalling=args.allow_signalling)
    text = json.dumps(round_sig(record), indent=2, allow_nan=False) + "\n"
    (out / "report.json").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_report(args) -> int:
    formats = _formats(args.format)
    indir = Path(args.indir)
    try:
        result = ResultSet.load(indir)
    except FileNotFoundError as exc:
        raise ParseError(f"{indir} is not a campaign directory ({exc.filename} missing)") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"corrupt campaign file in {indir}: {exc.msg}") from exc
    for path in emit_reports(result, indir, formats):
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return {"simulate": cmd_simulate, "analyze": cmd_analyze, "report": cmd_report}[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"steerlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, DomainError) as exc:
        print(f"steerlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"steerlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SteerlabError as exc:
        print(f"steerlab: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
