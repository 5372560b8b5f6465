"""Command-line entry point: ``generate``, ``analyze`` and ``report``.

Exit status: 0 all checks pass, 1 a verdict failed or a test could not be
evaluated, 2 usage or input error.

Any long option can also be given in a ``--config`` file of flat
``key = value`` lines (``#`` starts a comment). Keys are option names with
dashes or underscores; ``input.<test> = path`` assigns a per-test input.
Options given on the command line override the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from grabeval import __version__
from grabeval.evaluate import ALL_TESTS, EvalConfig, Thresholds, run_evaluation
from grabeval.frame import FORMAT_KINDS, FrameError, FormatSpec, format_for_path, save_frame
from grabeval.patterns import DefectModel, PatternSpec, apply_defects, generate_pattern
from grabeval.report import REPORT_FORMATS, emit_report, load_report, to_json, to_text

log = logging.getLogger("grabeval")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_FORMAT_ALIASES = {"pgm": "pgm_binary", **{k: k for k in FORMAT_KINDS}}


class UsageError(Exception):
    pass


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into a dict of strings."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        key = key.strip().replace("-", "_")
        if not key:
            raise UsageError(f"{path}:{lineno}: missing key")
        values[key] = value.strip()
    return values


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 256x256, got {text!r}")


def _parse_codes(text: str) -> frozenset:
    try:
        return frozenset(int(c) for c in text.replace(" ", "").split(",") if c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"codes must be a comma-separated integer list, got {text!r}")


def _parse_interference(text: str) -> tuple:
    try:
        parts = tuple(float(p) for p in text.split(":"))
    except ValueError:
        parts = ()
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"interference must be FRACTION:AMPLITUDE[:PHASE], got {text!r}")
    return parts


def _parse_tests(text: str) -> tuple:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if names == ["all"]:
        return ALL_TESTS
    unknown = [t for t in names if t not in ALL_TESTS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"tests must be 'all' or a subset of {','.join(ALL_TESTS)}")
    return tuple(t for t in ALL_TESTS if t in names)


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_format_args(p):
    p.add_argument("--format", dest="file_format", choices=sorted(_FORMAT_ALIASES),
                   help="capture file format (default: from extension, .pgm/.raw/.raw16)")
    p.add_argument("--size", type=_parse_size, help="WIDTHxHEIGHT (required for raw files)")
    p.add_argument("--bit-depth", type=int, help="bits per sample")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grabeval", description="Frame-grabber acquisition accuracy evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesise a test pattern, optionally with defects")
    g.add_argument("--config", help="flat key = value file with defaults for these options")
    g.add_argument("--pattern", choices=("uniform", "ramp", "bars"), default="uniform")
    g.add_argument("--level", type=float, default=128, help="uniform level")
    g.add_argument("--start", type=float, default=0, help="ramp start level")
    g.add_argument("--end", type=float, help="ramp end level (default full scale)")
    g.add_argument("--low", type=float, default=20, help="bars low level")
    g.add_argument("--high", type=float, default=220, help="bars high level")
    g.add_argument("--period", type=int, default=32, help="bars period in pixels")
    g.add_argument("--duty", type=float, default=0.5, help="bars high fraction")
    g.add_argument("--noise", type=float, help="additive noise sigma (gaussian) or half-width (uniform)")
    g.add_argument("--noise-dist", choices=("gaussian", "uniform"), default="gaussian")
    g.add_argument("--jitter", type=int, help="line jitter amplitude J in pixels")
    g.add_argument("--line-offset-sigma", type=float, help="per-line black-level offset sigma")
    g.add_argument("--decay", type=float, help="level decay in LSB per full line")
    g.add_argument("--interference", type=_parse_interference, help="FRACTION:AMPLITUDE[:PHASE]")
    g.add_argument("--missing-codes", type=_parse_codes, default=frozenset(), help="e.g. 77,128")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=False, help="output frame file")
    _add_format_args(g)
    g.set_defaults(size=(256, 256), bit_depth=8)

    a = sub.add_parser("analyze", help="evaluate capture files and write a report")
    a.add_argument("--config", help="flat key = value file with defaults for these options")
    a.add_argument("--input", help="capture file used by every test without its own input")
    a.add_argument("--input-for", action="append", default=[], metavar="TEST=PATH",
                   help="per-test capture file (repeatable)")
    a.add_argument("--tests", type=_parse_tests, default=",".join(ALL_TESTS),
                   help="'all' or comma list of " + ",".join(ALL_TESTS))
    a.add_argument("--orientation", choices=("rows", "columns"), default="rows",
                   help="spectral analysis along lines or columns")
    a.add_argument("--block-size", type=int, default=16)
    a.add_argument("--subpixel", type=_parse_bool, nargs="?", const=True, default=False,
                   help="interpolate transition points between samples")
    defaults = Thresholds()
    for name in Thresholds.__dataclass_fields__:
        a.add_argument("--" + name.replace("_", "-"), type=float, default=getattr(defaults, name))
    a.add_argument("--out", help="report path (directory for csv-bundle); stdout when omitted")
    a.add_argument("--report-format", choices=REPORT_FORMATS, default="json")
    _add_format_args(a)

    r = sub.add_parser("report", help="re-render a stored JSON report")
    r.add_argument("report", help="JSON report written by analyze")
    r.add_argument("--report-format", choices=REPORT_FORMATS, default="text")
    r.add_argument("--out", help="output path (directory for csv-bundle); stdout when omitted")

    parser.commands = {"generate": g, "analyze": a, "report": r}
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list) -> tuple[argparse.Namespace, dict]:
    """Parse argv, using a --config file (if any) as the option defaults."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args, {}
    values = read_config_file(args.config)
    sub = parser.commands[args.command]
    dests = {a.dest: a for a in sub._actions}
    aliases = {"format": "file_format", "input_format": "file_format"}
    defaults, per_test = {}, {}
    for key, value in values.items():
        if key.startswith("input."):
            per_test[key.split(".", 1)[1]] = value
            continue
        dest = aliases.get(key, key)
        action = dests.get(dest)
        if action is None or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        if action.type is not None:
            try:
                value = action.type(value)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {sorted(action.choices)}")
        defaults[dest] = value
    sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    return args, per_test


def _format_spec(args, path) -> FormatSpec:
    size = args.size
    width, height = size if size else (None, None)
    if args.file_format:
        kind = _FORMAT_ALIASES[args.file_format]
        bit_depth = args.bit_depth
        if kind == "raw8" and bit_depth is None:
            bit_depth = 8
        if kind == "raw16le" and bit_depth is None:
            bit_depth = 16
        return FormatSpec(kind, width, height, bit_depth)
    return format_for_path(path, width, height, args.bit_depth)


def cmd_generate(args) -> int:
    if not args.out:
        raise UsageError("generate needs --out")
    width, height = args.size
    spec = PatternSpec(
        kind=args.pattern, width=width, height=height, bit_depth=args.bit_depth,
        level=args.level, start_level=args.start, end_level=args.end,
        low_level=args.low, high_level=args.high, period=args.period, duty=args.duty,
    )
    model = DefectModel(
        noise_distribution=args.noise_dist, noise_sigma=args.noise,
        jitter_amplitude=args.jitter, line_offset_sigma=args.line_offset_sigma,
        decay_slope=args.decay, interference=args.interference,
        missing_codes=args.missing_codes, seed=args.seed,
    )
    frame = apply_defects(generate_pattern(spec), model)
    fmt = _format_spec(args, args.out)
    if fmt.kind != "pgm_binary" and fmt.bit_depth is None:
        fmt = FormatSpec(fmt.kind, width, height, frame.bit_depth)
    save_frame(frame, args.out, fmt)
    log.info("wrote %s (%s)", args.out, frame)
    return EXIT_PASS


def _write_or_print(report, fmt: str, out) -> None:
    if out:
        emit_report(report, fmt, out)
    elif fmt == "csv-bundle":
        raise UsageError("csv-bundle output needs --out DIRECTORY")
    else:
        sys.stdout.write(to_json(report) if fmt == "json" else to_text(report))


def cmd_analyze(args, per_test: dict) -> int:
    inputs = dict(per_test)
    for item in args.input_for:
        test, sep, path = item.partition("=")
        if not sep:
            raise UsageError(f"--input-for expects TEST=PATH, got {item!r}")
        inputs[test.strip()] = path.strip()
    bad = set(inputs) - set(ALL_TESTS)
    if bad:
        raise UsageError(f"unknown test in per-test inputs: {sorted(bad)}")
    reference = args.input or next(iter(inputs.values()), None)
    if reference is None:
        raise UsageError("analyze needs --input or --input-for")

    thresholds = Thresholds(**{name: getattr(args, name) for name in Thresholds.__dataclass_fields__})
    config = EvalConfig(
        input=args.input,
        input_format=_format_spec(args, reference),
        inputs=inputs,
        tests=args.tests,
        orientation=args.orientation,
        thresholds=thresholds,
        block_size=args.block_size,
        subpixel=args.subpixel,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = run_evaluation(config)
    _write_or_print(report, args.report_format, args.out)
    return EXIT_FAIL if report.failed else EXIT_PASS


def cmd_report(args) -> int:
    report = load_report(args.report)
    _write_or_print(report, args.report_format, args.out)
    return EXIT_FAIL if report.failed else EXIT_PASS


def cli_main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, per_test = _apply_config_file(parser, argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"grabeval: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "analyze":
            return cmd_analyze(args, per_test)
        return cmd_report(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"grabeval: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FrameError, ValueError) as exc:
        print(f"grabeval: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
