"""Command line: ``pysbom scan <root> -o <sbom.json>``."""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .cyclonedx import FORMATS, emit_diagnostics
from .diagnostics import Severity
from .index import CACHE_DIR_ENV, INDEX_URL_ENV, IndexClient, parse_timestamp
from .markers import current_python
from .pipeline import scan_project
from .project import DEFAULT_REQUIREMENTS, NoMetadataError
from .resolver import ResolutionPolicy, Strategy

EXIT_OK = 0
EXIT_FAIL_ON = 1
EXIT_NO_METADATA = 2
EXIT_USAGE = 64

_RFC3339 = re.compile(r"^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _strategy(text: str):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        order = tuple(Strategy(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown strategy in {text!r}; choose from lock, resolve, guess") from None
    if not order:
        raise argparse.ArgumentTypeError("strategy list is empty")
    if len(set(order)) != len(order):
        raise argparse.ArgumentTypeError(f"strategy repeated in {text!r}")
    return order


def _as_of(text: str):
    if not _RFC3339.match(text.strip()):
        raise argparse.ArgumentTypeError(f"{text!r} is not an RFC 3339 timestamp with a UTC offset")
    return parse_timestamp(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pysbom",
        description="Generate CycloneDX 1.5 SBOMs for Python projects.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    scan = sub.add_parser(
        "scan",
        help="scan a project directory and write an SBOM",
        description="Scan a project directory and write a CycloneDX SBOM plus a diagnostics sidecar "
        "(<output>.diag.json).",
        epilog=f"Environment: {INDEX_URL_ENV} overrides the index URL, {CACHE_DIR_ENV} the cache directory. "
        "Exit codes: 0 ok, 1 --fail-on threshold met, 2 no metadata could be parsed, 64 usage error.",
    )
    scan.add_argument("root", type=Path, help="project directory")
    scan.add_argument("-o", "--output", type=Path, default=Path("sbom.cdx.json"),
                      help="SBOM output path (default: %(default)s)")
    scan.add_argument("--strategy", type=_strategy, default=(Strategy.LOCK, Strategy.RESOLVE),
                      metavar="LIST", help="comma-separated order of lock, resolve, guess (default: lock,resolve)")
    scan.add_argument("--offline", action="store_true", help="never contact the index; use the cache only")
    scan.add_argument("--as-of", type=_as_of, metavar="TIMESTAMP",
                      help="resolve as the index looked at this RFC 3339 time, e.g. 2024-02-01T00:00:00Z")
    scan.add_argument("--include-optional", action="store_true", help="include optional dependencies (extras)")
    scan.add_argument("--include-dev", action="store_true", help="include development dependencies")
    scan.add_argument("--requirements-name", action="append", metavar="NAME",
                      help="requirements file name to read; repeatable (default: requirements.txt)")
    scan.add_argument("--index-url", metavar="URL", help="package index base URL (default: https://pypi.org)")
    scan.add_argument("--cache-dir", type=Path, metavar="DIR", help="index response cache directory")
    scan.add_argument("--python-version", metavar="X.Y",
                      help="target interpreter for markers and Requires-Python (default: the running interpreter)")
    scan.add_argument("--platform", default="linux", metavar="SYS_PLATFORM",
                      help="target sys_platform for markers (default: %(default)s)")
    scan.add_argument("--allow-prerelease", action="store_true", help="let resolution pick pre-releases")
    scan.add_argument("--fail-on", choices=[s.value for s in Severity], metavar="SEVERITY",
                      help="exit 1 if any diagnostic is at least this severe (info, warning, error)")
    scan.add_argument("--no-deterministic", dest="deterministic", action="store_false",
                      help="add a timestamp and a random serial number")
    scan.add_argument("--format", default="json", metavar="FORMAT", help="output format; only json is supported")
    scan.add_argument("-q", "--quiet", action="store_true", help="do not print diagnostics to stderr")
    return parser


def _sidecar(output: Path) -> Path:
    return output.with_name(output.name + ".diag.json")


def run(args: argparse.Namespace) -> int:
    if args.format.lower() not in FORMATS:
        print(f"pysbom: error: unsupported format {args.format!r}; JSON is the only supported format",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        policy = ResolutionPolicy(
            strategy_order=args.strategy,
            as_of=args.as_of,
            allow_prerelease=args.allow_prerelease,
            include_optional=args.include_optional,
            include_dev=args.include_dev,
            offline=args.offline,
            python_version=args.python_version or current_python(),
            sys_platform=args.platform,
        )
    except ValueError as exc:
        print(f"pysbom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    client = IndexClient(args.index_url, args.cache_dir, offline=args.offline)
    names = args.requirements_name or list(DEFAULT_REQUIREMENTS)
    try:
        result = scan_project(args.root, policy, client, names)
    except (NoMetadataError, NotADirectoryError) as exc:
        print(f"pysbom: {exc}", file=sys.stderr)
        return EXIT_NO_METADATA

    try:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_bytes(result.sbom(args.deterministic))
        _sidecar(args.output).write_bytes(result.report("json"))
    except OSError as exc:
        print(f"pysbom: cannot write output: {exc}", file=sys.stderr)
        return EXIT_NO_METADATA

    diags = result.diagnostics
    if not args.quiet:
        noisy = [d for d in diags if d.severity is not Severity.INFO]
        if noisy:
            sys.stderr.write(emit_diagnostics(noisy, "text").decode("utf-8"))
        print(f"pysbom: wrote {args.output} ({len(result.resolved.components)} components, "
              f"{len(noisy)} warnings/errors)", file=sys.stderr)
    if args.fail_on:
        threshold = Severity(args.fail_on).rank
        if any(d.severity.rank >= threshold for d in diags):
            return EXIT_FAIL_ON
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scan":
        return run(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
