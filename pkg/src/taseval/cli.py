"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .exceptions import TasEvalError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; route it to our usage code instead."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _cmd_validate(args):
    from .corpus.manifest import import_csv_manifest, parse_manifest, validate_manifest

    loader = import_csv_manifest if args.manifest.lower().endswith(".csv") else parse_manifest
    manifest = loader(args.manifest)
    violations = validate_manifest(manifest)
    for v in violations:
        print(json.dumps(v.as_dict(), ensure_ascii=False))
    print(f"{len(manifest)} entries, {len(violations)} violation(s)", file=sys.stderr)
    return EXIT_DATA if violations else EXIT_OK


def _cmd_synth(args):
    from .corpus.synth import load_config, synth_variations

    cfg = load_config(args.config)
    manifest, _ = synth_variations(cfg, args.output)
    print(f"wrote {len(manifest)} pairs to {args.output}", file=sys.stderr)
    return EXIT_OK


def _cmd_eval(args):
    from .corpus.manifest import import_csv_manifest, parse_manifest
    from .corpus.runner import format_summary, parse_extractor, read_transcripts, run_eval

    try:
        parse_extractor(args.extractor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    loader = import_csv_manifest if args.manifest.lower().endswith(".csv") else parse_manifest
    manifest = loader(args.manifest)
    transcripts = read_transcripts(args.ocr) if args.ocr else None
    mode = "WITH_GT" if args.mode == "gt" else "GT_FREE"
    report = run_eval(manifest, mode, args.extractor, args.output, transcripts, args.workers, args.template)
    print(format_summary(report.summary))
    return EXIT_OK


def _cmd_correlate(args):
    from .corpus.correlate import correlate_files

    table = correlate_files(args.report, args.ratings, args.output)
    for kind, name, target, value, n, note in table:
        shown = "undefined" if value is None else f"{value:.4f}"
        print(f"{kind:<9} {name:<6} {target:<11} {shown:>9}  n={n} {note}".rstrip())
    return EXIT_OK


def _cmd_tas(args):
    from .corpus.runner import parse_extractor
    from .image import read_image
    from .style.glyphs import load_template
    from .tas import tas

    try:
        mode, ext_dir = parse_extractor(args.extractor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    a = read_image(args.image_a)
    b = read_image(args.image_b)
    report = tas(a, b, args.text_b, load_template(args.template), mode, ext_dir, args.pair_id)
    print(json.dumps(report.as_dict(), indent=1, ensure_ascii=False))
    return EXIT_OK


def _cmd_fd(args):
    from .simmetrics import frechet_distance, read_feature_set

    print(repr(frechet_distance(read_feature_set(args.features_a), read_feature_set(args.features_b))))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="taseval", description="Text appearance similarity and scene-text editing metrics.")
    p.add_argument("--version", action="version", version=f"taseval {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a pair manifest against the corpus filter rules")
    s.add_argument("manifest")
    s.set_defaults(func=_cmd_validate)

    s = sub.add_parser("synth", help="generate controlled-variation pairs")
    s.add_argument("config", help="VariationConfig JSON")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("eval", help="score every pair in a manifest")
    s.add_argument("manifest")
    s.add_argument("--mode", choices=("gt", "gtfree"), default="gtfree")
    s.add_argument("--extractor", default="classical", help="classical or external:<dir>")
    s.add_argument("--ocr", help="transcripts TSV: pair_id<TAB>side<TAB>text")
    s.add_argument("--template", default="sans", help="glyph atlas for renders (default: sans)")
    s.add_argument("--workers", type=int, default=None, help="worker processes (default: $TASEVAL_THREADS or 1)")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=_cmd_eval)

    s = sub.add_parser("correlate", help="Spearman and ICC(3,k) against human ratings")
    s.add_argument("report")
    s.add_argument("ratings")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=_cmd_correlate)

    s = sub.add_parser("tas", help="score one image pair and print the report as JSON")
    s.add_argument("image_a")
    s.add_argument("image_b")
    s.add_argument("--text-b", required=True)
    s.add_argument("--template", default="sans")
    s.add_argument("--extractor", default="classical", help="classical or external:<dir>")
    s.add_argument("--pair-id", default=None, help="file stem for external style planes")
    s.set_defaults(func=_cmd_tas)

    s = sub.add_parser("fd", help="Frechet distance between two feature files (FSET or CSV)")
    s.add_argument("features_a")
    s.add_argument("features_b")
    s.set_defaults(func=_cmd_fd)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "workers", None) is not None and args.workers < 1:
            raise UsageError("--workers must be >= 1")
        if args.command == "tas" and args.extractor != "classical" and args.pair_id is None:
            raise UsageError("--pair-id is required with an external extractor")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TasEvalError, ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
