"""Export CLI: convert upstream dumps to canonical egosocial files.

    egosocial-export lam     --in dump.json --format lam-json-v1 --out scores.jsonl
    egosocial-export quality --in fan.csv   --format fan-csv-v1  --out quality.jsonl
    egosocial-export ttm     --in utt.csv   --format ttm-csv-v1  --out segments.jsonl

A manifest JSON is written beside each output (<out>.manifest.json).
Exit codes: 0 success, 1 unknown format / usage error, 2 missing input file,
3 unparseable or inconsistent input.
"""

from __future__ import annotations

import argparse
import sys

from .convert import convert_lam_predictions, convert_quality_scores, convert_ttm_segments
from .errors import InputError, UnknownFormatError
from .formats import LAM_FORMATS, QUALITY_FORMATS, TTM_FORMATS


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="egosocial-export", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="role", required=True, parser_class=_Parser)
    for role, formats, default in (
        ("lam", LAM_FORMATS, None),
        ("quality", QUALITY_FORMATS, "fan-csv-v1"),
        ("ttm", TTM_FORMATS, "ttm-csv-v1"),
    ):
        p = sub.add_parser(role, help=f"convert {role} dumps")
        p.add_argument("--in", dest="input", required=True, metavar="PATH")
        p.add_argument(
            "--format",
            dest="format_id",
            required=default is None,
            default=default,
            choices=list(formats),
        )
        p.add_argument("--out", required=True, metavar="PATH")
        p.add_argument(
            "--source-model",
            default="unspecified",
            help="free-text identity of the model that produced the dump",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.role == "lam":
            manifest = convert_lam_predictions(
                args.input, args.format_id, args.out, source_model=args.source_model
            )
        elif args.role == "quality":
            manifest = convert_quality_scores(
                args.input, args.out, format_id=args.format_id, source_model=args.source_model
            )
        else:
            manifest = convert_ttm_segments(
                args.input, args.out, format_id=args.format_id, source_model=args.source_model
            )
    except UnknownFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing input file: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for warning in manifest.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"wrote {manifest.records_out} record(s) to {manifest.outputs[0]}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
