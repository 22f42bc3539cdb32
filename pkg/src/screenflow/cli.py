"""Researcher command line spanning design, fielding, and collection.

    screenflow validate  SPEC [--format structured]
    screenflow generate  TEMPLATE --participants FILE --seed SEED --out DIR
    screenflow print     SPEC --out FILE.html
    screenflow serve     --config FILE.json
    screenflow ingest    CSV [CSV ...] --out FILE.csv [--spec-id --spec-version]
    screenflow report    CSV [CSV ...] --out DIR [--spec-id --spec-version]
    screenflow scales    --out DIR

Exit codes: 0 success, 1 validation/data error, 2 I/O error.
Every command is a thin composition of library calls; no behavior lives
only here.
"""

from __future__ import annotations

import argparse
import glob as globlib
import json
import sys
from pathlib import Path

from . import construct, export, printing, qspec, scales
from .diagnostics import Diagnostic, Severity
from .diagnostics import errors as diag_errors

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _parse_seed(text: str) -> int:
    if text.lower().startswith("0x"):
        return int(text, 16)
    return int(text, 10)


def _emit_diagnostics(diags: list[Diagnostic], structured: bool) -> None:
    for d in diags:
        if structured:
            print(json.dumps(d.to_json(), sort_keys=True), file=sys.stderr)
        else:
            print(d.format(), file=sys.stderr)


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise SystemExit2(f"cannot read {path}: {exc}") from exc


class SystemExit2(Exception):
    """I/O failure: exits with code 2."""


def cmd_validate(args: argparse.Namespace) -> int:
    result = qspec.parse_spec(_read_bytes(args.spec))
    _emit_diagnostics(result.diagnostics, args.format == "structured")
    return EXIT_OK if result.spec is not None else EXIT_VALIDATION


def cmd_generate(args: argparse.Namespace) -> int:
    parsed = construct.parse_template(_read_bytes(args.template))
    _emit_diagnostics(parsed.diagnostics, False)
    if parsed.template is None:
        return EXIT_VALIDATION
    try:
        participants = [line.strip() for line
                        in Path(args.participants).read_text("utf-8").splitlines()
                        if line.strip() and not line.strip().startswith("#")]
    except OSError as exc:
        print(f"cannot read participants file: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        plan = construct.plan_batch(parsed.template, participants,
                                    _parse_seed(args.seed))
    except construct.ConstructError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for entry in plan.entries:
            name = "".join(c if c.isalnum() or c in "-_." else "_"
                           for c in entry.participant_id)
            (out_dir / f"{name}.json").write_bytes(qspec.serialize_spec(entry.spec))
        (out_dir / "manifest.csv").write_bytes(plan.manifest_csv())
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(plan.entries)} questionnaires + manifest to {out_dir}")
    return EXIT_OK


def cmd_print(args: argparse.Namespace) -> int:
    result = qspec.parse_spec(_read_bytes(args.spec))
    _emit_diagnostics(result.diagnostics, False)
    if result.spec is None:
        return EXIT_VALIDATION
    spec_dir = Path(args.spec).resolve().parent

    def load_asset(uri: str) -> bytes | None:
        try:
            return (spec_dir / uri).read_bytes()
        except OSError:
            return None

    printed = printing.print_layout(result.spec, load_asset)
    _emit_diagnostics(printed.diagnostics, False)
    try:
        Path(args.out).write_text(printed.document, "utf-8")
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.out} ({printing.page_count(result.spec)} pages)")
    return EXIT_OK


def _collect_documents(patterns: list[str], spec_id: str,
                       spec_version: str) -> tuple[list[export.ExportDocument], int]:
    paths: list[str] = []
    for pattern in patterns:
        if any(c in pattern for c in "*?["):
            # a glob may legitimately match nothing (zero collected files)
            paths.extend(sorted(globlib.glob(pattern)))
        else:
            paths.append(pattern)
    docs = []
    for path in paths:
        data = _read_bytes(path)
        try:
            doc = export.from_csv(data)
        except export.ExportError as exc:
            print(f"{path}: {exc.code}: {exc}", file=sys.stderr)
            return [], EXIT_VALIDATION
        for problem in doc.problems:
            print(f"{path}:{problem.line}: {problem.code}: {problem.message}",
                  file=sys.stderr)
        if spec_id:
            doc.rows = [r for r in doc.rows if r[2] == spec_id]
        if spec_version:
            doc.rows = [r for r in doc.rows if r[3] == spec_version]
        docs.append(doc)
    return docs, EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    docs, status = _collect_documents(args.files, args.spec_id, args.spec_version)
    if status != EXIT_OK:
        return status
    try:
        table = export.aggregate(docs)
    except export.ExportError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        Path(args.out).write_bytes(table.to_csv())
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.out} ({len(table.rows)} sessions)")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from . import report  # defers the matplotlib import to this command

    docs, status = _collect_documents(args.files, args.spec_id, args.spec_version)
    if status != EXIT_OK:
        return status
    try:
        table = export.aggregate(docs)
    except export.ExportError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        csv_path, figures = report.write_report(table, Path(args.out))
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {csv_path} and {len(figures)} figures")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from . import server

    try:
        config = server.load_config(Path(args.config))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"bad config: {exc}", file=sys.stderr)
        return EXIT_IO
    server.run(config)
    return EXIT_OK


def cmd_scales(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for variant in scales.BUILTIN_VARIANTS:
            (out_dir / f"{variant}.svg").write_text(
                scales.render_builtin(variant), "utf-8")
    except OSError as exc:
        print(f"cannot write scales: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(scales.BUILTIN_VARIANTS)} scale drawings to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screenflow",
        description="questionnaire experiment toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a questionnaire document")
    p.add_argument("spec")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="instantiate per-participant questionnaires")
    p.add_argument("template")
    p.add_argument("--participants", required=True,
                   help="text file, one participant id per line")
    p.add_argument("--seed", required=True, help="master seed (decimal or 0x hex)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("print", help="render a printable HTML document")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_print)

    p = sub.add_parser("serve", help="run the distribution/collection server")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ingest", help="aggregate collected CSV files")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--spec-id", default="")
    p.add_argument("--spec-version", default="")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("report", help="aggregate CSV plus summary figures")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--spec-id", default="")
    p.add_argument("--spec-version", default="")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("scales", help="write the built-in scale SVG files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scales)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
