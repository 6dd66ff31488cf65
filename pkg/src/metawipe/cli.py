"""Command-line interface: list, clean and check.

Exit codes: 0 = every file clean(ed), 1 = something failed, was
unsupported, or (for check) carried removable metadata, 2 = usage or I/O
error before any file was processed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import core
from .core import Category, CleanPolicy, Status, UnknownMemberAction


def _collect_files(paths: list[str], recursive: bool) -> tuple[list[Path], int]:
    """Expand arguments to files in deterministic lexicographic order.

    Returns (files as (path, base-for-relative-output) pairs, error count).
    """
    files: list[tuple[Path, Path]] = []
    errors = 0
    for raw in sorted(paths):
        p = Path(raw)
        if p.is_dir():
            if not recursive:
                print(f"{p}: is a directory (use --recursive)", file=sys.stderr)
                errors += 1
                continue
            for sub in sorted(p.rglob("*")):
                if sub.is_file():
                    files.append((sub, p))
        elif p.is_file():
            files.append((p, p.parent))
        else:
            print(f"{p}: no such file", file=sys.stderr)
            errors += 1
    return files, errors


def _read(path: Path):
    try:
        return path.read_bytes()
    except OSError as exc:
        print(f"{path}: cannot read: {exc}", file=sys.stderr)
        return None


def cmd_list(args) -> int:
    files, errors = _collect_files(args.paths, args.recursive)
    code = 1 if errors else 0
    for path, _base in files:
        data = _read(path)
        if data is None:
            code = 1
            continue
        try:
            entries = core.inspect_file(data, path.name)
        except core.UnsupportedFormatError:
            print(f"{path}: unsupported format", file=sys.stderr)
            code = 1
            continue
        except core.ScrubError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            code = 1
            continue
        if args.json:
            print(json.dumps({
                "file": str(path),
                "entries": [
                    {"key": e.key, "value": e.value,
                     "category": e.category.value, "location": e.location}
                    for e in entries
                ],
            }, ensure_ascii=False))
        else:
            print(f"{path}:")
            if entries:
                for e in entries:
                    print(f"  {e.key}: {e.value}")
            else:
                print("  (clean)")
    return code


def _output_path(path: Path, base: Path, args) -> Path:
    if args.in_place:
        return path
    if args.output_dir:
        rel = path.relative_to(base)
        return Path(args.output_dir) / rel
    stem, suffix = path.stem, path.suffix
    return path.with_name(f"{stem}.cleaned{suffix}" if suffix else f"{stem}.cleaned")


def _write_atomic(target: Path, data: bytes, normalize_times: bool):
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        if normalize_times:
            os.utime(tmp, (0, 0))
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def cmd_clean(args) -> int:
    if args.in_place and args.output_dir:
        print("--in-place and --output-dir are mutually exclusive", file=sys.stderr)
        return 2
    policy = CleanPolicy(
        unknown_member_action=UnknownMemberAction(args.unknown_members),
        normalize_fs_times=args.normalize_times,
        dry_run=args.dry_run,
    )
    files, errors = _collect_files(args.paths, args.recursive)
    code = 1 if errors else 0
    for path, base in files:
        data = _read(path)
        if data is None:
            code = 1
            continue
        result = core.clean_file(data, path.name, policy)
        for warning in result.warnings:
            print(f"{path}: warning: {warning}", file=sys.stderr)
        if result.status is Status.FAILED:
            reason = result.warnings[0] if result.warnings else "parse failure"
            print(f"{path}: FAILED: {reason}")
            code = max(code, 1)
            continue
        if result.status is Status.UNSUPPORTED:
            print(f"{path}: unsupported")
            code = max(code, 1)
            continue
        if args.dry_run:
            label = ("cleaned" if result.status is Status.CLEANED else "already clean")
            print(f"{path}: {label} ({len(result.removed)} items, dry run)")
            for e in result.removed:
                print(f"  {e.key}: {e.value}")
            continue
        if result.status is Status.ALREADY_CLEAN:
            print(f"{path}: already clean")
            if args.output_dir:  # mirror mode still produces the file
                target = _output_path(path, base, args)
                _write_atomic(target, result.output, policy.normalize_fs_times)
            continue
        target = _output_path(path, base, args)
        _write_atomic(target, result.output, policy.normalize_fs_times)
        print(f"{path}: cleaned ({len(result.removed)} items)")
    return code


def cmd_check(args) -> int:
    files, errors = _collect_files(args.paths, args.recursive)
    code = 1 if errors else 0
    for path, _base in files:
        data = _read(path)
        if data is None:
            code = 1
            continue
        try:
            entries = core.inspect_file(data, path.name)
        except core.ScrubError as exc:
            print(f"{path}: {exc}")
            code = 1
            continue
        dirty = [e for e in entries
                 if e.category in (Category.CONTEXTUAL, Category.UNKNOWN)]
        if dirty:
            first = dirty[0]
            print(f"{path}: {first.key}: {first.value}")
            code = 1
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metawipe",
        description="Inspect and remove metadata from common file formats.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list metadata found in files")
    p_list.add_argument("paths", nargs="+")
    p_list.add_argument("--json", action="store_true",
                        help="one JSON object per line instead of human output")
    p_list.add_argument("--recursive", action="store_true")
    p_list.set_defaults(func=cmd_list)

    p_clean = sub.add_parser("clean", help="rewrite files with metadata removed")
    p_clean.add_argument("paths", nargs="+")
    p_clean.add_argument("--in-place", action="store_true",
                         help="replace files atomically instead of writing "
                              "<name>.cleaned.<ext>")
    p_clean.add_argument("--output-dir", metavar="DIR",
                         help="write cleaned files under DIR")
    p_clean.add_argument("--dry-run", action="store_true",
                         help="report what would be removed, write nothing")
    p_clean.add_argument("--unknown-members", choices=["abort", "omit", "copy"],
                         default="abort",
                         help="what to do with unrecognized archive members")
    p_clean.add_argument("--normalize-times", action="store_true",
                         help="set the output file's mtime to the Unix epoch")
    p_clean.add_argument("--recursive", action="store_true")
    p_clean.set_defaults(func=cmd_clean)

    p_check = sub.add_parser("check", help="exit non-zero if any file carries "
                                           "removable metadata")
    p_check.add_argument("paths", nargs="+")
    p_check.add_argument("--recursive", action="store_true")
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
