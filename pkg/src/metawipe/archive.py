"""Recursive cleaners for ZIP, TAR (+gzip/bzip2), OOXML and ODF.

Archives are fully rebuilt: members keep their order and (cleaned)
content, while every header field that could carry provenance is forced
to a fixed value.  Output is byte-deterministic: one DEFLATE level, DOS
timestamp 1980-01-01 for ZIP, Unix epoch for TAR and gzip.
"""

from __future__ import annotations

import bz2
import dataclasses
import enum
import io
import struct
import tarfile
import zipfile
import zlib
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

from . import core
from .core import (
    CleanPolicy,
    CleanResult,
    Kind,
    MetadataEntry,
    ParseError,
    ScrubError,
    Status,
    UnknownMemberAction,
    finalize,
    is_inert_text,
    render_binary,
    render_text,
)


class Compression(enum.Enum):
    NONE = "none"
    GZIP = "gzip"
    BZIP2 = "bzip2"


# The ZIP timestamp encoding cannot express 1970; 1980-01-01 00:00:00 is
# the nearest representable value.
DOS_EPOCH = (1980, 1, 1, 0, 0, 0)
DEFLATE_LEVEL = 6


def _utc(ts: float) -> str:
    return datetime.fromtimestamp(int(ts), timezone.utc).strftime("%Y-%m-%d %H:%M:%S")


def _deflate(data: bytes) -> bytes:
    comp = zlib.compressobj(DEFLATE_LEVEL, zlib.DEFLATED, -15)
    return comp.compress(data) + comp.flush()


# ---------------------------------------------------------------------------
# Member recursion (shared by ZIP and TAR)

def _clean_member_content(
    name: str, data: bytes, policy: CleanPolicy, depth: int
) -> tuple[Optional[bytes], list[MetadataEntry], list[str]]:
    """Clean one archive member; returns (content-or-None-if-omitted, entries, warnings)."""
    if is_inert_text(data):
        return data, [], []
    sub_policy = dataclasses.replace(policy, dry_run=False)
    result = core.clean_file(data, name, sub_policy, _depth=depth + 1)
    if result.status is Status.FAILED:
        detail = "; ".join(result.warnings) or "parse failure"
        raise ParseError(f"member {name!r} failed to clean: {detail}")
    if result.status is Status.UNSUPPORTED:
        action = policy.unknown_member_action
        if action is UnknownMemberAction.ABORT:
            raise ParseError(f"unknown member {name!r} (policy: abort)")
        if action is UnknownMemberAction.OMIT:
            return None, [], [f"omitted unknown member {name!r}"]
        return data, [], [f"copied unknown member {name!r} verbatim (not cleaned)"]
    entries = [e.prefixed(name) for e in result.removed]
    warnings = [f"{name}: {w}" for w in result.warnings]
    return result.output, entries, warnings


def _inspect_member(name: str, data: bytes, depth: int) -> list[MetadataEntry]:
    if is_inert_text(data):
        return []
    try:
        entries = core.inspect_file(data, name, _depth=depth + 1)
    except ScrubError:
        return []
    return [e.prefixed(name) for e in entries]


# ---------------------------------------------------------------------------
# ZIP reading / writing

@dataclass
class _ZipMember:
    name: str
    content: bytes
    is_dir: bool
    entries: list[MetadataEntry] = field(default_factory=list)
    method: int = zipfile.ZIP_DEFLATED


def _member_header_entries(info: zipfile.ZipInfo) -> list[MetadataEntry]:
    entries = []
    loc = info.filename
    if tuple(info.date_time) != DOS_EPOCH:
        y, mo, d, h, mi, s = info.date_time
        entries.append(MetadataEntry(
            "ZIP.mtime", f"{y:04d}-{mo:02d}-{d:02d} {h:02d}:{mi:02d}:{s:02d}", loc))
    if info.extra:
        entries.append(MetadataEntry("ZIP.extra", render_binary(len(info.extra)), loc))
    if info.comment:
        entries.append(MetadataEntry(
            "ZIP.comment", render_text(info.comment.decode("utf-8", "replace")), loc))
    canonical_attr = 0x10 if info.is_dir() else 0
    if info.external_attr != canonical_attr:
        entries.append(MetadataEntry(
            "ZIP.external-attributes", f"0x{info.external_attr:08x}", loc))
    if info.internal_attr:
        entries.append(MetadataEntry(
            "ZIP.internal-attributes", f"0x{info.internal_attr:04x}", loc))
    if info.create_system != 0:
        entries.append(MetadataEntry(
            "ZIP.version-made-by", f"system {info.create_system}", loc))
    if info.flag_bits & 0x08:
        entries.append(MetadataEntry("ZIP.data-descriptor", "present", loc))
    return entries


def _read_zip_members(data: bytes) -> tuple[list[_ZipMember], list[MetadataEntry]]:
    """Parse a ZIP into members (original order) plus header metadata entries."""
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise ParseError(f"malformed ZIP: {exc}") from exc
    archive_entries: list[MetadataEntry] = []
    if zf.comment:
        archive_entries.append(MetadataEntry(
            "ZIP.archive-comment",
            render_text(zf.comment.decode("utf-8", "replace")),
            "end of central directory"))
    members: list[_ZipMember] = []
    seen: set[str] = set()
    for info in zf.infolist():
        if info.flag_bits & 0x01:
            raise ParseError(f"encrypted member {info.filename!r}")
        if info.filename in seen:
            raise ParseError(f"duplicate member path {info.filename!r}")
        seen.add(info.filename)
        try:
            content = b"" if info.is_dir() else zf.read(info)
        except (zipfile.BadZipFile, NotImplementedError, zlib.error) as exc:
            raise ParseError(f"cannot read member {info.filename!r}: {exc}") from exc
        members.append(_ZipMember(
            info.filename, content, info.is_dir(), _member_header_entries(info)))
    return members, archive_entries


def _dos_fields() -> tuple[int, int]:
    return 0, 0x21  # time 00:00:00, date 1980-01-01


def _write_zip(members: list[_ZipMember]) -> bytes:
    """Serialize members into a canonical ZIP (no extras, no comments)."""
    out = bytearray()
    central = bytearray()
    dostime, dosdate = _dos_fields()
    count = 0
    for m in members:
        raw_name = m.name.encode("utf-8")
        flags = 0x800 if not m.name.isascii() else 0
        if m.is_dir or m.method == zipfile.ZIP_STORED:
            method, blob = zipfile.ZIP_STORED, m.content
        else:
            method, blob = zipfile.ZIP_DEFLATED, _deflate(m.content)
        crc = zlib.crc32(m.content)
        offset = len(out)
        local = struct.pack(
            "<4sHHHHHIIIHH", b"PK\x03\x04", 20, flags, method,
            dostime, dosdate, crc, len(blob), len(m.content), len(raw_name), 0)
        out += local + raw_name + blob
        ext_attr = 0x10 if m.is_dir else 0
        central += struct.pack(
            "<4sHHHHHHIIIHHHHHII", b"PK\x01\x02", 20, 20, flags, method,
            dostime, dosdate, crc, len(blob), len(m.content),
            len(raw_name), 0, 0, 0, 0, ext_attr, offset)
        central += raw_name
        count += 1
    cd_offset = len(out)
    out += central
    out += struct.pack(
        "<4sHHHHIIH", b"PK\x05\x06", 0, 0, count, count,
        len(central), cd_offset, 0)
    return bytes(out)


# ---------------------------------------------------------------------------
# ZIP cleaning

def clean_zip(data: bytes, policy: Optional[CleanPolicy] = None, *,
              _depth: int = 0) -> CleanResult:
    """Rebuild a ZIP with normalized headers and recursively cleaned members."""
    if policy is None:
        policy = CleanPolicy()
    try:
        members, removed = _read_zip_members(data)
        out_members, member_entries, warnings = _process_members(members, policy, _depth)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    removed = removed + member_entries
    return finalize(data, _write_zip(out_members), removed, warnings, "ZIP.encoding")


def _process_members(
    members: list[_ZipMember], policy: CleanPolicy, depth: int
) -> tuple[list[_ZipMember], list[MetadataEntry], list[str]]:
    out: list[_ZipMember] = []
    entries: list[MetadataEntry] = []
    warnings: list[str] = []
    for m in members:
        entries.extend(m.entries)
        if m.is_dir:
            out.append(_ZipMember(m.name, b"", True))
            continue
        content, sub_entries, sub_warnings = _clean_member_content(
            m.name, m.content, policy, depth)
        entries.extend(sub_entries)
        warnings.extend(sub_warnings)
        if content is None:
            continue
        out.append(_ZipMember(m.name, content, False, method=m.method))
    return out, entries, warnings


def inspect_zip(data: bytes, *, _depth: int = 0) -> list[MetadataEntry]:
    members, entries = _read_zip_members(data)
    kind = core.detect_kind(data).tag
    all_entries = list(entries)
    for m in members:
        all_entries.extend(m.entries)
        if m.is_dir:
            continue
        special = _special_member_entries(kind, m.name, m.content)
        if special is not None:
            all_entries.extend(special)
            continue
        all_entries.extend(_inspect_member(m.name, m.content, _depth))
    return all_entries


def _special_member_entries(kind: Kind, name: str, content: bytes):
    """Entries for office-document members the cleaner removes wholesale."""
    if kind is Kind.OOXML and name.startswith("docProps/"):
        return _docprops_entries(name, content)
    if kind is Kind.ODF:
        if name == "meta.xml":
            return _odf_meta_entries(content)
        if name.startswith("Thumbnails/") and content:
            return [MetadataEntry(
                "ODF.Thumbnails", render_binary(len(content)), name)]
        if name.startswith("Thumbnails/"):
            return []
    return None


# ---------------------------------------------------------------------------
# OOXML

_CT_NS = "http://schemas.openxmlformats.org/package/2006/content-types"
_REL_NS = "http://schemas.openxmlformats.org/package/2006/relationships"


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _docprops_entries(name: str, content: bytes) -> list[MetadataEntry]:
    entries: list[MetadataEntry] = []
    if name.endswith(".xml"):
        try:
            root = ET.fromstring(content)
            for el in root.iter():
                text = (el.text or "").strip()
                if text and len(el) == 0:
                    entries.append(MetadataEntry(
                        f"OOXML.docProps.{_localname(el.tag)}", render_text(text), name))
        except ET.ParseError:
            pass
    if not entries:
        entries.append(MetadataEntry(
            "OOXML.docProps", render_binary(len(content)), name))
    return entries


def _serialize_xml(root: ET.Element, default_ns: str) -> bytes:
    ET.register_namespace("", default_ns)
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True)


def _rewrite_content_types(content: bytes, removed: set[str]) -> bytes:
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise ParseError(f"[Content_Types].xml does not parse: {exc}") from exc
    changed = False
    for el in list(root):
        if _localname(el.tag) == "Override":
            part = el.get("PartName", "").lstrip("/")
            if part in removed:
                root.remove(el)
                changed = True
    return _serialize_xml(root, _CT_NS) if changed else content


def _rewrite_root_rels(content: bytes, removed: set[str]) -> bytes:
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise ParseError(f"_rels/.rels does not parse: {exc}") from exc
    changed = False
    for el in list(root):
        if _localname(el.tag) == "Relationship":
            target = el.get("Target", "").lstrip("/")
            if target in removed:
                root.remove(el)
                changed = True
    return _serialize_xml(root, _REL_NS) if changed else content


def clean_ooxml(data: bytes, policy: Optional[CleanPolicy] = None, *,
                _depth: int = 0) -> CleanResult:
    """clean_zip plus wholesale removal of the docProps/ folder."""
    if policy is None:
        policy = CleanPolicy()
    try:
        members, removed = _read_zip_members(data)
        names = {m.name for m in members}
        if "[Content_Types].xml" not in names:
            raise ParseError("not OOXML: missing [Content_Types].xml")
        removed_paths: set[str] = set()
        kept: list[_ZipMember] = []
        for m in members:
            removed.extend(m.entries)
            m = dataclasses.replace(m, entries=[])
            if m.name.startswith("docProps/"):
                removed_paths.add(m.name)
                if not m.is_dir:
                    removed.extend(_docprops_entries(m.name, m.content))
                continue
            kept.append(m)
        out_members: list[_ZipMember] = []
        warnings: list[str] = []
        for m in kept:
            if m.is_dir:
                out_members.append(_ZipMember(m.name, b"", True))
                continue
            content = m.content
            if m.name == "[Content_Types].xml":
                content = _rewrite_content_types(content, removed_paths)
            elif m.name == "_rels/.rels":
                content = _rewrite_root_rels(content, removed_paths)
            else:
                content, sub_entries, sub_warnings = _clean_member_content(
                    m.name, content, policy, _depth)
                removed.extend(sub_entries)
                warnings.extend(sub_warnings)
                if content is None:
                    continue
            out_members.append(_ZipMember(m.name, content, False))
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    return finalize(data, _write_zip(out_members), removed, warnings, "OOXML.encoding")


# ---------------------------------------------------------------------------
# ODF

_MANIFEST_NS = "urn:oasis:names:tc:opendocument:xmlns:manifest:1.0"


def _odf_meta_entries(content: bytes) -> list[MetadataEntry]:
    entries: list[MetadataEntry] = []
    try:
        root = ET.fromstring(content)
        for el in root.iter():
            text = (el.text or "").strip()
            if text and len(el) == 0:
                entries.append(MetadataEntry(
                    f"ODF.meta.{_localname(el.tag)}", render_text(text), "meta.xml"))
            elif _localname(el.tag) == "document-statistic":
                stats = " ".join(
                    f"{_localname(k)}={v}" for k, v in el.attrib.items())
                if stats:
                    entries.append(MetadataEntry(
                        "ODF.meta.document-statistic", render_text(stats), "meta.xml"))
    except ET.ParseError:
        pass
    if not entries:
        entries.append(MetadataEntry(
            "ODF.meta", render_binary(len(content)), "meta.xml"))
    return entries


def _rewrite_manifest(content: bytes, removed: set[str]) -> bytes:
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise ParseError(f"META-INF/manifest.xml does not parse: {exc}") from exc
    changed = False
    full_path = f"{{{_MANIFEST_NS}}}full-path"
    for el in list(root):
        if _localname(el.tag) == "file-entry":
            path = el.get(full_path, "")
            if path in removed or (path.endswith("/") and any(
                    r.startswith(path) for r in removed)):
                root.remove(el)
                changed = True
    if not changed:
        return content
    ET.register_namespace("manifest", _MANIFEST_NS)
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True)


def clean_odf(data: bytes, policy: Optional[CleanPolicy] = None, *,
              _depth: int = 0) -> CleanResult:
    """clean_zip plus removal of meta.xml and Thumbnails/.

    The mimetype member stays first and uncompressed so the cleaned file
    is still recognizable as ODF.
    """
    if policy is None:
        policy = CleanPolicy()
    try:
        members, removed = _read_zip_members(data)
        names = {m.name for m in members}
        if "META-INF/manifest.xml" not in names:
            raise ParseError("not ODF: missing META-INF/manifest.xml")
        removed_paths: set[str] = set()
        kept: list[_ZipMember] = []
        for m in members:
            removed.extend(m.entries)
            m = dataclasses.replace(m, entries=[])
            if m.name == "meta.xml":
                removed_paths.add(m.name)
                removed.extend(_odf_meta_entries(m.content))
                continue
            if m.name == "Thumbnails" or m.name.startswith("Thumbnails/"):
                removed_paths.add(m.name)
                if not m.is_dir and m.content:
                    removed.append(MetadataEntry(
                        "ODF.Thumbnails", render_binary(len(m.content)), m.name))
                continue
            kept.append(m)
        out_members: list[_ZipMember] = []
        warnings: list[str] = []
        for m in kept:
            if m.is_dir:
                out_members.append(_ZipMember(m.name, b"", True))
                continue
            content = m.content
            method = zipfile.ZIP_DEFLATED
            if m.name == "mimetype":
                method = zipfile.ZIP_STORED
            elif m.name == "META-INF/manifest.xml":
                content = _rewrite_manifest(content, removed_paths)
            else:
                content, sub_entries, sub_warnings = _clean_member_content(
                    m.name, content, policy, _depth)
                removed.extend(sub_entries)
                warnings.extend(sub_warnings)
                if content is None:
                    continue
            out_members.append(_ZipMember(m.name, content, False, method=method))
        # mimetype must lead the archive for magic-based detection.
        out_members.sort(key=lambda m: 0 if m.name == "mimetype" else 1)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    return finalize(data, _write_zip(out_members), removed, warnings, "ODF.encoding")


# ---------------------------------------------------------------------------
# gzip wrapper

_GZIP_OS_UNKNOWN = 255


def _gzip_header_entries(data: bytes) -> list[MetadataEntry]:
    if len(data) < 10 or data[:2] != b"\x1f\x8b":
        raise ParseError("not a gzip stream", 0)
    if data[2] != 8:
        raise ParseError(f"unsupported gzip compression method {data[2]}", 2)
    flags = data[3]
    (mtime,) = struct.unpack("<I", data[4:8])
    xfl, os_byte = data[8], data[9]
    entries = []
    pos = 10
    if mtime:
        entries.append(MetadataEntry("gzip.MTIME", _utc(mtime), "gzip header"))
    if xfl:
        entries.append(MetadataEntry("gzip.XFL", str(xfl), "gzip header"))
    if os_byte != _GZIP_OS_UNKNOWN:
        entries.append(MetadataEntry("gzip.OS", str(os_byte), "gzip header"))
    if flags & 0x04:  # FEXTRA
        (xlen,) = struct.unpack("<H", data[pos : pos + 2])
        entries.append(MetadataEntry("gzip.FEXTRA", render_binary(xlen), "gzip header"))
        pos += 2 + xlen
    if flags & 0x08:  # FNAME
        end = data.find(b"\x00", pos)
        entries.append(MetadataEntry(
            "gzip.FNAME", data[pos:end].decode("latin-1", "replace"), "gzip header"))
        pos = end + 1
    if flags & 0x10:  # FCOMMENT
        end = data.find(b"\x00", pos)
        entries.append(MetadataEntry(
            "gzip.FCOMMENT",
            render_text(data[pos:end].decode("latin-1", "replace")), "gzip header"))
        pos = end + 1
    if flags & 0x02:
        entries.append(MetadataEntry("gzip.FHCRC", "present", "gzip header"))
    return entries


def _gzip_wrap(payload: bytes) -> bytes:
    header = b"\x1f\x8b\x08\x00" + b"\x00\x00\x00\x00" + b"\x00" + bytes([_GZIP_OS_UNKNOWN])
    return header + _deflate(payload) + struct.pack(
        "<II", zlib.crc32(payload), len(payload) & 0xFFFFFFFF)


# ---------------------------------------------------------------------------
# TAR

_PAX_REGENERATED = {"path", "linkpath", "size"}
_TAR_RECORD = 10240


@dataclass
class _TarMember:
    info: tarfile.TarInfo
    content: bytes
    entries: list[MetadataEntry] = field(default_factory=list)


def _normalized_mode(info: tarfile.TarInfo) -> int:
    if info.isdir():
        return 0o755
    if info.issym():
        return 0o777
    return 0o755 if info.mode & 0o111 else 0o644


def _tar_member_entries(info: tarfile.TarInfo) -> list[MetadataEntry]:
    entries = []
    loc = info.name
    if info.mtime:
        entries.append(MetadataEntry("TAR.mtime", _utc(info.mtime), loc))
    if info.uid:
        entries.append(MetadataEntry("TAR.uid", str(info.uid), loc))
    if info.gid:
        entries.append(MetadataEntry("TAR.gid", str(info.gid), loc))
    if info.uname:
        entries.append(MetadataEntry("TAR.uname", info.uname, loc))
    if info.gname:
        entries.append(MetadataEntry("TAR.gname", info.gname, loc))
    if info.mode != _normalized_mode(info):
        entries.append(MetadataEntry("TAR.mode", f"0o{info.mode:o}", loc))
    for key, value in sorted(info.pax_headers.items()):
        if key in _PAX_REGENERATED:
            continue
        entries.append(MetadataEntry(f"TAR.pax.{key}", render_text(str(value)), loc))
    return entries


def _read_tar_members(data: bytes, compression: Compression):
    """Decompress as needed and parse; returns (wrapper entries, members)."""
    wrapper_entries: list[MetadataEntry] = []
    payload = data
    if compression is Compression.GZIP:
        wrapper_entries = _gzip_header_entries(data)
        try:
            import gzip
            payload = gzip.decompress(data)
        except (OSError, EOFError, zlib.error) as exc:
            raise ParseError(f"gzip decompression failed: {exc}") from exc
    elif compression is Compression.BZIP2:
        try:
            payload = bz2.decompress(data)
        except (OSError, ValueError) as exc:
            raise ParseError(f"bzip2 decompression failed: {exc}") from exc
    try:
        tf = tarfile.open(fileobj=io.BytesIO(payload), mode="r:")
        infos = tf.getmembers()
    except tarfile.TarError as exc:
        raise ParseError(f"malformed tar: {exc}") from exc
    members = []
    for info in infos:
        content = b""
        if info.isreg():
            fobj = tf.extractfile(info)
            content = fobj.read() if fobj else b""
        members.append(_TarMember(info, content, _tar_member_entries(info)))
    return wrapper_entries, members


def _write_tar(members: list[_TarMember], contents: list[bytes]) -> bytes:
    out = io.BytesIO()
    for m, content in zip(members, contents):
        info = tarfile.TarInfo(m.info.name)
        info.type = m.info.type
        info.size = len(content)
        info.mtime = 0
        info.uid = info.gid = 0
        info.uname = info.gname = ""
        info.mode = _normalized_mode(m.info)
        info.linkname = m.info.linkname
        try:
            buf = info.tobuf(tarfile.USTAR_FORMAT, "utf-8", "strict")
        except ValueError:
            # Name too long for ustar; GNU long-name entries are generated.
            buf = info.tobuf(tarfile.GNU_FORMAT, "utf-8", "strict")
        out.write(buf)
        out.write(content)
        pad = -len(content) % 512
        out.write(b"\x00" * pad)
    out.write(b"\x00" * 1024)
    out.write(b"\x00" * (-out.tell() % _TAR_RECORD))
    return out.getvalue()


def clean_tar(data: bytes, compression: Compression,
              policy: Optional[CleanPolicy] = None, *, _depth: int = 0) -> CleanResult:
    """Rewrite a tar stream with epoch timestamps and zeroed ownership."""
    if policy is None:
        policy = CleanPolicy()
    try:
        removed, members = _read_tar_members(data, compression)
        warnings: list[str] = []
        out_members: list[_TarMember] = []
        contents: list[bytes] = []
        for m in members:
            removed.extend(m.entries)
            content = m.content
            if m.info.isreg():
                content, sub_entries, sub_warnings = _clean_member_content(
                    m.info.name, content, policy, _depth)
                removed.extend(sub_entries)
                warnings.extend(sub_warnings)
                if content is None:
                    continue
            out_members.append(m)
            contents.append(content)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    payload = _write_tar(out_members, contents)
    if compression is Compression.GZIP:
        out = _gzip_wrap(payload)
        key = "TARGZ.encoding"
    elif compression is Compression.BZIP2:
        out = bz2.compress(payload, 9)
        key = "TARBZ2.encoding"
    else:
        out = payload
        key = "TAR.encoding"
    return finalize(data, out, removed, warnings, key)


def inspect_tar(data: bytes, compression: Compression, *,
                _depth: int = 0) -> list[MetadataEntry]:
    wrapper_entries, members = _read_tar_members(data, compression)
    entries = list(wrapper_entries)
    for m in members:
        entries.extend(m.entries)
        if m.info.isreg():
            entries.extend(_inspect_member(m.info.name, m.content, _depth))
    return entries
