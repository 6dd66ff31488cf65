"""Format detection, cleaning policy and dispatch.

Everything here operates on in-memory byte strings and is a pure function
of its inputs: no clocks, no randomness, no filesystem access.  The policy
is uniform across formats: any field that is not required for the file to
decode is deleted; fields that cannot be deleted are forced to a fixed
neutral value (0, epoch, or the empty string).
"""

from __future__ import annotations

import dataclasses
import enum
import io
import zipfile
from dataclasses import dataclass, field
from typing import Optional


class ScrubError(Exception):
    """Base class for all errors raised by this library."""


class UnsupportedFormatError(ScrubError):
    """The input is not one of the supported container formats."""


class ParseError(ScrubError):
    """The input claims to be a supported format but does not parse."""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} @0x{offset:04x}"
        super().__init__(message)
        self.offset = offset


class Kind(enum.Enum):
    PNG = "png"
    JPEG = "jpeg"
    ZIP = "zip"
    TAR = "tar"
    TAR_GZ = "tar.gz"
    TAR_BZ2 = "tar.bz2"
    OOXML = "ooxml"
    ODF = "odf"
    MP3 = "mp3"
    OGG_VORBIS = "ogg"
    FLAC = "flac"
    PDF = "pdf"
    UNKNOWN = "unknown"


class Confidence(enum.Enum):
    MAGIC = "magic"
    EXTENSION_ONLY = "extension-only"


@dataclass(frozen=True)
class FileKind:
    tag: Kind
    confidence: Confidence


class Category(enum.Enum):
    CONTEXTUAL = "contextual"
    STRUCTURAL_REQUIRED = "structural-required"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class MetadataEntry:
    """One discovered metadata field."""

    key: str
    value: str
    location: str
    category: Category = Category.CONTEXTUAL

    def prefixed(self, member: str) -> "MetadataEntry":
        """Relocate this entry under an archive member path."""
        loc = f"{member} ▸ {self.location}" if self.location else member
        return dataclasses.replace(self, location=loc)


class UnknownMemberAction(enum.Enum):
    ABORT = "abort"
    OMIT = "omit"
    COPY_VERBATIM = "copy"


@dataclass(frozen=True)
class CleanPolicy:
    unknown_member_action: UnknownMemberAction = UnknownMemberAction.ABORT
    normalize_fs_times: bool = False
    dry_run: bool = False


class Status(enum.Enum):
    CLEANED = "cleaned"
    ALREADY_CLEAN = "already-clean"
    UNSUPPORTED = "unsupported"
    FAILED = "failed"


@dataclass(frozen=True)
class CleanResult:
    status: Status
    output: Optional[bytes] = None
    removed: list[MetadataEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class FieldKind(enum.Enum):
    NUMERIC = "numeric"
    TIMESTAMP = "timestamp"
    TEXT = "text"


@dataclass(frozen=True)
class FieldValue:
    """A mandatory-by-structure field awaiting neutralization."""

    kind: FieldKind
    value: object

    @classmethod
    def numeric(cls, n: int) -> "FieldValue":
        return cls(FieldKind.NUMERIC, int(n))

    @classmethod
    def timestamp(cls, seconds: int) -> "FieldValue":
        return cls(FieldKind.TIMESTAMP, int(seconds))

    @classmethod
    def text(cls, s: str) -> "FieldValue":
        return cls(FieldKind.TEXT, s)


def anonymize_field(v: FieldValue) -> FieldValue:
    """Force a structurally required field to its neutral value.

    Numbers become 0, timestamps become the Unix epoch, strings become
    empty.  Deliberately never substitutes random or plausible-looking
    values: fabricated data would itself identify the tool that made it.
    """
    if v.kind is FieldKind.NUMERIC:
        return FieldValue.numeric(0)
    if v.kind is FieldKind.TIMESTAMP:
        return FieldValue.timestamp(0)
    return FieldValue.text("")


MAX_VALUE_CHARS = 256


def render_text(s: str) -> str:
    """Human rendering of a text value, truncated for display."""
    if len(s) > MAX_VALUE_CHARS:
        return s[:MAX_VALUE_CHARS] + f"... ({len(s)} chars total)"
    return s


def render_binary(n: int) -> str:
    return f"(binary data {n} bytes)"


PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

_ODF_MIME_PREFIX = b"application/vnd.oasis.opendocument"


def _mpeg_sync_at(data: bytes, pos: int) -> bool:
    """True when `data[pos:]` starts with a plausible MPEG audio header."""
    if pos + 4 > len(data):
        return False
    b0, b1, b2, _ = data[pos : pos + 4]
    if b0 != 0xFF or (b1 & 0xE0) != 0xE0:
        return False
    version = (b1 >> 3) & 0x03
    layer = (b1 >> 1) & 0x03
    bitrate = (b2 >> 4) & 0x0F
    samplerate = (b2 >> 2) & 0x03
    return version != 1 and layer != 0 and bitrate not in (0, 15) and samplerate != 3


def _syncsafe(raw: bytes) -> int:
    n = 0
    for b in raw:
        n = (n << 7) | (b & 0x7F)
    return n


def _refine_zip(data: bytes) -> Kind:
    """Distinguish OOXML and ODF from a plain ZIP by peeking members."""
    try:
        with zipfile.ZipFile(io.BytesIO(data)) as zf:
            names = zf.namelist()
            if not names:
                return Kind.ZIP
            if names[0] == "mimetype":
                body = zf.read("mimetype")
                if body.startswith(_ODF_MIME_PREFIX):
                    return Kind.ODF
            if "[Content_Types].xml" in names:
                return Kind.OOXML
    except Exception:
        pass
    return Kind.ZIP


def detect_kind(data: bytes, name_hint: Optional[str] = None) -> FileKind:
    """Sniff the container format from content; extensions only break ties."""
    if data.startswith(PNG_SIGNATURE):
        return FileKind(Kind.PNG, Confidence.MAGIC)
    if data.startswith(b"\xff\xd8\xff"):
        return FileKind(Kind.JPEG, Confidence.MAGIC)
    if data.startswith(b"PK\x03\x04") or data.startswith(b"PK\x05\x06"):
        return FileKind(_refine_zip(data), Confidence.MAGIC)
    if data.startswith(b"\x1f\x8b"):
        return FileKind(Kind.TAR_GZ, Confidence.MAGIC)
    if data.startswith(b"BZh"):
        return FileKind(Kind.TAR_BZ2, Confidence.MAGIC)
    if len(data) >= 262 and data[257:262] == b"ustar":
        return FileKind(Kind.TAR, Confidence.MAGIC)
    if data.startswith(b"fLaC"):
        return FileKind(Kind.FLAC, Confidence.MAGIC)
    if data.startswith(b"OggS"):
        return FileKind(Kind.OGG_VORBIS, Confidence.MAGIC)
    if data.startswith(b"%PDF-"):
        return FileKind(Kind.PDF, Confidence.MAGIC)
    if data.startswith(b"ID3") and len(data) >= 10:
        # An ID3v2 tag may wrap either an MP3 or a FLAC stream.
        size = _syncsafe(data[6:10])
        total = 10 + size + (10 if data[5] & 0x10 else 0)
        if data[total : total + 4] == b"fLaC":
            return FileKind(Kind.FLAC, Confidence.MAGIC)
        return FileKind(Kind.MP3, Confidence.MAGIC)
    if _mpeg_sync_at(data, 0):
        return FileKind(Kind.MP3, Confidence.MAGIC)
    # Pre-POSIX tar has no magic at all; fall back to the extension.
    if name_hint and name_hint.lower().endswith(".tar") and len(data) >= 512:
        return FileKind(Kind.TAR, Confidence.EXTENSION_ONLY)
    return FileKind(Kind.UNKNOWN, Confidence.EXTENSION_ONLY)


# Nested archives deeper than this fail the clean (zip-bomb defense).
MAX_RECURSION_DEPTH = 8


def is_inert_text(data: bytes) -> bool:
    """Plain text carries no embedded metadata container we could parse.

    Text members of archives are treated as content and copied through
    rather than triggering the unknown-member policy.
    """
    if not data:
        return True
    if b"\x00" in data:
        return False
    try:
        data.decode("utf-8")
    except UnicodeDecodeError:
        return False
    return True


def clean_file(
    data: bytes,
    name_hint: Optional[str] = None,
    policy: Optional[CleanPolicy] = None,
    *,
    _depth: int = 0,
) -> CleanResult:
    """Detect the format of `data` and dispatch to its cleaner.

    Never raises for malformed input: parse failures come back as status
    FAILED and unknown formats as UNSUPPORTED, always with a warning.
    The input is never partially rewritten; `output` is all-or-nothing.
    """
    if policy is None:
        policy = CleanPolicy()
    if _depth > MAX_RECURSION_DEPTH:
        return CleanResult(
            Status.FAILED, None, [], [f"archive nesting exceeds depth {MAX_RECURSION_DEPTH}"]
        )
    kind = detect_kind(data, name_hint)
    if kind.tag is Kind.UNKNOWN:
        return CleanResult(
            Status.UNSUPPORTED, None, [], ["unknown format: nothing cleaned"]
        )
    try:
        result = _dispatch_clean(kind.tag, data, policy, _depth)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    if policy.dry_run and result.output is not None:
        result = dataclasses.replace(result, output=None)
    return result


def _dispatch_clean(tag: Kind, data: bytes, policy: CleanPolicy, depth: int) -> CleanResult:
    from . import archive, audio, image, pdf

    if tag is Kind.PNG:
        return image.clean_png(data)
    if tag is Kind.JPEG:
        return image.clean_jpeg(data)
    if tag is Kind.ZIP:
        return archive.clean_zip(data, policy, _depth=depth)
    if tag is Kind.OOXML:
        return archive.clean_ooxml(data, policy, _depth=depth)
    if tag is Kind.ODF:
        return archive.clean_odf(data, policy, _depth=depth)
    if tag is Kind.TAR:
        return archive.clean_tar(data, archive.Compression.NONE, policy, _depth=depth)
    if tag is Kind.TAR_GZ:
        return archive.clean_tar(data, archive.Compression.GZIP, policy, _depth=depth)
    if tag is Kind.TAR_BZ2:
        return archive.clean_tar(data, archive.Compression.BZIP2, policy, _depth=depth)
    if tag is Kind.MP3:
        return audio.clean_mp3(data)
    if tag is Kind.OGG_VORBIS:
        return audio.clean_ogg_vorbis(data)
    if tag is Kind.FLAC:
        return audio.clean_flac(data)
    if tag is Kind.PDF:
        return pdf.clean_pdf(data)
    raise AssertionError(f"no cleaner for {tag}")


def inspect_file(
    data: bytes, name_hint: Optional[str] = None, *, _depth: int = 0
) -> list[MetadataEntry]:
    """List every metadata field present, in document order.

    Container formats are walked recursively; nested entries carry the
    member path in their location.  Raises UnsupportedFormatError for
    unknown formats (distinct from a clean file's empty list) and
    ParseError for corrupt input.
    """
    from . import archive, audio, image, pdf

    if _depth > MAX_RECURSION_DEPTH:
        raise ParseError(f"archive nesting exceeds depth {MAX_RECURSION_DEPTH}")
    kind = detect_kind(data, name_hint)
    tag = kind.tag
    if tag is Kind.UNKNOWN:
        raise UnsupportedFormatError("unknown format")
    if tag is Kind.PNG:
        return image.inspect_png(data)
    if tag is Kind.JPEG:
        return image.inspect_jpeg(data)
    if tag in (Kind.ZIP, Kind.OOXML, Kind.ODF):
        return archive.inspect_zip(data, _depth=_depth)
    if tag is Kind.TAR:
        return archive.inspect_tar(data, archive.Compression.NONE, _depth=_depth)
    if tag is Kind.TAR_GZ:
        return archive.inspect_tar(data, archive.Compression.GZIP, _depth=_depth)
    if tag is Kind.TAR_BZ2:
        return archive.inspect_tar(data, archive.Compression.BZIP2, _depth=_depth)
    if tag is Kind.MP3:
        return audio.inspect_mp3(data)
    if tag is Kind.OGG_VORBIS:
        return audio.inspect_ogg_vorbis(data)
    if tag is Kind.FLAC:
        return audio.inspect_flac(data)
    if tag is Kind.PDF:
        return pdf.inspect_pdf(data)
    raise AssertionError(f"no inspector for {tag}")


def finalize(input_data: bytes, output: bytes, removed: list[MetadataEntry],
             warnings: list[str], fallback_key: str) -> CleanResult:
    """Common tail for cleaners: decide CLEANED vs ALREADY_CLEAN.

    ALREADY_CLEAN requires a byte-level fixpoint.  When the rewrite
    changed bytes without any identifiable field being removed (e.g. a
    non-canonical compression level), a generic normalization entry is
    recorded so CLEANED always carries a non-empty removal list.
    """
    if output == input_data:
        return CleanResult(Status.ALREADY_CLEAN, output, [], list(warnings))
    removed = list(removed)
    if not removed:
        removed.append(
            MetadataEntry(
                key=fallback_key,
                value="non-canonical encoding normalized",
                location="",
                category=Category.CONTEXTUAL,
            )
        )
    return CleanResult(Status.CLEANED, output, removed, list(warnings))
