"""Whitelist cleaners for PNG and JPEG.

Both cleaners keep only the structures a decoder needs and drop every
other chunk or segment.  Pixel data (PNG IDAT bodies, JPEG entropy-coded
scans) passes through byte-identical.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Optional

from .core import (
    Category,
    CleanResult,
    MetadataEntry,
    ParseError,
    PNG_SIGNATURE,
    ScrubError,
    Status,
    finalize,
    render_binary,
    render_text,
)

# ---------------------------------------------------------------------------
# PNG

# Chunks a conforming decoder needs (plus APNG animation chunks, which are
# content, not metadata).  Everything else is dropped.
PNG_WHITELIST = frozenset(
    [b"IHDR", b"PLTE", b"tRNS", b"IDAT", b"IEND", b"acTL", b"fcTL", b"fdAT"]
)

_PNG_KNOWN_ANCILLARY = frozenset(
    [
        b"tEXt", b"zTXt", b"iTXt", b"tIME", b"eXIf", b"gAMA", b"cHRM",
        b"sRGB", b"iCCP", b"sBIT", b"bKGD", b"hIST", b"pHYs", b"sPLT",
    ]
)


@dataclass
class PngChunk:
    kind: bytes
    body: bytes
    offset: int  # offset of the length field in the original file


def _parse_png(data: bytes) -> tuple[list[PngChunk], bytes]:
    """Split a PNG into chunks, verifying every CRC.

    Returns (chunks, trailing-garbage-after-IEND).
    """
    if not data.startswith(PNG_SIGNATURE):
        raise ParseError("not a PNG: bad signature", 0)
    chunks: list[PngChunk] = []
    pos = len(PNG_SIGNATURE)
    trailer = b""
    while pos < len(data):
        if pos + 8 > len(data):
            raise ParseError("truncated chunk header", pos)
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        kind = data[pos + 4 : pos + 8]
        end = pos + 8 + length + 4
        if end > len(data):
            raise ParseError(f"truncated chunk {kind!r}", pos)
        body = data[pos + 8 : pos + 8 + length]
        (crc,) = struct.unpack(">I", data[end - 4 : end])
        if crc != zlib.crc32(kind + body):
            raise ParseError(f"CRC mismatch in chunk {kind.decode('latin-1')}", pos)
        chunks.append(PngChunk(kind, body, pos))
        pos = end
        if kind == b"IEND":
            trailer = data[pos:]
            break
    if not chunks or chunks[0].kind != b"IHDR":
        raise ParseError("missing IHDR", len(PNG_SIGNATURE))
    if chunks[-1].kind != b"IEND":
        raise ParseError("missing IEND", len(data))
    return chunks, trailer


def _write_chunk(kind: bytes, body: bytes) -> bytes:
    return (
        struct.pack(">I", len(body))
        + kind
        + body
        + struct.pack(">I", zlib.crc32(kind + body))
    )


def _null_split(body: bytes) -> tuple[bytes, bytes]:
    i = body.find(b"\x00")
    if i < 0:
        return body, b""
    return body[:i], body[i + 1 :]


def _png_chunk_entries(chunk: PngChunk) -> list[MetadataEntry]:
    """Render one removable chunk as metadata entries."""
    kind = chunk.kind
    body = chunk.body
    name = kind.decode("latin-1")
    loc = f"chunk {name} @0x{chunk.offset:04x}"
    try:
        if kind == b"tEXt":
            keyword, text = _null_split(body)
            return [MetadataEntry(
                f"PNG.tEXt.{keyword.decode('latin-1')}",
                render_text(text.decode("latin-1")), loc)]
        if kind == b"zTXt":
            keyword, rest = _null_split(body)
            text = zlib.decompress(rest[1:]).decode("latin-1")
            return [MetadataEntry(
                f"PNG.zTXt.{keyword.decode('latin-1')}", render_text(text), loc)]
        if kind == b"iTXt":
            keyword, rest = _null_split(body)
            comp_flag = rest[0]
            lang, rest2 = _null_split(rest[2:])
            _trans, text = _null_split(rest2)
            raw = zlib.decompress(text) if comp_flag else text
            return [MetadataEntry(
                f"PNG.iTXt.{keyword.decode('latin-1')}",
                render_text(raw.decode("utf-8")), loc)]
        if kind == b"tIME" and len(body) == 7:
            y, mo, d, h, mi, s = struct.unpack(">H5B", body)
            return [MetadataEntry(
                "PNG.tIME", f"{y:04d}-{mo:02d}-{d:02d} {h:02d}:{mi:02d}:{s:02d}", loc)]
        if kind == b"pHYs" and len(body) == 9:
            x, y, unit = struct.unpack(">IIB", body)
            return [MetadataEntry("PNG.pHYs", f"{x}x{y} unit={unit}", loc)]
        if kind == b"gAMA" and len(body) == 4:
            (g,) = struct.unpack(">I", body)
            return [MetadataEntry("PNG.gAMA", f"{g / 100000:.5f}", loc)]
        if kind == b"sRGB" and len(body) == 1:
            return [MetadataEntry("PNG.sRGB", f"rendering intent {body[0]}", loc)]
        if kind == b"iCCP":
            profile_name, _ = _null_split(body)
            return [MetadataEntry(
                "PNG.iCCP",
                f"{profile_name.decode('latin-1')} {render_binary(len(body))}", loc)]
        if kind == b"eXIf":
            entries = _exif_entries(body, loc, key_prefix="PNG.eXIf")
            if entries:
                return entries
    except (ValueError, zlib.error, UnicodeDecodeError, IndexError, struct.error):
        pass
    category = (
        Category.CONTEXTUAL if kind in _PNG_KNOWN_ANCILLARY else Category.UNKNOWN
    )
    return [MetadataEntry(f"PNG.{name}", render_binary(len(body)), loc, category)]


def inspect_png(data: bytes) -> list[MetadataEntry]:
    chunks, trailer = _parse_png(data)
    entries: list[MetadataEntry] = []
    for chunk in chunks:
        if chunk.kind not in PNG_WHITELIST:
            entries.extend(_png_chunk_entries(chunk))
    if trailer:
        entries.append(MetadataEntry(
            "PNG.trailer", render_binary(len(trailer)),
            f"after IEND @0x{len(data) - len(trailer):04x}", Category.UNKNOWN))
    return entries


def clean_png(data: bytes) -> CleanResult:
    """Rewrite a PNG keeping only whitelisted chunks, CRCs recomputed."""
    try:
        chunks, trailer = _parse_png(data)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    removed: list[MetadataEntry] = []
    out = bytearray(PNG_SIGNATURE)
    for chunk in chunks:
        if chunk.kind in PNG_WHITELIST:
            out += _write_chunk(chunk.kind, chunk.body)
        else:
            removed.extend(_png_chunk_entries(chunk))
    if trailer:
        removed.append(MetadataEntry(
            "PNG.trailer", render_binary(len(trailer)),
            f"after IEND @0x{len(data) - len(trailer):04x}", Category.UNKNOWN))
    return finalize(data, bytes(out), removed, [], "PNG.encoding")


# ---------------------------------------------------------------------------
# JPEG

SOI, EOI, SOS, COM, DNL, TEM = 0xD8, 0xD9, 0xDA, 0xFE, 0xDC, 0x01
_SOF_MARKERS = {m for m in range(0xC0, 0xD0)} - {0xC4, 0xC8, 0xCC}
_STRUCTURAL = {0xDB, 0xC4, 0xCC, 0xDD, SOS, DNL, TEM} | _SOF_MARKERS


@dataclass
class JpegSegment:
    marker: int
    offset: int
    raw: bytes                     # marker bytes + length + payload
    payload: Optional[bytes]       # None for bare markers
    entropy: bytes = b""           # entropy-coded data following SOS


def _parse_jpeg(data: bytes) -> tuple[list[JpegSegment], bytes]:
    """Walk JPEG segments; returns (segments, trailer-after-EOI)."""
    if not data.startswith(b"\xff\xd8"):
        raise ParseError("not a JPEG: missing SOI", 0)
    segments = [JpegSegment(SOI, 0, b"\xff\xd8", None)]
    pos = 2
    trailer = b""
    while True:
        if pos + 2 > len(data):
            raise ParseError("truncated: no EOI", pos)
        if data[pos] != 0xFF:
            raise ParseError(f"expected marker, got 0x{data[pos]:02x}", pos)
        start = pos
        while pos < len(data) and data[pos] == 0xFF:
            pos += 1  # fill bytes
        if pos >= len(data):
            raise ParseError("truncated marker", start)
        marker = data[pos]
        pos += 1
        if marker == EOI:
            segments.append(JpegSegment(EOI, start, b"\xff\xd9", None))
            trailer = data[pos:]
            break
        if marker == TEM or 0xD0 <= marker <= 0xD7:
            segments.append(JpegSegment(marker, start, data[start:pos], None))
            continue
        if pos + 2 > len(data):
            raise ParseError("truncated segment length", pos)
        (length,) = struct.unpack(">H", data[pos : pos + 2])
        if length < 2 or pos + length > len(data):
            raise ParseError(f"truncated segment 0x{marker:02x}", start)
        payload = data[pos + 2 : pos + length]
        raw = data[start : pos + length]
        pos += length
        seg = JpegSegment(marker, start, raw, payload)
        if marker == SOS:
            ent_start = pos
            while True:
                i = data.find(b"\xff", pos)
                if i < 0 or i + 1 >= len(data):
                    raise ParseError("entropy data ran off the end", ent_start)
                nxt = data[i + 1]
                if nxt == 0x00 or 0xD0 <= nxt <= 0xD7 or nxt == 0xFF:
                    pos = i + 1 if nxt == 0xFF else i + 2
                    continue
                pos = i
                break
            seg.entropy = data[ent_start:pos]
        segments.append(seg)
    return segments, trailer


def _frame_components(segments: list[JpegSegment]) -> int:
    for seg in segments:
        if seg.marker in _SOF_MARKERS and seg.payload and len(seg.payload) >= 6:
            return seg.payload[5]
    return 0


_EXIF_HEADER = b"Exif\x00\x00"
_XMP_HEADER = b"http://ns.adobe.com/xap/1.0/\x00"
_JFIF_HEADER = b"JFIF\x00"
_ICC_HEADER = b"ICC_PROFILE\x00"
_PHOTOSHOP_HEADER = b"Photoshop 3.0\x00"
_ADOBE_HEADER = b"Adobe"


def _jpeg_segment_entries(seg: JpegSegment) -> list[MetadataEntry]:
    marker = seg.marker
    payload = seg.payload or b""
    if 0xE0 <= marker <= 0xEF:
        name = f"APP{marker - 0xE0}"
    elif marker == COM:
        name = "COM"
    else:
        name = f"0x{marker:02x}"
    loc = f"segment {name} @0x{seg.offset:04x}"
    if marker == COM:
        return [MetadataEntry(
            "JPEG.COM", render_text(payload.decode("latin-1", "replace")), loc)]
    if marker == 0xE1 and payload.startswith(_EXIF_HEADER):
        entries = _exif_entries(payload[len(_EXIF_HEADER):], loc, key_prefix="EXIF")
        if entries:
            return entries
    if marker == 0xE1 and payload.startswith(_XMP_HEADER):
        entries = _xmp_entries(payload[len(_XMP_HEADER):], loc)
        if entries:
            return entries
    if marker == 0xE0 and payload.startswith(_JFIF_HEADER):
        ver = f"{payload[5]}.{payload[6]:02d}" if len(payload) >= 7 else "?"
        return [MetadataEntry("JPEG.APP0.JFIF", f"version {ver}", loc)]
    if marker == 0xE2 and payload.startswith(_ICC_HEADER):
        return [MetadataEntry("JPEG.APP2.ICCProfile", render_binary(len(payload)), loc)]
    if marker == 0xED and payload.startswith(_PHOTOSHOP_HEADER):
        return [MetadataEntry("JPEG.APP13.Photoshop", render_binary(len(payload)), loc)]
    if marker == 0xEE and payload.startswith(_ADOBE_HEADER):
        return [MetadataEntry("JPEG.APP14.Adobe", render_binary(len(payload)), loc)]
    category = Category.CONTEXTUAL if marker == COM else Category.UNKNOWN
    return [MetadataEntry(f"JPEG.{name}", render_binary(len(payload)), loc, category)]


def _jpeg_split(
    segments: list[JpegSegment],
) -> tuple[list[JpegSegment], list[JpegSegment]]:
    """Partition into (kept, removed) per the whitelist policy."""
    ncomp = _frame_components(segments)
    kept: list[JpegSegment] = []
    dropped: list[JpegSegment] = []
    for seg in segments:
        m = seg.marker
        if m in (SOI, EOI) or 0xD0 <= m <= 0xD7 or m in _STRUCTURAL:
            kept.append(seg)
        elif m == 0xEE and seg.payload and seg.payload.startswith(_ADOBE_HEADER) and ncomp == 4:
            # The Adobe transform flag is needed to decode CMYK/YCCK.
            kept.append(seg)
        else:
            dropped.append(seg)
    return kept, dropped


def inspect_jpeg(data: bytes) -> list[MetadataEntry]:
    segments, trailer = _parse_jpeg(data)
    _, dropped = _jpeg_split(segments)
    entries: list[MetadataEntry] = []
    for seg in dropped:
        entries.extend(_jpeg_segment_entries(seg))
    if trailer:
        entries.append(MetadataEntry(
            "JPEG.trailer", render_binary(len(trailer)),
            f"after EOI @0x{len(data) - len(trailer):04x}", Category.UNKNOWN))
    return entries


def clean_jpeg(data: bytes) -> CleanResult:
    """Drop COM/APPn segments (APP14 Adobe kept for 4-component frames)."""
    try:
        segments, trailer = _parse_jpeg(data)
        if not any(s.marker == SOS for s in segments):
            raise ParseError("no SOS segment: not a decodable JPEG")
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    kept, dropped = _jpeg_split(segments)
    removed: list[MetadataEntry] = []
    for seg in dropped:
        removed.extend(_jpeg_segment_entries(seg))
    if trailer:
        removed.append(MetadataEntry(
            "JPEG.trailer", render_binary(len(trailer)),
            f"after EOI @0x{len(data) - len(trailer):04x}", Category.UNKNOWN))
    out = bytearray()
    for seg in kept:
        out += seg.raw
        out += seg.entropy
    return finalize(data, bytes(out), removed, [], "JPEG.encoding")


# ---------------------------------------------------------------------------
# EXIF (TIFF structure) — shared by JPEG APP1 and the PNG eXIf chunk

_TIFF_TAGS = {
    0x010E: "ImageDescription",
    0x010F: "Make",
    0x0110: "Model",
    0x0112: "Orientation",
    0x011A: "XResolution",
    0x011B: "YResolution",
    0x0128: "ResolutionUnit",
    0x0131: "Software",
    0x0132: "ModifyDate",
    0x013B: "Artist",
    0x013E: "WhitePoint",
    0x0213: "YCbCrPositioning",
    0x8298: "Copyright",
    0x9003: "DateTimeOriginal",
    0x9004: "CreateDate",
    0x829A: "ExposureTime",
    0x829D: "FNumber",
    0x8822: "ExposureProgram",
    0x8827: "ISO",
    0x9201: "ShutterSpeedValue",
    0x9202: "ApertureValue",
    0x920A: "FocalLength",
    0x927C: "MakerNote",
    0x9286: "UserComment",
    0xA001: "ColorSpace",
    0xA002: "ExifImageWidth",
    0xA003: "ExifImageHeight",
    0xA430: "OwnerName",
    0xA431: "SerialNumber",
    0x0103: "Compression",
    0x0201: "ThumbnailOffset",
    0x0202: "ThumbnailLength",
}

_GPS_TAGS = {
    0x0000: "GPSVersionID",
    0x0001: "GPSLatitudeRef",
    0x0002: "GPSLatitude",
    0x0003: "GPSLongitudeRef",
    0x0004: "GPSLongitude",
    0x0005: "GPSAltitudeRef",
    0x0006: "GPSAltitude",
    0x0007: "GPSTimeStamp",
    0x001D: "GPSDateStamp",
}

_TYPE_SIZES = {1: 1, 2: 1, 3: 2, 4: 4, 5: 8, 6: 1, 7: 1, 8: 2, 9: 4, 10: 8}

_EXIF_IFD_POINTER = 0x8769
_GPS_IFD_POINTER = 0x8825
_INTEROP_POINTER = 0xA005


def _render_tiff_value(tiff: bytes, endian: str, typ: int, count: int,
                       value_off: int, inline: bytes) -> str:
    size = _TYPE_SIZES.get(typ, 1) * count
    if size <= 4:
        raw = inline[:size]
    else:
        if value_off + size > len(tiff):
            return render_binary(size)
        raw = tiff[value_off : value_off + size]
    if typ == 2:  # ASCII
        return render_text(raw.split(b"\x00")[0].decode("latin-1", "replace"))
    if typ in (3, 4, 8, 9):
        width = _TYPE_SIZES[typ]
        fmt = {3: "H", 4: "I", 8: "h", 9: "i"}[typ]
        vals = struct.unpack(f"{endian}{count}{fmt}", raw[: width * count])
        return render_text(" ".join(str(v) for v in vals))
    if typ in (5, 10):
        fmt = "I" if typ == 5 else "i"
        vals = struct.unpack(f"{endian}{2 * count}{fmt}", raw)
        pairs = [f"{vals[i]}/{vals[i + 1]}" for i in range(0, len(vals), 2)]
        return render_text(" ".join(pairs))
    return render_binary(size)


def _exif_entries(tiff: bytes, loc: str, key_prefix: str = "EXIF") -> list[MetadataEntry]:
    """Shallow EXIF itemization: IFD0, Exif/GPS sub-IFDs, IFD1 thumbnail."""
    try:
        if tiff[:2] == b"II":
            endian = "<"
        elif tiff[:2] == b"MM":
            endian = ">"
        else:
            return []
        (ifd0_off,) = struct.unpack(f"{endian}I", tiff[4:8])
    except (struct.error, IndexError):
        return []

    entries: list[MetadataEntry] = []
    thumb_len = 0

    def walk(off: int, names: dict[int, str], prefix: str, seen: set[int]) -> int:
        nonlocal thumb_len
        if off in seen or off + 2 > len(tiff):
            return 0
        seen.add(off)
        (n,) = struct.unpack(f"{endian}H", tiff[off : off + 2])
        if n > 512:
            return 0
        next_ptr = 0
        base = off + 2
        for i in range(n):
            rec = tiff[base + 12 * i : base + 12 * i + 12]
            if len(rec) < 12:
                break
            tag, typ, count = struct.unpack(f"{endian}HHI", rec[:8])
            (value_off,) = struct.unpack(f"{endian}I", rec[8:12])
            if tag in (_EXIF_IFD_POINTER, _GPS_IFD_POINTER, _INTEROP_POINTER):
                sub_names = _GPS_TAGS if tag == _GPS_IFD_POINTER else _TIFF_TAGS
                sub_prefix = {
                    _EXIF_IFD_POINTER: prefix,
                    _GPS_IFD_POINTER: f"{key_prefix}.GPS",
                    _INTEROP_POINTER: f"{key_prefix}.Interop",
                }[tag]
                walk(value_off, sub_names, sub_prefix, seen)
                continue
            name = names.get(tag, f"Tag0x{tag:04X}")
            value = _render_tiff_value(tiff, endian, typ, count, value_off, rec[8:12])
            if tag == 0x0202 and prefix.endswith("Thumbnail"):
                try:
                    thumb_len = int(value)
                except ValueError:
                    pass
            category = Category.CONTEXTUAL if tag in names else Category.UNKNOWN
            entries.append(MetadataEntry(f"{prefix}.{name}", value, loc, category))
        tail = base + 12 * n
        if tail + 4 <= len(tiff):
            (next_ptr,) = struct.unpack(f"{endian}I", tiff[tail : tail + 4])
        return next_ptr

    seen: set[int] = set()
    ifd1 = walk(ifd0_off, _TIFF_TAGS, key_prefix, seen)
    if ifd1:
        walk(ifd1, _TIFF_TAGS, f"{key_prefix}.Thumbnail", seen)
    if thumb_len:
        entries.append(MetadataEntry(
            f"{key_prefix}.ThumbnailImage", render_binary(thumb_len), loc))
    return entries


# ---------------------------------------------------------------------------
# XMP (shallow)

def _xmp_entries(packet: bytes, loc: str) -> list[MetadataEntry]:
    import xml.etree.ElementTree as ET

    try:
        root = ET.fromstring(packet.decode("utf-8", "replace"))
    except ET.ParseError:
        return [MetadataEntry("XMP.packet", render_binary(len(packet)), loc)]
    entries: list[MetadataEntry] = []
    rdf_ns = "{http://www.w3.org/1999/02/22-rdf-syntax-ns#}"
    for desc in root.iter(f"{rdf_ns}Description"):
        for attr, value in desc.attrib.items():
            local = attr.rsplit("}", 1)[-1]
            if local == "about" and not value:
                continue
            entries.append(MetadataEntry(f"XMP.{local}", render_text(value), loc))
        for child in desc:
            local = child.tag.rsplit("}", 1)[-1]
            text = (child.text or "").strip()
            if not text:
                items = [
                    (li.text or "").strip()
                    for li in child.iter(f"{rdf_ns}li")
                ]
                text = ", ".join(t for t in items if t)
            if text:
                entries.append(MetadataEntry(f"XMP.{local}", render_text(text), loc))
    if not entries:
        entries.append(MetadataEntry("XMP.packet", render_binary(len(packet)), loc))
    return entries
