"""Cleaners for MP3 (ID3/APE tags), Ogg Vorbis comments and FLAC blocks.

Audio payloads are never re-encoded: MPEG frames, Vorbis audio packets
and FLAC frames pass through byte-identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .core import (
    Category,
    CleanResult,
    MetadataEntry,
    ParseError,
    ScrubError,
    Status,
    UnsupportedFormatError,
    finalize,
    render_binary,
    render_text,
)
from .core import _mpeg_sync_at, _syncsafe

# ---------------------------------------------------------------------------
# ID3v2 / ID3v1 / APEv2

_ID3_ENCODINGS = {0: "latin-1", 1: "utf-16", 2: "utf-16-be", 3: "utf-8"}


def _decode_id3_text(body: bytes) -> str:
    if not body:
        return ""
    enc = _ID3_ENCODINGS.get(body[0], "latin-1")
    text = body[1:].decode(enc, "replace")
    return " / ".join(p for p in text.split("\x00") if p)


def _id3v2_frame_entries(body: bytes, version: int, loc: str) -> list[MetadataEntry]:
    entries: list[MetadataEntry] = []
    pos = 0
    id_len, size_len = (3, 3) if version == 2 else (4, 4)
    while pos + id_len + size_len <= len(body):
        frame_id = body[pos : pos + id_len]
        if frame_id.strip(b"\x00") == b"":
            break  # padding
        raw_size = body[pos + id_len : pos + id_len + size_len]
        if version == 2:
            size = int.from_bytes(raw_size, "big")
            header_len = 6
        else:
            size = _syncsafe(raw_size) if version >= 4 else int.from_bytes(raw_size, "big")
            header_len = 10
        frame_body = body[pos + header_len : pos + header_len + size]
        if len(frame_body) < size:
            break
        fid = frame_id.decode("latin-1", "replace")
        key = f"ID3v2.{fid}"
        if fid.startswith("T"):
            value = render_text(_decode_id3_text(frame_body))
        elif fid in ("COMM", "COM", "USLT"):
            # encoding + language + short description NUL + text
            try:
                text = _decode_id3_text(frame_body[:1] + frame_body[4:])
            except Exception:
                text = render_binary(size)
            value = render_text(text)
        else:
            value = render_binary(size)
        entries.append(MetadataEntry(key, value, loc))
        pos += header_len + size
    return entries


def _parse_id3v2(data: bytes, pos: int, loc: str) -> tuple[list[MetadataEntry], int]:
    """Parse an ID3v2 tag at `pos`; returns (entries, total byte length)."""
    if data[pos : pos + 3] != b"ID3" or pos + 10 > len(data):
        raise ParseError("not an ID3v2 tag", pos)
    version = data[pos + 3]
    flags = data[pos + 5]
    size = _syncsafe(data[pos + 6 : pos + 10])
    total = 10 + size + (10 if flags & 0x10 else 0)
    if pos + total > len(data):
        raise ParseError("ID3v2 tag size exceeds file", pos)
    body = data[pos + 10 : pos + 10 + size]
    if flags & 0x80:  # unsynchronised
        body = body.replace(b"\xff\x00", b"\xff")
    if flags & 0x40 and len(body) >= 4:  # extended header
        ext = _syncsafe(body[:4]) if version >= 4 else int.from_bytes(body[:4], "big") + 4
        body = body[ext:]
    entries = _id3v2_frame_entries(body, version, loc)
    if not entries:
        entries = [MetadataEntry(f"ID3v2.{version}", render_binary(size), loc)]
    return entries, total


_ID3V1_FIELDS = (
    ("title", 3, 33),
    ("artist", 33, 63),
    ("album", 63, 93),
    ("year", 93, 97),
    ("comment", 97, 127),
)


def _id3v1_entries(tag: bytes, loc: str) -> list[MetadataEntry]:
    entries = []
    for name, start, end in _ID3V1_FIELDS:
        text = tag[start:end].split(b"\x00")[0].decode("latin-1", "replace").strip()
        if text:
            entries.append(MetadataEntry(f"ID3v1.{name}", render_text(text), loc))
    genre = tag[127]
    if genre != 0xFF:
        entries.append(MetadataEntry("ID3v1.genre", str(genre), loc))
    if not entries:
        entries.append(MetadataEntry("ID3v1", "(empty tag)", loc))
    return entries


def _parse_apev2_at_end(data: bytes, end: int, loc: str):
    """APEv2 tag whose footer ends at `end`; returns (entries, total) or None."""
    if end < 32 or data[end - 32 : end - 24] != b"APETAGEX":
        return None
    size, count, flags = struct.unpack("<III", data[end - 20 : end - 8])
    total = size + (32 if flags & 0x80000000 else 0)
    if total > end:
        raise ParseError("APEv2 tag size exceeds file", end - 32)
    items = data[end - size : end - 32]
    entries: list[MetadataEntry] = []
    pos = 0
    for _ in range(count):
        if pos + 8 > len(items):
            break
        vsize, vflags = struct.unpack("<II", items[pos : pos + 8])
        key_end = items.find(b"\x00", pos + 8)
        if key_end < 0:
            break
        key = items[pos + 8 : key_end].decode("latin-1", "replace")
        value_raw = items[key_end + 1 : key_end + 1 + vsize]
        if vflags & 0x06:
            value = render_binary(vsize)
        else:
            value = render_text(value_raw.decode("utf-8", "replace"))
        entries.append(MetadataEntry(f"APE.{key}", value, loc))
        pos = key_end + 1 + vsize
    if not entries:
        entries.append(MetadataEntry("APE", render_binary(total), loc))
    return entries, total


# ---------------------------------------------------------------------------
# MP3

@dataclass
class _Mp3Layout:
    audio_start: int
    audio_end: int
    entries: list[MetadataEntry] = field(default_factory=list)
    encoder_frame: str | None = None


def _encoder_frame_info(audio: bytes) -> str | None:
    """Detect a Xing/Info/LAME/VBRI header inside the first MPEG frame."""
    if len(audio) < 40:
        return None
    b1 = audio[1]
    mpeg1 = ((b1 >> 3) & 0x03) == 0x03
    mono = (audio[3] >> 6) == 0x03
    side = (17 if mono else 32) if mpeg1 else (9 if mono else 17)
    tag_off = 4 + side
    tag = audio[tag_off : tag_off + 4]
    found = []
    if tag in (b"Xing", b"Info"):
        found.append(tag.decode("latin-1"))
    if audio[36:40] == b"VBRI":
        found.append("VBRI")
    lame = audio[: max(200, tag_off + 40)].find(b"LAME")
    if lame >= 0:
        found.append(audio[lame : lame + 20].split(b"\x00")[0].decode("latin-1", "replace"))
    return "/".join(found) if found else None


def _mp3_layout(data: bytes) -> _Mp3Layout:
    entries: list[MetadataEntry] = []
    pos = 0
    while data[pos : pos + 3] == b"ID3":
        tag_entries, total = _parse_id3v2(data, pos, f"ID3v2 @0x{pos:04x}")
        entries.extend(tag_entries)
        pos += total
    sync = -1
    for i in range(pos, len(data) - 4):
        if _mpeg_sync_at(data, i):
            sync = i
            break
    if sync < 0:
        raise ParseError("no MPEG frame sync found: no audio content")
    if sync > pos:
        entries.append(MetadataEntry(
            "MP3.leading-junk", render_binary(sync - pos),
            f"@0x{pos:04x}", Category.UNKNOWN))
    end = len(data)
    while True:
        if end - sync >= 128 and data[end - 128 : end - 125] == b"TAG":
            entries.extend(_id3v1_entries(data[end - 128 : end], f"ID3v1 @0x{end - 128:04x}"))
            end -= 128
            continue
        ape = _parse_apev2_at_end(data, end, f"APEv2 @0x{end - 32:04x}")
        if ape is not None:
            ape_entries, total = ape
            entries.extend(ape_entries)
            end -= total
            continue
        if end - sync >= 20 and data[end - 10 : end - 7] == b"3DI":
            size = _syncsafe(data[end - 4 : end])
            start = end - (size + 20)
            if start < sync:
                raise ParseError("trailing ID3v2 size exceeds file", end - 10)
            tag_entries, _ = _parse_id3v2(data, start, f"ID3v2 (trailing) @0x{start:04x}")
            entries.extend(tag_entries)
            end = start
            continue
        break
    layout = _Mp3Layout(sync, end, entries)
    layout.encoder_frame = _encoder_frame_info(data[sync:end])
    return layout


def inspect_mp3(data: bytes) -> list[MetadataEntry]:
    layout = _mp3_layout(data)
    entries = list(layout.entries)
    if layout.encoder_frame:
        entries.append(MetadataEntry(
            "MP3.EncoderFrame", layout.encoder_frame,
            f"first frame @0x{layout.audio_start:04x}",
            Category.STRUCTURAL_REQUIRED))
    return entries


def clean_mp3(data: bytes) -> CleanResult:
    """Excise every tag region, keeping only the MPEG frames."""
    try:
        layout = _mp3_layout(data)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    warnings = []
    if layout.encoder_frame:
        warnings.append(
            f"encoder information frame ({layout.encoder_frame}) left in frame "
            "data: removing it would break decoding offsets"
        )
    output = data[layout.audio_start : layout.audio_end]
    return finalize(data, output, layout.entries, warnings, "MP3.encoding")


# ---------------------------------------------------------------------------
# Vorbis comments (shared by FLAC and Ogg Vorbis)

def _vorbis_comment_entries(body: bytes, loc: str, prefix: str) -> list[MetadataEntry]:
    entries: list[MetadataEntry] = []
    if len(body) < 8:
        raise ParseError("truncated vorbis comment block")
    (vendor_len,) = struct.unpack("<I", body[:4])
    pos = 4 + vendor_len
    if pos + 4 > len(body):
        raise ParseError("truncated vorbis comment vendor string")
    vendor = body[4:pos].decode("utf-8", "replace")
    if vendor:
        entries.append(MetadataEntry(f"{prefix}.vendor", render_text(vendor), loc))
    (count,) = struct.unpack("<I", body[pos : pos + 4])
    pos += 4
    for _ in range(count):
        if pos + 4 > len(body):
            raise ParseError("truncated vorbis comment list")
        (clen,) = struct.unpack("<I", body[pos : pos + 4])
        pos += 4
        comment = body[pos : pos + clen].decode("utf-8", "replace")
        pos += clen
        key, _, value = comment.partition("=")
        entries.append(MetadataEntry(f"{prefix}.{key.upper()}", render_text(value), loc))
    return entries


# ---------------------------------------------------------------------------
# FLAC

_FLAC_BLOCK_NAMES = {
    0: "StreamInfo", 1: "Padding", 2: "Application", 3: "SeekTable",
    4: "VorbisComment", 5: "CueSheet", 6: "Picture",
}


@dataclass
class FlacBlock:
    block_type: int
    is_last: bool
    body: bytes
    offset: int


def _parse_flac(data: bytes):
    """Returns (leading-id3-entries, id3-length, blocks, frames)."""
    id3_entries: list[MetadataEntry] = []
    pos = 0
    if data[:3] == b"ID3":
        id3_entries, pos = _parse_id3v2(data, 0, "leading ID3v2 @0x0000")
    if data[pos : pos + 4] != b"fLaC":
        raise ParseError("missing fLaC marker", pos)
    blocks: list[FlacBlock] = []
    p = pos + 4
    while True:
        if p + 4 > len(data):
            raise ParseError("truncated metadata block header", p)
        header = data[p]
        length = int.from_bytes(data[p + 1 : p + 4], "big")
        if p + 4 + length > len(data):
            raise ParseError("truncated metadata block", p)
        blocks.append(FlacBlock(header & 0x7F, bool(header & 0x80), data[p + 4 : p + 4 + length], p))
        p += 4 + length
        if header & 0x80:
            break
    if not blocks or blocks[0].block_type != 0 or len(blocks[0].body) != 34:
        raise ParseError("missing StreamInfo block", pos + 4)
    return id3_entries, pos, blocks, data[p:]


def _flac_block_entries(block: FlacBlock) -> list[MetadataEntry]:
    name = _FLAC_BLOCK_NAMES.get(block.block_type, f"Unknown({block.block_type})")
    loc = f"block {name} @0x{block.offset:04x}"
    body = block.body
    try:
        if block.block_type == 4:
            return _vorbis_comment_entries(body, loc, "FLAC.VorbisComment")
        if block.block_type == 6:
            (mime_len,) = struct.unpack(">I", body[4:8])
            mime = body[8 : 8 + mime_len].decode("latin-1", "replace")
            return [MetadataEntry(
                "FLAC.Picture", f"{mime} {render_binary(len(body))}", loc)]
        if block.block_type == 3:
            return [MetadataEntry("FLAC.SeekTable", f"{len(body) // 18} seek points", loc)]
        if block.block_type == 2:
            app_id = body[:4].decode("latin-1", "replace")
            return [MetadataEntry(
                "FLAC.Application", f"{app_id} {render_binary(len(body) - 4)}", loc)]
        if block.block_type == 1:
            return [MetadataEntry("FLAC.Padding", f"{len(body)} bytes", loc)]
        if block.block_type == 5:
            return [MetadataEntry("FLAC.CueSheet", render_binary(len(body)), loc)]
    except (struct.error, IndexError, ScrubError):
        pass
    category = Category.CONTEXTUAL if block.block_type in _FLAC_BLOCK_NAMES else Category.UNKNOWN
    return [MetadataEntry(f"FLAC.{name}", render_binary(len(body)), loc, category)]


def inspect_flac(data: bytes) -> list[MetadataEntry]:
    id3_entries, _, blocks, _ = _parse_flac(data)
    entries = list(id3_entries)
    for block in blocks[1:]:
        entries.extend(_flac_block_entries(block))
    return entries


def clean_flac(data: bytes) -> CleanResult:
    """Keep only the StreamInfo block; drop every other metadata block."""
    try:
        id3_entries, id3_len, blocks, frames = _parse_flac(data)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    removed = list(id3_entries)
    for block in blocks[1:]:
        removed.extend(_flac_block_entries(block))
    streaminfo = blocks[0].body
    out = b"fLaC" + bytes([0x80]) + len(streaminfo).to_bytes(3, "big") + streaminfo + frames
    return finalize(data, out, removed, [], "FLAC.encoding")


# ---------------------------------------------------------------------------
# Ogg Vorbis

_OGG_CRC_TABLE = []
for _i in range(256):
    _r = _i << 24
    for _ in range(8):
        _r = ((_r << 1) ^ 0x04C11DB7) if _r & 0x80000000 else (_r << 1)
        _r &= 0xFFFFFFFF
    _OGG_CRC_TABLE.append(_r)


def ogg_crc(data: bytes) -> int:
    """Ogg page CRC-32: poly 0x04C11DB7, init 0, no reflection."""
    crc = 0
    for b in data:
        crc = ((crc << 8) & 0xFFFFFFFF) ^ _OGG_CRC_TABLE[((crc >> 24) & 0xFF) ^ b]
    return crc


@dataclass
class OggPage:
    header_type: int
    granule: int
    serial: int
    sequence: int
    lacing: bytes
    payload: bytes
    offset: int

    def packets(self):
        """Split payload into (data, complete) pieces per the lacing table."""
        out = []
        pos = 0
        cur = bytearray()
        for lace in self.lacing:
            cur += self.payload[pos : pos + lace]
            pos += lace
            if lace < 255:
                out.append((bytes(cur), True))
                cur = bytearray()
        if cur or (self.lacing and self.lacing[-1] == 255):
            out.append((bytes(cur), False))
        return out


def _write_ogg_page(page: OggPage) -> bytes:
    header = struct.pack(
        "<4sBBqIIIB",
        b"OggS", 0, page.header_type, page.granule, page.serial,
        page.sequence, 0, len(page.lacing),
    ) + page.lacing
    raw = bytearray(header + page.payload)
    crc = ogg_crc(bytes(raw))
    struct.pack_into("<I", raw, 22, crc)
    return bytes(raw)


def _parse_ogg_pages(data: bytes) -> list[OggPage]:
    pages: list[OggPage] = []
    pos = 0
    while pos < len(data):
        if data[pos : pos + 4] != b"OggS":
            raise ParseError("expected OggS capture pattern", pos)
        if pos + 27 > len(data):
            raise ParseError("truncated page header", pos)
        (_, version, header_type, granule, serial, sequence, crc, nsegs) = struct.unpack(
            "<4sBBqIIIB", data[pos : pos + 27]
        )
        if version != 0:
            raise ParseError(f"unsupported Ogg version {version}", pos)
        lacing = data[pos + 27 : pos + 27 + nsegs]
        if len(lacing) < nsegs:
            raise ParseError("truncated lacing table", pos)
        body_len = sum(lacing)
        start = pos + 27 + nsegs
        payload = data[start : start + body_len]
        if len(payload) < body_len:
            raise ParseError("truncated page payload", pos)
        page = OggPage(header_type, granule, serial, sequence, lacing, payload, pos)
        zeroed = bytearray(data[pos : start + body_len])
        struct.pack_into("<I", zeroed, 22, 0)
        if ogg_crc(bytes(zeroed)) != crc:
            raise ParseError("Ogg page CRC mismatch", pos)
        pages.append(page)
        pos = start + body_len
    if not pages:
        raise ParseError("no Ogg pages found")
    return pages


def _lace_out(length: int) -> list[int]:
    laces = [255] * (length // 255)
    laces.append(length % 255)
    return laces


def _lay_packets(packets: list[bytes], serial: int, start_seq: int,
                 granule: int) -> list[OggPage]:
    """Pack whole packets into pages (greedy, 255-lace limit)."""
    units: list[tuple[int, bytes, bool]] = []  # (lace, data, ends_packet)
    for packet in packets:
        laces = _lace_out(len(packet))
        pos = 0
        for i, lace in enumerate(laces):
            units.append((lace, packet[pos : pos + lace], i == len(laces) - 1 and lace < 255))
            pos += lace
    pages: list[OggPage] = []
    seq = start_seq
    continued = False
    while units:
        batch, units = units[:255], units[255:]
        lacing = bytes(u[0] for u in batch)
        payload = b"".join(u[1] for u in batch)
        header_type = 0x01 if continued else 0x00
        pages.append(OggPage(header_type, granule, serial, seq, lacing, payload, 0))
        seq += 1
        continued = not batch[-1][2]
    return pages


_MINIMAL_COMMENT_PACKET = b"\x03vorbis" + struct.pack("<II", 0, 0) + b"\x01"


def _ogg_vorbis_layout(data: bytes):
    """Parse and validate a single-stream Ogg Vorbis file.

    Returns (pages, header packets, index of last header page, entries).
    """
    pages = _parse_ogg_pages(data)
    serials = {p.serial for p in pages}
    if len(serials) > 1:
        raise UnsupportedFormatError("multiplexed Ogg streams are not supported")
    first = pages[0]
    first_packets = first.packets()
    if not first_packets or not first_packets[0][0].startswith(b"\x01vorbis"):
        raise UnsupportedFormatError("not a Vorbis stream")
    # Gather the three header packets (identification, comment, setup).
    packets: list[bytes] = []
    partial = b""
    hdr_end_page = -1
    for idx, page in enumerate(pages):
        page_packets = page.packets()
        for j, (pdata, complete) in enumerate(page_packets):
            if complete:
                packets.append(partial + pdata)
                partial = b""
            else:
                partial += pdata
            if len(packets) == 3:
                if j != len(page_packets) - 1:
                    raise ParseError(
                        "setup packet does not end on a page boundary", page.offset)
                hdr_end_page = idx
                break
        if hdr_end_page >= 0:
            break
    if len(packets) < 3:
        raise ParseError("incomplete Vorbis header packets")
    if not packets[1].startswith(b"\x03vorbis"):
        raise ParseError("missing Vorbis comment header packet")
    entries = _vorbis_comment_entries(
        packets[1][7:], f"comment packet (page 1 @0x{pages[1].offset:04x})"
        if len(pages) > 1 else "comment packet", "Vorbis")
    return pages, packets, hdr_end_page, entries


def inspect_ogg_vorbis(data: bytes) -> list[MetadataEntry]:
    _, _, _, entries = _ogg_vorbis_layout(data)
    return entries


def clean_ogg_vorbis(data: bytes) -> CleanResult:
    """Replace the comment packet with an empty one and re-lay the pages."""
    try:
        pages, packets, hdr_end_page, entries = _ogg_vorbis_layout(data)
    except UnsupportedFormatError as exc:
        return CleanResult(Status.UNSUPPORTED, None, [], [str(exc)])
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    serial = pages[0].serial
    out_pages: list[OggPage] = []
    # Identification packet stays alone on its beginning-of-stream page.
    out_pages.append(OggPage(
        0x02, 0, serial, 0, bytes(_lace_out(len(packets[0]))), packets[0], 0))
    out_pages.extend(_lay_packets(
        [_MINIMAL_COMMENT_PACKET, packets[2]], serial, 1, 0))
    seq = out_pages[-1].sequence + 1
    for page in pages[hdr_end_page + 1 :]:
        out_pages.append(OggPage(
            page.header_type, page.granule, serial, seq, page.lacing, page.payload, 0))
        seq += 1
    out = b"".join(_write_ogg_page(p) for p in out_pages)
    return finalize(data, out, entries, [], "Ogg.encoding")
