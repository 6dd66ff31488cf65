"""Fixture builders and independent oracles.

Builders assemble files by hand (struct packing) or with reference
producers (Pillow, zipfile, tarfile, gzip); oracles re-derive structure
with standalone walkers so tests never trust the code path under test.
"""

from __future__ import annotations

import gzip
import io
import struct
import tarfile
import zipfile
import zlib

# ---------------------------------------------------------------------------
# PNG

PNG_SIG = b"\x89PNG\r\n\x1a\n"


def crc32_bitwise(data: bytes) -> int:
    """Reference CRC-32 (reflected, poly 0xEDB88320), bit by bit."""
    crc = 0xFFFFFFFF
    for b in data:
        crc ^= b
        for _ in range(8):
            crc = (crc >> 1) ^ 0xEDB88320 if crc & 1 else crc >> 1
    return crc ^ 0xFFFFFFFF


def png_chunk(kind: bytes, body: bytes) -> bytes:
    return struct.pack(">I", len(body)) + kind + body + struct.pack(
        ">I", crc32_bitwise(kind + body))


def make_png(extra_chunks: list[tuple[bytes, bytes]] = (), trailer: bytes = b"") -> bytes:
    """1x1 grayscale PNG with optional extra chunks before IDAT."""
    ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 0, 0, 0, 0)
    idat = zlib.compress(b"\x00\x00")
    out = bytearray(PNG_SIG)
    out += png_chunk(b"IHDR", ihdr)
    for kind, body in extra_chunks:
        out += png_chunk(kind, body)
    out += png_chunk(b"IDAT", idat)
    out += png_chunk(b"IEND", b"")
    out += trailer
    return bytes(out)


def png_walk(data: bytes) -> list[tuple[bytes, bytes]]:
    """Independent chunk walker; asserts every CRC with the bitwise CRC."""
    assert data[:8] == PNG_SIG
    pos = 8
    chunks = []
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        kind = data[pos + 4 : pos + 8]
        body = data[pos + 8 : pos + 8 + length]
        (crc,) = struct.unpack(">I", data[pos + 8 + length : pos + 12 + length])
        assert crc == crc32_bitwise(kind + body), f"bad CRC in {kind!r}"
        chunks.append((kind, body))
        pos += 12 + length
        if kind == b"IEND":
            break
    return chunks


def png_idat(data: bytes) -> bytes:
    return b"".join(body for kind, body in png_walk(data) if kind == b"IDAT")


# ---------------------------------------------------------------------------
# JPEG

def base_jpeg(mode: str = "RGB", size=(8, 8)) -> bytes:
    from PIL import Image

    img = Image.new(mode, size, 128 if mode == "L" else None)
    buf = io.BytesIO()
    img.save(buf, format="JPEG")
    return buf.getvalue()


def jpeg_segment(marker: int, payload: bytes) -> bytes:
    return bytes([0xFF, marker]) + struct.pack(">H", len(payload) + 2) + payload


def exif_app1(software: str = "Adobe Photoshop CS3 Windows",
              thumbnail: bytes | None = None) -> bytes:
    """Hand-built EXIF APP1: IFD0 with Software, optional IFD1 thumbnail."""
    # little-endian TIFF
    sw = software.encode("latin-1") + b"\x00"
    make = b"Canon\x00"
    # layout: header(8) IFD0 IFD1 values thumbnail
    ifd0_off = 8
    n0 = 2
    ifd0_size = 2 + n0 * 12 + 4
    ifd1_off = ifd0_off + ifd0_size
    n1 = 2 if thumbnail else 0
    ifd1_size = (2 + n1 * 12 + 4) if thumbnail else 0
    val_off = ifd1_off + ifd1_size
    sw_off = val_off
    make_off = sw_off + len(sw)
    thumb_off = make_off + len(make)

    def entry(tag, typ, count, value):
        return struct.pack("<HHI", tag, typ, count) + value

    ifd0 = struct.pack("<H", n0)
    ifd0 += entry(0x010F, 2, len(make), struct.pack("<I", make_off))  # Make
    ifd0 += entry(0x0131, 2, len(sw), struct.pack("<I", sw_off))      # Software
    ifd0 += struct.pack("<I", ifd1_off if thumbnail else 0)

    ifd1 = b""
    if thumbnail:
        ifd1 = struct.pack("<H", n1)
        ifd1 += entry(0x0201, 4, 1, struct.pack("<I", thumb_off))
        ifd1 += entry(0x0202, 4, 1, struct.pack("<I", len(thumbnail)))
        ifd1 += struct.pack("<I", 0)

    tiff = b"II*\x00" + struct.pack("<I", ifd0_off) + ifd0 + ifd1 + sw + make
    if thumbnail:
        tiff += thumbnail
    return jpeg_segment(0xE1, b"Exif\x00\x00" + tiff)


def xmp_app1(creator_tool: str = "Adobe Photoshop CS3 Windows") -> bytes:
    packet = (
        '<?xpacket begin="﻿" id="W5M0MpCehiHzreSzNTczkc9d"?>'
        '<x:xmpmeta xmlns:x="adobe:ns:meta/">'
        '<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">'
        '<rdf:Description rdf:about=""'
        ' xmlns:xmp="http://ns.adobe.com/xap/1.0/"'
        f' xmp:CreatorTool="{creator_tool}"/>'
        "</rdf:RDF></x:xmpmeta>"
        '<?xpacket end="w"?>'
    ).encode("utf-8")
    return jpeg_segment(0xE1, b"http://ns.adobe.com/xap/1.0/\x00" + packet)


def com_segment(text: str) -> bytes:
    return jpeg_segment(0xFE, text.encode("latin-1"))


def inject_after_soi(jpeg: bytes, segments: bytes) -> bytes:
    assert jpeg[:2] == b"\xff\xd8"
    return jpeg[:2] + segments + jpeg[2:]


def jpeg_scan_bytes(data: bytes) -> bytes:
    """Independent scanner: concatenation of entropy-coded bytes."""
    assert data[:2] == b"\xff\xd8"
    pos = 2
    scans = []
    while pos < len(data) - 1:
        assert data[pos] == 0xFF, hex(data[pos])
        while data[pos] == 0xFF:
            pos += 1
        marker = data[pos]
        pos += 1
        if marker == 0xD9:
            break
        if marker == 0x01 or 0xD0 <= marker <= 0xD7:
            continue
        (length,) = struct.unpack(">H", data[pos : pos + 2])
        pos += length
        if marker == 0xDA:
            start = pos
            while True:
                i = data.find(b"\xff", pos)
                nxt = data[i + 1]
                if nxt == 0 or 0xD0 <= nxt <= 0xD7 or nxt == 0xFF:
                    pos = i + 1 if nxt == 0xFF else i + 2
                    continue
                pos = i
                break
            scans.append(data[start:pos])
    return b"".join(scans)


def jpeg_markers(data: bytes) -> list[int]:
    """Independent marker walker (no payload interpretation)."""
    pos = 2
    markers = [0xD8]
    while pos < len(data) - 1:
        while data[pos] == 0xFF:
            pos += 1
        marker = data[pos]
        pos += 1
        markers.append(marker)
        if marker == 0xD9:
            break
        if marker == 0x01 or 0xD0 <= marker <= 0xD7:
            continue
        (length,) = struct.unpack(">H", data[pos : pos + 2])
        pos += length
        if marker == 0xDA:
            while True:
                i = data.find(b"\xff", pos)
                nxt = data[i + 1]
                if nxt == 0 or 0xD0 <= nxt <= 0xD7 or nxt == 0xFF:
                    pos = i + 1 if nxt == 0xFF else i + 2
                    continue
                pos = i
                break
    return markers


# ---------------------------------------------------------------------------
# MP3

def mpeg_frame(fill: int = 0x11) -> bytes:
    # MPEG1 Layer III, 128 kbit/s, 44100 Hz, no padding -> 417 bytes
    return b"\xff\xfb\x90\x00" + bytes([fill]) * 413


def id3v2_text_frame(frame_id: str, text: str) -> bytes:
    body = b"\x00" + text.encode("latin-1")
    return frame_id.encode() + struct.pack(">I", len(body)) + b"\x00\x00" + body


def id3v2_tag(frames: dict[str, str], padding: int = 16) -> bytes:
    body = b"".join(id3v2_text_frame(k, v) for k, v in frames.items())
    body += b"\x00" * padding
    size = len(body)
    syncsafe = bytes([(size >> 21) & 0x7F, (size >> 14) & 0x7F,
                      (size >> 7) & 0x7F, size & 0x7F])
    return b"ID3\x03\x00\x00" + syncsafe + body


def id3v1_tag(title="", artist="", album="", year="", comment="", genre=255) -> bytes:
    def pad(s, n):
        return s.encode("latin-1")[:n].ljust(n, b"\x00")

    return (b"TAG" + pad(title, 30) + pad(artist, 30) + pad(album, 30)
            + pad(year, 4) + pad(comment, 30) + bytes([genre]))


def apev2_tag(items: dict[str, str]) -> bytes:
    blob = b""
    for key, value in items.items():
        v = value.encode("utf-8")
        blob += struct.pack("<II", len(v), 0) + key.encode() + b"\x00" + v
    size = len(blob) + 32
    footer = (b"APETAGEX" + struct.pack("<IIII", 2000, size, len(items), 0)
              + b"\x00" * 8)
    return blob + footer


def make_mp3(frames: int = 3, leading: bytes = b"", trailing: bytes = b"") -> bytes:
    return leading + b"".join(mpeg_frame(i + 1) for i in range(frames)) + trailing


# ---------------------------------------------------------------------------
# Ogg Vorbis

def ogg_crc_bitwise(data: bytes) -> int:
    crc = 0
    for b in data:
        crc ^= b << 24
        for _ in range(8):
            crc = ((crc << 1) ^ 0x04C11DB7) if crc & 0x80000000 else crc << 1
            crc &= 0xFFFFFFFF
    return crc


def ogg_page(header_type: int, granule: int, serial: int, seq: int,
             packets: list[bytes], open_ended: bool = False) -> bytes:
    lacing = bytearray()
    payload = bytearray()
    for i, p in enumerate(packets):
        laces = [255] * (len(p) // 255) + [len(p) % 255]
        if open_ended and i == len(packets) - 1 and laces[-1] == 0:
            laces.pop()
        lacing += bytes(laces)
        payload += p
    header = struct.pack("<4sBBqIIIB", b"OggS", 0, header_type, granule,
                         serial, seq, 0, len(lacing)) + bytes(lacing)
    page = bytearray(header + payload)
    struct.pack_into("<I", page, 22, ogg_crc_bitwise(bytes(page)))
    return bytes(page)


def vorbis_id_packet(rate: int = 44100) -> bytes:
    return (b"\x01vorbis" + struct.pack("<IBIiii", 0, 1, rate, -1, 128000, -1)
            + b"\xb8\x01")


def vorbis_comment_packet(vendor: str, comments: dict[str, str]) -> bytes:
    v = vendor.encode("utf-8")
    out = b"\x03vorbis" + struct.pack("<I", len(v)) + v
    out += struct.pack("<I", len(comments))
    for key, value in comments.items():
        c = f"{key}={value}".encode("utf-8")
        out += struct.pack("<I", len(c)) + c
    return out + b"\x01"


def vorbis_setup_packet(size: int = 160) -> bytes:
    return b"\x05vorbis" + bytes((i * 7) % 256 for i in range(size))


def make_ogg_vorbis(vendor="Xiph.Org libVorbis I 20200704",
                    comments=None, serial=0x1234, n_audio_pages=2) -> bytes:
    if comments is None:
        comments = {"ARTIST": "someone"}
    out = ogg_page(0x02, 0, serial, 0, [vorbis_id_packet()])
    out += ogg_page(0x00, 0, serial, 1,
                    [vorbis_comment_packet(vendor, comments), vorbis_setup_packet()])
    for i in range(n_audio_pages):
        flags = 0x04 if i == n_audio_pages - 1 else 0x00
        audio = [bytes((j + i) % 256 for j in range(100 + 30 * i))]
        out += ogg_page(flags, 1024 * (i + 1), serial, 2 + i, audio)
    return out


def ogg_walk(data: bytes):
    """Independent page walker; verifies every CRC bit-by-bit."""
    pages = []
    pos = 0
    while pos < len(data):
        assert data[pos : pos + 4] == b"OggS"
        (_, _, header_type, granule, serial, seq, crc, nsegs) = struct.unpack(
            "<4sBBqIIIB", data[pos : pos + 27])
        lacing = data[pos + 27 : pos + 27 + nsegs]
        body = data[pos + 27 + nsegs : pos + 27 + nsegs + sum(lacing)]
        raw = bytearray(data[pos : pos + 27 + nsegs + sum(lacing)])
        struct.pack_into("<I", raw, 22, 0)
        assert ogg_crc_bitwise(bytes(raw)) == crc, f"bad page CRC at 0x{pos:x}"
        pages.append({"type": header_type, "granule": granule, "serial": serial,
                      "seq": seq, "lacing": lacing, "payload": body})
        pos += 27 + nsegs + sum(lacing)
    return pages


def ogg_packets(pages) -> list[bytes]:
    packets = []
    partial = b""
    for page in pages:
        pos = 0
        for lace in page["lacing"]:
            partial += page["payload"][pos : pos + lace]
            pos += lace
            if lace < 255:
                packets.append(partial)
                partial = b""
    if partial:
        packets.append(partial)
    return packets


# ---------------------------------------------------------------------------
# FLAC

def flac_streaminfo_body() -> bytes:
    body = struct.pack(">HHI", 4096, 4096, 0)[:8]
    body = struct.pack(">HH", 4096, 4096) + b"\x00\x00\x06" + b"\x00\x00\x10"
    # sample rate 44100 (20 bits), 1 channel, 16 bps, total samples 0
    body += bytes([0x0A, 0xC4, 0x40 | 0x0F]) + b"\x00\x00\x00\x00" + b"\x00" * 16
    return body[:34].ljust(34, b"\x00")


def flac_block(block_type: int, body: bytes, last: bool = False) -> bytes:
    return bytes([(0x80 if last else 0) | block_type]) + len(body).to_bytes(3, "big") + body


def flac_vorbis_comment_body(vendor: str, comments: dict[str, str]) -> bytes:
    v = vendor.encode()
    out = struct.pack("<I", len(v)) + v + struct.pack("<I", len(comments))
    for key, value in comments.items():
        c = f"{key}={value}".encode()
        out += struct.pack("<I", len(c)) + c
    return out


def flac_picture_body(mime: str = "image/png", data: bytes = b"\x89PNGfake") -> bytes:
    m = mime.encode()
    return (struct.pack(">I", 3) + struct.pack(">I", len(m)) + m
            + struct.pack(">I", 0) + struct.pack(">IIII", 1, 1, 8, 0)
            + struct.pack(">I", len(data)) + data)


def flac_frames() -> bytes:
    return b"\xff\xf8\x69\x10" + bytes(range(64))


def make_flac(extra_blocks: list[bytes] = (), leading_id3: bytes = b"") -> bytes:
    last = not extra_blocks
    out = bytearray(leading_id3 + b"fLaC")
    out += flac_block(0, flac_streaminfo_body(), last=last)
    for i, block in enumerate(extra_blocks):
        out += block
    out += flac_frames()
    return bytes(out)


def flac_walk(data: bytes):
    """Independent block walker; returns (block list, frame bytes)."""
    assert data[:4] == b"fLaC"
    pos = 4
    blocks = []
    while True:
        header = data[pos]
        length = int.from_bytes(data[pos + 1 : pos + 4], "big")
        blocks.append((header & 0x7F, bool(header & 0x80),
                       data[pos + 4 : pos + 4 + length]))
        pos += 4 + length
        if header & 0x80:
            break
    return blocks, data[pos:]


# ---------------------------------------------------------------------------
# Archives

def make_zip(entries: dict[str, bytes], date_time=(2021, 6, 5, 4, 3, 2),
             comment: bytes = b"", member_comment: bytes = b"",
             compression=zipfile.ZIP_DEFLATED) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression) as zf:
        zf.comment = comment
        for name, content in entries.items():
            info = zipfile.ZipInfo(name, date_time=date_time)
            info.compress_type = compression
            info.external_attr = 0o644 << 16
            info.comment = member_comment
            info.create_system = 3
            zf.writestr(info, content)
    return buf.getvalue()


def make_tar(entries: dict[str, bytes], mtime=1622900000, uid=1000,
             fmt=tarfile.USTAR_FORMAT, pax_headers=None) -> bytes:
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w", format=fmt) as tf:
        for name, content in entries.items():
            info = tarfile.TarInfo(name)
            info.size = len(content)
            info.mtime = mtime
            info.uid = info.gid = uid
            info.uname = "alice" if uid else ""
            info.gname = "users" if uid else ""
            info.mode = 0o664 if uid else 0o644
            if pax_headers:
                info.pax_headers = dict(pax_headers)
            tf.addfile(info, io.BytesIO(content))
    return buf.getvalue()


def gzip_wrap_with_metadata(payload: bytes, filename="secret.tar", mtime=1622900000) -> bytes:
    buf = io.BytesIO()
    with gzip.GzipFile(filename=filename, mode="wb", fileobj=buf, mtime=mtime) as gz:
        gz.write(payload)
    return buf.getvalue()


_DOCX_DOCUMENT = (
    b'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
    b'<w:document xmlns:w="http://schemas.openxmlformats.org/wordprocessingml/2006/main">'
    b"<w:body><w:p><w:r><w:t>hello</w:t></w:r></w:p></w:body></w:document>"
)

_DOCX_CORE = (
    b'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
    b'<cp:coreProperties'
    b' xmlns:cp="http://schemas.openxmlformats.org/package/2006/metadata/core-properties"'
    b' xmlns:dc="http://purl.org/dc/elements/1.1/"'
    b' xmlns:dcterms="http://purl.org/dc/terms/">'
    b"<dc:creator>alice</dc:creator>"
    b"<cp:lastModifiedBy>alice</cp:lastModifiedBy>"
    b'<dcterms:created xsi:type="dcterms:W3CDTF"'
    b' xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance">2021-06-05T04:03:02Z'
    b"</dcterms:created></cp:coreProperties>"
)

_DOCX_APP = (
    b'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
    b'<Properties xmlns="http://schemas.openxmlformats.org/officeDocument/2006/extended-properties">'
    b"<Application>LibreOffice 7.0</Application></Properties>"
)


def make_docx(with_docprops: bool = True, media: dict[str, bytes] | None = None,
              **zip_kwargs) -> bytes:
    overrides = [
        ("/word/document.xml",
         "application/vnd.openxmlformats-officedocument.wordprocessingml.document.main+xml"),
    ]
    rels = [
        ("rId1", "http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument",
         "word/document.xml"),
    ]
    if with_docprops:
        overrides += [
            ("/docProps/core.xml",
             "application/vnd.openxmlformats-package.core-properties+xml"),
            ("/docProps/app.xml",
             "application/vnd.openxmlformats-officedocument.extended-properties+xml"),
        ]
        rels += [
            ("rId2", "http://schemas.openxmlformats.org/package/2006/relationships/metadata/core-properties",
             "docProps/core.xml"),
            ("rId3", "http://schemas.openxmlformats.org/officeDocument/2006/relationships/extended-properties",
             "docProps/app.xml"),
        ]
    ct = ['<?xml version="1.0" encoding="UTF-8" standalone="yes"?>',
          '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">',
          '<Default Extension="xml" ContentType="application/xml"/>',
          '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>']
    if media:
        ct.append('<Default Extension="jpg" ContentType="image/jpeg"/>')
        ct.append('<Default Extension="png" ContentType="image/png"/>')
    for part, ctype in overrides:
        ct.append(f'<Override PartName="{part}" ContentType="{ctype}"/>')
    ct.append("</Types>")
    rels_xml = ['<?xml version="1.0" encoding="UTF-8" standalone="yes"?>',
                '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">']
    for rid, rtype, target in rels:
        rels_xml.append(f'<Relationship Id="{rid}" Type="{rtype}" Target="{target}"/>')
    rels_xml.append("</Relationships>")

    entries: dict[str, bytes] = {
        "[Content_Types].xml": "".join(ct).encode(),
        "_rels/.rels": "".join(rels_xml).encode(),
        "word/document.xml": _DOCX_DOCUMENT,
    }
    if with_docprops:
        entries["docProps/core.xml"] = _DOCX_CORE
        entries["docProps/app.xml"] = _DOCX_APP
    if media:
        for name, blob in media.items():
            entries[f"word/media/{name}"] = blob
    return make_zip(entries, **zip_kwargs)


_ODT_CONTENT = (
    b'<?xml version="1.0" encoding="UTF-8"?>\n'
    b'<office:document-content'
    b' xmlns:office="urn:oasis:names:tc:opendocument:xmlns:office:1.0">'
    b"<office:body/></office:document-content>"
)

_ODT_META = (
    b'<?xml version="1.0" encoding="UTF-8"?>\n'
    b'<office:document-meta'
    b' xmlns:office="urn:oasis:names:tc:opendocument:xmlns:office:1.0"'
    b' xmlns:meta="urn:oasis:names:tc:opendocument:xmlns:meta:1.0"'
    b' xmlns:dc="http://purl.org/dc/elements/1.1/">'
    b"<office:meta><dc:creator>alice</dc:creator>"
    b"<meta:editing-duration>PT42M</meta:editing-duration>"
    b"<meta:generator>LibreOffice/7.0</meta:generator>"
    b"</office:meta></office:document-meta>"
)


def make_odt(with_meta: bool = True, with_thumbnail: bool = True,
             pictures: dict[str, bytes] | None = None,
             mimetype: bytes = b"application/vnd.oasis.opendocument.text",
             **zip_kwargs) -> bytes:
    manifest_entries = ['<manifest:file-entry manifest:full-path="/" '
                        'manifest:media-type="application/vnd.oasis.opendocument.text"/>',
                        '<manifest:file-entry manifest:full-path="content.xml" '
                        'manifest:media-type="text/xml"/>']
    files: list[tuple[str, bytes]] = [("mimetype", mimetype),
                                      ("content.xml", _ODT_CONTENT)]
    if with_meta:
        files.append(("meta.xml", _ODT_META))
        manifest_entries.append('<manifest:file-entry manifest:full-path="meta.xml" '
                                'manifest:media-type="text/xml"/>')
    if with_thumbnail:
        files.append(("Thumbnails/thumbnail.png", make_png()))
        manifest_entries.append(
            '<manifest:file-entry manifest:full-path="Thumbnails/thumbnail.png" '
            'manifest:media-type="image/png"/>')
    if pictures:
        for name, blob in pictures.items():
            files.append((f"Pictures/{name}", blob))
            manifest_entries.append(
                f'<manifest:file-entry manifest:full-path="Pictures/{name}" '
                'manifest:media-type="image/png"/>')
    manifest = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<manifest:manifest'
        ' xmlns:manifest="urn:oasis:names:tc:opendocument:xmlns:manifest:1.0">'
        + "".join(manifest_entries) + "</manifest:manifest>"
    ).encode()
    files.append(("META-INF/manifest.xml", manifest))

    date_time = zip_kwargs.pop("date_time", (2021, 6, 5, 4, 3, 2))
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for i, (name, content) in enumerate(files):
            info = zipfile.ZipInfo(name, date_time=date_time)
            info.compress_type = zipfile.ZIP_STORED if name == "mimetype" else zipfile.ZIP_DEFLATED
            zf.writestr(info, content)
    return buf.getvalue()


def zip_list(data: bytes):
    """Independent ZIP listing via the stdlib reader."""
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        assert zf.testzip() is None
        return list(zf.infolist()), {i.filename: zf.read(i) for i in zf.infolist()
                                     if not i.is_dir()}


def tar_list(data: bytes, mode="r:"):
    with tarfile.open(fileobj=io.BytesIO(data), mode=mode) as tf:
        infos = tf.getmembers()
        contents = {i.name: (tf.extractfile(i).read() if i.isreg() else b"")
                    for i in infos}
    return infos, contents


# ---------------------------------------------------------------------------
# PDF

def build_pdf(bodies: dict[int, bytes], trailer_extra: bytes = b"",
              version: bytes = b"1.4") -> bytes:
    """Assemble a classic-xref PDF from raw object bodies."""
    out = bytearray(b"%PDF-" + version + b"\n")
    offsets = {}
    for num in sorted(bodies):
        offsets[num] = len(out)
        out += b"%d 0 obj\n" % num + bodies[num] + b"\nendobj\n"
    xref_off = len(out)
    maxnum = max(bodies)
    out += b"xref\n0 %d\n" % (maxnum + 1)
    out += b"0000000000 65535 f \n"
    for num in range(1, maxnum + 1):
        if num in offsets:
            out += b"%010d 00000 n \n" % offsets[num]
        else:
            out += b"0000000000 65535 f \n"
    out += b"trailer\n<< /Size %d /Root 1 0 R %s>>\n" % (maxnum + 1, trailer_extra)
    out += b"startxref\n%d\n%%%%EOF\n" % xref_off
    return bytes(out)


PDF_CONTENT = b"BT /F1 12 Tf 72 720 Td (Hello) Tj ET"


def minimal_pdf(info: dict[str, str] | None = None, xmp: bytes | None = None,
                doc_id: bool = False, page_extra: bytes = b"") -> bytes:
    bodies = {
        1: b"<< /Type /Catalog /Pages 2 0 R%s >>" % (
            b" /Metadata 6 0 R" if xmp else b""),
        2: b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
        3: b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] "
           b"/Contents 4 0 R%s >>" % page_extra,
        4: b"<< /Length %d >>\nstream\n%s\nendstream" % (len(PDF_CONTENT), PDF_CONTENT),
    }
    trailer_extra = b""
    if info:
        parts = " ".join(f"/{k} ({v})" for k, v in info.items())
        bodies[5] = f"<< {parts} >>".encode("latin-1")
        trailer_extra += b"/Info 5 0 R "
    if xmp:
        bodies[6] = (b"<< /Type /Metadata /Subtype /XML /Length %d >>\nstream\n"
                     % len(xmp)) + xmp + b"\nendstream"
    if doc_id:
        trailer_extra += b"/ID [<deadbeefdeadbeefdeadbeefdeadbeef> "
        trailer_extra += b"<cafebabecafebabecafebabecafebabe>] "
    return build_pdf(bodies, trailer_extra)


XMP_PACKET = (
    b'<x:xmpmeta xmlns:x="adobe:ns:meta/">'
    b'<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">'
    b'<rdf:Description rdf:about=""'
    b' xmlns:xmp="http://ns.adobe.com/xap/1.0/"'
    b' xmp:CreatorTool="Adobe Photoshop CS3 Windows"/>'
    b"</rdf:RDF></x:xmpmeta>"
)


def pdf_with_incremental_update(first_author=b"revision-one-author",
                                second_author=b"revision-two-author") -> bytes:
    base_bodies = {
        1: b"<< /Type /Catalog /Pages 2 0 R >>",
        2: b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
        3: b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents 4 0 R >>",
        4: b"<< /Length %d >>\nstream\n%s\nendstream" % (len(PDF_CONTENT), PDF_CONTENT),
        5: b"<< /Author (%s) >>" % first_author,
    }
    base = build_pdf(base_bodies, b"/Info 5 0 R ")
    prev_xref = int(base.rsplit(b"startxref\n", 1)[1].split(b"\n", 1)[0])
    update = bytearray(base)
    new_info_off = len(update)
    update += b"5 0 obj\n<< /Author (%s) >>\nendobj\n" % second_author
    xref_off = len(update)
    update += b"xref\n5 1\n%010d 00000 n \n" % new_info_off
    update += (b"trailer\n<< /Size 6 /Root 1 0 R /Info 5 0 R /Prev %d >>\n"
               % prev_xref)
    update += b"startxref\n%d\n%%%%EOF\n" % xref_off
    return bytes(update)


def pdf_scan_objects(data: bytes) -> dict[int, int]:
    """Independent object finder: scans for 'N G obj' tokens."""
    import re

    found = {}
    for m in re.finditer(rb"(?m)^(\d+) (\d+) obj", data):
        found[int(m.group(1))] = m.start()
    return found
