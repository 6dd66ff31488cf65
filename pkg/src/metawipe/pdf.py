"""Structural PDF scrubber.

Parses the full cross-reference machinery (classic tables, xref streams,
object streams), collapses incremental updates, removes the document-level
metadata carriers (/Info, /ID, XMP /Metadata streams, /PieceInfo,
/LastModified) and re-serializes as a single-revision document with a
classic xref table.  Page content streams are preserved byte-for-byte.

Active content (JavaScript, attachments, hyperlinks) is NOT neutralized;
every clean result carries a warning saying so.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    Category,
    CleanResult,
    MetadataEntry,
    ParseError,
    ScrubError,
    Status,
    finalize,
    render_binary,
    render_text,
)


class EncryptedDocumentError(ParseError):
    pass


class MalformedXrefError(ParseError):
    pass


class UnsupportedFilterError(ParseError):
    pass


class Name(str):
    """A PDF name object (distinct from byte strings)."""

    __slots__ = ()


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int


@dataclass
class Stream:
    dict: dict
    raw: bytes


@dataclass
class PdfDocument:
    version: str
    objects: dict  # object number -> value (latest generation wins)
    trailer: dict

    def resolve(self, value):
        seen = 0
        while isinstance(value, Ref):
            value = self.objects.get(value.num)
            seen += 1
            if seen > 64:
                raise ParseError("reference cycle while resolving")
        return value


_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMS = b"()<>[]{}/%"


def _is_regular(b: int) -> bool:
    return b not in _WHITESPACE and b not in _DELIMS


class _Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == 0x25:  # comment
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            else:
                return

    def read_keyword(self) -> bytes:
        start = self.pos
        data = self.data
        while self.pos < len(data) and _is_regular(data[self.pos]):
            self.pos += 1
        return data[start : self.pos]

    def expect_keyword(self, word: bytes):
        self.skip_ws()
        got = self.read_keyword()
        if got != word:
            raise ParseError(f"expected {word!r}, got {got!r}", self.pos)

    def parse_object(self):
        self.skip_ws()
        data = self.data
        if self.pos >= len(data):
            raise ParseError("unexpected end of data", self.pos)
        c = data[self.pos]
        if c == 0x3C:  # '<'
            if data[self.pos + 1 : self.pos + 2] == b"<":
                return self._parse_dict()
            return self._parse_hex_string()
        if c == 0x28:  # '('
            return self._parse_literal_string()
        if c == 0x2F:  # '/'
            return self._parse_name()
        if c == 0x5B:  # '['
            return self._parse_array()
        if c in b"+-.0123456789":
            return self._parse_number_or_ref()
        word = self.read_keyword()
        if word == b"true":
            return True
        if word == b"false":
            return False
        if word == b"null":
            return None
        raise ParseError(f"unexpected token {word!r}", self.pos)

    def _parse_dict(self) -> dict:
        self.pos += 2
        result: dict = {}
        while True:
            self.skip_ws()
            if self.data[self.pos : self.pos + 2] == b">>":
                self.pos += 2
                return result
            key = self._parse_name()
            result[str(key)] = self.parse_object()

    def _parse_array(self) -> list:
        self.pos += 1
        items = []
        while True:
            self.skip_ws()
            if self.data[self.pos : self.pos + 1] == b"]":
                self.pos += 1
                return items
            items.append(self.parse_object())

    def _parse_name(self) -> Name:
        if self.data[self.pos] != 0x2F:
            raise ParseError("expected name", self.pos)
        self.pos += 1
        out = bytearray()
        data = self.data
        while self.pos < len(data) and _is_regular(data[self.pos]):
            c = data[self.pos]
            if c == 0x23 and self.pos + 2 < len(data):
                try:
                    out.append(int(data[self.pos + 1 : self.pos + 3], 16))
                    self.pos += 3
                    continue
                except ValueError:
                    pass
            out.append(c)
            self.pos += 1
        return Name(out.decode("latin-1"))

    def _parse_hex_string(self) -> bytes:
        self.pos += 1
        end = self.data.find(b">", self.pos)
        if end < 0:
            raise ParseError("unterminated hex string", self.pos)
        digits = bytes(
            b for b in self.data[self.pos : end] if b not in _WHITESPACE
        )
        self.pos = end + 1
        if len(digits) % 2:
            digits += b"0"
        return bytes.fromhex(digits.decode("latin-1"))

    def _parse_literal_string(self) -> bytes:
        data = self.data
        pos = self.pos + 1
        out = bytearray()
        depth = 1
        while pos < len(data):
            c = data[pos]
            if c == 0x5C:  # backslash
                pos += 1
                if pos >= len(data):
                    break
                e = data[pos]
                simple = {0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12,
                          0x28: 0x28, 0x29: 0x29, 0x5C: 0x5C}
                if e in simple:
                    out.append(simple[e])
                    pos += 1
                elif 0x30 <= e <= 0x37:
                    oct_digits = data[pos : pos + 3]
                    n = 0
                    taken = 0
                    for d in oct_digits:
                        if 0x30 <= d <= 0x37:
                            n = n * 8 + (d - 0x30)
                            taken += 1
                        else:
                            break
                    out.append(n & 0xFF)
                    pos += taken
                elif e in (0x0D, 0x0A):  # line continuation
                    pos += 1
                    if e == 0x0D and data[pos : pos + 1] == b"\n":
                        pos += 1
                else:
                    out.append(e)
                    pos += 1
            elif c == 0x28:
                depth += 1
                out.append(c)
                pos += 1
            elif c == 0x29:
                depth -= 1
                if depth == 0:
                    self.pos = pos + 1
                    return bytes(out)
                out.append(c)
                pos += 1
            else:
                out.append(c)
                pos += 1
        raise ParseError("unterminated literal string", self.pos)

    def _parse_number_or_ref(self):
        num = self._parse_number()
        if isinstance(num, int) and num >= 0:
            save = self.pos
            self.skip_ws()
            if self.pos < len(self.data) and self.data[self.pos] in b"0123456789":
                try:
                    gen = self._parse_number()
                except ParseError:
                    self.pos = save
                    return num
                save2 = self.pos
                self.skip_ws()
                if isinstance(gen, int) and self.data[self.pos : self.pos + 1] == b"R":
                    nxt = self.data[self.pos + 1 : self.pos + 2]
                    if not nxt or not _is_regular(nxt[0]):
                        self.pos += 1
                        return Ref(num, gen)
                self.pos = save
                return num
            self.pos = save
        return num

    def _parse_number(self):
        start = self.pos
        data = self.data
        if data[self.pos] in b"+-":
            self.pos += 1
        seen_dot = False
        while self.pos < len(data) and (
            data[self.pos] in b"0123456789"
            or (data[self.pos] == 0x2E and not seen_dot)
        ):
            if data[self.pos] == 0x2E:
                seen_dot = True
            self.pos += 1
        token = data[start : self.pos]
        if token in (b"", b"+", b"-", b".", b"-."):
            raise ParseError(f"bad number {token!r}", start)
        text = token.decode("latin-1")
        return float(text) if seen_dot else int(text)


# ---------------------------------------------------------------------------
# Stream filters (only what xref/object streams need)

def _decode_stream(stream: Stream, resolve) -> bytes:
    filt = resolve(stream.dict.get("Filter"))
    raw = stream.raw
    if filt is None:
        return raw
    filters = filt if isinstance(filt, list) else [filt]
    parms = resolve(stream.dict.get("DecodeParms"))
    parms_list = parms if isinstance(parms, list) else [parms]
    for i, f in enumerate(filters):
        f = resolve(f)
        if str(f) != "FlateDecode":
            raise UnsupportedFilterError(f"unsupported stream filter {f}")
        try:
            raw = zlib.decompress(raw)
        except zlib.error as exc:
            raise ParseError(f"FlateDecode failed: {exc}") from exc
        parm = resolve(parms_list[i]) if i < len(parms_list) else None
        if isinstance(parm, dict):
            predictor = resolve(parm.get("Predictor", 1))
            if predictor and predictor > 1:
                columns = resolve(parm.get("Columns", 1))
                colors = resolve(parm.get("Colors", 1))
                bpc = resolve(parm.get("BitsPerComponent", 8))
                raw = _undo_png_predictor(raw, columns * colors * bpc // 8)
    return raw


def _undo_png_predictor(data: bytes, rowlen: int) -> bytes:
    out = bytearray()
    prev = bytearray(rowlen)
    pos = 0
    while pos < len(data):
        ftype = data[pos]
        row = bytearray(data[pos + 1 : pos + 1 + rowlen])
        pos += 1 + len(row)
        if ftype == 2:  # Up — the predictor xref streams use in practice
            for i in range(len(row)):
                row[i] = (row[i] + prev[i]) & 0xFF
        elif ftype == 1:
            for i in range(1, len(row)):
                row[i] = (row[i] + row[i - 1]) & 0xFF
        elif ftype != 0:
            raise UnsupportedFilterError(f"unsupported PNG predictor row type {ftype}")
        out += row
        prev = row
    return bytes(out)


# ---------------------------------------------------------------------------
# Document loading

_XREF_ENTRY_RE = re.compile(rb"(\d{10})\s(\d{5})\s([nf])")


class _Loader:
    def __init__(self, data: bytes):
        self.data = data
        self.cache: dict[int, object] = {}
        self.offsets: dict[int, tuple] = {}  # num -> ('o', off) | ('c', stm, idx) | ('f',)
        self.trailer: dict = {}

    def load(self) -> PdfDocument:
        data = self.data
        m = re.match(rb"%PDF-(\d+\.\d+)", data)
        if not m:
            raise ParseError("missing %PDF- header", 0)
        version = m.group(1).decode("latin-1")
        tail = data[-2048:]
        idx = tail.rfind(b"startxref")
        if idx < 0:
            raise MalformedXrefError("startxref not found")
        lex = _Lexer(tail, idx + len(b"startxref"))
        lex.skip_ws()
        start = lex._parse_number()
        if not isinstance(start, int) or start < 0 or start >= len(data):
            raise MalformedXrefError(f"bad startxref offset {start}")
        self._follow_xref_chain(start)
        if "Encrypt" in self.trailer:
            raise EncryptedDocumentError("document is encrypted")
        objects: dict[int, object] = {}
        for num, entry in self.offsets.items():
            if entry[0] == "f":
                continue
            obj = self._load_object(num)
            if obj is not None or entry[0] != "f":
                objects[num] = obj
        return PdfDocument(version, objects, dict(self.trailer))

    # -- xref chain ---------------------------------------------------------

    def _follow_xref_chain(self, start: int):
        seen_offsets: set[int] = set()
        queue = [start]
        while queue:
            off = queue.pop(0)
            if off in seen_offsets:
                continue
            seen_offsets.add(off)
            trailer = self._read_xref_section(off)
            for k, v in trailer.items():
                self.trailer.setdefault(k, v)
            if "XRefStm" in trailer and isinstance(trailer["XRefStm"], int):
                queue.append(trailer["XRefStm"])
            prev = trailer.get("Prev")
            if isinstance(prev, int):
                queue.append(prev)

    def _read_xref_section(self, off: int) -> dict:
        lex = _Lexer(self.data, off)
        lex.skip_ws()
        if self.data[lex.pos : lex.pos + 4] == b"xref":
            return self._read_classic_xref(lex)
        return self._read_xref_stream(off)

    def _read_classic_xref(self, lex: _Lexer) -> dict:
        lex.pos += 4
        while True:
            lex.skip_ws()
            if self.data[lex.pos : lex.pos + 7] == b"trailer":
                lex.pos += 7
                trailer = lex.parse_object()
                if not isinstance(trailer, dict):
                    raise MalformedXrefError("trailer is not a dictionary")
                return trailer
            try:
                first = lex._parse_number()
                lex.skip_ws()
                count = lex._parse_number()
            except ParseError as exc:
                raise MalformedXrefError(f"bad xref subsection header: {exc}") from exc
            lex.skip_ws()
            for i in range(count):
                m = _XREF_ENTRY_RE.match(self.data, lex.pos)
                if not m:
                    raise MalformedXrefError(f"bad xref entry at offset {lex.pos}")
                lex.pos = m.end()
                lex.skip_ws()
                num = first + i
                if num in self.offsets:
                    continue  # newer section already claimed this object
                if m.group(3) == b"n":
                    self.offsets[num] = ("o", int(m.group(1)))
                else:
                    self.offsets[num] = ("f",)

    def _read_xref_stream(self, off: int) -> dict:
        num, gen, obj = self._parse_indirect_at(off)
        if not isinstance(obj, Stream) or str(obj.dict.get("Type")) != "XRef":
            raise MalformedXrefError(f"no xref table or stream at offset {off}")
        decoded = _decode_stream(obj, self._resolve_simple)
        w = obj.dict.get("W")
        size = obj.dict.get("Size")
        if not isinstance(w, list) or not isinstance(size, int):
            raise MalformedXrefError("xref stream missing W/Size")
        widths = [int(x) for x in w]
        index = obj.dict.get("Index", [0, size])
        rowlen = sum(widths)
        pos = 0
        pairs = [(index[i], index[i + 1]) for i in range(0, len(index), 2)]
        for first, count in pairs:
            for i in range(count):
                if pos + rowlen > len(decoded):
                    raise MalformedXrefError("xref stream data truncated")
                fields = []
                for width in widths:
                    fields.append(int.from_bytes(decoded[pos : pos + width], "big"))
                    pos += width
                ftype = fields[0] if widths[0] else 1
                numi = first + i
                if numi in self.offsets:
                    continue
                if ftype == 1:
                    self.offsets[numi] = ("o", fields[1])
                elif ftype == 2:
                    self.offsets[numi] = ("c", fields[1], fields[2])
                else:
                    self.offsets[numi] = ("f",)
        return dict(obj.dict)

    # -- object loading -----------------------------------------------------

    def _resolve_simple(self, value):
        if isinstance(value, Ref):
            return self._load_object(value.num)
        return value

    def _load_object(self, num: int, _guard: Optional[set] = None):
        if num in self.cache:
            return self.cache[num]
        entry = self.offsets.get(num)
        if entry is None or entry[0] == "f":
            return None
        guard = _guard or set()
        if num in guard:
            raise ParseError(f"cyclic object definition for object {num}")
        guard.add(num)
        if entry[0] == "o":
            pnum, _, obj = self._parse_indirect_at(entry[1], guard)
            self.cache[pnum] = obj
            if pnum != num:
                # Offset pointed at a different object; treat ours as missing.
                self.cache.setdefault(num, None)
            return self.cache[num]
        # entry in an object stream
        _, stm_num, idx = entry
        self._expand_object_stream(stm_num, guard)
        return self.cache.get(num)

    def _expand_object_stream(self, stm_num: int, guard: set):
        stm = self._load_object(stm_num, guard)
        if not isinstance(stm, Stream):
            raise ParseError(f"object stream {stm_num} is not a stream")
        decoded = _decode_stream(stm, self._resolve_simple)
        n = self._resolve_simple(stm.dict.get("N"))
        first = self._resolve_simple(stm.dict.get("First"))
        if not isinstance(n, int) or not isinstance(first, int):
            raise ParseError(f"object stream {stm_num} missing N/First")
        head = _Lexer(decoded, 0)
        pairs = []
        for _ in range(n):
            head.skip_ws()
            onum = head._parse_number()
            head.skip_ws()
            ooff = head._parse_number()
            pairs.append((onum, ooff))
        for onum, ooff in pairs:
            if onum in self.cache:
                continue
            entry = self.offsets.get(onum)
            if entry is not None and entry[:2] != ("c", stm_num):
                continue  # newer revision lives elsewhere
            lex = _Lexer(decoded, first + ooff)
            self.cache[onum] = lex.parse_object()

    def _parse_indirect_at(self, off: int, guard: Optional[set] = None):
        if off < 0 or off >= len(self.data):
            raise ParseError(f"object offset {off} out of range")
        lex = _Lexer(self.data, off)
        lex.skip_ws()
        num = lex._parse_number()
        lex.skip_ws()
        gen = lex._parse_number()
        lex.expect_keyword(b"obj")
        value = lex.parse_object()
        save = lex.pos
        lex.skip_ws()
        word = lex.read_keyword()
        if word == b"stream":
            if not isinstance(value, dict):
                raise ParseError("stream keyword without a dictionary", lex.pos)
            pos = lex.pos
            if self.data[pos : pos + 2] == b"\r\n":
                pos += 2
            elif self.data[pos : pos + 1] == b"\n":
                pos += 1
            length = value.get("Length")
            if isinstance(length, Ref):
                length = self._load_object(length.num, guard)
            if isinstance(length, int) and 0 <= length <= len(self.data) - pos:
                raw = self.data[pos : pos + length]
                tail = self.data[pos + length : pos + length + 20]
                if b"endstream" not in tail:
                    raw = None  # stated length is wrong; fall back to scanning
            else:
                raw = None
            if raw is None:
                end = self.data.find(b"endstream", pos)
                if end < 0:
                    raise ParseError("unterminated stream", pos)
                raw = self.data[pos:end].rstrip(b"\r\n")
            value = Stream(value, raw)
        else:
            lex.pos = save
        return num, gen, value


def parse_pdf(data: bytes) -> PdfDocument:
    """Load all objects, collapsing incremental updates (latest wins)."""
    return _Loader(data).load()


# ---------------------------------------------------------------------------
# Value rendering / serialization

def _render_pdf_string(value: bytes) -> str:
    if value.startswith(b"\xfe\xff"):
        try:
            return render_text(value.decode("utf-16"))
        except UnicodeDecodeError:
            pass
    try:
        return render_text(value.decode("utf-8"))
    except UnicodeDecodeError:
        return render_text(value.decode("latin-1"))


def _render_value(value) -> str:
    if isinstance(value, bytes):
        return _render_pdf_string(value)
    if isinstance(value, Name):
        return str(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, Stream):
        return render_binary(len(value.raw))
    return render_text(repr(value))


def _fmt_real(x: float) -> str:
    s = repr(x)
    if "e" in s or "E" in s:
        s = f"{x:.10f}".rstrip("0").rstrip(".")
    return s


def _serialize_name(name: str) -> str:
    out = ["/"]
    for ch in name.encode("latin-1"):
        if ch <= 32 or ch > 126 or ch in _DELIMS or ch == 0x23:
            out.append(f"#{ch:02X}")
        else:
            out.append(chr(ch))
    return "".join(out)


def _serialize_string(value: bytes) -> str:
    out = ["("]
    for b in value:
        if b in (0x28, 0x29, 0x5C):
            out.append("\\" + chr(b))
        elif 32 <= b <= 126:
            out.append(chr(b))
        else:
            out.append(f"\\{b:03o}")
    out.append(")")
    return "".join(out)


def _serialize(value, renum: dict[int, int]) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Name):
        return _serialize_name(str(value))
    if isinstance(value, Ref):
        return f"{renum[value.num]} 0 R"
    if isinstance(value, bytes):
        return _serialize_string(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_real(value)
    if isinstance(value, list):
        return "[ " + " ".join(_serialize(v, renum) for v in value) + " ]"
    if isinstance(value, dict):
        parts = []
        for k, v in value.items():
            parts.append(f"{_serialize_name(k)} {_serialize(v, renum)}")
        return "<< " + " ".join(parts) + " >>"
    raise ParseError(f"cannot serialize {type(value).__name__}")


def _write_pdf(doc: PdfDocument, reachable: list[int]) -> bytes:
    renum = {old: i + 1 for i, old in enumerate(sorted(reachable))}
    out = bytearray(f"%PDF-{doc.version}\n".encode("latin-1"))
    offsets: dict[int, int] = {}
    for old in sorted(reachable):
        new = renum[old]
        offsets[new] = len(out)
        value = doc.objects[old]
        out += f"{new} 0 obj\n".encode("latin-1")
        if isinstance(value, Stream):
            d = dict(value.dict)
            d["Length"] = len(value.raw)
            out += _serialize(d, renum).encode("latin-1")
            out += b"\nstream\n"
            out += value.raw
            out += b"\nendstream"
        else:
            out += _serialize(value, renum).encode("latin-1")
        out += b"\nendobj\n"
    xref_off = len(out)
    n = len(reachable)
    out += f"xref\n0 {n + 1}\n".encode("latin-1")
    out += b"0000000000 65535 f \n"
    for new in range(1, n + 1):
        out += f"{offsets[new]:010d} 00000 n \n".encode("latin-1")
    root = doc.trailer.get("Root")
    trailer = {"Size": n + 1, "Root": root}
    out += b"trailer\n" + _serialize(trailer, renum).encode("latin-1")
    out += f"\nstartxref\n{xref_off}\n".encode("latin-1")
    out += b"%%EOF\n"
    return bytes(out)


# ---------------------------------------------------------------------------
# Reachability / scrubbing

_REMOVED_KEYS = ("Metadata", "PieceInfo", "LastModified")


def _walk_reachable(doc: PdfDocument, scrub: bool):
    """BFS from Root; optionally strips metadata keys from every dict.

    Returns (reachable object numbers in traversal order, removal entries).
    """
    root_ref = doc.trailer.get("Root")
    if root_ref is None:
        raise ParseError("trailer has no /Root")
    entries: list[MetadataEntry] = []
    visited_nums: set[int] = set()
    order: list[int] = []
    visited_containers: set[int] = set()

    def describe(num: Optional[int], d: dict) -> str:
        if str(d.get("Type")) == "Catalog":
            return "Catalog"
        if str(d.get("Type")) == "Page":
            return "Page"
        return f"object {num}" if num is not None else "dictionary"

    def visit(value, owner_num: Optional[int]):
        if isinstance(value, Ref):
            if value.num in visited_nums:
                return
            visited_nums.add(value.num)
            if value.num in doc.objects:
                order.append(value.num)
                visit(doc.objects[value.num], value.num)
            return
        if id(value) in visited_containers:
            return
        if isinstance(value, Stream):
            visited_containers.add(id(value))
            visit(value.dict, owner_num)
            return
        if isinstance(value, dict):
            visited_containers.add(id(value))
            where = describe(owner_num, value)
            for key in _REMOVED_KEYS:
                if key in value:
                    target = value[key]
                    if key == "Metadata":
                        resolved = doc.resolve(target)
                        size = len(resolved.raw) if isinstance(resolved, Stream) else 0
                        detail = f"(XMP, {size} bytes)"
                    else:
                        detail = _render_value(doc.resolve(target))
                    if scrub:
                        del value[key]
                    entries.append(MetadataEntry(
                        f"PDF.{where}.{key}", detail, where))
            for v in list(value.values()):
                visit(v, owner_num)
            return
        if isinstance(value, list):
            visited_containers.add(id(value))
            for v in value:
                visit(v, owner_num)

    visit(root_ref, None)
    return order, entries


def _info_entries(doc: PdfDocument) -> list[MetadataEntry]:
    entries = []
    info = doc.trailer.get("Info")
    if info is not None:
        resolved = doc.resolve(info)
        if isinstance(resolved, dict):
            for key, value in resolved.items():
                entries.append(MetadataEntry(
                    f"PDF.Info.{key}", _render_value(doc.resolve(value)), "Info dictionary"))
        else:
            entries.append(MetadataEntry("PDF.Info", _render_value(resolved), "trailer"))
    doc_id = doc.trailer.get("ID")
    if isinstance(doc_id, list):
        rendered = " ".join(
            v.hex() if isinstance(v, bytes) else _render_value(v) for v in doc_id)
        entries.append(MetadataEntry("PDF.ID", rendered, "trailer"))
    return entries


_ACTIVE_CONTENT_WARNING = (
    "active or embedded content (JavaScript, attachments, hyperlinks) is "
    "not neutralized by structural scrubbing"
)


def clean_pdf(data: bytes) -> CleanResult:
    """Remove /Info, /ID, XMP metadata, /PieceInfo and /LastModified.

    Output is a single-revision document with a classic xref table;
    objects orphaned by earlier incremental updates are not emitted.
    """
    try:
        doc = parse_pdf(data)
        removed = _info_entries(doc)
        doc.trailer.pop("Info", None)
        doc.trailer.pop("ID", None)
        reachable, scrub_entries = _walk_reachable(doc, scrub=True)
        removed.extend(scrub_entries)
        # A second pass: objects referenced only by removed keys are orphaned.
        reachable, _ = _walk_reachable(doc, scrub=False)
        out = _write_pdf(doc, reachable)
    except ScrubError as exc:
        return CleanResult(Status.FAILED, None, [], [str(exc)])
    result = finalize(data, out, removed, [_ACTIVE_CONTENT_WARNING], "PDF.encoding")
    return result


_CATALOG_STRUCTURAL_KEYS = frozenset([
    "Type", "Version", "Pages", "PageLabels", "Names", "Dests", "Outlines",
    "Threads", "OpenAction", "AA", "URI", "AcroForm", "StructTreeRoot",
    "MarkInfo", "Lang", "PageLayout", "PageMode", "ViewerPreferences",
    "OCProperties", "Extensions", "Metadata", "PieceInfo",
])


def _xmp_stream_entries(doc: PdfDocument, stream: Stream, where: str) -> list[MetadataEntry]:
    from .image import _xmp_entries

    try:
        raw = _decode_stream(stream, doc.resolve)
    except ScrubError:
        return [MetadataEntry(f"PDF.{where}.Metadata", render_binary(len(stream.raw)), where)]
    import dataclasses as _dc
    return [
        _dc.replace(e, key=f"PDF.{e.key}", location=where)
        for e in _xmp_entries(raw, where)
    ]


def _iter_pages(doc: PdfDocument):
    root = doc.resolve(doc.trailer.get("Root"))
    if not isinstance(root, dict):
        return
    seen: set[int] = set()
    stack = [root.get("Pages")]
    index = 0
    while stack:
        node_ref = stack.pop(0)
        if isinstance(node_ref, Ref):
            if node_ref.num in seen:
                continue
            seen.add(node_ref.num)
        node = doc.resolve(node_ref)
        if not isinstance(node, dict):
            continue
        if str(node.get("Type")) == "Page":
            index += 1
            yield index, node
        else:
            kids = doc.resolve(node.get("Kids"))
            if isinstance(kids, list):
                stack = kids + stack


def inspect_pdf(data: bytes) -> list[MetadataEntry]:
    """List /Info keys, XMP fields, /ID, /PieceInfo and page /LastModified."""
    doc = parse_pdf(data)
    entries = _info_entries(doc)
    root = doc.resolve(doc.trailer.get("Root"))
    if isinstance(root, dict):
        meta = doc.resolve(root.get("Metadata"))
        if isinstance(meta, Stream):
            entries.extend(_xmp_stream_entries(doc, meta, "Catalog"))
        if "PieceInfo" in root:
            entries.append(MetadataEntry(
                "PDF.Catalog.PieceInfo", _render_value(doc.resolve(root["PieceInfo"])),
                "Catalog"))
        for key in root:
            if key not in _CATALOG_STRUCTURAL_KEYS:
                entries.append(MetadataEntry(
                    f"PDF.Catalog.{key}", _render_value(doc.resolve(root[key])),
                    "Catalog", Category.UNKNOWN))
    for index, page in _iter_pages(doc):
        meta = doc.resolve(page.get("Metadata"))
        if isinstance(meta, Stream):
            entries.extend(_xmp_stream_entries(doc, meta, f"page {index}"))
        if "LastModified" in page:
            entries.append(MetadataEntry(
                "PDF.Page.LastModified",
                _render_value(doc.resolve(page["LastModified"])), f"page {index}"))
        if "PieceInfo" in page:
            entries.append(MetadataEntry(
                "PDF.Page.PieceInfo",
                _render_value(doc.resolve(page["PieceInfo"])), f"page {index}"))
    return entries
