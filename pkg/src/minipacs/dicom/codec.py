"""Binary codec for the two uncompressed little-endian transfer syntaxes.

File layout handled here (bit-exact):

* Part-10: 128-byte preamble, "DICM", file meta group in explicit VR LE,
  then the main dataset in the syntax named by (0002,0010).
* Explicit VR element: tag (2+2 LE), VR (2 ASCII), then for OB/OW/SQ/UN/UT
  2 reserved bytes + 4-byte LE length, otherwise 2-byte LE length.
* Implicit VR element: tag + 4-byte LE length.
* Undefined length (0xFFFFFFFF) is accepted for SQ and items on read;
  the writer always emits defined lengths.
"""

from __future__ import annotations

import struct

from ..errors import (
    BadLength,
    DicomError,
    MissingMagic,
    Truncated,
    UnencodableValue,
    UnsupportedTransferSyntax,
    UnsupportedVr,
)
from .dataset import (
    EXPLICIT_VR_LE,
    IMPLICIT_VR_LE,
    SUPPORTED_SYNTAXES,
    DataElement,
    DataSet,
    DicomObject,
)
from .dictionary import (
    BYTES_VRS,
    FLOAT_VR_FORMATS,
    INT_VR_FORMATS,
    LONG_LENGTH_VRS,
    SINGLE_VALUE_TEXT_VRS,
    TEXT_VRS,
    VR_CODES,
    vr_for_tag,
)
from .tags import (
    FILE_META_GROUP_LENGTH,
    ITEM,
    ITEM_DELIMITER,
    SEQUENCE_DELIMITER,
    TRANSFER_SYNTAX_UID,
    Tag,
)

UNDEFINED_LENGTH = 0xFFFFFFFF
MAGIC = b"DICM"
PREAMBLE_SIZE = 128


class ByteReader:
    """Forward-only cursor over a byte buffer."""

    __slots__ = ("data", "pos", "end")

    def __init__(self, data: bytes, pos: int = 0, end: int | None = None):
        self.data = data
        self.pos = pos
        self.end = len(data) if end is None else end

    @property
    def remaining(self) -> int:
        return self.end - self.pos

    def take(self, n: int) -> bytes:
        if n > self.remaining:
            raise Truncated(f"needed {n} bytes, {self.remaining} left at offset {self.pos}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def peek_tag(self) -> Tag | None:
        if self.remaining < 4:
            return None
        g, e = struct.unpack_from("<HH", self.data, self.pos)
        return Tag(g, e)

    def window(self, length: int) -> "ByteReader":
        """Sub-reader covering the next `length` bytes; advances this reader."""
        if length > self.remaining:
            raise BadLength(f"length {length} exceeds remaining {self.remaining}")
        sub = ByteReader(self.data, self.pos, self.pos + length)
        self.pos += length
        return sub


def _read_tag(reader: ByteReader) -> Tag:
    g = reader.u16()
    e = reader.u16()
    return Tag(g, e)


# --- element decoding -------------------------------------------------------

def decode_element(reader: ByteReader, syntax: str) -> DataElement:
    """Decode one element, consuming exactly its encoded bytes."""
    explicit = _is_explicit(syntax)
    tag = _read_tag(reader)
    if tag.group == 0xFFFE:
        raise BadLength(f"unexpected delimiter tag {tag} outside a sequence")
    if explicit:
        vr_bytes = reader.take(2)
        vr = vr_bytes.decode("ascii", errors="replace")
        if vr not in VR_CODES:
            raise UnsupportedVr(f"VR {vr_bytes!r} at offset {reader.pos - 2}")
        if vr in LONG_LENGTH_VRS:
            reader.take(2)
            length = reader.u32()
        else:
            length = reader.u16()
    else:
        vr = vr_for_tag(tag)
        length = reader.u32()

    if vr == "SQ":
        items = _decode_sequence_items(reader, syntax, length)
        return DataElement(tag, "SQ", items)
    if length == UNDEFINED_LENGTH:
        raise BadLength(f"undefined length on non-SQ element {tag}")
    raw = reader.window(length).take(length)
    try:
        return DataElement(tag, vr, _decode_value(vr, raw, tag))
    except ValueError as exc:
        raise BadLength(f"unrepresentable value for {tag}: {exc}") from exc


def _decode_sequence_items(reader: ByteReader, syntax: str, length: int) -> list[DataSet]:
    items: list[DataSet] = []
    if length == UNDEFINED_LENGTH:
        while True:
            tag = _read_tag(reader)
            if tag == SEQUENCE_DELIMITER:
                _expect_zero_length(reader, tag)
                return items
            items.append(_decode_item(reader, syntax, tag))
    window = reader.window(length)
    while window.remaining:
        tag = _read_tag(window)
        items.append(_decode_item(window, syntax, tag))
    return items


def _decode_item(reader: ByteReader, syntax: str, tag: Tag) -> DataSet:
    if tag != ITEM:
        raise BadLength(f"expected item tag, found {tag}")
    length = reader.u32()
    elements: list[DataElement] = []
    if length == UNDEFINED_LENGTH:
        while True:
            next_tag = reader.peek_tag()
            if next_tag is None:
                raise Truncated("item of undefined length never delimited")
            if next_tag == ITEM_DELIMITER:
                _read_tag(reader)
                _expect_zero_length(reader, next_tag)
                break
            elements.append(decode_element(reader, syntax))
    else:
        window = reader.window(length)
        while window.remaining:
            elements.append(decode_element(window, syntax))
    try:
        return DataSet(elements)
    except ValueError as exc:
        raise BadLength(f"malformed item: {exc}") from exc


def _expect_zero_length(reader: ByteReader, tag: Tag) -> None:
    length = reader.u32()
    if length != 0:
        raise BadLength(f"delimiter {tag} carries nonzero length {length}")


def _decode_value(vr: str, raw: bytes, tag: Tag):
    try:
        if vr in BYTES_VRS:
            return raw
        if vr in TEXT_VRS:
            if raw == b"":
                return ()
            parts = [raw] if vr in SINGLE_VALUE_TEXT_VRS else raw.split(b"\\")
            return tuple(p.decode("latin-1").rstrip(" \x00") for p in parts)
        if vr in INT_VR_FORMATS:
            fmt = INT_VR_FORMATS[vr]
            size = struct.calcsize(fmt)
            if len(raw) % size:
                raise BadLength(f"{vr} value length {len(raw)} not a multiple of {size} ({tag})")
            return tuple(struct.unpack_from(fmt, raw, i)[0] for i in range(0, len(raw), size))
        if vr in FLOAT_VR_FORMATS:
            fmt = FLOAT_VR_FORMATS[vr]
            size = struct.calcsize(fmt)
            if len(raw) % size:
                raise BadLength(f"{vr} value length {len(raw)} not a multiple of {size} ({tag})")
            return tuple(struct.unpack_from(fmt, raw, i)[0] for i in range(0, len(raw), size))
        if vr == "AT":
            if len(raw) % 4:
                raise BadLength(f"AT value length {len(raw)} not a multiple of 4 ({tag})")
            return tuple(Tag(*struct.unpack_from("<HH", raw, i)) for i in range(0, len(raw), 4))
    except ValueError as exc:
        raise BadLength(f"unencodable value for {tag}: {exc}") from exc
    raise AssertionError(f"unhandled VR {vr}")


# --- element encoding -------------------------------------------------------

def encode_element(el: DataElement, syntax: str) -> bytes:
    explicit = _is_explicit(syntax)
    if el.vr == "SQ":
        payload = b"".join(_encode_item(item, syntax) for item in el.value)
    else:
        payload = _encode_value(el)
    if len(payload) > 0xFFFFFFFE:
        raise UnencodableValue(f"value of {el.tag} exceeds the 32-bit length field")
    head = struct.pack("<HH", el.tag.group, el.tag.element)
    if explicit:
        if el.vr in LONG_LENGTH_VRS:
            head += el.vr.encode("ascii") + b"\x00\x00" + struct.pack("<I", len(payload))
        else:
            if len(payload) > 0xFFFF:
                raise UnencodableValue(
                    f"value of {el.tag} ({el.vr}) exceeds the 16-bit explicit length field")
            head += el.vr.encode("ascii") + struct.pack("<H", len(payload))
    else:
        head += struct.pack("<I", len(payload))
    return head + payload


def _encode_item(item: DataSet, syntax: str) -> bytes:
    body = encode_dataset(item, syntax)
    return struct.pack("<HHI", ITEM.group, ITEM.element, len(body)) + body


def _encode_value(el: DataElement) -> bytes:
    vr = el.vr
    if vr in BYTES_VRS:
        return el.value
    if vr in TEXT_VRS:
        if not el.value:
            return b""
        raw = "\\".join(el.value).encode("latin-1")
        if len(raw) % 2:
            raw += b"\x00" if vr == "UI" else b" "
        return raw
    if vr in INT_VR_FORMATS:
        fmt = INT_VR_FORMATS[vr]
        return b"".join(struct.pack(fmt, v) for v in el.value)
    if vr in FLOAT_VR_FORMATS:
        fmt = FLOAT_VR_FORMATS[vr]
        return b"".join(struct.pack(fmt, v) for v in el.value)
    if vr == "AT":
        return b"".join(struct.pack("<HH", t.group, t.element) for t in el.value)
    raise AssertionError(f"unhandled VR {vr}")


# --- dataset level ----------------------------------------------------------

def encode_dataset(ds: DataSet, syntax: str) -> bytes:
    return b"".join(encode_element(el, syntax) for el in ds)


def decode_dataset(data: bytes, syntax: str) -> DataSet:
    """Decode a bare dataset (no preamble, no meta) until the buffer ends."""
    reader = ByteReader(data)
    elements = []
    while reader.remaining:
        elements.append(decode_element(reader, syntax))
    try:
        return DataSet(elements)
    except ValueError as exc:
        raise BadLength(str(exc)) from exc


# --- Part-10 objects --------------------------------------------------------

def parse_object(data: bytes) -> DicomObject:
    """Parse a Part-10 stream into a DicomObject."""
    if len(data) < PREAMBLE_SIZE + 4 or data[PREAMBLE_SIZE:PREAMBLE_SIZE + 4] != MAGIC:
        raise MissingMagic('no "DICM" marker at offset 128')
    reader = ByteReader(data, PREAMBLE_SIZE + 4)

    meta_elements = []
    while True:
        tag = reader.peek_tag()
        if tag is None or tag.group != 0x0002:
            break
        el = decode_element(reader, EXPLICIT_VR_LE)
        if el.tag == FILE_META_GROUP_LENGTH:
            continue  # derived on write, not part of the model
        meta_elements.append(el)
    meta = DataSet(meta_elements)

    ts_el = meta.get(TRANSFER_SYNTAX_UID)
    syntax = ts_el.first() if ts_el is not None else None
    if syntax not in SUPPORTED_SYNTAXES:
        raise UnsupportedTransferSyntax(f"transfer syntax {syntax!r} is not supported")

    elements = []
    while reader.remaining:
        elements.append(decode_element(reader, syntax))
    try:
        dataset = DataSet(elements)
        return DicomObject(meta, dataset, syntax)
    except ValueError as exc:
        raise DicomError(f"stream violates object invariants: {exc}") from exc


def serialize_object(obj: DicomObject, syntax: str) -> bytes:
    """Serialize to Part-10 bytes in the requested transfer syntax.

    The meta group is always written in explicit VR LE with (0002,0000)
    and (0002,0010) recomputed. The output reparses to
    obj.with_transfer_syntax(syntax).
    """
    if syntax not in SUPPORTED_SYNTAXES:
        raise UnsupportedTransferSyntax(f"transfer syntax {syntax!r} is not supported")
    meta = obj.meta.with_elements(DataElement(TRANSFER_SYNTAX_UID, "UI", syntax))
    meta = meta.without(FILE_META_GROUP_LENGTH)
    meta_bytes = encode_dataset(meta, EXPLICIT_VR_LE)
    group_length = encode_element(
        DataElement(FILE_META_GROUP_LENGTH, "UL", len(meta_bytes)), EXPLICIT_VR_LE)
    body = encode_dataset(obj.dataset, syntax)
    return b"\x00" * PREAMBLE_SIZE + MAGIC + group_length + meta_bytes + body


def _is_explicit(syntax: str) -> bool:
    if syntax == EXPLICIT_VR_LE:
        return True
    if syntax == IMPLICIT_VR_LE:
        return False
    raise UnsupportedTransferSyntax(f"transfer syntax {syntax!r} is not supported")


def looks_like_dicom(head: bytes) -> bool:
    """True when the first bytes carry a Part-10 preamble and magic."""
    return len(head) >= PREAMBLE_SIZE + 4 and head[PREAMBLE_SIZE:PREAMBLE_SIZE + 4] == MAGIC
