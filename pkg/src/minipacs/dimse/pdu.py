"""Upper-layer protocol data units.

Wire format (lengths big-endian):

    header:  type (1) + reserved (1) + length (4)
    A-ASSOCIATE-RQ/-AC body: protocol version (2) + reserved (2)
        + called AE (16, space padded) + calling AE (16) + reserved (32)
        + variable items
    items: application context 0x10, presentation context 0x20 (rq) /
        0x21 (ac), abstract syntax sub-item 0x30, transfer syntax
        sub-item 0x40, user info 0x50 with max-length sub-item 0x51
    A-ASSOCIATE-RJ body: reserved + result + source + reason
    P-DATA-TF body: PDVs of [length (4) + context id (1) + control (1:
        bit0 command, bit1 last) + data]
    A-RELEASE-RQ/-RP body: 4 reserved bytes (10-byte PDUs in total)
    A-ABORT body: 2 reserved + source + reason
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..errors import BadPduType, MalformedPdu, Oversize, Truncated

APPLICATION_CONTEXT = "1.2.840.10008.3.1.1.1"
MAX_PDU_BODY = 4 * 1024 * 1024
DEFAULT_MAX_PDU_LENGTH = 16384

_HEADER = struct.Struct(">BBI")


@dataclass(frozen=True)
class PresentationContextRq:
    id: int
    abstract_syntax: str
    transfer_syntaxes: tuple[str, ...]


# result codes for negotiated contexts
CONTEXT_ACCEPTED = 0
CONTEXT_ABSTRACT_SYNTAX_REFUSED = 3
CONTEXT_TRANSFER_SYNTAXES_REFUSED = 4


@dataclass(frozen=True)
class PresentationContextAc:
    id: int
    result: int
    transfer_syntax: str


@dataclass(frozen=True)
class AssociateRq:
    calling_ae: str
    called_ae: str
    contexts: tuple[PresentationContextRq, ...]
    max_pdu_length: int = DEFAULT_MAX_PDU_LENGTH
    application_context: str = APPLICATION_CONTEXT


@dataclass(frozen=True)
class AssociateAc:
    calling_ae: str
    called_ae: str
    contexts: tuple[PresentationContextAc, ...]
    max_pdu_length: int = DEFAULT_MAX_PDU_LENGTH
    application_context: str = APPLICATION_CONTEXT


# association rejection codes (service-user source)
REJECTED_PERMANENT = 1
REJECTED_TRANSIENT = 2
SOURCE_SERVICE_USER = 1
REASON_CALLED_AE_NOT_RECOGNIZED = 7


@dataclass(frozen=True)
class AssociateRj:
    result: int
    source: int
    reason: int


@dataclass(frozen=True)
class Pdv:
    context_id: int
    data: bytes
    is_command: bool
    is_last: bool


@dataclass(frozen=True)
class PDataTf:
    pdvs: tuple[Pdv, ...]


@dataclass(frozen=True)
class ReleaseRq:
    pass


@dataclass(frozen=True)
class ReleaseRp:
    pass


@dataclass(frozen=True)
class Abort:
    source: int = 0
    reason: int = 0


Pdu = AssociateRq | AssociateAc | AssociateRj | PDataTf | ReleaseRq | ReleaseRp | Abort

_PDU_TYPES = {
    AssociateRq: 0x01,
    AssociateAc: 0x02,
    AssociateRj: 0x03,
    PDataTf: 0x04,
    ReleaseRq: 0x05,
    ReleaseRp: 0x06,
    Abort: 0x07,
}


def _pad_ae(title: str) -> bytes:
    raw = title.encode("ascii")
    if not 0 < len(raw) <= 16:
        raise MalformedPdu(f"AE title must be 1..16 bytes: {title!r}")
    return raw.ljust(16, b" ")


def _item(item_type: int, body: bytes) -> bytes:
    return struct.pack(">BBH", item_type, 0, len(body)) + body


def _uid_item(item_type: int, uid: str) -> bytes:
    return _item(item_type, uid.encode("ascii"))


def encode_pdu(pdu: Pdu) -> bytes:
    body = _encode_body(pdu)
    return _HEADER.pack(_PDU_TYPES[type(pdu)], 0, len(body)) + body


def _encode_body(pdu: Pdu) -> bytes:
    if isinstance(pdu, (AssociateRq, AssociateAc)):
        parts = [struct.pack(">HH", 1, 0), _pad_ae(pdu.called_ae), _pad_ae(pdu.calling_ae),
                 b"\x00" * 32, _uid_item(0x10, pdu.application_context)]
        if isinstance(pdu, AssociateRq):
            for ctx in pdu.contexts:
                sub = _uid_item(0x30, ctx.abstract_syntax)
                sub += b"".join(_uid_item(0x40, ts) for ts in ctx.transfer_syntaxes)
                parts.append(_item(0x20, bytes([ctx.id, 0, 0, 0]) + sub))
        else:
            for ctx in pdu.contexts:
                sub = _uid_item(0x40, ctx.transfer_syntax)
                parts.append(_item(0x21, bytes([ctx.id, 0, ctx.result, 0]) + sub))
        parts.append(_item(0x50, _item(0x51, struct.pack(">I", pdu.max_pdu_length))))
        return b"".join(parts)
    if isinstance(pdu, AssociateRj):
        return bytes([0, pdu.result, pdu.source, pdu.reason])
    if isinstance(pdu, PDataTf):
        parts = []
        for pdv in pdu.pdvs:
            control = (1 if pdv.is_command else 0) | (2 if pdv.is_last else 0)
            parts.append(struct.pack(">IBB", len(pdv.data) + 2, pdv.context_id, control))
            parts.append(pdv.data)
        return b"".join(parts)
    if isinstance(pdu, (ReleaseRq, ReleaseRp)):
        return b"\x00" * 4
    if isinstance(pdu, Abort):
        return bytes([0, 0, pdu.source, pdu.reason])
    raise TypeError(f"not a PDU: {pdu!r}")


class _ItemReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    @property
    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if n > self.remaining:
            raise Truncated(f"PDU body needs {n} more bytes, {self.remaining} left")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def items(self):
        while self.remaining:
            header = self.take(4)
            item_type = header[0]
            length = struct.unpack(">H", header[2:4])[0]
            yield item_type, self.take(length)


def decode_pdu(data: bytes) -> Pdu:
    """Decode one complete PDU (header + body)."""
    if len(data) < 6:
        raise Truncated("PDU header needs 6 bytes")
    pdu_type, _reserved, length = _HEADER.unpack_from(data)
    if length > MAX_PDU_BODY:
        raise Oversize(f"PDU length {length} exceeds the 4 MiB ceiling")
    body = data[6:]
    if len(body) < length:
        raise Truncated(f"PDU body needs {length} bytes, got {len(body)}")
    body = body[:length]
    if pdu_type in (0x01, 0x02):
        return _decode_associate(pdu_type, body)
    if pdu_type == 0x03:
        if len(body) < 4:
            raise Truncated("A-ASSOCIATE-RJ body needs 4 bytes")
        return AssociateRj(result=body[1], source=body[2], reason=body[3])
    if pdu_type == 0x04:
        return _decode_p_data(body)
    if pdu_type == 0x05:
        return ReleaseRq()
    if pdu_type == 0x06:
        return ReleaseRp()
    if pdu_type == 0x07:
        if len(body) < 4:
            raise Truncated("A-ABORT body needs 4 bytes")
        return Abort(source=body[2], reason=body[3])
    raise BadPduType(f"unknown PDU type 0x{pdu_type:02X}")


def _decode_associate(pdu_type: int, body: bytes) -> AssociateRq | AssociateAc:
    reader = _ItemReader(body)
    reader.take(4)  # protocol version + reserved
    called = reader.take(16).rstrip(b" ").decode("ascii", errors="replace")
    calling = reader.take(16).rstrip(b" ").decode("ascii", errors="replace")
    reader.take(32)
    application_context = APPLICATION_CONTEXT
    rq_contexts: list[PresentationContextRq] = []
    ac_contexts: list[PresentationContextAc] = []
    max_pdu_length = DEFAULT_MAX_PDU_LENGTH
    for item_type, item in reader.items():
        if item_type == 0x10:
            application_context = item.decode("ascii", errors="replace")
        elif item_type == 0x20 and pdu_type == 0x01:
            rq_contexts.append(_decode_context_rq(item))
        elif item_type == 0x21 and pdu_type == 0x02:
            ac_contexts.append(_decode_context_ac(item))
        elif item_type == 0x50:
            for sub_type, sub in _ItemReader(item).items():
                if sub_type == 0x51:
                    if len(sub) != 4:
                        raise MalformedPdu("max-length sub-item must be 4 bytes")
                    max_pdu_length = struct.unpack(">I", sub)[0]
        # unknown items are skipped
    if pdu_type == 0x01:
        return AssociateRq(calling_ae=calling, called_ae=called,
                           contexts=tuple(rq_contexts), max_pdu_length=max_pdu_length,
                           application_context=application_context)
    return AssociateAc(calling_ae=calling, called_ae=called,
                       contexts=tuple(ac_contexts), max_pdu_length=max_pdu_length,
                       application_context=application_context)


def _decode_context_rq(item: bytes) -> PresentationContextRq:
    reader = _ItemReader(item)
    head = reader.take(4)
    ctx_id = head[0]
    abstract = None
    transfer: list[str] = []
    for sub_type, sub in reader.items():
        if sub_type == 0x30:
            abstract = sub.decode("ascii", errors="replace")
        elif sub_type == 0x40:
            transfer.append(sub.decode("ascii", errors="replace"))
    if abstract is None or not transfer:
        raise MalformedPdu("presentation context lacks abstract or transfer syntax")
    return PresentationContextRq(id=ctx_id, abstract_syntax=abstract,
                                 transfer_syntaxes=tuple(transfer))


def _decode_context_ac(item: bytes) -> PresentationContextAc:
    reader = _ItemReader(item)
    head = reader.take(4)
    ctx_id, result = head[0], head[2]
    transfer = ""
    for sub_type, sub in reader.items():
        if sub_type == 0x40:
            transfer = sub.decode("ascii", errors="replace")
    return PresentationContextAc(id=ctx_id, result=result, transfer_syntax=transfer)


def _decode_p_data(body: bytes) -> PDataTf:
    reader = _ItemReader(body)
    pdvs: list[Pdv] = []
    while reader.remaining:
        header = reader.take(4)
        length = struct.unpack(">I", header)[0]
        if length < 2:
            raise MalformedPdu(f"PDV length {length} too small for its header")
        payload = reader.take(length)
        control = payload[1]
        pdvs.append(Pdv(context_id=payload[0], data=payload[2:],
                        is_command=bool(control & 1), is_last=bool(control & 2)))
    return PDataTf(pdvs=tuple(pdvs))


def read_pdu(read: "callable") -> Pdu:
    """Read one PDU from a blocking byte source.

    `read(n)` must return up to n bytes ("" at EOF). Raises Truncated at a
    clean EOF before any header byte as well; callers distinguish by
    checking bytes_read if they need to.
    """
    header = _read_exactly(read, 6)
    _pdu_type, _reserved, length = _HEADER.unpack_from(header)
    if length > MAX_PDU_BODY:
        raise Oversize(f"PDU length {length} exceeds the 4 MiB ceiling")
    body = _read_exactly(read, length)
    return decode_pdu(header + body)


def _read_exactly(read, n: int) -> bytes:
    out = b""
    while len(out) < n:
        chunk = read(n - len(out))
        if not chunk:
            raise Truncated(f"connection closed after {len(out)} of {n} bytes")
        out += chunk
    return out
