"""DICOM upper-layer TCP server: association negotiation plus the
C-ECHO, C-STORE, and C-FIND SCP services.

One association per TCP connection, one DIMSE operation at a time.
Command sets are implicit VR LE; data sets use whatever transfer syntax
the presentation context negotiated. A C-STORE persists through the
configured storage chain and then dispatches asynchronous indexing, so
the success response never waits for the indexers.
"""

from __future__ import annotations

import logging
import socketserver
import threading

from ..core import Archive
from ..dicom.codec import decode_dataset, encode_dataset
from ..dicom.dataset import (
    EXPLICIT_VR_LE,
    IMPLICIT_VR_LE,
    DataElement,
    DataSet,
    DicomObject,
    get_value_string,
)
from ..dicom.dictionary import dict_lookup
from ..dicom.tags import Tag
from ..errors import (
    DicomError,
    MiniPacsError,
    NoStorage,
    PduError,
    StorageError,
    Truncated,
)
from ..plugins.config import ArchiveConfig
from . import messages as msg
from .pdu import (
    Abort,
    AssociateAc,
    AssociateRj,
    AssociateRq,
    CONTEXT_ABSTRACT_SYNTAX_REFUSED,
    CONTEXT_ACCEPTED,
    CONTEXT_TRANSFER_SYNTAXES_REFUSED,
    DEFAULT_MAX_PDU_LENGTH,
    PDataTf,
    Pdv,
    PresentationContextAc,
    REASON_CALLED_AE_NOT_RECOGNIZED,
    REJECTED_PERMANENT,
    ReleaseRp,
    ReleaseRq,
    SOURCE_SERVICE_USER,
    encode_pdu,
    read_pdu,
)

log = logging.getLogger("minipacs.dimse")

QUERY_RETRIEVE_LEVEL = Tag(0x0008, 0x0052)
MODALITIES_IN_STUDY = Tag(0x0008, 0x0061)

_LEVEL_KEYS = {
    "STUDY": ("StudyInstanceUID",),
    "SERIES": ("StudyInstanceUID", "SeriesInstanceUID"),
    "IMAGE": ("StudyInstanceUID", "SeriesInstanceUID", "SOPInstanceUID"),
}


def negotiate_association(rq: AssociateRq, config: ArchiveConfig) -> AssociateAc | AssociateRj:
    """Accept verification, storage, and study-root-FIND contexts.

    Per context the syntax preference is explicit VR LE, then implicit;
    contexts offering neither are refused. A wrong called AE title
    rejects the whole association.
    """
    if rq.called_ae != config.aetitle:
        return AssociateRj(result=REJECTED_PERMANENT, source=SOURCE_SERVICE_USER,
                           reason=REASON_CALLED_AE_NOT_RECOGNIZED)
    accepted = []
    for ctx in rq.contexts:
        supported = (
            ctx.abstract_syntax in (msg.VERIFICATION_SOP_CLASS, msg.STUDY_ROOT_FIND_SOP_CLASS)
            or ctx.abstract_syntax.startswith(msg.STORAGE_SOP_CLASS_PREFIX)
        )
        if not supported:
            accepted.append(PresentationContextAc(
                id=ctx.id, result=CONTEXT_ABSTRACT_SYNTAX_REFUSED,
                transfer_syntax=ctx.transfer_syntaxes[0]))
            continue
        if EXPLICIT_VR_LE in ctx.transfer_syntaxes:
            chosen = EXPLICIT_VR_LE
        elif IMPLICIT_VR_LE in ctx.transfer_syntaxes:
            chosen = IMPLICIT_VR_LE
        else:
            accepted.append(PresentationContextAc(
                id=ctx.id, result=CONTEXT_TRANSFER_SYNTAXES_REFUSED,
                transfer_syntax=ctx.transfer_syntaxes[0]))
            continue
        accepted.append(PresentationContextAc(
            id=ctx.id, result=CONTEXT_ACCEPTED, transfer_syntax=chosen))
    return AssociateAc(calling_ae=rq.calling_ae, called_ae=rq.called_ae,
                       contexts=tuple(accepted), max_pdu_length=DEFAULT_MAX_PDU_LENGTH)


def handle_c_echo(command: DataSet) -> DataSet:
    return msg.echo_rsp(_first_int(command, msg.MESSAGE_ID), msg.STATUS_SUCCESS)


def identifier_filters(identifier: DataSet) -> tuple[list[tuple[str, str]], list[Tag]]:
    """Split a C-FIND identifier into match filters and return keys.

    Non-empty attributes become (keyword, pattern) filters with DICOM
    wildcards passed through; every attribute is a return key.
    """
    filters: list[tuple[str, str]] = []
    return_tags: list[Tag] = []
    for el in identifier:
        if el.tag == QUERY_RETRIEVE_LEVEL:
            continue
        return_tags.append(el.tag)
        value = get_value_string(identifier, el.tag)
        if value:
            entry = dict_lookup(el.tag)
            keyword = entry.keyword if entry is not None else str(el.tag)
            filters.append((keyword, value))
    return filters, return_tags


class DimseServer:
    """Threaded TCP acceptor bound to the configured DIMSE port."""

    def __init__(self, archive: Archive, host: str = "0.0.0.0", port: int | None = None):
        self.archive = archive
        outer = self

        class Handler(socketserver.BaseRequestHandler):
            def handle(self):
                outer._serve_connection(self.request)

        class Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = Server((host, port if port is not None else archive.config.dimse_port),
                              Handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="minipacs-dimse", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    # --- association ------------------------------------------------------

    def _serve_connection(self, sock) -> None:
        send_lock = threading.Lock()

        def send(pdu) -> None:
            with send_lock:
                sock.sendall(encode_pdu(pdu))

        try:
            pdu = read_pdu(sock.recv)
            if not isinstance(pdu, AssociateRq):
                send(Abort())
                return
            answer = negotiate_association(pdu, self.archive.config)
            send(answer)
            if isinstance(answer, AssociateRj):
                return
            contexts = {ctx.id: ctx.transfer_syntax for ctx in answer.contexts
                        if ctx.result == CONTEXT_ACCEPTED}
            peer_max = pdu.max_pdu_length or DEFAULT_MAX_PDU_LENGTH
            self._message_loop(sock, send, contexts, peer_max)
        except Truncated:
            pass  # peer went away; nothing to clean up
        except (PduError, MiniPacsError) as exc:
            log.warning("association error: %s", exc)
            try:
                send(Abort())
            except OSError:
                pass
        except OSError:
            pass
        finally:
            try:
                sock.close()
            except OSError:
                pass

    def _message_loop(self, sock, send, contexts: dict[int, str], peer_max: int) -> None:
        command_buf = bytearray()
        data_buf = bytearray()
        pending: DataSet | None = None
        pending_ctx = 0

        while True:
            pdu = read_pdu(sock.recv)
            if isinstance(pdu, ReleaseRq):
                send(ReleaseRp())
                return  # nothing further on this connection
            if isinstance(pdu, Abort):
                return
            if not isinstance(pdu, PDataTf):
                send(Abort())
                return
            for pdv in pdu.pdvs:
                if pdv.context_id not in contexts:
                    send(Abort())
                    return
                if pdv.is_command:
                    command_buf.extend(pdv.data)
                    if not pdv.is_last:
                        continue
                    command = msg.decode_command(bytes(command_buf))
                    command_buf.clear()
                    ds_type = _first_int(command, msg.DATA_SET_TYPE)
                    if ds_type != msg.NO_DATASET:
                        pending = command
                        pending_ctx = pdv.context_id
                        data_buf.clear()
                    elif not self._dispatch(send, contexts, peer_max,
                                            pdv.context_id, command, None):
                        return
                else:
                    if pending is None:
                        send(Abort())
                        return
                    data_buf.extend(pdv.data)
                    if not pdv.is_last:
                        continue
                    command, ctx_id = pending, pending_ctx
                    pending = None
                    if not self._dispatch(send, contexts, peer_max, ctx_id,
                                          command, bytes(data_buf)):
                        return

    def _dispatch(self, send, contexts, peer_max, ctx_id: int,
                  command: DataSet, data: bytes | None) -> bool:
        """Handle one complete message; False ends the association."""
        syntax = contexts[ctx_id]
        field = _first_int(command, msg.COMMAND_FIELD)
        if field == msg.C_ECHO_RQ:
            if data is not None:
                send(Abort())  # echo never carries a data set
                return False
            self._send_message(send, peer_max, ctx_id, handle_c_echo(command), None, syntax)
            return True
        if field == msg.C_STORE_RQ:
            if data is None:
                send(Abort())
                return False
            rsp = self.handle_c_store(command, data, syntax)
            self._send_message(send, peer_max, ctx_id, rsp, None, syntax)
            return True
        if field == msg.C_FIND_RQ:
            if data is None:
                send(Abort())
                return False
            for rsp_command, rsp_data in self.handle_c_find(command, data, syntax):
                self._send_message(send, peer_max, ctx_id, rsp_command, rsp_data, syntax)
            return True
        log.warning("unsupported command field 0x%04X", field)
        send(Abort())
        return False

    # --- services -----------------------------------------------------------

    def handle_c_store(self, command: DataSet, data: bytes, syntax: str) -> DataSet:
        """Persist the dataset, then trigger asynchronous indexing."""
        try:
            dataset = decode_dataset(data, syntax)
            obj = DicomObject.from_dataset(
                dataset, transfer_syntax=syntax,
                sop_class_uid=get_value_string(command, msg.AFFECTED_SOP_CLASS) or None)
        except (DicomError, ValueError) as exc:
            log.warning("C-STORE dataset rejected: %s", exc)
            return msg.store_rsp(command, msg.STATUS_UNABLE_TO_PROCESS + 1)
        try:
            uri = self.archive.store_object(obj)
        except (StorageError, MiniPacsError) as exc:
            log.error("C-STORE persistence failed: %s", exc)
            return msg.store_rsp(command, msg.STATUS_OUT_OF_RESOURCES)
        try:
            self.archive.dispatch_index([uri])
        except NoStorage:  # storage vanished between store and dispatch
            log.error("indexing dispatch failed for %s", uri)
        return msg.store_rsp(command, msg.STATUS_SUCCESS)

    def handle_c_find(self, command: DataSet, data: bytes, syntax: str):
        """Yield (command, identifier-or-None) response pairs."""
        try:
            identifier = decode_dataset(data, syntax)
        except DicomError as exc:
            log.warning("C-FIND identifier undecodable: %s", exc)
            yield msg.find_rsp(command, msg.STATUS_IDENTIFIER_ERROR, with_data=False), None
            return
        level = get_value_string(identifier, QUERY_RETRIEVE_LEVEL)
        if not level or level.upper() not in _LEVEL_KEYS:
            yield msg.find_rsp(command, msg.STATUS_IDENTIFIER_ERROR, with_data=False), None
            return
        level = level.upper()
        filters, return_tags = identifier_filters(identifier)

        for summary_fields, modalities in self._matches(level, filters):
            response = self._build_identifier(level, return_tags, identifier,
                                              summary_fields, modalities)
            yield msg.find_rsp(command, msg.STATUS_PENDING, with_data=True), response
        yield msg.find_rsp(command, msg.STATUS_SUCCESS, with_data=False), None

    def _matches(self, level: str, filters):
        if level == "STUDY":
            for summary in self.archive.find_studies(filters):
                yield summary.fields, summary.modalities
            return
        # SERIES/IMAGE: same query path, deduplicated on the level key.
        # ModalitiesInStudy is a study-level computed attribute; it never
        # constrains lower levels here.
        from ..search.queryparser import And, MatchAll, Term
        terms = [Term(k, p) for k, p in filters if k != "ModalitiesInStudy"]
        ast = MatchAll() if not terms else (terms[0] if len(terms) == 1 else And(tuple(terms)))
        seen: dict[tuple, dict] = {}
        for hit in self.archive.search_ast(ast).hits:
            key = tuple((hit.fields.get(k) or [""])[0] for k in _LEVEL_KEYS[level])
            if all(key) and key not in seen:
                seen[key] = hit.fields
        for key in sorted(seen):
            yield seen[key], ()

    def _build_identifier(self, level: str, return_tags, rq_identifier: DataSet,
                          fields: dict, modalities) -> DataSet:
        from ..search.document import field_keyword
        elements = [DataElement(QUERY_RETRIEVE_LEVEL, "CS", level)]
        for tag in return_tags:
            rq_el = rq_identifier.get(tag)
            vr = rq_el.vr if rq_el is not None else "LO"
            if tag == MODALITIES_IN_STUDY:
                elements.append(DataElement(tag, "CS", list(modalities)))
                continue
            values = fields.get(field_keyword(tag), [])
            elements.append(_coerce_element(tag, vr, values))
        return DataSet(elements)

    def _send_message(self, send, peer_max: int, ctx_id: int,
                      command: DataSet, data: DataSet | None, syntax: str) -> None:
        chunk = max(1024, peer_max - 12)
        send(PDataTf(pdvs=_fragment(ctx_id, msg.encode_command(command), True, chunk)))
        if data is not None:
            send(PDataTf(pdvs=_fragment(ctx_id, encode_dataset(data, syntax), False, chunk)))


def _fragment(ctx_id: int, payload: bytes, is_command: bool, chunk: int) -> tuple[Pdv, ...]:
    pdvs = []
    for start in range(0, len(payload), chunk) or [0]:
        piece = payload[start:start + chunk]
        pdvs.append(Pdv(context_id=ctx_id, data=piece, is_command=is_command,
                        is_last=start + chunk >= len(payload)))
    return tuple(pdvs)


def _coerce_element(tag: Tag, vr: str, values: list[str]) -> DataElement:
    """Rebuild a typed element from rendered string values; empty on failure."""
    try:
        if vr in ("US", "UL", "SS", "SL"):
            return DataElement(tag, vr, [int(v) for v in values])
        if vr in ("FL", "FD"):
            return DataElement(tag, vr, [float(v) for v in values])
        if vr == "AT":
            return DataElement(tag, vr, [Tag.parse(v) for v in values])
        if vr in ("OB", "OW", "UN", "SQ"):
            return DataElement(tag, vr, None)
        return DataElement(tag, vr, values)
    except (ValueError, DicomError):
        return DataElement(tag, vr if vr != "SQ" else "SQ", None)


def _first_int(ds: DataSet, tag: Tag) -> int:
    el = ds.get(tag)
    return el.first() if el is not None and el.value else 0
