"""Exception hierarchy for the archive.

Every error raised on purpose by this package derives from MiniPacsError,
so callers (and the fuzz tests) can distinguish documented failures from
genuine bugs.
"""


class MiniPacsError(Exception):
    """Base class for all documented archive errors."""


class DicomError(MiniPacsError):
    """Base class for DICOM parse/serialize failures."""


class PduError(MiniPacsError):
    """Base class for upper-layer PDU codec failures."""


# --- DICOM codec ----------------------------------------------------------

class MissingMagic(DicomError):
    """No "DICM" marker at offset 128."""


class UnsupportedTransferSyntax(DicomError):
    """Transfer syntax other than implicit/explicit VR little endian."""


class Truncated(DicomError, PduError):
    """Stream ended inside an element, item, or PDU."""


class BadLength(DicomError):
    """Element length inconsistent with the remaining bytes."""


class UnsupportedVr(DicomError):
    """Explicit VR code outside the supported set."""


class UnencodableValue(DicomError):
    """Value cannot be encoded (length exceeds the 32-bit field)."""


# --- query language -------------------------------------------------------

class QuerySyntaxError(MiniPacsError):
    """Query text rejected by the parser.

    Carries the 0-based offset of the offending token and a short
    description of what was expected there.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
        self.reason = message


# --- index persistence ----------------------------------------------------

class CorruptIndex(MiniPacsError):
    """Index snapshot failed its magic/checksum validation."""


# --- storage --------------------------------------------------------------

class StorageError(MiniPacsError):
    """Base class for storage backend failures."""


class NoStorage(StorageError):
    """No enabled storage plugin claims the URI scheme."""


class NotFound(StorageError):
    """URI does not name a stored object."""


class IoFailure(StorageError):
    """Underlying I/O operation failed."""


class CorruptPayload(StorageError):
    """Stored transformed payload cannot be decoded (e.g. bad gzip)."""


class BadUri(StorageError):
    """Text does not parse as a storage URI."""


# --- plugin framework -----------------------------------------------------

class PluginError(MiniPacsError):
    """Base class for registry/configuration failures."""


class DuplicateName(PluginError):
    """Plugin or plugin-set name already registered."""


class UnknownPlugin(PluginError):
    """No plugin registered under the given name."""


class MalformedConfig(PluginError):
    """Configuration file failed to parse or violated an invariant."""


# --- DICOM upper layer ----------------------------------------------------

class BadPduType(PduError):
    """Unknown PDU type byte."""


class Oversize(PduError):
    """PDU length field exceeds the 4 MiB ceiling."""


class MalformedPdu(PduError):
    """PDU body structure is inconsistent (bad item layout or lengths)."""


class AssociationAborted(MiniPacsError):
    """Peer aborted, or a protocol violation forced an abort."""
