"""In-memory model of DICOM datasets and Part-10 objects.

All types here are immutable after construction and safe to share across
threads. Mutating operations (anonymize, element replacement) return new
values.
"""

from __future__ import annotations

import struct
from typing import Iterable, Iterator, Sequence

from ..errors import DicomError
from .dictionary import (
    BYTES_VRS,
    FLOAT_VR_FORMATS,
    INT_VR_FORMATS,
    SINGLE_VALUE_TEXT_VRS,
    TEXT_VRS,
    VR_CODES,
    dict_lookup,
)
from .tags import (
    MEDIA_SOP_CLASS_UID,
    MEDIA_SOP_INSTANCE_UID,
    SERIES_INSTANCE_UID,
    SOP_CLASS_UID,
    SOP_INSTANCE_UID,
    STUDY_INSTANCE_UID,
    TRANSFER_SYNTAX_UID,
    Tag,
)

IMPLICIT_VR_LE = "1.2.840.10008.1.2"
EXPLICIT_VR_LE = "1.2.840.10008.1.2.1"
SUPPORTED_SYNTAXES = (IMPLICIT_VR_LE, EXPLICIT_VR_LE)

# UID root used for meta information this implementation synthesizes.
IMPLEMENTATION_CLASS_UID = "1.2.826.0.1.3680043.10.1465.1"
IMPLEMENTATION_VERSION = "MINIPACS_01"

_INT_RANGES = {
    "SL": (-(2**31), 2**31 - 1),
    "SS": (-(2**15), 2**15 - 1),
    "UL": (0, 2**32 - 1),
    "US": (0, 2**16 - 1),
}


class DataElement:
    """One tag/VR/value triple.

    The value is normalized at construction:

    * text VRs hold a tuple of str with trailing pad characters removed
    * integer/float VRs hold tuples of int/float (FL quantized to 32-bit)
    * AT holds tuples of Tag
    * OB/OW/UN hold bytes, zero-padded to even length
    * SQ holds a tuple of DataSet items and nothing else
    """

    __slots__ = ("tag", "vr", "value")

    def __init__(self, tag: Tag, vr: str, value=None):
        if vr not in VR_CODES:
            raise ValueError(f"unsupported VR code {vr!r}")
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "vr", vr)
        object.__setattr__(self, "value", _normalize_value(vr, value))

    def __setattr__(self, name, _value):
        raise AttributeError(f"DataElement is immutable (tried to set {name})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataElement):
            return NotImplemented
        return (self.tag, self.vr, self.value) == (other.tag, other.vr, other.value)

    def __hash__(self) -> int:
        return hash((self.tag, self.vr))

    def __repr__(self) -> str:
        return f"DataElement({self.tag} {self.vr} {self.value!r})"

    @property
    def is_empty(self) -> bool:
        if self.vr in BYTES_VRS:
            return len(self.value) == 0
        return len(self.value) == 0

    def first(self):
        """First value, or None when empty."""
        if self.vr in BYTES_VRS:
            return self.value if self.value else None
        return self.value[0] if self.value else None


def _normalize_value(vr: str, value):
    if value is None:
        value = b"" if vr in BYTES_VRS else ()
    if vr == "SQ":
        items = tuple(value)
        for item in items:
            if not isinstance(item, DataSet):
                raise ValueError("SQ items must be DataSet instances")
        return items
    if vr in BYTES_VRS:
        if isinstance(value, (bytes, bytearray, memoryview)):
            data = bytes(value)
        else:
            raise ValueError(f"{vr} value must be bytes")
        if len(data) % 2:
            data += b"\x00"
        return data
    if isinstance(value, (str, int, float, Tag)):
        value = (value,)
    values = tuple(value)
    if vr in TEXT_VRS:
        out = []
        for v in values:
            if not isinstance(v, str):
                raise ValueError(f"{vr} values must be str, got {type(v).__name__}")
            if "\\" in v and vr not in SINGLE_VALUE_TEXT_VRS:
                raise ValueError(f"{vr} value may not contain the multi-value delimiter")
            out.append(v.rstrip(" \x00"))
        if out == [""]:
            return ()  # a lone empty string is the same as a zero-length value
        return tuple(out)
    if vr in INT_VR_FORMATS:
        lo, hi = _INT_RANGES[vr]
        out = []
        for v in values:
            v = int(v)
            if not lo <= v <= hi:
                raise ValueError(f"{vr} value {v} out of range")
            out.append(v)
        return tuple(out)
    if vr in FLOAT_VR_FORMATS:
        if vr == "FL":
            # quantize to float32 so encoding round-trips exactly
            return tuple(struct.unpack("<f", struct.pack("<f", float(v)))[0] for v in values)
        return tuple(float(v) for v in values)
    if vr == "AT":
        out = []
        for v in values:
            if not isinstance(v, Tag):
                raise ValueError("AT values must be Tag instances")
            out.append(v)
        return tuple(out)
    raise AssertionError(f"unhandled VR {vr}")


class DataSet:
    """Ordered, duplicate-free map of Tag to DataElement."""

    __slots__ = ("_elements",)

    def __init__(self, elements: Iterable[DataElement] = ()):
        ordered: dict[Tag, DataElement] = {}
        for el in sorted(elements, key=lambda e: e.tag):
            if el.tag in ordered:
                raise ValueError(f"duplicate tag {el.tag}")
            ordered[el.tag] = el
        object.__setattr__(self, "_elements", ordered)

    def __setattr__(self, name, _value):
        raise AttributeError(f"DataSet is immutable (tried to set {name})")

    def __iter__(self) -> Iterator[DataElement]:
        return iter(self._elements.values())

    def __len__(self) -> int:
        return len(self._elements)

    def __contains__(self, key: Tag | str) -> bool:
        return self.get(key) is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataSet):
            return NotImplemented
        return self._elements == other._elements

    def __hash__(self) -> int:
        return hash(tuple(self._elements))

    def __repr__(self) -> str:
        return f"DataSet({len(self._elements)} elements)"

    def tags(self) -> list[Tag]:
        return list(self._elements)

    def get(self, key: Tag | str) -> DataElement | None:
        """Element by Tag or dictionary keyword; None when absent."""
        tag = _resolve_key(key)
        if tag is None:
            return None
        return self._elements.get(tag)

    def with_elements(self, *new: DataElement) -> "DataSet":
        """Copy with the given elements inserted or replaced."""
        merged = dict(self._elements)
        for el in new:
            merged[el.tag] = el
        return DataSet(merged.values())

    def without(self, *keys: Tag | str) -> "DataSet":
        drop = {_resolve_key(k) for k in keys}
        return DataSet(el for el in self if el.tag not in drop)


def _resolve_key(key: Tag | str) -> Tag | None:
    if isinstance(key, Tag):
        return key
    entry = dict_lookup(key)
    if entry is not None:
        return entry.tag
    # allow an 8-hex-digit private rendering as a key
    try:
        return Tag.parse(key)
    except ValueError:
        return None


def get_value_string(ds: DataSet, key: Tag | str) -> str | None:
    """First value of an element rendered as text.

    Numbers render in decimal, AT values as 8 hex digits, PN verbatim.
    Returns None when the element is missing or its VR carries no text
    (SQ/OB/OW/UN). An element that exists but is empty renders as "".
    """
    el = ds.get(key)
    if el is None or el.vr == "SQ" or el.vr in BYTES_VRS:
        return None
    if not el.value:
        return ""
    v = el.value[0]
    if isinstance(v, Tag):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


DEFAULT_ANONYMIZE_PROFILE = (
    Tag(0x0010, 0x0010),  # PatientName
    Tag(0x0010, 0x0020),  # PatientID
    Tag(0x0010, 0x0030),  # PatientBirthDate
    Tag(0x0010, 0x1000),  # OtherPatientIDs
    Tag(0x0008, 0x0080),  # InstitutionName
)


def anonymize(ds: DataSet, profile: Sequence[Tag] = DEFAULT_ANONYMIZE_PROFILE) -> DataSet:
    """Blank the values of the profile tags, keeping the elements.

    Tags absent from the dataset are ignored. The default profile covers
    direct identifiers only and never touches UIDs.
    """
    wanted = set(profile)
    replaced = []
    for el in ds:
        if el.tag in wanted:
            empty = b"" if el.vr in BYTES_VRS else ()
            replaced.append(DataElement(el.tag, el.vr, empty))
    if not replaced:
        return ds
    return ds.with_elements(*replaced)


class DicomObject:
    """A parsed Part-10 object: file meta group + main dataset."""

    __slots__ = ("meta", "dataset", "transfer_syntax")

    def __init__(self, meta: DataSet, dataset: DataSet, transfer_syntax: str):
        for el in meta:
            if el.tag.group != 0x0002:
                raise ValueError(f"meta group may only contain group 0002 (got {el.tag})")
        for el in dataset:
            if el.tag.group == 0x0002:
                raise ValueError(f"dataset may not contain group 0002 (got {el.tag})")
        for required in (MEDIA_SOP_INSTANCE_UID, TRANSFER_SYNTAX_UID):
            if meta.get(required) is None:
                raise ValueError(f"meta is missing required element {required}")
        for required in (SOP_INSTANCE_UID, STUDY_INSTANCE_UID, SERIES_INSTANCE_UID):
            el = dataset.get(required)
            if el is None or not el.value:
                raise ValueError(f"dataset is missing required element {required}")
        ts = meta.get(TRANSFER_SYNTAX_UID)
        if ts is not None and ts.first() != transfer_syntax:
            raise ValueError("meta (0002,0010) disagrees with the transfer_syntax field")
        object.__setattr__(self, "meta", meta)
        object.__setattr__(self, "dataset", dataset)
        object.__setattr__(self, "transfer_syntax", transfer_syntax)

    def __setattr__(self, name, _value):
        raise AttributeError(f"DicomObject is immutable (tried to set {name})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, DicomObject):
            return NotImplemented
        return (self.meta, self.dataset, self.transfer_syntax) == (
            other.meta, other.dataset, other.transfer_syntax)

    def __repr__(self) -> str:
        return f"DicomObject(sop={self.sop_instance_uid}, syntax={self.transfer_syntax})"

    @property
    def sop_instance_uid(self) -> str:
        return get_value_string(self.dataset, SOP_INSTANCE_UID) or ""

    @property
    def study_instance_uid(self) -> str:
        return get_value_string(self.dataset, STUDY_INSTANCE_UID) or ""

    @property
    def series_instance_uid(self) -> str:
        return get_value_string(self.dataset, SERIES_INSTANCE_UID) or ""

    @classmethod
    def from_dataset(cls, dataset: DataSet, transfer_syntax: str = EXPLICIT_VR_LE,
                     sop_class_uid: str | None = None) -> "DicomObject":
        """Wrap a bare dataset, synthesizing the file meta group.

        Used when a dataset arrives without a Part-10 header (C-STORE).
        """
        if transfer_syntax not in SUPPORTED_SYNTAXES:
            raise DicomError(f"cannot synthesize meta for syntax {transfer_syntax}")
        sop_instance = get_value_string(dataset, SOP_INSTANCE_UID)
        if not sop_instance:
            raise ValueError("dataset has no SOPInstanceUID")
        if sop_class_uid is None:
            sop_class_uid = get_value_string(dataset, SOP_CLASS_UID) or ""
        meta_elements = [
            DataElement(Tag(0x0002, 0x0001), "OB", b"\x00\x01"),
            DataElement(MEDIA_SOP_INSTANCE_UID, "UI", sop_instance),
            DataElement(TRANSFER_SYNTAX_UID, "UI", transfer_syntax),
            DataElement(Tag(0x0002, 0x0012), "UI", IMPLEMENTATION_CLASS_UID),
            DataElement(Tag(0x0002, 0x0013), "SH", IMPLEMENTATION_VERSION),
        ]
        if sop_class_uid:
            meta_elements.append(DataElement(MEDIA_SOP_CLASS_UID, "UI", sop_class_uid))
        return cls(DataSet(meta_elements), dataset, transfer_syntax)

    def with_transfer_syntax(self, syntax: str) -> "DicomObject":
        """Copy with the transfer syntax (and meta element) replaced."""
        if syntax == self.transfer_syntax:
            return self
        meta = self.meta.with_elements(DataElement(TRANSFER_SYNTAX_UID, "UI", syntax))
        return DicomObject(meta, self.dataset, syntax)

    def with_dataset(self, dataset: DataSet) -> "DicomObject":
        return DicomObject(self.meta, dataset, self.transfer_syntax)
