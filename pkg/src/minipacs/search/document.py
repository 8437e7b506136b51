"""Extraction of index documents from DICOM objects."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..dicom.dataset import DataSet, DicomObject
from ..dicom.dictionary import BYTES_VRS, dict_lookup
from ..dicom.tags import Tag
from ..storage.uri import StorageUri

_TOKEN_SPLIT = re.compile(r"[^0-9a-zA-Z]+")


def tokenize(value: str) -> list[str]:
    """Free-text tokens: lowercased, split on non-alphanumeric runs."""
    return [t for t in _TOKEN_SPLIT.split(value.lower()) if t]


@dataclass(frozen=True)
class IndexDocument:
    """Flat metadata view of one stored instance."""

    uri: StorageUri
    fields: dict[str, list[str]]
    study_uid: str
    series_uid: str
    sop_uid: str
    patient_id: str | None = field(default=None)

    def __post_init__(self):
        for uid in (self.study_uid, self.series_uid, self.sop_uid):
            if not uid:
                raise ValueError("index document requires non-empty instance UIDs")


def field_keyword(tag: Tag) -> str:
    """Dictionary keyword, or the 8-hex-digit rendering for unknown tags."""
    entry = dict_lookup(tag)
    return entry.keyword if entry is not None else str(tag)


def _render(value) -> str:
    if isinstance(value, Tag):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def extract_fields(obj: DicomObject, uri: StorageUri) -> IndexDocument:
    """Turn every primitive top-level element into an indexable field.

    Sequences, pixel data, and raw byte payloads (OB/OW/UN) are skipped;
    multi-valued elements keep every value.
    """
    fields: dict[str, list[str]] = {}
    ds: DataSet = obj.dataset
    for el in ds:
        if el.vr == "SQ" or el.vr in BYTES_VRS:
            continue
        fields[field_keyword(el.tag)] = [_render(v) for v in el.value]
    patient_el = ds.get("PatientID")
    patient_id = patient_el.first() if patient_el is not None and patient_el.value else None
    return IndexDocument(
        uri=uri,
        fields=fields,
        study_uid=obj.study_instance_uid,
        series_uid=obj.series_instance_uid,
        sop_uid=obj.sop_instance_uid,
        patient_id=patient_id,
    )
