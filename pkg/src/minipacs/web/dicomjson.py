"""DICOM JSON encoding (the QIDO-RS response model).

Keys are 8-hex-digit tags; each attribute is {"vr": ..., "Value": [...]}
with the Value omitted for empty elements. Person names wrap in
{"Alphabetic": ...}; binary payloads inline as base64.
"""

from __future__ import annotations

import base64

from ..dicom.dataset import DataSet
from ..dicom.dictionary import BYTES_VRS
from ..dicom.tags import Tag


def _encode_values(vr: str, value) -> list | None:
    if vr == "SQ":
        return [to_dicom_json(item) for item in value] or None
    if vr in BYTES_VRS:
        return None  # handled via InlineBinary
    if not value:
        return None
    if vr == "PN":
        return [{"Alphabetic": v} for v in value]
    if vr == "IS":
        return [int(v) for v in value]
    if vr == "DS":
        return [float(v) for v in value]
    if vr == "AT":
        return [str(v) for v in value]
    return list(value)


def to_dicom_json(ds: DataSet) -> dict:
    out: dict[str, dict] = {}
    for el in ds:
        attr: dict = {"vr": el.vr}
        if el.vr in BYTES_VRS:
            if el.value:
                attr["InlineBinary"] = base64.b64encode(el.value).decode("ascii")
        else:
            values = _encode_values(el.vr, el.value)
            if values is not None:
                attr["Value"] = values
        out[str(el.tag)] = attr
    return out


def study_attributes(study_uid: str, fields: dict[str, list[str]],
                     modalities: tuple[str, ...]) -> DataSet:
    """The default QIDO study-level attribute set."""
    from ..dicom.dataset import DataElement

    def first(keyword: str) -> list[str]:
        values = fields.get(keyword)
        return [values[0]] if values else []

    return DataSet([
        DataElement(Tag(0x0008, 0x0020), "DA", first("StudyDate")),
        DataElement(Tag(0x0008, 0x0050), "SH", first("AccessionNumber")),
        DataElement(Tag(0x0008, 0x0061), "CS", list(modalities)),
        DataElement(Tag(0x0010, 0x0010), "PN", first("PatientName")),
        DataElement(Tag(0x0010, 0x0020), "LO", first("PatientID")),
        DataElement(Tag(0x0020, 0x000D), "UI", study_uid),
    ])
