"""DIMSE command/data message pairs.

Command sets travel as implicit VR LE datasets (standard-fixed) with a
(0000,0000) group length recomputed on write and stripped on read. The
presence of a data set follows CommandDataSetType: 0x0101 means none.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..dicom.codec import decode_dataset, encode_dataset, encode_element
from ..dicom.dataset import IMPLICIT_VR_LE, DataElement, DataSet, get_value_string
from ..dicom.tags import Tag
from ..errors import MalformedPdu

# command fields
C_STORE_RQ = 0x0001
C_STORE_RSP = 0x8001
C_FIND_RQ = 0x0020
C_FIND_RSP = 0x8020
C_ECHO_RQ = 0x0030
C_ECHO_RSP = 0x8030

NO_DATASET = 0x0101

# statuses
STATUS_SUCCESS = 0x0000
STATUS_PENDING = 0xFF00
STATUS_OUT_OF_RESOURCES = 0xA700
STATUS_IDENTIFIER_ERROR = 0xA900
STATUS_UNABLE_TO_PROCESS = 0xC000

COMMAND_GROUP_LENGTH = Tag(0x0000, 0x0000)
AFFECTED_SOP_CLASS = Tag(0x0000, 0x0002)
COMMAND_FIELD = Tag(0x0000, 0x0100)
MESSAGE_ID = Tag(0x0000, 0x0110)
MESSAGE_ID_RESPONDED = Tag(0x0000, 0x0120)
PRIORITY = Tag(0x0000, 0x0700)
DATA_SET_TYPE = Tag(0x0000, 0x0800)
STATUS = Tag(0x0000, 0x0900)
AFFECTED_SOP_INSTANCE = Tag(0x0000, 0x1000)

VERIFICATION_SOP_CLASS = "1.2.840.10008.1.1"
STUDY_ROOT_FIND_SOP_CLASS = "1.2.840.10008.5.1.4.1.2.2.1"
STORAGE_SOP_CLASS_PREFIX = "1.2.840.10008.5.1.4.1.1."


@dataclass(frozen=True)
class DimseMessage:
    command: DataSet
    data: DataSet | None = None

    def __post_init__(self):
        if (self.data is not None) != self.expects_data:
            raise ValueError("data presence disagrees with CommandDataSetType")

    @property
    def command_field(self) -> int:
        el = self.command.get(COMMAND_FIELD)
        return el.first() if el is not None and el.value else -1

    @property
    def expects_data(self) -> bool:
        el = self.command.get(DATA_SET_TYPE)
        return bool(el is not None and el.value and el.first() != NO_DATASET)

    @property
    def message_id(self) -> int:
        el = self.command.get(MESSAGE_ID)
        return el.first() if el is not None and el.value else 0

    @property
    def status(self) -> int:
        el = self.command.get(STATUS)
        return el.first() if el is not None and el.value else -1

    @property
    def affected_sop_class(self) -> str:
        return get_value_string(self.command, AFFECTED_SOP_CLASS) or ""

    @property
    def affected_sop_instance(self) -> str:
        return get_value_string(self.command, AFFECTED_SOP_INSTANCE) or ""


def encode_command(command: DataSet) -> bytes:
    """Implicit VR LE bytes with (0000,0000) group length prepended."""
    body = encode_dataset(command.without(COMMAND_GROUP_LENGTH), IMPLICIT_VR_LE)
    head = encode_element(DataElement(COMMAND_GROUP_LENGTH, "UL", len(body)), IMPLICIT_VR_LE)
    return head + body


def decode_command(data: bytes) -> DataSet:
    ds = decode_dataset(data, IMPLICIT_VR_LE)
    for el in ds:
        if el.tag.group != 0x0000:
            raise MalformedPdu(f"command set contains non-command element {el.tag}")
    return ds.without(COMMAND_GROUP_LENGTH)


def _command(fields: list[DataElement]) -> DataSet:
    return DataSet(fields)


def echo_rq(message_id: int) -> DataSet:
    return _command([
        DataElement(AFFECTED_SOP_CLASS, "UI", VERIFICATION_SOP_CLASS),
        DataElement(COMMAND_FIELD, "US", C_ECHO_RQ),
        DataElement(MESSAGE_ID, "US", message_id),
        DataElement(DATA_SET_TYPE, "US", NO_DATASET),
    ])


def echo_rsp(message_id: int, status: int = STATUS_SUCCESS) -> DataSet:
    return _command([
        DataElement(AFFECTED_SOP_CLASS, "UI", VERIFICATION_SOP_CLASS),
        DataElement(COMMAND_FIELD, "US", C_ECHO_RSP),
        DataElement(MESSAGE_ID_RESPONDED, "US", message_id),
        DataElement(DATA_SET_TYPE, "US", NO_DATASET),
        DataElement(STATUS, "US", status),
    ])


def store_rq(message_id: int, sop_class: str, sop_instance: str) -> DataSet:
    return _command([
        DataElement(AFFECTED_SOP_CLASS, "UI", sop_class),
        DataElement(COMMAND_FIELD, "US", C_STORE_RQ),
        DataElement(MESSAGE_ID, "US", message_id),
        DataElement(PRIORITY, "US", 0),
        DataElement(DATA_SET_TYPE, "US", 0x0000),
        DataElement(AFFECTED_SOP_INSTANCE, "UI", sop_instance),
    ])


def store_rsp(rq_command: DataSet, status: int) -> DataSet:
    message_id = rq_command.get(MESSAGE_ID)
    fields = [
        DataElement(COMMAND_FIELD, "US", C_STORE_RSP),
        DataElement(DATA_SET_TYPE, "US", NO_DATASET),
        DataElement(STATUS, "US", status),
        DataElement(MESSAGE_ID_RESPONDED, "US",
                    message_id.first() if message_id is not None and message_id.value else 0),
    ]
    sop_class = get_value_string(rq_command, AFFECTED_SOP_CLASS)
    if sop_class:
        fields.append(DataElement(AFFECTED_SOP_CLASS, "UI", sop_class))
    sop_instance = get_value_string(rq_command, AFFECTED_SOP_INSTANCE)
    if sop_instance:
        fields.append(DataElement(AFFECTED_SOP_INSTANCE, "UI", sop_instance))
    return _command(fields)


def find_rq(message_id: int) -> DataSet:
    return _command([
        DataElement(AFFECTED_SOP_CLASS, "UI", STUDY_ROOT_FIND_SOP_CLASS),
        DataElement(COMMAND_FIELD, "US", C_FIND_RQ),
        DataElement(MESSAGE_ID, "US", message_id),
        DataElement(PRIORITY, "US", 0),
        DataElement(DATA_SET_TYPE, "US", 0x0000),
    ])


def find_rsp(rq_command: DataSet, status: int, with_data: bool) -> DataSet:
    message_id = rq_command.get(MESSAGE_ID)
    return _command([
        DataElement(AFFECTED_SOP_CLASS, "UI", STUDY_ROOT_FIND_SOP_CLASS),
        DataElement(COMMAND_FIELD, "US", C_FIND_RSP),
        DataElement(MESSAGE_ID_RESPONDED, "US",
                    message_id.first() if message_id is not None and message_id.value else 0),
        DataElement(DATA_SET_TYPE, "US", 0x0000 if with_data else NO_DATASET),
        DataElement(STATUS, "US", status),
    ])
