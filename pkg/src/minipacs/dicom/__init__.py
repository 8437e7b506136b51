"""DICOM object model, codec, and tag dictionary."""

from .codec import (
    ByteReader,
    decode_dataset,
    decode_element,
    encode_dataset,
    encode_element,
    looks_like_dicom,
    parse_object,
    serialize_object,
)
from .dataset import (
    DEFAULT_ANONYMIZE_PROFILE,
    EXPLICIT_VR_LE,
    IMPLICIT_VR_LE,
    SUPPORTED_SYNTAXES,
    DataElement,
    DataSet,
    DicomObject,
    anonymize,
    get_value_string,
)
from .dictionary import DictEntry, all_entries, dict_lookup
from .tags import Tag, tag

__all__ = [
    "ByteReader",
    "DEFAULT_ANONYMIZE_PROFILE",
    "DataElement",
    "DataSet",
    "DicomObject",
    "DictEntry",
    "EXPLICIT_VR_LE",
    "IMPLICIT_VR_LE",
    "SUPPORTED_SYNTAXES",
    "Tag",
    "all_entries",
    "anonymize",
    "decode_dataset",
    "decode_element",
    "dict_lookup",
    "encode_dataset",
    "encode_element",
    "get_value_string",
    "looks_like_dicom",
    "parse_object",
    "serialize_object",
    "tag",
]
