"""Built-in tag dictionary and value-representation metadata.

The dictionary covers the command group, file meta group, and the common
identification / patient / study / series / acquisition / image-pixel
attributes an archive routinely sees. It is not the full standard
dictionary; unknown tags survive parsing as UN (implicit VR) or whatever
VR the stream declares (explicit VR).
"""

from __future__ import annotations

from dataclasses import dataclass

from .tags import Tag

# The supported two-letter VR codes.
VR_CODES = frozenset({
    "AE", "AS", "AT", "CS", "DA", "DS", "DT", "FL", "FD", "IS", "LO", "LT",
    "OB", "OW", "PN", "SH", "SL", "SQ", "SS", "ST", "TM", "UI", "UL", "UN",
    "US", "UT",
})

# VRs whose explicit encoding uses 2 reserved bytes + a 4-byte length.
LONG_LENGTH_VRS = frozenset({"OB", "OW", "SQ", "UN", "UT"})

# VRs holding text. LT/ST/UT never split on backslash (VM is always 1).
TEXT_VRS = frozenset({"AE", "AS", "CS", "DA", "DS", "DT", "IS", "LO", "LT",
                      "PN", "SH", "ST", "TM", "UI", "UT"})
SINGLE_VALUE_TEXT_VRS = frozenset({"LT", "ST", "UT"})

# Binary numeric VRs and their struct formats.
INT_VR_FORMATS = {"SL": "<i", "SS": "<h", "UL": "<I", "US": "<H"}
FLOAT_VR_FORMATS = {"FL": "<f", "FD": "<d"}

# Raw byte payloads, never interpreted.
BYTES_VRS = frozenset({"OB", "OW", "UN"})


@dataclass(frozen=True)
class DictEntry:
    tag: Tag
    keyword: str
    vr: str


# (group, element, keyword, VR)
_ENTRIES = [
    # command group (PS3.7 message fields; always implicit VR on the wire)
    (0x0000, 0x0000, "CommandGroupLength", "UL"),
    (0x0000, 0x0002, "AffectedSOPClassUID", "UI"),
    (0x0000, 0x0003, "RequestedSOPClassUID", "UI"),
    (0x0000, 0x0100, "CommandField", "US"),
    (0x0000, 0x0110, "MessageID", "US"),
    (0x0000, 0x0120, "MessageIDBeingRespondedTo", "US"),
    (0x0000, 0x0600, "MoveDestination", "AE"),
    (0x0000, 0x0700, "Priority", "US"),
    (0x0000, 0x0800, "CommandDataSetType", "US"),
    (0x0000, 0x0900, "Status", "US"),
    (0x0000, 0x0902, "ErrorComment", "LO"),
    (0x0000, 0x1000, "AffectedSOPInstanceUID", "UI"),
    (0x0000, 0x1001, "RequestedSOPInstanceUID", "UI"),
    # file meta group
    (0x0002, 0x0000, "FileMetaInformationGroupLength", "UL"),
    (0x0002, 0x0001, "FileMetaInformationVersion", "OB"),
    (0x0002, 0x0002, "MediaStorageSOPClassUID", "UI"),
    (0x0002, 0x0003, "MediaStorageSOPInstanceUID", "UI"),
    (0x0002, 0x0010, "TransferSyntaxUID", "UI"),
    (0x0002, 0x0012, "ImplementationClassUID", "UI"),
    (0x0002, 0x0013, "ImplementationVersionName", "SH"),
    (0x0002, 0x0016, "SourceApplicationEntityTitle", "AE"),
    # identification
    (0x0008, 0x0005, "SpecificCharacterSet", "CS"),
    (0x0008, 0x0008, "ImageType", "CS"),
    (0x0008, 0x0012, "InstanceCreationDate", "DA"),
    (0x0008, 0x0013, "InstanceCreationTime", "TM"),
    (0x0008, 0x0014, "InstanceCreatorUID", "UI"),
    (0x0008, 0x0016, "SOPClassUID", "UI"),
    (0x0008, 0x0018, "SOPInstanceUID", "UI"),
    (0x0008, 0x0020, "StudyDate", "DA"),
    (0x0008, 0x0021, "SeriesDate", "DA"),
    (0x0008, 0x0022, "AcquisitionDate", "DA"),
    (0x0008, 0x0023, "ContentDate", "DA"),
    (0x0008, 0x0030, "StudyTime", "TM"),
    (0x0008, 0x0031, "SeriesTime", "TM"),
    (0x0008, 0x0032, "AcquisitionTime", "TM"),
    (0x0008, 0x0033, "ContentTime", "TM"),
    (0x0008, 0x0050, "AccessionNumber", "SH"),
    (0x0008, 0x0052, "QueryRetrieveLevel", "CS"),
    (0x0008, 0x0054, "RetrieveAETitle", "AE"),
    (0x0008, 0x0056, "InstanceAvailability", "CS"),
    (0x0008, 0x0060, "Modality", "CS"),
    (0x0008, 0x0061, "ModalitiesInStudy", "CS"),
    (0x0008, 0x0064, "ConversionType", "CS"),
    (0x0008, 0x0070, "Manufacturer", "LO"),
    (0x0008, 0x0080, "InstitutionName", "LO"),
    (0x0008, 0x0081, "InstitutionAddress", "ST"),
    (0x0008, 0x0090, "ReferringPhysicianName", "PN"),
    (0x0008, 0x1010, "StationName", "SH"),
    (0x0008, 0x1030, "StudyDescription", "LO"),
    (0x0008, 0x103E, "SeriesDescription", "LO"),
    (0x0008, 0x1040, "InstitutionalDepartmentName", "LO"),
    (0x0008, 0x1048, "PhysiciansOfRecord", "PN"),
    (0x0008, 0x1050, "PerformingPhysicianName", "PN"),
    (0x0008, 0x1060, "NameOfPhysiciansReadingStudy", "PN"),
    (0x0008, 0x1070, "OperatorsName", "PN"),
    (0x0008, 0x1080, "AdmittingDiagnosesDescription", "LO"),
    (0x0008, 0x1090, "ManufacturerModelName", "LO"),
    (0x0008, 0x1110, "ReferencedStudySequence", "SQ"),
    (0x0008, 0x1115, "ReferencedSeriesSequence", "SQ"),
    (0x0008, 0x1140, "ReferencedImageSequence", "SQ"),
    (0x0008, 0x1150, "ReferencedSOPClassUID", "UI"),
    (0x0008, 0x1155, "ReferencedSOPInstanceUID", "UI"),
    (0x0008, 0x2111, "DerivationDescription", "ST"),
    (0x0008, 0x9215, "DerivationCodeSequence", "SQ"),
    # patient
    (0x0010, 0x0010, "PatientName", "PN"),
    (0x0010, 0x0020, "PatientID", "LO"),
    (0x0010, 0x0021, "IssuerOfPatientID", "LO"),
    (0x0010, 0x0030, "PatientBirthDate", "DA"),
    (0x0010, 0x0032, "PatientBirthTime", "TM"),
    (0x0010, 0x0040, "PatientSex", "CS"),
    (0x0010, 0x1000, "OtherPatientIDs", "LO"),
    (0x0010, 0x1001, "OtherPatientNames", "PN"),
    (0x0010, 0x1010, "PatientAge", "AS"),
    (0x0010, 0x1020, "PatientSize", "DS"),
    (0x0010, 0x1030, "PatientWeight", "DS"),
    (0x0010, 0x2160, "EthnicGroup", "SH"),
    (0x0010, 0x21B0, "AdditionalPatientHistory", "LT"),
    (0x0010, 0x4000, "PatientComments", "LT"),
    # acquisition
    (0x0018, 0x0010, "ContrastBolusAgent", "LO"),
    (0x0018, 0x0015, "BodyPartExamined", "CS"),
    (0x0018, 0x0020, "ScanningSequence", "CS"),
    (0x0018, 0x0021, "SequenceVariant", "CS"),
    (0x0018, 0x0022, "ScanOptions", "CS"),
    (0x0018, 0x0023, "MRAcquisitionType", "CS"),
    (0x0018, 0x0050, "SliceThickness", "DS"),
    (0x0018, 0x0060, "KVP", "DS"),
    (0x0018, 0x0080, "RepetitionTime", "DS"),
    (0x0018, 0x0081, "EchoTime", "DS"),
    (0x0018, 0x0087, "MagneticFieldStrength", "DS"),
    (0x0018, 0x0088, "SpacingBetweenSlices", "DS"),
    (0x0018, 0x0090, "DataCollectionDiameter", "DS"),
    (0x0018, 0x1000, "DeviceSerialNumber", "LO"),
    (0x0018, 0x1020, "SoftwareVersions", "LO"),
    (0x0018, 0x1030, "ProtocolName", "LO"),
    (0x0018, 0x1100, "ReconstructionDiameter", "DS"),
    (0x0018, 0x1110, "DistanceSourceToDetector", "DS"),
    (0x0018, 0x1111, "DistanceSourceToPatient", "DS"),
    (0x0018, 0x1120, "GantryDetectorTilt", "DS"),
    (0x0018, 0x1130, "TableHeight", "DS"),
    (0x0018, 0x1150, "ExposureTime", "IS"),
    (0x0018, 0x1151, "XRayTubeCurrent", "IS"),
    (0x0018, 0x1152, "Exposure", "IS"),
    (0x0018, 0x1160, "FilterType", "SH"),
    (0x0018, 0x1190, "FocalSpots", "DS"),
    (0x0018, 0x1210, "ConvolutionKernel", "SH"),
    (0x0018, 0x5100, "PatientPosition", "CS"),
    # relationship
    (0x0020, 0x000D, "StudyInstanceUID", "UI"),
    (0x0020, 0x000E, "SeriesInstanceUID", "UI"),
    (0x0020, 0x0010, "StudyID", "SH"),
    (0x0020, 0x0011, "SeriesNumber", "IS"),
    (0x0020, 0x0012, "AcquisitionNumber", "IS"),
    (0x0020, 0x0013, "InstanceNumber", "IS"),
    (0x0020, 0x0020, "PatientOrientation", "CS"),
    (0x0020, 0x0032, "ImagePositionPatient", "DS"),
    (0x0020, 0x0037, "ImageOrientationPatient", "DS"),
    (0x0020, 0x0052, "FrameOfReferenceUID", "UI"),
    (0x0020, 0x1040, "PositionReferenceIndicator", "LO"),
    (0x0020, 0x1041, "SliceLocation", "DS"),
    (0x0020, 0x4000, "ImageComments", "LT"),
    # image pixel description
    (0x0028, 0x0002, "SamplesPerPixel", "US"),
    (0x0028, 0x0004, "PhotometricInterpretation", "CS"),
    (0x0028, 0x0008, "NumberOfFrames", "IS"),
    (0x0028, 0x0010, "Rows", "US"),
    (0x0028, 0x0011, "Columns", "US"),
    (0x0028, 0x0030, "PixelSpacing", "DS"),
    (0x0028, 0x0100, "BitsAllocated", "US"),
    (0x0028, 0x0101, "BitsStored", "US"),
    (0x0028, 0x0102, "HighBit", "US"),
    (0x0028, 0x0103, "PixelRepresentation", "US"),
    (0x0028, 0x0106, "SmallestImagePixelValue", "US"),
    (0x0028, 0x0107, "LargestImagePixelValue", "US"),
    (0x0028, 0x1050, "WindowCenter", "DS"),
    (0x0028, 0x1051, "WindowWidth", "DS"),
    (0x0028, 0x1052, "RescaleIntercept", "DS"),
    (0x0028, 0x1053, "RescaleSlope", "DS"),
    (0x0028, 0x1054, "RescaleType", "LO"),
    (0x0028, 0x2110, "LossyImageCompression", "CS"),
    # study scheduling / visit
    (0x0032, 0x1032, "RequestingPhysician", "PN"),
    (0x0032, 0x1060, "RequestedProcedureDescription", "LO"),
    (0x0032, 0x4000, "StudyComments", "LT"),
    (0x0038, 0x0010, "AdmissionID", "LO"),
    (0x0038, 0x0050, "SpecialNeeds", "LO"),
    (0x0038, 0x0300, "CurrentPatientLocation", "LO"),
    (0x0038, 0x0500, "PatientState", "LO"),
    (0x0040, 0x0244, "PerformedProcedureStepStartDate", "DA"),
    (0x0040, 0x0245, "PerformedProcedureStepStartTime", "TM"),
    (0x0040, 0x0253, "PerformedProcedureStepID", "SH"),
    (0x0040, 0x0254, "PerformedProcedureStepDescription", "LO"),
    (0x0040, 0x0275, "RequestAttributesSequence", "SQ"),
    (0x0040, 0x1001, "RequestedProcedureID", "SH"),
    # pixel data
    (0x7FE0, 0x0010, "PixelData", "OW"),
]

_BY_TAG: dict[Tag, DictEntry] = {}
_BY_KEYWORD: dict[str, DictEntry] = {}
for _g, _e, _kw, _vr in _ENTRIES:
    _entry = DictEntry(Tag(_g, _e), _kw, _vr)
    assert _entry.tag not in _BY_TAG, f"duplicate tag {_entry.tag}"
    assert _kw not in _BY_KEYWORD, f"duplicate keyword {_kw}"
    _BY_TAG[_entry.tag] = _entry
    _BY_KEYWORD[_kw] = _entry


def dict_lookup(key: Tag | str) -> DictEntry | None:
    """Look up a dictionary entry by Tag or by keyword string."""
    if isinstance(key, Tag):
        return _BY_TAG.get(key)
    return _BY_KEYWORD.get(key)


def vr_for_tag(tag: Tag) -> str:
    """Resolve the VR used when a stream does not carry one (implicit VR).

    Group-length elements (element 0000) are UL by construction; anything
    not in the dictionary decodes as UN.
    """
    entry = _BY_TAG.get(tag)
    if entry is not None:
        return entry.vr
    if tag.element == 0x0000:
        return "UL"
    return "UN"


def all_entries() -> list[DictEntry]:
    """All dictionary entries in ascending tag order."""
    return [_BY_TAG[t] for t in sorted(_BY_TAG)]
