"""Shared generators and builders for the test suite."""

from __future__ import annotations

import random
import string

from minipacs.dicom import (
    EXPLICIT_VR_LE,
    DataElement,
    DataSet,
    DicomObject,
    Tag,
    all_entries,
)
from minipacs.search.queryparser import And, MatchAll, Not, Or, Term

# Dictionary entries usable as random dataset content (no command/meta
# groups, no pixel data monsters).
CONTENT_ENTRIES = [
    e for e in all_entries()
    if e.tag.group not in (0x0000, 0x0002) and e.tag != Tag(0x7FE0, 0x0010)
]
SQ_ENTRIES = [e for e in CONTENT_ENTRIES if e.vr == "SQ"]
PRIMITIVE_ENTRIES = [e for e in CONTENT_ENTRIES if e.vr != "SQ"]

REQUIRED_UID_TAGS = {Tag(0x0008, 0x0018), Tag(0x0020, 0x000D), Tag(0x0020, 0x000E)}

_UPPER = string.ascii_uppercase + string.digits
_WORDS = ["head", "chest", "axial", "bone", "soft", "routine", "thin", "recon",
          "contrast", "plain", "spine", "late", "early", "left", "right"]


def random_uid(rng: random.Random, depth: int = 4) -> str:
    return "1.2.826.0." + ".".join(str(rng.randint(1, 99999)) for _ in range(depth))


def random_value(rng: random.Random, vr: str):
    n = rng.randint(1, 3)
    if vr == "CS":
        return ["".join(rng.choices(_UPPER, k=rng.randint(1, 10))) for _ in range(n)]
    if vr == "SH" or vr == "LO":
        return [" ".join(rng.sample(_WORDS, rng.randint(1, 2))).title() for _ in range(n)]
    if vr in ("LT", "ST", "UT"):
        return " ".join(rng.sample(_WORDS, rng.randint(1, 6)))
    if vr == "PN":
        return [f"{rng.choice(_WORDS).title()}^{rng.choice(_WORDS).title()}" for _ in range(n)]
    if vr == "DA":
        return [f"20{rng.randint(0, 25):02d}{rng.randint(1, 12):02d}{rng.randint(1, 28):02d}"
                for _ in range(n)]
    if vr == "TM":
        return [f"{rng.randint(0, 23):02d}{rng.randint(0, 59):02d}{rng.randint(0, 59):02d}"
                for _ in range(n)]
    if vr == "DT":
        return [f"20{rng.randint(0, 25):02d}0102120000" for _ in range(n)]
    if vr == "AS":
        return [f"{rng.randint(0, 120):03d}Y"]
    if vr == "IS":
        return [str(rng.randint(-2048, 4096)) for _ in range(n)]
    if vr == "DS":
        return [f"{rng.uniform(-500, 500):.4f}" for _ in range(n)]
    if vr == "UI":
        return [random_uid(rng) for _ in range(n)]
    if vr == "AE":
        return ["".join(rng.choices(_UPPER, k=rng.randint(2, 12)))]
    if vr == "US":
        return [rng.randint(0, 0xFFFF) for _ in range(n)]
    if vr == "UL":
        return [rng.randint(0, 0xFFFFFFFF) for _ in range(n)]
    if vr == "SS":
        return [rng.randint(-0x8000, 0x7FFF) for _ in range(n)]
    if vr == "SL":
        return [rng.randint(-0x80000000, 0x7FFFFFFF) for _ in range(n)]
    if vr == "FL" or vr == "FD":
        return [rng.uniform(-1e6, 1e6) for _ in range(n)]
    if vr == "AT":
        return [Tag(rng.randint(0, 0xFFFE) & 0xFFFE, rng.randint(0, 0xFFFF))
                for _ in range(n)]
    if vr in ("OB", "OW", "UN"):
        return rng.randbytes(2 * rng.randint(0, 32))
    raise AssertionError(f"no generator for VR {vr}")


def random_item(rng: random.Random, depth: int) -> DataSet:
    elements = []
    used: set[Tag] = set()
    for entry in rng.sample(PRIMITIVE_ENTRIES, rng.randint(1, 4)):
        if entry.tag in used:
            continue
        used.add(entry.tag)
        elements.append(DataElement(entry.tag, entry.vr, random_value(rng, entry.vr)))
    if depth > 0 and rng.random() < 0.4:
        entry = rng.choice(SQ_ENTRIES)
        if entry.tag not in used:
            items = [random_item(rng, depth - 1) for _ in range(rng.randint(0, 2))]
            elements.append(DataElement(entry.tag, "SQ", items))
    return DataSet(elements)


def random_object(rng: random.Random, max_sq_depth: int = 2) -> DicomObject:
    """Random valid object: dictionary tags, VR-conformant values, SQ depth <= 2."""
    elements = {
        Tag(0x0008, 0x0018): DataElement(Tag(0x0008, 0x0018), "UI", random_uid(rng)),
        Tag(0x0020, 0x000D): DataElement(Tag(0x0020, 0x000D), "UI", random_uid(rng)),
        Tag(0x0020, 0x000E): DataElement(Tag(0x0020, 0x000E), "UI", random_uid(rng)),
    }
    for entry in rng.sample(PRIMITIVE_ENTRIES, rng.randint(3, 12)):
        if entry.tag in elements:
            continue
        elements[entry.tag] = DataElement(entry.tag, entry.vr, random_value(rng, entry.vr))
    for entry in rng.sample(SQ_ENTRIES, rng.randint(0, 2)):
        if entry.tag in elements:
            continue
        items = [random_item(rng, max_sq_depth - 1) for _ in range(rng.randint(0, 3))]
        elements[entry.tag] = DataElement(entry.tag, "SQ", items)
    return DicomObject.from_dataset(DataSet(elements.values()), EXPLICIT_VR_LE,
                                    sop_class_uid="1.2.840.10008.5.1.4.1.1.7")


def build_instance(*, patient_name: str = "Doe^John", patient_id: str = "P-1",
                   study_uid: str = "1.2.3", series_uid: str = "1.2.3.4",
                   sop_uid: str = "1.2.3.4.5", modality: str = "CT",
                   study_date: str = "20240102", accession: str = "ACC1",
                   extra: list[DataElement] | None = None,
                   pixel_bytes: bytes | None = None) -> DicomObject:
    """Deterministic synthetic instance for fixtures."""
    elements = [
        DataElement(Tag(0x0008, 0x0016), "UI", "1.2.840.10008.5.1.4.1.1.7"),
        DataElement(Tag(0x0008, 0x0018), "UI", sop_uid),
        DataElement(Tag(0x0008, 0x0020), "DA", study_date),
        DataElement(Tag(0x0008, 0x0050), "SH", accession),
        DataElement(Tag(0x0008, 0x0060), "CS", modality),
        DataElement(Tag(0x0010, 0x0010), "PN", patient_name),
        DataElement(Tag(0x0010, 0x0020), "LO", patient_id),
        DataElement(Tag(0x0020, 0x000D), "UI", study_uid),
        DataElement(Tag(0x0020, 0x000E), "UI", series_uid),
    ]
    if pixel_bytes is not None:
        elements.append(DataElement(Tag(0x0028, 0x0010), "US", 16))
        elements.append(DataElement(Tag(0x0028, 0x0011), "US", 16))
        elements.append(DataElement(Tag(0x7FE0, 0x0010), "OW", pixel_bytes))
    if extra:
        elements.extend(extra)
    return DicomObject.from_dataset(DataSet(elements), EXPLICIT_VR_LE,
                                    sop_class_uid="1.2.840.10008.5.1.4.1.1.7")


# --- random corpora and queries for the oracle-equivalence battery ---------

CORPUS_FIELDS = ["Modality", "PatientName", "StudyDescription", "BodyPartExamined",
                 "InstitutionName", "StudyDate"]
_FIELD_VALUES = {
    "Modality": ["CT", "MR", "US", "XA", "CR", "NM"],
    "PatientName": ["Silva^Rui", "Doe^John", "Doe^Jane", "Costa^Ana", "Pinho^Edu",
                    "Lebre^Maria"],
    "StudyDescription": ["head routine", "chest thin recon", "abdomen contrast",
                         "spine plain", "knee left", "knee right"],
    "BodyPartExamined": ["HEAD", "CHEST", "ABDOMEN", "SPINE", "KNEE"],
    "InstitutionName": ["General Hospital", "City Clinic", "University Lab"],
    "StudyDate": ["20230101", "20230515", "20240102", "20241231"],
}


def random_corpus(rng: random.Random, max_docs: int = 1000) -> dict[str, dict[str, list[str]]]:
    size = rng.randint(1, max_docs)
    corpus = {}
    for i in range(size):
        fields = {}
        for fname in rng.sample(CORPUS_FIELDS, rng.randint(1, len(CORPUS_FIELDS))):
            pool = _FIELD_VALUES[fname]
            fields[fname] = rng.sample(pool, rng.randint(1, 2))
        corpus[f"mem://corpus/doc-{i:04d}.dcm"] = fields
    return corpus


def _random_pattern(rng: random.Random) -> str:
    field = rng.choice(CORPUS_FIELDS)
    value = rng.choice(_FIELD_VALUES[field])
    style = rng.random()
    if style < 0.4:
        return value
    if style < 0.6:
        cut = rng.randint(1, max(1, len(value) - 1))
        return value[:cut] + "*"
    if style < 0.75:
        idx = rng.randrange(len(value))
        return value[:idx] + "?" + value[idx + 1:]
    if style < 0.9:
        token = rng.choice(value.replace("^", " ").split())
        return token
    return "".join(rng.choices(string.ascii_lowercase, k=4))  # likely no match


def random_ast(rng: random.Random, depth: int = 4):
    roll = rng.random()
    if depth <= 0 or roll < 0.45:
        if rng.random() < 0.7:
            return Term(rng.choice(CORPUS_FIELDS), _random_pattern(rng))
        return Term(None, _random_pattern(rng))
    if roll < 0.65:
        return And(tuple(random_ast(rng, depth - 1) for _ in range(rng.randint(2, 3))))
    if roll < 0.85:
        return Or(tuple(random_ast(rng, depth - 1) for _ in range(rng.randint(2, 3))))
    if roll < 0.95:
        return Not(random_ast(rng, depth - 1))
    return MatchAll()
