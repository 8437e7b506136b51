"""DICOM data element tags."""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering


@total_ordering
@dataclass(frozen=True)
class Tag:
    """A (group, element) pair, ordered lexicographically."""

    group: int
    element: int

    def __post_init__(self) -> None:
        if not (0 <= self.group <= 0xFFFF and 0 <= self.element <= 0xFFFF):
            raise ValueError(f"tag components out of 16-bit range: {self.group:#x},{self.element:#x}")

    def __lt__(self, other: "Tag") -> bool:
        return (self.group, self.element) < (other.group, other.element)

    def __str__(self) -> str:
        return f"{self.group:04X}{self.element:04X}"

    def __repr__(self) -> str:
        return f"Tag(0x{self.group:04X}, 0x{self.element:04X})"

    @property
    def is_private(self) -> bool:
        # odd group numbers are reserved for private elements
        return self.group % 2 == 1

    @classmethod
    def parse(cls, text: str) -> "Tag":
        """Parse an 8-hex-digit rendering such as "00080060"."""
        text = text.strip()
        if len(text) != 8:
            raise ValueError(f"tag text must be 8 hex digits: {text!r}")
        return cls(int(text[:4], 16), int(text[4:], 16))


def tag(group: int, element: int) -> Tag:
    return Tag(group, element)


# Structural tags used by sequence encoding and the file meta group.
ITEM = Tag(0xFFFE, 0xE000)
ITEM_DELIMITER = Tag(0xFFFE, 0xE00D)
SEQUENCE_DELIMITER = Tag(0xFFFE, 0xE0DD)
FILE_META_GROUP_LENGTH = Tag(0x0002, 0x0000)
TRANSFER_SYNTAX_UID = Tag(0x0002, 0x0010)
MEDIA_SOP_CLASS_UID = Tag(0x0002, 0x0002)
MEDIA_SOP_INSTANCE_UID = Tag(0x0002, 0x0003)
SOP_CLASS_UID = Tag(0x0008, 0x0016)
SOP_INSTANCE_UID = Tag(0x0008, 0x0018)
STUDY_INSTANCE_UID = Tag(0x0020, 0x000D)
SERIES_INSTANCE_UID = Tag(0x0020, 0x000E)
PIXEL_DATA = Tag(0x7FE0, 0x0010)
