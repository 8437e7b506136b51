"""Scheme-addressed storage locations."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import BadUri

_SCHEME = re.compile(r"[a-z][a-z0-9+.-]*\Z")


@dataclass(frozen=True, order=True)
class StorageUri:
    """A location of the form scheme://path.

    The path keeps its leading slash when present (file:///a/b has path
    "/a/b"), so rendering and parsing are exact inverses. ".." segments
    are rejected everywhere.
    """

    scheme: str
    path: str

    def __post_init__(self):
        if not _SCHEME.match(self.scheme):
            raise BadUri(f"invalid scheme {self.scheme!r}")
        if ".." in self.path.split("/"):
            raise BadUri(f'".." segment in path {self.path!r}')

    def __str__(self) -> str:
        return f"{self.scheme}://{self.path}"

    @classmethod
    def parse(cls, text: str) -> "StorageUri":
        scheme, sep, path = text.partition("://")
        if not sep or not scheme:
            raise BadUri(f"not a storage URI: {text!r}")
        return cls(scheme.lower(), path)

    @property
    def basename(self) -> str:
        return self.path.rsplit("/", 1)[-1]

    @property
    def extension(self) -> str:
        """Final extension of the last path segment, lowercased ("" if none)."""
        name = self.basename
        dot = name.rfind(".")
        return name[dot:].lower() if dot > 0 else ""

    def child(self, segment: str) -> "StorageUri":
        if "/" in segment:
            raise BadUri(f"child segment may not contain '/': {segment!r}")
        joined = f"{self.path.rstrip('/')}/{segment}" if self.path else segment
        return StorageUri(self.scheme, joined)
