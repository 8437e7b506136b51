"""Transforming storage wrappers.

A wrapper exposes the same scheme as its inner backend and composes in
either order: object-level transforms (anonymize) rewrite the dataset
before it travels down the chain, byte-level transforms (compress) encode
the final serialization. at() always hands callers valid Part-10 bytes.
"""

from __future__ import annotations

import gzip
from typing import Iterator, Sequence

from ..dicom.codec import serialize_object
from ..dicom.dataset import DEFAULT_ANONYMIZE_PROFILE, EXPLICIT_VR_LE, DicomObject, anonymize
from ..dicom.tags import Tag
from ..errors import CorruptPayload
from .uri import StorageUri

COMPRESSED_SUFFIX = ".dcm.gz"


class _Wrapper:
    def __init__(self, inner):
        self.inner = inner

    def scheme(self) -> str:
        return self.inner.scheme()

    def transform_object(self, obj: DicomObject) -> DicomObject:
        """Composed object-phase transform of the chain below (and including) here."""
        return self.inner.transform_object(obj) if hasattr(self.inner, "transform_object") \
            else obj

    def layout_uri(self, obj: DicomObject, suffix: str = ".dcm") -> StorageUri:
        return self.inner.layout_uri(obj, suffix)

    def put(self, uri: StorageUri, data: bytes) -> None:
        self.inner.put(uri, data)

    def at(self, uri: StorageUri) -> bytes:
        return self.inner.at(uri)

    def delete(self, uri: StorageUri) -> bool:
        return self.inner.delete(uri)

    def list(self, prefix: StorageUri) -> Iterator[StorageUri]:
        return self.inner.list(prefix)


class AnonymizingStorage(_Wrapper):
    """Blanks identifying attributes before delegating. Irreversible."""

    def __init__(self, inner, profile: Sequence[Tag] = DEFAULT_ANONYMIZE_PROFILE):
        super().__init__(inner)
        self.profile = tuple(profile)

    def _strip(self, obj: DicomObject) -> DicomObject:
        return obj.with_dataset(anonymize(obj.dataset, self.profile))

    def transform_object(self, obj: DicomObject) -> DicomObject:
        return super().transform_object(self._strip(obj))

    def store(self, obj: DicomObject) -> StorageUri:
        return self.inner.store(self._strip(obj))


class CompressingStorage(_Wrapper):
    """Gzip-compresses serializations; files gain the .dcm.gz suffix."""

    def store(self, obj: DicomObject) -> StorageUri:
        obj = self.transform_object(obj)
        raw = serialize_object(obj, EXPLICIT_VR_LE)
        uri = self.inner.layout_uri(obj, suffix=COMPRESSED_SUFFIX)
        self.inner.put(uri, gzip.compress(raw))
        return uri

    def at(self, uri: StorageUri) -> bytes:
        data = self.inner.at(uri)
        if not str(uri).endswith(".gz"):
            return data
        try:
            return gzip.decompress(data)
        except (OSError, EOFError, gzip.BadGzipFile) as exc:
            raise CorruptPayload(f"cannot inflate {uri}: {exc}") from exc
