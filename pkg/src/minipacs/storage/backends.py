"""File and in-memory storage backends.

Both lay instances out hierarchically as study/series/sop, which keeps the
archive browsable by hand. Backends also expose put/get raw-byte hooks so
transforming wrappers can store encoded payloads under adjusted names.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path
from typing import Iterator

from ..dicom.codec import serialize_object
from ..dicom.dataset import EXPLICIT_VR_LE, DicomObject
from ..errors import BadUri, IoFailure, NotFound
from .uri import StorageUri


def _safe_segment(value: str) -> str:
    # UIDs become path segments; reject anything that could escape the root
    if not value or value in (".", "..") or "/" in value or "\\" in value or "\x00" in value:
        raise BadUri(f"UID unusable as a path segment: {value!r}")
    return value


def _layout_segments(obj: DicomObject, suffix: str) -> tuple[str, str, str]:
    return (_safe_segment(obj.study_instance_uid),
            _safe_segment(obj.series_instance_uid),
            _safe_segment(obj.sop_instance_uid) + suffix)


class FileStorage:
    """Stores Part-10 files under a root directory."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def scheme(self) -> str:
        return "file"

    def layout_uri(self, obj: DicomObject, suffix: str = ".dcm") -> StorageUri:
        study, series, name = _layout_segments(obj, suffix)
        path = self.root / study / series / name
        return StorageUri("file", path.as_posix())

    def store(self, obj: DicomObject) -> StorageUri:
        uri = self.layout_uri(obj)
        self.put(uri, serialize_object(obj, EXPLICIT_VR_LE))
        return uri

    def put(self, uri: StorageUri, data: bytes) -> None:
        path = Path(uri.path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(path.name + ".part")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        except OSError as exc:
            raise IoFailure(f"cannot write {uri}: {exc}") from exc

    def at(self, uri: StorageUri) -> bytes:
        path = Path(uri.path)
        if not path.is_file():
            raise NotFound(str(uri))
        try:
            return path.read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read {uri}: {exc}") from exc

    def delete(self, uri: StorageUri) -> bool:
        path = Path(uri.path)
        try:
            path.unlink()
            return True
        except FileNotFoundError:
            return False
        except OSError as exc:
            raise IoFailure(f"cannot delete {uri}: {exc}") from exc

    def list(self, prefix: StorageUri) -> Iterator[StorageUri]:
        """Depth-first lexicographic walk of files under the prefix."""
        base = Path(prefix.path)
        if base.is_file():
            yield StorageUri("file", base.as_posix())
            return
        if not base.is_dir():
            return
        yield from self._walk(base)

    def _walk(self, directory: Path) -> Iterator[StorageUri]:
        try:
            entries = sorted(directory.iterdir(), key=lambda p: p.name)
        except OSError as exc:
            raise IoFailure(f"cannot list {directory}: {exc}") from exc
        for entry in entries:
            if entry.is_dir():
                yield from self._walk(entry)
            elif entry.is_file():
                yield StorageUri("file", entry.as_posix())


class MemoryStorage:
    """Process-lifetime dict-backed storage for tests and the mem:// scheme."""

    def __init__(self):
        self._objects: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def scheme(self) -> str:
        return "mem"

    def layout_uri(self, obj: DicomObject, suffix: str = ".dcm") -> StorageUri:
        study, series, name = _layout_segments(obj, suffix)
        return StorageUri("mem", f"{study}/{series}/{name}")

    def store(self, obj: DicomObject) -> StorageUri:
        uri = self.layout_uri(obj)
        self.put(uri, serialize_object(obj, EXPLICIT_VR_LE))
        return uri

    def put(self, uri: StorageUri, data: bytes) -> None:
        with self._lock:
            self._objects[uri.path] = data

    def at(self, uri: StorageUri) -> bytes:
        with self._lock:
            data = self._objects.get(uri.path)
        if data is None:
            raise NotFound(str(uri))
        return data

    def delete(self, uri: StorageUri) -> bool:
        with self._lock:
            return self._objects.pop(uri.path, None) is not None

    def list(self, prefix: StorageUri) -> Iterator[StorageUri]:
        base = prefix.path.rstrip("/")
        with self._lock:
            paths = sorted(self._objects)
        for path in paths:
            if path == base or not base or path.startswith(base + "/"):
                yield StorageUri("mem", path)
