"""Scheme-based dispatch to the enabled storage backends."""

from __future__ import annotations

from typing import Callable, Iterator, Sequence

from ..errors import NoStorage
from .uri import StorageUri


class StorageRouter:
    """Resolves URIs against whatever storage plugins are currently enabled.

    The provider callable is consulted on every resolve so that plugin
    enable/disable takes effect immediately.
    """

    def __init__(self, provider: Callable[[], Sequence[object]]):
        self._provider = provider

    def resolve(self, uri: StorageUri):
        for backend in self._provider():
            if backend.scheme() == uri.scheme:
                return backend
        raise NoStorage(f"no enabled storage plugin for scheme {uri.scheme!r}")

    def at(self, uri: StorageUri) -> bytes:
        return self.resolve(uri).at(uri)

    def list(self, prefix: StorageUri) -> Iterator[StorageUri]:
        return self.resolve(prefix).list(prefix)

    def delete(self, uri: StorageUri) -> bool:
        return self.resolve(uri).delete(uri)
