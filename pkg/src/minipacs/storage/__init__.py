"""Storage abstraction: URIs, backends, wrappers, and the scheme router."""

from .backends import FileStorage, MemoryStorage
from .router import StorageRouter
from .uri import StorageUri
from .wrappers import COMPRESSED_SUFFIX, AnonymizingStorage, CompressingStorage

__all__ = [
    "AnonymizingStorage",
    "COMPRESSED_SUFFIX",
    "CompressingStorage",
    "FileStorage",
    "MemoryStorage",
    "StorageRouter",
    "StorageUri",
]
