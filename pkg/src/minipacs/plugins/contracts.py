"""Plugin categories, manifests, and the behavioral contracts.

Plugins come in exactly five kinds. Each kind is reachable only through
its interface; the archive core orchestrates them and never lets plugin
sets see each other. A PluginSet bundles related plugins into one unit
that is registered (and named) as a whole.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, Mapping, Sequence

from ..storage.uri import StorageUri

if TYPE_CHECKING:
    from ..dicom.dataset import DicomObject
    from ..search.index import ResultSet, SearchOptions
    from .tasks import TaskHandle


class PluginKind(enum.Enum):
    INDEXER = "indexer"
    QUERY_PROVIDER = "query"
    STORAGE = "storage"
    WEB_SERVICE = "webservice"
    WEB_UI = "webui"


@dataclass
class PluginManifest:
    """Registry entry for one plugin."""

    name: str
    kind: PluginKind
    enabled: bool
    set_name: str
    settings: dict[str, str] = field(default_factory=dict)

    def as_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "enabled": self.enabled,
            "set": self.set_name,
            "settings": dict(self.settings),
        }


class IndexerPlugin(abc.ABC):
    """Extracts searchable documents from stored objects."""

    name: str

    @abc.abstractmethod
    def handles(self, uri: StorageUri) -> bool:
        """Whether this indexer can process the object at uri.

        When this returns False the dispatcher never calls index() for
        that uri.
        """

    @abc.abstractmethod
    def index(self, uris: Sequence[StorageUri],
              parameters: Mapping[str, str] | None = None) -> "TaskHandle":
        """Start indexing the given items; returns immediately.

        The outcome is a Report retrievable from the returned task.
        Parameters are plugin-specific and pass through uninterpreted.
        """

    @abc.abstractmethod
    def unindex(self, uri: StorageUri) -> bool:
        """Remove the document at uri; True when something was removed."""


class QueryPlugin(abc.ABC):
    """Interprets query text and returns result lists."""

    name: str

    @abc.abstractmethod
    def query(self, text: str, parameters: Mapping[str, str] | None = None) -> "ResultSet":
        """Evaluate query text. Raises QuerySyntaxError on bad input."""

    def search_ast(self, ast, options: "SearchOptions") -> "ResultSet":
        """Evaluate a pre-parsed query; default falls back to text."""
        raise NotImplementedError


class StoragePlugin(abc.ABC):
    """Reads and stores DICOM objects, whatever the technology underneath."""

    name: str

    @abc.abstractmethod
    def scheme(self) -> str: ...

    @abc.abstractmethod
    def store(self, obj: "DicomObject") -> StorageUri: ...

    @abc.abstractmethod
    def at(self, uri: StorageUri) -> bytes: ...

    @abc.abstractmethod
    def delete(self, uri: StorageUri) -> bool: ...

    @abc.abstractmethod
    def list(self, prefix: StorageUri) -> Iterator[StorageUri]: ...


class WebServicePlugin(abc.ABC):
    """Extra HTTP resources mounted under /ext/<plugin-name>/."""

    name: str

    @abc.abstractmethod
    def handle(self, method: str, path: str, query: Mapping[str, str],
               body: bytes) -> tuple[int, str, bytes] | None:
        """Serve a request; (status, content type, body) or None for 404."""


class PluginSet:
    """A named bundle of plugins registered as one unit.

    Subclasses construct their plugins (usually in __init__, with the
    archive services handed to them) and expose them through the kind
    accessors below.
    """

    name: str = "unnamed"

    def indexers(self) -> Sequence[IndexerPlugin]:
        return ()

    def query_providers(self) -> Sequence[QueryPlugin]:
        return ()

    def storages(self) -> Sequence[StoragePlugin]:
        return ()

    def web_services(self) -> Sequence[WebServicePlugin]:
        return ()
