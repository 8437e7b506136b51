"""The built-in metadata indexer and query provider pair."""

from __future__ import annotations

import time
from typing import Mapping, Sequence

from ..dicom.codec import looks_like_dicom, parse_object
from ..plugins.contracts import IndexerPlugin, PluginSet, QueryPlugin
from ..plugins.tasks import Report, TaskEngine, TaskHandle
from ..storage.router import StorageRouter
from ..storage.uri import StorageUri
from .document import extract_fields
from .index import MetadataIndex, ResultSet, SearchOptions
from .queryparser import parse_query


class MetaIndexer(IndexerPlugin):
    """Indexes every primitive attribute of stored DICOM objects."""

    name = "meta-index"

    def __init__(self, index: MetadataIndex, router: StorageRouter, engine: TaskEngine):
        self._index = index
        self._router = router
        self._engine = engine

    def handles(self, uri: StorageUri) -> bool:
        """.dcm (case-insensitive) by extension; extensionless URIs are
        sniffed for a Part-10 preamble."""
        ext = uri.extension
        if ext:
            return ext == ".dcm"
        try:
            head = self._router.at(uri)[:132]
        except Exception:
            return False
        return looks_like_dicom(head)

    def index(self, uris: Sequence[StorageUri],
              parameters: Mapping[str, str] | None = None) -> TaskHandle:
        items = list(uris)

        def work(set_progress) -> Report:
            started = time.perf_counter()
            indexed = 0
            errors = []
            for i, uri in enumerate(items):
                try:
                    data = self._router.at(uri)
                    obj = parse_object(data)
                    self._index.index_document(extract_fields(obj, uri))
                    indexed += 1
                except Exception as exc:  # one bad file never aborts the task
                    errors.append((str(uri), f"{type(exc).__name__}: {exc}"))
                set_progress((i + 1) / len(items))
            return Report(
                files_seen=len(items), files_indexed=indexed, errors=tuple(errors),
                elapsed_ms=(time.perf_counter() - started) * 1000.0)

        return self._engine.submit(work)

    def unindex(self, uri: StorageUri) -> bool:
        return self._index.unindex(uri)


class MetaQuery(QueryPlugin):
    """Evaluates the boolean query language against the metadata index."""

    name = "meta-query"

    def __init__(self, index: MetadataIndex):
        self._index = index

    def query(self, text: str, parameters: Mapping[str, str] | None = None) -> ResultSet:
        params = dict(parameters or {})
        options = SearchOptions(
            max_hits=int(params["max_hits"]) if "max_hits" in params else None,
            fields_filter=tuple(params["fields_filter"].split(","))
            if params.get("fields_filter") else None,
        )
        return self.search_ast(parse_query(text), options)

    def search_ast(self, ast, options: SearchOptions) -> ResultSet:
        return self._index.search(ast, options)


class BuiltinSearchSet(PluginSet):
    """Plugin set bundling the built-in indexer and query provider."""

    name = "builtin-search"

    def __init__(self, index: MetadataIndex, router: StorageRouter, engine: TaskEngine):
        self._indexer = MetaIndexer(index, router, engine)
        self._query = MetaQuery(index)

    def indexers(self):
        return (self._indexer,)

    def query_providers(self):
        return (self._query,)
