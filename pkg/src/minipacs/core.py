"""Archive assembly: configuration, plugin registry, task engine, index,
and the dispatch operations everything else (DIMSE, HTTP, CLI) calls into.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .dicom.dataset import DicomObject
from .errors import NoStorage, UnknownPlugin
from .plugins.config import ArchiveConfig, save_config
from .plugins.contracts import PluginKind, PluginSet
from .plugins.registry import PluginRegistry, WebUiDescriptor
from .plugins.tasks import Report, TaskEngine, TaskHandle, TaskSnapshot, TaskState
from .search.index import MetadataIndex, ResultSet, SearchOptions
from .search.plugin import BuiltinSearchSet
from .search.queryparser import And, MatchAll, Term
from .storage.backends import FileStorage, MemoryStorage
from .storage.router import StorageRouter
from .storage.uri import StorageUri
from .storage.wrappers import AnonymizingStorage, CompressingStorage

log = logging.getLogger("minipacs")


def _matches_any(pattern: str, values: Sequence[str]) -> bool:
    """Case-insensitive * ? wildcard match against any of the values."""
    rx = re.compile("".join(
        ".*" if c == "*" else "." if c == "?" else re.escape(c)
        for c in pattern.lower()) + r"\Z")
    return any(rx.match(v.lower()) for v in values)


@dataclass(frozen=True)
class ArchiveServices:
    """What the archive hands to plugin sets at construction time."""

    config: ArchiveConfig
    engine: TaskEngine
    router: StorageRouter


@dataclass(frozen=True)
class StudySummary:
    study_uid: str
    fields: dict[str, list[str]]
    modalities: tuple[str, ...]


class BuiltinStorageSet(PluginSet):
    """File archive storage (with optional configured transforms) plus the
    in-memory backend behind the mem:// scheme."""

    name = "builtin-storage"

    _TRANSFORMS: dict[str, Callable] = {
        "anonymize": AnonymizingStorage,
        "compress": CompressingStorage,
    }

    def __init__(self, services: ArchiveServices):
        config = services.config
        chain = FileStorage(config.storage_root)
        directive = config.directive_for("file-storage")
        transforms = (directive.settings.get("transforms", "") if directive else "")
        for transform_name in filter(None, (t.strip() for t in transforms.split(","))):
            factory = self._TRANSFORMS.get(transform_name)
            if factory is None:
                log.warning("unknown storage transform %r ignored", transform_name)
                continue
            chain = factory(chain)  # listed order wraps inner-to-outer
        chain.name = "file-storage"
        memory = MemoryStorage()
        memory.name = "mem-storage"
        self._storages = (chain, memory)

    def storages(self):
        return self._storages


SetFactory = Callable[[ArchiveServices], PluginSet]


class Archive:
    """One running archive instance."""

    def __init__(self, config: ArchiveConfig,
                 extra_sets: Sequence[PluginSet | SetFactory] = (),
                 workers: int = 2, load_index: bool = True):
        self.config = config
        self.engine = TaskEngine(workers=workers)
        self.index = MetadataIndex()
        self.registry = PluginRegistry(config)
        self.router = StorageRouter(self._enabled_storages)
        services = ArchiveServices(config=config, engine=self.engine, router=self.router)

        sets: list[PluginSet] = [
            BuiltinSearchSet(self.index, self.router, self.engine),
            BuiltinStorageSet(services),
        ]
        for entry in extra_sets:
            sets.append(entry(services) if callable(entry) else entry)
        self.registry.register_sets(sets)

        if load_index:
            self.index.load(config.index_path)

    # --- storage ------------------------------------------------------------

    def _enabled_storages(self) -> list:
        return [inst for _m, inst in self.registry.plugins_of_kind(PluginKind.STORAGE)]

    def store_object(self, obj: DicomObject) -> StorageUri:
        """Persist through the configured storage chain (C-STORE trigger)."""
        for backend in self._enabled_storages():
            if backend.scheme() == self.config.storage_scheme:
                return backend.store(obj)
        raise NoStorage(f"no enabled storage plugin for scheme {self.config.storage_scheme!r}")

    # --- indexing -------------------------------------------------------------

    def dispatch_index(self, uris: Sequence[StorageUri],
                       parameters: Mapping[str, str] | None = None) -> TaskHandle:
        """Fan the items out to every enabled indexer that handles them.

        Returns immediately; the handle's report aggregates the per-indexer
        outcomes. Directories expand recursively (depth-first, sorted).
        """
        files: list[StorageUri] = []
        for uri in uris:
            files.extend(self.router.list(uri))  # raises NoStorage on bad scheme

        indexers = self.registry.plugins_of_kind(PluginKind.INDEXER)
        children: list[tuple[TaskHandle, list[StorageUri]]] = []
        for _manifest, indexer in indexers:
            accepted = [u for u in files if indexer.handles(u)]
            if accepted:
                children.append((indexer.index(accepted, parameters), accepted))

        def aggregate(set_progress) -> Report:
            started = time.perf_counter()
            reports: list[Report] = []
            for i, (handle, _accepted) in enumerate(children):
                while True:
                    report = handle.wait(timeout=0.05)
                    done = i + (1 if report is not None else handle.snapshot().progress)
                    set_progress(done / max(len(children), 1))
                    if report is not None:
                        reports.append(report)
                        break
            indexed: set[str] = set()
            failures: dict[str, str] = {}
            for report, (handle, accepted) in zip(reports, children):
                if handle.snapshot().state is TaskState.FAILED:
                    # the whole child task died; none of its items made it
                    message = report.errors[0][1] if report.errors else "indexer task failed"
                    for uri in accepted:
                        failures.setdefault(str(uri), message)
                    continue
                failed = {uri: message for uri, message in report.errors}
                for uri in accepted:
                    if str(uri) in failed:
                        failures.setdefault(str(uri), failed[str(uri)])
                    else:
                        indexed.add(str(uri))
            errors = tuple(
                (str(uri), failures.get(str(uri), "no enabled indexer accepted this item"))
                for uri in files if str(uri) not in indexed)
            return Report(
                files_seen=len(files), files_indexed=len(files) - len(errors),
                errors=errors, elapsed_ms=(time.perf_counter() - started) * 1000.0)

        return self.engine.submit(aggregate)

    def dispatch_unindex(self, uri: StorageUri) -> Report:
        """Synchronously remove the document from every enabled indexer."""
        started = time.perf_counter()
        removed = 0
        errors = []
        consulted = 0
        for _manifest, indexer in self.registry.plugins_of_kind(PluginKind.INDEXER):
            consulted += 1
            if indexer.unindex(uri):
                removed += 1
            else:
                errors.append((str(uri), "not indexed"))
        return Report(files_seen=consulted, files_indexed=removed, errors=tuple(errors),
                      elapsed_ms=(time.perf_counter() - started) * 1000.0)

    def task_status(self, task_id: str) -> TaskSnapshot | None:
        return self.engine.status(task_id)

    def tasks(self) -> list[TaskSnapshot]:
        return self.engine.all_tasks()

    # --- querying ---------------------------------------------------------------

    def query_provider(self, name: str | None = None):
        """Enabled provider by name, or the default (first registered)."""
        providers = self.registry.plugins_of_kind(PluginKind.QUERY_PROVIDER)
        if name is None:
            return providers[0][1] if providers else None
        for _manifest, provider in providers:
            if provider.name == name:
                return provider
        raise UnknownPlugin(name)

    def query(self, text: str, provider: str | None = None,
              parameters: Mapping[str, str] | None = None) -> ResultSet:
        plugin = self.query_provider(provider)
        if plugin is None:
            return ResultSet(hits=[], total=0, elapsed_ms=0.0)
        return plugin.query(text, parameters)

    def search_ast(self, ast, options: SearchOptions = SearchOptions()) -> ResultSet:
        plugin = self.query_provider(None)
        if plugin is None:
            return ResultSet(hits=[], total=0, elapsed_ms=0.0)
        return plugin.search_ast(ast, options)

    def find_studies(self, filters: Sequence[tuple[str, str]],
                     limit: int | None = None) -> list[StudySummary]:
        """Studies matching the conjunction of (keyword, pattern) filters.

        Shared by C-FIND (STUDY level) and QIDO-RS so the two protocols
        always agree. ModalitiesInStudy is computed per study rather than
        stored, so its filters apply to the aggregated modality set after
        grouping.
        """
        terms = []
        modality_set_patterns = []
        for field, pattern in filters:
            if field == "ModalitiesInStudy":
                modality_set_patterns.append(pattern)
            else:
                terms.append(Term(field, pattern))
        if not terms:
            ast = MatchAll()
        elif len(terms) == 1:
            ast = terms[0]
        else:
            ast = And(tuple(terms))
        result = self.search_ast(ast)
        summaries: dict[str, StudySummary] = {}
        for hit in result.hits:
            study_uid = (hit.fields.get("StudyInstanceUID") or [""])[0]
            if not study_uid or study_uid in summaries:
                continue
            summaries[study_uid] = StudySummary(
                study_uid=study_uid,
                fields=hit.fields,
                modalities=self._study_modalities(study_uid),
            )
        ordered = [summaries[uid] for uid in sorted(summaries)]
        if modality_set_patterns:
            ordered = [s for s in ordered
                       if all(_matches_any(p, s.modalities) for p in modality_set_patterns)]
        return ordered[:limit] if limit is not None else ordered

    def _study_modalities(self, study_uid: str) -> tuple[str, ...]:
        result = self.search_ast(Term("StudyInstanceUID", study_uid))
        modalities = {m for hit in result.hits for m in hit.fields.get("Modality", [])}
        return tuple(sorted(modalities))

    def instance_uri(self, study_uid: str, series_uid: str, sop_uid: str) -> StorageUri | None:
        """Storage location of one instance, resolved through the index."""
        ast = And((
            Term("StudyInstanceUID", study_uid),
            Term("SeriesInstanceUID", series_uid),
            Term("SOPInstanceUID", sop_uid),
        ))
        result = self.search_ast(ast, SearchOptions(max_hits=1))
        return result.hits[0].uri if result.hits else None

    # --- plugin lifecycle ----------------------------------------------------------

    def set_plugin_enabled(self, name: str, enabled: bool) -> None:
        """Flip and persist a plugin's enabled flag."""
        self.registry.set_enabled(name, enabled)  # raises UnknownPlugin
        self.config = self.config.with_plugin_enabled(name, enabled)
        self.registry.update_config(self.config)
        if self.config.path:
            save_config(self.config)

    def web_service(self, name: str):
        for _manifest, plugin in self.registry.plugins_of_kind(PluginKind.WEB_SERVICE):
            if plugin.name == name:
                return plugin
        return None

    def webui_descriptors(self, slot_id: str | None = None) -> list[WebUiDescriptor]:
        return self.registry.webui_descriptors(slot_id)

    # --- shutdown ----------------------------------------------------------------

    def flush_index(self) -> None:
        self.index.flush(self.config.index_path)

    def shutdown(self, drain_timeout: float | None = 30.0) -> None:
        """Drain running tasks, then persist the index snapshot."""
        self.engine.drain(drain_timeout)
        self.flush_index()
