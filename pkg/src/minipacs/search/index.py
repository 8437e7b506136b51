"""Persistent inverted index over extracted metadata fields.

Two posting namespaces are kept per the matching semantics:

* exact: (field, full lowercased value) -> doc ids, used by fielded terms
* tokens: free-text token -> doc ids across all fields, used by bare terms

Searches are evaluated as set algebra over these postings; wildcards
expand over the relevant vocabulary. Scoring is the number of distinct
satisfied positive terms, ties broken by ascending URI.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass, field

from ..errors import CorruptIndex
from ..storage.uri import StorageUri
from .document import IndexDocument, tokenize
from .queryparser import And, MatchAll, Not, Or, Term

SNAPSHOT_MAGIC = b"MPIX"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class Hit:
    uri: StorageUri
    score: int
    fields: dict[str, list[str]]


@dataclass(frozen=True)
class ResultSet:
    hits: list[Hit]
    total: int
    elapsed_ms: float


@dataclass(frozen=True)
class SearchOptions:
    max_hits: int | None = None
    fields_filter: tuple[str, ...] | None = None


def _wildcard_regex(pattern: str) -> re.Pattern:
    parts = []
    for ch in pattern:
        if ch == "*":
            parts.append(".*")
        elif ch == "?":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts) + r"\Z")


class MetadataIndex:
    """Thread-safe inverted index; single writer, consistent readers."""

    def __init__(self):
        self._lock = threading.RLock()
        self._docs: dict[int, IndexDocument] = {}
        self._uri_index: dict[str, int] = {}
        self._exact: dict[str, dict[str, set[int]]] = {}
        self._tokens: dict[str, set[int]] = {}
        self._next_id = 0

    # --- mutation ---------------------------------------------------------

    def index_document(self, doc: IndexDocument) -> None:
        """Insert or atomically replace the document for doc.uri."""
        with self._lock:
            old_id = self._uri_index.get(str(doc.uri))
            if old_id is not None:
                self._remove(old_id)
            doc_id = self._next_id
            self._next_id += 1
            self._docs[doc_id] = doc
            self._uri_index[str(doc.uri)] = doc_id
            for fname, values in doc.fields.items():
                by_value = self._exact.setdefault(fname, {})
                for value in values:
                    by_value.setdefault(value.lower(), set()).add(doc_id)
                    for token in tokenize(value):
                        self._tokens.setdefault(token, set()).add(doc_id)

    def unindex(self, uri: StorageUri) -> bool:
        """Remove the document at uri; False when it was never indexed."""
        with self._lock:
            doc_id = self._uri_index.get(str(uri))
            if doc_id is None:
                return False
            self._remove(doc_id)
            return True

    def _remove(self, doc_id: int) -> None:
        doc = self._docs.pop(doc_id)
        del self._uri_index[str(doc.uri)]
        for fname, values in doc.fields.items():
            by_value = self._exact.get(fname)
            if by_value is None:
                continue
            for value in values:
                key = value.lower()
                postings = by_value.get(key)
                if postings is not None:
                    postings.discard(doc_id)
                    if not postings:
                        del by_value[key]
                for token in tokenize(value):
                    postings = self._tokens.get(token)
                    if postings is not None:
                        postings.discard(doc_id)
                        if not postings:
                            del self._tokens[token]
            if not by_value:
                del self._exact[fname]

    def clear(self) -> None:
        with self._lock:
            self._docs.clear()
            self._uri_index.clear()
            self._exact.clear()
            self._tokens.clear()

    # --- queries ----------------------------------------------------------

    def __len__(self) -> int:
        with self._lock:
            return len(self._docs)

    def documents(self) -> list[IndexDocument]:
        with self._lock:
            return [self._docs[i] for i in sorted(self._docs)]

    def document_for(self, uri: StorageUri) -> IndexDocument | None:
        with self._lock:
            doc_id = self._uri_index.get(str(uri))
            return self._docs[doc_id] if doc_id is not None else None

    def search(self, ast, options: SearchOptions = SearchOptions()) -> ResultSet:
        started = time.perf_counter()
        with self._lock:
            matched = self._evaluate(ast)
            terms = _positive_terms(ast)
            term_postings = [self._term_postings(t) for t in terms]
            scored = []
            for doc_id in matched:
                doc = self._docs[doc_id]
                score = sum(1 for p in term_postings if doc_id in p)
                scored.append((-score, str(doc.uri), doc_id, score))
            scored.sort()
            total = len(scored)
            if options.max_hits is not None:
                scored = scored[:options.max_hits]
            hits = []
            for _neg, uri_text, doc_id, score in scored:
                doc = self._docs[doc_id]
                if options.fields_filter is not None:
                    wanted = set(options.fields_filter)
                    fields = {k: list(v) for k, v in doc.fields.items() if k in wanted}
                else:
                    fields = {k: list(v) for k, v in doc.fields.items()}
                hits.append(Hit(doc.uri, score, fields))
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return ResultSet(hits=hits, total=total, elapsed_ms=elapsed_ms)

    def _all_ids(self) -> set[int]:
        return set(self._docs)

    def _evaluate(self, ast) -> set[int]:
        if isinstance(ast, MatchAll):
            return self._all_ids()
        if isinstance(ast, Term):
            return set(self._term_postings(ast))
        if isinstance(ast, And):
            result = self._evaluate(ast.children[0])
            for child in ast.children[1:]:
                if not result:
                    break
                result &= self._evaluate(child)
            return result
        if isinstance(ast, Or):
            result: set[int] = set()
            for child in ast.children:
                result |= self._evaluate(child)
            return result
        if isinstance(ast, Not):
            return self._all_ids() - self._evaluate(ast.child)
        raise TypeError(f"unknown query node {ast!r}")

    def _term_postings(self, term: Term) -> set[int]:
        if term.field is not None:
            by_value = self._exact.get(term.field, {})
            if not term.has_wildcard:
                return set(by_value.get(term.pattern.lower(), ()))
            rx = _wildcard_regex(term.pattern.lower())
            out: set[int] = set()
            for value, postings in by_value.items():
                if rx.match(value):
                    out |= postings
            return out
        if not term.has_wildcard:
            return set(self._tokens.get(term.pattern.lower(), ()))
        rx = _wildcard_regex(term.pattern.lower())
        out = set()
        for token, postings in self._tokens.items():
            if rx.match(token):
                out |= postings
        return out

    # --- persistence ------------------------------------------------------

    def flush(self, path: str | os.PathLike) -> None:
        """Write an atomic snapshot (temp file + rename)."""
        with self._lock:
            docs = [
                {
                    "uri": str(d.uri),
                    "fields": d.fields,
                    "study_uid": d.study_uid,
                    "series_uid": d.series_uid,
                    "sop_uid": d.sop_uid,
                    "patient_id": d.patient_id,
                }
                for d in self.documents()
            ]
        payload = json.dumps({"docs": docs}, sort_keys=True).encode("utf-8")
        digest = hashlib.sha256(payload).digest()
        blob = SNAPSHOT_MAGIC + bytes([SNAPSHOT_VERSION]) + digest + payload
        path = os.fspath(path)
        directory = os.path.dirname(path) or "."
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mpix-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def load(self, path: str | os.PathLike) -> None:
        """Replace contents from a snapshot; absent file means empty index."""
        path = os.fspath(path)
        if not os.path.exists(path):
            self.clear()
            return
        with open(path, "rb") as fh:
            blob = fh.read()
        if len(blob) < 4 + 1 + 32 or blob[:4] != SNAPSHOT_MAGIC:
            raise CorruptIndex(f"{path}: bad magic or truncated header")
        version = blob[4]
        if version != SNAPSHOT_VERSION:
            raise CorruptIndex(f"{path}: unsupported snapshot version {version}")
        digest, payload = blob[5:37], blob[37:]
        if hashlib.sha256(payload).digest() != digest:
            raise CorruptIndex(f"{path}: checksum mismatch")
        try:
            decoded = json.loads(payload.decode("utf-8"))
            docs = [
                IndexDocument(
                    uri=StorageUri.parse(d["uri"]),
                    fields={k: list(v) for k, v in d["fields"].items()},
                    study_uid=d["study_uid"],
                    series_uid=d["series_uid"],
                    sop_uid=d["sop_uid"],
                    patient_id=d.get("patient_id"),
                )
                for d in decoded["docs"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptIndex(f"{path}: undecodable payload: {exc}") from exc
        with self._lock:
            self.clear()
            for doc in docs:
                self.index_document(doc)

    # --- integrity (used by property tests) --------------------------------

    def check_no_dangling(self) -> None:
        """Assert every posting points at a live document."""
        with self._lock:
            live = set(self._docs)
            for fname, by_value in self._exact.items():
                for value, postings in by_value.items():
                    assert postings, f"empty posting ({fname}, {value})"
                    assert postings <= live, f"dangling posting ({fname}, {value})"
            for token, postings in self._tokens.items():
                assert postings, f"empty posting (token {token})"
                assert postings <= live, f"dangling posting (token {token})"
            assert {str(d.uri) for d in self._docs.values()} == set(self._uri_index)


def _positive_terms(ast, negated: bool = False) -> list[Term]:
    """Distinct Term nodes not under a NOT, in first-seen order."""
    out: list[Term] = []
    seen: set[tuple] = set()

    def walk(node, neg: bool) -> None:
        if isinstance(node, Term):
            key = (node.field, node.pattern)
            if not neg and key not in seen:
                seen.add(key)
                out.append(node)
        elif isinstance(node, (And, Or)):
            for child in node.children:
                walk(child, neg)
        elif isinstance(node, Not):
            walk(node.child, not neg)

    walk(ast, negated)
    return out
