"""Metadata extraction, query language, and the inverted index."""

from .document import IndexDocument, extract_fields, tokenize
from .index import Hit, MetadataIndex, ResultSet, SearchOptions
from .plugin import BuiltinSearchSet, MetaIndexer, MetaQuery
from .queryparser import And, MatchAll, Not, Or, QueryAst, Term, parse_query

__all__ = [
    "And",
    "BuiltinSearchSet",
    "Hit",
    "IndexDocument",
    "MatchAll",
    "MetaIndexer",
    "MetaQuery",
    "MetadataIndex",
    "Not",
    "Or",
    "QueryAst",
    "ResultSet",
    "SearchOptions",
    "Term",
    "extract_fields",
    "parse_query",
    "tokenize",
]
