"""Command line entry point.

    minipacs serve --config PATH
    minipacs index PATH [--config PATH]
    minipacs query EXPR [--max N] [--fields a,b] [--config PATH]
    minipacs dump URI [--config PATH]

Machine output (reports, hits, dumps) goes to stdout; logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading

from .core import Archive
from .dicom.codec import parse_object
from .dicom.dictionary import BYTES_VRS, dict_lookup
from .errors import (
    BadUri,
    CorruptIndex,
    DicomError,
    MalformedConfig,
    NoStorage,
    NotFound,
    QuerySyntaxError,
)
from .plugins.config import load_config
from .search.index import SearchOptions
from .storage.uri import StorageUri

log = logging.getLogger("minipacs")

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2
EXIT_BIND = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minipacs",
                                     description="miniature extensible PACS archive")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the DIMSE and HTTP servers")
    serve.add_argument("--config", default="minipacs.json", help="config file path")

    index = sub.add_parser("index", help="index a file or directory tree offline")
    index.add_argument("path", help="file or directory to index")
    index.add_argument("--config", default="minipacs.json")

    query = sub.add_parser("query", help="search the index snapshot")
    query.add_argument("expression", help="query text")
    query.add_argument("--max", type=int, default=None, help="maximum hits")
    query.add_argument("--fields", default=None, help="comma-separated field filter")
    query.add_argument("--config", default="minipacs.json")

    dump = sub.add_parser("dump", help="print all metadata of a stored object")
    dump.add_argument("uri", help="storage URI (file://..., mem://...)")
    dump.add_argument("--config", default="minipacs.json")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _serve(args)
        if args.command == "index":
            return _index(args)
        if args.command == "query":
            return _query(args)
        if args.command == "dump":
            return _dump(args)
    except MalformedConfig as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    except CorruptIndex as exc:
        log.error("index snapshot unusable: %s", exc)
        return EXIT_USAGE
    raise AssertionError("unreachable")


def _load_archive(config_path: str, load_index: bool = True) -> Archive:
    config = load_config(config_path)
    return Archive(config, load_index=load_index)


def _serve(args) -> int:
    from .dimse.server import DimseServer
    from .web.server import HttpServer

    archive = _load_archive(args.config)
    try:
        dimse = DimseServer(archive)
    except OSError as exc:
        log.error("cannot bind DIMSE port %d: %s", archive.config.dimse_port, exc)
        return EXIT_BIND
    try:
        http = HttpServer(archive)
    except OSError as exc:
        log.error("cannot bind HTTP port %d: %s", archive.config.http_port, exc)
        dimse.stop()
        return EXIT_BIND

    stop = threading.Event()

    def on_signal(_signum, _frame):
        stop.set()

    signal.signal(signal.SIGINT, on_signal)
    signal.signal(signal.SIGTERM, on_signal)

    dimse.start()
    http.start()
    log.info("ready: aetitle=%s dimse=%d http=%d",
             archive.config.aetitle, dimse.port, http.port)
    stop.wait()
    log.info("shutting down: draining tasks and flushing the index")
    dimse.stop()
    http.stop()
    archive.shutdown()
    return EXIT_OK


def _index(args) -> int:
    if not os.path.exists(args.path):
        log.error("no such path: %s", args.path)
        return EXIT_USAGE
    archive = _load_archive(args.config)
    uri = StorageUri("file", os.path.abspath(args.path))
    handle = archive.dispatch_index([uri])
    report = handle.wait()
    archive.flush_index()
    print(json.dumps(report.as_json(), indent=2))
    return EXIT_OK if not report.errors else EXIT_FAILURES


def _query(args) -> int:
    archive = _load_archive(args.config)
    fields = tuple(args.fields.split(",")) if args.fields else None
    try:
        from .search.queryparser import parse_query
        ast = parse_query(args.expression)
    except QuerySyntaxError as exc:
        print(f"syntax error: {exc.reason} at position {exc.position}", file=sys.stderr)
        return EXIT_USAGE
    result = archive.search_ast(ast, SearchOptions(max_hits=args.max, fields_filter=fields))
    for hit in result.hits:
        print(f"{hit.uri}\t{hit.score}\t{json.dumps(hit.fields, sort_keys=True)}")
    return EXIT_OK


def _dump(args) -> int:
    archive = _load_archive(args.config, load_index=False)
    try:
        uri = StorageUri.parse(args.uri)
        data = archive.router.at(uri)
    except (BadUri, NoStorage, NotFound) as exc:
        log.error("cannot read %s: %s", args.uri, exc)
        return EXIT_USAGE
    try:
        obj = parse_object(data)
    except DicomError as exc:
        log.error("cannot parse %s: %s", args.uri, exc)
        return EXIT_FAILURES
    for ds in (obj.meta, obj.dataset):
        for el in ds:
            print(_format_element(el))
    return EXIT_OK


def _format_element(el) -> str:
    entry = dict_lookup(el.tag)
    keyword = entry.keyword if entry is not None else "-"
    if el.vr == "SQ":
        rendered = f"<sequence of {len(el.value)} items>"
    elif el.vr in BYTES_VRS:
        rendered = f"<{len(el.value)} bytes>"
    else:
        rendered = "\\".join(str(v) for v in el.value)
    return f"{el.tag} {el.vr} {keyword}: {rendered}"


if __name__ == "__main__":
    sys.exit(main())
