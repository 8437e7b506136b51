"""Archive configuration file handling.

Single JSON document:

    {
      "aetitle": "MINIPACS",
      "dimse": {"port": 11112},
      "http":  {"port": 8080, "token": null, "static": null},
      "storage": {"scheme": "file", "root": "archive"},
      "index": {"path": "index.mpix"},
      "plugins": [{"name": "...", "enabled": true, "settings": {}}],
      "webui": {"dir": "webui"}
    }

A missing file yields these defaults and writes a fresh file. http.static
is an optional directory of frontend assets served at the web root.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, replace

from ..errors import MalformedConfig

DEFAULT_DIMSE_PORT = 11112
DEFAULT_HTTP_PORT = 8080
DEFAULT_AETITLE = "MINIPACS"


@dataclass(frozen=True)
class PluginDirective:
    name: str
    enabled: bool = True
    settings: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ArchiveConfig:
    aetitle: str = DEFAULT_AETITLE
    dimse_port: int = DEFAULT_DIMSE_PORT
    http_port: int = DEFAULT_HTTP_PORT
    http_token: str | None = None
    http_static: str | None = None
    storage_scheme: str = "file"
    storage_root: str = "archive"
    index_path: str = "index.mpix"
    plugins: tuple[PluginDirective, ...] = ()
    webui_dir: str = "webui"
    path: str | None = None  # file this config was loaded from, if any

    def directive_for(self, name: str) -> PluginDirective | None:
        for directive in self.plugins:
            if directive.name == name:
                return directive
        return None

    def with_plugin_enabled(self, name: str, enabled: bool) -> "ArchiveConfig":
        directives = list(self.plugins)
        for i, directive in enumerate(directives):
            if directive.name == name:
                directives[i] = replace(directive, enabled=enabled)
                break
        else:
            directives.append(PluginDirective(name=name, enabled=enabled))
        return replace(self, plugins=tuple(directives))

    def as_json(self) -> dict:
        return {
            "aetitle": self.aetitle,
            "dimse": {"port": self.dimse_port},
            "http": {"port": self.http_port, "token": self.http_token,
                     "static": self.http_static},
            "storage": {"scheme": self.storage_scheme, "root": self.storage_root},
            "index": {"path": self.index_path},
            "plugins": [
                {"name": d.name, "enabled": d.enabled, "settings": dict(d.settings)}
                for d in self.plugins
            ],
            "webui": {"dir": self.webui_dir},
        }


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise MalformedConfig(message)


def config_from_json(doc: dict, path: str | None = None) -> ArchiveConfig:
    _expect(isinstance(doc, dict), "top level must be a JSON object")
    defaults = ArchiveConfig()

    def section(key: str) -> dict:
        value = doc.get(key, {})
        _expect(isinstance(value, dict), f'"{key}" must be an object')
        return value

    dimse = section("dimse")
    http = section("http")
    storage = section("storage")
    index = section("index")
    webui = section("webui")

    plugins_doc = doc.get("plugins", [])
    _expect(isinstance(plugins_doc, list), '"plugins" must be a list')
    directives = []
    seen: set[str] = set()
    for entry in plugins_doc:
        _expect(isinstance(entry, dict) and isinstance(entry.get("name"), str),
                "each plugin entry needs a string name")
        name = entry["name"]
        _expect(name not in seen, f"duplicate plugin name {name!r}")
        seen.add(name)
        settings = entry.get("settings", {})
        _expect(isinstance(settings, dict), f"plugin {name!r} settings must be an object")
        directives.append(PluginDirective(
            name=name,
            enabled=bool(entry.get("enabled", True)),
            settings={str(k): str(v) for k, v in settings.items()},
        ))

    aetitle = doc.get("aetitle", defaults.aetitle)
    _expect(isinstance(aetitle, str) and 0 < len(aetitle) <= 16,
            "aetitle must be a string of at most 16 characters")

    def port(value, fallback: int, label: str) -> int:
        if value is None:
            return fallback
        _expect(isinstance(value, int) and 0 <= value <= 65535, f"{label} must be a port number")
        return value

    return ArchiveConfig(
        aetitle=aetitle,
        dimse_port=port(dimse.get("port"), defaults.dimse_port, "dimse.port"),
        http_port=port(http.get("port"), defaults.http_port, "http.port"),
        http_token=http.get("token"),
        http_static=http.get("static"),
        storage_scheme=str(storage.get("scheme", defaults.storage_scheme)),
        storage_root=str(storage.get("root", defaults.storage_root)),
        index_path=str(index.get("path", defaults.index_path)),
        plugins=tuple(directives),
        webui_dir=str(webui.get("dir", defaults.webui_dir)),
        path=path,
    )


def load_config(path: str | os.PathLike) -> ArchiveConfig:
    """Load the config file; a missing file writes defaults and returns them."""
    path = os.fspath(path)
    if not os.path.exists(path):
        config = replace(ArchiveConfig(), path=path)
        save_config(config)
        return config
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedConfig(
                f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_json(doc, path=path)


def save_config(config: ArchiveConfig) -> None:
    """Persist atomically (temp file + rename) to config.path."""
    if config.path is None:
        raise MalformedConfig("config has no backing file path")
    directory = os.path.dirname(config.path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".config-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(config.as_json(), fh, indent=2)
            fh.write("\n")
        os.replace(tmp, config.path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
