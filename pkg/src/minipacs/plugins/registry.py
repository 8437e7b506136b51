"""Plugin-set registry and lifecycle control.

Sets register during startup in lexicographic scan order. The registry
overlays enabled flags from the configuration directives, hands kinds out
in registration order, and is the single place a plugin's lifecycle is
controlled from. WebUI plugins are not code: they are drop-in packages in
the webui directory, scanned at call time so installs need no restart.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from ..errors import DuplicateName, UnknownPlugin
from .config import ArchiveConfig
from .contracts import PluginKind, PluginManifest, PluginSet

WEBUI_SLOT_IDS = ("menu", "result-option", "result-batch", "settings")


@dataclass(frozen=True)
class WebUiDescriptor:
    """Manifest of one installed web UI plugin package."""

    name: str
    slot_id: str
    caption: str
    module_file: str

    def as_json(self) -> dict:
        return {
            "name": self.name,
            "slot-id": self.slot_id,
            "caption": self.caption,
            "module-file": self.module_file,
        }


@dataclass
class _Registered:
    manifest: PluginManifest
    instance: object


class PluginRegistry:
    def __init__(self, config: ArchiveConfig):
        self._config = config
        self._lock = threading.RLock()
        self._sets: dict[str, PluginSet] = {}
        self._plugins: dict[str, _Registered] = {}
        self._order: list[str] = []

    # --- registration -------------------------------------------------------

    def register_sets(self, sets: list[PluginSet]) -> None:
        """Register plugin sets in lexicographic scan order by set name."""
        for plugin_set in sorted(sets, key=lambda s: s.name):
            self.register_set(plugin_set)

    def register_set(self, plugin_set: PluginSet) -> None:
        with self._lock:
            if plugin_set.name in self._sets:
                raise DuplicateName(f"plugin set {plugin_set.name!r} already registered")
            members = (
                [(PluginKind.INDEXER, p) for p in plugin_set.indexers()]
                + [(PluginKind.QUERY_PROVIDER, p) for p in plugin_set.query_providers()]
                + [(PluginKind.STORAGE, p) for p in plugin_set.storages()]
                + [(PluginKind.WEB_SERVICE, p) for p in plugin_set.web_services()]
            )
            for _kind, plugin in members:
                if plugin.name in self._plugins:
                    raise DuplicateName(f"plugin {plugin.name!r} already registered")
            self._sets[plugin_set.name] = plugin_set
            for kind, plugin in members:
                directive = self._config.directive_for(plugin.name)
                manifest = PluginManifest(
                    name=plugin.name,
                    kind=kind,
                    enabled=directive.enabled if directive else True,
                    set_name=plugin_set.name,
                    settings=dict(directive.settings) if directive else {},
                )
                self._plugins[plugin.name] = _Registered(manifest, plugin)
                self._order.append(plugin.name)

    # --- lookup ---------------------------------------------------------------

    def plugins_of_kind(self, kind: PluginKind) -> list[tuple[PluginManifest, object]]:
        """Enabled plugins of one kind, in registration order."""
        if kind == PluginKind.WEB_UI:
            return [(self._webui_manifest(d), d) for d in self.webui_descriptors()]
        with self._lock:
            out = []
            for name in self._order:
                reg = self._plugins[name]
                if reg.manifest.kind == kind and reg.manifest.enabled:
                    out.append((reg.manifest, reg.instance))
            return out

    def manifests(self) -> list[PluginManifest]:
        """All manifests (enabled or not), registration order, then web UI."""
        with self._lock:
            out = [self._plugins[name].manifest for name in self._order]
        out.extend(self._webui_manifest(d) for d in self.webui_descriptors(include_disabled=True))
        return out

    def get(self, name: str) -> tuple[PluginManifest, object]:
        with self._lock:
            reg = self._plugins.get(name)
            if reg is None:
                raise UnknownPlugin(name)
            return reg.manifest, reg.instance

    def is_enabled(self, name: str) -> bool:
        with self._lock:
            reg = self._plugins.get(name)
            if reg is not None:
                return reg.manifest.enabled
        directive = self._config.directive_for(name)
        return directive.enabled if directive else True

    # --- lifecycle --------------------------------------------------------------

    def set_enabled(self, name: str, enabled: bool) -> None:
        """Flip a plugin's enabled flag (registered or installed web UI)."""
        with self._lock:
            reg = self._plugins.get(name)
            if reg is not None:
                reg.manifest.enabled = enabled
                return
        if any(d.name == name for d in self.webui_descriptors(include_disabled=True)):
            return  # overlay for web UI packages lives in the config only
        raise UnknownPlugin(name)

    def update_config(self, config: ArchiveConfig) -> None:
        with self._lock:
            self._config = config

    # --- web UI packages ----------------------------------------------------------

    def _scan_webui(self) -> list[tuple[Path, WebUiDescriptor]]:
        """Installed web UI packages: <dir>/<pkg>/package.json naming a
        slot-id, caption, and module-file that exists next to it."""
        out: list[tuple[Path, WebUiDescriptor]] = []
        base = Path(self._config.webui_dir)
        if not base.is_dir():
            return out
        for entry in sorted(base.iterdir(), key=lambda p: p.name):
            manifest_path = entry / "package.json"
            if not entry.is_dir() or not manifest_path.is_file():
                continue
            try:
                doc = json.loads(manifest_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                continue
            name = doc.get("name") or entry.name
            slot = doc.get("slot-id")
            module_file = doc.get("module-file")
            if slot not in WEBUI_SLOT_IDS or not isinstance(module_file, str):
                continue
            if "/" in module_file or "\\" in module_file:
                continue
            if not (entry / module_file).is_file():
                continue
            out.append((entry, WebUiDescriptor(
                name=name, slot_id=slot,
                caption=str(doc.get("caption", name)), module_file=module_file)))
        return out

    def webui_descriptors(self, slot_id: str | None = None,
                          include_disabled: bool = False) -> list[WebUiDescriptor]:
        """Installed web UI packages, scanned per call so drops-in need no restart."""
        out = []
        for _dir, descriptor in self._scan_webui():
            if not include_disabled and not self.is_enabled(descriptor.name):
                continue
            if slot_id is not None and descriptor.slot_id != slot_id:
                continue
            out.append(descriptor)
        return out

    def webui_asset(self, name: str, module_file: str) -> bytes | None:
        """Module bytes for an installed package, or None."""
        for directory, descriptor in self._scan_webui():
            if descriptor.name == name and descriptor.module_file == module_file:
                try:
                    return (directory / module_file).read_bytes()
                except OSError:
                    return None
        return None

    def _webui_manifest(self, descriptor: WebUiDescriptor) -> PluginManifest:
        return PluginManifest(
            name=descriptor.name,
            kind=PluginKind.WEB_UI,
            enabled=self.is_enabled(descriptor.name),
            set_name="webui-packages",
            settings={"slot-id": descriptor.slot_id},
        )
