"""Plugin framework: categories, registry, lifecycle, config, tasks."""

from .config import ArchiveConfig, PluginDirective, load_config, save_config
from .contracts import (
    IndexerPlugin,
    PluginKind,
    PluginManifest,
    PluginSet,
    QueryPlugin,
    StoragePlugin,
    WebServicePlugin,
)
from .registry import PluginRegistry, WebUiDescriptor
from .tasks import Report, TaskEngine, TaskHandle, TaskSnapshot, TaskState

__all__ = [
    "ArchiveConfig",
    "IndexerPlugin",
    "PluginDirective",
    "PluginKind",
    "PluginManifest",
    "PluginRegistry",
    "PluginSet",
    "QueryPlugin",
    "Report",
    "StoragePlugin",
    "TaskEngine",
    "TaskHandle",
    "TaskSnapshot",
    "TaskState",
    "WebServicePlugin",
    "WebUiDescriptor",
    "load_config",
    "save_config",
]
