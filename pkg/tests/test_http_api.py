"""HTTP endpoint tests: search, management, web UI protocol, DICOMweb."""

import dataclasses
import json

import httpx
import pytest

from minipacs.core import Archive
from minipacs.dicom import (
    DataElement,
    DataSet,
    EXPLICIT_VR_LE,
    Tag,
    parse_object,
    serialize_object,
)
from minipacs.plugins.config import ArchiveConfig
from minipacs.web.dicomjson import to_dicom_json
from minipacs.web.server import HttpServer

from support import build_instance

import oracle


def make_config(tmp_path, **overrides) -> ArchiveConfig:
    base = dict(
        storage_root=str(tmp_path / "archive"),
        index_path=str(tmp_path / "index.mpix"),
        webui_dir=str(tmp_path / "webui"),
        path=str(tmp_path / "config.json"),
    )
    base.update(overrides)
    return dataclasses.replace(ArchiveConfig(), **base)


@pytest.fixture
def stack(tmp_path):
    archive = Archive(make_config(tmp_path))
    server = HttpServer(archive, host="127.0.0.1", port=0)
    server.start()
    client = httpx.Client(base_url=f"http://127.0.0.1:{server.port}", timeout=10)
    yield archive, client, tmp_path
    client.close()
    server.stop()


def seed(archive, instances) -> list:
    uris = []
    for obj in instances:
        uri = archive.store_object(obj)
        archive.dispatch_index([uri])
        uris.append(uri)
    assert archive.engine.drain(10)
    return uris


FIXTURES = [
    build_instance(patient_name="Doe^John", patient_id="P1", study_uid="s1",
                   series_uid="s1.1", sop_uid="s1.1.1", modality="CT",
                   study_date="20240101", accession="A1"),
    build_instance(patient_name="Doe^Jane", patient_id="P2", study_uid="s2",
                   series_uid="s2.1", sop_uid="s2.1.1", modality="MR",
                   study_date="20240202", accession="A2"),
    build_instance(patient_name="Silva^Rui", patient_id="P3", study_uid="s3",
                   series_uid="s3.1", sop_uid="s3.1.1", modality="CT",
                   study_date="20240303", accession="A3"),
]


class TestSearch:
    def test_results_match_linear_scan(self, stack):
        archive, client, _ = stack
        seed(archive, FIXTURES)
        rsp = client.get("/search", params={"query": "Modality:CT"})
        assert rsp.status_code == 200
        body = rsp.json()
        corpus = {str(d.uri): d.fields for d in archive.index.documents()}
        from minipacs.search.queryparser import parse_query
        want = oracle.search_oracle(corpus, parse_query("Modality:CT"))
        assert {r["uri"] for r in body["results"]} == want
        assert body["num_results"] == len(want)
        assert "elapsed" in body

    def test_empty_query_is_400(self, stack):
        _archive, client, _ = stack
        assert client.get("/search", params={"query": ""}).status_code == 400

    def test_syntax_error_carries_position(self, stack):
        _archive, client, _ = stack
        rsp = client.get("/search", params={"query": "Modality:(CT"})
        assert rsp.status_code == 400
        assert rsp.json()["position"] == 9

    def test_unknown_provider_is_404(self, stack):
        _archive, client, _ = stack
        rsp = client.get("/search", params={"query": "x", "provider": "nope"})
        assert rsp.status_code == 404


class TestManagement:
    def test_index_then_poll_task(self, stack, tmp_path):
        archive, client, _ = stack
        fixture = tmp_path / "fixture"
        fixture.mkdir()
        (fixture / "one.dcm").write_bytes(
            serialize_object(build_instance(sop_uid="x1"), EXPLICIT_VR_LE))
        rsp = client.post("/management/index", params={"uri": f"file://{fixture}"})
        assert rsp.status_code == 202
        task_id = rsp.json()["task_id"]
        assert archive.engine.drain(10)
        tasks = client.get("/management/tasks").json()["tasks"]
        mine = [t for t in tasks if t["id"] == task_id]
        assert mine and mine[0]["state"] == "done"
        assert mine[0]["report"]["files_indexed"] == 1

    def test_unindex_round_trip(self, stack):
        archive, client, _ = stack
        uris = seed(archive, FIXTURES[:1])
        rsp = client.post("/management/unindex", params={"uri": str(uris[0])})
        assert rsp.status_code == 200
        assert rsp.json()["files_indexed"] == 1
        assert archive.query("*").total == 0

    def test_bad_uri_and_unknown_scheme(self, stack):
        _archive, client, _ = stack
        assert client.post("/management/index", params={"uri": "no-scheme"}).status_code == 400
        assert client.post("/management/index", params={"uri": "bogus://x"}).status_code == 404

    def test_plugin_listing_and_toggle(self, stack):
        archive, client, _ = stack
        plugins = client.get("/management/plugins").json()["plugins"]
        names = {p["name"]: p for p in plugins}
        assert names["meta-index"]["kind"] == "indexer"
        assert names["meta-index"]["enabled"] is True
        rsp = client.post("/management/plugins",
                          json={"name": "meta-index", "enabled": False})
        assert rsp.status_code == 200
        plugins = client.get("/management/plugins").json()["plugins"]
        names = {p["name"]: p for p in plugins}
        assert names["meta-index"]["enabled"] is False
        # persisted to the config file
        doc = json.loads(open(archive.config.path).read())
        assert {"name": "meta-index", "enabled": False, "settings": {}} in doc["plugins"]

    def test_unknown_plugin_toggle_404(self, stack):
        _archive, client, _ = stack
        rsp = client.post("/management/plugins", json={"name": "ghost", "enabled": False})
        assert rsp.status_code == 404

    def test_token_guards_management_only(self, tmp_path):
        archive = Archive(make_config(tmp_path, http_token="sesame"))
        server = HttpServer(archive, host="127.0.0.1", port=0)
        server.start()
        client = httpx.Client(base_url=f"http://127.0.0.1:{server.port}", timeout=10)
        try:
            rsp = client.post("/management/plugins",
                              json={"name": "meta-index", "enabled": False})
            assert rsp.status_code == 401
            # and no state change happened
            manifests = {m.name: m.enabled for m in archive.registry.manifests()}
            assert manifests["meta-index"] is True
            assert client.get("/management/tasks").status_code == 401
            # search and QIDO stay open
            assert client.get("/search", params={"query": "*"}).status_code == 200
            assert client.get("/dicomweb/studies").status_code == 200
            ok = client.post("/management/plugins",
                             json={"name": "meta-index", "enabled": False},
                             headers={"Authorization": "Bearer sesame"})
            assert ok.status_code == 200
        finally:
            client.close()
            server.stop()


def install_webui_package(webui_dir, name, slot_id, *, caption=None, source=None):
    pkg = webui_dir / name
    pkg.mkdir(parents=True, exist_ok=True)
    module = "module.js"
    (pkg / "package.json").write_text(json.dumps({
        "name": name, "slot-id": slot_id,
        "caption": caption or name, "module-file": module,
    }))
    (pkg / module).write_text(source or f"export function render(m, ctx) {{}} // {name}")
    return pkg / module


class TestWebUi:
    def test_slot_filtering_is_exact(self, stack, tmp_path):
        archive, client, _ = stack
        webui = tmp_path / "webui"
        install_webui_package(webui, "batch-tool", "result-batch")
        install_webui_package(webui, "settings-pane", "settings")
        unfiltered = client.get("/webui").json()["plugins"]
        assert {p["name"] for p in unfiltered} == {"batch-tool", "settings-pane"}
        filtered = client.get("/webui", params={"slot-id": "result-batch"}).json()["plugins"]
        assert [p["name"] for p in filtered] == ["batch-tool"]
        assert all(p["slot-id"] == "result-batch" for p in filtered)
        # union over the four slots equals the unfiltered list
        union = []
        for slot in ("menu", "result-option", "result-batch", "settings"):
            union.extend(client.get("/webui", params={"slot-id": slot}).json()["plugins"])
        assert sorted(p["name"] for p in union) == sorted(p["name"] for p in unfiltered)

    def test_module_served_byte_identical(self, stack, tmp_path):
        _archive, client, _ = stack
        module_path = install_webui_package(tmp_path / "webui", "batch-tool", "result-batch")
        rsp = client.get("/webui/batch-tool/module.js")
        assert rsp.status_code == 200
        assert rsp.content == module_path.read_bytes()
        assert rsp.headers["content-type"].startswith("application/javascript")

    def test_path_traversal_rejected(self, stack):
        # httpx normalizes "..", so speak raw HTTP for this one
        import http.client
        _archive, client, _ = stack
        host, port = client.base_url.host, client.base_url.port
        conn = http.client.HTTPConnection(host, port, timeout=10)
        conn.request("GET", "/webui/x/../../etc/passwd")
        assert conn.getresponse().status == 400
        conn.close()

    def test_unknown_plugin_module_404(self, stack):
        _archive, client, _ = stack
        assert client.get("/webui/ghost/module.js").status_code == 404

    def test_runtime_install_needs_no_restart(self, stack, tmp_path):
        _archive, client, _ = stack
        assert client.get("/webui").json()["plugins"] == []
        install_webui_package(tmp_path / "webui", "late-arrival", "menu")
        assert [p["name"] for p in client.get("/webui").json()["plugins"]] == ["late-arrival"]


class TestDicomWeb:
    def test_golden_dicom_json_encoding(self):
        ds = DataSet([
            DataElement(Tag(0x0008, 0x0060), "CS", "CT"),
            DataElement(Tag(0x0010, 0x0010), "PN", "Silva^Rui"),
            DataElement(Tag(0x0008, 0x0050), "SH", ()),
        ])
        doc = to_dicom_json(ds)
        assert doc["00100010"] == {"vr": "PN", "Value": [{"Alphabetic": "Silva^Rui"}]}
        assert doc["00080060"] == {"vr": "CS", "Value": ["CT"]}
        assert doc["00080050"] == {"vr": "SH"}  # empty: no Value key

    def test_qido_default_attribute_set(self, stack):
        archive, client, _ = stack
        seed(archive, FIXTURES)
        rsp = client.get("/dicomweb/studies", params={"PatientName": "Doe^John"})
        assert rsp.status_code == 200
        studies = rsp.json()
        assert len(studies) == 1
        study = studies[0]
        assert study["0020000D"]["Value"] == ["s1"]
        assert study["00100010"]["Value"] == [{"Alphabetic": "Doe^John"}]
        assert study["00100020"]["Value"] == ["P1"]
        assert study["00080020"]["Value"] == ["20240101"]
        assert study["00080061"]["Value"] == ["CT"]
        assert study["00080050"]["Value"] == ["A1"]

    def test_qido_wildcards_and_no_filters(self, stack):
        archive, client, _ = stack
        seed(archive, FIXTURES)
        rsp = client.get("/dicomweb/studies", params={"PatientName": "Do*"})
        assert {s["0020000D"]["Value"][0] for s in rsp.json()} == {"s1", "s2"}
        rsp = client.get("/dicomweb/studies")
        assert len(rsp.json()) == 3
        rsp = client.get("/dicomweb/studies", params={"limit": "2"})
        assert len(rsp.json()) == 2

    def test_qido_unknown_keyword_400(self, stack):
        _archive, client, _ = stack
        assert client.get("/dicomweb/studies", params={"Foo": "1"}).status_code == 400

    def test_qido_empty_match_is_200_empty_list(self, stack):
        archive, client, _ = stack
        seed(archive, FIXTURES)
        rsp = client.get("/dicomweb/studies", params={"PatientName": "Nobody"})
        assert rsp.status_code == 200
        assert rsp.json() == []

    def test_wado_returns_stored_bytes_exactly(self, stack):
        archive, client, _ = stack
        uris = seed(archive, FIXTURES[:1])
        rsp = client.get("/dicomweb/studies/s1/series/s1.1/instances/s1.1.1")
        assert rsp.status_code == 200
        assert rsp.headers["content-type"] == "application/dicom"
        assert rsp.content == archive.router.at(uris[0])
        assert parse_object(rsp.content).sop_instance_uid == "s1.1.1"

    def test_wado_unknown_instance_404(self, stack):
        archive, client, _ = stack
        seed(archive, FIXTURES[:1])
        assert client.get("/dicomweb/studies/s1/series/s1.1/instances/ghost").status_code == 404


class TestWebServicePlugins:
    def test_ext_route_dispatches_to_plugin(self, tmp_path):
        from minipacs.plugins.contracts import PluginSet, WebServicePlugin

        class PingService(WebServicePlugin):
            name = "ping"

            def handle(self, method, path, query, body):
                if method == "GET" and path == "/ping":
                    return 200, "application/json", b'{"pong": true}'
                return None

        class PingSet(PluginSet):
            name = "ping-set"

            def web_services(self):
                return (PingService(),)

        archive = Archive(make_config(tmp_path), extra_sets=[PingSet()])
        server = HttpServer(archive, host="127.0.0.1", port=0)
        server.start()
        client = httpx.Client(base_url=f"http://127.0.0.1:{server.port}", timeout=10)
        try:
            assert client.get("/ext/ping/ping").json() == {"pong": True}
            assert client.get("/ext/ping/other").status_code == 404
            assert client.get("/ext/ghost/x").status_code == 404
            archive.set_plugin_enabled("ping", False)
            assert client.get("/ext/ping/ping").status_code == 404
        finally:
            client.close()
            server.stop()


class TestStatic:
    def test_spa_served_from_root(self, tmp_path):
        static = tmp_path / "dist"
        static.mkdir()
        (static / "index.html").write_text("<html><body>minipacs</body></html>")
        (static / "app.js").write_text("console.log('hi')")
        archive = Archive(make_config(tmp_path, http_static=str(static)))
        server = HttpServer(archive, host="127.0.0.1", port=0)
        server.start()
        client = httpx.Client(base_url=f"http://127.0.0.1:{server.port}", timeout=10)
        try:
            assert "minipacs" in client.get("/").text
            assert client.get("/app.js").status_code == 200
            # unknown client-side routes fall back to the app shell
            assert "minipacs" in client.get("/some/route").text
        finally:
            client.close()
            server.stop()


class TestSearchExtras:
    def test_keyword_param_passes_through(self, stack):
        archive, client, _ = stack
        seed(archive, FIXTURES[:1])
        rsp = client.get("/search", params={"query": "Modality:CT", "keyword": "true"})
        assert rsp.status_code == 200
        assert rsp.json()["num_results"] == 1

    def test_webui_kind_lists_installed_packages(self, stack, tmp_path):
        from minipacs.plugins.contracts import PluginKind
        archive, _client, _ = stack
        install_webui_package(tmp_path / "webui", "pkg-a", "menu")
        listed = archive.registry.plugins_of_kind(PluginKind.WEB_UI)
        assert [d.name for _m, d in listed] == ["pkg-a"]
        assert listed[0][0].kind == PluginKind.WEB_UI
