import json
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from iconix.api import create_app
from iconix.backends import Backends
from iconix.errors import (
    CorruptStore,
    InvalidConfig,
    NotFound,
    StageOrderViolation,
)
from iconix.service import Stage, SessionManager


@pytest.fixture
def manager(tmp_path):
    return SessionManager(tmp_path / "sessions", backends=Backends.all_mock())


def drive_to_grid(manager, concept="fast food"):
    session = manager.create_session({})
    manager.advance(session.id, Stage.IDEATED, {"concept": concept})
    manager.advance(session.id, Stage.SCAFFOLDED, {})
    manager.advance(session.id, Stage.EXEMPLARS_READY, {})
    manager.advance(session.id, Stage.SIMPLIFIED, {})
    manager.advance(session.id, Stage.GRID_READY, {})
    return manager.get_session(session.id)


class TestCreateSession:
    def test_defaults(self, manager):
        session = manager.create_session({})
        config = session.config
        assert (config.delta, config.epsilon, config.k, config.columns,
                config.alpha, config.seed) == (5, 0.02, 9, 3, 0.5, 42)
        assert session.stage is Stage.CREATED

    def test_override_merge(self, manager):
        session = manager.create_session({"k": 4})
        assert session.config.k == 4
        assert session.config.columns == 3

    def test_invalid_override(self, manager):
        with pytest.raises(InvalidConfig):
            manager.create_session({"epsilon": -1})
        with pytest.raises(InvalidConfig):
            manager.create_session({"unknown_knob": 3})


class TestStageFlow:
    def test_full_walk(self, manager):
        session = drive_to_grid(manager)
        assert session.stage is Stage.GRID_READY
        table = session.snapshots["ideate"]["candidates"]
        assert table[0]["rank"] == 1
        assert table[0]["label"] == "hamburger"
        manifest = session.snapshots["grid"]["manifest"]
        assert manifest["rows"] == 3 and manifest["columns"] == 3
        assert len(manifest["cells"]) == 9  # outline only after grid stage

    def test_grid_from_created_is_order_violation(self, manager):
        session = manager.create_session({})
        with pytest.raises(StageOrderViolation):
            manager.advance(session.id, Stage.GRID_READY, {})

    def test_rollback_redo_invalidates_downstream(self, manager):
        session = drive_to_grid(manager)
        assert "grid" in session.snapshots
        manager.advance(session.id, Stage.SIMPLIFIED, {})
        reloaded = manager.get_session(session.id)
        assert reloaded.stage is Stage.SIMPLIFIED
        assert "grid" not in reloaded.snapshots
        assert "simplify" in reloaded.snapshots

    def test_restyle_adds_variants(self, manager):
        session = drive_to_grid(manager)
        manager.restyle(session.id, ["filled", "color"])
        manifest = manager.get_session(session.id).snapshots["grid"]["manifest"]
        assert set(manifest["variants"]) == {"outline", "filled", "color"}
        assert len(manifest["cells"]) == 27

    def test_restyle_requires_grid(self, manager):
        session = manager.create_session({})
        with pytest.raises(StageOrderViolation):
            manager.restyle(session.id, ["outline"])

    def test_ideate_requires_concept(self, manager):
        session = manager.create_session({})
        with pytest.raises(InvalidConfig):
            manager.advance(session.id, Stage.IDEATED, {})


class TestPersistence:
    def test_round_trip_is_state_identical(self, manager):
        session = drive_to_grid(manager)
        loaded = manager.load(session.id)
        original = json.dumps(session.to_json(), sort_keys=True)
        restored = json.dumps(loaded.to_json(), sort_keys=True)
        assert original == restored

    def test_fresh_manager_reads_same_state(self, manager, tmp_path):
        session = drive_to_grid(manager)
        other = SessionManager(manager.root, backends=Backends.all_mock())
        loaded = other.get_session(session.id)
        assert json.dumps(loaded.to_json(), sort_keys=True) == \
            json.dumps(session.to_json(), sort_keys=True)

    def test_unknown_id_not_found(self, manager):
        with pytest.raises(NotFound):
            manager.load("deadbeef")

    def test_tampered_artifact_is_corrupt(self, manager):
        session = drive_to_grid(manager)
        ref = next(iter(session.snapshots["grid"]["sheets"].values()))
        target = manager.store_for(session.id).path(ref)
        blob = bytearray(target.read_bytes())
        blob[-1] ^= 0xFF
        target.write_bytes(bytes(blob))
        with pytest.raises(CorruptStore):
            manager.load(session.id)

    def test_artifact_store_deduplicates(self, manager):
        session = manager.create_session({})
        store = manager.store_for(session.id)
        ref_a = store.put_bytes(b"same bytes")
        ref_b = store.put_bytes(b"same bytes")
        assert ref_a == ref_b
        assert store.refs().count(ref_a) == 1


class TestConcurrency:
    def test_sixteen_concurrent_advances_never_interleave(self, manager):
        session = manager.create_session({})
        results = []

        def call(index):
            try:
                if index % 2 == 0:
                    out = manager.advance(session.id, Stage.IDEATED,
                                          {"concept": "hope"})
                    results.append(("ok", out.stage.value))
                else:
                    out = manager.advance(session.id, Stage.GRID_READY, {})
                    results.append(("unexpected-grid", out.stage.value))
            except StageOrderViolation:
                results.append(("order", None))

        with ThreadPoolExecutor(max_workers=16) as pool:
            list(pool.map(call, range(16)))

        assert len(results) == 16
        assert all(kind in ("ok", "order") for kind, _ in results)
        assert sum(1 for kind, _ in results if kind == "ok") == 8
        final = manager.get_session(session.id)
        assert final.stage is Stage.IDEATED
        assert set(final.snapshots) == {"ideate"}
        # persisted state equals in-memory state: no torn writes
        assert json.dumps(manager.load(session.id).to_json(), sort_keys=True) \
            == json.dumps(final.to_json(), sort_keys=True)


class TestHttpApi:
    @pytest.fixture
    def client(self, manager):
        return TestClient(create_app(manager), raise_server_exceptions=False)

    def test_full_flow_over_http(self, client):
        created = client.post("/v1/sessions", json={"columns": 3}).json()
        sid = created["id"]
        assert created["stage"] == "created"
        out = client.post(f"/v1/sessions/{sid}/ideate",
                          json={"concept": "fast food"})
        assert out.status_code == 200
        assert out.json()["stage"] == "ideated"
        for path in ("scaffold", "exemplars", "simplify", "grid"):
            out = client.post(f"/v1/sessions/{sid}/{path}", json={})
            assert out.status_code == 200, out.text
        state = client.get(f"/v1/sessions/{sid}").json()
        assert state["stage"] == "grid_ready"
        sheet_ref = state["snapshots"]["grid"]["sheets"]["outline"]
        png = client.get(f"/v1/sessions/{sid}/artifacts/{sheet_ref}")
        assert png.status_code == 200
        assert png.headers["content-type"] == "image/png"
        assert png.content[:8] == b"\x89PNG\r\n\x1a\n"
        scatter = client.get(f"/v1/sessions/{sid}/scatter/comparative")
        assert scatter.status_code == 200
        assert {"points", "centroids"} <= set(scatter.json())

    def test_stage_order_violation_is_409(self, client):
        sid = client.post("/v1/sessions", json={}).json()["id"]
        out = client.post(f"/v1/sessions/{sid}/grid", json={})
        assert out.status_code == 409
        body = out.json()["error"]
        assert body["code"] == "stage_order_violation"
        assert body["stage"] == "created"

    def test_unknown_session_is_404(self, client):
        assert client.get("/v1/sessions/nope").status_code == 404

    def test_invalid_config_is_400(self, client):
        out = client.post("/v1/sessions", json={"epsilon": -2})
        assert out.status_code == 400
        assert out.json()["error"]["code"] == "invalid_config"

    def test_restyle_endpoint(self, client, manager):
        session = drive_to_grid(manager)
        out = client.post(f"/v1/sessions/{session.id}/restyle",
                          json={"variants": ["filled"]})
        assert out.status_code == 200
        variants = out.json()["snapshots"]["grid"]["manifest"]["variants"]
        assert "filled" in variants
