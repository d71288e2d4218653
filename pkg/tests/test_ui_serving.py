"""The service mounts the built web UI under /ui when the bundle exists.

Skipped when frontend/dist has not been built so the core suite stays
independent of the frontend toolchain.
"""

from __future__ import annotations

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from riskgraph.embedding import HashEmbedder
from riskgraph.service import create_app
from riskgraph.store import SchemaStore

UI_DIST = Path(__file__).parent.parent / "frontend" / "dist"

pytestmark = pytest.mark.skipif(not UI_DIST.is_dir(), reason="web UI not built (run npm run build in frontend/)")


@pytest.fixture()
def client(tmp_path):
    store = SchemaStore(tmp_path / "data")
    app = create_app(store, provider=HashEmbedder(dimension=16), ui_dir=UI_DIST)
    return TestClient(app)


def test_ui_index_served(client):
    response = client.get("/ui/")
    assert response.status_code == 200
    assert "riskgraph" in response.text
    assert 'src="assets/main.js"' in response.text


def test_ui_assets_served(client):
    for asset in ("assets/main.js", "assets/tree.js", "styles.css"):
        response = client.get(f"/ui/{asset}")
        assert response.status_code == 200, asset
    js = client.get("/ui/assets/main.js").text
    assert "ApiClient" in js


def test_api_still_reachable_alongside_ui(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_no_ui_mount_without_directory(tmp_path):
    store = SchemaStore(tmp_path / "data")
    app = create_app(store, ui_dir=tmp_path / "missing")
    plain = TestClient(app)
    assert plain.get("/ui/").status_code == 404
