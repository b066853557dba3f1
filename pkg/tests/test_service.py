"""HTTP session protocol: payload shapes, caching, determinism."""
import json

import pytest
from fastapi.testclient import TestClient

from lassolab.models import toggle_source
from lassolab.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


def make_session(client, prop="G !p", bound=4, **extra):
    payload = {"model": toggle_source(), "property": prop, "bound": bound, **extra}
    res = client.post("/sessions", json=payload)
    assert res.status_code == 200, res.text
    return res.json()


class TestCreate:
    def test_counterexample_trace_shape(self, client):
        body = make_session(client)
        assert body["revision"] == 0
        trace = body["trace"]
        assert trace["loopStart"] == 1
        assert trace["focus"] == 0
        assert len(trace["states"]) == 2
        assert trace["states"][0]["props"] == {"p": False}
        assert trace["states"][1]["props"] == {"p": True}
        assert trace["events"][0] == {"name": "Set", "args": ["a"], "type": "Set"}
        assert trace["events"][1] == {"name": "Stay", "args": [], "type": "Stay"}

    def test_property_holds(self, client):
        body = make_session(client, prop="F p", bound=6)
        assert body == {"propertyHolds": {"bound": 6}}

    def test_malformed_model(self, client):
        res = client.post(
            "/sessions", json={"model": "model broken\nvar v bool", "property": "true"}
        )
        assert res.status_code == 422
        body = res.json()
        assert body["code"] == "model_error"
        assert "location" in body

    def test_unknown_atom(self, client):
        res = client.post(
            "/sessions", json={"model": toggle_source(), "property": "G !missing"}
        )
        assert res.status_code == 422
        assert res.json()["code"] == "unknown_atom"


class TestOps:
    def test_forward_keeps_trace(self, client):
        sid = make_session(client)["session"]["id"]
        res = client.post(f"/sessions/{sid}/op", json={"op": "forward"}).json()
        assert res["focus"] == 1
        assert res["revision"] == 1

    def test_alt_event_swaps_binding(self, client):
        sid = make_session(client)["session"]["id"]
        res = client.post(f"/sessions/{sid}/op", json={"op": "alt_event"}).json()
        assert res["trace"]["events"][0] == {"name": "Set", "args": ["b"], "type": "Set"}

    def test_set_type_without_alternative(self, client):
        sid = make_session(client)["session"]["id"]
        res = client.post(f"/sessions/{sid}/op", json={"op": "set_type", "type": "Unset"}).json()
        assert res["noAlternative"] is True
        assert res["revision"] == 0  # unchanged session keeps its revision

    def test_backward_at_zero_is_boundary(self, client):
        sid = make_session(client)["session"]["id"]
        res = client.post(f"/sessions/{sid}/op", json={"op": "backward"})
        assert res.status_code == 409
        assert res.json()["code"] == "boundary"

    def test_unknown_session(self, client):
        res = client.post("/sessions/nope/op", json={"op": "forward"})
        assert res.status_code == 404

    def test_unknown_op(self, client):
        sid = make_session(client)["session"]["id"]
        res = client.post(f"/sessions/{sid}/op", json={"op": "speedup"})
        assert res.status_code == 422


class TestEnabled:
    def test_fresh_session_map(self, client):
        sid = make_session(client)["session"]["id"]
        res = client.get(f"/sessions/{sid}/enabled").json()
        flags = {t: e["enabled"] for t, e in res["types"].items()}
        assert flags == {"Set": True, "Stay": False, "Unset": False}

    def test_after_forward(self, client):
        sid = make_session(client, bound=6)["session"]["id"]
        client.post(f"/sessions/{sid}/op", json={"op": "forward"})
        res = client.get(f"/sessions/{sid}/enabled").json()
        flags = {t: e["enabled"] for t, e in res["types"].items()}
        assert flags == {"Set": False, "Stay": True, "Unset": True}

    def test_cache_serves_repeat_polls(self, client):
        app = create_app()
        local = TestClient(app)
        sid = make_session(local)["session"]["id"]
        first = local.get(f"/sessions/{sid}/enabled").json()
        second = local.get(f"/sessions/{sid}/enabled").json()
        assert first == second
        assert app.state.sessions[sid].enabled_runs == 1

    def test_stream_yields_types_then_done(self, client):
        sid = make_session(client)["session"]["id"]
        with client.stream("GET", f"/sessions/{sid}/enabled/stream") as res:
            events = [json.loads(line[6:]) for line in res.iter_lines() if line.startswith("data: ")]
        assert events[-1]["done"] is True
        names = [e["type"] for e in events[:-1]]
        assert names == ["Set", "Stay", "Unset"]


class TestDeterminism:
    SCRIPT = [
        {"op": "forward"},
        {"op": "set_type", "type": "Unset"},
        {"op": "alt_event"},
        {"op": "backward"},
        {"op": "alt_event"},
    ]

    def run_script(self):
        client = TestClient(create_app())
        body = make_session(client, bound=6)
        sid = body["session"]["id"]
        payloads = [json.dumps(body["trace"], sort_keys=True)]
        for op in self.SCRIPT:
            res = client.post(f"/sessions/{sid}/op", json=op).json()
            if "trace" in res:
                payloads.append(json.dumps(res["trace"], sort_keys=True))
            payloads.append(json.dumps(client.get(f"/sessions/{sid}/trace").json()["trace"], sort_keys=True))
        return payloads

    def test_replay_reproduces_byte_identical_traces(self):
        assert self.run_script() == self.run_script()

    def test_revision_strictly_increases_on_change(self, client):
        sid = make_session(client, bound=6)["session"]["id"]
        r0 = client.get(f"/sessions/{sid}/trace").json()["revision"]
        r1 = client.post(f"/sessions/{sid}/op", json={"op": "alt_event"}).json()["revision"]
        r2 = client.post(f"/sessions/{sid}/op", json={"op": "forward"}).json()["revision"]
        assert r0 < r1 < r2

    def test_no_alternative_keeps_revision(self, client):
        sid = make_session(client, bound=6)["session"]["id"]
        client.post(f"/sessions/{sid}/op", json={"op": "forward"})
        res = client.post(f"/sessions/{sid}/op", json={"op": "alt_event"}).json()
        assert res["noAlternative"] is True
        assert res["revision"] == 1


class TestExpiry:
    def test_sessions_expire(self):
        app = create_app(session_ttl=0.0)
        client = TestClient(app)
        sid = make_session(client)["session"]["id"]
        res = client.get(f"/sessions/{sid}/trace")
        assert res.status_code == 404
