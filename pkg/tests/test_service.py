import json

import pytest
from fastapi.testclient import TestClient

from multiarm_teleop.modalities import Hand
from multiarm_teleop.protocol import button_dict, dumps, hand_pose_dict
from multiarm_teleop.service import create_app

from conftest import small_scenario, wavy_hand_pose

L = Hand.LEFT


@pytest.fixture
def client():
    app = create_app(small_scenario(2), snapshot_rate=200.0, realtime=False)
    with TestClient(app) as c:
        yield c


def recv_type(ws, wanted, limit=200):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg["type"] == wanted:
            return msg
    raise AssertionError(f"no {wanted!r} message within {limit} frames")


class TestWebSocket:
    def test_hello_describes_arms(self, client):
        with client.websocket_connect("/ws") as ws:
            hello = json.loads(ws.receive_text())
            assert hello["type"] == "hello" and hello["v"] == 1
            assert [a["id"] for a in hello["arms"]] == [1, 2]
            arm = hello["arms"][0]
            assert len(arm["dh"]) == 7 and len(arm["q0"]) == 7
            assert "base" in arm and "flange" in arm

    def test_snapshots_stream_while_idle(self, client):
        with client.websocket_connect("/ws") as ws:
            recv_type(ws, "hello", limit=1)
            s1 = recv_type(ws, "snapshot")
            s2 = recv_type(ws, "snapshot")
            assert s2["tick"] > s1["tick"]
            assert {r["id"] for r in s1["robots"]} == {1, 2}
            assert "session" in s1 and "objects" in s1

    def test_button_ack_carries_panels(self, client):
        with client.websocket_connect("/ws") as ws:
            recv_type(ws, "hello", limit=1)
            ws.send_text(dumps(hand_pose_dict(1, 0.0, L, wavy_hand_pose(0.0), 0.5)))
            for seq, (btn, edge) in enumerate([
                    ("s", "press"), ("rb1", "press"), ("rb1", "release"),
                    ("s", "release")], start=2):
                ws.send_text(dumps(button_dict(seq, 0.0, L, btn, edge)))
                recv_type(ws, "ack")
            ack = None
            # last ack reflects the committed selection
            ws.send_text(dumps(button_dict(10, 0.0, L, "f", "press")))
            ack = recv_type(ws, "ack")
            ws.send_text(dumps(button_dict(11, 0.0, L, "f", "release")))
            recv_type(ws, "ack")
            panels = ack["session"]
            assert [e["robot"] for e in panels["left"]] == [1]
            assert panels["left"][0]["frozen"] is True

    def test_malformed_message_gets_error_frame(self, client):
        with client.websocket_connect("/ws") as ws:
            recv_type(ws, "hello", limit=1)
            ws.send_text("this is not json")
            err = recv_type(ws, "error")
            assert "JSON" in err["message"]
            # connection survives and keeps serving snapshots
            assert recv_type(ws, "snapshot")["tick"] >= 0

    def test_two_clients_see_identical_snapshots(self, client):
        with client.websocket_connect("/ws") as a, \
                client.websocket_connect("/ws") as b:
            recv_type(a, "hello", limit=1)
            recv_type(b, "hello", limit=1)
            snaps_a = {}
            snaps_b = {}
            for _ in range(5):
                s = recv_type(a, "snapshot")
                snaps_a[s["tick"]] = s["robots"]
            for _ in range(20):
                s = recv_type(b, "snapshot")
                snaps_b[s["tick"]] = s["robots"]
            shared = set(snaps_a) & set(snaps_b)
            assert shared
            for t in shared:
                assert snaps_a[t] == snaps_b[t]


class TestHealthAndRecording:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200 and r.json()["ok"] is True

    def test_record_file_written(self, tmp_path):
        rec_path = tmp_path / "session.jsonl"
        app = create_app(small_scenario(1), snapshot_rate=200.0,
                         realtime=False, record_path=str(rec_path))
        with TestClient(app) as c:
            with c.websocket_connect("/ws") as ws:
                recv_type(ws, "hello", limit=1)
                ws.send_text(dumps(hand_pose_dict(1, 99.0, L,
                                                  wavy_hand_pose(0.0), 0.5)))
                ws.send_text(dumps(button_dict(2, 99.0, L, "s", "press")))
                recv_type(ws, "ack")
        lines = [json.loads(l) for l in rec_path.read_text().splitlines()]
        assert len(lines) == 2
        assert lines[0]["type"] == "hand_pose" and lines[1]["type"] == "button"
        # timestamps are rewritten to engine time, not the client's clock
        assert all(l["t"] < 99.0 for l in lines)
