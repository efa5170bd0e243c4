from __future__ import annotations

import json
import threading

import pytest
from fastapi.testclient import TestClient

from matchplan.model import (
    AbsenceAssignment,
    Multigraph,
    Schedule,
    verify_schedule,
)
from matchplan.service import create_app

K3 = {"vertices": ["A", "B", "C"],
      "edges": [["A", "B"], ["A", "C"], ["B", "C"]],
      "budgets": {"A": 1, "B": 1, "C": 1}}
K4 = {"vertices": ["1", "2", "3", "4"],
      "edges": [["1", "2"], ["1", "3"], ["1", "4"], ["2", "3"], ["2", "4"], ["3", "4"]]}
FIG1 = {"A": [3], "B": [3], "C": [4]}


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=str(tmp_path / "data"))
    with TestClient(app) as c:
        yield c


def test_create_k4_unit_budget_reports_limit_five(client):
    res = client.post("/sessions", json={"graph": K4, "budgets": 1})
    assert res.status_code == 201
    body = res.json()
    assert body["limit"] == 5
    assert body["engine"] == "optimal"
    assert body["round"] == 0 and not body["finished"]


def test_create_k3_zero_budget_limit_three(client):
    res = client.post("/sessions", json={"graph": K3, "budgets": 0})
    assert res.status_code == 201
    assert res.json()["limit"] == 3


def test_create_edgeless_graph_422(client):
    res = client.post("/sessions", json={"graph": {"vertices": ["A"], "edges": []}})
    assert res.status_code == 422


def test_create_invalid_payload_400(client):
    assert client.post("/sessions", json={"nope": 1}).status_code == 400
    res = client.post("/sessions", json={"graph": {"vertices": ["A"], "edges": [["A", "X"]]}})
    assert res.status_code == 400


def test_round_flow_k4(client):
    sid = client.post("/sessions", json={"graph": K4, "budgets": 1}).json()["id"]
    res = client.post(f"/sessions/{sid}/rounds", json={"absent": []})
    assert res.status_code == 200
    body = res.json()
    assert len(body["matches"]) == 2
    assert body["round"] == 1 and not body["finished"]


def test_absence_by_exhausted_player_409(client):
    sid = client.post("/sessions", json={"graph": K3, "budgets": 1}).json()["id"]
    assert client.post(f"/sessions/{sid}/rounds", json={"absent": ["A"]}).status_code == 200
    res = client.post(f"/sessions/{sid}/rounds", json={"absent": ["A"]})
    assert res.status_code == 409


def test_unknown_vertex_422_and_unknown_session_404(client):
    sid = client.post("/sessions", json={"graph": K3, "budgets": 1}).json()["id"]
    assert client.post(f"/sessions/{sid}/rounds", json={"absent": ["Z"]}).status_code == 422
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/rounds", json={"absent": []}).status_code == 404


def test_finished_session_includes_timetable_and_409_after(client):
    sid = client.post("/sessions", json={"graph": K3, "budgets": 0}).json()["id"]
    last = None
    for _ in range(3):
        last = client.post(f"/sessions/{sid}/rounds", json={"absent": []}).json()
        if last["finished"]:
            break
    assert last["finished"] and "timetable" in last
    assert client.post(f"/sessions/{sid}/rounds", json={"absent": []}).status_code == 409


def test_idempotent_round_retry(client):
    sid = client.post("/sessions", json={"graph": K4, "budgets": 1}).json()["id"]
    first = client.post(f"/sessions/{sid}/rounds", json={"absent": ["1"], "round": 1})
    retry = client.post(f"/sessions/{sid}/rounds", json={"absent": ["1"], "round": 1})
    assert first.status_code == retry.status_code == 200
    assert first.json() == retry.json()
    conflict = client.post(f"/sessions/{sid}/rounds", json={"absent": ["2"], "round": 1})
    assert conflict.status_code == 409
    assert conflict.json()["detail"]["winning_round"]["absent"] == ["1"]
    out_of_order = client.post(f"/sessions/{sid}/rounds", json={"absent": [], "round": 5})
    assert out_of_order.status_code == 409


def test_prefixed_session_reproduces_figure1(client):
    res = client.post("/sessions", json={
        "graph": K3, "budgets": 1, "mode": "prefixed", "absences": FIG1})
    assert res.status_code == 201
    body = res.json()
    sid = body["id"]
    assert body["limit"] == 4
    assert body["engine"] == "prefixed-exact"
    last = None
    for i in range(1, 5):
        r = client.post(f"/sessions/{sid}/rounds", json={"round": i})
        assert r.status_code == 200
        last = r.json()
    assert last["finished"]
    csv_res = client.get(f"/sessions/{sid}/timetable", params={"format": "csv"})
    assert csv_res.text.splitlines() == [
        "player,round 1,round 2,round 3,round 4",
        "A,C,free,ABSENT,B",
        "B,free,C,ABSENT,A",
        "C,A,B,free,ABSENT",
    ]


def test_prefixed_session_rejects_contradicting_absences(client):
    sid = client.post("/sessions", json={
        "graph": K3, "budgets": 1, "mode": "prefixed", "absences": FIG1}).json()["id"]
    res = client.post(f"/sessions/{sid}/rounds", json={"absent": ["A"], "round": 1})
    assert res.status_code == 409


def test_timetable_matches_core_export_and_verifies(client):
    sid = client.post("/sessions", json={"graph": K4, "budgets": 1}).json()["id"]
    client.post(f"/sessions/{sid}/rounds", json={"absent": ["1"]})
    while not client.get(f"/sessions/{sid}").json()["finished"]:
        client.post(f"/sessions/{sid}/rounds", json={"absent": []})
    state = client.get(f"/sessions/{sid}").json()
    g, _ = Multigraph.from_json_dict(K4)
    schedule = Schedule.from_json_dict({"rounds": state["rounds"]}, graph=g)
    c = AbsenceAssignment({v: {i + 1 for i, r in enumerate(state["rounds"])
                               if v in r["absent"]} for v in g.vertices})
    assert verify_schedule(g, c, schedule) == []
    csv_text = client.get(f"/sessions/{sid}/timetable", params={"format": "csv"}).text
    assert csv_text == schedule.timetable_csv(g)


def test_delete_session_then_404(client):
    sid = client.post("/sessions", json={"graph": K3, "budgets": 1}).json()["id"]
    assert client.delete(f"/sessions/{sid}").status_code == 204
    assert client.get(f"/sessions/{sid}").status_code == 404
    assert client.delete(f"/sessions/{sid}").status_code == 404


def test_fresh_session_has_empty_rounds(client):
    sid = client.post("/sessions", json={"graph": K3, "budgets": 1}).json()["id"]
    body = client.get(f"/sessions/{sid}").json()
    assert body["rounds"] == [] and body["round"] == 0


def test_spec_endpoint_serves_openapi(client):
    body = client.get("/spec").json()
    assert "/sessions" in body["paths"]


def test_restart_replays_event_log(tmp_path):
    data_dir = str(tmp_path / "data")
    app = create_app(data_dir=data_dir)
    with TestClient(app) as client:
        sid = client.post("/sessions", json={"graph": K4, "budgets": 1}).json()["id"]
        client.post(f"/sessions/{sid}/rounds", json={"absent": ["1"]})
        client.post(f"/sessions/{sid}/rounds", json={"absent": []})
        before = client.get(f"/sessions/{sid}").json()
    app2 = create_app(data_dir=data_dir)
    with TestClient(app2) as client2:
        after = client2.get(f"/sessions/{sid}").json()
        assert after == before
        res = client2.post(f"/sessions/{sid}/rounds", json={"absent": []})
        assert res.status_code == 200


def test_concurrent_round_posts_serialize(client):
    sid = client.post("/sessions", json={"graph": K4, "budgets": 1}).json()["id"]
    results = []

    def submit(absent):
        results.append(client.post(f"/sessions/{sid}/rounds",
                                   json={"absent": absent, "round": 1}))

    threads = [threading.Thread(target=submit, args=(a,)) for a in (["1"], ["2"])]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    codes = sorted(r.status_code for r in results)
    assert codes == [200, 409]
    loser = next(r for r in results if r.status_code == 409)
    assert "winning_round" in loser.json()["detail"]


def test_replay_determinism_of_engine_responses(client):
    sid = client.post("/sessions", json={"graph": K4, "budgets": 1}).json()["id"]
    script = [["2"], [], ["4"], [], []]
    seen = []
    for absent in script:
        res = client.post(f"/sessions/{sid}/rounds", json={"absent": absent})
        if res.status_code != 200:
            break
        seen.append(res.json()["matches"])
        if res.json()["finished"]:
            break
    sid2 = client.post("/sessions", json={"graph": K4, "budgets": 1}).json()["id"]
    again = []
    for absent in script:
        res = client.post(f"/sessions/{sid2}/rounds", json={"absent": absent})
        if res.status_code != 200:
            break
        again.append(res.json()["matches"])
        if res.json()["finished"]:
            break
    assert seen == again
