import pytest
from fastapi.testclient import TestClient

from main import app


@pytest.fixture
def client():
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture
def cancel_text(data_dir):
    return (data_dir / "cancel.chr").read_text(encoding="utf-8")


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"
    assert client.get("/").status_code == 200


def test_run(client, cancel_text):
    response = client.post("/run", json={"program": cancel_text, "goal": "a, a, a", "trace": True})
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "success"
    assert body["store"] == ["a"]
    assert len(body["trace"]) == body["steps"]

    response = client.post("/run", json={"program": cancel_text, "goal": "c"})
    assert response.json()["status"] == "failed"


def test_run_parse_error(client):
    response = client.post("/run", json={"program": "a <=> .", "goal": "a"})
    assert response.status_code == 400
    assert response.json()["error"] == "ChrParseError"


def test_run_validation_error(client, cancel_text):
    assert client.post("/run", json={"program": cancel_text}).status_code == 422
    assert client.post("/run", json={"program": "  ", "goal": "a"}).status_code == 422
    assert client.post("/run", json={"program": cancel_text, "goal": "a", "step_limit": 0}).status_code == 422


def test_translate_and_logical(client, bisim_text):
    response = client.post("/translate", json={"program": bisim_text})
    assert response.status_code == 200
    body = response.json()
    assert "stamp @ 1 ::" in body["program"]
    assert body["provenance"]["bisim_1"] == "bisim via bisim"

    response = client.post("/translate", json={"program": "r @ k \\ s <=> t."})
    assert response.status_code == 400

    response = client.post("/logical", json={"program": "prop @ k ==> b."})
    assert response.json()["readings"][0] == "prop: ∀(k → b)"


def test_fixpoint(client, cancel_text):
    response = client.post("/fixpoint", json={"program": cancel_text, "roots": ["a, a", "b"], "mode": "gfp"})
    assert response.status_code == 200
    body = response.json()
    assert [result["verdict"] for result in body["results"]] == ["MEMBER", "MEMBER"]
    assert body["truncated"] is False

    response = client.post("/fixpoint", json={"program": cancel_text, "roots": ["q(X)"]})
    assert response.status_code == 400


def test_regex_equal(client):
    response = client.post("/regex/equal", json={"left": "a+", "right": "(a,a*)"})
    assert response.status_code == 200
    assert response.json()["verdict"] == "EQUAL"
    assert response.json()["trace"] == []
    traced = client.post("/regex/equal", json={"left": "a+", "right": "a*", "trace": True}).json()
    assert traced["verdict"] == "NOT-EQUAL"
    assert traced["trace"][-1].split("\t")[1] == "solve"


def test_bisim(client, data_dir):
    automaton = (data_dir / "sample.aut").read_text(encoding="utf-8")
    response = client.post("/bisim", json={"automaton": automaton, "left": "l1", "right": "k2"})
    assert response.status_code == 200
    assert response.json()["verdict"] == "NOT-EQUAL"

    response = client.post("/bisim", json={"automaton": automaton, "left": "l1", "right": "k1", "step_limit": 5})
    assert response.status_code == 422
    assert response.json()["error"] == "Derivation Error"
