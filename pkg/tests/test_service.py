import pytest
from fastapi.testclient import TestClient

from tensorcount.service import app

EXAMPLE4 = "p cnf 4 4\n1 2 -3 0\n1 3 4 0\n-2 -3 0\n-3 -4 0\n"


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_count(client):
    r = client.post("/count", json={"dimacs": EXAMPLE4, "alpha": 0.0})
    assert r.status_code == 200
    body = r.json()
    assert body["count"] == pytest.approx(7.0, abs=1e-9)
    assert body["width"] >= 1
    assert body["plan"].startswith("contract")


def test_count_with_weights(client):
    text = "p cnf 2 1\nw 1 0.25\n1 2 0\n"
    r = client.post("/count", json={"dimacs": text, "alpha": 0.0})
    assert r.status_code == 200
    # 1 - W(¬x1)·W(¬x2)·... : satisfying mass = 0.25*1 + 0.75*1 = handled by oracle
    assert r.json()["count"] == pytest.approx(0.25 * 2 + 0.75 * 1, abs=1e-9)


def test_malformed_input(client):
    r = client.post("/count", json={"dimacs": "p cnf 1 1\n5 0\n"})
    assert r.status_code == 422


def test_missing_header(client):
    r = client.post("/count", json={"dimacs": "1 2 0\n"})
    assert r.status_code == 422


def test_infeasible_budget(client):
    r = client.post("/count", json={"dimacs": EXAMPLE4, "alpha": 0.0, "mem_budget": 1})
    assert r.status_code == 507


def test_request_validation(client):
    r = client.post("/count", json={"dimacs": EXAMPLE4, "timeout": -1})
    assert r.status_code == 422
