from fastapi import status
from fastapi.testclient import TestClient

from main import app

client = TestClient(app)

QUADRATIC = {"name": "rotational_quadratic", "params": {"rho": 1.0, "a": 2.0}}


def test_heartbeat():
    response = client.post("/saddle/api/heartbeat")
    assert response.status_code == 200
    assert response.json()["data"]["verified"]


def test_problem_evaluation():
    response = client.post("/saddle/api/problems/evaluate", json={"problem": QUADRATIC, "z": [1.0, 1.0]})
    assert response.status_code == 200
    body = response.json()
    assert body["grad_x"] == [1.0]
    assert body["constants"]["constant_hessian"]


def test_prox_endpoint():
    response = client.post("/saddle/api/prox/", json={"problem": QUADRATIC, "z": [1.0, 1.0], "eta": 3.0})
    assert response.status_code == 200
    body = response.json()
    assert abs(body["partial_x"] - 1.75) < 1e-10
    assert abs(body["partial_y"] - 4.25) < 1e-10


def test_prox_rejects_small_eta():
    response = client.post("/saddle/api/prox/", json={"problem": QUADRATIC, "z": [1.0, 0.0], "eta": 0.5})
    assert response.status_code == 400
    assert "rho" in response.json()["detail"]


def test_prox_reports_an_unreachable_tolerance_as_unprocessable():
    figure1 = {"name": "figure1", "params": {"a": 10.0}}
    response = client.post("/saddle/api/prox/", json={"problem": figure1, "z": [0.3, -1.7], "eta": 40.0, "tol": 1e-300})
    assert response.status_code == status.HTTP_422_UNPROCESSABLE_CONTENT
    assert "inner solver" in response.json()["detail"]


def test_envelope_endpoints():
    response = client.post(
        "/saddle/api/envelope/evaluate",
        json={"problem": QUADRATIC, "z": [1.0, 0.0], "eta": 3.0, "hessian": True},
    )
    assert response.status_code == 200
    body = response.json()
    assert abs(body["value"] - 0.375) < 1e-10
    assert abs(body["hessian"][0][0] - 0.75) < 1e-10

    response = client.post("/saddle/api/envelope/dominance", json={"problem": QUADRATIC, "eta": 3.0})
    assert response.status_code == 200
    assert response.json()["certified"]


def test_experiment_run_endpoint():
    config = {
        "problem": QUADRATIC,
        "algorithm": {"scheme": "ppm", "eta": 3.0, "lambda": 0.5, "max_iter": 1000},
        "init": {"points": [[1.0, 0.0]]},
    }
    response = client.post("/saddle/api/experiments/run", json=config)
    assert response.status_code == 200
    assert response.json()[0]["regime"]["tag"] == "converged"


def test_unknown_suite():
    response = client.post("/saddle/api/experiments/check/calculus")
    assert response.status_code == 400
