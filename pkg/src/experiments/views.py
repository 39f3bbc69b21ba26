from fastapi import APIRouter, status

from src.experiments.schemas import ExperimentConfig
from src.experiments.service import run_experiment
from src.experiments.suites import run_suite
from src.utils import send_json_response

base_router = APIRouter(prefix="/experiments", tags=["Experiments"])


@base_router.post("/run")
def run_trajectories(config: ExperimentConfig):
    """Summary rows of a run. Nothing is written to disk"""
    results = run_experiment(config, workers=1)
    return send_json_response([record for record, _ in results], status.HTTP_200_OK)


@base_router.post("/sweep")
def sweep_parameter(config: ExperimentConfig):
    """One summary row per swept value and start"""
    results = run_experiment(config, sweep=True, workers=1)
    return send_json_response([record for record, _ in results], status.HTTP_200_OK)


@base_router.post("/check/{suite}")
def check_suite(suite: str, seed: int = 0):
    report = run_suite(suite, seed)
    code = status.HTTP_200_OK if report.passed else status.HTTP_409_CONFLICT
    return send_json_response(report, code)
