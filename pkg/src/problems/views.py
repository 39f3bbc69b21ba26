from fastapi import APIRouter, status

from src.problems.schemas import EvaluateRequest, EvaluateResponse
from src.problems.service import evaluate
from src.utils import send_json_response

base_router = APIRouter(prefix="/problems", tags=["Problems"])


@base_router.post("/evaluate", response_model=EvaluateResponse)
def evaluate_problem(request: EvaluateRequest):
    """Value, gradient blocks, full Hessian and certified constants at a point"""
    result = evaluate(request)
    return send_json_response(result, status.HTTP_200_OK)
