from fastapi import APIRouter, status

from src.envelope.schemas import DominanceRequest, EnvelopeRequest, EnvelopeResponse
from src.envelope.service import dominance, dominance_over_box, envelope_evaluate, envelope_hessian
from src.problems.service import build_problem, sample_box
from src.utils import send_json_response

base_router = APIRouter(prefix="/envelope", tags=["Envelope"])


@base_router.post("/evaluate", response_model=EnvelopeResponse)
def evaluate_envelope(request: EnvelopeRequest):
    """Saddle-envelope value and gradient, optionally its Hessian"""
    problem = build_problem(request.problem)
    result = envelope_evaluate(problem, request.z, request.eta, request.tol)
    hessian = None
    if request.hessian:
        blocks = envelope_hessian(problem, request.z, request.eta, prox_result=result.prox)
        hessian = blocks.full.tolist()
    response = EnvelopeResponse(
        value=result.value,
        grad=result.gradient.vector.tolist(),
        x_plus=result.prox.z_plus.x.tolist(),
        y_plus=result.prox.z_plus.y.tolist(),
        hessian=hessian,
    )
    return send_json_response(response, status.HTTP_200_OK)


@base_router.post("/dominance")
def interaction_dominance(request: DominanceRequest):
    """Pointwise dominance at z, or its grid infimum over the problem box"""
    problem = build_problem(request.problem)
    if request.z is not None:
        result = dominance(problem, request.z, request.eta)
    else:
        result = dominance_over_box(problem, sample_box(problem), request.eta, request.resolution)
    return send_json_response(result, status.HTTP_200_OK)
