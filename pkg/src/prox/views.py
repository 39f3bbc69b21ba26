from fastapi import APIRouter, status

from src.problems.service import build_problem
from src.prox.schemas import ProxRequest, ProxResponse
from src.prox.service import partial_moreau_x, partial_moreau_y, prox
from src.utils import send_json_response

base_router = APIRouter(prefix="/prox", tags=["Prox"])


@base_router.post("/", response_model=ProxResponse)
def proximal_point(request: ProxRequest):
    """Prox point of a problem at z plus both partial Moreau envelopes"""
    problem = build_problem(request.problem)
    result = prox(problem, request.z, request.eta, request.tol, method=request.method)
    px = partial_moreau_x(problem, request.z, request.eta, request.tol, method=request.method)
    py = partial_moreau_y(problem, request.z, request.eta, request.tol, method=request.method)
    response = ProxResponse(
        x_plus=result.z_plus.x.tolist(),
        y_plus=result.z_plus.y.tolist(),
        residual=result.residual,
        inner_iters=result.inner_iters,
        method=result.method,
        partial_x=px.value,
        partial_y=py.value,
    )
    return send_json_response(response, status.HTTP_200_OK)
