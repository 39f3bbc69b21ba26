from fastapi import APIRouter, status
from fastapi.responses import JSONResponse

from src.envelope.views import base_router as envelope_router
from src.experiments.views import base_router as experiments_router
from src.problems.views import base_router as problems_router
from src.prox.views import base_router as prox_router


base_router = APIRouter(prefix="/saddle/api")


@base_router.post("/heartbeat")
def heartbeat():
    """Base endpoint for service. Can be used for app health check

    Returns:
        status_code: HTTP Response code
        version: application version
    """
    return JSONResponse(
        status_code=status.HTTP_200_OK,
        content={
            "message": "Saddle PPM Service",
            "version": "0.1.0",
            "data": {
                "verified": True,
            },
        },
    )


base_router.include_router(problems_router, tags=["Problems"])
base_router.include_router(prox_router, tags=["Prox"])
base_router.include_router(envelope_router, tags=["Envelope"])
base_router.include_router(experiments_router, tags=["Experiments"])
