from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
import uvicorn

from src.config import get_settings, configure_logging, LOG
from src.api import base_router
from src.exceptions import SaddleError
from src.utils import send_json_response

settings = get_settings()
configure_logging()


app = FastAPI(
    title="Saddle PPM Service",
    description="Proximal point methods, saddle envelopes and regime diagnostics for minimax problems",
    version="0.1.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_headers=["*"],
    allow_methods=["*"],
    expose_headers=["*"],
)


@app.exception_handler(SaddleError)
async def saddle_error_handler(request: Request, exc: SaddleError):
    LOG.error(f"{request.url.path} failed with error {exc.detail}")
    return send_json_response({"detail": exc.detail}, exc.status_code)


app.include_router(base_router)

if __name__ == "__main__":
    LOG.info(f"Starting Saddle PPM on host {settings.HOST} on port {settings.PORT}")
    uvicorn.run("main:app", host=settings.HOST, port=settings.PORT)
