import logging
import os

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from settings import configure_logging, get_settings
from spectra_router import spectra_router

API_VERSION = "0.1.0"

logger = logging.getLogger("gridhodge.server")

app = FastAPI(
    title="gridhodge API",
    description="DEC Laplacian spectra, Betti numbers and exact reference spectra",
    version=API_VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
)

# Comma-separated origins; empty means no browser access
ALLOWED_ORIGINS = [origin.strip() for origin in os.getenv("CORS_ORIGINS", "").split(",") if origin.strip()]

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_methods=["GET", "POST"],
    allow_headers=["Content-Type"],
)


@app.get("/")
async def root():
    return {
        "service": "gridhodge API",
        "version": API_VERSION,
        "status": "running",
    }


@app.get("/healthz")
async def health_check():
    return {"ok": True}


@app.on_event("startup")
def startup_event():
    configure_logging()
    settings = get_settings()
    logger.info("🚀 gridhodge API starting (threads=%d, dense_limit=%d)", settings.threads, settings.dense_limit)


app.include_router(spectra_router)
