from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__
from app.api.experiment_routes import router as experiment_router
from app.core.log_config import configure_logging


@asynccontextmanager
async def lifespan(app: FastAPI):
    # --- startup ---
    configure_logging()
    yield


def create_app() -> FastAPI:
    app = FastAPI(
        title="Euler-Poisson Threshold Lab",
        version=__version__,
        lifespan=lifespan,
    )

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=False,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    app.include_router(experiment_router)

    @app.get("/healthz")
    async def healthz():
        return {"ok": True}

    @app.get("/")
    async def root():
        return {
            "name": "Euler-Poisson Threshold Lab",
            "status": "ok",
            "docs": "/docs",
            "health": "/healthz",
        }

    return app


app = create_app()
