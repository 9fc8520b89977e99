from __future__ import annotations

import asyncio
import json
import logging
import uuid
from pathlib import Path
from typing import Dict

from fastapi import APIRouter, BackgroundTasks, HTTPException
from fastapi.responses import StreamingResponse

from app.core.errors import LabError
from app.core.settings import DEFAULT_OUT_DIR, get_settings
from app.lab.experiments import build_data, run_experiment
from app.models.experiment_models import COMMANDS, ExperimentConfig, JobRecord, StartExperimentResponse

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api/experiments", tags=["experiments"])

# Simple in-memory job store: job_id -> dict (serialized JobRecord)
job_store: Dict[str, dict] = {}

STREAM_INTERVAL_S = 0.5


def _job_dir(config: ExperimentConfig, job_id: str) -> Path:
    base = get_settings().out_dir or config.output.out_dir or DEFAULT_OUT_DIR
    return Path(base) / job_id


@router.post("/{command}", response_model=StartExperimentResponse)
async def start_experiment(
    command: str, config: ExperimentConfig, background_tasks: BackgroundTasks
) -> StartExperimentResponse:
    if command not in COMMANDS:
        raise HTTPException(status_code=404, detail=f"Unknown command: {command}")
    # Reject bad initial data up front; only the pipeline itself runs in the background.
    if command != "nsp":
        try:
            build_data(config)
        except LabError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    job_id = str(uuid.uuid4())
    job_store[job_id] = JobRecord(status="running", command=command).model_dump(mode="json")
    background_tasks.add_task(_run_job, job_id, command, config)
    return StartExperimentResponse(job_id=job_id, status="running")


async def _run_job(job_id: str, command: str, config: ExperimentConfig) -> None:
    out_dir = _job_dir(config, job_id)
    threads = get_settings().threads
    try:
        manifest = await asyncio.to_thread(run_experiment, config, command, out_dir, threads)
    except (LabError, ValueError) as exc:
        logger.warning("job %s (%s) failed: %s", job_id, command, exc)
        job_store[job_id] = JobRecord(status="failed", command=command, error=str(exc)).model_dump(mode="json")
        return
    job_store[job_id] = JobRecord(status="completed", command=command, manifest=manifest).model_dump(mode="json")


@router.get("/status/{job_id}", response_model=JobRecord)
async def get_status(job_id: str) -> JobRecord:
    if job_id not in job_store:
        raise HTTPException(status_code=404, detail="Job not found")
    return JobRecord(**job_store[job_id])


@router.get("/stream/{job_id}")
async def stream_status(job_id: str) -> StreamingResponse:
    if job_id not in job_store:
        raise HTTPException(status_code=404, detail="Job not found")

    async def event_generator():
        while True:
            data = job_store.get(job_id)
            if data is None:
                break
            yield f"data: {json.dumps(data, sort_keys=True)}\n\n"
            if data.get("status", "running") in ("completed", "failed"):
                break
            await asyncio.sleep(STREAM_INTERVAL_S)

    return StreamingResponse(
        event_generator(),
        media_type="text/event-stream",
        headers={
            "Cache-Control": "no-cache",
            "X-Accel-Buffering": "no",
        },
    )
