from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

Command = Literal["classify", "evaluate", "simulate", "sweep", "asymptotics", "picard", "nsp"]
COMMANDS: Tuple[str, ...] = ("classify", "evaluate", "simulate", "sweep", "asymptotics", "picard", "nsp")


# ---------------------------
# Common / Helpers
# ---------------------------

class APIModel(BaseModel):
    """
    Shared config:
    - forbid unknown fields (a typo in a config file fails loudly)
    - reject NaN and infinities before any computation starts
    """
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class _TableMixin(APIModel):
    grid: Optional[List[float]] = None
    values: Optional[List[float]] = None

    @model_validator(mode="after")
    def _table_complete(self):
        if getattr(self, "kind", None) == "tabulated":
            if not self.grid or not self.values:
                raise ValueError("tabulated profiles need both grid and values")
            if len(self.grid) != len(self.values):
                raise ValueError("grid and values must have the same length")
        return self


# ---------------------------
# Initial data
# ---------------------------

class ProfileConfig(_TableMixin):
    kind: Literal["cosine", "uniform", "tabulated"] = "cosine"
    a0: float = -0.75
    b0: float = 0.75
    quadrature_n: int = Field(default=2048, ge=16)


class VelocityConfig(_TableMixin):
    kind: Literal["linear", "zero", "tabulated"] = "linear"
    intercept: float = 0.0
    slope: float = -1.0


# ---------------------------
# Command blocks
# ---------------------------

class SolverConfig(APIModel):
    n: int = Field(default=800, ge=2)
    dt: float = Field(default=1e-3, gt=0)
    t_end: float = Field(default=30.0, gt=0)
    scheme: Literal["RK4", "SemiImplicitEuler"] = "RK4"
    crossing_tol: float = Field(default=0.0, ge=0)
    record_every: int = Field(default=100, ge=1)


class ClassifyConfig(APIModel):
    scan_n: int = Field(default=1024, ge=64)


class SweepConfig(APIModel):
    family: Literal["slope", "mass"] = "slope"
    lo: float = 0.6
    hi: float = 1.0
    tol: float = Field(default=1e-6, gt=0)
    grid_n: int = Field(default=41, ge=2)
    scan_n: int = Field(default=256, ge=64)


class AsymptoticsConfig(APIModel):
    t_start: float = Field(default=0.0, ge=0)
    t_stop: float = Field(default=30.0, gt=0)
    samples: int = Field(default=61, ge=2)
    fit_window: Tuple[float, float] = (5.0, 25.0)
    scan_n: int = Field(default=1024, ge=64)


class PicardConfig(APIModel):
    T0: float = Field(default=0.1, gt=0, le=0.5)
    nt: int = Field(default=101, ge=3)
    nx: int = Field(default=101, ge=3)
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=50, ge=1)


class NspConfig(APIModel):
    d0: List[float] = Field(default_factory=lambda: [-1.0])
    dt: float = Field(default=1e-4, gt=0)
    blow_threshold: float = Field(default=-1e6, le=-1e3)
    gamma_adiabatic: float = 2.0
    alpha_viscosity: float = 2.0


class EvaluateConfig(APIModel):
    times: List[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 5.0, 10.0])
    nx: int = Field(default=21, ge=2)


class OutputConfig(APIModel):
    out_dir: Optional[str] = None


class ExperimentConfig(APIModel):
    m0: float = Field(default=0.2, gt=0)
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    velocity: VelocityConfig = Field(default_factory=VelocityConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    classify: ClassifyConfig = Field(default_factory=ClassifyConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    asymptotics: AsymptoticsConfig = Field(default_factory=AsymptoticsConfig)
    picard: PicardConfig = Field(default_factory=PicardConfig)
    nsp: NspConfig = Field(default_factory=NspConfig)
    evaluate: EvaluateConfig = Field(default_factory=EvaluateConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


# ---------------------------
# Results
# ---------------------------

class OutputFile(APIModel):
    path: str
    rows: int = Field(..., ge=0)


class RunManifest(APIModel):
    command: Command
    artifact_version: str
    wall_clock_s: float = Field(..., ge=0)
    config: Dict[str, Any]
    summary: Dict[str, Any] = Field(default_factory=dict)
    files: List[OutputFile] = Field(default_factory=list)


# ---------------------------
# HTTP jobs
# ---------------------------

class StartExperimentResponse(APIModel):
    job_id: str
    status: Literal["running", "completed", "failed"]


class JobRecord(APIModel):
    status: Literal["running", "completed", "failed"] = "running"
    command: Command
    manifest: Optional[RunManifest] = None
    error: Optional[str] = None
