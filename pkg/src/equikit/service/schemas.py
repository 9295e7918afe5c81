"""Pydantic request/response models for the HTTP service.

Matrices travel as {"rows": n, "cols": m, "data": [[re, im], ...]} row-major;
channels as {"form": "transfer"|"choi"|"kraus", "in_qubits", "out_qubits",
payload}; representations as {"group", "dim", "generators", "kind"}.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class MatrixJSON(BaseModel):
    rows: int
    cols: int
    data: list[list[float]]


class ChannelJSON(BaseModel):
    form: Literal["transfer", "choi", "kraus"]
    in_qubits: int
    out_qubits: int
    matrix: Optional[MatrixJSON] = None
    operators: Optional[list[MatrixJSON]] = None


class RepresentationJSON(BaseModel):
    group: str
    dim: int
    generators: list[MatrixJSON]
    kind: Literal["finite", "lie"]


class ProblemJSON(BaseModel):
    r_in: RepresentationJSON
    r_out: RepresentationJSON
    locality: Optional[int] = None


class DeriveRequest(BaseModel):
    method: Literal["nullspace", "twirl", "choi"] = "nullspace"
    preset: Optional[str] = None
    problem: Optional[ProblemJSON] = None
    seed: int = 0


class BasisElementJSON(BaseModel):
    channel: ChannelJSON
    trace_tag: str
    residual: float


class DeriveResponse(BaseModel):
    dimension: int
    elements: list[BasisElementJSON]
    method: str
    max_residual: float


class CheckCPTPRequest(BaseModel):
    channel: ChannelJSON
    tol: float = 1e-9


class CheckCPTPResponse(BaseModel):
    cp: bool
    tp: bool
    unital: bool
    min_choi_eigenvalue: float
    tp_deviation: float


class CheckEquivarianceRequest(BaseModel):
    channel: ChannelJSON
    preset: Optional[str] = None
    problem: Optional[ProblemJSON] = None
    n_samples: int = 8
    seed: int = 0


class CheckEquivarianceResponse(BaseModel):
    residual: float
    equivariant: bool
    tol: float


class CheckFeasibleRequest(BaseModel):
    x: float
    y: float
    z: float


class CheckFeasibleResponse(BaseModel):
    feasible: bool
    boundary_distance: float
    min_choi_eigenvalue: float
    projected: list[float]


class CountRequest(BaseModel):
    preset: Optional[str] = None
    problem: Optional[ProblemJSON] = None
    rep: Optional[RepresentationJSON] = None
    seed: int = 0


class CountResponse(BaseModel):
    kind: Literal["unitary", "channel"]
    multiplicity_squares: int
    tp_constraint_rank: Optional[int] = None
    net_parameters: Optional[int] = None
    parameter_utilization: Optional[float] = None
    blocks: list[tuple[int, int]] = Field(default_factory=list)


class DatasetRequest(BaseModel):
    n: int
    count: int
    alpha_min: float = 0.0
    alpha_max: float = 2.0
    seed: int = 0
    degenerate_policy: Literal["first", "random-in-space"] = "random-in-space"


class DatasetEntryJSON(BaseModel):
    alpha: float
    label: int
    state: list[list[float]]


class DatasetResponse(BaseModel):
    n: int
    entries: list[DatasetEntryJSON]


class TrainRequest(BaseModel):
    preset: Optional[str] = None
    model: Literal["eqcnn", "hea"] = "eqcnn"
    n: int = 7
    train_size: int = 4
    test_size: int = 100
    epochs: int = 750
    seed: int = 0
    conv_repeats: int = 1
    sublayers_per_conv: int = 2
    hea_depth: int = 1
    pooling: Literal["trace", "parametric"] = "trace"
    grad: Literal["fd", "parameter-shift"] = "fd"
    learning_rate: float = 0.05


class TrainResponse(BaseModel):
    model: str
    n: int
    n_params: int
    loss_history: list[float]
    train_accuracy_history: list[float]
    tau_history: list[float]
    final_params: list[float]
    final_tau: float
    test_accuracy: float
    test_alphas: list[float]
    test_outputs: list[float]
    test_predictions: list[int]


class PhaseDiagramRequest(BaseModel):
    train: TrainRequest
    sweep_points: int = 100


class PhaseDiagramRow(BaseModel):
    alpha: float
    f: float
    predicted: int
    threshold: float


class PhaseDiagramResponse(BaseModel):
    rows: list[PhaseDiagramRow]
    test_accuracy: float
