"""FastAPI service exposing derivation, verification, counting, dataset
generation, and training over HTTP.

The CLI talks to these endpoints through an in-process test client by
default, or to a remote instance via --server.
"""

from __future__ import annotations

import importlib.resources
import json

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..channels import (
    as_choi,
    channel_from_json,
    channel_to_json,
    choi_to_transfer,
    is_cp,
    is_tp,
    is_unital,
    trace_tag,
)
from ..grouprep import Representation, isotypic_decompose
from ..solvers import (
    EquivarianceProblem,
    EquivariantBasis,
    TransferMatrix,
    TwirlConfig,
    count_parameters_channel,
    parameter_utilization,
    solve_choi_method,
    solve_nullspace,
    twirl,
    verify_equivariance,
)
from ..spin import make_dataset
from ..su2 import PoolParams, feasible_boundary_distance, feasible_contains, pool_channel, project_to_feasible
from ..models import build_eqcnn, build_hea_qcnn
from ..train import TrainConfig, AdamConfig, train
from .schemas import (
    CheckCPTPRequest,
    CheckCPTPResponse,
    CheckEquivarianceRequest,
    CheckEquivarianceResponse,
    CheckFeasibleRequest,
    CheckFeasibleResponse,
    CountRequest,
    CountResponse,
    DatasetRequest,
    DatasetResponse,
    DeriveRequest,
    DeriveResponse,
    BasisElementJSON,
    ChannelJSON,
    PhaseDiagramRequest,
    PhaseDiagramResponse,
    PhaseDiagramRow,
    ProblemJSON,
    TrainRequest,
    TrainResponse,
)

app = FastAPI(title="equikit", version=__version__)


def load_preset(name: str) -> dict:
    try:
        text = (
            importlib.resources.files("equikit.presets")
            .joinpath(f"{name}.json")
            .read_text()
        )
    except FileNotFoundError:
        raise HTTPException(status_code=422, detail=f"unknown preset {name!r}")
    return json.loads(text)


def list_presets() -> list:
    names = []
    for entry in importlib.resources.files("equikit.presets").iterdir():
        if entry.name.endswith(".json"):
            names.append(entry.name[: -len(".json")])
    return sorted(names)


def _rep_from_schema(obj) -> Representation:
    return Representation.from_json(obj if isinstance(obj, dict) else obj.model_dump())


def _problem_from_request(preset: str | None, problem: ProblemJSON | None) -> EquivarianceProblem:
    if preset is not None:
        data = load_preset(preset)
        if data.get("kind") != "problem":
            raise HTTPException(
                status_code=422, detail=f"preset {preset!r} is not a problem preset"
            )
        r_in = Representation.from_json(data["r_in"])
        r_out = Representation.from_json(data["r_out"])
        return EquivarianceProblem(r_in=r_in, r_out=r_out)
    if problem is None:
        raise HTTPException(status_code=422, detail="preset or problem required")
    return EquivarianceProblem(
        r_in=_rep_from_schema(problem.r_in),
        r_out=_rep_from_schema(problem.r_out),
        locality=problem.locality,
    )


def _channel_schema(chan) -> ChannelJSON:
    return ChannelJSON(**channel_to_json(chan))


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.get("/presets")
def presets():
    out = {}
    for name in list_presets():
        out[name] = load_preset(name).get("description", "")
    return out


def _twirl_basis(problem: EquivarianceProblem, seed: int) -> EquivariantBasis:
    """Spanning set of the equivariant space from twirled elementary seeds."""
    din2 = 4 ** problem.in_qubits
    dout2 = 4 ** problem.out_qubits
    if problem.r_in.is_finite:
        config = TwirlConfig(mode="finite-exact", seed=seed)
    else:
        config = TwirlConfig(mode="weingarten", seed=seed)
    twirled = []
    for i in range(dout2):
        for j in range(din2):
            seed_mat = np.zeros((dout2, din2), dtype=complex)
            seed_mat[i, j] = 1.0
            t = twirl(
                TransferMatrix(seed_mat, problem.in_qubits, problem.out_qubits),
                problem,
                config,
            )
            twirled.append(t.matrix.reshape(-1))
    stack = np.column_stack(twirled)
    q, s, _ = np.linalg.svd(stack, full_matrices=False)
    rank = int(np.sum(s > 1e-9 * s[0])) if s.size and s[0] > 0 else 0
    elements = [
        TransferMatrix(
            q[:, k].reshape(dout2, din2), problem.in_qubits, problem.out_qubits
        )
        for k in range(rank)
    ]
    tags = [trace_tag(t) for t in elements]
    residuals = [verify_equivariance(t, problem, n_samples=0) for t in elements]
    return EquivariantBasis(
        elements=elements, trace_tags=tags, provenance="twirl", residuals=residuals
    )


def _zn_mixture_basis(data: dict) -> EquivariantBasis:
    """The cyclic-symmetric channel mixing odd/even two-body layers."""
    from scipy.linalg import expm

    from ..grouprep import cyclic_shift_rep
    from ..linalg import PAULI_1Q, kron_all
    from ..solvers import randomized_mixture

    n = int(data.get("n", 4))
    theta = float(data.get("theta", 0.7))

    def layer(pairs):
        u = np.eye(2 ** n, dtype=complex)
        for a, b in pairs:
            ops = [np.eye(2)] * n
            ops[a], ops[b] = PAULI_1Q["Z"], PAULI_1Q["Y"]
            u = u @ expm(-1j * theta * kron_all(ops))
        return u

    even = layer([(j, j + 1) for j in range(0, n - 1, 2)])
    odd = layer([(j, (j + 1) % n) for j in range(1, n, 2)])
    mixture = randomized_mixture([even, odd], [0.5, 0.5])
    rep = cyclic_shift_rep(n)
    problem = EquivarianceProblem(r_in=rep, r_out=rep)
    residual = verify_equivariance(mixture, problem, n_samples=0)
    return EquivariantBasis(
        elements=[mixture],
        trace_tags=[trace_tag(mixture)],
        provenance="zn-mixture",
        residuals=[residual],
    )


@app.post("/derive", response_model=DeriveResponse)
def derive(req: DeriveRequest):
    if req.preset is not None:
        data = load_preset(req.preset)
        if data.get("kind") == "zn-mixture":
            basis = _zn_mixture_basis(data)
            elements = [
                BasisElementJSON(
                    channel=_channel_schema(t), trace_tag=tag, residual=float(res)
                )
                for t, tag, res in zip(basis.elements, basis.trace_tags, basis.residuals)
            ]
            return DeriveResponse(
                dimension=len(basis),
                elements=elements,
                method="twirl",
                max_residual=float(max(basis.residuals)),
            )
    problem = _problem_from_request(req.preset, req.problem)
    try:
        if req.method == "nullspace":
            basis = solve_nullspace(problem)
        elif req.method == "choi":
            basis = solve_choi_method(problem, rng=np.random.default_rng(req.seed))
        else:
            basis = _twirl_basis(problem, req.seed)
    except Exception as exc:  # propagate solver failures as numerical errors
        raise HTTPException(status_code=500, detail=f"solver failure: {exc}")
    elements = [
        BasisElementJSON(
            channel=_channel_schema(t), trace_tag=tag, residual=float(res)
        )
        for t, tag, res in zip(basis.elements, basis.trace_tags, basis.residuals)
    ]
    return DeriveResponse(
        dimension=len(basis),
        elements=elements,
        method=req.method,
        max_residual=float(max(basis.residuals)) if basis.residuals else 0.0,
    )


@app.post("/check/cptp", response_model=CheckCPTPResponse)
def check_cptp(req: CheckCPTPRequest):
    chan = channel_from_json(req.channel.model_dump())
    j = as_choi(chan)
    cp_ok, min_eig = is_cp(j, req.tol)
    tp_ok, tp_dev = is_tp(j, req.tol)
    return CheckCPTPResponse(
        cp=cp_ok,
        tp=tp_ok,
        unital=is_unital(j, req.tol),
        min_choi_eigenvalue=min_eig,
        tp_deviation=tp_dev,
    )


@app.post("/check/equivariance", response_model=CheckEquivarianceResponse)
def check_equivariance(req: CheckEquivarianceRequest):
    problem = _problem_from_request(req.preset, req.problem)
    chan = channel_from_json(req.channel.model_dump())
    j = as_choi(chan)
    t = choi_to_transfer(j)
    residual = verify_equivariance(
        t, problem, n_samples=req.n_samples, rng=np.random.default_rng(req.seed)
    )
    return CheckEquivarianceResponse(
        residual=float(residual), equivariant=bool(residual <= 1e-9), tol=1e-9
    )


@app.post("/check/feasible", response_model=CheckFeasibleResponse)
def check_feasible(req: CheckFeasibleRequest):
    p = PoolParams(req.x, req.y, req.z)
    j = pool_channel(p)
    _, min_eig = is_cp(j)
    proj = project_to_feasible(p)
    return CheckFeasibleResponse(
        feasible=feasible_contains(p),
        boundary_distance=feasible_boundary_distance(p),
        min_choi_eigenvalue=min_eig,
        projected=[proj.x, proj.y, proj.z],
    )


@app.post("/count", response_model=CountResponse)
def count(req: CountRequest):
    rng = np.random.default_rng(req.seed)
    if req.rep is not None or (
        req.preset is not None and load_preset(req.preset).get("kind") == "rep"
    ):
        rep = (
            _rep_from_schema(req.rep)
            if req.rep is not None
            else Representation.from_json(load_preset(req.preset)["rep"])
        )
        deco = isotypic_decompose(rep, rng=rng)
        return CountResponse(
            kind="unitary",
            multiplicity_squares=deco.multiplicity_squares(),
            blocks=[(b.irrep_dim, b.multiplicity) for b in deco.blocks],
        )
    problem = _problem_from_request(req.preset, req.problem)
    total, c, net = count_parameters_channel(
        problem.r_in, problem.r_out, rng=np.random.default_rng(req.seed)
    )
    mu = None
    if net > 0:
        mu = parameter_utilization(
            problem.r_in, problem.r_out, rng=np.random.default_rng(req.seed)
        )
    return CountResponse(
        kind="channel",
        multiplicity_squares=total,
        tp_constraint_rank=c,
        net_parameters=net,
        parameter_utilization=mu,
    )


@app.post("/dataset", response_model=DatasetResponse)
def dataset(req: DatasetRequest):
    try:
        ds = make_dataset(
            n=req.n,
            count=req.count,
            alpha_range=(req.alpha_min, req.alpha_max),
            seed=req.seed,
            degenerate_policy=req.degenerate_policy,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return DatasetResponse(**ds.to_json())


def _build_model(req: TrainRequest):
    if req.model == "eqcnn":
        return build_eqcnn(
            req.n,
            sublayers_per_conv=req.sublayers_per_conv,
            conv_repeats=req.conv_repeats,
            pooling=req.pooling,
        )
    return build_hea_qcnn(req.n, depth=req.hea_depth)


def _resolve_train_request(req: TrainRequest) -> TrainRequest:
    """Fill unset fields from a training preset; explicit fields win."""
    if req.preset is None:
        return req
    data = load_preset(req.preset)
    if data.get("kind") != "train":
        raise HTTPException(
            status_code=422, detail=f"preset {req.preset!r} is not a training preset"
        )
    merged = {
        k: v for k, v in data.items() if k in TrainRequest.model_fields and k != "preset"
    }
    for name in req.model_fields_set:
        if name != "preset":
            merged[name] = getattr(req, name)
    return TrainRequest(**merged)


def _run_training(req: TrainRequest):
    req = _resolve_train_request(req)
    model = _build_model(req)
    train_ds = make_dataset(req.n, req.train_size, seed=req.seed)
    test_ds = make_dataset(req.n, req.test_size, seed=req.seed + 1)
    config = TrainConfig(
        epochs=req.epochs,
        adam=AdamConfig(lr=req.learning_rate),
        grad=req.grad,
        seed=req.seed,
    )
    metrics = train(model, train_ds, config, test_dataset=test_ds)
    return model, metrics, req


@app.post("/train", response_model=TrainResponse)
def train_endpoint(req: TrainRequest):
    try:
        model, metrics, resolved = _run_training(req)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return TrainResponse(
        model=model.name,
        n=resolved.n,
        n_params=model.n_params,
        **metrics.to_json(),
    )


@app.post("/phase-diagram", response_model=PhaseDiagramResponse)
def phase_diagram(req: PhaseDiagramRequest):
    inner = req.train.model_copy(update={"test_size": req.sweep_points})
    try:
        model, metrics, _ = _run_training(inner)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    rows = [
        PhaseDiagramRow(
            alpha=a, f=f, predicted=p, threshold=metrics.final_tau
        )
        for a, f, p in zip(
            metrics.test_alphas, metrics.test_outputs, metrics.test_predictions
        )
    ]
    return PhaseDiagramResponse(rows=rows, test_accuracy=metrics.test_accuracy)
