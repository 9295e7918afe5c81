"""Command-line client for the equikit service.

Commands run against an in-process application instance by default, or
against a remote server via --server.  Every command that writes files also
emits a run manifest (command, config, seed, version, wall time, output
digests) next to its outputs.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import click

from . import __version__

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ServiceClient:
    """Thin HTTP client; in-process unless a server URL is given."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=3600.0)
        else:
            from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def get(self, path: str):
        return self._client.get(path)

    def post(self, path: str, payload: dict):
        return self._client.post(path, json=payload)


def _handle_response(resp):
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail", resp.text)
    except Exception:
        detail = resp.text
    payload = {"error": f"http {resp.status_code}", "detail": detail}
    click.echo(json.dumps(payload), err=True)
    sys.exit(EXIT_VALIDATION if resp.status_code in (400, 404, 422) else EXIT_NUMERICAL)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_with_manifest(out: Path, payload, command: str, config: dict, seed: int, started: float):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, str):
        out.write_text(payload)
    else:
        out.write_text(json.dumps(payload, indent=1, sort_keys=True))
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "tool_version": __version__,
        "wall_time_s": round(time.time() - started, 3),
        "outputs": {out.name: _sha256(out)},
    }
    manifest_path = out.with_name(out.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest_path


@click.group()
@click.option("--server", default=None, help="Remote service URL (in-process if omitted).")
@click.pass_context
def main(ctx, server):
    """Synthesize, verify, count, and train group-equivariant quantum channels."""
    ctx.ensure_object(dict)
    ctx.obj["client"] = ServiceClient(server)


@main.command()
@click.pass_context
def presets(ctx):
    """List available presets."""
    data = _handle_response(ctx.obj["client"].get("/presets"))
    click.echo(json.dumps(data, indent=1, sort_keys=True))


@main.command()
@click.option("--method", type=click.Choice(["nullspace", "twirl", "choi"]), default="nullspace")
@click.option("--preset", default=None, help="Problem preset name.")
@click.option("--problem-file", type=click.Path(exists=True), default=None,
              help="JSON file with r_in / r_out representations.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
@click.pass_context
def derive(ctx, method, preset, problem_file, seed, out):
    """Derive an equivariant basis and write it as JSON."""
    started = time.time()
    payload = {"method": method, "seed": seed}
    if preset:
        payload["preset"] = preset
    elif problem_file:
        payload["problem"] = json.loads(Path(problem_file).read_text())
    else:
        click.echo(json.dumps({"error": "validation", "detail": "preset or problem-file required"}), err=True)
        sys.exit(EXIT_VALIDATION)
    data = _handle_response(ctx.obj["client"].post("/derive", payload))
    _write_with_manifest(Path(out), data, "derive", payload, seed, started)
    click.echo(json.dumps({"dimension": data["dimension"], "max_residual": data["max_residual"], "out": str(out)}))


@main.group()
def check():
    """Verification commands."""


@check.command("cptp")
@click.option("--channel-file", type=click.Path(exists=True), required=True)
@click.option("--tol", type=float, default=1e-9)
@click.pass_context
def check_cptp(ctx, channel_file, tol):
    """CP/TP/unitality verdict with witnesses for a channel JSON file."""
    payload = {"channel": json.loads(Path(channel_file).read_text()), "tol": tol}
    data = _handle_response(ctx.obj["client"].post("/check/cptp", payload))
    click.echo(json.dumps(data, sort_keys=True))


@check.command("equivariance")
@click.option("--channel-file", type=click.Path(exists=True), required=True)
@click.option("--preset", default=None)
@click.option("--problem-file", type=click.Path(exists=True), default=None)
@click.option("--samples", type=int, default=8)
@click.option("--seed", type=int, default=0)
@click.pass_context
def check_equivariance(ctx, channel_file, preset, problem_file, samples, seed):
    """Worst-case equivariance residual of a channel against a problem."""
    payload = {
        "channel": json.loads(Path(channel_file).read_text()),
        "n_samples": samples,
        "seed": seed,
    }
    if preset:
        payload["preset"] = preset
    elif problem_file:
        payload["problem"] = json.loads(Path(problem_file).read_text())
    else:
        click.echo(json.dumps({"error": "validation", "detail": "preset or problem-file required"}), err=True)
        sys.exit(EXIT_VALIDATION)
    data = _handle_response(ctx.obj["client"].post("/check/equivariance", payload))
    click.echo(json.dumps(data, sort_keys=True))


@check.command("feasible")
@click.option("--x", type=float, required=True)
@click.option("--y", type=float, required=True)
@click.option("--z", type=float, required=True)
@click.pass_context
def check_feasible(ctx, x, y, z):
    """Membership verdict and boundary distance for pooling parameters."""
    data = _handle_response(ctx.obj["client"].post("/check/feasible", {"x": x, "y": y, "z": z}))
    click.echo(json.dumps(data, sort_keys=True))


@main.command()
@click.option("--preset", default=None)
@click.option("--problem-file", type=click.Path(exists=True), default=None)
@click.option("--rep-file", type=click.Path(exists=True), default=None,
              help="Representation JSON for a unitary parameter count.")
@click.option("--seed", type=int, default=0)
@click.pass_context
def count(ctx, preset, problem_file, rep_file, seed):
    """Parameter counts: multiplicities, TP rank, net, utilization."""
    payload = {"seed": seed}
    if preset:
        payload["preset"] = preset
    elif problem_file:
        payload["problem"] = json.loads(Path(problem_file).read_text())
    elif rep_file:
        payload["rep"] = json.loads(Path(rep_file).read_text())
    else:
        click.echo(json.dumps({"error": "validation", "detail": "preset, problem-file, or rep-file required"}), err=True)
        sys.exit(EXIT_VALIDATION)
    data = _handle_response(ctx.obj["client"].post("/count", payload))
    click.echo(json.dumps(data, sort_keys=True))


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--count", "n_points", type=int, required=True)
@click.option("--alpha-min", type=float, default=0.0)
@click.option("--alpha-max", type=float, default=2.0)
@click.option("--seed", type=int, default=0)
@click.option("--degenerate-policy", type=click.Choice(["first", "random-in-space"]),
              default="random-in-space")
@click.option("--out", type=click.Path(), required=True)
@click.pass_context
def dataset(ctx, n, n_points, alpha_min, alpha_max, seed, degenerate_policy, out):
    """Generate a labeled ground-state dataset as JSON."""
    started = time.time()
    payload = {
        "n": n,
        "count": n_points,
        "alpha_min": alpha_min,
        "alpha_max": alpha_max,
        "seed": seed,
        "degenerate_policy": degenerate_policy,
    }
    data = _handle_response(ctx.obj["client"].post("/dataset", payload))
    _write_with_manifest(Path(out), data, "dataset", payload, seed, started)
    click.echo(json.dumps({"n": n, "entries": len(data["entries"]), "out": str(out)}))


def _train_payload(model, n, train_size, test_size, epochs, seed, conv_repeats, hea_depth, pooling, grad, lr):
    return {
        "model": model,
        "n": n,
        "train_size": train_size,
        "test_size": test_size,
        "epochs": epochs,
        "seed": seed,
        "conv_repeats": conv_repeats,
        "hea_depth": hea_depth,
        "pooling": pooling,
        "grad": grad,
        "learning_rate": lr,
    }


@main.command()
@click.option("--preset", default=None, help="Training preset; explicit flags override it.")
@click.option("--model", type=click.Choice(["eqcnn", "hea"]), default="eqcnn")
@click.option("--n", type=int, default=7)
@click.option("--train-size", type=int, default=4)
@click.option("--test-size", type=int, default=100)
@click.option("--epochs", type=int, default=750)
@click.option("--seed", type=int, default=0)
@click.option("--conv-repeats", type=int, default=1)
@click.option("--hea-depth", type=int, default=1)
@click.option("--pooling", type=click.Choice(["trace", "parametric"]), default="trace")
@click.option("--grad", type=click.Choice(["fd", "parameter-shift"]), default="fd")
@click.option("--lr", type=float, default=0.05)
@click.option("--out", type=click.Path(), required=True, help="Metrics JSON output path.")
@click.pass_context
def train(ctx, preset, model, n, train_size, test_size, epochs, seed, conv_repeats, hea_depth, pooling, grad, lr, out):
    """Train a classifier and write metrics JSON."""
    started = time.time()
    payload = _train_payload(model, n, train_size, test_size, epochs, seed, conv_repeats, hea_depth, pooling, grad, lr)
    if preset is not None:
        # keep only flags the user typed so the preset supplies the rest
        key_to_flag = {"learning_rate": "lr", "model": "model"}
        explicit = {}
        for key, value in payload.items():
            flag = key_to_flag.get(key, key)
            source = ctx.get_parameter_source(flag)
            if source is not None and source.name != "DEFAULT":
                explicit[key] = value
        payload = {"preset": preset, **explicit}
    data = _handle_response(ctx.obj["client"].post("/train", payload))
    _write_with_manifest(Path(out), data, "train", payload, seed, started)
    click.echo(json.dumps({
        "model": data["model"],
        "n_params": data["n_params"],
        "test_accuracy": data["test_accuracy"],
        "out": str(out),
    }))


@main.command("phase-diagram")
@click.option("--model", type=click.Choice(["eqcnn", "hea"]), default="eqcnn")
@click.option("--n", type=int, default=7)
@click.option("--train-size", type=int, default=4)
@click.option("--epochs", type=int, default=750)
@click.option("--seed", type=int, default=0)
@click.option("--conv-repeats", type=int, default=1)
@click.option("--hea-depth", type=int, default=1)
@click.option("--sweep-points", type=int, default=100)
@click.option("--out", type=click.Path(), required=True, help="Sweep CSV output path.")
@click.pass_context
def phase_diagram(ctx, model, n, train_size, epochs, seed, conv_repeats, hea_depth, sweep_points, out):
    """Train, sweep the phase diagram, write alpha,f,predicted,threshold CSV."""
    started = time.time()
    payload = {
        "train": _train_payload(model, n, train_size, sweep_points, epochs, seed, conv_repeats, hea_depth, "trace", "fd", 0.05),
        "sweep_points": sweep_points,
    }
    data = _handle_response(ctx.obj["client"].post("/phase-diagram", payload))
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["alpha", "f", "predicted", "threshold"])
        for row in data["rows"]:
            writer.writerow([row["alpha"], row["f"], row["predicted"], row["threshold"]])
    manifest = {
        "command": "phase-diagram",
        "config": payload,
        "seed": seed,
        "tool_version": __version__,
        "wall_time_s": round(time.time() - started, 3),
        "outputs": {out_path.name: _sha256(out_path)},
    }
    out_path.with_name(out_path.name + ".manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True)
    )
    click.echo(json.dumps({"rows": len(data["rows"]), "test_accuracy": data["test_accuracy"], "out": str(out)}))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("equikit.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
