"""Training loop for the quantum convolutional classifiers.

ADAM on the mean squared error of the continuous classifier output, batches
of two, a threshold updated each epoch from the two training points nearest
the phase transition, and projected updates keeping parametric pooling
parameters inside the CPTP feasible region.  Whole runs are deterministic
given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import EQCNNModel, SubLayer, forward, forward_state, predict
from .spin import Dataset
from .su2 import PoolParams, project_to_feasible


@dataclass
class AdamConfig:
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainConfig:
    epochs: int = 750
    batch_size: int = 2
    adam: AdamConfig = field(default_factory=AdamConfig)
    tau_init: float = 0.5
    grad: str = "fd"  # fd | parameter-shift
    fd_step: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.adam.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.grad not in ("fd", "parameter-shift"):
            raise ValueError(f"unknown gradient mode {self.grad!r}")


@dataclass
class Metrics:
    loss_history: list
    train_accuracy_history: list
    tau_history: list
    final_params: np.ndarray
    final_tau: float
    test_accuracy: float | None = None
    test_alphas: list | None = None
    test_outputs: list | None = None
    test_predictions: list | None = None

    def to_json(self) -> dict:
        out = {
            "loss_history": [float(x) for x in self.loss_history],
            "train_accuracy_history": [float(x) for x in self.train_accuracy_history],
            "tau_history": [float(x) for x in self.tau_history],
            "final_params": [float(x) for x in self.final_params],
            "final_tau": float(self.final_tau),
        }
        if self.test_accuracy is not None:
            out["test_accuracy"] = float(self.test_accuracy)
            out["test_alphas"] = [float(x) for x in self.test_alphas]
            out["test_outputs"] = [float(x) for x in self.test_outputs]
            out["test_predictions"] = [int(x) for x in self.test_predictions]
        return out


def mse_loss(outputs, labels) -> float:
    outputs = np.asarray(outputs, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if outputs.shape != labels.shape:
        raise ValueError("outputs and labels must have equal length")
    return float(np.mean((outputs - labels) ** 2))


def batch_outputs(model: EQCNNModel, states, params: np.ndarray) -> np.ndarray:
    if (
        not model.has_parametric_pooling
        and states
        and np.asarray(states[0]).ndim == 1
    ):
        from .models import forward_state_batch

        mat = np.column_stack([np.asarray(s, dtype=complex) for s in states])
        return forward_state_batch(model, mat, params)
    return np.array([forward(model, s, params) for s in states])


def _swap_conv_param_steps(model: EQCNNModel):
    steps = {}
    for si, step in enumerate(model.steps):
        if isinstance(step, SubLayer):
            steps.setdefault(step.param_index, []).append(si)
    return steps


def gradient(
    model: EQCNNModel,
    params: np.ndarray,
    states,
    labels,
    config: TrainConfig,
) -> np.ndarray:
    """Loss gradient; central differences by default, with a per-gate two-term
    shift rule available for the shared SWAP-generator angles."""
    labels = np.asarray(labels, dtype=float)
    grads = np.zeros_like(params)
    shift_params = set()
    if config.grad == "parameter-shift" and not model.has_parametric_pooling:
        conv_steps = _swap_conv_param_steps(model)
        base_outputs = batch_outputs(model, states, params)
        for p_idx, step_indices in conv_steps.items():
            shift_params.add(p_idx)
            total = 0.0
            for si in step_indices:
                for gi in range(len(model.steps[si].pairs)):
                    # exp(-i theta SWAP) has eigenvalue gap 2: shift pi/4
                    dfs = []
                    for m, state in enumerate(states):
                        f_plus = forward_state(
                            model, state, params, gate_shifts={(si, gi): np.pi / 4}
                        )
                        f_minus = forward_state(
                            model, state, params, gate_shifts={(si, gi): -np.pi / 4}
                        )
                        df = f_plus - f_minus
                        dfs.append(df)
                    total += np.mean(
                        2.0 * (base_outputs - labels) * np.array(dfs)
                    )
            grads[p_idx] = total
    h = config.fd_step
    for i in range(len(params)):
        if i in shift_params:
            continue
        up = params.copy()
        up[i] += h
        down = params.copy()
        down[i] -= h
        loss_up = mse_loss(batch_outputs(model, states, up), labels)
        loss_down = mse_loss(batch_outputs(model, states, down), labels)
        grads[i] = (loss_up - loss_down) / (2 * h)
    return grads


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n), t=0)


def adam_step(
    state: AdamState, params: np.ndarray, grads: np.ndarray, config: AdamConfig
) -> np.ndarray:
    """Standard bias-corrected ADAM update; returns the new parameters."""
    state.t += 1
    state.m = config.beta1 * state.m + (1 - config.beta1) * grads
    state.v = config.beta2 * state.v + (1 - config.beta2) * grads ** 2
    m_hat = state.m / (1 - config.beta1 ** state.t)
    v_hat = state.v / (1 - config.beta2 ** state.t)
    return params - config.lr * m_hat / (np.sqrt(v_hat) + config.eps)


def projected_adam_step(
    model: EQCNNModel,
    state: AdamState,
    params: np.ndarray,
    grads: np.ndarray,
    config: AdamConfig,
) -> np.ndarray:
    """ADAM followed by Euclidean projection of every parametric pooling
    triple back onto the feasible region."""
    new_params = adam_step(state, params, grads, config)
    for sl in model.pooling_param_slices():
        p = PoolParams(*new_params[sl])
        proj = project_to_feasible(p)
        new_params[sl] = proj.as_array()
    return new_params


def threshold_update(outputs, alphas, tau: float) -> float:
    """Average of the two outputs whose alphas straddle the transition most
    closely; unchanged when all training points sit on one side."""
    outputs = np.asarray(outputs, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    below = alphas < 1.0
    above = alphas > 1.0
    if not below.any() or not above.any():
        return tau
    i_below = np.argmax(np.where(below, alphas, -np.inf))
    i_above = np.argmin(np.where(above, alphas, np.inf))
    return float((outputs[i_below] + outputs[i_above]) / 2.0)


def evaluate(model: EQCNNModel, params: np.ndarray, dataset: Dataset, tau: float):
    """Accuracy and per-alpha outputs on a labeled dataset."""
    outputs = batch_outputs(model, dataset.states(), params)
    predictions = np.array([predict(f, tau) for f in outputs])
    accuracy = float(np.mean(predictions == dataset.labels()))
    return accuracy, dataset.alphas(), outputs, predictions


def train(
    model: EQCNNModel,
    dataset: Dataset,
    config: TrainConfig,
    test_dataset: Dataset | None = None,
    init_params: np.ndarray | None = None,
) -> Metrics:
    """Full supervised loop: batched gradient steps, per-epoch threshold
    updates, then a final test-set evaluation."""
    rng = np.random.default_rng(config.seed)
    params = (
        np.array(init_params, dtype=float)
        if init_params is not None
        else model.init_params(rng)
    )
    tau = config.tau_init
    opt = AdamState.zeros(model.n_params)
    states = dataset.states()
    labels = dataset.labels().astype(float)
    alphas = dataset.alphas()
    n = len(states)
    loss_hist, acc_hist, tau_hist = [], [], []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            batch_states = [states[i] for i in idx]
            batch_labels = labels[idx]
            grads = gradient(model, params, batch_states, batch_labels, config)
            if model.has_parametric_pooling:
                params = projected_adam_step(model, opt, params, grads, config.adam)
            else:
                params = adam_step(opt, params, grads, config.adam)
            epoch_losses.append(
                mse_loss(batch_outputs(model, batch_states, params), batch_labels)
            )
        outputs = batch_outputs(model, states, params)
        tau = threshold_update(outputs, alphas, tau)
        predictions = np.array([predict(f, tau) for f in outputs])
        loss_hist.append(float(np.mean(epoch_losses)))
        acc_hist.append(float(np.mean(predictions == dataset.labels())))
        tau_hist.append(tau)
    metrics = Metrics(
        loss_history=loss_hist,
        train_accuracy_history=acc_hist,
        tau_history=tau_hist,
        final_params=params,
        final_tau=tau,
    )
    if test_dataset is not None:
        acc, t_alphas, t_outputs, t_preds = evaluate(model, params, test_dataset, tau)
        metrics.test_accuracy = acc
        metrics.test_alphas = list(t_alphas)
        metrics.test_outputs = list(t_outputs)
        metrics.test_predictions = list(t_preds)
    return metrics
