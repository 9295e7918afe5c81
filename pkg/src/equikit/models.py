"""Layered quantum convolutional classifiers over qubit registers.

Two architectures share one layer format:

* the equivariant model alternates brickwork sublayers of exp(-i theta SWAP)
  gates (one shared angle per sublayer) with 2-to-1 pooling layers, either
  fixed partial traces or the parametric (x, y, z) pooling family;
* the hardware-efficient baseline uses per-qubit Rz-Ry-Rz rotations with
  unshared angles plus CNOT chains, and the same partial-trace pooling.

Both end on two qubits measured with SWAP, giving an output
f = (<SWAP> + 1) / 2 in [0, 1].

Gates always address original register labels, so a pure-state forward pass
can run all unitaries on the full register and take the final expectation
directly; pooling then never materializes a density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import PAULI_1Q, dagger, partial_trace
from .su2 import PoolParams, SWAP, pool_channel, swap_conv_unitary
from .channels import choi_to_kraus
from .grouprep import permutation_matrix


@dataclass
class SubLayer:
    """Brickwork of two-qubit gates sharing one angle."""

    pairs: list
    param_index: int
    kind: str = "swap-conv"


@dataclass
class Rotation:
    qubit: int
    axis: str  # "y" or "z"
    param_index: int
    kind: str = "rotation"


@dataclass
class EulerRotation:
    """Fused Rz-Ry-Rz rotation; three unshared angles on one qubit."""

    qubit: int
    param_index: int  # start of three consecutive angles (z, y, z)
    kind: str = "euler"


@dataclass
class Entangler:
    pairs: list  # (control, target)
    kind: str = "cnot"


@dataclass
class Pooling:
    pairs: list  # (traced, kept) original labels
    parametric: bool = False
    param_index: int | None = None  # start of (x, y, z) when parametric
    kind: str = "pool"


@dataclass
class EQCNNModel:
    n_in: int
    steps: list
    n_params: int
    final_qubits: tuple
    name: str = "model"

    @property
    def has_parametric_pooling(self) -> bool:
        return any(
            isinstance(s, Pooling) and s.parametric for s in self.steps
        )

    def pooling_param_slices(self):
        return [
            slice(s.param_index, s.param_index + 3)
            for s in self.steps
            if isinstance(s, Pooling) and s.parametric
        ]

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        params = rng.uniform(-np.pi, np.pi, self.n_params)
        for sl in self.pooling_param_slices():
            params[sl] = 0.0  # depolarizing pooling is interior and feasible
        return params


def build_eqcnn(
    n: int,
    sublayers_per_conv: int = 2,
    conv_repeats: int = 1,
    pooling: str = "trace",
) -> EQCNNModel:
    """Alternate shared-angle SWAP convolutions and 2-to-1 poolings down to
    two qubits."""
    if n < 3:
        raise ValueError("need at least three qubits to pool down to two")
    if pooling not in ("trace", "parametric"):
        raise ValueError(f"unknown pooling kind {pooling!r}")
    steps = []
    active = list(range(n))
    next_param = 0
    while len(active) > 2:
        for _ in range(conv_repeats):
            for s in range(sublayers_per_conv):
                offset = s % 2
                pairs = [
                    (active[i], active[i + 1])
                    for i in range(offset, len(active) - 1, 2)
                ]
                if not pairs:
                    pairs = [(active[0], active[1])]
                steps.append(SubLayer(pairs=pairs, param_index=next_param))
                next_param += 1
        pool_pairs = [
            (active[2 * i], active[2 * i + 1]) for i in range(len(active) // 2)
        ]
        if pooling == "parametric":
            steps.append(
                Pooling(pairs=pool_pairs, parametric=True, param_index=next_param)
            )
            next_param += 3
        else:
            steps.append(Pooling(pairs=pool_pairs))
        kept = [p[1] for p in pool_pairs]
        leftover = active[2 * (len(active) // 2):]
        active = kept + leftover
    return EQCNNModel(
        n_in=n,
        steps=steps,
        n_params=next_param,
        final_qubits=tuple(active),
        name="eqcnn",
    )


def build_hea_qcnn(n: int, depth: int = 1) -> EQCNNModel:
    """Hardware-efficient baseline: unshared Rz-Ry-Rz rotations plus CNOT
    chains per block, alternate partial-trace pooling."""
    if n < 3:
        raise ValueError("need at least three qubits to pool down to two")
    steps = []
    active = list(range(n))
    next_param = 0
    while len(active) > 2:
        for _ in range(depth):
            for q in active:
                steps.append(EulerRotation(qubit=q, param_index=next_param))
                next_param += 3
            steps.append(
                Entangler(pairs=[(active[i], active[i + 1]) for i in range(len(active) - 1)])
            )
        pool_pairs = [
            (active[2 * i], active[2 * i + 1]) for i in range(len(active) // 2)
        ]
        steps.append(Pooling(pairs=pool_pairs))
        kept = [p[1] for p in pool_pairs]
        leftover = active[2 * (len(active) // 2):]
        active = kept + leftover
    return EQCNNModel(
        n_in=n,
        steps=steps,
        n_params=next_param,
        final_qubits=tuple(active),
        name="hea-qcnn",
    )


def hea_depth_matching(n: int, target_params: int) -> int:
    """Smallest HEA depth whose parameter count is nearest the target."""
    best_depth, best_gap = 1, float("inf")
    for depth in range(1, 64):
        count = build_hea_qcnn(n, depth).n_params
        gap = abs(count - target_params)
        if gap < best_gap:
            best_depth, best_gap = depth, gap
        if count > 2 * target_params:
            break
    return best_depth


def eqcnn_repeats_matching(n: int, target_params: int, sublayers: int = 2) -> int:
    base = build_eqcnn(n, sublayers_per_conv=sublayers, conv_repeats=1).n_params
    return max(1, round(target_params / base))


# --------------------------------------------------------------------------
# gate primitives on state vectors / density matrices


def _rotation_matrix(axis: str, theta: float) -> np.ndarray:
    gen = PAULI_1Q[axis.upper()]
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * gen


def _euler_matrix(a: float, b: float, c: float) -> np.ndarray:
    """Rz(c) Ry(b) Rz(a): the fused matrix of sequential z, y, z rotations."""
    return (
        _rotation_matrix("z", c)
        @ _rotation_matrix("y", b)
        @ _rotation_matrix("z", a)
    )


CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def apply_gate_state(psi: np.ndarray, gate: np.ndarray, qubits, n: int) -> np.ndarray:
    """Apply a 1- or 2-qubit gate to a state vector; qubit 0 is the leftmost
    (most significant) axis."""
    k = len(qubits)
    t = psi.reshape([2] * n)
    g = gate.reshape([2] * (2 * k))
    t = np.tensordot(g, t, axes=[list(range(k, 2 * k)), list(qubits)])
    t = np.moveaxis(t, list(range(k)), list(qubits))
    return t.reshape(-1)


def swap_expectation_state(psi: np.ndarray, qa: int, qb: int, n: int) -> float:
    swapped = apply_gate_state(psi, SWAP, (qa, qb), n)
    return float(np.real(np.vdot(psi, swapped)))


def apply_gate_density(rho: np.ndarray, gate: np.ndarray, qubits, k: int) -> np.ndarray:
    """U rho U† with the gate embedded at the given register positions."""
    n_levels = 2 ** k
    t = rho.reshape([2] * (2 * k))
    kq = len(qubits)
    g = gate.reshape([2] * (2 * kq))
    t = np.tensordot(g, t, axes=[list(range(kq, 2 * kq)), list(qubits)])
    t = np.moveaxis(t, list(range(kq)), list(qubits))
    col_axes = [k + q for q in qubits]
    gc = np.conj(gate).reshape([2] * (2 * kq))
    t = np.tensordot(gc, t, axes=[list(range(kq, 2 * kq)), col_axes])
    t = np.moveaxis(t, list(range(kq)), col_axes)
    return t.reshape(n_levels, n_levels)


def apply_pair_channel_density(rho, kraus_ops, pos1: int, pos2: int, k: int):
    """Apply a 2-to-1 channel to register positions (pos1, pos2); the output
    qubit takes the slot of min(pos1, pos2) in the reduced register."""
    others = [q for q in range(k) if q not in (pos1, pos2)]
    order = [pos1, pos2] + others
    perm = [0] * k
    for newpos, old in enumerate(order):
        perm[old] = newpos
    p_front = permutation_matrix(perm, k)
    rho_f = p_front @ rho @ dagger(p_front)
    d_rest = 2 ** (k - 2)
    acc = np.zeros((2 * d_rest, 2 * d_rest), dtype=complex)
    for op in kraus_ops:
        full = np.kron(op, np.eye(d_rest))
        acc += full @ rho_f @ dagger(full)
    kept_order = [min(pos1, pos2)] + others
    target = sorted(kept_order)
    perm2 = [target.index(old) for old in kept_order]
    p_back = permutation_matrix(perm2, k - 1)
    return p_back @ acc @ dagger(p_back)


# --------------------------------------------------------------------------
# forward passes


def _sublayer_gate(theta: float) -> np.ndarray:
    return swap_conv_unitary(theta)


def forward_state(
    model: EQCNNModel,
    psi: np.ndarray,
    params: np.ndarray,
    gate_shifts: dict | None = None,
) -> float:
    """Pure-state forward pass; valid when every pooling is a partial trace.

    ``gate_shifts`` maps (step index, gate index) -> angle offset, used by the
    per-gate parameter-shift rule for shared-angle sublayers.
    """
    if model.has_parametric_pooling:
        raise ValueError("pure-state path requires partial-trace pooling")
    n = model.n_in
    psi = np.asarray(psi, dtype=complex).ravel()
    for si, step in enumerate(model.steps):
        if isinstance(step, SubLayer):
            theta = params[step.param_index]
            base_gate = _sublayer_gate(theta)
            for gi, pair in enumerate(step.pairs):
                if gate_shifts and (si, gi) in gate_shifts:
                    gate = _sublayer_gate(theta + gate_shifts[(si, gi)])
                else:
                    gate = base_gate
                psi = apply_gate_state(psi, gate, pair, n)
        elif isinstance(step, Rotation):
            theta = params[step.param_index]
            if gate_shifts and (si, 0) in gate_shifts:
                theta = theta + gate_shifts[(si, 0)]
            psi = apply_gate_state(psi, _rotation_matrix(step.axis, theta), (step.qubit,), n)
        elif isinstance(step, EulerRotation):
            i = step.param_index
            gate = _euler_matrix(params[i], params[i + 1], params[i + 2])
            psi = apply_gate_state(psi, gate, (step.qubit,), n)
        elif isinstance(step, Entangler):
            for pair in step.pairs:
                psi = apply_gate_state(psi, CNOT, pair, n)
        elif isinstance(step, Pooling):
            continue  # Heisenberg picture: later gates act on kept labels only
        else:
            raise TypeError(f"unknown step {step!r}")
    qa, qb = model.final_qubits
    return (swap_expectation_state(psi, qa, qb, n) + 1.0) / 2.0


def forward_density(model: EQCNNModel, state, params: np.ndarray) -> float:
    """Density-matrix forward pass; supports parametric pooling channels."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        rho = np.outer(state, state.conj())
    else:
        rho = state.copy()
    positions = {label: i for i, label in enumerate(range(model.n_in))}
    k = model.n_in
    for step in model.steps:
        if isinstance(step, SubLayer):
            gate = _sublayer_gate(params[step.param_index])
            for pair in step.pairs:
                rho = apply_gate_density(
                    rho, gate, (positions[pair[0]], positions[pair[1]]), k
                )
        elif isinstance(step, Rotation):
            rho = apply_gate_density(
                rho,
                _rotation_matrix(step.axis, params[step.param_index]),
                (positions[step.qubit],),
                k,
            )
        elif isinstance(step, EulerRotation):
            i = step.param_index
            gate = _euler_matrix(params[i], params[i + 1], params[i + 2])
            rho = apply_gate_density(rho, gate, (positions[step.qubit],), k)
        elif isinstance(step, Entangler):
            for pair in step.pairs:
                rho = apply_gate_density(
                    rho, CNOT, (positions[pair[0]], positions[pair[1]]), k
                )
        elif isinstance(step, Pooling):
            if step.parametric:
                x, y, z = params[step.param_index : step.param_index + 3]
                kraus = choi_to_kraus(pool_channel(PoolParams(x, y, z))).operators
            for traced, kept in step.pairs:
                p_t, p_k = positions[traced], positions[kept]
                if step.parametric:
                    # channels consume the ordered pair (traced, kept) and
                    # emit one qubit at the pair's lower register slot
                    rho = apply_pair_channel_density(rho, kraus, p_t, p_k, k)
                    removed_pos = max(p_t, p_k)
                    out_pos = min(p_t, p_k)
                else:
                    keep = [q for q in range(k) if q != p_t]
                    rho = partial_trace(rho, [2] * k, keep=keep)
                    removed_pos = p_t
                    out_pos = p_k - (1 if p_t < p_k else 0)
                k -= 1
                new_positions = {}
                for label, pos in positions.items():
                    if label == traced:
                        continue
                    if label == kept:
                        new_positions[label] = out_pos
                    else:
                        new_positions[label] = pos - (1 if removed_pos < pos else 0)
                positions = new_positions
        else:
            raise TypeError(f"unknown step {step!r}")
    qa, qb = model.final_qubits
    # SWAP is exchange symmetric, so sorted positions lose nothing
    red = partial_trace(rho, [2] * k, keep=sorted([positions[qa], positions[qb]]))
    val = float(np.real(np.trace(SWAP @ red)))
    return (val + 1.0) / 2.0


def forward_state_batch(
    model: EQCNNModel, states: np.ndarray, params: np.ndarray
) -> np.ndarray:
    """Pure-state forward for a whole batch at once; states are columns."""
    if model.has_parametric_pooling:
        raise ValueError("pure-state path requires partial-trace pooling")
    n = model.n_in
    nb = states.shape[1]
    t = np.ascontiguousarray(states.astype(complex)).reshape([2] * n + [nb])

    def apply(gate, qubits, tensor):
        kq = len(qubits)
        g = gate.reshape([2] * (2 * kq))
        out = np.tensordot(g, tensor, axes=[list(range(kq, 2 * kq)), list(qubits)])
        return np.moveaxis(out, list(range(kq)), list(qubits))

    for step in model.steps:
        if isinstance(step, SubLayer):
            gate = _sublayer_gate(params[step.param_index])
            for pair in step.pairs:
                t = apply(gate, pair, t)
        elif isinstance(step, Rotation):
            t = apply(_rotation_matrix(step.axis, params[step.param_index]), (step.qubit,), t)
        elif isinstance(step, EulerRotation):
            i = step.param_index
            t = apply(_euler_matrix(params[i], params[i + 1], params[i + 2]), (step.qubit,), t)
        elif isinstance(step, Entangler):
            for pair in step.pairs:
                t = apply(CNOT, pair, t)
        elif isinstance(step, Pooling):
            continue
    qa, qb = model.final_qubits
    swapped = apply(SWAP, (qa, qb), t)
    flat = t.reshape(-1, nb)
    flat_swapped = swapped.reshape(-1, nb)
    vals = np.real(np.sum(np.conj(flat) * flat_swapped, axis=0))
    return (vals + 1.0) / 2.0


def forward(model: EQCNNModel, state, params: np.ndarray) -> float:
    """Dispatch to the pure-state path when pooling allows it."""
    state = np.asarray(state, dtype=complex)
    if not model.has_parametric_pooling and state.ndim == 1:
        return forward_state(model, state, params)
    return forward_density(model, state, params)


def predict(f: float, tau: float) -> int:
    """Label 1 above the threshold, 0 at or below it."""
    return 1 if f > tau else 0
