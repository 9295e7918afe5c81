"""Superoperator representations and conversions.

A channel phi: B(H_in) -> B(H_out) is carried in one of three forms:

* ``TransferMatrix``: the matrix of phi in normalized Pauli bases
  (Tr[P_i P_j] = delta_ij), shape (4**m, 4**n) for n -> m qubits.
* ``ChoiOperator``: J = sum_ij |i><j| (x) phi(|i><j|) on H_in (x) H_out.
* ``KrausSet``: operators K_i with phi(rho) = sum K_i rho K_i†.

Conversions use the column-stacking vectorization of :mod:`equikit.linalg`,
under which the computational-basis transfer matrix is sum_i conj(K_i) (x) K_i
and the Choi operator is obtained by an index involution that swaps the first
row factor with the second column factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    dagger,
    devectorize,
    hermitian_eig,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    pauli_vec_matrix,
    vectorize,
)

PSD_TOL = 1e-9


class NotCompletelyPositiveError(ValueError):
    pass


class NotTracePreservingError(ValueError):
    pass


@dataclass
class TransferMatrix:
    matrix: np.ndarray
    in_qubits: int
    out_qubits: int
    mc_stderr: float | None = field(default=None, compare=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        expected = (4 ** self.out_qubits, 4 ** self.in_qubits)
        if self.matrix.shape != expected:
            raise ValueError(
                f"transfer matrix shape {self.matrix.shape}, expected {expected}"
            )

    @property
    def in_dim(self) -> int:
        return 2 ** self.in_qubits

    @property
    def out_dim(self) -> int:
        return 2 ** self.out_qubits


@dataclass
class ChoiOperator:
    matrix: np.ndarray
    in_dim: int
    out_dim: int

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = self.in_dim * self.out_dim
        if self.matrix.shape != (d, d):
            raise ValueError(f"Choi shape {self.matrix.shape}, expected {(d, d)}")


@dataclass
class KrausSet:
    operators: list

    def __post_init__(self):
        self.operators = [np.asarray(k, dtype=complex) for k in self.operators]
        if not self.operators:
            raise ValueError("empty Kraus set")
        shape = self.operators[0].shape
        if any(k.shape != shape for k in self.operators):
            raise ValueError("Kraus operators must share one shape")

    @property
    def out_dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def in_dim(self) -> int:
        return self.operators[0].shape[1]

    def completeness_defect(self) -> float:
        s = sum(dagger(k) @ k for k in self.operators)
        return float(np.linalg.norm(s - np.eye(self.in_dim)))


@dataclass
class StinespringDilation:
    unitary: np.ndarray
    env_dim: int
    embed_indices: np.ndarray

    def apply(self, rho: np.ndarray, out_dim: int) -> np.ndarray:
        """Embed rho, conjugate by the dilation unitary, trace the environment."""
        d = self.unitary.shape[0]
        e = np.zeros((d, len(self.embed_indices)), dtype=complex)
        for col, idx in enumerate(self.embed_indices):
            e[idx, col] = 1.0
        big = self.unitary @ e @ rho @ dagger(e) @ dagger(self.unitary)
        return partial_trace(big, [out_dim, self.env_dim], keep=[0])


def gamma_involution(mat: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    """Index involution linking computational-basis transfer and Choi matrices.

    Viewing the input as a 4-tensor T[n, m, j, i] (row (n, m), column (j, i)
    under column stacking), the output has entries O[a, b, c, d] = T[d, b, c, a].
    Applying it twice is the identity.
    """
    t = np.asarray(mat).reshape(out_dim, out_dim, in_dim, in_dim)
    j = t.transpose(3, 1, 2, 0)
    return j.reshape(in_dim * out_dim, in_dim * out_dim)


def transfer_to_choi(t: TransferMatrix) -> ChoiOperator:
    u_out = pauli_vec_matrix(t.out_qubits)
    u_in = pauli_vec_matrix(t.in_qubits)
    comp = u_out @ t.matrix @ dagger(u_in)
    j = gamma_involution(comp, t.in_dim, t.out_dim)
    return ChoiOperator(matrix=j, in_dim=t.in_dim, out_dim=t.out_dim)


def choi_to_transfer(j: ChoiOperator) -> TransferMatrix:
    in_q = int(round(np.log2(j.in_dim)))
    out_q = int(round(np.log2(j.out_dim)))
    # the involution is self-inverse once reshaped with the Choi's own dims
    t4 = j.matrix.reshape(j.in_dim, j.out_dim, j.in_dim, j.out_dim)
    comp = t4.transpose(3, 1, 2, 0).reshape(j.out_dim ** 2, j.in_dim ** 2)
    u_out = pauli_vec_matrix(out_q)
    u_in = pauli_vec_matrix(in_q)
    return TransferMatrix(
        matrix=dagger(u_out) @ comp @ u_in, in_qubits=in_q, out_qubits=out_q
    )


def kraus_to_transfer(k: KrausSet) -> TransferMatrix:
    in_q = int(round(np.log2(k.in_dim)))
    out_q = int(round(np.log2(k.out_dim)))
    comp = sum(np.kron(np.conj(op), op) for op in k.operators)
    u_out = pauli_vec_matrix(out_q)
    u_in = pauli_vec_matrix(in_q)
    return TransferMatrix(
        matrix=dagger(u_out) @ comp @ u_in, in_qubits=in_q, out_qubits=out_q
    )


def kraus_to_choi(k: KrausSet) -> ChoiOperator:
    d = k.in_dim * k.out_dim
    j = np.zeros((d, d), dtype=complex)
    for op in k.operators:
        v = vectorize(op)
        j += np.outer(v, np.conj(v))
    return ChoiOperator(matrix=j, in_dim=k.in_dim, out_dim=k.out_dim)


def choi_to_kraus(j: ChoiOperator, tol: float = PSD_TOL) -> KrausSet:
    """Kraus operators from the Choi spectrum; requires PSD input.

    Eigenvalues in [-tol, tol] are clipped to zero; anything below -tol is a
    complete-positivity violation.
    """
    vals, vecs = hermitian_eig(j.matrix, tol=max(tol, 1e-8))
    if vals[0] < -tol:
        raise NotCompletelyPositiveError(
            f"Choi operator has negative eigenvalue {vals[0]:.3e}"
        )
    ops = []
    for lam, v in zip(vals, vecs.T):
        if lam > tol:
            ops.append(np.sqrt(lam) * devectorize(v, j.out_dim, j.in_dim))
    if not ops:
        ops = [np.zeros((j.out_dim, j.in_dim), dtype=complex)]
    return KrausSet(operators=ops)


def kraus_rank(j: ChoiOperator, tol: float = PSD_TOL) -> int:
    vals = np.linalg.eigvalsh((j.matrix + dagger(j.matrix)) / 2)
    return int(np.sum(vals > tol))


def unitary_channel(u: np.ndarray) -> KrausSet:
    return KrausSet(operators=[np.asarray(u, dtype=complex)])


def is_cp(j: ChoiOperator, tol: float = PSD_TOL):
    """Complete positivity check; returns (verdict, min eigenvalue)."""
    herm_defect = np.linalg.norm(j.matrix - dagger(j.matrix))
    vals = np.linalg.eigvalsh((j.matrix + dagger(j.matrix)) / 2)
    ok = bool(vals[0] >= -tol and herm_defect <= max(tol, 1e-8) * j.matrix.shape[0])
    return ok, float(vals[0])


def is_tp(j: ChoiOperator, tol: float = PSD_TOL):
    """Trace preservation: reducing J over the output factor gives the
    input-space identity.  Returns (verdict, deviation)."""
    red = partial_trace(j.matrix, [j.in_dim, j.out_dim], keep=[0])
    dev = float(np.linalg.norm(red - np.eye(j.in_dim)))
    return bool(dev <= tol * j.in_dim), dev


def is_unital(t: TransferMatrix | ChoiOperator, tol: float = PSD_TOL) -> bool:
    """phi(I_in) = I_out, i.e. reducing J over the input factor is identity."""
    j = t if isinstance(t, ChoiOperator) else transfer_to_choi(t)
    red = partial_trace(j.matrix, [j.in_dim, j.out_dim], keep=[1])
    return bool(np.linalg.norm(red - np.eye(j.out_dim)) <= tol * j.out_dim)


def is_cptp(j: ChoiOperator, tol: float = PSD_TOL) -> bool:
    return is_cp(j, tol)[0] and is_tp(j, tol)[0]


def apply_channel(chan, rho: np.ndarray) -> np.ndarray:
    """Apply a channel in any representation to a density operator."""
    rho = np.asarray(rho, dtype=complex)
    if isinstance(chan, KrausSet):
        if rho.shape[0] != chan.in_dim:
            raise ValueError("dimension mismatch")
        return sum(op @ rho @ dagger(op) for op in chan.operators)
    if isinstance(chan, ChoiOperator):
        if rho.shape[0] != chan.in_dim:
            raise ValueError("dimension mismatch")
        big = chan.matrix @ np.kron(rho.T, np.eye(chan.out_dim))
        return partial_trace(big, [chan.in_dim, chan.out_dim], keep=[1])
    if isinstance(chan, TransferMatrix):
        if rho.shape[0] != chan.in_dim:
            raise ValueError("dimension mismatch")
        u_in = pauli_vec_matrix(chan.in_qubits)
        u_out = pauli_vec_matrix(chan.out_qubits)
        coeffs = dagger(u_in) @ vectorize(rho)
        out = u_out @ (chan.matrix @ coeffs)
        return devectorize(out, chan.out_dim, chan.out_dim)
    raise TypeError(f"unsupported channel type {type(chan)!r}")


def transfer_tp_defect(t: TransferMatrix) -> float:
    """Distance of the out-identity row from the trace-preserving pattern.

    A map is TP iff the row of the out-identity Pauli is zero except for the
    identity-to-identity entry sqrt(d_in / d_out).
    """
    target = np.zeros(4 ** t.in_qubits)
    target[0] = np.sqrt(t.in_dim / t.out_dim)
    return float(np.linalg.norm(t.matrix[0] - target))


def trace_tag(t: TransferMatrix, tol: float = 1e-9) -> str:
    """Classify the trace behavior of a map from its identity row."""
    row = t.matrix[0]
    if np.linalg.norm(row) <= tol:
        return "trace-annihilating"
    if transfer_tp_defect(t) <= tol:
        return "trace-preserving"
    return "trace-altering"


def stinespring_dilate(k: KrausSet, tol: float = 1e-10) -> StinespringDilation:
    """Complete the stacked Kraus isometry to a unitary on system x environment.

    The environment dimension is the smallest power of two that fits the Kraus
    count; the completion is Gram-Schmidt against a deterministic seed basis so
    repeat runs agree bit for bit.
    """
    defect = k.completeness_defect()
    if defect > tol * 10:
        raise NotTracePreservingError(
            f"Kraus set is not trace preserving (defect {defect:.3e})"
        )
    n_kraus = len(k.operators)
    env_dim = 1
    while env_dim < n_kraus or k.out_dim * env_dim < k.in_dim:
        env_dim *= 2
    big = k.out_dim * env_dim
    # isometry columns: V|a> = sum_i K_i|a> (x) |i>_env
    v = np.zeros((big, k.in_dim), dtype=complex)
    for i, op in enumerate(k.operators):
        for a in range(k.in_dim):
            for b in range(k.out_dim):
                v[b * env_dim + i, a] = op[b, a]
    if k.in_dim <= k.out_dim:
        embed = np.arange(k.in_dim) * env_dim  # |a>_sys (x) |0>_env
    else:
        embed = np.arange(k.in_dim)
    u = np.zeros((big, big), dtype=complex)
    u[:, embed] = v
    remaining = [c for c in range(big) if c not in set(embed.tolist())]
    basis = np.eye(big, dtype=complex)
    filled = [v[:, a] for a in range(k.in_dim)]
    seed_idx = 0
    for col in remaining:
        while True:
            if seed_idx >= big:
                raise RuntimeError("failed to complete Stinespring unitary")
            cand = basis[:, seed_idx].copy()
            seed_idx += 1
            for f in filled:
                cand = cand - f * np.vdot(f, cand)
            nrm = np.linalg.norm(cand)
            if nrm > 1e-6:
                cand = cand / nrm
                break
        u[:, col] = cand
        filled.append(cand)
    return StinespringDilation(unitary=u, env_dim=env_dim, embed_indices=embed)


def channel_to_json(chan) -> dict:
    if isinstance(chan, TransferMatrix):
        return {
            "form": "transfer",
            "in_qubits": chan.in_qubits,
            "out_qubits": chan.out_qubits,
            "matrix": matrix_to_json(chan.matrix),
        }
    if isinstance(chan, ChoiOperator):
        in_q = int(round(np.log2(chan.in_dim)))
        out_q = int(round(np.log2(chan.out_dim)))
        return {
            "form": "choi",
            "in_qubits": in_q,
            "out_qubits": out_q,
            "matrix": matrix_to_json(chan.matrix),
        }
    if isinstance(chan, KrausSet):
        in_q = int(round(np.log2(chan.in_dim)))
        out_q = int(round(np.log2(chan.out_dim)))
        return {
            "form": "kraus",
            "in_qubits": in_q,
            "out_qubits": out_q,
            "operators": [matrix_to_json(op) for op in chan.operators],
        }
    raise TypeError(f"unsupported channel type {type(chan)!r}")


def channel_from_json(obj: dict):
    form = obj["form"]
    in_q, out_q = int(obj["in_qubits"]), int(obj["out_qubits"])
    if form == "transfer":
        return TransferMatrix(
            matrix=matrix_from_json(obj["matrix"]), in_qubits=in_q, out_qubits=out_q
        )
    if form == "choi":
        return ChoiOperator(
            matrix=matrix_from_json(obj["matrix"]), in_dim=2 ** in_q, out_dim=2 ** out_q
        )
    if form == "kraus":
        return KrausSet(operators=[matrix_from_json(m) for m in obj["operators"]])
    raise ValueError(f"unknown channel form {form!r}")


def as_choi(chan) -> ChoiOperator:
    if isinstance(chan, ChoiOperator):
        return chan
    if isinstance(chan, TransferMatrix):
        return transfer_to_choi(chan)
    if isinstance(chan, KrausSet):
        return kraus_to_choi(chan)
    raise TypeError(f"unsupported channel type {type(chan)!r}")
