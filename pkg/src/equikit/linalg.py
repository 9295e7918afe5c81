"""Dense complex linear algebra, Pauli bases, and vectorization conventions.

All superoperator matrices in the package use the column-stacking
vectorization, for which ``vec(A X B) = (B.T kron A) vec(X)``.  Every other
module builds on the helpers here, so the convention is fixed once and only
here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-10

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

PAULI_LETTERS = "IXYZ"


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(matrices) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in matrices:
        out = np.kron(out, m)
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.linalg.norm(m - dagger(m)) <= tol * max(1.0, np.linalg.norm(m)))


def is_unitary(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    d = m.shape[0]
    return bool(np.linalg.norm(dagger(m) @ m - np.eye(d)) <= tol * d)


def vectorize(m: np.ndarray) -> np.ndarray:
    """Column-stacking vec: entry (i, j) lands at position j*rows + i."""
    return np.asarray(m).reshape(-1, order="F")


def devectorize(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    v = np.asarray(v).ravel()
    if cols is None:
        cols = v.size // rows
    if rows * cols != v.size:
        raise ValueError(f"cannot reshape vector of size {v.size} to {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def partial_trace(m: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out the subsystems not listed in ``keep``.

    ``dims`` are the subsystem dimensions in tensor order; their product must
    equal the matrix dimension.
    """
    m = np.asarray(m)
    dims = list(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    keep = sorted(keep)
    n = len(dims)
    tensor = m.reshape(dims + dims)
    # contract (row, col) axis pairs of discarded subsystems, highest first so
    # the remaining axis numbers stay valid
    n_left = n
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        tensor = np.trace(tensor, axis1=ax, axis2=ax + n_left)
        n_left -= 1
    kept = int(np.prod([dims[i] for i in keep])) if keep else 1
    return tensor.reshape(kept, kept)


@dataclass
class PauliString:
    """A tensor product of single-qubit Paulis, e.g. ``XZI``."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in PAULI_LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli string {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(1 for c in self.letters if c != "I")

    def matrix(self, normalized: bool = False) -> np.ndarray:
        m = kron_all(PAULI_1Q[c] for c in self.letters)
        if normalized:
            m = m / np.sqrt(2.0 ** self.n_qubits)
        return m


@dataclass
class OperatorBasis:
    """An ordered list of matrices spanning an operator space."""

    elements: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    _gram: np.ndarray | None = field(default=None, repr=False)
    _vec_mat: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    @property
    def vec_mat(self) -> np.ndarray:
        """Matrix whose columns are the vectorized basis elements."""
        if self._vec_mat is None or self._vec_mat.shape[1] != len(self.elements):
            self._vec_mat = np.column_stack([vectorize(e) for e in self.elements])
        return self._vec_mat

    @property
    def gram(self) -> np.ndarray:
        """Pairwise Hilbert-Schmidt inner products Tr[E_i† E_j]."""
        if self._gram is None or self._gram.shape[0] != len(self.elements):
            k = len(self.elements)
            g = np.empty((k, k), dtype=complex)
            for i, a in enumerate(self.elements):
                for j, b in enumerate(self.elements):
                    g[i, j] = np.trace(dagger(a) @ b)
            self._gram = g
        return self._gram

    def is_independent(self, tol: float = 1e-9) -> bool:
        g = self.gram
        if g.size == 0:
            return True
        svals = np.linalg.svd(g, compute_uv=False)
        return bool(svals[-1] > tol * svals[0])


def pauli_strings(n: int):
    """All n-qubit Pauli strings in lexicographic order I < X < Y < Z per site."""
    for combo in itertools.product(PAULI_LETTERS, repeat=n):
        yield PauliString("".join(combo))


def pauli_basis(n: int) -> OperatorBasis:
    """Orthonormal Pauli basis: 4**n strings with Tr[P_i P_j] = delta_ij."""
    if n < 1:
        raise ValueError("n must be >= 1")
    elems, labels = [], []
    for p in pauli_strings(n):
        elems.append(p.matrix(normalized=True))
        labels.append(p.letters)
    return OperatorBasis(elements=elems, labels=labels)


def pauli_vec_matrix(n: int) -> np.ndarray:
    """Unitary whose columns are vec'd normalized Pauli strings.

    Maps Pauli-basis coordinates of an operator to its column-stacked
    computational-basis vectorization.
    """
    d2 = 4 ** n
    cols = [vectorize(p.matrix(normalized=True)) for p in pauli_strings(n)]
    return np.column_stack(cols).reshape(d2, d2)


def expand_in_basis(m: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Coefficients c with m = sum_i c_i basis[i], for an orthonormal basis."""
    return np.array([np.trace(dagger(e) @ m) for e in basis.elements])


def nullspace(m: np.ndarray, tol: float = 1e-9, atol: float = 1e-12) -> np.ndarray:
    """Orthonormal kernel basis (as columns) via SVD.

    Singular values sigma_k <= tol * sigma_max count as zero.  A matrix whose
    largest singular value falls below ``atol`` counts as the zero matrix
    (full kernel), so roundoff-sized constraints impose nothing.  An empty
    (d, 0) matrix is returned for full-rank input.
    """
    m = np.atleast_2d(np.asarray(m))
    if m.size == 0:
        return np.eye(m.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(m)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > atol else 0
    return vh[rank:].conj().T


def hermitian_eig(m: np.ndarray, tol: float = 1e-8):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix."""
    m = np.asarray(m)
    if not is_hermitian(m, tol):
        raise ValueError("input is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh((m + dagger(m)) / 2)
    return vals, vecs


def svd(m: np.ndarray):
    return np.linalg.svd(np.asarray(m))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + dagger(a)) / 2


def random_density_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ dagger(a)
    return rho / np.trace(rho)


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def orthonormal_columns(vectors, tol: float = 1e-9) -> np.ndarray:
    """Orthonormalize a list of vectors, dropping dependent ones."""
    a = np.column_stack([np.asarray(v).ravel() for v in vectors])
    q, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > tol * (s[0] if s.size else 1.0)))
    return q[:, :rank]


def span_projector(vectors, tol: float = 1e-9) -> np.ndarray:
    """Orthogonal projector onto the complex span of the given vectors."""
    q = orthonormal_columns(vectors, tol)
    return q @ dagger(q)


def matrix_to_json(m: np.ndarray) -> dict:
    """Serialize a matrix as {"rows", "cols", "data": [[re, im], ...]} row-major."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    data = [[float(x.real), float(x.imag)] for x in m.reshape(-1, order="C")]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise ValueError("matrix JSON data length does not match rows*cols")
    flat = np.array([complex(re, im) for re, im in data])
    return flat.reshape(rows, cols, order="C")
