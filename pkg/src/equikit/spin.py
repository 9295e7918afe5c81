"""Bond-alternating Heisenberg chains, ground states, and labeled datasets.

H = J1 sum_{i even} S_i . S_{i+1} + J2 sum_{i odd} S_i . S_{i+1} with
S = (X, Y, Z)/2, open boundary, 0-based sites, bond i joining sites i and
i+1.  The coupling ratio alpha = J2/J1 drives a transition at alpha = 1:
alpha < 1 is labeled 1, alpha > 1 is labeled 0.

The Hamiltonian is applied matrix-free through bit masks so chains up to a
dozen-plus qubits stay cheap inside Lanczos.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

TRIVIAL = 1
TOPOLOGICAL = 0


@dataclass
class HeisenbergSpec:
    n: int
    j1: float = 1.0
    j2: float = 1.0
    boundary: str = "open"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two sites")
        if self.j1 <= 0 or self.j2 < 0:
            raise ValueError("couplings must satisfy j1 > 0, j2 >= 0")
        if self.boundary != "open":
            raise ValueError("only open boundaries are supported")

    @property
    def alpha(self) -> float:
        return self.j2 / self.j1


class HeisenbergOperator:
    """Matrix-free bond-alternating Heisenberg Hamiltonian.

    Each bond contributes J/4 * (diagonal ZZ sign) plus J/2 hopping between
    basis states whose bits differ on the bond.
    """

    def __init__(self, spec: HeisenbergSpec):
        self.spec = spec
        n = spec.n
        dim = 2 ** n
        self.dim = dim
        states = np.arange(dim, dtype=np.int64)
        self.diagonal = np.zeros(dim)
        self._flip_targets = []
        self._flip_coeffs = []
        for bond in range(n - 1):
            j = spec.j1 if bond % 2 == 0 else spec.j2
            # bit positions: site s is bit (n - 1 - s) so site 0 is leftmost
            b1 = n - 1 - bond
            b2 = n - 1 - (bond + 1)
            s1 = 1 - 2 * ((states >> b1) & 1)
            s2 = 1 - 2 * ((states >> b2) & 1)
            self.diagonal += (j / 4.0) * s1 * s2
            differ = ((states >> b1) & 1) != ((states >> b2) & 1)
            flipped = states ^ ((1 << b1) | (1 << b2))
            self._flip_targets.append((differ, flipped[differ]))
            self._flip_coeffs.append(j / 2.0)

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        for (mask, targets), coeff in zip(self._flip_targets, self._flip_coeffs):
            src = np.nonzero(mask)[0]
            out_add = np.zeros_like(out)
            np.add.at(out_add, targets, coeff * v[src])
            out += out_add
        return out

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(
            (self.dim, self.dim), matvec=self.apply, dtype=float
        )

    def to_dense(self) -> np.ndarray:
        if self.dim > 4096:
            raise MemoryError("dense Hamiltonian requested above 12 qubits")
        cols = [self.apply(np.eye(self.dim)[:, i]) for i in range(self.dim)]
        return np.column_stack(cols).astype(complex)


def build_hamiltonian(spec: HeisenbergSpec) -> HeisenbergOperator:
    return HeisenbergOperator(spec)


@dataclass
class GroundStateResult:
    energies: np.ndarray
    states: np.ndarray  # columns
    degeneracy: int
    residuals: list = field(default_factory=list)


def ground_states(
    spec: HeisenbergSpec, k: int = 2, gap_tol: float = 1e-6, seed: int = 0
) -> GroundStateResult:
    """Lowest-k eigenpairs via Lanczos (dense fallback for tiny chains)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    op = build_hamiltonian(spec)
    if op.dim <= 16 or k >= op.dim - 1:
        dense = op.to_dense().real
        vals, vecs = np.linalg.eigh(dense)
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(op.dim)
        vals, vecs = eigsh(op.as_linear_operator(), k=k, which="SA", v0=v0)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    residuals = [
        float(np.linalg.norm(op.apply(vecs[:, i]) - vals[i] * vecs[:, i]))
        for i in range(len(vals))
    ]
    degeneracy = int(np.sum(vals <= vals[0] + gap_tol))
    return GroundStateResult(
        energies=vals, states=vecs.astype(complex), degeneracy=degeneracy,
        residuals=residuals,
    )


def phase_label(alpha: float) -> int:
    """1 below the transition at alpha = 1, 0 above; the critical point is
    rejected."""
    if alpha == 1:
        raise ValueError("alpha = 1 is the critical point and carries no label")
    return TRIVIAL if alpha < 1 else TOPOLOGICAL


@dataclass
class Dataset:
    n: int
    entries: list  # (state vector, alpha, label)

    def __len__(self):
        return len(self.entries)

    def states(self):
        return [e[0] for e in self.entries]

    def alphas(self):
        return np.array([e[1] for e in self.entries])

    def labels(self):
        return np.array([e[2] for e in self.entries])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                {
                    "alpha": float(alpha),
                    "label": int(label),
                    "state": [[float(x.real), float(x.imag)] for x in state],
                }
                for state, alpha, label in self.entries
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Dataset":
        entries = []
        for e in obj["entries"]:
            state = np.array([complex(re, im) for re, im in e["state"]])
            entries.append((state, float(e["alpha"]), int(e["label"])))
        return cls(n=int(obj["n"]), entries=entries)


def alpha_grid(count: int, alpha_range=(0.0, 2.0)) -> np.ndarray:
    """Midpoint grid over the range; the critical value must not land on it."""
    if count < 2:
        raise ValueError("need at least two points")
    lo, hi = alpha_range
    grid = lo + (np.arange(count) + 0.5) * (hi - lo) / count
    if np.any(np.abs(grid - 1.0) < 1e-12):
        raise ValueError(
            "grid hits the critical point alpha = 1; change count or range"
        )
    return grid


def make_dataset(
    n: int,
    count: int,
    alpha_range=(0.0, 2.0),
    seed: int = 0,
    degenerate_policy: str = "random-in-space",
    j1: float = 1.0,
) -> Dataset:
    """Homogeneously spaced alphas with one labeled ground state per value.

    In degenerate ground spaces the returned state is either the solver's
    first vector or a seeded random unit combination spanning the space.
    """
    if degenerate_policy not in ("first", "random-in-space"):
        raise ValueError(f"unknown degenerate policy {degenerate_policy!r}")
    rng = np.random.default_rng(seed)
    entries = []
    for alpha in alpha_grid(count, alpha_range):
        spec = HeisenbergSpec(n=n, j1=j1, j2=alpha * j1)
        k = min(4, 2 ** n - 2) if n >= 3 else 2
        res = ground_states(spec, k=max(2, k), seed=seed)
        if res.degeneracy > 1 and degenerate_policy == "random-in-space":
            coeffs = rng.standard_normal(res.degeneracy) + 1j * rng.standard_normal(
                res.degeneracy
            )
            coeffs /= np.linalg.norm(coeffs)
            state = res.states[:, : res.degeneracy] @ coeffs
        else:
            state = res.states[:, 0]
        state = state / np.linalg.norm(state)
        entries.append((state, float(alpha), phase_label(alpha)))
    return Dataset(n=n, entries=entries)
