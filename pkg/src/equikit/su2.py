"""SU(2)-specific constructions: SWAP-generated convolutions, the five
2-to-1 pooling maps, the CPTP feasible region in (x, y, z), its Euclidean
projection, cross-product channels, and 1-to-2 embeddings.

The 2-to-1 pooling family is phi(x, y, z) = phi1 + x*phi5 + y*phi3' + z*phi4'
where phi1 replaces the input with the maximally mixed state, phi3'/phi4' are
trace-annihilating partial traces and phi5 is the cross-product map.  The
linear combination is a channel iff

    y + z <= 1   and   y + z >= sqrt(3x^2 + 4(y^2 - yz + z^2)) - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import PAULI_1Q, dagger, kron, partial_trace
from .channels import ChoiOperator, TransferMatrix, transfer_to_choi

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

_EPSILON = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _EPSILON[_i, _j, _k] = 1.0
    _EPSILON[_j, _i, _k] = -1.0

_SIGMA = [PAULI_1Q["X"], PAULI_1Q["Y"], PAULI_1Q["Z"]]


@dataclass
class PoolParams:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "PoolParams":
        return cls(x=float(a[0]), y=float(a[1]), z=float(a[2]))


def swap_conv_unitary(theta: float) -> np.ndarray:
    """Two-qubit convolution gate exp(-i theta SWAP)."""
    # SWAP has eigenvalues +/-1, so the exponential is cos - i sin * SWAP
    return np.cos(theta) * np.eye(4, dtype=complex) - 1j * np.sin(theta) * SWAP


def _pauli_index(letters: str) -> int:
    order = "IXYZ"
    idx = 0
    for c in letters:
        idx = idx * 4 + order.index(c)
    return idx


def _transfer(mat: np.ndarray) -> TransferMatrix:
    return TransferMatrix(matrix=mat, in_qubits=2, out_qubits=1)


def pool_map_transfers() -> dict:
    """The named 2-to-1 equivariant maps as normalized-Pauli transfer matrices.

    phi1: rho -> Tr[rho] I/2              (trace preserving)
    phi2: rho -> Tr[rho SWAP] I/2         (trace altering; unphysical alone)
    phi3: rho -> Tr_A[rho]                (trace preserving)
    phi4: rho -> Tr_B[rho]                (trace preserving)
    phi5: rho -> sum Tr[rho s_i (x) s_j] eps_ijk s_k   (trace annihilating)
    phi3p/phi4p: partial traces minus their identity-to-identity term.
    """
    sq2 = np.sqrt(2.0)
    t1 = np.zeros((4, 16), dtype=complex)
    t1[0, 0] = sq2

    t2 = np.zeros((4, 16), dtype=complex)
    for letters in ("II", "XX", "YY", "ZZ"):
        t2[0, _pauli_index(letters)] = 1 / sq2

    t3 = np.zeros((4, 16), dtype=complex)
    for i, c in enumerate("IXYZ"):
        t3[i, _pauli_index("I" + c)] = sq2

    t4 = np.zeros((4, 16), dtype=complex)
    for i, c in enumerate("IXYZ"):
        t4[i, _pauli_index(c + "I")] = sq2

    t5 = np.zeros((4, 16), dtype=complex)
    letters = "XYZ"
    for a in range(3):
        for b in range(3):
            for k in range(3):
                if _EPSILON[a, b, k] != 0:
                    col = _pauli_index(letters[a] + letters[b])
                    t5[1 + k, col] += 2 * sq2 * _EPSILON[a, b, k]

    t3p = t3.copy()
    t3p[0, 0] = 0.0
    t4p = t4.copy()
    t4p[0, 0] = 0.0
    return {
        "phi1": _transfer(t1),
        "phi2": _transfer(t2),
        "phi3": _transfer(t3),
        "phi4": _transfer(t4),
        "phi5": _transfer(t5),
        "phi3p": _transfer(t3p),
        "phi4p": _transfer(t4p),
    }


def su2_pool_basis():
    """Equivariant basis of 2-to-1 maps with trace tags.

    phi2 is flagged trace-altering and excluded from channel combinations.
    """
    from .solvers import EquivariantBasis
    from .channels import trace_tag

    maps = pool_map_transfers()
    names = ["phi1", "phi2", "phi3", "phi4", "phi5"]
    elements = [maps[n] for n in names]
    tags = [trace_tag(t) for t in elements]
    return EquivariantBasis(
        elements=elements, trace_tags=tags, provenance="closed-form", residuals=[]
    ), names


_POOL_CHOI_CACHE: dict = {}


def _pool_chois():
    if not _POOL_CHOI_CACHE:
        maps = pool_map_transfers()
        for name in ("phi1", "phi5", "phi3p", "phi4p"):
            _POOL_CHOI_CACHE[name] = transfer_to_choi(maps[name]).matrix
    return _POOL_CHOI_CACHE


# the (x, y, z) region formula is stated for the cross-product map at 1/4 of
# its literal normalization; with the literal map the pure-x extent would be
# 1/(4*sqrt(3)) instead of 1/sqrt(3)
CROSS_PRODUCT_POOL_SCALE = 0.25


def pool_channel(p: PoolParams) -> ChoiOperator:
    """Choi operator of phi1 + x (phi5/4) + y phi3' + z phi4'; TP by
    construction, CP exactly on the closed-form feasible region."""
    c = _pool_chois()
    j = (
        c["phi1"]
        + p.x * CROSS_PRODUCT_POOL_SCALE * c["phi5"]
        + p.y * c["phi3p"]
        + p.z * c["phi4p"]
    )
    return ChoiOperator(matrix=j, in_dim=4, out_dim=2)


def feasible_contains(p: PoolParams, tol: float = 0.0) -> bool:
    """Closed-form membership test of the CPTP region."""
    x, y, z = p.x, p.y, p.z
    lhs = y + z
    rad = np.sqrt(3 * x * x + 4 * (y * y - y * z + z * z))
    return bool(lhs <= 1 + tol and lhs >= rad - 1 - tol)


def feasible_boundary_distance(p: PoolParams) -> float:
    """Signed margin of the binding constraint: positive inside, zero on the
    boundary, negative outside."""
    x, y, z = p.x, p.y, p.z
    g1 = 1.0 - (y + z)
    g2 = (y + z) + 1.0 - np.sqrt(3 * x * x + 4 * (y * y - y * z + z * z))
    return float(min(g1, g2))


# quadratic form of the squared boundary constraint:
# f(p) = 3x^2 + 3y^2 + 3z^2 - 6yz - 2y - 2z - 1 <= 0  iff  the sqrt constraint
# holds (f <= 0 forces 1 + y + z >= 0, so squaring is lossless)
_QUAD_Q = np.array([[3.0, 0.0, 0.0], [0.0, 3.0, -3.0], [0.0, -3.0, 3.0]])
_QUAD_B = np.array([0.0, -2.0, -2.0])
_QUAD_C = -1.0


def _quad_value(v: np.ndarray) -> float:
    return float(v @ _QUAD_Q @ v + _QUAD_B @ v + _QUAD_C)


def _project_halfspace(v: np.ndarray) -> np.ndarray:
    # y + z <= 1 with normal (0, 1, 1)/sqrt(2)
    excess = v[1] + v[2] - 1.0
    if excess <= 0:
        return v
    return v - excess / 2.0 * np.array([0.0, 1.0, 1.0])


def _project_quadratic(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection onto {f <= 0} via the KKT parameterization
    p(l) = (I + l Q)^-1 (v - l b / 2) and a bisection on f(p(l)) = 0."""
    if _quad_value(v) <= 0:
        return v

    def point(lam: float) -> np.ndarray:
        return np.linalg.solve(np.eye(3) + lam * _QUAD_Q, v - lam * _QUAD_B / 2.0)

    lo, hi = 0.0, 1.0
    while _quad_value(point(hi)) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("quadratic projection failed to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _quad_value(point(mid)) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    return point(hi)


class ProjectionError(RuntimeError):
    pass


def project_to_feasible(
    p: PoolParams, tol: float = 1e-9, max_iter: int = 10000
) -> PoolParams:
    """Euclidean-nearest feasible point by Dykstra's alternating projections
    between the y+z <= 1 halfspace and the quadratic sublevel set.

    Both sets are closed and convex, so the iteration converges to the exact
    projection; feasible inputs are returned unchanged.
    """
    v0 = p.as_array()
    if feasible_contains(p, tol=1e-12):
        return p
    x = v0.copy()
    q1 = np.zeros(3)
    q2 = np.zeros(3)
    prev = x.copy()
    for it in range(max_iter):
        y = _project_halfspace(x + q1)
        q1 = x + q1 - y
        x = _project_quadratic(y + q2)
        q2 = y + q2 - x
        if it > 0 and np.linalg.norm(x - prev) < tol:
            break
        prev = x.copy()
    else:
        raise ProjectionError("projection did not converge within iteration cap")
    out = x.copy()
    # the origin is interior, so shrinking toward it repairs boundary roundoff
    for _ in range(60):
        candidate = PoolParams.from_array(out)
        if feasible_contains(candidate, tol=0.0):
            return candidate
        out *= 1 - 1e-10
    return PoolParams.from_array(out)


def cross_product_channel(rho: np.ndarray) -> np.ndarray:
    """rho -> sum_ijk Tr[rho s_i (x) s_j] eps_ijk s_k (trace annihilating)."""
    rho = np.asarray(rho)
    out = np.zeros((2, 2), dtype=complex)
    for i in range(3):
        for j in range(3):
            coeff = np.trace(rho @ kron(_SIGMA[i], _SIGMA[j]))
            for k in range(3):
                if _EPSILON[i, j, k] != 0:
                    out += coeff * _EPSILON[i, j, k] * _SIGMA[k]
    return out


def cross_product_prime(rho: np.ndarray) -> np.ndarray:
    """Variant i sum Tr[rho SWAP s_i (x) s_j] eps_ijk s_k (Hermitian output)."""
    rho = np.asarray(rho)
    out = np.zeros((2, 2), dtype=complex)
    for i in range(3):
        for j in range(3):
            coeff = np.trace(rho @ SWAP @ kron(_SIGMA[i], _SIGMA[j]))
            for k in range(3):
                if _EPSILON[i, j, k] != 0:
                    out += 1j * coeff * _EPSILON[i, j, k] * _SIGMA[k]
    return out


def alpha_feasible(alpha: float, tol: float = 1e-9) -> bool:
    """Whether depolarize + alpha * cross-product is a channel."""
    return bool(abs(alpha) <= 1 / np.sqrt(3) + tol)


def one_to_two_basis():
    """Basis of 1-to-2 equivariant maps: Hilbert-Schmidt adjoints of the five
    2-to-1 maps (self-duality of the representations)."""
    from .solvers import EquivariantBasis
    from .channels import trace_tag

    maps = pool_map_transfers()
    names = ["phi1", "phi2", "phi3", "phi4", "phi5"]
    elements = []
    for n in names:
        t = maps[n]
        elements.append(
            TransferMatrix(matrix=t.matrix.conj().T, in_qubits=1, out_qubits=2)
        )
    tags = [trace_tag(t) for t in elements]
    return EquivariantBasis(
        elements=elements, trace_tags=tags, provenance="closed-form", residuals=[]
    ), [n + "_adj" for n in names]


def one_to_two_map(a: float, b: float, c: float, d: float) -> TransferMatrix:
    """The trace-preserving 1-to-2 family.

    For rho = (I + sigma.r)/2 the image is I/4 + (a/2)(XX+YY+ZZ)
    + (b/2) I (x) (sigma.r) + (c/2) (sigma.r) (x) I
    + (d/2) r . (YZ-ZY, ZX-XZ, XY-YX).
    """
    t = np.zeros((16, 4), dtype=complex)
    # Tr-preserving part: I/2 -> I (x) I / 4, i.e. P0_out gets sqrt(1/2) P0_in
    t[0, 0] = np.sqrt(0.5)
    letters = "XYZ"
    sq2 = np.sqrt(2.0)
    # a-term: independent of r beyond the trace: I/2 -> (a/2)(XX+YY+ZZ)
    for i in range(3):
        col = _pauli_index(letters[i] + letters[i])
        t[col, 0] += a * sq2
    for r_idx in range(3):
        # b-term: I (x) sigma_r
        t[_pauli_index("I" + letters[r_idx]), 1 + r_idx] += b * sq2
        # c-term: sigma_r (x) I
        t[_pauli_index(letters[r_idx] + "I"), 1 + r_idx] += c * sq2
        # d-term: commutator-type component
        for i in range(3):
            for j in range(3):
                if _EPSILON[i, j, r_idx] != 0:
                    col = _pauli_index(letters[i] + letters[j])
                    t[col, 1 + r_idx] += d * sq2 * _EPSILON[i, j, r_idx]
    return TransferMatrix(matrix=t, in_qubits=1, out_qubits=2)


class TwoToTwoFamily:
    """Choi-block parameterized CP family of 2-to-2 equivariant maps.

    J = W† [(I_5 (x) A) (+) (I_3 (x) B) (+) C] W with A >= 0 scalar, B a 3x3
    PSD matrix and C a 2x2 PSD matrix, in the isotypic basis of the conjugate
    pair representation; 1 + 9 + 4 = 14 real parameters.
    """

    def __init__(self, rng: np.random.Generator | None = None):
        from .grouprep import (
            dual_rep,
            isotypic_decompose,
            product_rep,
            su2_defining_rep,
            tensor_rep,
        )

        su2 = su2_defining_rep()
        t2 = tensor_rep(su2, 2)
        rep = product_rep(dual_rep(t2), t2)
        self.decomposition = isotypic_decompose(
            rep, rng=rng if rng is not None else np.random.default_rng(29)
        )
        blocks = sorted(
            self.decomposition.blocks, key=lambda b: -b.irrep_dim
        )
        expected = [(5, 1), (3, 3), (1, 2)]
        got = [(b.irrep_dim, b.multiplicity) for b in blocks]
        if got != expected:
            raise RuntimeError(f"unexpected block structure {got}")
        self.blocks = blocks

    @property
    def n_parameters(self) -> int:
        return sum(b.multiplicity ** 2 for b in self.blocks)

    def choi(self, a: float, b_mat: np.ndarray, c_mat: np.ndarray) -> ChoiOperator:
        b_mat = np.asarray(b_mat, dtype=complex)
        c_mat = np.asarray(c_mat, dtype=complex)
        if a < -1e-12:
            raise ValueError("A block must be a non-negative scalar")
        for name, m, size in (("B", b_mat, 3), ("C", c_mat, 2)):
            if m.shape != (size, size):
                raise ValueError(f"{name} block must be {size}x{size}")
            vals = np.linalg.eigvalsh((m + dagger(m)) / 2)
            if vals[0] < -1e-9:
                raise ValueError(f"{name} block must be PSD")
        w = self.decomposition.W
        inner = np.zeros((16, 16), dtype=complex)
        payload = {5: np.array([[a]], dtype=complex), 3: b_mat, 1: c_mat}
        for blk in self.blocks:
            sl = slice(blk.start, blk.start + blk.size)
            inner[sl, sl] = np.kron(np.eye(blk.irrep_dim), payload[blk.irrep_dim])
        j = dagger(w) @ inner @ w
        return ChoiOperator(matrix=j, in_dim=4, out_dim=4)

    def blocks_of(self, j: ChoiOperator):
        """Extract (A, B, C) from an equivariant Choi operator."""
        w = self.decomposition.W
        inner = w @ j.matrix @ dagger(w)
        out = {}
        for blk in self.blocks:
            sl = slice(blk.start, blk.start + blk.size)
            t = inner[sl, sl].reshape(
                blk.irrep_dim, blk.multiplicity, blk.irrep_dim, blk.multiplicity
            )
            out[blk.irrep_dim] = np.trace(t, axis1=0, axis2=2) / blk.irrep_dim
        return float(out[5][0, 0].real), out[3], out[1]

    def is_tp(self, j: ChoiOperator, tol: float = 1e-9) -> bool:
        red = partial_trace(j.matrix, [4, 4], keep=[0])
        return bool(np.linalg.norm(red - np.eye(4)) <= tol * 4)


def two_to_two_family(rng: np.random.Generator | None = None) -> TwoToTwoFamily:
    return TwoToTwoFamily(rng=rng)
