"""Groups via generating sets, their representations, commutants, and
isotypic decompositions.

Finite groups are handled through unitary generator matrices and closure
under products; compact Lie groups through anti-Hermitian Lie-algebra
generator images.  A representation decomposes as a direct sum of irreps
R_lambda with multiplicities m_lambda under a unitary change of basis W,
which this module computes numerically from a generic commutant element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    OperatorBasis,
    dagger,
    kron,
    kron_all,
    matrix_from_json,
    matrix_to_json,
    nullspace,
    pauli_strings,
    vectorize,
    devectorize,
    PAULI_1Q,
)

FINITE = "finite"
LIE = "lie"


class GroupClosureError(RuntimeError):
    """Generator closure did not terminate within the element bound."""


class DecompositionError(RuntimeError):
    """Eigenvalue clusters could not be separated into irrep blocks."""


@dataclass
class GroupSpec:
    kind: str
    name: str
    generator_labels: list = field(default_factory=list)
    enumeration_bound: int = 4096

    def __post_init__(self):
        if self.kind not in (FINITE, LIE):
            raise ValueError(f"unknown group kind {self.kind!r}")


@dataclass
class Representation:
    group: GroupSpec
    dim: int
    gen_matrices: list
    kernel_hint: str | None = None

    def __post_init__(self):
        self.gen_matrices = [np.asarray(m, dtype=complex) for m in self.gen_matrices]
        for m in self.gen_matrices:
            if m.shape != (self.dim, self.dim):
                raise ValueError("generator matrix dimension mismatch")

    @property
    def is_finite(self) -> bool:
        return self.group.kind == FINITE

    def generator_defect(self) -> float:
        """Unitarity defect (finite) or anti-Hermiticity defect (Lie)."""
        worst = 0.0
        for m in self.gen_matrices:
            if self.is_finite:
                worst = max(worst, np.linalg.norm(dagger(m) @ m - np.eye(self.dim)))
            else:
                worst = max(worst, np.linalg.norm(m + dagger(m)))
        return float(worst)

    def to_json(self) -> dict:
        return {
            "group": self.group.name,
            "dim": self.dim,
            "generators": [matrix_to_json(m) for m in self.gen_matrices],
            "kind": self.group.kind,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Representation":
        gens = [matrix_from_json(m) for m in obj["generators"]]
        spec = GroupSpec(
            kind=obj["kind"],
            name=obj.get("group", "anonymous"),
            generator_labels=[f"g{i}" for i in range(len(gens))],
        )
        return cls(group=spec, dim=int(obj["dim"]), gen_matrices=gens)


@dataclass
class IsotypicBlock:
    label: str
    irrep_dim: int
    multiplicity: int
    start: int

    @property
    def size(self) -> int:
        return self.irrep_dim * self.multiplicity

    @property
    def index_range(self):
        return range(self.start, self.start + self.size)


@dataclass
class IsotypicDecomposition:
    W: np.ndarray
    blocks: list
    residual: float

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    def multiplicity_squares(self) -> int:
        return int(sum(b.multiplicity ** 2 for b in self.blocks))

    def check_counts(self) -> bool:
        return sum(b.size for b in self.blocks) == self.dim


# --------------------------------------------------------------------------
# constructors


def trivial_rep(n_qubits: int, n_generators: int = 1) -> Representation:
    d = 2 ** n_qubits
    spec = GroupSpec(kind=FINITE, name="trivial", generator_labels=["e"] * n_generators)
    return Representation(group=spec, dim=d, gen_matrices=[np.eye(d)] * n_generators)


def su2_defining_rep() -> Representation:
    """su(2) on one qubit with anti-Hermitian generators i*sigma/2."""
    spec = GroupSpec(kind=LIE, name="SU(2)", generator_labels=["x", "y", "z"])
    gens = [0.5j * PAULI_1Q[c] for c in "XYZ"]
    return Representation(group=spec, dim=2, gen_matrices=gens)


def tensor_rep(rep: Representation, copies: int) -> Representation:
    """Tensor-power representation g -> g^(x copies).

    Lie-algebra generators become Kronecker sums over the copies.
    """
    if copies < 1:
        raise ValueError("copies must be >= 1")
    d = rep.dim ** copies
    gens = []
    for g in rep.gen_matrices:
        if rep.is_finite:
            gens.append(kron_all([g] * copies))
        else:
            total = np.zeros((d, d), dtype=complex)
            for pos in range(copies):
                factors = [np.eye(rep.dim)] * copies
                factors[pos] = g
                total += kron_all(factors)
            gens.append(total)
    return Representation(group=rep.group, dim=d, gen_matrices=gens)


def dual_rep(rep: Representation) -> Representation:
    """Entrywise complex conjugate representation."""
    return Representation(
        group=rep.group,
        dim=rep.dim,
        gen_matrices=[np.conj(g) for g in rep.gen_matrices],
    )


def product_rep(a: Representation, b: Representation) -> Representation:
    """Pointwise tensor product of two representations of the same group."""
    if a.group.kind != b.group.kind or len(a.gen_matrices) != len(b.gen_matrices):
        raise ValueError("representations must share group and generator list")
    gens = []
    for ga, gb in zip(a.gen_matrices, b.gen_matrices):
        if a.is_finite:
            gens.append(kron(ga, gb))
        else:
            gens.append(kron(ga, np.eye(b.dim)) + kron(np.eye(a.dim), gb))
    return Representation(group=a.group, dim=a.dim * b.dim, gen_matrices=gens)


def permutation_matrix(perm, n_qubits: int) -> np.ndarray:
    """Unitary sending qubit j's state to position perm[j]."""
    d = 2 ** n_qubits
    m = np.zeros((d, d))
    for b in range(d):
        bits = [(b >> (n_qubits - 1 - j)) & 1 for j in range(n_qubits)]
        new_bits = [0] * n_qubits
        for j in range(n_qubits):
            new_bits[perm[j]] = bits[j]
        b2 = 0
        for j in range(n_qubits):
            b2 = (b2 << 1) | new_bits[j]
        m[b2, b] = 1.0
    return m.astype(complex)


def qubit_permutation_rep(perm_generators, n_qubits: int, name: str = "perm") -> Representation:
    """Representation of a permutation group acting by permuting qubits."""
    gens = [permutation_matrix(p, n_qubits) for p in perm_generators]
    spec = GroupSpec(
        kind=FINITE, name=name, generator_labels=[f"p{i}" for i in range(len(gens))]
    )
    return Representation(group=spec, dim=2 ** n_qubits, gen_matrices=gens)


def symmetric_group_rep(n_qubits: int) -> Representation:
    """S_n acting on n qubits, generated by adjacent transpositions."""
    gens = []
    for i in range(n_qubits - 1):
        perm = list(range(n_qubits))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        gens.append(perm)
    return qubit_permutation_rep(gens, n_qubits, name=f"S{n_qubits}")


def cyclic_shift_rep(n_qubits: int) -> Representation:
    """Z_n shifting qubit j to j+1 mod n."""
    perm = [(j + 1) % n_qubits for j in range(n_qubits)]
    return qubit_permutation_rep([perm], n_qubits, name=f"Z{n_qubits}")


def pauli_string_rep(strings, name: str) -> Representation:
    """Finite representation whose generators are Pauli strings."""
    from .linalg import PauliString

    gens = [PauliString(s).matrix() for s in strings]
    spec = GroupSpec(kind=FINITE, name=name, generator_labels=list(strings))
    return Representation(group=spec, dim=gens[0].shape[0], gen_matrices=gens)


def matrix_rep(matrices, name: str, kind: str = FINITE) -> Representation:
    spec = GroupSpec(
        kind=kind, name=name, generator_labels=[f"g{i}" for i in range(len(matrices))]
    )
    matrices = [np.asarray(m, dtype=complex) for m in matrices]
    return Representation(group=spec, dim=matrices[0].shape[0], gen_matrices=matrices)


# --------------------------------------------------------------------------
# finite group machinery


def enumerate_group(rep: Representation, max_size: int | None = None, tol: float = 1e-8):
    """Closure of the generators under products, deduplicated by matrix
    distance.  Returns a list of (word, matrix) with the identity first.

    Raises :class:`GroupClosureError` if the closure exceeds ``max_size``.
    """
    if not rep.is_finite:
        raise ValueError("enumeration requires a finite group")
    bound = max_size if max_size is not None else rep.group.enumeration_bound
    elements = [("e", np.eye(rep.dim, dtype=complex))]

    def find(m):
        for idx, (_, known) in enumerate(elements):
            if np.linalg.norm(m - known) <= tol * rep.dim:
                return idx
        return None

    labels = rep.group.generator_labels or [f"g{i}" for i in range(len(rep.gen_matrices))]
    for lab, g in zip(labels, rep.gen_matrices):
        if find(g) is None:
            elements.append((lab, g))
    changed = True
    while changed:
        changed = False
        current = list(elements)
        for wa, a in current:
            for lab, g in zip(labels, rep.gen_matrices):
                prod = a @ g
                if find(prod) is None:
                    elements.append((wa + "*" + lab if wa != "e" else lab, prod))
                    changed = True
                    if len(elements) > bound:
                        raise GroupClosureError(
                            f"group closure exceeded bound {bound}"
                        )
    return elements


def multiplication_table(elements, tol: float = 1e-8) -> np.ndarray:
    """Index table t[i, j] with e_i e_j = e_{t[i,j]}."""
    n = len(elements)
    mats = [m for _, m in elements]
    table = np.full((n, n), -1, dtype=int)
    for i in range(n):
        for j in range(n):
            prod = mats[i] @ mats[j]
            for k in range(n):
                if np.linalg.norm(prod - mats[k]) <= tol * prod.shape[0]:
                    table[i, j] = k
                    break
            if table[i, j] < 0:
                raise GroupClosureError("element list is not closed under products")
    return table


def regular_rep(rep: Representation, max_size: int | None = None) -> Representation:
    """Left regular representation built from an enumerated faithful rep."""
    elements = enumerate_group(rep, max_size=max_size)
    table = multiplication_table(elements)
    n = len(elements)
    gen_indices = []
    for g in rep.gen_matrices:
        for k, (_, m) in enumerate(elements):
            if np.linalg.norm(g - m) <= 1e-8 * rep.dim:
                gen_indices.append(k)
                break
    gens = []
    for gi in gen_indices:
        m = np.zeros((n, n))
        for j in range(n):
            m[table[gi, j], j] = 1.0
        gens.append(m.astype(complex))
    spec = GroupSpec(
        kind=FINITE,
        name=f"reg({rep.group.name})",
        generator_labels=rep.group.generator_labels,
    )
    return Representation(group=spec, dim=n, gen_matrices=gens)


def random_group_element(rep: Representation, rng: np.random.Generator, word_length: int = 8) -> np.ndarray:
    """A random element: generator word (finite) or exponential of a random
    algebra combination (Lie, covering the connected component)."""
    if rep.is_finite:
        m = np.eye(rep.dim, dtype=complex)
        for _ in range(word_length):
            m = m @ rep.gen_matrices[rng.integers(len(rep.gen_matrices))]
        return m
    from scipy.linalg import expm

    coeffs = rng.standard_normal(len(rep.gen_matrices)) * np.pi
    a = sum(c * g for c, g in zip(coeffs, rep.gen_matrices))
    return expm(a)


def homomorphism_defect(rep: Representation, rng: np.random.Generator, trials: int = 100, word_length: int = 6) -> float:
    """Max |R(w1)R(w2) - R(w1 w2)| over random generator words."""
    if not rep.is_finite:
        raise ValueError("homomorphism check applies to finite groups")
    worst = 0.0
    for _ in range(trials):
        w1 = rng.integers(len(rep.gen_matrices), size=rng.integers(1, word_length + 1))
        w2 = rng.integers(len(rep.gen_matrices), size=rng.integers(1, word_length + 1))
        m1 = np.eye(rep.dim, dtype=complex)
        for i in w1:
            m1 = m1 @ rep.gen_matrices[i]
        m2 = np.eye(rep.dim, dtype=complex)
        for i in w2:
            m2 = m2 @ rep.gen_matrices[i]
        m12 = np.eye(rep.dim, dtype=complex)
        for i in list(w1) + list(w2):
            m12 = m12 @ rep.gen_matrices[i]
        worst = max(worst, float(np.linalg.norm(m1 @ m2 - m12)))
    return worst


# --------------------------------------------------------------------------
# adjoint actions


def adjoint_superop(u: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Matrix of rho -> u rho u† in the given orthonormal operator basis.

    Uses vec(u e u†) = (conj(u) (x) u) vec(e) under column stacking.
    """
    u = np.asarray(u)
    d = u.shape[0]
    if np.linalg.norm(dagger(u) @ u - np.eye(d)) > 1e-8 * d:
        raise ValueError("adjoint_superop requires a unitary")
    b = basis.vec_mat
    return dagger(b) @ (kron(np.conj(u), u) @ b)


def adjoint_algebra_superop(a: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Matrix of the commutator map rho -> [a, rho] in the given orthonormal
    basis, via vec([a, e]) = (I (x) a - a^T (x) I) vec(e)."""
    a = np.asarray(a)
    d = a.shape[0]
    b = basis.vec_mat
    superop = kron(np.eye(d), a) - kron(a.T, np.eye(d))
    return dagger(b) @ (superop @ b)


# --------------------------------------------------------------------------
# commutant


def commutant_basis(rep: Representation, restrict_weight: int | None = None, tol: float = 1e-9) -> OperatorBasis:
    """Hermitian orthonormal basis of {H : [H, R(g)] = 0 for all generators}.

    With ``restrict_weight`` the solve runs over Pauli strings of bounded
    support only, shrinking the linear system for local problems.
    """
    d = rep.dim
    n_qubits = int(round(np.log2(d)))
    use_pauli_columns = restrict_weight is not None and 2 ** n_qubits == d
    if use_pauli_columns:
        paulis = [p for p in pauli_strings(n_qubits) if p.weight <= restrict_weight]
        columns = [vectorize(p.matrix(normalized=True)) for p in paulis]
        col_mat = np.column_stack(columns)
    else:
        col_mat = np.eye(d * d, dtype=complex)
    rows = []
    for g in rep.gen_matrices:
        # H g - g H = 0  ->  (g^T (x) I - I (x) g) vec(H) = 0; the same
        # constraint applies to group generators and algebra images
        m = kron(g.T, np.eye(d)) - kron(np.eye(d), g)
        rows.append(m @ col_mat)
    stacked = np.vstack(rows)
    null = nullspace(stacked, tol=tol)
    candidates = []
    for v in null.T:
        h = devectorize(col_mat @ v, d, d)
        candidates.append((h + dagger(h)) / 2)
        candidates.append((h - dagger(h)) / 2j)
    # the commutant is *-closed: its Hermitian part has real dimension equal
    # to the complex dimension of the nullspace
    vecs = [vectorize(c) for c in candidates]
    if not vecs:
        return OperatorBasis(elements=[])
    stacked_real = np.column_stack([np.concatenate([v.real, v.imag]) for v in vecs])
    q, s, _ = np.linalg.svd(stacked_real, full_matrices=False)
    rank = int(np.sum(s > 1e-9 * s[0])) if s.size else 0
    elems = []
    for i in range(rank):
        v = q[: d * d, i] + 1j * q[d * d :, i]
        h = devectorize(v, d, d)
        h = (h + dagger(h)) / 2
        elems.append(h / np.linalg.norm(h))
    return OperatorBasis(elements=elems)


# --------------------------------------------------------------------------
# Haar sampling


def haar_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar SU(2) sample from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    q = q / np.linalg.norm(q)
    return (
        q[0] * PAULI_1Q["I"]
        + 1j * q[1] * PAULI_1Q["X"]
        + 1j * q[2] * PAULI_1Q["Y"]
        + 1j * q[3] * PAULI_1Q["Z"]
    )


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar U(d) sample: QR of a Ginibre matrix with phase correction."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph = ph / np.abs(ph)
    return q * ph


def haar_sample(group: str, rng: np.random.Generator, n_qubits: int = 1) -> np.ndarray:
    """Haar sample for SU(2) or U(2**n)."""
    if group.upper() == "SU(2)":
        return haar_su2(rng)
    if group.upper().startswith("U("):
        return haar_unitary(2 ** n_qubits, rng)
    raise ValueError(f"unsupported group {group!r}")


# --------------------------------------------------------------------------
# isotypic decomposition


def _random_commutant_element(rep: Representation, rng: np.random.Generator, basis: OperatorBasis | None = None):
    basis = basis if basis is not None else commutant_basis(rep)
    if len(basis) == 0:
        raise DecompositionError("empty commutant")
    coeffs = rng.standard_normal(len(basis))
    h = sum(c * b for c, b in zip(coeffs, basis.elements))
    return h, basis


def _cluster(values: np.ndarray, gap: float):
    clusters = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > gap:
            clusters.append(slice(start, i))
            start = i
    return clusters


def isotypic_decompose(
    rep: Representation,
    samples: int = 8,
    tol: float = 1e-8,
    cluster_gap: float = 1e-6,
    rng: np.random.Generator | None = None,
) -> IsotypicDecomposition:
    """Numerically block-diagonalize a representation into irreps.

    A generic Hermitian commutant element is diagonalized; its eigenspaces are
    irreducible invariant subspaces (one per eigenvalue, of dimension equal to
    the irrep dimension).  Eigenspaces linked by a commutant element carry
    equivalent irreps and are merged into one isotypic block, aligned by
    Schur intertwiners so R(g) = W† (sum_lambda R_lambda(g) (x) I_m) W.
    """
    rng = rng if rng is not None else np.random.default_rng(7)
    d = rep.dim
    comm = commutant_basis(rep)
    h, _ = _random_commutant_element(rep, rng, comm)
    vals, vecs = np.linalg.eigh(h)
    clusters = _cluster(vals, cluster_gap)
    spaces = [vecs[:, c] for c in clusters]
    # a second generic commutant element links equivalent copies
    b_coeffs = rng.standard_normal(len(comm))
    bmat = sum(c * b for c, b in zip(b_coeffs, comm.elements))
    n_spaces = len(spaces)
    bscale = max(np.linalg.norm(bmat), 1e-12)
    linked = np.zeros((n_spaces, n_spaces), dtype=bool)
    for i in range(n_spaces):
        for j in range(n_spaces):
            block = dagger(spaces[i]) @ bmat @ spaces[j]
            linked[i, j] = np.linalg.norm(block) > 1e-7 * bscale
    # connected components of the link graph = isotypic classes
    classes = []
    unassigned = set(range(n_spaces))
    while unassigned:
        seed = min(unassigned)
        members = {seed}
        frontier = {seed}
        while frontier:
            nxt = set()
            for i in frontier:
                for j in range(n_spaces):
                    if (linked[i, j] or linked[j, i]) and j not in members:
                        nxt.add(j)
            members |= nxt
            frontier = nxt
        classes.append(sorted(members))
        unassigned -= members
    for cls in classes:
        dims = {spaces[i].shape[1] for i in cls}
        if len(dims) != 1:
            raise DecompositionError(
                f"inconsistent eigenspace dimensions {sorted(dims)} within one "
                "isotypic class; retry with another seed or a smaller cluster gap"
            )
    classes.sort(key=lambda cls: (-spaces[cls[0]].shape[1], cls[0]))
    columns = []
    blocks = []
    start = 0
    for idx, cls in enumerate(classes):
        ref_idx = cls[0]
        d_l = spaces[ref_idx].shape[1]
        m_l = len(cls)
        # align every copy to the reference frame, walking the link graph so
        # copies only indirectly linked to the reference still get aligned
        aligned = {ref_idx: spaces[ref_idx]}
        pending = set(cls[1:])
        while pending:
            progressed = False
            for j in sorted(pending):
                for p in sorted(aligned):
                    t = dagger(spaces[j]) @ bmat @ aligned[p]
                    scale = np.sqrt(max(np.trace(dagger(t) @ t).real, 0.0) / d_l)
                    if scale > 1e-7:
                        aligned[j] = spaces[j] @ (t / scale)
                        pending.discard(j)
                        progressed = True
                        break
                if progressed:
                    break
            if not progressed:
                raise DecompositionError("vanishing intertwiner between copies")
        copies = [aligned[ref_idx]] + [aligned[j] for j in cls[1:]]
        # order basis vectors irrep-index major: R acts as R_lambda (x) I_m
        for a in range(d_l):
            for copy in copies:
                columns.append(copy[:, a])
        blocks.append(
            IsotypicBlock(label=f"b{idx}", irrep_dim=d_l, multiplicity=m_l, start=start)
        )
        start += d_l * m_l
    w = dagger(np.column_stack(columns))
    residual = decomposition_residual(rep, IsotypicDecomposition(W=w, blocks=blocks, residual=0.0), samples=samples, rng=rng)
    if residual > tol:
        raise DecompositionError(
            f"block-diagonalization residual {residual:.3e} exceeds tol {tol:.1e}"
        )
    return IsotypicDecomposition(W=w, blocks=blocks, residual=residual)


def decomposition_residual(
    rep: Representation,
    deco: IsotypicDecomposition,
    samples: int = 8,
    rng: np.random.Generator | None = None,
) -> float:
    """Worst block-diagonality defect of W R(g) W† over sampled elements.

    Checks both that off-block entries vanish and that each block factorizes
    as R_lambda(g) (x) I_m.
    """
    rng = rng if rng is not None else np.random.default_rng(11)
    w = deco.W
    worst = 0.0
    mats = [random_group_element(rep, rng) for _ in range(samples)]
    if rep.is_finite:
        mats.extend(rep.gen_matrices)
    for g in mats:
        big = w @ g @ dagger(w)
        recon = np.zeros_like(big)
        for b in deco.blocks:
            sl = slice(b.start, b.start + b.size)
            block = big[sl, sl]
            t = block.reshape(b.irrep_dim, b.multiplicity, b.irrep_dim, b.multiplicity)
            # average over the multiplicity index to estimate R_lambda(g)
            r_l = np.trace(t, axis1=1, axis2=3) / b.multiplicity
            recon[sl, sl] = np.kron(r_l, np.eye(b.multiplicity))
        worst = max(worst, float(np.linalg.norm(big - recon)))
    return worst


def kernel_dimension_lie(rep: Representation, tol: float = 1e-9) -> int:
    """Dimension of {a in algebra span : r(a) = 0}."""
    cols = np.column_stack([vectorize(g) for g in rep.gen_matrices])
    ns = nullspace(cols, tol=tol)
    return ns.shape[1]


def kernel_elements_finite(r_in: Representation, r_out: Representation, max_size: int | None = None):
    """Joint enumeration of (R_in(w), R_out(w)); returns kernel index sets."""
    if len(r_in.gen_matrices) != len(r_out.gen_matrices):
        raise ValueError("representations must share the generator list")
    d1, d2 = r_in.dim, r_out.dim
    bound = max_size if max_size is not None else r_in.group.enumeration_bound
    pairs = [(np.eye(d1, dtype=complex), np.eye(d2, dtype=complex))]

    def find(a, b):
        for idx, (ka, kb) in enumerate(pairs):
            if (
                np.linalg.norm(a - ka) <= 1e-8 * d1
                and np.linalg.norm(b - kb) <= 1e-8 * d2
            ):
                return idx
        return None

    changed = True
    while changed:
        changed = False
        for pa, pb in list(pairs):
            for ga, gb in zip(r_in.gen_matrices, r_out.gen_matrices):
                qa, qb = pa @ ga, pb @ gb
                if find(qa, qb) is None:
                    pairs.append((qa, qb))
                    changed = True
                    if len(pairs) > bound:
                        raise GroupClosureError("pair closure exceeded bound")
    ker_in = {
        i for i, (a, _) in enumerate(pairs) if np.linalg.norm(a - np.eye(d1)) <= 1e-8 * d1
    }
    ker_out = {
        i for i, (_, b) in enumerate(pairs) if np.linalg.norm(b - np.eye(d2)) <= 1e-8 * d2
    }
    return ker_in, ker_out, len(pairs)
