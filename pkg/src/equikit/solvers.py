"""Construction of equivariant map spaces by nullspace, twirling, and
Choi-block methods, plus parameter counting and layer taxonomy.

An equivariant map phi satisfies phi o Ad_{R_in(g)} = Ad_{R_out(g)} o phi for
every group element.  It is enough to impose the constraint on a generating
set (group generators for finite groups, Lie-algebra generators otherwise);
each generator contributes one linear constraint matrix whose joint nullspace
is the space of all equivariant linear maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    OperatorBasis,
    dagger,
    devectorize,
    kron,
    nullspace,
    pauli_basis,
    pauli_strings,
    span_projector,
    vectorize,
)
from .channels import (
    ChoiOperator,
    TransferMatrix,
    choi_to_transfer,
    trace_tag,
)
from .grouprep import (
    Representation,
    adjoint_algebra_superop,
    adjoint_superop,
    haar_su2,
    isotypic_decompose,
)

GROUP_LEVEL = "group"
ALGEBRA_LEVEL = "algebra"


@dataclass
class EquivarianceProblem:
    """A group with aligned input and output representations.

    ``level`` selects whether constraints are imposed on group generators or
    on Lie-algebra generator images; ``locality`` optionally caps the Pauli
    weight of the transfer matrices considered.
    """

    r_in: Representation
    r_out: Representation
    level: str | None = None
    locality: int | None = None

    def __post_init__(self):
        if self.r_in.group.kind != self.r_out.group.kind:
            raise ValueError("input and output representations must share a group")
        if len(self.r_in.gen_matrices) != len(self.r_out.gen_matrices):
            raise ValueError("generator lists must be aligned")
        if self.level is None:
            self.level = GROUP_LEVEL if self.r_in.is_finite else ALGEBRA_LEVEL

    @property
    def in_qubits(self) -> int:
        return int(round(np.log2(self.r_in.dim)))

    @property
    def out_qubits(self) -> int:
        return int(round(np.log2(self.r_out.dim)))

    def adjoint_pairs(self):
        """Superoperator matrices (in Pauli bases) of each generator's action."""
        basis_in = pauli_basis(self.in_qubits)
        basis_out = pauli_basis(self.out_qubits)
        pairs = []
        for gin, gout in zip(self.r_in.gen_matrices, self.r_out.gen_matrices):
            if self.level == GROUP_LEVEL:
                pairs.append(
                    (adjoint_superop(gin, basis_in), adjoint_superop(gout, basis_out))
                )
            else:
                pairs.append(
                    (
                        adjoint_algebra_superop(gin, basis_in),
                        adjoint_algebra_superop(gout, basis_out),
                    )
                )
        return pairs

    def group_adjoint_sampler(self, rng: np.random.Generator):
        """Callable returning (Ad_in, Ad_out) superoperators of a random element."""
        basis_in = pauli_basis(self.in_qubits)
        basis_out = pauli_basis(self.out_qubits)

        if self.r_in.is_finite:
            pairs = enumerate_group_pairs(self.r_in, self.r_out)

            def sample():
                gin, gout = pairs[rng.integers(len(pairs))]
                return (
                    adjoint_superop(gin, basis_in),
                    adjoint_superop(gout, basis_out),
                )

            return sample

        name = self.r_in.group.name.upper()
        if name != "SU(2)":
            raise ValueError(f"no Haar sampler for group {self.r_in.group.name!r}")

        def sample():
            g = haar_su2(rng)
            gin = _lift_su2(g, self.r_in)
            gout = _lift_su2(g, self.r_out)
            return (
                adjoint_superop(gin, basis_in),
                adjoint_superop(gout, basis_out),
            )

        return sample


def _su2_algebra_coords(g: np.ndarray) -> np.ndarray:
    """Coordinates c with g = exp(sum_k c_k i sigma_k / 2).

    An SU(2) element is q0 I + i q.sigma with a unit quaternion q; the
    angle-axis form gives c = theta * q_hat with theta = 2 atan2(|q|, q0).
    """
    from .linalg import PAULI_1Q

    q0 = float(np.real(np.trace(g)) / 2.0)
    qv = np.array(
        [float(np.real(np.trace(g @ PAULI_1Q[s]) / 2j)) for s in "XYZ"]
    )
    norm = np.linalg.norm(qv)
    if norm < 1e-15:
        return np.zeros(3)
    theta = 2.0 * np.arctan2(norm, q0)
    return theta * qv / norm


_DEFINING_GENS = None


def _is_defining_su2(rep: Representation) -> bool:
    global _DEFINING_GENS
    from .linalg import PAULI_1Q

    if _DEFINING_GENS is None:
        _DEFINING_GENS = [0.5j * PAULI_1Q[s] for s in "XYZ"]
    if rep.dim != 2 or len(rep.gen_matrices) != 3:
        return False
    return all(
        np.linalg.norm(a - b) < 1e-12
        for a, b in zip(rep.gen_matrices, _DEFINING_GENS)
    )


def _lift_su2(g: np.ndarray, rep: Representation) -> np.ndarray:
    """Evaluate an SU(2) representation on a group element via its algebra
    coordinates."""
    if _is_defining_su2(rep):
        return g
    from scipy.linalg import expm

    coeffs = _su2_algebra_coords(g)
    total = sum(c * gen for c, gen in zip(coeffs, rep.gen_matrices))
    return expm(total)


def enumerate_group_pairs(r_in: Representation, r_out: Representation, tol: float = 1e-8):
    """Aligned enumeration [(R_in(w), R_out(w)) ...] over the group.

    Deduplication uses the joint pair: either representation alone may be
    non-faithful.
    """
    d1, d2 = r_in.dim, r_out.dim
    pairs = [(np.eye(d1, dtype=complex), np.eye(d2, dtype=complex))]

    def find(a, b):
        for ka, kb in pairs:
            if (
                np.linalg.norm(a - ka) <= tol * d1
                and np.linalg.norm(b - kb) <= tol * d2
            ):
                return True
        return False

    bound = r_in.group.enumeration_bound
    changed = True
    while changed:
        changed = False
        for pa, pb in list(pairs):
            for ga, gb in zip(r_in.gen_matrices, r_out.gen_matrices):
                qa, qb = pa @ ga, pb @ gb
                if not find(qa, qb):
                    pairs.append((qa, qb))
                    changed = True
                    if len(pairs) > bound:
                        raise RuntimeError("group closure exceeded bound")
    return pairs


@dataclass
class EquivariantBasis:
    elements: list
    trace_tags: list
    provenance: str
    residuals: list = field(default_factory=list)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i) -> TransferMatrix:
        return self.elements[i]

    def span_vectors(self):
        return [vectorize(t.matrix) for t in self.elements]

    def projector(self) -> np.ndarray:
        return span_projector(self.span_vectors())


@dataclass
class TwirlConfig:
    mode: str = "finite-exact"  # finite-exact | haar-mc | recursive | weingarten
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.mode not in ("finite-exact", "haar-mc", "recursive", "weingarten"):
            raise ValueError(f"unknown twirl mode {self.mode!r}")


# --------------------------------------------------------------------------
# nullspace method


def constraint_matrix(problem: EquivarianceProblem, index: int) -> np.ndarray:
    """Constraint M with M vec(phi) = 0 encoding equivariance for generator
    ``index``: M = Ad_in^T (x) I - I (x) Ad_out."""
    ad_in, ad_out = problem.adjoint_pairs()[index]
    din2 = ad_in.shape[0]
    dout2 = ad_out.shape[0]
    return kron(ad_in.T, np.eye(dout2)) - kron(np.eye(din2), ad_out)


def _locality_column_selector(problem: EquivarianceProblem):
    """Indices of vec(phi) entries whose in/out Paulis satisfy the weight cap."""
    cap = problem.locality
    in_ok = [p.weight <= cap for p in pauli_strings(problem.in_qubits)]
    out_ok = [p.weight <= cap for p in pauli_strings(problem.out_qubits)]
    dout2 = 4 ** problem.out_qubits
    idx = []
    for j, jin in enumerate(in_ok):
        for i, iout in enumerate(out_ok):
            if jin and iout:
                idx.append(j * dout2 + i)
    return np.array(idx, dtype=int)


def solve_nullspace(problem: EquivarianceProblem, tol: float = 1e-9) -> EquivariantBasis:
    """Basis of all equivariant linear maps via one SVD of the stacked
    generator constraints."""
    if not problem.r_in.gen_matrices:
        raise ValueError("problem has no generators")
    mats = [constraint_matrix(problem, i) for i in range(len(problem.r_in.gen_matrices))]
    stacked = np.vstack(mats)
    cols = _locality_column_selector(problem) if problem.locality is not None else None
    if cols is not None:
        stacked = stacked[:, cols]
    null = nullspace(stacked, tol=tol)
    dout2 = 4 ** problem.out_qubits
    din2 = 4 ** problem.in_qubits
    elements = []
    for v in null.T:
        if cols is not None:
            full = np.zeros(din2 * dout2, dtype=complex)
            full[cols] = v
            v = full
        elements.append(
            TransferMatrix(
                matrix=devectorize(v, dout2, din2),
                in_qubits=problem.in_qubits,
                out_qubits=problem.out_qubits,
            )
        )
    tags = [trace_tag(t) for t in elements]
    residuals = [verify_equivariance(t, problem, n_samples=0) for t in elements]
    return EquivariantBasis(
        elements=elements, trace_tags=tags, provenance="nullspace", residuals=residuals
    )


# --------------------------------------------------------------------------
# twirling


def _conjugate_transfer(t: np.ndarray, ad_in: np.ndarray, ad_out: np.ndarray) -> np.ndarray:
    """Ad_out o phi o Ad_in† at the transfer-matrix level."""
    return ad_out @ t @ dagger(ad_in)


def twirl(
    phi: TransferMatrix, problem: EquivarianceProblem, config: TwirlConfig
) -> TransferMatrix:
    """Group average of a map; the orthogonal projection onto equivariant maps.

    Modes: exact sum over an enumerable finite group, Haar Monte-Carlo (with a
    jackknife standard error attached to the result), the recursive halving
    scheme driven by single Haar samples, and a Gram-system projection onto a
    precomputed equivariant basis.
    """
    if config.mode == "finite-exact":
        pairs = enumerate_group_pairs(problem.r_in, problem.r_out)
        basis_in = pauli_basis(problem.in_qubits)
        basis_out = pauli_basis(problem.out_qubits)
        acc = np.zeros_like(phi.matrix)
        for gin, gout in pairs:
            ad_in = adjoint_superop(gin, basis_in)
            ad_out = adjoint_superop(gout, basis_out)
            acc += _conjugate_transfer(phi.matrix, ad_in, ad_out)
        out = acc / len(pairs)
        return TransferMatrix(out, phi.in_qubits, phi.out_qubits)

    if config.mode == "haar-mc":
        rng = np.random.default_rng(config.seed)
        sampler = problem.group_adjoint_sampler(rng)
        terms = []
        for _ in range(config.samples):
            ad_in, ad_out = sampler()
            terms.append(_conjugate_transfer(phi.matrix, ad_in, ad_out))
        stack = np.stack(terms)
        mean = stack.mean(axis=0)
        n = len(terms)
        if n > 1:
            total = stack.sum(axis=0)
            jack = (total[None, :, :] - stack) / (n - 1)
            devs = np.sum(np.abs(jack - mean[None, :, :]) ** 2, axis=(1, 2))
            se = float(np.sqrt((n - 1) / n * np.sum(devs)))
        else:
            se = float("nan")
        out = TransferMatrix(mean, phi.in_qubits, phi.out_qubits)
        out.mc_stderr = se
        return out

    if config.mode == "recursive":
        rng = np.random.default_rng(config.seed)
        sampler = problem.group_adjoint_sampler(rng)
        current = phi.matrix.copy()
        for _ in range(config.samples):
            ad_in, ad_out = sampler()
            current = 0.5 * (current + _conjugate_transfer(current, ad_in, ad_out))
        return TransferMatrix(current, phi.in_qubits, phi.out_qubits)

    if config.mode == "weingarten":
        basis = solve_nullspace(problem)
        return project_onto_basis(phi, basis)

    raise ValueError(f"unknown twirl mode {config.mode!r}")


def project_onto_basis(phi: TransferMatrix, basis: EquivariantBasis) -> TransferMatrix:
    """Orthogonal projection of a transfer matrix onto an equivariant span,
    solved through the basis Gram system."""
    vecs = basis.span_vectors()
    if not vecs:
        return TransferMatrix(
            np.zeros_like(phi.matrix), phi.in_qubits, phi.out_qubits
        )
    a = np.array([[np.vdot(u, v) for v in vecs] for u in vecs])
    b = np.array([np.vdot(u, vectorize(phi.matrix)) for u in vecs])
    coeffs = np.linalg.solve(a, b)
    out = sum(c * t.matrix for c, t in zip(coeffs, basis.elements))
    return TransferMatrix(out, phi.in_qubits, phi.out_qubits)


def antisymmetric_norm(
    phi: TransferMatrix, problem: EquivarianceProblem, config: TwirlConfig | None = None
) -> float:
    """Frobenius norm of the component of phi orthogonal to the equivariant
    subspace; zero iff phi is equivariant."""
    if config is not None and config.mode == "finite-exact":
        tw = twirl(phi, problem, config)
    else:
        tw = project_onto_basis(phi, solve_nullspace(problem))
    return float(np.linalg.norm(phi.matrix - tw.matrix))


def twirl_operator_weingarten(x: np.ndarray, commutant: OperatorBasis) -> np.ndarray:
    """Exact operator twirl as sum_i c_i P_i with c solving the Gram system
    A c = b, A_ij = Tr[P_i P_j], b_i = Tr[X P_i]."""
    if len(commutant) == 0:
        raise ValueError("empty commutant basis")
    k = len(commutant)
    a = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            a[i, j] = np.trace(commutant[i] @ commutant[j])
    svals = np.linalg.svd(a, compute_uv=False)
    if svals[-1] <= 1e-12 * svals[0]:
        raise ValueError("singular Gram matrix")
    b = np.array([np.trace(np.asarray(x) @ p) for p in commutant.elements])
    c = np.linalg.solve(a, b)
    return sum(ci * p for ci, p in zip(c, commutant.elements))


# --------------------------------------------------------------------------
# Choi method


def _hermitian_unit_basis(m: int):
    """m^2 Hermitian matrices forming an orthonormal basis of m x m Hermitians."""
    out = []
    for a in range(m):
        e = np.zeros((m, m), dtype=complex)
        e[a, a] = 1.0
        out.append(e)
    for a in range(m):
        for b in range(a + 1, m):
            e = np.zeros((m, m), dtype=complex)
            e[a, b] = e[b, a] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((m, m), dtype=complex)
            e[a, b] = -1j / np.sqrt(2)
            e[b, a] = 1j / np.sqrt(2)
            out.append(e)
    return out


def choi_block_basis(problem: EquivarianceProblem, rng: np.random.Generator | None = None):
    """Isotypic data of R_in* (x) R_out plus the Hermitian Choi basis
    J = W† (0 ... I_dq (x) h ... 0) W ranging over block-Hermitian units."""
    from .grouprep import dual_rep, product_rep

    rep = product_rep(dual_rep(problem.r_in), problem.r_out)
    deco = isotypic_decompose(rep, rng=rng)
    d_total = rep.dim
    chois = []
    block_index = []
    for bi, blk in enumerate(deco.blocks):
        units = _hermitian_unit_basis(blk.multiplicity)
        for h in units:
            inner = np.zeros((d_total, d_total), dtype=complex)
            sl = slice(blk.start, blk.start + blk.size)
            inner[sl, sl] = np.kron(np.eye(blk.irrep_dim), h)
            j = dagger(deco.W) @ inner @ deco.W
            chois.append(j)
            block_index.append(bi)
    return deco, chois, block_index


def solve_choi_method(
    problem: EquivarianceProblem, rng: np.random.Generator | None = None
) -> EquivariantBasis:
    """Basis of equivariant maps assembled block-by-block from the isotypic
    decomposition of R_in* (x) R_out."""
    _, chois, _ = choi_block_basis(problem, rng=rng)
    din = problem.r_in.dim
    dout = problem.r_out.dim
    elements = []
    for j in chois:
        t = choi_to_transfer(ChoiOperator(matrix=j, in_dim=din, out_dim=dout))
        elements.append(t)
    tags = [trace_tag(t) for t in elements]
    residuals = [verify_equivariance(t, problem, n_samples=0) for t in elements]
    return EquivariantBasis(
        elements=elements, trace_tags=tags, provenance="choi", residuals=residuals
    )


# --------------------------------------------------------------------------
# parameter counting


def count_parameters_unitary(rep: Representation, rng: np.random.Generator | None = None) -> int:
    """Real parameters of equivariant unitaries: sum of squared multiplicities."""
    deco = isotypic_decompose(rep, rng=rng)
    return deco.multiplicity_squares()


def count_parameters_channel(
    r_in: Representation, r_out: Representation, rng: np.random.Generator | None = None
):
    """(sum m_q^2, C, net) for equivariant CPTP channels.

    C is the rank of the trace-preservation constraint restricted to the
    equivariant Hermitian Choi space.
    """
    from .linalg import partial_trace

    problem = EquivarianceProblem(r_in=r_in, r_out=r_out)
    _, chois, _ = choi_block_basis(problem, rng=rng)
    total = len(chois)
    din, dout = r_in.dim, r_out.dim
    rows = []
    for j in chois:
        red = partial_trace(j, [din, dout], keep=[0])
        rows.append(np.concatenate([red.real.ravel(), red.imag.ravel()]))
    mat = np.column_stack(rows)
    svals = np.linalg.svd(mat, compute_uv=False)
    c = int(np.sum(svals > 1e-9 * (svals[0] if svals.size else 1.0)))
    return total, c, total - c


def parameter_utilization(
    r_in: Representation, r_out: Representation, rng: np.random.Generator | None = None
) -> float:
    """Compression factor mu = dim Hom_CPTP / dim Hom_G^CPTP."""
    din2 = r_in.dim ** 2
    dout2 = r_out.dim ** 2
    unconstrained = din2 * dout2 - din2
    total, c, net = count_parameters_channel(r_in, r_out, rng=rng)
    if net <= 0:
        raise ZeroDivisionError("equivariant CPTP family has no free parameters")
    return unconstrained / net


# --------------------------------------------------------------------------
# layer taxonomy and misc


def classify_layer(r_in: Representation, r_out: Representation):
    """((standard|embedding|pooling), (projection|lifting|neither))."""
    din2, dout2 = r_in.dim ** 2, r_out.dim ** 2
    if dout2 < din2:
        size = "pooling"
    elif dout2 > din2:
        size = "embedding"
    else:
        size = "standard"
    if r_in.is_finite:
        from .grouprep import kernel_elements_finite

        ker_in, ker_out, _ = kernel_elements_finite(r_in, r_out)
        if ker_in < ker_out:
            kind = "projection"
        elif ker_out < ker_in:
            kind = "lifting"
        else:
            kind = "neither"
    else:
        from .grouprep import kernel_dimension_lie

        k_in = kernel_dimension_lie(r_in)
        k_out = kernel_dimension_lie(r_out)
        if k_in < k_out:
            kind = "projection"
        elif k_out < k_in:
            kind = "lifting"
        else:
            kind = "neither"
    return size, kind


def nonlinear_embed(rho: np.ndarray, k: int, max_dim: int = 4096) -> np.ndarray:
    """rho -> rho^(x k), the copy non-linearity."""
    if k < 1:
        raise ValueError("k must be >= 1")
    d = rho.shape[0]
    if d ** k > max_dim:
        raise MemoryError(f"tensor power dimension {d ** k} exceeds cap {max_dim}")
    out = np.eye(1, dtype=complex)
    for _ in range(k):
        out = np.kron(out, rho)
    return out


def fourier_action_check(u: np.ndarray, deco) -> float:
    """Residual of W u W† against the block form sum_lambda I_d (x) U_lambda."""
    big = deco.W @ np.asarray(u) @ dagger(deco.W)
    recon = np.zeros_like(big)
    for b in deco.blocks:
        sl = slice(b.start, b.start + b.size)
        t = big[sl, sl].reshape(b.irrep_dim, b.multiplicity, b.irrep_dim, b.multiplicity)
        u_l = np.trace(t, axis1=0, axis2=2) / b.irrep_dim
        recon[sl, sl] = np.kron(np.eye(b.irrep_dim), u_l)
    return float(np.linalg.norm(big - recon))


def verify_equivariance(
    phi: TransferMatrix,
    problem: EquivarianceProblem,
    n_samples: int = 8,
    rng: np.random.Generator | None = None,
) -> float:
    """Worst-case commutation residual over generators plus sampled elements."""
    worst = 0.0
    for ad_in, ad_out in problem.adjoint_pairs():
        worst = max(
            worst, float(np.linalg.norm(phi.matrix @ ad_in - ad_out @ phi.matrix))
        )
    if n_samples > 0:
        rng = rng if rng is not None else np.random.default_rng(17)
        sampler = problem.group_adjoint_sampler(rng)
        for _ in range(n_samples):
            ad_in, ad_out = sampler()
            worst = max(
                worst, float(np.linalg.norm(phi.matrix @ ad_in - ad_out @ phi.matrix))
            )
    return worst


def model_invariance(
    evaluator,
    problem: EquivarianceProblem,
    n_samples: int = 20,
    rng: np.random.Generator | None = None,
    states=None,
) -> float:
    """Max |h(rho) - h(g rho g†)| over sampled group elements and states."""
    rng = rng if rng is not None else np.random.default_rng(23)
    from .linalg import random_density_matrix

    din = problem.r_in.dim
    worst = 0.0
    for i in range(n_samples):
        rho = (
            states[i % len(states)]
            if states is not None
            else random_density_matrix(din, rng)
        )
        if problem.r_in.is_finite:
            pairs = enumerate_group_pairs(problem.r_in, problem.r_out)
            gin = pairs[rng.integers(len(pairs))][0]
        else:
            gin = _lift_su2(haar_su2(rng), problem.r_in)
        rotated = gin @ rho @ dagger(gin)
        worst = max(worst, abs(evaluator(rho) - evaluator(rotated)))
    return float(worst)


def randomized_mixture(unitaries, probs) -> TransferMatrix:
    """Transfer matrix of rho -> sum_i p_i U_i rho U_i†."""
    probs = np.asarray(probs, dtype=float)
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    d = np.asarray(unitaries[0]).shape[0]
    n_qubits = int(round(np.log2(d)))
    basis = pauli_basis(n_qubits)
    acc = np.zeros((4 ** n_qubits, 4 ** n_qubits), dtype=complex)
    for p, u in zip(probs, unitaries):
        acc += p * adjoint_superop(np.asarray(u), basis)
    return TransferMatrix(acc, n_qubits, n_qubits)
