import numpy as np
import pytest

from equikit import linalg as la
from equikit import channels as ch
from equikit import grouprep as gr
from equikit import solvers as sv


RNG = np.random.default_rng(13)
X, Y, Z = la.PAULI_1Q["X"], la.PAULI_1Q["Y"], la.PAULI_1Q["Z"]


@pytest.fixture(scope="module")
def su2_reps():
    su2 = gr.su2_defining_rep()
    return su2, gr.tensor_rep(su2, 2)


@pytest.fixture(scope="module")
def z2_problem():
    return sv.EquivarianceProblem(
        r_in=gr.pauli_string_rep(["X"], "Z2"),
        r_out=gr.pauli_string_rep(["Z"], "Z2"),
    )


def test_constraint_matrix_trivial_group():
    triv = gr.trivial_rep(1)
    prob = sv.EquivarianceProblem(r_in=triv, r_out=triv)
    m = sv.constraint_matrix(prob, 0)
    assert np.linalg.norm(m) < 1e-12


def test_constraint_matrix_annihilates_equivariant(z2_problem):
    # rho -> Tr[rho] I/2 is equivariant for any matched reps
    t = np.zeros((4, 4), dtype=complex)
    t[0, 0] = 1.0
    m = sv.constraint_matrix(z2_problem, 0)
    assert np.linalg.norm(m @ la.vectorize(t)) < 1e-10


def test_constraint_matrix_diagonal_structure(z2_problem):
    # both adjoints are diagonal sign matrices, so M is diagonal
    m = sv.constraint_matrix(z2_problem, 0)
    assert np.linalg.norm(m - np.diag(np.diag(m))) < 1e-12


def test_nullspace_z2_dimension_8(z2_problem):
    basis = sv.solve_nullspace(z2_problem)
    assert len(basis) == 8
    assert max(basis.residuals) < 1e-9


def test_nullspace_su2_pool_dimension_5(su2_reps):
    su2, t2 = su2_reps
    basis = sv.solve_nullspace(sv.EquivarianceProblem(r_in=t2, r_out=su2))
    assert len(basis) == 5
    assert max(basis.residuals) < 1e-9


def test_nullspace_trivial_16():
    triv = gr.trivial_rep(1)
    basis = sv.solve_nullspace(sv.EquivarianceProblem(r_in=triv, r_out=triv))
    assert len(basis) == 16


def test_nullspace_locality_cap(su2_reps):
    su2, t2 = su2_reps
    full = sv.solve_nullspace(sv.EquivarianceProblem(r_in=t2, r_out=t2))
    local = sv.solve_nullspace(
        sv.EquivarianceProblem(r_in=t2, r_out=t2, locality=1)
    )
    assert 0 < len(local) < len(full)
    assert max(local.residuals) < 1e-9
    # every locality-capped solution is supported on low-weight strings only
    from equikit.linalg import pauli_strings

    weights = [p.weight for p in pauli_strings(2)]
    heavy = [i for i, w in enumerate(weights) if w > 1]
    for t in local.elements:
        assert np.linalg.norm(t.matrix[np.ix_(heavy, heavy)]) < 1e-12


def test_twirl_fixed_point_and_idempotence(z2_problem):
    rng = np.random.default_rng(3)
    phi = ch.TransferMatrix(
        rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)), 1, 1
    )
    cfg = sv.TwirlConfig(mode="finite-exact")
    tw = sv.twirl(phi, z2_problem, cfg)
    tw2 = sv.twirl(tw, z2_problem, cfg)
    assert np.linalg.norm(tw2.matrix - tw.matrix) < 1e-10
    assert sv.verify_equivariance(tw, z2_problem, n_samples=0) < 1e-9


def test_twirl_already_equivariant_unchanged(z2_problem):
    basis = sv.solve_nullspace(z2_problem)
    cfg = sv.TwirlConfig(mode="finite-exact")
    for t in basis.elements[:3]:
        tw = sv.twirl(t, z2_problem, cfg)
        assert np.linalg.norm(tw.matrix - t.matrix) < 1e-10


def test_twirl_conjugation_map_two_sided_rep():
    # under the {I, X} rep on both sides, rho -> Z rho Z commutes with the
    # group action (X Z X = -Z and the signs cancel), so its twirl is itself
    rep = gr.pauli_string_rep(["X"], "Z2")
    prob = sv.EquivarianceProblem(r_in=rep, r_out=rep)
    phi_z = ch.kraus_to_transfer(ch.KrausSet([Z]))
    tw = sv.twirl(phi_z, prob, sv.TwirlConfig(mode="finite-exact"))
    assert np.linalg.norm(tw.matrix - phi_z.matrix) < 1e-12


def test_twirl_output_only_action_mixes():
    # with a trivial input rep and {I, X} acting on the output, the group
    # average of rho -> Z rho Z is (Z rho Z + Y rho Y)/2
    r_in = gr.matrix_rep([np.eye(2)], "Z2")
    r_out = gr.matrix_rep([X], "Z2")
    prob = sv.EquivarianceProblem(r_in=r_in, r_out=r_out)
    phi_z = ch.kraus_to_transfer(ch.KrausSet([Z]))
    tw = sv.twirl(phi_z, prob, sv.TwirlConfig(mode="finite-exact"))
    expected = 0.5 * (
        ch.kraus_to_transfer(ch.KrausSet([Z])).matrix
        + ch.kraus_to_transfer(ch.KrausSet([Y])).matrix
    )
    assert np.linalg.norm(tw.matrix - expected) < 1e-12


def test_twirl_cptp_preserved(z2_problem):
    # twirl of a CPTP channel stays CPTP under the exact finite formula
    rng = np.random.default_rng(5)
    big = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    q, _ = np.linalg.qr(big)
    k = ch.KrausSet([q[:2], q[2:]])
    tw = sv.twirl(
        ch.kraus_to_transfer(k), z2_problem, sv.TwirlConfig(mode="finite-exact")
    )
    j = ch.transfer_to_choi(tw)
    assert ch.is_cp(j, tol=1e-9)[0]
    assert ch.is_tp(j, tol=1e-9)[0]


def test_antisymmetric_norm(z2_problem):
    basis = sv.solve_nullspace(z2_problem)
    assert sv.antisymmetric_norm(basis[0], z2_problem) < 1e-10
    rep = gr.pauli_string_rep(["X"], "Z2")
    prob_out_only = sv.EquivarianceProblem(
        r_in=gr.matrix_rep([np.eye(2)], "Z2"), r_out=rep
    )
    phi_z = ch.kraus_to_transfer(ch.KrausSet([Z]))
    val = sv.antisymmetric_norm(phi_z, prob_out_only)
    tw = sv.twirl(phi_z, prob_out_only, sv.TwirlConfig(mode="finite-exact"))
    assert abs(val - np.linalg.norm(phi_z.matrix - tw.matrix)) < 1e-10
    assert val > 0.1


def test_antisymmetric_norm_vanishes_after_twirl():
    rng = np.random.default_rng(8)
    rep = gr.pauli_string_rep(["X"], "Z2")
    prob = sv.EquivarianceProblem(r_in=rep, r_out=rep)
    phi = ch.TransferMatrix(rng.standard_normal((4, 4)), 1, 1)
    tw = sv.twirl(phi, prob, sv.TwirlConfig(mode="finite-exact"))
    assert sv.antisymmetric_norm(tw, prob) < 1e-10


def test_mc_twirl_error_shrinks(su2_reps):
    su2, _ = su2_reps
    prob = sv.EquivarianceProblem(r_in=su2, r_out=su2)
    rng = np.random.default_rng(2)
    phi = ch.TransferMatrix(rng.standard_normal((4, 4)), 1, 1)
    exact = sv.twirl(phi, prob, sv.TwirlConfig(mode="weingarten"))
    medians = []
    for n in (100, 1000, 10000):
        errs = []
        for seed in range(10):
            mc = sv.twirl(phi, prob, sv.TwirlConfig(mode="haar-mc", samples=n, seed=seed))
            errs.append(np.linalg.norm(mc.matrix - exact.matrix))
        medians.append(np.median(errs))
    assert medians[0] > medians[1] > medians[2]


def test_mc_twirl_reports_stderr(su2_reps):
    su2, _ = su2_reps
    prob = sv.EquivarianceProblem(r_in=su2, r_out=su2)
    phi = ch.TransferMatrix(np.random.default_rng(0).standard_normal((4, 4)), 1, 1)
    mc = sv.twirl(phi, prob, sv.TwirlConfig(mode="haar-mc", samples=200, seed=1))
    assert mc.mc_stderr is not None and mc.mc_stderr > 0


def test_recursive_twirl_median_residual(su2_reps):
    su2, _ = su2_reps
    prob = sv.EquivarianceProblem(r_in=su2, r_out=su2)
    nullbasis = sv.solve_nullspace(prob)
    rng = np.random.default_rng(0)
    residuals_30 = []
    residuals_60 = []
    for seed in range(20):
        phi = ch.TransferMatrix(rng.standard_normal((4, 4)), 1, 1)
        r30 = sv.twirl(phi, prob, sv.TwirlConfig(mode="recursive", samples=30, seed=seed))
        r60 = sv.twirl(phi, prob, sv.TwirlConfig(mode="recursive", samples=60, seed=seed))
        proj30 = sv.project_onto_basis(r30, nullbasis)
        proj60 = sv.project_onto_basis(r60, nullbasis)
        residuals_30.append(np.linalg.norm(r30.matrix - proj30.matrix))
        residuals_60.append(np.linalg.norm(r60.matrix - proj60.matrix))
    assert np.median(residuals_60) < 1e-3
    assert np.median(residuals_60) < np.median(residuals_30)


def test_weingarten_operator_twirl_fixed_points(su2_reps):
    _, t2 = su2_reps
    comm = gr.commutant_basis(t2)
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    for m in (np.eye(4), swap):
        tw = sv.twirl_operator_weingarten(m, comm)
        assert np.linalg.norm(tw - m) < 1e-10


def test_weingarten_operator_twirl_traceless(su2_reps):
    _, t2 = su2_reps
    comm = gr.commutant_basis(t2)
    tw = sv.twirl_operator_weingarten(np.kron(Z, np.eye(2)), comm)
    assert np.linalg.norm(tw) < 1e-10


def test_weingarten_vs_mc_operator_twirl(su2_reps):
    _, t2 = su2_reps
    comm = gr.commutant_basis(t2)
    rng = np.random.default_rng(21)
    x = la.random_hermitian(4, rng)
    exact = sv.twirl_operator_weingarten(x, comm)
    n = 20000
    acc = np.zeros((4, 4), dtype=complex)
    for _ in range(n):
        g = gr.haar_su2(rng)
        gg = np.kron(g, g)
        acc += gg @ x @ gg.conj().T
    acc /= n
    assert np.linalg.norm(acc - exact) < 3 * 2.0 / np.sqrt(n) * np.linalg.norm(x)


def test_choi_method_matches_nullspace(su2_reps):
    su2, t2 = su2_reps
    prob = sv.EquivarianceProblem(r_in=t2, r_out=su2)
    nb = sv.solve_nullspace(prob)
    cb = sv.solve_choi_method(prob, rng=np.random.default_rng(5))
    assert len(cb) == 5
    assert max(cb.residuals) < 1e-9
    assert np.linalg.norm(nb.projector() - cb.projector()) < 1e-8


def test_choi_method_z2():
    prob = sv.EquivarianceProblem(
        r_in=gr.pauli_string_rep(["X"], "Z2"),
        r_out=gr.pauli_string_rep(["Z"], "Z2"),
    )
    nb = sv.solve_nullspace(prob)
    cb = sv.solve_choi_method(prob, rng=np.random.default_rng(6))
    assert len(cb) == len(nb) == 8
    assert np.linalg.norm(nb.projector() - cb.projector()) < 1e-8


def test_choi_block_example_bit_phase_mix():
    # choosing the right blocks reproduces (X rho X + Z rho Z)/2
    prob = sv.EquivarianceProblem(
        r_in=gr.pauli_string_rep(["X"], "Z2"),
        r_out=gr.pauli_string_rep(["Z"], "Z2"),
    )
    cb = sv.solve_choi_method(prob, rng=np.random.default_rng(7))
    target = 0.5 * (
        ch.kraus_to_transfer(ch.KrausSet([X])).matrix
        + ch.kraus_to_transfer(ch.KrausSet([Z])).matrix
    )
    vec = la.vectorize(target)
    proj = cb.projector()
    assert np.linalg.norm(proj @ vec - vec) < 1e-8


def test_count_parameters_unitary_examples(su2_reps):
    _, t2 = su2_reps
    assert sv.count_parameters_unitary(
        gr.symmetric_group_rep(3), rng=np.random.default_rng(1)
    ) == 20
    assert sv.count_parameters_unitary(t2, rng=np.random.default_rng(2)) == 2


def test_count_parameters_channel_trivial():
    triv = gr.trivial_rep(1)
    total, c, net = sv.count_parameters_channel(
        triv, triv, rng=np.random.default_rng(3)
    )
    assert (total, c, net) == (16, 4, 12)


def test_count_parameters_channel_su2_pool(su2_reps):
    su2, t2 = su2_reps
    total, c, net = sv.count_parameters_channel(t2, su2, rng=np.random.default_rng(4))
    assert total == 5
    assert net == 3


def test_parameter_utilization(su2_reps):
    su2, t2 = su2_reps
    mu = sv.parameter_utilization(t2, t2, rng=np.random.default_rng(5))
    assert mu >= 240.0 / 14.0 - 1e-9
    triv = gr.trivial_rep(1)
    mu_triv = sv.parameter_utilization(triv, triv, rng=np.random.default_rng(7))
    assert abs(mu_triv - 1.0) < 1e-9


def test_parameter_utilization_monotone():
    # richer symmetry (smaller equivariant family) means larger mu
    z2 = gr.pauli_string_rep(["XI", "IX"], "Z2xZ2")
    z2_small = gr.pauli_string_rep(["XX"], "Z2")
    out_full = gr.matrix_rep([X, np.eye(2)], "Z2xZ2")
    out_small = gr.matrix_rep([X], "Z2")
    mu_big = sv.parameter_utilization(z2, out_full, rng=np.random.default_rng(8))
    mu_small = sv.parameter_utilization(z2_small, out_small, rng=np.random.default_rng(9))
    assert mu_big > mu_small


def test_classify_layer_pooling(su2_reps):
    su2, t2 = su2_reps
    assert sv.classify_layer(t2, su2) == ("pooling", "neither")
    assert sv.classify_layer(t2, t2) == ("standard", "neither")
    assert sv.classify_layer(su2, t2) == ("embedding", "neither")


def test_classify_layer_projection():
    r_in = gr.pauli_string_rep(["XI", "IX"], "Z2xZ2")
    r_out = gr.matrix_rep([X, np.eye(2)], "Z2xZ2")
    assert sv.classify_layer(r_in, r_out) == ("pooling", "projection")
    assert sv.classify_layer(r_out, r_in) == ("embedding", "lifting")


def test_classify_layer_zn_half_trace():
    # cyclic shift on 4 qubits down to the shift on 2 qubits
    r_in = gr.cyclic_shift_rep(4)
    shift2 = gr.cyclic_shift_rep(2)
    r_out = gr.Representation(group=r_in.group, dim=4, gen_matrices=shift2.gen_matrices)
    assert sv.classify_layer(r_in, r_out) == ("pooling", "projection")


def test_nonlinear_embed():
    rho = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    assert np.allclose(sv.nonlinear_embed(rho, 1), rho)
    rho2 = sv.nonlinear_embed(rho, 2)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.allclose(rho2, expected)
    with pytest.raises(MemoryError):
        sv.nonlinear_embed(np.eye(16) / 16, 4, max_dim=4096)
    with pytest.raises(ValueError):
        sv.nonlinear_embed(rho, 0)


def test_nonlinear_embed_equivariance():
    rng = np.random.default_rng(31)
    for _ in range(5):
        rho = la.random_density_matrix(2, rng)
        g = gr.haar_su2(rng)
        lhs = sv.nonlinear_embed(g @ rho @ g.conj().T, 2)
        gg = np.kron(g, g)
        rhs = gg @ sv.nonlinear_embed(rho, 2) @ gg.conj().T
        assert np.linalg.norm(lhs - rhs) < 1e-12


def test_fourier_action_check(su2_reps):
    _, t2 = su2_reps
    deco = gr.isotypic_decompose(t2, rng=np.random.default_rng(12))
    assert sv.fourier_action_check(np.eye(4), deco) < 1e-10
    # exp(-i theta SWAP) acts as opposite phases on the two sectors
    from equikit.su2 import swap_conv_unitary

    theta = 0.37
    u = swap_conv_unitary(theta)
    assert sv.fourier_action_check(u, deco) < 1e-8
    big = deco.W @ u @ deco.W.conj().T
    triplet = deco.blocks[0]
    singlet = deco.blocks[1]
    ph_t = big[triplet.start, triplet.start]
    ph_s = big[singlet.start, singlet.start]
    assert abs(ph_t - np.exp(-1j * theta)) < 1e-8
    assert abs(ph_s - np.exp(1j * theta)) < 1e-8


def test_fourier_action_random_commutant(su2_reps):
    _, t2 = su2_reps
    deco = gr.isotypic_decompose(t2, rng=np.random.default_rng(14))
    comm = gr.commutant_basis(t2)
    rng = np.random.default_rng(15)
    u = sum(rng.standard_normal() * b for b in comm.elements)
    assert sv.fourier_action_check(u, deco) < 1e-8


def test_verify_equivariance_detects_perturbation(su2_reps):
    su2, t2 = su2_reps
    prob = sv.EquivarianceProblem(r_in=t2, r_out=su2)
    from equikit.su2 import pool_map_transfers

    maps = pool_map_transfers()
    good = maps["phi3"]
    assert sv.verify_equivariance(good, prob, n_samples=4) < 1e-10
    eps = 1e-3
    bad_matrix = good.matrix.copy()
    bad_matrix[1, 1] += eps  # X-to-X leak breaks equivariance
    bad = ch.TransferMatrix(bad_matrix, 2, 1)
    res = sv.verify_equivariance(bad, prob, n_samples=4)
    assert 1e-5 < res < 1e-1


def test_model_invariance_helper(su2_reps):
    su2, _ = su2_reps
    prob = sv.EquivarianceProblem(r_in=su2, r_out=su2)
    gap = sv.model_invariance(lambda rho: float(np.real(np.trace(rho @ rho))), prob)
    assert gap < 1e-10
    gap_bad = sv.model_invariance(
        lambda rho: float(np.real(np.trace(rho @ Z))), prob
    )
    assert gap_bad > 1e-2


def test_randomized_mixture_single_unitary():
    t = sv.randomized_mixture([X], [1.0])
    expected = ch.kraus_to_transfer(ch.KrausSet([X]))
    assert np.linalg.norm(t.matrix - expected.matrix) < 1e-12


def test_randomized_mixture_bit_flip():
    t = sv.randomized_mixture([np.eye(2), X], [0.5, 0.5])
    assert np.linalg.norm(t.matrix - np.diag([1.0, 1.0, 0.0, 0.0])) < 1e-12


def test_randomized_mixture_probs_validated():
    with pytest.raises(ValueError):
        sv.randomized_mixture([np.eye(2), X], [0.7, 0.7])


def test_zn_randomized_construction_equivariant():
    # mixing odd/even two-body layers at equal probability restores the full
    # cyclic symmetry on four qubits
    from scipy.linalg import expm

    n = 4
    theta = 0.7
    zy = np.kron(Z, Y)

    def layer(pairs):
        u = np.eye(2 ** n, dtype=complex)
        for a, b in pairs:
            ops = [np.eye(2)] * n
            ops[a], ops[b] = Z, Y
            term = la.kron_all(ops)
            u = u @ expm(-1j * theta * term)
        return u

    u_even = layer([(0, 1), (2, 3)])
    u_odd = layer([(1, 2), (3, 0)])
    mixture = sv.randomized_mixture([u_even, u_odd], [0.5, 0.5])
    rep = gr.cyclic_shift_rep(n)
    prob = sv.EquivarianceProblem(r_in=rep, r_out=rep)
    assert sv.verify_equivariance(mixture, prob, n_samples=0) < 1e-10
    # each layer alone only respects the half shift
    single = sv.randomized_mixture([u_even], [1.0])
    assert sv.verify_equivariance(single, prob, n_samples=0) > 1e-3
