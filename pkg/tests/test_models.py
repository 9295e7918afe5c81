import numpy as np
import pytest

from equikit import linalg as la
from equikit import grouprep as gr
from equikit import models as md


RNG = np.random.default_rng(29)


def tensor_power(g, n):
    out = np.eye(1)
    for _ in range(n):
        out = np.kron(out, g)
    return out


def test_build_eqcnn_structure():
    m = md.build_eqcnn(8)
    assert m.n_params == 4  # two stages, two shared angles each
    assert len(m.final_qubits) == 2
    m13 = md.build_eqcnn(13)
    assert m13.n_params == 6
    m7 = md.build_eqcnn(7)
    assert m7.n_params == 4
    assert 4 <= md.build_eqcnn(6).n_params <= 6


def test_build_eqcnn_repeats_scale_params():
    m = md.build_eqcnn(12, conv_repeats=10)
    assert m.n_params == 60


def test_hea_matches_parameter_budget():
    target = md.build_eqcnn(12, conv_repeats=10).n_params
    depth = md.hea_depth_matching(12, target)
    hea = md.build_hea_qcnn(12, depth)
    assert abs(hea.n_params - target) / target <= 0.10
    assert hea.n_params == 63  # 3 angles per active qubit per stage


def test_eqcnn_repeats_matching():
    r = md.eqcnn_repeats_matching(7, 33)
    m = md.build_eqcnn(7, conv_repeats=r)
    assert abs(m.n_params - 33) / 33 <= 0.10


def test_build_rejects_tiny_registers():
    with pytest.raises(ValueError):
        md.build_eqcnn(2)
    with pytest.raises(ValueError):
        md.build_hea_qcnn(2)


def test_forward_all_zero_angles_zero_state():
    m = md.build_eqcnn(6)
    psi = np.zeros(64)
    psi[0] = 1.0
    assert abs(md.forward(m, psi, np.zeros(m.n_params)) - 1.0) < 1e-12


def test_forward_singlet_gives_zero():
    m = md.build_eqcnn(3)
    singlet = np.zeros(4, dtype=complex)
    singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    psi = np.kron(np.array([1.0, 0.0]), singlet)
    assert abs(md.forward(m, psi, np.zeros(m.n_params))) < 1e-12


@pytest.mark.parametrize("builder", [
    lambda: md.build_eqcnn(6, conv_repeats=2),
    lambda: md.build_hea_qcnn(6, 1),
])
def test_forward_paths_agree(builder):
    model = builder()
    for _ in range(4):
        params = RNG.uniform(-np.pi, np.pi, model.n_params)
        psi = la.random_state(64, RNG)
        f_state = md.forward_state(model, psi, params)
        f_density = md.forward_density(model, psi, params)
        assert abs(f_state - f_density) < 1e-10


def test_forward_paths_agree_eight_qubits():
    model = md.build_eqcnn(8)
    params = RNG.uniform(-np.pi, np.pi, model.n_params)
    psi = la.random_state(256, RNG)
    assert abs(
        md.forward_state(model, psi, params) - md.forward_density(model, psi, params)
    ) < 1e-10


def test_forward_batch_matches_single():
    model = md.build_eqcnn(5)
    params = RNG.uniform(-np.pi, np.pi, model.n_params)
    states = [la.random_state(32, RNG) for _ in range(7)]
    batch = md.forward_state_batch(model, np.column_stack(states), params)
    singles = [md.forward_state(model, s, params) for s in states]
    assert np.abs(batch - np.array(singles)).max() < 1e-12


def test_forward_dim_guard():
    model = md.build_eqcnn(5)
    with pytest.raises(Exception):
        md.forward_state(model, np.zeros(16), np.zeros(model.n_params))


def test_parametric_pooling_matches_trace_at_tra_point():
    mp = md.build_eqcnn(4, pooling="parametric")
    mt = md.build_eqcnn(4, pooling="trace")
    params = RNG.uniform(-np.pi, np.pi, mp.n_params)
    for sl in mp.pooling_param_slices():
        params[sl] = [0.0, 1.0, 0.0]  # exactly the partial trace
    conv_params = np.array(
        [params[s.param_index] for s in mp.steps if isinstance(s, md.SubLayer)]
    )
    psi = la.random_state(16, RNG)
    assert abs(md.forward(mp, psi, params) - md.forward(mt, psi, conv_params)) < 1e-10


def test_parametric_pooling_depolarizing_point():
    mp = md.build_eqcnn(4, pooling="parametric")
    params = np.zeros(mp.n_params)
    psi = la.random_state(16, RNG)
    # all-depolarizing pooling leaves I/4 on the final pair:
    # f = (Tr[SWAP I/4] + 1)/2 = 3/4 regardless of the input
    assert abs(md.forward(mp, psi, params) - 0.75) < 1e-10


def test_eqcnn_invariance_under_tensor_action():
    model = md.build_eqcnn(6, conv_repeats=2)
    worst = 0.0
    for _ in range(20):
        params = RNG.uniform(-np.pi, np.pi, model.n_params)
        psi = la.random_state(64, RNG)
        g = gr.haar_su2(RNG)
        rotated = tensor_power(g, 6) @ psi
        worst = max(
            worst,
            abs(md.forward(model, psi, params) - md.forward(model, rotated, params)),
        )
    assert worst < 1e-8


def test_eqcnn_parametric_invariance():
    model = md.build_eqcnn(4, pooling="parametric")
    rng = np.random.default_rng(4)
    for _ in range(5):
        params = model.init_params(rng)
        params[model.pooling_param_slices()[0]] = [0.2, 0.3, 0.1]
        psi = la.random_state(16, rng)
        g = gr.haar_su2(rng)
        rotated = tensor_power(g, 4) @ psi
        assert abs(md.forward(model, psi, params) - md.forward(model, rotated, params)) < 1e-8


def test_hea_breaks_invariance():
    model = md.build_hea_qcnn(6, 1)
    violations = 0
    for _ in range(20):
        params = RNG.uniform(-np.pi, np.pi, model.n_params)
        psi = la.random_state(64, RNG)
        g = gr.haar_su2(RNG)
        rotated = tensor_power(g, 6) @ psi
        gap = abs(md.forward(model, psi, params) - md.forward(model, rotated, params))
        violations += gap > 1e-2
    assert violations >= 1


def test_predict_threshold():
    assert md.predict(0.9, 0.5) == 1
    assert md.predict(0.1, 0.5) == 0
    assert md.predict(0.5, 0.5) == 0  # ties resolve to the topological label


def test_output_range():
    model = md.build_eqcnn(5)
    for _ in range(10):
        params = RNG.uniform(-np.pi, np.pi, model.n_params)
        psi = la.random_state(32, RNG)
        f = md.forward(model, psi, params)
        assert -1e-12 <= f <= 1 + 1e-12
