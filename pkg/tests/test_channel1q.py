"""
单比特正规信道测试
"""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from core.channel1q import (
    U_SPHERICAL,
    ChoiMatrix,
    NormalParams1Q,
    PauliChannelParams,
    PauliTransferMatrix1Q,
    choi_from_fourier,
    choi_from_ptm,
    commuting_axis,
    diffusion_from_pauli,
    eigenvalue_trace,
    equivalence_class,
    equivalence_class_info,
    fourier_coefficient,
    generator,
    lindblad_superoperator,
    m1_matrix,
    pauli_probs,
    pauli_ptm,
    ptm,
    ptm_from_choi,
    ptm_from_fourier,
    random_walk_ptm,
)
from core.distill import no_distill_fidelity
from core.errors import ExceptionalPointError, InvalidParameterError
from core.linalg import cross_matrix, eig, expm
from core.montecarlo import compare_estimate
from core.su2 import exp_map

diagonals = arrays(np.float64, 3, elements=st.floats(0.0, 2.0))
drifts = arrays(np.float64, 3, elements=st.floats(-3.0, 3.0))


def _params(random_psd, scale=1.0, b_scale=1.0, seed=0):
    rng = np.random.default_rng(seed)
    return NormalParams1Q(A=random_psd(3, scale), b=b_scale * rng.normal(size=3))


def test_zero_params_give_identity_channel():
    params = NormalParams1Q(A=np.zeros((3, 3)))
    np.testing.assert_allclose(ptm(params).R, np.eye(3), atol=1e-15)
    choi = choi_from_ptm(ptm(params))
    np.testing.assert_allclose(choi.apply(np.array([[0.3, 0.1j], [-0.1j, 0.7]])),
                               [[0.3, 0.1j], [-0.1j, 0.7]], atol=1e-15)


def test_normal_params_validation():
    with pytest.raises(ValueError):
        NormalParams1Q(A=np.diag([1.0, -0.1, 0.0]))
    with pytest.raises(ValueError):
        NormalParams1Q(A=np.eye(3), b=[0.0, 1.0])
    with pytest.raises(ValueError):
        NormalParams1Q(A=np.eye(2))


def test_generator_formula():
    params = NormalParams1Q.diagonal([0.6, 0.3, 0.1], [0.0, 0.0, 1.0])
    expected = np.diag([-0.2, -0.35, -0.45]) + cross_matrix([0.0, 0.0, 1.0])
    np.testing.assert_allclose(generator(params), expected, atol=1e-15)


def test_isotropic_ptm_is_depolarizing():
    a = 0.4
    R = ptm(NormalParams1Q.diagonal([a, a, a])).R
    np.testing.assert_allclose(R, np.exp(-a) * np.eye(3), atol=1e-14)


def test_pure_drift_is_rotation():
    b = np.array([0.3, 0.0, 0.4])
    R = ptm(NormalParams1Q(A=np.zeros((3, 3)), b=b)).R
    np.testing.assert_allclose(R, expm(cross_matrix(b)), atol=1e-14)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_ptm_agrees_with_spin_one_fourier_coefficient(random_psd, seed):
    params = _params(random_psd, scale=1.5, b_scale=1.0, seed=seed)
    np.testing.assert_allclose(ptm_from_fourier(params).R, ptm(params).R, atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_generator_agrees_with_master_equation(random_psd, seed):
    params = _params(random_psd, scale=1.0, b_scale=0.7, seed=seed)
    np.testing.assert_allclose(lindblad_superoperator(params), generator(params), atol=1e-12)


def test_half_spin_fourier_coefficients():
    b = [0.2, -0.5, 0.9]
    drift_only = NormalParams1Q(A=np.zeros((3, 3)), b=b)
    np.testing.assert_allclose(fourier_coefficient(drift_only, "1/2"), exp_map(b), atol=1e-12)
    a = 0.8
    isotropic = NormalParams1Q.diagonal([a, a, a])
    np.testing.assert_allclose(fourier_coefficient(isotropic, "1/2"), np.exp(-3 * a / 8) * np.eye(2), atol=1e-14)


@pytest.mark.parametrize("seed", range(100))
def test_choi_constructions_agree_and_are_cptp(random_psd, seed):
    params = _params(random_psd, scale=2.0, b_scale=1.5, seed=seed)
    from_ptm = choi_from_ptm(ptm(params))
    from_fourier = choi_from_fourier(params)
    np.testing.assert_allclose(from_fourier.C, from_ptm.C, atol=1e-10)
    assert from_ptm.is_cptp(unital=True)
    np.testing.assert_allclose(ptm_from_choi(from_ptm).R, ptm(params).R, atol=1e-12)


def test_choi_detects_non_cp_map():
    # 转置映射保迹但不是完全正的
    transpose = np.diag([1.0, -1.0, 1.0])
    choi = choi_from_ptm(transpose)
    report = choi.cptp_report()
    assert report["min_eigenvalue"] < -0.4
    assert not choi.is_cptp()


def test_choi_rejects_non_square_dimension():
    with pytest.raises(ValueError):
        ChoiMatrix(C=np.eye(3))


def test_transfer_matrix_must_be_contraction():
    with pytest.raises(ValueError):
        PauliTransferMatrix1Q(R=1.1 * np.eye(3))


def test_pauli_channel_params_bounds():
    with pytest.raises(ValueError):
        PauliChannelParams(p1=0.5, p2=0.4, p3=0.2)
    assert PauliChannelParams.isotropic(0.1).as_array().tolist() == [0.1, 0.1, 0.1]


@settings(deadline=None)
@given(diagonals)
def test_pauli_probs_reproduce_normal_channel(a):
    probs = pauli_probs(a)
    np.testing.assert_allclose(pauli_ptm(probs).R, ptm(NormalParams1Q.diagonal(a)).R, atol=1e-12)
    np.testing.assert_allclose(diffusion_from_pauli(probs), a, atol=1e-9)


def test_pauli_probs_isotropic_limit():
    p = pauli_probs([40.0, 40.0, 40.0])
    np.testing.assert_allclose(p.as_array(), [0.25, 0.25, 0.25], atol=1e-12)
    assert pauli_probs([0.0, 0.0, 0.0]).as_array().tolist() == [0.0, 0.0, 0.0]


def test_pauli_probs_strong_dephasing_exceeds_quarter():
    p = pauli_probs([10.0, 0.0, 0.0])
    assert p.p1 == pytest.approx(0.5 - 0.5 * np.exp(-5.0))
    assert p.p2 == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("probs", [(0.2, 0.2, 0.0), (0.3, 0.3, 0.0)])
def test_diffusion_from_pauli_rejects_non_normal(probs):
    with pytest.raises(InvalidParameterError):
        diffusion_from_pauli(PauliChannelParams(p1=probs[0], p2=probs[1], p3=probs[2]))


def test_pauli_probs_rejects_negative():
    with pytest.raises(InvalidParameterError):
        pauli_probs([0.1, -0.2, 0.0])


def test_commuting_axis():
    np.testing.assert_allclose(commuting_axis(NormalParams1Q.diagonal([0.2, 0.2, 0.5], [0, 0, 0.5])), [0, 0, 1])
    assert commuting_axis(NormalParams1Q.diagonal([0.6, 0.3, 0.1], [0, 0, 1.0])) is None
    assert commuting_axis(NormalParams1Q.diagonal([0.6, 0.3, 0.1])) is None
    axis = commuting_axis(NormalParams1Q.diagonal([0.6, 0.3, 0.3]))
    np.testing.assert_allclose(np.abs(axis), [1.0, 0.0, 0.0], atol=1e-12)


def test_zero_channel_class_is_infinite_rotation_family():
    params = NormalParams1Q(A=np.zeros((3, 3)))
    info = equivalence_class_info(params, k_max=2)
    assert info.infinite
    assert info.count == 5
    assert [m.offset for m in info.members] == [0, -1, 1, -2, 2]
    np.testing.assert_allclose(info.members[2].params.b, [0.0, 0.0, 2.0 * np.pi], atol=1e-12)
    for member in info:
        np.testing.assert_allclose(ptm(member).R, np.eye(3), atol=1e-12)


def test_class_truncation_keeps_input_first():
    params = NormalParams1Q(A=np.zeros((3, 3)))
    info = equivalence_class_info(params, k_max=4, max_members=3)
    assert info.truncated and info.count == 3
    assert info.members[0].params is params


def test_axial_drift_class_shifts_along_axis():
    params = NormalParams1Q.diagonal([0.2, 0.2, 0.5], [0.0, 0.0, 0.5])
    members = equivalence_class(params, k_max=2)
    assert len(members) == 5
    b_z = sorted(m.b[2] for m in members)
    np.testing.assert_allclose(b_z, 0.5 + 2.0 * np.pi * np.arange(-2, 3), atol=1e-9)
    for member in members:
        np.testing.assert_allclose(member.A, params.A, atol=1e-9)


def test_generic_class_is_finite_and_induces_same_channel():
    params = NormalParams1Q.diagonal([0.6, 0.3, 0.1], [0.0, 0.0, 1.0])
    info = equivalence_class_info(params, k_max=6)
    assert not info.infinite
    assert info.members[0].params is params
    R = ptm(params).R
    for member in info:
        np.testing.assert_allclose(ptm(member).R, R, atol=1e-9)
    offsets = [m.offset for m in info.members]
    assert len(set(offsets)) == len(offsets)


@settings(deadline=None)
@given(diagonals, drifts)
def test_every_class_member_induces_same_channel(a, b):
    params = NormalParams1Q.diagonal(a, b)
    assume(eig(generator(params)).condition < 1e4)
    try:
        members = equivalence_class(params, k_max=3)
    except ExceptionalPointError:
        assume(False)
    R = ptm(params).R
    assert members[0] is params
    for member in members:
        assert np.linalg.eigvalsh(member.A)[0] >= -1e-10
        np.testing.assert_allclose(ptm(member).R, R, atol=1e-8)


def test_eigenvalue_trace_pair_onset():
    magnitudes = np.linspace(0.0, 1.0, 101)
    trace = eigenvalue_trace(np.diag([0.6, 0.3, 0.1]), [0.0, 0.0, 1.0], magnitudes)
    assert trace.pair_onset == pytest.approx(0.08)
    assert not trace.points[7].paired and trace.points[8].paired
    # 沿 b 的特征值不随 |b| 变化
    for point in trace.points:
        assert np.min(np.abs(point.eigenvalues - (-0.45))) < 1e-12


def test_eigenvalue_trace_isotropic_pairs_immediately():
    trace = eigenvalue_trace(0.3 * np.eye(3), [1.0, 0.0, 0.0], [0.0, 0.5, 1.0])
    assert trace.pair_onset == pytest.approx(0.5)
    np.testing.assert_allclose(sorted(trace.points[2].eigenvalues.imag), [-1.0, 0.0, 1.0], atol=1e-12)


def test_eigenvalue_trace_requires_unit_direction():
    with pytest.raises(InvalidParameterError):
        eigenvalue_trace(np.eye(3), [0.0, 0.0, 2.0], [0.0])


def test_random_walk_pure_drift_is_exact():
    params = NormalParams1Q(A=np.zeros((3, 3)), b=[0.3, 0.0, 0.4])
    estimate = random_walk_ptm(params, n_steps=50, n_samples=2000, seed=1)
    np.testing.assert_allclose(estimate.mean, ptm(params).R, atol=1e-12)
    assert estimate.max_stderr() < 1e-6
    assert compare_estimate(estimate, ptm(params).R).passed


def test_random_walk_matches_closed_form():
    params = NormalParams1Q.diagonal([0.3, 0.2, 0.1], [0.0, 0.2, 0.0])
    estimate = random_walk_ptm(params, n_steps=50, n_samples=20_000, seed=4, chunk_size=5000)
    outcome = compare_estimate(estimate, ptm(params).R, n_sigma=3.0, family_wise=True)
    assert outcome.passed, outcome


def test_random_walk_independent_of_thread_count():
    params = NormalParams1Q.diagonal([0.3, 0.2, 0.1])
    single = random_walk_ptm(params, 50, 3000, seed=9, chunk_size=1000, max_workers=1)
    pooled = random_walk_ptm(params, 50, 3000, seed=9, chunk_size=1000, max_workers=3)
    np.testing.assert_array_equal(single.mean, pooled.mean)
    np.testing.assert_array_equal(single.stderr, pooled.stderr)


@pytest.mark.parametrize("seed", range(5))
def test_orthogonal_covariance(random_psd, seed):
    params = _params(random_psd, seed=seed)
    O = expm(cross_matrix(np.random.default_rng(seed + 100).normal(size=3)))
    rotated = NormalParams1Q(A=O @ params.A @ O.T, b=O @ params.b)
    np.testing.assert_allclose(ptm(rotated).R, O @ ptm(params).R @ O.T, atol=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_spin_one_generator_is_unitarily_equivalent(random_psd, seed):
    params = _params(random_psd, scale=2.0, b_scale=2.0, seed=seed)
    rotated = U_SPHERICAL @ (-m1_matrix(params)) @ U_SPHERICAL.conj().T
    np.testing.assert_allclose(rotated, generator(params), atol=1e-12)


def test_eigenvalue_sum_is_minus_trace():
    A = np.diag([0.6, 0.3, 0.1])
    trace = eigenvalue_trace(A, [0.0, 0.6, 0.8], np.linspace(0.0, 2.0, 41))
    for point in trace.points:
        assert np.sum(point.eigenvalues).real == pytest.approx(-1.0, abs=1e-12)
        assert abs(np.sum(point.eigenvalues).imag) < 1e-12
    assert np.max(np.abs(trace.points[0].eigenvalues.imag)) == 0.0


def test_degenerate_transverse_diffusion_gives_infinite_class():
    info = equivalence_class_info(NormalParams1Q.diagonal([0.2, 0.2, 0.6], [0.0, 0.0, 1.0]), k_max=6)
    assert info.infinite
    assert info.count == 13


def test_small_drift_class_is_unique():
    info = equivalence_class_info(NormalParams1Q.diagonal([0.6, 0.2, 0.2], [0.0, 0.0, 0.05]), k_max=6)
    assert not info.infinite
    assert info.count == 1


def test_isotropic_fidelity_decreases_with_diffusion():
    fidelities = [no_distill_fidelity(ptm(NormalParams1Q.diagonal([a, a, a]))) for a in np.linspace(0.0, 5.0, 26)]
    assert fidelities[0] == pytest.approx(1.0)
    assert np.all(np.diff(fidelities) < 0.0)
    assert fidelities[-1] == pytest.approx((1.0 + 3.0 * np.exp(-5.0)) / 4.0, rel=1e-12)


def test_strong_isotropic_diffusion_is_fully_depolarizing():
    params = NormalParams1Q.diagonal([50.0, 50.0, 50.0])
    np.testing.assert_allclose(choi_from_ptm(ptm(params)).C, np.eye(4) / 2, atol=1e-10)
    np.testing.assert_allclose(choi_from_fourier(params).C, np.eye(4) / 2, atol=1e-10)
