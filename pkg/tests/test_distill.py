"""
纠缠蒸馏测试
"""

import numpy as np
import pytest

from core.channel1q import PauliChannelParams, pauli_ptm
from core.channel2q import general_pauli_ptm, kron_ptm, pauli_branches
from core.distill import (
    CONVENTIONS,
    DensityMatrix,
    apply_channel,
    apply_unitary,
    as_choi,
    basic_distill,
    bell_pair,
    build_channel,
    cnot,
    convention_checkpoint,
    distill_step,
    fidelity_sweep,
    full_distill,
    no_distill_fidelity,
    resolve_convention,
    transmit,
)
from core.config import DistillSettings
from core.errors import ChannelArityError, DegenerateOutcomeError, InvalidParameterError


def _bell_diagonal_step(a, b, c, d):
    """独立 Bell 对角态的一步 D：(Φ⁺, Ψ⁺, Ψ⁻, Φ⁻) 系数"""
    norm = (a + d) ** 2 + (b + c) ** 2
    return (a * a + d * d) / norm, (b * b + c * c) / norm, 2 * b * c / norm, 2 * a * d / norm, norm


def _uncorrelated_reference(p):
    """独立各向同性误差下 D_u 的保真度与成功概率"""
    a, b, c, d, s1 = _bell_diagonal_step(1 - 3 * p, p, p, p)
    # H⊗H 交换 Φ⁻ 与 Ψ⁺
    a, b, c, d, s2 = _bell_diagonal_step(a, d, c, b)
    return a, s1 * s1 * s2


def _single_qubit_pauli_pair(p1=0.0, p2=0.0, p3=0.0):
    R = pauli_ptm(PauliChannelParams(p1=p1, p2=p2, p3=p3)).R
    return kron_ptm(R, R)


def test_bell_pair_and_density_matrix_validation():
    pair = bell_pair()
    assert pair.n_qubits == 2
    assert pair.fidelity() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        DensityMatrix(rho=np.eye(3) / 3)
    with pytest.raises(ValueError):
        DensityMatrix(rho=np.eye(2))
    with pytest.raises(ValueError):
        DensityMatrix(rho=np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_cnot_matrix():
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_array_equal(cnot(0, 1, 2), expected)
    np.testing.assert_array_equal(cnot(1, 0, 2) @ cnot(1, 0, 2), np.eye(4))


def test_apply_channel_target_checks():
    state = bell_pair().tensor(bell_pair())
    channel = _single_qubit_pauli_pair(p1=0.1)
    with pytest.raises(ChannelArityError):
        apply_channel(state, channel, [1])
    with pytest.raises(ChannelArityError):
        apply_channel(state, channel, [1, 1])
    with pytest.raises(ChannelArityError):
        apply_channel(state, channel, [1, 4])


def test_apply_channel_matches_unitary_conjugation():
    # σx ⊗ σz 以概率 1 作用，与直接共轭一致
    table = np.zeros((4, 4))
    table[1, 3] = 1.0
    state = bell_pair().tensor(bell_pair())
    via_channel = apply_channel(state, general_pauli_ptm(table), [1, 3])
    _, K = pauli_branches(table)[0]
    via_unitary = apply_unitary(state, K, [1, 3])
    np.testing.assert_allclose(via_channel.rho, via_unitary.rho, atol=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.05, 0.1, 0.2, 0.25])
@pytest.mark.parametrize("model, corr", [("c2", 1.0), ("c2", -0.5), ("cP", 0.5), ("cP", 1.0)])
def test_no_distillation_fidelity(model, corr, p):
    channel = build_channel(model, p, corr)
    assert no_distill_fidelity(channel) == pytest.approx(1.0 - 3.0 * p, abs=1e-12)
    assert no_distill_fidelity(as_choi(channel)) == pytest.approx(1.0 - 3.0 * p, abs=1e-12)


def test_phase_flip_only_does_not_help():
    for p in (0.05, 0.1, 0.3):
        outcome = basic_distill(_single_qubit_pauli_pair(p3=p))
        assert outcome.fidelity == pytest.approx(1 - 2 * p + 2 * p * p, abs=1e-12)
        assert outcome.success_prob == pytest.approx(1.0, abs=1e-12)
        assert outcome.fidelity <= 1 - p


def test_bit_flip_only_is_purified():
    for p in (0.05, 0.1, 0.3):
        outcome = basic_distill(_single_qubit_pauli_pair(p1=p))
        success = (1 - p) ** 2 + p ** 2
        assert outcome.success_prob == pytest.approx(success, abs=1e-12)
        assert outcome.fidelity == pytest.approx((1 - p) ** 2 / success, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_basic_distill_matches_pauli_branch_enumeration(seed):
    table = np.random.default_rng(seed).dirichlet(np.ones(16)).reshape(4, 4)
    initial = bell_pair().tensor(bell_pair())
    kept = np.zeros((4, 4), dtype=complex)
    success = 0.0
    for weight, K in pauli_branches(table):
        try:
            branch = distill_step(apply_unitary(initial, K, [1, 3]))
        except DegenerateOutcomeError:
            continue
        kept += weight * branch.success_prob * branch.state.rho
        success += weight * branch.success_prob

    outcome = basic_distill(general_pauli_ptm(table))
    assert outcome.success_prob == pytest.approx(success, abs=1e-12)
    np.testing.assert_allclose(outcome.state.rho, kept / success, atol=1e-12)


@pytest.mark.parametrize("convention", CONVENTIONS)
@pytest.mark.parametrize("p", [0.005, 0.02, 0.1, 0.2])
def test_full_distill_uncorrelated_matches_bell_diagonal_recursion(p, convention):
    fidelity, success = _uncorrelated_reference(p)
    for model in ("c2", "cP"):
        outcome = full_distill(build_channel(model, p, 0.0), convention=convention)
        assert outcome.fidelity == pytest.approx(fidelity, abs=1e-12)
        assert outcome.success_prob == pytest.approx(success, abs=1e-12)
        assert outcome.convention == convention


def test_uncorrelated_reference_values():
    assert _uncorrelated_reference(0.1)[0] == pytest.approx(0.845946, abs=1e-6)
    assert _uncorrelated_reference(0.02)[0] == pytest.approx(0.996317, abs=1e-6)


def test_full_distill_second_order_behaviour():
    residuals = []
    for p in (0.005, 0.01, 0.02):
        f_u = full_distill(build_channel("c2", p, 0.0)).fidelity
        residuals.append((1.0 - 8.0 * p * p - f_u) / p ** 3)
    assert all(40.0 < r < 80.0 for r in residuals)
    assert max(residuals) / min(residuals) < 1.15


def test_fully_correlated_pauli_quarter_gives_half_fidelity():
    outcome = full_distill(build_channel("cP", 0.25, 1.0))
    assert outcome.fidelity == pytest.approx(0.5, abs=1e-10)
    np.testing.assert_allclose(outcome.state.rho, np.diag([0.5, 0.0, 0.0, 0.5]), atol=1e-10)


def test_full_distill_accepts_two_channels():
    first = build_channel("c2", 0.1, 0.0)
    same = full_distill(first, first)
    assert same.fidelity == pytest.approx(full_distill(first).fidelity, abs=1e-15)
    mixed = full_distill(first, build_channel("c2", 0.0, 0.0))
    assert mixed.fidelity > same.fidelity


def test_uncorrelated_errors_give_best_fidelity():
    baseline = full_distill(build_channel("c2", 0.1, 0.0)).fidelity
    for rho in (0.8, 0.5, -0.5, 1.0, -1.0):
        assert full_distill(build_channel("c2", 0.1, rho)).fidelity <= baseline + 1e-12


def test_positive_and_negative_correlation_differ():
    for rho in (0.5, 1.0):
        plus = full_distill(build_channel("c2", 0.15, rho)).fidelity
        minus = full_distill(build_channel("c2", 0.15, -rho)).fidelity
        assert abs(plus - minus) > 1e-4


def test_small_error_correlation_costs_little():
    uncorrelated = full_distill(build_channel("c2", 0.02, 0.0)).fidelity
    correlated = full_distill(build_channel("c2", 0.02, 1.0)).fidelity
    assert abs(uncorrelated - correlated) < 0.01


def test_degenerate_post_selection_raises():
    flip = np.diag([1.0, -1.0, -1.0])
    with pytest.raises(DegenerateOutcomeError) as excinfo:
        basic_distill(kron_ptm(flip, np.eye(3)))
    assert excinfo.value.stage == "D"


def test_distill_step_requires_four_qubits():
    with pytest.raises(ChannelArityError):
        distill_step(bell_pair())


@pytest.mark.parametrize("convention", CONVENTIONS)
def test_convention_checkpoint_passes(convention):
    report = convention_checkpoint(convention)
    assert report["passed"], report
    assert set(report["checks"]) == {"half_fidelity", "cubic_residual"}
    assert len(report["residual_ratios"]) == 3


def test_resolve_convention():
    assert resolve_convention("standard") == "standard"
    assert resolve_convention("auto") in CONVENTIONS
    with pytest.raises(InvalidParameterError):
        resolve_convention("diagonal")


def test_transmit_keeps_untransmitted_marginals():
    state = transmit(build_channel("c2", 0.2, 0.5))
    rho = state.rho.reshape([2] * 8)
    # 比特 0 的约化态仍为最大混合态
    reduced = np.einsum("abcdebcd->ae", rho)
    np.testing.assert_allclose(reduced, np.eye(2) / 2, atol=1e-12)


def test_build_channel_rejects_unknown_model():
    with pytest.raises(InvalidParameterError):
        build_channel("c3", 0.1, 0.0)


def test_fidelity_sweep_table():
    df = fidelity_sweep("c2", [0.0, 0.1], [0.0, 1.0], max_workers=2)
    assert list(df.columns) == ["model", "p", "corr", "F_n", "F_u", "success_prob", "error"]
    assert df[["corr", "p"]].values.tolist() == [[0.0, 0.0], [0.0, 0.1], [1.0, 0.0], [1.0, 0.1]]
    np.testing.assert_allclose(df["F_n"], 1.0 - 3.0 * df["p"], atol=1e-12)
    assert (df["error"] == "").all()
    assert df.loc[0, "F_u"] == pytest.approx(1.0)
    assert df.loc[1, "F_u"] == pytest.approx(_uncorrelated_reference(0.1)[0], abs=1e-12)


def test_fidelity_sweep_is_thread_independent():
    single = fidelity_sweep("cP", [0.05, 0.1, 0.15], 0.5, max_workers=1)
    pooled = fidelity_sweep("cP", [0.05, 0.1, 0.15], 0.5, max_workers=3)
    assert single.equals(pooled)


def test_default_correlation_grid_sweep():
    corr_values = DistillSettings().corr_values
    assert corr_values == [1.0, 0.8, 0.5, 0.0, -0.5, -1.0]
    df = fidelity_sweep("c2", [0.1], corr_values, max_workers=2)
    assert df["corr"].tolist() == corr_values
    np.testing.assert_allclose(df["F_n"], 0.7, atol=1e-12)
    best = df.loc[df["F_u"].idxmax(), "corr"]
    assert best == 0.0
