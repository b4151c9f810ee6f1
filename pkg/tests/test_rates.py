"""Per-realization SINR machinery against hand and brute-force oracles."""

import math

import numpy as np
import pytest

from mwrelay import (
    DegenerateChannelError,
    SingularSystemError,
    SlotIndexer,
    build_zf_stage,
    conventional_dl_sinr,
    instantaneous_se,
    proposed_dl_sinr,
    relay_precode,
    uplink_sinr,
    zf_sinr,
)
from mwrelay.channel import STREAM_CHANNEL, draw_small_scale, substream


def two_branch_partner(k, t, K):
    """Independent two-branch routing map used only by oracles here."""
    s = k + t
    while s <= 0:
        s += K
    return s % K if s % K != 0 else K


def random_channel(M, K, seed):
    return draw_small_scale(M, K, substream(seed, STREAM_CHANNEL, 0))


def test_uplink_single_user_no_interference():
    G = np.array([[1.0], [1.0]], dtype=complex)
    assert uplink_sinr(G, 1.0, 1) == pytest.approx(2.0)


def test_uplink_orthogonal_columns():
    G = np.diag([2.0, 3.0]).astype(complex)
    assert uplink_sinr(G, 1.0, 1) == pytest.approx(4.0)
    assert uplink_sinr(G, 1.0, 2) == pytest.approx(9.0)


def test_uplink_hand_oracle():
    # ||g_1||^4 = 1, |g_1^H g_2|^2 = 1, ||g_1||^2 = 1.
    G = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
    assert uplink_sinr(G, 1.0, 1) == pytest.approx(0.5)


def test_uplink_zero_column_rejected():
    G = np.zeros((3, 2), dtype=complex)
    G[:, 1] = 1.0
    with pytest.raises(DegenerateChannelError):
        uplink_sinr(G, 1.0, 1)


def brute_force_dl_sinr(G, beta, p_r, k, t, excluded_symbols):
    M, K = G.shape
    c = p_r / (M * float(np.sum(beta)))
    gk = G[:, k - 1]
    n2 = float(np.real(gk.conj() @ gk))
    interference = 0.0
    for i in range(1, K + 1):
        if two_branch_partner(i, t, K) in excluded_symbols:
            continue
        interference += float(abs(gk.conj() @ G[:, i - 1]) ** 2)
    return c * n2**2 / (c * interference + 1.0)


def test_conventional_matches_enumeration_oracle():
    beta = np.array([1.0, 0.5, 2.0])
    G = random_channel(4, 3, seed=21) * np.sqrt(beta)
    for k in range(1, 4):
        for t in range(1, 3):
            expected = brute_force_dl_sinr(
                G, beta, 7.0, k, t,
                {two_branch_partner(k, t, 3), two_branch_partner(k - t, t, 3)},
            )
            assert conventional_dl_sinr(G, beta, 7.0, k, t) == pytest.approx(expected, rel=1e-12)


def test_conventional_no_interferers_k2():
    G = random_channel(6, 2, seed=3)
    beta = np.ones(2)
    c = 10.0 / (6 * 2)
    n2 = float(np.linalg.norm(G[:, 0]) ** 2)
    assert conventional_dl_sinr(G, beta, 10.0, 1, 1) == pytest.approx(c * n2**2, rel=1e-12)


def test_conventional_orthogonal_columns():
    G = np.zeros((4, 3), dtype=complex)
    G[0, 0] = G[1, 1] = G[2, 2] = 1.0
    beta = np.ones(3)
    c = 5.0 / (4 * 3)
    for k in range(1, 4):
        assert conventional_dl_sinr(G, beta, 5.0, k, 1) == pytest.approx(c, rel=1e-12)


def test_conventional_interference_term_count():
    # Exactly K-2 terms: on an all-ones rank-one channel every cross product
    # equals M^2, so the interference sum is (K-2) * M^2 exactly.
    M, K = 3, 5
    G = np.ones((M, K), dtype=complex)
    beta = np.ones(K)
    c = 2.0 / (M * K)
    got = conventional_dl_sinr(G, beta, 2.0, 1, 2)
    expected = c * M**2 / (c * (K - 2) * M**2 + 1.0)
    assert got == pytest.approx(expected, rel=1e-12)


def test_proposed_equals_conventional_at_slot_one():
    G = random_channel(8, 7, seed=5)
    beta = np.linspace(0.5, 2.0, 7)
    Gc = G * np.sqrt(beta)
    for k in range(1, 8):
        assert proposed_dl_sinr(Gc, beta, 10.0, k, 1) == conventional_dl_sinr(Gc, beta, 10.0, k, 1)


def test_proposed_matches_enumeration_oracle_k3():
    G = random_channel(4, 3, seed=13)
    beta = np.ones(3)
    for k in range(1, 4):
        expected = brute_force_dl_sinr(
            G, beta, 3.0, k, 1,
            {two_branch_partner(k - 1 + d, 1, 3) for d in range(2)},
        )
        assert proposed_dl_sinr(G, beta, 3.0, k, 1) == pytest.approx(expected, rel=1e-12)


def test_proposed_monotone_in_slot():
    G = random_channel(16, 9, seed=8)
    beta = np.ones(9)
    idx = SlotIndexer(9)
    for k in range(1, 10):
        values = [proposed_dl_sinr(G, beta, 10.0, k, t) for t in range(1, idx.sic_slots + 1)]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


def test_proposed_dominates_conventional_every_slot():
    G = random_channel(12, 8, seed=30)
    beta = np.ones(8)
    for k in range(1, 9):
        for t in range(1, SlotIndexer(8).sic_slots + 1):
            assert proposed_dl_sinr(G, beta, 4.0, k, t) >= conventional_dl_sinr(G, beta, 4.0, k, t) - 1e-15


def test_slot_range_validation():
    G = random_channel(4, 4, seed=1)
    beta = np.ones(4)
    with pytest.raises(ValueError):
        conventional_dl_sinr(G, beta, 1.0, 1, 4)
    with pytest.raises(ValueError):
        proposed_dl_sinr(G, beta, 1.0, 1, 3)  # sic slots = 2 for K=4


def test_zf_stage_k3_closed_form():
    G = random_channel(6, 3, seed=2)
    for k in range(1, 4):
        stage = build_zf_stage(G, k)
        partner = (k % 3) + 1
        inner = abs(G[:, k - 1].conj() @ G[:, partner - 1]) ** 2
        assert stage.noise_gain[0] == pytest.approx(1.0 / inner, rel=1e-12)


def test_zf_stage_empty_for_k2():
    G = random_channel(8, 2, seed=2)
    stage = build_zf_stage(G, 1)
    assert stage.n_unknowns == 0
    assert stage.noise_gain.size == 0
    assert stage.combiner().shape == (0, 1)


def test_zf_noise_gain_matches_dense_inverse():
    # Oracle builds the offset-ordered coefficient matrix from scratch and
    # inverts the Gram densely.
    rng = substream(77, STREAM_CHANNEL, 5)
    for K in (5, 8, 10):
        idx = SlotIndexer(K)
        M = 8 if K == 5 else 2 * K
        G = draw_small_scale(M, K, rng)
        for k in (1, K // 2 + 1):
            A = np.array([
                [G[:, k - 1].conj() @ G[:, two_branch_partner(k, r + n - 1, K) - 1]
                 for n in range(1, idx.n_unknowns + 1)]
                for r in range(1, idx.sic_slots + 1)
            ])
            dense = np.linalg.inv(A.conj().T @ A)
            stage = build_zf_stage(G, k)
            assert np.allclose(stage.noise_gain, np.diag(dense).real, rtol=1e-10)


def test_zf_combiner_inverts_mixing():
    G = random_channel(16, 9, seed=4)
    for k in range(1, 10):
        stage = build_zf_stage(G, k)
        eye = stage.combiner() @ stage.mixing
        assert np.max(np.abs(eye - np.eye(stage.n_unknowns))) < 1e-9


def test_zf_singular_gram_detected():
    # Identical columns collapse the residual coefficients to rank one.
    base = random_channel(6, 1, seed=6)[:, 0]
    G = np.stack([base] * 5, axis=1)
    with pytest.raises(SingularSystemError) as info:
        build_zf_stage(G, 1)
    assert info.value.condition > 1e10 or math.isinf(info.value.condition)


def test_zf_sinr_constructed_identity():
    # For K=3 the noise gain is 1/|g_k^H g_j|^2; pick the cross product so
    # the SINR lands exactly at 1.
    M, K, p_r = 4, 3, 8.0
    target = M * 3.0 / p_r
    G = np.zeros((M, K), dtype=complex)
    G[0, 0] = 1.0
    G[0, 1] = math.sqrt(target)
    G[1, 2] = 1.0
    stage = build_zf_stage(G, 1)
    assert zf_sinr(stage, np.ones(3), p_r, M, 1) == pytest.approx(1.0, rel=1e-12)


def test_zf_sinr_quartic_homogeneity():
    G = random_channel(12, 7, seed=9)
    beta = np.ones(7)
    scale = 1.7 - 0.3j
    s1 = build_zf_stage(G, 2)
    s2 = build_zf_stage(scale * G, 2)
    gain = abs(scale) ** 4
    assert np.allclose(s2.noise_gain * gain, s1.noise_gain, rtol=1e-10)
    for n in range(1, s1.n_unknowns + 1):
        assert zf_sinr(s2, beta, 5.0, 12, n) == pytest.approx(
            gain * zf_sinr(s1, beta, 5.0, 12, n), rel=1e-10
        )


def test_zf_sinr_matches_combiner_row_norm():
    G = random_channel(10, 8, seed=14)
    beta = np.full(8, 0.8)
    stage = build_zf_stage(G, 3)
    rows = stage.combiner()
    c = 6.0 / (10 * beta.sum())
    for n in range(1, stage.n_unknowns + 1):
        explicit = c / float(np.linalg.norm(rows[n - 1]) ** 2)
        assert zf_sinr(stage, beta, 6.0, 10, n) == pytest.approx(explicit, rel=1e-10)


def test_zf_sinr_index_validation():
    G = random_channel(8, 5, seed=15)
    stage = build_zf_stage(G, 1)
    with pytest.raises(ValueError):
        zf_sinr(stage, np.ones(5), 1.0, 8, stage.n_unknowns + 1)


def test_instantaneous_se_values():
    assert instantaneous_se(0.0) == 0.0
    assert instantaneous_se(1.0) == 1.0
    assert instantaneous_se(3.0) == 2.0
    assert np.allclose(instantaneous_se(np.array([0.0, 3.0])), [0.0, 2.0])
    with pytest.raises(ValueError):
        instantaneous_se(-0.1)


def test_relay_precode_single_column():
    G = np.array([[1.0], [2.0]], dtype=complex)
    out = relay_precode(G, np.array([2.0]), 8.0, np.array([1.0]))
    assert np.allclose(out, math.sqrt(8.0 / (2 * 2.0)) * G[:, 0])


def test_relay_precode_zero_symbols():
    G = random_channel(4, 3, seed=2)
    out = relay_precode(G, np.ones(3), 2.0, np.zeros(3))
    assert np.array_equal(out, np.zeros(4))


def test_relay_precode_average_power():
    # E||s||^2 = p_r because E||g_i||^2 = M beta_i.
    rng = substream(55, STREAM_CHANNEL, 9)
    M, K, p_r = 16, 6, 4.0
    beta = np.array([0.2, 0.5, 1.0, 1.5, 2.0, 0.8])
    total = 0.0
    trials = 10_000
    for _ in range(trials):
        G = draw_small_scale(M, K, rng) * np.sqrt(beta)
        x = np.exp(2j * np.pi * rng.uniform(size=K))
        total += float(np.linalg.norm(relay_precode(G, beta, p_r, x)) ** 2)
    assert abs(total / trials - p_r) / p_r < 0.02
