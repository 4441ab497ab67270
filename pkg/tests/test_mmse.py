import numpy as np
import pytest
from numpy.testing import assert_allclose

from jpais import mmse, model


def rng(seed=0):
    return np.random.default_rng(seed)


def make_signatures(seed, users=2, gain=8, paths=3, relays=1):
    r = rng(seed)
    codes = model.generate_spreading_codes(r, users, gain)
    channels = model.generate_link_channels(r, paths, relays)
    matrix = model.assemble_block_channel_matrix(channels.direct, channels.relay_to_dest)
    stacks = np.stack([
        model.stack_code_matrix(model.build_convolution_matrix(codes[k], paths), relays)
        for k in range(users)])
    return stacks @ matrix, matrix, stacks


# ---------------------------------------------------------------------------
# covariance
# ---------------------------------------------------------------------------

def test_covariance_single_user_rank_one():
    signatures, _, _ = make_signatures(1, users=1, relays=0)
    amplitudes = np.ones((1, 1), dtype=complex)
    cov = mmse.build_covariance(signatures, amplitudes, 0.0, 0)
    s = signatures[0, :, 0]
    assert_allclose(cov.matrix, np.outer(s, s.conj()), atol=1e-12)
    assert np.linalg.matrix_rank(cov.matrix) == 1
    assert_allclose(cov.cross, s, atol=1e-12)


def test_covariance_zero_amplitudes_is_noise_identity():
    signatures, _, _ = make_signatures(2)
    amplitudes = np.zeros((2, 2), dtype=complex)
    cov = mmse.build_covariance(signatures, amplitudes, 1.0, 0)
    assert_allclose(cov.matrix, np.eye(signatures.shape[1]), atol=1e-12)


def test_covariance_rejects_negative_noise():
    signatures, _, _ = make_signatures(3)
    with pytest.raises(ValueError):
        mmse.build_covariance(signatures, np.ones((2, 2)), -0.1, 0)


def test_covariance_hermitian_positive_definite():
    signatures, _, _ = make_signatures(4)
    amplitudes = np.full((2, 2), np.sqrt(0.5), dtype=complex)
    cov = mmse.build_covariance(signatures, amplitudes, 0.3, 1)
    assert np.max(np.abs(cov.matrix - cov.matrix.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(cov.matrix).min() > 0


def test_covariance_matches_sample_covariance():
    # Monte Carlo oracle: draw symbol diagonals from the coherence model and
    # compare the model covariance against the sample covariance
    signatures, matrix, stacks = make_signatures(5, users=2, gain=6, paths=2, relays=1)
    r = rng(55)
    amplitudes = (r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2))) * 0.5
    beta = np.array([[1.0, 0.85 + 0.2j], [1.0, 0.7 - 0.3j]], dtype=complex)
    sigma2 = 0.2
    cov = mmse.build_covariance(signatures, amplitudes, sigma2, 0, betas=beta)

    trials = 100_000
    dim = signatures.shape[1]
    total = np.zeros((dim, dim), dtype=complex)
    bits = model.random_bits(r, 2, trials)
    direct = model.qpsk_modulate(bits)
    samples = np.zeros((trials, dim), dtype=complex)
    for k in range(2):
        scale = np.sqrt((1 - np.abs(beta[k]) ** 2).clip(0) / 2)
        eps = (r.standard_normal((trials, 2)) + 1j * r.standard_normal((trials, 2))) * scale
        diags = beta[k][None, :] * direct[k][:, None] + eps
        samples += np.einsum('dl,tl->td', signatures[k], diags * amplitudes[k])
    samples += (r.standard_normal((trials, dim))
                + 1j * r.standard_normal((trials, dim))) * np.sqrt(sigma2 / 2)
    sample_cov = samples.conj().T @ samples / trials
    rel = np.linalg.norm(sample_cov.T - cov.matrix) / np.linalg.norm(cov.matrix)
    assert rel < 0.02


# ---------------------------------------------------------------------------
# receiver
# ---------------------------------------------------------------------------

def test_receiver_identity_covariance():
    p = np.array([1.0, 1j, -0.5])
    cov = mmse.CovariancePair(matrix=np.eye(3, dtype=complex), cross=p)
    assert_allclose(mmse.mmse_receiver(cov), p)


def test_receiver_matched_filter_limit():
    signatures, _, _ = make_signatures(6)
    amplitudes = np.full((2, 2), np.sqrt(0.5), dtype=complex)
    cov = mmse.build_covariance(signatures, amplitudes, 1e4, 0)
    taps = mmse.mmse_receiver(cov)
    p = cov.cross
    cosine = abs(np.vdot(taps, p)) / (np.linalg.norm(taps) * np.linalg.norm(p))
    assert cosine > 0.999


def test_receiver_beats_matched_filter_sinr():
    # exhaustive small case: two users, N=4; MMSE output SINR must dominate
    signatures, _, _ = make_signatures(7, users=2, gain=4, paths=2, relays=0)
    amplitudes = np.ones((2, 1), dtype=complex)
    sigma2 = 0.2
    cov = mmse.build_covariance(signatures, amplitudes, sigma2, 0)
    desired = cov.cross

    def sinr(taps):
        signal = abs(np.vdot(taps, desired)) ** 2
        total = np.real(taps.conj() @ cov.matrix @ taps)
        return signal / (total - signal)

    assert sinr(mmse.mmse_receiver(cov)) >= sinr(desired) - 1e-12


def test_receiver_raises_on_singular():
    cov = mmse.CovariancePair(matrix=np.zeros((3, 3), dtype=complex),
                              cross=np.ones(3, dtype=complex))
    with pytest.raises(np.linalg.LinAlgError):
        mmse.mmse_receiver(cov)


def test_wiener_residual_invariant():
    for seed in range(5):
        signatures, _, _ = make_signatures(seed, users=3, relays=1)
        amplitudes = np.full((3, 2), np.sqrt(0.5), dtype=complex)
        cov = mmse.build_covariance(signatures, amplitudes, 0.1, seed % 3)
        taps = mmse.mmse_receiver(cov)
        residual = np.linalg.norm(cov.matrix @ taps - cov.cross) / np.linalg.norm(cov.cross)
        assert residual < 1e-10


# ---------------------------------------------------------------------------
# power allocation
# ---------------------------------------------------------------------------

def test_allocation_identity_covariance_aligns_with_cross():
    v = np.array([0.5, -1j], dtype=complex)
    pcov = mmse.PowerCovariancePair(matrix=np.eye(2, dtype=complex), cross=v)
    a = mmse.mmse_power_allocation(pcov, 0.0, 2.0)
    assert abs(np.linalg.norm(a) ** 2 - 2.0) < 1e-12
    cosine = abs(np.vdot(a, v)) / (np.linalg.norm(a) * np.linalg.norm(v))
    assert cosine == pytest.approx(1.0)


def test_allocation_default_ridge_meets_constraint():
    signatures, _, _ = make_signatures(8)
    taps = rng(8).standard_normal(signatures.shape[1]) + 0j
    pcov = mmse.power_normal_equations(signatures[0], taps)
    a = mmse.mmse_power_allocation(pcov, 0.02, 1.0)
    assert abs(np.linalg.norm(a) ** 2 - 1.0) < 1e-9


def test_allocation_symmetric_links_equal_magnitude():
    # identical direct and relay channels: symmetry forces equal magnitudes
    r = rng(9)
    gain, paths = 8, 2
    code = model.generate_spreading_codes(r, 1, gain)
    taps_h = (r.standard_normal(paths) + 1j * r.standard_normal(paths)) / np.sqrt(2)
    matrix = model.assemble_block_channel_matrix(taps_h, taps_h[np.newaxis, :])
    stack = model.stack_code_matrix(model.build_convolution_matrix(code[0], paths), 1)
    signature = stack @ matrix
    cov = mmse.build_covariance(signature[np.newaxis], np.full((1, 2), np.sqrt(0.5)), 0.1, 0)
    w = mmse.mmse_receiver(cov)
    pcov = mmse.power_normal_equations(signature, w)
    a = mmse.mmse_power_allocation(pcov, 0.02, 1.0)
    assert abs(a[0]) == pytest.approx(abs(a[1]), rel=1e-9)


# ---------------------------------------------------------------------------
# alternating solve
# ---------------------------------------------------------------------------

def test_alternating_single_user_noiseless_limit():
    signatures, _, _ = make_signatures(10, users=1, relays=1)
    solution = mmse.alternating_jpais_solve(signatures, 1e-8, 1.0)
    assert solution.mse[0] < 1e-6


def test_alternating_fixed_point():
    # the coupled sweep contracts linearly (~0.85/iteration), so give it room
    signatures, _, _ = make_signatures(11, users=2, relays=1)
    tol = 1e-6
    first = mmse.alternating_jpais_solve(signatures, 0.1, 1.0, n_iters=400, tol=tol)
    assert first.converged
    again = mmse.alternating_jpais_solve(signatures, 0.1, 1.0,
                                         n_iters=first.iterations + 1, tol=1e-14)
    delta_w = np.linalg.norm(again.filters - first.filters) / np.linalg.norm(first.filters)
    delta_a = np.linalg.norm(again.allocations - first.allocations) / np.linalg.norm(
        first.allocations)
    assert delta_w < 10 * tol and delta_a < 10 * tol


def test_alternating_beats_equal_power_mse():
    # full-scale instance: joint solution must not lose to the equal-power
    # start on the same realization (direct model evaluation oracle)
    signatures, _, _ = make_signatures(12, users=6, gain=16, paths=3, relays=2)
    sigma2 = 1.0 / 10 ** 1.2
    solution = mmse.alternating_jpais_solve(signatures, sigma2, 1.0, 0.02)
    equal = np.full((6, 3), np.sqrt(1 / 3), dtype=complex)
    for k in range(6):
        cov = mmse.build_covariance(signatures, equal, sigma2, k)
        cis_mse = mmse.model_mse(mmse.mmse_receiver(cov), cov)
        assert solution.mse[k] <= cis_mse + 1e-12


def test_alternating_w_step_monotone():
    signatures, _, _ = make_signatures(13, users=3, relays=1)
    solution = mmse.alternating_jpais_solve(signatures, 0.2, 1.0, n_iters=8)
    for sweep in solution.w_step_mse:
        for before, after in sweep:
            assert after <= before + 1e-12


def test_allocation_constraint_invariant():
    signatures, _, _ = make_signatures(14, users=4, relays=2)
    solution = mmse.alternating_jpais_solve(signatures, 0.15, 1.0)
    norms = np.linalg.norm(solution.allocations, axis=1) ** 2
    assert np.max(np.abs(norms - 1.0)) < 1e-9


def test_scale_coherence_of_decisions():
    # scaling all channel powers and the noise by the same factor leaves the
    # soft decisions identical when the noise realization scales along
    signatures, matrix, stacks = make_signatures(15, users=2, relays=1)
    r = rng(15)
    dim = signatures.shape[1]
    amplitudes = np.full((2, 2), np.sqrt(0.5), dtype=complex)
    sigma2 = 0.1
    noise = (r.standard_normal(dim) + 1j * r.standard_normal(dim)) * np.sqrt(sigma2 / 2)
    diags = model.qpsk_modulate(model.random_bits(r, 2, 1))[:, 0]
    symbol_diags = np.tile(diags[:, None], (1, 2))
    received = model.compact_received_vector(stacks, matrix, symbol_diags, amplitudes, noise)

    factor = 7.3
    cov = mmse.build_covariance(signatures, amplitudes, sigma2, 0)
    cov_scaled = mmse.build_covariance(np.sqrt(factor) * signatures, amplitudes,
                                       factor * sigma2, 0)
    soft = np.vdot(mmse.mmse_receiver(cov), received)
    soft_scaled = np.vdot(mmse.mmse_receiver(cov_scaled), np.sqrt(factor) * received)
    assert_allclose(soft, soft_scaled, rtol=1e-9)
