"""Signal-model algebra: convolution matrices, frames, ISI, noise, QPSK."""

import itertools

import numpy as np
import pytest

from conftest import make_link_pieces
from coopcdma.errors import ShapeError
from coopcdma.model import (SystemDims, assemble_received_frame,
                            build_block_signature, build_convolution_matrix,
                            channel_matrix, demodulate_qpsk,
                            draw_spreading_codes, effective_waveforms,
                            generate_isi, generate_multipath_channel,
                            hard_decision, modulate_qpsk)


class TestConvolutionMatrix:
    def test_shape_desk_scale(self, rng):
        code = draw_spreading_codes(1, 16, rng)[0]
        assert build_convolution_matrix(code, 3).shape == (18, 3)

    def test_single_tap_is_the_code(self, rng):
        code = draw_spreading_codes(1, 8, rng)[0]
        D = build_convolution_matrix(code, 1)
        assert D.shape == (8, 1)
        np.testing.assert_allclose(D[:, 0], code)

    def test_three_chip_two_tap_rows(self):
        d1, d2, d3 = 0.3, -0.5, 0.9
        D = build_convolution_matrix(np.array([d1, d2, d3]), 2)
        expected = np.array([[d1, 0.0], [d2, d1], [d3, d2], [0.0, d3]])
        np.testing.assert_allclose(D, expected)

    def test_entry_formula(self, rng):
        code = draw_spreading_codes(1, 6, rng)[0]
        L = 3
        D = build_convolution_matrix(code, L)
        for r in range(D.shape[0]):
            for c in range(L):
                want = code[r - c] if 0 <= r - c < 6 else 0.0
                assert D[r, c] == want


class TestBlockSignature:
    def test_single_block_identity(self, rng):
        code = draw_spreading_codes(1, 8, rng)[0]
        D = build_convolution_matrix(code, 2)
        np.testing.assert_allclose(build_block_signature(D, 0), D)

    def test_three_identical_diagonal_blocks(self, rng):
        code = draw_spreading_codes(1, 16, rng)[0]
        D = build_convolution_matrix(code, 3)
        C = build_block_signature(D, 2)
        assert C.shape == (54, 9)
        for j in range(3):
            np.testing.assert_allclose(C[18 * j:18 * (j + 1), 3 * j:3 * (j + 1)], D)
        # off-diagonal blocks exactly zero
        C_zeroed = C.copy()
        for j in range(3):
            C_zeroed[18 * j:18 * (j + 1), 3 * j:3 * (j + 1)] = 0
        assert np.all(C_zeroed == 0)

    def test_nonzero_count_scales_with_blocks(self, rng):
        code = draw_spreading_codes(1, 5, rng)[0]
        D = build_convolution_matrix(code, 2)
        C = build_block_signature(D, 2)
        assert np.count_nonzero(C) == 3 * np.count_nonzero(D)


class TestMultipathChannel:
    def test_unit_norm(self, rng):
        for L in (1, 2, 3, 5):
            h = generate_multipath_channel(L, rng)
            assert abs(np.linalg.norm(h) ** 2 - 1.0) < 1e-12

    def test_single_tap_magnitude_one(self, rng):
        assert abs(abs(generate_multipath_channel(1, rng)[0]) - 1.0) < 1e-12

    def test_tap_statistics(self, rng):
        draws = np.stack([generate_multipath_channel(3, rng) for _ in range(20000)])
        # zero-mean taps and exchangeable tap-energy distribution
        assert np.abs(draws.mean(axis=0)).max() < 0.02
        energies = (np.abs(draws) ** 2).mean(axis=0)
        np.testing.assert_allclose(energies, 1.0 / 3.0, atol=0.02)


class TestQpsk:
    def test_gray_round_trip(self):
        for bits in itertools.product((0, 1), repeat=2):
            sym = modulate_qpsk(np.array(bits))
            np.testing.assert_array_equal(demodulate_qpsk(sym), np.array(bits))
        np.testing.assert_allclose(modulate_qpsk(np.array([0, 0])),
                                   (1 + 1j) / np.sqrt(2))

    def test_unit_energy(self):
        for bits in itertools.product((0, 1), repeat=2):
            assert abs(abs(modulate_qpsk(np.array(bits))) - 1.0) < 1e-12

    def test_demodulation_tolerates_small_perturbations(self):
        grid = np.linspace(-0.3, 0.3, 7)
        for bits in itertools.product((0, 1), repeat=2):
            sym = modulate_qpsk(np.array(bits))
            for er, ei in itertools.product(grid, grid):
                eps = er + 1j * ei
                if abs(eps) >= 0.5:
                    continue
                np.testing.assert_array_equal(demodulate_qpsk(sym + eps),
                                              np.array(bits))

    def test_hard_decision_matches_demodulation(self, rng):
        soft = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        np.testing.assert_array_equal(demodulate_qpsk(hard_decision(soft)),
                                      demodulate_qpsk(soft))


class TestReceivedFrame:
    def test_single_user_direct_only(self, rng):
        dims = SystemDims(K=1, N=8, L=2, n_r=0)
        code = draw_spreading_codes(1, 8, rng)[0]
        D = build_convolution_matrix(code, 2)
        h = generate_multipath_channel(2, rng)
        frame = assemble_received_frame(
            dims, [build_block_signature(D, 0)], [channel_matrix(h[None, :])],
            [np.ones(1)], [np.ones(1)])
        np.testing.assert_allclose(frame.total, D @ h, atol=1e-14)

    def test_energy_identity(self, rng):
        dims = SystemDims(K=1, N=8, L=1, n_r=0)
        _, sigs, chans = make_link_pieces(dims, rng)
        frame = assemble_received_frame(dims, sigs, chans, [np.ones(1)],
                                        [np.ones(1)])
        assert abs(np.linalg.norm(frame.total) - 1.0) < 1e-12

    def test_superposition_in_users(self, rng):
        dims = SystemDims(K=2, N=8, L=3, n_r=1)
        _, sigs, chans = make_link_pieces(dims, rng)
        syms = [modulate_qpsk(rng.integers(0, 2, size=(dims.hops, 2)))
                for _ in range(2)]
        amps = [np.array([0.8, 0.6]), np.array([0.5, 0.9])]
        both = assemble_received_frame(dims, sigs, chans, syms, amps)
        dims1 = SystemDims(K=1, N=8, L=3, n_r=1)
        parts = [assemble_received_frame(dims1, [sigs[k]], [chans[k]],
                                         [syms[k]], [amps[k]]).total
                 for k in range(2)]
        np.testing.assert_allclose(both.total, parts[0] + parts[1], atol=1e-12)

    def test_homogeneity_in_amplitudes(self, rng):
        dims = SystemDims(K=1, N=8, L=2, n_r=1)
        _, sigs, chans = make_link_pieces(dims, rng)
        syms = [modulate_qpsk(rng.integers(0, 2, size=(dims.hops, 2)))]
        base = assemble_received_frame(dims, sigs, chans, syms,
                                       [np.array([1.0, 1.0])]).total
        M = dims.M
        scaled = assemble_received_frame(dims, sigs, chans, syms,
                                         [np.array([2.0, 1.0])]).total
        np.testing.assert_allclose(scaled[:M], 2.0 * base[:M], atol=1e-12)
        np.testing.assert_allclose(scaled[M:], base[M:], atol=1e-12)

    def test_per_hop_stacking_oracle(self, rng):
        """The stacked frame equals independently built per-hop receptions."""
        dims = SystemDims(K=2, N=8, L=3, n_r=1)
        codes, sigs, chans = make_link_pieces(dims, rng)
        syms = [modulate_qpsk(rng.integers(0, 2, size=(dims.hops, 2)))
                for _ in range(2)]
        amps = [np.array([0.9, 0.4]), np.array([0.3, 0.95])]
        frame = assemble_received_frame(dims, sigs, chans, syms, amps)
        M, L = dims.M, dims.L
        for hop in range(dims.hops):
            expected = np.zeros(M, dtype=complex)
            for k in range(2):
                D = build_convolution_matrix(codes[k], L)
                h = np.asarray(chans[k])[hop * L:(hop + 1) * L, hop]
                expected += amps[k][hop] * syms[k][hop] * (D @ h)
            np.testing.assert_allclose(frame.total[hop * M:(hop + 1) * M],
                                       expected, atol=1e-12)

    def test_component_identity(self, rng):
        dims = SystemDims(K=1, N=8, L=2, n_r=0)
        _, sigs, chans = make_link_pieces(dims, rng)
        frame = assemble_received_frame(dims, sigs, chans, [np.ones(1)],
                                        [np.ones(1)],
                                        isi=0.1 * np.ones(dims.stack),
                                        sigma2=0.5, rng=rng)
        np.testing.assert_allclose(
            frame.total,
            frame.signal_part + frame.isi_part + frame.noise_part, atol=0)

    def test_shape_errors_name_the_user(self, rng):
        dims = SystemDims(K=2, N=8, L=2, n_r=0)
        _, sigs, chans = make_link_pieces(dims, rng)
        syms = [np.ones(1), np.ones(2)]  # second user malformed
        with pytest.raises(ShapeError, match="user 1"):
            assemble_received_frame(dims, sigs, chans, syms,
                                    [np.ones(1), np.ones(1)])


class TestIsi:
    def test_single_tap_no_isi(self, rng):
        dims = SystemDims(K=1, N=8, L=1, n_r=0)
        _, sigs, chans = make_link_pieces(dims, rng)
        eta = generate_isi([np.ones(1)], [np.ones(1)], chans, sigs, [np.ones(1)])
        assert np.all(eta == 0)

    def test_zero_neighbors_no_isi(self, rng):
        dims = SystemDims(K=2, N=8, L=3, n_r=1)
        _, sigs, chans = make_link_pieces(dims, rng)
        zeros = [np.zeros(dims.hops) for _ in range(2)]
        eta = generate_isi(zeros, zeros, chans, sigs,
                           [np.ones(dims.hops)] * 2)
        assert np.all(eta == 0)

    def test_chip_convolution_oracle(self, rng):
        """ISI matches a full chip-rate convolution of a 3-symbol sequence."""
        dims = SystemDims(K=1, N=4, L=2, n_r=0)
        codes, sigs, chans = make_link_pieces(dims, rng)
        h = np.asarray(chans[0])[:, 0]
        prev_s, cur_s, next_s = modulate_qpsk(rng.integers(0, 2, size=(3, 2)))
        a = 0.85

        # oracle: convolve the full 3-symbol chip sequence with the channel,
        # then cut out the middle symbol's observation window
        chips = np.concatenate([codes[0], codes[0], codes[0]])
        seq = np.repeat([prev_s, cur_s, next_s], dims.N) * chips * a
        full = np.convolve(seq, h)
        window = full[dims.N:dims.N + dims.M]

        frame = assemble_received_frame(dims, sigs, chans, [np.array([cur_s])],
                                        [np.array([a])])
        eta = generate_isi([np.array([prev_s])], [np.array([next_s])],
                           chans, sigs, [np.array([a])])
        np.testing.assert_allclose(frame.total + eta, window, atol=1e-12)


class TestNoise:
    def test_noise_calibration(self, rng):
        dims = SystemDims(K=1, N=8, L=1, n_r=0)
        _, sigs, chans = make_link_pieces(dims, rng)
        sigma2 = 0.7
        samples = []
        for _ in range(1000):
            frame = assemble_received_frame(dims, sigs, chans, [np.ones(1)],
                                            [np.ones(1)], sigma2=sigma2, rng=rng)
            samples.append(frame.noise_part)
        var = np.mean(np.abs(np.concatenate(samples)) ** 2)
        assert abs(var - sigma2) / sigma2 < 0.03

    def test_zero_noise_for_zero_sigma(self, rng):
        dims = SystemDims(K=1, N=8, L=1, n_r=0)
        _, sigs, chans = make_link_pieces(dims, rng)
        frame = assemble_received_frame(dims, sigs, chans, [np.ones(1)],
                                        [np.ones(1)], sigma2=0.0, rng=rng)
        assert np.all(frame.noise_part == 0)


class TestSystemDims:
    def test_derived_quantities(self):
        dims = SystemDims(K=4, N=16, L=3, n_r=2, P=1500)
        assert dims.M == 18 and dims.hops == 3 and dims.stack == 54

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            SystemDims(K=0, N=16, L=3, n_r=0)
        with pytest.raises(ValueError):
            SystemDims(K=1, N=16, L=3, n_r=-1)


class TestEffectiveWaveforms:
    def test_columns_are_per_hop_products(self, rng):
        code = draw_spreading_codes(1, 8, rng)[0]
        D = build_convolution_matrix(code, 2)
        h_hops = np.stack([generate_multipath_channel(2, rng) for _ in range(2)])
        X = effective_waveforms(D, h_hops)
        assert X.shape == (9, 2)
        for j in range(2):
            np.testing.assert_allclose(X[:, j], D @ h_hops[j])
