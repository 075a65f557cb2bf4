"""Shared fixtures for the simulation test suite."""

import numpy as np
import pytest

from coopcdma.model import (SystemDims, build_block_signature,
                            build_convolution_matrix, channel_matrix,
                            draw_spreading_codes, generate_multipath_channel)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_link_pieces(dims: SystemDims, rng: np.random.Generator):
    """Codes, block signatures, and channel matrices for one scenario."""
    codes = draw_spreading_codes(dims.K, dims.N, rng)
    sigs, chans = [], []
    for k in range(dims.K):
        D = build_convolution_matrix(codes[k], dims.L)
        sigs.append(build_block_signature(D, dims.n_r))
        h_hops = np.stack([generate_multipath_channel(dims.L, rng)
                           for _ in range(dims.hops)])
        chans.append(channel_matrix(h_hops))
    return codes, sigs, chans
