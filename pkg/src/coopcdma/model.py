"""Signal model for a multi-relay amplify-and-forward DS-CDMA uplink.

Builds the deterministic algebra of the chip-synchronous model (convolution
matrices, block signatures, channel matrices) and the stochastic pieces
(multipath channels, QPSK symbols, ISI, noise) that make up the stacked
received vector observed at the destination in one symbol interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError

QPSK_SCALE = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class SystemDims:
    """Integer dimensions governing every matrix shape in the simulation.

    K: users, N: chips per symbol, L: multipath taps, n_r: relays,
    P: symbols per packet. The chip-window length M = N + L - 1 is derived.
    """

    K: int
    N: int
    L: int
    n_r: int
    P: int = 1

    def __post_init__(self):
        if self.K < 1 or self.N < 1 or self.L < 1 or self.P < 1:
            raise ValueError(f"K, N, L, P must be >= 1, got {self}")
        if self.n_r < 0:
            raise ValueError(f"n_r must be >= 0, got {self.n_r}")

    @property
    def M(self) -> int:
        return self.N + self.L - 1

    @property
    def hops(self) -> int:
        """Number of destination-facing links per user (direct + relays)."""
        return self.n_r + 1

    @property
    def stack(self) -> int:
        """Length of the stacked received vector at the destination."""
        return self.hops * self.M


def draw_spreading_codes(K: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """Random binary +-1/sqrt(N) signatures, one row per user."""
    return (2 * rng.integers(0, 2, size=(K, N)) - 1) / np.sqrt(N)


def build_convolution_matrix(code: np.ndarray, L: int) -> np.ndarray:
    """M x L matrix whose column j is the signature shifted down by j chips."""
    if L < 1:
        raise ValueError("L must be >= 1")
    code = np.asarray(code)
    N = code.shape[0]
    M = N + L - 1
    D = np.zeros((M, L), dtype=complex)
    for c in range(L):
        D[c:c + N, c] = code
    return D


def build_block_signature(D: np.ndarray, n_r: int) -> np.ndarray:
    """Block-diagonal replication of a convolution matrix, one block per hop."""
    if n_r < 0:
        raise ValueError("n_r must be >= 0")
    return np.kron(np.eye(n_r + 1), D)


def generate_multipath_channel(L: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-norm L-tap channel with i.i.d. circular complex Gaussian taps."""
    h = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2.0)
    return h / np.linalg.norm(h)


def channel_matrix(h_hops: np.ndarray) -> np.ndarray:
    """(hops*L) x hops matrix with the hop-j channel in rows j*L..(j+1)*L-1."""
    h_hops = np.atleast_2d(np.asarray(h_hops))
    hops, L = h_hops.shape
    H = np.zeros((hops * L, hops), dtype=complex)
    for j in range(hops):
        H[j * L:(j + 1) * L, j] = h_hops[j]
    return H


def modulate_qpsk(bits: np.ndarray) -> np.ndarray:
    """Gray-mapped unit-energy QPSK: bit pair (b0, b1) -> ((1-2*b0)+j(1-2*b1))/sqrt(2)."""
    bits = np.asarray(bits)
    return ((1 - 2 * bits[..., 0]) + 1j * (1 - 2 * bits[..., 1])) * QPSK_SCALE


def demodulate_qpsk(soft: np.ndarray) -> np.ndarray:
    """Sign-based bit decisions per quadrature, inverse of modulate_qpsk."""
    soft = np.asarray(soft)
    return np.stack([(soft.real < 0).astype(np.int8),
                     (soft.imag < 0).astype(np.int8)], axis=-1)


def hard_decision(soft: np.ndarray) -> np.ndarray:
    """Nearest QPSK constellation point."""
    soft = np.asarray(soft)
    re = np.where(soft.real >= 0, 1.0, -1.0)
    im = np.where(soft.imag >= 0, 1.0, -1.0)
    return (re + 1j * im) * QPSK_SCALE


@dataclass
class ReceivedFrame:
    """Stacked observation for one symbol interval, with separable components."""

    total: np.ndarray
    signal_part: np.ndarray
    isi_part: np.ndarray
    noise_part: np.ndarray
    sigma2: float


def effective_waveforms(D: np.ndarray, h_hops: np.ndarray) -> np.ndarray:
    """M x hops chip waveforms D @ h_j, one column per destination-facing hop."""
    return D @ np.atleast_2d(np.asarray(h_hops)).T


def generate_isi(prev_symbols, next_symbols, channels, signatures, amps) -> np.ndarray:
    """Multipath spill-over of the adjacent symbols into the current window.

    Per user and hop, the previous symbol's chip waveform contributes its last
    L-1 chips at the head of the window and the next symbol its first L-1
    chips at the tail, scaled by the same amplitudes and channels as the main
    term. Inputs are per-user sequences; adjacent symbols are zero at packet
    edges.
    """
    K = len(signatures)
    C0 = np.asarray(signatures[0])
    stack = C0.shape[0]
    hops = np.asarray(channels[0]).shape[1]
    L = np.asarray(channels[0]).shape[0] // hops
    M = stack // hops
    N = M - L + 1
    eta = np.zeros(stack, dtype=complex)
    if L == 1:
        return eta
    for k in range(K):
        X = np.asarray(signatures[k]) @ np.asarray(channels[k])
        a = np.asarray(amps[k])
        prev = np.asarray(prev_symbols[k])
        nxt = np.asarray(next_symbols[k])
        for j in range(hops):
            x = X[j * M:(j + 1) * M, j]
            blk = eta[j * M:(j + 1) * M]
            blk[:L - 1] += a[j] * prev[j] * x[N:]
            blk[N:] += a[j] * nxt[j] * x[:L - 1]
    return eta


def draw_noise(stack: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian noise with total variance sigma2 per entry."""
    if sigma2 == 0.0:
        return np.zeros(stack, dtype=complex)
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(stack) + 1j * rng.standard_normal(stack))


def assemble_received_frame(dims: SystemDims, signatures, channels, symbols, amps,
                            isi=None, sigma2: float = 0.0,
                            rng: np.random.Generator | None = None) -> ReceivedFrame:
    """Stacked received vector r = sum_k C_k H_k B_k a_k + eta + n.

    signatures: per-user block signatures C_k, channels: per-user channel
    matrices H_k, symbols: per-user length-hops symbol vectors (direct symbol
    first, then the relayed symbols), amps: per-user length-hops amplitudes.
    """
    hops, stack = dims.hops, dims.stack
    signal = np.zeros(stack, dtype=complex)
    for k in range(dims.K):
        C = np.asarray(signatures[k])
        H = np.asarray(channels[k])
        s = np.asarray(symbols[k])
        a = np.asarray(amps[k])
        if C.shape != (stack, hops * dims.L):
            raise ShapeError(f"user {k}: block signature shape {C.shape}, "
                             f"expected {(stack, hops * dims.L)}")
        if H.shape != (hops * dims.L, hops):
            raise ShapeError(f"user {k}: channel matrix shape {H.shape}, "
                             f"expected {(hops * dims.L, hops)}")
        if s.shape != (hops,):
            raise ShapeError(f"user {k}: symbol vector shape {s.shape}, expected ({hops},)")
        if a.shape != (hops,):
            raise ShapeError(f"user {k}: amplitude vector shape {a.shape}, expected ({hops},)")
        signal += C @ (H @ (s * a))
    if isi is None:
        isi = np.zeros(stack, dtype=complex)
    else:
        isi = np.asarray(isi, dtype=complex)
        if isi.shape != (stack,):
            raise ShapeError(f"isi vector shape {isi.shape}, expected ({stack},)")
    if sigma2 > 0.0 and rng is not None:
        noise = draw_noise(stack, sigma2, rng)
    else:
        noise = np.zeros(stack, dtype=complex)
    return ReceivedFrame(total=signal + isi + noise, signal_part=signal,
                         isi_part=isi, noise_part=noise, sigma2=sigma2)
