"""Fast self-checks behind the `validate` CLI subcommand.

A trimmed-down version of the property suite: algebraic identities, RLS
recursion-versus-direct-inverse equivalence, constraint exactness, and
determinism, each sized to run in seconds.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import gpc, harness, model
from .rlscore import ExpWeightedInverse


def _check_convolution():
    rng = np.random.default_rng(7)
    code = model.draw_spreading_codes(1, 8, rng)[0]
    D = model.build_convolution_matrix(code, 3)
    ok = D.shape == (10, 3)
    for r in range(10):
        for c in range(3):
            want = code[r - c] if 0 <= r - c < 8 else 0.0
            ok = ok and abs(D[r, c] - want) < 1e-15
    return ok, "entry (r,c) = d(r-c) on the band, 0 elsewhere"


def _check_qpsk():
    bits = np.array([[i, j] for i in (0, 1) for j in (0, 1)])
    sym = model.modulate_qpsk(bits)
    back = model.demodulate_qpsk(sym)
    ok = np.array_equal(back, bits) and np.allclose(np.abs(sym), 1.0)
    return ok, "Gray round-trip, unit energy"


def _check_superposition():
    rng = np.random.default_rng(11)
    dims = model.SystemDims(K=2, N=8, L=2, n_r=1)
    codes = model.draw_spreading_codes(2, 8, rng)
    sigs, chans, syms, amps = [], [], [], []
    for k in range(2):
        D = model.build_convolution_matrix(codes[k], dims.L)
        sigs.append(model.build_block_signature(D, dims.n_r))
        chans.append(model.channel_matrix(
            [model.generate_multipath_channel(dims.L, rng) for _ in range(dims.hops)]))
        syms.append(model.modulate_qpsk(rng.integers(0, 2, (dims.hops, 2))))
        amps.append(np.array([0.8, 0.6]))
    both = model.assemble_received_frame(dims, sigs, chans, syms, amps)
    dims1 = model.SystemDims(K=1, N=8, L=2, n_r=1)
    single = [model.assemble_received_frame(dims1, [sigs[k]], [chans[k]], [syms[k]],
                                            [amps[k]])
              for k in range(2)]
    ok = np.allclose(both.total, single[0].total + single[1].total, atol=1e-12)
    return ok, "frame is additive in users"


def _check_rls_oracle():
    rng = np.random.default_rng(3)
    dim, alpha, delta = 6, 0.99, 0.01
    Phi = np.eye(dim, dtype=complex) / delta
    A = delta * np.eye(dim, dtype=complex)
    from .rlscore import correlation_gain
    for _ in range(50):
        r = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        _, Phi = correlation_gain(Phi, r, alpha)
        A = alpha * A + np.outer(r, r.conj())
    err = np.linalg.norm(Phi - np.linalg.inv(A)) / np.linalg.norm(np.linalg.inv(A))
    return err < 1e-8, f"relative error {err:.2e}"


def _check_row_inverse_oracle():
    rng = np.random.default_rng(5)
    dim, alpha, delta = 4, 0.995, 0.01
    inv = ExpWeightedInverse(dim, delta)
    A = delta * np.eye(dim, dtype=complex)
    for _ in range(40):
        V = rng.standard_normal((6, dim)) + 1j * rng.standard_normal((6, dim))
        inv.update_rows(V, alpha)
        A = alpha * A + V.conj().T @ V
    err = np.linalg.norm(inv.inv - np.linalg.inv(A)) / np.linalg.norm(np.linalg.inv(A))
    return err < 1e-8, f"relative error {err:.2e}"


def _check_constraint_and_determinism():
    cfg = harness.ExperimentConfig(users=2, chips=8, paths=2, relays=1,
                                   packet_len=80, training_len=40, trials=2,
                                   snr_grid=(10.0,), scheme="jpais-ipc",
                                   variant="adaptive", seed=99,
                                   shadowing_std_db=0.0)
    dims = cfg.dims()
    codes = harness.codes_for(cfg, dims.K)
    rngs = harness.trial_rngs(cfg.seed, 0)
    scn = harness.draw_scenario(dims, codes, harness.snr_db_to_sigma2(10.0),
                                0.0, rngs[0], isi_enabled=True)
    res = harness.simulate_packet_adaptive(scn, "jpais-ipc", cfg, rngs[1],
                                           rngs[2], rngs[3], collect=("a_norm",))
    norms = res.extras["a_sq_norms"]
    ok = bool(np.all(np.abs(norms - 1.0) < 1e-10))
    c1 = harness.run_experiment(cfg)
    c2 = harness.run_experiment(dataclasses.replace(cfg))
    ok = ok and c1.rows == c2.rows
    return ok, "per-step power budget exact, repeated run identical"


CHECKS = [
    ("convolution-matrix entries", _check_convolution),
    ("qpsk mapping", _check_qpsk),
    ("frame superposition", _check_superposition),
    ("receiver RLS inverse oracle", _check_rls_oracle),
    ("row-wise inverse oracle", _check_row_inverse_oracle),
    ("constraint + determinism", _check_constraint_and_determinism),
]


def run_all(verbose: bool = True) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok = all_ok and ok
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
