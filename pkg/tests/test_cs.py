import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hsfsense.cs import (
    ReconstructionOptions,
    SamplingMatrix,
    dct2d_synthesis,
    generate_sampling_matrix,
    initial_estimate,
    l1_norm,
    reconstruct,
)
from hsfsense.decomposition import decompose, recompose

from oracles import min_l0_solution, sparse_signal

GP = ReconstructionOptions(solver="greedy-pursuit")
IST = ReconstructionOptions(solver="iterative-shrinkage")


def test_default_dimensions():
    A = generate_sampling_matrix(300, 400)
    assert A.entries.shape == (300, 400) and (A.K, A.N) == (300, 400)


@pytest.mark.parametrize("kind", ["gaussian", "uniform01", "bernoulli"])
def test_deterministic_per_seed(kind):
    a = generate_sampling_matrix(20, 30, kind, 7).entries
    b = generate_sampling_matrix(20, 30, kind, 7).entries
    assert a.tobytes() == b.tobytes()
    assert a.tobytes() != generate_sampling_matrix(20, 30, kind, 8).entries.tobytes()


def test_kind_properties():
    g = generate_sampling_matrix(50, 40, "gaussian", 1).entries
    np.testing.assert_allclose(np.linalg.norm(g, axis=0), 1.0, rtol=1e-12)
    u = generate_sampling_matrix(50, 40, "uniform01", 1).entries
    assert u.min() >= 0 and u.max() < 1
    with pytest.raises(ValueError):
        generate_sampling_matrix(5, 5, "cauchy")
    with pytest.raises(ValueError):
        generate_sampling_matrix(0, 5)


def test_bernoulli_rows_decompose_to_single_row():
    b = generate_sampling_matrix(40, 25, "bernoulli", 2).entries
    assert set(np.unique(b)) <= {0.0, 1.0}
    for row in b:
        r = decompose(row, 2, 0.0)
        assert r.rows == 1
        if row.min() != row.max():
            # w = 100 * row, peeled in a single step of size U
            assert r.s.tolist() == [100]
            assert np.array_equal(r.B[0], row.astype(np.uint8))
        else:
            assert r.s.tolist() == [1]
        assert np.array_equal(recompose(r), row)


def test_csv_roundtrip(tmp_path):
    A = generate_sampling_matrix(6, 9, "gaussian", 3)
    A.write_csv(tmp_path / "A.csv")
    B = SamplingMatrix.read_csv(tmp_path / "A.csv")
    assert B.entries.tobytes() == A.entries.tobytes()


def test_initial_estimate_zero_and_identity():
    A = generate_sampling_matrix(5, 8)
    assert np.all(initial_estimate(A, np.zeros(5)) == 0)
    eye = SamplingMatrix(np.eye(6), "bernoulli", 0)
    o = np.arange(6.0)
    assert np.array_equal(initial_estimate(eye, o), o)
    with pytest.raises(ValueError):
        initial_estimate(A, np.zeros(4))


def test_initial_estimate_double_loop():
    rng = np.random.default_rng(0)
    A = generate_sampling_matrix(7, 11, "gaussian", 5)
    o = rng.standard_normal(7)
    expected = [sum(A.entries[i][j] * o[i] for i in range(7)) for j in range(11)]
    np.testing.assert_allclose(initial_estimate(A, o), expected, rtol=1e-12, atol=1e-14)


def test_l1_norm():
    assert l1_norm([0, 0, 0]) == 0
    assert l1_norm([1, -2, 3]) == 6
    rng = np.random.default_rng(1)
    v = rng.standard_normal(50)
    assert l1_norm(v) == pytest.approx(sum(abs(float(t)) for t in v), rel=1e-12)


@pytest.mark.parametrize("opts", [GP, IST])
def test_zero_observation(opts):
    A = generate_sampling_matrix(10, 20)
    rec = reconstruct(A, np.zeros(10), opts)
    assert np.all(rec.x == 0) and rec.converged


def test_matches_exhaustive_l0_small():
    hits = 0
    for seed in range(30):
        rng = np.random.default_rng(seed)
        A = generate_sampling_matrix(8, 16, "gaussian", seed)
        x = sparse_signal(16, 2, rng)
        o = A.entries @ x
        oracle = min_l0_solution(A.entries, o)
        got = reconstruct(A, o, GP).x
        hits += np.max(np.abs(got - oracle)) < 1e-6
    assert hits >= 28


def test_greedy_large_noiseless():
    rng = np.random.default_rng(42)
    A = generate_sampling_matrix(300, 400, "gaussian", 42)
    x = sparse_signal(400, 20, rng)
    rec = reconstruct(A, A.entries @ x, GP)
    assert np.linalg.norm(rec.x - x) / np.linalg.norm(x) < 1e-3
    assert rec.converged


@pytest.mark.parametrize("opts", [GP, IST])
@pytest.mark.parametrize("nonnegative", [True, False])
def test_sparse_recovery_rate(opts, nonnegative):
    k = 2
    K, N = 8 * k, 32 * k
    opts = ReconstructionOptions(solver=opts.solver, nonnegative=nonnegative)
    ok = 0
    for seed in range(100):
        rng = np.random.default_rng(10_000 + seed)
        A = generate_sampling_matrix(K, N, "gaussian", seed)
        x = sparse_signal(N, k, rng, nonnegative)
        rec = reconstruct(A, A.entries @ x, opts)
        ok += np.linalg.norm(rec.x - x) / np.linalg.norm(x) < 1e-3
    assert ok >= 95


def test_greedy_residual_non_increasing():
    rng = np.random.default_rng(3)
    A = generate_sampling_matrix(40, 100, "gaussian", 3)
    o = A.entries @ np.abs(rng.standard_normal(100))  # dense: runs many iterations
    for nonneg in (True, False):
        rec = reconstruct(A, o, ReconstructionOptions(nonnegative=nonneg))
        assert np.all(np.diff(rec.residual_history) <= 1e-9)


def test_unconverged_flag():
    A = generate_sampling_matrix(20, 50, "gaussian", 4)
    x = sparse_signal(50, 5, np.random.default_rng(4))
    rec = reconstruct(A, A.entries @ x, ReconstructionOptions(max_iterations=2))
    assert not rec.converged and rec.iterations == 2


def test_deterministic_reconstruction():
    A = generate_sampling_matrix(30, 64, "gaussian", 9)
    o = np.random.default_rng(9).standard_normal(30)
    for opts in (GP, IST, ReconstructionOptions(basis="dct2d")):
        a, b = reconstruct(A, o, opts).x, reconstruct(A, o, opts).x
        assert a.tobytes() == b.tobytes()


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(np.float64, 12, elements=st.floats(-10, 10)), st.sampled_from(["greedy-pursuit", "iterative-shrinkage"]))
def test_nonnegative_flag_guarantees_nonnegative(o, solver):
    A = generate_sampling_matrix(12, 25, "gaussian", 0)
    rec = reconstruct(A, o, ReconstructionOptions(solver=solver, max_iterations=200))
    assert np.all(rec.x >= 0)


def test_dct_basis_is_orthonormal_and_recovers_smooth_image():
    psi = dct2d_synthesis(8)
    np.testing.assert_allclose(psi.T @ psi, np.eye(64), atol=1e-12)
    coef = np.zeros(64)
    coef[[0, 1, 8]] = [3.0, 0.5, -0.4]
    x = psi @ coef
    A = generate_sampling_matrix(32, 64, "gaussian", 1)
    rec = reconstruct(A, A.entries @ x, ReconstructionOptions(basis="dct2d", nonnegative=False))
    np.testing.assert_allclose(rec.x, x, atol=1e-8)


def test_options_validation():
    with pytest.raises(ValueError):
        ReconstructionOptions(solver="magic")
    with pytest.raises(ValueError):
        ReconstructionOptions(basis="wavelet")
    with pytest.raises(ValueError):
        ReconstructionOptions(max_iterations=0)
    with pytest.raises(ValueError):
        reconstruct(generate_sampling_matrix(4, 9), np.zeros(5))
