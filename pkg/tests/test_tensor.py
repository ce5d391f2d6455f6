"""Tensor sampling, norms, and binary io."""

import numpy as np
import pytest

from xorgap import (
    DimensionError,
    SamplerConfig,
    ScaleError,
    Tensor3,
    hermitize,
    load_tensor,
    sample_tensor,
    save_tensor,
    spectral_norm,
    trilinear_eval,
    trilinear_norm_lower,
    trilinear_norm_upper_net,
)
from xorgap.tensor import top_eigenpair


def random_hermitian(rng, N, unit=True):
    M = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    H = (M + M.conj().T) / 2.0
    return H / np.linalg.norm(H) if unit else H


def naive_trilinear(T, X, Y, Z):
    """Independent six-index loop for <T, X x Y x Z>."""
    N = T.N
    total = 0.0 + 0.0j
    for i in range(N):
        for ip in range(N):
            for j in range(N):
                for jp in range(N):
                    for k in range(N):
                        for kp in range(N):
                            total += (
                                T.entry((i, ip), (j, jp), (k, kp))
                                * X[i, ip]
                                * Y[j, jp]
                                * Z[k, kp]
                            )
    return total


class TestSampling:
    def test_zero_pattern_on_colliding_pairs(self):
        T = sample_tensor(1, SamplerConfig(seed=42))
        N = T.N
        for i in range(N):
            for j in range(N):
                for k in range(N):
                    for ip in range(N):
                        for jp in range(N):
                            for kp in range(N):
                                if i == ip or j == jp or k == kp:
                                    assert T.entry((i, ip), (j, jp), (k, kp)) == 0

    def test_bernoulli_nonzero_entries_are_signs(self):
        T = sample_tensor(1, SamplerConfig(distribution="bernoulli", seed=7))
        nz = T.matrix[T.matrix != 0]
        assert np.all(np.isin(nz.real, (-1.0, 1.0)))
        assert np.all(nz.imag == 0)

    def test_override_all_ones_is_hollow_cube(self):
        T = sample_tensor(1, SamplerConfig(distribution="override", override_g=np.ones(8)))
        J = np.ones((2, 2)) - np.eye(2)
        expected = np.kron(np.kron(J, J), J)
        assert np.abs(T.matrix - expected).max() == 0

    def test_matches_masked_outer_product(self):
        T = sample_tensor(1, SamplerConfig(seed=3))
        g = T.raw_g
        N = T.N
        for i in range(N):
            for j in range(N):
                for k in range(N):
                    for ip in range(N):
                        for jp in range(N):
                            for kp in range(N):
                                want = 0.0
                                if i != ip and j != jp and k != kp:
                                    want = g[(i * N + j) * N + k] * g[(ip * N + jp) * N + kp]
                                got = T.entry((i, ip), (j, jp), (k, kp))
                                assert got == pytest.approx(want, abs=1e-15)

    def test_reproducible(self):
        a = sample_tensor(2, SamplerConfig(seed=11))
        b = sample_tensor(2, SamplerConfig(seed=11))
        assert np.array_equal(a.matrix, b.matrix)
        assert np.array_equal(a.raw_g, b.raw_g)

    def test_override_wrong_length_rejected(self):
        with pytest.raises(DimensionError):
            sample_tensor(1, SamplerConfig(distribution="override", override_g=np.ones(7)))

    def test_sampled_tensor_is_hermitian(self):
        assert sample_tensor(2, SamplerConfig(seed=0)).is_hermitian()


class TestSpectralNorm:
    def test_zero_tensor(self):
        T = Tensor3(1, np.zeros((8, 8)))
        assert spectral_norm(T) == 0.0

    @pytest.mark.parametrize("n,expected", [(1, 1.0), (2, 27.0)])
    def test_all_ones_override(self, n, expected):
        N = 2**n
        T = sample_tensor(n, SamplerConfig(distribution="override", override_g=np.ones(N**3)))
        assert spectral_norm(T) == pytest.approx(expected, rel=1e-9)

    def test_unmasked_outer_product_is_rank_one(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal(8)
        T = Tensor3(1, np.outer(g, g))
        assert spectral_norm(T) == pytest.approx(g @ g, rel=1e-12)

    def test_dominated_by_frobenius_and_homogeneous(self):
        T = sample_tensor(1, SamplerConfig(seed=9))
        sn = spectral_norm(T)
        assert sn <= T.frobenius_norm() + 1e-12
        T3 = Tensor3(1, 3.0 * T.matrix, raw_g=None)
        assert spectral_norm(T3) == pytest.approx(3.0 * sn, rel=1e-12)

    def test_non_hermitian_falls_back_to_singular_values(self):
        rng = np.random.default_rng(1)
        M = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        T = Tensor3(1, M)
        assert spectral_norm(T) == pytest.approx(
            np.linalg.svd(M, compute_uv=False)[0], rel=1e-12
        )

    def test_top_eigenpair_prefers_positive_branch(self):
        T = sample_tensor(1, SamplerConfig(seed=42))
        lam, psi = top_eigenpair(T)
        assert lam > 0
        assert lam == pytest.approx(spectral_norm(T), rel=1e-12)
        assert (psi.conj() @ T.matrix @ psi).real == pytest.approx(lam, rel=1e-10)


class TestTrilinearEval:
    def test_identity_tensor_normalized_identity_factors(self):
        for n in (1, 2):
            N = 2**n
            T = Tensor3(n, np.eye(N**3))
            E = np.eye(N) / np.sqrt(N)
            assert trilinear_eval(T, E, E, E) == pytest.approx(N**1.5, rel=1e-12)

    def test_zero_factor_gives_zero(self):
        T = sample_tensor(1, SamplerConfig(seed=1))
        rng = np.random.default_rng(0)
        Y = random_hermitian(rng, 2)
        Z = random_hermitian(rng, 2)
        assert trilinear_eval(T, np.zeros((2, 2)), Y, Z) == 0

    def test_matches_naive_six_index_loop(self):
        rng = np.random.default_rng(12)
        T = sample_tensor(1, SamplerConfig(seed=12))
        X, Y, Z = (random_hermitian(rng, 2) for _ in range(3))
        fast = trilinear_eval(T, X, Y, Z)
        slow = naive_trilinear(T, X, Y, Z)
        assert fast == pytest.approx(slow, rel=1e-10)

    def test_multilinear_in_each_slot(self):
        rng = np.random.default_rng(21)
        T = sample_tensor(1, SamplerConfig(seed=4))
        X1, X2, Y, Z = (random_hermitian(rng, 2) for _ in range(4))
        a, b = rng.standard_normal(2)
        lhs = trilinear_eval(T, a * X1 + b * X2, Y, Z)
        rhs = a * trilinear_eval(T, X1, Y, Z) + b * trilinear_eval(T, X2, Y, Z)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_dimension_mismatch_rejected(self):
        T = sample_tensor(1, SamplerConfig(seed=0))
        with pytest.raises(DimensionError):
            trilinear_eval(T, np.eye(4), np.eye(2), np.eye(2))


class TestTrilinearLower:
    def test_zero_tensor(self):
        T = Tensor3(1, np.zeros((8, 8)))
        val, wit = trilinear_norm_lower(T, restarts=2)
        assert val == 0.0

    def test_unit_product_tensor_reaches_one(self):
        rng = np.random.default_rng(3)
        A, B, C = (random_hermitian(rng, 2) for _ in range(3))
        W = np.einsum("ab,cd,ef->acebdf", A, B, C).reshape(8, 8)
        T = Tensor3(1, W)
        val, wit = trilinear_norm_lower(T, restarts=6, seed=5)
        assert val == pytest.approx(1.0, rel=1e-9)

    def test_objective_nondecreasing_within_each_restart(self):
        T = sample_tensor(1, SamplerConfig(seed=42))
        hist = {}
        trilinear_norm_lower(
            T, restarts=4, seed=1, on_sweep=lambda r, i, v: hist.setdefault(r, []).append(v)
        )
        for vals in hist.values():
            assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_witness_is_feasible_and_consistent(self):
        T = sample_tensor(1, SamplerConfig(seed=42))
        val, wit = trilinear_norm_lower(T, restarts=8, seed=1)
        for M in (wit.X, wit.Y, wit.Z):
            assert np.abs(M - M.conj().T).max() <= 1e-12
            assert np.linalg.norm(M) <= 1.0 + 1e-12
        assert abs(wit.value) == pytest.approx(val, rel=1e-12)
        assert trilinear_eval(T, wit.X, wit.Y, wit.Z) == pytest.approx(wit.value, rel=1e-10)

    def test_beats_random_feasible_points(self):
        T = sample_tensor(1, SamplerConfig(seed=42))
        val, _ = trilinear_norm_lower(T, restarts=8, seed=1)
        rng = np.random.default_rng(99)
        best = max(
            abs(
                trilinear_eval(
                    T,
                    random_hermitian(rng, 2),
                    random_hermitian(rng, 2),
                    random_hermitian(rng, 2),
                )
            )
            for _ in range(2000)
        )
        assert val >= best - 1e-9

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_mode_update_is_exact_maximizer(self, N):
        # the single-mode subproblem max |sum A∘X| over unit-Frobenius
        # Hermitian X has a closed form; no sampled feasible point may beat it
        from xorgap.tensor import _best_hermitian_factor

        rng = np.random.default_rng(N)
        for _ in range(20):
            A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
            X, val = _best_hermitian_factor(A)
            assert np.abs(X - X.conj().T).max() <= 1e-12
            assert np.linalg.norm(X) == pytest.approx(1.0, abs=1e-12)
            assert abs(np.sum(A * X)) == pytest.approx(val, rel=1e-12)
            for _t in range(200):
                H = random_hermitian(rng, N)
                assert abs(np.sum(A * H)) <= val + 1e-9


class TestTrilinearUpperNet:
    def test_upper_dominates_lower_across_seeds(self):
        for seed in range(6):
            T = sample_tensor(1, SamplerConfig(seed=seed))
            lo, _ = trilinear_norm_lower(T, restarts=6, seed=seed)
            hi = trilinear_norm_upper_net(T, 0.5)
            assert hi >= lo

    def test_matches_independent_enumeration(self):
        from xorgap.nets import projector_net

        T = sample_tensor(1, SamplerConfig(seed=42))
        eps = 0.9
        got = trilinear_norm_upper_net(T, eps)
        g = T.raw_g
        elements = list(projector_net(2, 1, eps).elements) + list(
            projector_net(2, 2, eps).elements
        )
        best = 0.0
        for X in elements:
            for Y in elements:
                XY = np.kron(X, Y)
                for Z in elements:
                    K = np.kron(XY, Z)
                    dev = abs(g @ K @ g - np.trace(K))
                    best = max(best, dev)
        expected = 64.0 * np.log(2) ** 1.5 * (best + 3 * eps * (2**1.5 + g @ g))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_zero_vector_value(self):
        # With g = 0 the quadratic forms vanish but the trace terms survive:
        # the net maximum is max |tr X tr Y tr Z| = N^{3/2}, attained at the
        # rank-2 triple, on top of the additive slack.
        eps = 0.5
        T = sample_tensor(1, SamplerConfig(distribution="override", override_g=np.zeros(8)))
        got = trilinear_norm_upper_net(T, eps)
        pref = 64.0 * np.log(2) ** 1.5
        assert got == pytest.approx(pref * 2**1.5 * (1.0 + 3 * eps), rel=1e-12)
        assert got >= pref * 3 * eps * 2**1.5

    def test_reproducible(self):
        T = sample_tensor(1, SamplerConfig(seed=8))
        assert trilinear_norm_upper_net(T, 0.5) == trilinear_norm_upper_net(T, 0.5)

    def test_scale_and_input_guards(self):
        with pytest.raises(ScaleError):
            trilinear_norm_upper_net(sample_tensor(2, SamplerConfig(seed=0)), 0.5)
        bare = Tensor3(1, sample_tensor(1, SamplerConfig(seed=0)).matrix)
        with pytest.raises(ValueError):
            trilinear_norm_upper_net(bare, 0.5)


class TestHermitize:
    def test_fixes_already_hermitian_input(self):
        T = sample_tensor(1, SamplerConfig(seed=2))
        H = hermitize(T)
        assert np.abs(H.matrix - T.matrix).max() == 0
        assert H.raw_g is not None

    def test_antihermitian_input_takes_imaginary_branch(self):
        rng = np.random.default_rng(4)
        Hm = rng.standard_normal((8, 8))
        Hm = (Hm + Hm.T) / 2.0
        T = Tensor3(1, 1j * Hm)
        out = hermitize(T)
        assert out.is_hermitian()
        assert spectral_norm(out) == pytest.approx(
            np.abs(np.linalg.eigvalsh(Hm)).max(), rel=1e-12
        )

    def test_random_complex_output_hermitian(self):
        rng = np.random.default_rng(6)
        M = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        out = hermitize(Tensor3(1, M))
        assert np.abs(out.matrix - out.matrix.conj().T).max() <= 1e-12
        assert out.raw_g is None  # certificate does not survive a real change


class TestBinaryFormat:
    def test_round_trip_with_raw_vector(self, tmp_path):
        T = sample_tensor(2, SamplerConfig(seed=13))
        path = tmp_path / "t.xgt"
        save_tensor(path, T)
        back = load_tensor(path)
        assert back.n == T.n
        assert np.array_equal(back.matrix, T.matrix)
        assert np.array_equal(back.raw_g, T.raw_g)

    def test_round_trip_without_raw_vector(self, tmp_path):
        T = Tensor3(1, np.eye(8, dtype=complex))
        path = tmp_path / "t.xgt"
        save_tensor(path, T)
        back = load_tensor(path)
        assert back.raw_g is None
        assert np.array_equal(back.matrix, T.matrix)

    def test_magic_and_layout(self, tmp_path):
        T = sample_tensor(1, SamplerConfig(seed=1))
        path = tmp_path / "t.xgt"
        save_tensor(path, T)
        raw = path.read_bytes()
        assert raw[:4] == b"XGT1"
        n = int.from_bytes(raw[4:8], "little")
        flags = int.from_bytes(raw[8:12], "little")
        assert n == 1 and flags == 1
        assert len(raw) == 12 + 16 * 8 + 16 * 64

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError):
            load_tensor(path)

    def test_truncated_file_rejected(self, tmp_path):
        T = sample_tensor(1, SamplerConfig(seed=1))
        path = tmp_path / "t.xgt"
        save_tensor(path, T)
        clipped = tmp_path / "clipped.xgt"
        clipped.write_bytes(path.read_bytes()[:100])
        with pytest.raises(ValueError):
            load_tensor(clipped)

    def test_override_config_requires_vector(self):
        with pytest.raises(ValueError):
            SamplerConfig(distribution="override")
        with pytest.raises(ValueError):
            SamplerConfig(distribution="poisson")
