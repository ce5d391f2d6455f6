"""Sphere, projector, and triple nets; signed-projector decomposition."""

import numpy as np
import pytest

from xorgap import ScaleError, lorentz_decompose, projector_net, sphere_net, triple_net
from xorgap.nets import (
    coefficient_bound,
    coefficient_bound_sharp,
    export_elements,
    load_elements,
    triple_net_size,
)


def random_unit(rng, N):
    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return v / np.linalg.norm(v)


def random_unit_hermitian(rng, N):
    M = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    H = (M + M.conj().T) / 2.0
    return H / np.linalg.norm(H)


class TestSphereNet:
    def test_points_are_unit(self):
        S = sphere_net(2, 0.5, seed=1)
        assert np.abs(np.linalg.norm(S.points, axis=1) - 1.0).max() <= 1e-12

    def test_packing_separation(self):
        S = sphere_net(2, 0.5, seed=1)
        P = S.points
        for i in range(len(S)):
            d2 = np.sum(np.abs(P - P[i]) ** 2, axis=1)
            d2[i] = np.inf
            assert np.sqrt(d2.min()) > 0.5

    def test_circle_covering_at_eps_one(self):
        S = sphere_net(1, 1.0, seed=0)
        rng = np.random.default_rng(3)
        worst = max(S.nearest_distance(random_unit(rng, 1)) for _ in range(5000))
        assert worst <= 1.0

    def test_complex_dim2_covering(self):
        S = sphere_net(2, 0.5, seed=0)
        rng = np.random.default_rng(4)
        worst = max(S.nearest_distance(random_unit(rng, 2)) for _ in range(10_000))
        assert worst <= 0.5

    def test_deterministic(self):
        assert np.array_equal(sphere_net(2, 0.5, seed=7).points, sphere_net(2, 0.5, seed=7).points)

    def test_dimension_guard(self):
        with pytest.raises(ScaleError):
            sphere_net(5, 0.5)

    def test_eps_guard(self):
        with pytest.raises(ValueError):
            sphere_net(2, 0.0)


class TestProjectorNet:
    def test_elements_are_normalized_projectors(self):
        for k in (1, 2):
            net = projector_net(2, k, 0.5, seed=0)
            for X, rank in zip(net.elements, net.ranks):
                assert rank <= k
                assert np.abs(X - X.conj().T).max() <= 1e-12
                assert np.linalg.norm(X) == pytest.approx(1.0, abs=1e-10)
                P = np.sqrt(rank) * X
                assert np.abs(P @ P - P).max() <= 1e-10

    def test_net_member_distance_zero(self):
        net = projector_net(2, 1, 0.5, seed=0)
        assert net.nearest_distance(net.elements[3]) == pytest.approx(0.0, abs=1e-12)

    def test_rank1_covering(self):
        net = projector_net(2, 1, 0.5, seed=0)
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(10_000):
            v = random_unit(rng, 2)
            worst = max(worst, net.nearest_distance(np.outer(v, v.conj())))
        assert worst <= 0.5

    def test_rank2_net_contains_normalized_identity(self):
        net = projector_net(2, 2, 0.5, seed=0)
        target = np.eye(2) / np.sqrt(2.0)
        assert net.nearest_distance(target) <= 1e-9

    def test_scale_guard(self):
        with pytest.raises(ScaleError):
            projector_net(3, 1, 0.5)
        with pytest.raises(ValueError):
            projector_net(2, 3, 0.5)


class TestTripleNet:
    def test_count_matches_product_formula(self):
        eps = 0.8
        sizes = {k: len(projector_net(2, k, eps, seed=0)) for k in (1, 2)}
        want = sum(
            sizes[k] * sizes[l] * sizes[m]
            for k in (1, 2)
            for l in (1, 2)
            for m in (1, 2)
        )
        got = sum(1 for _ in triple_net(2, eps, seed=0))
        assert got == want == triple_net_size(2, eps, seed=0)

    def test_streamed_elements_have_unit_frobenius(self):
        count = 0
        for K, (k, l, m) in triple_net(2, 0.8, seed=0):
            assert np.linalg.norm(K) == pytest.approx(1.0, abs=1e-10)
            assert 1 <= k <= 2 and 1 <= l <= 2 and 1 <= m <= 2
            count += 1
            if count >= 200:
                break

    def test_product_covering(self):
        eps = 0.5
        nets = {k: projector_net(2, k, eps, seed=0) for k in (1, 2)}
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(1000):
            factors, approx = [], []
            for _mode in range(3):
                if rng.random() < 0.5:
                    v = random_unit(rng, 2)
                    X = np.outer(v, v.conj())
                    k = 1
                else:
                    X = np.eye(2) / np.sqrt(2.0)
                    k = 2
                factors.append(X)
                net = nets[k]
                E = np.array([M.reshape(-1) for M in net.elements])
                i = int(np.argmin(np.sum(np.abs(E - X.reshape(-1)) ** 2, axis=1)))
                approx.append(net.elements[i])
            prod = np.kron(np.kron(factors[0], factors[1]), factors[2])
            tilde = np.kron(np.kron(approx[0], approx[1]), approx[2])
            worst = max(worst, float(np.linalg.norm(prod - tilde)))
        assert worst <= 3 * eps


class TestLorentzDecomposition:
    def test_normalized_projector_is_single_term(self):
        rng = np.random.default_rng(1)
        v, w = random_unit(rng, 4), random_unit(rng, 4)
        w = w - (v.conj() @ w) * v
        w /= np.linalg.norm(w)
        P = (np.outer(v, v.conj()) + np.outer(w, w.conj())) / np.sqrt(2.0)
        dec = lorentz_decompose(P)
        assert len(dec.terms) == 1
        lam, X = dec.terms[0]
        assert lam == pytest.approx(1.0, rel=1e-12)
        assert np.abs(X - P).max() <= 1e-12

    def test_balanced_two_level_example(self):
        X = np.diag([1.0, -1.0]) / np.sqrt(2.0)
        dec = lorentz_decompose(X)
        assert len(dec.terms) == 2
        coeffs = sorted(lam for lam, _ in dec.terms)
        assert coeffs[0] == pytest.approx(-1.0 / np.sqrt(2.0), rel=1e-12)
        assert coeffs[1] == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-12)
        assert dec.coefficient_l1() == pytest.approx(np.sqrt(2.0), rel=1e-12)
        assert dec.coefficient_l1() <= coefficient_bound(2)

    def test_zero_matrix_empty(self):
        dec = lorentz_decompose(np.zeros((4, 4)))
        assert dec.terms == []
        assert np.abs(dec.reconstruct()).max() == 0

    @pytest.mark.parametrize("N", [2, 4, 8, 16])
    def test_reconstruction_and_bounds_on_random_corpus(self, N):
        rng = np.random.default_rng(N)
        for trial in range(250):
            H = random_unit_hermitian(rng, N)
            if trial % 4:
                H = H * rng.random()  # also exercise strictly-interior inputs
            dec = lorentz_decompose(H)
            assert np.abs(dec.reconstruct() - H).max() <= 1e-10
            l1 = dec.coefficient_l1()
            assert l1 <= coefficient_bound(N)
            assert l1 <= coefficient_bound_sharp(N)
            for lam, X in dec.terms:
                assert np.linalg.norm(X) == pytest.approx(1.0, abs=1e-10)

    def test_norm_guard(self):
        with pytest.raises(ValueError):
            lorentz_decompose(np.eye(2) * 0.9)  # Frobenius norm > 1

    def test_dimension_guard(self):
        with pytest.raises(ScaleError):
            lorentz_decompose(np.ones((1, 1)) * 0.5)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            lorentz_decompose(np.array([[0.0, 0.5], [0.0, 0.0]]))


class TestExport:
    def test_element_round_trip(self, tmp_path):
        net = projector_net(2, 1, 0.8, seed=0)
        path = tmp_path / "net.xgn"
        export_elements(path, net.elements)
        back = load_elements(path)
        assert len(back) == len(net.elements)
        for a, b in zip(net.elements, back):
            assert np.array_equal(a, b)

    def test_decomposition_csv(self, tmp_path):
        rng = np.random.default_rng(2)
        dec = lorentz_decompose(random_unit_hermitian(rng, 2))
        path = tmp_path / "dec.csv"
        dec.to_csv(path)
        header = path.read_text().splitlines()[0].split(",")
        assert header[:3] == ["term_index", "lambda", "rank"]
        assert len(header) == 3 + 2 * 4
