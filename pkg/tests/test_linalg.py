import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gqd.linalg import (
    Subspace,
    Tolerance,
    canonical_frame,
    intersect,
    orthonormalize,
    polar_decomposition,
    schatten_norm,
    spectral_decomp_hermitian,
)


class TestTolerance:
    def test_defaults(self):
        t = Tolerance()
        assert (t.rank_tol, t.eq_tol, t.eig_cluster_tol) == (1e-10, 1e-9, 1e-8)

    @pytest.mark.parametrize("bad", [0.0, -1e-9])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            Tolerance(rank_tol=bad)


class TestOrthonormalize:
    def test_collinear_vectors_span_a_line(self):
        sub = orthonormalize([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
        assert sub.dim == 1
        assert np.allclose(sub.projector(), np.diag([1.0, 0.0]))

    def test_trivial_spans(self):
        assert orthonormalize([], ambient_dim=3).dim == 0
        assert orthonormalize([np.zeros(3), np.zeros(3)]).dim == 0

    def test_full_rank_pair(self):
        sub = orthonormalize([np.array([1.0, 1.0]), np.array([1.0, -1.0])])
        assert sub.dim == 2
        assert np.allclose(sub.projector(), np.eye(2))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            orthonormalize([np.zeros(2), np.zeros(3)])

    def test_idempotence(self, rng, tol):
        vecs = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
        sub = orthonormalize(vecs)
        again = orthonormalize(sub.frame)
        assert again.dim == sub.dim
        assert again.equals(sub, tol)


class TestSubspace:
    def test_perp_dimensions(self, rng):
        sub = orthonormalize(rng.normal(size=(5, 2)))
        perp = sub.perp()
        assert perp.dim == 3
        assert np.allclose(sub.frame.conj().T @ perp.frame, 0.0, atol=1e-12)

    def test_intersection(self, rng, tol):
        a = orthonormalize(np.eye(4)[:, :3])
        b = orthonormalize(np.eye(4)[:, 1:])
        meet = intersect(a, b)
        expected = orthonormalize(np.eye(4)[:, 1:3])
        assert meet.equals(expected, tol)

    def test_canonical_frame_is_deterministic(self, rng, tol):
        vecs = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
        sub = orthonormalize(vecs)
        c1 = canonical_frame(sub)
        # same span, different frame: mix by a random unitary
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        mixed = Subspace(6, sub.frame @ q, "complex")
        c2 = canonical_frame(mixed)
        assert np.allclose(c1.frame, c2.frame, atol=1e-9)

    def test_rejects_non_orthonormal_frame(self):
        with pytest.raises(ValueError, match="orthonormal"):
            Subspace(2, np.array([[1.0], [1.0]]), "real")


class TestSpectralDecomp:
    def test_already_diagonal(self, tol):
        w, v = spectral_decomp_hermitian(np.diag([3.0, 1.0]))
        assert np.allclose(w, [1.0, 3.0])
        assert np.allclose(np.abs(v), [[0, 1], [1, 0]])

    def test_symmetric_off_diagonal(self):
        # characteristic polynomial of [[0,1],[1,0]] gives eigenvalues -1, 1
        # with eigenvectors (1, -1)/sqrt(2) and (1, 1)/sqrt(2)
        m = np.array([[0.0, 1.0], [1.0, 0.0]])
        w, v = spectral_decomp_hermitian(m)
        assert np.allclose(w, [-1.0, 1.0])
        for k, lam in enumerate(w):
            assert np.linalg.norm(m @ v[:, k] - lam * v[:, k]) < 1e-12

    def test_zero_matrix(self):
        w, v = spectral_decomp_hermitian(np.zeros((3, 3)))
        assert np.allclose(w, 0.0)
        assert np.allclose(v.conj().T @ v, np.eye(3))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            spectral_decomp_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_residual_on_random_hermitian(self, rng, tol):
        z = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        m = 0.5 * (z + z.conj().T)
        w, v = spectral_decomp_hermitian(m)
        resid = np.linalg.norm(m @ v - v @ np.diag(w), 2)
        assert resid <= 10 * tol.eq_tol * np.linalg.norm(m, 2)


class TestPolar:
    def test_unitary_input_is_its_own_factor(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        u, p = polar_decomposition(q)
        assert np.allclose(u, q, atol=1e-12)
        assert np.allclose(p, np.eye(4), atol=1e-12)

    def test_signed_diagonal(self):
        # singular values of diag(2, -3) are (2, 3)
        u, p = polar_decomposition(np.diag([2.0, -3.0]))
        assert np.allclose(u, np.diag([1.0, -1.0]), atol=1e-12)
        assert np.allclose(p, np.diag([2.0, 3.0]), atol=1e-12)

    def test_rotation_times_diagonal(self):
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        m = rot @ np.diag([2.0, 5.0])
        u, p = polar_decomposition(m)
        assert np.allclose(u, rot, atol=1e-12)
        assert np.allclose(p, np.diag([2.0, 5.0]), atol=1e-12)

    def test_singular_input_raises(self):
        with pytest.raises(ValueError, match="singular"):
            polar_decomposition(np.diag([1.0, 0.0]))

    def test_reconstruction_on_random_invertible(self, rng, tol):
        for _ in range(20):
            m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            m += 3.0 * np.eye(5)  # keep it comfortably invertible
            u, p = polar_decomposition(m)
            assert np.linalg.norm(m - u @ p, 2) <= 10 * tol.eq_tol * np.linalg.norm(m, 2)
            assert np.linalg.norm(u.conj().T @ u - np.eye(5), 2) <= 10 * tol.eq_tol


class TestSchattenNorm:
    def test_signed_diagonal_values(self):
        m = np.diag([3.0, -4.0])
        assert schatten_norm(m, 1) == pytest.approx(7.0)
        assert schatten_norm(m, 2) == pytest.approx(5.0)
        assert schatten_norm(m, np.inf) == pytest.approx(4.0)

    def test_rank_one_projector_is_unit(self, rng):
        psi = rng.normal(size=5) + 1j * rng.normal(size=5)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        for p in (1, 1.5, 2, 7, np.inf):
            assert schatten_norm(rho, p) == pytest.approx(1.0)

    def test_uniform_mixture_value(self):
        # the n-fold uniform mixture of basis projectors has p-norm n^((1-p)/p)
        rho = np.eye(4) / 4.0
        assert schatten_norm(rho, 2) == pytest.approx(0.5, rel=1e-13)

    def test_rejects_p_below_one(self):
        with pytest.raises(ValueError):
            schatten_norm(np.eye(2), 0.5)

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(min_value=1, max_value=6),
        st.floats(min_value=1.0, max_value=20.0),
        st.floats(min_value=0.0, max_value=20.0),
        st.integers(min_value=0, max_value=2 ** 31 - 1),
    )
    def test_monotone_in_p(self, n, p, bump, key):
        gen = np.random.default_rng(key)
        m = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
        p_hi = p + bump
        assert schatten_norm(m, p_hi) <= schatten_norm(m, p) + 1e-12
        assert schatten_norm(m, np.inf) <= schatten_norm(m, p) + 1e-12
