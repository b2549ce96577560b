import numpy as np
import pytest

from gqd.extensions import (
    cayley_matrix,
    cayley_relation,
    cayley_vector,
    deficiency_of_operator,
    deficiency_routes,
    extend,
    inverse_cayley_relation,
    inverse_cayley_vector,
    partial_isometry_of,
)
from gqd.linalg import Subspace, orthonormalize
from gqd.relations import (
    FormKind,
    LinearRelation,
    OperatorWithDomain,
    decompose_self_adjoint,
    form_value,
    graph_relation,
    is_graph,
    is_lagrangian,
    kernel_of_inverse,
)


def e(k, n):
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def pair(x, y):
    return np.concatenate([x, y])


def model_relation():
    """The deficiency-(1,1) model: span{(e1, 2 e1)} in C^2 + C^2."""
    return LinearRelation.from_vectors(2, [pair(e(0, 2), 2 * e(0, 2))])


def rand_vec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


class TestCayleyVector:
    def test_basis_image(self):
        out = cayley_vector(pair(e(0, 1), np.zeros(1)))
        expected = np.array([1j, -1j]) / np.sqrt(2.0)
        assert np.allclose(out, expected)

    def test_inverse_round_trip(self, rng):
        v = rand_vec(rng, 8)
        assert np.allclose(inverse_cayley_vector(cayley_vector(v)), v)
        assert np.allclose(cayley_matrix(4) @ v, cayley_vector(v))

    def test_transfer_identities(self, rng, tol):
        # the identities the Cayley map actually satisfies (anti-linear first
        # slot): <Cv,Cw>_{0+} = <v,w>_-, <Cv,Cw>_- = -<v,w>_{0-}, C unitary
        for _ in range(100):
            n = int(rng.integers(1, 9))
            v, w = rand_vec(rng, 2 * n), rand_vec(rng, 2 * n)
            cv, cw = cayley_vector(v), cayley_vector(w)
            assert form_value(FormKind.ZERO_PLUS, cv, cw) == pytest.approx(
                form_value(FormKind.MINUS, v, w), abs=10 * tol.eq_tol)
            assert form_value(FormKind.MINUS, cv, cw) == pytest.approx(
                -form_value(FormKind.ZERO_MINUS, v, w), abs=10 * tol.eq_tol)
            assert form_value(FormKind.PLUS, cv, cw) == pytest.approx(
                form_value(FormKind.PLUS, v, w), abs=10 * tol.eq_tol)

    def test_scalar_graph_image(self, tol):
        # the Cayley image of the graph of (2) is the graph of (2-i)/(2+i)
        rel = graph_relation(np.array([[2.0 + 0j]]))
        image = cayley_relation(rel)
        vec = image.space.frame[:, 0]
        assert vec[1] / vec[0] == pytest.approx((2 - 1j) / (2 + 1j))

    def test_uniqueness_shadow(self, rng, tol):
        # composing with block-diagonal unitaries (which preserve all four
        # forms, in particular omega_plus) transfers the forms identically
        n = 3
        q, _ = np.linalg.qr(rand_vec(rng, n * n).reshape(n, n))
        big = np.zeros((2 * n, 2 * n), dtype=complex)
        big[:n, :n] = q
        big[n:, n:] = q
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        for variant in (cayley_matrix(n) @ (phase * big), (phase * big) @ cayley_matrix(n)):
            for _ in range(20):
                v, w = rand_vec(rng, 2 * n), rand_vec(rng, 2 * n)
                cv, cw = variant @ v, variant @ w
                assert form_value(FormKind.ZERO_PLUS, cv, cw) == pytest.approx(
                    form_value(FormKind.MINUS, v, w), abs=10 * tol.eq_tol)
                assert form_value(FormKind.MINUS, cv, cw) == pytest.approx(
                    -form_value(FormKind.ZERO_MINUS, v, w), abs=10 * tol.eq_tol)


class TestPartialIsometry:
    def test_self_adjoint_graph_yields_unitary(self, tol):
        rel = graph_relation(np.diag([1.0, 3.0]).astype(complex))
        data = partial_isometry_of(rel)
        assert data.indices == (0, 0)
        evals = np.linalg.eigvals(data.matrix)
        expected = {(1 - 1j) / (1 + 1j), (3 - 1j) / (3 + 1j)}
        for x in expected:
            assert min(abs(evals - x)) < 1e-9

    def test_model_relation(self, tol):
        data = partial_isometry_of(model_relation())
        assert data.indices == (1, 1)
        assert data.w_plus.equals(orthonormalize([e(0, 2)]), tol)
        assert data.w_minus.equals(orthonormalize([e(0, 2)]), tol)
        assert data.n_plus.equals(orthonormalize([e(1, 2)]), tol)
        out = data.apply(e(0, 2))
        assert np.allclose(out, (3 - 4j) / 5 * e(0, 2))

    def test_trivial_relation_has_full_indices(self, tol):
        n = 3
        rel = LinearRelation(n, Subspace(2 * n, np.zeros((2 * n, 0), dtype=complex)))
        data = partial_isometry_of(rel)
        assert data.indices == (n, n)
        assert data.matrix.shape == (0, 0)

    def test_rejects_non_symmetric(self):
        rel = graph_relation(np.array([[1j]]))
        with pytest.raises(ValueError, match="symmetric"):
            partial_isometry_of(rel)

    def test_lagrangian_maps_to_unitary_graph_and_back(self, rng, tol):
        # both directions of the partial-isometry proposition
        n = 4
        z = rand_vec(rng, n * n).reshape(n, n)
        rel = graph_relation(0.5 * (z + z.conj().T))
        image = cayley_relation(rel, tol)
        assert is_lagrangian(image, FormKind.MINUS, tol)
        assert is_graph(image, tol)
        q, _ = np.linalg.qr(rand_vec(rng, n * n).reshape(n, n))
        pulled = inverse_cayley_relation(graph_relation(q), tol)
        assert is_lagrangian(pulled, FormKind.ZERO_MINUS, tol)


class TestExtend:
    def test_theta_pi_closes_with_zero_eigenvalue(self, tol):
        ext = extend(model_relation(), np.array([[-1.0 + 0j]]))
        op = decompose_self_adjoint(ext, FormKind.ZERO_MINUS, tol)
        assert np.allclose(np.sort(np.linalg.eigvalsh(op.matrix)), [0.0, 2.0],
                           atol=1e-9)

    @pytest.mark.parametrize("theta,expected", [
        (np.pi / 2, -1.0), (np.pi, 0.0), (3 * np.pi / 2, 1.0),
    ])
    def test_cotangent_family(self, theta, expected, tol):
        ext = extend(model_relation(), np.array([[np.exp(1j * theta)]]))
        assert is_lagrangian(ext, FormKind.ZERO_MINUS, tol)
        assert ext.space.contains(model_relation().space, tol)
        op = decompose_self_adjoint(ext, FormKind.ZERO_MINUS, tol)
        evals = np.sort(np.linalg.eigvalsh(op.matrix))
        assert min(abs(evals - expected)) < 1e-9

    def test_self_adjoint_input_extends_to_itself(self, tol):
        rel = graph_relation(np.diag([1.0, 3.0]).astype(complex))
        ext = extend(rel, np.zeros((0, 0), dtype=complex))
        assert ext.space.equals(rel.space, tol)

    def test_unitary_touching_one_gives_non_graph(self, tol):
        ext = extend(model_relation(), np.array([[1.0 + 0j]]))
        assert not is_graph(ext, tol)
        assert kernel_of_inverse(ext, tol).dim == 1
        assert is_lagrangian(ext, FormKind.ZERO_MINUS, tol)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            extend(model_relation(), np.array([[0.5 + 0j]]))

    def test_rejects_wrong_deficiency_shape(self):
        with pytest.raises(ValueError, match="incompatible"):
            extend(model_relation(), np.eye(2, dtype=complex))

    def test_trivial_relation_extends_to_any_self_adjoint_relation(self, rng, tol):
        # nothing constrains the extension of the zero relation: the family
        # is the inverse Cayley of all unitaries, scalar case -cot(theta/2)
        n = 2
        rel = LinearRelation(n, Subspace(2 * n, np.zeros((2 * n, 0), dtype=complex)))
        for theta in (np.pi / 2, np.pi, 3 * np.pi / 2):
            ext = extend(rel, np.exp(1j * theta) * np.eye(n, dtype=complex))
            assert is_lagrangian(ext, FormKind.ZERO_MINUS, tol)
            op = decompose_self_adjoint(ext, FormKind.ZERO_MINUS, tol)
            expected = -1.0 / np.tan(theta / 2.0)
            assert np.allclose(np.linalg.eigvalsh(op.matrix), expected, atol=1e-9)
        # the unitary fixed at one closes to the pure-kernel relation
        ext = extend(rel, np.eye(n, dtype=complex))
        assert kernel_of_inverse(ext, tol).dim == n
        op = decompose_self_adjoint(ext, FormKind.ZERO_MINUS, tol)
        assert op.domain.dim == 0 and op.matrix.shape == (0, 0)

    def test_soundness_and_distinctness_random(self, rng, tol):
        n = 3
        rel = LinearRelation.from_vectors(n, [pair(e(0, n), 1.5 * e(0, n))])
        data = partial_isometry_of(rel, tol)
        assert data.indices == (2, 2)
        seen = []
        for _ in range(6):
            q, _ = np.linalg.qr(rand_vec(rng, 4).reshape(2, 2))
            ext = extend(rel, q, tol)
            assert is_lagrangian(ext, FormKind.ZERO_MINUS, tol)
            assert ext.space.contains(rel.space, tol)
            for p in seen:
                assert np.linalg.norm(ext.space.projector() - p, 2) > 1e-8
            seen.append(ext.space.projector())


class TestDeficiency:
    def test_self_adjoint_operator_has_trivial_spaces(self, rng, tol):
        z = rand_vec(rng, 9).reshape(3, 3)
        full = Subspace(3, np.eye(3, dtype=complex))
        op = OperatorWithDomain(full, full, 0.5 * (z + z.conj().T))
        data = deficiency_of_operator(op, tol)
        assert data.indices == (0, 0)

    def test_scalar_on_line_in_plane(self, tol):
        dom = Subspace(2, np.eye(2, dtype=complex)[:, :1])
        op = OperatorWithDomain(dom, dom, np.array([[2.0 + 0j]]))
        data = deficiency_of_operator(op, tol)
        assert data.indices == (1, 1)
        assert data.n_plus.equals(orthonormalize([e(1, 2)]), tol)
        assert data.n_minus.equals(orthonormalize([e(1, 2)]), tol)

    def test_complement_dimension_count(self, tol):
        dom = Subspace(3, np.eye(3, dtype=complex)[:, :1])
        op = OperatorWithDomain(dom, dom, np.array([[2.0 + 0j]]))
        assert deficiency_of_operator(op, tol).indices == (2, 2)

    def test_two_routes_agree_random(self, rng, tol):
        for _ in range(25):
            n = int(rng.integers(2, 9))
            d = int(rng.integers(1, n))
            cols = rand_vec(rng, n * d).reshape(n, d)
            dom = orthonormalize(cols)
            z = rand_vec(rng, d * d).reshape(d, d)
            op = OperatorWithDomain(dom, dom, 0.5 * (z + z.conj().T))
            (rp, rm), (kp, km) = deficiency_routes(op, tol)
            assert np.linalg.norm(rp.projector() - kp.projector(), 2) <= 1e-9
            assert np.linalg.norm(rm.projector() - km.projector(), 2) <= 1e-9

    def test_rejects_non_symmetric(self):
        full = Subspace(2, np.eye(2, dtype=complex))
        op = OperatorWithDomain(full, full, np.array([[0.0, 1.0], [0.0, 0.0]],
                                                     dtype=complex))
        with pytest.raises(ValueError, match="symmetric"):
            deficiency_of_operator(op)
