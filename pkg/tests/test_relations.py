import numpy as np
import pytest

from gqd.linalg import Subspace, orthonormalize
from gqd.relations import (
    FormKind,
    LinearRelation,
    OperatorWithDomain,
    conjugate_relation,
    decompose_self_adjoint,
    domain_of,
    form_value,
    full_domain_operator,
    gram_matrix,
    graph_relation,
    integrability_extract,
    inverse_relation,
    is_complex_linear,
    is_graph,
    is_isotropic,
    is_lagrangian,
    kernel_of_inverse,
    ortho_complement,
    relation_from_operator,
    symplectic_value,
)


def e(k, n):
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def pair(x, y):
    return np.concatenate([x, y])


class TestGramAndForms:
    def test_zero_plus_cross_term(self):
        n = 2
        v = pair(e(0, n), np.zeros(n))
        w = pair(np.zeros(n), e(0, n))
        assert form_value(FormKind.ZERO_PLUS, v, w) == pytest.approx(1.0)

    def test_zero_minus_on_real_multiple(self):
        v = pair(e(0, 1), 2 * e(0, 1))
        assert form_value(FormKind.ZERO_MINUS, v, v) == pytest.approx(0.0)

    def test_minus_velocity_norm(self, rng):
        phi = rng.normal(size=3) + 1j * rng.normal(size=3)
        v = pair(np.zeros(3), phi)
        assert form_value(FormKind.MINUS, v, v) == pytest.approx(np.linalg.norm(phi) ** 2)

    def test_gram_matrix_matches_direct_evaluation(self, rng):
        n = 3
        for kind in FormKind:
            g = gram_matrix(kind, n)
            v = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
            w = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
            assert form_value(kind, v, w) == pytest.approx(complex(v.conj() @ g @ w))

    def test_symplectic_diagonal_vanishes(self, rng):
        v = rng.normal(size=6) + 1j * rng.normal(size=6)
        for kind in FormKind:
            assert symplectic_value(kind, v, v) == pytest.approx(0.0, abs=1e-12)

    def test_symplectic_zero_plus_example(self):
        # form evaluates to <e1, i e1> = i, so the symplectic value is -1
        v = pair(e(0, 1), np.zeros(1))
        w = pair(np.zeros(1), 1j * e(0, 1))
        assert symplectic_value(FormKind.ZERO_PLUS, v, w) == pytest.approx(-1.0)

    def test_minus_reduces_to_standard_on_velocities(self, rng):
        phi = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = pair(np.zeros(2), phi)
        w = pair(np.zeros(2), psi)
        assert symplectic_value(FormKind.MINUS, v, w) == pytest.approx(
            -np.imag(phi.conj() @ psi)
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            form_value(FormKind.PLUS, np.zeros(4), np.zeros(6))


class TestOrthoComplement:
    def test_of_trivial_relation(self, tol):
        zero = LinearRelation(2, Subspace(4, np.zeros((4, 0), dtype=complex)))
        comp = ortho_complement(zero, FormKind.ZERO_PLUS)
        assert comp.dim == 4

    def test_anti_hermitian_graph_is_self_companion(self, tol):
        rel = graph_relation(np.diag([-1j]))
        comp = ortho_complement(rel, FormKind.ZERO_PLUS)
        assert rel.space.equals(comp.space, tol)

    def test_zero_relation_is_lagrangian(self, tol):
        n = 3
        frame = np.vstack([np.eye(n), np.zeros((n, n))]).astype(complex)
        rel = LinearRelation(n, Subspace(2 * n, frame))
        comp = ortho_complement(rel, FormKind.ZERO_PLUS)
        assert rel.space.equals(comp.space, tol)

    def test_dimension_count_and_involution(self, rng, tol):
        n = 4
        for kind in FormKind:
            for k in (1, 3, 5):
                vecs = rng.normal(size=(2 * n, k)) + 1j * rng.normal(size=(2 * n, k))
                rel = LinearRelation.from_vectors(n, vecs)
                comp = ortho_complement(rel, kind)
                assert rel.dim + comp.dim == 2 * n
                back = ortho_complement(comp, kind)
                assert back.space.equals(rel.space, tol)


class TestIsotropyAndLagrangian:
    def test_hermitian_graph_zero_minus(self):
        rel = graph_relation(np.diag([2.0 + 0j]))
        assert is_lagrangian(rel, FormKind.ZERO_MINUS)

    def test_hermitian_graph_not_zero_plus_isotropic(self):
        rel = graph_relation(np.diag([2.0 + 0j]))
        assert not is_isotropic(rel, FormKind.ZERO_PLUS)

    def test_partial_symmetric_relation(self):
        rel = LinearRelation.from_vectors(2, [pair(e(0, 2), 2 * e(0, 2))])
        assert is_isotropic(rel, FormKind.ZERO_MINUS)
        assert not is_lagrangian(rel, FormKind.ZERO_MINUS)

    def test_sarel_relation_is_lagrangian_zero_plus(self, rng, tol):
        # V_{-iA} built from a Hermitian A on a proper domain
        n = 5
        cols = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
        dom = orthonormalize(cols)
        z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        herm = 0.5 * (z + z.conj().T)
        op = OperatorWithDomain(dom, dom, herm)
        rel = relation_from_operator(op, scale=-1j)
        assert is_lagrangian(rel, FormKind.ZERO_PLUS, tol)
        rel_sa = relation_from_operator(op, scale=1.0)
        assert is_lagrangian(rel_sa, FormKind.ZERO_MINUS, tol)


class TestGraphStructure:
    def test_full_domain_graph(self, rng, tol):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rel = graph_relation(a)
        assert domain_of(rel).dim == 3
        assert kernel_of_inverse(rel).dim == 0
        assert is_graph(rel)

    def test_sarel_kernel_is_domain_complement(self, tol):
        n = 3
        dom = Subspace(n, np.eye(n, dtype=complex)[:, 1:])
        op = OperatorWithDomain(dom, dom, np.diag([5.0, 7.0]).astype(complex))
        rel = relation_from_operator(op)
        ker = kernel_of_inverse(rel, tol)
        assert ker.equals(orthonormalize([e(0, n)]), tol)
        assert domain_of(rel, tol).equals(dom, tol)

    def test_inverse_relation_is_involutive(self, rng, tol):
        rel = LinearRelation.from_vectors(
            3, rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2))
        )
        assert inverse_relation(inverse_relation(rel)).space.equals(rel.space, tol)

    def test_inverse_preserves_lagrangian(self, rng, tol):
        n = 4
        cols = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
        dom = orthonormalize(cols)
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        op = OperatorWithDomain(dom, dom, 0.5 * (z + z.conj().T))
        for kind, scale in ((FormKind.ZERO_MINUS, 1.0), (FormKind.ZERO_PLUS, -1j)):
            rel = relation_from_operator(op, scale=scale)
            assert is_lagrangian(rel, kind, tol)
            assert is_lagrangian(inverse_relation(rel), kind, tol)


class TestComplexLinear:
    def test_complexification_of_complex_subspace(self, rng, tol):
        # real span of {v, iv} for complex v in C^2 (q, p, qdot, pdot layout)
        n = 1
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        as_real = lambda w: np.array([w[0].real, w[0].imag, w[1].real, w[1].imag])
        sub = orthonormalize([as_real(z), as_real(1j * z)], field_kind="real")
        assert is_complex_linear(sub, tol)

    def test_single_real_vector_is_never_complex_linear(self, tol):
        sub = orthonormalize([np.array([1.0, 0.0, 0.0, 0.0])], field_kind="real")
        assert not is_complex_linear(sub, tol)

    def test_bad_ambient_dimension(self):
        sub = orthonormalize([np.array([1.0, 0.0])], field_kind="real")
        with pytest.raises(ValueError, match="divisible by 4"):
            is_complex_linear(sub)


class TestDecomposeSelfAdjoint:
    def test_full_domain_hermitian_graph(self, tol):
        rel = graph_relation(np.diag([1.0, 3.0]).astype(complex))
        op = decompose_self_adjoint(rel, FormKind.ZERO_MINUS)
        assert op.domain.dim == 2
        assert np.allclose(op.ambient_matrix(), np.diag([1.0, 3.0]), atol=1e-9)

    def test_proper_domain_with_kernel_part(self, tol):
        n = 2
        dom = Subspace(n, np.eye(n, dtype=complex)[:, 1:])
        op_in = OperatorWithDomain(dom, dom, np.array([[5.0 + 0j]]))
        rel = relation_from_operator(op_in)
        op = decompose_self_adjoint(rel, FormKind.ZERO_MINUS)
        assert op.domain.equals(dom, tol)
        assert op.matrix == pytest.approx(np.array([[5.0 + 0j]]))

    def test_pure_kernel_relation(self, tol):
        n = 3
        frame = np.vstack([np.zeros((n, n)), np.eye(n)]).astype(complex)
        rel = LinearRelation(n, Subspace(2 * n, frame))
        op = decompose_self_adjoint(rel, FormKind.ZERO_MINUS)
        assert op.domain.dim == 0
        assert op.matrix.shape == (0, 0)

    def test_rejects_non_lagrangian(self):
        rel = LinearRelation.from_vectors(2, [pair(e(0, 2), 2 * e(0, 2))])
        with pytest.raises(ValueError, match="not Lagrangian"):
            decompose_self_adjoint(rel, FormKind.ZERO_MINUS)

    def test_reconstruction_and_hermitianness_random(self, rng, tol):
        n = 6
        for kind, scale in ((FormKind.ZERO_MINUS, 1.0), (FormKind.ZERO_PLUS, -1j)):
            for d in (2, 4, 6):
                cols = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
                dom = orthonormalize(cols)
                z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
                herm = 0.5 * (z + z.conj().T)
                rel = relation_from_operator(OperatorWithDomain(dom, dom, herm),
                                             scale=scale)
                out = decompose_self_adjoint(rel, kind, tol)
                m = out.matrix
                sign = 1.0 if kind is FormKind.ZERO_MINUS else -1.0
                defect = np.abs(m - sign * m.conj().T).max()
                assert defect <= 10 * tol.eq_tol * max(np.abs(m).max(), 1e-12)
                rebuilt = relation_from_operator(out)
                assert rebuilt.space.equals(rel.space, tol)

    def test_round_trip_through_sarel_form(self, rng, tol):
        # reconstruction check for the self-adjoint (zeroMinus) branch
        n = 5
        cols = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
        dom = orthonormalize(cols)
        z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        op_in = OperatorWithDomain(dom, dom, 0.5 * (z + z.conj().T))
        rel = relation_from_operator(op_in)
        out = decompose_self_adjoint(rel, FormKind.ZERO_MINUS, tol)
        assert np.abs(out.ambient_matrix() - op_in.ambient_matrix()).max() <= 1e-9


class TestIntegrabilityExtract:
    def test_graph_is_unchanged(self, rng, tol):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rel = graph_relation(a)
        assert integrability_extract(rel, tol).space.equals(rel.space, tol)

    def test_pure_kernel_extracts_to_zero(self, tol):
        n = 2
        frame = np.vstack([np.zeros((n, n)), np.eye(n)]).astype(complex)
        rel = LinearRelation(n, Subspace(2 * n, frame))
        assert integrability_extract(rel, tol).dim == 0

    def test_proper_domain_relation_becomes_graph(self, tol):
        n = 3
        dom = Subspace(n, np.eye(n, dtype=complex)[:, 1:])
        op = OperatorWithDomain(dom, dom, np.diag([-2j, -3j]))
        rel = relation_from_operator(op)
        extract = integrability_extract(rel, tol)
        assert is_graph(extract, tol)
        assert domain_of(extract, tol).equals(dom, tol)


class TestOperatorWithDomain:
    def test_apply_outside_domain_raises(self):
        dom = Subspace(2, np.eye(2, dtype=complex)[:, :1])
        op = OperatorWithDomain(dom, dom, np.array([[2.0 + 0j]]))
        with pytest.raises(ValueError, match="outside"):
            op.apply(np.array([0.0, 1.0], dtype=complex))

    def test_bounded_representative_on_full_domain(self, rng):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        op = full_domain_operator(a)
        x = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert np.allclose(op.apply(x), a @ x)
        assert np.allclose(op.ambient_matrix(), a)

    def test_conjugate_relation_preserves_forms(self, rng, tol):
        rel = LinearRelation.from_vectors(
            3, rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
        )
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        moved = conjugate_relation(rel, q, tol)
        for kind in (FormKind.ZERO_PLUS, FormKind.ZERO_MINUS):
            assert is_isotropic(rel, kind, tol) == is_isotropic(moved, kind, tol)
