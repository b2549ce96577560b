"""Cayley transform machinery and self-adjoint extensions of symmetric
relations.

The Cayley map C(x, x') = (x' + ix, x' - ix)/sqrt(2) carries zeroMinus
isotropic relations to graphs of partial isometries; unitaries between the
deficiency spaces N+ and N- parametrize the self-adjoint extensions. C is
unitary for the ambient product and satisfies (anti-linear first slot)

    <Cv, Cw>_{0+} = <v, w>_-        <Cv, Cw>_- = -<v, w>_{0-}

so isotropy and Lagrangianity transfer exactly where the extension theory
needs them (an overall sign of a form changes neither notion).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    canonical_frame,
    intersect,
    orthonormalize,
)
from .relations import (
    FormKind,
    LinearRelation,
    OperatorWithDomain,
    graph_relation,
    is_isotropic,
    ortho_complement,
)

__all__ = [
    "CayleyData",
    "cayley_matrix",
    "inverse_cayley_matrix",
    "cayley_vector",
    "inverse_cayley_vector",
    "cayley_relation",
    "inverse_cayley_relation",
    "partial_isometry_of",
    "extend",
    "deficiency_of_operator",
    "deficiency_routes",
]


@dataclass(frozen=True)
class CayleyData:
    """Partial isometry U: W+ -> W- with deficiency spaces N+/- = W+/- perp.

    `matrix` holds U in the (canonically ordered) W+/W- frames and satisfies
    matrix^dag matrix = identity on W+.
    """

    w_plus: Subspace
    w_minus: Subspace
    matrix: np.ndarray
    n_plus: Subspace
    n_minus: Subspace

    @property
    def indices(self):
        return (self.n_plus.dim, self.n_minus.dim)

    def apply(self, x) -> np.ndarray:
        """Image of an ambient vector of W+ under the isometry."""
        return self.w_minus.frame @ (self.matrix @ (self.w_plus.frame.conj().T @ x))


def cayley_matrix(n: int) -> np.ndarray:
    """2n x 2n matrix of C(x, x') = (x' + ix, x' - ix)/sqrt(2)."""
    eye = np.eye(n)
    return np.block([[1j * eye, eye], [-1j * eye, eye]]) / np.sqrt(2.0)


def inverse_cayley_matrix(n: int) -> np.ndarray:
    return cayley_matrix(n).conj().T  # C is unitary


def cayley_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] % 2 != 0:
        raise ValueError("vector must live in C^(2n)")
    n = v.shape[0] // 2
    x, xd = v[:n], v[n:]
    return np.concatenate([(xd + 1j * x), (xd - 1j * x)]) / np.sqrt(2.0)


def inverse_cayley_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] % 2 != 0:
        raise ValueError("vector must live in C^(2n)")
    n = v.shape[0] // 2
    u, w = v[:n], v[n:]
    return np.concatenate([-1j * (u - w), (u + w)]) / np.sqrt(2.0)


def cayley_relation(rel: LinearRelation, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """Image relation C(V): frame columns mapped and re-orthonormalized."""
    mapped = cayley_matrix(rel.n) @ rel.space.frame
    return LinearRelation.from_vectors(rel.n, mapped, tol)


def inverse_cayley_relation(rel: LinearRelation, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    mapped = inverse_cayley_matrix(rel.n) @ rel.space.frame
    return LinearRelation.from_vectors(rel.n, mapped, tol)


def partial_isometry_of(rel: LinearRelation, tol: Tolerance = DEFAULT_TOL) -> CayleyData:
    """Partial isometry of a symmetric relation via the Cayley image.

    Requires V isotropic for the zeroMinus form; C(V) is then verified
    isotropic for the minus form, hence the graph of an isometry
    U: W+ -> W-, and N+/- are the orthogonal complements of W+/-.
    """
    if not is_isotropic(rel, FormKind.ZERO_MINUS, tol):
        raise ValueError("relation is not symmetric (zeroMinus isotropic)")
    image = cayley_relation(rel, tol)
    if not is_isotropic(image, FormKind.MINUS, tol):
        raise ValueError("Cayley image is not minus-isotropic; input corrupt")
    n = rel.n
    top = image.space.frame[:n, :]
    bot = image.space.frame[n:, :]
    w_plus = canonical_frame(orthonormalize(top, tol, ambient_dim=n,
                                            field_kind="complex", scale=1.0), tol)
    w_minus = canonical_frame(orthonormalize(bot, tol, ambient_dim=n,
                                             field_kind="complex", scale=1.0), tol)
    if w_plus.dim != image.dim or w_minus.dim != image.dim:
        raise ValueError("Cayley image is not the graph of an isometry")
    if w_plus.dim:
        coeffs, *_ = np.linalg.lstsq(top, w_plus.frame, rcond=None)
        images = bot @ coeffs
        matrix = w_minus.frame.conj().T @ images
    else:
        matrix = np.zeros((0, 0), dtype=complex)
    return CayleyData(w_plus, w_minus, matrix,
                      canonical_frame(w_plus.perp(), tol),
                      canonical_frame(w_minus.perp(), tol))


def extend(rel: LinearRelation, u0, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """Self-adjoint extension of a symmetric relation from a deficiency unitary.

    `u0` maps the canonical N+ frame to the canonical N- frame (square
    unitary matrix of size equal to the deficiency indices, which must agree).
    The result contains the input and is Lagrangian for the zeroMinus form;
    the extension may be a genuine relation (nontrivial inverse kernel) when
    the extended unitary touches the eigenvalue one.
    """
    data = partial_isometry_of(rel, tol)
    kp, km = data.indices
    u0 = np.asarray(u0, dtype=complex)
    if u0.shape != (km, kp):
        raise ValueError(f"u0 shape {u0.shape} incompatible with indices {(kp, km)}")
    if kp != km:
        raise ValueError("deficiency indices differ; no self-adjoint extension exists")
    if kp and np.abs(u0.conj().T @ u0 - np.eye(kp)).max() > 10 * tol.eq_tol:
        raise ValueError("u0 is not unitary within tolerance")
    n = rel.n
    cols = []
    for j in range(data.w_plus.dim):
        x = data.w_plus.frame[:, j]
        cols.append(np.concatenate([x, data.apply(x)]))
    for j in range(kp):
        x = data.n_plus.frame[:, j]
        y = data.n_minus.frame @ u0[:, j]
        cols.append(np.concatenate([x, y]))
    graph = LinearRelation.from_vectors(n, cols, tol)
    return inverse_cayley_relation(graph, tol)


def deficiency_of_operator(op: OperatorWithDomain, tol: Tolerance = DEFAULT_TOL) -> CayleyData:
    """Deficiency data of a symmetric operator, computed two ways and checked.

    Route (a): N+/- as orthogonal complements of the ranges of A +/- iI on
    the domain. Route (b): the adjoint relation (zeroMinus orthogonal
    companion of the graph), then the kernels of (adjoint -/+ i). Both must
    agree with the Cayley route within tolerance, and the partial isometry
    satisfies U(A + iI) = (A - iI) on the domain frame.
    """
    rel = _graph_of(op, tol)
    if not is_isotropic(rel, FormKind.ZERO_MINUS, tol):
        raise ValueError("operator is not symmetric on its domain")
    data = partial_isometry_of(rel, tol)
    n = op.ambient_dim
    d = op.domain.dim
    amb = op.ambient_matrix()
    # route (a): complements of the ranges of A +/- iI restricted to D
    for sign, space in ((1.0, data.n_plus), (-1.0, data.n_minus)):
        if d:
            ran = (amb + sign * 1j * np.eye(n)) @ op.domain.frame
        else:
            ran = np.zeros((n, 0), dtype=complex)
        w = orthonormalize(ran, tol, ambient_dim=n, field_kind="complex")
        if not w.perp().equals(space, tol):
            raise ValueError("range-complement deficiency space disagrees with Cayley route")
    # route (b): kernels of the adjoint relation -/+ i
    adjoint = ortho_complement(rel, FormKind.ZERO_MINUS, tol)
    for sign, space in ((1.0, data.n_plus), (-1.0, data.n_minus)):
        eig = _relation_eigenspace(adjoint, sign * 1j, tol)
        if not eig.equals(space, tol):
            raise ValueError("adjoint-kernel deficiency space disagrees with Cayley route")
    # Cayley functional equation on the domain frame
    if d:
        lhs = data.apply((amb + 1j * np.eye(n)) @ op.domain.frame)
        rhs = (amb - 1j * np.eye(n)) @ op.domain.frame
        scale = max(np.abs(rhs).max(initial=0.0), 1.0)
        if np.abs(lhs - rhs).max(initial=0.0) > 100 * tol.eq_tol * scale:
            raise ValueError("partial isometry violates U(A + i) = A - i on the domain")
    return data


def deficiency_routes(op: OperatorWithDomain, tol: Tolerance = DEFAULT_TOL):
    """Deficiency spaces by the two independent routes, without cross-checks.

    Returns ((range_plus, range_minus), (kernel_plus, kernel_minus)): the
    orthogonal complements of the ranges of A +/- iI on the domain, and the
    kernels of (adjoint relation) -/+ i. Used as the comparison oracle for
    the von Neumann statement.
    """
    rel = _graph_of(op, tol)
    if not is_isotropic(rel, FormKind.ZERO_MINUS, tol):
        raise ValueError("operator is not symmetric on its domain")
    n = op.ambient_dim
    amb = op.ambient_matrix()
    by_range = []
    for sign in (1.0, -1.0):
        if op.domain.dim:
            ran = (amb + sign * 1j * np.eye(n)) @ op.domain.frame
        else:
            ran = np.zeros((n, 0), dtype=complex)
        w = orthonormalize(ran, tol, ambient_dim=n, field_kind="complex")
        by_range.append(w.perp())
    adjoint = ortho_complement(rel, FormKind.ZERO_MINUS, tol)
    by_kernel = [_relation_eigenspace(adjoint, 1j, tol),
                 _relation_eigenspace(adjoint, -1j, tol)]
    return tuple(by_range), tuple(by_kernel)


def _graph_of(op: OperatorWithDomain, tol: Tolerance) -> LinearRelation:
    """Graph {(x, Ax) : x in D} without the D-perp lift."""
    n = op.ambient_dim
    cols = []
    for j in range(op.domain.dim):
        x = op.domain.frame[:, j]
        cols.append(np.concatenate([x, op.closure.frame @ op.matrix[:, j]]))
    if not cols:
        return LinearRelation(n, Subspace(2 * n, np.zeros((2 * n, 0), dtype=complex)))
    return LinearRelation.from_vectors(n, cols, tol)


def _relation_eigenspace(rel: LinearRelation, value: complex,
                         tol: Tolerance) -> Subspace:
    """{y : (y, value * y) in V}: intersect with the graph of value * identity."""
    n = rel.n
    graph = graph_relation(value * np.eye(n), tol)
    meet = intersect(rel.space, graph.space, tol)
    top = meet.frame[:n, :]
    return canonical_frame(orthonormalize(top, tol, ambient_dim=n,
                                          field_kind="complex", scale=1.0), tol)
