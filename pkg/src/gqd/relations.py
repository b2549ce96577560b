"""Linear relations in H + H, the four pseudo-Hermitian forms, and the
structure theory of (anti) self-adjoint relations.

A relation is a complex subspace V of C^n + C^n stored as an orthonormal
frame; the first n coordinates are x, the last n are the velocity block.
Classification (graph / isotropic / Lagrangian) is computed on demand from
the frame, never cached.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    canonical_frame,
    intersect,
    null_space,
    orthonormalize,
)

__all__ = [
    "FormKind",
    "gram_matrix",
    "form_value",
    "symplectic_value",
    "LinearRelation",
    "OperatorWithDomain",
    "full_domain_operator",
    "graph_relation",
    "relation_from_operator",
    "conjugate_relation",
    "ortho_complement",
    "is_isotropic",
    "is_lagrangian",
    "domain_of",
    "kernel_of_inverse",
    "inverse_relation",
    "is_graph",
    "is_complex_linear",
    "decompose_self_adjoint",
    "integrability_extract",
]


class FormKind(enum.Enum):
    """The five sesquilinear forms on C^n + C^n (anti-linear first slot)."""

    ZERO_PLUS = "zeroPlus"    # <(x,x'),(y,y')> = <x',y> + <x,y'>
    ZERO_MINUS = "zeroMinus"  # i(<x',y> - <x,y'>)
    PLUS = "plus"             # <x',y'> + <x,y>
    MINUS = "minus"           # <x',y'> - <x,y>
    STANDARD = "standard"     # ambient Hermitian product

    @classmethod
    def from_string(cls, s: str) -> "FormKind":
        for kind in cls:
            if kind.value == s:
                return kind
        raise ValueError(f"unknown form kind {s!r}")


def gram_matrix(kind: FormKind, n: int) -> np.ndarray:
    """2n x 2n Gram matrix G with form(v, w) = v^dag G w."""
    if n < 1:
        raise ValueError("n must be >= 1")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    if kind is FormKind.ZERO_PLUS:
        return np.block([[zero, eye], [eye, zero]]).astype(complex)
    if kind is FormKind.ZERO_MINUS:
        return np.block([[zero, -1j * eye], [1j * eye, zero]])
    if kind is FormKind.PLUS:
        return np.eye(2 * n, dtype=complex)
    if kind is FormKind.MINUS:
        return np.block([[-eye, zero], [zero, eye]]).astype(complex)
    if kind is FormKind.STANDARD:
        return np.eye(2 * n, dtype=complex)
    raise ValueError(f"unknown form kind {kind!r}")


def _paired(v, w):
    v = np.asarray(v, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    if v.shape != w.shape:
        raise ValueError(f"dimension mismatch: {v.shape} vs {w.shape}")
    if v.shape[0] % 2 != 0:
        raise ValueError("vectors must live in C^(2n)")
    return v, w, v.shape[0] // 2


def form_value(kind: FormKind, v, w) -> complex:
    """Evaluate the pseudo-Hermitian form, anti-linear in the first slot."""
    v, w, n = _paired(v, w)
    x, xd = v[:n], v[n:]
    y, yd = w[:n], w[n:]
    ip = lambda a, b: complex(a.conj() @ b)
    if kind is FormKind.ZERO_PLUS:
        return ip(xd, y) + ip(x, yd)
    if kind is FormKind.ZERO_MINUS:
        return 1j * (ip(xd, y) - ip(x, yd))
    if kind is FormKind.PLUS:
        return ip(xd, yd) + ip(x, y)
    if kind is FormKind.MINUS:
        return ip(xd, yd) - ip(x, y)
    if kind is FormKind.STANDARD:
        return ip(v, w)
    raise ValueError(f"unknown form kind {kind!r}")


def symplectic_value(kind: FormKind, v, w) -> float:
    """Symplectic form attached to `kind`: minus the imaginary part."""
    return -form_value(kind, v, w).imag


@dataclass(frozen=True)
class LinearRelation:
    """A complex linear relation: a subspace of C^n + C^n."""

    n: int
    space: Subspace

    def __post_init__(self):
        if self.space.field_kind != "complex":
            raise ValueError("a linear relation must be a complex subspace")
        if self.space.ambient_dim != 2 * self.n:
            raise ValueError(
                f"ambient dim {self.space.ambient_dim} != 2n for n = {self.n}"
            )

    @property
    def dim(self) -> int:
        return self.space.dim

    @classmethod
    def from_vectors(cls, n: int, vectors, tol: Tolerance = DEFAULT_TOL) -> "LinearRelation":
        sub = orthonormalize(vectors, tol, ambient_dim=2 * n, field_kind="complex")
        return cls(n, sub)

    def equals(self, other: "LinearRelation", tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.n == other.n and self.space.equals(other.space, tol)


@dataclass(frozen=True)
class OperatorWithDomain:
    """An operator given by (domain, closure of domain, matrix).

    `matrix` has shape (closure.dim, domain.dim): column j holds the
    closure-frame coefficients of the image of the j-th domain frame vector.
    At finite dimension the closure equals the domain.
    """

    domain: Subspace
    closure: Subspace
    matrix: np.ndarray

    def __post_init__(self):
        if self.domain.ambient_dim != self.closure.ambient_dim:
            raise ValueError("domain and closure must share the ambient space")
        m = np.asarray(self.matrix)
        if m.shape != (self.closure.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {m.shape} != (closure dim {self.closure.dim}, "
                f"domain dim {self.domain.dim})"
            )

    @property
    def ambient_dim(self) -> int:
        return self.domain.ambient_dim

    def apply(self, x, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
        """Image of an ambient vector x in the domain."""
        x = np.asarray(x, dtype=complex).reshape(-1)
        if not self.domain.contains_vector(x, tol):
            raise ValueError("vector lies outside the operator domain")
        return self.closure.frame @ (self.matrix @ (self.domain.frame.conj().T @ x))

    def ambient_matrix(self) -> np.ndarray:
        """n x n matrix acting as the operator on the domain, zero on its complement."""
        if self.domain.dim == 0:
            return np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        return self.closure.frame @ self.matrix @ self.domain.frame.conj().T


def full_domain_operator(matrix) -> OperatorWithDomain:
    """Wrap a square matrix as an everywhere-defined operator."""
    m = as_matrix(matrix, square=True)
    eye = np.eye(m.shape[0], dtype=complex)
    full = Subspace(m.shape[0], eye, "complex")
    return OperatorWithDomain(full, full, m)


def graph_relation(matrix, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """Graph {(x, Ax)} of an everywhere-defined operator."""
    m = as_matrix(matrix, square=True)
    n = m.shape[0]
    gens = np.vstack([np.eye(n, dtype=complex), m])
    return LinearRelation.from_vectors(n, gens, tol)


def relation_from_operator(op: OperatorWithDomain, tol: Tolerance = DEFAULT_TOL,
                           scale=1.0) -> LinearRelation:
    """Relation {(x, scale * Ax + v) : x in D, v in D-perp} of an operator.

    With the orthogonal complement of the domain added to the velocity block
    this realizes the general form of an (anti) self-adjoint relation.
    """
    n = op.ambient_dim
    cols = []
    for j in range(op.domain.dim):
        x = op.domain.frame[:, j]
        y = scale * (op.closure.frame @ op.matrix[:, j])
        cols.append(np.concatenate([x, y]))
    perp = op.domain.perp()
    for j in range(perp.dim):
        cols.append(np.concatenate([np.zeros(n, dtype=complex), perp.frame[:, j]]))
    return LinearRelation.from_vectors(n, cols, tol)


def conjugate_relation(rel: LinearRelation, u, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """Change of Hilbert-space basis (x, y) -> (Ux, Uy) by a unitary U."""
    u = as_matrix(u, square=True)
    if u.shape[0] != rel.n:
        raise ValueError("unitary size does not match the relation")
    top = u @ rel.space.frame[: rel.n, :]
    bot = u @ rel.space.frame[rel.n :, :]
    return LinearRelation.from_vectors(rel.n, np.vstack([top, bot]), tol)


def ortho_complement(rel: LinearRelation, kind: FormKind,
                     tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """Orthogonal companion {w : form(v, w) = 0 for all v in V}."""
    g = gram_matrix(kind, rel.n)
    if rel.dim == 0:
        full = np.eye(2 * rel.n, dtype=complex)
        return LinearRelation(rel.n, Subspace(2 * rel.n, full, "complex"))
    rows = rel.space.frame.conj().T @ g
    basis = null_space(rows, tol, shape=(rel.dim, 2 * rel.n))
    return LinearRelation(rel.n, Subspace(2 * rel.n, basis, "complex"))


def is_isotropic(rel: LinearRelation, kind: FormKind,
                 tol: Tolerance = DEFAULT_TOL) -> bool:
    """V contained in its orthogonal companion (projector containment)."""
    comp = ortho_complement(rel, kind, tol)
    return comp.space.contains(rel.space, tol)


def is_lagrangian(rel: LinearRelation, kind: FormKind,
                  tol: Tolerance = DEFAULT_TOL) -> bool:
    """V equals its orthogonal companion."""
    comp = ortho_complement(rel, kind, tol)
    return rel.space.equals(comp.space, tol)


def domain_of(rel: LinearRelation, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Projection of the relation onto the first block.

    The rank decision is floored at the unit frame scale so that a block
    made of pure roundoff does not count as a domain direction."""
    return orthonormalize(rel.space.frame[: rel.n, :], tol,
                          ambient_dim=rel.n, field_kind="complex", scale=1.0)


def kernel_of_inverse(rel: LinearRelation, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """The multivalued part {x : (0, x) in V}."""
    top = rel.space.frame[: rel.n, :]
    coeffs = null_space(top, tol, shape=(rel.n, rel.dim), scale=1.0)
    vecs = rel.space.frame[rel.n :, :] @ coeffs
    return orthonormalize(vecs, tol, ambient_dim=rel.n, field_kind="complex",
                          scale=1.0)


def inverse_relation(rel: LinearRelation) -> LinearRelation:
    """Block swap {(y, x) : (x, y) in V}."""
    frame = np.vstack([rel.space.frame[rel.n :, :], rel.space.frame[: rel.n, :]])
    return LinearRelation(rel.n, Subspace(2 * rel.n, frame, "complex"))


def is_graph(rel: LinearRelation, tol: Tolerance = DEFAULT_TOL) -> bool:
    """A relation is the graph of an operator iff its inverse kernel is trivial."""
    return kernel_of_inverse(rel, tol).dim == 0


def complex_structure_matrix(n_complex: int) -> np.ndarray:
    """Real matrix of multiplication by i on R^(4n) in (q, p, qdot, pdot)
    blocks: (q, p) -> (-p, q) and likewise on the velocity pair. Takes the
    number of complex coordinates n_complex = 2n."""
    if n_complex % 2 != 0:
        raise ValueError("expected an even number of complex coordinates")
    n = n_complex // 2
    eye = np.eye(n)
    zero = np.zeros((n, n))
    j2 = np.block([[zero, -eye], [eye, zero]])
    out = np.zeros((4 * n, 4 * n))
    out[: 2 * n, : 2 * n] = j2
    out[2 * n :, 2 * n :] = j2
    return out


def is_complex_linear(real_sub: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether a real subspace of R^(4n), read as (q, p, qdot, pdot) inside
    C^n + C^n via x = q + ip, xdot = qdot + i pdot, is a complex subspace.

    True iff the subspace projector commutes with the real matrix of
    multiplication by i.
    """
    if real_sub.ambient_dim % 4 != 0:
        raise ValueError("ambient real dimension must be divisible by 4")
    j = complex_structure_matrix(real_sub.ambient_dim // 2)
    p = real_sub.projector().real
    return float(np.linalg.norm(p @ j - j @ p, 2)) <= tol.eq_tol


def decompose_self_adjoint(rel: LinearRelation, kind: FormKind,
                           tol: Tolerance = DEFAULT_TOL) -> OperatorWithDomain:
    """Split an (anti) self-adjoint relation into (D, closure D, A).

    The relation must be Lagrangian for `kind` (zeroMinus: self-adjoint,
    A Hermitian; zeroPlus: anti self-adjoint, A anti-Hermitian). The returned
    triple satisfies V = {(x, Ax + v) : x in D, v in D-perp}.
    """
    if kind not in (FormKind.ZERO_PLUS, FormKind.ZERO_MINUS):
        raise ValueError("decomposition applies to the zeroPlus/zeroMinus forms")
    if not is_lagrangian(rel, kind, tol):
        raise ValueError("relation is not Lagrangian for the requested form")
    dom = canonical_frame(domain_of(rel, tol), tol)
    extract = integrability_extract(rel, tol)
    d = dom.dim
    if d == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return OperatorWithDomain(dom, dom, empty)
    if extract.dim != d:
        raise ValueError(
            f"integrability extract has dim {extract.dim}, expected the domain "
            f"dim {d}; the relation is not of the canonical split form"
        )
    top = extract.space.frame[: rel.n, :]
    bot = extract.space.frame[rel.n :, :]
    coeffs, *_ = np.linalg.lstsq(top, dom.frame, rcond=None)
    images = bot @ coeffs
    matrix = dom.frame.conj().T @ images
    return OperatorWithDomain(dom, dom, matrix)


def integrability_extract(rel: LinearRelation, tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """First integrability extract V with velocities restricted to the domain
    closure: the intersection of V with D + closure(D)."""
    dom = domain_of(rel, tol)
    n = rel.n
    blocks = np.zeros((2 * n, 2 * dom.dim), dtype=complex)
    blocks[:n, : dom.dim] = dom.frame
    blocks[n:, dom.dim :] = dom.frame
    box = Subspace(2 * n, blocks, "complex")
    meet = intersect(rel.space, box, tol)
    return LinearRelation(n, meet)
