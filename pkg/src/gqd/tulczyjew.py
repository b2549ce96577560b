"""Implicit quantum dynamics from constrained quadratic Lagrangians.

The pipeline builds the generated Lagrangian subspace in (q, qdot, pdot, p)
coordinates, permutes into (q, p, qdot, pdot), reads the result as a relation
in C^n + C^n via x = q + ip, xdot = qdot + i pdot, and, when the relation is
complex linear, extracts the Hermitian generator A with the dynamics being
the graph of -(i/hbar) A on the constraint closure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linalg import DEFAULT_TOL, Subspace, Tolerance, canonical_frame, orthonormalize
from .relations import (
    FormKind,
    LinearRelation,
    OperatorWithDomain,
    decompose_self_adjoint,
    domain_of,
    is_complex_linear,
    is_lagrangian,
    relation_from_operator,
)

__all__ = [
    "QuadraticLagrangian",
    "DynamicsReport",
    "oscillator_lagrangian",
    "build_lagrangian_subspace",
    "alpha",
    "alpha_inverse",
    "complexify",
    "generate_dynamics",
    "hamiltonian_value",
    "hamiltonian_relation",
    "discretized_laplacian_lagrangian",
    "lagrangian_of",
    "omega0_gram",
]


@dataclass(frozen=True)
class QuadraticLagrangian:
    """A quadratic Lagrangian L(Q) = (1/2) g0(Q, B Q) on a constraint D0.

    `domain` is a real subspace of R^(2n) in (q, qdot) coordinates and
    `b_matrix` the symmetric matrix of the quadratic form expressed in the
    domain frame (mapping into the closure of D0, which at finite dimension
    is D0 itself).
    """

    n: int
    domain: Subspace
    b_matrix: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        if self.domain.field_kind != "real":
            raise ValueError("the Lagrangian constraint must be a real subspace")
        if self.domain.ambient_dim != 2 * self.n:
            raise ValueError("constraint must live in R^(2n) with (q, qdot) blocks")
        b = np.asarray(self.b_matrix, dtype=float)
        d = self.domain.dim
        if b.shape != (d, d):
            raise ValueError(f"b_matrix shape {b.shape} != ({d}, {d})")
        scale = max(float(np.abs(b).max(initial=0.0)), 1e-300)
        if np.abs(b - b.T).max(initial=0.0) > DEFAULT_TOL.eq_tol * scale:
            raise ValueError("b_matrix must be symmetric")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    def value(self, q, qdot) -> float:
        """L(q, qdot) for an ambient configuration-velocity pair in D0."""
        big = np.concatenate([np.asarray(q, float), np.asarray(qdot, float)])
        coeff = self.domain.frame.T @ big
        return 0.5 * float(coeff @ (self.b_matrix @ coeff))

    def ambient_b(self) -> np.ndarray:
        """The quadratic form as a symmetric 2n x 2n matrix supported on D0."""
        f = self.domain.frame
        return f @ self.b_matrix @ f.T


@dataclass(frozen=True)
class DynamicsReport:
    """Everything the generation pipeline produces for one Lagrangian."""

    lagrangian_subspace: Subspace          # in (q, qdot, pdot, p), dim 2n
    relation: LinearRelation               # V(L) in C^n + C^n (complex hull if not complex linear)
    complex_linear: bool
    lagrangian_zero_plus: Optional[bool]   # None when not complex linear
    schroedinger: Optional[OperatorWithDomain]  # Hermitian A; dynamics is -(i/hbar) A
    constraint_closure: Subspace           # closure of dom V(L) in C^n
    hbar: float


def oscillator_lagrangian(lambdas: Sequence[float], q_zero: Sequence[int] = (),
                          qdot_zero: Sequence[int] = (), hbar: float = 1.0) -> QuadraticLagrangian:
    """Diagonal family L = (1/2) sum_k (qdot_k^2 / lambda_k - lambda_k q_k^2).

    Indices in `q_zero` are frozen configurations (the lambda -> infinity
    limit, entry of `lambdas` ignored there); indices in `qdot_zero` carry
    lambda_k = 0 and a frozen velocity. Free indices need lambda_k != 0.
    """
    lam = np.asarray(lambdas, dtype=float)
    n = lam.shape[0]
    qz, qdz = set(map(int, q_zero)), set(map(int, qdot_zero))
    if qz & qdz:
        raise ValueError("an index cannot be constrained in both q and qdot")
    for s in (qz, qdz):
        for k in s:
            if not 0 <= k < n:
                raise ValueError(f"constraint index {k} out of range for n = {n}")
    frame_cols = []
    diag = []
    for k in range(n):          # q directions
        if k in qz:
            continue
        e = np.zeros(2 * n)
        e[k] = 1.0
        frame_cols.append(e)
        diag.append(0.0 if k in qdz else -lam[k])
    for k in range(n):          # qdot directions
        if k in qdz:
            continue
        e = np.zeros(2 * n)
        e[n + k] = 1.0
        frame_cols.append(e)
        if k in qz:
            diag.append(0.0)
        else:
            if lam[k] == 0.0:
                raise ValueError(
                    f"lambda[{k}] = 0 requires a qdot constraint at index {k}"
                )
            diag.append(1.0 / lam[k])
    frame = np.column_stack(frame_cols) if frame_cols else np.zeros((2 * n, 0))
    domain = Subspace(2 * n, frame, "real")
    return QuadraticLagrangian(n, domain, np.diag(diag), hbar)


def build_lagrangian_subspace(lag: QuadraticLagrangian,
                              tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Generated Lagrangian subspace S(L) in R^(4n), coords (q, qdot, pdot, p).

    Spanned by (Q, B Q) for Q running over the constraint frame together with
    the annihilator lift {0} x D0-perp; always of dimension 2n and Lagrangian
    for the canonical pairing form (checked).
    """
    n = lag.n
    f = lag.domain.frame                       # (2n, d)
    images = f @ lag.b_matrix                  # ambient representative of g0(BQ, .)
    gens = [np.vstack([f, images])]            # (4n, d)
    perp = lag.domain.perp()
    if perp.dim:
        lift = np.vstack([np.zeros((2 * n, perp.dim)), perp.frame])
        gens.append(lift)
    sub = orthonormalize(np.hstack(gens), tol, ambient_dim=4 * n, field_kind="real")
    if sub.dim != 2 * n:
        raise ValueError(f"generated subspace has dim {sub.dim}, expected {2 * n}")
    g0 = omega0_gram(n)
    residual = np.abs(sub.frame.T @ g0 @ sub.frame).max(initial=0.0)
    if residual > 10 * tol.eq_tol:
        raise ValueError(f"generated subspace is not Lagrangian (residual {residual:.3e})")
    return sub


def omega0_gram(n: int) -> np.ndarray:
    """Canonical pairing form <P', Q> - <P, Q'> on (Q, P) = ((q, qdot), (pdot, p))."""
    eye = np.eye(2 * n)
    zero = np.zeros((2 * n, 2 * n))
    return np.block([[zero, eye], [-eye, zero]])


def _block_permutation(n: int, perm) -> np.ndarray:
    """4n x 4n permutation sending block i of the input to slot perm[i]."""
    out = np.zeros((4 * n, 4 * n))
    for src, dst in enumerate(perm):
        out[dst * n : (dst + 1) * n, src * n : (src + 1) * n] = np.eye(n)
    return out


def alpha(sub: Subspace) -> Subspace:
    """Coordinate form of the tangent-cotangent identification:
    (q, p, qdot, pdot) -> (q, qdot, pdot, p)."""
    if sub.ambient_dim % 4 != 0:
        raise ValueError("ambient dimension must be divisible by 4")
    n = sub.ambient_dim // 4
    perm = _block_permutation(n, (0, 3, 1, 2))  # q->q, p->p-slot, qdot->qdot, pdot->pdot
    return Subspace(sub.ambient_dim, perm @ sub.frame, sub.field_kind)


def alpha_inverse(sub: Subspace) -> Subspace:
    """Inverse identification: (q, qdot, pdot, p) -> (q, p, qdot, pdot)."""
    if sub.ambient_dim % 4 != 0:
        raise ValueError("ambient dimension must be divisible by 4")
    n = sub.ambient_dim // 4
    perm = _block_permutation(n, (0, 2, 3, 1))  # q->q, qdot->slot2, pdot->slot3, p->slot1
    return Subspace(sub.ambient_dim, perm @ sub.frame, sub.field_kind)


def complexify(sub: Subspace, tol: Tolerance = DEFAULT_TOL):
    """Read a real subspace of R^(4n) in (q, p, qdot, pdot) coordinates inside
    C^n + C^n.

    Returns (relation, complex_linear). When the subspace is closed under
    multiplication by i the relation *is* the subspace; otherwise the returned
    relation is its complex hull and the flag is False.
    """
    if sub.ambient_dim % 4 != 0:
        raise ValueError("ambient dimension must be divisible by 4")
    n = sub.ambient_dim // 4
    flag = is_complex_linear(sub, tol)
    f = sub.frame
    vecs = np.vstack([f[:n, :] + 1j * f[n : 2 * n, :],
                      f[2 * n : 3 * n, :] + 1j * f[3 * n :, :]])
    rel = LinearRelation.from_vectors(n, vecs, tol)
    return rel, flag


def generate_dynamics(lag: QuadraticLagrangian, tol: Tolerance = DEFAULT_TOL) -> DynamicsReport:
    """Run the full generation pipeline on a quadratic Lagrangian.

    When V(L) is complex linear it is checked Lagrangian for the zeroPlus
    form, the integrability extract is taken, and the Hermitian operator A is
    recovered from the graph of -(i/hbar) A. A non complex-linear V(L) is a
    legal outcome reported through the flag, not an error.
    """
    sl = build_lagrangian_subspace(lag, tol)
    vl_real = alpha_inverse(sl)
    rel, flag = complexify(vl_real, tol)
    closure = canonical_frame(domain_of(rel, tol), tol)
    if not flag:
        return DynamicsReport(sl, rel, False, None, None, closure, lag.hbar)
    lagr = is_lagrangian(rel, FormKind.ZERO_PLUS, tol)
    if not lagr:
        warnings.warn("complex-linear V(L) failed the zeroPlus Lagrangian check")
        return DynamicsReport(sl, rel, True, False, None, closure, lag.hbar)
    generator = decompose_self_adjoint(rel, FormKind.ZERO_PLUS, tol)
    a_matrix = 1j * lag.hbar * generator.matrix
    herm = max(np.abs(a_matrix).max(initial=0.0), 1e-300)
    if np.abs(a_matrix - a_matrix.conj().T).max(initial=0.0) > 100 * tol.eq_tol * herm:
        warnings.warn("extracted operator is not Hermitian within tolerance")
    op = OperatorWithDomain(generator.domain, generator.closure, a_matrix)
    return DynamicsReport(sl, rel, True, True, op, closure, lag.hbar)


def hamiltonian_value(op: OperatorWithDomain, x, hbar: float = 1.0,
                      tol: Tolerance = DEFAULT_TOL) -> float:
    """Constrained Hamiltonian h(x) = <x, Ax> / (2 hbar) on the domain."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    ax = op.apply(x, tol)  # raises when x is outside the domain
    return float((x.conj() @ ax).real) / (2.0 * hbar)


def hamiltonian_relation(op: OperatorWithDomain, hbar: float = 1.0,
                         tol: Tolerance = DEFAULT_TOL) -> LinearRelation:
    """The relation {(x, -(i/hbar) Ax + v) : x in D, v in D-perp}."""
    return relation_from_operator(op, tol, scale=-1j / hbar)


def discretized_laplacian_lagrangian(grid_n: int, mass: float = 1.0,
                                     hbar: float = 1.0) -> QuadraticLagrangian:
    """Finite-difference kinetic-energy family on a Dirichlet grid.

    A = -(hbar^2 / 2m) * (second difference, unit spacing); the Lagrangian is
    L(q, qdot) = (1/2)(qdot^T A^-1 qdot - q^T A q / hbar^2) on the full
    domain. A is symmetric positive definite, hence invertible. The generated
    relation is complex linear (and recovers A) for hbar = 1; other hbar
    values rescale the two quadratic blocks incompatibly.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    if mass <= 0 or hbar <= 0:
        raise ValueError("mass and hbar must be positive")
    second_diff = -2.0 * np.eye(grid_n)
    idx = np.arange(grid_n - 1)
    second_diff[idx, idx + 1] = 1.0
    second_diff[idx + 1, idx] = 1.0
    a = -(hbar ** 2) / (2.0 * mass) * second_diff
    a_inv = np.linalg.inv(a)
    b = np.zeros((2 * grid_n, 2 * grid_n))
    b[:grid_n, :grid_n] = -a / hbar ** 2
    b[grid_n:, grid_n:] = a_inv
    domain = Subspace(2 * grid_n, np.eye(2 * grid_n), "real")
    return QuadraticLagrangian(grid_n, domain, b, hbar)


def lagrangian_of(op: OperatorWithDomain, hbar: float = 1.0,
                  tol: Tolerance = DEFAULT_TOL):
    """Quadratic Lagrangian whose generated dynamics recovers the operator.

    Works in the spectral basis of the operator: eigenvalue mu_k becomes the
    oscillator weight lambda_k = mu_k / hbar (a frozen-velocity direction for
    mu_k = 0), and directions orthogonal to the domain become frozen
    configurations. Returns (lagrangian, basis) where `basis` is the unitary
    whose columns carry the Lagrangian coordinates; the generated relation,
    conjugated by `basis`, reproduces the operator's relation in the original
    coordinates.
    """
    n = op.ambient_dim
    d = op.domain.dim
    m = np.asarray(op.matrix)
    scale = max(float(np.abs(m).max(initial=0.0)), 1e-300)
    if d and np.abs(m - m.conj().T).max(initial=0.0) > tol.eq_tol * scale * 10:
        raise ValueError("operator must be Hermitian on its domain")
    if d:
        mu, r = np.linalg.eigh(0.5 * (m + m.conj().T))
        eigvecs = op.domain.frame @ r
    else:
        mu = np.zeros(0)
        eigvecs = np.zeros((n, 0), dtype=complex)
    basis = np.hstack([eigvecs, op.domain.perp().frame])
    lambdas = np.zeros(n)
    qdot_zero, q_zero = [], []
    mu_scale = max(float(np.abs(mu).max(initial=0.0)), 1.0)
    for k in range(d):
        if abs(mu[k]) <= tol.rank_tol * mu_scale:
            qdot_zero.append(k)
        else:
            lambdas[k] = mu[k] / hbar
    q_zero = list(range(d, n))
    lag = oscillator_lagrangian(lambdas, q_zero=q_zero, qdot_zero=qdot_zero, hbar=hbar)
    return lag, basis
