"""Kahler geometry of the projective space of pure states at finite dimension.

Pure states are rank-one orthogonal projectors; a tangent vector at the state
of psi is the Hermitian matrix |phi><psi| + |psi><phi| with phi orthogonal to
psi. The complex structure, symplectic form, and Riemannian tensor are all
computable from the (projector, tangent-matrix) pair alone:

    J(m)      = i [m, rho]
    g(m, m')  = tr(m m')
    w(m, m')  = -tr(J(m) m')          (so g(t, t') = w(J t, t'))

matching 2 Re <phi, phi'> ||psi||^2 and -2 Im <phi, phi'> ||psi||^2 whenever
both tangents use the same representative psi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import DEFAULT_TOL, Subspace, Tolerance, as_matrix, intersect, orthonormalize
from .relations import OperatorWithDomain

__all__ = [
    "PureState",
    "ProjTangent",
    "ReducedDynamics",
    "pure_state",
    "tangent_rep",
    "tangent_of_projection",
    "complex_j",
    "omega_p",
    "g_p",
    "hermitian_p",
    "unitary_action_tangent",
    "reduced_hamiltonian",
    "hamiltonian_field",
    "is_critical_point",
    "reduced_dynamics_set",
]


@dataclass(frozen=True)
class PureState:
    """A rank-one orthogonal projector, optionally with a representative vector."""

    rho: np.ndarray
    representative: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def equals(self, other: "PureState", tol: Tolerance = DEFAULT_TOL) -> bool:
        return (self.dim == other.dim
                and float(np.linalg.norm(self.rho - other.rho, 2)) <= tol.eq_tol)


@dataclass(frozen=True)
class ProjTangent:
    """Tangent vector to the projective space at `base`.

    `matrix` is the Hermitian representative |phi><psi| + |psi><phi|; the
    optional (psi, phi) pair records how it was built. Equality of tangents is
    equality of matrices (representation independent).
    """

    base: PureState
    matrix: np.ndarray
    psi: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None

    def equals(self, other: "ProjTangent", tol: Tolerance = DEFAULT_TOL) -> bool:
        return (self.base.equals(other.base, tol)
                and float(np.linalg.norm(self.matrix - other.matrix, 2)) <= tol.eq_tol)


def pure_state(psi, tol: Tolerance = DEFAULT_TOL) -> PureState:
    """Projector |psi><psi| / ||psi||^2; scale invariant in psi."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if nrm <= tol.rank_tol:
        raise ValueError("cannot project a (near-)zero vector")
    rho = np.outer(psi, psi.conj()) / (nrm ** 2)
    return PureState(rho, psi)


def tangent_rep(psi, phi, tol: Tolerance = DEFAULT_TOL) -> ProjTangent:
    """Tangent |phi><psi| + |psi><phi| for phi orthogonal to psi."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if psi.shape != phi.shape:
        raise ValueError("psi and phi must share a dimension")
    nrm = np.linalg.norm(psi)
    if nrm <= tol.rank_tol:
        raise ValueError("base vector must be nonzero")
    overlap = abs(psi.conj() @ phi)
    if overlap > tol.eq_tol * max(nrm * np.linalg.norm(phi), 1e-300):
        raise ValueError("phi is not orthogonal to psi")
    m = np.outer(phi, psi.conj()) + np.outer(psi, phi.conj())
    return ProjTangent(pure_state(psi, tol), m, psi, phi)


def _strip_parallel(psi, phi, passes=2):
    """Remove the psi component of phi (two passes kill roundoff residue)."""
    nrm2 = float(np.linalg.norm(psi) ** 2)
    out = phi
    for _ in range(passes):
        out = out - (psi.conj() @ out) / nrm2 * psi
    return out


def _tangent_unchecked(psi, phi, tol: Tolerance) -> ProjTangent:
    m = np.outer(phi, psi.conj()) + np.outer(psi, phi.conj())
    return ProjTangent(pure_state(psi, tol), m, psi, phi)


def tangent_of_projection(psi, phi, tol: Tolerance = DEFAULT_TOL) -> ProjTangent:
    """Tangent map of the projection: strip the psi component of phi and
    scale by 1 / ||psi||^2."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    nrm2 = float(np.linalg.norm(psi) ** 2)
    if nrm2 <= tol.rank_tol ** 2:
        raise ValueError("base vector must be nonzero")
    perp = _strip_parallel(psi, phi)
    return _tangent_unchecked(psi, perp / nrm2, tol)


def _check_same_base(t: ProjTangent, u: ProjTangent, tol: Tolerance):
    if not t.base.equals(u.base, tol):
        raise ValueError("tangent vectors are attached to different base states")


def complex_j(t: ProjTangent) -> ProjTangent:
    """Complex structure J(phi_psi) = (i phi)_psi, i.e. i [m, rho]."""
    m = 1j * (t.matrix @ t.base.rho - t.base.rho @ t.matrix)
    phi = None if t.phi is None else 1j * t.phi
    return ProjTangent(t.base, m, t.psi, phi)


def g_p(t: ProjTangent, u: ProjTangent, tol: Tolerance = DEFAULT_TOL) -> float:
    """Riemannian tensor tr(m m') = 2 Re <phi, phi'> ||psi||^2."""
    _check_same_base(t, u, tol)
    return float(np.trace(t.matrix @ u.matrix).real)


def omega_p(t: ProjTangent, u: ProjTangent, tol: Tolerance = DEFAULT_TOL) -> float:
    """Symplectic form -2 Im <phi, phi'> ||psi||^2 (the coadjoint-orbit form)."""
    _check_same_base(t, u, tol)
    return -g_p(complex_j(t), u, tol)


def hermitian_p(t: ProjTangent, u: ProjTangent, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Hermitian product g - i w = 2 <phi, phi'> ||psi||^2."""
    return complex(g_p(t, u, tol), -omega_p(t, u, tol))


def unitary_action_tangent(u, t: ProjTangent, tol: Tolerance = DEFAULT_TOL) -> ProjTangent:
    """Push a tangent forward along the projective action of a unitary."""
    u = as_matrix(u, square=True)
    n = u.shape[0]
    if np.abs(u.conj().T @ u - np.eye(n)).max() > 10 * tol.eq_tol:
        raise ValueError("matrix is not unitary within tolerance")
    base = PureState(u @ t.base.rho @ u.conj().T,
                     None if t.base.representative is None else u @ t.base.representative)
    psi = None if t.psi is None else u @ t.psi
    phi = None if t.phi is None else u @ t.phi
    return ProjTangent(base, u @ t.matrix @ u.conj().T, psi, phi)


def _check_hermitian(a, tol: Tolerance) -> np.ndarray:
    a = as_matrix(a, square=True)
    scale = max(float(np.abs(a).max(initial=0.0)), 1e-300)
    if np.abs(a - a.conj().T).max(initial=0.0) > tol.eq_tol * scale * 10:
        raise ValueError("matrix is not Hermitian within tolerance")
    return a


def reduced_hamiltonian(a, psi, hbar: float = 1.0, tol: Tolerance = DEFAULT_TOL) -> float:
    """h([psi]) = <psi, A psi> / (2 hbar <psi, psi>); degree-0 homogeneous."""
    a = _check_hermitian(a, tol)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm2 = float(np.linalg.norm(psi) ** 2)
    if nrm2 <= tol.rank_tol ** 2:
        raise ValueError("psi must be nonzero")
    return float((psi.conj() @ (a @ psi)).real) / (2.0 * hbar * nrm2)


def _a_psi_perp(a, psi):
    return _strip_parallel(psi, a @ psi)


def hamiltonian_field(a, psi, hbar: float = 1.0, tol: Tolerance = DEFAULT_TOL) -> ProjTangent:
    """Hamiltonian vector field of the reduced Hamiltonian at [psi]:
    the tangent of -(i / hbar ||psi||^2) (A psi)-perp."""
    a = _check_hermitian(a, tol)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm2 = float(np.linalg.norm(psi) ** 2)
    if nrm2 <= tol.rank_tol ** 2:
        raise ValueError("psi must be nonzero")
    phi = -1j / (hbar * nrm2) * _a_psi_perp(a, psi)
    return _tangent_unchecked(psi, phi, tol)


def is_critical_point(a, psi, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Critical points of the reduced Hamiltonian are the eigenvectors of A:
    the criterion is ||(A psi)-perp|| <= eq_tol * ||A psi||."""
    a = _check_hermitian(a, tol)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if np.linalg.norm(psi) <= tol.rank_tol:
        raise ValueError("psi must be nonzero")
    apsi = a @ psi
    return np.linalg.norm(_a_psi_perp(a, psi)) <= tol.eq_tol * np.linalg.norm(apsi)


@dataclass(frozen=True)
class ReducedDynamics:
    """Fiber of the reduced Hamiltonian dynamics over one projective point."""

    field_part: ProjTangent
    free_directions: Subspace


def reduced_dynamics_set(op: OperatorWithDomain, psi, hbar: float = 1.0,
                         tol: Tolerance = DEFAULT_TOL) -> ReducedDynamics:
    """Reduced dynamics fiber at [psi]: the Hamiltonian field plus the free
    directions <psi>-perp intersected with the closure's complement."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if not op.domain.contains_vector(psi, tol):
        raise ValueError("psi lies outside the operator domain")
    nrm = np.linalg.norm(psi)
    if nrm <= tol.rank_tol:
        raise ValueError("psi must be nonzero")
    amb = op.ambient_matrix()
    nrm2 = float(nrm ** 2)
    phi = -1j / (hbar * nrm2) * _a_psi_perp(amb, psi)
    field = _tangent_unchecked(psi, phi, tol)
    psi_perp = orthonormalize([psi], tol, field_kind="complex").perp()
    free = intersect(psi_perp, op.closure.perp(), tol)
    return ReducedDynamics(field, free)
