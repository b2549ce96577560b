"""Unitary evolution generated by extracted operators, the Heisenberg-picture
trajectory on Hilbert-Schmidt space, and finite-difference Euler-Lagrange
verification against the generating Lagrangian.

Propagators come from the spectral decomposition (A is Hermitian by
construction), so unitarity and the group law hold to machine precision. Only
the closure of the domain is evolved; free directions of non-graph relations
carry no canonical flow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .linalg import DEFAULT_TOL, Tolerance, as_matrix, spectral_decomp_hermitian
from .orbits import check_density_matrix
from .relations import OperatorWithDomain
from .tulczyjew import QuadraticLagrangian

__all__ = [
    "Trajectory",
    "propagator",
    "evolve_state",
    "evolve_observable",
    "duality_residual",
    "commutator_generator",
    "hs_inner",
    "euler_lagrange_residual",
]


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: states[k] belongs to times[k]."""

    times: np.ndarray
    states: List[np.ndarray]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(self.states) != t.shape[0]:
            raise ValueError("times and states must have matching lengths")
        if t.shape[0] >= 2 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        shapes = {np.asarray(s).shape for s in self.states}
        if len(shapes) > 1:
            raise ValueError("all sampled states must share one shape")


def _closure_matrix(op: OperatorWithDomain, tol: Tolerance) -> np.ndarray:
    """Square Hermitian matrix of the operator in its closure frame."""
    if op.domain.dim != op.closure.dim:
        raise ValueError("operator domain and closure have different dimensions")
    m = op.closure.frame.conj().T @ op.ambient_matrix() @ op.closure.frame
    scale = max(float(np.abs(m).max(initial=0.0)), 1e-300)
    if np.abs(m - m.conj().T).max(initial=0.0) > 10 * tol.eq_tol * scale:
        raise ValueError("operator is not Hermitian on its closure")
    return 0.5 * (m + m.conj().T)


def propagator(op: OperatorWithDomain, t: float, hbar: float = 1.0,
               tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unitary exp(-i t A / hbar) on the domain closure, in the closure frame."""
    m = _closure_matrix(op, tol)
    w, v = spectral_decomp_hermitian(m, tol)
    return (v * np.exp(-1j * t / hbar * w)) @ v.conj().T


def _ambient_propagators(op: OperatorWithDomain, times, hbar, tol):
    """Ambient unitaries acting as exp(-itA/hbar) on the closure and as the
    identity on its complement."""
    m = _closure_matrix(op, tol)
    w, v = spectral_decomp_hermitian(m, tol)
    f = op.closure.frame
    p = f @ f.conj().T
    rest = np.eye(op.ambient_dim, dtype=complex) - p
    out = []
    for t in np.asarray(times, dtype=float):
        core = (v * np.exp(-1j * t / hbar * w)) @ v.conj().T
        out.append(f @ core @ f.conj().T + rest)
    return out


def evolve_state(op: OperatorWithDomain, psi0, times, hbar: float = 1.0,
                 tol: Tolerance = DEFAULT_TOL) -> Trajectory:
    """Schroedinger trajectory psi(t) = exp(-itA/hbar) psi0 for psi0 in the
    domain closure."""
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if not op.closure.contains_vector(psi0, tol):
        raise ValueError("initial state lies outside the domain closure")
    units = _ambient_propagators(op, times, hbar, tol)
    return Trajectory(np.asarray(times, dtype=float), [u @ psi0 for u in units])


def evolve_observable(op: OperatorWithDomain, observable, times, hbar: float = 1.0,
                      tol: Tolerance = DEFAULT_TOL) -> Trajectory:
    """Heisenberg trajectory T_t = U_t T U_t^dag; the spectrum of T_t is
    constant in t."""
    t_mat = as_matrix(observable, square=True)
    if t_mat.shape[0] != op.ambient_dim:
        raise ValueError("observable size does not match the ambient space")
    units = _ambient_propagators(op, times, hbar, tol)
    return Trajectory(np.asarray(times, dtype=float),
                      [u @ t_mat @ u.conj().T for u in units])


def duality_residual(op: OperatorWithDomain, rho0, observable, times,
                     hbar: float = 1.0, tol: Tolerance = DEFAULT_TOL) -> float:
    """max_t |tr(rho_t T) - tr(rho_0 T~_t)| with rho_t = U_t rho_0 U_t^dag:
    the Schroedinger and Heisenberg pictures compute the same expectations.

    The Heisenberg observable dual to the state evolution is conjugated by
    the inverse propagator, T~_t = U_t^dag T U_t (the forward conjugation
    belongs to the state side; pairing both forward is off by t -> -t).
    """
    rho0 = check_density_matrix(rho0, tol)
    t_mat = as_matrix(observable, square=True)
    units = _ambient_propagators(op, times, hbar, tol)
    worst = 0.0
    for u in units:
        rho_t = u @ rho0 @ u.conj().T
        t_t = u.conj().T @ t_mat @ u
        worst = max(worst, abs(np.trace(rho_t @ t_mat) - np.trace(rho0 @ t_t)))
    return float(worst)


def commutator_generator(a, t) -> np.ndarray:
    """Commutator [A, T] = AT - TA, the Heisenberg-picture generator on
    Hilbert-Schmidt space. With T_t = U_t T U_t^dag the trajectory satisfies
    dT_t/dt = (i/hbar) [T_t, A]."""
    a = as_matrix(a, square=True)
    t = as_matrix(t, square=True)
    if a.shape != t.shape:
        raise ValueError("commutator needs equal-size square matrices")
    return a @ t - t @ a


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(A^dag B), anti-linear in A."""
    a = as_matrix(a, square=True)
    b = as_matrix(b, square=True)
    if a.shape != b.shape:
        raise ValueError("hs_inner needs equal-size square matrices")
    return complex(np.trace(a.conj().T @ b))


def euler_lagrange_residual(lag: QuadraticLagrangian, times, qs,
                            domain_rtol: float = 1e-6) -> float:
    """Central-difference residual of d/dt (dL/dqdot) = dL/dq along q(t).

    `times` must be a uniform grid of at least 5 points and the sampled
    (q, qdot) pairs must lie in the Lagrangian's constraint (checked against
    `domain_rtol`, with the velocity taken by central differences). Returns
    the max-norm residual over interior grid points; for exact solutions it
    decays as O(dt^2).
    """
    t = np.asarray(times, dtype=float)
    q = np.asarray(qs, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if t.ndim != 1 or t.shape[0] < 5:
        raise ValueError("need a time grid of at least 5 points")
    if q.shape != (t.shape[0], lag.n):
        raise ValueError(f"trajectory shape {q.shape} != ({t.shape[0]}, {lag.n})")
    steps = np.diff(t)
    dt = steps[0]
    if dt <= 0 or np.abs(steps - dt).max() > 1e-9 * dt:
        raise ValueError("time grid must be uniform and increasing")
    qdot = (q[2:] - q[:-2]) / (2 * dt)
    qddot = (q[2:] - 2 * q[1:-1] + q[:-2]) / dt ** 2
    qin = q[1:-1]

    big = lag.ambient_b()
    n = lag.n
    b_qq, b_qv = big[:n, :n], big[:n, n:]
    b_vv = big[n:, n:]

    proj = lag.domain.projector().real
    pairs = np.hstack([qin, qdot])
    scale = max(float(np.abs(pairs).max(initial=0.0)), 1e-300)
    off = pairs - pairs @ proj.T
    if np.abs(off).max(initial=0.0) > domain_rtol * scale:
        raise ValueError("trajectory leaves the Lagrangian constraint")

    residual = qin @ b_qq.T + qdot @ b_qv.T - qdot @ b_qv - qddot @ b_vv.T
    return float(np.abs(residual).max(initial=0.0))
