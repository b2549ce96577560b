"""Density matrices, spectral projections, unitary-orbit equivalence, the
local orbit-to-unitary embedding, trace-norm witnesses for the closedness
argument, and the linear Poisson bracket on the predual.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    polar_decomposition,
    schatten_norm,
    spectral_decomp_hermitian,
)

__all__ = [
    "check_density_matrix",
    "SpectralResolution",
    "spectral_projections",
    "orbit_equivalent",
    "embed_orbit",
    "coarse_align",
    "WitnessReport",
    "closedness_witness",
    "kks_bracket",
]


def check_density_matrix(rho, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, eigenvalues >= -eq_tol, trace 1."""
    rho = as_matrix(rho, square=True)
    if np.abs(rho - rho.conj().T).max() > tol.eq_tol * max(np.abs(rho).max(), 1e-300):
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho) - 1.0) > tol.eq_tol:
        raise ValueError(f"density matrix must have unit trace, got {np.trace(rho)}")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -tol.eq_tol:
        raise ValueError(f"density matrix has a negative eigenvalue {evals.min():.3e}")
    return rho


@dataclass(frozen=True)
class SpectralResolution:
    """Clustered eigenvalues with their orthogonal spectral projectors.

    Entry 0 is always the zero cluster (projector may be zero when the matrix
    is full rank at this truncation); the remaining entries are ascending.
    """

    eigenvalues: np.ndarray
    projections: List[np.ndarray]

    @property
    def multiplicities(self):
        return [int(round(np.trace(p).real)) for p in self.projections]


def _cluster(values: np.ndarray, cluster_tol: float):
    """Greedy 1-D clustering with gap threshold `cluster_tol` (absolute)."""
    order = np.argsort(values)
    groups = []
    for idx in order:
        if groups and values[idx] - values[groups[-1][-1]] <= cluster_tol:
            groups[-1].append(idx)
        else:
            if groups:
                gap = values[idx] - values[groups[-1][-1]]
                if gap <= 2 * cluster_tol:
                    warnings.warn(
                        f"eigenvalue clustering is ambiguous: gap {gap:.3e} within "
                        f"2x cluster tolerance; splitting at {values[idx]:.6g}"
                    )
            groups.append([idx])
    return groups


def spectral_projections(rho, tol: Tolerance = DEFAULT_TOL) -> SpectralResolution:
    """Spectral resolution of a density matrix with eigenvalues clustered by
    the absolute eig_cluster_tol (spectrum sits in [0, 1])."""
    rho = check_density_matrix(rho, tol)
    n = rho.shape[0]
    evals, vecs = spectral_decomp_hermitian(rho, tol)
    groups = _cluster(evals, tol.eig_cluster_tol)
    values, projections = [], []
    for grp in groups:
        cols = vecs[:, grp]
        values.append(float(np.mean(evals[grp])))
        projections.append(cols @ cols.conj().T)
    values = np.asarray(values)
    zero_pos = int(np.argmin(np.abs(values)))
    if abs(values[zero_pos]) > tol.eig_cluster_tol:
        values = np.concatenate([[0.0], values])
        projections = [np.zeros((n, n), dtype=complex)] + projections
        zero_pos = 0
    order = [zero_pos] + [i for i in np.argsort(values) if i != zero_pos]
    return SpectralResolution(values[order], [projections[i] for i in order])


def orbit_equivalent(rho, rho_prime, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Same clustered eigenvalue multisets (multiplicities included).

    The two spectra are clustered jointly so the comparison is symmetric in
    the inputs.
    """
    r1 = check_density_matrix(rho, tol)
    r2 = check_density_matrix(rho_prime, tol)
    if r1.shape != r2.shape:
        return False
    e1 = np.linalg.eigvalsh(0.5 * (r1 + r1.conj().T))
    e2 = np.linalg.eigvalsh(0.5 * (r2 + r2.conj().T))
    both = np.concatenate([e1, e2])
    labels = np.concatenate([np.zeros(len(e1), dtype=int), np.ones(len(e2), dtype=int)])
    for grp in _cluster(both, tol.eig_cluster_tol):
        counts = np.bincount(labels[grp], minlength=2)
        if counts[0] != counts[1]:
            return False
    return True


def _matched_projections(rho, rho_prime, tol: Tolerance):
    res_p = spectral_projections(rho, tol)
    res_q = spectral_projections(rho_prime, tol)
    if len(res_p.eigenvalues) != len(res_q.eigenvalues):
        raise ValueError("cluster structures differ; states are not orbit equivalent")
    # entry 0 is the zero cluster on both sides; the rest are ascending
    for a, b in zip(res_p.eigenvalues, res_q.eigenvalues):
        if abs(a - b) > 2 * tol.eig_cluster_tol:
            raise ValueError("cluster eigenvalues differ; states are not orbit equivalent")
    return res_p, res_q


def embed_orbit(rho, rho_prime, tol: Tolerance = DEFAULT_TOL,
                prealign: bool = False) -> np.ndarray:
    """Local embedding of the orbit into the unitary group: a unitary U with
    U P_i = Q_i U for every matched spectral projector pair, hence
    U rho U^dag = rho_prime.

    Requires orbit equivalence and the proximity condition
    sum_i ||P_i - Q_i||_inf <= 1/2, which makes X = sum_i Q_i P_i invertible
    (X^dag X >= I/2); U is the unitary polar factor of X. With `prealign` a
    coarse eigenframe alignment is applied first and composed into U.
    """
    rho = check_density_matrix(rho, tol)
    rho_prime = check_density_matrix(rho_prime, tol)
    if not orbit_equivalent(rho, rho_prime, tol):
        raise ValueError("states lie on different unitary orbits")
    u0: Optional[np.ndarray] = None
    work = rho_prime
    if prealign:
        u0 = coarse_align(rho, rho_prime, tol)
        work = u0.conj().T @ rho_prime @ u0
    res_p, res_q = _matched_projections(rho, work, tol)
    gap = sum(schatten_norm(p - q, np.inf)
              for p, q in zip(res_p.projections, res_q.projections))
    if gap > 0.5 + tol.eq_tol:
        raise ValueError(
            f"proximity condition violated: sum ||P_i - Q_i|| = {gap:.4f} > 1/2 "
            "(consider prealign=True)"
        )
    x = sum(q @ p for p, q in zip(res_p.projections, res_q.projections))
    xtx_min = float(np.linalg.eigvalsh(x.conj().T @ x).min())
    if xtx_min < 0.5 - 10 * tol.eq_tol:
        raise ValueError(f"X^dag X lower bound violated: min eig {xtx_min:.4f} < 1/2")
    u, _ = polar_decomposition(x, tol)
    if u0 is not None:
        u = u0 @ u
    return u


def coarse_align(rho, rho_prime, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Greedy eigenframe alignment: a unitary stacking matched cluster frames
    of rho_prime against those of rho (polar-corrected). Used to pull a far
    pair inside the proximity region of the embedding."""
    res_p = spectral_projections(rho, tol)
    res_q = spectral_projections(rho_prime, tol)
    if len(res_p.eigenvalues) != len(res_q.eigenvalues):
        raise ValueError("cluster structures differ")
    n = rho.shape[0]
    blocks = np.zeros((n, n), dtype=complex)
    for p, q in zip(res_p.projections, res_q.projections):
        wp, vp = np.linalg.eigh(p)
        wq, vq = np.linalg.eigh(q)
        fp = vp[:, wp > 0.5]
        fq = vq[:, wq > 0.5]
        if fp.shape[1] != fq.shape[1]:
            raise ValueError("cluster multiplicities differ")
        # greedy overlap matching inside the cluster
        overlap = np.abs(fq.conj().T @ fp)
        used = set()
        for col in range(fp.shape[1]):
            row = int(np.argmax([overlap[r, col] if r not in used else -1.0
                                 for r in range(overlap.shape[0])]))
            used.add(row)
            blocks += fq[:, row][:, None] @ fp[:, col][None, :].conj()
    u, _ = polar_decomposition(blocks, tol)
    return u


@dataclass(frozen=True)
class WitnessReport:
    """Trace-norm inequality witness for one non-closedness construction."""

    case: int
    truncation: int
    index: int
    lhs: float                  # ||rho_n - rho_prime||_1 at the truncation
    rhs: float                  # case bound over the truncated tail sum
    holds: bool
    rho: np.ndarray
    rho_n: np.ndarray
    rho_prime: np.ndarray
    rho_n_on_orbit: bool        # orbit_equivalent(rho_n, rho)
    rho_prime_on_orbit: bool    # orbit_equivalent(rho_prime, rho) — False by design


def closedness_witness(case: int, a, truncation: int, index: int, zeros: int = 1,
                       tol: Tolerance = DEFAULT_TOL) -> WitnessReport:
    """Build the orbit/limit pair of one non-closedness case at a finite
    truncation and check the trace-norm bound.

    case 1: no zero eigenvalue; the limit acquires one (bound 2 x tail).
    case 2: `zeros` zero eigenvalues; the limit loses them (bound 3 x tail).
    case 3: interleaved infinite-multiplicity kernel (bound 4 x tail).

    The sequence `a` must supply `truncation` positive entries; it is
    normalized to unit sum over the used prefix so the matrices are
    density-like. The infinite tails are truncated, with the bound summed over
    the truncated indices only.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    big_n, n = int(truncation), int(index)
    if case not in (1, 2, 3):
        raise ValueError("case must be 1, 2 or 3")
    if a.size < big_n:
        raise ValueError(f"sequence too short: need {big_n} entries, got {a.size}")
    if np.any(a[:big_n] <= 0) or not np.all(np.isfinite(a[:big_n])):
        raise ValueError("sequence entries must be positive finite reals")
    if not 0 < n < big_n // 2:
        raise ValueError("need 0 < index < truncation/2")
    a = a[:big_n] / a[:big_n].sum()

    if case == 1:
        rho = np.diag(a)
        rho_n = np.diag(np.concatenate([[a[n]], a[:n], a[n + 1 :]]))
        rho_prime = np.diag(np.concatenate([[0.0], a[:-1]]))
        rhs = 2.0 * a[n:].sum()
    elif case == 2:
        m = int(zeros)
        if not 1 <= m < big_n - n:
            raise ValueError("zeros count out of range")
        rho = np.diag(np.concatenate([np.zeros(m), a[: big_n - m]]))
        rho_n = np.diag(np.concatenate([a[:n], np.zeros(m), a[n : big_n - m]]))
        rho_prime = np.diag(a)
        rhs = 3.0 * a[n:].sum()
    else:
        if big_n % 2 != 0:
            raise ValueError("case 3 needs an even truncation")
        half = big_n // 2
        if 2 * n > half:
            # the interleave must fit inside the truncated e-block for the
            # spectra of rho_n and rho to coincide exactly
            raise ValueError("case 3 needs index <= truncation/4")
        f_part = np.zeros(half)
        e_part = a[:half].copy()
        rho = np.diag(np.concatenate([f_part, e_part]))
        fn = np.array([a[2 * i + 1] if i <= n - 2 else 0.0 for i in range(half)])
        en = np.zeros(half)
        for i in range(half):
            k = i + 1  # 1-based slot in the interleave
            if k <= n:
                en[i] = a[2 * k - 2]
            elif k < 2 * n:
                en[i] = 0.0
            else:
                en[i] = a[k - 1]
        rho_n = np.diag(np.concatenate([fn, en]))
        fp = np.array([a[2 * i + 1] for i in range(half)])
        ep = np.array([a[2 * i] for i in range(half)])
        rho_prime = np.diag(np.concatenate([fp, ep]))
        rhs = 4.0 * a[n - 1 :].sum()

    lhs = schatten_norm(rho_n - rho_prime, 1.0)
    return WitnessReport(
        case=case,
        truncation=big_n,
        index=n,
        lhs=float(lhs),
        rhs=float(rhs),
        holds=bool(lhs <= rhs + tol.eq_tol),
        rho=rho,
        rho_n=rho_n,
        rho_prime=rho_prime,
        rho_n_on_orbit=_orbit_check(rho_n, rho, tol),
        rho_prime_on_orbit=_orbit_check(rho_prime, rho, tol),
    )


def _orbit_check(x, y, tol: Tolerance) -> bool:
    """orbit_equivalent on matrices that may have trace slightly below one."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    e1 = np.sort(np.linalg.eigvalsh(0.5 * (x + x.conj().T)))
    e2 = np.sort(np.linalg.eigvalsh(0.5 * (y + y.conj().T)))
    both = np.concatenate([e1, e2])
    labels = np.concatenate([np.zeros(len(e1), dtype=int), np.ones(len(e2), dtype=int)])
    for grp in _cluster(both, tol.eig_cluster_tol):
        counts = np.bincount(labels[grp], minlength=2)
        if counts[0] != counts[1]:
            return False
    return True


def kks_bracket(f, g, a) -> complex:
    """Linear Poisson bracket of the linear functionals tr(. F), tr(. G)
    evaluated at A: tr(A [F, G]). Bilinear and antisymmetric in (F, G)."""
    f = as_matrix(f, square=True)
    g = as_matrix(g, square=True)
    a = as_matrix(a, square=True)
    if not (f.shape == g.shape == a.shape):
        raise ValueError("kks_bracket needs three equal-size square matrices")
    return complex(np.trace(a @ (f @ g - g @ f)))
