"""Seeded random instances used by the CLI checks and the test suite."""

from __future__ import annotations

import numpy as np

from .linalg import orthonormalize
from .relations import OperatorWithDomain

__all__ = [
    "random_unitary",
    "random_hermitian",
    "random_state",
    "random_density",
    "random_operator_with_domain",
]


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish unitary from the QR factorization with a fixed phase gauge."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (z + z.conj().T)


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


def random_density(rng: np.random.Generator, n: int, rank: int | None = None,
                   min_gap: float = 0.0) -> np.ndarray:
    """Random density matrix with optional fixed rank and eigenvalue gaps."""
    rank = n if rank is None else rank
    evals = np.zeros(n)
    while True:
        lead = np.sort(rng.uniform(0.1, 1.0, size=rank))[::-1]
        lead /= lead.sum()
        if min_gap <= 0.0:
            break
        gaps = np.diff(np.sort(np.concatenate([lead, [0.0] * (1 if rank < n else 0)])))
        if gaps.size == 0 or gaps.min() > min_gap:
            break
    evals[:rank] = lead
    u = random_unitary(rng, n)
    return u @ np.diag(evals).astype(complex) @ u.conj().T


def random_operator_with_domain(rng: np.random.Generator, n: int,
                                domain_dim: int) -> OperatorWithDomain:
    """Random Hermitian operator living on a random domain of the given dim."""
    cols = rng.normal(size=(n, domain_dim)) + 1j * rng.normal(size=(n, domain_dim))
    dom = orthonormalize(cols, field_kind="complex")
    if dom.dim != domain_dim:
        raise ValueError("random frame degenerated; widen the sampler")
    mat = random_hermitian(rng, domain_dim)
    return OperatorWithDomain(dom, dom, mat)
