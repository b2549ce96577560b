"""Dense complex/real linear-algebra primitives shared by every other module.

Rank decisions are always made from singular values relative to the largest
one, never from pivoted elimination; the inner product is anti-linear in the
first argument throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "as_matrix",
    "orthonormalize",
    "null_space",
    "intersect",
    "canonical_frame",
    "spectral_decomp_hermitian",
    "polar_decomposition",
    "schatten_norm",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerances used for rank decisions and comparisons.

    rank_tol is relative to the largest singular value, eq_tol is used for
    entrywise/operator-norm comparisons, eig_cluster_tol groups eigenvalues.
    """

    rank_tol: float = 1e-10
    eq_tol: float = 1e-9
    eig_cluster_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_tol", "eq_tol", "eig_cluster_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(m, square=False) -> np.ndarray:
    """Coerce to a 2-D complex ndarray and validate finiteness."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Subspace:
    """A linear subspace held as an orthonormal column frame.

    `frame` has shape (ambient_dim, dim); dim may be zero (trivial subspace).
    `field` is "real" or "complex" and records which scalars the frame spans
    over; real frames have real entries.
    """

    ambient_dim: int
    frame: np.ndarray = field(repr=False)
    field_kind: str = "complex"

    def __post_init__(self):
        f = np.asarray(self.frame)
        if f.ndim != 2 or f.shape[0] != self.ambient_dim:
            raise ValueError(
                f"frame shape {f.shape} incompatible with ambient dim {self.ambient_dim}"
            )
        if self.field_kind not in ("real", "complex"):
            raise ValueError(f"unknown field {self.field_kind!r}")
        if self.field_kind == "real" and np.iscomplexobj(f) and np.abs(f.imag).max(initial=0.0) > 0:
            raise ValueError("real subspace frame has complex entries")
        if f.shape[1] > 0:
            gram = f.conj().T @ f
            if np.abs(gram - np.eye(f.shape[1])).max() > 1e-8:
                raise ValueError("frame columns are not orthonormal")

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector frame @ frame^dag onto the subspace."""
        if self.dim == 0:
            dtype = float if self.field_kind == "real" else complex
            return np.zeros((self.ambient_dim, self.ambient_dim), dtype=dtype)
        return self.frame @ self.frame.conj().T

    def perp(self) -> "Subspace":
        """Orthogonal complement (same scalar field)."""
        comp = null_space(self.frame.conj().T, Tolerance(), shape=(self.dim, self.ambient_dim))
        if self.field_kind == "real":
            comp = comp.real
        return Subspace(self.ambient_dim, comp, self.field_kind)

    def contains(self, other: "Subspace", tol: Tolerance = DEFAULT_TOL) -> bool:
        """Whether `other` is contained in this subspace (projector test)."""
        p = self.projector()
        q = other.projector()
        return _opnorm(q - p @ q) <= tol.eq_tol

    def contains_vector(self, v, tol: Tolerance = DEFAULT_TOL) -> bool:
        v = np.asarray(v, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            return True
        return np.linalg.norm(v - self.projector() @ v) <= tol.eq_tol * nrm

    def equals(self, other: "Subspace", tol: Tolerance = DEFAULT_TOL) -> bool:
        """Frame-independent equality: projectors agree within eq_tol."""
        if self.ambient_dim != other.ambient_dim:
            return False
        return _opnorm(self.projector() - other.projector()) <= tol.eq_tol


def _opnorm(a) -> float:
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def orthonormalize(vectors, tol: Tolerance = DEFAULT_TOL, ambient_dim=None,
                   field_kind=None, scale=None) -> Subspace:
    """Orthonormal frame spanning the same space as `vectors`.

    `vectors` is a sequence of 1-D arrays or a 2-D array whose *columns* are
    the vectors. Rank is decided by singular values >= rank_tol * sigma_max.
    An empty input (or all-zero vectors) yields the trivial subspace, in which
    case `ambient_dim` must be deducible or given.

    `scale`, when given, floors the reference sigma_max: blocks extracted
    from a unit-scale frame must pass it so that pure roundoff (sigma_max of
    order machine epsilon) does not masquerade as full rank.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        cols = vectors
    else:
        vecs = [np.asarray(v).reshape(-1) for v in vectors]
        if vecs:
            dims = {v.shape[0] for v in vecs}
            if len(dims) != 1:
                raise ValueError(f"dimension mismatch among input vectors: {sorted(dims)}")
            cols = np.column_stack(vecs)
        else:
            if ambient_dim is None:
                raise ValueError("ambient_dim required for an empty vector list")
            cols = np.zeros((ambient_dim, 0))
    if ambient_dim is not None and cols.shape[0] != ambient_dim:
        raise ValueError(f"dimension mismatch: vectors live in R^{cols.shape[0]}, "
                         f"expected {ambient_dim}")
    if field_kind is None:
        field_kind = "complex" if np.iscomplexobj(cols) else "real"
    cols = np.asarray(cols, dtype=float if field_kind == "real" else complex)
    if not np.all(np.isfinite(cols)):
        raise ValueError("input vectors must be finite")
    if cols.shape[1] == 0:
        return Subspace(cols.shape[0], cols, field_kind)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    smax = s[0] if s.size else 0.0
    base = smax if scale is None else max(smax, float(scale))
    rank = 0 if base == 0 else int(np.sum(s >= tol.rank_tol * base))
    return Subspace(cols.shape[0], u[:, :rank], field_kind)


def null_space(a, tol: Tolerance = DEFAULT_TOL, shape=None, scale=None) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of `a`, via SVD.

    `scale` floors the reference sigma_max as in `orthonormalize`."""
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        n = a.shape[1] if shape is None else shape[1]
        return np.eye(n, dtype=a.dtype if a.dtype.kind in "fc" else float)
    _, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    base = smax if scale is None else max(smax, float(scale))
    rank = int(np.sum(s >= tol.rank_tol * base)) if base > 0 else 0
    return vh[rank:].conj().T


def intersect(a: Subspace, b: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces: kernel of the stacked complement frames."""
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimensions differ")
    rows = np.vstack([a.perp().frame.conj().T, b.perp().frame.conj().T])
    basis = null_space(rows, tol, shape=(rows.shape[0], a.ambient_dim))
    fk = "real" if a.field_kind == b.field_kind == "real" else "complex"
    if fk == "real":
        basis = basis.real
    return Subspace(a.ambient_dim, basis, fk)


def canonical_frame(s: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Deterministic orthonormal frame for a subspace.

    Gram-Schmidt on the projections of the canonical basis vectors, taken in
    order of descending overlap with the subspace (ties broken by lowest
    index), so serialized frames are reproducible across runs.
    """
    if s.dim == 0:
        return s
    p = s.projector()
    overlaps = np.linalg.norm(p, axis=0)  # ||P e_i||
    order = np.argsort(-overlaps, kind="stable")  # ties keep lowest index first
    cols = []
    for i in order:
        v = p[:, i].copy()
        for c in cols:
            v -= c * (c.conj() @ v)
        nrm = np.linalg.norm(v)
        if nrm > tol.rank_tol:
            cols.append(v / nrm)
        if len(cols) == s.dim:
            break
    frame = np.column_stack(cols)
    if s.field_kind == "real":
        frame = frame.real
    return Subspace(s.ambient_dim, frame, s.field_kind)


def spectral_decomp_hermitian(m, tol: Tolerance = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, V) with m = V diag(w) V^dag and V unitary.
    Raises on non-Hermitian input (relative eq_tol check).
    """
    m = as_matrix(m, square=True)
    scale = _opnorm(m)
    if _opnorm(m - m.conj().T) > tol.eq_tol * max(scale, 1e-300):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w, v


def polar_decomposition(m, tol: Tolerance = DEFAULT_TOL):
    """Polar factors (U, P) with m = U P, U unitary, P = sqrt(m^dag m) psd.

    The unitary factor is unique only for invertible input; singular input
    (smallest singular value < rank_tol * sigma_max) raises.
    """
    m = as_matrix(m, square=True)
    u, s, vh = np.linalg.svd(m)
    if s[0] == 0 or s[-1] < tol.rank_tol * s[0]:
        raise ValueError("singular matrix: unitary polar factor is not unique")
    unitary = u @ vh
    psd = vh.conj().T @ np.diag(s) @ vh
    return unitary, psd


def schatten_norm(m, p) -> float:
    """Schatten p-norm (sum of p-th powers of singular values)^(1/p).

    p = inf returns the largest singular value (operator norm). Requires
    p >= 1. Computed from differences of the scaled singular values for
    overflow-safe large p.
    """
    m = as_matrix(m)
    if not (p == np.inf or p >= 1):
        raise ValueError(f"Schatten norm requires p >= 1 or p = inf, got {p}")
    s = np.linalg.svd(m, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return 0.0
    if p == np.inf:
        return smax
    return smax * float(np.sum((s / smax) ** p)) ** (1.0 / p)
