"""JSON wire formats.

Complex scalars serialize as two-element [re, im] arrays of doubles, matrices
as row-major nested arrays, subspaces as {ambientDim, field, frameColumns},
relations as {n, frameColumns}, operators as {domainFrame, closureFrame,
matrix}. Dumps are deterministic (sorted keys, fixed separators).
"""

from __future__ import annotations

import json

import numpy as np

from .linalg import Subspace, Tolerance
from .relations import LinearRelation, OperatorWithDomain

__all__ = [
    "complex_to_json",
    "json_to_complex",
    "vector_to_json",
    "json_to_vector",
    "matrix_to_json",
    "json_to_matrix",
    "subspace_to_json",
    "json_to_subspace",
    "relation_to_json",
    "json_to_relation",
    "operator_to_json",
    "json_to_operator",
    "tolerance_to_json",
    "json_to_tolerance",
    "dumps",
]


def complex_to_json(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def json_to_complex(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(float(obj), 0.0)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    raise ValueError(f"not a complex scalar: {obj!r}")


def vector_to_json(v, real: bool = False):
    v = np.asarray(v)
    if real:
        return [float(x) for x in np.asarray(v, dtype=float)]
    return [complex_to_json(x) for x in np.asarray(v, dtype=complex)]


def json_to_vector(obj, real: bool = False) -> np.ndarray:
    if not isinstance(obj, (list, tuple)):
        raise ValueError("vector must be a JSON array")
    if real:
        return np.asarray([float(x) for x in obj], dtype=float)
    return np.asarray([json_to_complex(x) for x in obj], dtype=complex)


def matrix_to_json(m, real: bool = False):
    m = np.atleast_2d(np.asarray(m))
    return [vector_to_json(row, real) for row in m]


def json_to_matrix(obj, real: bool = False) -> np.ndarray:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise ValueError("matrix must be a non-empty JSON array of rows")
    rows = [json_to_vector(row, real) for row in obj]
    widths = {r.shape[0] for r in rows}
    if len(widths) != 1:
        raise ValueError("matrix rows have inconsistent lengths")
    return np.vstack(rows)


def subspace_to_json(s: Subspace):
    real = s.field_kind == "real"
    cols = [vector_to_json(s.frame[:, j], real) for j in range(s.dim)]
    return {"ambientDim": s.ambient_dim, "field": s.field_kind, "frameColumns": cols}


def json_to_subspace(obj) -> Subspace:
    for key in ("ambientDim", "field", "frameColumns"):
        if key not in obj:
            raise ValueError(f"subspace JSON missing {key!r}")
    real = obj["field"] == "real"
    cols = [json_to_vector(c, real) for c in obj["frameColumns"]]
    if cols:
        frame = np.column_stack(cols)
    else:
        frame = np.zeros((int(obj["ambientDim"]), 0),
                         dtype=float if real else complex)
    return Subspace(int(obj["ambientDim"]), frame, obj["field"])


def relation_to_json(rel: LinearRelation):
    cols = [vector_to_json(rel.space.frame[:, j]) for j in range(rel.dim)]
    return {"n": rel.n, "frameColumns": cols}


def json_to_relation(obj) -> LinearRelation:
    if "n" not in obj or "frameColumns" not in obj:
        raise ValueError("relation JSON needs 'n' and 'frameColumns'")
    n = int(obj["n"])
    cols = [json_to_vector(c) for c in obj["frameColumns"]]
    if not cols:
        return LinearRelation(n, Subspace(2 * n, np.zeros((2 * n, 0), dtype=complex)))
    return LinearRelation.from_vectors(n, cols)


def operator_to_json(op: OperatorWithDomain):
    return {
        "domainFrame": subspace_to_json(op.domain),
        "closureFrame": subspace_to_json(op.closure),
        "matrix": matrix_to_json(op.matrix) if op.domain.dim else [],
    }


def json_to_operator(obj) -> OperatorWithDomain:
    for key in ("domainFrame", "closureFrame", "matrix"):
        if key not in obj:
            raise ValueError(f"operator JSON missing {key!r}")
    dom = json_to_subspace(obj["domainFrame"])
    clo = json_to_subspace(obj["closureFrame"])
    if obj["matrix"]:
        mat = json_to_matrix(obj["matrix"])
    else:
        mat = np.zeros((clo.dim, dom.dim), dtype=complex)
    return OperatorWithDomain(dom, clo, mat)


def tolerance_to_json(tol: Tolerance):
    return {"rankTol": tol.rank_tol, "eqTol": tol.eq_tol,
            "eigClusterTol": tol.eig_cluster_tol}


def json_to_tolerance(obj, base: Tolerance = Tolerance()) -> Tolerance:
    return Tolerance(
        rank_tol=float(obj.get("rankTol", base.rank_tol)),
        eq_tol=float(obj.get("eqTol", base.eq_tol)),
        eig_cluster_tol=float(obj.get("eigClusterTol", base.eig_cluster_tol)),
    )


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
