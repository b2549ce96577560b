"""Scenario runner binding all modules.

`gqd run scenario.json` dispatches on the scenario kind and emits a
machine-readable JSON report in which every residual sits next to the
tolerance it was judged against. Direct subcommands are thin wrappers that
assemble the same scenario objects. Exit codes: 0 all checks pass, 1 some
assertion failed, 2 schema violation, 3 I/O error. Reports are deterministic
for a fixed (scenario, seed) pair.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import serialize as ser
from .evolution import duality_residual, euler_lagrange_residual, evolve_state
from .extensions import cayley_vector, deficiency_routes, extend, partial_isometry_of
from .linalg import DEFAULT_TOL, Tolerance, schatten_norm
from .orbits import closedness_witness, embed_orbit, spectral_projections
from .projective import (
    complex_j,
    g_p,
    is_critical_point,
    omega_p,
    reduced_hamiltonian,
    tangent_rep,
    unitary_action_tangent,
)
from .relations import (
    FormKind,
    decompose_self_adjoint,
    form_value,
    full_domain_operator,
    is_graph,
    is_lagrangian,
)
from .sampling import (
    random_density,
    random_hermitian,
    random_operator_with_domain,
    random_state,
    random_unitary,
)
from .tulczyjew import (
    QuadraticLagrangian,
    generate_dynamics,
    lagrangian_of,
    oscillator_lagrangian,
)

__all__ = ["main", "run_scenario", "report_diff"]

SCENARIO_KINDS = (
    "genDynamics",
    "extend",
    "orbitEmbed",
    "orbitWitness",
    "kahlerCheck",
    "evolve",
    "dualityCheck",
    "schattenCheck",
    "formTransferCheck",
    "deficiencyCheck",
    "criticalPointCheck",
)


class SchemaError(ValueError):
    """Scenario file violates the expected schema."""


def _entry(value: float, tolerance: float):
    value = float(value)
    return {"value": value, "tolerance": float(tolerance), "ok": bool(value <= tolerance)}


def _finish(report: dict) -> bool:
    """Aggregate pass/fail over residual entries and boolean flags."""
    ok = all(e["ok"] for e in report.get("residuals", {}).values())
    ok = ok and all(report.get("flags", {}).values())
    report["passed"] = bool(ok)
    return report["passed"]


def _need(params: dict, key: str):
    if key not in params:
        raise SchemaError(f"missing scenario parameter {key!r}")
    return params[key]


# ---------------------------------------------------------------------------
# scenario handlers
# ---------------------------------------------------------------------------

def _lagrangian_from_params(params: dict, hbar: float):
    if "domainFrame" in params or "B" in params:
        dom = ser.json_to_subspace(_need(params, "domainFrame"))
        b = ser.json_to_matrix(_need(params, "B"), real=True)
        return QuadraticLagrangian(int(_need(params, "n")), dom, b, hbar)
    lams = _need(params, "lambda")
    q_zero, qdot_zero = [], []
    for c in params.get("constraints", []):
        kind = c.get("type")
        if kind == "qZero":
            q_zero.append(int(c["index"]))
        elif kind == "qdotZero":
            qdot_zero.append(int(c["index"]))
        else:
            raise SchemaError(f"unknown constraint type {kind!r}")
    return oscillator_lagrangian(lams, q_zero=q_zero, qdot_zero=qdot_zero, hbar=hbar)


def _round_trip_battery(params, tol, seed, hbar):
    """Worst-case recovery errors of generate_dynamics on the oscillator
    examples and on random Hermitian operators with random domains."""
    from .linalg import Subspace
    from .relations import (
        OperatorWithDomain,
        conjugate_relation,
        domain_of,
        kernel_of_inverse,
    )

    cfg = params["roundTrip"]
    sizes = [int(s) for s in cfg.get("sizes", [3, 8, 32])]
    randoms = int(cfg.get("randomInstances", 50))
    max_dim = int(cfg.get("maxDim", 12))
    rng = np.random.default_rng(seed)
    worst_op, worst_proj = 0.0, 0.0
    example3_ok = True

    def run_case(op):
        nonlocal worst_op, worst_proj
        lag, w = lagrangian_of(op, hbar, tol)
        rep = generate_dynamics(lag, tol)
        out = rep.schroedinger
        a_in = op.ambient_matrix()
        a_out = w @ out.ambient_matrix() @ w.conj().T
        scale = max(np.abs(a_in).max(initial=0.0), 1e-300)
        worst_op = max(worst_op, float(np.abs(a_out - a_in).max(initial=0.0)) / scale)
        dom_out = w @ out.domain.frame
        p_out = dom_out @ dom_out.conj().T
        worst_proj = max(worst_proj, float(np.linalg.norm(p_out - op.domain.projector(), 2)))
        ker = kernel_of_inverse(conjugate_relation(rep.relation, w, tol), tol)
        worst_proj = max(worst_proj,
                         float(np.linalg.norm(ker.projector() - op.domain.perp().projector(), 2)))
        return rep

    for n in sizes:
        eye = np.eye(n, dtype=complex)
        full = Subspace(n, eye, "complex")
        lams = np.arange(1.0, n + 1.0)
        run_case(OperatorWithDomain(full, full, np.diag(lams).astype(complex)))
        lams2 = lams.copy()
        lams2[0] = 0.0  # kernel direction via a frozen velocity
        run_case(OperatorWithDomain(full, full, np.diag(lams2).astype(complex)))
        sub = Subspace(n, eye[:, 1:], "complex")  # frozen configuration q^1 = 0
        rep3 = run_case(OperatorWithDomain(sub, sub, np.diag(lams[1:]).astype(complex)))
        ker3 = kernel_of_inverse(rep3.relation, tol)
        dom3 = domain_of(rep3.relation, tol)
        example3_ok &= not is_graph(rep3.relation, tol)
        example3_ok &= ker3.equals(dom3.perp(), tol)
    for _ in range(randoms):
        n = int(rng.integers(2, max_dim + 1))
        d = int(rng.integers(1, n + 1))
        u = random_unitary(rng, n)
        mu = rng.uniform(0.2, 3.0, size=d) * rng.choice([-1.0, 1.0], size=d)
        dom = Subspace(n, u[:, :d], "complex")
        mix = random_unitary(rng, d)
        run_case(OperatorWithDomain(dom, dom, mix @ np.diag(mu).astype(complex) @ mix.conj().T))
    report = {
        "kind": "genDynamics",
        "mode": "roundTrip",
        "sizes": sizes,
        "randomInstances": randoms,
        "residuals": {
            "operatorRecovery": _entry(worst_op, 1e-9),
            "subspaceRecovery": _entry(worst_proj, 1e-9),
        },
        "flags": {"frozenConfigurationCaseNonGraph": bool(example3_ok)},
    }
    _finish(report)
    return report


def handle_gen_dynamics(params, tol, seed, hbar):
    hbar = float(params.get("hbar", hbar))
    if "roundTrip" in params:
        return _round_trip_battery(params, tol, seed, hbar)
    lag = _lagrangian_from_params(params, hbar)
    rep = generate_dynamics(lag, tol)
    report = {
        "kind": "genDynamics",
        "hbar": hbar,
        "complexLinear": bool(rep.complex_linear),
        "lagrangianZeroPlus": rep.lagrangian_zero_plus,
        "lagrangianSubspace": ser.subspace_to_json(rep.lagrangian_subspace),
        "relation": ser.relation_to_json(rep.relation),
        "constraintClosure": ser.subspace_to_json(rep.constraint_closure),
        "relationIsGraph": bool(is_graph(rep.relation, tol)),
        "residuals": {},
        "flags": {},
    }
    report["flags"]["generatedDimension"] = rep.lagrangian_subspace.dim == 2 * lag.n
    if rep.schroedinger is not None:
        op = rep.schroedinger
        amb = op.ambient_matrix()
        herm = np.abs(amb - amb.conj().T).max(initial=0.0)
        scale = max(np.abs(amb).max(initial=0.0), 1e-300)
        report["schroedinger"] = ser.operator_to_json(op)
        report["schroedingerEigenvalues"] = sorted(
            float(x) for x in np.linalg.eigvalsh(op.matrix)
        ) if op.domain.dim else []
        report["residuals"]["extractedHermiticity"] = _entry(herm / scale, 10 * tol.eq_tol)
    else:
        report["schroedinger"] = None
        # a non complex-linear outcome is legal and merely flagged; a
        # complex-linear one without an extracted operator is a failure
        if rep.complex_linear:
            report["flags"]["lagrangianZeroPlus"] = bool(rep.lagrangian_zero_plus)
    _finish(report)
    return report


def handle_extend(params, tol, seed, hbar):
    rel = ser.json_to_relation(_need(params, "relation"))
    grid = int(params.get("thetaGrid", 8))
    if grid < 1:
        raise SchemaError("thetaGrid must be >= 1")
    data = partial_isometry_of(rel, tol)
    kp, km = data.indices
    if kp != km:
        raise SchemaError("relation has unequal deficiency indices; no extensions")
    report = {
        "kind": "extend",
        "indices": [kp, km],
        "extensions": [],
        "residuals": {},
        "flags": {"allLagrangian": True, "allContainInput": True},
    }
    worst_eig = 0.0
    projectors = []
    for k in range(grid):
        theta = 2.0 * np.pi * k / grid
        u0 = np.exp(1j * theta) * np.eye(kp, dtype=complex)
        ext = extend(rel, u0, tol)
        lag_ok = is_lagrangian(ext, FormKind.ZERO_MINUS, tol)
        contains = ext.space.contains(rel.space, tol)
        report["flags"]["allLagrangian"] &= bool(lag_ok)
        report["flags"]["allContainInput"] &= bool(contains)
        op = decompose_self_adjoint(ext, FormKind.ZERO_MINUS, tol)
        evals = np.linalg.eigvalsh(op.matrix) if op.domain.dim else np.zeros(0)
        report["extensions"].append({
            "theta": float(theta),
            "eigenvalues": [float(x) for x in np.sort(evals)],
            "isGraph": bool(is_graph(ext, tol)),
        })
        if kp == 1 and theta > 0:
            expected = -1.0 / np.tan(theta / 2.0)
            worst_eig = max(worst_eig, float(np.min(np.abs(evals - expected))))
        if grid <= 128 and rel.n <= 8:
            projectors.append(ext.space.projector())
    if kp == 1 and grid > 1:
        report["residuals"]["thetaFamilyEigenvalue"] = _entry(worst_eig, 1e-9)
    if len(projectors) == grid and grid > 1:
        closest = min(
            float(np.linalg.norm(projectors[i] - projectors[j], 2))
            for i in range(grid) for j in range(i + 1, grid)
        )
        report["closestPairDistance"] = closest
        report["flags"]["pairwiseDistinct"] = closest > 1e-6
    _finish(report)
    return report


def _random_density_with_gaps(rng, n, tol):
    """Density matrix whose distinct eigenvalues sit on a coarse grid, so the
    cluster matching of the embedding is unambiguous."""
    k = int(rng.integers(2, min(n, 5) + 1))
    grid = np.arange(1, 20, dtype=float) / 20.0
    values = np.sort(rng.choice(grid, size=k - 1, replace=False))
    values = np.concatenate([[0.0], values]) if rng.uniform() < 0.5 else \
        np.sort(rng.choice(grid, size=k, replace=False))
    mults = np.ones(len(values), dtype=int)
    for _ in range(n - len(values)):
        mults[int(rng.integers(0, len(values)))] += 1
    evals = np.repeat(values, mults)
    total = evals.sum()
    if total <= 0:
        evals[-1] = 1.0
        total = 1.0
    evals = evals / total
    u = random_unitary(rng, n)
    return u @ np.diag(evals).astype(complex) @ u.conj().T


def _rotated(rng, rho, eps):
    h = random_hermitian(rng, rho.shape[0])
    h /= max(np.abs(h).max(), 1e-300)
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * eps * w)) @ v.conj().T
    return u @ rho @ u.conj().T


def _embed_trial_battery(params, tol, seed, hbar):
    cfg = params["randomTrials"]
    count = int(cfg.get("count", 100))
    max_dim = int(cfg.get("maxDim", 32))
    rng = np.random.default_rng(seed)
    worst_conj, worst_inter, worst_bound = 0.0, 0.0, 0.0
    for _ in range(count):
        n = int(rng.integers(2, max_dim + 1))
        rho = _random_density_with_gaps(rng, n, tol)
        eps = 0.2
        for _ in range(60):
            rho_prime = _rotated(rng, rho, eps)
            res_p = spectral_projections(rho, tol)
            res_q = spectral_projections(rho_prime, tol)
            if len(res_p.eigenvalues) == len(res_q.eigenvalues):
                gap = sum(schatten_norm(p - q, np.inf)
                          for p, q in zip(res_p.projections, res_q.projections))
                if gap <= 0.45:
                    break
            eps *= 0.5
        else:
            raise ValueError("could not place the perturbed state inside the domain of the embedding")
        u = embed_orbit(rho, rho_prime, tol)
        worst_conj = max(worst_conj,
                         schatten_norm(u @ rho @ u.conj().T - rho_prime, 1.0))
        worst_inter = max(worst_inter, max(
            float(np.abs(u @ p - q @ u).max(initial=0.0))
            for p, q in zip(res_p.projections, res_q.projections)))
        x = sum(q @ p for p, q in zip(res_p.projections, res_q.projections))
        xtx_min = float(np.linalg.eigvalsh(x.conj().T @ x).min())
        worst_bound = max(worst_bound, max(0.0, 0.5 - xtx_min))
    report = {
        "kind": "orbitEmbed",
        "mode": "randomTrials",
        "trials": count,
        "residuals": {
            "conjugationTraceNorm": _entry(worst_conj, 1e-8),
            "intertwining": _entry(worst_inter, 1e-8),
            "xtxLowerBound": _entry(worst_bound, 1e-9),
        },
        "flags": {},
    }
    _finish(report)
    return report


def handle_orbit_embed(params, tol, seed, hbar):
    if "randomTrials" in params:
        return _embed_trial_battery(params, tol, seed, hbar)
    rho = ser.json_to_matrix(_need(params, "rho"))
    rho_prime = ser.json_to_matrix(_need(params, "rhoPrime"))
    u = embed_orbit(rho, rho_prime, tol, prealign=bool(params.get("prealign", False)))
    res_p = spectral_projections(rho, tol)
    res_q = spectral_projections(rho_prime, tol)
    inter = max(
        float(np.abs(u @ p - q @ u).max(initial=0.0))
        for p, q in zip(res_p.projections, res_q.projections)
    )
    conj = schatten_norm(u @ rho @ u.conj().T - rho_prime, 1.0)
    x = sum(q @ p for p, q in zip(res_p.projections, res_q.projections))
    xtx_min = float(np.linalg.eigvalsh(x.conj().T @ x).min())
    report = {
        "kind": "orbitEmbed",
        "U": ser.matrix_to_json(u),
        "xtxMinEigenvalue": xtx_min,
        "residuals": {
            "conjugationTraceNorm": _entry(conj, 1e-8),
            "intertwining": _entry(inter, 1e-8),
            "xtxLowerBound": _entry(max(0.0, 0.5 - xtx_min), 1e-9),
        },
        "flags": {},
    }
    _finish(report)
    return report


def _sequence_from_config(cfg: dict, length: int) -> np.ndarray:
    kind = cfg.get("type")
    ks = np.arange(1, length + 1, dtype=float)
    if kind == "geometric":
        return float(cfg.get("ratio", 0.5)) ** ks
    if kind == "power":
        return ks ** (-float(cfg.get("exponent", 2.0)))
    if kind == "explicit":
        return np.asarray(cfg["values"], dtype=float)
    raise SchemaError(f"unknown sequence type {kind!r}")


def _witness_battery(params, tol, seed, hbar):
    cfg = params["battery"]
    count = int(cfg.get("sequences", 20))
    big_n = int(cfg.get("N", 64))
    rng = np.random.default_rng(seed)
    worst = 0.0
    defects_ok = True
    runs = 0
    for s in range(count):
        if s % 2 == 0:
            seq = float(rng.uniform(0.82, 0.95)) ** np.arange(1, big_n + 1)
        else:
            seq = np.arange(1, big_n + 1, dtype=float) ** (-float(rng.uniform(1.5, 3.0)))
        for case in (1, 2, 3):
            hi = big_n // 4 if case == 3 else big_n // 2 - 1
            idx = int(rng.integers(1, hi + 1))
            zeros = int(rng.integers(1, 4)) if case == 2 else 1
            w = closedness_witness(case, seq, big_n, idx, zeros=zeros, tol=tol)
            worst = max(worst, max(0.0, w.lhs - w.rhs))
            defects_ok &= w.rho_n_on_orbit and not w.rho_prime_on_orbit
            runs += 1
    report = {
        "kind": "orbitWitness",
        "mode": "battery",
        "runs": runs,
        "residuals": {"traceNormBound": _entry(worst, tol.eq_tol)},
        "flags": {"spectrumDefects": bool(defects_ok)},
    }
    _finish(report)
    return report


def handle_orbit_witness(params, tol, seed, hbar):
    if "battery" in params:
        return _witness_battery(params, tol, seed, hbar)
    case = int(_need(params, "case"))
    big_n = int(_need(params, "N"))
    idx = int(_need(params, "n"))
    zeros = int(params.get("zeros", 1))
    seq = _sequence_from_config(_need(params, "sequence"), big_n)
    w = closedness_witness(case, seq, big_n, idx, zeros=zeros, tol=tol)
    report = {
        "kind": "orbitWitness",
        "case": case,
        "N": big_n,
        "n": idx,
        "lhs": w.lhs,
        "rhs": w.rhs,
        "spectrumDefect": {
            "rhoNOnOrbit": w.rho_n_on_orbit,
            "rhoPrimeOnOrbit": w.rho_prime_on_orbit,
        },
        "residuals": {
            "traceNormBound": _entry(max(0.0, w.lhs - w.rhs), tol.eq_tol),
        },
        "flags": {
            "rhoNOnOrbit": w.rho_n_on_orbit,
            "rhoPrimeOffOrbit": not w.rho_prime_on_orbit,
        },
    }
    _finish(report)
    return report


def handle_kahler_check(params, tol, seed, hbar):
    dims = [int(d) for d in params.get("dims", [int(params.get("dim", 8))])]
    samples = int(params.get("samples", 200))
    rng = np.random.default_rng(seed)
    dev = {k: 0.0 for k in (
        "gEqualsOmegaJ", "jSquared", "unitaryInvarianceG",
        "unitaryInvarianceOmega", "riemannianDualFormula",
        "symplecticDualFormula", "hermitianPositivity",
    )}
    for trial in range(samples):
        dim = dims[trial % len(dims)]
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        nrm2 = float(np.linalg.norm(psi) ** 2)

        def perp():
            v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            return v - (psi.conj() @ v) / nrm2 * psi

        phi, phip = perp(), perp()
        t, u = tangent_rep(psi, phi, tol), tangent_rep(psi, phip, tol)
        g = g_p(t, u, tol)
        w = omega_p(t, u, tol)
        dev["gEqualsOmegaJ"] = max(dev["gEqualsOmegaJ"], abs(g - omega_p(complex_j(t), u, tol)))
        jj = complex_j(complex_j(t))
        dev["jSquared"] = max(dev["jSquared"], float(np.abs(jj.matrix + t.matrix).max()))
        un = random_unitary(rng, dim)
        tu, uu = unitary_action_tangent(un, t, tol), unitary_action_tangent(un, u, tol)
        dev["unitaryInvarianceG"] = max(dev["unitaryInvarianceG"], abs(g_p(tu, uu, tol) - g))
        dev["unitaryInvarianceOmega"] = max(dev["unitaryInvarianceOmega"],
                                            abs(omega_p(tu, uu, tol) - w))
        ip = complex(phi.conj() @ phip)
        dev["riemannianDualFormula"] = max(dev["riemannianDualFormula"],
                                           abs(g - 2.0 * ip.real * nrm2))
        dev["symplecticDualFormula"] = max(dev["symplecticDualFormula"],
                                           abs(w + 2.0 * ip.imag * nrm2))
        self_h = g_p(t, t, tol)
        dev["hermitianPositivity"] = max(dev["hermitianPositivity"], max(0.0, -self_h))
    report = {
        "kind": "kahlerCheck",
        "dims": dims,
        "samples": samples,
        "residuals": {k: _entry(v, 1e-9) for k, v in dev.items()},
        "flags": {},
    }
    _finish(report)
    return report


def _times_from_params(obj):
    if isinstance(obj, dict):
        return np.linspace(float(obj["start"]), float(obj["stop"]), int(obj["num"]))
    return np.asarray([float(x) for x in obj])


def handle_evolve(params, tol, seed, hbar):
    hbar = float(params.get("hbar", hbar))
    lag = None
    if "operator" in params:
        op = ser.json_to_operator(params["operator"])
    elif "lagrangian" in params:
        lag = _lagrangian_from_params(dict(params["lagrangian"]), hbar)
        rep = generate_dynamics(lag, tol)
        if rep.schroedinger is None:
            raise SchemaError("lagrangian does not generate an explicit dynamics")
        op = rep.schroedinger
    else:
        raise SchemaError("evolve needs an 'operator' or a 'lagrangian'")
    psi0 = ser.json_to_vector(_need(params, "psi0"))
    times = _times_from_params(_need(params, "times"))
    traj = evolve_state(op, psi0, times, hbar, tol)
    norms = np.array([np.linalg.norm(s) for s in traj.states])
    amb = op.ambient_matrix()
    energies = np.array([reduced_hamiltonian(amb, s, hbar, tol) for s in traj.states])
    e_scale = max(abs(energies[0]), 1e-300)
    report = {
        "kind": "evolve",
        "hbar": hbar,
        "times": [float(t) for t in traj.times],
        "residuals": {
            "normDrift": _entry(float(np.abs(norms - norms[0]).max()) / norms[0], 1e-10),
            "energyDrift": _entry(float(np.abs(energies - energies[0]).max()) / e_scale, 1e-9),
        },
        "flags": {},
    }
    include = params.get("includeStates", len(traj.times) <= 256)
    if include:
        report["states"] = [ser.vector_to_json(s) for s in traj.states]
    if "observable" in params and "rho0" in params:
        t_mat = ser.json_to_matrix(params["observable"])
        rho0 = ser.json_to_matrix(params["rho0"])
        report["residuals"]["dualityResidual"] = _entry(
            duality_residual(op, rho0, t_mat, times, hbar, tol), 1e-9
        )
    if lag is not None:
        qs = np.array([s.real for s in traj.states])
        el = euler_lagrange_residual(lag, traj.times, qs)
        report["residuals"]["eulerLagrange"] = _entry(el, float(params.get("elTolerance", 1e-5)))
        dt = traj.times[1] - traj.times[0]
        fine = np.arange(traj.times[0], traj.times[-1] + dt / 4, dt / 2)
        fine_traj = evolve_state(op, psi0, fine, hbar, tol)
        el_half = euler_lagrange_residual(lag, fine, np.array([s.real for s in fine_traj.states]))
        report["elResidualHalfStep"] = float(el_half)
        report["flags"]["elHalvingImproves"] = bool(el >= 3.5 * el_half)
    _finish(report)
    return report


def handle_duality_check(params, tol, seed, hbar):
    hbar = float(params.get("hbar", hbar))
    rng = np.random.default_rng(seed)
    if "operator" in params:
        op = ser.json_to_operator(params["operator"])
        rho0 = ser.json_to_matrix(_need(params, "rho0"))
        t_mat = ser.json_to_matrix(_need(params, "observable"))
    else:
        dim = int(params.get("dim", 4))
        op = full_domain_operator(random_hermitian(rng, dim))
        rho0 = random_density(rng, dim)
        t_mat = random_hermitian(rng, dim)
    times = _times_from_params(params.get("times", {"start": 0.0, "stop": 10.0, "num": 41}))
    res = duality_residual(op, rho0, t_mat, times, hbar, tol)
    report = {
        "kind": "dualityCheck",
        "hbar": hbar,
        "residuals": {"dualityResidual": _entry(res, 1e-9)},
        "flags": {},
    }
    _finish(report)
    return report


def handle_schatten_check(params, tol, seed, hbar):
    mode = params.get("mode", "convexHull")
    rng = np.random.default_rng(seed)
    report = {"kind": "schattenCheck", "mode": mode, "residuals": {}, "flags": {}}
    if mode == "convexHull":
        for case in params.get("cases", [{"n": 4, "p": 2}]):
            n, p = int(case["n"]), float(case["p"])
            rho = np.eye(n, dtype=complex) / n
            expected = n ** ((1.0 - p) / p)
            rel = abs(schatten_norm(rho, p) - expected) / expected
            report["residuals"][f"convexHull_n{n}_p{p:g}"] = _entry(rel, 1e-12)
    elif mode == "monotonicity":
        trials = int(params.get("trials", 100))
        max_dim = int(params.get("maxDim", 12))
        worst = 0.0
        for _ in range(trials):
            n = int(rng.integers(1, max_dim + 1))
            m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            ps = sorted(rng.uniform(1.0, 12.0, size=2))
            ps.append(np.inf)
            norms = [schatten_norm(m, p) for p in ps]
            for small, large in ((0, 1), (1, 2), (0, 2)):
                worst = max(worst, norms[large] - norms[small])
        report["residuals"]["monotonicityViolation"] = _entry(worst, 1e-12)
    else:
        raise SchemaError(f"unknown schattenCheck mode {mode!r}")
    _finish(report)
    return report


def handle_form_transfer_check(params, tol, seed, hbar):
    """Cayley form-transfer deltas.

    The `asSpecified` entries check the transfer pairing exactly as the
    acceptance criterion states it; the `corrected` entries check the
    identities that the Cayley map actually satisfies (see README). The
    specified pairing is sign/inertia-inconsistent, so this check is expected
    to fail; both sets are reported side by side.
    """
    max_dim = int(params.get("maxDim", 32))
    pairs = int(params.get("pairs", 1000))
    rng = np.random.default_rng(seed)
    dev = {k: 0.0 for k in (
        "zeroPlusVsPlus_asSpecified", "minusVsZeroMinus_asSpecified",
        "zeroPlusVsMinus_corrected", "minusVsNegZeroMinus_corrected",
        "plusUnitarity_corrected",
    )}
    for _ in range(pairs):
        n = int(rng.integers(1, max_dim + 1))
        v = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
        w = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
        cv, cw = cayley_vector(v), cayley_vector(w)
        f0p = form_value(FormKind.ZERO_PLUS, cv, cw)
        fm = form_value(FormKind.MINUS, cv, cw)
        fp = form_value(FormKind.PLUS, cv, cw)
        dev["zeroPlusVsPlus_asSpecified"] = max(
            dev["zeroPlusVsPlus_asSpecified"], abs(f0p - form_value(FormKind.PLUS, v, w)))
        dev["minusVsZeroMinus_asSpecified"] = max(
            dev["minusVsZeroMinus_asSpecified"], abs(fm - form_value(FormKind.ZERO_MINUS, v, w)))
        dev["zeroPlusVsMinus_corrected"] = max(
            dev["zeroPlusVsMinus_corrected"], abs(f0p - form_value(FormKind.MINUS, v, w)))
        dev["minusVsNegZeroMinus_corrected"] = max(
            dev["minusVsNegZeroMinus_corrected"],
            abs(fm + form_value(FormKind.ZERO_MINUS, v, w)))
        dev["plusUnitarity_corrected"] = max(
            dev["plusUnitarity_corrected"], abs(fp - form_value(FormKind.PLUS, v, w)))
    report = {
        "kind": "formTransferCheck",
        "pairs": pairs,
        "maxDim": max_dim,
        "residuals": {k: _entry(v, 1e-10) for k, v in dev.items()},
        "flags": {},
    }
    _finish(report)
    return report


def handle_deficiency_check(params, tol, seed, hbar):
    trials = int(params.get("trials", 100))
    max_dim = int(params.get("maxDim", 16))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, max_dim + 1))
        d = int(rng.integers(1, n))  # proper domain
        op = random_operator_with_domain(rng, n, d)
        (rp, rm), (kp, km) = deficiency_routes(op, tol)
        worst = max(
            worst,
            float(np.linalg.norm(rp.projector() - kp.projector(), 2)),
            float(np.linalg.norm(rm.projector() - km.projector(), 2)),
        )
    report = {
        "kind": "deficiencyCheck",
        "trials": trials,
        "residuals": {"routeDisagreement": _entry(worst, 1e-9)},
        "flags": {},
    }
    _finish(report)
    return report


def handle_critical_point_check(params, tol, seed, hbar):
    hbar = float(params.get("hbar", hbar))
    dim = int(params.get("dim", 8))
    n_random = int(params.get("randomStates", 1000))
    rng = np.random.default_rng(seed)
    a = np.diag(np.arange(1.0, dim + 1.0)).astype(complex)
    worst_h = 0.0
    all_crit = True
    for k in range(dim):
        e = np.eye(dim, dtype=complex)[:, k]
        all_crit &= is_critical_point(a, e, tol)
        h = reduced_hamiltonian(a, e, hbar, tol)
        expected = (k + 1.0) / (2.0 * hbar)
        worst_h = max(worst_h, abs(h - expected) / expected)
    false_hits = 0
    for _ in range(n_random):
        psi = random_state(rng, dim)
        if is_critical_point(a, psi, tol):
            false_hits += 1
    report = {
        "kind": "criticalPointCheck",
        "dim": dim,
        "randomStates": n_random,
        "falseCriticalCount": false_hits,
        "residuals": {"criticalValueError": _entry(worst_h, 1e-12)},
        "flags": {"eigenvectorsCritical": bool(all_crit),
                  "randomStatesNonCritical": false_hits == 0},
    }
    _finish(report)
    return report


HANDLERS = {
    "genDynamics": handle_gen_dynamics,
    "extend": handle_extend,
    "orbitEmbed": handle_orbit_embed,
    "orbitWitness": handle_orbit_witness,
    "kahlerCheck": handle_kahler_check,
    "evolve": handle_evolve,
    "dualityCheck": handle_duality_check,
    "schattenCheck": handle_schatten_check,
    "formTransferCheck": handle_form_transfer_check,
    "deficiencyCheck": handle_deficiency_check,
    "criticalPointCheck": handle_critical_point_check,
}


# ---------------------------------------------------------------------------
# scenario plumbing
# ---------------------------------------------------------------------------

def _resolve_seed(scenario: dict, args) -> int:
    if scenario.get("seed") is not None:
        return int(scenario["seed"])
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("GQD_SEED")
    return int(env) if env else 0


def _resolve_tol(scenario: dict, args) -> Tolerance:
    base = DEFAULT_TOL
    if isinstance(scenario.get("tolerances"), dict):
        base = ser.json_to_tolerance(scenario["tolerances"], base)
    kw = {}
    if getattr(args, "tol_rank", None) is not None:
        kw["rank_tol"] = args.tol_rank
    if getattr(args, "tol_eq", None) is not None:
        kw["eq_tol"] = args.tol_eq
    if getattr(args, "tol_cluster", None) is not None:
        kw["eig_cluster_tol"] = args.tol_cluster
    if kw:
        base = Tolerance(
            kw.get("rank_tol", base.rank_tol),
            kw.get("eq_tol", base.eq_tol),
            kw.get("eig_cluster_tol", base.eig_cluster_tol),
        )
    return base


def run_scenario(scenario: dict, tol: Tolerance, seed: int, hbar: float) -> dict:
    """Validate and dispatch a scenario object; returns the report."""
    if not isinstance(scenario, dict):
        raise SchemaError("scenario must be a JSON object")
    kind = scenario.get("kind")
    if kind not in SCENARIO_KINDS:
        raise SchemaError(f"unknown scenario kind {kind!r}")
    params = scenario.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError("scenario 'params' must be an object")
    report = HANDLERS[kind](params, tol, seed, hbar)
    report["seed"] = seed
    report["tolerances"] = ser.tolerance_to_json(tol)
    return report


def report_diff(a: dict, b: dict, rel_tol: float = 1e-9) -> dict:
    """Fieldwise comparison of two reports of the same kind.

    Numeric leaves differing by more than rel_tol (relative plus absolute)
    are listed under numericDiffs; boolean/string mismatches, including
    pass/fail flags, under flagChanges. Identical reports give an empty diff.
    """
    if a.get("kind") != b.get("kind"):
        raise SchemaError(
            f"cannot diff reports of different kinds: {a.get('kind')!r} vs {b.get('kind')!r}"
        )
    numeric, flags = [], []

    def walk(x, y, path):
        if isinstance(x, dict) and isinstance(y, dict):
            for key in sorted(set(x) | set(y)):
                if key not in x or key not in y:
                    flags.append({"path": path + [key], "change": "added/removed"})
                else:
                    walk(x[key], y[key], path + [key])
        elif isinstance(x, list) and isinstance(y, list):
            if len(x) != len(y):
                flags.append({"path": path, "change": f"length {len(x)} -> {len(y)}"})
            for i, (xi, yi) in enumerate(zip(x, y)):
                walk(xi, yi, path + [i])
        elif isinstance(x, bool) or isinstance(y, bool):
            if x != y:
                flags.append({"path": path, "change": f"{x} -> {y}"})
        elif isinstance(x, (int, float)) and isinstance(y, (int, float)):
            gap = abs(float(x) - float(y))
            if gap > rel_tol * max(abs(float(x)), abs(float(y)), 1.0):
                numeric.append({"path": path, "a": float(x), "b": float(y), "delta": gap})
        else:
            if x != y:
                flags.append({"path": path, "change": f"{x!r} -> {y!r}"})

    walk(a, b, [])
    return {"numericDiffs": numeric, "flagChanges": flags,
            "empty": not numeric and not flags}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _emit(report: dict, args) -> None:
    text = ser.dumps(report)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        if not args.quiet:
            print(f"report written to {args.out}")
    elif not args.quiet:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-rank", type=float, default=None, help="rank cutoff, relative")
    p.add_argument("--tol-eq", type=float, default=None, help="comparison tolerance")
    p.add_argument("--tol-cluster", type=float, default=None, help="eigenvalue cluster width")
    p.add_argument("--hbar", type=float, default=1.0, help="default hbar when unset in params")
    p.add_argument("--seed", type=int, default=None, help="seed (fallback: GQD_SEED, then 0)")
    p.add_argument("--out", type=str, default=None, help="write the report JSON here")
    p.add_argument("--quiet", action="store_true", help="suppress stdout output")


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON in {path}: {exc}") from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gqd",
        description="geometric quantum dynamics scenario runner (JSON in, JSON out)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario", help="path to the scenario JSON")
    _add_common(p_run)

    p_gen = sub.add_parser("gen-dynamics", help="generate dynamics from a Lagrangian params file")
    p_gen.add_argument("params", help="Lagrangian params JSON")
    _add_common(p_gen)

    p_ext = sub.add_parser("extend", help="sweep self-adjoint extensions of a relation")
    p_ext.add_argument("relation", help="relation JSON file")
    p_ext.add_argument("--theta-grid", type=int, default=8, dest="theta_grid")
    _add_common(p_ext)

    p_oe = sub.add_parser("orbit-embed", help="embed two density matrices into a unitary")
    p_oe.add_argument("rho", help="density matrix JSON file")
    p_oe.add_argument("rho_prime", help="density matrix JSON file")
    p_oe.add_argument("--prealign", action="store_true")
    _add_common(p_oe)

    p_ow = sub.add_parser("orbit-witness", help="trace-norm witness for one closedness case")
    p_ow.add_argument("params", help="witness params JSON file")
    _add_common(p_ow)

    p_kc = sub.add_parser("kahler-check", help="sample the projective Kahler identities")
    p_kc.add_argument("--dim", type=int, default=8)
    p_kc.add_argument("--samples", type=int, default=200)
    _add_common(p_kc)

    p_ev = sub.add_parser("evolve", help="evolve a state under an operator or Lagrangian")
    p_ev.add_argument("params", help="evolution params JSON file")
    _add_common(p_ev)

    p_dc = sub.add_parser("duality-check", help="Schroedinger/Heisenberg duality residual")
    p_dc.add_argument("params", nargs="?", default=None, help="optional params JSON file")
    p_dc.add_argument("--dim", type=int, default=4)
    _add_common(p_dc)

    p_rd = sub.add_parser("report-diff", help="numeric diff of two report files")
    p_rd.add_argument("report_a")
    p_rd.add_argument("report_b")
    p_rd.add_argument("--rel-tol", type=float, default=1e-9)
    _add_common(p_rd)

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            scenario = _load_json(args.scenario)
            tol = _resolve_tol(scenario if isinstance(scenario, dict) else {}, args)
            seed = _resolve_seed(scenario if isinstance(scenario, dict) else {}, args)
            report = run_scenario(scenario, tol, seed, args.hbar)
        elif args.command == "report-diff":
            diff = report_diff(_load_json(args.report_a), _load_json(args.report_b),
                               args.rel_tol)
            _emit(diff, args)
            return 0 if diff["empty"] else 1
        else:
            kind, params = _command_scenario(args)
            tol = _resolve_tol({}, args)
            seed = _resolve_seed({}, args)
            report = run_scenario({"kind": kind, "params": params}, tol, seed, args.hbar)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (IOError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        _emit(report, args)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 0 if report["passed"] else 1


def _command_scenario(args):
    """Translate a direct subcommand into (kind, params)."""
    if args.command == "gen-dynamics":
        return "genDynamics", _load_json(args.params)
    if args.command == "extend":
        return "extend", {"relation": _load_json(args.relation),
                          "thetaGrid": args.theta_grid}
    if args.command == "orbit-embed":
        return "orbitEmbed", {"rho": _load_json(args.rho),
                              "rhoPrime": _load_json(args.rho_prime),
                              "prealign": bool(args.prealign)}
    if args.command == "orbit-witness":
        return "orbitWitness", _load_json(args.params)
    if args.command == "kahler-check":
        return "kahlerCheck", {"dim": args.dim, "samples": args.samples}
    if args.command == "evolve":
        return "evolve", _load_json(args.params)
    if args.command == "duality-check":
        if args.params:
            return "dualityCheck", _load_json(args.params)
        return "dualityCheck", {"dim": args.dim}
    raise SchemaError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
