"""Penalised incompressible energy minimisation and affineness certificates.

The discrete objective on a triangulated field is

    E_beta(u) = sum_T |T| F(grad u_T) + beta sum_T |T| (det grad u_T - 1)^2,

minimised over interior vertex positions with the boundary held at
``R x + b``.  Stages multiply ``beta`` by a fixed factor, so the final
iterate is close to area preserving and the leftover violation is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial import cKDTree

from . import _pykernels, kernels
from .energy import EnergyModel
from .errors import ConfigError, DomainError, NumericError
from .field import DeformationField, edge_matrices
from .matcore import cof2, det2, dist2_to_coset, inv2, polar2

_BUILTIN_KINDS = {"dirichlet": 0, "two_well": 1}


@dataclass
class EnergyTerms:
    stored: float
    penalty: float
    max_det_dev: float
    grad: np.ndarray

    def total(self, beta: float) -> float:
        return self.stored + beta * self.penalty


def energy_terms(fld: DeformationField, model: EnergyModel, beta: float, deformed=None):
    """Stored energy, penalty sum and gradient of ``stored + beta * penalty``.

    Boundary rows of the gradient are zero.
    """
    u = np.ascontiguousarray(fld.deformed if deformed is None else deformed, dtype=float)
    tri = fld.triangles_i64
    grad = np.zeros_like(u)
    kind = _BUILTIN_KINDS.get(model.kind)
    if kind is not None:
        lam = model.params.lam if model.params is not None else 0.5
        stored, penalty, dev = kernels.impl.assemble_builtin(
            kind, lam, float(beta), u, tri, fld.ref_inverse, fld.areas, grad
        )
    else:
        stored, penalty, dev = _pykernels.assemble_model(
            model, float(beta), u, tri, fld.ref_inverse, fld.areas, grad
        )
    grad[fld.boundary] = 0.0
    return EnergyTerms(float(stored), float(penalty), float(dev), grad)


def assemble_energy_and_grad(fld: DeformationField, model: EnergyModel, beta: float):
    """``(E_beta(u), dE_beta/du)`` with boundary components zeroed."""
    t = energy_terms(fld, model, beta)
    return t.total(beta), t.grad


def penalty_residual(fld: DeformationField, deformed=None) -> float:
    """``max_T |det grad u_T - 1|``."""
    return float(np.abs(det2(fld.gradients(deformed)) - 1.0).max())


@dataclass
class MinimizeProblem:
    field: DeformationField
    model: EnergyModel
    beta0: float = 10.0
    factor: float = 10.0
    stages: int = 3
    max_iter: int = 2000
    tol: float = 1e-10
    armijo: float = 1e-4

    def __post_init__(self):
        if not self.beta0 > 0:
            raise ConfigError("beta0 must be positive", "beta0")
        if not self.factor > 1:
            raise ConfigError("factor must exceed 1", "factor")
        if self.stages < 1:
            raise ConfigError("stages must be at least 1", "stages")
        if self.max_iter < 0:
            raise ConfigError("max_iter must be non-negative", "max_iter")
        if not self.tol >= 0:
            raise ConfigError("tol must be non-negative", "tol")
        if not 0 < self.armijo < 1:
            raise ConfigError("armijo constant must lie in (0, 1)", "armijo")

    @property
    def betas(self) -> list[float]:
        return [self.beta0 * self.factor**k for k in range(self.stages)]


@dataclass
class SolveReport:
    energy: float
    penalty_residual: float
    iterations: int
    monotone: bool
    converged: bool
    beta_final: float
    trace: list[tuple[int, float, float, float]] = dc_field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "energy": self.energy,
            "penalty_residual": self.penalty_residual,
            "iterations": self.iterations,
            "monotone": self.monotone,
            "converged": self.converged,
            "beta_final": self.beta_final,
        }


def _stage(fld, model, beta, u, budget, tol, c, trace, it0):
    """Armijo descent along ``-grad`` for one penalty weight.

    The first trial step is the Barzilai-Borwein length from the previous
    pair of iterates; backtracking halves it until sufficient decrease.
    Returns ``(u, iterations, monotone, converged)``.
    """
    terms = energy_terms(fld, model, beta, u)
    e = terms.total(beta)
    g = terms.grad
    step = 1e-2
    monotone = True
    it = 0
    while it < budget:
        gg = float(np.sum(g * g))
        if gg <= tol**2:
            return u, it, monotone, True
        t = step
        while True:
            trial = u - t * g
            nt = energy_terms(fld, model, beta, trial)
            e_new = nt.total(beta)
            if not np.isfinite(e_new):
                raise NumericError(
                    f"non-finite energy at iteration {it0 + it}", last_valid=u.copy()
                )
            if e_new <= e - c * t * gg:
                break
            t *= 0.5
            if t < 1e-18:
                # no representable decrease left along -grad
                return u, it, monotone, True
        it += 1
        dx = trial - u
        dg = nt.grad - g
        sy = float(np.sum(dx * dg))
        step = float(np.sum(dx * dx)) / sy if sy > 0 else 2 * t
        monotone &= e_new <= e
        rel = (e - e_new) / max(abs(e), 1e-300)
        u, e, g = trial, e_new, nt.grad
        trace.append((it0 + it, e, nt.max_det_dev, t))
        if rel <= 1e-16:
            return u, it, monotone, True
    return u, it, monotone, False


def minimize(problem: MinimizeProblem):
    """Descent with penalty continuation; returns ``(field, SolveReport)``.

    Each stage is monotone in its own objective ``E_beta``, which is what
    the trace's ``energy`` column records.  The report's ``energy`` is the
    stored energy alone.
    """
    fld, model = problem.field, problem.model
    u = fld.deformed.copy()
    trace: list = []
    total_it = 0
    monotone = True
    converged = True
    for beta in problem.betas:
        if problem.max_iter == 0:
            converged = False
            break
        u, it, mono, conv = _stage(
            fld, model, beta, u, problem.max_iter, problem.tol, problem.armijo, trace, total_it
        )
        total_it += it
        monotone &= mono
        converged &= conv
    out = fld.with_deformed(u)
    stored = energy_terms(out, model, 0.0).stored
    report = SolveReport(
        energy=stored,
        penalty_residual=penalty_residual(out),
        iterations=total_it,
        monotone=monotone,
        converged=converged,
        beta_final=problem.betas[-1],
        trace=trace,
    )
    return out, report


# --- certificates ------------------------------------------------------------


@dataclass
class AffineCertificate:
    certified: bool
    single_coset: bool
    P: np.ndarray
    coset_residual: float
    affine_residual: float
    n_cosets: int
    reasons: list[str]

    def as_dict(self) -> dict:
        return {
            "certified": self.certified,
            "single_coset": self.single_coset,
            "P": [float(v) for v in self.P.ravel()],
            "coset_residual": self.coset_residual,
            "affine_residual": self.affine_residual,
            "n_cosets": self.n_cosets,
            "reasons": list(self.reasons),
        }


# clusters holding less area than this are counted as transition debris
COSET_AREA_SHARE = 0.05


def _stretch(g: np.ndarray):
    """Polar stretch ``U`` of ``g = R U``, or None when it is undefined."""
    if det2(g) <= 0:
        return None
    try:
        return polar2(g)[1]
    except DomainError:
        return None


def count_cosets(g: np.ndarray, areas: np.ndarray, tol: float) -> int:
    """Greedy clustering of gradients into cosets ``SO(2) P``.

    Each cluster is seeded by its first unassigned triangle (row-major);
    clusters below ``COSET_AREA_SHARE`` of the area are ignored.  Candidates
    come from a k-d tree on ``g^T g``: ``dist(g P^-1, SO(2)) <= tol`` forces
    ``|g^T g - P^T P| <= |P|^2 (2 tol + tol^2)``.
    """
    cg = np.swapaxes(g, -1, -2) @ g
    feats = np.column_stack([cg[:, 0, 0], cg[:, 1, 1], np.sqrt(2.0) * cg[:, 0, 1]])
    tree = cKDTree(feats)
    frob = np.sum(g * g, axis=(-2, -1))
    free = np.ones(len(g), dtype=bool)
    total = areas.sum()
    left = total
    count = 0
    for i in range(len(g)):
        if left < COSET_AREA_SHARE * total:
            break
        if not free[i]:
            continue
        # |P| = |g| for the polar stretch, so the radius needs no decomposition
        radius = frob[i] * (2 * tol + tol * tol) * (1 + 1e-9) + 1e-15
        cand = np.asarray(tree.query_ball_point(feats[i], radius), dtype=int)
        cand = cand[free[cand]]
        hit = np.array([i])
        p = _stretch(g[i]) if cand.size > 1 else None
        if p is not None:
            d = np.sqrt(dist2_to_coset(g[cand] @ inv2(p), np.eye(2)))
            hit = np.union1d(cand[d <= tol], hit)
        free[hit] = False
        share = areas[hit].sum()
        left -= share
        if share >= COSET_AREA_SHARE * total:
            count += 1
    return count


def affine_certificate(
    fld: DeformationField, coset_tol: float = 1e-6, affine_tol: float = 1e-6
) -> AffineCertificate:
    """Check ``grad u`` lies in one coset ``SO(2) P`` and ``u`` is affine."""
    g = fld.gradients()
    p = _stretch(g[0])
    if p is None:
        p = g[0].copy()
        d = np.full(len(g), np.inf)
    else:
        d = np.sqrt(dist2_to_coset(g @ inv2(p), np.eye(2)))
    coset_res = float(np.max(d))
    single = coset_res <= coset_tol
    reasons = []
    n_cosets = 1
    if not single:
        n_cosets = count_cosets(g, fld.areas, coset_tol)
        if n_cosets:
            reasons.append(f"gradients populate {n_cosets} cosets")
        else:
            reasons.append(f"no coset holds {COSET_AREA_SHARE:.0%} of the area")
    v = fld.vertices
    a = np.column_stack([v, np.ones(len(v))])
    coef, *_ = np.linalg.lstsq(a, fld.deformed, rcond=None)
    aff_res = float(np.abs(a @ coef - fld.deformed).max())
    if aff_res > affine_tol:
        reasons.append(f"affine fit residual {aff_res:.3g} exceeds {affine_tol:g}")
    return AffineCertificate(
        certified=single and aff_res <= affine_tol,
        single_coset=single,
        P=p,
        coset_residual=coset_res,
        affine_residual=aff_res,
        n_cosets=n_cosets,
        reasons=reasons,
    )


def null_lagrangian_residual(fld: DeformationField, positions=None) -> float:
    """``max_v |sum_T |T| cof(grad u_T) grad phi_v|`` over interior hats ``phi_v``.

    ``positions`` optionally gives per-triangle vertex positions ``(T, 3, 2)``
    so discontinuous fields can be tested.
    """
    pos = fld.deformed[fld.triangles] if positions is None else np.asarray(positions, float)
    dm_inv = fld.ref_inverse
    g = edge_matrices(pos) @ dm_inv
    w = fld.areas[:, None, None] * cof2(g)
    # hat gradients are the rows of dm_inv (local vertices 1, 2) and minus their sum
    c = w @ np.swapaxes(dm_inv, -1, -2)
    nv = len(fld.vertices)
    acc = np.zeros((nv, 2))
    tri = fld.triangles
    for k, ck in enumerate((-(c[:, :, 0] + c[:, :, 1]), c[:, :, 0], c[:, :, 1])):
        for comp in range(2):
            acc[:, comp] += np.bincount(tri[:, k], weights=ck[:, comp], minlength=nv)
    inner = ~fld.boundary
    return float(np.abs(acc[inner]).max()) if inner.any() else 0.0
