"""Acceptance gate: one check per criterion, each printing a pass/fail line.

Run through pytest (the lines are repeated in the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest
from scipy.optimize import brentq

from twowell.energy import dirichlet, two_well
from twowell.envelope import build_biconjugate
from twowell.errors import NotInHullError
from twowell.field import affine_field, identity_field, perturbed_field, torn_positions
from twowell.laminate import (
    affine_competitor_energy,
    build_laminate_field,
    field_energy,
    field_gradient_stats,
)
from twowell.matcore import det2, rotation
from twowell.minimizer import (
    MinimizeProblem,
    affine_certificate,
    energy_terms,
    minimize,
    null_lagrangian_residual,
)
from twowell.wellsgeo import (
    TwoWellParams,
    conformally_equivalent,
    dist2_to_K,
    dist2_to_wells,
    hull_matrix,
    laminate_decompose,
    membership,
    neighbors_in_K,
    random_in_K,
    rank_one_angles,
    sample_zmin,
    so3_rank_one_scan,
)

RESULTS: list[str] = []
PARAMS = TwoWellParams(0.5)

# refined minimum of the 10^5-sample scan for diag(0.5, 0.8, 2.5) is 0.2000;
# the regression threshold is frozen at half of it
SO3_MARGIN_ORACLE = 0.2
SO3_THRESHOLD = 0.5 * SO3_MARGIN_ORACLE


def record(n: int, ok: bool, elapsed: float, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s) {detail}"
    RESULTS.append(line)
    print(line)


def det_roots(q1, q2, n=20001):
    """Sign changes of ``det(R_t q1 - q2)`` on a fine grid, polished by brentq."""
    f = lambda t: det2(rotation(t) @ q1 - q2)  # noqa: E731
    t = np.linspace(-np.pi, np.pi, n)
    v = f(t)
    return sorted(
        brentq(f, t[i], t[i + 1], xtol=1e-15) for i in range(n - 1) if v[i] * v[i + 1] < 0
    )


def random_unimodular(rng):
    m = rng.standard_normal((2, 2))
    if det2(m) < 0:
        m[:, 0] *= -1
    return m / np.sqrt(det2(m))


def test_criterion_1_rank_one_geometry():
    t0 = time.perf_counter()
    conn = rank_one_angles(np.eye(2), PARAMS.H)
    oracle = det_roots(np.eye(2), PARAMS.H)
    err = float(np.abs(np.array(sorted(conn.angles)) - oracle).max())
    closed = float(np.abs(np.sort(conn.angles) - [-np.arccos(0.8), np.arccos(0.8)]).max())
    rng = np.random.default_rng(1)
    worst, counts = 0.0, set()
    pairs = 0
    while pairs < 100:
        q1, q2 = random_unimodular(rng), random_unimodular(rng)
        if conformally_equivalent(q1, q2):
            continue
        pairs += 1
        c = rank_one_angles(q1, q2)
        counts.add(len(c.angles))
        for t in c.angles:
            worst = max(worst, abs(det2(rotation(t) @ q1 - q2)))
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-9 and closed <= 1e-9 and counts == {2} and worst <= 1e-10 and elapsed < 1
    record(1, ok, elapsed, f"oracle gap {err:.1e}, pair residual {worst:.1e}, counts {counts}")
    assert ok


def test_criterion_2_exactly_two_neighbours():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    mats, wells = random_in_K(rng, PARAMS, 100)
    counts, worst = set(), 0.0
    for m, w in zip(mats, wells):
        nb = neighbors_in_K(m, PARAMS)
        counts.add(len(nb))
        for p in nb:
            worst = max(worst, float(np.sqrt(dist2_to_wells(p, PARAMS)[1 - w])))
    elapsed = time.perf_counter() - t0
    ok = counts == {2} and worst <= 1e-10 and elapsed < 1
    record(2, ok, elapsed, f"counts {counts}, distance to opposite well {worst:.1e}")
    assert ok


def test_criterion_3_hull_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    n = 10_000
    a, g = rng.uniform(-np.pi, np.pi, (2, n))
    rx, ry = rng.uniform(0, 1, (2, n))
    x = rx[:, None] * np.column_stack([np.cos(a), np.sin(a)])
    y = ry[:, None] * np.column_stack([np.cos(g), np.sin(g)])
    m = hull_matrix(x, y, PARAMS)
    expect = np.sum(x * x, 1) + np.sum(y * y, 1) + (PARAMS.lam + PARAMS.mu) * np.sum(x * y, 1)
    gap = float(np.abs(det2(m) - expect).max())
    # add a box of generic matrices and the wells themselves
    pts = np.concatenate([m, rng.uniform(-1.5, 1.5, (n, 2, 2)), random_in_K(rng, PARAMS, 100)[0]])
    k, kc, z = membership(pts, PARAMS)
    violations = int(np.sum(k & ~z) + np.sum(z & ~kc))
    elapsed = time.perf_counter() - t0
    ok = gap <= 1e-12 and violations == 0 and elapsed < 1
    record(3, ok, elapsed, f"det identity gap {gap:.1e}, implication violations {violations}")
    assert ok


def kc_points(rng, count):
    pts = [np.eye(2), PARAMS.H, PARAMS.midpoint]
    while len(pts) < count:
        alpha, gamma = rng.uniform(-np.pi, np.pi, 2)
        try:
            pts.append(sample_zmin(alpha, gamma, rng.uniform(0, 1), PARAMS))
        except NotInHullError:
            continue
    return np.array(pts)


def test_criterion_4_envelope_zero_set():
    t0 = time.perf_counter()
    env = build_biconjugate(two_well(PARAMS), box=3.0, resolution=33)
    build = time.perf_counter() - t0
    t1 = time.perf_counter()
    pts = kc_points(np.random.default_rng(4), 100)
    in_kc = bool(np.all(membership(pts, PARAMS).in_Kc))
    top = float(np.max(env(pts)))
    at_2i = float(env(2 * np.eye(2)))
    second = env.line_second_differences()
    checks = time.perf_counter() - t1
    ok = in_kc and top <= 5e-2 and at_2i >= 1.5 and second >= -1e-9
    ok = ok and build <= 300 and checks < 10
    record(
        4,
        ok,
        build + checks,
        f"max F** on K^c {top:.3g}, F**(2I) {at_2i:.3g}, min second difference {second:.1e}, "
        f"build {build:.1f} s",
    )
    assert ok


def test_criterion_5_laminate_quality():
    t0 = time.perf_counter()
    tree = laminate_decompose(PARAMS.midpoint, PARAMS)
    model = two_well(PARAMS)
    energies, ok = [], True
    notes = []
    for n in (8, 16, 32, 64):
        fld = build_laminate_field(tree, n, 1.0 / n)
        st = field_gradient_stats(fld, PARAMS)
        energies.append(field_energy(fld, model))
        det_dev = max(abs(st.core_det_min - 1), abs(st.core_det_max - 1))
        ok &= st.boundary_error == 0.0
        ok &= st.fraction_in_K >= 1 - 4 / n
        ok &= det_dev <= 1e-10
        notes.append(f"N={n}: E={energies[-1]:.4f} inK={st.fraction_in_K:.3f}")
    ok &= all(b <= a for a, b in zip(energies, energies[1:]))
    ok &= energies[-1] <= 0.05
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record(5, bool(ok), elapsed, "; ".join(notes))
    assert ok


def test_criterion_6a_dirichlet_affine():
    t0 = time.perf_counter()
    start = perturbed_field(identity_field(16, 16), 0.05, seed=6)
    out, rep = minimize(MinimizeProblem(start, dirichlet()))
    dev = float(np.abs(out.deformed - out.vertices).max())
    elapsed = time.perf_counter() - t0
    ok = abs(rep.energy - 1) <= 1e-3 and dev <= 1e-3 and elapsed <= 120
    record(6, ok, elapsed, f"(a) energy {rep.energy:.9f}, vertex deviation {dev:.1e}")
    assert ok


def test_criterion_6b_two_well_non_affine():
    t0 = time.perf_counter()
    model = two_well(PARAMS)
    m = PARAMS.midpoint
    tree = laminate_decompose(m, PARAMS)
    start = build_laminate_field(tree, 32, 1 / 32, grid=(128, 256), layer="flow")
    out, rep = minimize(MinimizeProblem(start, model, max_iter=2000))
    affine = affine_competitor_energy(m, model)
    oracle = float(dist2_to_K(m, PARAMS))
    elapsed = time.perf_counter() - t0
    ok = rep.energy <= 0.05 and abs(affine - oracle) <= 1e-12 and abs(oracle - 0.2905) <= 5e-4
    ok = ok and rep.monotone and elapsed <= 120
    record(
        6,
        ok,
        elapsed,
        f"(b) energy {rep.energy:.4f} vs affine {affine:.4f}, "
        f"det residual {rep.penalty_residual:.3f}",
    )
    assert ok


def test_criterion_7_certificates():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst, const_ok = 0.0, True
    for _ in range(10):
        p = random_unimodular(rng)
        fld = affine_field(rotation(rng.uniform(-np.pi, np.pi)) @ p, rng.normal(size=2), 6, 6)
        cert = affine_certificate(fld)
        const_ok &= cert.certified
        worst = max(worst, cert.coset_residual)
    tree = laminate_decompose(PARAMS.midpoint, PARAMS)
    lam_ok = not any(
        affine_certificate(build_laminate_field(tree, n, 1 / n, layer=layer)).certified
        for n in (4, 8, 16)
        for layer in ("blend", "flow")
    )
    base = identity_field(8, 8)
    nl_cont = max(
        null_lagrangian_residual(perturbed_field(base, 0.08, seed=s)) for s in range(50)
    )
    inner = np.flatnonzero(~base.boundary)
    nl_torn = min(
        null_lagrangian_residual(base, torn_positions(base, int(v), (0.1, 0.05)))
        for v in inner[::7]
    )
    elapsed = time.perf_counter() - t0
    ok = const_ok and worst <= 1e-12 and lam_ok and nl_cont <= 1e-10 and nl_torn > 1e-3
    ok = ok and elapsed < 10
    record(
        7,
        ok,
        elapsed,
        f"coset residual {worst:.1e}, laminates rejected {lam_ok}, "
        f"null Lagrangian {nl_cont:.1e} / torn {nl_torn:.2g}",
    )
    assert ok


def test_criterion_8_so3_scan():
    t0 = time.perf_counter()
    hit = so3_rank_one_scan(np.diag([0.5, 1.0, 2.0]))
    miss = so3_rank_one_scan(np.diag([0.5, 0.8, 2.5]))
    elapsed = time.perf_counter() - t0
    ok = hit.min_residual <= 1e-8 and miss.min_residual >= SO3_THRESHOLD and elapsed <= 60
    record(
        8,
        ok,
        elapsed,
        f"connected residual {hit.min_residual:.1e}, separated minimum {miss.min_residual:.4f} "
        f"(threshold {SO3_THRESHOLD})",
    )
    assert ok


def test_criterion_9_gradient_correctness():
    t0 = time.perf_counter()
    model, beta, h = two_well(PARAMS), 10.0, 1e-6
    worst = 0.0
    for seed in range(10):
        fld = perturbed_field(affine_field(PARAMS.midpoint, nx=4, ny=4), 0.1, seed=seed)
        g = energy_terms(fld, model, beta).grad
        fd = np.zeros_like(g)
        for v in np.flatnonzero(~fld.boundary):
            for c in range(2):
                u = fld.deformed.copy()
                u[v, c] += h
                ep = energy_terms(fld, model, beta, u).total(beta)
                u[v, c] -= 2 * h
                em = energy_terms(fld, model, beta, u).total(beta)
                fd[v, c] = (ep - em) / (2 * h)
        worst = max(worst, float(np.abs(g - fd).max() / max(1.0, np.abs(fd).max())))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 5
    record(9, ok, elapsed, f"relative gradient error {worst:.1e}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
