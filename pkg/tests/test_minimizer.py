import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twowell.energy import EnergyModel, dirichlet, two_well
from twowell.errors import ConfigError, NumericError
from twowell.field import affine_field, identity_field, perturbed_field, torn_positions
from twowell.laminate import build_laminate_field
from twowell.matcore import det2, dist2_to_coset, polar2, rotation
from twowell.minimizer import (
    MinimizeProblem,
    affine_certificate,
    assemble_energy_and_grad,
    count_cosets,
    energy_terms,
    minimize,
    null_lagrangian_residual,
)
from twowell.wellsgeo import laminate_decompose


def fd_gradient(fld, model, beta, h=1e-6):
    out = np.zeros_like(fld.deformed)
    for v in np.flatnonzero(~fld.boundary):
        for c in range(2):
            u = fld.deformed.copy()
            u[v, c] += h
            ep = energy_terms(fld, model, beta, u).total(beta)
            u[v, c] -= 2 * h
            em = energy_terms(fld, model, beta, u).total(beta)
            out[v, c] = (ep - em) / (2 * h)
    return out


def brute_count(g, areas, tol):
    """Greedy coset clustering with an exhaustive distance check per seed."""
    todo, count = list(range(len(g))), 0
    while todo:
        i = todo[0]
        hit = {i}
        if det2(g[i]) > 0:
            p = polar2(g[i])[1]
            for j in todo:
                if np.sqrt(dist2_to_coset(g[j] @ np.linalg.inv(p), np.eye(2))) <= tol:
                    hit.add(j)
        if areas[list(hit)].sum() >= 0.05 * areas.sum():
            count += 1
        todo = [j for j in todo if j not in hit]
    return count


class TestAssembly:
    def test_identity_critical(self):
        e, g = assemble_energy_and_grad(identity_field(5, 5), dirichlet(), 100.0)
        assert e == pytest.approx(1.0, abs=1e-14)
        assert np.abs(g).max() <= 1e-13

    def test_h_field(self, params):
        fld = affine_field(params.H, nx=4, ny=4)
        t = energy_terms(fld, dirichlet(), 10.0)
        assert t.stored == pytest.approx((params.lam**2 + params.mu**2) / 2)
        assert t.penalty == pytest.approx(0.0, abs=1e-28)

    @pytest.mark.parametrize("kind", ["dirichlet", "two_well", "custom"])
    def test_gradient_vs_finite_differences(self, kind, params):
        model = {
            "dirichlet": dirichlet(),
            "two_well": two_well(params),
            "custom": EnergyModel(
                "quartic", lambda m: np.sum(m**4, axis=(-2, -1)), lambda m: 4 * m**3
            ),
        }[kind]
        fld = perturbed_field(affine_field(params.midpoint, nx=4, ny=4), 0.05, seed=7)
        _, g = assemble_energy_and_grad(fld, model, 10.0)
        fd = fd_gradient(fld, model, 10.0)
        assert np.abs(g - fd).max() <= 1e-5 * max(1.0, np.abs(fd).max())
        assert np.all(g[fld.boundary] == 0.0)


class TestMinimize:
    def test_dirichlet_returns_identity(self):
        start = perturbed_field(identity_field(8, 8), 0.05, seed=0)
        out, rep = minimize(MinimizeProblem(start, dirichlet()))
        assert rep.monotone and rep.converged
        assert rep.energy == pytest.approx(1.0, abs=1e-6)
        assert rep.energy >= 1 - 1e-6
        assert np.abs(out.deformed - out.vertices).max() <= 1e-4
        assert rep.penalty_residual <= 1e-2

    def test_trace_nonincreasing_per_stage(self):
        start = perturbed_field(identity_field(6, 6), 0.05, seed=1)
        _, rep = minimize(MinimizeProblem(start, dirichlet(), stages=1))
        e = [row[1] for row in rep.trace]
        assert all(b <= a for a, b in zip(e, e[1:]))

    def test_zero_iterations_is_identity_map(self):
        start = perturbed_field(identity_field(4, 4), 0.05, seed=2)
        out, rep = minimize(MinimizeProblem(start, dirichlet(), max_iter=0))
        assert np.array_equal(out.deformed, start.deformed)
        assert rep.iterations == 0 and rep.trace == []

    def test_non_finite_energy(self):
        # unbounded below, and undefined once the gradients grow large
        def f(m):
            s = np.sum(m * m, axis=(-2, -1))
            return np.where(s < 8.0, -s, np.nan)

        bad = EnergyModel("bad", f, lambda m: -2 * m)
        start = perturbed_field(identity_field(3, 3), 0.05, seed=0)
        with pytest.raises(NumericError) as exc:
            minimize(MinimizeProblem(start, bad, beta0=1e-3, stages=1, max_iter=500))
        assert exc.value.last_valid is not None

    @pytest.mark.parametrize(
        "kw", [{"beta0": 0.0}, {"factor": 1.0}, {"stages": 0}, {"max_iter": -1}, {"armijo": 1.5}]
    )
    def test_validation(self, kw):
        with pytest.raises(ConfigError):
            MinimizeProblem(identity_field(2, 2), dirichlet(), **kw)


class TestCertificates:
    def test_constant_coset_certifies(self, params):
        fld = affine_field(rotation(0.3) @ params.H, nx=6, ny=6)
        cert = affine_certificate(fld)
        assert cert.certified and cert.single_coset
        assert cert.affine_residual <= 1e-12
        assert np.allclose(cert.P @ cert.P.T, params.H @ params.H.T, atol=1e-12)

    def test_laminate_never_certifies(self, params):
        tree = laminate_decompose(params.midpoint, params)
        fld = build_laminate_field(tree, 16, 1 / 16)
        cert = affine_certificate(fld)
        assert not cert.certified and not cert.single_coset
        assert "gradients populate 2 cosets" in cert.reasons

    def test_displaced_vertex(self):
        fld = identity_field(6, 6)
        u = fld.deformed.copy()
        u[3 * 7 + 3] += 0.1
        cert = affine_certificate(fld.with_deformed(u))
        assert not cert.certified
        assert cert.affine_residual > 1e-3

    def test_count_cosets(self, params):
        g = np.concatenate([np.repeat([np.eye(2)], 10, 0), np.repeat([params.H], 10, 0)])
        assert count_cosets(g, np.ones(20), 1e-9) == 2

    @given(st.integers(0, 2**32 - 1), st.sampled_from([1e-6, 1e-2, 0.3]))
    def test_count_cosets_matches_brute_force(self, seed, tol):
        rng = np.random.default_rng(seed)
        base = [np.eye(2), np.diag([0.5, 2.0]), np.array([[1.0, 0.7], [0.0, 1.0]])]
        pick = rng.integers(0, 3, 60)
        g = rotation(rng.uniform(-np.pi, np.pi, 60)) @ np.array(base)[pick]
        g = g + rng.normal(scale=rng.choice([0.0, 1e-3, 0.2]), size=g.shape)
        areas = rng.uniform(0.5, 1.5, 60)
        assert count_cosets(g, areas, tol) == brute_count(g, areas, tol)

    def test_null_lagrangian(self, rng):
        fld = identity_field(6, 6)
        assert null_lagrangian_residual(fld) <= 1e-14
        u = fld.deformed.copy()
        inner = ~fld.boundary
        u[inner] += rng.uniform(-0.05, 0.05, (int(inner.sum()), 2))
        assert null_lagrangian_residual(fld.with_deformed(u)) <= 1e-12
        torn = torn_positions(fld, 3 * 7 + 3, (0.1, 0.0))
        assert null_lagrangian_residual(fld, torn) > 1e-3
