import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twowell.energy import (
    EnergyModel,
    convexity_probes,
    dirichlet,
    energy_eval,
    numeric_gradient,
    rank_one_second_difference,
    two_well,
)
from twowell.errors import ConfigError
from twowell.matcore import conformal_vector, dist2_to_coset, rotation
from twowell.wellsgeo import TwoWellParams, dist2_to_K

mats = arrays(float, (2, 2), elements=st.floats(-3, 3))


class TestDensities:
    def test_dirichlet_values(self, params):
        f = dirichlet()
        assert energy_eval(f, np.eye(2)) == 1.0
        assert energy_eval(f, params.H) == pytest.approx((0.25 + 4.0) / 2)

    def test_two_well_zero_on_wells(self, params):
        f = two_well(params)
        t = np.linspace(-3, 3, 13)
        assert np.all(f(rotation(t)) <= 1e-24)
        assert np.all(f(rotation(t) @ params.H) <= 1e-24)

    def test_two_well_is_dist_to_K(self, params, rng):
        m = rng.uniform(-2, 2, (50, 2, 2))
        assert np.allclose(two_well(params)(m), dist2_to_K(m, params))

    def test_two_well_midpoint(self, params, mid):
        assert energy_eval(two_well(params), mid) == pytest.approx(0.2904981, abs=1e-7)

    @given(mats)
    def test_two_well_gradient(self, m):
        p = TwoWellParams()
        d0, d1 = (dist2_to_coset(m, q) for q in p.wells)
        # F is smooth away from the equidistant locus and the non-unique projections
        assume(abs(d0 - d1) > 1e-3)
        assume(min(np.hypot(*conformal_vector(m @ q.T)) for q in p.wells) > 1e-3)
        f = two_well(p)
        assert np.allclose(f.gradient(m), numeric_gradient(f.eval, m), atol=1e-5)

    @given(mats, st.floats(-np.pi, np.pi))
    def test_frame_indifference(self, m, t):
        f = two_well(TwoWellParams())
        assert f(rotation(t) @ m) == pytest.approx(f(m), abs=1e-10)

    def test_numeric_fallback(self):
        f = EnergyModel("quartic", lambda m: np.sum(m**4, axis=(-2, -1)))
        m = np.array([[1.0, -0.5], [0.2, 2.0]])
        assert np.allclose(f.gradient(m), 4 * m**3, atol=1e-6)


class TestProbes:
    def test_dirichlet_constants(self):
        rep = convexity_probes(dirichlet(), samples=50)
        assert rep.frame_indiff_max <= 1e-12
        assert rep.uniform_convexity_lower == pytest.approx(0.5, abs=1e-9)
        assert rep.quasiconvexity_ratio_min == pytest.approx(0.5, abs=1e-9)
        assert rep.rank1_min_second_diff >= -1e-6

    def test_two_well_not_rank_one_convex(self, params):
        # along the segment from I to R H the density rises and falls
        f = two_well(params)
        jump = rotation(params.connection_angle) @ params.H - np.eye(2)
        u, s, vt = np.linalg.svd(jump)
        a, n = s[0] * u[:, 0], vt[0]
        mid = np.eye(2) + 0.5 * jump
        assert rank_one_second_difference(f, mid, a, n, h=0.2) < 0

    def test_two_well_probe_reports_violation(self, params):
        rep = convexity_probes(two_well(params), samples=100, seed=3)
        assert rep.uniform_convexity_lower < 0
        assert rep.frame_indiff_max <= 1e-10

    def test_rejects_no_samples(self):
        with pytest.raises(ConfigError):
            convexity_probes(dirichlet(), samples=0)

