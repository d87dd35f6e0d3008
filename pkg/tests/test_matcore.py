import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twowell.errors import DomainError
from twowell.matcore import (
    anticonformal,
    as_mat2,
    cof2,
    conformal,
    conformal_split,
    det2,
    det3,
    dist2_to_coset,
    format_matrix,
    frob2,
    from_list,
    inv2,
    nearest_in_coset,
    polar2,
    rotation,
    rotation3,
    rotvec3,
    to_list,
)

entries = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
mats = arrays(float, (2, 2), elements=entries)
angles = st.floats(-np.pi, np.pi, allow_nan=False)


def brute_dist2(m, q, n=20001):
    """Minimum over a dense scan of the circle (an upper bound)."""
    t = np.linspace(-np.pi, np.pi, n)
    d = frob2(m - rotation(t) @ q)
    return float(d.min())


class TestSplit:
    @given(mats)
    def test_split_reconstructs(self, m):
        assert np.allclose(conformal_split(m).matrix(), m, atol=1e-12)

    @given(mats)
    def test_det_and_norm_identities(self, m):
        x, y = conformal_split(m)
        assert det2(m) == pytest.approx(x @ x - y @ y, abs=1e-10)
        assert frob2(m) == pytest.approx(2 * (x @ x + y @ y), abs=1e-10)

    @given(st.tuples(entries, entries), st.tuples(entries, entries))
    def test_parts_are_orthogonal(self, x, y):
        assert np.sum(conformal(x) * anticonformal(y)) == pytest.approx(0.0, abs=1e-12)


class TestDistance:
    def test_identity_to_rotations_is_zero(self):
        assert dist2_to_coset(np.eye(2), np.eye(2)) == 0.0

    def test_midpoint_distance(self):
        mid = np.array([[0.7, -0.6], [0.15, 1.3]])
        h = np.diag([0.5, 2.0])
        d = min(dist2_to_coset(mid, np.eye(2)), dist2_to_coset(mid, h))
        assert d == pytest.approx(brute_dist2(mid, np.eye(2)), abs=1e-6)
        assert d == pytest.approx(0.2904981, abs=1e-6)

    @given(mats, angles)
    def test_against_circle_scan(self, m, t):
        q = rotation(t) @ np.diag([0.5, 2.0])
        assert dist2_to_coset(m, q) <= brute_dist2(m, q) + 1e-12
        assert dist2_to_coset(m, q) == pytest.approx(brute_dist2(m, q), abs=1e-5)

    @given(angles)
    def test_zero_on_coset(self, t):
        q = np.array([[1.0, 0.3], [0.0, 1.0]])
        assert dist2_to_coset(rotation(t) @ q, q) <= 1e-24

    def test_vectorised(self, rng):
        m = rng.standard_normal((7, 2, 2))
        stacked = dist2_to_coset(m, np.eye(2))
        assert stacked.shape == (7,)
        assert np.allclose(stacked, [dist2_to_coset(a, np.eye(2)) for a in m])

    def test_singular_coset_rejected(self):
        with pytest.raises(DomainError):
            dist2_to_coset(np.eye(2), np.zeros((2, 2)))

    @given(mats)
    def test_nearest_point_attains_distance(self, m):
        q = np.diag([0.5, 2.0])
        try:
            p = nearest_in_coset(m, q)
        except DomainError:
            return
        assert frob2(m - p) == pytest.approx(dist2_to_coset(m, q), abs=1e-12)

    def test_projection_undefined(self):
        with pytest.raises(DomainError, match="projection undefined"):
            nearest_in_coset(anticonformal([1.0, 0.0]), np.eye(2))


class TestBasics:
    @given(mats)
    def test_cofactor(self, m):
        assert np.allclose(cof2(m) @ m.T, det2(m) * np.eye(2), atol=1e-9)

    def test_inverse(self, rng):
        m = rng.standard_normal((5, 2, 2))
        assert np.allclose(inv2(m) @ m, np.eye(2))

    def test_polar(self):
        m = np.array([[0.7, -0.6], [0.15, 1.3]])
        r, u = polar2(m)
        assert np.allclose(r @ u, m)
        assert np.allclose(u, u.T)
        assert np.allclose(r.T @ r, np.eye(2))

    def test_as_mat2(self):
        assert as_mat2([1, 2, 3, 4]).tolist() == [[1, 2], [3, 4]]
        with pytest.raises(DomainError):
            as_mat2([1, 2, 3])
        with pytest.raises(DomainError):
            as_mat2([[1, np.nan], [0, 1]])

    def test_serialisation_round_trip(self):
        m = np.array([[0.1, 1 / 3], [np.pi, -2.0]])
        assert np.array_equal(from_list(to_list(m)), m)
        rows = format_matrix(m).splitlines()
        assert float(rows[0].split()[1]) == 1 / 3
        with pytest.raises(DomainError):
            from_list([1.0, 2.0])


class TestRotations3:
    @given(arrays(float, 3, elements=st.floats(-3, 3)))
    def test_rotvec_is_rotation(self, w):
        r = rotvec3(w)
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert det3(r) == pytest.approx(1.0, abs=1e-12)

    def test_quarter_turn(self):
        r = rotation3([0, 0, 2.0], np.pi / 2)
        assert np.allclose(r @ [1, 0, 0], [0, 1, 0])
