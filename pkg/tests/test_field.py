import numpy as np
import pytest

from twowell.errors import ConfigError
from twowell.field import (
    DeformationField,
    affine_field,
    grid_triangles,
    grid_vertices,
    identity_field,
    perturbed_field,
    torn_positions,
    triangle_gradients,
)


@pytest.mark.parametrize("diagonal", ["/", "\\"])
def test_triangles_cover_square_ccw(diagonal):
    v = grid_vertices(3, 4)
    t = grid_triangles(3, 4, diagonal)
    e = v[t[:, 1:]] - v[t[:, :1]]
    signed = e[:, 0, 0] * e[:, 1, 1] - e[:, 0, 1] * e[:, 1, 0]
    assert np.all(signed > 0)
    assert 0.5 * signed.sum() == pytest.approx(1.0)
    assert len(t) == 24


def test_vertex_numbering():
    v = grid_vertices(4, 2)
    assert np.allclose(v[2 * 5 + 3], [0.75, 1.0])


def test_affine_gradients_exact(rng):
    f = rng.standard_normal((2, 2))
    fld = affine_field(f, (0.3, -1.0), 5, 3, "\\")
    assert np.allclose(fld.gradients(), f, atol=1e-13)
    assert fld.boundary_error() == 0.0


def test_perturbation_keeps_boundary():
    fld = perturbed_field(identity_field(6, 6), 0.05, seed=1)
    assert fld.boundary_error() == 0.0
    assert np.abs(fld.deformed - fld.vertices).max() > 0.01
    again = perturbed_field(identity_field(6, 6), 0.05, seed=1)
    assert np.array_equal(fld.deformed, again.deformed)


def test_core_triangles():
    fld = identity_field(8, 8)
    assert fld.core_triangles().all()
    fld.cutoff = 0.25
    core = fld.core_triangles()
    assert core.sum() == 2 * 4 * 4


def test_json_round_trip(rng):
    fld = perturbed_field(affine_field(rng.standard_normal((2, 2)), (1, 2), 3, 4, "\\"), 0.1, 0)
    fld.cutoff = 0.2
    back = DeformationField.from_dict(fld.to_dict())
    assert np.array_equal(back.deformed, fld.deformed)
    assert np.array_equal(back.R, fld.R)
    assert back.diagonal == "\\" and back.cutoff == 0.2


def test_json_validation():
    d = identity_field(2, 2).to_dict()
    bad = dict(d, vertices=[[0, 0]] * 9)
    with pytest.raises(ConfigError):
        DeformationField.from_dict(bad)
    with pytest.raises(ConfigError):
        DeformationField.from_dict({k: v for k, v in d.items() if k != "deformed"})
    with pytest.raises(ConfigError):
        DeformationField(2, 2, np.zeros((5, 2)))
    with pytest.raises(ConfigError):
        grid_triangles(2, 2, "x")


def test_torn_positions():
    fld = identity_field(4, 4)
    pos = torn_positions(fld, 12, (0.1, 0.0))
    g = triangle_gradients(fld, pos)
    assert not np.allclose(g, np.eye(2))
    assert np.allclose(triangle_gradients(fld, fld.deformed[fld.triangles]), np.eye(2))
