"""Piecewise-affine deformations of the unit square.

The reference mesh is a structured ``nx x ny`` grid of cells, each split
into two triangles.  Vertices are numbered row by row,
``index = j * (nx + 1) + i`` for the vertex at ``(i / nx, j / ny)``.
``diagonal`` selects the split: ``"/"`` cuts each cell from its lower-left
to upper-right corner, ``"\\"`` from lower-right to upper-left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError
from .matcore import as_mat2, from_list, to_list


def grid_vertices(nx: int, ny: int) -> np.ndarray:
    xs, ys = np.meshgrid(np.arange(nx + 1) / nx, np.arange(ny + 1) / ny)
    return np.column_stack([xs.ravel(), ys.ravel()])


def grid_triangles(nx: int, ny: int, diagonal: str = "/") -> np.ndarray:
    """Counter-clockwise triangles, two per cell, cells in row-major order."""
    j, i = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    v00 = (j * (nx + 1) + i).ravel()
    v10, v01 = v00 + 1, v00 + nx + 1
    v11 = v01 + 1
    if diagonal == "/":
        t1 = np.column_stack([v00, v10, v11])
        t2 = np.column_stack([v00, v11, v01])
    elif diagonal == "\\":
        t1 = np.column_stack([v00, v10, v01])
        t2 = np.column_stack([v10, v11, v01])
    else:
        raise ConfigError(f"diagonal must be '/' or '\\\\', got {diagonal!r}", "diagonal")
    return np.stack([t1, t2], axis=1).reshape(-1, 3)


def boundary_mask(vertices: np.ndarray) -> np.ndarray:
    x, y = vertices[:, 0], vertices[:, 1]
    return (x == 0.0) | (x == 1.0) | (y == 0.0) | (y == 1.0)


def edge_matrices(points: np.ndarray) -> np.ndarray:
    """``[p1 - p0, p2 - p0]`` as columns, for points of shape ``(T, 3, 2)``."""
    return np.stack([points[:, 1] - points[:, 0], points[:, 2] - points[:, 0]], axis=-1)


@dataclass(eq=False)
class DeformationField:
    """Deformed positions on a structured triangulation of ``[0, 1]^2``.

    ``R, b`` are the affine boundary data ``u(x) = R x + b``; ``cutoff`` is
    the width of the boundary blend layer when the field came from the
    laminate builder (``None`` otherwise).
    """

    nx: int
    ny: int
    deformed: np.ndarray
    R: np.ndarray = field(default_factory=lambda: np.eye(2))
    b: np.ndarray = field(default_factory=lambda: np.zeros(2))
    diagonal: str = "/"
    cutoff: float | None = None

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("grid sizes must be positive", "grid")
        self.R = as_mat2(self.R)
        self.b = np.asarray(self.b, dtype=float).reshape(2)
        self.deformed = np.asarray(self.deformed, dtype=float)
        if self.deformed.shape != ((self.nx + 1) * (self.ny + 1), 2):
            raise ConfigError("deformed positions do not match the grid", "deformed")

    @cached_property
    def vertices(self) -> np.ndarray:
        return grid_vertices(self.nx, self.ny)

    @cached_property
    def triangles(self) -> np.ndarray:
        return grid_triangles(self.nx, self.ny, self.diagonal)

    @cached_property
    def triangles_i64(self) -> np.ndarray:
        return np.ascontiguousarray(self.triangles, dtype=np.int64)

    @cached_property
    def boundary(self) -> np.ndarray:
        return boundary_mask(self.vertices)

    @cached_property
    def ref_inverse(self) -> np.ndarray:
        """Inverse reference edge matrices, shape ``(T, 2, 2)``."""
        return np.linalg.inv(edge_matrices(self.vertices[self.triangles]))

    @cached_property
    def areas(self) -> np.ndarray:
        d = edge_matrices(self.vertices[self.triangles])
        return 0.5 * np.abs(np.linalg.det(d))

    @property
    def n_triangles(self) -> int:
        return 2 * self.nx * self.ny

    def affine_boundary(self, points=None) -> np.ndarray:
        p = self.vertices if points is None else points
        return p @ self.R.T + self.b

    def gradients(self, deformed=None) -> np.ndarray:
        u = self.deformed if deformed is None else deformed
        return edge_matrices(u[self.triangles]) @ self.ref_inverse

    def boundary_error(self) -> float:
        diff = self.deformed[self.boundary] - self.affine_boundary()[self.boundary]
        return float(np.abs(diff).max()) if diff.size else 0.0

    def core_triangles(self) -> np.ndarray:
        """Triangles whose vertices all sit at distance >= cutoff from the boundary."""
        if self.cutoff is None:
            return np.ones(self.n_triangles, dtype=bool)
        v = self.vertices
        dist = np.minimum.reduce([v[:, 0], 1 - v[:, 0], v[:, 1], 1 - v[:, 1]])
        ok = dist >= self.cutoff - 1e-12
        return ok[self.triangles].all(axis=1)

    def with_deformed(self, deformed: np.ndarray) -> "DeformationField":
        return DeformationField(
            self.nx, self.ny, deformed.copy(), self.R, self.b, self.diagonal, self.cutoff
        )

    def copy(self) -> "DeformationField":
        return self.with_deformed(self.deformed)

    # --- JSON -------------------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "nx": self.nx,
            "ny": self.ny,
            "R": to_list(self.R),
            "b": [float(v) for v in self.b],
            "diagonal": self.diagonal,
            "vertices": self.vertices.tolist(),
            "deformed": self.deformed.tolist(),
        }
        if self.cutoff is not None:
            d["cutoff"] = float(self.cutoff)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeformationField":
        try:
            out = cls(
                int(d["nx"]),
                int(d["ny"]),
                np.asarray(d["deformed"], dtype=float),
                from_list(d["R"]),
                np.asarray(d["b"], dtype=float),
                d.get("diagonal", "/"),
                d.get("cutoff"),
            )
        except KeyError as exc:
            raise ConfigError(f"field file lacks key {exc}", str(exc)) from None
        if "vertices" in d and not np.allclose(d["vertices"], out.vertices, atol=1e-15):
            raise ConfigError("vertices are not the structured grid", "vertices")
        return out


def affine_field(F, b=(0.0, 0.0), nx: int = 16, ny: int = 16, diagonal: str = "/"):
    """The map ``x -> F x + b``, pinned to itself on the boundary."""
    F = as_mat2(F)
    b = np.asarray(b, dtype=float)
    v = grid_vertices(nx, ny)
    return DeformationField(nx, ny, v @ F.T + b, F, b, diagonal)


def identity_field(nx: int = 16, ny: int = 16, diagonal: str = "/"):
    return affine_field(np.eye(2), (0.0, 0.0), nx, ny, diagonal)


def perturbed_field(base: DeformationField, amplitude: float, seed: int):
    """Random interior perturbation, uniform in ``[-amplitude, amplitude]``."""
    rng = np.random.default_rng(seed)
    u = base.deformed.copy()
    inner = ~base.boundary
    u[inner] += rng.uniform(-amplitude, amplitude, size=(int(inner.sum()), 2))
    return base.with_deformed(u)


def torn_positions(fld: DeformationField, vertex: int, offset) -> np.ndarray:
    """Per-triangle deformed positions with ``vertex`` torn apart.

    Copies of ``vertex`` in triangles whose centroid lies to its right are
    shifted by ``offset``, leaving a discontinuous field.
    """
    pos = fld.deformed[fld.triangles].copy()
    centroid_x = fld.vertices[fld.triangles].mean(axis=1)[:, 0]
    hit = (fld.triangles == vertex) & (centroid_x > fld.vertices[vertex, 0])[:, None]
    pos[hit] += np.asarray(offset, dtype=float)
    return pos


def triangle_gradients(fld: DeformationField, positions: np.ndarray) -> np.ndarray:
    """Gradients from per-triangle positions of shape ``(T, 3, 2)``."""
    return edge_matrices(positions) @ fld.ref_inverse
