"""Stored-energy densities and numerical convexity probes.

All densities act on stacks of matrices, shape ``(..., 2, 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .field import grid_triangles, grid_vertices, edge_matrices
from .matcore import conformal, conformal_vector, frob2, rotation
from .wellsgeo import TwoWellParams

FD_STEP = 1e-6


@dataclass(frozen=True)
class EnergyModel:
    """A density ``F`` with optional analytic derivative ``DF``.

    ``params`` is set for the two-well model so compiled kernels can
    recognise it; ``kind`` names the built-in family (``None`` for
    user-supplied densities).
    """

    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kind: Optional[str] = None
    params: Optional[TwoWellParams] = None

    def __call__(self, m):
        return self.eval(np.asarray(m, dtype=float))

    def gradient(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        if self.grad is not None:
            return self.grad(m)
        return numeric_gradient(self.eval, m)


def numeric_gradient(f, m: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central differences, entry by entry."""
    out = np.empty_like(m)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = h
            out[..., i, j] = (f(m + e) - f(m - e)) / (2 * h)
    return out


def dirichlet() -> EnergyModel:
    return EnergyModel(
        "dirichlet", lambda m: 0.5 * frob2(m), lambda m: np.array(m, dtype=float), "dirichlet"
    )


def _well_projection(m: np.ndarray, q: np.ndarray):
    """Nearest point of ``SO(2) q`` (rotation ``I`` where not unique)."""
    x = conformal_vector(m @ q.T)
    nx = np.hypot(x[..., 0], x[..., 1])
    unit = np.where(
        (nx > 1e-12)[..., None], x / np.where(nx > 1e-12, nx, 1.0)[..., None], [1.0, 0.0]
    )
    return conformal(unit) @ q


def two_well(params: TwoWellParams | None = None) -> EnergyModel:
    """``dist^2(., SO(2) U SO(2) H)``; ties take the SO(2) branch."""
    params = params or TwoWellParams()
    wells = params.wells

    def branches(m):
        p0 = _well_projection(m, wells[0])
        p1 = _well_projection(m, wells[1])
        d0 = frob2(m - p0)
        d1 = frob2(m - p1)
        use1 = d1 < d0
        return np.where(use1, d1, d0), np.where(use1[..., None, None], p1, p0)

    def f(m):
        return branches(m)[0]

    def df(m):
        return 2.0 * (m - branches(m)[1])

    return EnergyModel(f"two_well(lambda={params.lam:g})", f, df, "two_well", params)


def energy_eval(model: EnergyModel, m) -> float | np.ndarray:
    out = model(m)
    return float(out) if np.ndim(out) == 0 else out


# --- probes ---------------------------------------------------------------------


@dataclass
class ProbeReport:
    frame_indiff_max: float
    rank1_min_second_diff: float
    uniform_convexity_lower: float
    quasiconvexity_ratio_min: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def rank_one_second_difference(model: EnergyModel, x, a, n, h: float = 1e-3) -> float:
    """``(F(X + h a(x)n) - 2 F(X) + F(X - h a(x)n)) / h^2``."""
    d = np.outer(a, n)
    x = np.asarray(x, dtype=float)
    return float((model(x + h * d) - 2 * model(x) + model(x - h * d)) / h**2)


def hat_test_gradients(rng: np.random.Generator, cells: int = 8, scale: float = 0.3):
    """Gradients of a random compactly supported piecewise-affine map.

    Hat functions on interior vertices of a ``cells x cells`` mesh of the
    unit square with normal coefficients of size ``scale``.
    """
    v = grid_vertices(cells, cells)
    tri = grid_triangles(cells, cells)
    phi = np.zeros_like(v)
    inner = (v[:, 0] > 0) & (v[:, 0] < 1) & (v[:, 1] > 0) & (v[:, 1] < 1)
    phi[inner] = scale * rng.standard_normal((int(inner.sum()), 2))
    grads = edge_matrices(phi[tri]) @ np.linalg.inv(edge_matrices(v[tri]))
    areas = np.full(len(tri), 0.5 / cells**2)
    return grads, areas


def convexity_probes(
    model: EnergyModel, samples: int = 200, seed: int = 0, box: float = 2.0
) -> ProbeReport:
    """Sampled estimates of frame indifference and convexity constants.

    Every number is an extreme over random samples.  The convexity
    constants are therefore upper bounds on the true infima; a negative
    value certifies a genuine violation.
    """
    if samples < 1:
        raise ConfigError("samples must be >= 1", "samples")
    rng = np.random.default_rng(seed)

    x = rng.uniform(-box, box, (samples, 2, 2))
    r = rotation(rng.uniform(-np.pi, np.pi, samples))
    frame = float(np.max(np.abs(model(r @ x) - model(x))))

    a = rng.standard_normal((samples, 2))
    ang = rng.uniform(0, np.pi, samples)
    n = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    d = a[:, :, None] * n[:, None, :]
    h = 1e-3
    second = (model(x + h * d) - 2 * model(x) + model(x - h * d)) / h**2
    rank1 = float(np.min(second))

    y = rng.uniform(-box, box, (samples, 2, 2))
    gap = x - y
    excess = model(x) - model(y) - np.sum(model.gradient(y) * gap, axis=(-2, -1))
    uniform = float(np.min(excess / frob2(gap)))

    ratios = []
    for k in range(samples):
        grads, areas = hat_test_gradients(rng)
        base = x[k]
        num = np.sum(areas * (model(base + grads) - model(base)))
        den = np.sum(areas * frob2(grads))
        ratios.append(num / den)
    return ProbeReport(frame, rank1, uniform, float(np.min(ratios)))
