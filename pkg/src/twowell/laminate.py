"""Laminate deformations of the unit square with affine boundary values.

A depth-1 node ``R = zeta A + (1 - zeta) B`` with ``A - B = a (x) n`` becomes

    u(x) = R x + b + (a / |p|) phi(N x.p) / N,

where ``p`` is ``n`` scaled to a short integer vector when one exists and
``phi`` is the period-1 sawtooth with slopes ``1 - zeta`` on ``[0, zeta)``
and ``-zeta`` on ``[zeta, 1)``.  Its gradient is ``A`` or ``B`` everywhere
off the interfaces.  A child that is itself a node adds its own sawtooth at
frequency ``N^2``, switched off near the edges of its parent band.  A ramp of
width ``cutoff`` blends the deformed positions into ``R x + b`` so the
boundary values are exact.

With integer ``p`` the grid is chosen so the interfaces ``x.p = (k + {0,
zeta}) / N`` are mesh lines, and no triangle straddles a band edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .energy import EnergyModel
from .errors import ConfigError
from .field import DeformationField, grid_vertices
from .matcore import det2, frob2
from .wellsgeo import Leaf, LaminateTree, Node, TwoWellParams, dist2_to_wells

MAX_INT_DIRECTION = 8


def integer_direction(n, limit: int = MAX_INT_DIRECTION):
    """Shortest integer vector parallel to ``n`` (same orientation), or None."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    for p1 in range(0, limit + 1):
        for p2 in range(-limit, limit + 1):
            p = np.array([p1, p2], dtype=float)
            if not p.any():
                continue
            if abs(p[0] * n[1] - p[1] * n[0]) <= 1e-9 * np.linalg.norm(p):
                return p if p @ n > 0 else -p
    return None


def _fraction_denominator(zeta: float, limit: int = 16) -> int | None:
    frac = Fraction(zeta).limit_denominator(limit)
    return frac.denominator if abs(float(frac) - zeta) <= 1e-9 else None


def aligned_grid(tree: LaminateTree, frequency: int):
    """``(nx, ny, diagonal)`` putting the outer interfaces on mesh lines.

    Falls back to a square ``4N x 4N`` grid when the normal or the volume
    fraction is not representable with small integers.
    """
    if isinstance(tree, Leaf):
        return frequency, frequency, "/"
    p = integer_direction(tree.n)
    d = _fraction_denominator(tree.zeta)
    inner = frequency if tree.depth() > 1 else 1
    if p is None or d is None:
        side = 4 * frequency * inner
        return side, side, "/"
    q = frequency * d * inner
    p1, p2 = int(abs(p[0])), int(abs(p[1]))
    big = max(p1, p2)
    nx = q * (p1 if p1 else big)
    ny = q * (p2 if p2 else big)
    diagonal = "\\" if p[0] * p[1] > 0 else "/"
    return nx, ny, diagonal


def sawtooth(s: np.ndarray, zeta: float) -> np.ndarray:
    fr = s - np.floor(s)
    return np.where(fr < zeta, (1.0 - zeta) * fr, zeta * (1.0 - fr))


def _sawtooth_mean(zeta: float) -> float:
    return 0.5 * zeta * (1.0 - zeta)


def _sawtooth_primitive(s: np.ndarray, zeta: float) -> np.ndarray:
    """Periodic primitive of the mean-free sawtooth, zero at integers."""
    m = _sawtooth_mean(zeta)
    fr = s - np.floor(s)
    at_zeta = 0.5 * (1.0 - zeta) * zeta**2 - m * zeta
    lo = 0.5 * (1.0 - zeta) * fr**2 - m * fr
    hi = at_zeta + zeta * ((fr - zeta) - 0.5 * (fr**2 - zeta**2)) - m * (fr - zeta)
    return np.where(fr < zeta, lo, hi)


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _smoothstep_slope(t):
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 6.0 * t * (1.0 - t), 0.0)


def _flow_layer(node: Node, x: np.ndarray, frequency: int, cutoff: float, steps: int):
    """Area-preserving depth-1 laminate: the time-1 flow of a cut-off shear.

    The interior map is ``R (x + e phi~(N x.p) / N)`` with ``e = R^-1 a / |p|``
    orthogonal to ``p`` and ``phi~`` the mean-free sawtooth.  That shear is
    the flow of the divergence-free field ``J grad psi`` with stream
    function ``psi = k Phi(N x.p) / N^2``.  Multiplying ``psi`` by a C^1
    cutoff that vanishes with its gradient on the boundary keeps the field
    divergence-free and fixes the boundary, so the flow map preserves area
    exactly and equals the shear wherever the cutoff is 1.
    """
    p = integer_direction(node.n)
    if p is None:
        p = node.n / np.linalg.norm(node.n)
    zeta = node.zeta
    e = np.linalg.solve(node.matrix, node.a) / np.linalg.norm(p)
    jp = np.array([-p[1], p[0]])
    k = float(e @ jp) / float(p @ p)
    m = _sawtooth_mean(zeta)
    n2 = float(frequency) ** 2

    def velocity(y):
        s = frequency * (y @ p)
        big_g = k * _sawtooth_primitive(s, zeta) / n2
        g = (sawtooth(s, zeta) - m) / frequency
        c = [y[:, 0], 1.0 - y[:, 0], y[:, 1], 1.0 - y[:, 1]]
        t = [ci / cutoff for ci in c]
        w_parts = [_smoothstep(ti) for ti in t]
        d_parts = [_smoothstep_slope(ti) / cutoff for ti in t]
        w = w_parts[0] * w_parts[1] * w_parts[2] * w_parts[3]
        wx = (d_parts[0] * w_parts[1] - w_parts[0] * d_parts[1]) * w_parts[2] * w_parts[3]
        wy = (d_parts[2] * w_parts[3] - w_parts[2] * d_parts[3]) * w_parts[0] * w_parts[1]
        # J grad(w psi) = w e g + psi J grad w
        return w[:, None] * g[:, None] * e[None, :] + big_g[:, None] * np.column_stack([-wy, wx])

    y = x.copy()
    h = 1.0 / steps
    for _ in range(steps):
        k1 = velocity(y)
        k2 = velocity(y + 0.5 * h * k1)
        k3 = velocity(y + 0.5 * h * k2)
        k4 = velocity(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _oscillation(node: Node, x: np.ndarray, freq: float, outer_freq: int, weight):
    """Displacement contributed by ``node`` and its descendants."""
    p = integer_direction(node.n)
    if p is None:
        p = node.n / np.linalg.norm(node.n)
    norm_p = float(np.linalg.norm(p))
    s = freq * (x @ p)
    amp = sawtooth(s, node.zeta) / freq
    disp = weight[:, None] * amp[:, None] * (node.a / norm_p)[None, :]
    fr = s - np.floor(s)
    ramp = min(1.0 / outer_freq, node.zeta / 2, (1 - node.zeta) / 2)
    for child, lo, hi in ((node.plus, 0.0, node.zeta), (node.minus, node.zeta, 1.0)):
        if isinstance(child, Node):
            inside = (fr >= lo) & (fr < hi)
            edge = np.minimum(fr - lo, hi - fr)
            eta = np.where(inside, np.clip(edge / ramp, 0.0, 1.0), 0.0)
            disp += _oscillation(child, x, freq * outer_freq, outer_freq, weight * eta)
    return disp


def build_laminate_field(
    tree: LaminateTree,
    frequency: int,
    cutoff: float,
    grid: tuple[int, int] | None = None,
    b=(0.0, 0.0),
    layer: str = "blend",
    flow_steps: int = 32,
) -> DeformationField:
    """Piecewise-affine laminate with boundary values ``tree.matrix x + b``.

    ``layer="blend"`` ramps the deformed positions linearly into the affine
    map over the cutoff width.  ``layer="flow"`` (depth-1 trees only) uses
    an area-preserving flow instead, so ``det`` stays near 1 in the layer
    up to interpolation error.
    """
    if layer not in ("blend", "flow"):
        raise ConfigError("layer must be 'blend' or 'flow'", "layer")
    if frequency < 1:
        raise ConfigError("frequency must be a positive integer", "frequency")
    if not 0.0 < cutoff < 0.5:
        raise ConfigError("cutoff must lie in (0, 1/2)", "cutoff")
    nx, ny, diagonal = aligned_grid(tree, frequency)
    if grid is not None:
        nx, ny = (int(v) for v in grid)
    if nx % frequency or ny % frequency:
        raise ConfigError(
            f"grid ({nx}, {ny}) is not a multiple of frequency {frequency}", "grid"
        )
    r = tree.matrix
    b = np.asarray(b, dtype=float)
    x = grid_vertices(nx, ny)
    affine = x @ r.T + b
    if layer == "flow":
        if tree.depth() != 1:
            raise ConfigError("the flow layer needs a depth-1 tree", "layer")
        y = _flow_layer(tree, x, frequency, cutoff, flow_steps)
        u = y @ r.T + b
        edge = np.minimum.reduce([x[:, 0], 1 - x[:, 0], x[:, 1], 1 - x[:, 1]]) == 0.0
        u[edge] = affine[edge]
        # trajectories drift by at most this much, so the exact shear holds
        # beyond cutoff + drift from the boundary
        drift = float(np.abs(y - x).max())
        return DeformationField(nx, ny, u, r, b, diagonal, min(cutoff + drift, 0.5))
    u = affine.copy()
    if isinstance(tree, Node):
        u += _oscillation(tree, x, float(frequency), frequency, np.ones(len(x)))
    dist = np.minimum.reduce([x[:, 0], 1 - x[:, 0], x[:, 1], 1 - x[:, 1]])
    w = np.clip(1.0 - dist / cutoff, 0.0, 1.0)[:, None]
    u = (1.0 - w) * u + w * affine
    edge = dist == 0.0
    u[edge] = affine[edge]
    return DeformationField(nx, ny, u, r, b, diagonal, cutoff)


@dataclass
class GradientStats:
    fraction_in_K: float
    core_fraction_in_K: float
    L2_dist_to_K: float
    well_histogram: tuple[float, float]
    det_min: float
    det_max: float
    core_det_min: float
    core_det_max: float
    boundary_error: float

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["well_histogram"] = list(self.well_histogram)
        return d


def field_gradient_stats(
    fld: DeformationField, params: TwoWellParams, tol: float = 1e-9
) -> GradientStats:
    g = fld.gradients()
    d2 = dist2_to_wells(g, params)
    dist2 = d2.min(axis=-1)
    in_k = np.sqrt(dist2) <= tol
    nearest = (d2[:, 1] < d2[:, 0]).astype(int)
    core = fld.core_triangles()
    det = det2(g)
    core_det = det[core] if core.any() else np.array([np.nan])
    hist = np.bincount(nearest, minlength=2) / len(nearest)
    return GradientStats(
        fraction_in_K=float(in_k.mean()),
        core_fraction_in_K=float(in_k[core].mean()) if core.any() else float("nan"),
        L2_dist_to_K=float(np.sqrt(np.sum(fld.areas * dist2))),
        well_histogram=(float(hist[0]), float(hist[1])),
        det_min=float(det.min()),
        det_max=float(det.max()),
        core_det_min=float(core_det.min()),
        core_det_max=float(core_det.max()),
        boundary_error=fld.boundary_error(),
    )


def field_energy(fld: DeformationField, model: EnergyModel) -> float:
    """``sum_T |T| F(grad u_T)``, exact for piecewise-affine ``u``."""
    return float(np.sum(fld.areas * model(fld.gradients())))


def affine_competitor_energy(r, model: EnergyModel) -> float:
    """Energy of ``u = R x + b`` on the unit square: ``F(R)``."""
    return float(model(np.asarray(r, dtype=float)))


def mean_gradient(fld: DeformationField) -> np.ndarray:
    return np.einsum("t,tij->ij", fld.areas, fld.gradients()) / fld.areas.sum()


def gradient_spread(fld: DeformationField) -> float:
    g = fld.gradients()
    return float(np.sqrt(np.sum(fld.areas * frob2(g - mean_gradient(fld)))))
