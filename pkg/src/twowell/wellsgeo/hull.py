"""Convex hull ``K^c`` and minimizing set ``Z_min`` of the two wells.

Hull points are written ``X = C(x) + C(y) H`` with ``|x| + |y| <= 1``;
``det X = |x|^2 + |y|^2 + (lam + mu) <x, y>``, so ``Z_min`` is the part of
the hull on which that quadratic equals one.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from ..errors import NotInHullError
from ..matcore import conformal, conformal_split
from .wells import TwoWellParams, dist2_to_K


class HullCoords(NamedTuple):
    x: np.ndarray
    y: np.ndarray

    def l1(self):
        return np.linalg.norm(self.x, axis=-1) + np.linalg.norm(self.y, axis=-1)

    def constraint(self, params: TwoWellParams):
        x, y = self.x, self.y
        return (
            np.sum(x * x, axis=-1)
            + np.sum(y * y, axis=-1)
            + (params.lam + params.mu) * np.sum(x * y, axis=-1)
        )

    def matrix(self, params: TwoWellParams) -> np.ndarray:
        return hull_matrix(self.x, self.y, params)


def hull_matrix(x, y, params: TwoWellParams) -> np.ndarray:
    return conformal(x) + conformal(y) @ params.H


def hull_coordinates(m, params: TwoWellParams) -> HullCoords:
    m = np.asarray(m, dtype=float)
    gap = params.mu - params.lam
    y1 = (m[..., 1, 1] - m[..., 0, 0]) / gap
    y2 = (-m[..., 0, 1] - m[..., 1, 0]) / gap
    x1 = m[..., 0, 0] - params.lam * y1
    x2 = m[..., 1, 0] - params.lam * y2
    return HullCoords(np.stack([x1, x2], axis=-1), np.stack([y1, y2], axis=-1))


class Membership(NamedTuple):
    in_K: bool
    in_Kc: bool
    in_Zmin: bool


def membership(m, params: TwoWellParams, tol: float = 1e-9):
    """Membership flags, vectorised over leading axes.

    The implication chain ``in_K => in_Zmin => in_Kc`` is enforced so
    rounding near the wells cannot break it.
    """
    m = np.asarray(m, dtype=float)
    hc = hull_coordinates(m, params)
    in_kc = hc.l1() <= 1.0 + tol
    in_z = in_kc & (np.abs(hc.constraint(params) - 1.0) <= tol)
    in_k = np.asarray(dist2_to_K(m, params)) <= tol * tol
    in_z = in_z | in_k
    in_kc = in_kc | in_z
    if m.ndim == 2:
        return Membership(bool(in_k), bool(in_kc), bool(in_z))
    return Membership(in_k, in_kc, in_z)


def sample_zmin(alpha: float, gamma: float, t: float, params: TwoWellParams):
    """Point of ``Z_min`` with ``x = t e^{i alpha}`` and ``y`` along ``gamma``.

    ``|y| = r`` solves ``r^2 + (lam+mu) t cos(gamma-alpha) r + t^2 - 1 = 0``.
    Raises :class:`NotInHullError` when the resulting point leaves ``K^c``.
    """
    if not 0.0 <= t <= 1.0:
        raise NotInHullError(f"t must lie in [0, 1], got {t}")
    b = (params.lam + params.mu) * t * np.cos(gamma - alpha)
    c = 1.0 - t * t
    disc = b * b + 4.0 * c
    if disc < 0:  # pragma: no cover - c >= 0 keeps disc >= 0
        raise NotInHullError("no real root")
    root = np.sqrt(disc)
    # stable form of the non-negative root
    r = 2.0 * c / (b + root) if b > 0 else (root - b) / 2.0
    if r < 0:
        raise NotInHullError("no nonnegative root")
    if t + r > 1.0 + 1e-12:
        raise NotInHullError(f"point leaves the convex hull (|x|+|y| = {t + r:.6g})")
    x = t * np.array([np.cos(alpha), np.sin(alpha)])
    y = r * np.array([np.cos(gamma), np.sin(gamma)])
    return hull_matrix(x, y, params)


def zmin_sweep(alphas, gammas, ts, params: TwoWellParams):
    """Yield ``(alpha, gamma, t, matrix)`` for every grid point inside the hull."""
    for a in alphas:
        for g in gammas:
            for t in ts:
                try:
                    yield float(a), float(g), float(t), sample_zmin(a, g, t, params)
                except NotInHullError:
                    continue


def dist2_to_hull(m, params: TwoWellParams) -> float:
    """Squared Frobenius distance to ``K^c``.

    Uses ``C(y) H = s C(y) + d A(y)`` with ``s = (lam+mu)/2``,
    ``d = (lam-mu)/2``: for fixed ``y`` the best ``x`` is a disk projection,
    leaving a convex problem in ``y`` alone.
    """
    p, q = conformal_split(np.asarray(m, dtype=float))
    s = (params.lam + params.mu) / 2
    d = (params.lam - params.mu) / 2

    def objective(y):
        ny = np.hypot(*y)
        if ny > 1.0:
            y = y / ny
            ny = 1.0
        over = max(0.0, np.hypot(*(p - s * y)) - (1.0 - ny))
        return 2 * over * over + 2 * np.sum((q - d * y) ** 2)

    rr, tt = np.meshgrid(np.linspace(0, 1, 41), np.linspace(-np.pi, np.pi, 121))
    rr, tt = rr.ravel(), tt.ravel()
    starts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1)
    vals = np.array([objective(y) for y in starts])
    y0 = starts[np.argmin(vals)]
    res = minimize(
        objective,
        y0,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000},
    )
    return float(min(res.fun, vals.min()))
