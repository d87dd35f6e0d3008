"""Global scan for rank-one connections between ``SO(3)`` and ``SO(3) Q``.

The cosets are rank-one connected exactly when ``R - Q`` has rank at most
one for some rotation ``R``.  The default residual is the Frobenius
distance from ``R - Q`` to the rank <= 1 matrices,
``sqrt(s2^2 + s3^2)`` in terms of singular values.  ``det(R - Q)`` only
detects rank <= 2, which in 3x3 is a codimension-one condition met by
almost every ``Q``; it is kept as ``residual="det"`` for comparison.

Rotations are sampled on a deterministic low-discrepancy axis-angle grid
(Haar distributed) and the best candidates are polished with a compass
search in the chart ``R exp(hat(w))``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

from ..errors import DomainError
from ..matcore import det3, rotation3, rotvec3

CHUNK = 50_000


class SO3Scan(NamedTuple):
    min_residual: float
    rotation: np.ndarray
    sample_min: float
    n_samples: int


def _haar_angle(u: np.ndarray) -> np.ndarray:
    """Invert the Haar angle CDF ``(w - sin w) / pi`` by bisection."""
    lo = np.zeros_like(u)
    hi = np.full_like(u, np.pi)
    target = np.pi * u
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = mid - np.sin(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def axis_angle_grid(n: int) -> np.ndarray:
    """``n`` rotations from a 3-D Halton sequence mapped to axis and angle."""
    u = qmc.Halton(d=3, scramble=False).random(n + 1)[1:]
    z = 1.0 - 2.0 * u[:, 0]
    phi = 2.0 * np.pi * u[:, 1]
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    axis = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
    return rotation3(axis, _haar_angle(u[:, 2]))


def rank_one_defect(m: np.ndarray) -> np.ndarray:
    """Frobenius distance to the rank <= 1 matrices (batched 3x3)."""
    s = np.linalg.svd(m, compute_uv=False)
    return np.hypot(s[..., 1], s[..., 2])


RESIDUALS = {
    "rank_one": rank_one_defect,
    "det": lambda m: np.abs(det3(m)),
}


def _pattern_search(r0, q, step, iters, residual):
    def f(w):
        return float(residual(r0 @ rotvec3(w) - q))

    w = np.zeros(3)
    best = f(w)
    moves = np.vstack([np.eye(3), -np.eye(3)])
    for _ in range(iters):
        if best == 0.0 or step < 1e-15:
            break
        trial = [(f(w + step * m), i) for i, m in enumerate(moves)]
        val, i = min(trial)
        if val < best:
            best, w = val, w + step * moves[i]
        else:
            step *= 0.5
    return best, r0 @ rotvec3(w)


def so3_rank_one_scan(
    q,
    n_samples: int = 100_000,
    refine_iters: int = 400,
    n_starts: int = 8,
    residual: str = "rank_one",
) -> SO3Scan:
    q = np.asarray(q, dtype=float)
    if residual not in RESIDUALS:
        raise DomainError(f"unknown residual {residual!r}")
    g = RESIDUALS[residual]
    if q.shape != (3, 3) or abs(det3(q) - 1.0) > 1e-8:
        raise DomainError("Q must be a 3x3 matrix with det 1")
    if n_samples < 1:
        raise DomainError("n_samples must be positive")
    rots = axis_angle_grid(n_samples)
    resid = np.concatenate(
        [g(rots[i : i + CHUNK] - q) for i in range(0, n_samples, CHUNK)]
    )
    order = np.argsort(resid, kind="stable")[:n_starts]
    sample_min = float(resid[order[0]])
    step = (8 * np.pi**2 / n_samples) ** (1 / 3)
    best_val, best_rot = sample_min, rots[order[0]]
    for k in order:
        val, rot = _pattern_search(rots[k], q, step, refine_iters, g)
        if val < best_val:
            best_val, best_rot = val, rot
    return SO3Scan(best_val, best_rot, sample_min, n_samples)
