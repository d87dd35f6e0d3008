"""Exact 2x2 (and minimal 3x3) matrix algebra.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)``; most functions
also accept stacks of shape ``(..., 2, 2)`` and broadcast over the
leading axes.

Every 2x2 matrix splits orthogonally (Frobenius inner product) into a
conformal part ``C(x) = [[x1, -x2], [x2, x1]]`` and an anticonformal part
``A(y) = [[y1, y2], [y2, -y1]]``.  In these coordinates

    det M = |x|^2 - |y|^2,     |M|^2 = 2 (|x|^2 + |y|^2),

and the distance from ``M`` to the rotation coset ``SO(2) Q`` has the
closed form ``|M|^2 + |Q|^2 - 4 |conf(M Q^T)|``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DomainError

#: below this conformal norm the nearest rotation is not unique
ZERO_CONFORMAL = 1e-12

IDENTITY = np.eye(2)


def as_mat2(m) -> np.ndarray:
    """Coerce ``m`` (nested list, flat 4-list or array) to a finite 2x2 array."""
    a = np.asarray(m, dtype=float)
    if a.shape == (4,):
        a = a.reshape(2, 2)
    if a.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


def det2(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def cof2(m: np.ndarray) -> np.ndarray:
    """Cofactor matrix, ``cof M = det(M) M^{-T}``."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 1, 0]
    out[..., 1, 0] = -m[..., 0, 1]
    out[..., 1, 1] = m[..., 0, 0]
    return out


def inv2(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    d = det2(m)
    if np.any(d == 0.0):
        raise DomainError("singular matrix")
    return np.swapaxes(cof2(m), -1, -2) / d[..., None, None]


def frob2(m: np.ndarray) -> np.ndarray:
    """Squared Frobenius norm over the last two axes."""
    m = np.asarray(m, dtype=float)
    return np.sum(m * m, axis=(-2, -1))


def rotation(theta) -> np.ndarray:
    """Counter-clockwise rotation by ``theta`` (scalar or array)."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(theta.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def conformal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape[:-1] + (2, 2))
    out[..., 0, 0] = x[..., 0]
    out[..., 0, 1] = -x[..., 1]
    out[..., 1, 0] = x[..., 1]
    out[..., 1, 1] = x[..., 0]
    return out


def anticonformal(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape[:-1] + (2, 2))
    out[..., 0, 0] = y[..., 0]
    out[..., 0, 1] = y[..., 1]
    out[..., 1, 0] = y[..., 1]
    out[..., 1, 1] = -y[..., 0]
    return out


def conformal_vector(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.stack(
        [(m[..., 0, 0] + m[..., 1, 1]) / 2, (m[..., 1, 0] - m[..., 0, 1]) / 2],
        axis=-1,
    )


def anticonformal_vector(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.stack(
        [(m[..., 0, 0] - m[..., 1, 1]) / 2, (m[..., 0, 1] + m[..., 1, 0]) / 2],
        axis=-1,
    )


class ConformalCoords(NamedTuple):
    """``M = C(x) + A(y)``."""

    x: np.ndarray
    y: np.ndarray

    def matrix(self) -> np.ndarray:
        return conformal(self.x) + anticonformal(self.y)


def conformal_split(m) -> ConformalCoords:
    return ConformalCoords(conformal_vector(m), anticonformal_vector(m))


def _coset_rotation(m: np.ndarray, q: np.ndarray):
    """Conformal vector of ``M Q^T`` and its norm."""
    x = conformal_vector(m @ np.swapaxes(q, -1, -2))
    return x, np.hypot(x[..., 0], x[..., 1])


def dist2_to_coset(m, q) -> np.ndarray | float:
    """Squared Frobenius distance from ``M`` to the coset ``SO(2) Q``.

    The optimal rotation is ``C(x/|x|)`` with ``x = conf(M Q^T)``, giving
    ``|M|^2 + |Q|^2 - 4|x|``.  Where the optimal rotation is unique the
    residual ``M - R* Q`` is evaluated directly, which avoids the
    cancellation of the closed form near the coset.
    """
    m = np.asarray(m, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(det2(q) == 0.0):
        raise DomainError("coset representative Q must be invertible")
    x, nx = _coset_rotation(m, q)
    closed = frob2(m) + frob2(q) - 4.0 * nx
    unique = nx > ZERO_CONFORMAL
    safe = np.where(unique, nx, 1.0)
    r = conformal(x / safe[..., None])
    direct = frob2(m - r @ q)
    out = np.where(unique, direct, np.maximum(closed, 0.0))
    return float(out) if out.ndim == 0 else out


def nearest_in_coset(m, q) -> np.ndarray:
    """Closest point of ``SO(2) Q`` to ``M`` (single matrices only)."""
    m = as_mat2(m)
    q = as_mat2(q)
    if det2(q) == 0.0:
        raise DomainError("coset representative Q must be invertible")
    x, nx = _coset_rotation(m, q)
    if nx < ZERO_CONFORMAL:
        raise DomainError("projection undefined: conformal part of M Q^T vanishes")
    return conformal(x / nx) @ q


def rotation_angle(r) -> float:
    """Angle of the rotation nearest to ``r`` (polar factor angle)."""
    x = conformal_vector(r)
    return float(np.arctan2(x[..., 1], x[..., 0]))


def polar2(m):
    """Polar decomposition ``M = R U`` of a matrix with positive determinant.

    Closed form: ``R`` is the normalised conformal part, ``U = R^T M``.
    """
    m = as_mat2(m)
    x, nx = _coset_rotation(m, IDENTITY)
    if nx < ZERO_CONFORMAL:
        raise DomainError("polar factor undefined")
    r = conformal(x / nx)
    return r, r.T @ m


# --- 3x3 ---------------------------------------------------------------------


def det3(m) -> np.ndarray:
    """Determinant by cofactor expansion along the first row."""
    m = np.asarray(m, dtype=float)
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def hat3(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def rotation3(axis, angle) -> np.ndarray:
    """Rodrigues formula; ``axis`` need not be normalised."""
    axis = np.asarray(axis, dtype=float)
    angle = np.asarray(angle, dtype=float)
    n = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    k = hat3(n)
    s = np.sin(angle)[..., None, None]
    c = np.cos(angle)[..., None, None]
    return np.eye(3) + s * k + (1 - c) * (k @ k)


def rotvec3(w) -> np.ndarray:
    """Rotation ``exp(hat(w))``; ``w = 0`` maps to the identity."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    small = theta < 1e-300
    axis = np.where(small[..., None], np.array([1.0, 0.0, 0.0]), w)
    return rotation3(axis, np.where(small, 0.0, theta))


# --- serialisation -------------------------------------------------------------


def to_list(m) -> list[float]:
    """Row-major flat list (4 entries for 2x2, 9 for 3x3)."""
    return [float(v) for v in np.asarray(m, dtype=float).reshape(-1)]


def from_list(values, n: int = 2) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    if a.size != n * n:
        raise DomainError(f"expected {n * n} entries, got {a.size}")
    a = a.reshape(n, n)
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


def format_matrix(m) -> str:
    """Row-major text, 17 significant digits."""
    a = np.asarray(m, dtype=float)
    return "\n".join(" ".join(f"{v:.17g}" for v in row) for row in a)
