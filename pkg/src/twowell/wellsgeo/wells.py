"""Rotation wells, rank-one connections and the two-well set K."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import DomainError
from ..matcore import (
    anticonformal_vector,
    as_mat2,
    conformal_vector,
    det2,
    dist2_to_coset,
    inv2,
    nearest_in_coset,
    rotation,
)

UNIMODULAR_TOL = 1e-10
EQUIVALENCE_TOL = 1e-10


@dataclass(frozen=True)
class TwoWellParams:
    """Wells ``K = SO(2) U SO(2) H`` with ``H = diag(lam, 1/lam)``, ``0 < lam < 1``."""

    lam: float = 0.5
    mu: float = field(init=False)

    def __post_init__(self):
        lam = float(self.lam)
        if not (0.0 < lam < 1.0):
            raise DomainError(f"lambda must lie in (0, 1), got {lam}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", 1.0 / lam)

    @property
    def H(self) -> np.ndarray:
        return np.diag([self.lam, self.mu])

    @property
    def wells(self) -> tuple[np.ndarray, np.ndarray]:
        return np.eye(2), self.H

    @property
    def connection_angle(self) -> float:
        """Angle ``theta*`` with ``det(R_theta* - H) = 0``: ``cos = 2/(lam+mu)``."""
        return float(np.arccos(2.0 / (self.lam + self.mu)))

    @property
    def midpoint(self) -> np.ndarray:
        """``(I + R_theta* H) / 2``, the centre of a rank-one segment of K^c."""
        return 0.5 * (np.eye(2) + rotation(self.connection_angle) @ self.H)


class Connection(NamedTuple):
    angles: tuple[float, ...]
    degenerate: bool


def _check_unimodular(*qs):
    for q in qs:
        if abs(det2(q) - 1.0) > UNIMODULAR_TOL:
            raise DomainError(f"expected det = 1, got {float(det2(q))!r}")


def rank_one_angles(q1, q2) -> Connection:
    """All ``theta`` with ``det(R_theta Q1 - Q2) = 0``.

    With ``P = Q2 Q1^{-1} = C(c) + A(d)`` and ``det P = 1``,
    ``det(R_theta - P) = 2 - 2 (cos theta, sin theta) . c``, so solutions are
    ``arg c +- arccos(1/|c|)``.  Conformally equivalent cosets (``|c| = 1``)
    yield the single angle ``arg c`` and ``degenerate=True``.
    """
    q1 = as_mat2(q1)
    q2 = as_mat2(q2)
    _check_unimodular(q1, q2)
    p = q2 @ inv2(q1)
    c = conformal_vector(p)
    d = anticonformal_vector(p)
    phase = float(np.arctan2(c[1], c[0]))
    if float(np.hypot(*d)) <= EQUIVALENCE_TOL:
        return Connection((phase,), True)
    beta = float(np.arccos(min(1.0, 1.0 / float(np.hypot(*c)))))
    return Connection((phase + beta, phase - beta), False)


def conformally_equivalent(q1, q2) -> bool:
    q1 = as_mat2(q1)
    q2 = as_mat2(q2)
    _check_unimodular(q1, q2)
    d = anticonformal_vector(q2 @ inv2(q1))
    return bool(np.hypot(*d) <= EQUIVALENCE_TOL)


def dist2_to_wells(m, params: TwoWellParams) -> np.ndarray:
    """Squared distance to each well; trailing axis indexes (SO(2), SO(2)H)."""
    m = np.asarray(m, dtype=float)
    return np.stack(
        [np.asarray(dist2_to_coset(m, q)) for q in params.wells], axis=-1
    )


def dist2_to_K(m, params: TwoWellParams):
    out = np.min(dist2_to_wells(m, params), axis=-1)
    return float(out) if out.ndim == 0 else out


def nearest_well(m, params: TwoWellParams):
    """0 for SO(2), 1 for SO(2)H; ties go to SO(2)."""
    d = dist2_to_wells(m, params)
    out = (d[..., 1] < d[..., 0]).astype(int)
    return int(out) if out.ndim == 0 else out


def project_to_K(m, params: TwoWellParams) -> tuple[np.ndarray, int]:
    m = as_mat2(m)
    well = nearest_well(m, params)
    return nearest_in_coset(m, params.wells[well]), well


def neighbors_in_K(x, params: TwoWellParams, tol: float = 1e-10):
    """The two matrices of the opposite well rank-one connected to ``x``."""
    x = as_mat2(x)
    p, well = project_to_K(x, params)
    if np.linalg.norm(x - p) > tol:
        raise DomainError("matrix is not in K")
    other = params.wells[1 - well]
    conn = rank_one_angles(other, p)
    if conn.degenerate:  # pragma: no cover - wells are never equivalent
        raise DomainError("wells are conformally equivalent")
    return tuple(rotation(t) @ other for t in conn.angles)


def random_in_K(rng: np.random.Generator, params: TwoWellParams, size: int):
    """``size`` matrices of K, wells alternating starting with SO(2)."""
    angles = rng.uniform(-np.pi, np.pi, size)
    wells = np.arange(size) % 2
    mats = rotation(angles)
    mats[wells == 1] = mats[wells == 1] @ params.H
    return mats, wells
