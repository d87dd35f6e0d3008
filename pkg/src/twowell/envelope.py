"""Grid-based convex envelope (biconjugate) of a density on 2x2 matrices.

The density is sampled on the box ``[-b, b]^4`` of matrix entries
``(m11, m12, m21, m22)``.  The 4-D discrete conjugate is separable:

    f*(s) = sup_x4 (s4 x4 + sup_x3 (s3 x3 + ... sup_x1 (s1 x1 - f(x))))

so it is computed by 1-D transforms along one axis at a time, negating the
partial result between passes.  Applying the same procedure to ``f*`` on the
slope grid gives ``f**`` on the original nodes.  ``f**`` is the maximum of
finitely many affine minorants of the sampled data, hence below the data
and convex along every grid line.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .energy import EnergyModel
from .errors import ConfigError, DomainError
from .kernels import conjugate_axis

MAGIC = b"TWELL1"
_HEADER = struct.Struct("<dI")


def legendre_nd(values: np.ndarray, x: np.ndarray, s: np.ndarray, backend=None):
    """Discrete conjugate of a 4-D table on the product grid ``x^4 -> s^4``."""
    g = conjugate_axis(values, 0, x, s, backend)
    for axis in range(1, values.ndim):
        g = conjugate_axis(np.negative(g, out=g), axis, x, s, backend)
    return g


@dataclass(eq=False)
class GridEnvelope:
    box: float
    resolution: int
    values: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.box, self.box, self.resolution)

    def _interp(self):
        if not hasattr(self, "_rgi"):
            self._rgi = RegularGridInterpolator(
                (self.nodes,) * 4, self.values, method="linear", bounds_error=True
            )
        return self._rgi

    def __call__(self, m) -> np.ndarray:
        return envelope_eval(self, m)

    def nearest_node(self, m) -> tuple[int, ...]:
        m = np.asarray(m, dtype=float).reshape(4)
        h = 2 * self.box / (self.resolution - 1)
        idx = np.clip(np.rint((m + self.box) / h), 0, self.resolution - 1)
        return tuple(int(i) for i in idx)

    def node_matrix(self, idx) -> np.ndarray:
        return self.nodes[list(idx)].reshape(2, 2)

    def line_second_differences(self) -> float:
        """Smallest second difference along any grid line (all four axes)."""
        worst = np.inf
        v = self.values
        for axis in range(4):
            d2 = np.diff(v, n=2, axis=axis)
            worst = min(worst, float(d2.min()))
        return worst

    def as_model(self) -> EnergyModel:
        return EnergyModel(
            f"envelope(box={self.box:g}, n={self.resolution})",
            lambda m: envelope_eval(self, m),
        )

    # --- binary file -----------------------------------------------------------

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(_HEADER.pack(float(self.box), int(self.resolution)))
        buf.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridEnvelope":
        if data[: len(MAGIC)] != MAGIC:
            raise DomainError("not an envelope file (bad magic)")
        off = len(MAGIC)
        box, n = _HEADER.unpack_from(data, off)
        off += _HEADER.size
        expected = n**4 * 8
        if len(data) - off != expected:
            raise DomainError(f"envelope file truncated: {len(data) - off} of {expected} bytes")
        vals = np.frombuffer(data, dtype="<f8", offset=off).reshape((n,) * 4)
        return cls(box, n, vals.astype(float))

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GridEnvelope":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def slice_2d(self, axes=(0, 3), fixed=None):
        """Rows ``(u, v, value)`` of the plane spanned by two entry axes.

        The other two entries sit at the nodes nearest ``fixed`` (a 2x2
        matrix, default zero).
        """
        i, j = axes
        if i == j or not (0 <= i < 4 and 0 <= j < 4):
            raise ConfigError("axes must be two distinct entries in 0..3", "axes")
        base = list(self.nearest_node(np.zeros(4) if fixed is None else fixed))
        nodes = self.nodes
        rows = []
        for a in range(self.resolution):
            for b in range(self.resolution):
                idx = list(base)
                idx[i], idx[j] = a, b
                rows.append((float(nodes[a]), float(nodes[b]), float(self.values[tuple(idx)])))
        return rows


def sample_on_grid(raw: EnergyModel, nodes: np.ndarray) -> np.ndarray:
    n = nodes.size
    grids = np.meshgrid(nodes, nodes, nodes, nodes, indexing="ij")
    mats = np.stack(grids, axis=-1).reshape(-1, 2, 2)
    out = np.empty(n**4)
    step = 1 << 18
    for lo in range(0, out.size, step):
        out[lo : lo + step] = raw(mats[lo : lo + step])
    return out.reshape((n,) * 4)


def build_biconjugate(
    raw: EnergyModel,
    box: float = 3.0,
    resolution: int = 33,
    slope_box: float | None = None,
    slope_resolution: int | None = None,
    backend: str | None = None,
) -> GridEnvelope:
    """Discrete convex envelope of ``raw`` on ``[-box, box]^4``.

    The slope grid defaults to ``[-2 box, 2 box]`` with the primal spacing,
    so every node's discrete subdifferential of a quadratic contains a grid
    slope and already-convex quadratic data is reproduced exactly.
    """
    if resolution < 9 or resolution % 2 == 0:
        raise ConfigError("resolution must be odd and at least 9", "resolution")
    if box < 3:
        raise ConfigError("box must be at least 3", "box")
    slope_box = 2.0 * box if slope_box is None else float(slope_box)
    if slope_resolution is None:
        slope_resolution = int(round((resolution - 1) * slope_box / box)) + 1
    if slope_resolution < 2 or slope_box <= 0:
        raise ConfigError("slope grid must have positive extent", "slope_box")
    x = np.linspace(-box, box, resolution)
    s = np.linspace(-slope_box, slope_box, slope_resolution)
    f = sample_on_grid(raw, x)
    fstar = legendre_nd(f, x, s, backend)
    del f
    fss = legendre_nd(fstar, s, x, backend)
    return GridEnvelope(float(box), int(resolution), fss)


def envelope_eval(env: GridEnvelope, m) -> np.ndarray | float:
    """Multilinear interpolation; points outside the box raise DomainError."""
    m = np.asarray(m, dtype=float)
    pts = m.reshape(-1, 4)
    if np.any(np.abs(pts) > env.box):
        raise DomainError("matrix outside the envelope box (no extrapolation)")
    out = env._interp()(pts).reshape(m.shape[:-2])
    return float(out) if out.ndim == 0 else out
