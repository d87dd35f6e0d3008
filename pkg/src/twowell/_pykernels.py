"""Pure-numpy fallbacks for the compiled kernels (same signatures)."""

import numpy as np

from .field import edge_matrices
from .matcore import cof2, det2

# elements per temporary block in the brute-force conjugate
_BLOCK = 1 << 22


def conjugate_lines(f, x, s, out):
    """``out[l, k] = max_j (s[k] x[j] - f[l, j])``, vectorised brute force."""
    f = np.asarray(f, dtype=float)
    sx = np.multiply.outer(np.asarray(s, float), np.asarray(x, float))
    nlines, n = f.shape
    m = sx.shape[0]
    if out.shape != (nlines, m):
        raise ValueError("shape mismatch")
    step = max(1, _BLOCK // (n * m))
    for lo in range(0, nlines, step):
        blk = f[lo : lo + step]
        np.max(sx[None, :, :] - blk[:, None, :], axis=2, out=out[lo : lo + step])


def assemble_model(model, beta, u, tri, dm_inv, area, grad_out):
    """Energy terms and vertex gradient for any density with a gradient.

    Returns ``(stored, penalty, max |det G - 1|)`` and accumulates the
    gradient of ``stored + beta * penalty`` into ``grad_out``.
    """
    g = edge_matrices(u[tri]) @ dm_inv
    det = det2(g) - 1.0
    stored = float(np.sum(area * model(g)))
    penalty = float(np.sum(area * det * det))
    de = area[:, None, None] * (
        model.gradient(g) + 2.0 * beta * det[:, None, None] * cof2(g)
    )
    dd = de @ np.swapaxes(dm_inv, -1, -2)
    nv = u.shape[0]
    for k, gk in enumerate((-(dd[:, :, 0] + dd[:, :, 1]), dd[:, :, 0], dd[:, :, 1])):
        for c in range(2):
            grad_out[:, c] += np.bincount(tri[:, k], weights=gk[:, c], minlength=nv)
    return stored, penalty, float(np.abs(det).max(initial=0.0))


def assemble_builtin(kind, lam, beta, u, tri, dm_inv, area, grad_out):
    """Numpy counterpart of the compiled assembly (0: Dirichlet, 1: two-well)."""
    from .energy import dirichlet, two_well
    from .wellsgeo import TwoWellParams

    model = dirichlet() if kind == 0 else two_well(TwoWellParams(lam))
    return assemble_model(model, beta, u, tri, dm_inv, area, grad_out)
