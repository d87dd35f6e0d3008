"""Laminate trees: finite rank-one splitting recipes with leaves in K."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import DecompositionError, NotInHullError
from ..matcore import as_mat2, conformal, to_list, from_list
from .hull import hull_coordinates, membership
from .wells import TwoWellParams, project_to_K

RANK_ONE_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-8


@dataclass(eq=False)
class Leaf:
    matrix: np.ndarray
    well: int  # 0: SO(2), 1: SO(2) H

    def depth(self) -> int:
        return 0


@dataclass(eq=False)
class Node:
    """``matrix = zeta * plus.matrix + (1 - zeta) * minus.matrix`` and
    ``plus.matrix - minus.matrix = a (x) n`` with ``|n| = 1``."""

    matrix: np.ndarray
    zeta: float
    a: np.ndarray
    n: np.ndarray
    plus: "LaminateTree"
    minus: "LaminateTree"

    def depth(self) -> int:
        return 1 + max(self.plus.depth(), self.minus.depth())


LaminateTree = Union[Leaf, Node]


def leaves(tree: LaminateTree, weight: float = 1.0):
    """Flatten to ``[(weight, matrix, well), ...]``."""
    if isinstance(tree, Leaf):
        return [(weight, tree.matrix, tree.well)]
    return leaves(tree.plus, weight * tree.zeta) + leaves(
        tree.minus, weight * (1.0 - tree.zeta)
    )


def check_tree(tree: LaminateTree, params: TwoWellParams) -> dict:
    """Worst-case violations of the tree invariants."""
    recon = 0.0
    rank1 = 0.0
    stack = [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, Node):
            avg = t.zeta * t.plus.matrix + (1 - t.zeta) * t.minus.matrix
            recon = max(recon, float(np.abs(avg - t.matrix).max()))
            jump = t.plus.matrix - t.minus.matrix
            rank1 = max(rank1, float(np.linalg.svd(jump, compute_uv=False)[1]))
            rank1 = max(rank1, float(np.abs(jump - np.outer(t.a, t.n)).max()))
            stack += [t.plus, t.minus]
    leaf_dist = 0.0
    for _, m, well in leaves(tree):
        p, w = project_to_K(m, params)
        leaf_dist = max(leaf_dist, float(np.linalg.norm(m - p)))
        if w != well:
            leaf_dist = np.inf
    total = sum(w * m for w, m, _ in leaves(tree))
    return {
        "reconstruction": max(recon, float(np.abs(total - tree.matrix).max())),
        "rank_one": rank1,
        "leaf_distance": leaf_dist,
        "depth": tree.depth(),
    }


def _rank_one_factors(jump: np.ndarray):
    u, s, vt = np.linalg.svd(jump)
    a, n = s[0] * u[:, 0], vt[0]
    # canonical sign: first nonzero component of n positive
    k = 0 if abs(n[0]) > 1e-14 else 1
    if n[k] < 0:
        a, n = -a, -n
    return a, n, s[1]


def _segment(x_mat: np.ndarray, params: TwoWellParams, tol: float):
    """Depth <= 1 tree for a point with ``|x| + |y| = 1``, or None."""
    hc = hull_coordinates(x_mat, params)
    nx, ny = float(np.hypot(*hc.x)), float(np.hypot(*hc.y))
    if ny <= tol and nx > 0:
        return Leaf(conformal(hc.x / nx), 0)
    if nx <= tol and ny > 0:
        return Leaf(conformal(hc.y / ny) @ params.H, 1)
    if nx == 0 or ny == 0:
        return None
    plus = conformal(hc.x / nx)
    minus = conformal(hc.y / ny) @ params.H
    a, n, s2 = _rank_one_factors(plus - minus)
    if s2 > RANK_ONE_TOL:
        return None
    return Node(x_mat, nx / (nx + ny), a, n, Leaf(plus, 0), Leaf(minus, 1))


def _exit_time(hc0, dhc, sign: float) -> float:
    """``t > 0`` with ``|x(sign t)| + |y(sign t)| = 1`` by doubling + bisection."""

    def excess(t):
        x = hc0.x + sign * t * dhc.x
        y = hc0.y + sign * t * dhc.y
        return np.hypot(*x) + np.hypot(*y) - 1.0

    lo, hi = 0.0, 1.0
    while excess(hi) < 0:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def laminate_decompose(
    r,
    params: TwoWellParams,
    tol: float = 1e-9,
    leaf_tol: float = 1e-10,
    n_directions: int = 720,
) -> LaminateTree:
    """Depth <= 2 laminate tree with average ``r`` and leaves in K.

    Depth 0 when ``r`` is in K; depth 1 when ``r`` lies on a rank-one segment
    joining the wells (the boundary ``|x|+|y| = 1`` of the hull inside
    SL(2)); otherwise rank-one directions ``n`` are scanned and ``r`` is
    split along the determinant-preserving line ``r + t (r n_perp) (x) n``
    at the two points where that line leaves the hull.
    """
    r = as_mat2(r)
    flags = membership(r, params, tol)
    if not flags.in_Zmin:
        raise NotInHullError("matrix is not in Z_min")
    if flags.in_K:
        p, well = project_to_K(r, params)
        return Leaf(p, well)
    hc0 = hull_coordinates(r, params)
    if abs(float(hc0.l1()) - 1.0) <= tol:
        node = _segment(r, params, tol)
        if node is not None:
            return node

    for phi in np.arange(n_directions) * (np.pi / n_directions):
        n = np.array([np.cos(phi), np.sin(phi)])
        a = r @ np.array([-n[1], n[0]])
        jump = np.outer(a, n)
        dhc = hull_coordinates(jump, params)
        t_plus = _exit_time(hc0, dhc, 1.0)
        t_minus = -_exit_time(hc0, dhc, -1.0)
        ends = [_segment(r + t * jump, params, tol) for t in (t_plus, t_minus)]
        if any(e is None for e in ends):
            continue
        zeta = -t_minus / (t_plus - t_minus)
        node = Node(r, zeta, (t_plus - t_minus) * a, n, ends[0], ends[1])
        report = check_tree(node, params)
        if (
            report["reconstruction"] <= RECONSTRUCTION_TOL
            and report["rank_one"] <= RANK_ONE_TOL
            and report["leaf_distance"] <= leaf_tol
        ):
            return node
    raise DecompositionError(
        f"decomposition not found after {n_directions} directions"
    )


# --- JSON -----------------------------------------------------------------------


def tree_to_dict(tree: LaminateTree) -> dict:
    if isinstance(tree, Leaf):
        return {"matrix": to_list(tree.matrix), "well": int(tree.well)}
    return {
        "matrix": to_list(tree.matrix),
        "zeta": float(tree.zeta),
        "a": [float(v) for v in tree.a],
        "n": [float(v) for v in tree.n],
        "children": [tree_to_dict(tree.plus), tree_to_dict(tree.minus)],
    }


def tree_from_dict(d: dict) -> LaminateTree:
    m = from_list(d["matrix"])
    if "children" not in d:
        return Leaf(m, int(d["well"]))
    plus, minus = (tree_from_dict(c) for c in d["children"])
    return Node(
        m, float(d["zeta"]), np.asarray(d["a"], float), np.asarray(d["n"], float), plus, minus
    )
