"""Geometry of the wells: rank-one connections, hulls, laminate trees."""

from .hull import (
    HullCoords,
    Membership,
    dist2_to_hull,
    hull_coordinates,
    hull_matrix,
    membership,
    sample_zmin,
    zmin_sweep,
)
from .so3 import SO3Scan, axis_angle_grid, so3_rank_one_scan
from .tree import (
    Leaf,
    LaminateTree,
    Node,
    check_tree,
    laminate_decompose,
    leaves,
    tree_from_dict,
    tree_to_dict,
)
from .wells import (
    Connection,
    TwoWellParams,
    conformally_equivalent,
    dist2_to_K,
    dist2_to_wells,
    nearest_well,
    neighbors_in_K,
    project_to_K,
    random_in_K,
    rank_one_angles,
)

__all__ = [
    "Connection",
    "HullCoords",
    "LaminateTree",
    "Leaf",
    "Membership",
    "Node",
    "SO3Scan",
    "TwoWellParams",
    "axis_angle_grid",
    "check_tree",
    "conformally_equivalent",
    "dist2_to_K",
    "dist2_to_hull",
    "dist2_to_wells",
    "hull_coordinates",
    "hull_matrix",
    "laminate_decompose",
    "leaves",
    "membership",
    "nearest_well",
    "neighbors_in_K",
    "project_to_K",
    "random_in_K",
    "rank_one_angles",
    "sample_zmin",
    "so3_rank_one_scan",
    "tree_from_dict",
    "tree_to_dict",
    "zmin_sweep",
]
