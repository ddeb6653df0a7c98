"""Polymer-gas expansion and exact checks for the long-range Ising chain ``J(r) = r^-alpha``."""

from .lattice import ModelParams, SiteSet, SpinFlipConfig, hamiltonian, interior_energy, phi, total_energy
from .contour import Contour, ContourCollection, is_compatible, m_partition, verify_hypotheses
from .polymer import Polymer, activity, polymer_partition_function, positive_polymers
from .cluster import truncated_log_z, ursell, penrose_bound
from .oracle import exact_partition_function, log_partition_function, truncated_two_point, wick_product
from .sitebounds import site_tree_sum
from .treesum import VertexSystem, tree_sum_global, tree_sum_local

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "SiteSet", "SpinFlipConfig", "hamiltonian", "interior_energy", "phi", "total_energy",
    "Contour", "ContourCollection", "is_compatible", "m_partition", "verify_hypotheses",
    "Polymer", "activity", "polymer_partition_function", "positive_polymers",
    "truncated_log_z", "ursell", "penrose_bound",
    "exact_partition_function", "log_partition_function", "truncated_two_point", "wick_product",
    "site_tree_sum", "VertexSystem", "tree_sum_global", "tree_sum_local",
]
