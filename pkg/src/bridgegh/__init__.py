"""Gromov-Hausdorff limits of bridge random walks in growing dimension."""

from .gh import correspondence_upper, diameter_lower, exact_small, hausdorff_between_clouds
from .increments import build_model, condition_diagnostics, distance_scale, sample_increments
from .limits import (deterministic_consistency, limit_distance_matrix, limit_metric,
                     sample_subordinator, wiener_bridge_metric)
from .walks import bridge_of, cumulate, decomposition_check, distance_matrix, subsample_grid, truncated_batch

__version__ = "0.1.0"
