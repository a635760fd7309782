"""Gromov-Hausdorff bounds for finite (pseudo-)metric spaces.

All routines accept distance matrices with off-diagonal zeros; no quotienting
is done.  d_GH is computed through correspondences: for a relation R covering
both spaces, dis(R) = sup |d_X(x, x') - d_Y(y, y')| over (x, y), (x', y') in R,
and d_GH = 1/2 inf_R dis(R).
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .walks import cross_sq_distances

EXACT_MAX_POINTS = 5


class GhSizeError(ValueError):
    pass


@dataclass
class GhBoundReport:
    lower: float
    upper: float
    exact: Optional[float] = None
    methods: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.upper < self.lower:
            raise ValueError("upper bound below lower bound")

    def to_dict(self) -> dict:
        return asdict(self)


def _as_matrix(D) -> np.ndarray:
    D = np.asarray(getattr(D, "entries", D), dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    return D


def correspondence_upper(D1, D2) -> float:
    """Half the distortion of the index-matching correspondence i <-> i."""
    A, B = _as_matrix(D1), _as_matrix(D2)
    if A.shape != B.shape:
        raise ValueError(f"size mismatch: {A.shape[0]} vs {B.shape[0]} points")
    return 0.5 * float(np.max(np.abs(A - B))) if A.size else 0.0


def diameter_lower(D1, D2) -> float:
    A, B = _as_matrix(D1), _as_matrix(D2)
    diam_a = float(A.max()) if A.size else 0.0
    diam_b = float(B.max()) if B.size else 0.0
    return 0.5 * abs(diam_a - diam_b)


def half_max_diameter(D1, D2) -> float:
    """Trivial upper bound max(diam X, diam Y) / 2, valid for any sizes."""
    A, B = _as_matrix(D1), _as_matrix(D2)
    return 0.5 * max(float(A.max()) if A.size else 0.0, float(B.max()) if B.size else 0.0)


def _map_distortions(DX: np.ndarray, DY: np.ndarray, maps: np.ndarray) -> np.ndarray:
    # distortion of the graph of each map X -> Y
    pulled = DY[maps[:, :, None], maps[:, None, :]]
    return np.abs(pulled - DX[None]).reshape(len(maps), -1).max(axis=1)


def exact_small(D1, D2) -> float:
    """Exact d_GH for spaces of at most five points.

    Every correspondence contains graph(f) U graph(g)^T for some maps
    f: X -> Y and g: Y -> X, and shrinking a relation cannot raise its
    distortion, so it suffices to minimise over those unions.  For a fixed f
    the cross terms split by y: max_{x, y} |d_X(x, g(y)) - d_Y(f(x), y)|
    equals max_y M[y, g(y)], with M[y, x'] = max_x |d_X(x, x') - d_Y(f(x), y)|.
    """
    DX, DY = _as_matrix(D1), _as_matrix(D2)
    nx, ny = DX.shape[0], DY.shape[0]
    if max(nx, ny) > EXACT_MAX_POINTS:
        raise GhSizeError(f"exact oracle capped at {EXACT_MAX_POINTS} points")
    if nx == 0 or ny == 0:
        raise ValueError("spaces must be nonempty")

    fs = np.array(list(itertools.product(range(ny), repeat=nx)), dtype=np.intp)
    gs = np.array(list(itertools.product(range(nx), repeat=ny)), dtype=np.intp)
    dis_f = _map_distortions(DX, DY, fs)
    dis_g = _map_distortions(DY, DX, gs)
    rows = np.arange(ny)

    best = np.inf
    for fi in np.argsort(dis_f, kind="stable"):
        if dis_f[fi] >= best:
            break
        f = fs[fi]
        # M[y, x'] = max_x |DX[x, x'] - DY[f[x], y]|
        M = np.abs(DX[:, None, :] - DY[f][:, :, None]).max(axis=0)
        cross = M[rows[None, :], gs].max(axis=1)
        total = np.maximum(np.maximum(cross, dis_g), dis_f[fi])
        best = min(best, float(total.min()))
    return 0.5 * best


def gh_bounds(D1, D2, exact: bool = False) -> GhBoundReport:
    A, B = _as_matrix(D1), _as_matrix(D2)
    lower = diameter_lower(A, B)
    methods = {"lower": "diameter"}
    upper = half_max_diameter(A, B)
    methods["upper"] = "half-max-diameter"
    if A.shape == B.shape:
        corr = correspondence_upper(A, B)
        if corr <= upper:
            upper = corr
            methods["upper"] = "index-correspondence"
    value = None
    if exact:
        value = exact_small(A, B)
        methods["exact"] = "map-pair-enumeration"
    return GhBoundReport(lower, upper, value, methods)


def hausdorff_between_clouds(A: np.ndarray, B: np.ndarray) -> float:
    """Hausdorff distance between two finite point sets in the same R^d."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("clouds must be 2-D point arrays")
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise ValueError("clouds must be nonempty")
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    D2 = cross_sq_distances(A, B)
    return float(np.sqrt(max(D2.min(axis=1).max(), D2.min(axis=0).max())))
