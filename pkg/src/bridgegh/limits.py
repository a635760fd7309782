"""Limit (pseudo-)metric spaces on [0, 1].

Four metrics are available:

``wiener-bridge``       sqrt(u (1 - u)), u = |t - s|
``subordinator-plain``  |zeta_t - zeta_s|^(1/2)
``subordinator-stmt``   |zeta_t - zeta_s - (t - s) zeta_1|^(1/2)
``subordinator-emb``    distance inside the l2 set
                        { sum_{x_k <= t} e_k y_k^(1/2) - t sum_k e_k y_k^(1/2) }

zeta is the pure-jump subordinator built from a Poisson process of atoms
(x_k, y_k) on [0, 1] x (0, inf) with intensity Leb x alpha y^(-alpha-1) dy,
truncated to jumps y_k > eps.

The stmt and emb kinds do not agree (put zeta_t = t: emb reduces to the
wiener-bridge metric while stmt collapses to 0), so both are kept and every
consumer labels which one produced a number.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .rng import KeyPart, generator
from .walks import DistanceMatrix, format_float

WIENER_BRIDGE = "wiener-bridge"
SUB_PLAIN = "subordinator-plain"
SUB_STMT = "subordinator-stmt"
SUB_EMB = "subordinator-emb"
KINDS = (WIENER_BRIDGE, SUB_PLAIN, SUB_STMT, SUB_EMB)
SUBORDINATOR_KINDS = (SUB_PLAIN, SUB_STMT, SUB_EMB)

DEFAULT_EPS = 1e-6


class LimitError(ValueError):
    pass


@dataclass
class SubordinatorSample:
    alpha: float
    eps: float
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        if self.x.shape != self.y.shape:
            raise LimitError("atom coordinate arrays differ in length")
        if np.any(np.diff(self.x) < 0):
            raise LimitError("atoms must be sorted by position")
        self._prefix = np.concatenate(([0.0], np.cumsum(self.y)))

    @property
    def atoms(self) -> list:
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def zeta1(self) -> float:
        return float(self._prefix[-1])

    def zeta_at(self, t):
        """zeta_t = sum of y_k over x_k <= t (inclusive, right-continuous)."""
        k = np.searchsorted(self.x, t, side="right")
        return self._prefix[k]

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        buf = io.StringIO()
        buf.write("x,y\n")
        for xv, yv in zip(self.x, self.y):
            buf.write(f"{format_float(xv)},{format_float(yv)}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="\n")
        return text

    @classmethod
    def from_csv(cls, path: Union[str, Path], alpha: float, eps: float) -> "SubordinatorSample":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0].strip() != "x,y":
            raise LimitError(f"{path}: expected header 'x,y'")
        pairs = [tuple(map(float, line.split(","))) for line in lines[1:] if line.strip()]
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        return cls(alpha, eps, x, y)


def _check_unit(*values: float) -> None:
    for v in values:
        if not (0.0 <= v <= 1.0):
            raise LimitError(f"time {v!r} outside [0, 1]")


def wiener_bridge_metric(s: float, t: float) -> float:
    _check_unit(s, t)
    u = abs(t - s)
    return math.sqrt(u * (1.0 - u))


def sample_subordinator(alpha: float, eps: float = DEFAULT_EPS,
                        stream_key: Union[KeyPart, Sequence[KeyPart]] = 0,
                        master_seed: int = 0) -> SubordinatorSample:
    """LePage construction of the truncated subordinator.

    Unit-rate Poisson arrivals Gamma_1 < Gamma_2 < ... map to jump sizes
    y_k = Gamma_k^(-1/alpha), which are the points of a Poisson process with
    tail intensity y^(-alpha); generation stops at the first y_k <= eps.
    Positions x_k are i.i.d. uniform on [0, 1) from a separate substream.
    """
    if not (0.0 < alpha < 1.0):
        raise LimitError("alpha out of range: must lie in (0, 1)")
    if not eps > 0:
        raise LimitError("eps must be positive")
    key = (stream_key,) if isinstance(stream_key, (str, int, np.integer)) else tuple(stream_key)
    gen_arrival = generator(master_seed, *key, "arrivals")
    gen_position = generator(master_seed, *key, "positions")

    expected = eps ** (-alpha)
    chunk = int(min(1 << 20, max(64, math.ceil(expected + 6.0 * math.sqrt(expected) + 16))))
    inv_alpha = 1.0 / alpha
    pieces = []
    carry = 0.0
    while True:
        gaps = gen_arrival.standard_exponential(chunk)
        gaps[0] += carry
        arrivals = np.cumsum(gaps)
        sizes = arrivals ** (-inv_alpha)
        below = np.nonzero(sizes <= eps)[0]
        if below.size:
            pieces.append(sizes[:below[0]])
            break
        pieces.append(sizes)
        carry = arrivals[-1]
    y = np.concatenate(pieces)
    x = gen_position.random(y.size)
    order = np.argsort(x, kind="stable")
    return SubordinatorSample(alpha, eps, x[order], y[order])


def _embedding_sq(u, A, Z):
    # [DERIVED] For s <= t the l2 points differ by sum over atoms: coefficient
    # (1 - u) y_k^(1/2) on atoms with s < x_k <= t and -u y_k^(1/2) elsewhere,
    # so the squared norm is (1 - u)^2 A + u^2 (Z - A) with A = zeta_t - zeta_s.
    return (1.0 - u) ** 2 * A + u**2 * np.maximum(Z - A, 0.0)


def limit_metric(kind: str, s: float, t: float, sample: Optional[SubordinatorSample] = None) -> float:
    if kind not in KINDS:
        raise LimitError(f"unknown limit metric {kind!r}")
    _check_unit(s, t)
    if kind == WIENER_BRIDGE:
        return wiener_bridge_metric(s, t)
    if sample is None:
        raise LimitError(f"{kind} requires a subordinator sample")
    lo, hi = min(s, t), max(s, t)
    A = float(sample.zeta_at(hi) - sample.zeta_at(lo))
    u = hi - lo
    if kind == SUB_PLAIN:
        return math.sqrt(A)
    if kind == SUB_STMT:
        return math.sqrt(abs(A - u * sample.zeta1))
    return math.sqrt(float(_embedding_sq(u, A, sample.zeta1)))


def limit_distance_matrix(kind: str, m: int, sample: Optional[SubordinatorSample] = None) -> DistanceMatrix:
    """Evaluate ``limit_metric`` on the grid i/m, i = 0..m."""
    if kind not in KINDS:
        raise LimitError(f"unknown limit metric {kind!r}")
    if m < 1:
        raise LimitError("grid size m must be >= 1")
    grid = np.arange(m + 1) / m
    u = np.abs(grid[:, None] - grid[None, :])
    if kind == WIENER_BRIDGE:
        return DistanceMatrix(np.sqrt(u * (1.0 - u)))
    if sample is None:
        raise LimitError(f"{kind} requires a subordinator sample")
    z = sample.zeta_at(grid)
    A = np.abs(z[:, None] - z[None, :])
    if kind == SUB_PLAIN:
        D = np.sqrt(A)
    elif kind == SUB_STMT:
        D = np.sqrt(np.abs(A - u * sample.zeta1))
    else:
        D = np.sqrt(_embedding_sq(u, A, sample.zeta1))
    np.fill_diagonal(D, 0.0)
    return DistanceMatrix(D)


def deterministic_consistency(u: float) -> Tuple[float, float]:
    """Both subordinator formulas with zeta_t replaced by the drift t.

    Returns ``(emb, stmt)`` for a pair of times at distance u; emb reproduces
    sqrt(u (1 - u)) while stmt is identically zero.
    """
    _check_unit(u)
    emb = math.sqrt(float(_embedding_sq(u, u, 1.0)))
    stmt = math.sqrt(abs(u - u * 1.0))
    return emb, stmt
