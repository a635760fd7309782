"""Increment laws for high-dimensional random walks.

Three families are supported:

``gaussian-isotropic``
    i.i.d. N(0, 1/d) coordinates, so E||X||^2 = 1.
``rademacher``
    i.i.d. coordinates uniform on {-1/sqrt(d), +1/sqrt(d)}; ||X||^2 = 1 surely.
``pareto-sphere``
    X = R^(1/2) * Theta with P(R > x) = x^(-alpha) for x >= 1 and Theta
    uniform on the unit sphere.  With a(n) = n^(1/alpha) the tail identity
    n * P(||X||^2 > x a(n)) = x^(-alpha) holds exactly for x >= 1/a(n).

The first two satisfy the square-integrable conditions (centred, normalized,
uncorrelated, uniformly integrable, negligible components); the third is the
heavy-tailed regime with Levy measure alpha * x^(-alpha-1) dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .rng import KeyPart, generator

GAUSSIAN = "gaussian-isotropic"
RADEMACHER = "rademacher"
PARETO = "pareto-sphere"
FAMILIES = (GAUSSIAN, RADEMACHER, PARETO)
L2_FAMILIES = (GAUSSIAN, RADEMACHER)

StreamKey = Union[KeyPart, Sequence[KeyPart]]


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class LevyMeasureSpec:
    """The pure-power Levy measure nu(dx) = alpha x^(-alpha-1) dx on (0, inf)."""

    alpha: float

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return self.alpha * x ** (-self.alpha - 1.0)

    def tail(self, s):
        """nu((s, inf)) = s^(-alpha)."""
        return np.asarray(s, dtype=float) ** (-self.alpha)

    def scaling(self, n) -> float:
        """a(n) = n^(1/alpha)."""
        return float(n) ** (1.0 / self.alpha)

    def integrability_constant(self) -> float:
        """Closed form of int_0^inf min(1, x) nu(dx)."""
        return self.alpha / (1.0 - self.alpha) + 1.0

    def small_jump_mass(self, eps: float) -> float:
        """int_0^eps x nu(dx): expected subordinator mass carried by jumps <= eps."""
        return self.alpha / (1.0 - self.alpha) * eps ** (1.0 - self.alpha)


@dataclass(frozen=True)
class IncrementModel:
    family: str
    d: int
    alpha: Optional[float]
    master_seed: int

    @property
    def is_l2(self) -> bool:
        return self.family in L2_FAMILIES

    @property
    def levy(self) -> LevyMeasureSpec:
        if self.family != PARETO:
            raise ModelError(f"{self.family} has no Levy measure")
        return LevyMeasureSpec(self.alpha)

    def scaling(self, n: int) -> float:
        """Normalizing sequence for squared distances: n, or a(n) in the heavy-tailed case."""
        if self.family == PARETO:
            return self.levy.scaling(n)
        return float(n)


@dataclass(frozen=True)
class ConditionDiagnostics:
    max_component_second_moment: Optional[float]
    is_L2: bool


def build_model(family: str, d: int, alpha: Optional[float] = None, master_seed: int = 0) -> IncrementModel:
    if family not in FAMILIES:
        raise ModelError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ModelError("dimension d must be a positive integer")
    if family == PARETO:
        if alpha is None:
            raise ModelError("pareto-sphere requires alpha")
        if not (0.0 < alpha < 1.0):
            raise ModelError("alpha out of range: must lie in (0, 1)")
        alpha = float(alpha)
    elif alpha is not None:
        raise ModelError(f"alpha is only meaningful for {PARETO}, not {family}")
    if master_seed < 0 or master_seed >= 2**64:
        raise ModelError("master_seed must be a 64-bit unsigned integer")
    return IncrementModel(family, int(d), alpha, int(master_seed))


def _key(stream_key: StreamKey) -> tuple:
    if isinstance(stream_key, (str, int, np.integer)):
        return (stream_key,)
    return tuple(stream_key)


def iter_increments(model: IncrementModel, count: int, stream_key: StreamKey,
                    chunk_rows: int = 1024) -> Iterator[np.ndarray]:
    """Yield the rows of ``sample_increments(model, count, stream_key)`` in chunks.

    Each family draws from dedicated generators that are consumed strictly in
    order, so concatenating the chunks reproduces the one-shot batch bit for bit
    whatever ``chunk_rows`` is.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if chunk_rows < 1:
        raise ValueError("chunk_rows must be >= 1")
    key = _key(stream_key)
    d = model.d
    scale = 1.0 / math.sqrt(d)
    if model.family == GAUSSIAN:
        gen = generator(model.master_seed, *key, "normal")
    elif model.family == RADEMACHER:
        gen = generator(model.master_seed, *key, "sign")
    else:
        gen_dir = generator(model.master_seed, *key, "direction")
        gen_rad = generator(model.master_seed, *key, "radius")
        inv_alpha = 1.0 / model.alpha

    done = 0
    while done < count:
        rows = min(chunk_rows, count - done)
        if model.family == GAUSSIAN:
            out = gen.standard_normal((rows, d))
            out *= scale
        elif model.family == RADEMACHER:
            out = np.where(gen.random((rows, d)) < 0.5, -scale, scale)
        else:
            out = gen_dir.standard_normal((rows, d))
            norms = np.sqrt(np.einsum("ij,ij->i", out, out))
            # 1 - U lies in (0, 1], so R >= 1 and never infinite from a zero draw
            radius = (1.0 - gen_rad.random(rows)) ** (-inv_alpha)
            out *= (np.sqrt(radius) / norms)[:, None]
        yield out
        done += rows


def sample_increments(model: IncrementModel, count: int, stream_key: StreamKey) -> np.ndarray:
    """``count`` i.i.d. increments as a (count, d) array; row k is X_{k+1}."""
    chunks = list(iter_increments(model, count, stream_key, chunk_rows=count))
    return chunks[0]


def distance_scale(model: IncrementModel, n: int) -> float:
    """Factor applied to Euclidean distances: n^(-1/2), or a(n)^(-1/2) = n^(-1/(2 alpha))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if model.family == PARETO:
        return float(n) ** (-0.5 / model.alpha)
    return float(n) ** -0.5


def condition_diagnostics(model: IncrementModel) -> ConditionDiagnostics:
    if model.is_l2:
        # exchangeable coordinates sharing E||X||^2 = 1
        return ConditionDiagnostics(1.0 / model.d, True)
    return ConditionDiagnostics(None, False)


def truncated_mean_condition(model: IncrementModel, s: float, n: int) -> float:
    """(n / a(n)) E[||X||^2 ; ||X||^2 <= s a(n)] for the pareto-sphere model.

    Closed form: alpha/(1-alpha) * s^(1-alpha) * (1 - (s a(n))^-(1-alpha))^+,
    which tends to 0 as s -> 0 uniformly in n.
    """
    if model.family != PARETO:
        raise ModelError("truncated mean condition is stated for the heavy-tailed family")
    if s <= 0:
        raise ValueError("s must be positive")
    a = model.scaling(n)
    one_minus = 1.0 - model.alpha
    bracket = max(0.0, 1.0 - (s * a) ** (-one_minus))
    return model.alpha / one_minus * s**one_minus * bracket


def truncated_first_moment(model: IncrementModel, s: float, n: int) -> np.ndarray:
    """E[X ; ||X||^2 <= s a(n)]; zero for every family since X and -X share a law."""
    return np.zeros(model.d)
