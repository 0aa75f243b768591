"""Constructors for pole arrangements and separation diagnostics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import ConstructionFailed, DomainError
from .sphere import Arrangement, uniform_sphere_samples

KINDS = ("pencil", "greedy", "fibonacci", "random")

#: separation constant the greedy construction starts from
GREEDY_C = 0.5
#: the greedy construction gives up below this constant
GREEDY_C_MIN = 0.1
#: consecutive rejected candidates that trigger a 10% backoff of the constant
GREEDY_MAX_REJECT = 1_000_000
#: empirical lower bound of min_separation * sqrt(n) for fibonacci_poles, n <= 1000
FIBONACCI_C = 1.0

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
_CANDIDATE_BLOCK = 4096


def _width(n: int, half_width: Optional[float]) -> float:
    return 1.0 / n if half_width is None else float(half_width)


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise DomainError(f"need an integer n >= 2, got {n!r}")


def pencil(n: int, half_width: Optional[float] = None) -> Arrangement:
    """``n`` great circles through the poles ``(0, 0, +-1)`` at equal angles ``pi/n``."""
    _check_n(n)
    t = np.arange(n) * math.pi / n
    poles = np.column_stack([np.cos(t), np.sin(t), np.zeros(n)])
    return Arrangement(poles, _width(n, half_width))


def greedy_poles(n: int, seed=0, c: float = GREEDY_C) -> tuple[np.ndarray, float]:
    """Greedy well-separated poles; returns ``(poles, c_used)``.

    Candidates are drawn uniformly from the sphere and kept when their chord
    distance to every kept pole and its antipode is at least ``c / sqrt(n)``.
    After ``GREEDY_MAX_REJECT`` consecutive rejections the selection restarts
    with ``c`` lowered by 10%.
    """
    _check_n(n)
    rng = np.random.default_rng(seed)
    while c >= GREEDY_C_MIN:
        d = c / math.sqrt(n)
        # min(|p - q|, |p + q|)^2 = 2 - 2 |<p, q>|
        max_dot = 1.0 - 0.5 * d * d
        accepted = np.zeros((n, 3))
        n_acc, reject_run = 0, 0
        while n_acc < n and reject_run < GREEDY_MAX_REJECT:
            block = uniform_sphere_samples(rng, _CANDIDATE_BLOCK)
            n_acc, _, reject_run = kernels.greedy_fill(
                block, accepted, n_acc, max_dot, reject_run, GREEDY_MAX_REJECT
            )
        if n_acc == n:
            return accepted, c
        c *= 0.9
    raise ConstructionFailed(f"greedy selection stalled for n={n} (constant fell below {GREEDY_C_MIN})")


def greedy_separated(n: int, seed=0, c: float = GREEDY_C, half_width: Optional[float] = None) -> Arrangement:
    """Arrangement whose poles satisfy ``min |+-p_i +-p_j| >= c / sqrt(n)``."""
    poles, _ = greedy_poles(n, seed, c)
    return Arrangement(poles, _width(n, half_width))


def fibonacci_poles(n: int, half_width: Optional[float] = None) -> Arrangement:
    """Deterministic poles from a spherical Fibonacci lattice on the upper hemisphere.

    Uses the top half of a ``2n``-point lattice, i.e. heights
    ``1 - (k + 1/2)/n`` at golden-angle longitudes.  All poles have ``z > 0``.
    """
    _check_n(n)
    k = np.arange(n)
    z = 1.0 - (k + 0.5) / n
    r = np.sqrt(1.0 - z * z)
    phi = _GOLDEN_ANGLE * k
    poles = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return Arrangement(poles, _width(n, half_width))


def random_poles(n: int, seed=0, half_width: Optional[float] = None) -> Arrangement:
    _check_n(n)
    rng = np.random.default_rng(seed)
    return Arrangement(uniform_sphere_samples(rng, n), _width(n, half_width))


def min_separation(arr: Arrangement) -> float:
    """Smallest ``min(|p_i - p_j|, |p_i + p_j|)`` over pairs ``i < j``."""
    P = np.asarray(arr.poles)
    i, j = np.triu_indices(P.shape[0], k=1)
    minus = np.linalg.norm(P[i] - P[j], axis=1)
    plus = np.linalg.norm(P[i] + P[j], axis=1)
    return float(np.minimum(minus, plus).min())


def annulus_counts(arr: Arrangement, i: int) -> np.ndarray:
    """Histogram of chord distances from ``p_i`` to the doubled set ``{+-p_j : j != i}``.

    Bucket ``k`` (for ``k = 0 .. ceil(2 sqrt n)``) counts distances in
    ``[k / sqrt(n), (k + 1) / sqrt(n))``; the buckets sum to ``2n - 2``.
    """
    P = np.asarray(arr.poles)
    n = P.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"pole index {i} out of range for n={n}")
    others = np.delete(P, i, axis=0)
    doubled = np.concatenate([others, -others])
    dist = np.linalg.norm(doubled - P[i], axis=1)
    root = math.sqrt(n)
    kmax = math.ceil(2.0 * root)
    k = np.minimum(np.floor(dist * root).astype(int), kmax)
    return np.bincount(k, minlength=kmax + 1)


@dataclass(frozen=True)
class ConstructionSpec:
    """Serializable recipe for one arrangement."""

    kind: str
    n: int
    seed: int = 0
    half_width: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown construction {self.kind!r}; choose from {KINDS}")
        _check_n(self.n)
        if self.half_width is not None and not 0.0 < self.half_width < math.pi / 2:
            raise DomainError(f"half_width must lie in (0, pi/2), got {self.half_width!r}")

    def build(self) -> Arrangement:
        if self.kind == "pencil":
            return pencil(self.n, self.half_width)
        if self.kind == "greedy":
            return greedy_separated(self.n, self.seed, half_width=self.half_width)
        if self.kind == "fibonacci":
            return fibonacci_poles(self.n, self.half_width)
        return random_poles(self.n, self.seed, self.half_width)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ConstructionSpec":
        return cls(
            kind=data["kind"],
            n=int(data["n"]),
            seed=int(data.get("seed", 0)),
            half_width=None if data.get("half_width") is None else float(data["half_width"]),
        )
