"""Overlap areas of great-circle tubes.

Convention
----------
Two distinct great circles cross at two antipodal points, so the intersection
of their tubes consists of two congruent, centrally symmetric pieces.  The
*pair overlap* throughout this package is the area of ONE of those pieces,
i.e. half of the full spherical intersection area.  This is the quantity the
closed form in :func:`lens_area` returns, the one the flat rhomboid
``(2w)^2 / sin(alpha)`` approximates, and the one used in every energy.  Monte
Carlo estimators of pair overlaps halve their raw intersection estimate to
match.  Whole-sphere integrals (:func:`band_area`, :func:`mc_union_area`,
:func:`mc_second_moment`) are plain areas on ``S^2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from . import kernels
from .errors import DomainError
from .sphere import (
    COINCIDENT_TOL,
    Arrangement,
    GreatCircleTube,
    VectorLike,
    as_vec,
    uniform_sphere_samples,
)

FOUR_PI = 4.0 * math.pi
METHODS = ("exact_lens", "flat", "monte_carlo", "capped")
DEFAULT_MC_SAMPLES = 100_000
MIN_MC_SAMPLES = 1_000
# fixed chunk size keeps MC results independent of the worker count
_CHUNK = 250_000
# relative slack on the alpha >= 2w boundary, absorbs rounding in arccos
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    std_error: float = 0.0
    method: str = "exact_lens"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (0.0 <= self.value <= FOUR_PI) or self.std_error < 0.0:
            raise DomainError(f"invalid area estimate {self.value!r} +- {self.std_error!r}")

    def __float__(self) -> float:
        return self.value


def _check_width(w: float) -> None:
    if not 0.0 < w < math.pi / 2:
        raise DomainError(f"half-width must lie in (0, pi/2), got {w!r}")


def band_area(w: float) -> float:
    """Area ``4 pi sin(w)`` of the tube of geodesic half-width ``w``."""
    _check_width(w)
    return FOUR_PI * math.sin(w)


def flat_strip_overlap(alpha: float, w: float) -> float:
    """Rhomboid area where two planar strips of half-width ``w`` cross at ``alpha``."""
    if not alpha > 0.0:
        raise DomainError(f"crossing angle must be positive, got {alpha!r}")
    if not w > 0.0:
        raise DomainError(f"half-width must be positive, got {w!r}")
    return (2.0 * w) ** 2 / math.sin(alpha)


def _check_lens_domain(alpha: np.ndarray, w: float) -> None:
    if not 0.0 < w <= math.pi / 4:
        raise DomainError(f"half-width must lie in (0, pi/4] for a lens, got {w!r}")
    if np.any(alpha < 2.0 * w * (1.0 - _BOUNDARY_RTOL)) or np.any(
        alpha > math.pi / 2 * (1.0 + _BOUNDARY_RTOL)
    ):
        raise DomainError(f"lens formula needs 2w <= alpha <= pi/2 (w = {w!r})")


def lens_area(alpha, w: float) -> np.ndarray:
    """Exact area of one lens for crossing angles ``alpha`` (array) and width ``w``.

    Evaluates the four-term arcsin/arccos closed form, rearranged so it stays
    accurate to ~1e-15 relative even for ``w`` around 1e-6 and at the
    ``alpha = 2w`` edge: each ``arccos(x)`` becomes ``pi/2 - arcsin(x)``, the
    two arcsin terms are merged through ``sin(a + b)`` with the difference of
    square roots rationalized, and every ``1 - x^2`` is formed as a product
    of sines and cosines instead of a difference.

    Raises:
        DomainError: unless ``2w <= alpha <= pi/2``.
    """
    alpha = np.asarray(alpha, dtype=float)
    _check_lens_domain(alpha, w)
    alpha = np.clip(alpha, 2.0 * w, math.pi / 2)
    t = math.tan(w)
    t2 = t * t
    cw = math.cos(w)
    half = 0.5 * alpha
    sh = np.sin(half)
    # 1 -+ x written as products so nothing cancels where x -> 1 at alpha = 2w
    lo, hi = np.sin(half - w), np.sin(half + w)
    # arcsin((1 -+ cos a) / (cot w sin a)) = arcsin(t tan(a/2)), arcsin(t cot(a/2))
    x2 = t / np.tan(half)
    root_x2 = np.sqrt(np.clip(lo * hi, 0.0, None)) / (sh * cw)
    arc = np.arcsin(np.clip(t * np.tan(half), 0.0, 1.0)) + np.arctan2(x2, root_x2)
    A = np.cos(alpha) / cw**2
    u = A - t2
    v = -A - t2
    # 1 - v^2 = (1 - v)(1 + v) and 1 - u^2 = (1 - u)(1 + u) in product form
    root_v = 2.0 * np.cos(half) * np.sqrt(np.clip(lo * hi, 0.0, None)) / cw**2
    root_u = 2.0 * sh * np.sqrt(np.cos(half - w) * np.cos(half + w)) / cw**2
    S = root_u + root_v
    with np.errstate(divide="ignore", invalid="ignore"):
        r = -4.0 * t2 / (S + 4.0 * t2 * t2 / S)
    r = np.where(S > 0.0, r, -1.0)
    # arcsin(u) + arcsin(v) lies in [-pi, 0]; pick the branch by the sign of its cosine
    pair_sum = np.arcsin(np.clip(r, -1.0, 1.0))
    pair_sum = np.where(root_u * root_v - u * v < 0.0, -math.pi - pair_sum, pair_sum)
    return 4.0 * math.sin(w) * arc + 2.0 * pair_sum


def lens_overlap_exact(alpha: float, w: float) -> AreaEstimate:
    """Exact single-lens overlap of two tubes of half-width ``w`` crossing at ``alpha``."""
    return AreaEstimate(float(lens_area(alpha, w)), 0.0, "exact_lens")


def lens_overlap_bounds(alpha: float, w: float) -> tuple[float, float]:
    """Two-sided bracket ``((2w)^2/sin a, (pi-2)(2w)^2/sin a)`` on the lens area."""
    _check_lens_domain(np.asarray(alpha, dtype=float), w)
    lower = (2.0 * w) ** 2 / math.sin(alpha)
    return lower, (math.pi - 2.0) * lower


def fold_angle(alpha: float) -> float:
    """Map a crossing angle in ``[0, pi]`` to the acute one in ``[0, pi/2]``."""
    return math.pi - alpha if alpha > math.pi / 2 else alpha


def _sample_chunks(seed, samples: int) -> Iterator[tuple[int, np.random.Generator]]:
    nchunks = -(-samples // _CHUNK)
    children = np.random.SeedSequence(seed).spawn(nchunks)
    for k, child in enumerate(children):
        size = min(_CHUNK, samples - k * _CHUNK)
        yield size, np.random.default_rng(child)


def _map_chunks(fn, seed, samples: int, workers: int) -> list:
    tasks = list(_sample_chunks(seed, samples))
    if workers <= 1 or len(tasks) == 1:
        return [fn(size, rng) for size, rng in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def _check_samples(samples: int) -> None:
    if samples < MIN_MC_SAMPLES:
        raise DomainError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")


def _binomial(scale: float, hits: int, samples: int) -> tuple[float, float]:
    p = hits / samples
    return scale * p, scale * math.sqrt(p * (1.0 - p) / samples)


def mc_pair_overlap(
    a: VectorLike, b: VectorLike, w: float, samples: int = 1_000_000, seed=0, workers: int = 1
) -> AreaEstimate:
    """Monte Carlo single-lens overlap from uniform points on the whole sphere.

    Counts samples inside both tubes; the full intersection estimate
    ``4 pi hits / N`` is halved (the two pieces are congruent).
    """
    _check_width(w)
    _check_samples(samples)
    a, b = as_vec(a), as_vec(b)
    sin_w = math.sin(w)

    def count(size, rng):
        return kernels.pair_hits(uniform_sphere_samples(rng, size), a, b, sin_w)

    hits = sum(_map_chunks(count, seed, samples, workers))
    value, err = _binomial(2.0 * math.pi, hits, samples)
    return AreaEstimate(value, err, "monte_carlo")


def band_mc_overlap(alpha: float, w: float, samples: int = DEFAULT_MC_SAMPLES, seed=0) -> AreaEstimate:
    """Monte Carlo single-lens overlap at crossing angle ``alpha``, any ``alpha``.

    Samples uniformly inside the first tube only (uniform height along the
    pole, uniform azimuth) and counts how many land in the second tube.  The
    pair is placed in a fixed frame, so the estimate is a deterministic
    function of ``(alpha, w, samples, seed)``.
    """
    _check_width(w)
    _check_samples(samples)
    sin_w = math.sin(w)
    sa, ca = math.sin(alpha), math.cos(alpha)

    def count(size, rng):
        z = rng.uniform(-sin_w, sin_w, size)
        phi = rng.uniform(0.0, 2.0 * math.pi, size)
        return kernels.band_hits(z, phi, sa, ca, sin_w)

    hits = sum(_map_chunks(count, seed, samples, 1))
    value, err = _binomial(0.5 * band_area(w), hits, samples)
    return AreaEstimate(value, err, "monte_carlo")


def pair_overlap(
    a: VectorLike, b: VectorLike, w: float, samples: int = DEFAULT_MC_SAMPLES, seed=0
) -> AreaEstimate:
    """Single-lens overlap of the tubes around poles ``a`` and ``b``.

    Uses the closed form when the acute crossing angle is at least ``2w``,
    a band-restricted Monte Carlo estimate below that, and returns half the
    band area (method ``capped``) when the circles coincide.
    """
    _check_width(w)
    a, b = as_vec(a), as_vec(b)
    d = abs(float(np.dot(a, b)))
    if d >= 1.0 - COINCIDENT_TOL:
        return AreaEstimate(0.5 * band_area(w), 0.0, "capped")
    alpha = math.atan2(float(np.linalg.norm(np.cross(a, b))), d)
    return overlap_at_angle(alpha, w, samples, seed)


def overlap_at_angle(alpha: float, w: float, samples: int = DEFAULT_MC_SAMPLES, seed=0) -> AreaEstimate:
    """Dispatch on an acute crossing angle; see :func:`pair_overlap`."""
    if alpha >= 2.0 * w * (1.0 - _BOUNDARY_RTOL) and w <= math.pi / 4:
        return lens_overlap_exact(min(max(alpha, 2.0 * w), math.pi / 2), w)
    if math.cos(alpha) >= 1.0 - COINCIDENT_TOL:
        return AreaEstimate(0.5 * band_area(w), 0.0, "capped")
    return band_mc_overlap(alpha, w, samples, seed)


TubeSet = Union[Arrangement, GreatCircleTube]


def _poles_and_width(arr: TubeSet) -> tuple[np.ndarray, float]:
    if isinstance(arr, GreatCircleTube):
        return arr.pole.as_array()[None, :], arr.half_width
    return np.asarray(arr.poles), arr.half_width


def _tube_count_stats(arr: TubeSet, samples: int, seed, workers: int) -> tuple[int, float, float]:
    """Return (samples with count > 0, sum of count^2, sum of count^4)."""
    _check_samples(samples)
    poles, w = _poles_and_width(arr)
    sin_w = math.sin(w)

    def stats(size, rng):
        c = kernels.tube_counts(uniform_sphere_samples(rng, size), poles, sin_w).astype(np.int64)
        c2 = c * c
        return int(np.count_nonzero(c)), float(c2.sum()), float((c2 * c2).sum())

    parts = _map_chunks(stats, seed, samples, workers)
    return (
        sum(p[0] for p in parts),
        math.fsum(p[1] for p in parts),
        math.fsum(p[2] for p in parts),
    )


def mc_union_area(arr: TubeSet, samples: int = 1_000_000, seed=0, workers: int = 1) -> AreaEstimate:
    """Monte Carlo area of the union of all tubes (an arrangement or a single tube)."""
    covered, _, _ = _tube_count_stats(arr, samples, seed, workers)
    value, err = _binomial(FOUR_PI, covered, samples)
    return AreaEstimate(value, err, "monte_carlo")


def mc_second_moment(arr: TubeSet, samples: int = 1_000_000, seed=0, workers: int = 1) -> "MomentEstimate":
    """Monte Carlo estimate of the integral of ``(sum_i chi_i)^2`` over the sphere.

    The value can exceed ``4 pi`` when tubes pile up, so the result is a
    :class:`MomentEstimate` rather than an :class:`AreaEstimate`.
    """
    _, s2, s4 = _tube_count_stats(arr, samples, seed, workers)
    mean = s2 / samples
    var = max(s4 / samples - mean * mean, 0.0)
    return MomentEstimate(FOUR_PI * mean, FOUR_PI * math.sqrt(var / samples))


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    std_error: float
    method: str = "monte_carlo"

    def __float__(self) -> float:
        return self.value
