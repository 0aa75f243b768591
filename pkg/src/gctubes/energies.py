"""Scalar energies of tube arrangements, point sets and planar line pencils.

All double sums run over ordered pairs ``i != j``; each unordered pair is
evaluated once and counted twice.  Totals are accumulated with
:func:`math.fsum` so the reduction order never matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CoincidentCircles, DomainError, DuplicatePoints, ParallelLines
from .overlap import (
    _BOUNDARY_RTOL,
    DEFAULT_MC_SAMPLES,
    band_area,
    band_mc_overlap,
    lens_area,
)
from .sphere import COINCIDENT_TOL, Arrangement, UnitVector, clamp_array

TWO_PI = 2.0 * math.pi
#: per-pair breakdowns are kept by default only up to this many circles
PAIR_TERMS_MAX_N = 512

EXACT, MONTE_CARLO, CAPPED = 0, 1, 2
_METHOD_NAMES = {EXACT: "exact_lens", MONTE_CARLO: "monte_carlo", CAPPED: "capped"}


@dataclass
class EnergyReport:
    """Result of an overlap-type energy evaluation.

    ``method_counts`` counts unordered pairs by how their overlap was
    obtained.  ``mc_error`` bounds the Monte Carlo noise in ``total`` (sum of
    first-order propagated standard errors over all MC pairs; 0 if none).
    """

    total: float
    s: float
    pair_terms: Optional[np.ndarray] = None
    method_counts: dict = field(default_factory=dict)
    mc_error: float = 0.0

    @property
    def mc_fraction(self) -> float:
        n_pairs = sum(self.method_counts.values())
        return self.method_counts.get("monte_carlo", 0) / n_pairs if n_pairs else 0.0


def _as_points(points) -> np.ndarray:
    if isinstance(points, Arrangement):
        return np.asarray(points.poles)
    pts = list(points) if not isinstance(points, np.ndarray) else points
    if len(pts) and isinstance(pts[0], UnitVector):
        return np.array([p.as_array() for p in pts])
    P = np.asarray(pts, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3:
        raise DomainError(f"expected an (n, 3) array of points, got shape {P.shape}")
    return P


def _upper_dots(P: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    i, j = np.triu_indices(P.shape[0], k=1)
    return i, j, np.einsum("ij,ij->i", P[i], P[j])


def overlaps_from_dots(dots, w: float, mc_samples: int = DEFAULT_MC_SAMPLES, seed=0):
    """Single-lens overlaps for pole dot products ``dots``.

    Returns ``(values, std_errors, methods)`` arrays; ``methods`` holds the
    codes ``EXACT``, ``MONTE_CARLO`` or ``CAPPED``.
    """
    d = np.abs(np.asarray(dots, dtype=float))
    alpha = np.arccos(clamp_array(d, 0.0, 1.0))
    values = np.zeros_like(alpha)
    errors = np.zeros_like(alpha)
    methods = np.full(alpha.shape, MONTE_CARLO, dtype=np.int8)

    capped = d >= 1.0 - COINCIDENT_TOL
    exact = ~capped & (alpha >= 2.0 * w * (1.0 - _BOUNDARY_RTOL)) & (w <= math.pi / 4)
    methods[capped] = CAPPED
    methods[exact] = EXACT
    values[capped] = 0.5 * band_area(w)
    if np.any(exact):
        values[exact] = lens_area(np.clip(alpha[exact], 2.0 * w, math.pi / 2), w)
    for k in np.flatnonzero(methods == MONTE_CARLO):
        est = band_mc_overlap(float(alpha.flat[k]), w, mc_samples, seed)
        values.flat[k] = est.value
        errors.flat[k] = est.std_error
    return values, errors, methods


def _method_counts(methods: np.ndarray) -> dict:
    return {name: int(np.count_nonzero(methods == code)) for code, name in _METHOD_NAMES.items()}


def _power(values: np.ndarray, s: float) -> np.ndarray:
    return np.ones_like(values) if s == 0 else values ** s


def _pair_matrix(n: int, i: np.ndarray, j: np.ndarray, terms: np.ndarray) -> np.ndarray:
    M = np.zeros((n, n))
    M[i, j] = terms
    M[j, i] = terms
    return M


def overlap_energy(
    arr: Arrangement,
    s: float,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    seed=0,
    keep_pairs: Optional[bool] = None,
) -> EnergyReport:
    """Sum over ordered pairs of the pair overlap raised to the power ``s``."""
    if s < 0:
        raise DomainError(f"exponent must be non-negative, got {s!r}")
    P = np.asarray(arr.poles)
    i, j, dots = _upper_dots(P)
    values, errors, methods = overlaps_from_dots(dots, arr.half_width, mc_samples, seed)
    terms = _power(values, s)
    total = 2.0 * math.fsum(terms)
    mc = methods == MONTE_CARLO
    mc_error = 0.0
    if s > 0 and np.any(mc):
        mc_error = 2.0 * math.fsum(s * values[mc] ** (s - 1.0) * errors[mc])
    if keep_pairs is None:
        keep_pairs = arr.n <= PAIR_TERMS_MAX_N
    return EnergyReport(
        total=total,
        s=float(s),
        pair_terms=_pair_matrix(arr.n, i, j, terms) if keep_pairs else None,
        method_counts=_method_counts(methods),
        mc_error=mc_error,
    )


def riesz_energy(points, s: float) -> float:
    """Riesz ``s``-energy: sum over ordered pairs of ``|p_i - p_j|^-s``.

    Raises:
        DuplicatePoints: if two points are closer than 1e-12.
    """
    if not s > 0:
        raise DomainError(f"Riesz exponent must be positive, got {s!r}")
    P = _as_points(points)
    i, j = np.triu_indices(P.shape[0], k=1)
    dist = np.linalg.norm(P[i] - P[j], axis=1)
    if np.any(dist < 1e-12):
        raise DuplicatePoints("two points coincide")
    return 2.0 * math.fsum(dist ** -s)


def antipodal_energy(poles, s: float) -> float:
    """Sum over ordered pairs of ``(1 - <p_i, p_j>^2)^(-s/2)``.

    Each term is ``1 / sin(angle)^s`` for the crossing angle of the two
    circles, so the value does not depend on the sign of any pole.
    """
    P = _as_points(poles)
    _, _, dots = _upper_dots(P)
    d = np.abs(dots)
    if np.any(d >= 1.0 - COINCIDENT_TOL):
        raise CoincidentCircles("two poles are equal or antipodal")
    sin2 = (1.0 - d) * (1.0 + d)
    return 2.0 * math.fsum(sin2 ** (-0.5 * s))


@dataclass(frozen=True)
class PlanarArrangement:
    """``n`` lines in the plane, given by their direction angles.

    Angles are reduced mod ``2 pi`` and sorted; the tube half-width is
    ``1 / n``.
    """

    angles: tuple

    def __post_init__(self):
        a = np.sort(np.mod(np.asarray(self.angles, dtype=float), TWO_PI))
        if a.size < 2:
            raise DomainError("need at least two lines")
        if np.any(np.diff(a) <= 0.0):
            raise DuplicatePoints("duplicate line angles")
        object.__setattr__(self, "angles", tuple(float(x) for x in a))

    @property
    def n(self) -> int:
        return len(self.angles)

    @property
    def half_width(self) -> float:
        return 1.0 / self.n

    @classmethod
    def pencil(cls, n: int) -> "PlanarArrangement":
        """Equal-angle pencil: directions ``k pi / n`` for ``k < n``."""
        return cls(tuple(k * math.pi / n for k in range(n)))


def folded_line_angles(angles: Sequence[float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = np.asarray(angles, dtype=float)
    i, j = np.triu_indices(a.size, k=1)
    diff = np.abs(a[i] - a[j])
    torus = np.minimum(diff, TWO_PI - diff)
    return i, j, np.minimum(torus, math.pi - torus)


def planar_overlap_energy(arr: PlanarArrangement, s: float, keep_pairs: Optional[bool] = None) -> EnergyReport:
    """Planar analogue of :func:`overlap_energy` using the exact rhomboid area.

    Raises:
        ParallelLines: if two lines are parallel (infinite overlap).
    """
    if s < 0:
        raise DomainError(f"exponent must be non-negative, got {s!r}")
    n = arr.n
    i, j, folded = folded_line_angles(arr.angles)
    # 1e-15 absorbs the rounding of k*pi/n - pi for opposite directions
    if np.any(folded <= 1e-15):
        raise ParallelLines("two lines are parallel")
    terms = _power(4.0 / (n * n * np.sin(folded)), s)
    if keep_pairs is None:
        keep_pairs = n <= PAIR_TERMS_MAX_N
    return EnergyReport(
        total=2.0 * math.fsum(terms),
        s=float(s),
        pair_terms=_pair_matrix(n, i, j, terms) if keep_pairs else None,
        method_counts={"flat": int(terms.size)},
    )


def circular_inverse_sum(xs: Iterable[float]) -> float:
    """``sum_{i != j} 1/|x_i - x_j| + 1/(2 pi - |x_i - x_j|)`` for points of ``[0, 2 pi)``."""
    x = np.asarray(list(xs), dtype=float)
    if x.size < 2:
        raise DomainError("need at least two points")
    if np.any(x < 0.0) or np.any(x >= TWO_PI):
        raise DomainError("points must lie in [0, 2 pi)")
    i, j = np.triu_indices(x.size, k=1)
    diff = np.abs(x[i] - x[j])
    if np.any(diff == 0.0):
        raise DuplicatePoints("repeated circle point")
    return 2.0 * math.fsum(np.concatenate([1.0 / diff, 1.0 / (TWO_PI - diff)]))


def harmonic(m: int) -> float:
    return math.fsum(1.0 / k for k in range(1, m + 1))


def circular_sum_bound(n: int) -> float:
    """Sharp lower bound ``(n^2 / pi) H_{n-1}`` for :func:`circular_inverse_sum`,
    attained by equally spaced points."""
    if n < 2:
        raise DomainError("need n >= 2")
    return n * n / math.pi * harmonic(n - 1)


def rate_bound(n: int, s: float, setting: str = "sphere") -> float:
    """Asymptotic rate (without constant) of the minimal overlap energy.

    ``setting='sphere'``: ``n^(2-2s)`` for ``s < 2``, ``log(n)/n^2`` at ``s = 2``,
    ``n^(1-3s/2)`` above.  ``setting='plane'``: ``n^(2-2s)`` for ``s < 1``,
    ``log n`` at ``s = 1``, ``n^(1-s)`` above.  Natural log.
    """
    if n < 2 or s < 0:
        raise DomainError("need n >= 2 and s >= 0")
    if setting == "sphere":
        if s < 2:
            return float(n) ** (2 - 2 * s)
        if s == 2:
            return math.log(n) / n**2
        return float(n) ** (1 - 1.5 * s)
    if setting == "plane":
        if s < 1:
            return float(n) ** (2 - 2 * s)
        if s == 1:
            return math.log(n)
        return float(n) ** (1 - s)
    raise ValueError(f"unknown setting {setting!r}")


def delta_limit_curve(poles, s: float, deltas: Sequence[float]) -> list[tuple[float, float]]:
    """Overlap energy of shrinking ``delta``-tubes, normalized by ``(4 delta^2)^s``.

    As ``delta -> 0`` the normalized sums converge to
    :func:`antipodal_energy` of the same poles.

    Raises:
        DomainError: if ``deltas`` is not strictly decreasing or some
            ``2 delta`` exceeds the smallest crossing angle.
    """
    P = _as_points(poles)
    i, j, dots = _upper_dots(P)
    d = np.abs(dots)
    if np.any(d >= 1.0 - COINCIDENT_TOL):
        raise CoincidentCircles("two poles are equal or antipodal")
    alpha = np.arctan2(np.linalg.norm(np.cross(P[i], P[j]), axis=1), d)
    deltas = [float(x) for x in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise DomainError("deltas must be strictly decreasing")
    curve = []
    for delta in deltas:
        if not delta > 0 or 2.0 * delta > alpha.min():
            raise DomainError(f"delta {delta!r} exceeds half the smallest crossing angle")
        ratio = lens_area(alpha, delta) / (4.0 * delta * delta)
        curve.append((delta, 2.0 * math.fsum(ratio ** s)))
    return curve
