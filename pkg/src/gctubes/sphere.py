"""Exact spherical primitives.

Points on the unit sphere double as poles of great circles: the circle with
pole ``p`` is ``{x : <x, p> = 0}``, and ``p`` and ``-p`` describe the same
circle.  Nothing here canonicalizes the sign of a pole; every function that
talks about circles is invariant under ``p -> -p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import CoincidentCircles, DomainError, NearZeroVector, NumericDomainError

#: Vectors with norm at or below this are rejected by :func:`make_unit`.
NEAR_ZERO = 1e-9
#: ``|<a, b>|`` at or above ``1 - COINCIDENT_TOL`` means the circles coincide.
COINCIDENT_TOL = 1e-12
#: Inverse-trig arguments may overshoot their domain by this much (rounding).
CLAMP_TOL = 1e-9
UNIT_TOL = 1e-12


def clamp(x: float, lo: float, hi: float, tol: float = CLAMP_TOL) -> float:
    """Clamp ``x`` into ``[lo, hi]``, raising if it is off by more than ``tol``."""
    if x < lo - tol or x > hi + tol:
        raise NumericDomainError(f"value {x!r} outside [{lo}, {hi}] by more than {tol}")
    return min(max(x, lo), hi)


def clamp_array(x: np.ndarray, lo: float, hi: float, tol: float = CLAMP_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size and (np.any(x < lo - tol) or np.any(x > hi + tol)):
        raise NumericDomainError(f"values outside [{lo}, {hi}] by more than {tol}")
    return np.clip(x, lo, hi)


@dataclass(frozen=True)
class UnitVector:
    """A point on the unit sphere ``S^2``."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > UNIT_TOL * 10:
            raise DomainError(f"not a unit vector (|v|^2 = {n2!r}); use make_unit")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __neg__(self) -> "UnitVector":
        return UnitVector(-self.x, -self.y, -self.z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    @classmethod
    def from_array(cls, v) -> "UnitVector":
        v = np.asarray(v, dtype=float)
        return make_unit(*v)


VectorLike = Union[UnitVector, Sequence[float], np.ndarray]


def as_vec(v: VectorLike) -> np.ndarray:
    if isinstance(v, UnitVector):
        return v.as_array()
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise DomainError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


def make_unit(x: float, y: float, z: float) -> UnitVector:
    """Normalize ``(x, y, z)`` onto the sphere."""
    norm = math.sqrt(x * x + y * y + z * z)
    if not norm > NEAR_ZERO:
        raise NearZeroVector(f"cannot normalize vector with norm {norm!r}")
    return UnitVector(x / norm, y / norm, z / norm)


def normalize_rows(P: np.ndarray) -> np.ndarray:
    """Normalize each row of an ``(n, 3)`` array; raises on near-zero rows."""
    P = np.asarray(P, dtype=float)
    norms = np.linalg.norm(P, axis=-1, keepdims=True)
    if np.any(norms <= NEAR_ZERO):
        raise NearZeroVector("cannot normalize a near-zero row")
    return P / norms


def geodesic_distance(p: VectorLike, q: VectorLike) -> float:
    """Great-circle distance in radians, in ``[0, pi]``.

    Equal to ``arccos <p, q>``; evaluated as ``atan2(|p x q|, <p, q>)``,
    which stays accurate for nearly equal or nearly antipodal points.
    """
    p, q = as_vec(p), as_vec(q)
    return math.atan2(float(np.linalg.norm(np.cross(p, q))), float(np.dot(p, q)))


def intersection_angle(a: VectorLike, b: VectorLike) -> float:
    """Acute angle between the great circles with poles ``a`` and ``b``.

    Raises:
        CoincidentCircles: if the poles are equal or antipodal (within 1e-12).
    """
    a, b = as_vec(a), as_vec(b)
    d = abs(float(np.dot(a, b)))
    if d >= 1.0 - COINCIDENT_TOL:
        raise CoincidentCircles("poles are equal or antipodal")
    # arccos |<a, b>|, in a form that is accurate at small angles
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), d)


def antipodal_min_distance(p: VectorLike, q: VectorLike) -> float:
    """``min(|p - q|, |p + q|)``: chord distance with antipodes identified."""
    p, q = as_vec(p), as_vec(q)
    return float(min(np.linalg.norm(p - q), np.linalg.norm(p + q)))


@dataclass(frozen=True)
class GreatCircleTube:
    """Points within geodesic distance ``half_width`` of a great circle."""

    pole: UnitVector
    half_width: float

    def __post_init__(self):
        if not 0.0 < self.half_width < math.pi / 2:
            raise DomainError(f"half_width must lie in (0, pi/2), got {self.half_width!r}")
        if not isinstance(self.pole, UnitVector):
            object.__setattr__(self, "pole", UnitVector.from_array(self.pole))


def in_tube(x: VectorLike, tube: GreatCircleTube) -> bool:
    # distance from x to the circle is arcsin|<x, pole>|
    return abs(float(np.dot(as_vec(x), tube.pole.as_array()))) <= math.sin(tube.half_width)


def uniform_sphere_sample(rng: np.random.Generator) -> UnitVector:
    """Draw one uniform point from the sphere (normalized Gaussian triple)."""
    while True:
        v = rng.standard_normal(3)
        n = float(np.linalg.norm(v))
        if n > NEAR_ZERO:
            return UnitVector(*(v / n))


def uniform_sphere_samples(rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized :func:`uniform_sphere_sample`; returns an ``(size, 3)`` array."""
    v = rng.standard_normal((size, 3))
    n = np.linalg.norm(v, axis=1)
    # probability of a near-zero Gaussian triple is ~1e-27; resample anyway
    bad = n <= NEAR_ZERO
    while np.any(bad):
        v[bad] = rng.standard_normal((int(bad.sum()), 3))
        n = np.linalg.norm(v, axis=1)
        bad = n <= NEAR_ZERO
    return v / n[:, None]


def tangent_basis(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal vectors spanning the tangent plane at unit vector ``p``."""
    ref = np.zeros(3)
    ref[int(np.argmin(np.abs(p)))] = 1.0
    e1 = np.cross(p, ref)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return e1, e2


@dataclass(frozen=True, eq=False)
class Arrangement:
    """``n >= 2`` great circles given by their poles, with a shared tube half-width.

    ``poles`` is stored as a read-only ``(n, 3)`` float array.
    """

    poles: np.ndarray
    half_width: float

    def __post_init__(self):
        P = np.array(self.poles, dtype=float)
        if P.ndim != 2 or P.shape[1] != 3:
            raise DomainError(f"poles must have shape (n, 3), got {P.shape}")
        if P.shape[0] < 2:
            raise DomainError("an arrangement needs at least two circles")
        if not 0.0 < self.half_width < math.pi / 2:
            raise DomainError(f"half_width must lie in (0, pi/2), got {self.half_width!r}")
        if np.any(np.abs(np.einsum("ij,ij->i", P, P) - 1.0) > 1e-10):
            raise DomainError("all poles must be unit vectors")
        P.setflags(write=False)
        object.__setattr__(self, "poles", P)
        object.__setattr__(self, "half_width", float(self.half_width))

    @classmethod
    def from_vectors(cls, vectors: Iterable[VectorLike], half_width: float) -> "Arrangement":
        """Build from arbitrary nonzero vectors, normalizing each."""
        return cls(np.array([make_unit(*as_vec(v)).as_array() for v in vectors]), half_width)

    @property
    def n(self) -> int:
        return self.poles.shape[0]

    def __len__(self) -> int:
        return self.n

    def unit_vectors(self) -> list[UnitVector]:
        return [UnitVector(*row) for row in self.poles]

    def tubes(self) -> list[GreatCircleTube]:
        return [GreatCircleTube(u, self.half_width) for u in self.unit_vectors()]

    def with_poles(self, poles: np.ndarray) -> "Arrangement":
        return Arrangement(poles, self.half_width)

    def with_half_width(self, half_width: float) -> "Arrangement":
        return Arrangement(self.poles, half_width)

    def folded_angles(self) -> np.ndarray:
        """Acute intersection angles of all unordered pairs ``i < j``."""
        i, j = np.triu_indices(self.n, k=1)
        d = np.abs(np.einsum("ij,ij->i", self.poles[i], self.poles[j]))
        return np.arccos(clamp_array(d, 0.0, 1.0))

    def min_angle(self) -> float:
        return float(self.folded_angles().min())

    def __repr__(self) -> str:
        return f"Arrangement(n={self.n}, half_width={self.half_width:.6g})"
