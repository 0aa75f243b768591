import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gctubes.arrangements import fibonacci_poles, greedy_separated, pencil, random_poles
from gctubes.energies import (
    PlanarArrangement,
    antipodal_energy,
    circular_inverse_sum,
    circular_sum_bound,
    delta_limit_curve,
    harmonic,
    overlap_energy,
    planar_overlap_energy,
    rate_bound,
    riesz_energy,
)
from gctubes.errors import CoincidentCircles, DomainError, DuplicatePoints, ParallelLines
from gctubes.overlap import lens_overlap_bounds, lens_overlap_exact
from gctubes.sphere import Arrangement, make_unit


def rotation(seed):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((3, 3)))
    return q


# -- overlap energy -----------------------------------------------------------

def test_overlap_energy_examples():
    arr = Arrangement.from_vectors([[1, 0, 0], [0, 1, 0]], 0.1)
    report = overlap_energy(arr, 1)
    assert report.total == pytest.approx(2 * lens_overlap_exact(math.pi / 2, 0.1).value)
    assert report.method_counts == {"exact_lens": 1, "monte_carlo": 0, "capped": 0}
    for a in (arr, random_poles(9, seed=2), pencil(5)):
        assert overlap_energy(a, 0).total == a.n * (a.n - 1)


def test_overlap_energy_pair_terms():
    arr = greedy_separated(12, seed=1)
    report = overlap_energy(arr, 1.5)
    T = report.pair_terms
    np.testing.assert_array_equal(T, T.T)
    assert np.all(np.diag(T) == 0)
    assert math.fsum(T.ravel()) == pytest.approx(report.total, rel=1e-12)
    assert overlap_energy(arr, 1.5, keep_pairs=False).pair_terms is None
    with pytest.raises(DomainError):
        overlap_energy(arr, -1)


def test_overlap_energy_rotation_and_sign_invariance():
    arr = greedy_separated(20, seed=3)
    base = overlap_energy(arr, 2).total
    rotated = arr.with_poles(arr.poles @ rotation(0).T)
    assert overlap_energy(rotated, 2).total == pytest.approx(base, rel=1e-9)
    flips = np.where(np.arange(arr.n) % 3 == 0, -1.0, 1.0)[:, None]
    assert overlap_energy(arr.with_poles(arr.poles * flips), 2).total == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 3.0])
def test_overlap_energy_between_bound_sums(s):
    arr = fibonacci_poles(12, half_width=0.02)
    P = arr.poles
    lower = upper = 0.0
    for i in range(arr.n):
        for j in range(arr.n):
            if i != j:
                alpha = math.acos(abs(float(P[i] @ P[j])))
                lo, hi = lens_overlap_bounds(alpha, arr.half_width)
                lower += lo**s
                upper += hi**s
    total = overlap_energy(arr, s).total
    assert lower <= total <= upper


@pytest.mark.parametrize("kind", ["pencil", "greedy", "fibonacci", "random"])
@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 3.0])
def test_energy_above_conservative_rate_floor(kind, s):
    n = 32
    arr = {
        "pencil": lambda: pencil(n),
        "greedy": lambda: greedy_separated(n, seed=0),
        "fibonacci": lambda: fibonacci_poles(n),
        "random": lambda: random_poles(n, seed=0),
    }[kind]()
    assert overlap_energy(arr, s).total >= 1e-3 * rate_bound(n, s, "sphere")


# -- Riesz and antipodal ------------------------------------------------------

def test_riesz_examples():
    z = [[0, 0, 1], [0, 0, -1]]
    assert riesz_energy(z, 1) == pytest.approx(1.0)
    assert riesz_energy(z, 3) == pytest.approx(0.25)
    tet = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3)
    assert riesz_energy(tet, 1) == pytest.approx(12 / math.sqrt(8 / 3))
    assert riesz_energy(tet, 1) == pytest.approx(7.348469, abs=1e-6)
    with pytest.raises(DuplicatePoints):
        riesz_energy([[0, 0, 1], [0, 0, 1]], 1)


def test_antipodal_examples():
    assert antipodal_energy([[1, 0, 0], [0, 1, 0]], 3.7) == pytest.approx(2.0)
    t = math.pi / 6
    assert antipodal_energy([[0, 0, 1], [0, math.sin(t), math.cos(t)]], 1) == pytest.approx(4.0)
    P = random_poles(10, seed=4).poles
    flipped = P.copy()
    flipped[3] *= -1
    assert antipodal_energy(flipped, 2) == pytest.approx(antipodal_energy(P, 2), rel=1e-12)
    with pytest.raises(CoincidentCircles):
        antipodal_energy([[0, 0, 1], [0, 0, -1]], 1)


def test_point_energies_rotation_invariant():
    P = random_poles(15, seed=8).poles
    R = rotation(1)
    for fn in (riesz_energy, antipodal_energy):
        assert fn(P @ R.T, 1.5) == pytest.approx(fn(P, 1.5), rel=1e-9)


def test_point_energies_accept_unit_vectors():
    pts = [make_unit(1, 0, 0), make_unit(0, 1, 0)]
    assert riesz_energy(pts, 2) == pytest.approx(1.0)
    assert antipodal_energy(pts, 2) == pytest.approx(2.0)


# -- planar -------------------------------------------------------------------

def test_planar_examples():
    assert planar_overlap_energy(PlanarArrangement((0, math.pi / 2)), 1).total == pytest.approx(2.0)
    for n in (3, 8):
        assert planar_overlap_energy(PlanarArrangement.pencil(n), 0).total == n * (n - 1)
    with pytest.raises(ParallelLines):
        planar_overlap_energy(PlanarArrangement((0.0, math.pi)), 1)
    with pytest.raises(DuplicatePoints):
        PlanarArrangement((0.5, 1.0, 0.5))


def test_planar_pencil_grows_like_log():
    totals = {n: planar_overlap_energy(PlanarArrangement.pencil(n), 1).total for n in (8, 16, 32, 64, 128, 256, 512, 1024)}
    ns = sorted(totals)
    diffs = [totals[b] - totals[a] for a, b in zip(ns, ns[1:])]
    ratios = [totals[b] / totals[a] - 1 for a, b in zip(ns, ns[1:])]
    assert all(d > 0 for d in diffs)
    assert max(diffs) / min(diffs) < 1.25
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    # the total behaves like (8/pi) log n; the (2/pi) H_{n-1} floor holds with ratio below 4
    for n in range(4, 1025, 37):
        total = planar_overlap_energy(PlanarArrangement.pencil(n), 1, keep_pairs=False).total
        floor = 2 / math.pi * harmonic(n - 1)
        assert 1 <= total / floor <= 4
        assert abs(total - 8 / math.pi * math.log(n)) < 0.5


def test_sphere_pencil_tracks_planar_pencil():
    for n in (4, 8, 16, 32):
        sphere = overlap_energy(pencil(n), 1).total
        plane = planar_overlap_energy(PlanarArrangement.pencil(n), 1).total
        assert 1 <= sphere / plane <= math.pi - 2


# -- circular sums ------------------------------------------------------------

def test_circular_sum_examples():
    assert circular_inverse_sum([0, math.pi]) == pytest.approx(4 / math.pi)
    assert circular_sum_bound(2) == pytest.approx(4 / math.pi)
    assert circular_sum_bound(3) == pytest.approx(27 / (2 * math.pi))
    assert circular_sum_bound(4) == pytest.approx(88 / (3 * math.pi))
    with pytest.raises(DuplicatePoints):
        circular_inverse_sum([1.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        circular_inverse_sum([0.0, 7.0])


@pytest.mark.parametrize("n", [2, 3, 5, 10, 33, 64])
def test_circular_sum_equality_when_equispaced(n):
    xs = np.arange(n) * 2 * math.pi / n
    assert circular_inverse_sum(xs) == pytest.approx(circular_sum_bound(n), rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=2, max_size=64, unique=True))
def test_circular_sum_lower_bound(xs):
    xs = sorted(xs)
    if min(np.diff(xs)) < 1e-9:
        return
    assert circular_inverse_sum(xs) >= circular_sum_bound(len(xs)) * (1 - 1e-12)


# -- rates --------------------------------------------------------------------

def test_rate_bound_examples():
    assert rate_bound(100, 1, "sphere") == pytest.approx(1.0)
    assert rate_bound(100, 2, "sphere") == pytest.approx(4.60517e-4, rel=1e-5)
    assert rate_bound(16, 3, "plane") == pytest.approx(0.00390625)
    assert rate_bound(16, 3, "sphere") == pytest.approx(16 ** -3.5)
    assert rate_bound(50, 1, "plane") == pytest.approx(math.log(50))
    assert rate_bound(50, 0.5, "plane") == pytest.approx(50.0)
    with pytest.raises(ValueError):
        rate_bound(10, 1, "torus")


# -- shrinking-width limit ----------------------------------------------------

def test_delta_limit_examples():
    ortho = [[1, 0, 0], [0, 1, 0]]
    curve = delta_limit_curve(ortho, 1, [1e-2, 1e-3, 1e-4])
    assert curve[-1][1] == pytest.approx(2.0, abs=1e-6)
    t = math.pi / 6
    tilted = [[0, 0, 1], [0, math.sin(t), math.cos(t)]]
    assert antipodal_energy(tilted, 2) == pytest.approx(8.0)
    assert delta_limit_curve(tilted, 2, [1e-3, 1e-4])[-1][1] == pytest.approx(8.0, rel=1e-6)


def test_delta_limit_halving_converges():
    for seed in range(5):
        P = random_poles(6, seed=seed).poles
        target = antipodal_energy(P, 1)
        deltas = [1e-2 / 2**k for k in range(8)]
        errs = [abs(v - target) for _, v in delta_limit_curve(P, 1, deltas)]
        assert all(b < a for a, b in zip(errs, errs[1:]))


def test_delta_limit_domain():
    with pytest.raises(DomainError):
        delta_limit_curve([[1, 0, 0], [0, 1, 0]], 1, [1.0])
    with pytest.raises(DomainError):
        delta_limit_curve([[1, 0, 0], [0, 1, 0]], 1, [1e-3, 1e-2])
