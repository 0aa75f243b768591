"""Sweeps, slope fits and consistency checks driven by a JSON run config.

A run config is one JSON object::

    {"command": "sweep", "constructions": ["greedy"], "n": [16, 32, 64],
     "s": [1, 3], "seeds": [0], "half_width_rule": "one_over_n",
     "mc_samples": 100000, "output_path": "out.csv"}

``half_width_rule`` is ``"one_over_n"`` or a number.  Optional keys:
``with_union`` and ``timing`` (sweep), ``threshold`` (union-check),
``deltas`` and ``poles`` (limit-check).  All randomness derives from the
seeds; every cell gets its own stream keyed on its coordinates, so output is
identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from itertools import product
from typing import Iterable, Optional, Sequence

import numpy as np

from .arrangements import ConstructionSpec, min_separation
from .energies import (
    PlanarArrangement,
    antipodal_energy,
    delta_limit_curve,
    folded_line_angles,
    overlap_energy,
    overlaps_from_dots,
    planar_overlap_energy,
)
from .errors import DomainError, GCTubesError, InsufficientData
from .overlap import band_area, mc_second_moment, mc_union_area
from .sphere import Arrangement, GreatCircleTube, UnitVector, uniform_sphere_samples

SWEEP_COLUMNS = (
    "construction", "n", "s", "seed", "half_width", "energy",
    "min_separation", "union_area", "wall_time_ms", "error",
)
CONSTRUCTIONS = ("pencil", "greedy", "fibonacci", "random", "planar_pencil")
DEFAULT_UNION_THRESHOLD = 1.0


class ConfigError(GCTubesError, ValueError):
    pass


def fmt(value) -> str:
    """CSV cell text: 12 significant digits for floats, empty for ``None``."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(rows: Iterable[Sequence], header: Sequence[str], out=None) -> str:
    """Write rows as CSV with ``\\n`` line endings; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out is not None:
        if isinstance(out, (str, os.PathLike)):
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            out.write(text)
    return text


def worker_count() -> int:
    env = os.environ.get("GC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def cell_seed(user_seed: int, *coords) -> np.random.SeedSequence:
    """Independent seed for one cell: hash of its coordinates plus the user seed."""
    key = zlib.crc32("|".join(str(c) for c in coords).encode())
    return np.random.SeedSequence([int(user_seed), key])


def _seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint32)[0])


# -- config -----------------------------------------------------------------

def load_config(path_or_text) -> dict:
    """Parse a run config from a path or a JSON string."""
    try:
        if isinstance(path_or_text, dict):
            data = dict(path_or_text)
        elif os.path.exists(str(path_or_text)):
            with open(path_or_text, encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            data = json.loads(path_or_text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _list(cfg: dict, key: str, default=None) -> list:
    value = cfg.get(key, default)
    if value is None:
        raise ConfigError(f"config is missing {key!r}")
    return list(value) if isinstance(value, (list, tuple)) else [value]


def half_width_for(cfg: dict, n: int) -> float:
    rule = cfg.get("half_width_rule", "one_over_n")
    if rule == "one_over_n":
        return 1.0 / n
    try:
        return float(rule)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad half_width_rule {rule!r}") from exc


# -- slope fits -------------------------------------------------------------

@dataclass
class SweepRecord:
    construction: str
    n: int
    s: float
    seed: int
    half_width: float
    energy: Optional[float] = None
    min_separation: Optional[float] = None
    union_area: Optional[float] = None
    wall_time_ms: Optional[int] = None
    error: str = ""
    # not part of the CSV schema
    mc_pairs: int = field(default=0, repr=False)
    pairs: int = field(default=0, repr=False)

    def row(self) -> list:
        return [getattr(self, name) for name in SWEEP_COLUMNS]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int


def fit_loglog_slope(records: Sequence[SweepRecord]) -> SlopeFit:
    """Least-squares line through ``(log n, log energy)``.

    ``r_squared`` is 0 when the energies are all equal (no variance to explain).

    Raises:
        InsufficientData: fewer than 3 records, mixed construction or ``s``,
            repeated ``n``, or a non-positive energy.
    """
    recs = [r for r in records]
    if len(recs) < 3:
        raise InsufficientData("need at least three records")
    if len({(r.construction, r.s) for r in recs}) != 1:
        raise InsufficientData("records mix constructions or exponents")
    ns = [r.n for r in recs]
    if len(set(ns)) != len(ns):
        raise InsufficientData("repeated n")
    energies = [r.energy for r in recs]
    if any(e is None or not e > 0 for e in energies):
        raise InsufficientData("energies must be positive")
    return fit_loglog(ns, energies)


def fit_loglog(ns: Sequence[float], values: Sequence[float]) -> SlopeFit:
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y * y))):
        # constant data: flat line, r^2 undefined and reported as 0
        return SlopeFit(0.0, float(y.mean()), 0.0, len(x))
    resid = y - (slope * x + intercept)
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    return SlopeFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)), len(x))


# -- sweep ------------------------------------------------------------------

def build_arrangement(construction: str, n: int, seed: int, half_width: float) -> Arrangement:
    spec = ConstructionSpec(construction, n, seed, half_width)
    return spec.build()


def _sweep_cell(construction, n, s, seed, cfg) -> SweepRecord:
    w = half_width_for(cfg, n)
    rec = SweepRecord(construction, int(n), float(s), int(seed), w)
    t0 = time.perf_counter()
    try:
        mc_samples = int(cfg.get("mc_samples", 100_000))
        if construction == "planar_pencil":
            report = planar_overlap_energy(PlanarArrangement.pencil(n), s, keep_pairs=False)
            rec.half_width = 1.0 / n
            _, _, folded = folded_line_angles(PlanarArrangement.pencil(n).angles)
            rec.min_separation = float(folded.min())
        else:
            build_seed = _seed_int(cell_seed(seed, construction, n))
            arr = build_arrangement(construction, n, build_seed, w)
            mc_seed = _seed_int(cell_seed(seed, construction, n, s))
            report = overlap_energy(arr, s, mc_samples=mc_samples, seed=mc_seed, keep_pairs=False)
            rec.min_separation = min_separation(arr)
            rec.mc_pairs = report.method_counts.get("monte_carlo", 0)
            if cfg.get("with_union"):
                rec.union_area = mc_union_area(arr, max(mc_samples, 1000), mc_seed).value
        rec.pairs = sum(report.method_counts.values())
        rec.energy = report.total
    except Exception as exc:  # recorded per cell; the sweep continues
        rec.error = f"{type(exc).__name__}: {exc}"
    if cfg.get("timing"):
        rec.wall_time_ms = int(round(1000 * (time.perf_counter() - t0)))
    return rec


def sweep_cells(cfg: dict) -> list[tuple]:
    constructions = _list(cfg, "constructions")
    for c in constructions:
        if c not in CONSTRUCTIONS:
            raise ConfigError(f"unknown construction {c!r}")
    try:
        ns = [int(n) for n in _list(cfg, "n")]
        ss = [float(s) for s in _list(cfg, "s", [1.0])]
        seeds = [int(x) for x in _list(cfg, "seeds", [0])]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric list in config: {exc}") from exc
    return list(product(constructions, ns, ss, seeds))


def run_sweep(cfg: dict, workers: Optional[int] = None) -> list[SweepRecord]:
    """One record per (construction, n, s, seed) cell, in cell order."""
    cells = sweep_cells(cfg)
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        return [_sweep_cell(*cell, cfg) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cell: _sweep_cell(*cell, cfg), cells))


def sweep_csv(records: Sequence[SweepRecord], out=None) -> str:
    return write_csv((r.row() for r in records), SWEEP_COLUMNS, out)


def read_sweep_csv(path_or_file) -> list[SweepRecord]:
    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, encoding="utf-8") as fh:
            return read_sweep_csv(fh)
    records = []
    for row in csv.DictReader(path_or_file):
        def num(key, cast=float):
            v = row.get(key, "")
            return cast(v) if v not in ("", None) else None
        records.append(
            SweepRecord(
                construction=row["construction"],
                n=int(row["n"]),
                s=float(row["s"]),
                seed=int(row["seed"]),
                half_width=float(row["half_width"]),
                energy=num("energy"),
                min_separation=num("min_separation"),
                union_area=num("union_area"),
                wall_time_ms=num("wall_time_ms", int),
                error=row.get("error", "") or "",
            )
        )
    return records


def fit_groups(records: Sequence[SweepRecord]) -> list[tuple]:
    """Fit one slope per (construction, s), averaging energies over seeds."""
    groups: dict = {}
    for r in records:
        if r.error or r.energy is None:
            continue
        groups.setdefault((r.construction, r.s), {}).setdefault(r.n, []).append(r.energy)
    rows = []
    for (construction, s), by_n in sorted(groups.items()):
        ns = sorted(by_n)
        means = [float(np.mean(by_n[n])) for n in ns]
        recs = [SweepRecord(construction, n, s, 0, 0.0, e) for n, e in zip(ns, means)]
        try:
            fit = fit_loglog_slope(recs)
        except InsufficientData:
            continue
        rows.append((construction, s, fit.slope, fit.intercept, fit.r_squared, fit.points_used))
    return rows


FIT_COLUMNS = ("construction", "s", "slope", "intercept", "r_squared", "points_used")


# -- checks -----------------------------------------------------------------

UNION_COLUMNS = ("construction", "n", "seed", "half_width", "union_area", "std_error", "min_angle", "flagged")


def check_union(cfg: dict) -> tuple[list[tuple], bool]:
    """Monte Carlo union areas; returns ``(rows, violated)``.

    Rows whose smallest crossing angle is below ``1/(100 sqrt n)`` are
    flagged (outside the scope of the lower bound) and never count as
    violations.  Any other row below ``threshold`` is a violation.
    """
    threshold = float(cfg.get("threshold", DEFAULT_UNION_THRESHOLD))
    samples = int(cfg.get("mc_samples", 1_000_000))
    rows, violated = [], False
    for construction, n, seed in product(_list(cfg, "constructions", ["greedy"]), _list(cfg, "n"), _list(cfg, "seeds", [0])):
        n = int(n)
        if n < 2:
            raise DomainError("union check needs n >= 2")
        w = half_width_for(cfg, n)
        arr = build_arrangement(construction, n, _seed_int(cell_seed(seed, construction, n)), w)
        est = mc_union_area(arr, samples, _seed_int(cell_seed(seed, "union", construction, n)))
        angle = arr.min_angle()
        flagged = angle < 1.0 / (100.0 * math.sqrt(n))
        if not flagged and est.value < threshold:
            violated = True
        rows.append((construction, n, int(seed), w, est.value, est.std_error, angle, flagged))
    return rows, violated


IDENTITY_COLUMNS = ("n", "seed", "lhs_second_moment", "rhs_sum", "z_score")


def identity_terms(arr, samples: int, seed) -> tuple[float, float, float]:
    """Return ``(lhs, rhs, z)`` for the second-moment identity.

    ``lhs`` is the Monte Carlo integral of ``(sum_i chi_i)^2``; ``rhs`` is
    ``sum_i |C_i|`` plus the full pairwise intersections, i.e. twice the
    single-lens overlap of every ordered pair.
    """
    lhs = mc_second_moment(arr, samples, seed)
    if isinstance(arr, GreatCircleTube):
        rhs, rhs_err = band_area(arr.half_width), 0.0
    else:
        P = np.asarray(arr.poles)
        i, j = np.triu_indices(arr.n, k=1)
        vals, errs, _ = overlaps_from_dots(np.einsum("ij,ij->i", P[i], P[j]), arr.half_width, seed=seed)
        rhs = arr.n * band_area(arr.half_width) + 4.0 * math.fsum(vals)
        rhs_err = 4.0 * math.sqrt(math.fsum(errs**2))
    se = math.hypot(lhs.std_error, rhs_err)
    z = (lhs.value - rhs) / se if se > 0 else 0.0
    return lhs.value, rhs, z


def check_identity(cfg: dict) -> tuple[list[tuple], bool]:
    """Second-moment identity rows; violated if more than 1 in 20 rows has ``|z| > 3``."""
    samples = int(cfg.get("mc_samples", 1_000_000))
    construction = _list(cfg, "constructions", ["random"])[0]
    rows = []
    for n, seed in product(_list(cfg, "n"), _list(cfg, "seeds", [0])):
        n = int(n)
        if n > 32:
            raise DomainError("identity check is limited to n <= 32")
        w = half_width_for(cfg, n)
        build_seed = _seed_int(cell_seed(seed, construction, n))
        if n == 1:
            rng = np.random.default_rng(build_seed)
            arr = GreatCircleTube(UnitVector(*uniform_sphere_samples(rng, 1)[0]), w)
        else:
            arr = build_arrangement(construction, n, build_seed, w)
        lhs, rhs, z = identity_terms(arr, samples, _seed_int(cell_seed(seed, "identity", n)))
        rows.append((n, int(seed), lhs, rhs, z))
    bad = sum(1 for r in rows if abs(r[4]) > 3.0)
    return rows, bad > len(rows) // 20


LIMIT_COLUMNS = ("seed", "s", "delta", "normalized_sum", "target", "abs_error")


def check_delta_limit(cfg: dict) -> tuple[list[tuple], bool]:
    """Normalized overlap sums along shrinking widths versus the antipodal limit.

    Violated when ``abs_error`` fails to decrease strictly along any curve.
    """
    deltas = [float(d) for d in _list(cfg, "deltas", [1e-2, 1e-3, 1e-4])]
    pole_sets = []
    if "poles" in cfg:
        pole_sets.append((0, np.asarray(cfg["poles"], dtype=float)))
    else:
        for seed in _list(cfg, "seeds", [0]):
            n = int(_list(cfg, "n", [5])[0])
            rng = np.random.default_rng(cell_seed(seed, "limit", n))
            pole_sets.append((int(seed), uniform_sphere_samples(rng, n)))
    rows, violated = [], False
    for seed, poles in pole_sets:
        for s in _list(cfg, "s", [1.0]):
            s = float(s)
            target = antipodal_energy(poles, s)
            curve = delta_limit_curve(poles, s, deltas)
            errors = [abs(v - target) for _, v in curve]
            if any(b >= a for a, b in zip(errors, errors[1:])):
                violated = True
            rows.extend((seed, s, d, v, target, e) for (d, v), e in zip(curve, errors))
    return rows, violated
