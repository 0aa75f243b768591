"""Local minimization of pairwise energies over pole configurations.

Every supported objective is a sum over ordered pairs of a kernel of the
dot product ``<p_i, p_j>``, so moving one pole only changes its own row of
the pair matrix.  Finite-difference gradients exploit that: each probe costs
``O(n)`` kernel evaluations instead of a full energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .energies import overlaps_from_dots
from .errors import DomainError, NumericDomainError
from .overlap import DEFAULT_MC_SAMPLES
from .sphere import Arrangement, normalize_rows, tangent_basis

OBJECTIVES = ("overlap", "antipodal", "riesz")


@dataclass(frozen=True)
class Objective:
    """Pairwise energy ``sum_{i != j} kernel(<p_i, p_j>)``.

    ``kind`` is one of ``overlap`` (single-lens overlap to the power ``s``
    for tubes of ``half_width``), ``antipodal`` (``(1 - d^2)^(-s/2)``) or
    ``riesz`` (``|p - q|^-s = (2 - 2d)^(-s/2)``).
    """

    kind: str
    s: float = 1.0
    half_width: Optional[float] = None
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise DomainError(f"unknown objective {self.kind!r}; choose from {OBJECTIVES}")
        if self.kind == "overlap" and self.half_width is None:
            raise DomainError("the overlap objective needs a half_width")
        if self.s < 0 or (self.kind != "overlap" and self.s == 0):
            raise DomainError(f"invalid exponent {self.s!r} for {self.kind}")

    def kernel(self, dots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-pair terms and their Monte Carlo noise (zeros unless overlap)."""
        d = np.asarray(dots, dtype=float)
        if self.kind == "overlap":
            vals, errs, _ = overlaps_from_dots(d, self.half_width, self.mc_samples, self.seed)
            noise = self.s * vals ** (self.s - 1.0) * errs if self.s > 0 else np.zeros_like(vals)
            return vals ** self.s, noise
        if self.kind == "antipodal":
            a = np.abs(d)
            base = (1.0 - a) * (1.0 + a)
        else:
            base = 2.0 - 2.0 * d
        if np.any(base <= 0.0) or not np.all(np.isfinite(base)):
            raise NumericDomainError(f"{self.kind} kernel is singular at this configuration")
        return base ** (-0.5 * self.s), np.zeros_like(base)

    def evaluate(self, poles: np.ndarray) -> tuple[float, float]:
        """Return ``(energy, mc_noise)``."""
        P = np.asarray(poles)
        i, j = np.triu_indices(P.shape[0], k=1)
        terms, noise = self.kernel(np.einsum("ij,ij->i", P[i], P[j]))
        return 2.0 * math.fsum(terms), 2.0 * math.fsum(noise)

    def __call__(self, arr) -> float:
        poles = arr.poles if isinstance(arr, Arrangement) else arr
        return self.evaluate(poles)[0]


def make_objective(kind: str, s: float = 1.0, half_width: Optional[float] = None, **kw) -> Objective:
    return Objective(kind, float(s), half_width, **kw)


@dataclass(frozen=True)
class OptimizerParams:
    max_iters: int = 2000
    initial_step: Optional[float] = None  # None -> 0.1 / sqrt(n)
    shrink: float = 0.5
    grow: float = 1.3
    fd_step: float = 1e-5
    tol: float = 1e-10
    # stationary when max_i |grad_i| <= grad_tol * max(1, |E|)
    grad_tol: float = 1e-5
    min_step: float = 1e-13
    patience: int = 10
    # random tangent kicks tried at a stationary point before declaring convergence
    escape_trials: int = 16
    escape_step: float = 1e-2
    seed: int = 0
    objective: str = "antipodal"
    s: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0 < self.grow:
            raise DomainError("need 0 < shrink < 1 < grow")
        if self.max_iters <= 0 or self.fd_step <= 0 or self.tol <= 0:
            raise DomainError("max_iters, fd_step and tol must be positive")
        if self.initial_step is not None and self.initial_step <= 0:
            raise DomainError("initial_step must be positive")


@dataclass
class OptimizationTrace:
    energies: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    final: Optional[Arrangement] = None
    converged: bool = False
    accepted: int = 0
    reason: str = ""

    @property
    def initial_energy(self) -> float:
        return self.energies[0]

    @property
    def final_energy(self) -> float:
        return self.energies[-1]


def _row_sums(objective: Objective, probes: np.ndarray, P: np.ndarray) -> np.ndarray:
    """``sum_{j != i} kernel(<q, p_j>)`` for every probe ``q`` of pole ``i``.

    ``probes`` has shape ``(n, m, 3)``; returns shape ``(n, m)``.
    """
    n, m, _ = probes.shape
    dots = np.einsum("iak,jk->iaj", probes, P)
    mask = np.ones((n, m, n), dtype=bool)
    mask[np.arange(n), :, np.arange(n)] = False
    terms, _ = objective.kernel(dots[mask])
    full = np.zeros((n, m, n))
    full[mask] = terms
    return full.sum(axis=2)


def tangent_gradient(objective: Objective, arr, fd_step: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient, one tangent vector per pole.

    Each pole is rotated by ``+-fd_step`` radians along two orthonormal
    tangent directions; the result has shape ``(n, 3)`` and every row is
    orthogonal to its pole.
    """
    if fd_step <= 0:
        raise DomainError("fd_step must be positive")
    P = np.asarray(arr.poles if isinstance(arr, Arrangement) else arr, dtype=float)
    n = P.shape[0]
    E1 = np.empty_like(P)
    E2 = np.empty_like(P)
    for i in range(n):
        E1[i], E2[i] = tangent_basis(P[i])
    c, s = math.cos(fd_step), math.sin(fd_step)
    probes = np.stack(
        [c * P + s * E1, c * P - s * E1, c * P + s * E2, c * P - s * E2], axis=1
    )
    probes = normalize_rows(probes.reshape(-1, 3)).reshape(n, 4, 3)
    try:
        rows = _row_sums(objective, probes, P)
    except (DomainError, FloatingPointError) as exc:
        raise NumericDomainError(f"objective failed at a probe point: {exc}") from exc
    # each row term appears twice in the ordered-pair sum
    g1 = (rows[:, 0] - rows[:, 1]) / fd_step
    g2 = (rows[:, 2] - rows[:, 3]) / fd_step
    return g1[:, None] * E1 + g2[:, None] * E2


def minimize(objective: Optional[Objective], initial: Arrangement, params: OptimizerParams = OptimizerParams()) -> OptimizationTrace:
    """Projected descent with an adaptive step.

    Each iteration moves every pole along its negative tangent gradient
    (scaled so the largest move is ``step`` radians) and renormalizes.  A
    trial is accepted only if the energy drops, and, for noisy Monte Carlo
    overlaps, by more than three times the combined noise; the step then
    grows, otherwise it shrinks.  Stops when the gradient is negligible,
    after ``patience`` consecutive accepted steps with relative decrease
    below ``tol``, when the step underflows, or at ``max_iters``.  A point
    where the gradient vanishes is only declared converged after a few
    random tangent kicks fail to lower the energy (symmetric saddles such as
    the pencil are otherwise fixed points of the iteration).
    """
    if objective is None:
        objective = make_objective(params.objective, params.s, initial.half_width)
    P = np.array(initial.poles)
    n = P.shape[0]
    energy, noise = objective.evaluate(P)
    if not math.isfinite(energy):
        raise NumericDomainError("objective is not finite at the initial arrangement")
    step = params.initial_step if params.initial_step is not None else 0.1 / math.sqrt(n)
    trace = OptimizationTrace()

    def gradient():
        g = tangent_gradient(objective, P, params.fd_step)
        return g, float(np.linalg.norm(g)), float(np.max(np.linalg.norm(g, axis=1)))

    g, gnorm, gmax = gradient()
    trace.energies.append(energy)
    trace.step_sizes.append(step)
    trace.grad_norms.append(gnorm)
    small = 0
    rng = np.random.default_rng(params.seed)
    for _ in range(params.max_iters):
        if gmax <= params.grad_tol * max(1.0, abs(energy)):
            kicked = _escape(objective, P, energy, noise, params, rng)
            if kicked is None:
                trace.converged, trace.reason = True, "stationary"
                break
            P, energy, noise = kicked
            trace.accepted += 1
            g, gnorm, gmax = gradient()
            trace.energies.append(energy)
            trace.step_sizes.append(step)
            trace.grad_norms.append(gnorm)
            small = 0
            continue
        if step < params.min_step:
            trace.converged = trace.accepted > 0
            trace.reason = "step underflow"
            break
        trial = normalize_rows(P - (step / gmax) * g)
        try:
            e_new, noise_new = objective.evaluate(trial)
        except NumericDomainError:
            e_new, noise_new = math.inf, 0.0
        if e_new < energy and energy - e_new > 3.0 * (noise + noise_new):
            rel = (energy - e_new) / max(abs(energy), 1e-300)
            P, energy, noise = trial, e_new, noise_new
            trace.accepted += 1
            step *= params.grow
            g, gnorm, gmax = gradient()
            trace.energies.append(energy)
            trace.step_sizes.append(step)
            trace.grad_norms.append(gnorm)
            small = small + 1 if rel < params.tol else 0
            if small >= params.patience:
                trace.converged, trace.reason = True, "small decrease"
                break
        else:
            step *= params.shrink
    else:
        trace.reason = "max_iters"
    trace.final = initial.with_poles(P)
    return trace


def _escape(objective, P, energy, noise, params, rng):
    """Try random tangent kicks from a stationary point (which may be a saddle).

    Returns ``(poles, energy, noise)`` for the best kick that lowers the
    energy beyond the noise margin, or ``None``.
    """
    best = None
    for _ in range(params.escape_trials):
        kick = rng.standard_normal(P.shape)
        kick -= np.einsum("ij,ij->i", kick, P)[:, None] * P
        kick *= params.escape_step / np.max(np.linalg.norm(kick, axis=1))
        trial = normalize_rows(P + kick)
        try:
            e_new, noise_new = objective.evaluate(trial)
        except NumericDomainError:
            continue
        if e_new < energy and energy - e_new > 3.0 * (noise + noise_new):
            if best is None or e_new < best[1]:
                best = (trial, e_new, noise_new)
    return best


def separation_probe(trace_or_arr) -> tuple[float, float]:
    """Smallest acute crossing angle of the final arrangement and that angle times ``sqrt(n)``."""
    arr = trace_or_arr.final if isinstance(trace_or_arr, OptimizationTrace) else trace_or_arr
    angle = arr.min_angle()
    return angle, angle * math.sqrt(arr.n)
