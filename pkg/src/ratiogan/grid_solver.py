"""Ideal min-max solve over a likelihood-ratio field on a discrete support.

The inner maximization has the pointwise closed form D_i = omega(r_i),
so what remains is projected gradient descent on the ratio vector: the
per-point gradient of the concentrated cost is f_i * psi_tilde(omega(r_i)),
and feasibility means r >= 0 with sum(r_i * f_i) = 1.  The minimizer is
the constant field r = 1 for every invertible pair.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .losses import LossPair, normalize_psi
from .verify import _phi_values, _psi_values

__all__ = [
    "DiscreteDensity",
    "RatioField",
    "SolveTrace",
    "SolverDiverged",
    "discretize",
    "project_feasible",
    "feasible_from",
    "solve_minmax_grid",
    "minmax_value",
    "trace_to_text",
    "field_to_text",
]

MASS_TOL = 1e-12
CONSTRAINT_TOL = 1e-8
PROJECTION_RESIDUAL = 1e-10
PROJECTION_MAX_ITERS = 1000


@dataclass(frozen=True)
class DiscreteDensity:
    """Probability masses on a finite support (1D points or 2D grid nodes)."""

    support: np.ndarray
    mass: np.ndarray
    coverage: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "support", np.asarray(self.support, dtype=float))
        object.__setattr__(self, "mass", np.asarray(self.mass, dtype=float))
        if len(self.mass) != len(self.support):
            raise ValueError("support and mass lengths differ")
        if np.any(self.mass < 0):
            raise ValueError("negative mass")
        if abs(self.mass.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {self.mass.sum()!r} not 1 within {MASS_TOL}")
        pts = self.support.reshape(len(self.support), -1)
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("support points must be distinct")

    def __len__(self):
        return len(self.mass)


@dataclass(frozen=True)
class RatioField:
    """Nonnegative ratio values aligned with a density's support."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if np.any(self.values < 0):
            raise ValueError("ratio values must be nonnegative")

    def validate_against(self, density: DiscreteDensity) -> None:
        if len(self.values) != len(density):
            raise ValueError("ratio field and density lengths differ")
        resid = abs(float(self.values @ density.mass) - 1.0)
        if resid > CONSTRAINT_TOL:
            raise ValueError(f"mean-one constraint residual {resid:.3e} > {CONSTRAINT_TOL}")

    def __len__(self):
        return len(self.values)


@dataclass
class SolveTrace:
    """Per-logged-step solver history."""

    iterations: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    linf_to_one: list = field(default_factory=list)
    constraint_residuals: list = field(default_factory=list)

    def log(self, iteration, objective, linf, residual):
        self.iterations.append(int(iteration))
        self.objectives.append(float(objective))
        self.linf_to_one.append(float(linf))
        self.constraint_residuals.append(float(residual))


class SolverDiverged(RuntimeError):
    def __init__(self, message: str, trace: SolveTrace):
        super().__init__(message)
        self.trace = trace


def discretize(
    density: Union[Callable, "object"],
    n_points: int,
    window: Sequence,
) -> DiscreteDensity:
    """Evaluate a density on a regular grid and renormalize to unit mass.

    ``density`` is either a pdf callable or anything with a matching
    ``pdf(x)`` evaluation through ``ratiogan.densities.pdf``.  ``window``
    is (lo, hi) in 1D or ((xlo, xhi), (ylo, yhi)) in 2D; ``n_points``
    counts grid nodes per axis.
    """
    if n_points < 2:
        raise ValueError("need at least 2 grid points")
    if callable(density):
        pdf_fn = density
    else:
        from .densities import pdf as density_pdf

        pdf_fn = lambda x: density_pdf(density, x)

    window = np.asarray(window, dtype=float)
    if window.ndim == 1:
        lo, hi = window
        if not hi > lo:
            raise ValueError("window must have positive length")
        support = np.linspace(lo, hi, n_points)
        cell = (hi - lo) / (n_points - 1)
        raw = np.asarray([float(pdf_fn(x)) for x in support])
    elif window.shape == (2, 2):
        (xlo, xhi), (ylo, yhi) = window
        if not (xhi > xlo and yhi > ylo):
            raise ValueError("window must have positive area")
        xs = np.linspace(xlo, xhi, n_points)
        ys = np.linspace(ylo, yhi, n_points)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        support = np.column_stack([gx.ravel(), gy.ravel()])
        cell = (xhi - xlo) / (n_points - 1) * (yhi - ylo) / (n_points - 1)
        raw = np.asarray([float(pdf_fn(p)) for p in support])
    else:
        raise ValueError("window must be (lo, hi) or ((xlo, xhi), (ylo, yhi))")

    masses = raw * cell
    coverage = float(masses.sum())
    if coverage < 0.5:
        raise ValueError(f"window captures only {coverage:.3f} of the density mass")
    if coverage < 0.99:
        warnings.warn(
            f"window captures {coverage:.4f} < 0.99 of the density mass", stacklevel=2
        )
    return DiscreteDensity(support=support, mass=masses / coverage, coverage=coverage)


def project_feasible(values: np.ndarray, mass: np.ndarray) -> np.ndarray:
    """Dykstra projection onto {r >= 0} intersected with {<mass, r> = 1}.

    Stops once the iterate is feasible within the residual cap and has
    stopped moving (feasibility alone can be reached before the
    correction terms equilibrate on the true projection).
    """
    m = np.asarray(mass, dtype=float)
    m_sq = float(m @ m)
    x = np.asarray(values, dtype=float).copy()
    scale = max(1.0, float(np.abs(x).max()))
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    prev = x
    for _ in range(PROJECTION_MAX_ITERS):
        y = np.maximum(x + p, 0.0)
        p = x + p - y
        w = y + q
        x = w + (1.0 - float(m @ w)) / m_sq * m
        q = w - x
        orthant_violation = max(0.0, -float(x.min()))
        plane_violation = abs(float(m @ np.maximum(x, 0.0)) - 1.0)
        moved = float(np.abs(x - prev).max())
        if (
            max(orthant_violation, plane_violation) <= PROJECTION_RESIDUAL
            and moved <= 1e-12 * scale
        ):
            break
        prev = x
    return np.maximum(x, 0.0)


def feasible_from(values: np.ndarray, density: DiscreteDensity) -> RatioField:
    """Rescale nonnegative values so they satisfy the mean-one constraint."""
    v = np.maximum(np.asarray(values, dtype=float), 0.0)
    total = float(v @ density.mass)
    if total <= 0:
        raise ValueError("cannot normalize values with zero mass-weighted sum")
    return RatioField(v / total)


def solve_minmax_grid(
    loss: LossPair,
    f: DiscreteDensity,
    r_init: RatioField,
    step: Optional[float] = None,
    max_iters: int = 20000,
    tol: float = 1e-10,
    log_every: int = 1,
):
    """Projected gradient descent on the concentrated cost.

    Alternates the exact inner maximizer D = omega(r) with a projected
    step along the per-point gradient f_i * psi_tilde(omega(r_i)),
    backtracking on objective increase (factor 0.5, at most 30 halvings
    per iteration).  Fifty consecutive non-improving iterations raise
    ``SolverDiverged`` with the trace attached.
    """
    if not loss.ratio_invertible:
        raise ValueError(f"ideal solver requires invertible omega; {loss.name} has none")
    r_init.validate_against(f)

    normalized = normalize_psi(loss)
    phi_v = _phi_values(normalized)
    psi_tilde = normalized.psi
    omega_fwd = normalized.omega.forward
    clamp = normalized.range.clamp_interior
    mass = f.mass

    def objective_and_grad(r):
        z = clamp(omega_fwd(r))
        psi_t = np.asarray(psi_tilde(z), dtype=float)
        obj = float(mass @ (np.asarray(phi_v(z), dtype=float) + r * psi_t))
        return obj, mass * psi_t

    base_step = step if step is not None else 0.1 / float(mass.max())
    if base_step <= 0:
        raise ValueError("step must be positive")

    r = np.asarray(r_init.values, dtype=float).copy()
    trace = SolveTrace()
    obj, grad = objective_and_grad(r)
    residual = abs(float(mass @ r) - 1.0)
    trace.log(0, obj, np.abs(r - 1.0).max(), residual)

    consecutive_increases = 0
    for it in range(1, max_iters + 1):
        s = base_step
        candidate = project_feasible(r - s * grad, mass)
        cand_obj, cand_grad = objective_and_grad(candidate)
        halvings = 0
        while cand_obj > obj and halvings < 30:
            s *= 0.5
            halvings += 1
            candidate = project_feasible(r - s * grad, mass)
            cand_obj, cand_grad = objective_and_grad(candidate)

        if cand_obj > obj:
            consecutive_increases += 1
            if consecutive_increases >= 50:
                raise SolverDiverged(
                    f"objective increased for {consecutive_increases} consecutive "
                    f"iterations (step {base_step:g})",
                    trace,
                )
        else:
            consecutive_increases = 0

        delta = np.abs(candidate - r).max()
        r, obj, grad = candidate, cand_obj, cand_grad
        if it % log_every == 0 or delta < tol or it == max_iters:
            residual = abs(float(mass @ r) - 1.0)
            trace.log(it, obj, np.abs(r - 1.0).max(), residual)
        if delta < tol:
            break

    result = RatioField(r)
    result.validate_against(f)
    return result, trace


def minmax_value(loss: LossPair, r: Union[RatioField, np.ndarray], f: DiscreteDensity) -> float:
    """Discrete cost at the inner optimum, with the unnormalized psi."""
    values = r.values if isinstance(r, RatioField) else np.asarray(r, dtype=float)
    if len(values) != len(f):
        raise ValueError("ratio field and density lengths differ")
    phi_v = _phi_values(loss)
    psi_v = _psi_values(loss)
    z = loss.range.clamp_interior(loss.omega.forward(values))
    return float(
        f.mass @ (np.asarray(phi_v(z), dtype=float) + values * np.asarray(psi_v(z), dtype=float))
    )


def trace_to_text(trace: SolveTrace) -> str:
    lines = ["iteration\tobjective\tlinf_to_one\tconstraint_residual"]
    for it, obj, linf, res in zip(
        trace.iterations, trace.objectives, trace.linf_to_one, trace.constraint_residuals
    ):
        lines.append(f"{it}\t{obj!r}\t{linf!r}\t{res!r}")
    return "\n".join(lines) + "\n"


def field_to_text(f: DiscreteDensity, r: RatioField) -> str:
    lines = ["support\tmass\tratio"]
    pts = f.support.reshape(len(f), -1)
    for point, m, v in zip(pts, f.mass, r.values):
        coord = ",".join(repr(float(c)) for c in point)
        lines.append(f"{coord}\t{m!r}\t{v!r}")
    return "\n".join(lines) + "\n"
