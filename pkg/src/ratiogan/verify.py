"""Numerical certification of the loss-family optimality identities.

For an invertible transform the pointwise maximizer of phi(D) + r*psi(D)
must sit at D = omega(r), the concentrated objective
phi(omega(r)) + r*psi_tilde(omega(r)) must bottom out at r = 1 with
value phi(omega(1)), and the unnormalized saddle value must equal
phi(omega(1)) + psi(omega(1)).  Everything here is independent of the
derivative recipe it certifies: maxima come from grid scans plus
golden-section refinement, minima from a log-spaced sweep with quadratic
refinement, derivatives from central finite differences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .losses import LossPair, RangeInterval, antiderivative_from, normalize_psi, probe_points

__all__ = [
    "CheckRow",
    "VerificationReport",
    "InnerMax",
    "inner_argmax",
    "concentrated_objective",
    "check_theorem1",
    "check_corollary_value",
    "check_derivatives",
    "reports_to_text",
    "reports_to_records",
    "write_reports",
]

DEFAULT_R_GRID = (0.1, 0.5, 1.0, 2.0, 10.0)

# Probe window for unbounded range ends (pre-squash scale).
UNBOUNDED_PROBE = 30.0

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CheckRow:
    check: str
    probe: float
    expected: float
    observed: float
    error: float
    tol: float
    passed: bool


@dataclass
class VerificationReport:
    loss_name: str
    checks: list = field(default_factory=list)
    skipped: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.checks)

    def add(self, check, probe, expected, observed, tol):
        err = abs(observed - expected)
        self.checks.append(
            CheckRow(check, float(probe), float(expected), float(observed), err, tol, err <= tol)
        )


@dataclass(frozen=True)
class InnerMax:
    """Result of the pointwise maximization over the discriminator value."""

    location: Optional[float]
    value: float
    at_infinity: bool = False
    direction: int = 0


def _phi_values(loss: LossPair) -> Callable:
    """Closed-form phi, or a quadrature surrogate anchored at omega(1)."""
    if loss.phi is not None:
        return loss.phi
    return antiderivative_from(loss.phi_prime, loss.omega_at_one)


def _psi_values(loss: LossPair) -> Callable:
    if loss.psi is not None:
        return loss.psi
    return antiderivative_from(loss.psi_prime, loss.omega_at_one)


def _search_window(rng: RangeInterval, eps: float = 1e-6):
    lo = rng.lower + eps if math.isfinite(rng.lower) else -UNBOUNDED_PROBE
    hi = rng.upper - eps if math.isfinite(rng.upper) else UNBOUNDED_PROBE
    return lo, hi


def _golden_max(f, a: float, b: float, width: float = 1e-8) -> float:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def inner_argmax(loss: LossPair, r: float, n_grid: int = 1024, width: float = 1e-8) -> InnerMax:
    """Maximize phi(D) + r*psi(D) over the loss range.

    Coarse scan on ``n_grid`` points over the clamped interior, then
    golden-section refinement between the best point's neighbours.  An
    objective climbing into an unbounded range end is reported as a
    maximum at infinity rather than raised.
    """
    if r < 0:
        raise ValueError(f"ratio value must be nonnegative, got {r}")
    phi_v = _phi_values(loss)
    psi_v = _psi_values(loss)
    lo, hi = _search_window(loss.range)
    grid = np.linspace(lo, hi, n_grid)
    vals = np.asarray(phi_v(grid), dtype=float) + r * np.asarray(psi_v(grid), dtype=float)
    k = int(np.argmax(vals))

    if k == 0 and not math.isfinite(loss.range.lower) and vals[0] > vals[1]:
        return InnerMax(location=None, value=float(vals[0]), at_infinity=True, direction=-1)
    if (
        k == n_grid - 1
        and not math.isfinite(loss.range.upper)
        and vals[-1] > vals[-2]
    ):
        return InnerMax(location=None, value=float(vals[-1]), at_infinity=True, direction=+1)

    def f(d):
        return float(phi_v(d) + r * psi_v(d))

    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, n_grid - 1)]
    d_hat = _golden_max(f, float(a), float(b), width)
    return InnerMax(location=d_hat, value=f(d_hat))


def concentrated_objective(loss: LossPair, r) -> float:
    """phi(omega(r)) + r * psi_tilde(omega(r)) with psi normalized at omega(1)."""
    if not loss.ratio_invertible:
        raise ValueError(f"{loss.name}: concentrated objective needs an invertible omega")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("ratio values must be nonnegative")
    normalized = normalize_psi(loss)
    phi_v = _phi_values(normalized)
    z = normalized.range.clamp_interior(normalized.omega.forward(r_arr))
    out = np.asarray(phi_v(z), dtype=float) + r_arr * np.asarray(normalized.psi(z), dtype=float)
    return float(out) if np.ndim(r) == 0 else out


def _outer_sweep(loss: LossPair, n: int = 601):
    """Concentrated objective over log-spaced ratios in [1e-3, 1e3]."""
    u = np.linspace(-3.0, 3.0, n)
    c = concentrated_objective(loss, 10.0**u)
    return u, np.asarray(c, dtype=float)


def _quadratic_vertex(u: np.ndarray, c: np.ndarray, j: int) -> float:
    if j == 0 or j == len(u) - 1:
        return float(u[j])
    h = u[1] - u[0]
    denom = c[j - 1] - 2.0 * c[j] + c[j + 1]
    if denom <= 0:
        return float(u[j])
    return float(u[j] + 0.5 * h * (c[j - 1] - c[j + 1]) / denom)


def check_theorem1(
    loss: LossPair,
    r_grid: Sequence[float] = DEFAULT_R_GRID,
    tol: float = 1e-4,
    minimizer_tol: float = 1e-3,
    value_tol: float = 1e-6,
    deriv_tol: float = 1e-5,
) -> VerificationReport:
    """Certify the inner maximizer, outer minimizer, and slope identity.

    Non-invertible losses get a skipped report: without the inverse
    transform the maximizer identity has no reference value.
    """
    report = VerificationReport(loss_name=loss.name)
    if not loss.ratio_invertible:
        report.skipped = "skipped: ratio not recoverable for sign-limit losses"
        return report

    normalized = normalize_psi(loss)

    for r in r_grid:
        expected = float(loss.omega.forward(r))
        result = inner_argmax(loss, r)
        observed = math.inf if result.at_infinity else result.location
        report.add("inner_argmax", r, expected, observed, tol)

    u, c = _outer_sweep(loss)
    j = int(np.argmin(c))
    r_star = 10.0 ** _quadratic_vertex(u, c, j)
    report.add("outer_minimizer", 1.0, 1.0, r_star, minimizer_tol)

    value_ref = float(_phi_values(loss)(loss.omega_at_one))
    min_observed = min(float(c[j]), concentrated_objective(loss, r_star))
    report.add("min_value", 1.0, value_ref, min_observed, value_tol)

    # d/dr of the concentrated objective must equal psi_tilde(omega(r)).
    psi_tilde = normalized.psi
    for r in np.logspace(math.log10(0.2), math.log10(5.0), 25):
        if abs(r - 1.0) < 0.05:
            continue  # slope crosses zero at r = 1; relative error undefined
        h = 1e-5 * (1.0 + r)
        fd = (concentrated_objective(loss, r + h) - concentrated_objective(loss, r - h)) / (2 * h)
        expected = float(psi_tilde(loss.range.clamp_interior(loss.omega.forward(r))))
        rel = float(abs(fd - expected) / max(abs(expected), 1e-12))
        report.checks.append(
            CheckRow("concentrated_slope", float(r), expected, float(fd), rel, deriv_tol, bool(rel <= deriv_tol))
        )
    return report


def check_corollary_value(loss: LossPair, tol: float = 1e-6) -> VerificationReport:
    """Certify the unnormalized saddle value phi(omega(1)) + psi(omega(1)).

    The observed side maximizes phi(D) + psi(D) numerically (the inner
    problem at unit ratio, raw psi), so the check is not circular.
    """
    report = VerificationReport(loss_name=loss.name)
    phi_v = _phi_values(loss)
    psi_v = _psi_values(loss)
    z1 = loss.omega_at_one
    expected = float(phi_v(z1) + psi_v(z1))
    result = inner_argmax(loss, 1.0)
    observed = math.inf if result.at_infinity else result.value
    report.add("minmax_value", 1.0, expected, observed, tol)
    return report


def check_derivatives(
    loss: LossPair, n_points: int = 100, tol: float = 1e-5
) -> VerificationReport:
    """Central finite differences of phi and psi against the recipe derivatives."""
    report = VerificationReport(loss_name=loss.name)
    phi_v = _phi_values(loss)
    psi_v = _psi_values(loss)
    z_pts = probe_points(loss, n_points)
    if loss.is_limit:
        # Piecewise-linear losses: skip the kink neighbourhoods.
        z_pts = z_pts[np.minimum(np.abs(z_pts - 1.0), np.abs(z_pts + 1.0)) > 1e-3]

    for fn, deriv, tag in ((phi_v, loss.phi_prime, "phi"), (psi_v, loss.psi_prime, "psi")):
        for z in z_pts:
            h = 1e-6 * max(1.0, abs(z))
            fd = (float(fn(z + h)) - float(fn(z - h))) / (2.0 * h)
            exact = float(deriv(z))
            rel = float(abs(fd - exact) / max(abs(exact), 1e-12))
            report.checks.append(
                CheckRow(f"{tag}_prime_fd", float(z), exact, fd, rel, tol, bool(rel <= tol))
            )
    return report


# ---------------------------------------------------------------------------
# Report serialization


def reports_to_text(reports: Sequence[VerificationReport]) -> str:
    lines = []
    for rep in reports:
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        lines.append(f"== {rep.loss_name}: {status}" + (f" ({rep.skipped})" if rep.skipped else ""))
        for row in rep.checks:
            lines.append(
                f"  {row.check:<20s} probe={row.probe:<12.6g} expected={row.expected:<14.8g} "
                f"observed={row.observed:<14.8g} err={row.error:.3e} tol={row.tol:.1e} "
                f"{'ok' if row.passed else 'FAIL'}"
            )
    return "\n".join(lines) + "\n"


def reports_to_records(reports: Sequence[VerificationReport]) -> list:
    records = []
    for rep in reports:
        if rep.skipped:
            records.append({"loss": rep.loss_name, "check": "all", "skipped": rep.skipped})
            continue
        for row in rep.checks:
            records.append(
                {
                    "loss": rep.loss_name,
                    "check": row.check,
                    "probe": row.probe,
                    "expected": row.expected,
                    "observed": row.observed,
                    "error": row.error,
                    "tol": row.tol,
                    "passed": row.passed,
                }
            )
    return records


def write_reports(reports: Sequence[VerificationReport], text_path, jsonl_path) -> None:
    """Write the line-oriented table and the one-record-per-check file."""
    with open(text_path, "w") as fh:
        fh.write(reports_to_text(reports))
    with open(jsonl_path, "w") as fh:
        for record in reports_to_records(reports):
            fh.write(json.dumps(record, sort_keys=True) + "\n")
