"""Loss-pair construction from likelihood-ratio transforms.

A loss pair (phi, psi) is generated from a strictly increasing transform
``omega`` of the nonnegative ratio r and a positive weight ``rho`` on
omega's range J:

    phi'(z) = -omega_inverse(z) * rho(z),      psi'(z) = rho(z)

Gradient-based training only ever needs these derivatives; closed forms
for phi and psi are optional and carried when known.  The discriminator
that maximizes phi(D) + r*psi(D) pointwise is D = omega(r), so an
invertible omega lets the trained discriminator be read back as a ratio
estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "RangeInterval",
    "NONNEGATIVE",
    "UNIT",
    "REALS",
    "SYMMETRIC_UNIT",
    "CANONICAL_RANGES",
    "SquashDescriptor",
    "output_squashing_for",
    "OmegaTransform",
    "LossPair",
    "RatioNotRecoverableError",
    "make_loss_pair",
    "make_monotone_loss",
    "normalize_psi",
    "ratio_from_discriminator",
    "antiderivative_from",
    "probe_points",
]

# Absolute clamp distance from bounded range endpoints; several catalogue
# losses have singular derivatives exactly at the endpoints.
INTERIOR_EPS = 1e-6

# Documented monotonicity probe: 61 log-spaced ratios over six decades.
OMEGA_PROBE = np.logspace(-3.0, 3.0, 61)


@dataclass(frozen=True)
class RangeInterval:
    """An interval of discriminator outputs, with endpoint openness flags."""

    lower: float
    upper: float
    lower_open: bool
    upper_open: bool
    label: str

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty range: [{self.lower}, {self.upper}]")

    def contains(self, z) -> bool:
        lo_ok = z > self.lower if self.lower_open else z >= self.lower
        hi_ok = z < self.upper if self.upper_open else z <= self.upper
        return bool(np.all(lo_ok) and np.all(hi_ok))

    def clamp_interior(self, z, eps: float = INTERIOR_EPS):
        """Clamp z away from bounded endpoints by an absolute eps."""
        lo = self.lower + eps if math.isfinite(self.lower) else -np.inf
        hi = self.upper - eps if math.isfinite(self.upper) else np.inf
        return np.clip(z, lo, hi)

    def __str__(self):
        return self.label


NONNEGATIVE = RangeInterval(0.0, math.inf, False, True, "[0,inf)")
UNIT = RangeInterval(0.0, 1.0, False, False, "[0,1]")
REALS = RangeInterval(-math.inf, math.inf, True, True, "R")
SYMMETRIC_UNIT = RangeInterval(-1.0, 1.0, False, False, "[-1,1]")

CANONICAL_RANGES = (NONNEGATIVE, UNIT, REALS, SYMMETRIC_UNIT)


@dataclass(frozen=True)
class SquashDescriptor:
    """Final-layer nonlinearity keeping discriminator outputs inside a range.

    ``second_deriv`` is needed by the exact gradient-penalty pass, which
    differentiates through the input-gradient computation.
    """

    name: str
    range: RangeInterval
    fn: Callable
    deriv: Callable
    second_deriv: Callable


def _sigmoid(u):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(u, dtype=float)))


def _softplus(u):
    return np.logaddexp(0.0, np.asarray(u, dtype=float))


_SQUASHES = {
    NONNEGATIVE.label: SquashDescriptor(
        name="softplus",
        range=NONNEGATIVE,
        fn=_softplus,
        deriv=_sigmoid,
        second_deriv=lambda u: _sigmoid(u) * (1.0 - _sigmoid(u)),
    ),
    UNIT.label: SquashDescriptor(
        name="logistic",
        range=UNIT,
        fn=_sigmoid,
        deriv=lambda u: _sigmoid(u) * (1.0 - _sigmoid(u)),
        second_deriv=lambda u: _sigmoid(u)
        * (1.0 - _sigmoid(u))
        * (1.0 - 2.0 * _sigmoid(u)),
    ),
    REALS.label: SquashDescriptor(
        name="identity",
        range=REALS,
        fn=lambda u: np.asarray(u, dtype=float),
        deriv=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        second_deriv=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
    ),
    SYMMETRIC_UNIT.label: SquashDescriptor(
        name="tanh",
        range=SYMMETRIC_UNIT,
        fn=lambda u: np.tanh(np.asarray(u, dtype=float)),
        deriv=lambda u: 1.0 - np.tanh(u) ** 2,
        second_deriv=lambda u: -2.0 * np.tanh(u) * (1.0 - np.tanh(u) ** 2),
    ),
}


def output_squashing_for(rng: RangeInterval) -> SquashDescriptor:
    """Return the discriminator output nonlinearity for a canonical range."""
    try:
        return _SQUASHES[rng.label]
    except KeyError:
        raise ValueError(
            f"no output squashing for non-canonical range {rng.label!r}; "
            f"canonical ranges are {[r.label for r in CANONICAL_RANGES]}"
        ) from None


@dataclass(frozen=True)
class OmegaTransform:
    """Strictly increasing transform of the nonnegative likelihood ratio."""

    forward: Callable
    inverse: Optional[Callable]
    range: RangeInterval
    invertible: bool
    description: str = ""

    def validate(self, probe: np.ndarray = OMEGA_PROBE) -> None:
        """Check strict increase (and inverse round-trip) on the probe grid.

        Sharp transforms saturate to finite range endpoints in float64
        (and the interior clamp hides the last digits there), so points
        within twice the clamp distance of a finite endpoint are exempt
        from the strictness and round-trip checks.
        """
        vals = np.asarray([float(self.forward(r)) for r in probe])
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"omega not finite on probe grid: {self.description}")

        saturated = np.zeros(len(vals), dtype=bool)
        for bound in (self.range.lower, self.range.upper):
            if math.isfinite(bound):
                saturated |= np.abs(vals - bound) < 2.0 * INTERIOR_EPS
        flat_ok = saturated[:-1] & saturated[1:]
        if not np.all((np.diff(vals) > 0.0) | flat_ok):
            raise ValueError(
                f"omega is not strictly increasing on the probe grid: "
                f"{self.description or 'unnamed transform'}"
            )
        z1 = float(self.forward(1.0))
        if not self.range.contains(z1):
            raise ValueError(f"omega(1)={z1} outside declared range {self.range}")
        if self.invertible:
            if self.inverse is None:
                raise ValueError("invertible transform without an inverse")
            live = ~saturated
            rt = np.asarray([float(self.inverse(v)) for v in vals[live]])
            rel = np.abs(rt - probe[live]) / probe[live]
            if rel.size and rel.max() > 1e-9:
                raise ValueError(
                    f"inverse round-trip error {rel.max():.3e} exceeds 1e-9: "
                    f"{self.description}"
                )


class RatioNotRecoverableError(ValueError):
    """Raised when a loss does not expose an invertible ratio transform."""


@dataclass(frozen=True)
class LossPair:
    """A (phi, psi) pair, represented primarily by its derivatives.

    ``phi``/``psi``/``rho`` are optional: constructed pairs are
    derivative-only, catalogue entries carry the known closed forms.
    ``is_limit`` marks the sign-limit losses (Hinge, Wasserstein) whose
    psi' is allowed to vanish or, for the shipped Wasserstein
    orientation, flip sign.
    """

    name: str
    phi_prime: Callable
    psi_prime: Callable
    omega: OmegaTransform
    range: RangeInterval
    ratio_invertible: bool
    phi: Optional[Callable] = None
    psi: Optional[Callable] = None
    rho: Optional[Callable] = None
    is_limit: bool = False

    @property
    def omega_at_one(self) -> float:
        """Discriminator value at the matched-density solution r = 1."""
        return float(self.omega.forward(1.0))

    def squashing(self) -> SquashDescriptor:
        return output_squashing_for(self.range)


def probe_points(loss: LossPair, n: int = 200) -> np.ndarray:
    """Interior probe grid in discriminator space.

    Images of log-spaced ratios under omega, so the points are interior
    for every canonical range; limit losses fall back to a plain grid.
    """
    if loss.ratio_invertible:
        r = np.logspace(-3.0, 3.0, n)
        z = np.asarray([float(loss.omega.forward(v)) for v in r])
        return loss.range.clamp_interior(z)
    return np.linspace(-5.0, 5.0, n)


def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    """Adaptive Simpson quadrature with the standard 15x error rule.

    The tolerance is relative to the integral's own magnitude, so
    integrands spanning many decades (exponential weights probed over
    wide windows) terminate instead of chasing absolute digits float64
    cannot represent.
    """
    if a == b:
        return 0.0

    def recurse(x0, f0, x2, f2, x1, f1, whole, tol, depth):
        xl = 0.5 * (x0 + x1)
        xr = 0.5 * (x1 + x2)
        fl = f(xl)
        fr = f(xr)
        left = (x1 - x0) / 6.0 * (f0 + 4.0 * fl + f1)
        right = (x2 - x1) / 6.0 * (f1 + 4.0 * fr + f2)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(x0, f0, x1, f1, xl, fl, left, 0.5 * tol, depth - 1) + recurse(
            x1, f1, x2, f2, xr, fr, right, 0.5 * tol, depth - 1
        )

    lo, hi, sign = (a, b, 1.0) if a < b else (b, a, -1.0)
    mid = 0.5 * (lo + hi)
    flo, fhi, fmid = f(lo), f(hi), f(mid)
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    scale = max(1.0, abs(whole))
    return sign * recurse(lo, flo, hi, fhi, mid, fmid, whole, tol * scale, 48)


def antiderivative_from(deriv: Callable, anchor: float, tol: float = 1e-8) -> Callable:
    """Antiderivative of ``deriv`` vanishing at ``anchor``, by quadrature.

    Used as the closed-form surrogate for derivative-only pairs.
    """

    def scalar(z: float) -> float:
        return _adaptive_simpson(lambda t: float(deriv(t)), anchor, float(z), tol)

    def F(z):
        arr = np.asarray(z, dtype=float)
        if arr.ndim == 0:
            return scalar(float(arr))
        return np.asarray([scalar(v) for v in arr.ravel()]).reshape(arr.shape)

    return F


def make_loss_pair(omega: OmegaTransform, rho: Callable, name: str = "custom") -> LossPair:
    """Build the derivative-only loss pair generated by (omega, rho).

    Raises if omega fails the monotonicity probe or rho is not strictly
    positive at the interior probe points of omega's range.
    """
    omega.validate()
    if not omega.invertible:
        raise ValueError(
            "make_loss_pair requires an invertible omega; "
            "limit losses are constructed separately"
        )

    rng = omega.range
    z_probe = rng.clamp_interior(
        np.asarray([float(omega.forward(r)) for r in OMEGA_PROBE])
    )
    rho_vals = np.asarray([float(rho(z)) for z in z_probe])
    if not np.all(np.isfinite(rho_vals)) or np.any(rho_vals <= 0.0):
        bad = z_probe[~(np.isfinite(rho_vals) & (rho_vals > 0.0))][0]
        raise ValueError(f"rho must be strictly positive on the range; rho({bad}) <= 0")

    inverse = omega.inverse

    def psi_prime(z):
        return rho(rng.clamp_interior(z))

    def phi_prime(z):
        zc = rng.clamp_interior(z)
        return -inverse(zc) * rho(zc)

    return LossPair(
        name=name,
        phi_prime=phi_prime,
        psi_prime=psi_prime,
        omega=omega,
        range=rng,
        ratio_invertible=True,
        rho=rho,
    )


def make_monotone_loss(c: float, rho: Callable, name: Optional[str] = None) -> LossPair:
    """Loss pair for the smooth sign-like transform (r^c - 1)/(r^c + 1).

    The transform tends to sign(log r) as c grows; for finite c it is
    strictly increasing with range [-1, 1] and inverse
    ((1 + z)/(1 - z))^(1/c).
    """
    if not (c > 0.0 and math.isfinite(c)):
        raise ValueError(f"c must be a positive finite real, got {c}")

    def forward(r):
        rc = np.asarray(r, dtype=float) ** c
        return (rc - 1.0) / (rc + 1.0)

    def inverse(z):
        zc = SYMMETRIC_UNIT.clamp_interior(z)
        return ((1.0 + zc) / (1.0 - zc)) ** (1.0 / c)

    omega = OmegaTransform(
        forward=forward,
        inverse=inverse,
        range=SYMMETRIC_UNIT,
        invertible=True,
        description=f"(r^{c} - 1)/(r^{c} + 1)",
    )
    return make_loss_pair(omega, rho, name=name or f"monotone(c={c:g})")


def normalize_psi(loss: LossPair, tol: float = 1e-8) -> LossPair:
    """Shift psi so the normalized copy vanishes at omega(1).

    Derivatives are untouched.  Pairs without a closed-form psi get a
    quadrature surrogate anchored at omega(1), which is the normalized
    psi directly.
    """
    z1 = loss.omega_at_one
    if loss.psi is not None:
        base = loss.psi
        shift = float(base(z1))
        if shift == 0.0:
            return loss
        psi_tilde = lambda z, _b=base, _s=shift: _b(z) - _s
    else:
        psi_tilde = antiderivative_from(loss.psi_prime, z1, tol=tol)
    return replace(loss, psi=psi_tilde)


def ratio_from_discriminator(loss: LossPair, d):
    """Map discriminator output(s) back to likelihood-ratio estimate(s).

    Outputs are clamped to the interior of the loss range before the
    inverse transform is applied.
    """
    if not loss.ratio_invertible or loss.omega.inverse is None:
        raise RatioNotRecoverableError(
            f"ratio not recoverable: {loss.name} uses a sign-limit transform "
            f"whose inverse does not exist"
        )
    d = np.asarray(d, dtype=float)
    if not loss.range.contains(loss.range.clamp_interior(d)):
        raise ValueError(f"discriminator output outside {loss.range}")
    out = loss.omega.inverse(loss.range.clamp_interior(d))
    return float(out) if np.ndim(d) == 0 else out
