"""Shared numeric types: precision context, field parameters, scaled coordinates.

All arithmetic in this package runs on explicit big-float contexts. A
:class:`PrecisionContext` owns an independent mpmath context (no global
precision state is ever touched), so values built under one context can be
used concurrently with values built under another.

Coordinates attached to a complex spectral parameter E:

    xi  = Re E / epsilon
    rho = exp(-pi * Im E / epsilon)

The pair (xi, rho) is the natural chart for everything deep in the lower
half plane: rho grows as E moves down, and all model magnitudes are
exponential in rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

import mpmath
from mpmath.ctx_mp import MPContext


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


def _fresh_mp_context(bits: int) -> MPContext:
    ctx = MPContext()
    ctx.prec = bits
    return ctx


@dataclass(frozen=True)
class PrecisionContext:
    """Binary working precision plus the target accuracy of reported results.

    Parameters
    ----------
    mantissa_bits : int
        Precision of every mpmath operation performed under this context.
        Must be at least 53 (double precision).
    tolerance : float, optional
        Target relative accuracy of results. Defaults to 2**-(bits-32) and
        may not be tighter than 2**-(bits-8); demanding more accuracy than
        the mantissa carries is a configuration error, not a numerics
        problem.
    """

    mantissa_bits: int = 192
    tolerance: Optional[float] = None
    mp: MPContext = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.mantissa_bits < 53:
            raise DomainError("mantissa_bits must be >= 53")
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", math.ldexp(1.0, -(self.mantissa_bits - 32)))
        if self.tolerance <= 0 or self.tolerance < math.ldexp(1.0, -(self.mantissa_bits - 8)):
            raise DomainError("tolerance must be positive and >= 2**-(mantissa_bits-8)")
        object.__setattr__(self, "mp", _fresh_mp_context(self.mantissa_bits))

    # mpmath caches pi internally per precision; going through the property
    # keeps every module on the same cached constant.
    @property
    def pi(self) -> mpmath.mpf:
        return self.mp.pi

    def mpf(self, x) -> mpmath.mpf:
        return self.mp.mpf(x)

    def mpc(self, re, im=0) -> mpmath.mpc:
        return self.mp.mpc(re, im)

    def to_bits(self, bits: int) -> "PrecisionContext":
        """Same tolerance policy at a different mantissa width."""
        if bits == self.mantissa_bits:
            return self
        return PrecisionContext(mantissa_bits=bits)


DEFAULT_CTX = PrecisionContext()


@dataclass(frozen=True)
class SpectralParams:
    """Electric field strength with its derived arithmetic phase.

    omega is the fractional part of pi^2/(3 epsilon). A floating epsilon can
    never certify a rational omega, so rationality is an explicit caller
    assertion carried in ``rational_tag = (p, q, n)``, meaning
    omega = p/q exactly and pi^2/(3 epsilon) = n + p/q.
    """

    epsilon: mpmath.mpf
    omega: mpmath.mpf
    rational_tag: Optional[Tuple[int, int, int]] = None

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise DomainError("epsilon must be positive")
        if not (0 <= self.omega < 1):
            raise DomainError("omega must lie in [0,1)")
        if self.rational_tag is not None:
            p, q, n = self.rational_tag
            if q < 1 or p < 0 or p >= q or n < 0:
                raise DomainError("rational_tag must satisfy 0 <= p < q, n >= 0")
            if math.gcd(p, q) != 1:
                raise DomainError("rational_tag requires gcd(p,q) = 1")
            if p == 0 and q != 1:
                raise DomainError("omega = 0 must be tagged as p/q = 0/1")

    @property
    def omega_fraction(self) -> Optional[Fraction]:
        if self.rational_tag is None:
            return None
        p, q, _ = self.rational_tag
        return Fraction(p, q)


@dataclass(frozen=True)
class EnergyPoint:
    """A spectral parameter together with its scaled coordinates."""

    E: mpmath.mpc
    xi: mpmath.mpf
    rho: mpmath.mpf


@dataclass(frozen=True)
class ModelValue:
    """Value of an asymptotic model with truncation bookkeeping.

    est_error is an upper bound for the neglected tail when the model is a
    truncated series, and otherwise records the *scale* of the error terms
    the underlying asymptotic formula drops (the formulas state orders, not
    constants, so this is normalization metadata for residual reports, not
    a rigorous enclosure).
    """

    value: mpmath.mpc
    truncation_index: Optional[int] = None
    est_error: float = 0.0

    def __post_init__(self) -> None:
        if self.est_error < 0:
            raise DomainError("est_error must be nonnegative")


def make_spectral_params(epsilon, ctx: PrecisionContext = DEFAULT_CTX) -> SpectralParams:
    """Build parameters from a field strength; omega = frac(pi^2/(3 epsilon))."""
    mp = ctx.mp
    eps = mp.mpf(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    x = mp.pi ** 2 / (3 * eps)
    omega = x - mp.floor(x)
    return SpectralParams(epsilon=eps, omega=omega)


def epsilon_from_omega(p: int, q: int, n: int, ctx: PrecisionContext = DEFAULT_CTX) -> SpectralParams:
    """Field strength realizing pi^2/(3 epsilon) = n + p/q with omega = p/q exactly."""
    if q < 1 or p < 0 or p >= q:
        raise DomainError("require 0 <= p < q")
    if math.gcd(p, q) != 1:
        raise DomainError("p and q must be coprime")
    if n == 0 and p == 0:
        raise DomainError("n + p/q must be positive")
    mp = ctx.mp
    eps = mp.pi ** 2 * q / (3 * (n * q + p))
    omega = mp.mpf(p) / q
    return SpectralParams(epsilon=eps, omega=omega, rational_tag=(p, q, n))


def scaled_coords(E, params: SpectralParams, ctx: PrecisionContext = DEFAULT_CTX) -> EnergyPoint:
    """Attach (xi, rho) to E: xi = Re E/eps, rho = exp(-pi Im E/eps)."""
    mp = ctx.mp
    Ec = mp.mpc(E)
    xi = Ec.real / params.epsilon
    rho = mp.exp(-mp.pi * Ec.imag / params.epsilon)
    return EnergyPoint(E=Ec, xi=xi, rho=rho)


def energy_from_coords(xi, rho, params: SpectralParams, ctx: PrecisionContext = DEFAULT_CTX) -> mpmath.mpc:
    """Inverse of :func:`scaled_coords`; rho must be positive."""
    mp = ctx.mp
    rho = mp.mpf(rho)
    if rho <= 0:
        raise DomainError("rho must be positive")
    return params.epsilon * mp.mpc(mp.mpf(xi), -mp.log(rho) / mp.pi)
