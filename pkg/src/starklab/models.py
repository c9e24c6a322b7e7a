"""Closed-form asymptotic models for the inverse reflection coefficient.

Four models, all ultimately driven by the Fourier-coefficient law

    p(m) = a(eps) sqrt(m) exp(-2 pi i omega m^3 - 2 m log(2 pi m / e)),

with a(eps) = sqrt(2/eps) pi e^{i pi/4}:

  * fourier_coeff_model   -- p(m) itself (residual delta(m) set to zero),
  * regularized_cubic_sum -- P(s) = sum_m p-like terms e^{2 pi i m s},
  * rational_model        -- the two-scale window formula for omega = p/q,
  * omega_zero_model      -- its q = 1 specialization b sqrt(z) e^{sqrt(z)}.

Calibration note. The window formulas are implemented exactly as displayed
("printed" calibration, the default), with the depth variable R = rho. The
saddle point of the regularized sum, however, sits at index rho/(2 pi) and
yields the same display with R = rho/pi; the printed scale is inconsistent
with the coefficient law above (summing |p(m)| rho^{2m} can reach e^{rho/pi}
but never e^{rho}), and direct scattering computations side with the saddle.
The "bridged" calibration applies R = rho/pi and is the variant that can be
compared quantitatively against the ODE oracle. Both calibrations are kept:
printed is the contract, bridged is the cross-validation vehicle, and
compare reports always state which one they used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import mpmath

from .core import (DEFAULT_CTX, DomainError, ModelValue, PrecisionContext,
                   SpectralParams, scaled_coords)
from .expsums import ExpSumTable, _roots_of_unity, sum_table

Calibration = Literal["printed", "bridged"]

_table_cache: dict = {}


def _cached_table(q: int, p: int, ctx: PrecisionContext) -> ExpSumTable:
    key = (q, p, ctx.mantissa_bits)
    if key not in _table_cache:
        _table_cache[key] = sum_table(q, p, ctx)
    return _table_cache[key]


@dataclass(frozen=True)
class PrefactorSet:
    """a(eps) and b(eps); b/a = sqrt(pi)/2 is an exact algebraic identity."""

    a_eps: mpmath.mpc
    b_eps: mpmath.mpc


def prefactors(params: SpectralParams, ctx: PrecisionContext = DEFAULT_CTX) -> PrefactorSet:
    mp = ctx.mp
    phase = mp.exp(1j * mp.pi / 4)
    a = mp.sqrt(2 / params.epsilon) * mp.pi * phase
    b = mp.pi ** mp.mpf("1.5") * phase / mp.sqrt(2 * params.epsilon)
    return PrefactorSet(a_eps=a, b_eps=b)


def _cubic_phase(m: int, params: SpectralParams, ctx: PrecisionContext) -> mpmath.mpc:
    """exp(-2 pi i omega m^3), reduced exactly mod 1 when omega is tagged rational."""
    mp = ctx.mp
    if params.rational_tag is not None:
        p, q, _ = params.rational_tag
        r = (p * pow(m % q, 3, q)) % q
        return _roots_of_unity(q, ctx)[r]
    frac = params.omega * m ** 3
    frac -= mp.floor(frac)
    return mp.exp(-2j * mp.pi * frac)


def _log_term_mag(m: int, y, mp) -> mpmath.mpf:
    # log |sqrt(m) e^{-2m log(2 pi m / e) + 2 pi m y}|; independent of Re s.
    return mp.mpf("0.5") * mp.log(m) - 2 * m * (mp.log(2 * mp.pi * m) - 1) + 2 * mp.pi * m * y


def fourier_coeff_model(m: int, params: SpectralParams,
                        ctx: PrecisionContext = DEFAULT_CTX) -> ModelValue:
    """Model Fourier coefficient p(m) with the residual delta(m) set to zero.

    est_error carries the theoretical residual scale log^2(m)/m, not a bound.
    """
    if m < 1:
        raise DomainError("m must be a positive integer")
    mp = ctx.mp
    pref = prefactors(params, ctx).a_eps
    mag = mp.sqrt(m) * mp.exp(-2 * m * (mp.log(2 * mp.pi * m) - 1))
    value = pref * mag * _cubic_phase(m, params, ctx)
    scale = math.log(m) ** 2 / m if m > 1 else 0.0
    return ModelValue(value=value, truncation_index=m, est_error=scale)


def regularized_cubic_sum(s, params: SpectralParams,
                          ctx: PrecisionContext = DEFAULT_CTX,
                          max_terms: int = 2_000_000) -> ModelValue:
    """P(s) = sum_{m>=1} sqrt(m) e^{-2 pi i omega m^3 - 2m log(2 pi m/e) + 2 pi i m s}.

    Valid for Im s <= 0. Terms grow until m is of order e^{-pi Im s}/(2 pi)
    and then die super-exponentially; summation stops once the term ratio
    drops below 1/2 and the geometric tail bound falls under
    tolerance * |partial sum|. The tail bound is returned in est_error.
    """
    mp = ctx.mp
    sc = mp.mpc(s)
    if sc.imag > 0:
        raise DomainError("regularized cubic sum is defined for Im s <= 0")
    y = -sc.imag
    tol = ctx.tolerance
    phase_s = mp.exp(2j * mp.pi * sc)

    total = mp.mpc(0)
    power = mp.mpc(1)          # phase_s ** m, kept incrementally
    m = 0
    prev_mag = None
    while True:
        m += 1
        if m > max_terms:
            raise DomainError("regularized cubic sum failed to converge (max_terms)")
        power *= phase_s
        mag = mp.exp(_log_term_mag(m, y, mp))
        term = mag * _cubic_phase(m, params, ctx) * power
        total += term
        if prev_mag is not None and mag > 0:
            ratio = mag / prev_mag
            if ratio < mp.mpf("0.5"):
                next_mag = mp.exp(_log_term_mag(m + 1, y, mp))
                tail = next_mag / (1 - next_mag / mag)
                if tail < tol * abs(total) or tail < mp.mpf(2) ** (-ctx.mantissa_bits * 2):
                    return ModelValue(value=total, truncation_index=m,
                                      est_error=float(tail))
        prev_mag = mag


def inverse_r_cubic(E, params: SpectralParams,
                    ctx: PrecisionContext = DEFAULT_CTX) -> ModelValue:
    """1/r(E) ~ a(eps) P(E/eps); epsilon-periodic in E by construction."""
    mp = ctx.mp
    Ec = mp.mpc(E)
    if Ec.imag > 0:
        raise DomainError("model is restricted to Im E <= 0")
    P = regularized_cubic_sum(Ec / params.epsilon, params, ctx)
    a = prefactors(params, ctx).a_eps
    return ModelValue(value=a * P.value, truncation_index=P.truncation_index,
                      est_error=float(abs(a)) * P.est_error)


@dataclass(frozen=True)
class IndexWindow:
    """Integers m with |xi - m/q| <= 1/2 (closed inequality, ties included)."""

    q: int
    xi: mpmath.mpf
    members: Tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.members)
        if n not in (self.q, self.q + 1):
            raise DomainError("window must contain q or q+1 consecutive integers")
        if list(self.members) != list(range(self.members[0], self.members[0] + n)):
            raise DomainError("window members must be consecutive")


def index_window(xi, q: int, ctx: PrecisionContext = DEFAULT_CTX) -> IndexWindow:
    """I_q(xi) with the printed closed inequality; boundary ties kept on both
    sides (a few ulp of slack so representable half-integers are not lost)."""
    if q < 1:
        raise DomainError("q must be positive")
    mp = ctx.mp
    x = mp.mpf(xi)
    half = mp.mpf("0.5")
    slack = (abs(x) + 1) * mp.mpf(2) ** (-ctx.mantissa_bits + 8)
    lo = int(mp.ceil(q * (x - half))) - 1
    hi = int(mp.floor(q * (x + half))) + 1
    members = [m for m in range(lo, hi + 1) if abs(x - mp.mpf(m) / q) <= half + slack]
    return IndexWindow(q=q, xi=x, members=tuple(members))


def rational_model(E, params: SpectralParams,
                   ctx: PrecisionContext = DEFAULT_CTX,
                   calibration: Calibration = "printed",
                   table: Optional[ExpSumTable] = None) -> ModelValue:
    """Window formula for 1/r(E) at omega = p/q (leading term, O(.) factors dropped).

        (b(eps) R / q) sum_{m in I_q(xi)} S_q(p,m)
                        exp(R e^{i pi (xi - m/q)} + i pi (xi - m/q))

    with R = rho as printed, or R = rho/pi under the bridged calibration
    (see the module docstring). est_error carries the relative error scale
    log^2(rho)/rho of the dropped exponent factor.
    """
    if params.rational_tag is None:
        raise DomainError("rational_model requires params with a rational_tag")
    p, q, _ = params.rational_tag
    mp = ctx.mp
    pt = scaled_coords(E, params, ctx)
    if pt.E.imag > 0:
        raise DomainError("model is restricted to Im E <= 0")
    R = pt.rho / mp.pi if calibration == "bridged" else pt.rho
    if table is None:
        table = _cached_table(q, p, ctx)
    b = prefactors(params, ctx).b_eps
    window = index_window(pt.xi, q, ctx)
    total = mp.mpc(0)
    for m in window.members:
        phase = 1j * mp.pi * (pt.xi - mp.mpf(m) / q)
        total += table.value(m) * mp.exp(R * mp.exp(phase) + phase)
    value = b * R / q * total
    lr = mp.log(pt.rho)
    scale = float(lr ** 2 / pt.rho) if pt.rho > 1 else 1.0
    return ModelValue(value=value, truncation_index=None, est_error=scale)


def branch_boundary_distance(xi, ctx: PrecisionContext = DEFAULT_CTX) -> float:
    """Distance from xi to the branch set 1/2 + Z of the q = 1 model."""
    mp = ctx.mp
    x = mp.mpf(xi) - mp.mpf("0.5")
    return float(abs(x - mp.nint(x)))


def omega_zero_model(E, params: SpectralParams,
                     ctx: PrecisionContext = DEFAULT_CTX,
                     calibration: Calibration = "printed") -> ModelValue:
    """(b(eps) r(E))^{-1} ~ sqrt(z) e^{sqrt(z)}, z = e^{2 i pi E / eps}.

    The square root is the principal determination (analytic off the negative
    reals, positive on the positive reals); on the branch set xi in 1/2 + Z
    the value is the limit from Im z > 0. Under the bridged calibration
    sqrt(z) is replaced by sqrt(z)/pi. est_error carries the ln^2|z|/sqrt|z|
    scale of the dropped exponent correction.
    """
    mp = ctx.mp
    pt = scaled_coords(E, params, ctx)
    if pt.E.imag > 0:
        raise DomainError("model is restricted to Im E <= 0")
    # sqrt(z) = rho e^{i pi xi_hat} with xi_hat reduced to (-1/2, 1/2]; the
    # half-open reduction *is* the principal branch with the Im z > 0 limit.
    xi_hat = pt.xi - mp.floor(pt.xi + mp.mpf("0.5"))
    if xi_hat == mp.mpf("-0.5"):
        xi_hat = -xi_hat
    root = pt.rho * mp.exp(1j * mp.pi * xi_hat)
    if calibration == "bridged":
        root = root / mp.pi
    b = prefactors(params, ctx).b_eps
    value = b * root * mp.exp(root)
    absz = pt.rho ** 2
    scale = float(mp.log(absz) ** 2 / mp.sqrt(absz)) if absz > 1 else 1.0
    return ModelValue(value=value, truncation_index=None, est_error=scale)


class CubicSumEvaluator:
    """Scan-grade evaluator of P(s) with automatic per-point precision.

    Zero hunts evaluate P thousands of times near the anti-Stokes lines
    where the sum cancels down from its largest term by a factor up to
    e^{rho/pi}. Working precision therefore has to follow the cancellation
    depth, which this class estimates per point from (xi, rho); term
    magnitude tables are cached per precision level so a boundary walk costs
    one exp and two multiplies per term.

    Restricted to rational omega (the only case the zero hunts need): the
    cubic phase is then an exact root of unity independent of precision.
    """

    _LEVELS = (64, 128, 192, 256, 384, 512, 768, 1024, 1536, 2048, 3072,
               4096, 6144, 8192, 12288)

    def __init__(self, params: SpectralParams, guard_bits: int = 96):
        if params.rational_tag is None:
            raise DomainError("CubicSumEvaluator requires rational omega")
        self.params = params
        self.guard_bits = guard_bits
        self._mag_cache: dict = {}    # bits -> (list of mpf magnitudes m=1..N, N)

    def _n_terms(self, y: float, bits: int) -> int:
        # Terms past the saddle decay like e^{-2m}; run to the saddle plus
        # enough slack that the tail is below 2^-bits of the peak.
        m_star = math.exp(math.pi * y) / (2 * math.pi)
        slack = 0.7 * bits + 40
        n = int(m_star + math.sqrt(max(m_star, 1.0) * slack) + slack)
        return max(n, 12)

    def bits_for(self, s) -> int:
        y = max(0.0, -float(mpmath.im(s)))
        xi = float(mpmath.re(s))
        rho_pi = math.exp(math.pi * y) / math.pi
        xi_hat = xi - math.floor(xi + 0.5)
        # cancellation depth: peak term e^{rho/pi} against |P| ~ max of the
        # window value and the low-m background ~ 0.19 rho^2
        log_peak = rho_pi
        log_p = max(rho_pi * math.cos(math.pi * xi_hat), 2 * math.pi * y - 1.6)
        need = int(1.4427 * max(0.0, log_peak - log_p)) + self.guard_bits + 64
        for lv in self._LEVELS:
            if lv >= need:
                return lv
        return need

    def _tables(self, y: float, bits: int):
        n = self._n_terms(y, bits)
        cached = self._mag_cache.get(bits)
        if cached is None or cached[1] < n:
            ctx = PrecisionContext(mantissa_bits=bits)
            mp = ctx.mp
            mags = [mp.exp(mp.mpf("0.5") * mp.log(m) - 2 * m * (mp.log(2 * mp.pi * m) - 1))
                    for m in range(1, n + 1)]
            p, q, _ = self.params.rational_tag
            roots = _roots_of_unity(q, ctx)
            phases = [roots[(p * pow(m % q, 3, q)) % q] for m in range(1, n + 1)]
            coeff = [mags[i] * phases[i] for i in range(n)]
            self._mag_cache[bits] = (coeff, n, ctx)
            if len(self._mag_cache) > 8:
                self._mag_cache.pop(next(iter(self._mag_cache)))
        return self._mag_cache[bits]

    def __call__(self, s, bits: Optional[int] = None) -> mpmath.mpc:
        if bits is None:
            bits = self.bits_for(s)
        y = max(0.0, -float(mpmath.im(s)))
        coeff, n, ctx = self._tables(y, bits)
        mp = ctx.mp
        sc = mp.mpc(s)
        if sc.imag > 0:
            raise DomainError("P(s) evaluator requires Im s <= 0")
        w = mp.exp(2j * mp.pi * sc)
        power = mp.mpc(1)
        total = mp.mpc(0)
        n_use = min(n, self._n_terms(y, bits))
        for i in range(n_use):
            power *= w
            total += coeff[i] * power
        return total
