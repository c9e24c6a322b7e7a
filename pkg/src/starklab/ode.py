"""Adaptive high-order Taylor integration of psi'' = (v(x) - eps x - E) psi.

The coefficient function is entire, so each step expands the solution in a
Taylor series of order ~0.7 * working-bits (the order that balances the
O(order^2) recurrence cost against step length: with local error budget
2^-b the usable step satisfies (h k)^N / N! ~ 2^-b, so very high orders buy
near-frequency-sized steps). All state is explicit; nothing global.

Forward integration of the left-recessive solution and backward integration
of the right-recessive one are the stable directions; the caller is
responsible for direction choices, this module just steps accurately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import mpmath

from .core import DomainError, PrecisionContext


@dataclass
class StepStats:
    steps: int = 0
    rejected: int = 0


def _potential_taylor(harmonics: Dict[int, mpmath.mpf], x0, n: int, mp) -> list:
    """Taylor coefficients of v(x0 + h) = sum_k 2 c_k cos(2 pi k (x0+h)), j = 0..n."""
    out = [mp.mpf(0)] * (n + 1)
    for k, ck in harmonics.items():
        w = mp.mpc(0, 2 * mp.pi * k)
        z = ck * mp.exp(w * x0)            # c_k e^{2 pi i k x0}, then iterate w^j/j!
        for j in range(n + 1):
            out[j] += 2 * z.real
            z = z * w / (j + 1)
    return out


def integrate_schrodinger(E, epsilon, harmonics: Dict[int, mpmath.mpf],
                          x0, x1, psi, dpsi,
                          ctx: PrecisionContext,
                          order: int = 0,
                          tol_local: float = 0.0,
                          stats: StepStats | None = None) -> Tuple[mpmath.mpc, mpmath.mpc]:
    """Carry (psi, psi') from x0 to x1 (either direction) along the real axis."""
    mp = ctx.mp
    eps = mp.mpf(epsilon)
    Ec = mp.mpc(E)
    x = mp.mpf(x0)
    xe = mp.mpf(x1)
    c0 = mp.mpc(psi)
    c1 = mp.mpc(dpsi)
    if order <= 0:
        order = max(48, min(1400, int(0.7 * ctx.mantissa_bits)))
    if tol_local <= 0:
        tol_local = math.ldexp(1.0, -(ctx.mantissa_bits - 24))
    tol = mp.mpf(tol_local)
    direction = 1 if xe >= x else -1
    n = order

    while (xe - x) * direction > 0:
        vj = _potential_taylor(harmonics, x, n, mp)
        F0 = vj[0] - eps * x - Ec
        F = [F0, vj[1] - eps] + vj[2:]
        c = [c0, c1]
        for kk in range(n - 1):
            # c_{kk+2} = (sum_{j<=kk} F_j c_{kk-j}) / ((kk+1)(kk+2))
            acc = F0 * c[kk]
            for j in range(1, kk + 1):
                fj = F[j]
                if fj:
                    acc += fj * c[kk - j]
            c.append(acc / ((kk + 1) * (kk + 2)))

        kappa = mp.sqrt(abs(F0)) + 1
        scale = max(abs(c0), abs(c1) / kappa)
        if scale == 0:
            raise DomainError("zero state cannot be integrated")
        hmax = abs(xe - x)
        h = hmax
        for k in (n, n - 1, n - 2):
            ck = abs(c[k])
            if ck > 0:
                hk = (tol * scale / ck) ** (mp.mpf(1) / k)
                if hk < h:
                    h = hk
        h = min(mp.mpf("0.9") * h if h < hmax else hmax, hmax)
        if h <= 0:
            raise DomainError("step size underflow")
        s = h * direction

        # Horner for value and derivative
        val = c[n]
        for k in range(n - 1, -1, -1):
            val = val * s + c[k]
        der = n * c[n]
        for k in range(n - 1, 0, -1):
            der = der * s + k * c[k]

        x = xe if h == hmax else x + s
        c0, c1 = val, der
        if stats is not None:
            stats.steps += 1
    return c0, c1
