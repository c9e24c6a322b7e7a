"""Cubic complete rational exponential sums S_q(p,m) and their support structure.

    S_q(p,m) = sum_{l=0}^{q-1} exp(-2 pi i (p l^3 - m l) / q)

The exponent p l^3 - m l is reduced mod q in exact integer arithmetic before
any floating evaluation, and the q-th roots of unity are evaluated once per
(q, precision) and indexed, so there is no phase error growth with q. Since
the exponent is odd in l, every S_q(p,m) is a real algebraic integer; the
imaginary parts we compute are pure rounding noise and are retained only as
a sanity signal.

Two evaluation paths share the definition: an mpmath path at context
precision (the reference), and a vectorized complex128 path used by the
large census scans, whose rounding floor (about q * 1e-13) is far above
threshold questions only for the zero decision, which is always settled by
the mpmath path at doubled precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .core import DEFAULT_CTX, DomainError, PrecisionContext

_root_cache: Dict[Tuple[int, int], list] = {}


def _roots_of_unity(q: int, ctx: PrecisionContext) -> list:
    """Table of exp(-2 pi i k/q), k = 0..q-1, at context precision."""
    key = (q, ctx.mantissa_bits)
    table = _root_cache.get(key)
    if table is None:
        mp = ctx.mp
        w = mp.exp(-2j * mp.pi / q)
        table = [mp.mpc(1)]
        for _ in range(q - 1):
            table.append(table[-1] * w)
        _root_cache[key] = table
        if len(_root_cache) > 64:
            _root_cache.pop(next(iter(_root_cache)))
    return table


def _check_pq(q: int, p: int) -> None:
    if q < 1:
        raise DomainError("q must be a positive integer")
    if p < 0:
        raise DomainError("p must be nonnegative")
    if math.gcd(p, q) != 1:
        raise DomainError(f"p={p} and q={q} must be coprime")


def cubic_sum(q: int, p: int, m: int, ctx: PrecisionContext = DEFAULT_CTX) -> mpmath.mpc:
    """S_q(p,m) at context precision; m is reduced mod q (q-periodicity is exact)."""
    _check_pq(q, p)
    roots = _roots_of_unity(q, ctx)
    total = ctx.mp.mpc(0)
    for l in range(q):
        total += roots[(p * l * l * l - m * l) % q]
    return total


def cubic_sum_row_f64(q: int, p: int) -> np.ndarray:
    """All of m -> S_q(p,m) in complex128; exact integer phase reduction."""
    _check_pq(q, p)
    l = np.arange(q, dtype=np.int64)
    roots = np.exp(-2j * np.pi * l / q)
    cubes = (p * ((l * l % q) * l % q)) % q          # p l^3 mod q, overflow-safe
    m = np.arange(q, dtype=np.int64)
    idx = (cubes[None, :] - m[:, None] * l[None, :]) % q
    return roots[idx].sum(axis=1)


@dataclass(frozen=True)
class ExpSumTable:
    """The q-periodic vector m -> S_q(p,m) with zero-support metadata."""

    q: int
    p: int
    values: tuple
    support: tuple
    zero_threshold: float

    def __post_init__(self) -> None:
        if len(self.values) != self.q:
            raise DomainError("values must have length q")
        if not self.support:
            raise DomainError("support must be nonempty (Parseval forces a nonzero entry)")

    def value(self, m: int) -> mpmath.mpc:
        return self.values[m % self.q]

    def is_zero(self, m: int) -> bool:
        return (m % self.q) not in self.support


def _is_zero_refined(q: int, p: int, m: int, ctx: PrecisionContext) -> bool:
    """Zero decision: below q*2^(-bits/2) at working precision, re-verified
    at doubled precision against q*2^(-bits)."""
    s = cubic_sum(q, p, m, ctx)
    if abs(s) >= q * math.ldexp(1.0, -ctx.mantissa_bits // 2):
        return False
    ctx2 = ctx.to_bits(2 * ctx.mantissa_bits)
    s2 = cubic_sum(q, p, m, ctx2)
    return abs(s2) < q * math.ldexp(1.0, -ctx.mantissa_bits)


def sum_table(q: int, p: int, ctx: PrecisionContext = DEFAULT_CTX) -> ExpSumTable:
    """Tabulate S_q(p,m) for m = 0..q-1 and decide the zero support."""
    _check_pq(q, p)
    roots = _roots_of_unity(q, ctx)
    mp = ctx.mp
    values = []
    for m in range(q):
        total = mp.mpc(0)
        for l in range(q):
            total += roots[(p * l * l * l - m * l) % q]
        values.append(total)
    coarse = q * math.ldexp(1.0, -ctx.mantissa_bits // 2)
    support = tuple(
        m for m in range(q)
        if abs(values[m]) >= coarse or not _is_zero_refined(q, p, m, ctx)
    )
    return ExpSumTable(q=q, p=p, values=tuple(values), support=support,
                       zero_threshold=coarse)


def parseval_defect(table: ExpSumTable) -> float:
    """| sum_m |S_q(p,m)|^2 - q^2 |; the sum equals q^2 exactly."""
    total = mpmath.mpf(0)
    for s in table.values:
        total += abs(s) ** 2
    return float(abs(total - table.q ** 2))


def parseval_defect_f64(q: int, p: int) -> float:
    row = cubic_sum_row_f64(q, p)
    return float(abs(np.sum(np.abs(row) ** 2) - q * q))


def _coprime_ps(q: int, mode: str) -> List[int]:
    if q == 1:
        return [0]
    ps = [p for p in range(1, q) if math.gcd(p, q) == 1]
    if mode == "sample_p" and len(ps) > 8:
        step = len(ps) / 8.0
        ps = [ps[int(i * step)] for i in range(8)]
    return ps


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(n ** 0.5) + 1):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class CensusEntry:
    q: int
    p: int
    support_size: int
    ratio: float  # support_size / q^(2/3)


@dataclass(frozen=True)
class CensusReport:
    q_max: int
    mode: str
    entries: Tuple[CensusEntry, ...]
    min_ratio: float
    counterexamples: Tuple[Tuple[int, int, int], ...]  # (q, p, m) with q prime, 0<p,m<q, S=0

    def to_json(self) -> str:
        return json.dumps({
            "q_max": self.q_max,
            "mode": self.mode,
            "min_ratio": self.min_ratio,
            "entries": [
                {"q": e.q, "p": e.p, "support_size": e.support_size, "ratio": e.ratio}
                for e in self.entries
            ],
            "counterexamples": [
                {"q": q, "p": p, "m": m} for (q, p, m) in self.counterexamples
            ],
        }, indent=1)


def support_census(q_max: int,
                   mode: Literal["all_p", "sample_p"] = "all_p",
                   ctx: PrecisionContext = DEFAULT_CTX,
                   q_min: int = 2) -> CensusReport:
    """Scan |support(q,p)| / q^(2/3) and hunt prime-q zero counterexamples.

    The fast complex128 path flags candidate zeros (|S| < q * 1e-8); every
    flagged pair is settled by the mpmath rule before it can enter the
    support count or the counterexample list. The scan always runs to
    completion: counterexamples are reported, never asserted away.
    """
    if q_max < 2:
        raise DomainError("q_max must be >= 2")
    entries = []
    counterexamples = []
    min_ratio = math.inf
    for q in range(q_min, q_max + 1):
        prime = _is_prime(q)
        for p in _coprime_ps(q, mode):
            row = cubic_sum_row_f64(q, p)
            flagged = np.nonzero(np.abs(row) < q * 1e-8)[0]
            zeros = {int(m) for m in flagged if _is_zero_refined(q, p, int(m), ctx)}
            support_size = q - len(zeros)
            ratio = support_size / q ** (2.0 / 3.0)
            entries.append(CensusEntry(q=q, p=p, support_size=support_size, ratio=ratio))
            min_ratio = min(min_ratio, ratio)
            if prime:
                for m in sorted(zeros):
                    if 0 < m < q:
                        counterexamples.append((q, p, m))
    return CensusReport(q_max=q_max, mode=mode, entries=tuple(entries),
                        min_ratio=min_ratio, counterexamples=tuple(counterexamples))


def table_csv_rows(table: ExpSumTable, digits: int = 17) -> List[str]:
    """Rows (q, p, m, re_S, im_S, abs_S, is_zero) for the table export."""
    rows = []
    for m in range(table.q):
        s = table.values[m]
        rows.append("%d,%d,%d,%s,%s,%s,%d" % (
            table.q, table.p, m,
            mpmath.nstr(s.real, digits), mpmath.nstr(s.imag, digits),
            mpmath.nstr(abs(s), digits), 0 if m in table.support else 1,
        ))
    return rows
