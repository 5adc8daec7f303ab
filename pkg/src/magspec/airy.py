"""Airy function zeros from first principles, as an independent oracle.

The evaluator sums the Maclaurin series of Ai and Ai' in fixed-precision
decimal arithmetic (the series is alternating for negative arguments with
catastrophically large intermediate terms, so binary doubles lose the answer
beyond |x| ~ 8).  The two series constants Ai(0), Ai'(0) need Gamma(1/3) and
Gamma(2/3), computed here with Spouge's expansion, whose truncation error has
a closed-form bound.  No special-function library is consulted anywhere; the
test suite may compare the results against one, but the oracle itself must
stand alone.
"""

from __future__ import annotations

import math
from decimal import Decimal, getcontext
from typing import Dict, Tuple

__all__ = ["airy_ai", "airy_ai_prime", "airy_zero"]

_PRECISION = 50


def _ctx():
    getcontext().prec = _PRECISION
    return getcontext()


def _dec_pi() -> Decimal:
    # Machin-like arctan series are overkill; Chudnovsky-lite via the
    # AGM would be too. Use the classic Machin formula with the series for
    # arctan at 1/5 and 1/239, which converges fast enough at this precision.
    _ctx()

    def arctan_inv(n: int) -> Decimal:
        x = Decimal(1) / n
        x2 = x * x
        term = x
        total = Decimal(0)
        k = 0
        while term != 0:
            total += term / (2 * k + 1) * (1 if k % 2 == 0 else -1)
            term *= x2
            k += 1
            if k > 200:
                break
        return total

    return 16 * arctan_inv(5) - 4 * arctan_inv(239)


_CONSTS: Dict[str, Decimal] = {}


def _spouge_gamma(z: Decimal) -> Decimal:
    """Gamma(z) by Spouge's formula with a = 41 terms.

    The relative truncation error is bounded by a^{-1/2} (2 pi)^{-(a+1/2)},
    below 1e-33 here, far under the working precision for our two fixed
    arguments in (0, 1).
    """
    ctx = _ctx()
    a = 41
    pi = _CONSTS["pi"]
    two_pi = 2 * pi
    half = Decimal(1) / 2
    c0 = two_pi.sqrt()
    zm1 = z - 1
    acc = c0
    e = Decimal(1).exp()
    for k in range(1, a):
        ak = Decimal(a - k)
        # c_k = (-1)^{k-1} / (k-1)! * (a-k)^{k-1/2} * e^{a-k}
        ck = (ak ** (Decimal(k) - half)) * (e ** ak) / Decimal(math.factorial(k - 1))
        if k % 2 == 0:
            ck = -ck
        acc += ck / (zm1 + k)
    power = (zm1 + a) ** (zm1 + half)
    return power * (-(zm1 + a)).exp() * acc


def _constants() -> Tuple[Decimal, Decimal]:
    """(Ai(0), -Ai'(0)) = (3^{-2/3}/Gamma(2/3), 3^{-1/3}/Gamma(1/3))."""
    if "ai0" not in _CONSTS:
        _ctx()
        _CONSTS["pi"] = _dec_pi()
        third = Decimal(1) / 3
        g13 = _spouge_gamma(third)
        g23 = _spouge_gamma(2 * third)
        # cross-check via the reflection identity Gamma(1/3)Gamma(2/3) = 2 pi / sqrt(3)
        lhs = g13 * g23
        rhs = 2 * _CONSTS["pi"] / Decimal(3).sqrt()
        if abs(lhs - rhs) / rhs > Decimal(10) ** (-(_PRECISION - 10)):
            raise ArithmeticError("Gamma evaluation failed its reflection-identity check")
        three = Decimal(3)
        _CONSTS["ai0"] = 1 / (three ** (2 * third) * g23)
        _CONSTS["ai0p"] = 1 / (three ** third * g13)
    return _CONSTS["ai0"], _CONSTS["ai0p"]


def _airy_series(x: Decimal) -> Tuple[Decimal, Decimal]:
    """(Ai(x), Ai'(x)) by the Maclaurin series, tail-bounded termination.

    Terms are generated by the recurrences f_{k+1}/f_k = x^3 (3k+1) /
    ((3k+3)(3k+2)(3k+1)) etc.; summation stops when the running term falls
    below 10^{-prec-5} with ratio < 1/2, bounding the tail geometrically.
    """
    ctx = _ctx()
    ai0, ai0p = _constants()
    x3 = x * x * x
    # f-series: sum 3^k (1/3)_k x^{3k} / (3k)!;
    # g-series: sum 3^k (2/3)_k x^{3k+1} / (3k+1)!
    f_term = Decimal(1)
    g_term = x
    f_sum = f_term
    g_sum = g_term
    # derivative series: f' = sum ... x^{3k-1}, g' = sum ... x^{3k}
    fp_sum = Decimal(0)
    gp_sum = Decimal(1)
    gp_term = Decimal(1)
    tiny = Decimal(10) ** (-(_PRECISION + 5))
    k = 0
    while True:
        k += 1
        tk = 3 * k
        f_term = f_term * x3 / (tk * (tk - 1) * (tk - 2)) * (tk - 2)
        g_term = g_term * x3 / ((tk + 1) * tk * (tk - 1)) * (tk - 1)
        f_sum += f_term
        g_sum += g_term
        fp_sum += f_term * tk / x if x != 0 else Decimal(0)
        gp_term = g_term * (tk + 1) / x if x != 0 else Decimal(0)
        gp_sum += gp_term
        if k > 8:
            mx = max(abs(f_term), abs(g_term))
            if mx < tiny and abs(x3) / ((tk + 3) * (tk + 2)) < Decimal("0.5"):
                break
        if k > 4000:
            raise ArithmeticError(f"Airy series did not terminate at x={x}")
    ai = ai0 * f_sum - ai0p * g_sum
    aip = ai0 * fp_sum - ai0p * gp_sum
    return ai, aip


def airy_ai(x: float) -> float:
    """Ai(x) for |x| <= 14, from the decimal Maclaurin series."""
    if abs(x) > 14:
        raise ValueError("series evaluator is restricted to |x| <= 14")
    return float(_airy_series(Decimal(repr(x)))[0])


def airy_ai_prime(x: float) -> float:
    """Ai'(x) for |x| <= 14, from the decimal Maclaurin series."""
    if abs(x) > 14:
        raise ValueError("series evaluator is restricted to |x| <= 14")
    return float(_airy_series(Decimal(repr(x)))[1])


_ZERO_CACHE: Dict[Tuple[str, int], float] = {}


def airy_zero(kind: str, k: int) -> float:
    """Magnitude of the k-th negative zero of Ai ('Ai') or Ai' ('AiPrime').

    Bisection on the decimal series evaluator; supported for k <= 10.  The
    first zeros sit near 2.34 (Ai) and 1.02 (Ai'), and consecutive zeros of
    each kind strictly increase.
    """
    if kind not in ("Ai", "AiPrime"):
        raise ValueError("kind must be 'Ai' or 'AiPrime'")
    if not (1 <= k <= 10):
        raise ValueError("zero index must satisfy 1 <= k <= 10")
    key = (kind, k)
    hit = _ZERO_CACHE.get(key)
    if hit is not None:
        return hit

    idx = 0 if kind == "Ai" else 1

    def f(t: Decimal) -> Decimal:
        return _airy_series(-t)[idx]

    # scan outward in steps of 0.05 counting sign changes; zeros of Ai and
    # Ai' are simple and interlace, with gaps well above the scan step
    step = Decimal("0.05")
    t = Decimal("0.0001") if kind == "Ai" else Decimal("0.0001")
    prev = f(t)
    found = 0
    while found < k:
        t2 = t + step
        cur = f(t2)
        if prev == 0:
            found += 1
            lo, hi = t, t
        elif (prev < 0) != (cur < 0):
            found += 1
            lo, hi = t, t2
        t, prev = t2, cur
        if t > 14:
            raise ValueError("zero search left the validated series range")
    for _ in range(170):
        mid = (lo + hi) / 2
        vm = f(mid)
        vl = f(lo)
        if vm == 0:
            lo = hi = mid
            break
        if (vl < 0) != (vm < 0):
            hi = mid
        else:
            lo = mid
    val = float((lo + hi) / 2)
    _ZERO_CACHE[key] = val
    return val
