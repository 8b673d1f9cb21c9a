"""Bracketed scalar root finding.

Every map solved in this package is monotone on its bracket, so plain
bisection always converges. A few secant steps afterwards sharpen the last
digits without ever leaving the final bracket.
"""
from __future__ import annotations

import math
from typing import Callable

from .errors import BracketError

XTOL = 1e-12
MAX_ITER = 200


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = XTOL,
    polish: int = 3,
) -> float:
    """Return a root of ``f`` in ``[lo, hi]``.

    ``f(lo)`` and ``f(hi)`` must have opposite signs (or one of them is
    zero). Bisection runs until the bracket is narrower than ``xtol``;
    ``polish`` secant steps are then attempted and kept only when they stay
    inside the bracket and reduce ``|f|``.
    """
    if not lo <= hi:
        lo, hi = hi, lo
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if math.isnan(flo) or math.isnan(fhi) or (flo > 0) == (fhi > 0):
        raise BracketError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )

    for _ in range(MAX_ITER):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid

    x, fx = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    x0, f0, x1, f1 = lo, flo, hi, fhi
    for _ in range(polish):
        if f1 == f0:
            break
        xn = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not lo <= xn <= hi:
            break
        fn = f(xn)
        if abs(fn) < abs(fx):
            x, fx = xn, fn
        if fn == 0.0:
            break
        x0, f0, x1, f1 = x1, f1, xn, fn
    return x


def sign_changes(values) -> list[int]:
    """Indices ``k`` where ``values[k]`` and ``values[k + 1]`` differ in sign.

    ``None`` or NaN entries break the chain: no change is reported across them.
    """
    out = []
    for k in range(len(values) - 1):
        a, b = values[k], values[k + 1]
        if a is None or b is None or math.isnan(a) or math.isnan(b):
            continue
        if (a > 0) != (b > 0):
            out.append(k)
    return out
