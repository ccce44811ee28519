"""Sign-change scanning and bisection shared by the root solvers."""

from __future__ import annotations

import math

from .errors import AmbiguousRootError, RootNotFoundError


def sign_change_brackets(xs, fs):
    """Adjacent pairs of a scan whose residuals change sign.

    Non-finite residuals break the chain: a pair is only a bracket when both
    ends are finite. An exact zero at a grid point yields a degenerate
    bracket ``(x, x)``.
    """
    brackets = []
    for i in range(len(xs) - 1):
        f0, f1 = fs[i], fs[i + 1]
        if not (math.isfinite(f0) and math.isfinite(f1)):
            continue
        if f0 == 0.0:
            brackets.append((xs[i], xs[i]))
        elif f0 * f1 < 0.0:
            brackets.append((xs[i], xs[i + 1]))
    if len(fs) and fs[-1] == 0.0:
        brackets.append((xs[-1], xs[-1]))
    return brackets


def unique_bracket(xs, fs, what):
    """The single sign-change bracket of a scan, or an informative error."""
    brackets = sign_change_brackets(xs, fs)
    if not brackets:
        raise RootNotFoundError(f"no sign change of the {what} residual in the scan", zip(xs, fs))
    if len(brackets) > 1:
        raise AmbiguousRootError(
            f"{len(brackets)} sign changes of the {what} residual; refusing to pick one",
            brackets,
        )
    return brackets[0]


def bisect(f, lo, hi, f_lo=None, rtol=0.0, max_iter=400):
    """Bisection on ``[lo, hi]`` where ``f`` changes sign.

    Stops when the bracket width falls to ``rtol * |mid|`` or when the
    midpoint is no longer representable between the ends (``rtol=0``).
    Returns the midpoint of the final bracket.
    """
    if lo == hi:
        return lo
    if f_lo is None:
        f_lo = f(lo)
    if f_lo == 0.0:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or (hi - lo) <= rtol * abs(mid):
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
