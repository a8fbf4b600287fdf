"""Principal branch of the Lambert W function for real arguments."""

import math

__all__ = ["lambert_w0", "BRANCH_POINT"]

BRANCH_POINT = -math.exp(-1.0)

_MAX_ITER = 64


def _initial_guess(x: float) -> float:
    if x < -0.25:
        # series in p = sqrt(2(ex + 1)) around the branch point
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    if x < 3.0:
        return math.log1p(x) * (1.0 - 0.3 * math.log1p(x) / (1.0 + math.log1p(x)))
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w0(x: float) -> float:
    """Return w >= -1 with w * exp(w) = x, for x >= -1/e.

    Halley iteration from a branch-aware starting point.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("lambert_w0 of NaN")
    if x < BRANCH_POINT:
        # allow the last-ulp rounding of -1/e itself
        if x >= BRANCH_POINT * (1 + 4e-16):
            return -1.0
        raise ValueError(f"lambert_w0 undefined for x < -1/e (got {x!r})")
    if x == 0.0:
        return 0.0
    if x == BRANCH_POINT:
        return -1.0
    if math.isinf(x):
        return math.inf

    w = _initial_guess(x)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w_new = max(w - dw, -1.0)
        if abs(w_new - w) <= 4e-16 * (1.0 + abs(w_new)):
            w = w_new
            break
        w = w_new
    return w
