"""Adaptive quadrature helpers.

Thin wrapper over scipy's Gauss-Kronrod integrator that turns silent
accuracy loss into :class:`QuadratureFailure`, plus a log-domain scheme for
integrals of the form ``ln(integral of exp(g))`` whose integrand would
overflow in linear space.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _integrate

from .errors import QuadratureFailure

#: integrand values this far (in log space) below the peak are truncated
LOG_TRUNCATION = 45.0


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-12,
    rel: float = 1e-10,
    points: Sequence[float] | None = None,
    limit: int = 300,
) -> float:
    """Integrate ``f`` over ``[lo, hi]``, raising if the tolerance is missed."""
    kwargs = {"epsabs": tol, "epsrel": rel, "limit": limit, "full_output": 1}
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        kwargs["points"] = [p for p in points if lo < p < hi]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(f, lo, hi, **kwargs)
    value, abserr = out[0], out[1]
    if abserr > max(tol, rel * abs(value)) * 10.0:
        why = f": {out[3]}" if len(out) > 3 else ""
        raise QuadratureFailure(
            f"quadrature on [{lo}, {hi}] reported error {abserr:.3e} "
            f"for value {value:.6e}, beyond tolerance{why}"
        )
    return value


def _descend(g: Callable[[float], float], x0: float, target: float, direction: float, hard_stop: float) -> float:
    """First point beyond ``x0`` (towards ``direction``) where g drops below ``target``.

    Assumes g decreases monotonically away from its peak at ``x0``.
    """
    step = max(1.0, abs(x0)) * 0.5
    x = x0
    for _ in range(200):
        nxt = x + direction * step
        if (direction > 0 and nxt >= hard_stop) or (direction < 0 and nxt <= hard_stop):
            return hard_stop
        if g(nxt) <= target:
            # bisect between x and nxt
            a, b = x, nxt
            for _ in range(80):
                mid = 0.5 * (a + b)
                if g(mid) <= target:
                    b = mid
                else:
                    a = mid
            return b
        x = nxt
        step *= 2.0
    raise QuadratureFailure("could not bracket the integrand's decay region")


def log_integral_exp(
    g: Callable[[float], float],
    peak: float,
    *,
    lo: float = -math.inf,
    hi: float = math.inf,
    tol: float = 1e-12,
    rel: float = 1e-11,
) -> float:
    """Return ``ln( integral of exp(g(x)) dx )`` over ``[lo, hi]``.

    ``g`` must be unimodal with its maximum at ``peak``.  The integration
    window is clipped where the integrand falls ``LOG_TRUNCATION`` nats
    below the peak, which keeps the truncation error far below ``rel``.
    """
    m = g(peak)
    if not math.isfinite(m):
        raise QuadratureFailure(f"integrand peak at {peak} is not finite")
    target = m - LOG_TRUNCATION
    a = lo if math.isfinite(lo) and g(lo) > target else _descend(g, peak, target, -1.0, lo)
    b = hi if math.isfinite(hi) and g(hi) > target else _descend(g, peak, target, +1.0, hi)
    val = integrate(lambda x: math.exp(g(x) - m), a, b, tol=tol, rel=rel, points=[peak])
    if val <= 0.0:
        raise QuadratureFailure("log-domain integral evaluated to a non-positive value")
    return m + math.log(val)


def wilson_interval(hits: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic fixed-tree pairwise summation."""
    arr = np.asarray(values, dtype=float).ravel().copy()
    n = arr.size
    if n == 0:
        return 0.0
    while n > 1:
        half = n // 2
        arr[:half] += arr[n - half : n]
        n = n - half
    return float(arr[0])
