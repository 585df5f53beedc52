"""Scalar constants controlling the hull-measure threshold, and the bounds built from them.

The threshold location is T1 = E[L*(X)]; its sharpness is governed by
beta = Var[L*(X)] / T1^2, which scales like beta/n for n independent
coordinates.  For compactly supported measures the volume-threshold
constant kappa = (2 x*)^-1 * integral of L* is reported as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import measures
from .cramer import CramerProfile
from .errors import DomainError, NotApplicable
from .measures import MeasureSpec
from .quadrature import integrate, wilson_interval

#: 97.5% normal quantile
Z95 = 1.959963984540054


@dataclass(frozen=True)
class ThresholdConstants:
    t1: float
    var_star: float
    beta: float
    kappa_vol: float | None
    admissible: bool | None


def constants(profile: CramerProfile, *, tol: float = 1e-11) -> ThresholdConstants:
    """Moments of L* under the measure, plus the volume constant when x* < inf.

    Finiteness is guaranteed for any even measure (the half-rate exponential
    integral is at most 4, so every L* moment exists).
    """
    spec = profile.spec
    t1 = measures.expectation(spec, lambda x: profile.lambda_star(x), tol=tol)
    var = measures.expectation(spec, lambda x: (profile.lambda_star(x) - t1) ** 2, tol=tol)
    var = max(var, 0.0)
    kappa = _kappa_volume(profile, tol=tol) if math.isfinite(spec.x_star) else None
    beta = var / t1**2 if t1 > 0 else math.nan
    return ThresholdConstants(
        t1=t1, var_star=var, beta=beta, kappa_vol=kappa, admissible=spec.admissible
    )


def _kappa_volume(profile: CramerProfile, *, tol: float) -> float:
    """(2 x*)^-1 times the integral of L* over the support interval."""
    spec = profile.spec
    xs = spec.x_star
    if spec.kind == measures.RADEMACHER:
        # closed transform is continuous up to the endpoints, plain quadrature
        return integrate(lambda x: profile.lambda_star(x), 0.0, 1.0, tol=tol, rel=1e-10)
    if spec.kind == measures.TABULATED:
        return integrate(lambda x: profile.lambda_star(x), 0.0, xs, tol=1e-9, rel=1e-8) / xs
    # L* grows like -ln(x* - x); integrate the tail against u = m(x),
    # where dx = exp(-u) / f(x(u)) du
    u_c = 2.0
    u_hi = measures.u_eval_max(spec)
    x_c = measures.inverse_tail(spec, u_c)
    bulk = integrate(lambda x: profile.lambda_star(x), 0.0, x_c, tol=tol, rel=1e-10)

    def tail_integrand(u: float) -> float:
        x = measures.inverse_tail(spec, u)
        return profile.lambda_star(x) * math.exp(-u) / measures.density(spec, x)

    tail = integrate(tail_integrand, u_c, u_hi, tol=tol, rel=1e-10)
    return (bulk + tail) / xs


# ---------------------------------------------------------------------------
# product-measure level sets and depth

def _coord_lambda_star_sum(profile: CramerProfile, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= profile.spec.x_star):
        raise DomainError("a coordinate lies outside the open support interval")
    return float(sum(profile.lambda_star(float(c)) for c in x.ravel()))


def level_set_log_indicator(profile: CramerProfile, x: np.ndarray, r: float) -> tuple[bool, float]:
    """Whether the product transform sum_i L*(x_i) is at most r, and the sum itself."""
    val = _coord_lambda_star_sum(profile, x)
    return val <= r, val


def depth_upper_bound(profile: CramerProfile, x: np.ndarray) -> float:
    """exp(-sum_i L*(x_i)): an upper bound for the half-space depth at x."""
    return math.exp(-_coord_lambda_star_sum(profile, x))


# ---------------------------------------------------------------------------
# Monte Carlo level-set measure and the additive upper bound

@dataclass(frozen=True)
class UpperBoundRow:
    r: float
    level_measure: float       # MC estimate of mu_n(B_r)
    ci_low: float
    ci_high: float
    n_exp_term: float          # N * exp(-r)
    total: float               # level_measure + N exp(-r)


def level_measure_samples(
    profile: CramerProfile, n: int, draws: int, gen: np.random.Generator
) -> np.ndarray:
    """Per-draw values of sum_i L*(x_i) for x ~ mu_n."""
    x = measures.sample(profile.spec, (draws, n), gen)
    return profile.lambda_star_vec(x).sum(axis=1)


def upper_bound_curve(
    consts: ThresholdConstants,
    profile: CramerProfile,
    n: int,
    r_grid: np.ndarray,
    N: int,
    *,
    draws: int = 100_000,
    gen: np.random.Generator,
) -> list[UpperBoundRow]:
    """Rows of mu_n(B_r) + N exp(-r), the additive bound on the expected hull measure."""
    if n < 1 or N <= n:
        raise DomainError("need N > n >= 1")
    sums = level_measure_samples(profile, n, draws, gen)
    rows = []
    for r in np.asarray(r_grid, dtype=float):
        hits = int(np.count_nonzero(sums <= r))
        est = hits / draws
        lo, hi = wilson_interval(hits, draws)
        term = N * math.exp(-r)
        rows.append(
            UpperBoundRow(
                r=float(r), level_measure=est, ci_low=lo, ci_high=hi,
                n_exp_term=term, total=est + term,
            )
        )
    return rows


@dataclass(frozen=True)
class TheoreticalWindow:
    rho1_lower: float
    rho2_upper: float
    zeta_upper: float   # Chebyshev split used on the lower side
    epsilon: float


def theoretical_window(
    consts: ThresholdConstants, n: int, delta: float, *, epsilon: float = 0.1
) -> TheoreticalWindow:
    """Sufficient bounds around T1 for the two thresholds at dimension n.

    The lower estimate (1 - sqrt(8 beta / (n delta))) T1 applies once
    8 beta / n < delta; below that the Chebyshev split is vacuous and
    NotApplicable is raised.  The upper estimate is (1 + epsilon) T1,
    valid for n beyond a measure-dependent size that is not computed here.
    """
    if not 0 < delta < 0.5:
        raise DomainError("delta must be in (0, 1/2)")
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must be in (0, 1)")
    if not math.isfinite(consts.beta) or consts.beta <= 0:
        raise NotApplicable("beta is not a positive finite number for this measure")
    if 8.0 * consts.beta / n >= delta:
        raise NotApplicable(
            f"requires 8 beta / n < delta: 8*{consts.beta:.6g}/{n} >= {delta}"
        )
    zeta = math.sqrt(2.0 * consts.beta / (n * delta))
    rho1 = (1.0 - math.sqrt(8.0 * consts.beta / (n * delta))) * consts.t1
    rho2 = (1.0 + epsilon) * consts.t1
    return TheoreticalWindow(rho1_lower=rho1, rho2_upper=rho2, zeta_upper=zeta, epsilon=epsilon)


# ---------------------------------------------------------------------------
# level-set boundary points and the supporting half-space tail

def sample_level_boundary(
    profile: CramerProfile, n: int, r: float, count: int, gen: np.random.Generator
) -> np.ndarray:
    """Points with sum_i L*(x_i) = r, by radial scaling of mu_n draws.

    The direction law is the mu_n draw itself; the scale solving the level
    equation is unique because the transform increases radially.
    """
    if r <= 0:
        raise DomainError("boundary sampling needs r > 0")
    out = np.empty((count, n))
    got = 0
    for _ in range(64):
        if got >= count:
            break
        cand = measures.sample(profile.spec, (count, n), gen)
        for row in cand:
            if got >= count:
                break
            amax = np.max(np.abs(row))
            if amax == 0.0:
                continue
            s_hi = profile.x_max_eval * (1.0 - 1e-12) / amax
            if profile.lambda_star_vec(row * s_hi).sum() < r:
                continue  # level unreachable within the evaluation clip
            lo, hi = 0.0, s_hi
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if profile.lambda_star_vec(row * mid).sum() < r:
                    lo = mid
                else:
                    hi = mid
            out[got] = row * (0.5 * (lo + hi))
            got += 1
    if got < count:
        raise DomainError("could not produce the requested boundary sample")
    return out


@dataclass(frozen=True)
class TailCheck:
    tail_estimate: float
    se: float
    depth_bound: float  # exp(-sum L*(x_i))
    draws: int

    @property
    def consistent(self) -> bool:
        return self.tail_estimate <= self.depth_bound + 3.0 * self.se


def supporting_halfspace_tail(
    profile: CramerProfile, x: np.ndarray, draws: int, gen: np.random.Generator
) -> TailCheck:
    """Empirical P(sum_i h(x_i)(X_i - x_i) >= 0) against exp(-sum_i L*(x_i)).

    The half-space with normal (h(x_i))_i supports the level set of the
    product transform at x, so this tail is what the depth bound caps.
    """
    x = np.asarray(x, dtype=float)
    t = profile.h_vec(x)
    X = measures.sample(profile.spec, (draws, x.size), gen)
    hits = int(np.count_nonzero(X @ t >= float(t @ x)))
    p_hat = hits / draws
    se = math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / draws) / draws)
    bound = math.exp(-float(profile.lambda_star_vec(x).sum()))
    return TailCheck(tail_estimate=p_hat, se=se, depth_bound=bound, draws=draws)
