"""Log-MGF, its derivatives, the tilt inverse h, and the Legendre transform.

For a measure mu with log-MGF L(t) = ln E exp(tX), the Legendre (Cramer)
transform is L*(x) = sup_t (tx - L(t)).  On the open support interval the
supremum is attained at t = h(x), the inverse of L', giving the identity
L*(x) = x h(x) - L(h(x)) used throughout.  Closed forms are wired in for
the families that have them; everything else is quadrature plus a
safeguarded Newton inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.special import xlogy

from . import measures
from .errors import AtomicMeasureError, ConvergenceFailure, DomainError, QuadratureFailure
from .measures import LN2, TAIL_LOG_CUT, MeasureSpec
from .quadrature import integrate, log_integral_exp

#: numeric Legendre evaluation for the two-point measure stays this far from +-1
RADEMACHER_NUMERIC_CLIP = 1.0 - 1e-6

# |y| above which coth(y) == 1 and 1/sinh(y)^2 == 0 to double precision
_COTH_SATURATION = 38.0


# ---------------------------------------------------------------------------
# stable scalar/vector kernels for the closed-form families

def _langevin(y):
    """coth(y) - 1/y, the mean of the unit uniform tilt; odd, in (-1, 1)."""
    y = np.asarray(y, dtype=float)
    s = np.sign(y)
    ay = np.abs(y)
    out = np.empty_like(ay)
    small = ay < 1e-2
    ys = ay[small]
    out[small] = ys / 3.0 - ys**3 / 45.0 + 2.0 * ys**5 / 945.0
    mid = (~small) & (ay <= _COTH_SATURATION)
    ym = ay[mid]
    out[mid] = 1.0 + 2.0 / np.expm1(2.0 * ym) - 1.0 / ym
    big = ay > _COTH_SATURATION
    out[big] = 1.0 - 1.0 / ay[big]
    return s * out


def _langevin_prime(y):
    """d/dy (coth y - 1/y) = 1/y^2 - 1/sinh(y)^2; even, in (0, 1/3]."""
    y = np.asarray(y, dtype=float)
    ay = np.abs(y)
    out = np.empty_like(ay)
    small = ay < 1e-2
    ys = ay[small]
    out[small] = 1.0 / 3.0 - ys**2 / 15.0 + 2.0 * ys**4 / 189.0
    mid = (~small) & (ay <= 30.0)
    ym = ay[mid]
    out[mid] = 1.0 / ym**2 - 1.0 / np.sinh(ym) ** 2
    big = ay > 30.0
    out[big] = 1.0 / ay[big] ** 2
    return out


def _log_sinhc(y):
    """ln(sinh(y)/y), stable for all y >= 0."""
    y = np.asarray(y, dtype=float)
    ay = np.abs(y)
    out = np.empty_like(ay)
    small = ay < 1e-4
    ys = ay[small]
    out[small] = ys**2 / 6.0 - ys**4 / 180.0
    rest = ~small
    yr = ay[rest]
    out[rest] = yr + np.log1p(-np.exp(-2.0 * yr)) - np.log(2.0 * yr)
    return out


def _closed_lam(spec: MeasureSpec, t):
    t = np.asarray(t, dtype=float)
    if spec.closed_lambda == measures.RADEMACHER:
        at = np.abs(t)
        return at + np.log1p(np.exp(-2.0 * at)) - LN2
    if spec.closed_lambda == measures.UNIFORM:
        return _log_sinhc(spec.a * t)
    if spec.closed_lambda == measures.SYM_EXPONENTIAL:
        return -np.log1p(-(t * t))
    raise DomainError(f"no closed log-MGF for {spec.label}")


def _closed_dlam(spec: MeasureSpec, t):
    t = np.asarray(t, dtype=float)
    if spec.closed_lambda == measures.RADEMACHER:
        return np.tanh(t)
    if spec.closed_lambda == measures.UNIFORM:
        return spec.a * _langevin(spec.a * t)
    if spec.closed_lambda == measures.SYM_EXPONENTIAL:
        return 2.0 * t / (1.0 - t * t)
    raise DomainError(f"no closed log-MGF derivative for {spec.label}")


def _closed_d2lam(spec: MeasureSpec, t):
    t = np.asarray(t, dtype=float)
    if spec.closed_lambda == measures.RADEMACHER:
        c = np.cosh(np.minimum(np.abs(t), 350.0))
        return 1.0 / (c * c)
    if spec.closed_lambda == measures.UNIFORM:
        return spec.a**2 * _langevin_prime(spec.a * t)
    if spec.closed_lambda == measures.SYM_EXPONENTIAL:
        return (2.0 + 2.0 * t * t) / (1.0 - t * t) ** 2
    raise DomainError(f"no closed curvature for {spec.label}")


def _uniform_h(spec: MeasureSpec, x):
    """Inverse of a*L(a t) for the uniform family, vectorized."""
    x0 = np.asarray(x, dtype=float)
    x = np.atleast_1d(x0)
    z = np.abs(x) / spec.a
    if np.any(z >= 1.0):
        raise DomainError("uniform tilt inverse requires |x| < a")
    y = np.empty_like(z)
    deep = z > 1.0 - 1.0 / _COTH_SATURATION
    y[deep] = 1.0 / (1.0 - z[deep])
    shallow = ~deep
    zs = z[shallow]
    # Pade-style inverse Langevin seed, then Newton on coth(y) - 1/y = z
    ys = zs * (3.0 - zs * zs) / (1.0 - zs * zs + 1e-300)
    ys = np.maximum(ys, 1e-300)
    for _ in range(60):
        f = _langevin(ys) - zs
        step = f / _langevin_prime(ys)
        ys = np.maximum(ys - step, ys * 0.1)
        if np.all(np.abs(f) <= 1e-15 + 1e-14 * zs):
            break
    y[shallow] = ys
    return (np.sign(x) * y / spec.a).reshape(x0.shape)


def _uniform_lstar(spec: MeasureSpec, x):
    """Legendre transform for the uniform family, stable up to the endpoint."""
    x0 = np.asarray(x, dtype=float)
    z = np.abs(np.atleast_1d(x0)) / spec.a
    out = np.empty_like(z)
    deep = z > 1.0 - 1.0 / _COTH_SATURATION
    # for t = h in the coth-saturated regime, x h - L(h) reduces exactly to:
    out[deep] = LN2 - 1.0 - np.log1p(-z[deep])
    shallow = ~deep
    t = _uniform_h(spec, spec.a * z[shallow])
    out[shallow] = spec.a * z[shallow] * t - _log_sinhc(spec.a * t)
    return out.reshape(x0.shape)


def _exp_h(x):
    x = np.asarray(x, dtype=float)
    return x / (np.sqrt(1.0 + x * x) + 1.0)


def _rademacher_lstar(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("the two-point transform is finite only on [-1, 1]")
    return 0.5 * (xlogy(1.0 + x, 1.0 + x) + xlogy(1.0 - x, 1.0 - x))


def exp_lstar_reference(x):
    """Closed form sqrt(1+x^2) - 1 - ln((sqrt(1+x^2)+1)/2); oracle use only."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(1.0 + x * x)
    return r - 1.0 - np.log((r + 1.0) / 2.0)


# ---------------------------------------------------------------------------
# numeric log-MGF backends

def _pnorm_exponent_peak(p: float, t: float) -> float:
    return (t / p) ** (1.0 / (p - 1.0)) if t > 0 else 0.0


def _numeric_lam(spec: MeasureSpec, t: float, tol: float) -> float:
    """ln E exp(tX) by log-domain quadrature of exp(tx) f(x)."""
    t = abs(float(t))
    if t == 0.0:
        return 0.0
    if spec.kind == measures.RADEMACHER:
        return float(np.logaddexp(t, -t)) - LN2
    if spec.kind == measures.PNORM and spec.p > 1.0:
        p = spec.p
        peak = _pnorm_exponent_peak(p, t)
        g = lambda x: t * x - abs(x) ** p
        val = log_integral_exp(g, peak, tol=tol)
        return val - math.log(2.0 * measures.gamma_p(p))
    # compact support or exponential tails: tx + ln f(x)
    def g(x):
        f = measures.density(spec, x)
        return t * x + math.log(f) if f > 0 else -math.inf

    if spec.kind == measures.UNIFORM or spec.kind == measures.TABULATED:
        hi = spec.x_star
        xs = np.linspace(-hi, hi, 513)
        fs = measures.density(spec, xs)
        with np.errstate(divide="ignore"):
            peak = float(xs[np.argmax(t * xs + np.log(np.maximum(fs, 1e-320)))])
        return log_integral_exp(g, peak, lo=-hi, hi=hi, tol=tol)
    if spec.kind in (measures.SYM_EXPONENTIAL, measures.PNORM):
        if t >= 1.0:
            raise DomainError(f"log-MGF of {spec.label} diverges for |t| >= 1")
        return log_integral_exp(g, 0.0, tol=tol)
    raise DomainError(f"no numeric log-MGF for {spec.label}")


def _numeric_tilted_moments(spec: MeasureSpec, t: float, tol: float) -> tuple[float, float]:
    """Mean and variance of the exponentially tilted measure at parameter t."""
    sign = 1.0 if t >= 0 else -1.0
    t = abs(float(t))
    if spec.kind == measures.RADEMACHER:
        m = math.tanh(t)
        return sign * m, 1.0 - m * m
    if spec.kind == measures.PNORM and spec.p > 1.0:
        peak = _pnorm_exponent_peak(spec.p, t)
        g = lambda x: t * x - abs(x) ** spec.p
    else:
        if spec.t_star <= t:
            raise DomainError(f"tilt parameter {t} outside (-t*, t*) for {spec.label}")
        peak = 0.0
        if spec.kind in (measures.UNIFORM, measures.TABULATED):
            peak = spec.x_star if t > 0 else 0.0

        def g(x):
            f = measures.density(spec, x)
            return t * x + math.log(f) if f > 0 else -math.inf

    lo = -spec.x_star if math.isfinite(spec.x_star) else -math.inf
    hi = spec.x_star if math.isfinite(spec.x_star) else math.inf
    ln_norm = log_integral_exp(g, peak, lo=lo, hi=hi, tol=tol)
    w = lambda x: math.exp(g(x) - ln_norm) if g(x) > -math.inf else 0.0
    a, b = _tilted_window(g, peak, lo, hi)
    mean = integrate(lambda x: x * w(x), a, b, tol=tol, rel=1e-10, points=[peak])
    var = integrate(lambda x: (x - mean) ** 2 * w(x), a, b, tol=tol, rel=1e-10, points=[peak])
    return sign * mean, var


def _tilted_window(g, peak, lo, hi):
    from .quadrature import LOG_TRUNCATION, _descend

    m = g(peak)
    target = m - LOG_TRUNCATION
    a = lo if math.isfinite(lo) and g(lo) > target else _descend(g, peak, target, -1.0, lo)
    b = hi if math.isfinite(hi) and g(hi) > target else _descend(g, peak, target, +1.0, hi)
    return a, b


# ---------------------------------------------------------------------------
# profile

@dataclass(frozen=True)
class CramerEval:
    """One Legendre-transform evaluation with its tail counterpart."""

    x: float
    lambda_star: float
    h_of_x: float
    tail_m: float
    ratio: float  # tail_m / lambda_star, NaN when lambda_star ~ 0


class CramerProfile:
    """Cached evaluation pipeline for one measure.

    Pure and immutable after construction; safe to share between threads.
    """

    def __init__(
        self,
        spec: MeasureSpec,
        *,
        tol_newton: float = 1e-10,
        tol_quad: float = 1e-12,
        table_points: int = 240,
    ):
        self.spec = spec
        self.tol_newton = tol_newton
        self.tol_quad = tol_quad
        if spec.kind == measures.RADEMACHER:
            self.x_max_eval = 1.0
        else:
            self.u_max_eval = measures.u_eval_max(spec)
            self.x_max_eval = min(
                measures.inverse_tail(spec, self.u_max_eval),
                float(np.nextafter(spec.x_star, 0.0)) if math.isfinite(spec.x_star) else math.inf,
            )
        self._build_tables(table_points)
        self._check_invariants()

    # -- construction -------------------------------------------------------

    def _build_tables(self, k: int) -> None:
        spec = self.spec
        if spec.kind == measures.RADEMACHER:
            xs = np.tanh(np.linspace(0.0, math.atanh(RADEMACHER_NUMERIC_CLIP), k))
        else:
            x_c = measures.inverse_tail(spec, 4.0)
            bulk = np.linspace(0.0, x_c, k // 2, endpoint=False)
            tail_u = np.linspace(4.0, self.u_max_eval, k - k // 2)
            tail_x = np.array([measures.inverse_tail(spec, u) for u in tail_u])
            xs = np.unique(np.concatenate([bulk, tail_x]))
            xs = xs[xs <= self.x_max_eval]
        hs = np.empty_like(xs)
        if spec.closed_lambda is not None:
            hs = self._h_closed(xs)
        else:
            warm = 0.0
            for i, x in enumerate(xs):
                warm = self._h_newton(float(x), warm_start=warm)
                hs[i] = warm
        lams = np.array([self.log_mgf(float(t)) for t in hs])
        self.x_tab = xs
        self.h_tab = hs
        self.lstar_tab = xs * hs - lams
        self.t_grid = hs
        self.lam_grid = lams
        if xs.size >= 2 and np.all(np.diff(xs) > 0) and np.all(np.diff(hs) >= 0):
            self._h_interp = PchipInterpolator(xs, hs, extrapolate=False)
            # (L*)' = h exactly, so Hermite data gives a locally quartic-accurate table
            self._lstar_interp = CubicHermiteSpline(xs, self.lstar_tab, hs, extrapolate=False)
        else:
            self._h_interp = None
            self._lstar_interp = None

    def _check_invariants(self) -> None:
        if abs(self.log_mgf(0.0)) > 1e-12:
            raise QuadratureFailure(f"log-MGF at 0 is {self.log_mgf(0.0)!r}, expected 0")
        probes = [t for t in (0.1, 0.5) if t < self.spec.t_star]
        for t in probes:
            if abs(self.log_mgf(t) - self.log_mgf(-t)) > 1e-10:
                raise QuadratureFailure(f"log-MGF not even at t = {t}")
            _, var = self.log_mgf_derivs(t)
            if not var > 0:
                raise QuadratureFailure(f"tilted variance not positive at t = {t}")
        if np.any(np.diff(self.h_tab) < -1e-12):
            raise QuadratureFailure("tilt table is not monotone; profile is unusable")

    # -- log-MGF ------------------------------------------------------------

    def log_mgf(self, t: float, *, force_numeric: bool = False) -> float:
        """L(t) = ln E exp(tX) for |t| < t_star."""
        if abs(t) >= self.spec.t_star:
            raise DomainError(f"|t| = {abs(t)} outside the finite-MGF interval of {self.spec.label}")
        if t == 0.0:
            return 0.0
        if self.spec.has_closed_lambda and not force_numeric:
            return float(_closed_lam(self.spec, abs(t)))
        return _numeric_lam(self.spec, t, self.tol_quad)

    def log_mgf_derivs(self, t: float, *, force_numeric: bool = False) -> tuple[float, float]:
        """(L'(t), L''(t)) = mean and variance of the tilted measure."""
        if abs(t) >= self.spec.t_star:
            raise DomainError(f"|t| = {abs(t)} outside the finite-MGF interval of {self.spec.label}")
        if self.spec.has_closed_lambda and not force_numeric:
            return float(_closed_dlam(self.spec, t)), float(_closed_d2lam(self.spec, t))
        if t == 0.0:
            return 0.0, measures.variance(self.spec)
        return _numeric_tilted_moments(self.spec, t, self.tol_quad)

    # -- tilt inverse -------------------------------------------------------

    def _h_closed(self, x):
        spec = self.spec
        if spec.closed_lambda == measures.RADEMACHER:
            return np.arctanh(np.asarray(x, dtype=float))
        if spec.closed_lambda == measures.UNIFORM:
            return _uniform_h(spec, x)
        if spec.closed_lambda == measures.SYM_EXPONENTIAL:
            return _exp_h(x)
        return None

    def _h_newton(self, x: float, *, warm_start: float | None = None) -> float:
        """Safeguarded Newton for L'(t) = x, x >= 0."""
        if x == 0.0:
            return 0.0
        tol = self.tol_newton * max(1.0, x)
        lo = 0.0
        hi = max(1.0, 2.0 * warm_start) if warm_start and warm_start > 0 else 1.0
        cap = self.spec.t_star
        for _ in range(200):
            hi_eff = min(hi, cap * (1.0 - 1e-13)) if math.isfinite(cap) else hi
            if self.log_mgf_derivs(hi_eff)[0] >= x:
                hi = hi_eff
                break
            if math.isfinite(cap) and hi_eff >= cap * (1.0 - 2e-13):
                raise ConvergenceFailure(f"could not bracket the tilt for x = {x}")
            hi = hi_eff * 2.0
        else:
            raise ConvergenceFailure(f"could not bracket the tilt for x = {x}")
        t = warm_start if warm_start and lo < warm_start <= hi else 0.5 * (lo + hi)
        for _ in range(100):
            d1, d2 = self.log_mgf_derivs(t)
            err = d1 - x
            if abs(err) <= tol:
                return t
            if err > 0:
                hi = t
            else:
                lo = t
            step = err / d2 if d2 > 0 else math.inf
            t_new = t - step
            if not (lo < t_new < hi):
                t_new = 0.5 * (lo + hi)
            t = t_new
        raise ConvergenceFailure(
            f"tilt inversion for x = {x} on {self.spec.label} did not reach {tol:g}"
        )

    def h_inverse(self, x: float, *, force_numeric: bool = False) -> float:
        """t = h(x) with L'(t) = x; odd in x.  Requires |x| <= x_max_eval."""
        if abs(x) > self.x_max_eval * (1.0 + 1e-15):
            raise DomainError(
                f"|x| = {abs(x)} beyond the evaluation clip {self.x_max_eval} of {self.spec.label}"
            )
        if x == 0.0:
            return 0.0
        if self.spec.closed_lambda is not None and not force_numeric:
            if self.spec.kind == measures.RADEMACHER and abs(x) >= 1.0:
                raise DomainError("tilt diverges at the endpoint of the two-point measure")
            return float(self._h_closed(x))
        warm = None
        if self._h_interp is not None:
            v = self._h_interp(min(abs(x), self.x_tab[-1]))
            warm = float(v) if np.isfinite(v) else None
        t = self._h_newton(abs(x), warm_start=warm)
        return math.copysign(t, x)

    # -- Legendre transform -------------------------------------------------

    def lambda_star(self, x: float, *, force_numeric: bool = False) -> float:
        """L*(x) via the stationarity identity x h(x) - L(h(x))."""
        if self.spec.kind == measures.RADEMACHER and not force_numeric:
            return float(_rademacher_lstar(x))
        if self.spec.kind == measures.RADEMACHER and abs(x) > RADEMACHER_NUMERIC_CLIP:
            raise DomainError("numeric Legendre for the two-point measure needs |x| <= 1 - 1e-6")
        if self.spec.closed_lambda == measures.UNIFORM and not force_numeric:
            if abs(x) > self.x_max_eval * (1.0 + 1e-15):
                raise DomainError(f"|x| = {abs(x)} beyond the evaluation clip of {self.spec.label}")
            # x h - L(h) cancels catastrophically near the endpoint; the
            # vector kernel switches to the saturated closed branch there
            return float(_uniform_lstar(self.spec, x))
        t = self.h_inverse(x, force_numeric=force_numeric)
        return max(0.0, x * t - self.log_mgf(t, force_numeric=force_numeric))

    def lambda_star_vec(self, x: np.ndarray) -> np.ndarray:
        """Vectorized L*; exact for closed-form families, tabulated otherwise."""
        x = np.asarray(x, dtype=float)
        if self.spec.kind == measures.RADEMACHER:
            return _rademacher_lstar(x)
        if self.spec.closed_lambda == measures.UNIFORM:
            return _uniform_lstar(self.spec, x)
        if self.spec.closed_lambda == measures.SYM_EXPONENTIAL:
            h = _exp_h(x)
            return x * h + np.log1p(-(h * h))
        if self._lstar_interp is None:
            return np.vectorize(self.lambda_star)(x)
        ax = np.abs(x)
        if np.any(ax > self.x_tab[-1]):
            raise DomainError("argument beyond the tabulated evaluation range")
        return np.maximum(self._lstar_interp(ax), 0.0)

    def h_vec(self, x: np.ndarray) -> np.ndarray:
        """Vectorized tilt h(x); same accuracy contract as lambda_star_vec."""
        x = np.asarray(x, dtype=float)
        closed = self._h_closed(x)
        if closed is not None:
            return closed
        ax = np.abs(x)
        if np.any(ax > self.x_tab[-1]):
            raise DomainError("argument beyond the tabulated evaluation range")
        return np.sign(x) * self._h_interp(ax)

    def cramer_transform(self, x: float, *, force_numeric: bool = False) -> CramerEval:
        """Bundle L*(x), h(x), m(|x|) and the ratio m / L*."""
        ls = self.lambda_star(x, force_numeric=force_numeric)
        if self.spec.kind == measures.RADEMACHER and abs(x) >= 1.0:
            h = math.inf * np.sign(x)
            m = LN2
        else:
            h = self.h_inverse(x, force_numeric=force_numeric) if abs(x) < self.spec.x_star else math.nan
            m = float(measures.tail_log(self.spec, abs(x))) if abs(x) < self.spec.x_star else math.inf
        ratio = m / ls if ls >= 1e-12 else math.nan
        return CramerEval(x=float(x), lambda_star=ls, h_of_x=float(h), tail_m=m, ratio=ratio)

    def condition_scan(self, x_grid: np.ndarray) -> list[CramerEval]:
        """Evaluate the tail-to-transform ratio along an increasing grid."""
        x_grid = np.asarray(x_grid, dtype=float)
        if np.any(x_grid <= 0) or np.any(np.diff(x_grid) <= 0):
            raise DomainError("condition scan needs a strictly increasing positive grid")
        if np.any(x_grid > self.x_max_eval):
            raise DomainError("condition scan grid exceeds the evaluation clip")
        return [self.cramer_transform(float(x)) for x in x_grid]

    def lambda_star_supgrid(self, x: float, t_grid: np.ndarray) -> float:
        """Grid lower bound sup_t (tx - L(t)) used for Legendre consistency checks."""
        vals = [t * x - self.log_mgf(float(t)) for t in np.asarray(t_grid) if abs(t) < self.spec.t_star]
        return max(vals) if vals else 0.0


def build_profile(spec: MeasureSpec, **kwargs) -> CramerProfile:
    return CramerProfile(spec, **kwargs)


def exp_half_lambda_star_integral(profile: CramerProfile) -> float:
    """Integral of exp(L*(x)/2) d mu(x); finite and at most 4 for any even mu."""
    if profile.spec.is_atomic:
        raise AtomicMeasureError("the half-rate integral is defined for atomless measures")
    if not profile.x_max_eval > 0:
        raise DomainError("degenerate evaluation range")
    # one x-ulp near a compact endpoint moves L* by O(1), so the exponential
    # integrand cannot be resolved past ~1e-8 there; the bound has huge slack
    val = measures.expectation(
        profile.spec,
        lambda x: math.exp(0.5 * float(profile.lambda_star_vec(np.array(x)))),
        tol=1e-9,
        rel=1e-7,
    )
    if not val <= 4.0 + 1e-9:
        raise QuadratureFailure(f"half-rate integral evaluated to {val}, above the proven bound 4")
    return val


@dataclass(frozen=True)
class PnormAsymptoticsRow:
    t: float | None
    x: float | None
    lam_ratio: float | None
    h_ratio: float | None
    lstar_ratio: float | None
    m_ratio: float | None


def pnorm_asymptotics_report(
    p: float, t_grid: np.ndarray, x_grid: np.ndarray, *, profile: CramerProfile | None = None
) -> list[PnormAsymptoticsRow]:
    """Ratios of L, h, L* and m against their p-exponential growth laws.

    Each column tends to 1 along increasing grids: L(t) against
    ((p-1)/p^q) t^q with q = p/(p-1), h(x) against p x^(p-1), and both
    L*(x) and m(x) against x^p.
    """
    if not p > 1.0:
        raise DomainError("asymptotic diagnostics require p > 1")
    q = p / (p - 1.0)
    prof = profile or build_profile(measures.pnorm(p))
    rows = []
    for t, x in zip_longest_nan(t_grid, x_grid):
        lam_ratio = None
        if t is not None:
            lam_ratio = prof.log_mgf(t) * p**q / ((p - 1.0) * t**q)
        h_ratio = lstar_ratio = m_ratio = None
        if x is not None:
            ev = prof.cramer_transform(x)
            h_ratio = ev.h_of_x / (p * x ** (p - 1.0))
            lstar_ratio = ev.lambda_star / x**p
            m_ratio = ev.tail_m / x**p
        rows.append(
            PnormAsymptoticsRow(
                t=t, x=x, lam_ratio=lam_ratio, h_ratio=h_ratio,
                lstar_ratio=lstar_ratio, m_ratio=m_ratio,
            )
        )
    return rows


def zip_longest_nan(a, b):
    a = list(np.asarray(a, dtype=float)) if a is not None else []
    b = list(np.asarray(b, dtype=float)) if b is not None else []
    n = max(len(a), len(b))
    for i in range(n):
        yield (a[i] if i < len(a) else None, b[i] if i < len(b) else None)
