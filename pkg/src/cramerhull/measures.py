"""Even probability measures on the real line.

Built-in families: the two-point measure on {-1, +1}, the uniform measure on
[-a, a], the symmetric exponential, the p-exponential family with density
exp(-|x|^p) / (2 Gamma(1+1/p)) for p >= 1, and user-supplied tabulated
densities.  Each measure carries exact support/MGF-domain metadata, a
deterministic sampler, and the tail log-measure m(x) = -ln mu([x, inf)).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaincc, gammaln

from .errors import AtomicMeasureError, DomainError
from .quadrature import integrate

LN2 = math.log(2.0)

#: tail log-measure beyond which evaluation points are considered unreachable
TAIL_LOG_CUT = 60.0

RADEMACHER = "rademacher"
UNIFORM = "uniform"
SYM_EXPONENTIAL = "exp"
PNORM = "pnorm"
TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """Immutable description of one even probability measure."""

    kind: str
    x_star: float          # right endpoint of the support (may be inf)
    t_star: float          # right endpoint of {log-MGF finite} (may be inf)
    atom_at_x_star: float = 0.0
    closed_lambda: str | None = None
    admissible: bool | None = True   # None = unknown (tabulated input)
    lambda_star_condition: bool = True
    p: float | None = None           # p-exponential exponent
    a: float | None = None           # uniform half-width
    grid_x: np.ndarray | None = None
    grid_f: np.ndarray | None = None
    _density: Callable | None = field(default=None, repr=False)
    _cdf_x: np.ndarray | None = field(default=None, repr=False)
    _cdf_v: np.ndarray | None = field(default=None, repr=False)

    @property
    def label(self) -> str:
        if self.kind == PNORM:
            return f"pnorm(p={self.p:g})"
        if self.kind == UNIFORM:
            return f"uniform(a={self.a:g})"
        return self.kind

    @property
    def has_closed_lambda(self) -> bool:
        return self.closed_lambda is not None

    @property
    def is_atomic(self) -> bool:
        return self.kind == RADEMACHER


def rademacher() -> MeasureSpec:
    # fails admissibility: P(X = x_star) = 1/2 > 0
    return MeasureSpec(
        kind=RADEMACHER,
        x_star=1.0,
        t_star=math.inf,
        atom_at_x_star=0.5,
        closed_lambda=RADEMACHER,
        admissible=False,
        lambda_star_condition=False,
    )


def uniform(a: float = 1.0) -> MeasureSpec:
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"uniform half-width must be positive and finite, got {a}")
    return MeasureSpec(kind=UNIFORM, x_star=a, t_star=math.inf, closed_lambda=UNIFORM, a=a)


def sym_exponential() -> MeasureSpec:
    return MeasureSpec(kind=SYM_EXPONENTIAL, x_star=math.inf, t_star=1.0, closed_lambda=SYM_EXPONENTIAL)


def pnorm(p: float) -> MeasureSpec:
    if not (p >= 1.0 and math.isfinite(p)):
        raise DomainError(f"p-exponential family requires p >= 1, got {p}")
    # p = 1 is the symmetric exponential: bounded MGF domain, closed forms known
    return MeasureSpec(
        kind=PNORM,
        x_star=math.inf,
        t_star=1.0 if p == 1.0 else math.inf,
        closed_lambda=SYM_EXPONENTIAL if p == 1.0 else None,
        p=float(p),
    )


def tabulated_density(x: np.ndarray, f: np.ndarray) -> MeasureSpec:
    """Build an even measure from density samples (symmetrized, renormalized)."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.ndim != 1 or x.shape != f.shape or x.size < 4:
        raise DomainError("tabulated density needs two equal 1-d columns with at least 4 rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(f))):
        raise DomainError("tabulated density contains non-finite entries")
    if np.any(f < 0):
        raise DomainError("tabulated density has negative values")
    order = np.argsort(x)
    x, f = x[order], f[order]
    if np.any(np.diff(x) <= 0):
        raise DomainError("tabulated density grid has duplicate abscissae")

    half = float(np.max(np.abs(x)))
    gx = np.union1d(x, -x)
    raw = np.interp(gx, x, f, left=0.0, right=0.0)
    sym = 0.5 * (raw + raw[::-1])
    dens = PchipInterpolator(gx, sym, extrapolate=False)
    mass = float(dens.integrate(gx[0], gx[-1]))
    if mass <= 0:
        raise DomainError("tabulated density has zero total mass")
    sym = sym / mass
    dens = PchipInterpolator(gx, sym, extrapolate=False)

    # dense CDF table for inverse-transform sampling and tail evaluation
    xs = np.linspace(-half, half, 4097)
    cdf = np.concatenate([[0.0], np.cumsum([dens.integrate(u, v) for u, v in zip(xs[:-1], xs[1:])])])
    cdf = np.clip(cdf / cdf[-1], 0.0, 1.0)
    cdf[-1] = 1.0
    return MeasureSpec(
        kind=TABULATED,
        x_star=half,
        t_star=math.inf,
        admissible=None,  # log-concavity of user input is not verified
        lambda_star_condition=False,
        grid_x=gx,
        grid_f=sym,
        _density=dens,
        _cdf_x=xs,
        _cdf_v=cdf,
    )


def load_density_csv(path: str) -> MeasureSpec:
    """Load a two-column (x, f(x)) CSV with a header row."""
    xs: list[float] = []
    fs: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DomainError(f"{path}: expected a header row with two columns")
        try:
            float(header[0])
        except ValueError:
            pass
        else:
            raise DomainError(f"{path}: first row must be a header, found numbers")
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise DomainError(f"{path}: row {row!r} does not have two columns")
            xs.append(float(row[0]))
            fs.append(float(row[1]))
    return tabulated_density(np.array(xs), np.array(fs))


# ---------------------------------------------------------------------------
# densities and atoms

def gamma_p(p: float) -> float:
    return math.gamma(1.0 + 1.0 / p)


def density(spec: MeasureSpec, x):
    """Density f(x); even in x.  Raises for the purely atomic measure."""
    if spec.is_atomic:
        raise AtomicMeasureError("the two-point measure has no density; use atoms()")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if spec.kind == UNIFORM:
        out = np.where(ax <= spec.a, 1.0 / (2.0 * spec.a), 0.0)
    elif spec.kind == SYM_EXPONENTIAL:
        out = 0.5 * np.exp(-ax)
    elif spec.kind == PNORM:
        out = np.exp(-(ax ** spec.p)) / (2.0 * gamma_p(spec.p))
    elif spec.kind == TABULATED:
        out = np.where(ax <= spec.x_star, np.nan_to_num(spec._density(ax), nan=0.0), 0.0)
    else:
        raise DomainError(f"unknown measure kind {spec.kind!r}")
    return float(out) if out.ndim == 0 else out


def atoms(spec: MeasureSpec) -> dict[float, float]:
    """Atom locations and masses (empty for atomless measures)."""
    if spec.kind == RADEMACHER:
        return {-1.0: 0.5, 1.0: 0.5}
    return {}


def max_atom(spec: MeasureSpec) -> float:
    """p = max_x P(X = x)."""
    return max(atoms(spec).values(), default=0.0)


def variance(spec: MeasureSpec) -> float:
    if spec.kind == RADEMACHER:
        return 1.0
    if spec.kind == UNIFORM:
        return spec.a ** 2 / 3.0
    if spec.kind == SYM_EXPONENTIAL:
        return 2.0
    if spec.kind == PNORM:
        return math.exp(gammaln(3.0 / spec.p) - gammaln(1.0 / spec.p))
    return expectation(spec, lambda x: x * x)


# ---------------------------------------------------------------------------
# sampling

def sample(spec: MeasureSpec, size, gen: np.random.Generator) -> np.ndarray:
    """Draw from the measure; deterministic given the generator state."""
    if spec.kind == RADEMACHER:
        return (gen.integers(0, 2, size=size) * 2 - 1).astype(float)
    if spec.kind == UNIFORM:
        return (2.0 * gen.random(size) - 1.0) * spec.a
    if spec.kind == SYM_EXPONENTIAL:
        mag = gen.standard_exponential(size)
        sign = gen.integers(0, 2, size=size) * 2 - 1
        return mag * sign
    if spec.kind == PNORM:
        # |X| = G^(1/p) with G ~ Gamma(1/p) maps exactly onto exp(-x^p)
        mag = gen.standard_gamma(1.0 / spec.p, size=size) ** (1.0 / spec.p)
        sign = gen.integers(0, 2, size=size) * 2 - 1
        return mag * sign
    if spec.kind == TABULATED:
        return np.interp(gen.random(size), spec._cdf_v, spec._cdf_x)
    raise DomainError(f"unknown measure kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# tail log-measure m(x) = -ln mu([x, inf))

def _pnorm_tail_log(p: float, x: np.ndarray) -> np.ndarray:
    s = 1.0 / p
    y = np.asarray(x, dtype=float) ** p
    with np.errstate(divide="ignore"):
        out = LN2 - np.log(gammaincc(s, np.minimum(y, 690.0)))
    # asymptotic continuation where the regularized gamma underflows:
    # Q(s,y) ~ y^(s-1) e^(-y) / Gamma(s) * (1 + (s-1)/y + (s-1)(s-2)/y^2)
    big = y > 690.0
    if np.any(big):
        yb = y[big]
        corr = np.log1p((s - 1.0) / yb + (s - 1.0) * (s - 2.0) / yb**2)
        out[big] = LN2 + gammaln(s) + yb - (s - 1.0) * np.log(yb) - corr
    return out


def tail_log(spec: MeasureSpec, x):
    """m(x) = -ln mu([x, inf)) for 0 <= x < x_star."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr >= spec.x_star):
        raise DomainError(f"tail_log requires 0 <= x < x_star = {spec.x_star}")
    if spec.kind == RADEMACHER:
        out = np.full_like(arr, LN2)
    elif spec.kind == UNIFORM:
        out = np.log(2.0 * spec.a / (spec.a - arr))
    elif spec.kind == SYM_EXPONENTIAL:
        out = arr + LN2
    elif spec.kind == PNORM:
        if spec.p == 1.0:
            out = arr + LN2
        else:
            out = _pnorm_tail_log(spec.p, np.atleast_1d(arr)).reshape(arr.shape)
    elif spec.kind == TABULATED:
        tail = 1.0 - np.interp(arr, spec._cdf_x, spec._cdf_v)
        out = np.where(tail > 0, -np.log(np.maximum(tail, 1e-320)), np.inf)
    else:
        raise DomainError(f"unknown measure kind {spec.kind!r}")
    return float(out) if out.ndim == 0 else out


def u_eval_max(spec: MeasureSpec) -> float:
    """Largest tail log-measure reachable at a representable support point.

    For compact support the points with m(x) near TAIL_LOG_CUT are closer to
    x_star than one double-precision ulp, so the usable range ends at
    m(nextafter(x_star, 0)) instead.
    """
    if not math.isfinite(spec.x_star):
        return TAIL_LOG_CUT
    edge = np.nextafter(spec.x_star, 0.0)
    return min(TAIL_LOG_CUT, float(tail_log(spec, edge)) - 1e-9)


def inverse_tail(spec: MeasureSpec, u: float) -> float:
    """x with m(x) = u; defined for u >= m(0) = ln 2."""
    if u < LN2 - 1e-12:
        raise DomainError(f"inverse_tail needs u >= ln 2, got {u}")
    u = max(u, LN2)
    if spec.kind == UNIFORM:
        return spec.a * (1.0 - 2.0 * math.exp(-u))
    if spec.kind == SYM_EXPONENTIAL or (spec.kind == PNORM and spec.p == 1.0):
        return u - LN2
    if spec.kind == PNORM:
        lo, hi = 0.0, 1.0
        while tail_log(spec, hi) < u:
            hi *= 2.0
            if hi > 1e8:
                raise DomainError("inverse_tail bracket expansion failed")
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if tail_log(spec, mid) < u:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    if spec.kind == TABULATED:
        tail = np.clip(1.0 - spec._cdf_v, 1e-320, 1.0)
        m_grid = -np.log(tail)
        return float(np.interp(u, m_grid, spec._cdf_x))
    raise DomainError(f"inverse_tail undefined for {spec.kind!r}")


# ---------------------------------------------------------------------------
# expectations

def expectation(
    spec: MeasureSpec,
    phi: Callable[[float], float],
    *,
    tol: float = 1e-12,
    rel: float = 1e-11,
    u_max: float = TAIL_LOG_CUT,
) -> float:
    """E[phi(X)] by quadrature.

    The bulk is integrated in x; each tail is re-parametrized by its tail
    log-measure u = m(x), under which the weight becomes exactly exp(-u).
    This resolves integrands that blow up at a support endpoint (the
    half-rate-exponential integrand does, at compactly supported laws).
    """
    at = atoms(spec)
    if at:
        return sum(w * phi(x) for x, w in at.items())
    if spec.kind == TABULATED:
        # compact support, no closed tail inverse: plain two-sided quadrature
        return integrate(
            lambda x: (phi(x) + phi(-x)) * density(spec, x), 0.0, spec.x_star, tol=tol, rel=1e-9
        )
    u_c = 2.0
    u_hi = min(u_max, u_eval_max(spec))
    x_c = inverse_tail(spec, u_c)
    bulk = integrate(lambda x: (phi(x) + phi(-x)) * density(spec, x), 0.0, x_c, tol=tol, rel=rel)
    tails = integrate(
        lambda u: (phi(inverse_tail(spec, u)) + phi(-inverse_tail(spec, u))) * math.exp(-u),
        u_c,
        u_hi,
        tol=tol,
        rel=rel,
    )
    return bulk + tails
