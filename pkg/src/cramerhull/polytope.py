"""Random polytopes: hull draws, membership with certificates, measure estimates, sweeps.

The sweep estimator uses nested coupling: one vertex stream per replicate,
with the hull at each grid value formed from a prefix of that stream.
Hulls are then nested by construction, per-point membership indicators are
non-decreasing along the grid, and a point's verdict at one grid value can
be carried to the next: an inside certificate stays valid for every larger
prefix, and a separating direction only needs to be re-priced against the
newly appended vertices.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import lp, measures
from .cramer import CramerProfile
from .errors import BudgetExceeded, DomainError, NumericalInstability, RejectionTooSlow
from .measures import MeasureSpec
from .quadrature import wilson_interval
from .rng import stream

DEFAULT_OP_CAP = 5e9
OP_CAP_ENV = "CRAMERHULL_OP_CAP"

#: directions priced per GEMM slice (bounds temporary memory)
_DIR_SLICE = 128


def operation_cap() -> float:
    raw = os.environ.get(OP_CAP_ENV)
    if raw:
        try:
            return float(raw)
        except ValueError:
            raise DomainError(f"{OP_CAP_ENV}={raw!r} is not a number")
    return DEFAULT_OP_CAP


# ---------------------------------------------------------------------------
# hull samples and membership

@dataclass(frozen=True, eq=False)
class HullSample:
    n: int
    N: int
    points: np.ndarray
    seed: tuple[int, int]  # (global seed, stream id)


def draw_hull(spec: MeasureSpec, n: int, N: int, seed: int, stream_id: int = 0) -> HullSample:
    """N i.i.d. mu_n vertices; bit-identical regeneration from the same seed."""
    if not (N > n >= 1):
        raise DomainError(f"need N > n >= 1, got N={N}, n={n}")
    pts = measures.sample(spec, (N, n), stream(seed, stream_id))
    pts.setflags(write=False)
    return HullSample(n=n, N=N, points=pts, seed=(seed, stream_id))


@dataclass(frozen=True, eq=False)
class MembershipResult:
    inside: bool
    weight_indices: np.ndarray | None   # vertex rows carrying convex weight
    weights: np.ndarray | None
    direction: np.ndarray | None        # unit separating direction
    margin: float | None                # <v,q> - max_i <v,X_i>

    def verify(self, hull: HullSample, query: np.ndarray, tol: float = lp.CERT_TOL) -> bool:
        if self.inside:
            return lp.verify_inside(hull.points, self.weight_indices, self.weights, query, tol)
        ok, _ = lp.verify_outside(hull.points, self.direction, query, tol)
        return ok


def contains(hull: HullSample, query: np.ndarray, *, feas_tol: float = lp.FEAS_TOL) -> MembershipResult:
    """Membership with a verified certificate; one tolerance-perturbed retry."""
    query = np.asarray(query, dtype=float)
    if query.shape != (hull.n,):
        raise DomainError(f"query must have shape ({hull.n},)")
    last: NumericalInstability | None = None
    for ft in (feas_tol, feas_tol * 0.01):
        try:
            res = lp.membership(hull.points, query, feas_tol=ft)
        except NumericalInstability as e:
            last = e
            continue
        return MembershipResult(
            inside=res.inside,
            weight_indices=res.indices,
            weights=res.weights,
            direction=res.direction,
            margin=res.margin,
        )
    raise last if last is not None else NumericalInstability("membership failed")


@dataclass(frozen=True)
class EstimateResult:
    mean: float
    ci_low: float
    ci_high: float
    hits: int
    test_points: int


def estimate_measure(
    spec: MeasureSpec, hull: HullSample, test_points: int, seed: int, stream_id: int = 1
) -> EstimateResult:
    """Monte Carlo estimate of mu_n(K) as a hit rate over i.i.d. mu_n queries."""
    if test_points < 1:
        raise DomainError("need at least one test point")
    queries = measures.sample(spec, (test_points, hull.n), stream(seed, stream_id))
    if hull.N <= lp.DENSE_LIMIT:
        inside, widx, wval, dirs, ok = lp._batch_dense_kernel(
            hull.points, queries, lp.FEAS_TOL, lp.MAX_ITER
        )
        if not np.all(ok):
            bad = int(np.nonzero(~ok.astype(bool))[0][0])
            # per-query fallback with the retry policy
            for qi in np.nonzero(~ok.astype(bool))[0]:
                inside[qi] = 1 if contains(hull, queries[qi]).inside else 0
            _ = bad
        hits = int(inside.sum())
    else:
        hits = 0
        for q in queries:
            if contains(hull, q).inside:
                hits += 1
    lo, hi = wilson_interval(hits, test_points)
    return EstimateResult(
        mean=hits / test_points, ci_low=lo, ci_high=hi, hits=hits, test_points=test_points
    )


# ---------------------------------------------------------------------------
# nested-prefix membership for a full grid of hull sizes

class _NestedState:
    """Per-query state carried across prefix sizes within one replicate."""

    __slots__ = ("first_in", "has_cert", "vdir", "vq", "smax", "active")

    def __init__(self, m_queries: int, n: int):
        self.first_in = np.full(m_queries, -1, dtype=np.int64)
        self.has_cert = np.zeros(m_queries, dtype=bool)
        self.vdir = np.zeros((m_queries, n))
        self.vq = np.zeros(m_queries)
        self.smax = np.full(m_queries, -np.inf)
        self.active: list[np.ndarray | None] = [None] * m_queries


class _PricedVertices:
    """Vertex matrix with a single-precision shadow for fast, sound pricing.

    Scores computed in float32 carry a rigorous rounding bound, so an upper
    bound max32 + err certifies separation exactly as a float64 max does;
    anything inside the error band is simply treated as uncertified.
    """

    def __init__(self, P: np.ndarray):
        self.p64 = P
        self.p32 = P.astype(np.float32)
        self.max_norm = float(np.sqrt((P * P).sum(axis=1).max())) if P.size else 0.0
        # |fl32(v.x) - v.x| <= n eps32 sum|v_i x_i| <= n eps32 |v||x|; 4x slack
        self.err = 4.0 * P.shape[1] * np.finfo(np.float32).eps * max(self.max_norm, 1.0)


def _price_block(block: np.ndarray, dirs: np.ndarray, chunk: int = lp.CHUNK_ROWS) -> np.ndarray:
    """max over block rows of <row, v> for each direction; streamed."""
    out = np.full(dirs.shape[0], -np.inf)
    for d0 in range(0, dirs.shape[0], _DIR_SLICE):
        sl = slice(d0, min(d0 + _DIR_SLICE, dirs.shape[0]))
        vs = dirs[sl]
        best = np.full(vs.shape[0], -np.inf)
        for lo in range(0, block.shape[0], chunk):
            # (B, rows) layout keeps the row-wise max reduction contiguous
            s = vs @ block[lo : lo + chunk].T
            np.maximum(best, s.max(axis=1), out=best)
        out[sl] = best
    return out


def _price_and_harvest(
    prefix: np.ndarray,
    dirs: np.ndarray,
    cutoffs: np.ndarray,
    k: int,
    chunk: int = lp.CHUNK_ROWS,
    step: int = 1,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Streamed pass over every step-th column: per-direction max score and
    up to k column indices scoring above the direction's cutoff."""
    B = dirs.shape[0]
    smax = np.full(B, -np.inf)
    got_idx: list[list[np.ndarray]] = [[] for _ in range(B)]
    got_val: list[list[np.ndarray]] = [[] for _ in range(B)]
    cols = prefix[::step] if step > 1 else prefix
    for d0 in range(0, B, _DIR_SLICE):
        sl = slice(d0, min(d0 + _DIR_SLICE, B))
        vs = dirs[sl]
        cut = cutoffs[sl]
        for lo in range(0, cols.shape[0], chunk):
            s = vs @ cols[lo : lo + chunk].T
            np.maximum(smax[sl], s.max(axis=1), out=smax[sl])
            for c in np.nonzero((s > cut[:, None]).any(axis=1))[0]:
                rows = np.nonzero(s[c] > cut[c])[0]
                if rows.size > k:
                    rows = rows[np.argpartition(s[c][rows], -k)[-k:]]
                got_idx[d0 + c].append((rows + lo) * step)
                got_val[d0 + c].append(s[c][rows])
    viol: list[np.ndarray] = []
    for b in range(B):
        if not got_idx[b]:
            viol.append(np.empty(0, dtype=np.int64))
            continue
        idx = np.concatenate(got_idx[b])
        val = np.concatenate(got_val[b])
        if idx.size > k:
            sel = np.argpartition(val, -k)[-k:]
            idx = idx[sel]
        viol.append(np.sort(idx).astype(np.int64))
    return smax, viol


def _nested_first_inside(
    P: np.ndarray,
    Q: np.ndarray,
    sizes: list[int],
    *,
    feas_tol: float = lp.FEAS_TOL,
    cert_tol: float = lp.CERT_TOL,
    max_rounds: int = lp.MAX_ROUNDS,
) -> np.ndarray:
    """Index of the first prefix containing each query (len(sizes) if none).

    Exact per (query, prefix) membership, organized so that the expensive
    large prefixes are only touched by queries still outside, and their
    certificates are extended incrementally over newly appended vertices.
    """
    mq, n = Q.shape
    st = _NestedState(mq, n)
    q_scale = 1.0 + np.linalg.norm(Q, axis=1)
    prev = 0
    for row, sz in enumerate(sizes):
        if sz == prev and row > 0:
            continue  # same prefix, same verdicts
        block = P[prev:sz]
        pend = np.nonzero(st.first_in < 0)[0]
        if pend.size == 0:
            prev = sz
            continue
        certed = pend[st.has_cert[pend]]
        if certed.size and block.shape[0] > 0:
            # a separating direction verified on the old prefix stays valid
            # iff the appended vertices keep clear of its margin; harvest the
            # offending vertices in the same pass so the follow-up LP starts
            # from the columns that actually broke the certificate
            thresh = st.vq[certed] - cert_tol * q_scale[certed]
            bmax, bviol = _price_and_harvest(block, st.vdir[certed], thresh, _HARVEST_K)
            new_smax = np.maximum(st.smax[certed], bmax)
            still_out = new_smax < thresh
            st.smax[certed] = np.where(still_out, new_smax, st.smax[certed])
            st.has_cert[certed] = still_out
            for k, qi in enumerate(certed):
                if not still_out[k] and bviol[k].size:
                    own = st.active[qi] if st.active[qi] is not None else np.empty(0, np.int64)
                    st.active[qi] = np.union1d(own, bviol[k] + prev).astype(np.int64)
        need_lp = [int(qi) for qi in pend if not st.has_cert[qi]]
        if need_lp:
            if sz <= lp.DENSE_LIMIT:
                _dense_row(P, Q, st, need_lp, row, sz, feas_tol, cert_tol, q_scale)
            else:
                _colgen_row(P, Q, st, need_lp, row, sz, feas_tol, cert_tol, q_scale, max_rounds)
        prev = sz
    out = st.first_in.copy()
    out[out < 0] = len(sizes)
    return out


def _dense_row(P, Q, st, need_lp, row, sz, feas_tol, cert_tol, q_scale):
    """All columns fit in the tableau: one dense solve per pending query."""
    qs = np.array(need_lp, dtype=np.int64)
    inside, widx, wval, dirs, ok = lp._batch_dense_kernel(
        np.ascontiguousarray(P[:sz]), np.ascontiguousarray(Q[qs]), feas_tol, lp.MAX_ITER
    )
    if not np.all(ok):
        raise NumericalInstability("dense membership solve broke down inside a sweep")
    for k, qi in enumerate(qs):
        if inside[k]:
            sel = widx[k] >= 0
            if not lp.verify_inside(P[:sz], widx[k][sel], wval[k][sel], Q[qi]):
                raise NumericalInstability("inside certificate failed re-verification in a sweep")
            st.first_in[qi] = row
            st.active[qi] = None
            continue
        v = dirs[k][:-1]
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            raise NumericalInstability("degenerate separating functional in a sweep")
        v = v / nv
        smax, _ = lp.score_against(P[:sz], v)
        vq = float(v @ Q[qi])
        st.vdir[qi] = v
        st.vq[qi] = vq
        st.smax[qi] = smax
        # thin margins leave the certificate unusable for extension; the
        # next prefix will simply re-solve for this query
        st.has_cert[qi] = smax < vq - cert_tol * q_scale[qi]


_SUBSET_COLS = 3072
_HARVEST_K = 128


def _colgen_row(P, Q, st, need_lp, row, sz, feas_tol, cert_tol, q_scale, max_rounds):
    """Lock-step column generation for the pending queries against P[:sz].

    Round 0 solves every pending query against a shared strided subsample of
    the prefix in one batched dense call; feasibility there already proves
    membership in the prefix hull.  The infeasible ones supply directions for
    a single batched pricing pass over all columns, which either certifies
    separation or harvests violating columns into per-query active sets for
    the remaining rounds.  Straggler rounds price on a coarser subsample
    first and only touch all columns to certify a clean verdict.
    """
    prefix = P[:sz]
    stride = max(1, sz // _SUBSET_COLS)
    sub_cols = np.arange(0, sz, stride, dtype=np.int64)
    sub = np.ascontiguousarray(prefix[sub_cols])

    unresolved: list[int] = []
    carried: dict[int, np.ndarray] = {}

    # round 0a: queries with harvested violator columns solve directly on
    # the subsample plus their private active set
    primed = [qi for qi in need_lp if st.active[qi] is not None and st.active[qi].size]
    for qi in primed:
        act = np.union1d(sub_cols, st.active[qi]).astype(np.int64)
        status, basis, xB, y, obj, _ = lp._solve_active(prefix, act, Q[qi], feas_tol, lp.MAX_ITER)
        if status == 0:
            keep = basis < act.size
            if not lp.verify_inside(prefix, act[basis[keep]], xB[keep], Q[qi]):
                raise NumericalInstability("inside certificate failed re-verification in a sweep")
            st.first_in[qi] = row
            st.active[qi] = None
            continue
        if status != 1:
            raise NumericalInstability(f"phase-1 breakdown (status {status}) in a sweep")
        v = y[: Q.shape[1]]
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            raise NumericalInstability("degenerate separating functional in a sweep")
        carried[int(qi)] = v / nv
        unresolved.append(int(qi))

    # round 0b: fresh queries share one batched solve on the subsample
    fresh = [qi for qi in need_lp if qi not in set(primed)]
    if fresh:
        qs = np.array(fresh, dtype=np.int64)
        inside, widx, wval, dirs0, ok = lp._batch_dense_kernel(
            sub, np.ascontiguousarray(Q[qs]), feas_tol, lp.MAX_ITER
        )
        if not np.all(ok):
            raise NumericalInstability("subset membership solve broke down inside a sweep")
        for k, qi in enumerate(qs):
            if inside[k]:
                sel = widx[k] >= 0
                idx = sub_cols[widx[k][sel]]
                if not lp.verify_inside(prefix, idx, wval[k][sel], Q[qi]):
                    raise NumericalInstability("inside certificate failed re-verification in a sweep")
                st.first_in[qi] = row
                st.active[qi] = None
            else:
                v = dirs0[k][:-1]
                nv = float(np.linalg.norm(v))
                if nv == 0.0:
                    raise NumericalInstability("degenerate separating functional in a sweep")
                carried[int(qi)] = v / nv
                unresolved.append(int(qi))

    stalls: dict[int, int] = {}
    for rnd in range(max_rounds):
        if not unresolved:
            return
        holders = list(unresolved)
        dirs = np.asarray([carried[qi] for qi in holders])
        vqs = np.array([float(carried[qi] @ Q[qi]) for qi in holders])
        margins = cert_tol * q_scale[np.array(holders)]
        # stragglers probe a coarse subsample for violators before paying
        # for a full certification pass, and take bigger column batches
        step = 1 if rnd < 2 else 8
        k_harvest = _HARVEST_K if rnd == 0 else 8 * _HARVEST_K
        if rnd == 1:
            # also harvest the columns best aligned with each query itself:
            # for a freshly covered point these are its natural support set
            qdirs = Q[np.array(holders)]
            aug_dirs = np.concatenate([dirs, qdirs], axis=0)
            aug_cuts = np.concatenate([vqs - 2.0 * margins, (sub @ qdirs.T).max(axis=0)])
            smax_a, viols_a = _price_and_harvest(prefix, aug_dirs, aug_cuts, k_harvest, step=step)
            smax = smax_a[: len(holders)]
            viols = viols_a[: len(holders)]
            for k, qi in enumerate(holders):
                extra = viols_a[len(holders) + k]
                if extra.size:
                    own = st.active[qi] if st.active[qi] is not None else np.empty(0, np.int64)
                    st.active[qi] = np.union1d(own, extra).astype(np.int64)
        else:
            smax, viols = _price_and_harvest(prefix, dirs, vqs - 2.0 * margins, k_harvest, step=step)
        if step > 1:
            clean = [k for k in range(len(holders)) if viols[k].size == 0]
            if clean:
                sel = np.array(clean)
                full_smax, full_viols = _price_and_harvest(
                    prefix, dirs[sel], vqs[sel] - 2.0 * margins[sel], _HARVEST_K
                )
                for j, k in enumerate(clean):
                    smax[k] = full_smax[j]
                    viols[k] = full_viols[j]
            else:
                smax[:] = -np.inf  # subsample max is not a certificate
        nxt: list[int] = []
        for k, qi in enumerate(holders):
            if step == 1 or viols[k].size == 0:
                if smax[k] < vqs[k] - margins[k]:
                    st.vdir[qi] = dirs[k]
                    st.vq[qi] = vqs[k]
                    st.smax[qi] = smax[k]
                    st.has_cert[qi] = True
                    continue
            own = st.active[qi] if st.active[qi] is not None else np.empty(0, np.int64)
            merged = np.union1d(own, viols[k]).astype(np.int64)
            if merged.size == own.size and (step == 1 or viols[k].size == 0):
                # no usable new column and the margin check failed: give the
                # LP a few more chances with a fresh direction, then give up
                stalls[qi] = stalls.get(qi, 0) + 1
                if stalls[qi] >= 3:
                    raise NumericalInstability(
                        "column generation stalled below certificate tolerance"
                    )
            else:
                stalls[qi] = 0
            if merged.size > lp.ACTIVE_CAP:
                merged = np.union1d(merged[-lp.ACTIVE_CAP // 2 :], viols[k]).astype(np.int64)
            st.active[qi] = merged
            # re-solve on the shared subsample plus this query's active set
            act = np.union1d(sub_cols, merged).astype(np.int64)
            status, basis, xB, y, obj, _ = lp._solve_active(prefix, act, Q[qi], feas_tol, lp.MAX_ITER)
            if status == 0:
                keep = basis < act.size
                if not lp.verify_inside(prefix, act[basis[keep]], xB[keep], Q[qi]):
                    raise NumericalInstability("inside certificate failed re-verification in a sweep")
                st.first_in[qi] = row
                st.active[qi] = None
                continue
            if status != 1:
                raise NumericalInstability(f"phase-1 breakdown (status {status}) in a sweep")
            v = y[: Q.shape[1]]
            nv = float(np.linalg.norm(v))
            if nv == 0.0:
                raise NumericalInstability("degenerate separating functional in a sweep")
            carried[qi] = v / nv
            nxt.append(qi)
        unresolved = nxt
    raise NumericalInstability(f"sweep column generation did not settle in {max_rounds} rounds")


# ---------------------------------------------------------------------------
# the sweep harness

@dataclass(frozen=True)
class SweepRow:
    n: int
    rho: float
    N: int
    mean: float
    ci_half: float
    replicates: int
    test_points: int


@dataclass(frozen=True, eq=False)
class SweepGrid:
    rows: list[SweepRow]
    rho_hat_low: float | None
    rho_hat_high: float | None
    delta: float
    replicate_means: np.ndarray  # (R, G) per-replicate row means


def grid_sizes(n: int, rho_grid: np.ndarray) -> list[int]:
    """N(rho) = ceil(exp(rho n)), floored at n+1 so every hull is a simplex or larger."""
    return [max(n + 1, math.ceil(math.exp(rho * n))) for rho in rho_grid]


def estimate_sweep_cost(n: int, sizes: list[int], replicates: int, test_points: int) -> float:
    """Pivot-equivalent work model for the budget check."""
    g = len(sizes)
    return replicates * (test_points * (n + 1) * g + sizes[-1] * n)


def sweep(
    spec: MeasureSpec,
    n: int,
    rho_grid: np.ndarray,
    replicates: int,
    test_points: int,
    seed: int,
    *,
    delta: float = 0.25,
    op_cap: float | None = None,
) -> SweepGrid:
    """Estimate E[mu_n(K_N)] along N = ceil(exp(rho n)) with nested coupling.

    Vertices are drawn once per replicate at the largest N; prefixes give
    the smaller hulls, so the per-replicate estimates are non-decreasing in
    rho by construction.  Test points are shared across the grid within a
    replicate (common random numbers) and fresh across replicates.
    """
    rho_grid = np.asarray(rho_grid, dtype=float)
    if rho_grid.size == 0 or np.any(np.diff(rho_grid) <= 0):
        raise DomainError("rho grid must be non-empty and strictly increasing")
    if n < 1 or replicates < 1 or test_points < 1:
        raise DomainError("need n >= 1, replicates >= 1, test_points >= 1")
    if not 0 < delta < 0.5:
        raise DomainError("delta must be in (0, 1/2)")
    sizes = grid_sizes(n, rho_grid)
    cap = op_cap if op_cap is not None else operation_cap()
    cost = estimate_sweep_cost(n, sizes, replicates, test_points)
    if cost > cap:
        raise BudgetExceeded(
            f"estimated work {cost:.3e} pivot-equivalents exceeds the cap {cap:.3e}; "
            f"raise {OP_CAP_ENV} or shrink the sweep"
        )

    g = len(sizes)
    rep_means = np.empty((replicates, g))
    for rep in range(replicates):
        gen_v = stream(seed, 2 * rep)
        gen_t = stream(seed, 2 * rep + 1)
        P = measures.sample(spec, (sizes[-1], n), gen_v)
        Q = measures.sample(spec, (test_points, n), gen_t)
        first_in = _nested_first_inside(P, Q, sizes)
        for i in range(g):
            rep_means[rep, i] = float(np.count_nonzero(first_in <= i)) / test_points
        del P, Q

    means = rep_means.mean(axis=0)
    if replicates > 1:
        ci_half = 1.959963984540054 * rep_means.std(axis=0, ddof=1) / math.sqrt(replicates)
    else:
        ci_half = np.zeros(g)
    rows = [
        SweepRow(
            n=n, rho=float(rho_grid[i]), N=sizes[i], mean=float(means[i]),
            ci_half=float(ci_half[i]), replicates=replicates, test_points=test_points,
        )
        for i in range(g)
    ]
    lo = _crossing_from_below(rho_grid, means, delta)
    hi = _crossing_from_above(rho_grid, means, 1.0 - delta)
    return SweepGrid(rows=rows, rho_hat_low=lo, rho_hat_high=hi, delta=delta, replicate_means=rep_means)


def _crossing_from_below(rhos: np.ndarray, means: np.ndarray, level: float) -> float | None:
    """Interpolated rho where the curve last leaves [0, level]."""
    at_or_below = np.nonzero(means <= level)[0]
    if at_or_below.size == 0:
        return None
    i = int(at_or_below[-1])
    if i + 1 >= len(means):
        return None  # never leaves the low region within the grid
    m0, m1 = means[i], means[i + 1]
    if m1 <= m0:
        return float(rhos[i])
    return float(rhos[i] + (level - m0) * (rhos[i + 1] - rhos[i]) / (m1 - m0))


def _crossing_from_above(rhos: np.ndarray, means: np.ndarray, level: float) -> float | None:
    """Interpolated rho where the curve first reaches [level, 1]."""
    at_or_above = np.nonzero(means >= level)[0]
    if at_or_above.size == 0:
        return None
    i = int(at_or_above[0])
    if i == 0:
        return None  # already above the high region at the smallest rho
    m0, m1 = means[i - 1], means[i]
    if m1 <= m0:
        return float(rhos[i])
    return float(rhos[i - 1] + (level - m0) * (rhos[i] - rhos[i - 1]) / (m1 - m0))


# ---------------------------------------------------------------------------
# hull-covers-level-set frequency against the binomial bound

@dataclass(frozen=True)
class InclusionReport:
    n: int
    N: int
    r: float
    trials: int
    points_per_trial: int
    epsilon: float
    failure_rate: float      # fraction of trials where some level-set point escaped the hull
    se: float
    bound: float             # binomial tail bound with the depth lower estimate
    acceptance_rate: float   # of the level-set rejection sampler

    @property
    def consistent(self) -> bool:
        return self.failure_rate <= min(self.bound, 1.0) + 3.0 * self.se


def inclusion_bound_check(
    profile: CramerProfile,
    n: int,
    N: int,
    r: float,
    trials: int,
    seed: int,
    *,
    points_per_trial: int = 32,
    epsilon: float = 0.1,
) -> InclusionReport:
    """Empirical P(K_N does not cover the level set B_r) against its bound.

    Points of B_r are drawn by rejection from mu_n; the bound charges
    2 C(N,n) (1 - q)^(N-n) with the depth floor q = exp(-(1+eps) r - 2 eps n)
    (the atom term vanishes for atomless measures).
    """
    spec = profile.spec
    if measures.max_atom(spec) > 0:
        raise DomainError("the inclusion check requires an atomless measure")
    if not (N > n >= 1):
        raise DomainError("need N > n >= 1")
    failures = 0
    accepted = 0
    proposed = 0
    for trial in range(trials):
        hull = draw_hull(spec, n, N, seed, stream_id=2 * trial)
        gen = stream(seed, 2 * trial + 1)
        if r <= 0.0:
            pts = np.zeros((points_per_trial, n))
            accepted += points_per_trial
            proposed += points_per_trial
        else:
            need = points_per_trial
            rows = []
            for _ in range(10_000):
                cand = measures.sample(spec, (max(64, need * 2), n), gen)
                s = profile.lambda_star_vec(cand).sum(axis=1)
                keep = cand[s <= r]
                proposed += cand.shape[0]
                accepted += keep.shape[0]
                if keep.shape[0]:
                    rows.append(keep[:need])
                    need -= min(need, keep.shape[0])
                if need <= 0:
                    break
                if proposed > 64 and accepted / proposed < 1e-4:
                    raise RejectionTooSlow(
                        f"level-set acceptance rate {accepted / proposed:.2e} below 1e-4"
                    )
            if need > 0:
                raise RejectionTooSlow("could not populate the level-set sample")
            pts = np.vstack(rows)
        if hull.N <= lp.DENSE_LIMIT:
            inside, _, _, _, ok = lp._batch_dense_kernel(hull.points, pts, lp.FEAS_TOL, lp.MAX_ITER)
            if not np.all(ok):
                raise NumericalInstability("membership solve broke down in the inclusion check")
            covered = bool(np.all(inside == 1))
        else:
            covered = all(contains(hull, p).inside for p in pts)
        failures += 0 if covered else 1
    rate = failures / trials
    se = math.sqrt(max(rate * (1.0 - rate), 1.0 / trials) / trials)
    q = math.exp(-(1.0 + epsilon) * r - 2.0 * epsilon * n)
    log_bound = math.log(2.0) + _log_choose(N, n) + (N - n) * math.log1p(-q)
    bound = math.exp(min(log_bound, 700.0))
    return InclusionReport(
        n=n, N=N, r=r, trials=trials, points_per_trial=points_per_trial, epsilon=epsilon,
        failure_rate=rate, se=se, bound=bound,
        acceptance_rate=accepted / max(proposed, 1),
    )


def _log_choose(N: int, n: int) -> float:
    return math.lgamma(N + 1) - math.lgamma(n + 1) - math.lgamma(N - n + 1)
