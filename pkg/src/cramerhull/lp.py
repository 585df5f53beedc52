"""Convex-hull membership by phase-1 simplex, with lazy column generation.

Membership of q in conv{X_1..X_N} is the feasibility of

    lambda >= 0,  sum lambda_i = 1,  sum lambda_i X_i = q,

a phase-1 LP with n+1 equality rows and N columns.  The dense tableau
kernel below (JIT-compiled when numba is available) handles moderate N
directly; for large N the column-generation wrapper solves on a small
active set and prices the remaining columns in vectorized chunks.  Either
way the verdict carries an explicitly verified certificate: convex weights
reconstructing q, or a separating direction priced against every column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalInstability

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

#: solve with all columns in the tableau up to this many points
DENSE_LIMIT = 1024
#: column-generation active sets are trimmed above this size
ACTIVE_CAP = 6144
#: rows per pricing chunk (bounds temporary memory)
CHUNK_ROWS = 1 << 16

FEAS_TOL = 1e-9
CERT_TOL = 1e-7
MAX_ITER = 3000
MAX_ROUNDS = 200
TOP_K = 32


@njit(cache=True)
def _phase1_kernel(A, b, feas_tol, max_iter):
    """Tableau phase-1 simplex; Dantzig pricing with a Bland fallback.

    Returns (status, basis, xB, y, obj, iters) where status is 0 feasible,
    1 infeasible, 2 iteration cap, 3 numeric breakdown.  y holds simplex
    multipliers in the original row orientation: at infeasibility
    y.b = obj > 0 while y.A_j <= 0 for every column in A.
    """
    m, K = A.shape
    ncols = K + m
    T = np.zeros((m + 1, ncols + 1))
    sgn = np.ones(m)
    scale = 1.0
    for i in range(m):
        s = 1.0
        if b[i] < 0.0:
            s = -1.0
        sgn[i] = s
        for j in range(K):
            T[i, j] = s * A[i, j]
        T[i, K + i] = 1.0
        T[i, ncols] = s * b[i]
        scale += abs(b[i])
    ft = feas_tol * scale
    basis = np.empty(m, np.int64)
    for i in range(m):
        basis[i] = K + i
    for j in range(ncols + 1):
        acc = 0.0
        for i in range(m):
            acc += T[i, j]
        cj = 1.0 if K <= j < ncols else 0.0
        T[m, j] = cj - acc

    bland = False
    stall = 0
    best_obj = 1.0e300
    it = 0
    status = 1
    while it < max_iter:
        obj = -T[m, ncols]
        if obj <= ft:
            status = 0
            break
        it += 1
        enter = -1
        if bland:
            for j in range(ncols):
                if T[m, j] < -1e-11:
                    enter = j
                    break
        else:
            most = -1e-11
            for j in range(ncols):
                if T[m, j] < most:
                    most = T[m, j]
                    enter = j
        if enter < 0:
            status = 1  # optimal with positive objective: infeasible
            break
        leave = -1
        best_ratio = 1.0e300
        for i in range(m):
            a = T[i, enter]
            if a > 1e-10:
                ratio = T[i, ncols] / a
                tie = 1e-12 * (1.0 + abs(best_ratio))
                if leave < 0 or ratio < best_ratio - tie:
                    best_ratio = ratio
                    leave = i
                elif ratio <= best_ratio + tie and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            status = 3  # phase-1 cannot be unbounded; numeric breakdown
            break
        piv = T[leave, enter]
        inv = 1.0 / piv
        for j in range(ncols + 1):
            T[leave, j] *= inv
        for i in range(m + 1):
            if i != leave:
                f = T[i, enter]
                if f != 0.0:
                    for j in range(ncols + 1):
                        T[i, j] -= f * T[leave, j]
        basis[leave] = enter
        obj = -T[m, ncols]
        if obj < best_obj - 1e-14:
            best_obj = obj
            stall = 0
        else:
            stall += 1
            if stall > 2 * m + 20:
                bland = True
    else:
        status = 2

    obj = -T[m, ncols]
    if status == 1 and obj <= ft:
        status = 0
    xB = np.empty(m)
    y = np.empty(m)
    for i in range(m):
        xB[i] = T[i, ncols]
        y[i] = (1.0 - T[m, K + i]) * sgn[i]
    return status, basis, xB, y, obj, it


@njit(cache=True)
def _batch_dense_kernel(P, Q, feas_tol, max_iter):
    """Membership of every row of Q in conv(rows of P); dense per-query solves."""
    nq = Q.shape[0]
    N, n = P.shape
    m = n + 1
    A = np.empty((m, N))
    for jj in range(N):
        for k in range(n):
            A[k, jj] = P[jj, k]
        A[n, jj] = 1.0
    inside = np.zeros(nq, np.uint8)
    widx = np.full((nq, m), -1, np.int64)
    wval = np.zeros((nq, m))
    dirs = np.zeros((nq, m))
    ok = np.ones(nq, np.uint8)
    b = np.empty(m)
    for qi in range(nq):
        for k in range(n):
            b[k] = Q[qi, k]
        b[n] = 1.0
        status, basis, xB, y, obj, it = _phase1_kernel(A, b, feas_tol, max_iter)
        if status == 0:
            inside[qi] = 1
            for i in range(m):
                if basis[i] < N:
                    widx[qi, i] = basis[i]
                    wval[qi, i] = xB[i]
        elif status == 1:
            for i in range(m):
                dirs[qi, i] = y[i]
        else:
            ok[qi] = 0
    return inside, widx, wval, dirs, ok


def warmup(n: int = 2) -> None:
    """Trigger JIT compilation outside of timed sections."""
    P = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    _batch_dense_kernel(P, np.zeros((1, 2)), FEAS_TOL, 64)


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class LPResult:
    inside: bool
    indices: np.ndarray | None      # columns carrying convex weight
    weights: np.ndarray | None
    direction: np.ndarray | None    # unit separating direction (length n)
    margin: float | None            # <v,q> - max_i <v,X_i>, over all N columns
    score_max: float | None         # max_i <v,X_i>
    rounds: int


def verify_inside(points: np.ndarray, idx: np.ndarray, w: np.ndarray, q: np.ndarray, tol: float = CERT_TOL) -> bool:
    if idx is None or idx.size == 0 or np.any(w < -tol):
        return False
    recon = w @ points[idx]
    scale = 1.0 + float(np.max(np.abs(q)))
    return abs(float(w.sum()) - 1.0) <= tol and float(np.max(np.abs(recon - q))) <= tol * scale


def score_against(points: np.ndarray, v: np.ndarray, chunk: int = CHUNK_ROWS) -> tuple[float, int]:
    """max_i <v, X_i> and its argmax, streamed in chunks."""
    smax = -math.inf
    amax = -1
    for lo in range(0, points.shape[0], chunk):
        s = points[lo : lo + chunk] @ v
        k = int(np.argmax(s))
        if s[k] > smax:
            smax = float(s[k])
            amax = lo + k
    return smax, amax


def verify_outside(points: np.ndarray, v: np.ndarray, q: np.ndarray, tol: float = CERT_TOL) -> tuple[bool, float]:
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return False, -math.inf
    v = v / nv
    smax, _ = score_against(points, v)
    scale = 1.0 + float(np.linalg.norm(q))
    margin = float(v @ q) - smax
    return margin > tol * scale, margin


def _violators(points: np.ndarray, v: np.ndarray, cutoff: float, k: int, chunk: int = CHUNK_ROWS) -> np.ndarray:
    """Up to k column indices with the largest scores above cutoff."""
    best_idx: list[np.ndarray] = []
    best_val: list[np.ndarray] = []
    for lo in range(0, points.shape[0], chunk):
        s = points[lo : lo + chunk] @ v
        mask = s > cutoff
        cnt = int(np.count_nonzero(mask))
        if cnt == 0:
            continue
        cand = np.nonzero(mask)[0]
        if cand.size > k:
            cand = cand[np.argpartition(s[cand], -k)[-k:]]
        best_idx.append(cand + lo)
        best_val.append(s[cand])
    if not best_idx:
        return np.empty(0, dtype=np.int64)
    idx = np.concatenate(best_idx)
    val = np.concatenate(best_val)
    if idx.size > k:
        sel = np.argpartition(val, -k)[-k:]
        idx = idx[sel]
    return np.sort(idx)


def _solve_active(points: np.ndarray, active: np.ndarray, q: np.ndarray, feas_tol: float, max_iter: int):
    sub = np.ascontiguousarray(points[active])
    n = points.shape[1]
    A = np.empty((n + 1, active.size))
    A[:n] = sub.T
    A[n] = 1.0
    b = np.concatenate([q, [1.0]])
    return _phase1_kernel(A, b, feas_tol, max_iter)


def membership(
    points: np.ndarray,
    q: np.ndarray,
    *,
    active: np.ndarray | None = None,
    feas_tol: float = FEAS_TOL,
    cert_tol: float = CERT_TOL,
    dense_limit: int = DENSE_LIMIT,
    max_rounds: int = MAX_ROUNDS,
    top_k: int = TOP_K,
) -> LPResult:
    """Decide q in conv(points) with a verified certificate either way."""
    points = np.ascontiguousarray(points, dtype=float)
    q = np.asarray(q, dtype=float)
    N, n = points.shape
    m = n + 1
    if N <= dense_limit:
        act = np.arange(N, dtype=np.int64)
    elif active is not None and active.size:
        act = np.unique(np.clip(active, 0, N - 1)).astype(np.int64)
    else:
        act = np.arange(min(N, max(dense_limit // 2, 4 * m)), dtype=np.int64)

    q_scale = 1.0 + float(np.linalg.norm(q))
    for rounds in range(1, max_rounds + 1):
        status, basis, xB, y, obj, _ = _solve_active(points, act, q, feas_tol, MAX_ITER)
        if status == 0:
            keep = basis < act.size
            idx = act[basis[keep]]
            w = xB[keep]
            if not verify_inside(points, idx, w, q, cert_tol):
                raise NumericalInstability("inside certificate failed re-verification")
            return LPResult(True, idx, w, None, None, None, rounds)
        if status != 1:
            raise NumericalInstability(f"phase-1 simplex broke down (status {status})")
        v = y[:n]
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            raise NumericalInstability("degenerate separating functional")
        v = v / nv
        if act.size == N:
            smax, _ = score_against(points, v)
            margin = float(v @ q) - smax
            if margin > cert_tol * q_scale:
                return LPResult(False, None, None, v, margin, smax, rounds)
            raise NumericalInstability("outside certificate margin below tolerance")
        vq = float(v @ q)
        smax, _ = score_against(points, v)
        margin = vq - smax
        if margin > cert_tol * q_scale:
            return LPResult(False, None, None, v, margin, smax, rounds)
        cutoff = min(vq - cert_tol * q_scale, smax - 1e-12 * (1.0 + abs(smax)))
        new = _violators(points, v, cutoff, top_k)
        new = np.setdiff1d(new, act, assume_unique=False)
        if new.size == 0:
            # no external column improves the dual: the small LP's verdict is final,
            # but the margin is too thin to certify
            raise NumericalInstability("separating margin below certificate tolerance")
        act = np.union1d(act, new).astype(np.int64)
        if act.size > ACTIVE_CAP:
            keep = basis[basis < act.size]
            recent = act[-(ACTIVE_CAP // 2):]
            act = np.union1d(act[keep], np.union1d(recent, new)).astype(np.int64)
    raise NumericalInstability(f"column generation did not settle in {max_rounds} rounds")
