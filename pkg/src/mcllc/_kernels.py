"""Hot loops: per-core demand scans and the multiple-choice knapsack table.

Every kernel has a numba ``@njit`` version and a pure-numpy version with the
same signature. ``MCLLC_DISABLE_JIT=1`` (read at import) forces the numpy path;
so does a missing numba install. ``BACKEND`` names the active one.

Per-task parameter arrays are int64 and aligned:
    T    period
    D    true deadline
    DL   scaled L-mode deadline (== D for L-tasks)
    CL   C^L(sigma^L)
    CHL  C^H(sigma^L)   (carry-over job in H-mode)
    CHH  C^H(sigma^H)   (jobs released after the switch)
Scans return the smallest violating interval length, or 0 if none up to
``horizon``.
"""

import os

import numpy as np

INF = 1 << 61

_DISABLED = os.environ.get("MCLLC_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("disabled by MCLLC_DISABLE_JIT")
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"


# -- scalar forms (plain python; jitted below) --------------------------------

def _dbf_lo_one(T, DL, CL, l):
    k = (l - DL) // T + 1
    return k * CL if k > 0 else 0


def _dbf_hi_one(T, D, DL, CL, CHL, CHH, l):
    off = D - DL
    k = (l - off) // T
    full = CHL + k * CHH if k >= 0 else 0
    r = l % T
    done = 0
    if off <= r < D:
        done = CL - r + off
        if done < 0:
            done = 0
    fd = full - done
    if fd < 0:
        fd = 0
    k2 = (l - off - CL) // T
    step = CHL + k2 * CHH if k2 >= 0 else 0
    return step if step > fd else fd


def _next_point(a, T, l):
    # smallest p > l with p = a (mod T)
    return a + ((l - a) // T + 1) * T


def _scan_lo_full(T, DL, CL, horizon):
    n = T.shape[0]
    for l in range(1, horizon + 1):
        s = 0
        for i in range(n):
            s += _dbf_lo_one(T[i], DL[i], CL[i], l)
        if s > l:
            return l
    return 0


def _scan_hi_full(T, D, DL, CL, CHL, CHH, horizon):
    n = T.shape[0]
    for l in range(1, horizon + 1):
        s = 0
        for i in range(n):
            s += _dbf_hi_one(T[i], D[i], DL[i], CL[i], CHL[i], CHH[i], l)
        if s > l:
            return l
    return 0


def _scan_lo_points(T, DL, CL, horizon):
    # demand is a staircase with risers at DL + kT; supply grows, so a
    # violation first shows at a riser
    n = T.shape[0]
    l = 0
    while True:
        nxt = horizon + 1
        for i in range(n):
            p = _next_point(DL[i], T[i], l)
            if p < nxt:
                nxt = p
        if nxt > horizon:
            return 0
        l = nxt
        s = 0
        for i in range(n):
            s += _dbf_lo_one(T[i], DL[i], CL[i], l)
        if s > l:
            return l


def _scan_hi_points(T, D, DL, CL, CHL, CHH, horizon):
    # Between consecutive candidates each task's dbf is linear with slope 0
    # or 1 (or the max of two such pieces, which is convex), so demand minus
    # supply peaks at a candidate. Candidates per task: both sides of the
    # jump at D-DL (mod T) and both sides of the end of the done-ramp at
    # D-DL+CL (mod T). The first violation is then located exactly by a
    # unit scan back from the violating candidate. The first candidate past
    # the horizon is still evaluated: it closes the last convex piece.
    n = T.shape[0]
    prev = 0
    l = 0
    while l <= horizon:
        nxt = horizon + 1
        for i in range(n):
            off = D[i] - DL[i]
            a = off - 1
            for j in range(4):
                if j == 1:
                    a = off
                elif j == 2:
                    a = off + CL[i] - 1
                elif j == 3:
                    a = off + CL[i]
                p = _next_point(a, T[i], l)
                if p < nxt:
                    nxt = p
        l = nxt
        s = 0
        for i in range(n):
            s += _dbf_hi_one(T[i], D[i], DL[i], CL[i], CHL[i], CHH[i], l)
        if s > l:
            return _refine_hi(T, D, DL, CL, CHL, CHH, prev, l)
        prev = l
    return 0


def _excess_hi(T, D, DL, CL, CHL, CHH, l):
    s = 0
    for i in range(T.shape[0]):
        s += _dbf_hi_one(T[i], D[i], DL[i], CL[i], CHL[i], CHH[i], l)
    return s - l


def _refine_hi(T, D, DL, CL, CHL, CHH, lo, hi):
    # No candidate lies strictly between lo and hi, so demand minus supply
    # is convex on [lo, hi]; with no violation at lo, the violating points
    # of the piece form a suffix ending at hi.
    if lo == 0:
        if _excess_hi(T, D, DL, CL, CHL, CHH, 1) > 0:
            return 1
        lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _excess_hi(T, D, DL, CL, CHL, CHH, mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def _mckp_suffix(cost, width):
    # g[i, w]: least total cost of tasks i..n-1 using exactly w pages
    n = cost.shape[0]
    g = np.full((n + 1, width + 1), INF, dtype=np.int64)
    g[n, 0] = 0
    for i in range(n - 1, -1, -1):
        for w in range(width + 1):
            best = INF
            for j in range(w + 1):
                c = cost[i, j]
                if c >= INF:
                    continue
                rest = g[i + 1, w - j]
                if rest >= INF:
                    continue
                if c + rest < best:
                    best = c + rest
            g[i, w] = best
    return g


# -- numpy fallbacks ----------------------------------------------------------

_CHUNK = 1 << 15


def _dbf_lo_vec(T, DL, CL, ls):
    k = (ls[None, :] - DL[:, None]) // T[:, None] + 1
    return np.maximum(k, 0) * CL[:, None]


def _dbf_hi_vec(T, D, DL, CL, CHL, CHH, ls):
    T_, D_, CL_ = T[:, None], D[:, None], CL[:, None]
    CHL_, CHH_ = CHL[:, None], CHH[:, None]
    off = (D - DL)[:, None]
    L = ls[None, :]
    k = (L - off) // T_
    full = np.where(k >= 0, CHL_ + k * CHH_, 0)
    r = L % T_
    done = np.where((off <= r) & (r < D_), np.maximum(CL_ - r + off, 0), 0)
    fd = np.maximum(full - done, 0)
    k2 = (L - off - CL_) // T_
    step = np.where(k2 >= 0, CHL_ + k2 * CHH_, 0)
    return np.maximum(step, fd)


def _first_violation(demand, ls):
    bad = np.nonzero(demand > ls)[0]
    return int(ls[bad[0]]) if bad.size else 0


def _np_scan_lo_full(T, DL, CL, horizon):
    if T.size == 0:
        return 0
    for start in range(1, horizon + 1, _CHUNK):
        ls = np.arange(start, min(start + _CHUNK, horizon + 1), dtype=np.int64)
        hit = _first_violation(_dbf_lo_vec(T, DL, CL, ls).sum(axis=0), ls)
        if hit:
            return hit
    return 0


def _np_scan_hi_full(T, D, DL, CL, CHL, CHH, horizon):
    if T.size == 0:
        return 0
    for start in range(1, horizon + 1, _CHUNK):
        ls = np.arange(start, min(start + _CHUNK, horizon + 1), dtype=np.int64)
        hit = _first_violation(_dbf_hi_vec(T, D, DL, CL, CHL, CHH, ls).sum(axis=0), ls)
        if hit:
            return hit
    return 0


def _candidates(phases, periods, lo, hi):
    pts = []
    for a, t in zip(phases, periods):
        first = a + ((lo - 1 - a) // t + 1) * t
        if first <= hi:
            pts.append(np.arange(first, hi + 1, t, dtype=np.int64))
    if not pts:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(pts))


def _span(T):
    # about 64 candidates per phase per chunk, whatever the time resolution
    return max(_CHUNK, 64 * int(T.min()))


def _np_scan_lo_points(T, DL, CL, horizon):
    if T.size == 0:
        return 0
    span = _span(T)
    for start in range(1, horizon + 1, span):
        stop = min(start + span - 1, horizon)
        ls = _candidates(DL, T, start, stop)
        if ls.size:
            hit = _first_violation(_dbf_lo_vec(T, DL, CL, ls).sum(axis=0), ls)
            if hit:
                return hit
    return 0


def _np_scan_hi_points(T, D, DL, CL, CHL, CHH, horizon):
    if T.size == 0:
        return 0
    off = D - DL
    phases = np.concatenate([off - 1, off, off + CL - 1, off + CL])
    periods = np.concatenate([T, T, T, T])
    top = max(horizon, 1)
    prev = 0
    span = _span(T)
    for start in range(1, top + 1, span):
        stop = min(start + span - 1, top)
        if stop == top:
            stop = top + int(T.max())
        ls = _candidates(phases, periods, start, stop)
        if not ls.size:
            continue
        hit = _first_violation(_dbf_hi_vec(T, D, DL, CL, CHL, CHH, ls).sum(axis=0), ls)
        if hit:
            idx = int(np.searchsorted(ls, hit))
            lo = int(ls[idx - 1]) if idx > 0 else prev
            return _np_refine_hi(T, D, DL, CL, CHL, CHH, lo, hit)
        prev = int(ls[-1])
    return 0


def _np_refine_hi(T, D, DL, CL, CHL, CHH, lo, hi):
    # same bisection as _refine_hi, evaluated through the vector form
    def excess(l):
        pt = np.array([l], dtype=np.int64)
        return int(_dbf_hi_vec(T, D, DL, CL, CHL, CHH, pt).sum()) - l

    if lo == 0:
        if excess(1) > 0:
            return 1
        lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def _np_mckp_suffix(cost, width, inf=INF):
    # works for int64 and for object arrays of python ints (pass a matching inf)
    n = cost.shape[0]
    g = np.full((n + 1, width + 1), inf, dtype=cost.dtype)
    g[n, 0] = 0
    for i in range(n - 1, -1, -1):
        row = np.full(width + 1, inf, dtype=cost.dtype)
        nxt = g[i + 1]
        for j in range(width + 1):
            c = cost[i, j]
            if c >= inf:
                continue
            cand = nxt[: width + 1 - j] + c
            cand = np.where(nxt[: width + 1 - j] >= inf, inf, cand)
            row[j:] = np.minimum(row[j:], cand)
        g[i] = row
    return g


# -- public entry points ------------------------------------------------------

if NUMBA_AVAILABLE:
    _dbf_lo_one = njit(cache=True)(_dbf_lo_one)
    _dbf_hi_one = njit(cache=True)(_dbf_hi_one)
    _next_point = njit(cache=True)(_next_point)
    scan_lo_full = njit(cache=True)(_scan_lo_full)
    scan_hi_full = njit(cache=True)(_scan_hi_full)
    scan_lo_points = njit(cache=True)(_scan_lo_points)
    _excess_hi = njit(cache=True)(_excess_hi)
    _refine_hi = njit(cache=True)(_refine_hi)
    scan_hi_points = njit(cache=True)(_scan_hi_points)
    _mckp_suffix_jit = njit(cache=True)(_mckp_suffix)

    def mckp_suffix(cost, width, inf=INF):
        if cost.dtype == object:
            return _np_mckp_suffix(cost, width, inf)
        return _mckp_suffix_jit(cost, width)
else:
    scan_lo_full = _np_scan_lo_full
    scan_hi_full = _np_scan_hi_full
    scan_lo_points = _np_scan_lo_points
    scan_hi_points = _np_scan_hi_points
    mckp_suffix = _np_mckp_suffix

# always importable, so tests and the benchmark can compare both paths
numpy_impl = {
    "scan_lo_full": _np_scan_lo_full,
    "scan_hi_full": _np_scan_hi_full,
    "scan_lo_points": _np_scan_lo_points,
    "scan_hi_points": _np_scan_hi_points,
    "mckp_suffix": _np_mckp_suffix,
}
