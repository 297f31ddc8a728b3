"""Compiled inner loops for trajectory classification.

All kernels are ``nogil`` so row blocks of a grid can be classified from a
thread pool. No ``fastmath``: results must be bit-identical regardless of how
the work is scheduled.
"""

import numba as nb
import numpy as np

FUNDAMENTAL = 0
NONFUNDAMENTAL = 1
WQA = 2
DIVERGENT = 3
UNDECIDED = 4
PERIODIC = 5

# relative step size under which the pure-simulation mode treats an orbit as settled
_STALL_TOL = 1e-14


@nb.njit(nogil=True, cache=True)
def classify_one(x, y, b, c, h, t_max, r_div, eps_fix, p_max, eps_rec,
                 early_exit, transient, growth_tol, max_ext, buf, counts):
    """Classify the orbit of (x, y) under map M.

    ``buf`` (w_tail x 2) receives the last visited states as a ring buffer and
    ``counts`` the number of visits to L, M, R. When the budget runs out while
    the tail window still sets amplitude records (by more than ``growth_tol``
    relative to everything after ``transient``), the orbit is taken to be
    diverging slowly and gets another ``t_max`` steps, at most ``max_ext``
    times. Returns
    (code, u, iterations, period, n_tail, tail_start) where the tail occupies
    ``buf`` rows ``(tail_start + k) % w_tail`` for k < n_tail, oldest first.
    """
    w_tail = buf.shape[0]
    a_out = 1.0 + b - c
    a_mid = 1.0 + b
    in_band = b < 1.0
    counts[0] = 0
    counts[1] = 0
    counts[2] = 0
    t = 0
    limit = t_max
    n_ext = 0
    hist_max = 0.0  # amplitude of post-transient states that left the ring buffer
    while True:
        if not (abs(x) <= r_div and abs(y) <= r_div):
            return DIVERGENT, 0.0, t, 0, 0, 0
        if x == y and -h <= x <= h:
            # exact point of the fixed segment (also covers b >= 1)
            code = FUNDAMENTAL if abs(x) <= eps_fix else NONFUNDAMENTAL
            return code, x, t, 0, 0, 0
        if early_exit and in_band:
            if -h <= x <= h and y <= -h + (x + h) / b and y >= h + (x - h) / b:
                u = (b * y - x) / (b - 1.0)
                code = FUNDAMENTAL if abs(u) <= eps_fix else NONFUNDAMENTAL
                return code, u, t, 0, 0, 0
        if t == limit:
            if n_ext < max_ext and hist_max > 0.0:
                tail_max = 0.0
                for k in range(w_tail):
                    tail_max = max(tail_max, abs(buf[k, 0]), abs(buf[k, 1]))
                if tail_max > (1.0 + growth_tol) * hist_max:
                    n_ext += 1
                    limit += t_max
                    continue
            break
        if t >= w_tail and t - w_tail >= transient:
            hist_max = max(hist_max, abs(buf[t % w_tail, 0]), abs(buf[t % w_tail, 1]))
        buf[t % w_tail, 0] = x
        buf[t % w_tail, 1] = y
        if x > h:
            counts[2] += 1
            xn = a_out * x - b * y
        elif x < -h:
            counts[0] += 1
            xn = a_out * x - b * y
        else:
            counts[1] += 1
            xn = a_mid * x - b * y
        if not early_exit and -h <= x <= h:
            scale = max(1.0, abs(x))
            if abs(xn - x) <= _STALL_TOL * scale and abs(x - y) <= _STALL_TOL * scale:
                code = FUNDAMENTAL if abs(xn) <= eps_fix else NONFUNDAMENTAL
                return code, xn, t + 1, 0, 0, 0
        y = x
        x = xn
        t += 1

    n_tail = min(t, w_tail)
    start = (t - n_tail) % w_tail
    if n_tail < 2 * p_max:
        return UNDECIDED, 0.0, t, 0, n_tail, start
    for p in range(1, p_max + 1):
        ok = True
        for k in range(p, n_tail):
            i1 = (start + k) % w_tail
            i0 = (start + k - p) % w_tail
            if abs(buf[i1, 0] - buf[i0, 0]) > eps_rec or abs(buf[i1, 1] - buf[i0, 1]) > eps_rec:
                ok = False
                break
        if ok:
            return PERIODIC, 0.0, t, p, n_tail, start
    return WQA, 0.0, t, 0, n_tail, start


@nb.njit(nogil=True, cache=True)
def classify_batch(xs, ys, bs, cs, h, t_max, r_div, eps_fix, w_tail, p_max,
                   eps_rec, early_exit, transient, growth_tol, max_ext,
                   codes, us, periods, iters, centroids):
    """Classify a flat batch of cells; parameters may vary per cell."""
    buf = np.empty((w_tail, 2))
    counts = np.zeros(3, dtype=np.int64)
    for i in range(xs.shape[0]):
        code, u, it, per, n_tail, start = classify_one(
            xs[i], ys[i], bs[i], cs[i], h, t_max, r_div, eps_fix, p_max,
            eps_rec, early_exit, transient, growth_tol, max_ext, buf, counts)
        codes[i] = code
        us[i] = u
        periods[i] = per
        iters[i] = it
        sx = 0.0
        sy = 0.0
        if n_tail > 0 and (code == WQA or code == PERIODIC):
            for k in range(n_tail):
                j = (start + k) % w_tail
                sx += buf[j, 0]
                sy += buf[j, 1]
            sx /= n_tail
            sy /= n_tail
        centroids[i, 0] = sx
        centroids[i, 1] = sy


@nb.njit(nogil=True, cache=True)
def orbit_m(x, y, b, c, h, n, out):
    """Write ``n`` successive states of map M starting at (x, y) into ``out``.

    Returns the number of finite states written.
    """
    a_out = 1.0 + b - c
    a_mid = 1.0 + b
    for t in range(n):
        if not (np.isfinite(x) and np.isfinite(y)):
            return t
        out[t, 0] = x
        out[t, 1] = y
        if x > h or x < -h:
            xn = a_out * x - b * y
        else:
            xn = a_mid * x - b * y
        y = x
        x = xn
    return n
