"""Pure-Python reference versions of the sequential inner loops."""
import numpy as np


def play_nodes(u, r, w0):
    """Play values at the nodes of a piecewise-monotone input.

    Each segment of a piecewise-linear input is monotone, so the node
    recursion ``w_i = max(u_i - r, min(u_i + r, w_{i-1}))`` is exact.
    """
    u = np.asarray(u, dtype=float)
    w = np.empty_like(u)
    prev = float(w0)
    w[0] = prev
    for i in range(1, len(u)):
        ui = u[i]
        lo = ui - r
        hi = ui + r
        if prev < lo:
            prev = lo
        elif prev > hi:
            prev = hi
        w[i] = prev
    return w


def project_stop(u, r, z0):
    """Stop values from ``z_{i+1} = clamp(z_i + u_{i+1} - u_i, -r, r)``."""
    u = np.asarray(u, dtype=float)
    z = np.empty_like(u)
    cur = min(r, max(-r, float(z0)))
    z[0] = cur
    for i in range(1, len(u)):
        cur = cur + (u[i] - u[i - 1])
        if cur > r:
            cur = r
        elif cur < -r:
            cur = -r
        z[i] = cur
    return z


def window_oscillation(t, v, starts, eps):
    """``max - min`` of the piecewise-linear ``(t, v)`` over ``[s, s + eps]`` for each start ``s``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.empty(len(starts))
    n = len(t)
    for k, s in enumerate(starts):
        e = s + eps
        vs = np.interp(s, t, v)
        ve = np.interp(e, t, v)
        hi = max(vs, ve)
        lo = min(vs, ve)
        i = np.searchsorted(t, s, side="right")
        while i < n and t[i] < e:
            if v[i] > hi:
                hi = v[i]
            if v[i] < lo:
                lo = v[i]
            i += 1
        out[k] = hi - lo
    return out
