"""Piecewise-linear signals, exact norms and signal algebra.

Every operator in the package acts on continuous piecewise-linear
functions (``PlSignal``).  Derivative outputs live in L^q and may jump, so
they are represented as ``StepLinSignal``: linear on each segment of a
knot sequence, with independent one-sided values at every knot.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, ParameterError, SignalFormatError

TOL_EQ = 1e-12


def _as_nodes(nodes) -> np.ndarray:
    arr = np.array(nodes, dtype=float).ravel()
    if arr.size < 2:
        raise DomainError("a time grid needs at least 2 nodes")
    if not np.all(np.isfinite(arr)):
        raise DomainError("time nodes must be finite")
    if np.any(np.diff(arr) <= 0):
        raise DomainError("time nodes must be strictly increasing")
    arr.setflags(write=False)
    return arr


class TimeGrid:
    """Strictly increasing node sequence ``a = t_0 < ... < t_n = b``."""

    __slots__ = ("nodes",)

    def __init__(self, nodes):
        self.nodes = nodes.nodes if isinstance(nodes, TimeGrid) else _as_nodes(nodes)

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())

    def __repr__(self) -> str:
        return f"TimeGrid(n={len(self)}, a={self.a:g}, b={self.b:g})"


def merge_nodes(*arrays, tol: float = TOL_EQ) -> np.ndarray:
    """Sorted union of node arrays; points closer than ``tol`` (relative to the span) collapse."""
    allp = np.unique(np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays]))
    if allp.size < 2:
        return allp
    scale = tol * max(1.0, abs(allp[0]), abs(allp[-1]))
    keep = np.concatenate(([True], np.diff(allp) > scale))
    out = allp[keep]
    # the right end point must survive exactly
    out[-1] = allp[-1]
    return out


class PlSignal:
    """Continuous piecewise-linear function given by node values on a ``TimeGrid``."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        self.grid = grid if isinstance(grid, TimeGrid) else TimeGrid(grid)
        vals = np.array(values, dtype=float).ravel()
        if vals.shape != self.grid.nodes.shape:
            raise DomainError(
                f"values length {vals.size} does not match node count {len(self.grid)}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("signal values must be finite")
        vals.setflags(write=False)
        self.values = vals

    @classmethod
    def constant(cls, a: float, b: float, c: float) -> "PlSignal":
        return cls([a, b], [c, c])

    @classmethod
    def from_function(cls, f, nodes) -> "PlSignal":
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, [f(x) for x in nodes])

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def v(self) -> np.ndarray:
        return self.values

    @property
    def a(self) -> float:
        return self.grid.a

    @property
    def b(self) -> float:
        return self.grid.b

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.t)

    def __call__(self, t):
        return np.interp(t, self.t, self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"PlSignal(n={len(self)}, [{self.a:g}, {self.b:g}])"

    def __add__(self, other):
        if isinstance(other, PlSignal):
            return add(self, other)
        return shift(self, float(other))

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        if isinstance(other, PlSignal):
            return add(self, scale(other, -1.0))
        return shift(self, -float(other))

    def __mul__(self, c):
        return scale(self, float(c))

    __rmul__ = __mul__

    def refine(self, nodes) -> "PlSignal":
        """The same function on the union of its grid with ``nodes`` (clipped to [a, b])."""
        nodes = np.asarray(nodes, dtype=float)
        nodes = nodes[(nodes > self.a) & (nodes < self.b)]
        t = merge_nodes(self.t, nodes)
        return PlSignal(t, self(t))

    def max_on(self, lo: float, hi: float) -> float:
        """Exact maximum over ``[lo, hi]``."""
        inner = self.values[(self.t > lo) & (self.t < hi)]
        return float(max(self(lo), self(hi), *inner)) if inner.size else float(max(self(lo), self(hi)))

    def min_on(self, lo: float, hi: float) -> float:
        inner = self.values[(self.t > lo) & (self.t < hi)]
        return float(min(self(lo), self(hi), *inner)) if inner.size else float(min(self(lo), self(hi)))


def eval_at(sig: PlSignal, t: float) -> float:
    """Value of ``sig`` at ``t``; linear interpolation between nodes."""
    span = TOL_EQ * max(1.0, abs(sig.a), abs(sig.b))
    if not (sig.a - span <= t <= sig.b + span):
        raise DomainError(f"t={t} outside [{sig.a}, {sig.b}]")
    return float(sig(t))


def _check_same_domain(u: PlSignal, v: PlSignal) -> None:
    span = TOL_EQ * max(1.0, abs(u.a), abs(u.b))
    if abs(u.a - v.a) > span or abs(u.b - v.b) > span:
        raise DomainError(f"domains differ: [{u.a}, {u.b}] vs [{v.a}, {v.b}]")


def add(u: PlSignal, v: PlSignal) -> PlSignal:
    _check_same_domain(u, v)
    if u.grid == v.grid:
        return PlSignal(u.grid, u.values + v.values)
    t = merge_nodes(u.t, v.t)
    return PlSignal(t, u(t) + v(t))


def scale(u: PlSignal, c: float) -> PlSignal:
    return PlSignal(u.grid, c * u.values)


def shift(u: PlSignal, c: float) -> PlSignal:
    """Add the constant ``c``."""
    return PlSignal(u.grid, u.values + c)


def restrict(u: PlSignal, lo: float, hi: float) -> PlSignal:
    """Restriction to ``[lo, hi]``, with interpolated end nodes."""
    span = TOL_EQ * max(1.0, abs(u.a), abs(u.b))
    if lo < u.a - span or hi > u.b + span or hi <= lo:
        raise DomainError(f"cannot restrict [{u.a}, {u.b}] to [{lo}, {hi}]")
    lo, hi = max(lo, u.a), min(hi, u.b)
    if lo == u.a and hi == u.b:
        return u
    inner = u.t[(u.t > lo) & (u.t < hi)]
    t = np.concatenate(([lo], inner, [hi]))
    t = merge_nodes(t)
    return PlSignal(t, u(t))


# --------------------------------------------------------------------------
# step-linear signals


class StepLinSignal:
    """Piecewise-linear function with possible jumps at knots.

    Segment ``i`` spans ``[knots[i], knots[i+1]]`` and runs linearly from
    ``start[i]`` to ``end[i]``.  At an interior knot the left limit is
    ``end[i-1]`` and the right limit is ``start[i]``.
    """

    __slots__ = ("knots", "start", "end")

    def __init__(self, knots, start, end):
        k = _as_nodes(knots)
        s = np.array(start, dtype=float).ravel()
        e = np.array(end, dtype=float).ravel()
        if s.shape != (len(k) - 1,) or e.shape != s.shape:
            raise DomainError("need one (start, end) pair per segment")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(e))):
            raise DomainError("step-linear values must be finite")
        s.setflags(write=False)
        e.setflags(write=False)
        self.knots, self.start, self.end = k, s, e

    @classmethod
    def from_pl(cls, sig: PlSignal) -> "StepLinSignal":
        return cls(sig.t, sig.v[:-1], sig.v[1:])

    @classmethod
    def constant(cls, a: float, b: float, c: float) -> "StepLinSignal":
        return cls([a, b], [c], [c])

    @classmethod
    def concat(cls, pieces: Sequence["StepLinSignal"]) -> "StepLinSignal":
        """Join pieces whose domains abut."""
        pieces = [p for p in pieces if p is not None]
        knots = [pieces[0].knots]
        for p in pieces[1:]:
            knots.append(p.knots[1:])
        return cls(
            np.concatenate(knots),
            np.concatenate([p.start for p in pieces]),
            np.concatenate([p.end for p in pieces]),
        )

    @property
    def a(self) -> float:
        return float(self.knots[0])

    @property
    def b(self) -> float:
        return float(self.knots[-1])

    def __repr__(self) -> str:
        return f"StepLinSignal(segments={len(self.start)}, [{self.a:g}, {self.b:g}])"

    def _seg(self, t, side):
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.knots, t, side=side) - 1
        return np.clip(i, 0, len(self.start) - 1)

    def _value_in(self, i, t):
        k0, k1 = self.knots[i], self.knots[i + 1]
        theta = np.clip((t - k0) / (k1 - k0), 0.0, 1.0)
        return self.start[i] + theta * (self.end[i] - self.start[i])

    def left(self, t):
        """Left limit (the value at ``a`` for ``t = a``)."""
        t = np.asarray(t, dtype=float)
        return self._value_in(self._seg(t, "left"), t)

    def right(self, t):
        """Right limit (the value at ``b`` for ``t = b``)."""
        t = np.asarray(t, dtype=float)
        return self._value_in(self._seg(t, "right"), t)

    __call__ = right

    def refine(self, knots) -> "StepLinSignal":
        """Same function on a knot superset."""
        knots = np.asarray(knots, dtype=float)
        mid = 0.5 * (knots[:-1] + knots[1:])
        i = self._seg(mid, "right")
        return StepLinSignal(knots, self._value_in(i, knots[:-1]), self._value_in(i, knots[1:]))

    def _binary(self, other, op):
        if isinstance(other, PlSignal):
            other = StepLinSignal.from_pl(other)
        if isinstance(other, StepLinSignal):
            span = TOL_EQ * max(1.0, abs(self.a), abs(self.b))
            if abs(self.a - other.a) > span or abs(self.b - other.b) > span:
                raise DomainError("step-linear signals on different domains")
            if np.array_equal(self.knots, other.knots):
                return StepLinSignal(self.knots, op(self.start, other.start), op(self.end, other.end))
            k = merge_nodes(self.knots, other.knots)
            x, y = self.refine(k), other.refine(k)
            return StepLinSignal(k, op(x.start, y.start), op(x.end, y.end))
        c = float(other)
        return StepLinSignal(self.knots, op(self.start, c), op(self.end, c))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return StepLinSignal(self.knots, -self.start, -self.end)

    def __mul__(self, c):
        c = float(c)
        return StepLinSignal(self.knots, c * self.start, c * self.end)

    __rmul__ = __mul__

    def restrict(self, lo: float, hi: float) -> "StepLinSignal":
        lo, hi = max(lo, self.a), min(hi, self.b)
        if hi <= lo:
            raise DomainError("empty restriction window")
        inner = self.knots[(self.knots > lo) & (self.knots < hi)]
        k = merge_nodes(np.concatenate(([lo], inner, [hi])))
        return self.refine(k)

    def maximum(self, c: float) -> "StepLinSignal":
        """Pointwise ``max(self, c)``; crossing points become knots."""
        return _clip_steplin(self, c, upper=False)

    def minimum(self, c: float) -> "StepLinSignal":
        return _clip_steplin(self, c, upper=True)

    def rows(self):
        """``(t, left, right)`` per knot."""
        left = np.concatenate(([self.start[0]], self.end))
        right = np.concatenate((self.start, [self.end[-1]]))
        return list(zip(self.knots.tolist(), left.tolist(), right.tolist()))

    def max_abs_difference(self, other: "StepLinSignal") -> float:
        d = self - other
        return float(max(np.max(np.abs(d.start)), np.max(np.abs(d.end))))


def _clip_steplin(sig: StepLinSignal, c: float, upper: bool) -> StepLinSignal:
    k, s, e = [], [], []
    for i in range(len(sig.start)):
        k0, k1, y0, y1 = sig.knots[i], sig.knots[i + 1], sig.start[i], sig.end[i]
        d0, d1 = y0 - c, y1 - c
        if upper:
            d0, d1 = -d0, -d1
        if d0 * d1 < 0:
            x = k0 + (k1 - k0) * d0 / (d0 - d1)
            if x - k0 <= TOL_EQ * (k1 - k0) or k1 - x <= TOL_EQ * (k1 - k0):
                pieces = [(k0, k1, y0, y1)]
            else:
                pieces = [(k0, x, y0, c), (x, k1, c, y1)]
        else:
            pieces = [(k0, k1, y0, y1)]
        for a0, a1, v0, v1 in pieces:
            if upper:
                v0, v1 = min(v0, c), min(v1, c)
            else:
                v0, v1 = max(v0, c), max(v1, c)
            k.append(a0)
            s.append(v0)
            e.append(v1)
    k.append(sig.knots[-1])
    return StepLinSignal(k, s, e)


# --------------------------------------------------------------------------
# norms


def sup_norm(sig: PlSignal, window: tuple[float, float] | None = None) -> float:
    if window is not None:
        sig = restrict(sig, *window)
    return float(np.max(np.abs(sig.v)))


def w1p_norm(
    sig: PlSignal,
    p: float,
    window: tuple[float, float] | None = None,
    *,
    allow_w11: bool = False,
) -> float:
    """``|u(a)| + ||u'||_p``, exact for piecewise-linear ``u``.

    ``p = 1`` is rejected unless ``allow_w11`` is set; it is only used for
    the W^{1,1} counterexample of the maximum functional.
    """
    if not (p > 1 or (allow_w11 and p == 1)) or not math.isfinite(p):
        raise ParameterError(f"W^(1,p) norm needs 1 < p < inf, got p={p}")
    if window is not None:
        sig = restrict(sig, *window)
    dt = np.diff(sig.t)
    slope = np.abs(np.diff(sig.v)) / dt
    return float(abs(sig.v[0]) + np.sum(slope**p * dt) ** (1.0 / p))


def _golden_max(f, lo, hi, iters=90):
    """Vectorised golden-section maximisation of unimodal ``f`` on ``[lo, hi]``."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = lo.copy(), hi.copy()
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        left = f1 < f2
        lo = np.where(left, x1, lo)
        hi = np.where(left, hi, x2)
        nx1 = np.where(left, x2, hi - g * (hi - lo))
        nx2 = np.where(left, lo + g * (hi - lo), x1)
        nf1 = np.where(left, f2, np.nan)
        nf2 = np.where(left, np.nan, f1)
        need1, need2 = np.isnan(nf1), np.isnan(nf2)
        if need1.any():
            nf1[need1] = f(nx1)[need1]
        if need2.any():
            nf2[need2] = f(nx2)[need2]
        x1, x2, f1, f2 = nx1, nx2, nf1, nf2
    return np.maximum(f1, f2)


def holder_seminorm(sig: PlSignal, alpha: float) -> float:
    """``sup |u(t) - u(s)| / |t - s|^alpha`` for piecewise-linear ``u``.

    For ``alpha = 1`` this is the largest absolute slope.  For ``alpha < 1``
    the supremum is attained with at least one point at a node; for a fixed
    node and a fixed segment the ratio is unimodal on the part of the
    segment where ``|u(t) - u(s)|`` shrinks while moving away from the node,
    and monotone elsewhere.  Node pairs plus one golden-section search per
    (node, segment) piece therefore give the supremum to machine accuracy.
    """
    t, v = sig.t, sig.v
    if alpha == 1.0:
        return float(np.max(np.abs(sig.slopes)))
    n = len(t)
    best = 0.0
    m = sig.slopes
    chunk = max(1, 2_000_000 // max(n, 1))
    for i0 in range(0, n, chunk):
        idx = np.arange(i0, min(n, i0 + chunk))
        s = t[idx][:, None]
        vs = v[idx][:, None]
        # node pairs
        d = np.abs(t[None, :] - s)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(d > 0, np.abs(v[None, :] - vs) / d**alpha, 0.0)
        best = max(best, float(np.max(r)))
        # interior candidates: segments to the right of the node
        tj, tj1, vj = t[None, :-1], t[None, 1:], v[None, :-1]
        right = tj >= s
        D0 = vj - vs
        with np.errstate(divide="ignore", invalid="ignore"):
            tz = tj - D0 / m[None, :]
        shrinking = right & (D0 * m[None, :] < 0)
        hi_r = np.where(shrinking, np.minimum(tj1, np.where(np.isfinite(tz), tz, tj1)), 0.0)
        lo_r = np.where(shrinking, tj, 0.0)
        # segments to the left: start from the right end, move left
        left = tj1 <= s
        D1 = v[None, 1:] - vs
        shrinking_l = left & (D1 * (-m[None, :]) < 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            tz_l = tj1 - D1 / m[None, :]
        lo_l = np.where(shrinking_l, np.maximum(tj, np.where(np.isfinite(tz_l), tz_l, tj)), 0.0)
        hi_l = np.where(shrinking_l, tj1, 0.0)
        for mask, lo, hi in ((shrinking, lo_r, hi_r), (shrinking_l, lo_l, hi_l)):
            ii, jj = np.nonzero(mask)
            if ii.size == 0:
                continue
            sv, vv = s[ii, 0], vs[ii, 0]
            t0, v0, mj = t[jj], v[jj], m[jj]

            def ratio(x, sv=sv, vv=vv, t0=t0, v0=v0, mj=mj):
                dd = np.abs(x - sv)
                with np.errstate(divide="ignore", invalid="ignore"):
                    out = np.abs(v0 + mj * (x - t0) - vv) / dd**alpha
                return np.where(dd > 0, out, 0.0)

            a_, b_ = lo[ii, jj], hi[ii, jj]
            ok = b_ > a_
            if ok.any():
                best = max(best, float(np.max(_golden_max(ratio, a_, b_)[ok])))
    return best


def holder_norm(sig: PlSignal, alpha: float, window: tuple[float, float] | None = None) -> float:
    """``|u(a)| + [u]_alpha``."""
    if not (0 < alpha <= 1):
        raise ParameterError(f"Hoelder exponent must lie in (0, 1], got {alpha}")
    if window is not None:
        sig = restrict(sig, *window)
    return float(abs(sig.v[0]) + holder_seminorm(sig, alpha))


def _seg_lq(v0, v1, length, q):
    """Exact ``int |linear|^q`` over segments with end values ``v0, v1``."""
    v0, v1, length = np.broadcast_arrays(
        np.asarray(v0, float), np.asarray(v1, float), np.asarray(length, float)
    )
    out = np.zeros(v0.shape)
    cross = v0 * v1 < 0
    a0, a1 = np.abs(v0), np.abs(v1)
    if cross.any():
        tot = a0[cross] + a1[cross]
        l0 = length[cross] * a0[cross] / tot
        l1 = length[cross] - l0
        out[cross] = (l0 * a0[cross] ** q + l1 * a1[cross] ** q) / (q + 1.0)
    same = ~cross
    hi = np.maximum(a0, a1)[same]
    lo = np.minimum(a0, a1)[same]
    L = length[same]
    res = np.zeros(hi.shape)
    pos = hi > 0
    d = np.zeros(hi.shape)
    d[pos] = (hi[pos] - lo[pos]) / hi[pos]
    flat = pos & (d < 1e-300)
    res[flat] = L[flat] * hi[flat] ** q
    gen = pos & ~flat
    if gen.any():
        dg = d[gen]
        with np.errstate(divide="ignore"):
            num = -np.expm1((q + 1.0) * np.log1p(-dg))
        res[gen] = L[gen] * hi[gen] ** q * num / ((q + 1.0) * dg)
    out[same] = res
    return out


def lq_norm(sig, q: float, window: tuple[float, float] | None = None) -> float:
    """Exact ``L^q`` norm over ``window`` (default: the whole domain)."""
    if not (q >= 1 and math.isfinite(q)):
        raise ParameterError(f"L^q exponent must lie in [1, inf), got {q}")
    if isinstance(sig, PlSignal):
        sig = StepLinSignal.from_pl(sig)
    if window is not None:
        lo, hi = window
        if hi <= max(lo, sig.a) or lo >= sig.b:
            raise DomainError(f"empty window [{lo}, {hi}]")
        sig = sig.restrict(lo, hi)
    integral = float(np.sum(_seg_lq(sig.start, sig.end, np.diff(sig.knots), q)))
    return integral ** (1.0 / q)


def modulus_of_continuity(sig: PlSignal, eps: float, window: tuple[float, float] | None = None) -> float:
    """Exact ``sup{|f(t) - f(s)| : |t - s| <= eps}`` on the window.

    The window range ``g(t) = max_[t,t+eps] f - min_[t,t+eps] f`` is convex
    between consecutive events (``t`` or ``t + eps`` hitting a node), so the
    supremum is attained at an event.
    """
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if window is not None:
        sig = restrict(sig, *window)
    a, b = sig.a, sig.b
    if eps >= b - a:
        return float(np.max(sig.v) - np.min(sig.v))
    last = b - eps
    cand = np.concatenate(([a, last], sig.t, sig.t - eps))
    starts = np.unique(cand[(cand >= a) & (cand <= last)])
    return float(np.max(kernels.window_oscillation(sig.t, sig.v, starts, eps)))


@dataclass(frozen=True)
class NormSpec:
    """Norm selector: ``sup``, ``w1p`` (exponent p > 1), ``holder`` (alpha), ``lq`` (q).

    ``w11`` is the W^{1,1} norm, kept only for the counterexample diagnostics.
    """

    kind: str
    param: float | None = None

    def __post_init__(self):
        k, p = self.kind, self.param
        if k in ("sup", "w11"):
            return
        if p is None:
            raise ParameterError(f"norm {k!r} needs a parameter")
        if k == "w1p" and not p > 1:
            raise ParameterError(f"W^(1,p) needs p > 1, got {p}")
        if k == "holder" and not (0 < p <= 1):
            raise ParameterError(f"Hoelder exponent must lie in (0, 1], got {p}")
        if k == "lq" and not p >= 1:
            raise ParameterError(f"L^q needs q >= 1, got {p}")
        if k not in ("w1p", "holder", "lq"):
            raise ParameterError(f"unknown norm kind {k!r}")

    @classmethod
    def parse(cls, text: str) -> "NormSpec":
        """``"sup"``, ``"holder:0.5"``, ``"w1p:2"``, ``"lq:2"``."""
        name, _, val = text.partition(":")
        name = name.strip().lower()
        if name in ("sup", "w11"):
            return cls(name)
        try:
            p = float(val)
        except ValueError:
            raise ParameterError(f"bad norm specification {text!r}") from None
        return cls(name, p)

    def __str__(self) -> str:
        return self.kind if self.param is None else f"{self.kind}:{self.param:g}"

    def of(self, sig, window: tuple[float, float] | None = None) -> float:
        if self.kind == "sup":
            return sup_norm(sig, window)
        if self.kind == "w1p":
            return w1p_norm(sig, self.param, window)
        if self.kind == "w11":
            return w1p_norm(sig, 1.0, window, allow_w11=True)
        if self.kind == "holder":
            return holder_norm(sig, self.param, window)
        return lq_norm(sig, self.param, window)


# --------------------------------------------------------------------------
# CSV I/O


def read_signal_csv(path) -> PlSignal:
    """Read a ``t,value`` CSV file."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise SignalFormatError(f"{path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "value"]:
            raise SignalFormatError(f"{path}: row 1: expected header 't,value'")
        ts, vs = [], []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise SignalFormatError(f"{path}: row {row_no}: expected 2 columns, got {len(row)}")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                raise SignalFormatError(f"{path}: row {row_no}: not a number: {row!r}") from None
            if not (math.isfinite(t) and math.isfinite(v)):
                raise SignalFormatError(f"{path}: row {row_no}: non-finite value")
            if ts and t <= ts[-1]:
                raise SignalFormatError(f"{path}: row {row_no}: t not strictly increasing")
            ts.append(t)
            vs.append(v)
    if len(ts) < 2:
        raise SignalFormatError(f"{path}: need at least 2 data rows")
    return PlSignal(ts, vs)


def write_signal_csv(path, sig: PlSignal) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(sig.t.tolist(), sig.v.tolist()):
            w.writerow([repr(t), repr(v)])


def write_steplin_csv(path, sig: StepLinSignal) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "left", "right"])
        for t, lv, rv in sig.rows():
            w.writerow([repr(t), repr(lv), repr(rv)])


def read_steplin_csv(path) -> StepLinSignal:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "left", "right"]:
            raise SignalFormatError(f"{path}: row 1: expected header 't,left,right'")
        for row_no, row in enumerate(reader, start=2):
            try:
                rows.append(tuple(float(c) for c in row))
            except ValueError:
                raise SignalFormatError(f"{path}: row {row_no}: not a number") from None
    t = [r[0] for r in rows]
    return StepLinSignal(t, [r[2] for r in rows[:-1]], [r[1] for r in rows[1:]])


def random_pl(rng: np.random.Generator, n: int, a: float = 0.0, b: float = 1.0, amp: float = 1.0) -> PlSignal:
    """Random piecewise-linear signal with ``n`` nodes (interior nodes uniform)."""
    inner = np.sort(rng.uniform(a, b, size=n - 2))
    t = merge_nodes(np.concatenate(([a], inner, [b])), tol=1e-9)
    return PlSignal(t, amp * rng.uniform(-1.0, 1.0, size=len(t)))


def signals_close(u: PlSignal, v: PlSignal, tol: float) -> bool:
    """Sup-distance between two piecewise-linear signals is at most ``tol``."""
    return sup_norm(add(u, scale(v, -1.0))) <= tol


__all__: Iterable[str] = [
    "TOL_EQ",
    "TimeGrid",
    "PlSignal",
    "StepLinSignal",
    "NormSpec",
    "merge_nodes",
    "eval_at",
    "add",
    "scale",
    "shift",
    "restrict",
    "sup_norm",
    "w1p_norm",
    "holder_norm",
    "holder_seminorm",
    "lq_norm",
    "modulus_of_continuity",
    "read_signal_csv",
    "write_signal_csv",
    "write_steplin_csv",
    "read_steplin_csv",
    "random_pl",
    "signals_close",
]
