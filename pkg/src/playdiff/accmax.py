"""Accumulated maximum ``F(u)(t) = max_{[a,t]} u`` and its derivatives."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .intervals import IntervalSet, superlevel_set
from .maxfun import SelectionRule, argmax_set, max_over, near_argmax_set, select_measure
from .signal import TOL_EQ, PlSignal, StepLinSignal, add, lq_norm, merge_nodes, restrict


def accumulated_max(u: PlSignal) -> PlSignal:
    """Exact running maximum; crossing points where ``u`` regains its record become nodes."""
    t, v = u.t, u.v
    F = np.maximum.accumulate(v)
    Fprev = F[:-1]
    up = (v[:-1] < Fprev) & (v[1:] > Fprev)
    if not np.any(up):
        return PlSignal(u.grid, F)
    i = np.nonzero(up)[0]
    x = t[i] + (Fprev[i] - v[i]) / (v[i + 1] - v[i]) * (t[i + 1] - t[i])
    tt = np.concatenate((t, x))
    vv = np.concatenate((F, Fprev[i]))
    order = np.argsort(tt, kind="stable")
    tt, vv = tt[order], vv[order]
    keep = np.concatenate(([True], np.diff(tt) > TOL_EQ * max(1.0, abs(tt[0]), abs(tt[-1]))))
    return PlSignal(tt[keep], vv[keep])


def _check_t(u: PlSignal, t: float) -> float:
    span = TOL_EQ * max(1.0, abs(u.a), abs(u.b))
    if not (u.a - span <= t <= u.b + span):
        raise DomainError(f"t={t} outside [{u.a}, {u.b}]")
    return min(max(t, u.a), u.b)


def argmax_to(u: PlSignal, t: float) -> IntervalSet:
    """``M_t(u)``: maximisers of ``u`` on ``[a, t]``."""
    t = _check_t(u, t)
    if t == u.a:
        return IntervalSet.point(u.a)
    return argmax_set(restrict(u, u.a, t))


def near_argmax_to(u: PlSignal, t: float, delta: float) -> IntervalSet:
    """``M_{t,delta}(u) = {s in [a, t] : u(s) >= max_{[a,t]} u - delta}``."""
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    t = _check_t(u, t)
    if t == u.a:
        return IntervalSet.point(u.a)
    return near_argmax_set(restrict(u, u.a, t), delta)


class RegimeKind(enum.Enum):
    RISING = "rising"  # M_t = {t}
    PLATEAU = "plateau"  # M_t = fixed U [start, t]
    FROZEN = "frozen"  # M_t = fixed


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    lo: float
    hi: float
    fixed: IntervalSet = field(default_factory=IntervalSet)
    start: float | None = None

    def argmax_at(self, t: float) -> IntervalSet:
        if self.kind is RegimeKind.RISING:
            return IntervalSet.point(t)
        if self.kind is RegimeKind.PLATEAU:
            return self.fixed.union(IntervalSet([(self.start, t)]))
        return self.fixed

    def m(self, t: float) -> float:
        return self.fixed.max if self.kind is RegimeKind.FROZEN else t


@dataclass(frozen=True)
class MaximizerPath:
    """Regimes of ``t -> M_t(u)``; the rightmost maximiser ``m(t)`` is nondecreasing.

    The sets reported by a regime are exact on the open regime interval and at
    its left end point except where a new record starts; ``final`` is ``M_b``.
    """

    regimes: tuple[Regime, ...]
    final: IntervalSet

    @property
    def a(self) -> float:
        return self.regimes[0].lo

    @property
    def b(self) -> float:
        return self.regimes[-1].hi

    def regime_at(self, t: float) -> Regime:
        los = [g.lo for g in self.regimes]
        i = int(np.searchsorted(los, t, side="right")) - 1
        return self.regimes[max(0, min(i, len(self.regimes) - 1))]

    def m(self, t: float) -> float:
        if t >= self.b:
            return self.final.max
        return self.regime_at(t).m(t)

    def breakpoints(self) -> np.ndarray:
        return np.array([g.lo for g in self.regimes] + [self.b])


def maximizer_path(u: PlSignal) -> MaximizerPath:
    """Scan the segments of ``u`` once and record how ``M_t(u)`` evolves."""
    t, v = u.t, u.v
    M = float(v[0])
    comps: list[tuple[float, float]] = []
    tail = float(t[0])
    at_max = True
    regimes: list[Regime] = []

    def push(kind, lo, hi, fixed=(), start=None):
        if hi <= lo:
            return
        fixed = IntervalSet(fixed)
        if regimes:
            prev = regimes[-1]
            if prev.kind is kind and prev.fixed == fixed and prev.start == start:
                regimes[-1] = Regime(kind, prev.lo, hi, fixed, start)
                return
        regimes.append(Regime(kind, lo, hi, fixed, start))

    for i in range(len(t) - 1):
        t0, t1, y0, y1 = float(t[i]), float(t[i + 1]), float(v[i]), float(v[i + 1])
        tol = TOL_EQ * max(1.0, abs(M))
        if at_max:
            if y1 > M + tol:
                push(RegimeKind.RISING, t0, t1)
                comps, M, tail = [], y1, t1
            elif y1 >= M - tol:
                push(RegimeKind.PLATEAU, t0, t1, comps, tail)
            else:
                comps = comps + [(tail, t0)]
                at_max = False
                push(RegimeKind.FROZEN, t0, t1, comps)
        else:
            if y1 > M + tol:
                x = t0 + (M - y0) / (y1 - y0) * (t1 - t0)
                x = min(max(x, t0), t1)
                push(RegimeKind.FROZEN, t0, x, comps)
                push(RegimeKind.RISING, x, t1)
                comps, M, tail, at_max = [], y1, t1, True
            elif y1 >= M - tol:
                push(RegimeKind.FROZEN, t0, t1, comps)
                at_max, tail = True, t1
            else:
                push(RegimeKind.FROZEN, t0, t1, comps)
    final = IntervalSet(comps + [(tail, float(t[-1]))] if at_max else comps)
    return MaximizerPath(tuple(regimes), final)


# --------------------------------------------------------------------------
# derivative pieces


@dataclass(frozen=True)
class SelectionPiece:
    """On ``[lo, hi]`` the selected measure pairs with ``h`` as ``h(t)`` (``points is None``)
    or as the constant ``sum w_i h(points_i)``."""

    lo: float
    hi: float
    points: tuple[float, ...] | None
    weights: tuple[float, ...] | None


def selection_pieces(path: MaximizerPath, rule=SelectionRule.RIGHTMOST, lo: float | None = None) -> list[SelectionPiece]:
    """Piecewise description of ``t -> <mu_t, h>`` for ``mu_t`` picked by ``rule`` from ``M_t``."""
    rule = SelectionRule.parse(rule)
    out = []
    for g in path.regimes:
        l, r = g.lo, g.hi
        if lo is not None:
            if r <= lo:
                continue
            l = max(l, lo)
        if g.kind is RegimeKind.RISING or (
            g.kind is RegimeKind.PLATEAU and rule is SelectionRule.RIGHTMOST
        ):
            out.append(SelectionPiece(l, r, None, None))
            continue
        if g.kind is RegimeKind.PLATEAU:
            if rule is SelectionRule.LEFTMOST:
                pts = (g.fixed.min if g.fixed else g.start,)
            else:
                pts = tuple(g.fixed.left_endpoints) + (g.start,)
        else:
            mu = select_measure(g.fixed, rule)
            pts = mu.locations
        out.append(SelectionPiece(l, r, pts, tuple(1.0 / len(pts) for _ in pts)))
    return out


def pieces_to_steplin(pieces: list[SelectionPiece], h: PlSignal) -> StepLinSignal:
    """Evaluate selection pieces on a direction ``h``."""
    knots, start, end = [], [], []
    for p in pieces:
        if p.points is None:
            inner = h.t[(h.t > p.lo) & (h.t < p.hi)]
            k = np.concatenate(([p.lo], inner, [p.hi]))
            vals = h(k)
            knots.extend(k[:-1].tolist())
            start.extend(vals[:-1].tolist())
            end.extend(vals[1:].tolist())
        else:
            c = float(np.dot(p.weights, h(np.asarray(p.points))))
            knots.append(p.lo)
            start.append(c)
            end.append(c)
    knots.append(pieces[-1].hi)
    return StepLinSignal(knots, start, end)


def _check_domain(u: PlSignal, h: PlSignal) -> None:
    span = TOL_EQ * max(1.0, abs(u.a), abs(u.b))
    if abs(u.a - h.a) > span or abs(u.b - h.b) > span:
        raise DomainError(f"domains differ: [{u.a}, {u.b}] vs [{h.a}, {h.b}]")


def newton_apply(v: PlSignal, h: PlSignal, rule=SelectionRule.RIGHTMOST) -> StepLinSignal:
    """``t -> <mu_t, h>`` with ``mu_t`` supported in ``M_t(v)`` and chosen by ``rule``."""
    _check_domain(v, h)
    return pieces_to_steplin(selection_pieces(maximizer_path(v), rule), h)


def dir_derivative_on_path(path: MaximizerPath, h: PlSignal) -> StepLinSignal:
    """``t -> max_{M_t} h`` on the domain of ``path``."""
    knots, start, end = [], [], []

    def emit(sig: StepLinSignal):
        knots.extend(sig.knots[:-1].tolist())
        start.extend(sig.start.tolist())
        end.extend(sig.end.tolist())

    for g in path.regimes:
        if g.kind is RegimeKind.RISING:
            emit(StepLinSignal.from_pl(restrict(h, g.lo, g.hi)))
        elif g.kind is RegimeKind.FROZEN:
            emit(StepLinSignal.constant(g.lo, g.hi, max_over(h, g.fixed)))
        else:
            run = StepLinSignal.from_pl(restrict(accumulated_max(restrict(h, g.start, g.hi)), g.lo, g.hi)) \
                if g.start < g.lo else StepLinSignal.from_pl(accumulated_max(restrict(h, g.lo, g.hi)))
            if g.fixed:
                run = run.maximum(max_over(h, g.fixed))
            emit(run)
    knots.append(path.b)
    return StepLinSignal(knots, start, end)


def pointwise_dir_derivative(u: PlSignal, h: PlSignal) -> StepLinSignal:
    """``F'(u; h)(t) = max_{M_t(u)} h`` (one-sided limits stored at jumps)."""
    _check_domain(u, h)
    return dir_derivative_on_path(maximizer_path(u), h)


def pointwise_dir_derivative_at(u: PlSignal, h: PlSignal, t: float) -> float:
    """Exact value of ``F'(u; h)`` at a single time ``t``."""
    return max_over(h, argmax_to(u, t))


def remainder_lq(
    u: PlSignal,
    h: PlSignal,
    which: str = "newton",
    lq_exponent: float = 2.0,
    gamma: float | None = None,
    rule=SelectionRule.RIGHTMOST,
) -> float:
    """``||F(u + h) - F(u) - D h||_{L^q(a, gamma)}``.

    ``which="newton"`` uses the selection at ``u + h``; ``"bouligand"`` uses
    the directional derivative at ``u``.
    """
    _check_domain(u, h)
    uh = add(u, h)
    if which == "newton":
        D = newton_apply(uh, h, rule)
    elif which == "bouligand":
        D = pointwise_dir_derivative(u, h)
    else:
        raise ParameterError(f"unknown derivative flavor {which!r}")
    diff = StepLinSignal.from_pl(add(accumulated_max(uh), -accumulated_max(u))) - D
    gamma = u.b if gamma is None else gamma
    return lq_norm(diff, lq_exponent, window=(u.a, gamma))


# --------------------------------------------------------------------------
# good set


def inclusion_holds(u: PlSignal, t: float, delta: float, eps: float) -> bool:
    """Direct test of ``M_{t,delta}(u) within M_t(u) + (-eps, eps)``."""
    return near_argmax_to(u, t, delta).within_neighbourhood(argmax_to(u, t), eps)


@dataclass(frozen=True)
class GoodSetReport:
    delta: float
    eps: float
    good_set: IntervalSet
    complement_measure: float


def _minus_open(S: IntervalSet, opens: list[tuple[float, float]]) -> IntervalSet:
    """Closed set ``S`` minus a union of open intervals."""
    out = []
    for l, r in S:
        pieces = [(l, r)]
        for lo, hi in opens:
            nxt = []
            for a, b in pieces:
                if hi <= a or lo >= b:
                    nxt.append((a, b))
                    continue
                if lo >= a:
                    nxt.append((a, lo))
                if hi <= b:
                    nxt.append((hi, b))
            pieces = nxt
        out.extend(pieces)
    return IntervalSet(out)


def good_set(u: PlSignal, delta: float, eps: float) -> GoodSetReport:
    """``A_delta^eps(u)``: times where near-maximisers are ``eps``-close to maximisers.

    The set is computed regime by regime.  While ``u`` sets new records the
    condition reduces to ``u(t) - F(u)(t - eps) - delta > 0``, a piecewise-linear
    inequality in ``t``.  On a plateau of the record the status cannot change.
    While the record is frozen the near-maximiser set only grows with ``t``,
    so the good part is an initial piece of the regime.
    """
    if not (delta > 0 and eps > 0):
        raise ParameterError("delta and eps must be positive")
    a, b = u.a, u.b
    path = maximizer_path(u)
    F = accumulated_max(u)
    good: list[tuple[float, float]] = []
    for g in path.regimes:
        l, r = g.lo, g.hi
        if g.kind is RegimeKind.RISING:
            cut = min(r, a + eps)
            if cut > l:
                good.append((l, cut))
            lo = max(l, a + eps)
            if lo < r:
                cand = np.concatenate(([lo, r], u.t, F.t + eps))
                ts = merge_nodes(cand[(cand >= lo) & (cand <= r)])
                if len(ts) < 2:
                    continue
                gvals = u(ts) - F(ts - eps) - delta
                good.extend(superlevel_set(PlSignal(ts, gvals), 0.0, tol=0.0).components)
        elif g.kind is RegimeKind.PLATEAU:
            mid = 0.5 * (l + r)
            if inclusion_holds(u, mid, delta, eps):
                good.append((l, r))
        else:
            level = float(u(g.fixed.max)) - delta
            S = superlevel_set(u, level, a, r, tol=0.0)
            bad = _minus_open(S, g.fixed.open_neighbourhood(eps))
            stop = r if not bad else min(r, bad.min)
            if stop > l:
                good.append((l, stop))
    gs = IntervalSet(good, tol=TOL_EQ * max(1.0, abs(a), abs(b)))
    return GoodSetReport(delta, eps, gs, max(0.0, (b - a) - gs.measure))
