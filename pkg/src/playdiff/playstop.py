"""Scalar play and stop operators and their derivatives.

The play ``w = P_r[u; z0]`` is evaluated exactly on piecewise-linear inputs:
on every linear segment ``w`` first stays put and then follows ``u - r``
(rising input) or ``u + r`` (falling input), so adding the switching points
to the node grid makes ``w`` and the stop ``z = u - w`` piecewise linear.

Derivatives use a partition of ``[a, b]`` into plus intervals (no contact
with the lower rail ``z = -r``) and minus intervals (no contact with
``z = +r``).  On a plus interval the play is an accumulated maximum,
``w(t) = max{p, max_{[t_{k-1}, t]} (u - r)}``, and on a minus interval an
accumulated minimum, so both derivatives reduce to the accumulated-maximum
machinery of :mod:`playdiff.accmax`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .accmax import (
    accumulated_max,
    dir_derivative_on_path,
    maximizer_path,
    selection_pieces,
)
from .errors import DecompositionError, DomainError, ParameterError, StaleDecompositionError
from .intervals import IntervalSet
from .maxfun import SelectionRule, argmax_set, max_over
from .signal import TOL_EQ, PlSignal, StepLinSignal, TimeGrid, merge_nodes, restrict, sup_norm

PLUS, MINUS = 1, -1


@dataclass(frozen=True)
class PlayConfig:
    """Half-width ``r >= 0`` of the characteristic and initial stop value ``z0``."""

    r: float
    z0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ParameterError(f"r must be finite and >= 0, got {self.r}")
        if not math.isfinite(self.z0):
            raise ParameterError(f"z0 must be finite, got {self.z0}")

    def with_z0(self, z0: float) -> "PlayConfig":
        return PlayConfig(self.r, z0)


def clamp(x: float, r: float) -> float:
    """Projection ``pi_r`` onto ``[-r, r]``."""
    if r < 0:
        raise ParameterError(f"r must be >= 0, got {r}")
    return max(-r, min(r, x))


def pos_part_dd(x: float, q: float) -> float:
    """Directional derivative of ``x -> max(x, 0)`` at ``x`` in direction ``q``."""
    return q if x > 0 or (x == 0 and q > 0) else 0.0


def clamp_dd(x: float, q: float, r: float) -> float:
    """Directional derivative of ``pi_r`` at ``x`` in direction ``q``."""
    if abs(x) < r or (x == -r and q > 0) or (x == r and q < 0):
        return q
    return 0.0


def _require_positive_r(cfg: PlayConfig) -> None:
    if not cfg.r > 0:
        raise ParameterError("derivatives and decompositions need r > 0")


# --------------------------------------------------------------------------
# evaluation


def play(u: PlSignal, cfg: PlayConfig) -> tuple[PlSignal, PlSignal]:
    """Exact play output ``w`` and stop output ``z = u - w``.

    The output grid is the input grid plus the points where ``w`` starts to
    move inside a segment.
    """
    r = cfg.r
    if r == 0:
        return u, PlSignal(u.grid, np.zeros(len(u)))
    t, v = u.t, u.v
    w = kernels.play_nodes(v, r, float(v[0] - clamp(cfg.z0, r)))
    w0, v0, v1 = w[:-1], v[:-1], v[1:]
    dt = np.diff(t)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rise = (v1 - r > w0) & (v0 - r < w0)
        fall = (v1 + r < w0) & (v0 + r > w0)
        x_r = t[:-1] + (w0 + r - v0) / (v1 - v0) * dt
        x_f = t[:-1] + (w0 - r - v0) / (v1 - v0) * dt
    idx = np.nonzero(rise | fall)[0]
    if idx.size == 0:
        return PlSignal(u.grid, w), PlSignal(u.grid, v - w)
    x = np.where(rise[idx], x_r[idx], x_f[idx])
    zx = np.where(rise[idx], r, -r)
    ok = (x > t[idx]) & (x < t[idx + 1])
    idx, x, zx = idx[ok], x[ok], zx[ok]
    tt = np.concatenate((t, x))
    ww = np.concatenate((w, w[idx]))
    zz = np.concatenate((v - w, zx))
    order = np.argsort(tt, kind="stable")
    tt, ww, zz = tt[order], ww[order], zz[order]
    keep = np.concatenate(([True], np.diff(tt) > 0))
    return PlSignal(tt[keep], ww[keep]), PlSignal(tt[keep], zz[keep])


def stop(u: PlSignal, cfg: PlayConfig) -> PlSignal:
    return play(u, cfg)[1]


def psi_plus(v: PlSignal, p: float, t: float, t_star: float, r: float) -> float:
    """``max{p, max_{[t_star, t]} (v - r)}``."""
    if t < t_star:
        raise DomainError(f"need t_star <= t, got t_star={t_star}, t={t}")
    m = float(v(t)) if t == t_star else v.max_on(t_star, t)
    return max(p, m - r)


def psi_minus(v: PlSignal, p: float, t: float, t_star: float, r: float) -> float:
    """``min{p, min_{[t_star, t]} (v + r)}``."""
    if t < t_star:
        raise DomainError(f"need t_star <= t, got t_star={t_star}, t={t}")
    m = float(v(t)) if t == t_star else v.min_on(t_star, t)
    return min(p, m + r)


# --------------------------------------------------------------------------
# decomposition


@dataclass(frozen=True)
class Classification:
    i0: IntervalSet
    iplus: IntervalSet
    iminus: IntervalSet
    delta_I: float


def _mask_to_set(t: np.ndarray, mask: np.ndarray) -> IntervalSet:
    comps = []
    for i in np.nonzero(mask)[0]:
        if i + 1 < len(t) and mask[i + 1]:
            comps.append((t[i], t[i + 1]))
        else:
            comps.append((t[i], t[i]))
    return IntervalSet(comps)


def default_tol_active(r: float) -> float:
    return 1e-9 * max(1.0, r)


def classify_intervals(u: PlSignal, cfg: PlayConfig, tol_active: float | None = None) -> Classification:
    """Times where the stop sits on the upper rail, the lower rail, or neither."""
    _require_positive_r(cfg)
    tol = default_tol_active(cfg.r) if tol_active is None else tol_active
    _, z = play(u, cfg)
    iplus = _mask_to_set(z.t, z.v >= cfg.r - tol)
    iminus = _mask_to_set(z.t, z.v <= -cfg.r + tol)
    i0 = iplus.union(iminus).complement_closure(u.a, u.b)
    return Classification(i0, iplus, iminus, iplus.distance_to(iminus))


@dataclass(frozen=True)
class Decomposition:
    """Partition with plus/minus labels, valid on the sup-norm ball of radius ``delta``."""

    u: PlSignal
    cfg: PlayConfig
    partition: TimeGrid
    labels: tuple[int, ...]
    delta: float
    i0: IntervalSet
    iplus: IntervalSet
    iminus: IntervalSet
    delta_I: float
    tol_active: float
    halvings: int = 0

    @property
    def intervals(self) -> list[tuple[float, float, int]]:
        t = self.partition.nodes
        return [(float(t[k]), float(t[k + 1]), self.labels[k]) for k in range(len(self.labels))]

    def contains(self, v: PlSignal, y0: float) -> bool:
        """``(v, y0)`` lies in the open ``delta``-ball around the base point."""
        if abs(v.a - self.u.a) > TOL_EQ or abs(v.b - self.u.b) > TOL_EQ:
            return False
        return sup_norm(v - self.u) < self.delta and abs(y0 - self.cfg.z0) < self.delta

    def to_json(self) -> dict:
        inf = lambda x: None if math.isinf(x) else x  # noqa: E731
        return {
            "partition": self.partition.nodes.tolist(),
            "labels": ["plus" if s == PLUS else "minus" for s in self.labels],
            "delta": self.delta,
            "delta_I": inf(self.delta_I),
            "r": self.cfg.r,
            "z0": self.cfg.z0,
            "i0": self.i0.to_list(),
            "iplus": self.iplus.to_list(),
            "iminus": self.iminus.to_list(),
        }


def _interval_ok(z: PlSignal, lo: float, hi: float, label: int, r: float, tol: float) -> bool:
    """The stop keeps away from the rail opposite to ``label`` on ``[lo, hi]``."""
    if label == PLUS:
        return z.min_on(lo, hi) > -r + tol
    return z.max_on(lo, hi) < r - tol


def decomposition_holds(dec: Decomposition, v: PlSignal, y0: float) -> bool:
    """Check the plus/minus property of every partition interval for ``(v, y0)``."""
    _, z = play(v, dec.cfg.with_z0(y0))
    return all(_interval_ok(z, lo, hi, s, dec.cfg.r, dec.tol_active) for lo, hi, s in dec.intervals)


def _perturbations(u: PlSignal, delta: float, n: int, rng: np.random.Generator):
    """Sample ``(eta, dy)`` with ``|eta| < delta`` and ``|dy| < delta``."""
    c = 0.999 * delta
    extra = rng.uniform(u.a, u.b, size=max(8, len(u)))
    t = merge_nodes(u.t, extra, tol=1e-9)
    fixed = [np.full(len(t), c), np.full(len(t), -c), c * np.where(np.arange(len(t)) % 2, 1.0, -1.0)]
    for i in range(n):
        if i < len(fixed):
            eta = fixed[i]
            dy = c if i != 1 else -c
        else:
            eta = rng.uniform(-c, c, size=len(t))
            dy = rng.uniform(-c, c)
        yield PlSignal(t, u(t) + eta), dy


def local_partition(
    u: PlSignal,
    cfg: PlayConfig,
    tol_active: float | None = None,
    n_samples: int = 32,
    seed: int = 0,
    max_halvings: int = 20,
) -> Decomposition:
    """Partition into plus/minus intervals with a validated stability radius.

    Cut points sit at the midpoints of the gaps between consecutive rail
    contacts of opposite sign.  The radius is the smallest of a quarter of
    the rail separation, half the distance from cuts to contacts, ``r/2``
    and a quarter of the distance of the stop to the opposite rail on each
    interval (the stop is 2-Lipschitz in the data, so this keeps perturbed
    stops off that rail).  The property is checked at the base point and at
    ``n_samples`` perturbations; failures halve the radius.
    """
    _require_positive_r(cfg)
    tol = default_tol_active(cfg.r) if tol_active is None else tol_active
    cls = classify_intervals(u, cfg, tol)
    tagged = sorted([(l, r_, PLUS) for l, r_ in cls.iplus] + [(l, r_, MINUS) for l, r_ in cls.iminus])
    cuts: list[float] = []
    labels = [tagged[0][2] if tagged else PLUS]
    for prev, nxt in zip(tagged, tagged[1:]):
        if nxt[2] != prev[2]:
            cuts.append(0.5 * (prev[1] + nxt[0]))
            labels.append(nxt[2])
    partition = TimeGrid([u.a, *cuts, u.b])
    contacts = cls.iplus.union(cls.iminus)
    cut_gap = min((contacts.distance_to(IntervalSet.point(c)) for c in cuts), default=math.inf)
    _, z = play(u, cfg)
    t = partition.nodes
    margin = math.inf
    for k, s in enumerate(labels):
        if s == PLUS:
            margin = min(margin, z.min_on(t[k], t[k + 1]) + cfg.r)
        else:
            margin = min(margin, cfg.r - z.max_on(t[k], t[k + 1]))
    delta = min(cls.delta_I / 4.0, cut_gap / 2.0, cfg.r / 2.0, margin / 4.0)
    if not delta > 0:
        raise DecompositionError("rail contacts too close to separate; no positive radius")
    rng = np.random.default_rng(seed)
    for halving in range(max_halvings + 1):
        dec = Decomposition(u, cfg, partition, tuple(labels), delta, cls.i0, cls.iplus, cls.iminus,
                            cls.delta_I, tol, halving)
        ok = decomposition_holds(dec, u, cfg.z0) and all(
            decomposition_holds(dec, v, cfg.z0 + dy) for v, dy in _perturbations(u, delta, n_samples, rng)
        )
        if ok:
            return dec
        delta /= 2.0
    raise DecompositionError(f"decomposition not stable after {max_halvings} halvings of delta")


def memory_trace(v: PlSignal, y0: float, dec: Decomposition, check: bool = True) -> np.ndarray:
    """Play values ``w_k`` at the partition nodes, via the interval recursion."""
    if check and not dec.contains(v, y0):
        raise StaleDecompositionError("(v, y0) lies outside the decomposition's radius")
    r = dec.cfg.r
    w = [float(v(v.a)) - clamp(y0, r)]
    for lo, hi, s in dec.intervals:
        psi = psi_plus if s == PLUS else psi_minus
        w.append(psi(v, w[-1], hi, lo, r))
    return np.array(w)


def decomposition_for(v: PlSignal, y0: float, cfg: PlayConfig, dec: Decomposition | None = None, **kw) -> Decomposition:
    """``dec`` if it still covers ``(v, y0)``, otherwise a fresh decomposition at ``(v, y0)``."""
    if dec is not None and dec.contains(v, y0):
        return dec
    return local_partition(v, cfg.with_z0(y0), **kw)


# --------------------------------------------------------------------------
# Newton derivative


@dataclass(frozen=True)
class LinearForm:
    """``(h, q) -> sum_i w_i h(s_i) + c q``."""

    points: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    qcoef: float = 0.0

    def __call__(self, h: PlSignal, q: float) -> float:
        val = float(np.dot(self.weights, h(np.asarray(self.points)))) if self.points else 0.0
        return val + self.qcoef * q


@dataclass(frozen=True)
class ActionPiece:
    """On ``[lo, hi]`` the output is ``h(t)`` (``form is None``) or the constant ``form(h, q)``."""

    lo: float
    hi: float
    form: LinearForm | None


def _interp_weights(grid: np.ndarray, x: float) -> list[tuple[int, float]]:
    j = int(np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2))
    th = (x - grid[j]) / (grid[j + 1] - grid[j])
    th = min(max(th, 0.0), 1.0)
    return [(j, 1.0 - th), (j + 1, th)]


@dataclass(frozen=True)
class DerivativeAction:
    """A linear map ``(h, q) -> StepLinSignal`` attached to a base point ``(v, y0)``.

    For the stop flavour the output is ``h`` minus the play output.
    """

    v: PlSignal
    y0: float
    pieces: tuple[ActionPiece, ...]
    flavor: str = "play"
    trace: np.ndarray = field(default=None, repr=False)

    @property
    def knots(self) -> np.ndarray:
        return np.array([p.lo for p in self.pieces] + [self.pieces[-1].hi])

    def apply(self, h: PlSignal, q: float = 0.0) -> StepLinSignal:
        span = TOL_EQ * max(1.0, abs(self.v.a), abs(self.v.b))
        if abs(h.a - self.v.a) > span or abs(h.b - self.v.b) > span:
            raise DomainError("direction lives on a different interval")
        knots, start, end = [], [], []
        for p in self.pieces:
            if p.form is None:
                inner = h.t[(h.t > p.lo) & (h.t < p.hi)]
                k = np.concatenate(([p.lo], inner, [p.hi]))
                vals = h(k)
                knots.extend(k[:-1].tolist())
                start.extend(vals[:-1].tolist())
                end.extend(vals[1:].tolist())
            else:
                c = p.form(h, q)
                knots.append(p.lo)
                start.append(c)
                end.append(c)
        knots.append(self.pieces[-1].hi)
        out = StepLinSignal(knots, start, end)
        if self.flavor == "stop":
            return StepLinSignal.from_pl(h) - out
        return out

    __call__ = apply

    def matrix(self, grid) -> sp.csr_matrix:
        """Sparse matrix of the action on node coordinates of ``grid``.

        Row ``j`` gives the left limit of the output at node ``j`` (the right
        limit at the first node); the last column multiplies ``q``.
        """
        g = grid.nodes if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
        n = len(g)
        lows = np.array([p.lo for p in self.pieces])
        rows, cols, vals = [], [], []
        for j, x in enumerate(g):
            i = 0 if j == 0 else int(np.clip(np.searchsorted(lows, x, side="left") - 1, 0, len(lows) - 1))
            p = self.pieces[i]
            if p.form is None:
                rows.append(j), cols.append(j), vals.append(1.0)
                continue
            for s, wt in zip(p.form.points, p.form.weights):
                for col, c in _interp_weights(g, s):
                    if c != 0.0:
                        rows.append(j), cols.append(col), vals.append(wt * c)
            if p.form.qcoef != 0.0:
                rows.append(j), cols.append(n), vals.append(p.form.qcoef)
        M = sp.csr_matrix((vals, (rows, cols)), shape=(n, n + 1))
        if self.flavor == "stop":
            M = sp.hstack([sp.identity(n), sp.csr_matrix((n, 1))]).tocsr() - M
        return M


def _first_exceed(x: PlSignal, level: float) -> float | None:
    """First time a nondecreasing-in-record signal strictly exceeds ``level``."""
    above = np.nonzero(x.v > level)[0]
    if above.size == 0:
        return None
    j = int(above[0])
    if j == 0:
        return x.a
    t0, t1, v0, v1 = x.t[j - 1], x.t[j], x.v[j - 1], x.v[j]
    return float(min(max(t0 + (level - v0) / (v1 - v0) * (t1 - t0), t0), t1))


def play_newton(
    v: PlSignal,
    y0: float,
    dec: Decomposition,
    rule=SelectionRule.RIGHTMOST,
    flavor: str = "play",
) -> DerivativeAction:
    """Newton derivative of the play (or stop) at ``(v, y0)`` as a ``DerivativeAction``.

    With ``p = w_{k-1}(v, y0)`` and incoming memory derivative ``qhat``, the
    output on a plus interval ``[t_{k-1}, t_k]`` is ``qhat`` until ``v - r``
    first exceeds ``p`` and ``<mu_t, h>`` afterwards, with ``mu_t``
    supported on the maximisers of ``v`` over ``[t_{k-1}, t]``.  Minus
    intervals use the same construction on ``-v``.  Initially
    ``qhat = h(a) - S(y0) q`` with ``S(y0) = 1`` iff ``|y0| < r``.
    """
    _require_positive_r(dec.cfg)
    rule = SelectionRule.parse(rule)
    r = dec.cfg.r
    w = memory_trace(v, y0, dec)
    qhat = LinearForm((v.a,), (1.0,), -1.0 if abs(y0) < r else 0.0)
    pieces: list[ActionPiece] = []
    for k, (lo, hi, s) in enumerate(dec.intervals):
        vv = restrict(v, lo, hi)
        p = w[k]
        if s == MINUS:
            vv, p = -vv, -p
        tg = _first_exceed(PlSignal(vv.grid, vv.v - r - p), 0.0)
        if tg is None or tg >= hi:
            pieces.append(ActionPiece(lo, hi, qhat))
            continue
        if tg > lo:
            pieces.append(ActionPiece(lo, tg, qhat))
        sel = selection_pieces(maximizer_path(vv), rule, lo=tg)
        for sp_ in sel:
            form = None if sp_.points is None else LinearForm(sp_.points, sp_.weights, 0.0)
            pieces.append(ActionPiece(sp_.lo, sp_.hi, form))
        last = pieces[-1]
        qhat = LinearForm((hi,), (1.0,), 0.0) if last.form is None else last.form
    return DerivativeAction(v, y0, tuple(pieces), flavor, w)


def play_newton_apply(v, y0, h, q, dec, rule=SelectionRule.RIGHTMOST) -> StepLinSignal:
    return play_newton(v, y0, dec, rule).apply(h, q)


def stop_newton_apply(v, y0, h, q, dec, rule=SelectionRule.RIGHTMOST) -> StepLinSignal:
    return play_newton(v, y0, dec, rule, flavor="stop").apply(h, q)


# --------------------------------------------------------------------------
# Bouligand derivative


def _first_reach(x: PlSignal, level: float) -> float | None:
    """First time the nondecreasing signal ``x`` reaches ``level``."""
    above = np.nonzero(x.v >= level)[0]
    if above.size == 0:
        return None
    j = int(above[0])
    if j == 0:
        return x.a
    t0, t1, v0, v1 = x.t[j - 1], x.t[j], x.v[j - 1], x.v[j]
    return float(min(max(t0 + (level - v0) / (v1 - v0) * (t1 - t0), t0), t1))


def _accmax_branch(uu: PlSignal, hh: PlSignal, p: float, qk: float, r: float) -> tuple[StepLinSignal, float]:
    """Directional derivative of ``t -> max{p, max_{[lo,t]} (uu - r)}`` in direction ``(hh, qk)``.

    Returns the output on the interval and its value at the right end.
    """
    lo, hi = uu.a, uu.b
    tol = TOL_EQ * max(1.0, r, abs(p), float(np.max(np.abs(uu.v))))
    rec = accumulated_max(uu)
    x = PlSignal(rec.grid, rec.v - r - p)
    G = dir_derivative_on_path(maximizer_path(uu), hh)
    t1 = _first_reach(x, -tol)
    t2 = _first_exceed(x, tol)
    t1 = hi if t1 is None else t1
    t2 = hi if t2 is None else t2
    # drop slivers shorter than the node-merging tolerance
    tiny = 4 * TOL_EQ * max(1.0, abs(lo), abs(hi))
    t1 = lo if t1 - lo <= tiny else (hi if hi - t1 <= tiny else t1)
    t2 = t1 if t2 - t1 <= tiny else (hi if hi - t2 <= tiny else t2)
    parts = []
    if t1 > lo:
        parts.append(StepLinSignal.constant(lo, t1, qk))
    if t2 > t1:
        parts.append(G.restrict(t1, t2).maximum(qk))
    if hi > t2:
        parts.append(G.restrict(t2, hi))
    out = StepLinSignal.concat(parts)
    xe = float(x.v[-1])
    y = max_over(hh, argmax_set(uu)) - qk
    if xe > tol:
        end = qk + y
    elif xe >= -tol:
        end = qk + max(y, 0.0)
    else:
        end = qk
    return out, end


def play_dir_derivative(
    u: PlSignal,
    z0: float,
    h: PlSignal,
    q: float,
    dec: Decomposition,
    flavor: str = "play",
) -> StepLinSignal:
    """Directional derivative of the play (or stop) at ``(u, z0)`` in direction ``(h, q)``.

    Starts from ``w_0' = h(a) - pi_r'(z0; q)`` and propagates the memory
    derivative through the partition.  On a plus interval the output is
    ``qk + beta'(x(t); max_{M_{k,t}} h - qk)`` with
    ``x(t) = max_{[t_{k-1}, t]} u - r - w_{k-1}``; minus intervals are the
    mirror image under ``u -> -u``.
    """
    _require_positive_r(dec.cfg)
    span = TOL_EQ * max(1.0, abs(u.a), abs(u.b))
    if abs(h.a - u.a) > span or abs(h.b - u.b) > span:
        raise DomainError("direction lives on a different interval")
    r = dec.cfg.r
    w = memory_trace(u, z0, dec)
    dw = float(h(h.a)) - clamp_dd(z0, q, r)
    parts = []
    for k, (lo, hi, s) in enumerate(dec.intervals):
        uu, hh = restrict(u, lo, hi), restrict(h, lo, hi)
        if s == PLUS:
            out, dw = _accmax_branch(uu, hh, w[k], dw, r)
        else:
            out, end = _accmax_branch(-uu, -hh, -w[k], -dw, r)
            out, dw = -out, -end
        parts.append(out)
    out = StepLinSignal.concat(parts)
    if flavor == "stop":
        return StepLinSignal.from_pl(h) - out
    return out


def stop_dir_derivative(u, z0, h, q, dec) -> StepLinSignal:
    return play_dir_derivative(u, z0, h, q, dec, flavor="stop")
