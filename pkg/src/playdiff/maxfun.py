"""The maximum functional ``phi(u) = max u`` and its derivatives."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .intervals import IntervalSet, superlevel_set
from .signal import TOL_EQ, PlSignal, add, w1p_norm


class SelectionRule(enum.Enum):
    """How a single measure is picked from the set of admissible ones."""

    RIGHTMOST = "rightmost"
    LEFTMOST = "leftmost"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, value) -> "SelectionRule":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key == "uniform-atoms":
            key = "uniform"
        try:
            return cls(key)
        except ValueError:
            raise ParameterError(f"unknown selection rule {value!r}") from None


ALL_RULES = tuple(SelectionRule)


@dataclass(frozen=True)
class DiracMeasure:
    """Probability measure ``sum_i w_i delta_{s_i}``."""

    locations: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.locations) != len(self.weights) or not self.locations:
            raise DomainError("a Dirac measure needs matching, nonempty atoms")
        if any(w <= 0 for w in self.weights):
            raise DomainError("atom weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-12 * len(self.weights):
            raise DomainError("atom weights must sum to 1")

    @classmethod
    def dirac(cls, s: float) -> "DiracMeasure":
        return cls((float(s),), (1.0,))

    @classmethod
    def uniform(cls, points) -> "DiracMeasure":
        pts = tuple(float(p) for p in points)
        return cls(pts, tuple(1.0 / len(pts) for _ in pts))

    def apply(self, h: PlSignal) -> float:
        return apply_measure(self, h)


def select_measure(S: IntervalSet, rule=SelectionRule.RIGHTMOST) -> DiracMeasure:
    """A measure supported in ``S`` chosen by ``rule``.

    ``uniform`` puts equal mass on the left end point of every component.
    """
    rule = SelectionRule.parse(rule)
    if not S:
        raise DomainError("cannot select a measure on an empty set")
    if rule is SelectionRule.RIGHTMOST:
        return DiracMeasure.dirac(S.max)
    if rule is SelectionRule.LEFTMOST:
        return DiracMeasure.dirac(S.min)
    return DiracMeasure.uniform(S.left_endpoints)


def apply_measure(mu: DiracMeasure, h: PlSignal) -> float:
    span = TOL_EQ * max(1.0, abs(h.a), abs(h.b))
    locs = np.asarray(mu.locations)
    if np.any(locs < h.a - span) or np.any(locs > h.b + span):
        raise DomainError("measure atom outside the domain of h")
    return float(np.dot(mu.weights, h(locs)))


def max_value(u: PlSignal) -> float:
    return float(np.max(u.v))


def argmax_set(u: PlSignal, tol: float = TOL_EQ) -> IntervalSet:
    """Exact ``M(u) = {t : u(t) = max u}``."""
    return superlevel_set(u, max_value(u), tol=tol)


def near_argmax_set(u: PlSignal, delta: float, tol: float = TOL_EQ) -> IntervalSet:
    """``M_delta(u) = {t : u(t) >= max u - delta}``."""
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    return superlevel_set(u, max_value(u) - delta, tol=tol)


def max_over(h: PlSignal, S: IntervalSet) -> float:
    """Exact ``max_{s in S} h(s)``."""
    if not S:
        raise DomainError("maximum over an empty set")
    return max(h.max_on(l, r) if r > l else float(h(l)) for l, r in S)


def min_over(h: PlSignal, S: IntervalSet) -> float:
    if not S:
        raise DomainError("minimum over an empty set")
    return min(h.min_on(l, r) if r > l else float(h(l)) for l, r in S)


def _check_domain(u: PlSignal, h: PlSignal) -> None:
    span = TOL_EQ * max(1.0, abs(u.a), abs(u.b))
    if abs(u.a - h.a) > span or abs(u.b - h.b) > span:
        raise DomainError(f"domains differ: [{u.a}, {u.b}] vs [{h.a}, {h.b}]")


def directional_derivative(u: PlSignal, h: PlSignal) -> float:
    """``phi'(u; h) = max_{M(u)} h``."""
    _check_domain(u, h)
    return max_over(h, argmax_set(u))


def newton_selection(u: PlSignal, rule=SelectionRule.RIGHTMOST) -> DiracMeasure:
    """An element of the Newton derivative ``Phi(u)`` chosen by ``rule``."""
    return select_measure(argmax_set(u), rule)


def newton_remainder(u: PlSignal, h: PlSignal, rule=SelectionRule.RIGHTMOST) -> float:
    """``|phi(u + h) - phi(u) - <mu, h>|`` with ``mu`` selected at ``u + h``."""
    _check_domain(u, h)
    uh = add(u, h)
    return abs(max_value(uh) - max_value(u) - apply_measure(newton_selection(uh, rule), h))


def bouligand_remainder(u: PlSignal, h: PlSignal) -> float:
    """``|phi(u + h) - phi(u) - phi'(u; h)|``."""
    return abs(max_value(add(u, h)) - max_value(u) - directional_derivative(u, h))


def counterexample_direction(lam: float) -> PlSignal:
    """``h_lam``: 0 at 0, rising linearly to ``2 lam`` at ``lam``, then constant."""
    return PlSignal([0.0, lam, 1.0], [0.0, 2.0 * lam, 2.0 * lam])


def counterexample_w11(lam: float) -> tuple[float, float]:
    """Remainder ratios of ``phi`` at ``u(s) = 1 - s`` along ``h_lam`` in the W^{1,1} norm.

    Returns ``(newton_ratio, bouligand_ratio)``; both are exactly 1/2 for
    every ``lam``, so neither remainder is ``o(||h||_{W^{1,1}})``.
    """
    if not 0 < lam < 1:
        raise ParameterError(f"lambda must lie in (0, 1), got {lam}")
    h = counterexample_direction(lam)
    u = PlSignal(h.t, 1.0 - h.t)
    norm = w1p_norm(h, 1.0, allow_w11=True)
    return newton_remainder(u, h) / norm, bouligand_remainder(u, h) / norm
