"""Finite unions of closed intervals (points allowed)."""
from __future__ import annotations

from typing import Iterable, Sequence

from .errors import DomainError
from .signal import TOL_EQ, PlSignal, restrict


class IntervalSet:
    """Sorted, disjoint closed intervals ``[l_i, r_i]`` with ``l_i <= r_i``.

    Components closer than ``tol`` are merged on construction.
    """

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Sequence[float]] = (), tol: float = 0.0):
        comps = sorted((float(l), float(r)) for l, r in components)
        out: list[tuple[float, float]] = []
        for l, r in comps:
            if r < l:
                raise DomainError(f"interval [{l}, {r}] has r < l")
            if out and l <= out[-1][1] + tol:
                out[-1] = (out[-1][0], max(out[-1][1], r))
            else:
                out.append((l, r))
        self.components = tuple(out)

    @classmethod
    def point(cls, x: float) -> "IntervalSet":
        return cls([(x, x)])

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    def __iter__(self):
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __bool__(self) -> bool:
        return bool(self.components)

    def __repr__(self) -> str:
        parts = [f"{{{l:g}}}" if l == r else f"[{l:g}, {r:g}]" for l, r in self.components]
        return "IntervalSet(" + " U ".join(parts) + ")" if parts else "IntervalSet(empty)"

    @property
    def min(self) -> float:
        if not self.components:
            raise DomainError("empty interval set has no minimum")
        return self.components[0][0]

    @property
    def max(self) -> float:
        if not self.components:
            raise DomainError("empty interval set has no maximum")
        return self.components[-1][1]

    @property
    def measure(self) -> float:
        return float(sum(r - l for l, r in self.components))

    @property
    def left_endpoints(self) -> list[float]:
        return [l for l, _ in self.components]

    def contains(self, x: float, tol: float = TOL_EQ) -> bool:
        return any(l - tol <= x <= r + tol for l, r in self.components)

    def union(self, other: "IntervalSet", tol: float = 0.0) -> "IntervalSet":
        return IntervalSet(self.components + other.components, tol=tol)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        A, B = self.components, other.components
        while i < len(A) and j < len(B):
            l = max(A[i][0], B[j][0])
            r = min(A[i][1], B[j][1])
            if l <= r:
                out.append((l, r))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        return self.intersect(IntervalSet([(lo, hi)]))

    def subset_of(self, other: "IntervalSet", tol: float = TOL_EQ) -> bool:
        """Closed inclusion with slack ``tol``."""
        for l, r in self.components:
            if not any(L - tol <= l and r <= R + tol for L, R in other.components):
                return False
        return True

    def open_neighbourhood(self, eps: float) -> list[tuple[float, float]]:
        """Components of the open set ``self + (-eps, eps)`` as open intervals."""
        out: list[tuple[float, float]] = []
        for l, r in self.components:
            lo, hi = l - eps, r + eps
            # open intervals that merely touch do not merge
            if out and lo < out[-1][1]:
                out[-1] = (out[-1][0], max(out[-1][1], hi))
            else:
                out.append((lo, hi))
        return out

    def within_neighbourhood(self, other: "IntervalSet", eps: float) -> bool:
        """``self`` is contained in ``other + B_eps`` with ``B_eps = (-eps, eps)`` open."""
        nb = other.open_neighbourhood(eps)
        for l, r in self.components:
            if not any(lo < l and r < hi for lo, hi in nb):
                return False
        return True

    def distance_to(self, other: "IntervalSet") -> float:
        """``min |x - y|`` over ``x`` in self, ``y`` in other (``inf`` if either is empty)."""
        if not self.components or not other.components:
            return float("inf")
        best = float("inf")
        for l, r in self.components:
            for L, R in other.components:
                if r < L:
                    d = L - r
                elif R < l:
                    d = l - R
                else:
                    d = 0.0
                best = min(best, d)
        return best

    def complement_closure(self, a: float, b: float) -> "IntervalSet":
        """Closure of ``[a, b]`` minus this set."""
        out = []
        cur = a
        for l, r in self.components:
            if l > cur:
                out.append((cur, l))
            cur = max(cur, r)
        if cur < b:
            out.append((cur, b))
        return IntervalSet(out)

    def equals(self, other: "IntervalSet", tol: float = TOL_EQ) -> bool:
        if len(self) != len(other):
            return False
        return all(
            abs(l - L) <= tol and abs(r - R) <= tol
            for (l, r), (L, R) in zip(self.components, other.components)
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def to_list(self) -> list[list[float]]:
        return [[l, r] for l, r in self.components]


def superlevel_set(
    sig: PlSignal,
    level: float,
    lo: float | None = None,
    hi: float | None = None,
    tol: float = TOL_EQ,
) -> IntervalSet:
    """``{t in [lo, hi] : sig(t) >= level}`` for a piecewise-linear signal.

    Node values within ``tol * max(1, |level|)`` of ``level`` count as on the
    level; crossing points inside segments are solved exactly.
    """
    if lo is not None or hi is not None:
        lo = sig.a if lo is None else lo
        hi = sig.b if hi is None else hi
        if hi < lo:
            raise DomainError("empty window")
        if hi == lo:
            return IntervalSet.point(lo) if sig(lo) >= level - tol * max(1.0, abs(level)) else IntervalSet()
        sig = restrict(sig, lo, hi)
    t, v = sig.t, sig.v
    inside = v >= level - tol * max(1.0, abs(level))
    pieces: list[tuple[float, float]] = []
    for i in range(len(t) - 1):
        a_in, b_in = inside[i], inside[i + 1]
        t0, t1, v0, v1 = t[i], t[i + 1], v[i], v[i + 1]
        if a_in and b_in:
            pieces.append((t0, t1))
        elif a_in:
            x = t0 + (t1 - t0) * (v0 - level) / (v0 - v1) if v0 > v1 else t0
            pieces.append((t0, min(max(x, t0), t1)))
        elif b_in:
            x = t0 + (t1 - t0) * (level - v0) / (v1 - v0) if v1 > v0 else t1
            pieces.append((min(max(x, t0), t1), t1))
    span = TOL_EQ * max(1.0, abs(t[0]), abs(t[-1]))
    return IntervalSet(pieces, tol=span)


def sublevel_set(sig: PlSignal, level: float, lo=None, hi=None, tol: float = TOL_EQ) -> IntervalSet:
    """``{t : sig(t) <= level}``."""
    return superlevel_set(PlSignal(sig.grid, -sig.values), -level, lo, hi, tol)
