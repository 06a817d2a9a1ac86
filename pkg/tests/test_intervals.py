import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import ABS, pl_signals
from playdiff.intervals import IntervalSet, sublevel_set, superlevel_set
from playdiff.signal import PlSignal


def test_components_are_sorted_and_merged():
    S = IntervalSet([(2.0, 3.0), (0.0, 1.0), (0.5, 1.5)])
    assert S.to_list() == [[0.0, 1.5], [2.0, 3.0]]
    assert S.measure == pytest.approx(2.5)
    assert S.min == 0.0 and S.max == 3.0
    assert S.left_endpoints == [0.0, 2.0]


def test_empty_and_point():
    E = IntervalSet.empty()
    assert not E and E.measure == 0.0
    P = IntervalSet.point(0.3)
    assert P.contains(0.3) and P.measure == 0.0
    with pytest.raises(Exception):
        E.min


def test_set_operations():
    A = IntervalSet([(0.0, 1.0), (2.0, 3.0)])
    B = IntervalSet([(0.5, 2.5)])
    assert A.intersect(B).to_list() == [[0.5, 1.0], [2.0, 2.5]]
    assert A.union(B).to_list() == [[0.0, 3.0]]
    assert A.clip(0.25, 2.25).to_list() == [[0.25, 1.0], [2.0, 2.25]]
    assert A.intersect(B).subset_of(A)
    assert not A.subset_of(B)
    assert A.complement_closure(0.0, 3.0).to_list() == [[1.0, 2.0]]


def test_open_neighbourhood_inclusion_is_strict():
    fixed = IntervalSet.point(0.0)
    assert IntervalSet([(0.0, 0.09)]).within_neighbourhood(fixed, 0.1)
    assert not IntervalSet([(0.0, 0.1)]).within_neighbourhood(fixed, 0.1)
    assert IntervalSet([(1.0, 1.0)]).distance_to(fixed) == pytest.approx(1.0)


def test_superlevel_set_of_abs():
    assert superlevel_set(ABS, 1.0).to_list() == [[0.0, 0.0], [2.0, 2.0]]
    S = superlevel_set(ABS, 0.75)
    assert S.equals(IntervalSet([(0.0, 0.25), (1.75, 2.0)]), tol=1e-14)
    assert superlevel_set(ABS, 0.75, hi=1.9).equals(IntervalSet([(0.0, 0.25), (1.75, 1.9)]), tol=1e-14)
    assert sublevel_set(ABS, 0.5).equals(IntervalSet([(0.5, 1.5)]), tol=1e-14)


def test_superlevel_set_includes_plateaus():
    u = PlSignal([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 1.0, 0.0])
    assert superlevel_set(u, 1.0).to_list() == [[1.0, 2.0]]


@given(pl_signals(), st.floats(-5.0, 5.0))
def test_superlevel_set_membership(sig, level):
    S = superlevel_set(sig, level)
    t = np.linspace(sig.a, sig.b, 401)
    v = sig(t)
    for ti, vi in zip(t, v):
        if vi >= level + 1e-9:
            assert S.contains(ti, tol=1e-9)
        elif vi < level - 1e-9:
            assert not S.contains(ti, tol=0.0)
