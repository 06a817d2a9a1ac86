import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import TRIANGLE, WAVE, base_points, pl_pairs, pl_signals
from playdiff import verify
from playdiff.errors import ParameterError, StaleDecompositionError
from playdiff.intervals import IntervalSet
from playdiff.maxfun import ALL_RULES
from playdiff.playstop import (
    PLUS,
    PlayConfig,
    clamp,
    clamp_dd,
    classify_intervals,
    decomposition_for,
    decomposition_holds,
    local_partition,
    memory_trace,
    play,
    play_dir_derivative,
    play_newton,
    play_newton_apply,
    pos_part_dd,
    psi_minus,
    psi_plus,
    stop,
    stop_dir_derivative,
    stop_newton_apply,
)
from playdiff.signal import PlSignal, StepLinSignal, lq_norm, random_pl, sup_norm

CFG = PlayConfig(1.0, 0.0)
# rises onto the upper rail exactly at t = 1, then falls back
TOUCH = PlSignal([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])


def _nodes_close(a: PlSignal, b: PlSignal, tol):
    t = np.union1d(a.t, b.t)
    return float(np.max(np.abs(a(t) - b(t)))) <= tol


# --- scalar helpers ------------------------------------------------------------


def test_clamp_examples():
    assert clamp(0.5, 1.0) == 0.5
    assert clamp(3.0, 1.0) == 1.0
    assert clamp(-7.0, 0.0) == 0.0
    with pytest.raises(ParameterError):
        clamp(0.0, -1.0)


def test_one_sided_derivatives_of_kinks():
    assert pos_part_dd(1.0, -3.0) == -3.0
    assert pos_part_dd(0.0, 2.0) == 2.0
    assert pos_part_dd(0.0, -2.0) == 0.0
    assert pos_part_dd(-1.0, 5.0) == 0.0
    assert clamp_dd(1.0, -0.5, 1.0) == -0.5
    assert clamp_dd(1.0, 0.5, 1.0) == 0.0
    assert clamp_dd(-1.0, 0.5, 1.0) == 0.5
    assert clamp_dd(0.2, 0.5, 1.0) == 0.5
    assert clamp_dd(3.0, -0.5, 1.0) == 0.0


@given(st.floats(-3, 3), st.floats(-1, 1), st.floats(0.1, 2))
def test_clamp_dd_matches_difference_quotient(x, q, r):
    # away from the kinks the quotient is exact for small steps
    if min(abs(abs(x) - r), abs(x)) < 1e-3:
        return
    lam = 1e-6
    fd = (clamp(x + lam * q, r) - clamp(x, r)) / lam
    assert clamp_dd(x, q, r) == pytest.approx(fd, abs=1e-6)


# --- play and stop ---------------------------------------------------------------


def test_play_triangle_example():
    w, z = play(TRIANGLE, CFG)
    expected = PlSignal([0.0, 1.0, 2.0, 3.0], [0.0, 0.0, 1.0, 1.0])
    assert _nodes_close(w, expected, 1e-15)
    wo = verify.oracle_play_projection(TRIANGLE, CFG, refinement=10_000)[0]
    assert np.max(np.abs(w(wo.t) - wo.v)) <= 1e-12
    assert np.allclose(z(np.array([0.0, 1.0, 2.0, 3.0])), [0.0, 1.0, 1.0, 0.0])


def test_play_zero_width():
    w, z = play(WAVE, PlayConfig(0.0, 0.3))
    assert w is WAVE
    assert np.all(z.v == 0.0)
    assert np.all(stop(WAVE, PlayConfig(0.0)).v == 0.0)


def test_play_constant_input():
    u = PlSignal.constant(0.0, 2.0, 1.5)
    for z0 in (-3.0, 0.2, 3.0):
        w, z = play(u, PlayConfig(1.0, z0))
        assert np.allclose(w.v, 1.5 - clamp(z0, 1.0))
        assert np.allclose(z.v, clamp(z0, 1.0))


def test_stop_saturates_on_rising_input():
    u = PlSignal([0.0, 1.0, 2.0], [0.0, 0.8, 2.5])
    z = stop(u, PlayConfig(1.0, 0.0))
    assert z(2.0) == pytest.approx(1.0)
    zo = verify.oracle_play_projection(u, PlayConfig(1.0, 0.0), refinement=50)[1]
    assert np.max(np.abs(z(zo.t) - zo.v)) <= 1e-12


def test_play_rejects_negative_width():
    with pytest.raises(ParameterError):
        PlayConfig(-1.0)


@given(pl_signals(max_nodes=12), st.floats(0.05, 3.0), st.floats(-4.0, 4.0), st.integers(1, 5))
def test_play_matches_oracle(u, r, z0, refinement):
    cfg = PlayConfig(r, z0)
    w = play(u, cfg)[0]
    wo = verify.oracle_play_projection(u, cfg, refinement)[0]
    assert np.max(np.abs(w(wo.t) - wo.v)) <= 1e-10


@given(pl_signals(max_nodes=12), st.floats(0.05, 3.0), st.floats(-4.0, 4.0))
def test_rails_and_complementarity(u, r, z0):
    w, z = play(u, PlayConfig(r, z0))
    assert np.max(np.abs(z.v)) <= r + 1e-12
    dw = np.diff(w.v)
    for i in np.flatnonzero(dw):
        assert z.v[i] == pytest.approx(r * np.sign(dw[i]), abs=1e-10)
        assert z.v[i + 1] == pytest.approx(r * np.sign(dw[i]), abs=1e-10)


@given(pl_pairs(), st.floats(0.05, 2.0), st.floats(-2.0, 2.0))
def test_lipschitz_for_equal_initial_values(pair, r, z0):
    u, v = pair
    cfg = PlayConfig(r, z0)
    assert sup_norm(play(u, cfg)[0] - play(v, cfg)[0]) <= sup_norm(u - v) + 1e-12


@given(pl_pairs(), st.floats(0.05, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_lipschitz_in_initial_play_state(pair, r, z0, y0):
    u, v = pair
    wu, wv = play(u, PlayConfig(r, z0))[0], play(v, PlayConfig(r, y0))[0]
    bound = max(sup_norm(u - v), abs(wu.v[0] - wv.v[0]))
    assert sup_norm(wu - wv) <= bound + 1e-12


def test_lipschitz_with_stop_initial_values_can_fail():
    # both signals are constant, so the play keeps its initial state
    u, v = PlSignal.constant(0.0, 1.0, 1.0), PlSignal.constant(0.0, 1.0, 0.0)
    wu, wv = play(u, PlayConfig(1.0, -0.5))[0], play(v, PlayConfig(1.0, 0.5))[0]
    assert sup_norm(wu - wv) == pytest.approx(2.0)
    assert max(sup_norm(u - v), 1.0) == 1.0


@given(pl_signals(max_nodes=10), st.floats(0.05, 2.0), st.floats(-2.0, 2.0))
def test_rate_independence(u, r, z0):
    # increasing piecewise-linear time change of [0, 1] onto itself
    phi = PlSignal([0.0, 0.3, 1.0], [0.0, 0.7, 1.0])
    inv = PlSignal(phi.v, phi.t)
    t_new = np.union1d(inv(u.t), phi.t)
    u_phi = PlSignal(t_new, u(phi(t_new)))
    cfg = PlayConfig(r, z0)
    w = play(u, cfg)[0]
    w_phi = play(u_phi, cfg)[0]
    assert np.max(np.abs(w_phi(t_new) - w(phi(t_new)))) <= 1e-10


# --- classification and decomposition ------------------------------------------


def test_classify_examples():
    c = classify_intervals(PlSignal.constant(0.0, 1.0, 2.0), PlayConfig(1.0, 0.5))
    assert not c.iplus and not c.iminus
    assert c.i0.to_list() == [[0.0, 1.0]] and c.delta_I == np.inf

    c = classify_intervals(TRIANGLE, CFG)
    assert c.iplus.equals(IntervalSet([(1.0, 2.0)]), tol=1e-12)
    assert not c.iminus

    falling = PlSignal([0.0, 1.0, 2.0], [0.0, -0.5, -1.2])
    c = classify_intervals(falling, PlayConfig(1.0, 1.0))
    assert c.iplus.to_list() == [[0.0, 0.0]]


def test_classify_rejects_zero_width():
    with pytest.raises(ParameterError):
        classify_intervals(TRIANGLE, PlayConfig(0.0))
    with pytest.raises(ParameterError):
        local_partition(TRIANGLE, PlayConfig(0.0))


def test_local_partition_examples():
    dec = local_partition(PlSignal([0.0, 1.0], [0.0, 3.0]), CFG)
    assert [s for _, _, s in dec.intervals] == [PLUS]
    dec = local_partition(PlSignal.constant(0.0, 1.0, 0.3), PlayConfig(1.0, 0.2))
    assert len(dec.intervals) == 1

    dec = local_partition(WAVE, CFG)
    labels = [s for _, _, s in dec.intervals]
    assert len(labels) >= 2
    assert all(a != b for a, b in zip(labels, labels[1:]))
    assert decomposition_holds(dec, WAVE, 0.0)
    z = stop(WAVE, CFG)
    for lo, hi, s in dec.intervals:
        t = np.linspace(lo, hi, 201)
        if s == PLUS:
            assert np.all(z(t) > -1.0 + 1e-9)
        else:
            assert np.all(z(t) < 1.0 - 1e-9)


def test_decomposition_json():
    doc = local_partition(WAVE, CFG).to_json()
    assert doc["labels"][0] in ("plus", "minus")
    assert len(doc["partition"]) == len(doc["labels"]) + 1
    assert doc["delta"] > 0
    assert local_partition(PlSignal.constant(0.0, 1.0, 0.0), CFG).to_json()["delta_I"] is None


@pytest.mark.parametrize("k", range(6))
def test_decomposition_valid_for_random_perturbations(k):
    u, cfg = base_points(6, seed=5)[k]
    dec = local_partition(u, cfg)
    rng = np.random.default_rng(k)
    c = 0.999 * dec.delta
    for _ in range(20):
        v = PlSignal(u.t, u.v + rng.uniform(-c, c, size=len(u)))
        y0 = cfg.z0 + rng.uniform(-c, c)
        assert dec.contains(v, y0)
        assert decomposition_holds(dec, v, y0)


def test_decomposition_for_reuses_or_rebuilds():
    dec = local_partition(WAVE, CFG)
    near = WAVE + 0.5 * dec.delta
    assert decomposition_for(near, 0.0, CFG, dec) is dec
    far = WAVE + 3 * dec.delta + 0.5
    assert decomposition_for(far, 0.0, CFG, dec) is not dec


# --- psi and memory trace -------------------------------------------------------


def test_psi_examples():
    assert psi_plus(TRIANGLE, 5.0, 2.0, 0.0, 1.0) == 5.0
    assert psi_plus(TRIANGLE, -1e12, 2.0, 0.0, 1.0) == pytest.approx(1.0)
    assert psi_plus(TRIANGLE, 0.0, 2.0, 0.0, 1.0) == pytest.approx(1.0)
    assert psi_minus(TRIANGLE, 0.0, 3.0, 2.0, 1.0) == pytest.approx(0.0)
    assert psi_minus(TRIANGLE, 5.0, 3.0, 2.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(Exception):
        psi_plus(TRIANGLE, 0.0, 1.0, 2.0, 1.0)


def test_memory_trace_examples():
    dec = local_partition(TRIANGLE, CFG)
    w = play(TRIANGLE, CFG)[0]
    assert np.allclose(memory_trace(TRIANGLE, 0.0, dec), w(dec.partition.nodes), atol=1e-12)

    up = PlSignal([0.0, 1.0], [0.0, 3.0])
    tr = memory_trace(up, 0.0, local_partition(up, CFG))
    assert tr[-1] == pytest.approx(2.0)

    flat = PlSignal.constant(0.0, 1.0, 0.4)
    tr = memory_trace(flat, 0.1, local_partition(flat, PlayConfig(1.0, 0.1)))
    assert np.allclose(tr, 0.3)


def test_memory_trace_rejects_stale_decomposition():
    dec = local_partition(WAVE, CFG)
    with pytest.raises(StaleDecompositionError):
        memory_trace(WAVE + 10 * dec.delta + 1.0, 0.0, dec)


# --- Newton derivative ----------------------------------------------------------


def test_newton_gate_never_active():
    u = PlSignal([0.0, 1.0, 2.0], [0.0, 0.5, -0.3])
    dec = local_partition(u, CFG)
    h = PlSignal([0.0, 2.0], [0.7, -2.0])
    out = play_newton_apply(u, 0.0, h, 0.25, dec)
    assert np.allclose(out.start, 0.7 - 0.25) and np.allclose(out.end, 0.7 - 0.25)
    s = stop_newton_apply(u, 0.0, h, 0.25, dec)
    t = np.linspace(0.01, 1.99, 17)
    assert np.allclose(s(t), h(t) - 0.45)


def test_newton_initial_value_on_rail_drops_q():
    u = PlSignal.constant(0.0, 1.0, 0.0)
    cfg = PlayConfig(1.0, 1.0)
    out = play_newton_apply(u, 1.0, PlSignal.constant(0.0, 1.0, 0.3), 5.0, local_partition(u, cfg))
    assert np.allclose(out.start, 0.3)


def test_newton_moving_phase_is_identity():
    u = PlSignal([0.0, 1.0], [0.0, 3.0])
    cfg = PlayConfig(1.0, 1.0)
    dec = local_partition(u, cfg)
    h = PlSignal([0.0, 0.5, 1.0], [0.1, -0.2, 0.3])
    out = play_newton_apply(u, 1.0, h, 0.0, dec)
    t = np.linspace(0.0, 1.0, 21)
    assert np.allclose(out(t), h(t), atol=1e-14)
    fd = verify.fd_directional("play", (u, cfg), (h, 0.0), 1e-6)
    assert np.allclose(fd(t), h(t), atol=1e-8)
    s = stop_newton_apply(u, 1.0, h, 0.0, dec)
    assert np.allclose(s(t), 0.0, atol=1e-14)
    fd_stop = verify.fd_directional("stop", (u, cfg), (h, 0.0), 1e-6)
    assert np.allclose(fd_stop(t), 0.0, atol=1e-8)


def test_newton_zero_direction():
    dec = local_partition(WAVE, CFG)
    zero = PlSignal.constant(0.0, 5.0, 0.0)
    assert np.all(play_newton_apply(WAVE, 0.0, zero, 0.0, dec).start == 0.0)
    assert np.all(stop_newton_apply(WAVE, 0.0, zero, 0.0, dec).start == 0.0)


@pytest.mark.parametrize("k", range(5))
def test_newton_is_linear(k):
    u, cfg = base_points(5, seed=9)[k]
    dec = local_partition(u, cfg)
    rng = np.random.default_rng(k)
    h1, h2 = random_pl(rng, 6, 0.0, 1.0), random_pl(rng, 6, 0.0, 1.0)
    q1, q2 = rng.uniform(-1, 1, size=2)
    for rule in ALL_RULES:
        A = play_newton(u, cfg.z0, dec, rule)
        lhs = A.apply(h1 * 2.0 + h2 * -0.5, 2.0 * q1 - 0.5 * q2)
        rhs = A.apply(h1, q1) * 2.0 + A.apply(h2, q2) * -0.5
        assert lhs.max_abs_difference(rhs) <= 1e-12


@pytest.mark.parametrize("k", range(5))
def test_matrix_agrees_with_apply(k):
    u, cfg = base_points(5, seed=10)[k]
    dec = local_partition(u, cfg)
    rng = np.random.default_rng(k)
    h = PlSignal(u.grid, rng.uniform(-1, 1, size=len(u)))
    q = float(rng.uniform(-1, 1))
    for flavor in ("play", "stop"):
        A = play_newton(u, cfg.z0, dec, flavor=flavor)
        M = A.matrix(u.grid)
        assert M.shape == (len(u), len(u) + 1)
        out = A.apply(h, q)
        expected = np.concatenate(([out.right(u.a)], out.left(u.t[1:])))
        assert np.allclose(M @ np.append(h.v, q), expected, atol=1e-12)


@pytest.mark.parametrize("k", range(6))
def test_stop_play_duality(k):
    u, cfg = base_points(6, seed=11)[k]
    dec = local_partition(u, cfg)
    rng = np.random.default_rng(k)
    h, q = random_pl(rng, 7, 0.0, 1.0), float(rng.uniform(-1, 1))
    hs = StepLinSignal.from_pl(h)
    total = play_newton_apply(u, cfg.z0, h, q, dec) + stop_newton_apply(u, cfg.z0, h, q, dec)
    assert total.max_abs_difference(hs) <= 1e-12
    total = play_dir_derivative(u, cfg.z0, h, q, dec) + stop_dir_derivative(u, cfg.z0, h, q, dec)
    assert total.max_abs_difference(hs) <= 1e-12


@pytest.mark.parametrize("k", range(8))
def test_newton_matches_finite_differences_at_generic_points(k):
    u, cfg = base_points(8, seed=12)[k]
    dec = local_partition(u, cfg)
    rng = np.random.default_rng(k)
    h, q = random_pl(rng, 7, 0.0, 1.0), float(rng.uniform(-1, 1))
    N = play_newton_apply(u, cfg.z0, h, q, dec)
    errs = [lq_norm(verify.fd_directional("play", (u, cfg), (h, q), lam) - N, 2.0) for lam in (1e-3, 1e-5)]
    assert errs[1] <= 1e-2
    assert errs[1] <= errs[0] + 1e-12


# --- Bouligand derivative ---------------------------------------------------------


def test_bouligand_frozen_play():
    u = PlSignal([0.0, 1.0, 2.0], [0.0, 0.5, -0.3])
    dec = local_partition(u, CFG)
    D = play_dir_derivative(u, 0.0, PlSignal([0.0, 2.0], [1.0, 3.0]), 0.5, dec)
    assert np.allclose(D.start, 0.5) and np.allclose(D.end, 0.5)


def test_bouligand_moving_phase():
    u = PlSignal([0.0, 1.0], [0.0, 3.0])
    cfg = PlayConfig(1.0, 1.0)
    h = PlSignal([0.0, 0.4, 1.0], [0.2, -0.3, 0.1])
    D = play_dir_derivative(u, 1.0, h, 0.0, local_partition(u, cfg))
    t = np.linspace(0.0, 1.0, 11)
    assert np.allclose(D(t), h(t), atol=1e-14)
    for lam in (1e-2, 1e-4, 1e-6):
        fd = verify.fd_directional("play", (u, cfg), (h, 0.0), lam)
        assert lq_norm(fd - D, 2.0) <= 10 * lam


def test_bouligand_switches_on_one_sided_at_contact():
    # the stop touches the upper rail exactly at t = 1
    dec = local_partition(TOUCH, CFG)
    one = PlSignal.constant(0.0, 2.0, 1.0)
    up = play_dir_derivative(TOUCH, 0.0, one, 1.0, dec)
    down = play_dir_derivative(TOUCH, 0.0, one * -1.0, -1.0, dec)
    assert up.right(0.5) == 0.0 and up.right(1.5) == pytest.approx(1.0)
    assert down.right(0.5) == 0.0 and down.right(1.5) == pytest.approx(0.0)
    for lam in (1e-2, 1e-4, 1e-6):
        fd_up = verify.fd_directional("play", (TOUCH, CFG), (one, 1.0), lam)
        fd_down = verify.fd_directional("play", (TOUCH, CFG), (one * -1.0, -1.0), lam)
        # the quotient ramps up over a window of width lam before t = 1
        assert lq_norm(fd_up - up, 2.0) <= lam**0.5
        assert fd_down.max_abs_difference(down) <= 1e-8


def test_bouligand_on_minus_interval_mirrors_plus():
    # the mirrored input gives the mirrored derivative
    h = PlSignal([0.0, 1.0, 2.0], [0.3, -0.4, 0.8])
    D = play_dir_derivative(TOUCH, 0.0, h, 0.2, local_partition(TOUCH, CFG))
    Dm = play_dir_derivative(TOUCH * -1.0, 0.0, h * -1.0, -0.2, local_partition(TOUCH * -1.0, CFG))
    assert D.max_abs_difference(Dm * -1.0) <= 1e-12


@pytest.mark.parametrize("k", range(8))
def test_bouligand_matches_finite_differences(k):
    u, cfg = base_points(8, seed=13)[k]
    dec = local_partition(u, cfg)
    rng = np.random.default_rng(100 + k)
    h, q = random_pl(rng, 7, 0.0, 1.0), float(rng.uniform(-1, 1))
    D = play_dir_derivative(u, cfg.z0, h, q, dec)
    errs = [lq_norm(verify.fd_directional("play", (u, cfg), (h, q), lam) - D, 2.0) for lam in (1e-2, 1e-4, 1e-6)]
    assert errs[-1] <= 1e-2
    assert errs[-1] <= errs[0] + 1e-12


@pytest.mark.parametrize("k", range(5))
def test_bouligand_positively_homogeneous(k):
    u, cfg = base_points(5, seed=14)[k]
    dec = local_partition(u, cfg)
    rng = np.random.default_rng(k)
    h, q = random_pl(rng, 6, 0.0, 1.0), float(rng.uniform(-1, 1))
    D1 = play_dir_derivative(u, cfg.z0, h, q, dec)
    D3 = play_dir_derivative(u, cfg.z0, h * 3.0, 3.0 * q, dec)
    assert D3.max_abs_difference(D1 * 3.0) <= 1e-12


def test_newton_and_bouligand_agree_at_generic_point():
    u, cfg = base_points(1, seed=15)[0]
    dec = local_partition(u, cfg)
    h = PlSignal([0.0, 1.0], [0.2, -0.4])
    N = play_newton_apply(u, cfg.z0, h, 0.1, dec)
    B = play_dir_derivative(u, cfg.z0, h, 0.1, dec)
    assert lq_norm(N - B, 2.0) <= 1e-12

