import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsbs.detector import FsbsParams, detect
from fsbs.panel import FunctionalPanel, split_even_odd
from fsbs.simulate import generate_scenario
from fsbs.tuning import (
    TuningGrid,
    candidate_grid,
    cross_validate,
    default_bandwidths,
    plugin_bandwidth,
    tau_rate,
    validation_loss,
)

from conftest import step_panel


def test_default_bandwidths():
    h, hbar = default_bandwidths(200, 10, 1)
    assert h == pytest.approx(0.2187, abs=1e-4)
    assert hbar == h
    assert default_bandwidths(1, 1, 1) == (1.0, 1.0)
    assert default_bandwidths(200, 10, 1, r=4)[0] > h


def test_tau_rate_value():
    # sqrt(ln 200) * sqrt(1 + 200^(1/5) * 10^(-4/5))
    expected = np.sqrt(np.log(200)) * np.sqrt(1 + 200**0.2 * 10**-0.8)
    assert tau_rate(200, 10, 1) == pytest.approx(expected, rel=1e-12)


def test_grid_shapes():
    g = candidate_grid(200, 10, 1, sizes=(1, 1))
    assert g.h_candidates == (default_bandwidths(200, 10, 1)[0],)
    assert g.tau_candidates == (tau_rate(200, 10, 1),)
    g = candidate_grid(200, 10, 1)
    assert len(g.h_candidates) == 7 and len(g.tau_candidates) == 10
    assert len(list(g.pairs())) == 70
    for vals in (g.h_candidates, g.tau_candidates):
        assert all(v > 0 for v in vals) and list(vals) == sorted(vals)


def test_grid_validation():
    with pytest.raises(ValueError):
        TuningGrid((), (1.0,))
    with pytest.raises(ValueError):
        TuningGrid((0.2, 0.1), (1.0,))


def test_plugin_bandwidth_formula(rng):
    x = rng.random((50, 4, 1))
    panel = FunctionalPanel(x, np.zeros((50, 4)))
    expected = x.reshape(-1).std(ddof=1) * (4 / (3 * 200)) ** (1 / 5)
    assert plugin_bandwidth(panel) == pytest.approx(expected, rel=1e-12)


def _split(panel):
    return split_even_odd(panel)


@pytest.mark.parametrize("source", ["train", "validation"])
def test_zero_data_zero_loss(source, rng):
    panel = FunctionalPanel(rng.random((20, 3, 1)), np.zeros((20, 3)))
    tr, va = _split(panel)
    assert validation_loss([], tr, va, 0.3, 0.3, source=source) == 0.0
    assert validation_loss([4], tr, va, 0.3, 0.3, source=source) == 0.0


@pytest.mark.parametrize("source", ["train", "validation"])
def test_true_split_lowers_noiseless_loss(source):
    panel = step_panel(T=40, n=20, eta=20, high=2.0)
    tr, va = _split(panel)
    with_cp = validation_loss([10], tr, va, 0.2, 0.2, source=source)
    without = validation_loss([], tr, va, 0.2, 0.2, source=source)
    assert 0 <= with_cp < without


def test_loss_rejects_outside_cps(rng):
    panel = FunctionalPanel(rng.random((10, 2, 1)), np.zeros((10, 2)))
    tr, va = _split(panel)
    with pytest.raises(ValueError):
        validation_loss([5], tr, va, 0.3, 0.3)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["train", "validation"]))
@settings(max_examples=25, deadline=None)
def test_loss_order_invariant_within_segment(seed, source):
    rng = np.random.default_rng(seed)
    T, n = 24, 3
    x, y = rng.random((T, n, 1)), rng.normal(size=(T, n))
    cps = [5]  # train/validation segments (0, 5] and (5, 12]
    tr, va = _split(FunctionalPanel(x, y))
    base = validation_loss(cps, tr, va, 0.3, 0.3, source=source)
    # permute the original snapshot pairs (2j-1, 2j) inside the second segment
    order = np.arange(T)
    pairs = np.arange(5, 12)
    perm = rng.permutation(pairs)
    for a, b in zip(pairs, perm):
        order[2 * a : 2 * a + 2] = [2 * b, 2 * b + 1]
    tr2, va2 = _split(FunctionalPanel(x[order], y[order]))
    assert validation_loss(cps, tr2, va2, 0.3, 0.3, source=source) == pytest.approx(base, rel=1e-10)
    assert base >= 0


def test_cv_singleton_grid(rng):
    panel = FunctionalPanel(rng.random((30, 4, 1)), rng.normal(size=(30, 4)))
    cv = cross_validate(panel, TuningGrid((0.3,), (2.0,)), seed=1)
    assert (cv.h, cv.hbar, cv.tau) == (0.3, 0.3, 2.0)
    assert len(cv.table) == 1


def test_cv_table_and_determinism(rng):
    panel = FunctionalPanel(rng.random((40, 4, 1)), rng.normal(size=(40, 4)))
    grid = TuningGrid((0.2, 0.3, 0.5), (0.5, 1.0, 2.0, 4.0))
    a = cross_validate(panel, grid, seed=5)
    b = cross_validate(panel, grid, seed=5)
    assert len(a.table) == 12
    assert a == b and a.table == b.table
    best = min(a.table, key=lambda r: (r.loss, r.tau, r.h))
    assert (a.h, a.tau) == (best.h, best.tau)
    buf = io.StringIO()
    a.write_table(buf)
    assert buf.getvalue().splitlines()[0] == "h,tau,loss,K_hat"
    assert len(buf.getvalue().splitlines()) == 13


def test_cv_plugin_hbar(rng):
    panel = FunctionalPanel(rng.random((30, 4, 1)), rng.normal(size=(30, 4)))
    cv = cross_validate(panel, TuningGrid((0.2, 0.4), (1.0,)), hbar=0.11, seed=0)
    assert cv.hbar == 0.11


def test_cv_needs_T4(rng):
    panel = FunctionalPanel(rng.random((3, 2, 1)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        cross_validate(panel, TuningGrid((0.3,), (1.0,)))


@pytest.mark.slow
def test_cv_on_s2_majority_exact():
    hits = 0
    for seed in range(20):
        panel, truth = generate_scenario("S2", seed)
        grid = candidate_grid(panel.T, panel.n, panel.d)
        cv = cross_validate(panel, grid, seed=seed)
        res = detect(panel, FsbsParams(cv.h, cv.hbar, cv.tau, seed=seed))
        hits += len(res.change_points) == len(truth)
    assert hits > 10
