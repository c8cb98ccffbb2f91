import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsbs.panel import FunctionalPanel, PanelError, load_panel, panel_to_csv, split_even_odd

from conftest import make_panel


def test_load_two_rows():
    panel = load_panel(io.StringIO("t,i,x1,y\n1,1,0.5,2.0\n2,1,0.3,1.0\n"), d=1)
    assert (panel.T, panel.n, panel.d) == (2, 1, 1)
    assert panel.y.tolist() == [[2.0], [1.0]]
    assert panel.x[:, 0, 0].tolist() == [0.5, 0.3]


def test_inconsistent_n():
    text = "t,i,x1,y\n1,1,0.1,0\n1,2,0.2,0\n2,1,0.1,0\n2,2,0.2,0\n2,3,0.3,0\n"
    with pytest.raises(PanelError, match="inconsistent n"):
        load_panel(io.StringIO(text), d=1)


def test_nan_names_row():
    with pytest.raises(PanelError, match="row 3"):
        load_panel(io.StringIO("t,i,x1,y\n1,1,0.5,2.0\n2,1,0.3,nan\n"), d=1)


def test_bad_header():
    with pytest.raises(PanelError):
        load_panel(io.StringIO("t,i,x,y\n1,1,0.5,2.0\n"), d=1)


def test_out_of_range_needs_rescale():
    text = "t,i,x1,y\n1,1,2.0,0\n2,1,4.0,1\n"
    with pytest.raises(PanelError):
        load_panel(io.StringIO(text), d=1)
    panel = load_panel(io.StringIO(text), d=1, rescale=True)
    assert panel.x[:, 0, 0].tolist() == [0.0, 1.0]


def test_arrays_read_only():
    panel = make_panel([[0.1], [0.2]], [[1.0], [2.0]])
    with pytest.raises(ValueError):
        panel.y[0, 0] = 5.0


def test_split_T4():
    panel = make_panel(np.full((4, 1), 0.5), np.arange(4.0)[:, None])
    train, val = split_even_odd(panel)
    assert list(train.times) == [2, 4]
    assert list(val.times) == [1, 3]
    assert train.y[:, 0].tolist() == [1.0, 3.0]


def test_split_T5_and_T1():
    panel = make_panel(np.full((5, 1), 0.5), np.zeros((5, 1)))
    train, val = split_even_odd(panel)
    assert (train.T, val.T) == (2, 3)
    with pytest.raises(PanelError):
        split_even_odd(make_panel([[0.5]], [[0.0]]))


panels = st.tuples(st.integers(1, 6), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))


def _random_panel(T, n, d, seed):
    rng = np.random.default_rng(seed)
    return FunctionalPanel(rng.random((T, n, d)), rng.normal(size=(T, n)))


@given(panels)
@settings(max_examples=50, deadline=None)
def test_round_trip(shape):
    panel = _random_panel(*shape)
    text = panel_to_csv(panel)
    again = load_panel(io.StringIO(text), d=panel.d)
    assert np.array_equal(again.x, panel.x)
    assert np.array_equal(again.y, panel.y)
    assert panel_to_csv(again) == text


@given(panels.filter(lambda s: s[0] >= 2))
@settings(max_examples=50, deadline=None)
def test_split_partitions(shape):
    panel = _random_panel(*shape)
    train, val = split_even_odd(panel)
    assert train.T + val.T == panel.T
    assert set(train.times).isdisjoint(val.times)
    assert sorted([*train.times, *val.times]) == list(range(1, panel.T + 1))
