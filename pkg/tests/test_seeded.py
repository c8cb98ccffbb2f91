import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsbs.seeded import depth_for, generate, intervals_within, scale_intervals


def spans(ivs):
    return [(iv.s, iv.e) for iv in ivs]


def test_T8_full():
    S = generate(8)
    assert S.depth == 3
    assert spans(scale_intervals(8, 1)) == [(0, 8)]
    assert spans(scale_intervals(8, 2)) == [(0, 4), (2, 6), (4, 8)]
    assert spans(scale_intervals(8, 3)) == [(0, 2), (1, 3), (2, 4), (3, 5), (4, 6), (5, 7), (6, 8)]
    assert len(S) == S.raw_count == 11


def test_T2_full():
    assert spans(generate(2)) == [(0, 2)]


def test_T200_loglog_depth():
    S = generate(200, "paper", 4.0)
    assert S.depth == 7
    assert S.raw_count == 247


def test_T1_rejected():
    with pytest.raises(ValueError):
        generate(1)


def test_unknown_mode():
    with pytest.raises(ValueError):
        depth_for(10, "deep")


def test_within_examples():
    S = generate(8)
    assert intervals_within(S, 0, 8, 0) == list(S)
    assert intervals_within(S, 0, 8, 8) == []
    assert spans(intervals_within(S, 2, 8, 2)) == [(2, 6), (4, 8)]


@pytest.mark.parametrize("T", [8, 64, 200])
def test_raw_count_formula(T):
    for mode in ("full", "paper"):
        S = generate(T, mode)
        assert S.raw_count == sum(2**k - 1 for k in range(1, S.depth + 1))


@given(st.integers(2, 3000), st.sampled_from(["full", "paper"]))
def test_intervals_valid_and_unique(T, mode):
    S = generate(T, mode)
    assert S.depth == depth_for(T, mode)
    assert len(set(spans(S))) == len(S)
    for iv in S:
        assert 0 <= iv.s < iv.e <= T
        assert iv.s == math.floor((iv.i - 1) * T / 2**iv.k)
    assert generate(T, mode) == S


def test_dump_csv():
    buf = io.StringIO()
    generate(4).dump_csv(buf)
    assert buf.getvalue().splitlines()[:3] == ["k,i,s,e", "1,1,0,4", "2,1,0,2"]


def coverage_failures(T):
    """(eta, spacing) pairs with no interval of the required shape.

    Covers every spacing from T/10 up to the distance to the nearer boundary,
    a superset of the spacings any configuration containing eta can have.
    """
    s, e = generate(T, "full").bounds()
    bad = []
    for eta in range(1, T):
        for spacing in range(math.ceil(T / 10), min(eta, T - eta) + 1):
            z = 0.9 * spacing
            left, right = eta - s, e - eta
            ok = (left > 0) & (right > 0) & (np.minimum(left, right) >= z / 16) & (np.maximum(left, right) <= z)
            if not ok.any():
                bad.append((eta, spacing))
    return bad


@pytest.mark.parametrize("T", [64, 128, 200, 512])
def test_coverage(T):
    assert coverage_failures(T) == []
