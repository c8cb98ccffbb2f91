import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsbs.kernels import FAMILIES, KernelSpec, kernel_value, scaled_kernel


def test_origin_values():
    assert kernel_value(KernelSpec("gaussian", 1), [0.0]) == pytest.approx(0.398942, abs=1e-6)
    assert kernel_value(KernelSpec("uniform", 2), [0.5, -0.5]) == pytest.approx(0.25)
    assert kernel_value(KernelSpec("epanechnikov", 1), [1.5]) == 0.0


def test_scaled_values():
    assert scaled_kernel(KernelSpec("gaussian", 1), 0.5, [0.0]) == pytest.approx(0.797885, abs=1e-6)
    assert scaled_kernel(KernelSpec("uniform", 1), 0.1, [0.05]) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        scaled_kernel(KernelSpec("gaussian", 1), 0.0, [0.0])


@pytest.mark.parametrize("family", FAMILIES)
def test_unit_bandwidth_is_identity(family):
    spec = KernelSpec(family, 2)
    v = [0.3, -0.2]
    assert scaled_kernel(spec, 1.0, v) == kernel_value(spec, v)


def test_unknown_family():
    with pytest.raises(ValueError):
        KernelSpec("triangle", 1)


@pytest.mark.parametrize("family,d,h", list(itertools.product(FAMILIES, (1, 2, 3), (0.3, 1.0))))
def test_integrates_to_one(family, d, h):
    # midpoint rule on a box wide enough for every family at this bandwidth
    half = 6.0 * h if family == "gaussian" else h
    m = {1: 4001, 2: 401, 3: 101}[d]
    edges = np.linspace(-half, half, m + 1)
    mids = (edges[:-1] + edges[1:]) / 2
    grid = np.stack(np.meshgrid(*([mids] * d), indexing="ij"), axis=-1).reshape(-1, d)
    cell = (2 * half / m) ** d
    spec = KernelSpec(family, d)
    total = spec.pairwise(h, grid, np.zeros((1, d))).sum() * cell
    assert total == pytest.approx(1.0, abs=1e-3)


vecs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=3)


@given(st.sampled_from(FAMILIES), vecs)
@settings(max_examples=100, deadline=None)
def test_symmetric_and_non_negative(family, v):
    spec = KernelSpec(family, 3)
    a = kernel_value(spec, v)
    b = kernel_value(spec, [-c for c in v])
    assert a == b
    assert a >= 0


def test_gaussian_truncation():
    spec = KernelSpec("gaussian", 1)
    assert kernel_value(spec, [8.5]) == 0.0
    assert kernel_value(spec, [7.9]) > 0.0


def test_pairwise_matches_pointwise(rng):
    spec = KernelSpec("epanechnikov", 2)
    a, b = rng.random((5, 2)), rng.random((7, 2))
    K = spec.pairwise(0.4, a, b)
    for i, j in itertools.product(range(5), range(7)):
        assert K[i, j] == pytest.approx(scaled_kernel(spec, 0.4, a[i] - b[j]), rel=1e-12)
