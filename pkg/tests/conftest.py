import numpy as np
import pytest

from fsbs.panel import FunctionalPanel


def make_panel(x, y) -> FunctionalPanel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 2:
        x = x[:, :, None]
    return FunctionalPanel(x, y)


def step_panel(T=40, n=30, eta=20, low=0.0, high=1.0, seed=0, fixed=False) -> FunctionalPanel:
    """Noiseless panel with a constant mean jumping from ``low`` to ``high`` after ``eta``.

    ``fixed`` reuses one set of locations at every time, so the kernel mean
    estimates are exactly constant within each segment.
    """
    rng = np.random.default_rng(seed)
    x = np.broadcast_to(rng.random((1, n, 1)), (T, n, 1)).copy() if fixed else rng.random((T, n, 1))
    y = np.where(np.arange(1, T + 1)[:, None] <= eta, low, high) * np.ones((T, n))
    return FunctionalPanel(x, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
