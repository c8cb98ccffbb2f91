import numpy as np

from fsbs.bench import BenchConfig, localisation_error, replication_seed, run_bench, run_replication
from fsbs.simulate import generate_scenario, single_jump_scenario


def test_replication_independent_of_order():
    cfg = BenchConfig("S1", reps=3, seed=4)
    a = run_replication(cfg, 2)
    _, reps = run_bench(cfg, threads=1)
    b = reps[2]
    for key in ("change_points", "h", "tau", "K_hat", "hausdorff", "detector_seed"):
        assert a[key] == b[key]
    assert b["wall_seconds"] >= 0


def test_single_rep_zero_sd():
    row, reps = run_bench(BenchConfig("S5", reps=1, seed=2), threads=1)
    assert row.sd_abs_kdiff == 0 and row.sd_hausdorff == 0
    assert len(reps) == 1


def test_threads_do_not_change_results():
    cfg = BenchConfig("S2", reps=3, seed=6)
    a, ra = run_bench(cfg, threads=1)
    b, rb = run_bench(cfg, threads=2)
    assert a == b
    assert [r["change_points"] for r in ra] == [r["change_points"] for r in rb]


def test_replication_seeds_distinct():
    assert len({replication_seed(1, r) for r in range(100)}) == 100


def test_localisation_error_noise_free_jump():
    spec = single_jump_scenario(100, 40, jump=1.0, noise="none")
    panel, truth = generate_scenario(spec, 0)
    assert truth == [50]
    assert localisation_error(panel, truth[0]) <= 2
