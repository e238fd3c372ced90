"""Acceptance criteria 1-8, one test each.

Every test records a PASS/FAIL line that the terminal summary prints, then
asserts, so a failing criterion is both visible and red.
"""
import time

import numpy as np
import pytest
from click.testing import CliRunner

from _cases import random_case, random_pair, random_spec
from dimr2 import metrics as m
from dimr2.cli import default_sweep_config, main
from dimr2.experiments import SweepConfig, run_dimensional_view, run_noise_sweep
from dimr2.io import load_tensor, save_tensor
from dimr2.oracle import naive_baselines, naive_dim_r2
from dimr2.synth import (NoiseChannelConfig, TimeVaryingConfig, gen_noise_channels,
                         gen_table2_example, gen_time_varying)
from dimr2.tensor import Tensor, broadcast_combine, reduce_mean


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.maximum(np.abs(b), 1.0)
    return float(np.max(np.abs(a - b) / scale)) if a.size else 0.0


def test_1_shifted_sine_fixture(acceptance_report):
    start = time.perf_counter()
    y = gen_table2_example().y
    baseline = broadcast_combine(y.map(np.zeros_like), reduce_mean(y, ["time"]), "add")
    every = ["time", "channel"]
    norms = {"time": ["time"], "channel": ["channel"], "time+channel": every}
    expected = {"time": 0.0, "channel": 0.8, "time+channel": 0.8}
    got = {k: m.dim_r2(y, baseline, every, n).value for k, n in norms.items()}
    exact = [m.dim_r2(y, y, every, n).value for n in norms.values()]
    elapsed = time.perf_counter() - start

    worst = max(abs(got[k] - expected[k]) for k in expected)
    ok = worst <= 1e-9 and exact == [1.0, 1.0, 1.0] and elapsed < 1.0
    acceptance_report("1 shifted-sine fixture scores", ok,
                      f"max |err| {worst:.1e}, yhat=y -> {exact}, {elapsed:.2f}s")
    assert ok


def test_2_reductions(acceptance_report):
    rng = np.random.default_rng(2002)
    start = time.perf_counter()
    worst2 = 0.0
    for _ in range(1000):
        shape = tuple(rng.integers(2, 51, size=2))
        y = rng.normal(size=shape) * rng.uniform(0.1, 5, size=shape[1]) + rng.normal(0, 3, shape[1])
        yhat = y + rng.normal(size=shape) * rng.uniform(0.05, 2)
        worst2 = max(worst2, rel_err(m.dim_r2(y, yhat, [0, 1], [0]).value,
                                     m.variance_weighted_mean_r2(y, yhat)))
    worst1 = 0.0
    for _ in range(1000):
        y, yhat = random_pair(rng, 1, max_extent=50, min_extent=2)
        worst1 = max(worst1, rel_err(m.dim_r2(y, yhat, [0], [0], [0]).value, m.r2_1d(y, yhat)))
    elapsed = time.perf_counter() - start

    ok = worst2 <= 1e-12 and worst1 <= 1e-12 and elapsed < 5.0
    acceptance_report("2 reductions to VW mean R2 / 1D R2", ok,
                      f"rank-2 {worst2:.1e}, rank-1 {worst1:.1e}, {elapsed:.2f}s")
    assert ok


def test_3_affine_invariance(acceptance_report):
    rng = np.random.default_rng(2003)
    start = time.perf_counter()
    worst, zero_ok = 0.0, True
    for _ in range(200):
        rank = int(rng.integers(1, 5))
        y, yhat = random_pair(rng, rank, min_extent=2)
        spec = random_spec(rng, rank)
        base = m.dim_r2(y, yhat, spec).array
        for a in (-3.0, 0.5, 10.0):
            for b in (-7.0, 0.0, 2.0):
                worst = max(worst, rel_err(m.dim_r2(a * y + b, a * yhat + b, spec).array, base))
        for b in (-7.0, 0.0, 2.0):
            zero_ok &= bool(np.all(m.dim_r2(0 * y + b, 0 * yhat + b, spec).array == 1.0))
    elapsed = time.perf_counter() - start

    ok = worst <= 1e-9 and zero_ok and elapsed < 10.0
    acceptance_report("3 affine invariance", ok,
                      f"max drift {worst:.1e}, a=0 all ones: {zero_ok}, {elapsed:.2f}s")
    assert ok


def test_4_bounds_and_mean_anchor(acceptance_report):
    rng = np.random.default_rng(2004)
    top, anchor = -np.inf, 0.0
    for i in range(1000):
        y, yhat, spec = random_case(rng)
        if i % 10 == 0:
            yhat = y
        scores = m.dim_r2(y, yhat, spec).array
        finite = scores[np.isfinite(scores)]
        if finite.size:
            top = max(top, float(finite.max()))
    for _ in range(500):
        rank = int(rng.integers(1, 5))
        y, _ = random_pair(rng, rank, min_extent=2)
        y = Tensor(y, axis_names=[f"a{i}" for i in range(rank)])
        axes = random_spec(rng, rank).axis
        yhat = broadcast_combine(y.map(np.zeros_like), reduce_mean(y, axes), "add")
        anchor = max(anchor, float(np.abs(m.dim_r2(y, yhat, axes, axes, axes).array).max()))

    ok = top <= 1 + 1e-12 and anchor <= 1e-12
    acceptance_report("4 bounds and mean-baseline anchor", ok,
                      f"max score {top!r}, max |anchor| {anchor:.1e}")
    assert ok


def test_5_oracle_equivalence(acceptance_report):
    rng = np.random.default_rng(2005)
    start = time.perf_counter()
    worst = {}

    def note(name, fast, slow):
        ok = np.allclose(fast, slow, rtol=1e-10, atol=1e-12, equal_nan=False)
        worst[name] = worst.get(name, True) and bool(ok)

    for _ in range(500):
        y, yhat, spec = random_case(rng)
        fast, slow = m.dim_r2(y, yhat, spec), naive_dim_r2(y, yhat, spec)
        note("dim-r2", fast.array, slow.array)
        worst["dim-r2"] &= bool(np.array_equal(fast.degenerate_mask, slow.degenerate_mask))
    for _ in range(500):
        y, yhat = random_pair(rng, int(rng.integers(1, 5)), min_extent=2)
        ref = naive_baselines(y, yhat)
        note("mse", m.mse(y, yhat), ref["mse"])
        note("mae", m.mae(y, yhat), ref["mae"])
    for _ in range(500):
        y, yhat = random_pair(rng, 1, min_extent=2)
        ref = naive_baselines(y, yhat)
        note("r2", m.r2_1d(y, yhat), ref["r2"])
        note("d2-ae", m.d2_absolute_error(y, yhat), ref["d2_ae"])
        note("ev", m.explained_variance(y, yhat), ref["ev"])
        note("corr", m.pearson_corr(y, yhat), ref["corr"])
    for _ in range(500):
        y, yhat = random_pair(rng, 2, min_extent=2)
        ch = int(rng.integers(0, 2))
        ref = naive_baselines(y, yhat, ch)
        note("mean-r2", m.mean_r2(y, yhat, ch), ref["mean_r2"])
        note("vw-mean-r2", m.variance_weighted_mean_r2(y, yhat, ch), ref["vw_mean_r2"])
        note("mean-d2-ae", m.mean_d2(y, yhat, ch), ref["mean_d2_ae"])
        note("mean-ev", m.mean_ev(y, yhat, ch), ref["mean_ev"])
        note("vw-ev", m.variance_weighted_ev(y, yhat, ch), ref["vw_ev"])
        note("mean-corr", m.mean_corr(y, yhat, ch), ref["mean_corr"])
    elapsed = time.perf_counter() - start

    failed = sorted(k for k, v in worst.items() if not v)
    ok = not failed and elapsed < 30.0
    acceptance_report("5 oracle equivalence", ok,
                      f"{len(worst)} metrics x 500 cases, mismatches: {failed or 'none'}, "
                      f"{elapsed:.2f}s")
    assert ok


@pytest.fixture(scope="module")
def default_sweep():
    cfg = default_sweep_config()
    start = time.perf_counter()
    result = run_noise_sweep(cfg)
    return cfg, result, time.perf_counter() - start


def test_6_noise_resilience_ordering(acceptance_report, default_sweep):
    cfg, result, elapsed = default_sweep
    ratios = [r for r in cfg.ratio_grid if r > 0]
    assert ratios == [0.2, 0.4, 0.6, 0.8]
    assert set(cfg.y_var_grid) == set(cfg.yhat_var_grid) == {0.01, 0.1, 0.5, 1.0}
    assert cfg.n_reps == 100

    def mean(y_var, yhat_var, ratio, metric):
        return result.get(y_var, yhat_var, ratio, metric).mean

    low = [mean(0.01, h, r, "dim-r2") > mean(0.01, h, r, "mean-r2")
           for h in cfg.yhat_var_grid for r in ratios]
    gap = max(abs(mean(0.5, h, r, "dim-r2") - mean(0.5, h, r, "mean-r2"))
              for h in cfg.yhat_var_grid for r in ratios)
    vw = max(rel_err(mean(yv, h, r, "vw-mean-r2"), mean(yv, h, r, "dim-r2"))
             for yv in cfg.y_var_grid for h in cfg.yhat_var_grid for r in ratios)

    ok = all(low) and gap <= 0.05 and vw <= 1e-9 and elapsed < 60.0
    acceptance_report("6 noise-resilience ordering", ok,
                      f"y_var=0.01 dim>mean in {sum(low)}/{len(low)} cells, "
                      f"y_var=0.5 max gap {gap:.3f}, vw-vs-dim {vw:.1e}, {elapsed:.1f}s")
    assert ok


def test_7_dimensional_view(acceptance_report):
    start = time.perf_counter()
    plain = run_dimensional_view("no-bias", seed=0, n_data=1000)
    biased = run_dimensional_view("varying", seed=0, n_data=1000)
    elapsed = time.perf_counter() - start

    medians = [float(np.median(plain[k].array)) for k in ("yhat-norm-data", "baseline-norm-data")]
    a, b = plain["yhat-norm-time"].array, biased["yhat-norm-time"].array
    drift = float(np.max(np.abs(a - b)))
    channel_means = a.mean(axis=0)
    c0_top = bool(np.all(channel_means[0] >= channel_means))

    ok = max(medians) < 0 and drift <= 1e-9 and c0_top and elapsed < 10.0
    acceptance_report("7 dimensional view", ok,
                      f"norm=data medians {medians[0]:.3f}/{medians[1]:.3f}, bias drift "
                      f"{drift:.1e}, channel means {np.round(channel_means, 3).tolist()}, "
                      f"{elapsed:.2f}s")
    assert ok


def test_8_determinism_and_io(acceptance_report, tmp_path):
    checks = {}

    tv = [gen_time_varying(TimeVaryingConfig(n_data=100, seed=5, bias_mode="varying"))
          for _ in range(2)]
    nc = [gen_noise_channels(NoiseChannelConfig(noise_ratio=0.6, seed=5)) for _ in range(2)]
    checks["generation"] = (tv[0].y.array.tobytes() == tv[1].y.array.tobytes()
                            and tv[0].yhat.array.tobytes() == tv[1].yhat.array.tobytes()
                            and nc[0].y.array.tobytes() == nc[1].y.array.tobytes())

    small = SweepConfig(y_var_grid=(0.01, 1.0), yhat_var_grid=(0.1,), ratio_grid=(0.4,), n_reps=5)
    checks["sweep"] = run_noise_sweep(small, 1).cells == run_noise_sweep(small, 4).cells

    rng = np.random.default_rng(8)
    round_trip = True
    for shape in [(), (3,), (2, 5), (2, 3, 4), (1, 2, 3, 2)]:
        t = Tensor(rng.normal(size=shape))
        save_tensor(t, tmp_path / "t.npy")
        back = load_tensor(tmp_path / "t.npy")
        round_trip &= back.shape == t.shape and back.array.tobytes() == t.array.tobytes()
    checks["round trip"] = round_trip

    y = gen_table2_example().y
    save_tensor(y, tmp_path / "y.npy")
    save_tensor(broadcast_combine(y.map(np.zeros_like), reduce_mean(y, ["time"]), "add"),
                tmp_path / "b.npy")
    save_tensor(Tensor(np.ones((2, 3, 4))), tmp_path / "r3.npy")
    save_tensor(Tensor([[0.0, 10.0], [0.2, -10.0]]), tmp_path / "ny.npy")
    save_tensor(Tensor([[0.2, 9.0], [0.0, -9.0]]), tmp_path / "nh.npy")
    runner = CliRunner()

    def cli(*args):
        return runner.invoke(main, [str(a) for a in args])

    golden = [
        (cli("score", "--y", tmp_path / "y.npy", "--yhat", tmp_path / "b.npy",
             "--axis", "time,channel", "--axis-norm", "channel"), 0, "dim-r2\t0.8\n"),
        (cli("score", "--y", tmp_path / "ny.npy", "--yhat", tmp_path / "nh.npy", "--axis", "0,1",
             "--axis-norm", "0"), 0, "dim-r2\t0.989601039896\n"),
        (cli("score", "--y", tmp_path / "r3.npy", "--yhat", tmp_path / "r3.npy", "--axis", "0",
             "--metric", "mean-r2"), 2, None),
        (cli("score", "--y", tmp_path / "missing.npy", "--yhat", tmp_path / "b.npy",
             "--axis", "0"), 1, None),
        (cli("generate", "--dataset", "noise-channels", "--ratio", "1.5", "--out", tmp_path), 2,
         None),
    ]
    checks["cli"] = all(r.exit_code == code and (out is None or r.output == out)
                        for r, code, out in golden)

    ok = all(checks.values())
    acceptance_report("8 determinism and I/O", ok,
                      ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items()))
    assert ok
