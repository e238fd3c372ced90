"""Noise-resilience sweep and dimensional-view experiments."""
from __future__ import annotations

import csv
import json
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import metrics
from .errors import ConfigError
from .metrics import ScoreMap, dim_r2
from .synth import (VARIANCE_GRID, BiasMode, NoiseChannelConfig, TimeVaryingConfig,
                    gen_noise_channels, gen_time_varying)
from .tensor import broadcast_combine, reduce_mean

# Noise-channel data is (time, channel): observations on axis 0.
SWEEP_METRICS: dict[str, Callable] = {
    "mean-r2": metrics.mean_r2,
    "dim-r2": lambda y, yhat: dim_r2(y, yhat, axis=[0, 1], axis_norm=[0]).value,
    "vw-mean-r2": metrics.variance_weighted_mean_r2,
    "mean-d2-ae": metrics.mean_d2,
    "mean-ev": metrics.mean_ev,
    "vw-ev": metrics.variance_weighted_ev,
    "mean-corr": metrics.mean_corr,
}

DEFAULT_RATIOS = (0.0, 0.2, 0.4, 0.6, 0.8)

CSV_COLUMNS = ("y_var", "yhat_var", "ratio", "metric", "mean", "std", "n_reps")


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else ``DIMR2_THREADS``, else CPU count."""
    if threads is None:
        env = os.environ.get("DIMR2_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"DIMR2_THREADS must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigError(f"thread count must be at least 1, got {threads}")
    return threads


@dataclass(frozen=True)
class SweepConfig:
    y_var_grid: Sequence[float] = VARIANCE_GRID
    yhat_var_grid: Sequence[float] = VARIANCE_GRID
    ratio_grid: Sequence[float] = DEFAULT_RATIOS
    n_reps: int = 100
    base_seed: int = 0
    metric_set: Sequence[str] = tuple(SWEEP_METRICS)
    n_time: int = 100
    n_channels: int = 100

    def __post_init__(self):
        for name in ("y_var_grid", "yhat_var_grid", "ratio_grid", "metric_set"):
            value = tuple(getattr(self, name))
            if not value:
                raise ConfigError(f"{name} must not be empty")
            object.__setattr__(self, name, value)
        unknown = [m for m in self.metric_set if m not in SWEEP_METRICS]
        if unknown:
            raise ConfigError(f"unknown metric(s) {unknown}; choose from {sorted(SWEEP_METRICS)}")
        if not isinstance(self.n_reps, int) or self.n_reps < 1:
            raise ConfigError(f"n_reps must be a positive integer, got {self.n_reps!r}")
        if not isinstance(self.base_seed, int) or not 0 <= self.base_seed < 2**64:
            raise ConfigError(f"base_seed must be an integer in [0, 2**64), got {self.base_seed!r}")
        for r in self.ratio_grid:
            if not 0.0 <= r <= 1.0:
                raise ConfigError(f"ratio {r} outside [0, 1]")
        for v in self.y_var_grid + self.yhat_var_grid:
            if not v > 0:
                raise ConfigError(f"variances must be positive, got {v}")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown sweep config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: sweep config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def _float_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def cell_seed(base_seed: int, y_var: float, yhat_var: float, ratio: float, rep: int) -> int:
    """64-bit dataset seed for one (cell, rep).

    The cell enters through the IEEE-754 bit patterns of its grid values, not
    its grid position, so adding grid points never changes existing cells.
    Mixing is numpy's SeedSequence hash.
    """
    ss = np.random.SeedSequence(
        [base_seed, _float_bits(y_var), _float_bits(yhat_var), _float_bits(ratio), rep])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CellStats:
    y_var: float
    yhat_var: float
    ratio: float
    metric: str
    mean: float
    std: float
    n_reps: int


@dataclass
class SweepResult:
    config: SweepConfig
    cells: list[CellStats]
    seeds: dict[tuple[float, float, float], list[int]] = field(default_factory=dict)

    def get(self, y_var, yhat_var, ratio, metric) -> CellStats:
        for c in self.cells:
            if (c.y_var, c.yhat_var, c.ratio, c.metric) == (y_var, yhat_var, ratio, metric):
                return c
        raise KeyError((y_var, yhat_var, ratio, metric))

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [asdict(c) for c in self.cells],
            "seeds": [{"y_var": k[0], "yhat_var": k[1], "ratio": k[2], "seeds": v}
                      for k, v in self.seeds.items()],
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for c in self.cells:
                writer.writerow([repr(c.y_var), repr(c.yhat_var), repr(c.ratio), c.metric,
                                 repr(c.mean), repr(c.std), c.n_reps])


def _mean_std(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.sum(values) / values.size)
    std = float(np.sqrt(np.sum((values - mean) ** 2) / values.size))
    return mean, std


def _run_cell(cfg: SweepConfig, y_var, yhat_var, ratio):
    seeds = [cell_seed(cfg.base_seed, y_var, yhat_var, ratio, rep) for rep in range(cfg.n_reps)]
    values = np.empty((len(cfg.metric_set), cfg.n_reps))
    for rep, seed in enumerate(seeds):
        bundle = gen_noise_channels(NoiseChannelConfig(
            n_time=cfg.n_time, n_channels=cfg.n_channels, noise_ratio=ratio,
            y_noise_var=y_var, yhat_noise_var=yhat_var, seed=seed))
        for m, name in enumerate(cfg.metric_set):
            values[m, rep] = SWEEP_METRICS[name](bundle.y, bundle.yhat)
    stats = []
    for m, name in enumerate(cfg.metric_set):
        mean, std = _mean_std(values[m])
        stats.append(CellStats(y_var, yhat_var, ratio, name, mean, std, cfg.n_reps))
    return stats, seeds


def run_noise_sweep(cfg: SweepConfig, threads: int | None = None) -> SweepResult:
    """Mean and std of every metric per (y_var, yhat_var, ratio) cell.

    Cells run concurrently; each cell's reps run in a fixed order and the
    join preserves grid order, so results do not depend on the thread count.
    """
    grid = list(product(cfg.y_var_grid, cfg.yhat_var_grid, cfg.ratio_grid))
    n_threads = min(resolve_threads(threads), len(grid))
    if n_threads == 1:
        outputs = [_run_cell(cfg, *cell) for cell in grid]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            outputs = list(pool.map(lambda cell: _run_cell(cfg, *cell), grid))
    cells, seeds = [], {}
    for cell, (stats, cell_seeds) in zip(grid, outputs):
        cells.extend(stats)
        seeds[cell] = cell_seeds
    return SweepResult(config=cfg, cells=cells, seeds=seeds)


DIMVIEW_PANELS = ("yhat-norm-data", "baseline-norm-data", "yhat-norm-time", "baseline-norm-time")


def time_mean_baseline(y):
    """Prediction that repeats each (data, channel) series' time average."""
    return broadcast_combine(y.map(np.zeros_like), reduce_mean(y, ["time"]), "add")


def run_dimensional_view(bias_mode: BiasMode | str = BiasMode.NO_BIAS, seed: int = 0,
                         n_data: int = 1000, n_time: int = 100) -> dict[str, ScoreMap]:
    """Four (time, channel) score maps with ``axis = data``.

    Panels compare y against the prediction and against the time-mean
    baseline, normalising once by data variability and once by time
    variability.
    """
    bundle = gen_time_varying(TimeVaryingConfig(
        n_data=n_data, n_time=n_time, bias_mode=BiasMode(bias_mode), seed=seed))
    y, yhat = bundle.y, bundle.yhat
    baseline = time_mean_baseline(y)
    return {
        "yhat-norm-data": dim_r2(y, yhat, ["data"], ["data"]),
        "baseline-norm-data": dim_r2(y, baseline, ["data"], ["data"]),
        "yhat-norm-time": dim_r2(y, yhat, ["data"], ["time"]),
        "baseline-norm-time": dim_r2(y, baseline, ["data"], ["time"]),
    }
