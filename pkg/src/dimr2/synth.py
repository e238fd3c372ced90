"""Seeded synthetic sinusoidal benchmarks.

Randomness comes from numpy's PCG64. Each kind of draw (base signal, y
noise, yhat noise, channel bias, noise-channel mask) has its own stream,
derived from the dataset seed with ``SeedSequence(seed, spawn_key=(k,))``,
so changing one knob (say the bias mode or the noise ratio) leaves the
other draws untouched.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .tensor import Tensor

STREAMS = {"base": 0, "y_noise": 1, "yhat_noise": 2, "bias": 3, "mask": 4}

VARIANCE_GRID = (0.01, 0.1, 0.5, 1.0)

TIME_VARYING_AXES = ("data", "time", "channel")
NOISE_CHANNEL_AXES = ("time", "channel")


class BiasMode(str, enum.Enum):
    NO_BIAS = "no-bias"
    VARYING = "varying"


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named draw of a dataset."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(STREAMS[name],))))


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an integer in [0, 2**64), got {seed!r}")


def _check_count(name, value):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")


def n_noise_channels(ratio: float, n_channels: int) -> int:
    """Number of replaced channels, ``ratio * n_channels`` rounded half up."""
    return int(np.floor(ratio * n_channels + 0.5))


@dataclass(frozen=True)
class TimeVaryingConfig:
    n_data: int = 1000
    n_time: int = 100
    n_channels: int = 5
    bias_mode: BiasMode = BiasMode.NO_BIAS
    seed: int = 0
    bias_sampling: str = "permuted"

    def __post_init__(self):
        for name in ("n_data", "n_time", "n_channels"):
            _check_count(name, getattr(self, name))
        if self.n_channels != 5:
            raise ConfigError("the time-varying noise envelopes are defined for exactly 5 channels")
        if self.n_time < 2:
            raise ConfigError("n_time must be at least 2")
        try:
            object.__setattr__(self, "bias_mode", BiasMode(self.bias_mode))
        except ValueError:
            raise ConfigError(f"unknown bias mode {self.bias_mode!r}") from None
        if self.bias_sampling not in ("permuted", "iid"):
            raise ConfigError(f"bias_sampling must be 'permuted' or 'iid', got {self.bias_sampling!r}")
        _check_seed(self.seed)


@dataclass(frozen=True)
class NoiseChannelConfig:
    n_time: int = 100
    n_channels: int = 100
    noise_ratio: float = 0.4
    y_noise_var: float = 0.01
    yhat_noise_var: float = 0.01
    seed: int = 0

    def __post_init__(self):
        _check_count("n_time", self.n_time)
        _check_count("n_channels", self.n_channels)
        if not 0.0 <= self.noise_ratio <= 1.0:
            raise ConfigError(f"noise_ratio must lie in [0, 1], got {self.noise_ratio}")
        for name in ("y_noise_var", "yhat_noise_var"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        _check_seed(self.seed)


@dataclass
class DatasetBundle:
    y: Tensor
    yhat: Tensor
    config: dict
    noise_channel_mask: Optional[np.ndarray] = field(default=None)


def _snapshot(cfg) -> dict:
    snap = {"kind": type(cfg).__name__}
    for key, value in asdict(cfg).items():
        snap[key] = value.value if isinstance(value, enum.Enum) else value
    return snap


def gen_time_varying(cfg: TimeVaryingConfig) -> DatasetBundle:
    """Sine dataset of shape (data, time, channel) with per-channel noise envelopes.

    C0-C3 carry the same full-period sine; C4 is per-sample Gaussian noise,
    centred and rescaled to C0's variance. Independent uniform [-1, 1] noise
    is added to y and yhat, scaled by: C0 none, C1 ramp 0->1, C2 ramp 1->0,
    C3 constant 1, C4 none. ``VARYING`` adds a per-sample channel offset to
    both, either a permutation of 0..4 or i.i.d. uniform [0, 4].
    """
    D, T, C = cfg.n_data, cfg.n_time, cfg.n_channels
    sine = np.sin(2 * np.pi * np.arange(T) / T)

    signal = np.empty((D, T, C))
    signal[:, :, :4] = sine[None, :, None]
    g = stream(cfg.seed, "base").standard_normal((D, T))
    g -= g.mean(axis=1, keepdims=True)
    g *= np.sqrt(np.var(sine) / np.var(g, axis=1, keepdims=True))
    signal[:, :, 4] = g

    ramp = np.linspace(0.0, 1.0, T)
    envelope = np.stack([np.zeros(T), ramp, ramp[::-1], np.ones(T), np.zeros(T)], axis=1)
    y_noise = stream(cfg.seed, "y_noise").uniform(-1.0, 1.0, (D, T, C)) * envelope
    yhat_noise = stream(cfg.seed, "yhat_noise").uniform(-1.0, 1.0, (D, T, C)) * envelope

    if cfg.bias_mode is BiasMode.VARYING:
        rng = stream(cfg.seed, "bias")
        if cfg.bias_sampling == "permuted":
            levels = np.tile(np.linspace(0.0, 4.0, C), (D, 1))
            bias = rng.permuted(levels, axis=1)
        else:
            bias = rng.uniform(0.0, 4.0, (D, C))
        signal = signal + bias[:, None, :]

    return DatasetBundle(
        y=Tensor(signal + y_noise, axis_names=TIME_VARYING_AXES),
        yhat=Tensor(signal + yhat_noise, axis_names=TIME_VARYING_AXES),
        config=_snapshot(cfg),
    )


def gen_noise_channels(cfg: NoiseChannelConfig) -> DatasetBundle:
    """Sine channels predicted perfectly, with a fraction replaced by Gaussian noise.

    Noise is drawn for every channel and only the masked columns are used,
    so changing the ratio does not change the noise a given channel gets.
    """
    T, C = cfg.n_time, cfg.n_channels
    sine = np.sin(2 * np.pi * np.arange(T) / T)
    y = np.tile(sine[:, None], (1, C))
    yhat = y.copy()

    k = n_noise_channels(cfg.noise_ratio, C)
    mask = np.zeros(C, dtype=bool)
    mask[stream(cfg.seed, "mask").choice(C, size=k, replace=False)] = True

    y_noise = stream(cfg.seed, "y_noise").standard_normal((T, C)) * np.sqrt(cfg.y_noise_var)
    yhat_noise = stream(cfg.seed, "yhat_noise").standard_normal((T, C)) * np.sqrt(cfg.yhat_noise_var)
    y[:, mask] = y_noise[:, mask]
    yhat[:, mask] = yhat_noise[:, mask]

    return DatasetBundle(
        y=Tensor(y, axis_names=NOISE_CHANNEL_AXES),
        yhat=Tensor(yhat, axis_names=NOISE_CHANNEL_AXES),
        config=_snapshot(cfg),
        noise_channel_mask=mask,
    )


def gen_table2_example(n_time: int = 100, n_channels: int = 5) -> DatasetBundle:
    """y[t, c] = sin(2*pi*t/100 + 2*pi*c/5) + c, with yhat = y."""
    _check_count("n_time", n_time)
    _check_count("n_channels", n_channels)
    t = np.arange(n_time)[:, None]
    c = np.arange(n_channels)[None, :]
    y = np.sin(2 * np.pi * t / n_time + 2 * np.pi * c / n_channels) + c
    tensor = Tensor(y, axis_names=NOISE_CHANNEL_AXES)
    return DatasetBundle(y=tensor, yhat=tensor,
                         config={"kind": "Table2Example", "n_time": n_time, "n_channels": n_channels})
