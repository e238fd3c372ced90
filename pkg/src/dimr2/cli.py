"""``dimr2`` command line.

Exit codes: 0 success, 1 I/O or file-format failure, 2 invalid arguments,
axis specs, shapes or configs.
"""
from __future__ import annotations

import contextlib
import json
import sys
from importlib import resources
from pathlib import Path

import click
import numpy as np

from . import metrics
from .axes import AxisSpec, parse_axis_list
from .errors import DimR2Error, FormatError, ShapeError, SpecError
from .experiments import DIMVIEW_PANELS, SweepConfig, run_dimensional_view, run_noise_sweep
from .io import export_scoremap, load_tensor, save_tensor
from .synth import (BiasMode, NoiseChannelConfig, TimeVaryingConfig, gen_noise_channels,
                    gen_table2_example, gen_time_varying)
from .tensor import Tensor

EXIT_IO = 1
EXIT_INVALID = 2

# name -> (scalar function, per-channel map function or None)
CHANNEL_METRICS = {
    "mean-r2": (metrics.mean_r2, metrics.r2_per_channel),
    "vw-mean-r2": (metrics.variance_weighted_mean_r2, None),
    "mean-d2-ae": (metrics.mean_d2, metrics.d2_per_channel),
    "mean-ev": (metrics.mean_ev, metrics.ev_per_channel),
    "vw-ev": (metrics.variance_weighted_ev, None),
    "mean-corr": (metrics.mean_corr, metrics.corr_per_channel),
}
VECTOR_METRICS = {
    "r2": metrics.r2_1d,
    "d2-ae": metrics.d2_absolute_error,
    "ev": metrics.explained_variance,
    "corr": metrics.pearson_corr,
}
SCORE_METRICS = ["dim-r2", *CHANNEL_METRICS, "mse", "mae", *VECTOR_METRICS]


def fmt(x: float) -> str:
    """12 significant digits."""
    return f"{x:.12g}"


@contextlib.contextmanager
def _exit_codes():
    try:
        yield
    except FormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except DimR2Error as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)


@click.group()
def main():
    """Dimensional R2 scores, synthetic benchmarks and experiments."""


def _channel_layout(y: Tensor, yhat: Tensor, channel_axis, flatten: bool):
    """Move the channel axis last; with ``flatten`` merge the rest into observations."""
    ch = y.rank - 1 if channel_axis is None else y.axis_index(channel_axis)
    if not flatten:
        return y, yhat, ch
    order = [i for i in range(y.rank) if i != ch] + [ch]

    def reshape(t):
        arr = np.transpose(t.array, order)
        return Tensor(arr.reshape(-1, arr.shape[-1]))

    return reshape(y), reshape(yhat), 1


@main.command()
@click.option("--y", "y_path", required=True, help="Target tensor (.npy or .csv).")
@click.option("--yhat", "yhat_path", required=True, help="Prediction tensor, same shape.")
@click.option("--axis", required=True, help="Axes collapsed into observations, e.g. data,time or 0,1.")
@click.option("--axis-norm", default=None, help="Axes for the reference mean (default: --axis).")
@click.option("--axis-pool", default=None, help="Axes the TSS is averaged over (default: --axis-norm).")
@click.option("--metric", "metric_names", multiple=True, type=click.Choice(SCORE_METRICS),
              default=["dim-r2"], show_default=True, help="Repeatable.")
@click.option("--channel-axis", default=None, help="Channel axis for per-channel metrics (default: last).")
@click.option("--flatten", is_flag=True,
              help="Merge every non-channel axis into observations for per-channel metrics.")
@click.option("--degenerate", type=click.Choice(sorted(metrics.DEGENERATE_FILL)), default="zero",
              show_default=True, help="Score for zero-TSS cells with an inexact prediction.")
@click.option("--out", default=None, help="Write the first metric's score map here.")
@click.option("--format", "out_format", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
def score(y_path, yhat_path, axis, axis_norm, axis_pool, metric_names, channel_axis, flatten,
          degenerate, out, out_format):
    """Score a prediction file against a target file."""
    with _exit_codes():
        spec = AxisSpec(parse_axis_list(axis), parse_axis_list(axis_norm), parse_axis_list(axis_pool))
        y = load_tensor(y_path)
        yhat = load_tensor(yhat_path)
        if y.shape != yhat.shape:
            raise ShapeError(f"y has shape {y.shape} but yhat has shape {yhat.shape}")
        if yhat.axis_names is None:
            yhat = yhat.with_names(y.axis_names)

        maps = {}
        for name in metric_names:
            if name == "dim-r2":
                sm = metrics.dim_r2(y, yhat, spec, degenerate=degenerate)
                maps[name] = sm
                if sm.scores.rank == 0:
                    click.echo(f"{name}\t{fmt(sm.value)}")
                else:
                    a = sm.array
                    click.echo(f"{name}\tshape={sm.shape}\tmean={fmt(a.mean())}"
                               f"\tmin={fmt(a.min())}\tmax={fmt(a.max())}")
            elif name in CHANNEL_METRICS:
                cy, cyhat, ch = _channel_layout(y, yhat, channel_axis, flatten)
                scalar_fn, map_fn = CHANNEL_METRICS[name]
                click.echo(f"{name}\t{fmt(scalar_fn(cy, cyhat, ch))}")
                if map_fn is not None:
                    maps[name] = map_fn(cy, cyhat, ch)
            elif name in ("mse", "mae"):
                click.echo(f"{name}\t{fmt(getattr(metrics, name)(y, yhat))}")
            else:
                click.echo(f"{name}\t{fmt(VECTOR_METRICS[name](y, yhat))}")

        if out is not None:
            first = metric_names[0]
            if first not in maps:
                raise SpecError(f"metric {first!r} has no score map to write; use dim-r2 or a "
                                f"per-channel metric first")
            export_scoremap(maps[first], out, out_format)


def _write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


@main.command()
@click.option("--dataset", type=click.Choice(["time-varying", "noise-channels", "table2"]),
              required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-data", type=int, default=1000, show_default=True, help="time-varying only.")
@click.option("--n-time", type=int, default=100, show_default=True)
@click.option("--n-channels", type=int, default=None,
              help="Default 5 (time-varying, table2) or 100 (noise-channels).")
@click.option("--bias", type=click.Choice([m.value for m in BiasMode]), default="no-bias",
              show_default=True)
@click.option("--bias-sampling", type=click.Choice(["permuted", "iid"]), default="permuted",
              show_default=True)
@click.option("--ratio", type=float, default=0.4, show_default=True, help="noise-channels only.")
@click.option("--y-var", type=float, default=0.01, show_default=True)
@click.option("--yhat-var", type=float, default=0.01, show_default=True)
@click.option("--out", required=True, help="Output directory.")
def generate(dataset, seed, n_data, n_time, n_channels, bias, bias_sampling, ratio, y_var,
             yhat_var, out):
    """Write a synthetic y / yhat pair (plus mask and config) to a directory."""
    with _exit_codes():
        if dataset == "time-varying":
            bundle = gen_time_varying(TimeVaryingConfig(
                n_data=n_data, n_time=n_time, n_channels=5 if n_channels is None else n_channels,
                bias_mode=bias, seed=seed, bias_sampling=bias_sampling))
        elif dataset == "noise-channels":
            bundle = gen_noise_channels(NoiseChannelConfig(
                n_time=n_time, n_channels=100 if n_channels is None else n_channels,
                noise_ratio=ratio, y_noise_var=y_var, yhat_noise_var=yhat_var, seed=seed))
        else:
            bundle = gen_table2_example(n_time, 5 if n_channels is None else n_channels)

        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_tensor(bundle.y, out_dir / "y.npy")
        save_tensor(bundle.yhat, out_dir / "yhat.npy")
        if bundle.noise_channel_mask is not None:
            save_tensor(Tensor(bundle.noise_channel_mask.astype(np.float64), axis_names=["channel"]),
                        out_dir / "mask.npy")
        _write_json(out_dir / "config.json", bundle.config)
        click.echo(f"wrote {dataset} y/yhat of shape {bundle.y.shape} to {out_dir}")


def default_sweep_config() -> SweepConfig:
    text = resources.files("dimr2").joinpath("data/default_sweep.json").read_text(encoding="utf-8")
    return SweepConfig.from_dict(json.loads(text))


@main.command()
@click.option("--config", "config_path", default=None,
              help="Sweep config JSON (fields of SweepConfig); default is the bundled config.")
@click.option("--out", required=True, help="Output directory for sweep.json and sweep.csv.")
@click.option("--threads", type=int, default=None, help="Worker cap (fallback: $DIMR2_THREADS).")
def sweep(config_path, out, threads):
    """Run the noise-channel resilience sweep."""
    with _exit_codes():
        cfg = default_sweep_config() if config_path is None else SweepConfig.from_json(config_path)
        result = run_noise_sweep(cfg, threads=threads)
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        result.write_json(out_dir / "sweep.json")
        result.write_csv(out_dir / "sweep.csv")
        click.echo(f"wrote {len(result.cells)} cell statistics to {out_dir}")


@main.command()
@click.option("--bias", type=click.Choice([m.value for m in BiasMode]), default="no-bias",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-data", type=int, default=1000, show_default=True)
@click.option("--out", required=True, help="Output directory for the panel score maps.")
def dimview(bias, seed, n_data, out):
    """Dimensional-view score maps (time x channel, axis = data) for one bias condition."""
    with _exit_codes():
        panels = run_dimensional_view(bias, seed, n_data=n_data)
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in DIMVIEW_PANELS:
            sm = panels[name]
            export_scoremap(sm, out_dir / f"{name}.csv", "csv")
            export_scoremap(sm, out_dir / f"{name}.json", "json")
            click.echo(f"{name}\tmedian={fmt(float(np.median(sm.array)))}"
                       f"\tmean={fmt(float(np.mean(sm.array)))}")


if __name__ == "__main__":
    main()
