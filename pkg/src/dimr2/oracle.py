"""Loop-based reference implementations used to certify the vectorized engine.

Everything here walks explicit index tuples over ``Tensor.data`` with plain
Python arithmetic. Nothing is shared with the engine's reduction or
broadcasting code; only ``Tensor`` and the axis-spec resolver are reused.
Slow on purpose.
"""
from itertools import product
from math import sqrt

import numpy as np

from .axes import AxisSpec, resolve
from .errors import DegenerateInputError, ShapeError
from .metrics import DEGENERATE_FILL, ZERO_TSS_RTOL, ScoreMap
from .tensor import Tensor, as_tensor


def _strides(shape):
    strides = [1] * len(shape)
    for i in range(len(shape) - 2, -1, -1):
        strides[i] = strides[i + 1] * shape[i + 1]
    return strides


def _offset(idx, strides):
    return sum(i * s for i, s in zip(idx, strides))


def _restrict(idx, keep):
    return tuple(idx[i] for i in keep)


def naive_dim_r2(y, yhat, spec, degenerate="zero"):
    """Dim-R2 by direct transcription of the RSS / mean / TSS sums."""
    y, yhat = as_tensor(y), as_tensor(yhat)
    if y.shape != yhat.shape:
        raise ShapeError(f"shape mismatch {y.shape} vs {yhat.shape}")
    if not isinstance(spec, AxisSpec):
        spec = AxisSpec(spec)
    rs = resolve(spec, y.rank, y.axis_names)
    fill = DEGENERATE_FILL[degenerate]

    shape = y.shape
    strides = _strides(shape)
    yv, hv = y.data, yhat.data
    everything = list(product(*[range(s) for s in shape]))

    not_norm = [i for i in range(y.rank) if i not in rs.axis_norm]
    sums, counts = {}, {}
    for k in everything:
        key = _restrict(k, not_norm)
        sums[key] = sums.get(key, 0.0) + yv[_offset(k, strides)]
        counts[key] = counts.get(key, 0) + 1
    ybar = {key: sums[key] / counts[key] for key in sums}

    rss = {}
    for k in everything:
        key = _restrict(k, rs.output_axes)
        off = _offset(k, strides)
        d = yv[off] - hv[off]
        rss[key] = rss.get(key, 0.0) + d * d

    n_pool = 1
    for i in rs.pool_minus_axis:
        n_pool *= shape[i]
    tss = {}
    for k in everything:
        key = _restrict(k, rs.tss_axes)
        d = yv[_offset(k, strides)] - ybar[_restrict(k, not_norm)]
        tss[key] = tss.get(key, 0.0) + d * d
    for key in tss:
        tss[key] = tss[key] / n_pool

    mean_abs = sum(abs(v) for v in yv) / len(yv)
    threshold = ZERO_TSS_RTOL * mean_abs * mean_abs

    out_shape = [shape[i] for i in rs.output_axes]
    pos_in_out = [rs.output_axes.index(i) for i in rs.tss_axes]
    scores, mask = [], []
    for cell in product(*[range(s) for s in out_shape]):
        r = rss[cell]
        t = tss[tuple(cell[p] for p in pos_in_out)]
        if t <= threshold:
            scores.append(1.0 if r <= threshold else fill)
            mask.append(True)
        else:
            scores.append(1.0 - r / t)
            mask.append(False)

    names = None if y.axis_names is None else [y.axis_names[i] for i in rs.output_axes]
    return ScoreMap(Tensor(scores, shape=out_shape, axis_names=names), "dim-r2", rs,
                    np.array(mask, dtype=bool).reshape(out_shape))


def _mean(xs):
    return sum(xs) / len(xs)


def _r2(y, h):
    m = _mean(y)
    rss = sum((a - b) ** 2 for a, b in zip(y, h))
    tss = sum((a - m) ** 2 for a in y)
    return rss, tss


def _d2(y, h):
    m = _mean(y)
    num = sum(abs(a - b) for a, b in zip(y, h))
    den = sum(abs(a - m) for a in y)
    if den <= ZERO_TSS_RTOL * sum(abs(a) for a in y):
        if num <= ZERO_TSS_RTOL * sum(abs(a) for a in y):
            return 1.0
        raise DegenerateInputError("constant y with inexact prediction")
    return 1.0 - num / den


def _ev(y, h):
    res = [a - b for a, b in zip(y, h)]
    mr, my = _mean(res), _mean(y)
    var_res = sum((r - mr) ** 2 for r in res) / len(res)
    var_y = sum((a - my) ** 2 for a in y) / len(y)
    return var_res, var_y


def _corr(y, h):
    my, mh = _mean(y), _mean(h)
    cov = sum((a - my) * (b - mh) for a, b in zip(y, h))
    sy = sqrt(sum((a - my) ** 2 for a in y))
    sh = sqrt(sum((b - mh) ** 2 for b in h))
    tiny = ZERO_TSS_RTOL * (sqrt(sum(a * a for a in y)) + sqrt(sum(b * b for b in h)))
    if sy <= tiny or sh <= tiny:
        raise DegenerateInputError("constant series")
    return cov / (sy * sh)


def _ratio(num, den, threshold):
    if den <= threshold:
        return 1.0 if num <= threshold else DEGENERATE_FILL["zero"]
    return 1.0 - num / den


def naive_baselines(y, yhat, channel_axis=1):
    """All conventional metrics as a dict, computed with plain loops.

    Rank-1 inputs give ``r2``, ``d2_ae``, ``ev``, ``corr``; rank-2 inputs give
    the per-channel averages and variance-weighted forms. ``mse`` and ``mae``
    are included for any rank.
    """
    y, yhat = as_tensor(y), as_tensor(yhat)
    if y.shape != yhat.shape:
        raise ShapeError(f"shape mismatch {y.shape} vs {yhat.shape}")
    yv, hv = y.data, yhat.data
    n = len(yv)
    out = {
        "mse": sum((a - b) ** 2 for a, b in zip(yv, hv)) / n,
        "mae": sum(abs(a - b) for a, b in zip(yv, hv)) / n,
    }
    mean_abs = sum(abs(v) for v in yv) / n
    threshold = ZERO_TSS_RTOL * mean_abs * mean_abs

    if y.rank == 1:
        rss, tss = _r2(yv, hv)
        var_res, var_y = _ev(yv, hv)
        out["r2"] = _ratio(rss, tss, threshold)
        out["d2_ae"] = _d2(yv, hv)
        out["ev"] = _ratio(var_res, var_y, threshold)
        out["corr"] = _corr(yv, hv)
        return out
    if y.rank != 2:
        return out

    n_obs, n_ch = (y.shape[0], y.shape[1]) if channel_axis == 1 else (y.shape[1], y.shape[0])
    cols_y, cols_h = [], []
    for c in range(n_ch):
        if channel_axis == 1:
            cols_y.append([yv[i * n_ch + c] for i in range(n_obs)])
            cols_h.append([hv[i * n_ch + c] for i in range(n_obs)])
        else:
            cols_y.append([yv[c * n_obs + i] for i in range(n_obs)])
            cols_h.append([hv[c * n_obs + i] for i in range(n_obs)])

    r2s, d2s, evs, corrs = [], [], [], []
    w_r2_num = w_ev_num = w_r2_den = w_ev_den = 0.0
    for cy, ch in zip(cols_y, cols_h):
        rss, tss = _r2(cy, ch)
        var_res, var_y = _ev(cy, ch)
        r2s.append(_ratio(rss, tss, threshold))
        evs.append(_ratio(var_res, var_y, threshold))
        d2s.append(_d2(cy, ch))
        corrs.append(_corr(cy, ch))
        w_r2_num += tss - rss
        w_r2_den += tss
        w_ev_num += var_y - var_res
        w_ev_den += var_y
    if w_r2_den == 0.0:
        raise DegenerateInputError("every channel is constant")
    out["mean_r2"] = _mean(r2s)
    out["vw_mean_r2"] = w_r2_num / w_r2_den
    out["mean_d2_ae"] = _mean(d2s)
    out["mean_ev"] = _mean(evs)
    out["vw_ev"] = w_ev_num / w_ev_den
    out["mean_corr"] = _mean(corrs)
    return out
