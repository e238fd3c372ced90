"""Dimensional R2 and conventional regression metrics.

``dim_r2`` collapses the axes in ``axis`` into observations, measures the
reference mean along ``axis_norm`` and averages the total sum of squares over
``axis_pool`` minus ``axis``. The baselines (per-channel R2, D2 absolute
error, explained variance, correlation) follow the usual 1D definitions and
their per-channel 2D averages.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .axes import AxisSpec, ResolvedSpec, resolve
from .errors import DegenerateInputError, RankError, ShapeError, SpecError
from .tensor import Tensor, as_tensor, broadcast_combine, reduce_mean, reduce_sum

#: A TSS cell at or below ``ZERO_TSS_RTOL * mean(|y|)**2`` counts as zero.
ZERO_TSS_RTOL = 1e-12

#: Score given to degenerate cells whose prediction is not exact.
DEGENERATE_FILL = {"zero": 0.0, "neg-inf": -np.inf}


@dataclass(frozen=True)
class Decomposition:
    """RSS over ``D \\ axis``, mean of y over ``D \\ axis_norm``, pooled TSS."""

    rss: Tensor
    ybar: Tensor
    tss: Tensor


@dataclass(frozen=True)
class ScoreMap:
    """Metric values over the retained axes.

    ``degenerate_mask`` is True wherever the (broadcast) TSS cell was
    numerically zero, whichever score the cell ended up with.
    """

    scores: Tensor
    metric_name: str
    spec: ResolvedSpec | None
    degenerate_mask: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.scores.shape

    @property
    def array(self) -> np.ndarray:
        return self.scores.array

    @property
    def value(self) -> float:
        """The score of a rank-0 map."""
        if self.scores.rank != 0:
            raise ValueError(f"{self.metric_name} map has shape {self.shape}, not a scalar")
        return self.scores.item()

    def __float__(self):
        return self.value


def _fill_value(degenerate: str) -> float:
    try:
        return DEGENERATE_FILL[degenerate]
    except KeyError:
        raise ValueError(
            f"degenerate policy must be one of {sorted(DEGENERATE_FILL)}, got {degenerate!r}"
        ) from None


def zero_threshold(y) -> float:
    y = np.asarray(y, dtype=np.float64)
    return ZERO_TSS_RTOL * float(np.mean(np.abs(y))) ** 2


def _pair(y_true, y_pred) -> tuple[Tensor, Tensor]:
    y = as_tensor(y_true)
    yhat = as_tensor(y_pred)
    if y.shape != yhat.shape:
        raise ShapeError(f"y has shape {y.shape} but yhat has shape {yhat.shape}")
    if y.axis_names and yhat.axis_names and y.axis_names != yhat.axis_names:
        raise ShapeError(f"axis names differ: {y.axis_names} vs {yhat.axis_names}")
    names = y.axis_names or yhat.axis_names
    return y.with_names(names), yhat.with_names(names)


def _identified(t: Tensor) -> Tensor:
    """Give an unnamed tensor positional names so broadcasting aligns by identity."""
    if t.axis_names is not None:
        return t
    return t.with_names([f"axis{i}" for i in range(t.rank)])


def _resolved_for(spec, y: Tensor) -> ResolvedSpec:
    if isinstance(spec, ResolvedSpec):
        if spec.rank != y.rank:
            raise SpecError(f"spec was resolved for rank {spec.rank}, data has rank {y.rank}")
        return spec
    return resolve(spec, y.rank, y.axis_names)


def decompose(y_true, y_pred, spec: AxisSpec | ResolvedSpec) -> Decomposition:
    """Compute RSS, the reference mean and the pooled TSS.

    With an empty ``axis_pool \\ axis`` the pooling prefactor is 1.

    Raises:
        ShapeError: y and yhat shapes differ.
    """
    y, yhat = _pair(y_true, y_pred)
    spec = _resolved_for(spec, y)
    yn = _identified(y)
    yhn = yhat.with_names(yn.axis_names)

    rss = reduce_sum(broadcast_combine(yn, yhn, "sub").map(np.square), spec.axis)
    ybar = reduce_mean(yn, spec.axis_norm)
    dev = broadcast_combine(yn, ybar, "sub").map(np.square)
    summed = tuple(sorted(set(spec.axis) | set(spec.axis_pool)))
    n_pool = prod(y.shape[i] for i in spec.pool_minus_axis)
    tss = reduce_sum(dev, summed)
    if n_pool != 1:
        tss = tss.map(lambda a: a / n_pool)

    if y.axis_names is None:
        rss, ybar, tss = (t.with_names(None) for t in (rss, ybar, tss))
    return Decomposition(rss=rss, ybar=ybar, tss=tss)


def _ratio_scores(rss: np.ndarray, tss: np.ndarray, threshold: float, fill: float):
    degenerate = tss <= threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = 1.0 - rss / tss
    scores = np.where(degenerate, np.where(rss <= threshold, 1.0, fill), ratio)
    return scores, degenerate


def dim_r2(y_true, y_pred, axis, axis_norm=None, axis_pool=None, *,
           degenerate: str = "zero") -> ScoreMap:
    """Dimensional R2 score over tensors of any rank.

    Args:
        y_true: target tensor (``Tensor`` or array-like).
        y_pred: prediction with the same shape.
        axis: axes collapsed into observations, or a full ``AxisSpec``.
        axis_norm: axes along which the reference mean is taken; defaults to ``axis``.
        axis_pool: axes the TSS is averaged over; defaults to ``axis_norm``.
        degenerate: score for cells with zero TSS and a non-exact
            prediction, ``"zero"`` or ``"neg-inf"``. Exact predictions
            always score 1.

    Returns:
        ScoreMap over the axes not in ``axis``.

    Example:
        >>> import numpy as np
        >>> y = np.array([[1.0, 2.0], [3.0, 4.0]])
        >>> float(dim_r2(y, y, axis=[0, 1]))
        1.0
    """
    fill = _fill_value(degenerate)
    spec = axis if isinstance(axis, (AxisSpec, ResolvedSpec)) else AxisSpec(axis, axis_norm, axis_pool)
    y, yhat = _pair(y_true, y_pred)
    resolved = _resolved_for(spec, y)
    dec = decompose(y, yhat, resolved)

    if y.axis_names is None:
        rss = dec.rss.with_names([f"axis{i}" for i in resolved.output_axes])
        tss = dec.tss.with_names([f"axis{i}" for i in resolved.tss_axes])
    else:
        rss, tss = dec.rss, dec.tss
    tss_b = broadcast_combine(rss.map(np.zeros_like), tss, "add")

    scores, mask = _ratio_scores(rss.array, tss_b.array, zero_threshold(y.array), fill)
    out_names = None if y.axis_names is None else rss.axis_names
    return ScoreMap(Tensor(scores, axis_names=out_names), "dim-r2", resolved, mask)


# --- conventional per-channel metrics -------------------------------------------

def _vectors(y_true, y_pred, min_len: int = 2) -> tuple[np.ndarray, np.ndarray]:
    y, yhat = _pair(y_true, y_pred)
    if y.rank != 1:
        raise RankError(f"expected rank-1 inputs, got shape {y.shape}")
    if y.size < min_len:
        raise DegenerateInputError(f"need at least {min_len} observations, got {y.size}")
    return y.array, yhat.array


def _channels(y_true, y_pred, channel_axis: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Return (observations, channels) arrays for rank-2 inputs."""
    y, yhat = _pair(y_true, y_pred)
    if y.rank != 2:
        raise RankError(
            f"conventional per-channel metrics support at most 2D input "
            f"(observations x channels); got rank {y.rank}. Use dim_r2 or reshape explicitly.")
    ch = y.axis_index(channel_axis)
    ya, yha = y.array, yhat.array
    if ch == 0:
        ya, yha = ya.T, yha.T
    if ya.shape[0] < 2:
        raise DegenerateInputError(f"need at least 2 observations per channel, got {ya.shape[0]}")
    return ya, yha


def _channel_map(scores: np.ndarray, name: str, degenerate_mask: np.ndarray) -> ScoreMap:
    spec = resolve(AxisSpec([0]), 2)
    return ScoreMap(Tensor(scores), name, spec, np.asarray(degenerate_mask, dtype=bool))


def r2_per_channel(y_true, y_pred, channel_axis: int = 1, *, degenerate: str = "zero") -> ScoreMap:
    ya, yha = _channels(y_true, y_pred, channel_axis)
    rss = np.sum((ya - yha) ** 2, axis=0)
    tss = np.sum((ya - ya.mean(axis=0)) ** 2, axis=0)
    scores, mask = _ratio_scores(rss, tss, zero_threshold(ya), _fill_value(degenerate))
    return _channel_map(scores, "r2", mask)


def r2_1d(y_true, y_pred, *, degenerate: str = "zero") -> float:
    """Conventional R2 of two equal-length vectors."""
    ya, yha = _vectors(y_true, y_pred)
    rss = np.sum((ya - yha) ** 2)
    tss = np.sum((ya - ya.mean()) ** 2)
    score, _ = _ratio_scores(rss, tss, zero_threshold(ya), _fill_value(degenerate))
    return float(score)


def mean_r2(y_true, y_pred, channel_axis: int = 1, *, degenerate: str = "zero") -> float:
    """Unweighted average of per-channel R2; rank-2 inputs only."""
    return float(np.mean(r2_per_channel(y_true, y_pred, channel_axis, degenerate=degenerate).array))


def _weighted(scores: np.ndarray, weights: np.ndarray, limit_terms: np.ndarray) -> float:
    total = weights.sum()
    if total <= 0:
        raise DegenerateInputError("every channel is constant; variance weights are all zero")
    terms = np.where(weights > 0, weights * scores, limit_terms)
    return float(terms.sum() / total)


def variance_weighted_mean_r2(y_true, y_pred, channel_axis: int = 1) -> float:
    """Per-channel R2 averaged with weights sum_i (y_ic - mean_c)^2.

    A constant channel has weight 0; its term takes the limiting value
    ``-rss_c`` so the average stays continuous.
    """
    ya, yha = _channels(y_true, y_pred, channel_axis)
    rss = np.sum((ya - yha) ** 2, axis=0)
    var = np.sum((ya - ya.mean(axis=0)) ** 2, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = 1.0 - rss / var
    return _weighted(r2, var, -rss)


def mse(y_true, y_pred) -> float:
    y, yhat = _pair(y_true, y_pred)
    return float(np.mean((y.array - yhat.array) ** 2))


def mae(y_true, y_pred) -> float:
    y, yhat = _pair(y_true, y_pred)
    return float(np.mean(np.abs(y.array - yhat.array)))


def _d2_scores(ya: np.ndarray, yha: np.ndarray) -> np.ndarray:
    num = np.sum(np.abs(ya - yha), axis=0)
    den = np.sum(np.abs(ya - ya.mean(axis=0)), axis=0)
    zero = den <= ZERO_TSS_RTOL * np.sum(np.abs(ya), axis=0)
    exact = num <= ZERO_TSS_RTOL * np.sum(np.abs(ya), axis=0)
    if np.any(zero & ~exact):
        raise DegenerateInputError("D2 absolute error is undefined: y is constant but yhat differs")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(zero, 1.0, 1.0 - num / den)


def d2_absolute_error(y_true, y_pred) -> float:
    """1 - sum|y - yhat| / sum|y - mean(y)|."""
    ya, yha = _vectors(y_true, y_pred)
    return float(_d2_scores(ya[:, None], yha[:, None])[0])


def d2_per_channel(y_true, y_pred, channel_axis: int = 1) -> ScoreMap:
    ya, yha = _channels(y_true, y_pred, channel_axis)
    scores = _d2_scores(ya, yha)
    return _channel_map(scores, "d2-ae", np.zeros(scores.shape, dtype=bool))


def mean_d2(y_true, y_pred, channel_axis: int = 1) -> float:
    return float(np.mean(d2_per_channel(y_true, y_pred, channel_axis).array))


def _ev_parts(ya, yha):
    resid = ya - yha
    res_var = np.mean((resid - resid.mean(axis=0)) ** 2, axis=0)
    y_var = np.mean((ya - ya.mean(axis=0)) ** 2, axis=0)
    return res_var, y_var


def ev_per_channel(y_true, y_pred, channel_axis: int = 1, *, degenerate: str = "zero") -> ScoreMap:
    ya, yha = _channels(y_true, y_pred, channel_axis)
    res_var, y_var = _ev_parts(ya, yha)
    scores, mask = _ratio_scores(res_var, y_var, zero_threshold(ya), _fill_value(degenerate))
    return _channel_map(scores, "ev", mask)


def explained_variance(y_true, y_pred, *, degenerate: str = "zero") -> float:
    """1 - Var(y - yhat) / Var(y); blind to additive bias."""
    ya, yha = _vectors(y_true, y_pred)
    res_var, y_var = _ev_parts(ya, yha)
    score, _ = _ratio_scores(res_var, y_var, zero_threshold(ya), _fill_value(degenerate))
    return float(score)


def mean_ev(y_true, y_pred, channel_axis: int = 1, *, degenerate: str = "zero") -> float:
    return float(np.mean(ev_per_channel(y_true, y_pred, channel_axis, degenerate=degenerate).array))


def variance_weighted_ev(y_true, y_pred, channel_axis: int = 1) -> float:
    ya, yha = _channels(y_true, y_pred, channel_axis)
    res_var, y_var = _ev_parts(ya, yha)
    with np.errstate(divide="ignore", invalid="ignore"):
        ev = 1.0 - res_var / y_var
    return _weighted(ev, y_var, -res_var)


def _corr_scores(ya, yha):
    dy = ya - ya.mean(axis=0)
    dh = yha - yha.mean(axis=0)
    sy = np.sqrt(np.sum(dy ** 2, axis=0))
    sh = np.sqrt(np.sum(dh ** 2, axis=0))
    tiny = ZERO_TSS_RTOL * (np.sqrt(np.sum(ya ** 2, axis=0)) + np.sqrt(np.sum(yha ** 2, axis=0)))
    if np.any(sy <= tiny) or np.any(sh <= tiny):
        raise DegenerateInputError("correlation is undefined for a constant series")
    return np.sum(dy * dh, axis=0) / (sy * sh)


def pearson_corr(y_true, y_pred) -> float:
    ya, yha = _vectors(y_true, y_pred)
    return float(_corr_scores(ya[:, None], yha[:, None])[0])


def corr_per_channel(y_true, y_pred, channel_axis: int = 1) -> ScoreMap:
    ya, yha = _channels(y_true, y_pred, channel_axis)
    scores = _corr_scores(ya, yha)
    return _channel_map(scores, "corr", np.zeros(scores.shape, dtype=bool))


def mean_corr(y_true, y_pred, channel_axis: int = 1) -> float:
    return float(np.mean(corr_per_channel(y_true, y_pred, channel_axis).array))
