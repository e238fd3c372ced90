"""Dimensional R2 score for tensors of any rank, plus conventional baselines."""
from .axes import AxisSpec, ResolvedSpec, resolve
from .errors import (AxisError, BroadcastError, ConfigError, DegenerateInputError, DimR2Error,
                     FormatError, RankError, ShapeError, SpecError)
from .metrics import (Decomposition, ScoreMap, corr_per_channel, d2_absolute_error,
                      d2_per_channel, decompose, dim_r2, ev_per_channel, explained_variance,
                      mae, mean_corr, mean_d2, mean_ev, mean_r2, mse, pearson_corr,
                      r2_1d, r2_per_channel, variance_weighted_ev, variance_weighted_mean_r2)
from .tensor import Tensor, as_tensor, broadcast_combine, reduce_mean, reduce_sum

__version__ = "0.1.0"
