"""Random (y, yhat, spec) instances shared by the property and acceptance tests."""
import numpy as np

from dimr2.axes import AxisSpec
from dimr2.tensor import Tensor


def random_subset(rng, rank, nonempty=True):
    while True:
        picked = [i for i in range(rank) if rng.random() < 0.5]
        if picked or not nonempty:
            return picked


def random_spec(rng, rank):
    axis = random_subset(rng, rank)
    norm = random_subset(rng, rank)
    extra = random_subset(rng, rank, nonempty=False)
    pool = sorted(set(norm) | set(extra))
    # half the time leave defaults in play
    if rng.random() < 0.25:
        return AxisSpec(axis)
    if rng.random() < 0.25 and pool == norm:
        return AxisSpec(axis, norm)
    return AxisSpec(axis, norm, pool)


def random_pair(rng, rank, max_extent=6, min_extent=1):
    shape = tuple(int(s) for s in rng.integers(min_extent, max_extent + 1, size=rank))
    offsets = rng.normal(0, 3, size=shape[-1:]) if rank else 0.0
    scales = rng.uniform(0.2, 5, size=shape[-1:]) if rank else 1.0
    y = rng.normal(size=shape) * scales + offsets
    yhat = y + rng.normal(size=shape) * rng.uniform(0.05, 2.0)
    return y, yhat


def random_case(rng, max_rank=4, max_extent=6):
    rank = int(rng.integers(1, max_rank + 1))
    y, yhat = random_pair(rng, rank, max_extent)
    return Tensor(y), Tensor(yhat), random_spec(rng, rank)
