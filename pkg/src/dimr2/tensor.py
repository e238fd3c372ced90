"""Dense float64 n-dimensional tensor with named axes.

The tensor is a thin immutable wrapper around a C-contiguous numpy array.
Reductions always move the reduced axes to the innermost position and sum
each contiguous row with numpy's blocked pairwise summation, so the result
for a given input is bit-reproducible run to run regardless of which axes
are reduced or how the caller's array was laid out in memory.
"""
from __future__ import annotations

from math import prod
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import AxisError, BroadcastError

AxisRef = Union[int, str]

OPS: dict[str, Callable] = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.divide,
}


class Tensor:
    """Immutable dense real tensor.

    Args:
        values: array-like of numbers, or a flat sequence when ``shape`` is given.
        shape: optional extents; ``values`` is then read as row-major flat data.
        axis_names: optional distinct labels, one per axis.

    Raises:
        ValueError: on zero extents, size mismatch or bad axis names.
    """

    __slots__ = ("_array", "_names")

    def __init__(self, values, shape: Sequence[int] | None = None,
                 axis_names: Sequence[str] | None = None):
        arr = np.array(values, dtype=np.float64, order="C")
        if shape is not None:
            shape = tuple(int(s) for s in shape)
            if arr.size != prod(shape):
                raise ValueError(
                    f"data has {arr.size} values but shape {shape} needs {prod(shape)}")
            arr = arr.reshape(shape)
        if any(s < 1 for s in arr.shape):
            raise ValueError(f"zero-extent axes are not allowed: shape {arr.shape}")
        if axis_names is not None:
            axis_names = tuple(str(n) for n in axis_names)
            if len(axis_names) != arr.ndim:
                raise ValueError(
                    f"{len(axis_names)} axis names given for a rank-{arr.ndim} tensor")
            if len(set(axis_names)) != len(axis_names):
                raise ValueError(f"duplicate axis names: {axis_names}")
        arr.setflags(write=False)
        self._array = arr
        self._names = axis_names

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the underlying array."""
        return self._array

    @property
    def shape(self) -> tuple[int, ...]:
        return self._array.shape

    @property
    def rank(self) -> int:
        return self._array.ndim

    @property
    def size(self) -> int:
        return self._array.size

    @property
    def axis_names(self) -> tuple[str, ...] | None:
        return self._names

    @property
    def data(self) -> tuple[float, ...]:
        """Row-major flat values as Python floats."""
        return tuple(self._array.ravel().tolist())

    def item(self) -> float:
        if self.size != 1:
            raise ValueError(f"item() needs a single-cell tensor, got shape {self.shape}")
        return float(self._array.reshape(-1)[0])

    def with_names(self, axis_names: Sequence[str] | None) -> "Tensor":
        return Tensor(self._array, axis_names=axis_names)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Tensor":
        """Apply an elementwise function, keeping axis names."""
        return Tensor(fn(self._array), axis_names=self._names)

    def axis_index(self, ref: AxisRef) -> int:
        return axis_index(ref, self.rank, self._names)

    def __array__(self, dtype=None, copy=None):
        return self._array if dtype is None else self._array.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return (self.shape == other.shape and self._names == other._names
                and bool(np.array_equal(self._array, other._array)))

    __hash__ = None

    def __repr__(self):
        names = f", axis_names={list(self._names)}" if self._names is not None else ""
        return f"Tensor(shape={self.shape}{names})"


def as_tensor(x, axis_names: Sequence[str] | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x if axis_names is None else x.with_names(axis_names)
    return Tensor(x, axis_names=axis_names)


def axis_index(ref: AxisRef, rank: int, names: Sequence[str] | None = None) -> int:
    """Resolve one axis reference to a zero-based index.

    Names win over integer parsing: a string that matches an axis name is that
    axis even if it also looks like a number.
    """
    if isinstance(ref, str):
        if names is not None and ref in names:
            return list(names).index(ref)
        if ref.isdigit():
            ref = int(ref)
        else:
            raise AxisError(f"unknown axis name {ref!r}; available: {list(names or [])}")
    if isinstance(ref, (bool, np.bool_)) or not isinstance(ref, (int, np.integer)):
        raise AxisError(f"axis reference must be an int or a name, got {ref!r}")
    if not 0 <= ref < rank:
        raise AxisError(f"axis {ref} out of range for rank {rank}")
    return int(ref)


def normalize_axes(axes: Iterable[AxisRef] | AxisRef, rank: int,
                   names: Sequence[str] | None = None) -> tuple[int, ...]:
    """Turn axis references into a sorted tuple of distinct indices."""
    if isinstance(axes, (int, str, np.integer)):
        axes = [axes]
    idx = [axis_index(a, rank, names) for a in axes]
    if len(set(idx)) != len(idx):
        raise AxisError(f"duplicate axes in {list(axes)}")
    return tuple(sorted(idx))


def _kept_names(t: Tensor, axes: tuple[int, ...]):
    if t.axis_names is None:
        return None
    return tuple(n for i, n in enumerate(t.axis_names) if i not in axes)


def reduce_sum(t: Tensor, axes) -> Tensor:
    """Sum over ``axes``; the result has the remaining axes in original order."""
    axes = normalize_axes(axes, t.rank, t.axis_names)
    kept = [i for i in range(t.rank) if i not in axes]
    moved = np.ascontiguousarray(np.transpose(t.array, kept + list(axes)))
    out_shape = tuple(t.shape[i] for i in kept)
    rows = moved.reshape(prod(out_shape), -1)
    return Tensor(rows.sum(axis=1).reshape(out_shape), axis_names=_kept_names(t, axes))


def reduce_mean(t: Tensor, axes) -> Tensor:
    axes = normalize_axes(axes, t.rank, t.axis_names)
    count = prod(t.shape[i] for i in axes)
    total = reduce_sum(t, axes)
    return Tensor(total.array / count, axis_names=total.axis_names)


def _aligned_by_name(a: Tensor, b: Tensor):
    union = list(a.axis_names) + [n for n in b.axis_names if n not in a.axis_names]
    extents = {}
    for t in (a, b):
        for n, s in zip(t.axis_names, t.shape):
            if extents.setdefault(n, s) != s:
                raise BroadcastError(
                    f"axis {n!r} has extent {extents[n]} in one operand and {s} in the other")

    def lift(t: Tensor) -> np.ndarray:
        present = [n for n in union if n in t.axis_names]
        arr = np.transpose(t.array, [t.axis_names.index(n) for n in present])
        shape = [extents[n] if n in t.axis_names else 1 for n in union]
        return arr.reshape(shape)

    return lift(a), lift(b), tuple(union)


def broadcast_combine(a: Tensor, b: Tensor, op: str | Callable = "sub") -> Tensor:
    """Apply an elementwise binary op after aligning the operands' axes.

    When both operands carry axis names (a rank-0 tensor always qualifies),
    axes are matched by name and the result axes are ``a``'s followed by the
    names only ``b`` has. Otherwise alignment is by trailing position with
    the usual stretching of missing or unit axes.

    Raises:
        BroadcastError: a shared axis has different extents.
    """
    fn = OPS[op] if isinstance(op, str) else op
    a_named = a.axis_names is not None or a.rank == 0
    b_named = b.axis_names is not None or b.rank == 0
    if a_named and b_named and (a.axis_names or b.axis_names):
        x, y, names = _aligned_by_name(
            a if a.axis_names is not None else a.with_names(()),
            b if b.axis_names is not None else b.with_names(()))
        with np.errstate(divide="ignore", invalid="ignore"):
            return Tensor(fn(x, y), axis_names=names)
    try:
        shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise BroadcastError(f"cannot broadcast shapes {a.shape} and {b.shape}") from exc
    names = None
    for t in (a, b):
        if t.axis_names is not None and t.shape == shape:
            names = t.axis_names
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        return Tensor(fn(a.array, b.array), axis_names=names)
