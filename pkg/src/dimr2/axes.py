"""Resolution of the (axis, axis_norm, axis_pool) argument triple."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import SpecError
from .tensor import AxisRef, normalize_axes


@dataclass(frozen=True)
class AxisSpec:
    """User-facing axis arguments; entries are indices or axis names.

    ``axis_norm`` defaults to ``axis`` and ``axis_pool`` defaults to
    ``axis_norm``.
    """

    axis: Sequence[AxisRef] | AxisRef
    axis_norm: Sequence[AxisRef] | AxisRef | None = None
    axis_pool: Sequence[AxisRef] | AxisRef | None = None


@dataclass(frozen=True)
class ResolvedSpec:
    """Concrete axis sets for one tensor rank, as sorted index tuples."""

    rank: int
    axis: tuple[int, ...]
    axis_norm: tuple[int, ...]
    axis_pool: tuple[int, ...]
    pool_minus_axis: tuple[int, ...]
    output_axes: tuple[int, ...]
    tss_axes: tuple[int, ...]
    names: tuple[str, ...] | None = None

    def labels(self, axes: tuple[int, ...]) -> list:
        """Axis names for ``axes`` when known, else the indices."""
        if self.names is None:
            return list(axes)
        return [self.names[i] for i in axes]

    def to_spec(self) -> AxisSpec:
        return AxisSpec(self.axis, self.axis_norm, self.axis_pool)


def _as_list(x):
    if x is None:
        return None
    if isinstance(x, (str, int)):
        return [x]
    return list(x)


def resolve(spec: AxisSpec | ResolvedSpec, rank: int,
            names: Sequence[str] | None = None) -> ResolvedSpec:
    """Apply defaults, check ``axis_norm`` is a subset of ``axis_pool``, derive sets.

    Raises:
        SpecError: empty ``axis``/``axis_norm`` or the subset constraint fails.
        AxisError: unknown axis name or index.
    """
    if isinstance(spec, ResolvedSpec):
        spec = spec.to_spec()
    names = tuple(names) if names is not None else None

    axis_list = _as_list(spec.axis)
    if not axis_list:
        raise SpecError("axis must name at least one axis")
    axis = normalize_axes(axis_list, rank, names)

    norm_list = _as_list(spec.axis_norm)
    if norm_list is None:
        norm = axis
    elif not norm_list:
        raise SpecError("axis_norm must name at least one axis when given")
    else:
        norm = normalize_axes(norm_list, rank, names)

    pool_list = _as_list(spec.axis_pool)
    pool = norm if pool_list is None else normalize_axes(pool_list, rank, names)

    if not set(norm) <= set(pool):
        raise SpecError("norm must be subset of pool (axis-norm must be a subset of axis-pool)")

    every = range(rank)
    pool_minus_axis = tuple(i for i in pool if i not in axis)
    output_axes = tuple(i for i in every if i not in axis)
    tss_axes = tuple(i for i in every if i not in axis and i not in pool)
    return ResolvedSpec(rank, axis, norm, pool, pool_minus_axis, output_axes, tss_axes, names)


def parse_axis_list(text: str | None) -> list[AxisRef] | None:
    """Parse ``"data,time"`` or ``"0,2"`` into axis references.

    Tokens stay strings; :func:`resolve` prefers a matching axis name and
    only falls back to reading digits as an index.
    """
    if text is None:
        return None
    tokens = [tok.strip() for tok in text.split(",")]
    if any(not tok for tok in tokens):
        raise SpecError(f"empty entry in axis list {text!r}")
    return tokens
