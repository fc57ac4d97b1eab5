"""Set statistics of the form |F|^-beta * sum_{p in F} (p_j)^alpha and their limit cases."""
from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

# additive shift keeping reciprocals and logarithms finite on zero-valued features
EPS = 1e-9


class SetOperator(enum.Enum):
    COUNT = "count"
    SUM = "sum"
    MEAN = "mean"
    INV_HARMONIC_MEAN = "inv_harmonic_mean"
    SECOND_MOMENT_MEAN = "second_moment_mean"
    GEOMETRIC_MEAN = "geometric_mean"
    MIN = "min"
    MAX = "max"

    @property
    def alpha(self) -> float:
        return _ALPHA_BETA[self][0]

    @property
    def beta(self) -> int:
        return _ALPHA_BETA[self][1]

    @property
    def is_power(self) -> bool:
        """True for the operators given directly by a finite power alpha."""
        return self in _POWER_KIND

    @property
    def position(self) -> int:
        return _POSITION[self]


_ALPHA_BETA = {
    SetOperator.COUNT: (0.0, 0),
    SetOperator.SUM: (1.0, 0),
    SetOperator.MEAN: (1.0, 1),
    SetOperator.INV_HARMONIC_MEAN: (-1.0, 1),
    SetOperator.SECOND_MOMENT_MEAN: (2.0, 1),
    # limits: alpha -> 0 (log domain) and alpha -> -inf / +inf
    SetOperator.GEOMETRIC_MEAN: (0.0, 1),
    SetOperator.MIN: (-math.inf, 1),
    SetOperator.MAX: (math.inf, 1),
}

ALL_OPERATORS: tuple[SetOperator, ...] = tuple(SetOperator)
_POSITION = {op: i for i, op in enumerate(ALL_OPERATORS)}

# which per-item transform gets summed for each operator
IDENTITY, RECIPROCAL, SQUARE, LOG = "identity", "reciprocal", "square", "log"
TRANSFORMS = (IDENTITY, RECIPROCAL, SQUARE, LOG)
_SUM_KIND = {
    SetOperator.SUM: IDENTITY,
    SetOperator.MEAN: IDENTITY,
    SetOperator.INV_HARMONIC_MEAN: RECIPROCAL,
    SetOperator.SECOND_MOMENT_MEAN: SQUARE,
    SetOperator.GEOMETRIC_MEAN: LOG,
}
_POWER_KIND = {
    SetOperator.SUM: IDENTITY,
    SetOperator.MEAN: IDENTITY,
    SetOperator.INV_HARMONIC_MEAN: RECIPROCAL,
    SetOperator.SECOND_MOMENT_MEAN: SQUARE,
}


def transform(kind: str, v: np.ndarray) -> np.ndarray:
    if kind == IDENTITY:
        return v
    if kind == RECIPROCAL:
        return 1.0 / (v + EPS)
    if kind == SQUARE:
        return v * v
    if kind == LOG:
        return np.log(v + EPS)
    raise ValueError(f"unknown transform {kind!r}")


def parse_operator(name: str) -> SetOperator:
    try:
        return SetOperator(name)
    except ValueError:
        raise ValueError(f"unknown set operator {name!r}; expected one of "
                         f"{', '.join(op.value for op in SetOperator)}") from None


def segment_statistics(ops, sorted_values, member, seg, starts, n, transformed=None):
    """Evaluate `ops` for every segment of a flat, per-segment ascending array.

    `member` (bool, same shape as `sorted_values`, or None for all) selects the
    items of each set; non-members contribute exact zeros to the sequential
    accumulation, so every sum equals the left-to-right sum of the members in
    ascending value order.  `transformed(kind)` may supply precomputed
    transforms of `sorted_values`.  Returns an (len(ops), n) array with NaN for
    empty sets.
    """
    if transformed is None:
        def transformed(kind):
            return transform(kind, sorted_values)

    if member is None:
        cnt = np.bincount(seg, minlength=n).astype(np.float64)
    else:
        cnt = np.bincount(seg, weights=member, minlength=n)
    sums: dict[str, np.ndarray] = {}

    def seg_sum(kind):
        if kind not in sums:
            w = transformed(kind)
            if member is not None:
                w = np.where(member, w, 0.0)
            sums[kind] = np.bincount(seg, weights=w, minlength=n)
        return sums[kind]

    def extreme(x, reduce, fill):
        if member is not None:
            x = np.where(member, x, fill)
        return reduce.reduceat(x, starts) if len(x) else np.full(n, fill)

    def seg_mean(kind):
        # a mean lies between the extrema; clamping removes rounding noise such as
        # mean(x, x, x) != x, which would otherwise make constant sets look distinct
        w = transformed(kind)
        lo = extreme(w, np.minimum, np.inf)
        hi = extreme(w, np.maximum, -np.inf)
        return np.minimum(np.maximum(seg_sum(kind) / cnt, lo), hi)

    out = np.empty((len(ops), n), dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        for r, op in enumerate(ops):
            if op is SetOperator.COUNT:
                out[r] = cnt
            elif op is SetOperator.SUM:
                out[r] = seg_sum(IDENTITY)
            elif op is SetOperator.GEOMETRIC_MEAN:
                out[r] = np.exp(seg_mean(LOG))
            elif op is SetOperator.MIN:
                out[r] = extreme(sorted_values, np.minimum, np.inf)
            elif op is SetOperator.MAX:
                out[r] = extreme(sorted_values, np.maximum, -np.inf)
            else:
                out[r] = seg_mean(_SUM_KIND[op])
    out[:, cnt == 0] = np.nan
    return out


def eval_statistic(op: SetOperator, values: Sequence[float]) -> float:
    """Value of the set statistic `op` over a non-empty collection of values >= 0.

    Accumulation runs over the values sorted ascending, so the result does not
    depend on the order of `values`, bit for bit.
    """
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise ValueError("set statistic of an empty set is undefined")
    seg = np.zeros(v.size, dtype=np.intp)
    return float(segment_statistics((op,), v, None, seg, np.zeros(1, dtype=np.intp), 1)[0, 0])


def item_support(op: SetOperator, theta, values: np.ndarray, set_size) -> np.ndarray:
    """Per-item attention membership: (p_j)^alpha >= theta / |F|^(1-beta).

    For the limit operators (min, max, geometric mean) membership is p_j >= theta.
    `theta` and `set_size` broadcast against `values`.
    """
    if op is SetOperator.COUNT:
        return np.broadcast_to(set_size >= theta, np.shape(values)).copy()
    if not op.is_power:
        return values >= theta
    lhs = transform(_POWER_KIND[op], values)
    if op.beta == 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            return lhs >= theta / set_size
    return lhs >= theta
