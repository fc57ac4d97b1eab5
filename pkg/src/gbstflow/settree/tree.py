"""Greedy second-order Set-Tree construction and routing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ..flowmodel import N_FEATURES, FlowStream
from .operators import ALL_OPERATORS, SetOperator
from .rules import DEFAULT_ATTENTION_WINDOW, SplitRule
from .table import NodeView, PacketTable

@dataclass(frozen=True)
class Leaf:
    value: float


@dataclass(frozen=True)
class Split:
    rule: SplitRule
    on_true: "Node"
    on_false: "Node"
    gain: float = 0.0


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 10
    attention_window: int = DEFAULT_ATTENTION_WINDOW
    reg_lambda: float = 1.0
    min_samples_leaf: int = 1
    min_gain: float = 0.0
    # up to this many distinct statistic values every midpoint is a candidate
    exact_threshold_limit: int = 1024
    n_quantile_cuts: int = 256
    operators: tuple[SetOperator, ...] = ALL_OPERATORS

    def __post_init__(self):
        if self.max_depth < 0 or self.attention_window < 0:
            raise ValueError("max_depth and attention_window must be >= 0")
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be >= 0")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        # candidate enumeration relies on the canonical operator order for tie-breaking
        object.__setattr__(self, "operators",
                           tuple(op for op in ALL_OPERATORS if op in set(self.operators)))


@dataclass
class SearchStats:
    """Instrumentation of the split search: one entry per searched node."""

    depths: list[int] = field(default_factory=list)
    input_operator_pairs: list[int] = field(default_factory=list)
    candidates: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class _Best:
    gain: float
    ref: int
    complement: bool
    feature: int
    op: SetOperator
    theta: float


def _pick_theta(lo: float, hi: float) -> float:
    if lo == -np.inf:
        return hi
    mid = lo + (hi - lo) / 2.0
    return hi if mid <= lo else mid


def _scan(stats: np.ndarray, g: np.ndarray, h: np.ndarray, config: TreeConfig):
    """Best threshold per candidate row; returns (gain, row, theta) or None.

    Rows of `stats` are per-sample statistics (NaN = empty input set, always
    routed False).  The false side holds the samples with statistic < theta.
    """
    n = stats.shape[1]
    s = np.where(np.isnan(stats), -np.inf, stats)
    order = np.argsort(s, axis=1, kind="stable")
    ss = np.take_along_axis(s, order, axis=1)
    cg = np.cumsum(g[order], axis=1)
    ch = np.cumsum(h[order], axis=1)
    lam = config.reg_lambda
    gl, hl = cg[:, :-1], ch[:, :-1]
    gt, ht = cg[:, -1:], ch[:, -1:]
    gr, hr = gt - gl, ht - hl
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - gt * gt / (ht + lam)

    boundary = ss[:, :-1] < ss[:, 1:]
    left = np.arange(1, n)
    valid = boundary & (left >= config.min_samples_leaf) & (n - left >= config.min_samples_leaf)
    n_distinct = boundary.sum(axis=1) + 1
    for r in np.nonzero(n_distinct > config.exact_threshold_limit)[0]:
        cuts = np.flatnonzero(boundary[r])
        targets = (np.arange(1, config.n_quantile_cuts + 1) * (n / (config.n_quantile_cuts + 1))).astype(np.intp)
        keep = np.unique(cuts[np.minimum(np.searchsorted(cuts, targets - 1), len(cuts) - 1)])
        restricted = np.zeros(n - 1, dtype=bool)
        restricted[keep] = True
        valid[r] &= restricted
    if not valid.any():
        return None
    gain = np.where(valid & ~np.isnan(gain), gain, -np.inf)
    flat = int(np.argmax(gain))
    r, i = divmod(flat, n - 1)
    if gain[r, i] == -np.inf:
        return None
    return float(gain[r, i]), r, _pick_theta(float(ss[r, i]), float(ss[r, i + 1]))


def count_candidate_inputs(depth: int, attention_window: int) -> int:
    """Distinct input sets a node at `depth` can test: F plus A and A_bar per ancestor."""
    return 1 + 2 * min(depth, attention_window)


class _Grower:
    def __init__(self, table: PacketTable, grad: np.ndarray, hess: np.ndarray,
                 config: TreeConfig, stats: Optional[SearchStats]):
        self.table = table
        self.g = np.asarray(grad, dtype=np.float64)
        self.h = np.asarray(hess, dtype=np.float64)
        self.config = config
        self.stats = stats

    def grow(self, view: NodeView, context: tuple, depth: int) -> Node:
        cfg = self.config
        g, h = self.g[view.flows], self.h[view.flows]
        value = float(-g.sum() / (h.sum() + cfg.reg_lambda))
        if depth >= cfg.max_depth or view.n < 2 * cfg.min_samples_leaf:
            return Leaf(value)
        best = self.search(view, context, g, h, depth)
        if best is None or not best.gain > cfg.min_gain:
            return Leaf(value)

        mask = None if best.ref == 0 else context[best.ref - 1][int(best.complement)]
        stat = self.table.statistics(view, best.feature, (best.op,), mask)[0]
        with np.errstate(invalid="ignore"):
            goes_true = stat >= best.theta
        rule = SplitRule(best.feature, best.op, best.theta, best.ref, best.complement)
        attended = self.table.attention(view, best.feature, best.op, best.theta, mask)
        child_context = (attended,) + context[: cfg.attention_window - 1] if cfg.attention_window else ()
        on_true = self.grow(self.table.view(view.flows[goes_true]), child_context, depth + 1)
        on_false = self.grow(self.table.view(view.flows[~goes_true]), child_context, depth + 1)
        return Split(rule, on_true, on_false, best.gain)

    def search(self, view: NodeView, context: tuple, g, h, depth: int) -> Optional[_Best]:
        cfg = self.config
        inputs = [(0, False, None)]
        for ref, (a, a_bar) in enumerate(context, start=1):
            inputs.append((ref, False, a))
            inputs.append((ref, True, a_bar))
        # count ignores the feature value: it is scored once, under feature 0
        feature_ops = [cfg.operators] + [
            tuple(op for op in cfg.operators if op is not SetOperator.COUNT)
        ] * (N_FEATURES - 1)
        if self.stats is not None:
            self.stats.depths.append(depth)
            self.stats.input_operator_pairs.append(len(inputs) * len(cfg.operators))
            self.stats.candidates.append(len(inputs) * sum(len(o) for o in feature_ops))

        best: Optional[_Best] = None
        for ref, complement, mask in inputs:
            for feature, ops in enumerate(feature_ops):
                if not ops:
                    continue
                stats = self.table.statistics(view, feature, ops, mask)
                found = _scan(stats, g, h, cfg)
                if found is None:
                    continue
                gain, row, theta = found
                if best is None or gain > best.gain:
                    best = _Best(gain, ref, complement, feature, ops[row], theta)
        return best


def grow_tree(table: PacketTable, grad, hess, config: TreeConfig = TreeConfig(),
              stats: Optional[SearchStats] = None) -> Node:
    """Fit one Set-Tree to per-flow gradients/hessians over a prepared table."""
    if table.n_flows < 1:
        raise ValueError("cannot fit a tree on zero samples")
    return _Grower(table, grad, hess, config, stats).grow(table.view(), (), 0)


def fit_tree(samples: Sequence[tuple[FlowStream, float, float]], config: TreeConfig = TreeConfig(),
             stats: Optional[SearchStats] = None) -> Node:
    """Fit one Set-Tree to (flow, gradient, hessian) samples."""
    if not samples:
        raise ValueError("cannot fit a tree on zero samples")
    flows = [s[0] for s in samples]
    grad = np.array([s[1] for s in samples], dtype=np.float64)
    hess = np.array([s[2] for s in samples], dtype=np.float64)
    return grow_tree(PacketTable(flows), grad, hess, config, stats)


def _route(node: Node, table: PacketTable, view: NodeView, context: tuple, window: int, out: np.ndarray):
    if view.n == 0:
        return
    if isinstance(node, Leaf):
        out[view.flows] = node.value
        return
    rule = node.rule
    if rule.attention_ref > len(context):
        raise ValueError(f"split references ancestor {rule.attention_ref} but only {len(context)} are available")
    mask = None if rule.attention_ref == 0 else context[rule.attention_ref - 1][int(rule.use_complement)]
    stat = table.statistics(view, rule.feature, (rule.op,), mask)[0]
    with np.errstate(invalid="ignore"):
        goes_true = stat >= rule.theta
    attended = table.attention(view, rule.feature, rule.op, rule.theta, mask)
    child_context = (attended,) + context[: window - 1] if window else ()
    _route(node.on_true, table, table.view(view.flows[goes_true]), child_context, window, out)
    _route(node.on_false, table, table.view(view.flows[~goes_true]), child_context, window, out)


def predict_table(tree: Node, table: PacketTable) -> np.ndarray:
    """Leaf value reached by every flow of `table`."""
    out = np.empty(table.n_flows, dtype=np.float64)
    _route(tree, table, table.view(), (), _max_ref(tree), out)
    return out


def predict_tree(tree: Node, flow: FlowStream) -> float:
    return float(predict_table(tree, PacketTable([flow]))[0])


def _max_ref(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return max(node.rule.attention_ref, _max_ref(node.on_true), _max_ref(node.on_false))


def iter_splits(node: Node) -> Iterable[Split]:
    if isinstance(node, Split):
        yield node
        yield from iter_splits(node.on_true)
        yield from iter_splits(node.on_false)


def tree_depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.on_true), tree_depth(node.on_false))
