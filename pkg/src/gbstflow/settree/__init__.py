"""Set-Trees: decision trees whose splits test statistics over sets of packets."""
from .operators import ALL_OPERATORS, EPS, SetOperator, eval_statistic, parse_operator
from .rules import DEFAULT_ATTENTION_WINDOW, SplitRule, attention_set, eval_split, resolve_input
from .table import PacketTable
from .tree import (
    Leaf,
    Node,
    SearchStats,
    Split,
    TreeConfig,
    count_candidate_inputs,
    fit_tree,
    grow_tree,
    iter_splits,
    predict_table,
    predict_tree,
    tree_depth,
)

__all__ = [
    "ALL_OPERATORS", "EPS", "SetOperator", "eval_statistic", "parse_operator",
    "DEFAULT_ATTENTION_WINDOW", "SplitRule", "attention_set", "eval_split", "resolve_input",
    "PacketTable", "Leaf", "Node", "SearchStats", "Split", "TreeConfig", "count_candidate_inputs",
    "fit_tree", "grow_tree", "iter_splits", "predict_table", "predict_tree", "tree_depth",
]
