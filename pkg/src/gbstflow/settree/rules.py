"""Set-compatible split rules and their attention sets, on plain packet collections."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..flowmodel import N_FEATURES, PacketRecord, record_to_numbers
from .operators import SetOperator, eval_statistic, item_support

DEFAULT_ATTENTION_WINDOW = 5


@dataclass(frozen=True)
class SplitRule:
    feature: int
    op: SetOperator
    theta: float
    attention_ref: int = 0
    use_complement: bool = False

    def __post_init__(self):
        if not 0 <= self.feature < N_FEATURES:
            raise ValueError(f"feature index {self.feature} out of range")
        if self.attention_ref < 0:
            raise ValueError("attention_ref must be >= 0")
        if self.attention_ref == 0 and self.use_complement:
            raise ValueError("the original input set has no complement")


def _column(packets: Sequence[PacketRecord], feature: int) -> np.ndarray:
    return np.array([record_to_numbers(p)[feature] for p in packets], dtype=np.float64)


def eval_split(rule: SplitRule, packets: Sequence[PacketRecord]) -> bool:
    """True iff the rule's statistic over `packets` reaches theta; empty sets are False."""
    if not packets:
        return False
    return eval_statistic(rule.op, _column(packets, rule.feature)) >= rule.theta


def attention_set(rule: SplitRule, packets: Sequence[PacketRecord]):
    """Split `packets` into (A, A_bar): the items supporting the rule and the rest."""
    if not packets:
        return (), ()
    inside = item_support(rule.op, rule.theta, _column(packets, rule.feature), len(packets))
    a = tuple(p for p, keep in zip(packets, inside) if keep)
    a_bar = tuple(p for p, keep in zip(packets, inside) if not keep)
    return a, a_bar


def resolve_input(path_context, original, ref: int, complement: bool = False):
    """Pick a node's input set.

    `path_context` lists the (A, A_bar) pairs of the ancestors on the decision
    path, most recent first.  ``ref == 0`` selects `original`; ``ref == h``
    the h-th most recent ancestor's A, or its A_bar when `complement` is set.
    """
    if ref == 0:
        return original
    if not 1 <= ref <= len(path_context):
        raise IndexError(f"attention reference {ref} outside the available window of {len(path_context)}")
    a, a_bar = path_context[ref - 1]
    return a_bar if complement else a
